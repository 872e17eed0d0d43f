"""Free Helmholtz fundamental solution G(r, z) of -Δ - z² in d = 1, 2, 3.

G depends on x only through r = |x|:

    d = 1:  G = i/(2z) exp(i z r)
    d = 2:  G = i/4 H0(z r)                     (Hankel function, first kind)
    d = 3:  G = exp(i z r) / (4 π r)

In d = 2 the map z -> G is continued to the logarithmic cover of the punctured
plane.  A point on that cover is a :class:`SheetPoint`; sheet ``m`` means that
``log z = Log z + 2πi m`` with ``Log`` the principal branch (cut along the
negative real axis).  Sheet 0 contains the physical half plane Im z > 0.

Two Hankel evaluators live here.  :func:`hankel_h1` is the self-contained
scalar one (ascending series below a crossover radius, Hankel's asymptotic
expansion above it) and carries an error estimate.  The vectorised
:func:`green_array` used for matrix assembly calls :mod:`scipy.special`, and the
test-suite checks the two against each other.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import (
    AccuracyLoss,
    ConfigError,
    SingularDistance,
    UnsupportedSheet,
    ZeroArgument,
    ZeroSpectralParameter,
)

EULER_GAMMA = 0.57721566490153286061
LOG2 = math.log(2.0)
EPS = np.finfo(float).eps

#: Radius below which the ascending series is tried first.
CROSSOVER = 8.0
MIN_SERIES_TERMS = 30
MAX_SERIES_TERMS = 400
#: Largest |sheet| accepted in even dimension.
MAX_SHEET = 1
SUPPORTED_ORDERS = (0.0, 0.5, 1.0)


@dataclass(frozen=True)
class SheetPoint:
    """Spectral parameter ``value`` on Riemann sheet ``sheet`` (0 = principal)."""

    value: complex
    sheet: int = 0

    def __post_init__(self):
        v = complex(self.value)
        # drop a negative zero so that Log(z) on the negative real axis is +iπ
        object.__setattr__(self, "value", complex(v.real, v.imag + 0.0))
        object.__setattr__(self, "sheet", int(self.sheet))
        if self.value == 0:
            raise ZeroSpectralParameter("spectral parameter z = 0 is a singular point of G")

    def log(self) -> complex:
        return cmath.log(self.value) + 2j * math.pi * self.sheet


def as_sheet_point(z) -> SheetPoint:
    if isinstance(z, SheetPoint):
        return z
    return SheetPoint(complex(z), 0)


def check_dimension(d) -> int:
    if isinstance(d, bool) or int(d) != d or int(d) not in (1, 2, 3):
        raise ConfigError(f"dimension must be 1, 2 or 3, got {d!r}")
    return int(d)


def check_sheet(d: int, sheet: int) -> None:
    if d % 2 == 1:
        if sheet != 0:
            raise UnsupportedSheet(f"odd dimension d={d} has a single sheet, got sheet={sheet}")
    elif abs(sheet) > MAX_SHEET:
        raise UnsupportedSheet(f"sheet {sheet} outside implemented range |sheet| <= {MAX_SHEET}")


# ---------------------------------------------------------------------------
# scalar Hankel evaluator
# ---------------------------------------------------------------------------

def _series(order: float, zeta: complex, log_zeta: complex):
    """Ascending series for H^(1)_order; returns (H, J, abs_error)."""
    t = zeta * zeta / 4.0
    mt = -t
    if order == 0.5:
        half = cmath.exp(0.5 * (log_zeta - LOG2))  # (zeta/2)^(1/2) on the sheet
        a = 1.0 / math.gamma(1.5)   # k = 0 coefficient of J_{1/2}
        b = 1.0 / math.gamma(0.5)   # k = 0 coefficient of J_{-1/2}
        sj = sy = 0.0j
        mj = my = 0.0
        p = 1.0 + 0.0j
        for k in range(MAX_SERIES_TERMS):
            tj, ty = a * p, b * p
            sj += tj
            sy += ty
            mj += abs(tj)
            my += abs(ty)
            if k >= MIN_SERIES_TERMS and abs(tj) <= EPS * abs(sj) and abs(ty) <= EPS * abs(sy):
                break
            p *= mt
            a /= (k + 1) * (k + 1.5)
            b /= (k + 1) * (k + 0.5)
        J = half * sj
        Y = -sy / half
        err = EPS * (abs(half) * mj + my / abs(half)) * 4
        return J + 1j * Y, J, err

    if order == 0.0:
        c = 1.0
        harmonic = 0.0
        sj = 1.0 + 0.0j
        sy = 0.0j
        mj = 1.0
        my = 0.0
        p = 1.0 + 0.0j
        for k in range(1, MAX_SERIES_TERMS):
            p *= mt
            c /= k * k
            harmonic += 1.0 / k
            tj = c * p
            ty = -harmonic * tj
            sj += tj
            sy += ty
            mj += abs(tj)
            my += abs(ty)
            if k >= MIN_SERIES_TERMS and abs(tj) <= EPS * abs(sj) and abs(ty) <= EPS * max(abs(sy), 1e-300):
                break
        lead = log_zeta - LOG2 + EULER_GAMMA
        J = sj
        Y = (2.0 / math.pi) * (lead * sj + sy)
        err = EPS * (mj + (2.0 / math.pi) * (abs(lead) * mj + my)) * 4
        return J + 1j * Y, J, err

    if order == 1.0:
        half = zeta / 2.0
        c = 1.0  # 1 / (k! (k+1)!)
        psi_sum = -2.0 * EULER_GAMMA + 1.0  # psi(1) + psi(2)
        sj = 1.0 + 0.0j
        sy = psi_sum + 0.0j
        mj = 1.0
        my = abs(psi_sum)
        p = 1.0 + 0.0j
        for k in range(1, MAX_SERIES_TERMS):
            p *= mt
            c /= k * (k + 1)
            psi_sum += 1.0 / k + 1.0 / (k + 1)
            tj = c * p
            ty = psi_sum * tj
            sj += tj
            sy += ty
            mj += abs(tj)
            my += abs(ty)
            if k >= MIN_SERIES_TERMS and abs(tj) <= EPS * abs(sj) and abs(ty) <= EPS * abs(sy):
                break
        J = half * sj
        Y = -2.0 / (math.pi * zeta) + (2.0 / math.pi) * (log_zeta - LOG2) * J - half * sy / math.pi
        err = EPS * (
            abs(half) * mj * (1 + (2 / math.pi) * abs(log_zeta - LOG2))
            + 2.0 / (math.pi * abs(zeta))
            + abs(half) * my / math.pi
        ) * 4
        return J + 1j * Y, J, err

    raise ConfigError(f"unsupported Hankel order {order}")


def _asymptotic_pair(order: float, xi: complex):
    """Hankel expansions of H^(1) and H^(2) at xi with Re xi >= 0.

    Each divergent series is truncated at its smallest term; that term is the
    returned relative error estimate.
    """
    mu = 4.0 * order * order
    inv = 1.0 / xi
    s1 = s2 = 1.0 + 0.0j
    term = 1.0 + 0.0j
    prev = math.inf
    smallest = 0.0
    for k in range(1, 200):
        term = term * (mu - (2 * k - 1) ** 2) * inv / (8.0 * k)
        mag = abs(term)
        if mag == 0.0:
            smallest = 0.0
            break
        if mag >= prev:
            smallest = prev
            break
        s1 += term * 1j ** k
        s2 += term * (-1j) ** k
        prev = mag
        smallest = mag
        if mag < EPS * 1e-3:
            break
    pref = cmath.sqrt(2.0 / (math.pi * xi))
    phase = xi - order * math.pi / 2 - math.pi / 4
    h1 = pref * cmath.exp(1j * phase) * s1
    h2 = pref * cmath.exp(-1j * phase) * s2
    # the smallest term understates the error away from the real axis
    rel = max(10.0 * smallest, EPS)
    return h1, h2, rel


def _asymptotic(order: float, zeta: complex, sheet: int):
    """Large-argument evaluation of H^(1)_order on ``sheet``; returns (H, abs_error)."""
    if order == 0.5:
        log_zeta = cmath.log(zeta) + 2j * math.pi * sheet
        root = cmath.exp(0.5 * log_zeta)
        h = -1j * math.sqrt(2.0 / math.pi) / root * cmath.exp(1j * zeta)
        return h, 4 * EPS * abs(h)

    n = int(order)
    sign = -1.0 if n % 2 else 1.0
    if zeta.real >= 0:
        h1, h2, rel = _asymptotic_pair(order, zeta)
        H = h1
        J = 0.5 * (h1 + h2)
        eh = rel * abs(h1)
        ej = rel * 0.5 * (abs(h1) + abs(h2))
    else:
        xi = -zeta
        h1, h2, rel = _asymptotic_pair(order, xi)
        jx = 0.5 * (h1 + h2)
        ej = rel * 0.5 * (abs(h1) + abs(h2))
        J = sign * jx
        if xi.imag <= 0:
            # zeta = xi e^{+i pi}
            H = -sign * h2
            eh = rel * abs(h2)
        else:
            # zeta = xi e^{-i pi}
            H = sign * (h1 + 2 * jx)
            eh = rel * abs(h1) + 2 * ej
    if sheet:
        H = H - 4 * sheet * J
        eh = eh + 4 * abs(sheet) * ej
    return H, eh + 4 * EPS * abs(H)


def hankel_h1_estimate(order, zeta, sheet=0, regime=None):
    """Return ``(value, relative_error_estimate, regime)`` for H^(1)_order(zeta).

    ``regime`` forces ``"series"`` or ``"asymptotic"``; by default the regime
    selected by :data:`CROSSOVER` is used unless the other one is more accurate.
    """
    order = float(order)
    if order not in SUPPORTED_ORDERS:
        raise ConfigError(f"unsupported Hankel order {order}; choose from {SUPPORTED_ORDERS}")
    zeta = complex(zeta)
    if zeta == 0:
        raise ZeroArgument("Hankel function is singular at zeta = 0")
    sheet = int(sheet)

    def run(which):
        if which == "series":
            log_zeta = cmath.log(zeta) + 2j * math.pi * sheet
            h, _, err = _series(order, zeta, log_zeta)
        else:
            h, err = _asymptotic(order, zeta, sheet)
        return h, err / max(abs(h), 1e-300)

    if regime is not None:
        h, rel = run(regime)
        return h, rel, regime
    first = "series" if abs(zeta) < CROSSOVER else "asymptotic"
    other = "asymptotic" if first == "series" else "series"
    h, rel = run(first)
    if rel <= 1e-10:
        return h, rel, first
    h2, rel2 = run(other)
    if rel2 < rel:
        return h2, rel2, other
    return h, rel, first


def hankel_h1(order, zeta, sheet=0, tol=1e-10):
    """Hankel function of the first kind, orders 0, 1/2 and 1, on a sheet of log.

    Raises :class:`AccuracyLoss` when the estimated relative error of the best
    regime exceeds ``tol``.
    """
    h, rel, regime = hankel_h1_estimate(order, zeta, sheet)
    if rel > tol:
        raise AccuracyLoss(
            f"H^(1)_{order}({zeta}) on sheet {sheet}: estimated relative error "
            f"{rel:.2e} exceeds {tol:.0e} ({regime})",
            estimate=rel,
        )
    return h


# ---------------------------------------------------------------------------
# Green's function
# ---------------------------------------------------------------------------

def _check_args(d, r, z):
    d = check_dimension(d)
    z = as_sheet_point(z)
    check_sheet(d, z.sheet)
    if r < 0:
        raise ConfigError(f"distance must be nonnegative, got {r}")
    if d >= 2 and r == 0:
        raise SingularDistance(f"G is singular at r = 0 in d = {d}")
    return d, float(r), z


def green_eval(d, r, z, tol=1e-10) -> complex:
    """Scalar G(r, z); ``z`` is a :class:`SheetPoint` or a complex number (sheet 0)."""
    d, r, z = _check_args(d, r, z)
    k = z.value
    if d == 1:
        w = 1j * k
        return -cmath.exp(w * r) / (2.0 * w)
    if d == 3:
        return cmath.exp(1j * k * r) / (4.0 * math.pi * r)
    return 0.25j * hankel_h1(0, k * r, z.sheet, tol=tol)


def green_hankel_form(d, r, z, tol=1e-10) -> complex:
    """G through the general Hankel formula, i/4 (z/(2πr))^((d-2)/2) H_{(d-2)/2}(z r)."""
    d, r, z = _check_args(d, r, z)
    if d == 1:
        raise ConfigError("the Hankel form of G applies to d >= 2")
    nu = (d - 2) / 2.0
    if nu == 0:
        factor = 1.0
    else:
        factor = cmath.exp(nu * (z.log() - math.log(2 * math.pi * r)))
    return 0.25j * factor * hankel_h1(nu, z.value * r, z.sheet, tol=tol)


def green_gradient(d, r, z, tol=1e-10) -> complex:
    """Radial derivative dG/dr."""
    d, r, z = _check_args(d, r, z)
    k = z.value
    if d == 1:
        return -0.5 * cmath.exp(1j * k * r)
    if d == 3:
        return cmath.exp(1j * k * r) * (1j * k * r - 1.0) / (4.0 * math.pi * r * r)
    # H0' = -H1
    return -0.25j * k * hankel_h1(1, k * r, z.sheet, tol=tol)


def green_array(d, r, z) -> np.ndarray:
    """Vectorised G over an array of distances (r > 0 required for d >= 2).

    Even dimension goes through :func:`scipy.special.hankel1` and
    :func:`scipy.special.jv`, with sheet ``m`` reached by
    H0(ζ e^{2πim}) = H0(ζ) - 4m J0(ζ).
    """
    d = check_dimension(d)
    z = as_sheet_point(z)
    check_sheet(d, z.sheet)
    r = np.asarray(r, dtype=float)
    k = z.value
    if d == 1:
        w = 1j * k
        return -np.exp(w * r) / (2.0 * w)
    if np.any(r <= 0):
        raise SingularDistance(f"G is singular at r = 0 in d = {d}")
    if d == 3:
        return np.exp(1j * k * r) / (4.0 * math.pi * r)
    zeta = k * r
    h = special.hankel1(0, zeta)
    if z.sheet:
        h = h - 4 * z.sheet * special.jv(0, zeta)
    return 0.25j * h
