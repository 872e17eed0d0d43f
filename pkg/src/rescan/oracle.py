"""Ground truth for the one-dimensional square well and matrix-level lemma checks.

For q = -V0 on [-a, a] the outgoing solutions match across the well edges, and
resonances are the zeros of the transmission denominator

    F(z) = cos(2κa) - i (z² + κ²)/(2zκ) sin(2κa),     κ² = z² + V0.

F is even in κ, so the branch of the square root never matters; it is
written through S(κ) = sin(2κa)/κ, which has a removable point at κ = 0.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ConfigError, ContourThroughZero, CountMismatch, ZeroSpectralParameter
from .tiling import Box

NEWTON_MAXITER = 50
NEWTON_STEP_TOL = 1e-13
RESIDUAL_TOL = 1e-12
START_SPACING = 0.02
BRANCH_RADIUS = 1e-6


@dataclass(frozen=True)
class SquareWellSpec:
    V0: float
    a: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigError("half-width a must be positive")


def _sinc_parts(kappa2, a):
    """S = sin(2κa)/κ and dS/d(κ²) as functions of κ² (series near κ = 0)."""
    kappa = cmath.sqrt(kappa2)
    u = 2 * a * kappa
    if abs(u) < 1e-2:
        S = dS = 0j
        for k in range(8):
            c = 2 * a * (-1) ** k * (2 * a) ** (2 * k) / math.factorial(2 * k + 1)
            S += c * kappa2 ** k
            if k:
                dS += k * c * kappa2 ** (k - 1)
        return S, dS, cmath.cos(u)
    S = cmath.sin(u) / kappa
    # dS/dκ = (2a cos u κ - sin u)/κ², dκ²/dκ = 2κ
    dS = (2 * a * cmath.cos(u) * kappa - cmath.sin(u)) / (kappa ** 2) / (2 * kappa)
    return S, dS, cmath.cos(u)


def well_determinant(spec: SquareWellSpec, z, derivative: bool = False):
    """F(z); with ``derivative=True`` returns (F, F')."""
    z = complex(z)
    if z == 0:
        raise ZeroSpectralParameter("F is singular at z = 0")
    a, V0 = spec.a, spec.V0
    k2 = z * z + V0
    S, dS_dk2, cos_u = _sinc_parts(k2, a)
    P = z + V0 / (2 * z)                  # (z² + κ²)/(2z)
    F = cos_u - 1j * P * S
    if not derivative:
        return F
    dP = 1 - V0 / (2 * z * z)
    dS = dS_dk2 * 2 * z
    dcos = -2 * a * z * S                 # d cos(2κa)/dz = -2a sin(2κa) κ'(z), κ' = z/κ
    return F, dcos - 1j * (dP * S + P * dS)


def _newton(spec, z0):
    z = complex(z0)
    for _ in range(NEWTON_MAXITER):
        F, dF = well_determinant(spec, z, derivative=True)
        if dF == 0:
            return None
        step = F / dF
        z -= step
        if abs(step) <= NEWTON_STEP_TOL * max(1.0, abs(z)):
            break
    else:
        return None
    F = well_determinant(spec, z)
    if abs(F) > RESIDUAL_TOL * max(1.0, abs(cmath.cos(2 * spec.a * cmath.sqrt(z * z + spec.V0)))):
        return None
    return z


def winding_number(spec: SquareWellSpec, box: Box) -> float:
    """(1/2πi) ∮ F'/F dz around the box, counter-clockwise, by adaptive quadrature."""
    corners = [complex(box.re_min, box.im_min), complex(box.re_max, box.im_min),
               complex(box.re_max, box.im_max), complex(box.re_min, box.im_max)]
    total = 0j
    for k in range(4):
        p, q = corners[k], corners[(k + 1) % 4]
        edge = q - p

        def integrand(t, part, p=p, edge=edge):
            F, dF = well_determinant(spec, p + t * edge, derivative=True)
            if abs(F) < 1e-10:
                raise ContourThroughZero(f"F vanishes near the contour at z={p + t * edge}")
            v = dF / F * edge
            return v.real if part == 0 else v.imag

        re = integrate.quad(integrand, 0.0, 1.0, args=(0,), limit=1000, epsabs=1e-10, epsrel=1e-10)[0]
        im = integrate.quad(integrand, 0.0, 1.0, args=(1,), limit=1000, epsabs=1e-10, epsrel=1e-10)[0]
        total += re + 1j * im
    return (total / (2j * math.pi)).real


def _starts(spec, box, spacing):
    re = np.arange(box.re_min, box.re_max + spacing / 2, spacing)
    im = np.arange(box.im_min, box.im_max + spacing / 2, spacing)
    R, I = np.meshgrid(re, im)
    Z = R + 1j * I
    vals = np.empty(Z.shape)
    for idx, z in np.ndenumerate(Z):
        vals[idx] = abs(well_determinant(spec, z)) if z != 0 else np.inf
    # local minima of |F| over the 8-neighbourhood (edges padded with +inf)
    pad = np.pad(vals, 1, constant_values=np.inf)
    centre = pad[1:-1, 1:-1]
    is_min = np.ones_like(centre, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            is_min &= centre <= pad[1 + di:pad.shape[0] - 1 + di, 1 + dj:pad.shape[1] - 1 + dj]
    return Z[is_min]


def _check_box(spec, box):
    if box.contains(0j):
        raise ConfigError("oracle box must avoid z = 0")
    if spec.V0 == 0:
        return
    # κ = 0 at z = i sqrt(V0); F is regular there but the neighbourhood is kept clear
    b = 1j * cmath.sqrt(spec.V0)
    ex = Box(box.re_min - BRANCH_RADIUS, box.re_max + BRANCH_RADIUS,
             box.im_min - BRANCH_RADIUS, box.im_max + BRANCH_RADIUS)
    if ex.contains(b):
        raise ConfigError(f"oracle box must avoid the branch point {b}")


def find_zeros(spec: SquareWellSpec, box: Box) -> list[complex]:
    """All zeros of F in the box, counted by the argument principle and Newton-polished.

    Sorted by real part, then imaginary part.
    """
    _check_box(spec, box)
    try:
        count = winding_number(spec, box)
    except ContourThroughZero:
        s = START_SPACING / 2
        box = Box(box.re_min - s, box.re_max + s, box.im_min - s, box.im_max + s)
        _check_box(spec, box)
        count = winding_number(spec, box)
    n = round(count)
    if abs(count - n) > 0.1:
        raise CountMismatch(f"argument principle gave non-integer count {count:.4f}")

    zeros: list[complex] = []
    for spacing in (START_SPACING, START_SPACING / 4):
        for z0 in _starts(spec, box, spacing):
            z = _newton(spec, z0)
            if z is None or not box.contains(z):
                continue
            if abs(z.real) < 1e-14 * abs(z):
                z = complex(0.0, z.imag)
            if all(abs(z - w) > 1e-8 * max(1.0, abs(z)) for w in zeros):
                zeros.append(z)
        if len(zeros) == n:
            break
    if len(zeros) != n:
        raise CountMismatch(f"argument principle counts {n} zeros, Newton found {len(zeros)}")
    return sorted(zeros, key=lambda w: (round(w.real, 12), round(w.imag, 12)))


# ---------------------------------------------------------------------------
# matrix-level lemma fuzzing
# ---------------------------------------------------------------------------

@dataclass
class FuzzReport:
    trials: int
    seed: int
    violations: dict = field(default_factory=lambda: {"perturbation": 0, "doubling": 0, "restriction": 0})
    skipped: dict = field(default_factory=lambda: {"perturbation": 0, "doubling": 0, "restriction": 0})
    worst_margin: dict = field(default_factory=lambda: {"perturbation": math.inf, "doubling": math.inf,
                                                        "restriction": math.inf})

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())

    def as_dict(self):
        return {"trials": self.trials, "seed": self.seed, "violations": self.violations,
                "skipped": self.skipped, "worst_margin": self.worst_margin,
                "total_violations": self.total_violations}


def _inv_norm(A):
    s = np.linalg.svd(A, compute_uv=False)[-1]
    return math.inf if s < 1e-300 else 1.0 / s


def _random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _record(report, name, margin, scale, rtol):
    """margin >= 0 means the inequality holds; compare at relative tolerance."""
    rel = margin / max(scale, 1e-300)
    report.worst_margin[name] = min(report.worst_margin[name], rel)
    if rel < -rtol:
        report.violations[name] += 1


def lemma_fuzz(trials: int = 1000, max_dim: int = 20, seed: int = 42, rtol: float = 1e-9) -> FuzzReport:
    """Random checks of three inverse-norm inequalities for I + K.

    perturbation: if 1 - δ‖(I+K)⁻¹‖ > 0 with δ = ‖K - K'‖, then
        (1 - δ‖(I+K)⁻¹‖) ‖(I+K')⁻¹‖ <= ‖(I+K)⁻¹‖.
    doubling: if ‖(I+K)⁻¹‖ >= 1/δ and ‖K - K''‖ <= δ, then ‖(I+K'')⁻¹‖ >= 1/(2δ).
    restriction: for K'' living on a leading block, the inverse norm of the
        block problem is at most that of the full one, and the full norm is
        max(block norm, 1) for a proper block.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    rep = FuzzReport(trials=trials, seed=seed)
    for t in range(trials):
        N = int(rng.integers(1, max_dim + 1))
        I = np.eye(N)
        if t == 0:
            K = np.zeros((N, N), complex)
            E = np.zeros((N, N), complex)
            r0 = 1.0
        else:
            K = _random_complex(rng, (N, N)) * rng.uniform(0.05, 2.0) / math.sqrt(N)
            r0 = _inv_norm(I + K)
            # ‖E‖ = u / ‖(I+K)^-1‖ with u up to 1.2, so most trials meet the hypothesis
            E = _random_complex(rng, (N, N))
            E *= rng.uniform(1e-4, 1.2) / (np.linalg.norm(E, 2) * min(r0, 1e300))

        # perturbation
        delta = np.linalg.norm(E, 2)
        factor = 1 - delta * r0
        if factor > 0 and math.isfinite(r0):
            r1 = _inv_norm(I + K + E)
            _record(rep, "perturbation", r0 - factor * r1, r0, rtol)
        else:
            rep.skipped["perturbation"] += 1

        # doubling: pick δ so the hypothesis holds
        s0 = 1.0 / r0 if math.isfinite(r0) else 0.0
        delta2 = max(s0 * rng.uniform(1.0, 3.0), 1e-12)
        E2 = _random_complex(rng, (N, N))
        E2 *= delta2 * rng.uniform(0.0, 1.0) / np.linalg.norm(E2, 2)
        if r0 >= 1.0 / delta2:
            r2 = _inv_norm(I + K + E2)
            _record(rep, "doubling", r2 - 1.0 / (2 * delta2), 1.0 / (2 * delta2), rtol)
        else:
            rep.skipped["doubling"] += 1

        # restriction onto the leading m x m block
        m = int(rng.integers(1, N + 1))
        Kb = np.zeros((N, N), complex)
        Kb[:m, :m] = K[:m, :m]
        full = _inv_norm(I + Kb)
        block = _inv_norm(np.eye(m) + K[:m, :m])
        if math.isfinite(full) and math.isfinite(block):
            _record(rep, "restriction", full - block, full, rtol)
            expect = block if m == N else max(block, 1.0)
            _record(rep, "restriction", -abs(full - expect), full, rtol)
        else:
            rep.skipped["restriction"] += 1
    return rep
