import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from rescan.errors import AccuracyLoss, ConfigError, SingularDistance, UnsupportedSheet, ZeroArgument, ZeroSpectralParameter
from rescan.greens import (MAX_SHEET, SheetPoint, green_array, green_eval, green_gradient, green_hankel_form,
                           hankel_h1, hankel_h1_estimate)

# reference values from 30-digit mpmath
HANKEL_REF = [
    (0, 1, 0.7651976865579666 + 0.08825696421567696j),
    (0, 2.5 - 1.5j, -0.773738205315993 + 1.9826766672423661j),
    (1, 0.3 + 0.2j, -0.7854306483621127 - 1.5654099819316434j),
    (0, 12 - 3j, 1.4863195524738222 - 4.317470362904499j),
    (1, 20 + 0.5j, 0.03928726843910674 - 0.10091925260090018j),
    (0.5, 3 - 1j, -0.023516557854926613 + 1.2194213620101924j),
    (0, -2 + 0.5j, -0.16620321868198154 + 0.2845072735294063j),
]


@pytest.mark.parametrize("order, zeta, ref", HANKEL_REF)
def test_hankel_reference_values(order, zeta, ref):
    assert abs(hankel_h1(order, zeta) - ref) <= 1e-10 * abs(ref)


def test_green_examples():
    assert green_eval(1, 2.0, 1j) == pytest.approx(math.exp(-2) / 2, rel=1e-14)
    assert green_eval(3, 1.0, 1.0) == pytest.approx(cmath.exp(1j) / (4 * math.pi), rel=1e-14)
    assert green_eval(2, 1.0, 1.0) == pytest.approx(-0.02206424105391924 + 0.19129942163949165j, rel=1e-10)


def test_half_order_closed_form():
    for x in (0.1, 1.0, 7.9, 8.1, 30.0):
        expect = -1j * math.sqrt(2 / (math.pi * x)) * cmath.exp(1j * x)
        assert abs(hankel_h1(0.5, x) - expect) <= 1e-10 * abs(expect)


def test_small_argument_leading_terms():
    z = 1e-6 + 1e-6j
    assert abs(hankel_h1(1, z) / (-2j / (math.pi * z)) - 1) < 1e-9
    # order 0 log term: relative error decays like 1/|log z|
    r0 = abs(hankel_h1(0, 1e-8) / (2j / math.pi * math.log(1e-8)) - 1)
    r1 = abs(hankel_h1(0, 1e-16) / (2j / math.pi * math.log(1e-16)) - 1)
    assert r1 < r0 < 0.1


@pytest.mark.parametrize("sheet, expect", [(1, -0.02206424105391925 - 0.5738982649184751j),
                                           (-1, -0.02206424105391925 + 0.9564971081974584j)])
def test_other_sheets(sheet, expect):
    assert green_eval(2, 1.0, SheetPoint(1.0, sheet)) == pytest.approx(expect, rel=1e-10)


def test_sheets_continuous_across_cut():
    # approaching the negative axis from below on sheet 0 = from above on sheet -1
    above = green_eval(2, 1.0, SheetPoint(-2 + 1e-12j, -1))
    below = green_eval(2, 1.0, SheetPoint(-2 - 1e-12j, 0))
    assert abs(above - below) < 1e-9


def test_array_agrees_with_scalar_series():
    rng = np.random.default_rng(3)
    checked = 0
    for _ in range(300):
        z = complex(rng.uniform(-6, 6), rng.uniform(-3, 3))
        r = rng.uniform(0.01, 3.0)
        sheet = int(rng.integers(-MAX_SHEET, MAX_SHEET + 1))
        try:
            s = green_eval(2, r, SheetPoint(z, sheet))
        except AccuracyLoss:
            continue
        a = green_array(2, np.array([r]), SheetPoint(z, sheet))[0]
        assert abs(s - a) <= 1e-9 * max(1.0, abs(s))
        checked += 1
    assert checked > 250


def test_accuracy_loss_is_reported_not_silent():
    # imaginary part large and |zeta| near the crossover: both regimes lose digits
    h, rel, _ = hankel_h1_estimate(0, 8.0 + 14j)
    with pytest.raises(AccuracyLoss) as info:
        hankel_h1(0, 8.0 + 14j, tol=rel / 10)
    assert info.value.estimate == pytest.approx(rel)


@pytest.mark.parametrize("z", [1.0, 0.5 - 0.3j, 2 + 1j, -1.5 - 0.7j])
def test_d3_closed_form_matches_hankel(z):
    for r in (0.05, 0.5, 1.7):
        a = green_eval(3, r, z)
        b = green_hankel_form(3, r, z)
        assert abs(a - b) <= 1e-10 * abs(a)


@given(st.floats(0.1, 5), st.floats(-3, 3), st.floats(0.0, 3.0), st.sampled_from([1, 3]))
@settings(max_examples=60, deadline=None)
def test_conjugation_symmetry(re, im, r, d):
    if d == 3 and r == 0:
        r = 0.5
    z = complex(re, im)
    a = green_eval(d, r, -z.conjugate())
    b = green_eval(d, r, z).conjugate()
    assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


def test_gradient_examples():
    assert green_gradient(1, 1.0, 1j) == pytest.approx(-math.exp(-1) / 2, rel=1e-14)
    assert green_gradient(3, 1.0, 1.0) == pytest.approx(cmath.exp(1j) * (1j - 1) / (4 * math.pi), rel=1e-12)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_gradient_finite_differences(d):
    rng = np.random.default_rng(11 + d)
    step = 1e-6
    for _ in range(100):
        z = complex(rng.uniform(0.2, 4), rng.uniform(-2, 1))
        r = rng.uniform(0.2, 3.0)
        fd = (green_eval(d, r + step, z) - green_eval(d, r - step, z)) / (2 * step)
        g = green_gradient(d, r, z)
        assert abs(fd - g) <= 1e-6 * max(abs(g), 1e-3)


def test_errors():
    with pytest.raises(ZeroSpectralParameter):
        green_eval(1, 1.0, 0)
    with pytest.raises(SingularDistance):
        green_eval(3, 0.0, 1.0)
    with pytest.raises(SingularDistance):
        green_array(2, np.array([0.0, 1.0]), 1.0)
    with pytest.raises(UnsupportedSheet):
        green_eval(2, 1.0, SheetPoint(1.0, MAX_SHEET + 1))
    with pytest.raises(UnsupportedSheet):
        green_eval(3, 1.0, SheetPoint(1.0, 1))
    with pytest.raises(ZeroArgument):
        hankel_h1(0, 0)
    with pytest.raises(ConfigError):
        hankel_h1(2, 1.0)
    with pytest.raises(ConfigError):
        green_eval(4, 1.0, 1.0)
    # d = 1 is regular at r = 0
    assert green_eval(1, 0.0, 2.0) == pytest.approx(1j / 4)


def test_scipy_cross_check_principal():
    zeta = np.array([0.5 + 0.1j, 3 - 2j, 9 + 0.2j, 25 - 1j])
    ours = np.array([hankel_h1(1, v) for v in zeta])
    assert np.allclose(ours, special.hankel1(1, zeta), rtol=1e-10, atol=0)
