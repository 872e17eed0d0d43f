import pickle

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rescan.errors import ConfigError, IrregularGrid, MalformedFile, SupportMismatch
from rescan.potential import (BUILTINS, SupportBox, TruncatedGaussian, eval_potential, load_sampled_potential,
                              make_builtin)

BOX1 = SupportBox(2.0, 1)


def _write(path, rows):
    path.write_text("\n".join(" ".join(repr(float(v)) for v in r) for r in rows) + "\n")
    return path


def test_builtin_values(well):
    assert eval_potential(make_builtin("zero", BOX1), 0.3) == 0
    assert well(0.0) == -1
    assert well(1.0) == -1          # closed well
    assert well(1.2) == 0
    barrier = make_builtin("square_barrier", SupportBox(4.0, 1), height=2.0, a=0.5)
    assert barrier(0.1) == 2 and barrier(0.6) == 0


@pytest.mark.parametrize("name", sorted(BUILTINS))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_zero_outside_support(name, d):
    p = make_builtin(name, SupportBox(2.0, d))
    rng = np.random.default_rng(d)
    x = rng.uniform(-5, 5, size=(400, d))
    outside = np.any(np.abs(x) > 1.0, axis=1)
    assert np.all(p(x[outside]) == 0)
    # deterministic
    assert np.array_equal(p(x), p(x))


def test_gaussian_is_smooth_and_compact():
    g = TruncatedGaussian(BOX1, amplitude=2.0, width=0.4)
    assert g(0.0) == pytest.approx(-2.0)
    assert g(0.95) == 0 and g(1.0) == 0
    assert 0 < abs(g(0.94)) < 1e-20


def test_builtin_errors():
    with pytest.raises(ConfigError):
        make_builtin("nope", BOX1)
    with pytest.raises(ConfigError):
        make_builtin("square_well", BOX1, dpeth=1.0)
    with pytest.raises(ConfigError):
        make_builtin("square_well", BOX1, a=2.0)
    with pytest.raises(ConfigError):
        SupportBox(-1.0)
    with pytest.raises(ConfigError):
        SupportBox(1.0, 4)


def test_complex_potential_accepted():
    p = make_builtin("gaussian", BOX1, amplitude=1 + 0.5j)
    assert p(0.0) == pytest.approx(-(1 + 0.5j))
    assert not p.is_real()


def test_sampled_reproduces_nodes_and_interpolates(tmp_path):
    g = TruncatedGaussian(BOX1, amplitude=1.0, width=0.5)
    x = np.linspace(-1, 1, 201)
    q = g(x)
    p = load_sampled_potential(_write(tmp_path / "g.txt", np.column_stack([x, q.real, q.imag])), BOX1)
    assert p.kind == "sampled-grid"
    assert np.array_equal(p(x[50:60]), q[50:60])
    mid = 0.5 * (x[70] + x[71])
    assert p(mid) == pytest.approx(0.5 * (q[70] + q[71]), abs=1e-15)
    assert pickle.loads(pickle.dumps(p))(mid) == p(mid)


def test_sampled_2d(tmp_path):
    box = SupportBox(2.0, 2)
    ax = np.linspace(-1, 1, 5)
    rows = [(a, b, 1 - a * a if abs(a) < 1 and abs(b) < 1 else 0.0, 0.0) for a in ax for b in ax]
    p = load_sampled_potential(_write(tmp_path / "q2.txt", rows), box)
    assert p([0.0, 0.0]) == pytest.approx(1.0)
    assert p([0.25, 0.0]) == pytest.approx(0.5 * (1.0 + 0.75))


def test_sampled_zero_grid_is_zero(tmp_path):
    x = np.linspace(-1, 1, 11)
    p = load_sampled_potential(_write(tmp_path / "z.txt", np.column_stack([x, 0 * x, 0 * x])), BOX1)
    assert np.all(p(np.linspace(-2, 2, 50)) == 0)
    assert p.is_real()


@pytest.mark.parametrize("text, err", [
    ("0.1\n0.2\n", MalformedFile),
    ("-1 0 0\n0 abc 0\n1 0 0\n", MalformedFile),
    ("# only comments\n", MalformedFile),
    ("-1 0 0\n", IrregularGrid),
    ("-0.5 0 0\n0 1 0\n1 0 0\n", SupportMismatch),
    ("-1 0.5 0\n0 1 0\n1 0 0\n", SupportMismatch),
])
def test_sampled_file_errors(tmp_path, text, err):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(err):
        load_sampled_potential(path, BOX1)


def test_irregular_2d(tmp_path):
    path = tmp_path / "irr.txt"
    path.write_text("-1 -1 0 0\n1 -1 0 0\n-1 1 0 0\n")
    with pytest.raises(IrregularGrid):
        load_sampled_potential(path, SupportBox(2.0, 2))


@given(st.floats(-10, 10), st.floats(0.1, 4))
@settings(max_examples=50, deadline=None)
def test_exterior_points_random(x, M):
    p = make_builtin("double_bump", SupportBox(M, 1), center=0.3 * M / 2, width=0.2 * M / 2)
    if abs(x) > M / 2:
        assert p(x) == 0
