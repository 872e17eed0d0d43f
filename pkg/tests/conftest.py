import pytest

from rescan import SquareWellSpec, SupportBox, make_builtin

# Reference zeros of the V0 = 1, a = 1 well determinant in [-3.2, 3.2] x [-2.2, -0.02],
# computed once by argument-principle count + Newton and frozen here.
WELL_ZEROS = (
    -2.3569879824368147 - 1.909078398937853j,
    -1j,
    2.3569879824368147 - 1.909078398937853j,
)


@pytest.fixture(scope="session")
def well():
    return make_builtin("square_well", SupportBox(2.0, 1), depth=1.0, a=1.0)


@pytest.fixture(scope="session")
def well_spec():
    return SquareWellSpec(V0=1.0, a=1.0)


@pytest.fixture(scope="session")
def zero_pot():
    return make_builtin("zero", SupportBox(2.0, 1))


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict(capsys):
    """Record and echo one PASS/FAIL line per acceptance criterion."""

    def emit(number, ok, detail):
        line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} | {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
