import pytest

from sourcewave import InitialData, QuadratureSpec, SearchSpec


@pytest.fixture(scope="session")
def zero_datum():
    return InitialData((), (0.0,))


@pytest.fixture(scope="session")
def const_pos():
    return InitialData((), (1.0,))


@pytest.fixture(scope="session")
def const_neg():
    return InitialData((), (-1.0,))


@pytest.fixture(scope="session")
def riemann_up():
    return InitialData((0.0,), (-1.0, 1.0))


@pytest.fixture(scope="session")
def riemann_down():
    return InitialData((0.0,), (0.0, -1.0))


@pytest.fixture(scope="session")
def rectangle():
    return InitialData((-1.0, 1.0), (0.0, 1.0, 0.0))


@pytest.fixture(scope="session")
def fixture_data(zero_datum, const_pos, const_neg, riemann_up, riemann_down,
                 rectangle):
    """The six piecewise-constant data every sweep-style test runs over."""
    return {
        "zero": zero_datum,
        "const_pos": const_pos,
        "const_neg": const_neg,
        "riemann_up": riemann_up,
        "riemann_down": riemann_down,
        "rectangle": rectangle,
    }


@pytest.fixture(scope="session")
def quad():
    return QuadratureSpec()


@pytest.fixture(scope="session")
def search():
    return SearchSpec()
