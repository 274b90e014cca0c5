import pytest

from gradedmodels.algebra import boolean_chain, make_from_table, make_godel, make_lukasiewicz

U3_ROWS = ((0, 0, 0), (0, 1, 2), (0, 2, 2))


@pytest.fixture(scope="session")
def bool_chain():
    return boolean_chain()


@pytest.fixture(scope="session")
def luk3():
    return make_lukasiewicz(3)


@pytest.fixture(scope="session")
def luk4():
    return make_lukasiewicz(4)


@pytest.fixture(scope="session")
def godel3():
    return make_godel(3)


@pytest.fixture(scope="session")
def godel4():
    return make_godel(4)


@pytest.fixture(scope="session")
def u3():
    return make_from_table(3, U3_ROWS, one=1, zero=0, name="u3")
