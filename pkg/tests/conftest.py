"""Shared bundles for the test suite."""

import pytest

from src.bundle import build_bundle, product
from src.constructions import make_dvb1, make_eg2
from src.graph import complete_graph, cycle_graph


@pytest.fixture(scope="session")
def eg2_5_3():
    return build_bundle(make_eg2(5, 3))


@pytest.fixture(scope="session")
def eg2_4_3():
    return build_bundle(make_eg2(4, 3))


@pytest.fixture(scope="session")
def dvb1_5():
    return build_bundle(make_dvb1(5))


@pytest.fixture(scope="session")
def product_5_3():
    return product(cycle_graph(5), complete_graph(3))
