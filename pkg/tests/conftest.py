"""Shared fixtures: published device matrices from fixtures/ and a seeded generator."""

import numpy as np
import pytest

from app.utils.fixtures import load_element, load_local_unitary, load_parameters


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def sydney_pi00():
    return load_element("sydney_pi00")


@pytest.fixture(scope="session")
def sydney_pi00_qpp():
    return load_element("sydney_pi00_qpp")


@pytest.fixture(scope="session")
def sydney_v():
    return load_local_unitary("sydney_v")


@pytest.fixture(scope="session")
def sydney_params():
    return load_parameters("sydney_parameters")


@pytest.fixture(scope="session")
def rigetti_pi00():
    return load_element("rigetti_pi00")


@pytest.fixture(scope="session")
def rigetti_v():
    return load_local_unitary("rigetti_v")


@pytest.fixture(scope="session")
def yorktown_pi000():
    return load_element("yorktown_pi000")


@pytest.fixture
def ideal_pi00():
    return load_element("ideal_pi00")
