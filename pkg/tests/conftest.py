import pytest

from subwave.processes import make_gauss_bump, make_ou
from subwave.wavelets import make_basis


@pytest.fixture(scope="session")
def haar():
    return make_basis("haar")


@pytest.fixture(scope="session")
def db2():
    return make_basis("daubechies:2")


@pytest.fixture(scope="session")
def db3():
    return make_basis("daubechies:3")


@pytest.fixture(scope="session")
def meyer():
    return make_basis("meyer")


@pytest.fixture(scope="session")
def ou1():
    return make_ou(1.0)


@pytest.fixture(scope="session")
def gauss_bump():
    return make_gauss_bump()
