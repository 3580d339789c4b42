import pytest

from chiraltrain import KickEngine, Species, build_basis, load_species


@pytest.fixture(scope="session")
def o2():
    return load_species("O2")


@pytest.fixture(scope="session")
def all_n_species(o2):
    """Same constants as O2 but with every N allowed, for parity-free checks."""
    return Species("testmol", o2.B, o2.D, "all")


@pytest.fixture(scope="session")
def o2_basis5(o2):
    return build_basis(o2, 5)


@pytest.fixture(scope="session")
def o2_basis29(o2):
    return build_basis(o2, 29)


@pytest.fixture(scope="session")
def engine29(o2_basis29):
    return KickEngine(o2_basis29)
