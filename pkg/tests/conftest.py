import pytest

from corroqre.structures import Atom, CrystalCell, load_model


@pytest.fixture(scope="session")
def dimer():
    return load_model("mg_dimer")


@pytest.fixture(scope="session")
def dimer_ae():
    return load_model("mg_dimer", "all_electron")


@pytest.fixture(scope="session")
def nb_alloy():
    return load_model("nb97_hf3_ti22_zr6_o")


def toy_cell(lengths_bohr=(6.0, 6.0, 6.0), atoms=(("H", (0.1, 0.2, 0.3)),), mode="valence"):
    from corroqre.constants import BOHR_TO_ANGSTROM
    from corroqre.structures import DEFAULT_TABLE

    lengths = tuple(x * BOHR_TO_ANGSTROM for x in lengths_bohr)
    at = tuple(Atom(s, tuple(c * BOHR_TO_ANGSTROM for c in p), DEFAULT_TABLE.charge(s, mode)) for s, p in atoms)
    return CrystalCell(lengths, at, mode)
