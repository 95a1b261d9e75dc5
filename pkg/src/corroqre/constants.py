"""Physical constants and unit conversions (CODATA 2018)."""

# 1 Angstrom in Bohr
ANGSTROM_TO_BOHR = 1.8897259886
BOHR_TO_ANGSTROM = 1.0 / ANGSTROM_TO_BOHR
BOHR_TO_CM = BOHR_TO_ANGSTROM * 1e-8

# 1 Ry = 0.5 Ha
RY_TO_HA = 0.5

# Boltzmann constant, eV/K
K_B_EV = 8.617333262e-5

# molar gas constant, J/(mol K)
R_GAS = 8.31446261815324

# Hartree energy in J and Avogadro constant
HARTREE_J = 4.3597447222071e-18
AVOGADRO = 6.02214076e23
HARTREE_TO_J_PER_MOL = HARTREE_J * AVOGADRO

# default attempt frequency for oxygen hops, 1/s
DEFAULT_NU0 = 1.0e13
