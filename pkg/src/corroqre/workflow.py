"""Closed-form helpers for the corrosion workflows: rates, solution energies, classical cost scaling."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import HARTREE_TO_J_PER_MOL, R_GAS
from .errors import DomainError

METHODS = ("FCI", "CCSD(T)", "SCI", "DMRG")


def arrhenius_rate(A: float, e_a: float, temperature: float) -> float:
    """``k = A exp(-E_a / R T)`` with ``E_a`` in Hartree (converted to J/mol), R in J/(mol K)."""
    if not temperature > 0:
        raise DomainError("temperature must be > 0")
    return A * math.exp(-e_a * HARTREE_TO_J_PER_MOL / (R_GAS * temperature))


def solution_energy(e_alloy_o: float, e_alloy: float, e_o2: float) -> float:
    """Oxygen solution energy (Ha): E(alloy+O) - E(alloy) - E(O2)/2."""
    vals = (e_alloy_o, e_alloy, e_o2)
    if not all(math.isfinite(v) for v in vals):
        raise DomainError("energies must be finite")
    return e_alloy_o - e_alloy - 0.5 * e_o2


@dataclass(frozen=True)
class ClassicalMethodSpec:
    method: str
    N: int  # spatial orbitals
    eta: int = 0  # electrons
    D: int | None = None  # selected determinants (SCI)
    B: int | None = None  # bond dimension (DMRG)

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.N < 1 or self.eta < 0:
            raise DomainError("need N >= 1 and eta >= 0")
        if self.method == "SCI" and not (self.D and self.D > 0):
            raise DomainError("SCI requires a positive D")
        if self.method == "DMRG" and not (self.B and self.B > 0):
            raise DomainError("DMRG requires a positive bond dimension B")


def classical_scaling(spec: ClassicalMethodSpec):
    """Asymptotic cost of a classical method; exact integer except for non-integer half-occupations."""
    N, eta = spec.N, spec.eta
    if spec.method == "DMRG":
        return spec.B ** 3 * N ** 3 + spec.B ** 2 * N ** 4
    if spec.method == "FCI":
        if eta % 2:
            raise DomainError("FCI binomial needs an even electron count")
        if N < eta // 2:
            raise DomainError("need N >= eta/2")
        return math.comb(N, eta // 2)
    if 2 * N < eta:
        raise DomainError("need N >= eta/2")
    virt = N - eta / 2 if eta % 2 else N - eta // 2
    if spec.method == "CCSD(T)":
        return eta ** 3 * virt ** 4
    return spec.D * eta ** 2 * virt ** 2


def critical_al_fraction(g_star: float, n_o_s: float, d_o: float, d_al: float, v_m: float, v_ox: float) -> float:
    """Critical Al atom fraction for exclusive alumina formation."""
    args = (g_star, n_o_s, d_o, d_al, v_m, v_ox)
    if not all(a > 0 for a in args):
        raise DomainError("all inputs must be > 0")
    return math.sqrt(math.pi * g_star / 3.0 * n_o_s * d_o * v_m / (d_al * v_ox))
