"""Plane-wave grid construction from an energy cutoff and the lattice sums over G0.

The real-space spacing is ``a0 = gamma * sqrt(2 pi^2 / E_cut[Ha])`` and each axis
holds ``m_i`` plane waves. The momentum-transfer set G0 spans ``[-m_i, m_i]``
per axis without the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constants import RY_TO_HA
from .errors import DomainError
from .structures import CrystalCell, cell_volume

GRID_RULES = ("ceil", "odd")

# guards against L/a0 landing a hair above an integer through rounding
_ROUND_SLACK = 1e-9


def n_p_bits(n_total: int) -> int:
    """Bits per signed momentum component, ``ceil(log2(N^(1/3) + 1))``.

    Evaluated in integers: the smallest n with ``(2^n - 1)^3 >= N``.
    """
    if n_total < 1:
        raise DomainError("N must be >= 1")
    n = 1
    while (2 ** n - 1) ** 3 < n_total:
        n += 1
    return n


@dataclass(frozen=True)
class PlaneWaveBasis:
    per_axis: tuple[int, int, int]
    N: int
    n_p: int
    e_cut: float  # Ry
    gamma: float
    omega: float  # Bohr^3
    lengths_bohr: tuple[float, float, float]
    grid_rule: str = "ceil"

    def __post_init__(self):
        if any(m < 1 for m in self.per_axis):
            raise DomainError("per-axis counts must be >= 1")
        if self.N != math.prod(self.per_axis):
            raise DomainError("N must equal the product of per-axis counts")
        if self.n_p < 1:
            raise DomainError("n_p must be >= 1")

    @property
    def max_axis(self) -> int:
        return max(self.per_axis)

    @property
    def a0(self) -> float:
        return spacing_from_cutoff(self.e_cut, self.gamma)

    def as_dict(self) -> dict:
        return {
            "per_axis": list(self.per_axis), "N": self.N, "n_p": self.n_p,
            "e_cut_Ry": self.e_cut, "gamma": self.gamma, "omega_bohr3": self.omega,
            "grid_rule": self.grid_rule,
        }


@dataclass(frozen=True)
class GridSums:
    sum_inv_nu_sq: float  # lambda_nu
    sum_inv_nu: float


def spacing_from_cutoff(e_cut_ry: float, gamma: float = 1.0) -> float:
    """Real-space grid spacing a0 in Bohr for a cutoff in Rydberg."""
    if not e_cut_ry > 0:
        raise DomainError(f"energy cutoff must be > 0 Ry, got {e_cut_ry}")
    if not 0 < gamma <= 1:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    e_ha = e_cut_ry * RY_TO_HA
    return gamma * math.sqrt(2.0 * math.pi ** 2 / e_ha)


def axis_count(length_bohr: float, a0: float, rule: str = "ceil") -> int:
    x = length_bohr / a0
    if rule == "ceil":
        m = math.ceil(x - _ROUND_SLACK)
    elif rule == "odd":
        m = math.floor(x + _ROUND_SLACK)
        if m % 2 == 0:
            m -= 1
    else:
        raise DomainError(f"grid rule must be one of {GRID_RULES}")
    return max(1, m)


def grid_from_cutoff(cell: CrystalCell, e_cut: float, gamma: float = 1.0,
                     grid_rule: str = "ceil") -> PlaneWaveBasis:
    """Plane-wave basis for ``cell`` at cutoff ``e_cut`` (Ry).

    ``grid_rule="ceil"`` takes ``ceil(L_i/a0)`` points per axis; ``"odd"`` takes the
    largest odd integer not above ``L_i/a0``.
    """
    a0 = spacing_from_cutoff(e_cut, gamma)
    lengths = tuple(float(x) for x in cell.lengths_bohr)
    per_axis = tuple(axis_count(L, a0, grid_rule) for L in lengths)
    n_total = math.prod(per_axis)
    return PlaneWaveBasis(per_axis, n_total, n_p_bits(n_total), float(e_cut), float(gamma),
                          cell_volume(cell), lengths, grid_rule)


def basis_from_counts(per_axis, lengths_bohr, e_cut: float = float("nan"), gamma: float = 1.0) -> PlaneWaveBasis:
    """Basis with explicit per-axis counts (for tests and hand-built grids)."""
    per_axis = tuple(int(m) for m in per_axis)
    lengths = tuple(float(x) for x in lengths_bohr)
    n_total = math.prod(per_axis)
    return PlaneWaveBasis(per_axis, n_total, n_p_bits(n_total), e_cut, gamma, math.prod(lengths), lengths)


@lru_cache(maxsize=256)
def _shell_counts(extents: tuple[int, int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Multiplicity of each squared norm r2 over the box [-m_i, m_i]^3.

    Only the non-negative octant is visited; each coordinate contributes a
    factor 2 when nonzero. Counts are integers so the binning is exact.
    """
    mx, my, mz = extents
    wx = np.where(np.arange(mx + 1) == 0, 1, 2).astype(np.int64)
    wy = np.where(np.arange(my + 1) == 0, 1, 2).astype(np.int64)
    wz = np.where(np.arange(mz + 1) == 0, 1, 2).astype(np.int64)
    jy = np.arange(my + 1, dtype=np.int64) ** 2
    kz = np.arange(mz + 1, dtype=np.int64) ** 2
    r2_yz = (jy[:, None] + kz[None, :]).ravel()
    w_yz = (wy[:, None] * wz[None, :]).ravel()
    r2_max = mx * mx + my * my + mz * mz
    counts = np.zeros(r2_max + 1, dtype=np.int64)
    for i in range(mx + 1):
        # float weights are exact here: every partial count is far below 2**53
        counts += np.bincount(r2_yz + i * i, weights=w_yz * wx[i], minlength=r2_max + 1).astype(np.int64)
    counts[0] = 0
    r2 = np.nonzero(counts)[0]
    return r2, counts[r2]


def grid_sums_extent(extents) -> GridSums:
    """Sums of 1/|nu|^2 and 1/|nu| over the integer box ``[-m_i, m_i]^3 minus the origin``."""
    extents = tuple(int(m) for m in extents)
    if all(m == 0 for m in extents):
        return GridSums(0.0, 0.0)
    r2, c = _shell_counts(extents)
    r2f = r2.astype(float)
    s2 = math.fsum(c / r2f)
    s1 = math.fsum(c / np.sqrt(r2f))
    return GridSums(s2, s1)


def grid_sums(basis: PlaneWaveBasis) -> GridSums:
    """Lattice sums over G0 for ``basis``; G0 spans ``[-m_i, m_i]`` per axis."""
    return grid_sums_extent(basis.per_axis)


def grid_sums_direct(extents) -> GridSums:
    """Reference sums by enumerating every point of the box (no symmetry)."""
    mx, my, mz = (int(m) for m in extents)
    x = np.arange(-mx, mx + 1, dtype=float)
    y = np.arange(-my, my + 1, dtype=float)
    z = np.arange(-mz, mz + 1, dtype=float)
    r2 = (x[:, None, None] ** 2 + y[None, :, None] ** 2 + z[None, None, :] ** 2).ravel()
    r2 = r2[r2 > 0]
    return GridSums(math.fsum(1.0 / r2), math.fsum(1.0 / np.sqrt(r2)))
