"""Periodic cell ingestion, electron counting and cell geometry in atomic units.

Geometries are read from extended XYZ. Only orthorhombic boxes are supported;
the diagonal of the ``Lattice`` entry gives the box lengths in Angstrom.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .constants import ANGSTROM_TO_BOHR
from .errors import DomainError, ParseError, UnknownSpeciesError, UnsupportedLatticeError

ELECTRON_MODES = ("valence", "all_electron")

# element -> (valence electrons, atomic number)
DEFAULT_VALENCE = {
    "H": (1, 1),
    "O": (6, 8),
    "Mg": (2, 12),
    "Al": (3, 13),
    "Ti": (4, 22),
    "Zr": (4, 40),
    "Nb": (5, 41),
    "Hf": (4, 72),
    "Ta": (5, 73),
    "W": (6, 74),
}


@dataclass(frozen=True)
class ValenceTable:
    """Per-element valence electron count and atomic number."""

    entries: Mapping[str, tuple[int, int]] = field(default_factory=lambda: dict(DEFAULT_VALENCE))

    def __post_init__(self):
        for sym, (val, z) in self.entries.items():
            if not (1 <= val <= z):
                raise DomainError(f"{sym}: need 1 <= valence <= Z, got valence={val}, Z={z}")

    @classmethod
    def with_overrides(cls, overrides: Mapping[str, Sequence[int]] | None) -> "ValenceTable":
        """Default table updated with ``{symbol: (valence, Z)}`` overrides."""
        merged = dict(DEFAULT_VALENCE)
        for sym, pair in (overrides or {}).items():
            val, z = (int(pair[0]), int(pair[1]))
            merged[sym] = (val, z)
        return cls(merged)

    def charge(self, symbol: str, mode: str) -> int:
        try:
            val, z = self.entries[symbol]
        except KeyError:
            raise UnknownSpeciesError(f"unknown species {symbol!r}") from None
        if mode == "valence":
            return val
        if mode == "all_electron":
            return z
        raise DomainError(f"electron mode must be one of {ELECTRON_MODES}, got {mode!r}")


DEFAULT_TABLE = ValenceTable()


@dataclass(frozen=True)
class Atom:
    symbol: str
    position: tuple[float, float, float]  # Angstrom
    zeta: int

    def __post_init__(self):
        if self.zeta < 1:
            raise DomainError(f"nuclear charge must be >= 1, got {self.zeta}")
        if not all(math.isfinite(x) for x in self.position):
            raise DomainError(f"non-finite position {self.position}")


@dataclass(frozen=True)
class CrystalCell:
    lengths: tuple[float, float, float]  # Angstrom
    atoms: tuple[Atom, ...]
    electron_mode: str = "valence"

    def __post_init__(self):
        if len(self.lengths) != 3 or not all(x > 0 for x in self.lengths):
            raise DomainError(f"cell lengths must be three positive numbers, got {self.lengths}")
        if self.electron_mode not in ELECTRON_MODES:
            raise DomainError(f"electron mode must be one of {ELECTRON_MODES}")

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def lengths_bohr(self) -> np.ndarray:
        return np.asarray(self.lengths, dtype=float) * ANGSTROM_TO_BOHR

    def positions_bohr(self) -> np.ndarray:
        if not self.atoms:
            return np.zeros((0, 3))
        return np.array([a.position for a in self.atoms], dtype=float) * ANGSTROM_TO_BOHR

    def formula(self) -> str:
        counts: dict[str, int] = {}
        for a in self.atoms:
            counts[a.symbol] = counts.get(a.symbol, 0) + 1
        return "".join(f"{s}{n}" for s, n in counts.items())

    def with_mode(self, mode: str, table: ValenceTable = DEFAULT_TABLE) -> "CrystalCell":
        """Same geometry with nuclear charges reassigned for ``mode``."""
        atoms = tuple(Atom(a.symbol, a.position, table.charge(a.symbol, mode)) for a in self.atoms)
        return CrystalCell(self.lengths, atoms, mode)


class ElectronCount(NamedTuple):
    eta: int
    lambda_zeta: int


_LATTICE_RE = re.compile(r'Lattice\s*=\s*"([^"]*)"')


def parse_geometry(text: str, table: ValenceTable = DEFAULT_TABLE,
                   electron_mode: str = "valence") -> CrystalCell:
    """Parse extended-XYZ text into a :class:`CrystalCell`.

    The comment line must carry ``Lattice="ax ay az bx by bz cx cy cz"``.
    """
    lines = text.splitlines()
    if len(lines) < 2:
        raise ParseError("expected atom count and comment lines", line=len(lines) + 1)
    try:
        n_atoms = int(lines[0].split()[0])
    except (ValueError, IndexError):
        raise ParseError(f"bad atom count {lines[0]!r}", line=1) from None
    if n_atoms < 0:
        raise ParseError("negative atom count", line=1)

    m = _LATTICE_RE.search(lines[1])
    if m is None:
        raise ParseError('comment line lacks Lattice="..." entry', line=2)
    try:
        lat = np.array([float(x) for x in m.group(1).split()], dtype=float)
    except ValueError:
        raise ParseError("non-numeric Lattice entry", line=2) from None
    if lat.size != 9:
        raise ParseError(f"Lattice entry needs 9 numbers, got {lat.size}", line=2)
    lat = lat.reshape(3, 3)
    off = lat - np.diag(np.diag(lat))
    if np.any(np.abs(off) >= 1e-9):
        raise UnsupportedLatticeError("only orthorhombic cells are supported (off-diagonal lattice entries found)")
    lengths = tuple(float(x) for x in np.diag(lat))
    if not all(x > 0 for x in lengths):
        raise ParseError("lattice lengths must be positive", line=2)

    atoms = []
    body = lines[2:2 + n_atoms]
    if len(body) < n_atoms:
        raise ParseError(f"expected {n_atoms} atom lines, found {len(body)}", line=len(lines) + 1)
    for k, line in enumerate(body, start=3):
        parts = line.split()
        if len(parts) < 4:
            raise ParseError(f"expected 'symbol x y z', got {line!r}", line=k)
        sym = parts[0]
        try:
            pos = tuple(float(x) for x in parts[1:4])
        except ValueError:
            raise ParseError(f"non-numeric coordinate in {line!r}", line=k) from None
        if not all(math.isfinite(x) for x in pos):
            raise ParseError(f"non-finite coordinate in {line!r}", line=k)
        atoms.append(Atom(sym, pos, table.charge(sym, electron_mode)))
    return CrystalCell(lengths, tuple(atoms), electron_mode)


def read_geometry(path, table: ValenceTable = DEFAULT_TABLE, electron_mode: str = "valence") -> CrystalCell:
    with open(path, encoding="utf-8") as fh:
        return parse_geometry(fh.read(), table, electron_mode)


def serialize_geometry(cell: CrystalCell, comment: str = "") -> str:
    """Write ``cell`` as extended XYZ (lossless float formatting)."""
    lx, ly, lz = cell.lengths
    lat = f"{lx!r} 0.0 0.0 0.0 {ly!r} 0.0 0.0 0.0 {lz!r}"
    head = f'Lattice="{lat}" Properties=species:S:1:pos:R:3'
    if comment:
        head += f" {comment}"
    rows = [f"{a.symbol} {a.position[0]!r} {a.position[1]!r} {a.position[2]!r}" for a in cell.atoms]
    return "\n".join([str(cell.n_atoms), head, *rows]) + "\n"


def electron_count(cell: CrystalCell, table: ValenceTable = DEFAULT_TABLE) -> ElectronCount:
    """Electron count and summed nuclear charge under the cell's electron mode.

    Cells are neutral, so eta equals lambda_zeta in either mode.
    """
    charges = [table.charge(a.symbol, cell.electron_mode) for a in cell.atoms]
    total = int(sum(charges))
    return ElectronCount(eta=total, lambda_zeta=total)


def cell_volume(cell: CrystalCell) -> float:
    """Cell volume in Bohr^3."""
    lx, ly, lz = cell.lengths
    return (lx * ANGSTROM_TO_BOHR) * (ly * ANGSTROM_TO_BOHR) * (lz * ANGSTROM_TO_BOHR)


MODELS = {
    "mg_dimer": "mg_dimer.xyz",
    "nb97_hf3_ti22_zr6_o": "nb97_hf3_ti22_zr6_o.xyz",
    "nb97_ta22_zr3_w6_o": "nb97_ta22_zr3_w6_o.xyz",
    "nb42_ti3_hf3_ta3_zr3_o": "nb42_ti3_hf3_ta3_zr3_o.xyz",
    "nb65_zr6_hf7_ti4_w3": "nb65_zr6_hf7_ti4_w3.xyz",
}


def load_model(name: str, electron_mode: str = "valence", table: ValenceTable = DEFAULT_TABLE) -> CrystalCell:
    """Load one of the bundled representative geometries by name (see ``MODELS``)."""
    try:
        fname = MODELS[name]
    except KeyError:
        raise DomainError(f"unknown bundled model {name!r}; choose from {sorted(MODELS)}") from None
    text = resources.files("corroqre.data").joinpath(fname).read_text(encoding="utf-8")
    return parse_geometry(text, table, electron_mode)
