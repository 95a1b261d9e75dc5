"""Cluster expansion: correlation functions, regularized ECI fitting, LOO-CV and hop barriers.

A configuration assigns a species code to every site. For a cluster orbit
alpha with site instances beta, the correlation function is the average over
instances of the product of per-site basis functions, and the expansion reads

    F(sigma) = J_0 + sum_alpha m_alpha J_alpha Theta_alpha(sigma).

Energies are per atom in eV; CV scores are reported in meV/atom.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .errors import ConfigError, DomainError, ParseError, TopologyError

CV_THRESHOLD_MEV = 5.0
BASES = ("onehot", "trig")


@dataclass(frozen=True)
class Configuration:
    sigma: tuple[int, ...]
    lattice_id: str = "default"

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(int(s) for s in self.sigma))
        if any(s < 0 for s in self.sigma):
            raise DomainError("species codes must be non-negative")


@dataclass(frozen=True)
class ClusterOrbit:
    """Symmetry-distinct cluster: representative sites, per-site basis function, instances.

    ``instances`` lists every site tuple in the orbit; when empty the
    representative ``alpha`` is the only instance.
    """

    alpha: tuple[int, ...]
    basis_choice: tuple[int, ...]
    multiplicity: int = 1
    instances: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(int(s) for s in self.alpha))
        object.__setattr__(self, "basis_choice", tuple(int(b) for b in self.basis_choice))
        inst = tuple(tuple(int(s) for s in t) for t in self.instances) or (self.alpha,)
        object.__setattr__(self, "instances", inst)
        if self.multiplicity < 1:
            raise DomainError("orbit multiplicity must be >= 1")
        if len(self.basis_choice) != len(self.alpha):
            raise DomainError("one basis function per cluster site")
        for t in inst:
            if len(t) != len(self.alpha):
                raise DomainError("all instances must have the cluster's order")
            if len(set(t)) != len(t):
                raise DomainError(f"repeated site in cluster instance {t}")

    @property
    def order(self) -> int:
        return len(self.alpha)

    def as_dict(self) -> dict:
        return {"alpha": list(self.alpha), "basis_choice": list(self.basis_choice),
                "multiplicity": self.multiplicity, "instances": [list(t) for t in self.instances]}

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterOrbit":
        return cls(tuple(d["alpha"]), tuple(d["basis_choice"]), int(d.get("multiplicity", 1)),
                   tuple(tuple(t) for t in d.get("instances", ())))


@dataclass(frozen=True)
class Regularizer:
    kind: str = "none"
    strength: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "ridge", "lasso"):
            raise ConfigError(f"regularizer must be none, ridge or lasso, got {self.kind!r}")
        if self.strength < 0:
            raise ConfigError("regularizer strength must be >= 0")
        if self.kind == "lasso" and self.strength == 0:
            raise ConfigError("lasso needs a positive strength; use kind='none' for plain least squares")


def site_function(sigma: np.ndarray, choice: int, basis: str = "onehot", n_species: int = 2) -> np.ndarray:
    """Point basis function ``phi_choice`` evaluated on species codes."""
    sigma = np.asarray(sigma)
    if basis == "onehot":
        return (sigma == choice).astype(float)
    if basis == "trig":
        if not 1 <= choice < n_species:
            raise DomainError(f"trig basis index must be in [1, {n_species - 1}]")
        j = (choice + 1) // 2
        arg = 2 * np.pi * j * sigma / n_species
        return -np.cos(arg) if choice % 2 == 1 else -np.sin(arg)
    raise ConfigError(f"basis must be one of {BASES}")


def _theta_matrix(sigmas: np.ndarray, orbits: Sequence[ClusterOrbit], basis: str, n_species: int) -> np.ndarray:
    """Theta_alpha for every row of ``sigmas`` (n_configs, n_sites)."""
    n_conf, n_sites = sigmas.shape
    out = np.empty((n_conf, len(orbits)))
    for a, orb in enumerate(orbits):
        inst = np.asarray(orb.instances, dtype=np.int64)
        if inst.size and (inst.max() >= n_sites or inst.min() < 0):
            raise IndexError(f"orbit {orb.alpha} references a site outside 0..{n_sites - 1}")
        prod = np.ones((n_conf, inst.shape[0]))
        for k, b in enumerate(orb.basis_choice):
            prod *= site_function(sigmas[:, inst[:, k]], b, basis, n_species)
        out[:, a] = prod.mean(axis=1)
    return out


def correlation_vector(config: Configuration, orbits: Sequence[ClusterOrbit], basis: str = "onehot",
                       n_species: int = 2) -> np.ndarray:
    """``Pi(sigma) = (1, Theta_alpha1, ...)``."""
    sig = np.asarray(config.sigma, dtype=np.int64)[None, :]
    return np.concatenate([[1.0], _theta_matrix(sig, orbits, basis, n_species)[0]])


def concentration(sigmas: np.ndarray, species: int = 1) -> np.ndarray:
    return (np.asarray(sigmas) == species).mean(axis=1)


def design_matrix(configs: Sequence[Configuration], orbits: Sequence[ClusterOrbit], basis: str = "onehot",
                  n_species: int = 2, concentration_degree: int = 0, concentration_species: int = 1) -> np.ndarray:
    """Rows ``(1, m_alpha Theta_alpha ...)``; with CDLCE each column is repeated times x^k, k = 1..degree."""
    if not configs:
        raise DomainError("no configurations")
    lengths = {len(c.sigma) for c in configs}
    if len(lengths) != 1:
        raise DomainError("all configurations must index the same lattice")
    sig = np.array([c.sigma for c in configs], dtype=np.int64)
    mult = np.array([o.multiplicity for o in orbits], dtype=float)
    base = np.column_stack([np.ones(len(configs)), _theta_matrix(sig, orbits, basis, n_species) * mult])
    if concentration_degree <= 0:
        return base
    x = concentration(sig, concentration_species)
    return np.column_stack([base * (x ** k)[:, None] for k in range(concentration_degree + 1)])


@dataclass
class ClusterExpansionModel:
    orbits: tuple[ClusterOrbit, ...]
    J: np.ndarray
    regularizer: Regularizer = field(default_factory=Regularizer)
    cv_score: float = 0.0  # meV/atom
    basis: str = "onehot"
    n_species: int = 2
    concentration_degree: int = 0
    concentration_species: int = 1
    lattice_id: str = "default"

    def design(self, configs: Sequence[Configuration]) -> np.ndarray:
        return design_matrix(configs, self.orbits, self.basis, self.n_species,
                             self.concentration_degree, self.concentration_species)

    def predict_many(self, configs: Sequence[Configuration]) -> np.ndarray:
        return self.design(configs) @ self.J

    def predict(self, config: Configuration) -> float:
        return float(self.predict_many([config])[0])

    def to_json(self) -> str:
        return json.dumps({
            "orbits": [o.as_dict() for o in self.orbits], "J": [float(j) for j in self.J],
            "regularizer": {"kind": self.regularizer.kind, "strength": self.regularizer.strength},
            "cv_score_meV_per_atom": self.cv_score, "basis": self.basis, "n_species": self.n_species,
            "concentration_degree": self.concentration_degree,
            "concentration_species": self.concentration_species, "lattice_id": self.lattice_id,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ClusterExpansionModel":
        d = json.loads(text)
        reg = d.get("regularizer", {})
        return cls(tuple(ClusterOrbit.from_dict(o) for o in d["orbits"]), np.array(d["J"], float),
                   Regularizer(reg.get("kind", "none"), float(reg.get("strength", 0.0))),
                   float(d.get("cv_score_meV_per_atom", 0.0)), d.get("basis", "onehot"),
                   int(d.get("n_species", 2)), int(d.get("concentration_degree", 0)),
                   int(d.get("concentration_species", 1)), d.get("lattice_id", "default"))


def constant_model(j0: float, lattice_id: str = "default") -> ClusterExpansionModel:
    return ClusterExpansionModel((), np.array([float(j0)]), lattice_id=lattice_id)


def parse_training_csv(text: str, lattice_id: str = "default") -> list[tuple[Configuration, float]]:
    """Rows of integer site codes followed by the energy (eV/atom); one optional header row."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].lstrip().startswith("#")]
    if rows and not _numeric_row(rows[0]):
        rows = rows[1:]
    out, width = [], None
    for k, row in enumerate(rows, start=1):
        if len(row) < 2:
            raise ParseError("expected site codes followed by an energy", line=k)
        if width is not None and len(row) != width:
            raise ParseError(f"expected {width} columns, found {len(row)}", line=k)
        width = len(row)
        try:
            codes = tuple(int(c) for c in row[:-1])
            energy = float(row[-1])
        except ValueError:
            raise ParseError(f"non-numeric entry in {row!r}", line=k) from None
        if not math.isfinite(energy):
            raise ParseError("non-finite energy", line=k)
        try:
            out.append((Configuration(codes, lattice_id), energy))
        except DomainError as exc:
            raise ParseError(str(exc), line=k) from None
    if not out:
        raise ParseError("no training rows", line=1)
    return out


def _numeric_row(row) -> bool:
    try:
        [float(c) for c in row]
    except ValueError:
        return False
    return True


def parse_training_json(text: str, lattice_id: str = "default") -> list[tuple[Configuration, float]]:
    """List of ``{"sigma": [...], "energy": e}`` objects."""
    try:
        data = json.loads(text)
        return [(Configuration(tuple(d["sigma"]), lattice_id), float(d["energy"])) for d in data]
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"malformed training JSON: {exc}") from None


def training_to_csv(train: Sequence[tuple[Configuration, float]]) -> str:
    n = len(train[0][0].sigma)
    lines = [",".join([f"s{i}" for i in range(n)] + ["energy_eV_per_atom"])]
    lines += [",".join([str(c) for c in cfg.sigma] + [repr(float(e))]) for cfg, e in train]
    return "\n".join(lines) + "\n"


# --- solvers -----------------------------------------------------------------

def _penalty_mask(p: int) -> np.ndarray:
    d = np.ones(p)
    d[0] = 0.0
    return d


def _solve_ridge(X: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    A = X.T @ X + lam * np.diag(_penalty_mask(X.shape[1]))
    b = X.T @ y
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(A, b, rcond=None)[0]


def _solve_lasso(X: np.ndarray, y: np.ndarray, lam: float, tol: float = 1e-10, max_sweeps: int = 100000) -> np.ndarray:
    """Coordinate descent on ``|y - X J|^2 + lam |J[1:]|_1`` with J[0] unpenalized.

    The intercept is profiled out by centering; iteration stops once the
    duality gap of the centered problem falls below ``tol``.
    """
    xm = X[:, 1:].mean(axis=0)
    ym = y.mean()
    Xc = X[:, 1:] - xm
    yc = y - ym
    p = Xc.shape[1]
    w = np.zeros(p)
    col_sq = (Xc ** 2).sum(axis=0)
    r = yc.copy()
    half = lam / 2.0
    for _ in range(max_sweeps):
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            rho = Xc[:, j] @ r + col_sq[j] * w[j]
            new = math.copysign(max(abs(rho) - half, 0.0), rho) / col_sq[j]
            if new != w[j]:
                r -= Xc[:, j] * (new - w[j])
                w[j] = new
        # gap of 1/2|r|^2 + (lam/2)|w|_1, scaled back by 2
        corr = np.abs(Xc.T @ r).max() if p else 0.0
        s = min(1.0, half / corr) if corr > 0 else 1.0
        theta = s * r
        primal = 0.5 * r @ r + half * np.abs(w).sum()
        dual = yc @ theta - 0.5 * theta @ theta
        if 2.0 * (primal - dual) <= tol:
            break
    return np.concatenate([[ym - xm @ w], w])


def solve(X: np.ndarray, y: np.ndarray, reg: Regularizer) -> np.ndarray:
    if reg.kind == "none":
        return np.linalg.lstsq(X, y, rcond=None)[0]
    if reg.kind == "ridge":
        return _solve_ridge(X, y, reg.strength)
    return _solve_lasso(X, y, reg.strength)


def objective(X: np.ndarray, y: np.ndarray, J: np.ndarray, reg: Regularizer) -> float:
    res = y - X @ J
    val = float(res @ res)
    if reg.kind == "ridge":
        val += reg.strength * float(J[1:] @ J[1:])
    elif reg.kind == "lasso":
        val += reg.strength * float(np.abs(J[1:]).sum())
    return val


def _check_train(train):
    if len(train) == 0:
        raise DomainError("empty training set")
    configs = [c for c, _ in train]
    energies = np.array([float(e) for _, e in train], dtype=float)
    if not np.all(np.isfinite(energies)):
        raise DomainError("non-finite training energies")
    return configs, energies


def fit_eci(train: Sequence[tuple[Configuration, float]], orbits: Sequence[ClusterOrbit],
            regularizer: Regularizer = Regularizer(), basis: str = "onehot", n_species: int = 2,
            concentration_degree: int = 0, concentration_species: int = 1,
            with_cv: bool = False) -> ClusterExpansionModel:
    """Fit ECIs to ``(configuration, energy [eV/atom])`` pairs."""
    configs, energies = _check_train(train)
    model = ClusterExpansionModel(tuple(orbits), np.zeros(0), regularizer, 0.0, basis, n_species,
                                  concentration_degree, concentration_species, configs[0].lattice_id)
    X = model.design(configs)
    model.J = solve(X, energies, regularizer)
    if with_cv and len(train) >= 2:
        model.cv_score = loo_cv(train, orbits, regularizer, basis=basis, n_species=n_species,
                                concentration_degree=concentration_degree,
                                concentration_species=concentration_species)
    return model


def loo_residuals_literal(X: np.ndarray, y: np.ndarray, reg: Regularizer, n_workers: int = 1) -> np.ndarray:
    """Residual of each row under a fit to the other n - 1 rows."""
    n = X.shape[0]

    def one(i):
        keep = np.ones(n, dtype=bool)
        keep[i] = False
        return y[i] - X[i] @ solve(X[keep], y[keep], reg)

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as ex:
            return np.array(list(ex.map(one, range(n))))
    return np.array([one(i) for i in range(n)])


def loo_residuals_hat(X: np.ndarray, y: np.ndarray, reg: Regularizer) -> np.ndarray:
    """LOO residuals ``e_i / (1 - H_ii)`` for linear smoothers; rows with H_ii near 1 are refit literally."""
    if reg.kind == "lasso":
        raise DomainError("hat-matrix LOO applies to ridge or unregularized fits only")
    if reg.kind == "ridge":
        A = X.T @ X + reg.strength * np.diag(_penalty_mask(X.shape[1]))
        H = X @ np.linalg.solve(A, X.T)
    else:
        H = X @ np.linalg.pinv(X)
    resid = y - H @ y
    h = np.diag(H)
    out = np.empty_like(resid)
    ok = (1.0 - h) > 1e-8
    out[ok] = resid[ok] / (1.0 - h[ok])
    for i in np.nonzero(~ok)[0]:
        keep = np.ones(len(y), dtype=bool)
        keep[i] = False
        out[i] = y[i] - X[i] @ solve(X[keep], y[keep], reg)
    return out


def loo_cv(train: Sequence[tuple[Configuration, float]], orbits: Sequence[ClusterOrbit],
           regularizer: Regularizer = Regularizer(), method: str = "literal", basis: str = "onehot",
           n_species: int = 2, concentration_degree: int = 0, concentration_species: int = 1,
           n_workers: int = 1) -> float:
    """Leave-one-out CV score ``sqrt(mean (E_i - E_hat_i)^2)`` in meV/atom."""
    configs, energies = _check_train(train)
    if len(configs) < 2:
        raise DomainError("LOO-CV needs at least 2 training points")
    X = design_matrix(configs, orbits, basis, n_species, concentration_degree, concentration_species)
    if method == "literal":
        res = loo_residuals_literal(X, energies, regularizer, n_workers)
    elif method == "hat":
        res = loo_residuals_hat(X, energies, regularizer)
    else:
        raise ConfigError("method must be 'literal' or 'hat'")
    return float(np.sqrt(np.mean(res ** 2)) * 1000.0)


def cv_passes(cv_mev: float, threshold: float = CV_THRESHOLD_MEV) -> bool:
    return bool(cv_mev < threshold)


# --- orbits on periodic lattices ---------------------------------------------

@dataclass(frozen=True)
class PeriodicLattice:
    """Sublattice sites of an orthorhombic cell repeated ``supercell`` times."""

    cell: tuple[float, float, float]
    basis: tuple[tuple[float, float, float], ...]
    supercell: tuple[int, int, int]
    lattice_id: str = "periodic"

    @property
    def n_sub(self) -> int:
        return len(self.basis)

    @property
    def n_sites(self) -> int:
        return self.n_sub * math.prod(self.supercell)

    def site_index(self, sub: int, cell_idx) -> int:
        c = np.mod(np.asarray(cell_idx, dtype=int), self.supercell)
        return int(((c[0] * self.supercell[1] + c[1]) * self.supercell[2] + c[2]) * self.n_sub + sub)

    def position(self, sub: int, cell_idx) -> np.ndarray:
        return (np.asarray(cell_idx, float) + np.asarray(self.basis[sub], float)) * np.asarray(self.cell, float)


def bcc_lattice(a: float, supercell=(2, 2, 2)) -> PeriodicLattice:
    return PeriodicLattice((a, a, a), ((0.0, 0.0, 0.0), (0.5, 0.5, 0.5)), tuple(supercell), "bcc")


def translation_orbits(lattice: PeriodicLattice, prototypes) -> list[ClusterOrbit]:
    """One orbit per prototype: all lattice translations of ``[(sub, cell_offset), ...]``.

    ``prototypes`` holds ``(sites, basis_choice)`` with ``sites`` a sequence of
    ``(sublattice, (cx, cy, cz))``. Multiplicity is 1 per unit cell.
    """
    orbits = []
    cells = list(itertools.product(*(range(n) for n in lattice.supercell)))
    for sites, choice in prototypes:
        inst = []
        for c in cells:
            t = tuple(lattice.site_index(s, np.add(c, off)) for s, off in sites)
            if len(set(t)) != len(t):
                raise DomainError(f"prototype {sites} wraps onto itself in a {lattice.supercell} supercell")
            inst.append(t)
        orbits.append(ClusterOrbit(inst[0], tuple(choice), 1, tuple(inst)))
    return orbits


def pair_prototypes(lattice: PeriodicLattice, cutoff: float, choice=(1, 1), tol: float = 1e-8):
    """Translation-distinct pairs up to ``cutoff``; (a, b) and (b, a) count once."""
    protos, seen = [], set()
    span = [int(math.ceil(cutoff / L)) + 1 for L in lattice.cell]
    for s0 in range(lattice.n_sub):
        p0 = lattice.position(s0, (0, 0, 0))
        for s1 in range(lattice.n_sub):
            for off in itertools.product(*(range(-n, n + 1) for n in span)):
                d = lattice.position(s1, off) - p0
                dist = float(np.linalg.norm(d))
                if dist < tol or dist > cutoff + tol:
                    continue
                key = (s0, s1, tuple(np.round(d, 6)))
                mirror = (s1, s0, tuple(np.round(-d, 6)))
                if key in seen or mirror in seen:
                    continue
                seen.add(key)
                protos.append(([(s0, (0, 0, 0)), (s1, off)], tuple(choice)))
    return protos


# --- hop barriers ------------------------------------------------------------

class HopLattice(Protocol):
    lattice_id: str

    def adjacent(self, i: int, j: int) -> bool: ...

    def environment(self, config: Configuration, anchor: tuple) -> Configuration: ...


@dataclass
class TableHopLattice:
    """Hop topology given by explicit neighbor sets and per-anchor environment site lists.

    Anchors are ``("oct", i)`` for an interstitial site and ``("tet", i, j)``
    for the saddle between adjacent sites; each maps to the ordered metal
    sites whose species form the local configuration seen by the CE model.
    """

    neighbors: dict
    oct_sites: dict
    tet_sites: dict
    lattice_id: str = "default"

    def adjacent(self, i: int, j: int) -> bool:
        return j in self.neighbors.get(i, ())

    def environment(self, config: Configuration, anchor: tuple) -> Configuration:
        if anchor[0] == "oct":
            sites = self.oct_sites[anchor[1]]
        else:
            key = (anchor[1], anchor[2])
            sites = self.tet_sites[key] if key in self.tet_sites else self.tet_sites[(anchor[2], anchor[1])]
        return Configuration(tuple(config.sigma[s] for s in sites), f"{anchor[0]}-env")


def barrier(oct_model: ClusterExpansionModel, tet_model: ClusterExpansionModel, config: Configuration,
            hop: tuple[int, int], lattice: HopLattice | None = None, clamp: bool = False) -> float:
    """``E_{i->j} = F_tet(sigma_{i->j}) - F_oct(sigma)`` in eV.

    With ``lattice`` the models see the local environments of the saddle and
    of site i; without it both see ``config`` unchanged. Negative values pass
    through unless ``clamp``.
    """
    i, j = hop
    if lattice is None:
        e = tet_model.predict(config) - oct_model.predict(config)
    else:
        if config.lattice_id != lattice.lattice_id:
            raise TopologyError(f"configuration indexes lattice {config.lattice_id!r}, "
                                f"hop lattice is {lattice.lattice_id!r}")
        if not lattice.adjacent(i, j):
            raise TopologyError(f"sites {i} and {j} are not adjacent")
        e = tet_model.predict(lattice.environment(config, ("tet", i, j))) \
            - oct_model.predict(lattice.environment(config, ("oct", i)))
    return max(e, 0.0) if clamp else e
