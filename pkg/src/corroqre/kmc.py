"""Rejection-free kinetic Monte Carlo for one oxygen atom on an interstitial sublattice.

Rates follow k = nu0 exp(-E / kB T). Each step picks a neighbor by
cumulative-sum inversion of r1 * k_tot and advances time by ln(1/r2) / k_tot.

Random streams: trajectory ``m`` of an ensemble with seed ``s`` draws from
``Generator(Philox(SeedSequence(s, spawn_key=(m,))))``, consuming uniforms in
blocks of ``BLOCK`` steps (``r1, r2`` interleaved). Results therefore depend
only on ``(s, m)``, never on worker count or chunking.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cluster_expansion import ClusterExpansionModel, Configuration, TableHopLattice, barrier
from .constants import BOHR_TO_CM, DEFAULT_NU0, K_B_EV
from .errors import AbsorbingStateError, DomainError, TopologyError

BLOCK = 1024
TIMESCALE_WARN = 10.0


class KmcTimescaleWarning(RuntimeWarning):
    """Mean residence time is not well above the attempt period."""


@dataclass(frozen=True)
class KmcLattice:
    """Interstitial sites with fixed-degree neighbor tables.

    ``neighbors[i, k]`` is the k-th neighbor of site i and ``jumps[i, k]`` the
    unwrapped jump vector (Bohr). Metal sites and environment radius are only
    needed for cluster-expansion barriers.
    """

    positions: np.ndarray  # (n, 3) Bohr
    neighbors: np.ndarray  # (n, z) int
    jumps: np.ndarray  # (n, z, 3) Bohr
    cell: np.ndarray  # (3,) periodic box, Bohr
    metal_positions: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    occupancy: Configuration | None = None
    env_cutoff: float = 0.0
    lattice_id: str = "kmc"

    def __post_init__(self):
        n, z = self.neighbors.shape
        if self.positions.shape != (n, 3) or self.jumps.shape != (n, z, 3):
            raise DomainError("inconsistent lattice array shapes")
        for i in range(n):
            if len(set(self.neighbors[i].tolist())) != z:
                raise TopologyError(f"site {i} lists a neighbor twice; enlarge the supercell")
            for k in range(z):
                j = self.neighbors[i, k]
                back = np.nonzero(self.neighbors[j] == i)[0]
                if back.size != 1 or not np.allclose(self.jumps[j, back[0]], -self.jumps[i, k]):
                    raise TopologyError(f"adjacency not symmetric for bond {i}-{j}")
                wrapped = self.positions[i] + self.jumps[i, k] - self.positions[j]
                frac = wrapped / self.cell
                if not np.allclose(frac, np.round(frac), atol=1e-9):
                    raise TopologyError(f"jump {i}->{j} inconsistent with periodic positions")
        if self.occupancy is not None and len(self.occupancy.sigma) != len(self.metal_positions):
            raise DomainError("occupancy length must match the metal sublattice")

    @property
    def n_sites(self) -> int:
        return self.neighbors.shape[0]

    @property
    def degree(self) -> int:
        return self.neighbors.shape[1]

    def _env(self, center: np.ndarray) -> tuple[int, ...]:
        d = self.metal_positions - center
        d -= self.cell * np.round(d / self.cell)
        r = np.linalg.norm(d, axis=1)
        sel = np.nonzero(r <= self.env_cutoff + 1e-9)[0]
        order = np.lexsort((sel, np.round(r[sel], 8)))
        return tuple(int(s) for s in sel[order])

    def env_shells(self, center: np.ndarray) -> list[int]:
        """Sizes of the metal distance shells around ``center`` within the cutoff."""
        d = self.metal_positions - center
        d -= self.cell * np.round(d / self.cell)
        r = np.round(np.linalg.norm(d, axis=1), 8)
        r = r[r <= self.env_cutoff + 1e-9]
        _, counts = np.unique(r, return_counts=True)
        return counts.tolist()

    def hop_lattice(self) -> TableHopLattice:
        """Environment tables consumed by ``cluster_expansion.barrier``."""
        nbrs = {i: set(self.neighbors[i].tolist()) for i in range(self.n_sites)}
        oct_sites = {i: self._env(self.positions[i]) for i in range(self.n_sites)}
        tet_sites = {}
        for i in range(self.n_sites):
            for k in range(self.degree):
                j = int(self.neighbors[i, k])
                tet_sites[(i, j)] = self._env(self.positions[i] + 0.5 * self.jumps[i, k])
        lid = self.occupancy.lattice_id if self.occupancy is not None else self.lattice_id
        return TableHopLattice(nbrs, oct_sites, tet_sites, lid)


def bcc_octahedral_lattice(a_bohr: float, supercell=(2, 2, 2), occupancy: Configuration | None = None,
                           env_cutoff: float | None = None) -> KmcLattice:
    """Octahedral sites of a BCC supercell: 3 face centers + 3 edge midpoints per cubic cell.

    Each site has 4 octahedral neighbors at a/2, reached through tetrahedral
    saddles. Metal sites (corner, body center) are indexed cell-major with
    the corner first.
    """
    sc = tuple(int(n) for n in supercell)
    if any(n < 2 for n in sc):
        raise DomainError("supercell must be at least 2 cells along each axis")
    frac = np.array([[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5],
                     [0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.5]])
    cells = np.array([(i, j, k) for i in range(sc[0]) for j in range(sc[1]) for k in range(sc[2])], float)
    pos2 = ((cells[:, None, :] + frac[None, :, :]) * 2).reshape(-1, 3).round().astype(int)  # half-units
    dims2 = 2 * np.array(sc)
    index = {tuple(p): n for n, p in enumerate(pos2)}
    nbr = np.empty((len(pos2), 4), dtype=np.int64)
    jmp = np.empty((len(pos2), 4, 3))
    for n, p in enumerate(pos2):
        # edge midpoints (one odd half-coordinate) hop across the other two axes,
        # face centers (two odd) hop along their own in-face axes
        odd = [ax for ax in range(3) if p[ax] % 2 == 1]
        axes = odd if len(odd) == 2 else [ax for ax in range(3) if ax not in odd]
        k = 0
        for ax in axes:
            for sgn in (1, -1):
                q = p.copy()
                q[ax] += sgn
                nbr[n, k] = index[tuple(np.mod(q, dims2))]
                jmp[n, k] = 0.0
                jmp[n, k, ax] = sgn * a_bohr / 2
                k += 1
    metal_frac = np.array([[0.0, 0.0, 0.0], [0.5, 0.5, 0.5]])
    metal = ((cells[:, None, :] + metal_frac[None]) * a_bohr).reshape(-1, 3)
    return KmcLattice(pos2 * (a_bohr / 2), nbr, jmp, np.array(sc, float) * a_bohr, metal, occupancy,
                      0.75 * a_bohr if env_cutoff is None else float(env_cutoff), "bcc-octahedral")


def chain_lattice(n_sites: int, spacing: float) -> KmcLattice:
    """Periodic 1D chain along x; neighbor 0 is +x, neighbor 1 is -x."""
    if n_sites < 3:
        raise DomainError("chain needs at least 3 sites")
    idx = np.arange(n_sites)
    nbr = np.stack([(idx + 1) % n_sites, (idx - 1) % n_sites], axis=1)
    jmp = np.zeros((n_sites, 2, 3))
    jmp[:, 0, 0] = spacing
    jmp[:, 1, 0] = -spacing
    pos = np.zeros((n_sites, 3))
    pos[:, 0] = idx * spacing
    return KmcLattice(pos, nbr, jmp, np.array([n_sites * spacing, 1.0, 1.0]), lattice_id="chain")


@dataclass(frozen=True)
class KmcParams:
    temperature: float  # K
    n_steps: int
    n_trajectories: int = 1
    seed: int = 0
    nu0: float = DEFAULT_NU0  # 1/s
    start_site: int = 0

    def __post_init__(self):
        if not self.nu0 > 0:
            raise DomainError("nu0 must be > 0")
        if not self.temperature > 0:
            raise DomainError("temperature must be > 0")
        if self.n_trajectories < 1:
            raise DomainError("need at least one trajectory")
        if self.n_steps < 0:
            raise DomainError("n_steps must be >= 0")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass
class KmcTrajectory:
    times: np.ndarray  # (n_steps + 1,) s
    positions: np.ndarray  # (n_steps + 1, 3) Bohr, unwrapped
    seed: tuple[int, int]  # (ensemble seed, trajectory index)
    sites: np.ndarray | None = None

    def to_csv(self) -> str:
        rows = ["t_s,x_bohr,y_bohr,z_bohr"]
        rows += [f"{t!r},{p[0]!r},{p[1]!r},{p[2]!r}" for t, p in zip(self.times.tolist(), self.positions.tolist())]
        return "\n".join(rows) + "\n"


def hop_rate(e_barrier, temperature: float, nu0: float = DEFAULT_NU0):
    """Arrhenius hop rate in 1/s; ``kB = 8.617333262e-5 eV/K``. Infinite barriers give 0."""
    if not temperature > 0:
        raise DomainError("temperature must be > 0")
    k = nu0 * np.exp(-np.asarray(e_barrier, dtype=float) / (K_B_EV * temperature))
    return float(k) if np.ndim(k) == 0 else k


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def kmc_step(rates: Sequence[float], rng: np.random.Generator | None = None,
             r1: float | None = None, r2: float | None = None) -> tuple[int, float]:
    """One residence-time step: ``(chosen neighbor, delta_t)``.

    ``r1`` and ``r2`` may be forced; otherwise they are drawn from ``rng``
    (r1 first). ``r2`` lies in (0, 1].
    """
    k = np.asarray(rates, dtype=float)
    if np.any(k < 0) or not np.all(np.isfinite(k)):
        raise DomainError("rates must be finite and non-negative")
    k_tot = float(k.sum())
    if k_tot <= 0:
        raise AbsorbingStateError("all outgoing rates are zero")
    if r1 is None:
        r1 = rng.random()
    if r2 is None:
        r2 = 1.0 - rng.random()
    cum = np.cumsum(k)
    n = min(int(np.count_nonzero(cum <= r1 * k_tot)), len(k) - 1)
    return n, math.log(1.0 / r2) / k_tot


# --- barriers ----------------------------------------------------------------

@dataclass
class BarrierTable:
    energies: np.ndarray  # (n, z) eV
    n_negative: int
    n_evaluations: int


def barrier_table(lattice: KmcLattice, barriers, clamp: bool = False, verify: bool = False) -> BarrierTable:
    """Per-bond barriers from a float (uniform), an (n, z) array, or an (oct, tet) model pair.

    CE barriers are cached by the occupancy fingerprint of the saddle and
    origin environments; ``verify`` recomputes every bond and compares.
    """
    n, z = lattice.neighbors.shape
    if isinstance(barriers, (int, float)):
        E = np.full((n, z), float(barriers))
        evals = 0
    elif isinstance(barriers, np.ndarray):
        if barriers.shape != (n, z):
            raise DomainError(f"barrier array must have shape {(n, z)}")
        E = barriers.astype(float).copy()
        evals = 0
    else:
        oct_model, tet_model = barriers
        if lattice.occupancy is None:
            raise DomainError("CE barriers need a metal occupancy on the lattice")
        hl = lattice.hop_lattice()
        cfg = lattice.occupancy
        sig = cfg.sigma
        cache: dict = {}
        E = np.empty((n, z))
        evals = 0
        for i in range(n):
            for k in range(z):
                j = int(lattice.neighbors[i, k])
                key = (tuple(sig[s] for s in hl.oct_sites[i]), tuple(sig[s] for s in hl.tet_sites[(i, j)]))
                if key not in cache:
                    cache[key] = barrier(oct_model, tet_model, cfg, (i, j), hl, clamp=False)
                    evals += 1
                E[i, k] = cache[key]
                if verify:
                    exact = barrier(oct_model, tet_model, cfg, (i, j), hl, clamp=False)
                    if exact != E[i, k]:
                        raise RuntimeError(f"barrier cache mismatch on bond {i}->{j}")
    if np.any(np.isnan(E)):
        raise DomainError("barrier table contains NaN")
    n_neg = int(np.count_nonzero(E < 0))
    if clamp:
        E = np.maximum(E, 0.0)
    return BarrierTable(E, n_neg, evals)


# --- propagation -------------------------------------------------------------

@dataclass
class EnsembleResult:
    temperature: float
    n_trajectories: int
    n_steps: int
    displacements: np.ndarray  # (n_s, 3) Bohr
    total_times: np.ndarray  # (n_s,) s
    literal_sums: np.ndarray  # (n_s,) sum over steps of |dx|^2 / dt, Bohr^2/s
    mean_dt_over_inv_nu0: float
    visits: np.ndarray | None = None
    bond_counts: np.ndarray | None = None
    trajectories: list = field(default_factory=list)
    n_negative_barriers: int = 0

    def diffusivity(self) -> "DiffusivityEstimate":
        return _estimate(self.displacements, self.total_times, self.literal_sums, self.n_steps)


@dataclass(frozen=True)
class DiffusivityEstimate:
    D: float  # cm^2/s, ensemble MSD / (6 t)
    stderr: float  # cm^2/s
    D_literal: float  # cm^2/s, mean per-step |dx|^2 / (6 dt)
    n_s: int


_CM2 = BOHR_TO_CM ** 2


def _estimate(disp, times, literal, n_steps) -> DiffusivityEstimate:
    if n_steps < 1 or np.any(times <= 0):
        raise DomainError("degenerate trajectories: need at least one step and positive elapsed time")
    sq = np.einsum("ij,ij->i", disp, disp)
    D = sq.mean() / (6.0 * times.mean())
    per = sq / (6.0 * times)
    se = per.std(ddof=1) / math.sqrt(len(per)) if len(per) > 1 else float("nan")
    lit = literal.mean() / (6.0 * n_steps)
    return DiffusivityEstimate(float(D * _CM2), float(se * _CM2), float(lit * _CM2), len(per))


SCALAR_CHUNK = 8


def _uniform_block(rngs, b: int):
    """``r1`` and ``ln(1/r2)`` for the next ``b`` steps of each stream, shape (n_s, b)."""
    u = np.stack([g.random((BLOCK, 2)) for g in rngs], axis=0)
    # log taken on one contiguous buffer so every element follows the same code path
    lg = np.log(1.0 / (1.0 - np.ascontiguousarray(u[:, :, 1])))
    return np.ascontiguousarray(u[:, :b, 0]), lg[:, :b]


class _Recorder:
    def __init__(self, n_steps: int, start: int):
        self.t = np.empty(n_steps + 1)
        self.x = np.empty((n_steps + 1, 3))
        self.s = np.empty(n_steps + 1, dtype=np.int64)
        self.t[0] = 0.0
        self.x[0] = 0.0
        self.s[0] = start


def _run_chunk(rates, lattice: KmcLattice, params: KmcParams, indices: Sequence[int],
               track: bool, keep: set):
    """Propagate the trajectories in ``indices``.

    Small chunks walk each trajectory with Python scalars, larger ones step
    all walkers together with numpy; both perform the same IEEE operations in
    the same order, so results agree bit for bit.
    """
    n_s = len(indices)
    z = lattice.degree
    cum = np.cumsum(rates, axis=1)
    k_tot = cum[:, -1]
    jump_sq = np.einsum("nzi,nzi->nz", lattice.jumps, lattice.jumps)
    rngs = [trajectory_rng(params.seed, m) for m in indices]
    visits = np.zeros(lattice.n_sites, dtype=np.int64) if track else None
    bonds = np.zeros((lattice.n_sites, z), dtype=np.int64) if track else None
    recs = {m: _Recorder(params.n_steps, params.start_site) for m in indices if m in keep}
    if track:
        visits[params.start_site] += n_s
    disp = np.zeros((n_s, 3))
    t = np.zeros(n_s)
    lit = np.zeros(n_s)
    if n_s <= SCALAR_CHUNK:
        for pos, m in enumerate(indices):
            d, tt, ll = _walk_scalar(cum, k_tot, jump_sq, lattice, params, rngs[pos], recs.get(m), visits, bonds)
            disp[pos], t[pos], lit[pos] = d, tt, ll
    else:
        _walk_vector(cum, k_tot, jump_sq, lattice, params, rngs, indices, recs, visits, bonds, disp, t, lit)
    trajs = [KmcTrajectory(r.t, r.x, (params.seed, m), r.s) for m, r in recs.items()]
    return disp, t, lit, visits, bonds, trajs


def _walk_scalar(cum, k_tot, jump_sq, lattice, params, rng, rec, visits, bonds):
    z = lattice.degree
    cum_l = cum.tolist()
    kt_l = k_tot.tolist()
    nbr_l = lattice.neighbors.tolist()
    jmp_l = lattice.jumps.tolist()
    jsq_l = jump_sq.tolist()
    cur = params.start_site
    dx = dy = dz = 0.0
    t = lit = 0.0
    step = 0
    while step < params.n_steps:
        b = min(BLOCK, params.n_steps - step)
        u1, lg = _uniform_block([rng], b)
        for r1, g in zip(u1[0].tolist(), lg[0].tolist()):
            kt = kt_l[cur]
            if kt <= 0:
                raise AbsorbingStateError("trajectory reached a site with all rates zero")
            x = r1 * kt
            row = cum_l[cur]
            c = 0
            for v in row:
                if v <= x:
                    c += 1
            if c > z - 1:
                c = z - 1
            dt = g / kt
            j = jmp_l[cur][c]
            dx += j[0]
            dy += j[1]
            dz += j[2]
            lit += jsq_l[cur][c] / dt
            t += dt
            if bonds is not None:
                bonds[cur, c] += 1
            cur = nbr_l[cur][c]
            if visits is not None:
                visits[cur] += 1
            step += 1
            if rec is not None:
                rec.t[step] = t
                rec.x[step] = (dx, dy, dz)
                rec.s[step] = cur
    return (dx, dy, dz), t, lit


def _walk_vector(cum, k_tot, jump_sq, lattice, params, rngs, indices, recs, visits, bonds, disp, t, lit):
    z = lattice.degree
    n_s = len(indices)
    cur = np.full(n_s, params.start_site, dtype=np.int64)
    kept = [(pos, recs[m]) for pos, m in enumerate(indices) if m in recs]
    step = 0
    while step < params.n_steps:
        b = min(BLOCK, params.n_steps - step)
        u1, lg = _uniform_block(rngs, b)
        for s in range(b):
            kt = k_tot[cur]
            if np.any(kt <= 0):
                raise AbsorbingStateError("trajectory reached a site with all rates zero")
            choice = np.minimum((cum[cur] <= (u1[:, s] * kt)[:, None]).sum(axis=1), z - 1)
            dt = lg[:, s] / kt
            disp += lattice.jumps[cur, choice]
            lit += jump_sq[cur, choice] / dt
            t += dt
            if bonds is not None:
                np.add.at(bonds, (cur, choice), 1)
            cur = lattice.neighbors[cur, choice]
            if visits is not None:
                np.add.at(visits, cur, 1)
            for pos, rec in kept:
                rec.t[step + s + 1] = t[pos]
                rec.x[step + s + 1] = disp[pos]
                rec.s[step + s + 1] = cur[pos]
        step += b


def run_ensemble(lattice: KmcLattice, barriers, params: KmcParams, n_workers: int = 1,
                 chunk_size: int = 1024, track: bool = False, keep_trajectories: int | Sequence[int] = 0,
                 clamp: bool = False, warn: bool = True) -> EnsembleResult:
    """Propagate ``params.n_trajectories`` independent walkers.

    Trajectories are split into fixed chunks of ``chunk_size`` and handed to
    a thread pool; each trajectory owns its random stream, so the output is
    identical for any ``n_workers``.
    """
    if not 0 <= params.start_site < lattice.n_sites:
        raise DomainError("start site out of range")
    table = barrier_table(lattice, barriers, clamp=clamp)
    rates = np.asarray(hop_rate(table.energies, params.temperature, params.nu0), dtype=float).reshape(table.energies.shape)
    if np.any(~np.isfinite(rates)):
        raise DomainError("non-finite hop rates")
    if float(rates[params.start_site].sum()) <= 0:
        raise AbsorbingStateError("start site has no outgoing rate")
    keep = set(range(keep_trajectories)) if isinstance(keep_trajectories, int) else set(keep_trajectories)
    idx = list(range(params.n_trajectories))
    chunks = [idx[i:i + chunk_size] for i in range(0, len(idx), chunk_size)]
    job = lambda c: _run_chunk(rates, lattice, params, c, track, keep)  # noqa: E731
    if n_workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as ex:
            parts = list(ex.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]
    disp = np.concatenate([p[0] for p in parts])
    t = np.concatenate([p[1] for p in parts])
    lit = np.concatenate([p[2] for p in parts])
    visits = bonds = None
    if track:
        visits = sum(p[3] for p in parts)
        bonds = sum(p[4] for p in parts)
    trajs = [tr for p in parts for tr in p[5]]
    mean_ratio = float(t.sum() / (params.n_trajectories * params.n_steps) * params.nu0) if params.n_steps else float("nan")
    if warn and params.n_steps and mean_ratio < TIMESCALE_WARN:
        warnings.warn(f"mean dt * nu0 = {mean_ratio:.3g} < {TIMESCALE_WARN}; residence times are "
                      "not well separated from the attempt period", KmcTimescaleWarning, stacklevel=2)
    return EnsembleResult(params.temperature, params.n_trajectories, params.n_steps, disp, t, lit,
                          mean_ratio, visits, bonds, trajs, table.n_negative)


def run_trajectory(lattice: KmcLattice, barriers, params: KmcParams, trajectory_seed: int | None = None,
                   index: int = 0, track: bool = False) -> KmcTrajectory:
    """Single trajectory ``index`` of the ensemble seeded by ``trajectory_seed`` (default ``params.seed``)."""
    seed = params.seed if trajectory_seed is None else int(trajectory_seed)
    p = KmcParams(params.temperature, params.n_steps, index + 1, seed, params.nu0, params.start_site)
    res = run_ensemble(lattice, barriers, p, chunk_size=1, keep_trajectories=[index], track=track, warn=False)
    return res.trajectories[0]


def diffusivity(trajectories: Sequence[KmcTrajectory]) -> DiffusivityEstimate:
    """MSD estimator and the literal per-step estimator from recorded trajectories (cm^2/s)."""
    if not trajectories:
        raise DomainError("no trajectories")
    for tr in trajectories:
        if len(tr.times) < 2:
            raise DomainError("each trajectory needs at least 2 points")
    lengths = {len(tr.times) for tr in trajectories}
    if len(lengths) != 1:
        raise DomainError("trajectories must have equal step counts")
    disp = np.array([tr.positions[-1] - tr.positions[0] for tr in trajectories])
    times = np.array([tr.times[-1] - tr.times[0] for tr in trajectories])
    lit = []
    for tr in trajectories:
        dx = np.diff(tr.positions, axis=0)
        dt = np.diff(tr.times)
        if np.any(dt <= 0):
            raise DomainError("times must be strictly increasing")
        lit.append(float((np.einsum("ij,ij->i", dx, dx) / dt).sum()))
    return _estimate(disp, times, np.array(lit), lengths.pop() - 1)


def sweep_temperatures(lattice: KmcLattice, barriers, temperatures: Sequence[float], n_steps: int,
                       n_trajectories: int, seed: int = 0, nu0: float = DEFAULT_NU0, n_workers: int = 1,
                       clamp: bool = False):
    """D(T) rows; every temperature reuses the same seed (common random numbers)."""
    rows = []
    for T in sorted(float(x) for x in temperatures):
        res = run_ensemble(lattice, barriers, KmcParams(T, n_steps, n_trajectories, seed, nu0),
                           n_workers=n_workers, clamp=clamp)
        est = res.diffusivity()
        rows.append({"T_K": T, "D_cm2_per_s": est.D, "stderr_cm2_per_s": est.stderr,
                     "D_literal_cm2_per_s": est.D_literal, "n_s": est.n_s,
                     "mean_dt_over_inv_nu0": res.mean_dt_over_inv_nu0,
                     "n_negative_barriers": res.n_negative_barriers})
    return rows


def arrhenius_fit(temperatures: Sequence[float], D: Sequence[float]) -> tuple[float, float]:
    """Least-squares ``ln D = c + slope / T``; returns (slope [K], intercept)."""
    x = 1.0 / np.asarray(temperatures, float)
    y = np.log(np.asarray(D, float))
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def shell_point_orbits(shell_sizes: Sequence[int], choice: int = 1):
    """Point-cluster orbits, one per distance shell of an ordered local environment."""
    from .cluster_expansion import ClusterOrbit

    orbits, start = [], 0
    for size in shell_sizes:
        inst = tuple((s,) for s in range(start, start + size))
        orbits.append(ClusterOrbit(inst[0], (choice,), int(size), inst))
        start += size
    return orbits


def local_models(lattice: KmcLattice, j_oct: Sequence[float], j_tet: Sequence[float], choice: int = 1,
                 basis: str = "onehot", n_species: int = 2):
    """Shell-resolved oct and tet CE models for this lattice's local environments."""
    oshell = lattice.env_shells(lattice.positions[0])
    tshell = lattice.env_shells(lattice.positions[0] + 0.5 * lattice.jumps[0, 0])
    j_oct = np.asarray(j_oct, float)
    j_tet = np.asarray(j_tet, float)
    if len(j_oct) != 1 + len(oshell) or len(j_tet) != 1 + len(tshell):
        raise DomainError(f"need {1 + len(oshell)} oct and {1 + len(tshell)} tet ECIs")
    om = ClusterExpansionModel(tuple(shell_point_orbits(oshell, choice)), j_oct, basis=basis,
                               n_species=n_species, lattice_id="oct-env")
    tm = ClusterExpansionModel(tuple(shell_point_orbits(tshell, choice)), j_tet, basis=basis,
                               n_species=n_species, lattice_id="tet-env")
    return om, tm
