"""Second-quantized dual plane-wave (DPW) Hamiltonian: coefficients, 1-norm, linear-T costs, extrapolation.

Orbitals sit on the real-space grid ``r_p,i = p_i L_i / m_i`` and momenta are
``k_nu,i = 2 pi nu_i / L_i``; for a cubic box these are ``p (Omega/N)^(1/3)``
and ``2 pi nu / Omega^(1/3)``. Because ``k_nu . r_p`` only depends on
``nu mod m``, every sum over momenta folds onto the ``m_x m_y m_z`` residues and
becomes a discrete Fourier transform.

Two momentum sets are available: ``"modes"`` (default) holds the ``m_i`` grid
modes ``[-floor(m_i/2), m_i - 1 - floor(m_i/2)]`` per axis; ``"box"`` holds
``[-m_i, m_i]`` per axis.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ExplicitModeTooLargeError, FitDegenerateError
from .planewave import PlaneWaveBasis
from .qre_first import QPE_CONSTANT, ResourceEstimate, qpe_iterations
from .structures import CrystalCell

MAX_EXPLICIT_N = 20000
NU_SETS = ("modes", "box")
DELTA_E = 1e-3

# linear-T walk step: T = T_PER_SPIN_ORBITAL N_so + T_PER_MU mu + T_CONST
# (T_PER_SPIN_ORBITAL calibrated on Nb97Hf3Ti22Zr6O at 10 Ry, scripts/calibrate.py)
T_PER_SPIN_ORBITAL = 97.302
T_PER_MU = 8
T_CONST = 0
# N_logical = 2N + ceil(QUBIT_ALPHA log2(4 sqrt2 pi lambda^3 N^5 / eps^3)) + QUBIT_BETA
QUBIT_ALPHA = 0.8464
QUBIT_BETA = 16


@dataclass(frozen=True)
class DpwCoefficients:
    """Translation-invariant T and V indexed by offset ``(p - q) mod m``; U indexed by orbital ``p``."""

    T_of: np.ndarray
    U_of: np.ndarray
    V_of: np.ndarray
    per_axis: tuple[int, int, int]
    nu_set: str = "modes"

    @property
    def N(self) -> int:
        return int(np.prod(self.per_axis))

    @property
    def N_so(self) -> int:
        return 2 * self.N

    def T(self, offset) -> float:
        return float(self.T_of[tuple(np.mod(offset, self.per_axis))])

    def V(self, offset) -> float:
        return float(self.V_of[tuple(np.mod(offset, self.per_axis))])

    def U(self, p) -> float:
        return float(self.U_of[tuple(p)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["term", "ix", "iy", "iz", "value_Ha"])
        for name, arr in (("T", self.T_of), ("U", self.U_of), ("V", self.V_of)):
            for idx in itertools.product(*(range(m) for m in self.per_axis)):
                w.writerow([name, *idx, repr(float(arr[idx]))])
        return buf.getvalue()


def nu_axis(m: int, nu_set: str = "modes") -> np.ndarray:
    if nu_set == "modes":
        lo = m // 2
        return np.arange(-lo, m - lo)
    if nu_set == "box":
        return np.arange(-m, m + 1)
    raise DomainError(f"nu_set must be one of {NU_SETS}")


def _momentum_grids(basis: PlaneWaveBasis, nu_set: str):
    nus = [nu_axis(m, nu_set) for m in basis.per_axis]
    ks = [2.0 * np.pi * nu / L for nu, L in zip(nus, basis.lengths_bohr)]
    k2 = ks[0][:, None, None] ** 2 + ks[1][None, :, None] ** 2 + ks[2][None, None, :] ** 2
    return nus, ks, k2


def _fold(values: np.ndarray, nus, per_axis) -> np.ndarray:
    """Sum a function on the momentum grid into bins ``nu mod m``."""
    out = np.zeros(per_axis, dtype=values.dtype)
    ix = [np.mod(nu, m) for nu, m in zip(nus, per_axis)]
    np.add.at(out, np.ix_(*ix), values)
    return out


def dpw_coefficients(cell: CrystalCell, basis: PlaneWaveBasis, nu_set: str = "modes",
                     max_n: int = MAX_EXPLICIT_N) -> DpwCoefficients:
    """Explicit T(offset), U(p), V(offset) in Hartree for every grid point."""
    if basis.N > max_n:
        raise ExplicitModeTooLargeError(
            f"N = {basis.N} exceeds the explicit-coefficient cap {max_n}; use the extrapolation path")
    m = basis.per_axis
    n_pw = basis.N
    n_so = 2 * n_pw
    omega = basis.omega
    nus, ks, k2 = _momentum_grids(basis, nu_set)
    nonzero = k2 > 0
    inv_k2 = np.zeros_like(k2)
    inv_k2[nonzero] = 1.0 / k2[nonzero]

    # sum_nu f(nu) exp(+i k.r_d) = N * ifftn(f folded)[d]
    t_of = (n_pw * np.fft.ifftn(_fold(k2, nus, m))).real / (2.0 * n_so)
    v_of = (2.0 * np.pi / omega) * (n_pw * np.fft.ifftn(_fold(inv_k2, nus, m))).real

    pos = cell.positions_bohr()
    if len(pos) == 0:
        u_of = np.zeros(m)
    else:
        zeta = np.array([a.zeta for a in cell.atoms], dtype=float)
        ex, ey, ez = (np.exp(1j * k[:, None] * pos[None, :, i]) for i, k in enumerate(ks))
        # structure factor S(nu) = sum_j zeta_j exp(i k.R_j)
        s_nu = np.einsum("aj,bj,cj->abc", ex * zeta[None, :], ey, ez, optimize=True)
        # sum_nu S(nu)/k^2 exp(-i k.r_p) = fftn(folded)[p]
        u_of = -(4.0 * np.pi / omega) * np.fft.fftn(_fold(s_nu * inv_k2, nus, m)).real
    return DpwCoefficients(t_of, u_of, v_of, tuple(m), nu_set)


def one_norm_second(coeffs: DpwCoefficients) -> float:
    """``sum_pq |T(p-q)| + sum_p |U(p)| + sum_{p!=q} |V(p-q)|`` using offset multiplicities.

    Each offset residue occurs exactly N times among the ordered pairs (p, q).
    """
    return sum(one_norm_parts(coeffs).values())


def one_norm_parts(coeffs: DpwCoefficients) -> dict:
    n = coeffs.N
    v = np.abs(coeffs.V_of).copy()
    v[0, 0, 0] = 0.0
    return {
        "lambda_T": float(n * np.abs(coeffs.T_of).sum()),
        "lambda_U": float(np.abs(coeffs.U_of).sum()),
        "lambda_V": float(n * v.sum()),
    }


def one_norm_double_loop(cell: CrystalCell, basis: PlaneWaveBasis, nu_set: str = "modes") -> float:
    """Reference 1-norm: every (p, q) pair evaluated from real-space displacements, no folding."""
    m = np.array(basis.per_axis)
    L = np.array(basis.lengths_bohr)
    n_pw = basis.N
    n_so = 2 * n_pw
    nus = [nu_axis(mi, nu_set) for mi in m]
    nu = np.array(list(itertools.product(*nus)), dtype=float)
    k = 2.0 * np.pi * nu / L
    k2 = (k ** 2).sum(axis=1)
    nz = k2 > 0
    grid = np.array(list(itertools.product(*(range(mi) for mi in m))), dtype=float)
    r = grid * (L / m)
    # full N x N matrices via cos(k.(r_p - r_q)) = cos(k.r_p)cos(k.r_q) + sin(k.r_p)sin(k.r_q)
    c, s = np.cos(r @ k.T), np.sin(r @ k.T)
    t_mat = ((c * k2) @ c.T + (s * k2) @ s.T) / (2.0 * n_so)
    w = np.zeros_like(k2)
    w[nz] = 1.0 / k2[nz]
    v_mat = (2.0 * np.pi / basis.omega) * ((c * w) @ c.T + (s * w) @ s.T)
    np.fill_diagonal(v_mat, 0.0)
    lam = float(np.abs(t_mat).sum() + np.abs(v_mat).sum())
    pos = cell.positions_bohr()
    if len(pos):
        zeta = np.array([a.zeta for a in cell.atoms], dtype=float)
        for p in range(n_pw):
            ph = np.cos((pos - r[p][None, :]) @ k[nz].T)
            lam += abs(-(4.0 * np.pi / basis.omega) * (zeta[:, None] * ph / k2[nz][None, :]).sum())
    return float(lam)


def v_zero(nu_points, omega: float) -> float:
    """V at zero offset for a cubic box and an explicit set of integer momenta (origin excluded)."""
    nu = np.asarray(nu_points, dtype=float)
    n2 = (nu ** 2).sum(axis=1)
    n2 = n2[n2 > 0]
    # k^2 = (2 pi / Omega^(1/3))^2 |nu|^2
    return float((2.0 * np.pi / omega) * np.sum(omega ** (2 / 3) / (4 * np.pi ** 2 * n2)))


def term_count(basis: PlaneWaveBasis) -> int:
    """Distinct LCU coefficient values: N offsets for T, N orbitals for U, N offsets for V."""
    return 3 * basis.N


def mu_bits(lam: float, delta_e: float, h_norm_bound: float = 0.0, n_terms: int = 1) -> tuple[int, float]:
    """Alias-sampling precision bits and the induced preparation error ``1/(2^mu L)``."""
    if not delta_e > 0:
        raise DomainError("delta_E must be > 0")
    if not (0 <= h_norm_bound < lam):
        raise DomainError("need 0 <= |H| bound < lambda")
    val = math.log2(2 * math.sqrt(2) * lam / delta_e) + math.log2(1 + delta_e ** 2 / (8 * lam ** 2)) \
        - math.log2(1 - h_norm_bound ** 2 / lam ** 2)
    mu = math.ceil(val - 1e-12)
    return mu, 1.0 / (2 ** mu * n_terms)


def qubit_log_argument(lam: float, n_pw: int, epsilon: float) -> float:
    return 4 * math.sqrt(2) * math.pi * lam ** 3 * float(n_pw) ** 5 / epsilon ** 3


def estimate_second(cell: CrystalCell, basis: PlaneWaveBasis, lam: float, mu: int, delta_e: float = DELTA_E,
                    qpe_constant: float = QPE_CONSTANT, t_per_spin_orbital: float = T_PER_SPIN_ORBITAL,
                    t_per_mu: float = T_PER_MU, t_const: float = T_CONST,
                    alpha: float = QUBIT_ALPHA, beta: float = QUBIT_BETA) -> ResourceEstimate:
    """Logical qubits and T count for linear-T qubitized QPE in the DPW basis."""
    if not lam > 0:
        raise DomainError("lambda must be > 0")
    iters = qpe_iterations(lam, delta_e, qpe_constant)
    n_so = 2 * basis.N
    per_step = math.ceil(t_per_spin_orbital * n_so + t_per_mu * mu + t_const)
    t_count = iters * per_step
    qubits = 2 * basis.N + math.ceil(alpha * math.log2(qubit_log_argument(lam, basis.N, delta_e))) + int(beta)
    prov = {"electron_mode": cell.electron_mode, "basis": basis.as_dict(), "mu": mu, "delta_E": delta_e,
            "qpe_constant": qpe_constant, "t_model": [t_per_spin_orbital, t_per_mu, t_const],
            "qubit_model": [alpha, beta]}
    return ResourceEstimate("second", qubits, iters, t_count // 4, t_count, 0, lam, basis.N,
                            {"T_per_step": per_step, "N_so": n_so}, prov)


def run_second(cell: CrystalCell, basis: PlaneWaveBasis, delta_e: float = DELTA_E, h_norm_bound: float = 0.0,
               nu_set: str = "modes", max_n: int = MAX_EXPLICIT_N, **kwargs) -> ResourceEstimate:
    coeffs = dpw_coefficients(cell, basis, nu_set, max_n)
    parts = one_norm_parts(coeffs)
    lam = sum(parts.values())
    mu, eps_prep = mu_bits(lam, delta_e, h_norm_bound, term_count(basis))
    est = estimate_second(cell, basis, lam, mu, delta_e, **kwargs)
    est.provenance.update({"lambda_parts": parts, "epsilon_prep": eps_prep, "nu_set": nu_set})
    return est


@dataclass
class ExtrapolationModel:
    a: float
    b: float
    c: float
    x: float
    y: float
    z: float
    alpha: float
    beta: float
    epsilon: float
    n_range: tuple[int, int] = (0, 0)
    residuals: dict = field(default_factory=dict)

    def lam(self, n):
        n = np.asarray(n, dtype=float)
        return self.a * n ** 2 + self.b * n + self.c

    def t_count(self, n):
        n = np.asarray(n, dtype=float)
        lam = self.lam(n)
        return self.x * n * lam / self.epsilon + self.y * (lam / self.epsilon) * np.log2(n / self.epsilon) + self.z

    def n_logical(self, n):
        n = np.asarray(n, dtype=float)
        arg = 4 * math.sqrt(2) * math.pi * self.lam(n) ** 3 * n ** 5 / self.epsilon ** 3
        return 2 * n + self.alpha * np.log2(arg) + self.beta

    def predict(self, n) -> dict:
        return {"N": n, "lambda": float(self.lam(n)), "t_count": float(self.t_count(n)),
                "n_logical": float(self.n_logical(n))}

    def to_json(self) -> str:
        d = {k: getattr(self, k) for k in ("a", "b", "c", "x", "y", "z", "alpha", "beta", "epsilon")}
        d["n_range"] = list(self.n_range)
        d["residuals"] = self.residuals
        return json.dumps(d, indent=2)


def _lstsq(design: np.ndarray, target: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    # column scaling keeps the rank test meaningful when features differ by many decades
    scale = np.linalg.norm(design, axis=0)
    if np.any(scale == 0):
        raise FitDegenerateError(f"{what}: a design column is identically zero")
    d = design / scale
    if np.linalg.matrix_rank(d, tol=1e-10 * max(d.shape)) < design.shape[1]:
        raise FitDegenerateError(f"{what}: rank-deficient design")
    coef, *_ = np.linalg.lstsq(d, target, rcond=None)
    coef = coef / scale
    return coef, target - design @ coef


def fit_extrapolation(points, epsilon: float = DELTA_E) -> ExtrapolationModel:
    """Least-squares fits of lambda(N), T count and logical qubits against N.

    ``points`` are ``(N, lambda, t_count, n_logical)`` tuples. The T-count and
    qubit fits use the measured lambda at each training N; predictions use the
    fitted lambda(N).
    """
    pts = np.array([tuple(map(float, p)) for p in points], dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] != 4:
        raise FitDegenerateError("points must be (N, lambda, t_count, n_logical) tuples")
    n, lam, tc, nq = pts.T
    if len(np.unique(n)) < 3:
        raise FitDegenerateError("need at least 3 distinct N values")
    abc, r_lam = _lstsq(np.column_stack([n ** 2, n, np.ones_like(n)]), lam, "lambda(N)")
    xyz, r_t = _lstsq(np.column_stack([n * lam / epsilon, (lam / epsilon) * np.log2(n / epsilon),
                                       np.ones_like(n)]), tc, "T count")
    logs = np.log2(4 * math.sqrt(2) * math.pi * lam ** 3 * n ** 5 / epsilon ** 3)
    ab, r_q = _lstsq(np.column_stack([logs, np.ones_like(n)]), nq - 2 * n, "logical qubits")
    return ExtrapolationModel(
        *map(float, abc), *map(float, xyz), float(ab[0]), float(ab[1]), float(epsilon),
        (int(n.min()), int(n.max())),
        {"lambda": r_lam.tolist(), "t_count": r_t.tolist(), "n_logical": r_q.tolist()},
    )
