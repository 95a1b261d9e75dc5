"""First-quantized qubitized QPE: 1-norm, precision-bit budget, qubit and gate counts.

The plane-wave Hamiltonian is block encoded as a linear combination of the
kinetic (T), electron-nuclear (U) and electron-electron (V) terms. The walk
step cost is the multiplexed swap of the electron registers plus state
preparation and selection overheads; those overheads use the standard
polynomial forms for this construction, scaled by a single constant that is
calibrated once (see ``scripts/calibrate.py``).

All energies are in Hartree.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .errors import BudgetInfeasibleError, DomainError
from .planewave import GridSums, PlaneWaveBasis, grid_from_cutoff, grid_sums
from .structures import DEFAULT_TABLE, CrystalCell, ValenceTable, electron_count

QPE_CONSTANT = math.pi / 2
B_R = 8
ROTATIONS_PER_STEP = 2
ROTATION_T_FACTOR = 1.15
# one amplitude-amplification round on the 1/|nu| state preparation
AA_ROUNDS = 1

# frozen calibration against the Mg dimer at 30 Ry, reproduced by scripts/calibrate.py
OVERHEAD_SCALE = 2.2611
ANCILLA_OFFSET = 4
CLIFFORD_RATIO = 1.42 / 1.04


@dataclass(frozen=True)
class LambdaBreakdown:
    lambda_T: float
    lambda_U: float
    lambda_V: float
    lambda_zeta: int
    eta: int

    @property
    def total(self) -> float:
        return self.lambda_T + self.lambda_U + self.lambda_V

    @property
    def theta_branch(self) -> str:
        """Which amplitude split the T-vs-(U+V) selection rotation uses."""
        return "lambda_T < 3(lambda_U+lambda_V)" if self.lambda_T < 3 * (self.lambda_U + self.lambda_V) \
            else "lambda_T >= 3(lambda_U+lambda_V)"

    def as_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = self.total
        d["theta_branch"] = self.theta_branch
        return d


@dataclass(frozen=True)
class PrecisionTargets:
    epsilon: float = 1.6e-3
    epsilon_M: float = 1e-4
    epsilon_R: float = 1e-4
    epsilon_T: float = 1e-4
    delta_rot: float = 1e-10

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not v > 0:
                raise DomainError(f"precision target {k} must be > 0, got {v}")


@dataclass(frozen=True)
class PrecisionBudget:
    epsilon: float
    epsilon_pha: float
    epsilon_M: float
    epsilon_R: float
    epsilon_T: float
    b_r: int
    n_M: int
    n_R: int
    n_T: int
    achieved_M: float
    achieved_R: float
    achieved_T: float
    delta_rot: float = 1e-10

    def feasible(self) -> bool:
        return self.epsilon ** 2 >= self.epsilon_pha ** 2 + (self.epsilon_M + self.epsilon_R + self.epsilon_T) ** 2 \
            * (1 - 1e-12)


@dataclass(frozen=True)
class ResourceEstimate:
    framework: str
    logical_qubits: int
    qpe_iterations: int
    toffoli_count: int
    t_count: int
    clifford_count: int
    lambda_: float
    basis_N: int
    per_step: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        return d


def lambda_breakdown(cell: CrystalCell, basis: PlaneWaveBasis, sums: GridSums | None = None,
                     table: ValenceTable = DEFAULT_TABLE) -> LambdaBreakdown:
    """1-norms of the kinetic, nuclear and electron-electron parts of the LCU."""
    if sums is None:
        sums = grid_sums(basis)
    eta, lz = electron_count(cell, table)
    if eta < 1:
        raise DomainError("cell has no electrons")
    om3 = basis.omega ** (1.0 / 3.0)
    lam_nu = sums.sum_inv_nu_sq
    lam_t = 6.0 * eta * math.pi ** 2 * basis.omega ** (-2.0 / 3.0) * (2 ** (basis.n_p - 1) - 1) ** 2
    lam_u = eta * lz * lam_nu / (math.pi * om3)
    lam_v = eta * (eta - 1) * lam_nu / (2.0 * math.pi * om3)
    return LambdaBreakdown(lam_t, lam_u, lam_v, lz, eta)


def kinetic_lcu_weight_sum(eta: int, omega: float, n_p: int) -> float:
    """Kinetic 1-norm by summing the bitwise LCU weights ``2^(r+s)`` term by term."""
    s = sum(2.0 ** (r + s) for r in range(n_p - 1) for s in range(n_p - 1))
    return 6.0 * eta * math.pi ** 2 * omega ** (-2.0 / 3.0) * s


def eps_M(n_M: int, eta: int, lambda_zeta: int, omega: float, n_p: int) -> float:
    poly = 7 * 2 ** (n_p + 1) - 9 * n_p - 11 - 3 * 2.0 ** (-n_p)
    return 2.0 * eta / (2.0 ** n_M * math.pi * omega ** (1 / 3)) * (eta - 1 + 2 * lambda_zeta) * poly


def eps_R(n_R: int, eta: int, lambda_zeta: int, omega: float, sum_inv_nu: float) -> float:
    return eta * lambda_zeta / (2.0 ** n_R * omega ** (1 / 3)) * sum_inv_nu


def eps_T(n_T: int, lam: float) -> float:
    return math.pi * lam / 2.0 ** n_T


def _min_bits(f, target: float) -> int:
    """Smallest n >= 1 with f(n) <= target for f strictly decreasing as C/2^n."""
    c = f(0)
    n = max(1, math.ceil(math.log2(c / target)) if c > 0 else 1)
    while f(n) > target:
        n += 1
    while n > 1 and f(n - 1) <= target:
        n -= 1
    return n


def precision_budget(lb: LambdaBreakdown, basis: PlaneWaveBasis, cell: CrystalCell | None = None,
                     targets: PrecisionTargets = PrecisionTargets(), sums: GridSums | None = None) -> PrecisionBudget:
    """Minimal bit counts meeting each error target, and the leftover phase-estimation error."""
    if sums is None:
        sums = grid_sums(basis)
    slack = targets.epsilon ** 2 - (targets.epsilon_M + targets.epsilon_R + targets.epsilon_T) ** 2
    if slack <= 0:
        raise BudgetInfeasibleError("component error targets exhaust the total error", slack)
    eta, lz, om, n_p = lb.eta, lb.lambda_zeta, basis.omega, basis.n_p
    n_M = _min_bits(lambda n: eps_M(n, eta, lz, om, n_p), targets.epsilon_M)
    n_R = _min_bits(lambda n: eps_R(n, eta, lz, om, sums.sum_inv_nu), targets.epsilon_R)
    n_T = _min_bits(lambda n: eps_T(n, lb.total), targets.epsilon_T)
    return PrecisionBudget(
        epsilon=targets.epsilon, epsilon_pha=math.sqrt(slack),
        epsilon_M=targets.epsilon_M, epsilon_R=targets.epsilon_R, epsilon_T=targets.epsilon_T,
        b_r=B_R, n_M=n_M, n_R=n_R, n_T=n_T,
        achieved_M=eps_M(n_M, eta, lz, om, n_p), achieved_R=eps_R(n_R, eta, lz, om, sums.sum_inv_nu),
        achieved_T=eps_T(n_T, lb.total), delta_rot=targets.delta_rot,
    )


def qpe_iterations(lam: float, epsilon_pha: float, qpe_constant: float = QPE_CONSTANT) -> int:
    """Walk-operator applications for Heisenberg-limited phase estimation."""
    if not (lam > 0 and epsilon_pha > 0):
        raise DomainError("lambda and epsilon_pha must be > 0")
    return math.ceil(qpe_constant * lam / epsilon_pha)


def swap_toffoli(eta: int, n_p: int) -> int:
    """Multiplexed swap of the selected electron register into the working register."""
    return 12 * eta * n_p + 4 * eta - 8


def qrom_toffoli(n_items: int) -> int:
    """QROM lookup over ``n_items`` entries at the best power-of-two block size."""
    if n_items <= 1:
        return 0
    best = n_items
    k = 1
    while k <= n_items:
        best = min(best, k + math.ceil(n_items / k))
        k *= 2
    return best


def prep_toffoli(eta: int, lambda_zeta: int, n_p: int, n_M: int, n_T: int, b_r: int = B_R) -> int:
    """State-preparation Toffolis per walk step (PREPARE and its inverse)."""
    n_eta = math.ceil(math.log2(eta)) if eta > 1 else 1
    n_eta_zeta = math.ceil(math.log2(eta + 2 * lambda_zeta))
    c = 2 * (n_T + 4 * n_eta_zeta + 2 * b_r - 12) + 14 * n_eta + 8 * b_r - 36
    c += (2 * AA_ROUNDS + 1) * (3 * n_p ** 2 + 15 * n_p - 7 + 4 * n_M * (n_p + 1))
    c += lambda_zeta + qrom_toffoli(lambda_zeta) + 2 * (2 * n_p + 2 * b_r - 7)
    c += n_eta_zeta + 2 * n_eta + 6 * n_p + n_M + 16
    return c


def select_toffoli(eta: int, n_p: int, n_R: int) -> int:
    """SELECT Toffolis per step: momentum updates, nuclear phase and controlled arithmetic."""
    return 5 * (n_p - 1) + 2 + 24 * n_p + 6 * n_p * n_R + 18


def step_toffoli(eta: int, lambda_zeta: int, n_p: int, budget: PrecisionBudget,
                 overhead_scale: float = OVERHEAD_SCALE) -> dict:
    swap = swap_toffoli(eta, n_p)
    prep = prep_toffoli(eta, lambda_zeta, n_p, budget.n_M, budget.n_T, budget.b_r)
    sel = select_toffoli(eta, n_p, budget.n_R)
    total = swap + math.ceil(overhead_scale * (prep + sel))
    return {"swap": swap, "prep": prep, "select": sel, "overhead_scale": overhead_scale, "total": total}


def rotation_t(delta_rot: float) -> int:
    """T gates to synthesise one single-qubit rotation to precision ``delta_rot``."""
    return math.ceil(ROTATION_T_FACTOR * math.ceil(math.log2(1.0 / delta_rot)))


def ancilla_qubits(iterations: int, n_p: int, budget: PrecisionBudget, eta: int,
                   offset: int = ANCILLA_OFFSET) -> int:
    """Ancilla count beyond the 3 eta n_p system register.

    Phase register (ceil(log2 I)), the inequality-test, nuclear-position and
    selection-rotation registers (n_M, n_R, n_T) and a fixed pool of flag and
    selection qubits (``offset``). ``n_p`` and ``eta`` enter through the bit counts.
    """
    phase = math.ceil(math.log2(iterations)) if iterations > 1 else 1
    return phase + budget.n_M + budget.n_R + budget.n_T + offset


def estimate_first(cell: CrystalCell, basis: PlaneWaveBasis, budget: PrecisionBudget,
                   lb: LambdaBreakdown | None = None, table: ValenceTable = DEFAULT_TABLE,
                   qpe_constant: float = QPE_CONSTANT, overhead_scale: float = OVERHEAD_SCALE,
                   ancilla_offset: int = ANCILLA_OFFSET, clifford_ratio: float = CLIFFORD_RATIO) -> ResourceEstimate:
    """Logical qubits and gate counts for one phase-estimation run."""
    if lb is None:
        lb = lambda_breakdown(cell, basis, table=table)
    eta, lz = lb.eta, lb.lambda_zeta
    iters = qpe_iterations(lb.total, budget.epsilon_pha, qpe_constant)
    step = step_toffoli(eta, lz, basis.n_p, budget, overhead_scale)
    toffoli = iters * step["total"]
    t_rot = iters * ROTATIONS_PER_STEP * rotation_t(budget.delta_rot)
    t_count = 4 * toffoli + t_rot
    qubits = 3 * eta * basis.n_p + ancilla_qubits(iters, basis.n_p, budget, eta, ancilla_offset)
    step.update({"rotation_T": ROTATIONS_PER_STEP * rotation_t(budget.delta_rot), "theta_branch": lb.theta_branch})
    prov = {
        "eta": eta, "lambda_zeta": lz, "electron_mode": cell.electron_mode, "basis": basis.as_dict(),
        "lambda_breakdown": lb.as_dict(), "budget": asdict(budget), "qpe_constant": qpe_constant,
        "ancilla_offset": ancilla_offset, "clifford_ratio": clifford_ratio,
    }
    return ResourceEstimate("first", qubits, iters, toffoli, t_count, math.ceil(clifford_ratio * t_count),
                            lb.total, basis.N, step, prov)


def run_first(cell: CrystalCell, e_cut: float, gamma: float = 1.0, targets: PrecisionTargets = PrecisionTargets(),
              table: ValenceTable = DEFAULT_TABLE, grid_rule: str = "ceil", **kwargs) -> ResourceEstimate:
    """Grid, 1-norm, budget and estimate for ``cell`` at cutoff ``e_cut`` (Ry)."""
    basis = grid_from_cutoff(cell, e_cut, gamma, grid_rule)
    sums = grid_sums(basis)
    lb = lambda_breakdown(cell, basis, sums, table)
    budget = precision_budget(lb, basis, cell, targets, sums)
    return estimate_first(cell, basis, budget, lb, table, **kwargs)
