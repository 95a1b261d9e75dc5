"""Derive the frozen overhead constants of the first- and second-quantized cost models.

First quantization: the Mg dimer at 30 Ry fixes the overhead scale (T count
1.04e13), the ancilla offset (2292 logical qubits) and the Clifford/T ratio
(1.42/1.04). Second quantization: the Nb97Hf3Ti22Zr6O reference values fix the per-step
T slope (10 Ry T count 0.414e14) and the qubit-model coefficients (4526,
21451, 35311 logical qubits at 10, 30, 40 Ry).

Run after any change to the structural cost terms and paste the printed
values into the module constants.
"""

import math

import numpy as np

from corroqre import qre_first as qf
from corroqre import qre_second as qs
from corroqre.planewave import grid_from_cutoff, grid_sums
from corroqre.structures import load_model


def first():
    cell = load_model("mg_dimer")
    basis = grid_from_cutoff(cell, 30.0)
    sums = grid_sums(basis)
    lb = qf.lambda_breakdown(cell, basis, sums)
    budget = qf.precision_budget(lb, basis, cell, qf.PrecisionTargets(), sums)
    iters = qf.qpe_iterations(lb.total, budget.epsilon_pha)
    base = qf.step_toffoli(lb.eta, lb.lambda_zeta, basis.n_p, budget, overhead_scale=1.0)
    t_rot = qf.ROTATIONS_PER_STEP * qf.rotation_t(budget.delta_rot)
    # 4 iters (swap + s (prep + sel)) + iters t_rot = target
    target_t = 1.04e13
    s = ((target_t / iters - t_rot) / 4 - base["swap"]) / (base["prep"] + base["select"])
    a0 = 2292 - 3 * lb.eta * basis.n_p - qf.ancilla_qubits(iters, basis.n_p, budget, lb.eta, offset=0)
    print(f"lambda = {lb.total:.4g}  iterations = {iters}  step(unscaled) = {base}")
    print(f"OVERHEAD_SCALE = {s:.4f}")
    print(f"ANCILLA_OFFSET = {a0}")
    print(f"CLIFFORD_RATIO = {1.42 / 1.04:.6f}")


def second():
    cell = load_model("nb97_hf3_ti22_zr6_o")
    rows = {10.0: (4526, 0.414e14), 30.0: (21451, 30.4e14), 40.0: (35311, 200e14)}
    xs, ys = [], []
    for e_cut, (nq, t) in rows.items():
        basis = grid_from_cutoff(cell, e_cut)
        lam = qs.one_norm_second(qs.dpw_coefficients(cell, basis, max_n=10 ** 6))
        xs.append(math.log2(qs.qubit_log_argument(lam, basis.N, qs.DELTA_E)))
        ys.append(nq - 2 * basis.N)
        if e_cut == 10.0:
            mu, _ = qs.mu_bits(lam, qs.DELTA_E, 0.0, qs.term_count(basis))
            iters = qf.qpe_iterations(lam, qs.DELTA_E)
            per_step = t / iters
            a_t = (per_step - qs.T_PER_MU * mu - qs.T_CONST) / (2 * basis.N)
            print(f"Nb 10 Ry: lambda = {lam:.4g}, mu = {mu}, iterations = {iters}")
            print(f"T_PER_SPIN_ORBITAL = {a_t:.3f}")
    A = np.column_stack([xs, np.ones(len(xs))])
    (alpha, beta), *_ = np.linalg.lstsq(A, np.array(ys, float), rcond=None)
    print(f"QUBIT_ALPHA = {alpha:.4f}")
    print(f"QUBIT_BETA = {beta:.2f}")


if __name__ == "__main__":
    first()
    second()
