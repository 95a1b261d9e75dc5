import json
import math

import numpy as np
import pytest

from corroqre import cli
from corroqre import cluster_expansion as ce
from corroqre import qre_first


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_qre_sweep_cardinality_and_provenance(tmp_path, capsys):
    cfg = write(tmp_path / "run.toml", 'model = "ignored"\n[qre]\nmodel = "mg_dimer"\ncutoffs = [13, 30, 40]\n'
                                       'framework = "both"\nmax_n = 100000\nworkers = 2\n')
    code, out, _ = run(["qre", "sweep", "--config", str(cfg)], capsys)
    assert code == 0
    doc = json.loads(out)
    assert len(doc["records"]) == 6
    assert doc["provenance"]["version"] and doc["provenance"]["config"]["cutoffs"] == [13, 30, 40]
    keys = [(r["e_cut_Ry"], r["framework"]) for r in doc["records"]]
    assert keys == sorted(keys)


def test_qre_first_dimer_record(capsys):
    code, out, _ = run(["qre", "first", "--model", "mg_dimer", "--cutoffs", "30"], capsys)
    rec = json.loads(out)["records"][0]
    assert code == 0 and rec["eta"] == 144
    assert abs(rec["logical_qubits"] - 2292) / 2292 <= 0.15
    assert rec["logical_qubits"] == qre_first.run_first(__import__("corroqre").structures.load_model("mg_dimer"),
                                                        30).logical_qubits


def test_qre_csv_units_and_out_dir(tmp_path, capsys):
    code, _, _ = run(["qre", "first", "--model", "mg_dimer", "--cutoffs", "11,30", "--format", "csv",
                      "--out", str(tmp_path), "--electron-mode", "all_electron"], capsys)
    assert code == 0
    lines = (tmp_path / "qre_first.csv").read_text().splitlines()
    assert lines[0].startswith("# provenance: ")
    assert "e_cut_Ry" in lines[1] and "lambda_Ha" in lines[1]
    assert len(lines) == 4 and ",all_electron," in lines[2] and ",788," in lines[2]


def test_missing_geometry_exit_2(tmp_path, capsys):
    code, _, err = run(["qre", "first", "--geometry", str(tmp_path / "nope.xyz"), "--cutoffs", "30"], capsys)
    assert code == 2 and "configuration error" in err
    code, _, _ = run(["qre", "first", "--model", "mg_dimer"], capsys)
    assert code == 2
    code, _, _ = run(["qre", "first", "--config", str(tmp_path / "missing.toml")], capsys)
    assert code == 2
    bad = write(tmp_path / "bad.toml", "[qre\n")
    assert run(["qre", "first", "--config", str(bad)], capsys)[0] == 2


def test_computation_error_exit_1(capsys):
    code, _, err = run(["qre", "second", "--model", "mg_dimer", "--cutoffs", "46"], capsys)
    assert code == 1 and "computation error" in err


def test_geometry_file_and_json_config(tmp_path, capsys):
    xyz = write(tmp_path / "h2.xyz", '2\nLattice="6 0 0 0 6 0 0 0 6"\nH 0 0 0\nH 0.74 0 0\n')
    cfg = write(tmp_path / "c.json", json.dumps({"qre": {"geometry": "h2.xyz", "cutoffs": [5],
                                                        "framework": "second"}}))
    code, out, _ = run(["qre", "sweep", "--config", str(cfg)], capsys)
    recs = json.loads(out)["records"]
    assert code == 0 and len(recs) == 1 and recs[0]["model"] == "h2" and recs[0]["eta"] == 2


def test_extrapolate(capsys):
    code, out, _ = run(["qre", "extrapolate", "--model", "mg_dimer"], capsys)
    doc = json.loads(out)
    assert code == 0 and [r["e_cut_Ry"] for r in doc["records"]] == [30.0, 40.0]
    assert len(doc["training_points"]) == 4


def ce_fixture(tmp_path, sigma, seed=0, n=120):
    rng = np.random.default_rng(seed)
    sig = rng.integers(0, 2, (n, 4))
    orbits = [ce.ClusterOrbit((i,), (1,)) for i in range(4)] + [ce.ClusterOrbit((0, 1), (1, 1)),
                                                               ce.ClusterOrbit((2, 3), (1, 1))]
    X = ce.design_matrix([ce.Configuration(tuple(s)) for s in sig], orbits)
    E = X @ rng.normal(0, 0.05, X.shape[1]) + rng.normal(0, sigma, n)
    lines = ["s0,s1,s2,s3,energy_eV_per_atom"] + [",".join(map(str, s)) + f",{float(e)!r}" for s, e in zip(sig, E)]
    write(tmp_path / "train.csv", "\n".join(lines) + "\n")
    orb = ",\n".join(json.dumps(o.as_dict()).replace(":", "=").replace('"alpha"', "alpha")
                     .replace('"basis_choice"', "basis_choice").replace('"multiplicity"', "multiplicity")
                     .replace('"instances"', "instances") for o in orbits)
    return write(tmp_path / "ce.toml", f'[ce]\ntraining = "train.csv"\nregularizer = "ridge"\nstrength = 1e-8\n'
                                       f'orbits = [\n{orb}\n]\n')


def test_ce_fit_pass_and_fail(tmp_path, capsys):
    cfg = ce_fixture(tmp_path, 0.0)
    code, out, _ = run(["ce", "fit", "--config", str(cfg)], capsys)
    rep = json.loads(out)["records"][0]
    assert code == 0 and rep["pass"] is True and rep["cv_meV_per_atom"] < 1e-5
    noisy = tmp_path / "noisy"
    noisy.mkdir()
    cfg = ce_fixture(noisy, 0.02)
    code, _, _ = run(["ce", "fit", "--config", str(cfg), "--out", str(noisy / "o")], capsys)
    rep = json.loads((noisy / "o" / "ce_fit.json").read_text())["records"][0]
    assert code == 0 and rep["pass"] is False and rep["cv_meV_per_atom"] > 5
    model = json.loads((noisy / "o" / "ce_model.json").read_text())
    assert "provenance" in model and len(model["J"]) == 7


def test_ce_malformed_csv(tmp_path, capsys):
    cfg = ce_fixture(tmp_path, 0.0)
    write(tmp_path / "train.csv", "s0,s1,energy\n0,1,-1\n0,x,2\n")
    assert run(["ce", "fit", "--config", str(cfg)], capsys)[0] == 2


def test_ce_lattice_orbits(tmp_path, capsys):
    rng = np.random.default_rng(1)
    rows = ["," .join(map(str, rng.integers(0, 2, 16))) + f",{rng.normal():.6f}" for _ in range(40)]
    write(tmp_path / "t.csv", "\n".join(rows) + "\n")
    cfg = write(tmp_path / "c.toml", '[ce]\ntraining = "t.csv"\nregularizer = "ridge"\nstrength = 0.1\n'
                                     '[ce.lattice]\ntype = "bcc"\nsupercell = [2, 2, 2]\npair_cutoff = 0.9\n')
    code, out, _ = run(["ce", "fit", "--config", str(cfg)], capsys)
    assert code == 0 and json.loads(out)["records"][0]["n_eci"] == 1 + 2 + 8


def test_ce_barriers(tmp_path, capsys):
    om = ce.ClusterExpansionModel(tuple(__import__("corroqre").kmc.shell_point_orbits([2, 4])),
                                  np.array([0.0, 0.05, 0.01]), lattice_id="oct-env")
    tm = ce.ClusterExpansionModel(tuple(__import__("corroqre").kmc.shell_point_orbits([4])),
                                  np.array([0.9, 0.02]), lattice_id="tet-env")
    write(tmp_path / "oct.json", om.to_json())
    write(tmp_path / "tet.json", tm.to_json())
    cfg = write(tmp_path / "b.toml", '[ce.barriers]\noct_model = "oct.json"\ntet_model = "tet.json"\n'
                                     'supercell = [2, 2, 2]\noccupancy = {fractions = [0.5, 0.5], seed = 3}\n')
    code, out, _ = run(["ce", "barriers", "--config", str(cfg)], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["records"]) == 48 * 4 and doc["n_negative"] == 0


KMC_TOML = """[kmc]
temperatures = [2200, 1600, 2000, 1800]
n_steps = 500
n_trajectories = 40
barrier_eV = 1.0
supercell = [2, 2, 2]
dump_trajectories = 1
"""


def test_kmc_run_csv_deterministic(tmp_path, capsys):
    cfg = write(tmp_path / "k.toml", KMC_TOML)
    outs = []
    for name in ("a", "b"):
        code, _, _ = run(["kmc", "run", "--config", str(cfg), "--format", "csv", "--out", str(tmp_path / name),
                          "--seed", "9"], capsys)
        assert code == 0
        outs.append((tmp_path / name / "kmc_run.csv").read_bytes())
    assert outs[0] == outs[1]
    lines = outs[0].decode().splitlines()
    assert lines[1].split(",")[:5] == ["T_K", "D_cm2_per_s", "stderr_cm2_per_s", "n_s", "mean_dt_over_inv_nu0"]
    assert len(lines) == 2 + 4
    assert [float(l.split(",")[0]) for l in lines[2:]] == [1600, 1800, 2000, 2200]
    assert (tmp_path / "a" / "trajectory_T1600_m0.csv").read_text().startswith("t_s,x_bohr")


def test_kmc_arrhenius_fixture(tmp_path, capsys):
    cfg = write(tmp_path / "k.toml", KMC_TOML.replace("n_steps = 500", "n_steps = 2000"))
    code, out, _ = run(["kmc", "run", "--config", str(cfg)], capsys)
    rows = json.loads(out)["records"]
    x = np.array([1 / r["T_K"] for r in rows])
    y = np.log([r["D_cm2_per_s"] for r in rows])
    slope = np.polyfit(x, y, 1)[0]
    assert abs(slope * 8.617333262e-5 / -1.0 - 1) < 0.02


def test_kmc_missing_section(capsys):
    assert run(["kmc", "run"], capsys)[0] == 2


def test_workflow_commands(capsys):
    code, out, _ = run(["workflow", "scaling", "--method", "FCI", "--N", "23", "--eta", "26"], capsys)
    assert code == 0 and json.loads(out)["result"]["cost"] == 1144066
    code, out, _ = run(["workflow", "arrhenius", "--A", "2", "--e-a-ha", "0", "--temperature", "300"], capsys)
    assert json.loads(out)["result"]["k_per_s"] == 2.0
    code, out, _ = run(["workflow", "solution-energy", "--e-alloy-o", "-10", "--e-alloy", "-9.5", "--e-o2", "-1"],
                       capsys)
    assert json.loads(out)["result"]["e_sol_Ha"] == 0.0
    code, out, _ = run(["workflow", "crit-al"] + sum([[f"--{k}", "1"] for k in
                                                       ("g-star", "n-o-s", "d-o", "d-al", "v-m", "v-ox")], []), capsys)
    assert json.loads(out)["result"]["critical_al_fraction"] == pytest.approx(math.sqrt(math.pi / 3))
    assert run(["workflow", "arrhenius", "--A", "2"], capsys)[0] == 2
    assert run(["workflow", "crit-al"] + sum([[f"--{k}", "1"] for k in
                                              ("g-star", "n-o-s", "d-o", "d-al", "v-m")], []) + ["--v-ox", "-1"],
               capsys)[0] == 1


def test_geom_inspect(capsys):
    code, out, _ = run(["geom", "inspect", "--model", "mg_dimer", "--cutoffs", "30"], capsys)
    rec = json.loads(out)["records"][0]
    assert code == 0 and rec["n_atoms"] == 70 and rec["eta_valence"] == 144 and rec["eta_all_electron"] == 788
    assert rec["grid_30Ry"]["N"] == 14553


def test_argparse_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["qre"])
    assert exc.value.code == 2
