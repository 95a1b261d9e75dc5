"""Command-line entry point.

Exit codes: 0 success, 1 computation error, 2 configuration or input error.
Every output embeds the resolved configuration and the tool version.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import cluster_expansion as ce
from . import kmc, qre_first, qre_second, workflow
from .constants import ANGSTROM_TO_BOHR
from .errors import ConfigError, CorroError, ParseError, UnknownSpeciesError, UnsupportedLatticeError
from .planewave import grid_from_cutoff
from .structures import MODELS, ValenceTable, cell_volume, electron_count, load_model, read_geometry

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

INPUT_ERRORS = (ConfigError, ParseError, UnknownSpeciesError, UnsupportedLatticeError, FileNotFoundError)


# --- config ------------------------------------------------------------------

def load_config(path: str | None) -> tuple[dict, Path]:
    if path is None:
        return {}, Path.cwd()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = p.read_text(encoding="utf-8")
    try:
        data = json.loads(text) if p.suffix.lower() == ".json" else tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return data, p.parent


def _section(cfg: dict, name: str) -> dict:
    sec = cfg.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return dict(sec)


def _resolve(base: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def _require_file(base: Path, value, what: str) -> Path:
    if not value:
        raise ConfigError(f"{what} not given")
    p = _resolve(base, value)
    if not p.is_file():
        raise ConfigError(f"{what} not found: {value}")
    return p


def _float(sec: dict, key: str, default=None) -> float:
    val = sec.get(key, default)
    if val is None:
        raise ConfigError(f"missing required key {key!r}")
    try:
        return float(val)
    except (TypeError, ValueError):
        raise ConfigError(f"{key!r} must be a number, got {val!r}") from None


def _provenance(command: str, resolved: dict) -> dict:
    return {"tool": "corroqre", "version": __version__, "command": command, "config": resolved}


# --- output ------------------------------------------------------------------

def _csv_text(rows: list[dict], prov: dict) -> str:
    buf = io.StringIO()
    buf.write("# provenance: " + json.dumps(prov, sort_keys=True) + "\n")
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, tuple)):
        return list(o)
    raise TypeError(f"not serializable: {type(o)}")


def _emit(args, stem: str, rows: list[dict], prov: dict, extra: dict | None = None):
    """Write ``rows`` as JSON or CSV to ``--out`` (a directory) or stdout."""
    if args.format == "csv":
        text = _csv_text(rows, prov)
    else:
        payload = {"provenance": prov, "records": rows}
        if extra:
            payload.update(extra)
        text = _json_text(payload)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{stem}.{args.format}").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_aux(args, name: str, text: str):
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text, encoding="utf-8")


# --- geometry ----------------------------------------------------------------

def _table(sec: dict) -> ValenceTable:
    over = sec.get("valence")
    if over is None:
        return ValenceTable()
    if not isinstance(over, dict):
        raise ConfigError("valence overrides must map symbol -> [valence, Z]")
    return ValenceTable.with_overrides(over)


def _geometries(sec: dict, base: Path, mode: str, table: ValenceTable) -> list[tuple[str, object]]:
    out = []
    names = sec.get("models", [sec["model"]] if "model" in sec else [])
    paths = sec.get("geometries", [sec["geometry"]] if "geometry" in sec else [])
    for name in names:
        if name not in MODELS:
            raise ConfigError(f"unknown bundled model {name!r}; choose from {sorted(MODELS)}")
        out.append((name, load_model(name, mode, table)))
    for g in paths:
        p = _require_file(base, g, "geometry")
        out.append((p.stem, read_geometry(p, table, mode)))
    if not out:
        raise ConfigError("no geometry: set 'geometry', 'geometries', 'model' or 'models'")
    return out


def _qre_section(args, cfg, base) -> dict:
    sec = _section(cfg, "qre")
    for key in ("geometry", "model"):
        if getattr(args, key, None):
            sec[key] = getattr(args, key)
    if getattr(args, "cutoffs", None):
        sec["cutoffs"] = [float(x) for x in args.cutoffs.split(",")]
    if args.gamma is not None:
        sec["gamma"] = args.gamma
    if args.electron_mode is not None:
        sec["electron_mode"] = args.electron_mode
    sec.setdefault("gamma", 1.0)
    sec.setdefault("electron_mode", "valence")
    sec.setdefault("grid_rule", "ceil")
    sec.setdefault("max_n", qre_second.MAX_EXPLICIT_N)
    if "cutoffs" not in sec or not sec["cutoffs"]:
        raise ConfigError("qre needs a non-empty 'cutoffs' list (Ry)")
    return sec


def _targets(sec: dict) -> qre_first.PrecisionTargets:
    p = dict(sec.get("precision", {}))
    d = qre_first.PrecisionTargets()
    return qre_first.PrecisionTargets(
        _float(p, "epsilon", d.epsilon), _float(p, "epsilon_M", d.epsilon_M), _float(p, "epsilon_R", d.epsilon_R),
        _float(p, "epsilon_T", d.epsilon_T), _float(p, "delta_rot", d.delta_rot))


def _qre_record(name, cell, e_cut, framework, sec, targets, table) -> dict:
    basis = grid_from_cutoff(cell, e_cut, sec["gamma"], sec["grid_rule"])
    if framework == "first":
        est = qre_first.run_first(cell, e_cut, sec["gamma"], targets, table, sec["grid_rule"])
    else:
        est = qre_second.run_second(cell, basis, float(sec.get("delta_E", qre_second.DELTA_E)),
                                    float(sec.get("h_norm_bound", 0.0)), sec.get("nu_set", "modes"),
                                    int(sec["max_n"]))
    return {
        "model": name, "electron_mode": cell.electron_mode, "framework": framework,
        "e_cut_Ry": float(e_cut), "N": basis.N, "n_p": basis.n_p,
        "eta": electron_count(cell, table).eta, "lambda_Ha": est.lambda_,
        "logical_qubits": est.logical_qubits, "qpe_iterations": est.qpe_iterations,
        "toffoli_count": est.toffoli_count, "t_count": est.t_count, "clifford_count": est.clifford_count,
    }


def cmd_qre(args, cfg, base) -> int:
    sec = _qre_section(args, cfg, base)
    table = _table(sec)
    framework = {"first": "first", "second": "second"}.get(args.action, sec.get("framework", "both"))
    if framework not in ("first", "second", "both"):
        raise ConfigError("framework must be first, second or both")
    frameworks = ["first", "second"] if framework == "both" else [framework]
    geoms = _geometries(sec, base, sec["electron_mode"], table)
    targets = _targets(sec)
    jobs = sorted(((name, cell, float(e), fw) for name, cell in geoms for e in sec["cutoffs"] for fw in frameworks),
                  key=lambda j: (j[0], j[2], j[3]))
    run = lambda j: _qre_record(j[0], j[1], j[2], j[3], sec, targets, table)  # noqa: E731
    workers = int(sec.get("workers", 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]
    resolved = {k: v for k, v in sec.items()}
    resolved["framework"] = framework
    _emit(args, f"qre_{args.action}", rows, _provenance(f"qre {args.action}", resolved))
    return 0


def cmd_extrapolate(args, cfg, base) -> int:
    sec = _section(cfg, "extrapolate")
    qsec = _section(cfg, "qre")
    for key in ("geometry", "model"):
        if getattr(args, key, None):
            sec[key] = getattr(args, key)
        elif key in qsec and key not in sec:
            sec[key] = qsec[key]
    if args.gamma is not None:
        sec["gamma"] = args.gamma
    if args.electron_mode is not None:
        sec["electron_mode"] = args.electron_mode
    sec.setdefault("gamma", 1.0)
    sec.setdefault("electron_mode", "valence")
    sec.setdefault("fit_cutoffs", [5, 6, 7, 8])
    sec.setdefault("predict_cutoffs", [30, 40])
    sec.setdefault("delta_E", qre_second.DELTA_E)
    table = _table(sec)
    (name, cell), = _geometries(sec, base, sec["electron_mode"], table)[:1]
    pts = []
    for e in sec["fit_cutoffs"]:
        basis = grid_from_cutoff(cell, float(e), sec["gamma"])
        est = qre_second.run_second(cell, basis, float(sec["delta_E"]))
        pts.append((basis.N, est.lambda_, est.t_count, est.logical_qubits))
    fit = qre_second.fit_extrapolation(pts, float(sec["delta_E"]))
    rows = []
    for e in sec["predict_cutoffs"]:
        basis = grid_from_cutoff(cell, float(e), sec["gamma"])
        pr = fit.predict(basis.N)
        rows.append({"model": name, "e_cut_Ry": float(e), "N": basis.N, "lambda_Ha": pr["lambda"],
                     "t_count": pr["t_count"], "logical_qubits": pr["n_logical"]})
    _emit(args, "qre_extrapolate", rows, _provenance("qre extrapolate", sec),
          {"fit": json.loads(fit.to_json()), "training_points": pts})
    return 0


# --- cluster expansion -------------------------------------------------------

def _load_training(path: Path) -> list:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        return ce.parse_training_json(text)
    return ce.parse_training_csv(text)


def _orbits(sec: dict) -> list:
    if "orbits" in sec:
        try:
            return [ce.ClusterOrbit.from_dict(o) for o in sec["orbits"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad orbit description: {exc}") from None
    lat = sec.get("lattice")
    if not lat:
        raise ConfigError("[ce] needs 'orbits' or a 'lattice' table")
    if lat.get("type", "bcc") != "bcc":
        raise ConfigError("only bcc lattices are generated automatically")
    L = ce.bcc_lattice(float(lat.get("a", 1.0)), tuple(lat.get("supercell", (2, 2, 2))))
    choice = int(lat.get("choice", 1))
    protos = []
    if lat.get("points", True):
        protos += [([(s, (0, 0, 0))], (choice,)) for s in range(L.n_sub)]
    if "pair_cutoff" in lat:
        protos += ce.pair_prototypes(L, float(lat["pair_cutoff"]), (choice, choice))
    return ce.translation_orbits(L, protos)


def _regularizer(sec: dict) -> ce.Regularizer:
    return ce.Regularizer(sec.get("regularizer", "none"), float(sec.get("strength", 0.0)))


def cmd_ce(args, cfg, base) -> int:
    sec = _section(cfg, "ce")
    if args.action == "barriers":
        return cmd_ce_barriers(args, sec, base)
    if getattr(args, "training", None):
        sec["training"] = args.training
    path = _require_file(base, sec.get("training"), "training data")
    train = _load_training(path)
    orbits = _orbits(sec)
    reg = _regularizer(sec)
    basis = sec.get("basis", "onehot")
    if basis not in ce.BASES:
        raise ConfigError(f"basis must be one of {ce.BASES}")
    opts = dict(basis=basis, n_species=int(sec.get("n_species", 2)),
                concentration_degree=int(sec.get("concentration_degree", 0)),
                concentration_species=int(sec.get("concentration_species", 1)))
    model = ce.fit_eci(train, orbits, reg, **opts)
    threshold = float(sec.get("cv_threshold_meV", ce.CV_THRESHOLD_MEV))
    cv = ce.loo_cv(train, orbits, reg, method=sec.get("cv_method", "literal"), **opts) if len(train) >= 2 else float("nan")
    model.cv_score = cv
    pred = model.predict_many([c for c, _ in train])
    rmse = float(np.sqrt(np.mean((pred - np.array([e for _, e in train])) ** 2)) * 1000)
    prov = _provenance("ce fit", sec)
    report = {"cv_meV_per_atom": cv, "threshold_meV_per_atom": threshold, "pass": bool(cv < threshold),
              "n_train": len(train), "n_eci": int(len(model.J)), "train_rmse_meV_per_atom": rmse}
    model_doc = json.loads(model.to_json())
    model_doc["provenance"] = prov
    _write_aux(args, "ce_model.json", _json_text(model_doc))
    _emit(args, "ce_fit", [report], prov, None if args.out else {"model": model_doc})
    return 0


def _occupancy(sec: dict, n_metal: int, lattice_id: str, seed: int) -> ce.Configuration:
    occ = sec.get("occupancy")
    if occ is None:
        return ce.Configuration((0,) * n_metal, lattice_id)
    if isinstance(occ, list):
        if len(occ) != n_metal:
            raise ConfigError(f"occupancy needs {n_metal} entries")
        return ce.Configuration(tuple(int(c) for c in occ), lattice_id)
    if isinstance(occ, dict) and "fractions" in occ:
        fr = np.asarray(occ["fractions"], float)
        if np.any(fr < 0) or not math.isclose(fr.sum(), 1.0, rel_tol=1e-9):
            raise ConfigError("occupancy fractions must be non-negative and sum to 1")
        rng = np.random.Generator(np.random.Philox(int(occ.get("seed", seed))))
        return ce.Configuration(tuple(int(c) for c in rng.choice(len(fr), size=n_metal, p=fr)), lattice_id)
    raise ConfigError("occupancy must be a list of codes or a {fractions, seed} table")


def _kmc_lattice(sec: dict, seed: int) -> kmc.KmcLattice:
    a = float(sec["a_bohr"]) if "a_bohr" in sec else float(sec.get("a_angstrom", 3.30)) * ANGSTROM_TO_BOHR
    sc = tuple(int(n) for n in sec.get("supercell", (4, 4, 4)))
    proto = kmc.bcc_octahedral_lattice(a, sc)
    occ = _occupancy(sec, len(proto.metal_positions), proto.lattice_id, seed)
    return kmc.bcc_octahedral_lattice(a, sc, occ, sec.get("env_cutoff_bohr"))


def _barrier_source(sec: dict, base: Path):
    if "oct_model" in sec or "tet_model" in sec:
        om = ce.ClusterExpansionModel.from_json(_require_file(base, sec.get("oct_model"), "oct_model").read_text())
        tm = ce.ClusterExpansionModel.from_json(_require_file(base, sec.get("tet_model"), "tet_model").read_text())
        return (om, tm)
    if "barrier_eV" in sec:
        return _float(sec, "barrier_eV")
    raise ConfigError("set 'barrier_eV' (uniform) or 'oct_model' and 'tet_model'")


def cmd_ce_barriers(args, sec, base) -> int:
    bsec = dict(sec.get("barriers", {}))
    seed = args.seed if args.seed is not None else int(bsec.get("seed", 0))
    lat = _kmc_lattice(bsec, seed)
    src = _barrier_source(bsec, base)
    table = kmc.barrier_table(lat, src, clamp=bool(bsec.get("clamp_negative", False)))
    rows = [{"site_i": i, "site_j": int(lat.neighbors[i, k]), "E_barrier_eV": float(table.energies[i, k]),
             "negative": bool(table.energies[i, k] < 0)}
            for i in range(lat.n_sites) for k in range(lat.degree)]
    _emit(args, "ce_barriers", rows, _provenance("ce barriers", bsec),
          {"n_negative": table.n_negative, "n_evaluations": table.n_evaluations})
    return 0


# --- kmc ---------------------------------------------------------------------

def cmd_kmc(args, cfg, base) -> int:
    sec = _section(cfg, "kmc")
    if args.seed is not None:
        sec["seed"] = args.seed
    sec.setdefault("seed", 0)
    temps = sec.get("temperatures")
    if not temps:
        raise ConfigError("[kmc] needs a non-empty 'temperatures' list (K)")
    n_steps = int(sec.get("n_steps", 10000))
    n_s = int(sec.get("n_trajectories", 100))
    nu0 = _float(sec, "nu0", kmc.DEFAULT_NU0)
    workers = int(sec.get("workers", 1))
    dumps = int(sec.get("dump_trajectories", 0))
    seed = int(sec["seed"])
    lat = _kmc_lattice(sec, seed)
    src = _barrier_source(sec, base)
    rows = []
    for T in sorted(float(t) for t in temps):
        res = kmc.run_ensemble(lat, src, kmc.KmcParams(T, n_steps, n_s, seed, nu0), n_workers=workers,
                               keep_trajectories=dumps if args.out else 0,
                               clamp=bool(sec.get("clamp_negative", False)))
        est = res.diffusivity()
        rows.append({"T_K": T, "D_cm2_per_s": est.D, "stderr_cm2_per_s": est.stderr, "n_s": est.n_s,
                     "mean_dt_over_inv_nu0": res.mean_dt_over_inv_nu0,
                     "D_literal_cm2_per_s": est.D_literal, "n_negative_barriers": res.n_negative_barriers})
        for tr in res.trajectories:
            _write_aux(args, f"trajectory_T{T:g}_m{tr.seed[1]}.csv", tr.to_csv())
    _emit(args, "kmc_run", rows, _provenance("kmc run", sec))
    return 0


# --- workflow ----------------------------------------------------------------

def cmd_workflow(args, cfg, base) -> int:
    sec = _section(cfg, "workflow")
    for key in ("A", "e_a_ha", "temperature", "method", "N", "eta", "D", "B", "e_alloy_o", "e_alloy", "e_o2",
                "g_star", "n_o_s", "d_o", "d_al", "v_m", "v_ox"):
        val = getattr(args, key, None)
        if val is not None:
            sec[key] = val
    act = args.action
    if act == "arrhenius":
        val = {"k_per_s": workflow.arrhenius_rate(_float(sec, "A"), _float(sec, "e_a_ha"), _float(sec, "temperature"))}
    elif act == "solution-energy":
        val = {"e_sol_Ha": workflow.solution_energy(_float(sec, "e_alloy_o"), _float(sec, "e_alloy"), _float(sec, "e_o2"))}
    elif act == "scaling":
        if "method" not in sec or "N" not in sec:
            raise ConfigError("scaling needs 'method' and 'N'")
        spec = workflow.ClassicalMethodSpec(str(sec["method"]), int(sec["N"]), int(sec.get("eta", 0)),
                                            int(sec["D"]) if "D" in sec else None,
                                            int(sec["B"]) if "B" in sec else None)
        cost = workflow.classical_scaling(spec)
        val = {"cost": cost if isinstance(cost, int) else float(cost)}
    else:
        val = {"critical_al_fraction": workflow.critical_al_fraction(
            *(_float(sec, k) for k in ("g_star", "n_o_s", "d_o", "d_al", "v_m", "v_ox")))}
    sys.stdout.write(_json_text({"provenance": _provenance(f"workflow {act}", sec), "result": val}))
    return 0


# --- geometry ----------------------------------------------------------------

def cmd_geom(args, cfg, base) -> int:
    sec = _section(cfg, "qre")
    if args.path:
        sec = {"geometry": args.path}
    elif args.model:
        sec = {"model": args.model}
    table = _table(sec)
    rows = []
    cutoffs = [float(x) for x in args.cutoffs.split(",")] if args.cutoffs else []
    gamma = 1.0 if args.gamma is None else args.gamma
    for name, cell in _geometries(sec, base, "valence", table):
        rec = {"model": name, "formula": cell.formula(), "n_atoms": cell.n_atoms,
               "eta_valence": electron_count(cell, table).eta,
               "eta_all_electron": electron_count(cell.with_mode("all_electron", table), table).eta,
               "omega_bohr3": cell_volume(cell), "lengths_angstrom": list(cell.lengths)}
        for e in cutoffs:
            b = grid_from_cutoff(cell, e, gamma)
            rec[f"grid_{e:g}Ry"] = {"per_axis": list(b.per_axis), "N": b.N, "n_p": b.n_p}
        rows.append(rec)
    sys.stdout.write(_json_text({"provenance": _provenance("geom inspect", sec), "records": rows}))
    return 0


# --- parser ------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML or JSON run configuration")
    p.add_argument("--out", help="output directory (default: stdout)")
    p.add_argument("--seed", type=int, help="RNG seed override")
    p.add_argument("--gamma", type=float, help="grid resolution factor in (0, 1]")
    p.add_argument("--electron-mode", choices=["valence", "all_electron"])
    p.add_argument("--format", choices=["json", "csv"], default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corroqre", description="Resource estimates and CE/KMC diffusion tools")
    parser.add_argument("--version", action="version", version=f"corroqre {__version__}")
    sub = parser.add_subparsers(dest="group", required=True)

    q = sub.add_parser("qre", help="quantum resource estimates")
    qs = q.add_subparsers(dest="action", required=True)
    for name in ("first", "second", "sweep", "extrapolate"):
        p = qs.add_parser(name)
        _common(p)
        p.add_argument("--geometry", help="extended XYZ file")
        p.add_argument("--model", help=f"bundled model: {', '.join(sorted(MODELS))}")
        p.add_argument("--cutoffs", help="comma-separated cutoffs in Ry")

    c = sub.add_parser("ce", help="cluster expansion")
    cs = c.add_subparsers(dest="action", required=True)
    p = cs.add_parser("fit")
    _common(p)
    p.add_argument("--training", help="training CSV or JSON")
    p = cs.add_parser("barriers")
    _common(p)

    k = sub.add_parser("kmc", help="kinetic Monte Carlo")
    ks = k.add_subparsers(dest="action", required=True)
    _common(ks.add_parser("run"))

    w = sub.add_parser("workflow", help="closed-form workflow utilities")
    ws = w.add_subparsers(dest="action", required=True)
    p = ws.add_parser("arrhenius")
    _common(p)
    p.add_argument("--A", type=float, help="prefactor, 1/s")
    p.add_argument("--e-a-ha", dest="e_a_ha", type=float, help="activation energy, Ha")
    p.add_argument("--temperature", type=float, help="K")
    p = ws.add_parser("scaling")
    _common(p)
    p.add_argument("--method", choices=list(workflow.METHODS))
    p.add_argument("--N", type=int)
    p.add_argument("--eta", type=int)
    p.add_argument("--D", type=int)
    p.add_argument("--B", type=int)
    p = ws.add_parser("solution-energy")
    _common(p)
    for key in ("e_alloy_o", "e_alloy", "e_o2"):
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float, help="Ha")
    p = ws.add_parser("crit-al")
    _common(p)
    for key in ("g_star", "n_o_s", "d_o", "d_al", "v_m", "v_ox"):
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)

    g = sub.add_parser("geom", help="geometry inspection")
    gs = g.add_subparsers(dest="action", required=True)
    p = gs.add_parser("inspect")
    _common(p)
    p.add_argument("path", nargs="?", help="extended XYZ file")
    p.add_argument("--model")
    p.add_argument("--cutoffs", help="comma-separated cutoffs in Ry")
    return parser


COMMANDS = {"ce": cmd_ce, "kmc": cmd_kmc, "workflow": cmd_workflow, "geom": cmd_geom}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, base = load_config(args.config)
        if args.group == "qre":
            fn = cmd_extrapolate if args.action == "extrapolate" else cmd_qre
        else:
            fn = COMMANDS[args.group]
        return fn(args, cfg, base)
    except INPUT_ERRORS as exc:
        print(f"corroqre: configuration error: {exc}", file=sys.stderr)
        return 2
    except (CorroError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"corroqre: computation error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
