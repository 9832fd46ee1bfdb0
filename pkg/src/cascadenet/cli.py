"""Command-line entry point: ``cascadenet {simulate,sweep,verify,export-map}``.

Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 a check failed
(``sweep --strict`` or ``verify``).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .cascade import (
    Scenario,
    SimConfig,
    calculate_vulnerability,
    gamma_monotonicity_violations,
    sweep_gamma,
    sweep_importance,
)
from .errors import CascadeNetError
from .gates import DEFAULT_DORMANCY, HORIZON_HOURS, PAND_STEPS
from .geo import dumps_geojson, export_geojson, grid_geojson, network_cells
from .interdep import DEFAULT_CELL_SIZE, GeoGrid, create_network
from .model import IMPORTANCE_PRESETS, normalize_importance, read_model
from .oracle import GATES, budget_csv, verify_gates
from .synthetic import case_study_path

log = logging.getLogger("cascadenet")

EXIT_INVALID, EXIT_IO, EXIT_CHECK = 1, 2, 3


class UsageError(CascadeNetError):
    pass


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _config_path(value: str) -> Path:
    if value == "case-study":
        return Path(str(case_study_path()))
    return Path(value)


def _load(args):
    path = _config_path(args.config)
    if not path.is_file():
        raise FileNotFoundError(f"config not found: {path}")
    model = read_model(path)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return path, model, digest


def _check_gamma(gamma):
    if not 0.0 <= gamma <= 1.0:
        raise UsageError(f"Γ must lie in [0,1], got {gamma}")


def _importance(spec, model):
    if spec is None:
        return model.importance, "config"
    if spec in IMPORTANCE_PRESETS:
        raw = IMPORTANCE_PRESETS[spec]
    else:
        path = Path(spec)
        if not path.is_file():
            raise UsageError(
                f"--importance must be one of {sorted(IMPORTANCE_PRESETS)} or a JSON matrix file, got {spec!r}"
            )
        raw = json.loads(path.read_text(encoding="utf-8"))
    return normalize_importance(raw, model.rules, len(model.networks)), spec


def _float_list(text, flag):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag} must be a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise UsageError(f"{flag} is empty")
    return vals


def _grid(model, cell_size):
    return GeoGrid.covering(model.networks, cell_size)


def _manifest(command, config_path, digest, params, out):
    return json.dumps(
        {
            "command": command,
            "config": str(config_path),
            "config_sha256": digest,
            "parameters": params,
            "tool_version": __version__,
            "output_dir": str(out),
        },
        indent=1,
        sort_keys=True,
    ) + "\n"


def cmd_simulate(args) -> int:
    _check_gamma(args.gamma)
    config_path, model, digest = _load(args)
    importance, imp_label = _importance(args.importance, model)
    cfg = SimConfig(
        importance=importance,
        iterations=args.iterations,
        scenario=Scenario(args.scenario),
        gamma_threshold=args.gamma,
        dormancy=args.dormancy,
        seed=args.seed,
        horizon=args.horizon,
    )
    graph = create_network(model.networks, model.rules, _grid(model, args.cell_size), args.gamma)
    report = calculate_vulnerability(graph, cfg)
    out = Path(args.out)
    params = {
        "gamma": args.gamma, "scenario": cfg.scenario.value, "iterations": cfg.iterations,
        "importance": imp_label, "importance_matrix": importance.entries.tolist(),
        "dormancy": cfg.dormancy, "seed": cfg.seed, "horizon": cfg.horizon,
        "cell_size": args.cell_size,
    }
    _write_atomic(out / "report.csv", report.to_csv())
    _write_atomic(out / "summary.csv", report.summary_csv())
    _write_atomic(out / "edges.csv", graph.to_csv())
    _write_atomic(out / "manifest.json", _manifest("simulate", config_path, digest, params, out))
    for net in model.networks:
        log.info("%s: average P_fail(%d) = %.4f", net.name, cfg.horizon,
                 report.infra_averages()[net.index])
    return 0


def cmd_sweep(args) -> int:
    gammas = _float_list(args.gamma_list, "--gamma-list")
    for g in gammas:
        _check_gamma(g)
    config_path, model, digest = _load(args)
    importance, imp_label = _importance(args.importance, model)
    scenarios = [Scenario(args.scenario)] if args.scenario else list(Scenario)
    grid = _grid(model, args.cell_size)
    cfg = SimConfig(importance=importance, dormancy=args.dormancy, seed=args.seed, horizon=args.horizon)

    def builder(gamma):
        return create_network(model.networks, model.rules, grid, gamma)

    rows = sweep_gamma(builder, gammas, cfg, scenarios, iteration=args.iterations)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["gamma", "scenario", "pair", "parent", "child", "value"])
    for r in rows:
        w.writerow([repr(r.gamma), r.scenario.value, f"I{r.parent}->I{r.child}", r.parent, r.child, repr(r.value)])
    out = Path(args.out)
    _write_atomic(out / "gamma_sweep.csv", buf.getvalue())

    imp_labels = []
    if args.importance_list:
        imp_labels = [s.strip() for s in args.importance_list.split(",") if s.strip()]
        mats = {}
        for label in imp_labels:
            mats[label] = _importance(label, model)[0]
        irows = sweep_importance(builder, gammas, mats, cfg, scenarios, iteration=args.iterations)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gamma", "importance", "infra", "scenario", "value"])
        for g, label, infra, sc, v in irows:
            w.writerow([repr(g), label, infra, sc, repr(v)])
        _write_atomic(out / "importance_sweep.csv", buf.getvalue())

    params = {
        "gamma_list": gammas, "importance": imp_label, "importance_list": imp_labels,
        "scenarios": [s.value for s in scenarios], "iteration": args.iterations,
        "dormancy": args.dormancy, "seed": args.seed, "horizon": args.horizon,
        "cell_size": args.cell_size, "strict": args.strict,
    }
    _write_atomic(out / "manifest.json", _manifest("sweep", config_path, digest, params, out))
    problems = gamma_monotonicity_violations(rows)
    for p in problems:
        log.warning("Γ monotonicity violated: %s", p)
    if problems and args.strict:
        print(f"{len(problems)} Γ-monotonicity violation(s)", file=sys.stderr)
        return EXIT_CHECK
    return 0


def cmd_verify(args) -> int:
    gates = [g.strip().lower() for g in args.gates.split(",") if g.strip()]
    unknown = sorted(set(gates) - set(GATES))
    if not gates or unknown:
        raise UsageError(f"--gates must name some of {','.join(GATES)}, got {args.gates!r}")
    if args.samples < 1000:
        raise UsageError("--samples must be at least 1000")
    rows = verify_gates(gates, n=args.samples, seed=args.seed, steps=args.steps)
    out = Path(args.out)
    _write_atomic(out / "error_budget.csv", budget_csv(rows))
    params = {"gates": gates, "samples": args.samples, "steps": args.steps, "seed": args.seed}
    _write_atomic(out / "manifest.json", _manifest("verify", "-", "-", params, out))
    failed = [r for r in rows if r.normative and not r.passed]
    for r in failed:
        print(f"FAIL {r.gate} {r.params} t={r.t:g}: |{r.closed_form:.6g} - {r.mc_estimate:.6g}| "
              f"> 3 x {r.std_error:.2g}", file=sys.stderr)
    return EXIT_CHECK if failed else 0


def _slug(text):
    return "".join(ch if ch.isalnum() else "_" for ch in text.lower())


def cmd_export_map(args) -> int:
    run = Path(args.run)
    manifest_path = run / "manifest.json"
    if not manifest_path.is_file():
        raise FileNotFoundError(f"run manifest not found: {manifest_path}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("command") != "simulate":
        raise UsageError(f"{run} is not a simulate run")
    params = manifest["parameters"]
    config_path = Path(manifest["config"])
    if not config_path.is_file():
        raise FileNotFoundError(f"config not found: {config_path}")
    model = read_model(config_path)
    names = {net.name: net for net in model.networks}
    wanted = [s.strip() for s in args.infra.split(",") if s.strip()]
    unknown = [w for w in wanted if w not in names]
    if unknown or not wanted:
        raise UsageError(f"unknown infrastructure(s) {unknown}; known: {sorted(names)}")
    layers = [s.strip() for s in args.layer.split(",") if s.strip()]
    bad_layers = [x for x in layers if x not in ("intra", "inter", "comprehensive")]
    if bad_layers or not layers:
        raise UsageError(f"unknown layer(s) {bad_layers}; choose intra, inter, comprehensive")

    horizon = int(params["horizon"])
    last = int(params["iterations"])
    iterations = [last] if args.iteration is None else [int(v) for v in args.iteration.split(",")]
    for m in iterations:
        if not 1 <= m <= last:
            raise UsageError(f"iteration {m} outside 1..{last}")
    values = {}
    with open(run / "report.csv", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if int(row["t"]) == horizon:
                key = (int(row["iteration"]), int(row["infra"]), int(row["node"]))
                values[key] = row

    grid = GeoGrid.covering(model.networks, float(params["cell_size"]))
    box = grid.bounds(model.networks)
    out = Path(args.out) if args.out else run
    for name in wanted:
        net = names[name]
        levels = None if args.levels is None else [
            int(x) if x.strip().isdigit() else x.strip() for x in args.levels.split(",")
        ]
        cells = network_cells(net, box, levels=levels)
        for m in iterations:
            for layer in layers:
                valued = [c.with_value(float(values[(m, c.seed.infra, c.seed.local)][layer])) for c in cells]
                doc = export_geojson(valued, layer, params["scenario"], m, {net.index: net.name})
                fname = f"map_{_slug(name)}_{layer}_{params['scenario']}_it{m}.geojson"
                _write_atomic(out / fname, dumps_geojson(doc))
    if args.grid:
        _write_atomic(out / "grid.geojson", dumps_geojson(grid_geojson(grid, box)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cascadenet", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"cascadenet {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="model JSON, or 'case-study' for the bundled model")
        sp.add_argument("--importance", help="R1, R2, R3 or a JSON matrix file (default: from config)")
        sp.add_argument("--dormancy", type=float, default=DEFAULT_DORMANCY)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--horizon", type=int, default=HORIZON_HOURS)
        sp.add_argument("--cell-size", type=float, default=DEFAULT_CELL_SIZE)
        sp.add_argument("--out", required=True)

    s = sub.add_parser("simulate", help="run the vulnerability iterations")
    common(s)
    s.add_argument("--gamma", type=float, default=0.5)
    s.add_argument("--scenario", choices=[x.value for x in Scenario], default="worst")
    s.add_argument("--iterations", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="Γ and importance sweeps")
    common(s)
    s.add_argument("--gamma-list", default="0.3,0.5,0.7")
    s.add_argument("--importance-list", help="comma-separated presets or files, e.g. R1,R2,R3")
    s.add_argument("--scenario", choices=[x.value for x in Scenario], help="default: all three")
    s.add_argument("--iterations", type=int, default=1, help="iteration whose values are reported")
    s.add_argument("--strict", action="store_true", help="exit 3 on Γ-monotonicity violations")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("verify", help="closed forms versus Monte Carlo")
    s.add_argument("--samples", type=int, default=10**6)
    s.add_argument("--steps", type=int, default=PAND_STEPS)
    s.add_argument("--gates", default=",".join(GATES))
    s.add_argument("--seed", type=int, default=20240601)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("export-map", help="Voronoi GeoJSON maps of a simulate run")
    s.add_argument("--run", required=True)
    s.add_argument("--infra", required=True, help="comma-separated infrastructure names")
    s.add_argument("--layer", default="comprehensive", help="intra, inter, comprehensive (comma list)")
    s.add_argument("--iteration", help="comma-separated iterations (default: last)")
    s.add_argument("--levels", help="seed levels by index or name (default: terminal level)")
    s.add_argument("--grid", action="store_true", help="also write the grid overlay")
    s.add_argument("--out", help="output directory (default: the run directory)")
    s.set_defaults(func=cmd_export_map)
    return p


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("CASCADENET_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CascadeNetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
