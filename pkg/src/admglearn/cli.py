"""Command-line interface.

Subcommands: discover (CSV -> graph JSON + DOT), simulate (synthetic
datasets), evaluate (score an estimate against a truth graph), benchmark
(simulate/discover/evaluate over the scenario grid), estimate-beta.

Every run writes a ``manifest.json`` next to its outputs recording the
command, resolved configuration, seeds, input digest, tool version, and
timestamps.  JSON outputs carry a ``manifest`` key and CSV outputs a
leading ``# manifest:`` comment line pointing back at it.

Exit codes: 0 success, 2 input error, 3 non-convergence (outputs still
written), 4 internal numeric failure.
"""

import argparse
import csv
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, metrics, mggd, simgen
from .constraints import ConstraintKind
from .exceptions import EstimationError, NumericError, ParameterError
from .graph import AdmgStructure, Parameters, threshold
from .optimizer import OptimizerConfig, PriorKnowledge, discover

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_NUMERIC = 4

MANIFEST_NAME = "manifest.json"


class InputError(Exception):
    """Malformed input file or flags; maps to exit code 2."""


# ---------------------------------------------------------------- file I/O

def read_csv_dataset(path):
    """Read a numeric CSV with a header row.

    Leading '#' comment lines are ignored.  Raises InputError with row and
    column diagnostics for missing or non-numeric cells.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise InputError(f"{path}: empty file")
    names = [c.strip() for c in rows[0]]
    if len(names) < 2:
        raise InputError(f"{path}: need at least 2 columns, found {len(names)}")
    data = np.empty((len(rows) - 1, len(names)))
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(names):
            raise InputError(f"{path}: row {r} has {len(row)} cells, expected {len(names)}")
        for c, cell in enumerate(row):
            cell = cell.strip()
            if cell == "":
                raise InputError(f"{path}: missing cell at row {r}, column {names[c]!r}")
            try:
                data[r - 2, c] = float(cell)
            except ValueError:
                raise InputError(
                    f"{path}: non-numeric cell {cell!r} at row {r}, column {names[c]!r}") from None
    if data.shape[0] == 0:
        raise InputError(f"{path}: no data rows")
    return names, data


def write_csv(path, header, rows, manifest_name=MANIFEST_NAME):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# manifest: {manifest_name}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_dataset_csv(path, names, X, manifest_name=MANIFEST_NAME):
    write_csv(path, names, ([repr(v) for v in row] for row in X), manifest_name)


def graph_json_payload(structure, params, w_threshold, h_final, converged,
                       manifest_name=MANIFEST_NAME):
    return {
        "d": int(structure.d),
        "delta": params.delta.tolist(),
        "omega": params.omega.tolist(),
        "directed_edges": [[j, i] for j, i in structure.directed_edges()],
        "bidirected_edges": [[i, j] for i, j in structure.bidirected_edges()],
        "threshold": float(w_threshold),
        "h_final": float(h_final),
        "converged": bool(converged),
        "manifest": manifest_name,
    }


def dump_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_graph_json(path):
    """Load a graph JSON file; returns (payload dict, AdmgStructure, Parameters)."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        d = int(payload["d"])
        D = np.zeros((d, d), dtype=np.int8)
        for j, i in payload["directed_edges"]:
            D[j, i] = 1
        B = np.zeros((d, d), dtype=np.int8)
        for i, j in payload["bidirected_edges"]:
            B[i, j] = B[j, i] = 1
        structure = AdmgStructure(D=D, B=B)
        params = Parameters(delta=np.asarray(payload["delta"], dtype=float),
                            omega=np.asarray(payload["omega"], dtype=float))
    except (KeyError, ValueError, TypeError, ParameterError) as exc:
        raise InputError(f"{path}: not a valid graph file ({exc})") from exc
    return payload, structure, params


def write_dot(path, structure, names):
    lines = ["digraph admg {"]
    for name in names:
        lines.append(f'  "{name}";')
    for j, i in structure.directed_edges():
        lines.append(f'  "{names[j]}" -> "{names[i]}";')
    for i, j in structure.bidirected_edges():
        lines.append(f'  "{names[i]}" -> "{names[j]}" [dir=both, style=dashed];')
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_manifest(out_dir, command, config, seed, input_path=None, outputs=()):
    digest = None
    if input_path is not None and Path(input_path).exists():
        digest = hashlib.sha256(Path(input_path).read_bytes()).hexdigest()
    payload = {
        "command": command,
        "config": config,
        "seed": seed,
        "input_digest": digest,
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "outputs": sorted(outputs),
    }
    dump_json(Path(out_dir) / MANIFEST_NAME, payload)


def load_prior(path, names):
    """Read a prior-knowledge JSON file and map variable names to indices."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    index = {name: k for k, name in enumerate(names)}

    def resolve(name):
        if name not in index:
            raise InputError(f"{path}: unknown variable {name!r}; "
                             f"CSV columns are {names}")
        return index[name]

    tiers = [[resolve(v) for v in group] for group in doc.get("tiers", [])]
    unconfounded = {(resolve(a), resolve(b)) for a, b in doc.get("unconfounded", [])}
    forbidden = {(resolve(a), resolve(b)) for a, b in doc.get("forbidden", [])}
    prior = PriorKnowledge(tiers=tiers, unconfounded=unconfounded,
                           forbidden_directed=forbidden)
    try:
        prior.validate(len(names))
    except ParameterError as exc:
        raise InputError(f"{path}: {exc}") from exc
    return prior


# ---------------------------------------------------------------- commands

def _optimizer_config(args):
    return OptimizerConfig(
        tol=args.tol,
        max_iterations=args.max_iterations,
        rho_init=args.rho_init,
        rho_factor=args.rho_factor,
        rho_max=args.rho_max,
        alpha_init=args.alpha_init,
        lam=args.lam,
        w_threshold=args.w_threshold,
        constraint=ConstraintKind.from_name(args.constraint),
        h_tol=args.h_tol,
        max_dual_steps=args.max_dual_steps,
    )


def _config_dict(config):
    return {
        "tol": config.tol, "max_iterations": config.max_iterations,
        "rho_init": config.rho_init, "rho_factor": config.rho_factor,
        "rho_max": config.rho_max, "alpha_init": config.alpha_init,
        "lambda": config.lam, "w_threshold": config.w_threshold,
        "constraint": config.constraint.value, "h_tol": config.h_tol,
        "max_dual_steps": config.max_dual_steps,
    }


def cmd_discover(args):
    names, X = read_csv_dataset(args.csv)
    X = X - X.mean(axis=0)
    config = _optimizer_config(args)
    prior = load_prior(args.prior, names) if args.prior else None

    if args.beta is not None:
        beta_used = float(args.beta)
    else:
        est = mggd.estimate_beta_dataset(X)
        beta_used = max(est.beta, 1.0)  # the power objective needs beta >= 1
        if est.beta < 1.0:
            print(f"estimated beta {est.beta:.3f} < 1; clamped to 1.0", file=sys.stderr)

    fit = discover(X, beta_used, config=config, prior=prior)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = graph_json_payload(fit.structure, fit.theta_hat, config.w_threshold,
                                 fit.h_final, fit.converged)
    dump_json(out / "graph.json", payload)
    write_dot(out / "graph.dot", fit.structure, names)
    manifest_config = _config_dict(config)
    manifest_config["beta_used"] = beta_used
    manifest_config["beta_source"] = "flag" if args.beta is not None else "estimated"
    write_manifest(out, "discover", manifest_config, args.seed, input_path=args.csv,
                   outputs=["graph.json", "graph.dot"])
    print(f"wrote {out / 'graph.json'} (converged={fit.converged}, "
          f"h={fit.h_final:.3e}, beta={beta_used:g})")
    return EXIT_OK if fit.converged else EXIT_NO_CONVERGENCE


def _derive_seed(*parts):
    return int(np.random.SeedSequence(entropy=list(parts)).generate_state(1)[0])


def _simulate_one(cfg, out_dir, names=None):
    params = simgen.random_admg(cfg)
    data_seed = _derive_seed(cfg.seed, 1)
    X = simgen.generate_data(params, cfg.n, cfg.beta, data_seed)
    names = names or [f"x{k}" for k in range(cfg.d)]
    out_dir.mkdir(parents=True, exist_ok=True)
    write_dataset_csv(out_dir / "dataset.csv", names, X)
    truth = threshold(params, 0.0)
    dump_json(out_dir / "truth.json",
              graph_json_payload(truth, params, 0.0, 0.0, True))
    return params, X


def cmd_simulate(args):
    out = Path(args.out)
    if args.grid:
        configs = [simgen.SimConfig(d=c.d, n=c.n, beta=c.beta,
                                    p_directed=args.p_directed,
                                    p_bidirected=args.p_bidirected,
                                    seed=_derive_seed(args.seed, k))
                   for k, c in enumerate(simgen.scenario_grid())]
        outputs = []
        for k, cfg in enumerate(configs):
            sub = out / f"scenario_{k:02d}"
            _simulate_one(cfg, sub)
            outputs += [f"scenario_{k:02d}/dataset.csv", f"scenario_{k:02d}/truth.json"]
        out.mkdir(parents=True, exist_ok=True)
        write_manifest(out, "simulate", {"grid": True, "p_directed": args.p_directed,
                                         "p_bidirected": args.p_bidirected},
                       args.seed, outputs=outputs)
        print(f"wrote {len(configs)} scenario datasets under {out}")
        return EXIT_OK

    cfg = simgen.SimConfig(d=args.d, n=args.n, beta=args.beta,
                           p_directed=args.p_directed, p_bidirected=args.p_bidirected,
                           seed=args.seed)
    _simulate_one(cfg, out)
    write_manifest(out, "simulate",
                   {"d": cfg.d, "n": cfg.n, "beta": cfg.beta,
                    "p_directed": cfg.p_directed, "p_bidirected": cfg.p_bidirected},
                   args.seed, outputs=["dataset.csv", "truth.json"])
    print(f"wrote {out / 'dataset.csv'} and {out / 'truth.json'}")
    return EXIT_OK


def _score_rows(scores, prefix=()):
    rows = []
    for level in ("skeleton", "arrowhead", "tail"):
        s = scores[level]
        rows.append(list(prefix) + [level, repr(s.precision), repr(s.recall), repr(s.f1)])
    return rows


def cmd_evaluate(args):
    _, est, _ = load_graph_json(args.estimate)
    _, truth, _ = load_graph_json(args.truth)
    try:
        scores = metrics.all_scores(est, truth)
    except ParameterError as exc:
        raise InputError(str(exc)) from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "scores.csv", ["metric", "precision", "recall", "f1"],
              _score_rows(scores))
    write_manifest(out, "evaluate", {"estimate": str(args.estimate),
                                     "truth": str(args.truth)},
                   None, outputs=["scores.csv"])
    for level in ("skeleton", "arrowhead", "tail"):
        s = scores[level]
        print(f"{level}: precision={s.precision:.3f} recall={s.recall:.3f} f1={s.f1:.3f}")
    return EXIT_OK


REPLICATE_HEADER = [
    "scenario", "n", "d", "beta", "replicate", "seed", "ok", "converged",
    "h_final", "beta_used",
    "skeleton_precision", "skeleton_recall", "skeleton_f1",
    "arrowhead_precision", "arrowhead_recall", "arrowhead_f1",
    "tail_precision", "tail_recall", "tail_f1", "error",
]


def cmd_benchmark(args):
    grid = simgen.scenario_grid()
    selected = list(range(len(grid)))
    if args.scenario:
        bad = [s for s in args.scenario if not 0 <= s < len(grid)]
        if bad:
            raise InputError(f"scenario indices out of range: {bad} (grid has {len(grid)})")
        selected = sorted(set(args.scenario))

    config = _optimizer_config(args)
    rep_rows = []
    summary_rows = []
    for si in selected:
        base = grid[si]
        level_sums = {lv: np.zeros(3) for lv in ("skeleton", "arrowhead", "tail")}
        n_ok = 0
        for r in range(args.replicates):
            struct_seed = _derive_seed(args.seed, si, r, 0)
            data_seed = _derive_seed(args.seed, si, r, 1)
            cfg = simgen.SimConfig(d=base.d, n=base.n, beta=base.beta,
                                   p_directed=args.p_directed,
                                   p_bidirected=args.p_bidirected, seed=struct_seed)
            row = [si, base.n, base.d, repr(base.beta), r, struct_seed]
            try:
                params = simgen.random_admg(cfg)
                X = simgen.generate_data(params, cfg.n, cfg.beta, data_seed)
                if args.estimate_beta:
                    beta_used = max(mggd.estimate_beta_dataset(X).beta, 1.0)
                else:
                    beta_used = float(base.beta)
                fit = discover(X, beta_used, config=config)
                scores = metrics.all_scores(fit.structure, threshold(params, 0.0))
                row += [1, int(fit.converged), repr(fit.h_final), repr(beta_used)]
                for lv in ("skeleton", "arrowhead", "tail"):
                    s = scores[lv]
                    row += [repr(s.precision), repr(s.recall), repr(s.f1)]
                    level_sums[lv] += (s.precision, s.recall, s.f1)
                row.append("")
                n_ok += 1
            except Exception as exc:  # per-replicate failures are recorded, not fatal
                row += [0, 0, "", ""] + [""] * 9 + [f"{type(exc).__name__}: {exc}"]
            rep_rows.append(row)
        srow = [si, base.n, base.d, repr(base.beta), n_ok, args.replicates]
        for lv in ("skeleton", "arrowhead", "tail"):
            means = level_sums[lv] / n_ok if n_ok else np.full(3, np.nan)
            srow += [repr(float(v)) for v in means]
        summary_rows.append(srow)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "replicates.csv", REPLICATE_HEADER, rep_rows)
    write_csv(out / "summary.csv",
              ["scenario", "n", "d", "beta", "ok", "replicates",
               "skeleton_precision", "skeleton_recall", "skeleton_f1",
               "arrowhead_precision", "arrowhead_recall", "arrowhead_f1",
               "tail_precision", "tail_recall", "tail_f1"],
              summary_rows)
    manifest_config = _config_dict(config)
    manifest_config.update({"replicates": args.replicates, "scenarios": selected,
                            "estimate_beta": bool(args.estimate_beta),
                            "p_directed": args.p_directed,
                            "p_bidirected": args.p_bidirected})
    write_manifest(out, "benchmark", manifest_config, args.seed,
                   outputs=["replicates.csv", "summary.csv"])
    print(f"wrote {out / 'replicates.csv'} and {out / 'summary.csv'}")
    return EXIT_OK


def cmd_estimate_beta(args):
    names, X = read_csv_dataset(args.csv)
    try:
        est = mggd.estimate_beta_dataset(X - X.mean(axis=0))
    except EstimationError as exc:
        raise InputError(str(exc)) from exc
    for name, b in zip(names, est.per_column):
        print(f"{name}: {'failed' if np.isnan(b) else f'{b:.4f}'}")
    print(f"max: {est.beta:.4f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        dump_json(out / "beta.json", {
            "beta": est.beta,
            "per_column": {name: (None if np.isnan(b) else float(b))
                           for name, b in zip(names, est.per_column)},
            "manifest": MANIFEST_NAME,
        })
        write_manifest(out, "estimate-beta", {}, None, input_path=args.csv,
                       outputs=["beta.json"])
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_optimizer_flags(p):
    p.add_argument("--beta", type=float, default=None,
                   help="shape parameter; estimated from the data when omitted")
    p.add_argument("--constraint", choices=[k.value for k in ConstraintKind],
                   default="bowfree", help="graph class to enforce")
    p.add_argument("--lambda", dest="lam", type=float, default=0.05,
                   help="sparsity penalty weight")
    p.add_argument("--w-threshold", type=float, default=0.05, help="edge threshold")
    p.add_argument("--tol", type=float, default=1e-6, help="parameter-change stop")
    p.add_argument("--max-iterations", type=int, default=50,
                   help="primal iteration budget of the first dual step")
    p.add_argument("--rho-init", type=float, default=1.0)
    p.add_argument("--rho-factor", type=float, default=10.0)
    p.add_argument("--rho-max", type=float, default=1e16)
    p.add_argument("--alpha-init", type=float, default=0.0)
    p.add_argument("--h-tol", type=float, default=1e-8)
    p.add_argument("--max-dual-steps", type=int, default=20)


def _add_sim_flags(p):
    p.add_argument("--p-directed", type=float, default=0.3,
                   help="per-pair probability of a directed edge")
    p.add_argument("--p-bidirected", type=float, default=0.2,
                   help="per-pair probability of a bidirected edge")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="admglearn",
        description="Estimate acyclic directed mixed graphs from observational data "
                    "by continuous optimization of a generalized normal likelihood.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discover", help="estimate a graph from a CSV dataset")
    p.add_argument("csv", help="input dataset (header row, numeric columns)")
    _add_optimizer_flags(p)
    p.add_argument("--prior", default=None, help="prior-knowledge JSON file")
    p.add_argument("--seed", type=int, default=0, help="recorded in the manifest")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("simulate", help="generate a synthetic dataset (or the full grid)")
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--beta", type=float, default=1.0)
    _add_sim_flags(p)
    p.add_argument("--grid", action="store_true", help="emit all 18 benchmark scenarios")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="score an estimated graph against a truth graph")
    p.add_argument("estimate", help="estimated graph JSON")
    p.add_argument("truth", help="ground-truth graph JSON")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="simulate/discover/evaluate over the grid")
    p.add_argument("--replicates", type=int, default=50)
    p.add_argument("--scenario", type=int, action="append", default=None,
                   help="grid index to run (repeatable; default all 18)")
    p.add_argument("--estimate-beta", action="store_true",
                   help="estimate beta per replicate instead of using the true value")
    _add_sim_flags(p)
    _add_optimizer_flags(p)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("estimate-beta", help="per-column shape estimates and their max")
    p.add_argument("csv")
    p.add_argument("--out", default=None, help="optional output directory")
    p.set_defaults(func=cmd_estimate_beta)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ParameterError, EstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
