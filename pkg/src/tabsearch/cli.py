"""Command-line entry point.

Subcommands::

    tabsearch search    run a search and write its log plus analysis artifacts
    tabsearch analyze   recompute artifacts from one or more run logs
    tabsearch datasets  split-check / synth helpers for tabular CSV files

Search settings can come from a YAML or JSON file (``--config``); flags given on
the command line take precedence over file values.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from . import benchmarks
from .controller import MODES, SearchAborted, SearchConfig, best, run
from .errors import SearchError
from .executor import SimulatedWorkerPool, ThreadWorkerPool, TrainerBackend, utilization
from .reporting import (
    RunLogWriter,
    emit_artifacts,
    load_csv,
    read_run_log,
    split_sizes,
    write_covertype_like,
)
from .space import DEFAULT_HP, ArchSpace, HPConfig

logger = logging.getLogger("tabsearch")

# key in a config file -> (type, default)
CONFIG_KEYS = {
    "mode": (str, "AgEBO"),
    "P": (int, 100),
    "S": (int, 10),
    "W": (int, 4),
    "kappa": (float, 0.001),
    "seed": (int, 0),
    "wall_time": (float, None),
    "max_evaluations": (int, None),
    "n_initial": (int, 10),
    "n_candidates": (int, 10_000),
    "n_trees": (int, 100),
    "lr1": (float, DEFAULT_HP.lr1),
    "bs1": (int, DEFAULT_HP.bs1),
    "n": (int, DEFAULT_HP.n),
    "backend": (str, "trainer"),
    "data": (str, None),
    "label_col": (str, None),
    "split_seed": (int, 0),
    "n_max": (int, 8),
    "epochs": (int, 20),
    "dtype": (str, "float32"),
    "objective": (str, "layered"),
    "m": (int, 10),
    "out": (str, "runs/latest"),
}


def load_config_file(path) -> dict:
    """Read a YAML or JSON mapping of run settings (JSON is valid YAML)."""
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise SearchError(f"{path}: expected a mapping of settings")
    # accept dashed spellings as in the CLI flags
    raw = {str(k).replace("-", "_"): v for k, v in raw.items()}
    if "dataset" in raw and "data" not in raw:
        raw["data"] = raw.pop("dataset")
    unknown = sorted(set(raw) - set(CONFIG_KEYS))
    if unknown:
        raise SearchError(f"{path}: unknown keys {unknown}")
    return raw


def resolve_settings(args: argparse.Namespace) -> dict:
    settings = {k: default for k, (_, default) in CONFIG_KEYS.items()}
    if args.config:
        settings.update(load_config_file(args.config))
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    for key, (typ, _) in CONFIG_KEYS.items():
        if settings[key] is not None:
            settings[key] = typ(settings[key])
    return settings


def _add_search_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML/JSON file with run settings")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("-P", "--P", dest="P", type=int, help="population size")
    p.add_argument("-S", "--S", dest="S", type=int, help="tournament sample size")
    p.add_argument("-W", "--W", dest="W", type=int, help="number of workers")
    p.add_argument("--kappa", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--wall-time", dest="wall_time", type=float, help="seconds")
    p.add_argument("--max-evaluations", dest="max_evaluations", type=int)
    p.add_argument("--n-initial", dest="n_initial", type=int)
    p.add_argument("--n-candidates", dest="n_candidates", type=int)
    p.add_argument("--n-trees", dest="n_trees", type=int)
    p.add_argument("--lr1", type=float, help="fixed learning rate (AgE, AgE-n)")
    p.add_argument("--bs1", type=int, help="fixed batch size (AgE, AgE-n)")
    p.add_argument("--n", type=int, help="fixed process count (AgE-n)")
    p.add_argument("--backend", choices=("trainer", "simulated"))
    p.add_argument("--data", help="CSV file with a header row")
    p.add_argument("--label-col", dest="label_col")
    p.add_argument("--split-seed", dest="split_seed", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--dtype", choices=("float32", "float64"))
    p.add_argument("--objective", choices=sorted(benchmarks.REGISTRY), help="simulated objective")
    p.add_argument("-m", "--m", dest="m", type=int, help="number of variable nodes")
    p.add_argument("--out", help="output directory")


def cmd_search(args: argparse.Namespace) -> int:
    s = resolve_settings(args)
    cfg = SearchConfig(
        mode=s["mode"], P=s["P"], S=s["S"], W=s["W"],
        wall_time_limit=s["wall_time"], max_evaluations=s["max_evaluations"],
        fixed_hp=HPConfig(s["lr1"], s["bs1"], s["n"]), kappa=s["kappa"],
        n_initial=s["n_initial"], n_candidates=s["n_candidates"], n_trees=s["n_trees"],
        seed=s["seed"], poll_interval=0.0 if s["backend"] == "simulated" else 0.1,
    )
    if s["backend"] == "simulated":
        space = ArchSpace(m=s["m"])
        pool = SimulatedWorkerPool(benchmarks.simulated_backend(s["objective"], space), cfg.W)
    else:
        if not s["data"] or not s["label_col"]:
            raise SearchError("the trainer backend needs --data and --label-col")
        dataset = load_csv(s["data"], s["label_col"], split_seed=s["split_seed"])
        space = ArchSpace(m=s["m"], input_dim=dataset.n_features, output_dim=dataset.n_classes)
        backend = TrainerBackend(dataset.train_valid(), space, n_max=s["n_max"], epochs=s["epochs"],
                                 seed=s["seed"], dtype=s["dtype"])
        pool = ThreadWorkerPool(backend, cfg.W)
        logger.info("loaded %s: %d rows, %d features, %d classes", s["data"], len(dataset.labels),
                    dataset.n_features, dataset.n_classes)

    out = Path(s["out"])
    out.mkdir(parents=True, exist_ok=True)
    header = {**cfg.to_dict(), **{k: s[k] for k in ("backend", "data", "label_col", "split_seed",
                                                     "n_max", "epochs", "objective", "m")}}
    log_path = out / "runlog.jsonl"
    status = 0
    with RunLogWriter(log_path, header) as writer:
        try:
            state = run(cfg, pool, space, log=writer)
        except SearchAborted as exc:
            logger.error("search aborted after %d evaluations: %s", len(exc.state.history), exc)
            state, status = exc.state, 1
    if state.history:
        top = best(state)
        print(f"evaluations: {len(state.history)}")
        print(f"best objective: {top.objective:.6f} (job {top.job_id})")
        print(f"best arch: {top.arch.to_list()}")
        print(f"best hp: {json.dumps(top.hp.to_dict())}")
        print(f"utilization: {utilization(state.history, cfg.W, state.clock):.3f}")
    log = read_run_log(log_path)
    for path in emit_artifacts(log, out):
        logger.info("wrote %s", path)
    print(f"run log: {log_path}")
    return status


def cmd_analyze(args: argparse.Namespace) -> int:
    logs = [read_run_log(p) for p in args.logs]
    names = [log.name for log in logs]
    if len(set(names)) < len(names):
        # runs written to different directories share the file stem; use parents
        for log, p in zip(logs, args.logs):
            log.name = Path(p).resolve().parent.name + "/" + log.name
    for path in emit_artifacts(logs, args.out, top_fraction=args.top_fraction,
                               quantile_level=args.quantile):
        print(path)
    return 0


def cmd_split_check(args: argparse.Namespace) -> int:
    if args.data:
        if not args.label_col:
            raise SearchError("--data needs --label-col")
        ds = load_csv(args.data, args.label_col, split_seed=args.split_seed)
        sizes = (len(ds.train), len(ds.valid), len(ds.test))
        n = len(ds.labels)
    elif args.rows is not None:
        n = args.rows
        sizes = split_sizes(n)
    else:
        raise SearchError("give --rows N or --data FILE")
    print(f"rows {n}: train {sizes[0]} / valid {sizes[1]} / test {sizes[2]}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    write_covertype_like(args.out, args.rows, seed=args.seed)
    print(f"wrote {args.rows} balanced rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tabsearch", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="run an architecture/hyperparameter search")
    _add_search_args(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("analyze", help="trajectory, high-performer counts and PCA from run logs")
    p.add_argument("logs", nargs="+", help="run log files (JSONL)")
    p.add_argument("--out", default="analysis")
    p.add_argument("--top-fraction", dest="top_fraction", type=float, default=0.01)
    p.add_argument("--quantile", type=float, default=0.99)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("datasets", help="dataset utilities")
    dsub = p.add_subparsers(dest="datasets_command", required=True)
    q = dsub.add_parser("split-check", help="print train/valid/test sizes")
    q.add_argument("--rows", type=int)
    q.add_argument("--data")
    q.add_argument("--label-col", dest="label_col")
    q.add_argument("--split-seed", dest="split_seed", type=int, default=0)
    q.set_defaults(func=cmd_split_check)
    q = dsub.add_parser("synth", help="write a synthetic class-balanced forest-cover-format CSV")
    q.add_argument("out")
    q.add_argument("--rows", type=int, default=10_000)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SearchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
