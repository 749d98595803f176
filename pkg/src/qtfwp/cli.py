"""``qtfwp`` command line: data generation, training, QT-layer sweeps and evaluation.

Exit codes: 0 success, 1 usage, 2 numerical failure, 3 I/O, 4 integrity.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .datasets import (NARMA_WASHOUT, CsvParseError, GwConfig, NormalizationError, RawSeries,
                       SeriesError, default_series, gen_damped_shm, gen_gw_strain, gen_narma5,
                       load_csv, make_windows, save_csv)
from .svg import errorbar_svg
from .training import NumericalError, TrainableState, TrainConfig, evaluate, fit

log = logging.getLogger("qtfwp")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO, EXIT_INTEGRITY = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class IntegrityError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------- data

def _generate(args) -> RawSeries:
    if args.kind == "shm":
        return gen_damped_shm(args.omega, args.zeta, args.dt, args.n, args.x0)
    if args.kind == "narma5":
        return gen_narma5(args.n, args.seed)
    cfg = GwConfig(f0=args.f0, t_merge=args.t_merge, amp0=args.amp0, f_plus=args.f_plus,
                   f_cross=args.f_cross, noise_sigma=args.noise_sigma,
                   ringdown_tau=args.ringdown_tau, dt=args.dt, n_points=args.n, seed=args.seed)
    return gen_gw_strain(cfg)


def cmd_data(args) -> int:
    try:
        series = _generate(args)
    except SeriesError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.out or f"{args.kind}.csv")
    save_csv(series, out)
    print(f"{out}: {len(series)} points, min {series.x.min():.6g}, max {series.x.max():.6g}")
    return EXIT_OK


# ---------------------------------------------------------------- train

def _config_from_args(args, seed: int | None = None, qt_layers: int | None = None) -> TrainConfig:
    try:
        return TrainConfig(
            epochs=args.epochs, learning_rate=args.lr,
            seed=args.seed if seed is None else seed,
            qt_layers=args.qt_layers if qt_layers is None else qt_layers,
            window=args.window, split_fraction=args.split, batch_size=args.batch_size,
            theta_carryover=args.theta_carryover, topology=args.topology)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _resolve_series(dataset: str | None, csv_path: str | None, seed: int) -> tuple[RawSeries, dict]:
    if csv_path:
        return load_csv(csv_path), {"source": "csv", "path": str(csv_path)}
    name = dataset or "shm"
    try:
        series = default_series(name, seed)
    except SeriesError as exc:
        raise UsageError(str(exc)) from exc
    info = {"source": "generated", "name": name, "seed": seed}
    if name == "narma5":
        info["washout"] = NARMA_WASHOUT
    if name == "gw":
        info["gw"] = asdict(GwConfig(seed=seed))
    return series, info


def _windows(series: RawSeries, config: TrainConfig, norm=None):
    try:
        return make_windows(series, config.window, config.split_fraction, norm)
    except NormalizationError:
        raise
    except SeriesError as exc:
        raise UsageError(str(exc)) from exc


def _predictions_csv(dataset, preds) -> str:
    targets = dataset.test[1]
    rows = ["index,target,prediction"]
    rows += [f"{dataset.split_index + i},{t:.17g},{p:.17g}"
             for i, (t, p) in enumerate(zip(targets, preds))]
    return "\n".join(rows) + "\n"


def run_training(config: TrainConfig, series: RawSeries, dataset_info: dict, out_dir: Path) -> dict:
    """Fit, then write dataset.csv, params.json, losses.csv, predictions.csv and run.json."""
    started = _now()
    out_dir.mkdir(parents=True, exist_ok=True)
    data_path = out_dir / "dataset.csv"
    save_csv(series, data_path)
    # windows are built from the file just written so that eval sees identical values
    series = load_csv(data_path)
    dataset = _windows(series, config)

    record = fit(config, dataset)
    _, preds = evaluate(record.state, dataset, "test", config)

    _atomic_write(out_dir / "params.json", json.dumps(record.state.to_json(), indent=1))
    _atomic_write(out_dir / "losses.csv", record.losses_csv())
    _atomic_write(out_dir / "predictions.csv", _predictions_csv(dataset, preds))
    manifest = {
        "config": {**asdict(config), "dataset": dataset_info},
        "seed": config.seed,
        "version": __version__,
        "dataset_sha256": _sha256(data_path),
        "dataset_path": data_path.name,
        "params_path": "params.json",
        "norm": {"min": dataset.norm_min, "max": dataset.norm_max},
        "census_classical": record.census.classical,
        "census_quantum": record.census.quantum,
        "final_train_loss": record.train_loss[-1],
        "final_test_loss": record.test_loss[-1],
        "epochs_logged": {str(e): [record.train_loss[e - 1], record.test_loss[e - 1]]
                          for e in config.log_epochs if e <= config.epochs},
        "start_time": started,
        "end_time": _now(),
        "wall_time": record.wall_time,
    }
    _atomic_write(out_dir / "run.json", json.dumps(manifest, indent=2))
    return manifest


def cmd_train(args) -> int:
    config = _config_from_args(args)
    series, info = _resolve_series(args.dataset, args.csv, config.seed)
    manifest = run_training(config, series, info, Path(args.out))
    print(f"census: {manifest['census_classical']} classical, {manifest['census_quantum']} quantum")
    print(f"final train {manifest['final_train_loss']:.4e} / test {manifest['final_test_loss']:.4e}")
    print(f"wrote {Path(args.out) / 'run.json'}")
    return EXIT_OK


# ---------------------------------------------------------------- sweep

def _sweep_cell(config: TrainConfig, series: RawSeries, info: dict, out_dir: str):
    try:
        m = run_training(config, series, info, Path(out_dir))
        return "ok", m["census_quantum"], m["final_train_loss"], m["final_test_loss"]
    except NumericalError as exc:
        return f"numeric-failure: {exc}", None, math.nan, math.nan
    except (OSError, ValueError) as exc:
        return f"failed: {exc}", None, math.nan, math.nan


def cmd_sweep(args) -> int:
    try:
        layers = [int(v) for v in args.layers.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--layers must be a comma-separated list of integers, got {args.layers!r}")
    if not layers or any(n < 1 for n in layers):
        raise UsageError("--layers needs at least one value, each >= 1")
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    series, info = _resolve_series(args.dataset, args.csv, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    cells = []
    for n in layers:
        for r in range(args.repeats):
            config = _config_from_args(args, seed=args.seed + r, qt_layers=n)
            cells.append((n, r, config, str(out / f"L{n}_r{r}")))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_sweep_cell, c, series, info, d) for _, _, c, d in cells]
            results = [f.result() for f in futures]
    else:
        results = [_sweep_cell(c, series, info, d) for _, _, c, d in cells]

    rows = ["qt_layers,repeat,seed,census_quantum,status,final_train_loss,final_test_loss"]
    for (n, r, c, _), (status, census, tr, te) in zip(cells, results):
        census = 16 + 7 * n if census is None else census
        status = status.replace(",", ";").replace("\n", " ")
        rows.append(f"{n},{r},{c.seed},{census},{status},{tr:.17g},{te:.17g}")
    _atomic_write(out / "sweep.csv", "\n".join(rows) + "\n")
    print(f"wrote {out / 'sweep.csv'} ({len(cells)} cells)")

    if args.svg:
        train = {n: [] for n in layers}
        test = {n: [] for n in layers}
        for (n, *_), (_, _, tr, te) in zip(cells, results):
            train[n].append(tr)
            test[n].append(te)

        def stats(d):
            means = [float(np.mean(v)) for v in d.values()]
            stds = [float(np.std(v, ddof=1)) if len(v) > 1 else 0.0 for v in d.values()]
            return means, stds

        svg = errorbar_svg(layers, {"train": stats(train), "test": stats(test)},
                           title=f"QT layer sweep ({info.get('name', 'csv')})",
                           xlabel="QT layers", ylabel="final MSE")
        _atomic_write(out / "sweep.svg", svg)
    return EXIT_OK


# ---------------------------------------------------------------- eval

def cmd_eval(args) -> int:
    manifest_path = Path(args.manifest)
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    run_dir = manifest_path.parent
    cfg = dict(manifest["config"])
    cfg.pop("dataset", None)
    config = TrainConfig(**cfg)
    state = TrainableState.from_json(
        json.loads((run_dir / manifest["params_path"]).read_text(encoding="utf-8")))

    recorded = (run_dir / manifest["dataset_path"]).resolve()
    csv_path = Path(args.csv).resolve() if args.csv else recorded
    if csv_path == recorded and _sha256(csv_path) != manifest["dataset_sha256"]:
        raise IntegrityError(f"{csv_path} does not match the checksum recorded in {manifest_path}")

    norm = (manifest["norm"]["min"], manifest["norm"]["max"])
    dataset = _windows(load_csv(csv_path), config, norm)
    loss, preds = evaluate(state, dataset, "test", config)
    out = Path(args.out) if args.out else run_dir / "eval_predictions.csv"
    _atomic_write(out, _predictions_csv(dataset, preds))
    print(f"test loss {loss:.17g}")
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_train_flags(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--dataset", choices=("shm", "narma5", "gw"))
    src.add_argument("--csv", help="two-column t,value series")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--qt-layers", type=int, default=1)
    p.add_argument("--window", type=int, default=4)
    p.add_argument("--split", type=float, default=0.67)
    p.add_argument("--batch-size", type=int, default=None, help="default: full batch")
    p.add_argument("--theta-carryover", action="store_true",
                   help="accumulate fast weights across windows instead of resetting")
    p.add_argument("--topology", choices=("chain", "ring"), default="chain")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qtfwp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    data = sub.add_parser("data", help="generate a benchmark series as CSV")
    kinds = data.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    shm = kinds.add_parser("shm")
    shm.add_argument("--omega", type=float, default=2 * math.pi * 0.1)
    shm.add_argument("--zeta", type=float, default=0.1)
    shm.add_argument("--dt", type=float, default=0.1)
    shm.add_argument("--n", type=int, default=500)
    shm.add_argument("--x0", type=float, default=1.0)
    narma = kinds.add_parser("narma5")
    narma.add_argument("--n", type=int, default=1000)
    narma.add_argument("--seed", type=int, default=0)
    gw = kinds.add_parser("gw")
    defaults = GwConfig()
    for flag in ("f0", "t_merge", "amp0", "f_plus", "f_cross", "noise_sigma", "ringdown_tau", "dt"):
        gw.add_argument("--" + flag.replace("_", "-"), type=float, default=getattr(defaults, flag))
    gw.add_argument("--n", type=int, default=defaults.n_points)
    gw.add_argument("--seed", type=int, default=0)
    for p in (shm, narma, gw):
        p.add_argument("--out", help="output CSV (default: <kind>.csv)")

    train = sub.add_parser("train", help="train one model and write a run directory")
    _add_train_flags(train)
    train.add_argument("--out", default="runs/train")

    sweep = sub.add_parser("sweep", help="train over a grid of QT layer counts and repeats")
    _add_train_flags(sweep)
    sweep.add_argument("--layers", default="1,2,3")
    sweep.add_argument("--repeats", type=int, default=3)
    sweep.add_argument("--jobs", type=int, default=int(os.environ.get("QTFWP_JOBS", "1")))
    sweep.add_argument("--svg", action="store_true", help="also write sweep.svg")
    sweep.add_argument("--out", default="runs/sweep")

    ev = sub.add_parser("eval", help="re-evaluate a trained run on a series")
    ev.add_argument("--manifest", required=True)
    ev.add_argument("--csv", help="series to evaluate (default: the run's own dataset)")
    ev.add_argument("--out", help="predictions CSV (default: <run>/eval_predictions.csv)")
    return parser


COMMANDS = {"data": cmd_data, "train": cmd_train, "sweep": cmd_sweep, "eval": cmd_eval}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"qtfwp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"qtfwp: numerical failure at {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NormalizationError as exc:
        print(f"qtfwp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except IntegrityError as exc:
        print(f"qtfwp: integrity check failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except (OSError, CsvParseError, KeyError, json.JSONDecodeError) as exc:
        print(f"qtfwp: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
