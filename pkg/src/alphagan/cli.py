"""Command-line entry point: ``alphagan <subcommand> [options]``.

Exit codes: 0 success, 2 verification failure, 3 training divergence,
4 I/O, format or usage error. ``AGAN_OUT`` sets the default output root.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from functools import reduce
from pathlib import Path

import numpy as np

from .errors import AlphaGanError, FormatError, TrainingDivergence
from .gradients import DEFAULT_SCENARIOS, default_alpha_grid, sweep_alpha, write_sweep_csv
from .io import RunManifest, default_output_root, write_csv
from .metrics import HISTOGRAM_HEADER
from .nn import SeededRng, save_checkpoint
from .renyi import arimoto_conditional_entropy
from .saddle import (
    ConvergenceWarning,
    FiniteGanInstance,
    brute_force_max_discriminator,
    closed_form_discriminator,
    minimize_generator,
    optimal_value,
    random_instance,
    total_variation,
)
from .train import METRICS_HEADER, TrainConfig, config_dict, train

log = logging.getLogger("alphagan")

EXIT_OK, EXIT_VERIFY, EXIT_DIVERGED, EXIT_IO = 0, 2, 3, 4

SADDLE_HEADER = ("trial", "alpha", "check", "value", "reference", "error", "tolerance", "passed")
SUMMARY_HEADER = ("alpha", "seed", "epoch", "wasserstein1", "ks_stat", "d_flatness")
WINRATE_HEADER = ("alpha", "baseline", "epoch", "wins", "runs", "win_rate")
MAX_SADDLE_ALPHABET = 8
# brute-force cost control: larger alphabets fall back to this grid size
LARGE_ALPHABET_GRID = 100


class UsageError(AlphaGanError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which is reserved for verification failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from exc


def parse_alpha_grid(text: str) -> list[float]:
    """``start:stop:num`` (inclusive linspace) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"grid must be start:stop:num, got {text!r}")
        try:
            start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}") from exc
        return np.linspace(start, stop, num).tolist()
    return parse_float_list(text)


def read_scenarios(path) -> list[tuple[float, float, float]]:
    """Scenario CSV with header ``pr,pg,d``; one scenario per row."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["pr", "pg", "d"]:
            raise FormatError(f"{path}: expected header pr,pg,d, got {reader.fieldnames}")
        for lineno, row in enumerate(reader, start=2):
            try:
                pr, pg, d = (float(row[k]) for k in reader.fieldnames)
            except (TypeError, ValueError) as exc:
                raise FormatError(f"{path}:{lineno}: malformed scenario {row}") from exc
            if not (pr >= 0 and pg >= 0 and pr + pg > 0 and 0 < d < 1):
                raise FormatError(f"{path}:{lineno}: need pr, pg >= 0 with pr + pg > 0 and 0 < d < 1")
            rows.append((pr, pg, d))
    return rows


def _out_dir(args, name) -> Path:
    return Path(args.out) if args.out else default_output_root() / name


# verify-saddle


def _saddle_rows(trial, alpha, inst, grid, value_tol, rng):
    """All checks for one (instance, alpha) pair as report rows."""
    rows = []
    tol_arg = 2.0 / grid
    decision, achieved = brute_force_max_discriminator(alpha, inst, grid)
    closed = closed_form_discriminator(alpha, inst).values
    dev = float(np.max(np.abs(decision.values - closed)))
    rows.append((trial, alpha, "argmax", dev, 0.0, dev, tol_arg, dev <= tol_arg))
    reference = -arimoto_conditional_entropy(alpha, inst.weights)
    gap = abs(achieved - reference)
    ok = gap <= value_tol and achieved <= optimal_value(alpha, inst) + 1e-6
    rows.append((trial, alpha, "value", achieved, reference, gap, value_tol, ok))

    equal = FiniteGanInstance(inst.pr, inst.pr)
    v_eq = optimal_value(alpha, equal)
    err = abs(v_eq + math.log(2))
    rows.append((trial, alpha, "saddle_value", v_eq, -math.log(2), err, 1e-12, err <= 1e-12))

    if np.all(inst.pr > 0):
        start = rng.dirichlet(np.ones(inst.alphabet_size))
        start = np.maximum(start, 1e-12)
        start /= start.sum()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            pg, value = minimize_generator(alpha, inst.pr, start=start)
        v_gap = abs(value + math.log(2))
        tv = total_variation(pg.probs, inst.pr)
        # convergence below alpha = 1 is reported, not asserted
        asserted = alpha >= 1
        rows.append((trial, alpha, "generator_value", value, -math.log(2), v_gap, 1e-4, v_gap <= 1e-4 or not asserted))
        rows.append((trial, alpha, "generator_tv", tv, 0.0, tv, 1e-3, tv < 1e-3 or not asserted))
    return rows


def cmd_verify_saddle(args) -> int:
    if not 1 <= args.alphabet <= MAX_SADDLE_ALPHABET:
        raise UsageError(f"--alphabet must be between 1 and {MAX_SADDLE_ALPHABET}")
    manifest, out = args.manifest, args.out_dir
    grid = args.grid if args.alphabet <= 6 else min(args.grid, LARGE_ALPHABET_GRID)
    value_tol = args.value_tol if args.value_tol is not None else (1e-6 if grid >= 10_000 else 1e-3)
    manifest.config.update(grid=grid, value_tol=value_tol)
    manifest.write()

    rng = SeededRng(args.seed)
    rows, failures = [], []
    for trial in range(args.trials):
        inst = random_instance(rng, args.alphabet)
        if args.equal:
            inst = FiniteGanInstance(inst.pr, inst.pr)
        for alpha in args.alphas:
            new = _saddle_rows(trial, alpha, inst, grid, value_tol, rng)
            rows.extend(new)
            failures.extend(
                {"trial": trial, "alpha": alpha, "check": r[2], "error": r[5], "pr": inst.pr.tolist(), "pg": inst.pg.tolist()}
                for r in new
                if not r[7]
            )
    write_csv(out / "saddle_report.csv", SADDLE_HEADER, [r[:7] + (str(bool(r[7])).lower(),) for r in rows])
    if failures:
        (out / "failing_instances.json").write_text(json.dumps(failures, indent=2) + "\n")
        for f in failures[:5]:
            log.error("tolerance failure: %s", f)
        manifest.status = "verification_failed"
        manifest.write()
        return EXIT_VERIFY
    manifest.status = "ok"
    manifest.write()
    return EXIT_OK


# sweep-gradients


def cmd_sweep_gradients(args) -> int:
    manifest, out = args.manifest, args.out_dir
    alphas = args.alpha_grid if args.alpha_grid is not None else default_alpha_grid().tolist()
    manifest.config["alpha_grid"] = alphas
    manifest.write()
    scenarios = list(DEFAULT_SCENARIOS)
    if args.scenarios:
        scenarios += read_scenarios(args.scenarios)
    rows = sweep_alpha(scenarios, alphas)
    write_sweep_csv(rows, out / "gradients.csv")
    manifest.status = "ok"
    manifest.write()
    return EXIT_OK


# train


def _coerce(name: str, raw: str):
    """Convert a config-file string to the type of the TrainConfig field."""
    default = TrainConfig.__dataclass_fields__[name].default
    if name in ("mnist_path",) or isinstance(default, str):
        return raw
    if name == "hidden":
        return None if raw.strip().lower() in ("", "none") else int(raw)
    if isinstance(default, bool):
        return raw.strip().lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    return float(raw)


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; an optional single section header is ignored."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser()
    try:
        if not text.lstrip().startswith("["):
            text = "[train]\n" + text
        parser.read_string(text)
    except configparser.Error as exc:
        raise FormatError(f"{path}: {exc}") from exc
    known = set(TrainConfig.field_names())
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            key = key.replace("-", "_")
            if key not in known:
                raise FormatError(f"{path}: unknown key {key!r}")
            try:
                values[key] = _coerce(key, raw)
            except ValueError as exc:
                raise FormatError(f"{path}: bad value for {key}: {raw!r}") from exc
    return values


def resolve_train_config(args) -> TrainConfig:
    values = read_config_file(args.config) if args.config else {}
    if (values.get("data") or args.data) == "mnist":
        base = asdict(TrainConfig.mnist(values.get("mnist_path") or args.mnist_path or "unset"))
    else:
        base = asdict(TrainConfig())
    base.update(values)
    for name in TrainConfig.field_names():
        flag = getattr(args, name, None)
        if flag is not None:
            base[name] = flag
    try:
        return TrainConfig(**base)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def write_train_outputs(result, out: Path) -> None:
    write_csv(out / "metrics.csv", METRICS_HEADER, (m.row() for m in result.metrics))
    for epoch, rows in sorted(result.histograms.items()):
        write_csv(out / "histograms" / f"epoch_{epoch:06d}.csv", HISTOGRAM_HEADER, rows)


def _run_one(config: TrainConfig, out: Path):
    """Train and write outputs; returns (result, diverged_error or None)."""
    try:
        result = train(config)
    except TrainingDivergence as exc:
        write_train_outputs(exc.partial, out)
        return exc.partial, exc
    write_train_outputs(result, out)
    save_checkpoint(
        out / "checkpoint.agan",
        {"discriminator": result.discriminator, "generator": result.generator},
        result.optimizers,
        extra={"config": config_dict(config), "epoch": config.epochs},
    )
    return result, None


def cmd_train(args) -> int:
    manifest, out = args.manifest, args.out_dir
    config = resolve_train_config(args)
    manifest.config = config_dict(config)
    manifest.seed = config.seed
    manifest.write()
    _, diverged = _run_one(config, out)
    if diverged is not None:
        log.error("%s", diverged)
        manifest.status = f"diverged at epoch {diverged.epoch}"
        manifest.write()
        return EXIT_DIVERGED
    manifest.status = "ok"
    manifest.write()
    return EXIT_OK


# compare-alphas


def _run_dir(out: Path, alpha: float, seed: int) -> Path:
    return out / f"alpha_{alpha:g}_seed_{seed}"


def win_rates(summary, baseline: float = 1.0) -> list[tuple]:
    """Fraction of seeds where each alpha has lower Wasserstein-1 than ``baseline``, per epoch."""
    table = {(r[0], r[1], r[2]): r[3] for r in summary}
    alphas = sorted({k[0] for k in table})
    epochs = sorted({k[2] for k in table})
    rows = []
    for alpha in alphas:
        if alpha == baseline:
            continue
        for epoch in epochs:
            seeds = [k[1] for k in table if k[0] == alpha and k[2] == epoch and (baseline, k[1], epoch) in table]
            wins = sum(table[(alpha, s, epoch)] < table[(baseline, s, epoch)] for s in seeds)
            if seeds:
                rows.append((alpha, baseline, epoch, wins, len(seeds), wins / len(seeds)))
    return rows


def compare_alphas(alphas, seeds, epochs, out: Path, at_epochs=None, workers=4, base=None):
    """Train every (alpha, seed) pair and tabulate Wasserstein-1 at ``at_epochs``.

    Returns ``(summary_rows, win_rate_rows, divergences)``. Each run writes
    into its own subdirectory; results are assembled in (alpha, seed) order.
    """
    at_epochs = sorted(set(at_epochs or [epochs]))
    if any(not 1 <= e <= epochs for e in at_epochs):
        raise UsageError("--at-epochs must lie in [1, epochs]")
    interval = reduce(math.gcd, at_epochs)
    base = dict(base or {})
    base.update(epochs=epochs, record_interval=interval, histogram_interval=epochs)
    jobs = [(a, s) for a in alphas for s in seeds]

    def work(job):
        alpha, seed = job
        cfg = TrainConfig(**{**base, "alpha": alpha, "seed": seed})
        return _run_one(cfg, _run_dir(out, alpha, seed))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(work, jobs))

    summary, divergences = [], []
    for (alpha, seed), (result, diverged) in zip(jobs, results):
        if diverged is not None:
            divergences.append(diverged)
        by_epoch = {m.epoch: m for m in result.metrics}
        for e in at_epochs:
            if e in by_epoch:
                m = by_epoch[e]
                summary.append((alpha, seed, e, m.wasserstein1, m.ks_stat, m.d_flatness))
    return summary, win_rates(summary), divergences


def cmd_compare_alphas(args) -> int:
    manifest, out = args.manifest, args.out_dir
    summary, rates, divergences = compare_alphas(
        args.alphas, args.seeds, args.epochs, out, args.at_epochs, args.workers, base={"optimizer": args.optimizer}
    )
    write_csv(out / "summary.csv", SUMMARY_HEADER, summary)
    write_csv(out / "win_rates.csv", WINRATE_HEADER, rates)
    for r in rates:
        log.info("alpha=%g beats alpha=%g at epoch %d in %d/%d seeds", r[0], r[1], r[2], r[3], r[4])
    if divergences:
        for d in divergences:
            log.error("%s", d)
        manifest.status = "diverged"
        manifest.write()
        return EXIT_DIVERGED
    manifest.status = "ok"
    manifest.write()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="alphagan", description="alpha-GAN experiments: saddle checks, gradient sweeps, training.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify-saddle", help="closed-form vs brute-force discriminator and generator descent")
    p.add_argument("--alphabet", type=int, default=4, help=f"alphabet size (at most {MAX_SADDLE_ALPHABET})")
    p.add_argument("--alphas", type=parse_float_list, default=[0.1, 0.5, 1.0, 2.0, 5.0])
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--grid", type=int, default=10_001)
    p.add_argument("--value-tol", type=float, default=None)
    p.add_argument("--equal", action="store_true", help="use P_g = P_r instances")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_saddle)

    p = sub.add_parser("sweep-gradients", help="emit discriminator/generator gradients over an alpha grid")
    p.add_argument("--scenarios", help="extra scenarios: CSV with header pr,pg,d")
    p.add_argument("--alpha-grid", type=parse_alpha_grid, default=None, help="start:stop:num or a comma list")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep_gradients)

    p = sub.add_parser("train", help="train one alpha-GAN")
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--out")
    defaults = TrainConfig()
    for name in TrainConfig.field_names():
        default = getattr(defaults, name)
        kind = str if isinstance(default, str) or name == "mnist_path" else type(default)
        if name == "hidden":
            kind = int
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=kind, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compare-alphas", help="multi-seed Wasserstein-1 comparison against alpha = 1")
    p.add_argument("--alphas", type=parse_float_list, default=[0.1, 1.0])
    p.add_argument("--seeds", type=parse_int_list, default=list(range(10)))
    p.add_argument("--epochs", type=int, default=4000)
    p.add_argument("--at-epochs", type=parse_int_list, default=None, help="epochs to tabulate (default: last)")
    p.add_argument("--optimizer", default="sgd", choices=["sgd", "adam"])
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare_alphas)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    settings = {k: v for k, v in vars(args).items() if k not in ("func", "verbose", "command")}
    args.out_dir = _out_dir(args, args.command)
    # written before any computation so that every run, even a failed one, leaves a manifest
    args.manifest = RunManifest(args.command, settings, settings.get("seed"), str(args.out_dir))
    try:
        args.manifest.write()
    except OSError as exc:
        log.error("cannot write to %s: %s", args.out_dir, exc)
        return EXIT_IO
    try:
        return args.func(args)
    except TrainingDivergence as exc:
        log.error("%s", exc)
        code, status = EXIT_DIVERGED, "diverged"
    except (FormatError, OSError, UsageError, ValueError) as exc:
        log.error("%s", exc)
        code, status = EXIT_IO, f"error: {exc}"
    args.manifest.status = status
    args.manifest.write()
    return code


if __name__ == "__main__":
    sys.exit(main())
