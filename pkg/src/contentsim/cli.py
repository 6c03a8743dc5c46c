"""Command-line front end: ``simulate``, ``analyze`` and ``gen-synthetic``.

Exit codes: 0 success, 1 runtime or data failure, 2 usage or spec error.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, ingest, sim, stats
from .errors import ConfigError, ContentSimError, FixtureSpecError, FormatError

SCHEMA_VERSION = 1
SECONDS_PER_DAY = 86_400


class UsageError(Exception):
    pass


# -- argument types -------------------------------------------------------------

def _number(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"{text!r} is not finite")
    return value


def positive_int(text: str) -> int:
    value = _number(text)
    if value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(value)


def non_negative_int(text: str) -> int:
    value = _number(text)
    if value != int(value) or value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return int(value)


def seed_int(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer, got {text!r}")
    return value


def beta_value(text: str) -> float:
    value = _number(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"beta must be >= 1, got {text!r}")
    return value


def beta_list(text: str) -> list[float]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("beta sweep must list at least one value")
    values = [beta_value(t.strip()) for t in items]
    if len(set(values)) != len(values):
        raise argparse.ArgumentTypeError(f"beta sweep has duplicate values: {text!r}")
    return values


def gamma_value(text: str) -> float:
    value = _number(text)
    if value <= 1:
        raise argparse.ArgumentTypeError(f"gamma must be > 1, got {text!r}")
    return value


def positive_float(text: str) -> float:
    value = _number(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


# -- output helpers -------------------------------------------------------------

def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def histogram_csv(hist: stats.Histogram | None) -> str:
    lines = ["bin_center,density"]
    if hist is not None:
        lines += [f"{c!r},{d!r}" for c, d in zip(hist.centers.tolist(), hist.densities.tolist())]
    return "\n".join(lines) + "\n"


def _histogram_or_none(samples):
    try:
        return stats.estimate_pdf(samples)
    except ContentSimError:
        return None


def _summary_or_none(samples):
    try:
        return stats.summarize_distribution(samples).to_dict()
    except ContentSimError:
        return None


def _beta_tag(beta: float) -> str:
    return f"{beta:g}"


# -- simulate -------------------------------------------------------------------

def cmd_simulate(args) -> int:
    betas = args.beta_sweep if args.beta_sweep is not None else [args.beta]
    try:
        base = sim.SimConfig(
            n_posts=args.posts,
            n_users=args.users,
            beta=betas[0],
            gamma=args.gamma,
            iterations=args.iterations,
            seed=args.seed,
            activity_max=args.activity_max,
            pref_max=args.pref_max,
        )
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc

    started = time.perf_counter()
    results = sim.run_sweep(base, betas, workers=args.workers)
    elapsed = time.perf_counter() - started

    out = Path(args.out)
    files: dict[Path, str] = {}
    entries = []
    for beta in betas:
        res = results[beta]
        entry = {
            "beta": beta,
            "total_likes": res.total_likes,
            "invariant_violations": res.invariant_violations,
            "iteration_average": {},
            "summaries": {},
            "histograms": {},
        }
        for obs in ("likes_per_user", "likes_per_post"):
            samples = getattr(res, obs)
            entry["summaries"][obs] = _summary_or_none(samples)
            entry["iteration_average"][obs] = res.averaged_moments(obs.split("_")[-1])
            hist = _histogram_or_none(samples)
            name = f"hist_{obs}_beta{_beta_tag(beta)}.csv"
            files[out / name] = histogram_csv(hist)
            entry["histograms"][obs] = {
                "file": name,
                "bin_edges": [] if hist is None else hist.bin_edges.tolist(),
                "densities": [] if hist is None else hist.densities.tolist(),
            }
        entries.append(entry)

    config_echo = asdict(base)
    config_echo.pop("beta")
    config_echo["betas"] = betas
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": "simulate",
        "version": __version__,
        "seed": args.seed,
        "config": config_echo,
        "results": entries,
    }
    if args.timing:
        manifest["wall_clock_seconds"] = elapsed
    files[out / "manifest.json"] = _dump_json(_jsonable(manifest))
    for path, text in files.items():
        _write_atomic(path, text)

    print(f"{'beta':>10}  {'observable':<15} {'skew':>8} {'ex.kurt':>9} {'hill':>7}  regime")
    for entry in entries:
        for obs, summ in entry["summaries"].items():
            if summ is None:
                print(f"{_beta_tag(entry['beta']):>10}  {obs:<15} {'-':>8} {'-':>9} {'-':>7}  indeterminate")
                continue
            hill = "-" if summ["hill_tail_index"] is None else f"{summ['hill_tail_index']:.2f}"
            print(
                f"{_beta_tag(entry['beta']):>10}  {obs:<15} {summ['skewness']:>8.3f} "
                f"{summ['excess_kurtosis']:>9.3f} {hill:>7}  {summ['regime']}"
            )
    print(f"wrote {len(files)} files to {out} in {elapsed:.2f}s", file=sys.stderr)
    return 0


def _jsonable(obj):
    """Replace NaN with None so the JSON stays strict."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


# -- analyze --------------------------------------------------------------------

def cmd_analyze(args) -> int:
    report = ingest.ParseReport()
    try:
        with open(args.input, "rb") as fh:
            events = list(ingest.parse_events(fh, report))
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return 1
    except (FormatError, UnicodeDecodeError) as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return 1
    for err in report.errors:
        print(f"{args.input}:{err.line}: skipped row: {err.message}", file=sys.stderr)

    summary = ingest.summarize(events)
    samples = ingest.consumption_samples(events)
    out = Path(args.out)
    files: dict[Path, str] = {}
    analyses = {}
    for cat in ingest.CATEGORIES:
        cat_events = [ev for ev in events if ev.category == cat]
        lifetimes_days = stats.lifetime_distribution(cat_events) / SECONDS_PER_DAY
        observables = {
            "likes_per_user": samples.normalized_user_counts(cat),
            "likes_per_post": samples.normalized_post_counts(cat),
            "lifetime_days": lifetimes_days,
        }
        raw = {
            "likes_per_user": samples.user_counts(cat),
            "likes_per_post": samples.post_counts(cat),
            "lifetime_days": lifetimes_days,
        }
        analyses[cat] = {}
        for obs, values in observables.items():
            name = f"hist_{cat}_{obs}.csv"
            files[out / name] = histogram_csv(_histogram_or_none(values))
            # regime statistics on raw counts; normalization is affine so only the Hill index would differ
            analyses[cat][obs] = {"file": name, "n": int(len(values)), "summary": _summary_or_none(raw[obs])}

    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "analyze",
        "version": __version__,
        "input": os.path.basename(args.input),
        "rows_ok": report.rows_ok,
        "rows_skipped": report.rows_skipped,
        "categories": summary.to_dict(),
        "analyses": analyses,
    }
    files[out / "summary.json"] = _dump_json(_jsonable(doc))
    for path, text in files.items():
        _write_atomic(path, text)
    print(json.dumps(summary.to_dict(), sort_keys=True))
    return 0


# -- gen-synthetic --------------------------------------------------------------

def cmd_gen_synthetic(args) -> int:
    spec = ingest.FixtureSpec(
        likes=args.likes,
        posts=args.posts,
        likers=args.likers,
        users=args.users,
        pages=args.pages,
        category=args.category,
        regime=args.regime,
        t0=args.t0,
        t1=args.t1,
        seed=args.seed,
    )
    try:
        spec = spec.resolved()
    except FixtureSpecError as exc:
        raise UsageError(str(exc)) from exc
    events, truth = ingest.generate_fixture(spec)

    out = Path(args.out)
    buf = io.StringIO()
    ingest.write_events(events, buf)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "gen-synthetic",
        "version": __version__,
        "spec": asdict(spec),
        "summary": truth.to_dict(),
    }
    _write_atomic(out / "events.csv", buf.getvalue())
    _write_atomic(out / "truth.json", _dump_json(doc))
    print(f"wrote {len(events)} events to {out / 'events.csv'}", file=sys.stderr)
    return 0


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contentsim",
        description="Content-heterogeneity consumption model and like-log statistics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=seed_int, default=0, help="RNG seed (unsigned 64-bit)")
    common.add_argument("--out", default="out", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run the consumption model over beta values")
    p.add_argument("--posts", type=positive_int, default=10_000)
    p.add_argument("--users", type=positive_int, default=20_000)
    betas = p.add_mutually_exclusive_group()
    betas.add_argument("--beta", type=beta_value, default=1.0)
    betas.add_argument("--beta-sweep", type=beta_list, default=None, metavar="B1,B2,...")
    p.add_argument("--iterations", type=positive_int, default=100)
    p.add_argument("--gamma", type=gamma_value, default=1.5)
    p.add_argument("--activity-max", type=positive_float, default=None,
                   help="upper bound of the activity power law (default: number of posts)")
    p.add_argument("--pref-max", type=positive_float, default=1e4,
                   help="upper bound of the raw preference power law")
    p.add_argument("--workers", type=positive_int, default=1, help="worker processes")
    p.add_argument("--timing", action="store_true",
                   help="record wall-clock time in the manifest (makes it non-reproducible)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", parents=[common], help="summarize a like-event CSV")
    p.add_argument("--input", required=True, help="event CSV: user_id,item_id,page_id,category,timestamp")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("gen-synthetic", parents=[common], help="write a synthetic like log")
    p.add_argument("--users", type=non_negative_int, default=None, help="user id pool (default: likers)")
    p.add_argument("--posts", type=non_negative_int, default=10)
    p.add_argument("--likes", type=non_negative_int, default=200)
    p.add_argument("--likers", type=non_negative_int, default=None,
                   help="distinct likers (default: min(users, likes))")
    p.add_argument("--pages", type=positive_int, default=1)
    p.add_argument("--category", choices=ingest.CATEGORIES, default="baseline")
    p.add_argument("--regime", choices=ingest.REGIMES, default="uniform")
    p.add_argument("--t0", type=non_negative_int, default=ingest.FixtureSpec.t0)
    p.add_argument("--t1", type=non_negative_int, default=ingest.FixtureSpec.t1)
    p.set_defaults(func=cmd_gen_synthetic)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - top-level diagnostic
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
