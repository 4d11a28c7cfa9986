"""``femtosim`` command line.

    femtosim <simulate|sweep|theory|validate> [--config PATH] [--preset NAME]
             [--set key=value]... [--out PATH] [--format csv|json] [--seed U64]

Exit codes: 0 success, 1 usage error, 2 validation-tolerance failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from typing import List, Optional, Sequence

from . import checks
from .analysis import theory_point
from .estimator import DEFAULT_BETAS, HopSimulator, sweep_beta
from .io import render, summary_row, theory_row, write_atomic
from .simulator import SimConfig

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 1, 2, 3

PRESETS = {
    "fig3": dict(
        n=2500,
        s=2.5,
        alpha=1.5,
        c3=8.0,
        c4=1.0,
        beta=0.8,
        epsilon=None,
        c1=1.0,
        delta=1.0,
        bandwidth=1.0,
        trials=2000,
        popular_size="asymptotic",
    ),
    "smoke": dict(n=100, trials=100, popular_size="asymptotic"),
}
PRESET_BETAS = {"fig3": DEFAULT_BETAS, "smoke": (0.3, 0.5, 0.8)}


class UsageError(Exception):
    pass


def preset(name: str) -> SimConfig:
    if name not in PRESETS:
        raise UsageError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return SimConfig(**PRESETS[name])


def _parse_value(text: str):
    low = text.strip().lower()
    if low in ("none", "null"):
        return None
    try:
        return json.loads(text)
    except ValueError:
        return text


def build_config(
    preset_name: Optional[str] = None,
    config_path: Optional[str] = None,
    overrides: Sequence[str] = (),
    seed: Optional[int] = None,
) -> SimConfig:
    """Merge preset, config file, ``--set`` overrides and ``--seed``, in that order."""
    if preset_name and preset_name not in PRESETS:
        raise UsageError(f"unknown preset {preset_name!r}; choose from {sorted(PRESETS)}")
    values = dict(PRESETS[preset_name]) if preset_name else {}
    known = set(SimConfig.field_names())
    if config_path:
        with open(config_path) as fh:  # OSError propagates as an I/O failure
            try:
                data = json.load(fh)
            except ValueError as exc:
                raise UsageError(f"{config_path}: not valid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise UsageError(f"{config_path}: expected a flat JSON object")
        values.update(data)
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects key=value, got {item!r}")
        values[key.strip()] = _parse_value(raw)
    if seed is not None:
        values["master_seed"] = seed
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    try:
        return SimConfig(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


def _betas(text: Optional[str], preset_name: Optional[str]) -> List[float]:
    if text:
        try:
            return [float(b) for b in text.split(",") if b.strip()]
        except ValueError:
            raise UsageError(f"--betas expects comma-separated numbers, got {text!r}") from None
    return list(PRESET_BETAS.get(preset_name, DEFAULT_BETAS))


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        write_atomic(text, out)
    else:
        sys.stdout.write(text)


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON object of SimConfig fields")
    common.add_argument("--preset", help="named parameter set: " + ", ".join(sorted(PRESETS)))
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for trials")

    parser = argparse.ArgumentParser(prog="femtosim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="run one experiment")
    sweep = sub.add_parser("sweep", parents=[common], help="run a cache-exponent sweep")
    sweep.add_argument("--betas", help="comma-separated cache exponents")
    theory = sub.add_parser("theory", parents=[common], help="emit closed-form tables")
    theory.add_argument("--h", type=int, help="popular-set size (default: from config)")
    theory.add_argument("--M", type=int, help="cache size (default: from each beta)")
    theory.add_argument("--betas", help="comma-separated cache exponents")
    validate = sub.add_parser("validate", parents=[common], help="run the oracle cross-checks")
    validate.add_argument("--scale", type=float, default=1.0, help="multiplier on Monte-Carlo trials")
    return parser


def _run(args) -> int:
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    config = build_config(args.preset, args.config, args.overrides, args.seed)

    if args.command == "simulate":
        est = HopSimulator.from_config(config, n_jobs=args.jobs).fit()
        summary = est.simulate()
        _emit(render([summary_row(summary, est.theory())], args.format), args.out)
        return EXIT_OK

    if args.command == "sweep":
        rows = sweep_beta(config, _betas(args.betas, args.preset), n_jobs=args.jobs)
        _emit(render([summary_row(r.summary, r.theory) for r in rows], args.format), args.out)
        return EXIT_OK

    if args.command == "theory":
        h = args.h if args.h is not None else HopSimulator.from_config(config).fit().h_
        if h < 1 or (args.M is not None and args.M < 1):
            raise UsageError("--h and --M must be >= 1")
        if args.M is not None:
            tp = theory_point(h, args.M, config.n, config.eps, config.bandwidth, config.c1, config.delta)
            rows = [theory_row(tp, config)]
        else:
            rows = []
            for beta in _betas(args.betas, args.preset):
                cfg = dataclasses.replace(config, beta=beta)
                tp = theory_point(h, cfg.M, cfg.n, cfg.eps, cfg.bandwidth, cfg.c1, cfg.delta)
                rows.append(theory_row(tp, cfg, beta))
        _emit(render(rows, args.format), args.out)
        return EXIT_OK

    results = checks.run_checks(seed=config.master_seed, scale=args.scale)
    lines = "".join(c.line() + "\n" for c in results)
    _emit(lines, args.out)
    return EXIT_OK if all(c.passed for c in results) else EXIT_VALIDATION


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return _run(args)
    except UsageError as exc:
        print(f"femtosim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"femtosim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
