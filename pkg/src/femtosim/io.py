"""CSV/JSON emission with one header shared by every subcommand."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from typing import Iterable, List, Optional

from .analysis import TheoryPoint
from .simulator import SimConfig, SimSummary

COLUMNS = (
    "config_hash",
    "policy",
    "beta",
    "h",
    "M",
    "mean_hops",
    "ci95",
    "lambda",
    "served_by_self",
    "served_by_relay",
    "served_by_helper",
    "trials",
    "seed",
    "ex_uncoded",
    "ex_coded",
    "lambda_uncoded",
    "lambda_coded",
    "n",
    "alpha",
    "s",
    "c1",
    "c3",
    "c4",
    "delta",
    "bandwidth",
    "epsilon",
    "relay_mode",
    "chain_mode",
    "chain_resolve",
    "popular_size",
)


def _config_fields(config: SimConfig) -> dict:
    return {
        "config_hash": config.config_hash(),
        "beta": config.beta,
        "seed": config.master_seed,
        "n": config.n,
        "alpha": config.alpha,
        "s": config.s,
        "c1": config.c1,
        "c3": config.c3,
        "c4": config.c4,
        "delta": config.delta,
        "bandwidth": config.bandwidth,
        "epsilon": config.eps,
        "relay_mode": config.relay_mode,
        "chain_mode": config.chain_mode,
        "chain_resolve": config.chain_resolve,
        "popular_size": config.popular_size,
    }


def _theory_fields(tp: TheoryPoint) -> dict:
    return {
        "h": tp.h,
        "M": tp.M,
        "ex_uncoded": tp.ex_uncoded,
        "ex_coded": tp.ex_coded,
        "lambda_uncoded": tp.lambda_uncoded,
        "lambda_coded": tp.lambda_coded,
    }


def summary_row(summary: SimSummary, theory: Optional[TheoryPoint] = None) -> dict:
    row = dict.fromkeys(COLUMNS)
    row.update(_config_fields(summary.config))
    if theory is not None:
        row.update(_theory_fields(theory))
    row.update(
        policy=summary.config.policy,
        h=summary.h,
        M=summary.M,
        mean_hops=summary.mean_hops,
        ci95=summary.ci95,
        served_by_self=summary.served_by_self,
        served_by_relay=summary.served_by_relay,
        served_by_helper=summary.served_by_helper,
        trials=summary.trials,
    )
    row["lambda"] = summary.lambda_estimate
    return row


def theory_row(tp: TheoryPoint, config: Optional[SimConfig] = None, beta=None) -> dict:
    row = dict.fromkeys(COLUMNS)
    if config is not None:
        row.update(_config_fields(config))
        row["policy"] = None
    row.update(_theory_fields(tp))
    row.update(n=tp.n, epsilon=tp.epsilon, bandwidth=tp.W, c1=tp.c1, beta=beta)
    return row


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return repr(value)
        return format(value, ".17g")
    return str(value)


def to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in COLUMNS])
    return buf.getvalue()


def to_json(rows: Iterable[dict]) -> str:
    return json.dumps([{c: row.get(c) for c in COLUMNS} for row in rows], indent=2) + "\n"


def render(rows: List[dict], fmt: str = "csv") -> str:
    if fmt == "csv":
        return to_csv(rows)
    if fmt == "json":
        return to_json(rows)
    raise ValueError(f"unknown format {fmt!r}")


def write_atomic(text: str, path: str) -> None:
    """Write ``text`` to ``path`` via a temporary file so failures leave nothing behind."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".femtosim-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
