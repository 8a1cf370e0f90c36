"""CSV tables and JSON summaries for studies."""

import csv
import json
from pathlib import Path
from typing import Iterable, List, Sequence

from .analysis import ConsistencyRow, LocalityRow, MonteCarloStudy, RateStudy

RATE_COLUMNS = ["n", "N", "block", "test_fn", "error", "at_floor"]
DUAL_NORM_NOTE = (
    "Rates are measured through fixed smooth test functions; they lower-bound "
    "the behaviour of the dual norm, which is not computed."
)


def _write_csv(path, columns: Sequence[str], rows: Iterable[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row[k]) for k in columns})
    return path


def _cell(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return value


def write_rate_table(study: RateStudy, path) -> Path:
    return _write_csv(path, RATE_COLUMNS, study.rows())


def write_consistency_table(rows: List[ConsistencyRow], path) -> Path:
    columns = ["radius", "deviation", "function_deviation"]
    return _write_csv(
        path,
        columns,
        (
            {
                "radius": r.radius,
                "deviation": r.deviation,
                "function_deviation": "" if r.function_deviation is None else r.function_deviation,
            }
            for r in rows
        ),
    )


def write_mc_table(study: MonteCarloStudy, path) -> Path:
    blocks = sorted(study.block_errors)
    columns = ["N", "rms_error", *[f"rms_{b}" for b in blocks]]
    rows = []
    for i, count in enumerate(study.sample_counts):
        row = {"N": count, "rms_error": study.rms_errors[i]}
        row.update({f"rms_{b}": study.block_errors[b][i] for b in blocks})
        rows.append(row)
    return _write_csv(path, columns, rows)


def write_locality_table(rows: List[LocalityRow], path) -> Path:
    return _write_csv(
        path,
        ["n", "block", "pairing"],
        ({"n": r.n, "block": r.block, "pairing": r.pairing} for r in rows),
    )


def rate_summary(study: RateStudy) -> dict:
    """Fitted slopes per (test function, block) with study metadata."""
    return {
        "family": study.family,
        "s": study.s,
        "ns": study.ns,
        "floor": study.floor,
        "slopes": {f"{name}/{block}": slope for (name, block), slope in study.slopes.items()},
        "note": DUAL_NORM_NOTE,
    }


def write_summary(summary: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return path
