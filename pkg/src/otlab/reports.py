"""Report serialization: canonical JSON, schema validation, CSV curves.

Every command is a pure function of (config, seed), so reports are
emitted through one canonical serializer; replaying a report re-runs
its command and byte-compares the result.
"""

from __future__ import annotations

import csv
import io
import json
from importlib import resources
from typing import Optional, Sequence

import jsonschema

from . import __version__

CSV_HEADER = ("x", "y", "ci_low", "ci_high")


def load_schema() -> dict:
    text = resources.files("otlab").joinpath(
        "schema/report.schema.json").read_text()
    return json.loads(text)


def validate_report(report: dict) -> None:
    jsonschema.validate(report, load_schema())


def build_report(command: str, config: dict, seed: int, derived: dict,
                 aggregates: dict,
                 trials: Optional[list] = None) -> dict:
    report = {
        "version": __version__,
        "command": command,
        "seed": seed,
        "config": config,
        "derived": derived,
        "aggregates": aggregates,
    }
    if trials is not None:
        report["trials"] = trials
    validate_report(report)
    return report


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(path: str, report: dict) -> None:
    with open(path, "w") as fh:
        fh.write(canonical_json(report))


def render_csv(rows: Sequence[Sequence[float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        if len(row) != len(CSV_HEADER):
            raise ValueError(f"curve rows need {len(CSV_HEADER)} columns")
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def write_csv(path: str, rows: Sequence[Sequence[float]]) -> None:
    with open(path, "w") as fh:
        fh.write(render_csv(rows))
