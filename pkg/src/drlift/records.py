"""Experiment records and their CSV / JSONL serialization.

Column order is fixed so the emitted CSV is plot-ready; both formats
round-trip losslessly through the readers below (floats via repr).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, fields

FIELDS = (
    "instance",
    "mode",
    "solver",
    "value",
    "opt",
    "ratio",
    "oracle_calls",
    "wall_ms",
    "seed",
)


@dataclass(frozen=True)
class ExperimentRecord:
    instance: str
    mode: str
    solver: str
    value: float
    opt: float | None
    ratio: float | None
    oracle_calls: int
    wall_ms: float
    seed: int | None

    def __post_init__(self) -> None:
        if self.opt is not None and self.ratio is None and self.opt != 0:
            object.__setattr__(self, "ratio", self.value / self.opt)

    def as_row(self) -> list[str]:
        out = []
        for name in FIELDS:
            v = getattr(self, name)
            if v is None:
                out.append("")
            elif isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        return out

    def as_json(self) -> str:
        return json.dumps(
            {name: getattr(self, name) for name in FIELDS}, sort_keys=False
        )


def _parse(name: str, text: str | None):
    if text is None or text == "":
        return None
    if name in ("instance", "mode", "solver"):
        return text
    if name in ("oracle_calls", "seed"):
        return int(text)
    return float(text)


def write_records(records: list[ExperimentRecord], stream, fmt: str = "csv") -> None:
    if fmt == "csv":
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(FIELDS)
        for rec in records:
            writer.writerow(rec.as_row())
    elif fmt == "jsonl":
        for rec in records:
            stream.write(rec.as_json() + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def render_records(records: list[ExperimentRecord], fmt: str = "csv") -> str:
    buf = io.StringIO()
    write_records(records, buf, fmt)
    return buf.getvalue()


def read_records(stream, fmt: str = "csv") -> list[ExperimentRecord]:
    if fmt == "csv":
        reader = csv.reader(stream)
        header = next(reader)
        if tuple(header) != FIELDS:
            raise ValueError(f"unexpected header {header}")
        rows = [dict(zip(FIELDS, row)) for row in reader]
    elif fmt == "jsonl":
        rows = [json.loads(line) for line in stream if line.strip()]
    else:
        raise ValueError(f"unknown format {fmt!r}")
    out = []
    for row in rows:
        kwargs = {}
        for f in fields(ExperimentRecord):
            v = row.get(f.name)
            kwargs[f.name] = _parse(f.name, v) if isinstance(v, str) or v is None else v
        out.append(ExperimentRecord(**kwargs))
    return out
