"""CSV/JSON serialization of sweep records and their reproduction metadata."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, fields
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .montecarlo import ExperimentSpec, SweepRecord

__all__ = ["CSV_COLUMNS", "format_float", "records_to_csv", "records_from_csv",
           "records_to_json", "records_from_json", "sweep_metadata", "write_figure"]

CSV_COLUMNS = ("strategy", "sweep_value", "mean_ee", "stderr_ee", "feasible_fraction",
               "trials", "seed")

SEEDING = ("trial i uses numpy PCG64 seeded by SeedSequence(entropy=seed, spawn_key=(i,)); "
           "fading draws are shared by all sweep values of that trial")


def format_float(x: float) -> str:
    return f"{x:.17g}"


def _cell(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def records_to_csv(records: Iterable[SweepRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow([_cell(getattr(rec, name)) for name in CSV_COLUMNS])
    return buf.getvalue()


def _parse_value(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def records_from_csv(text: str) -> list[SweepRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [SweepRecord(row["strategy"], _parse_value(row["sweep_value"]),
                        float(row["mean_ee"]), float(row["stderr_ee"]),
                        float(row["feasible_fraction"]), int(row["trials"]), int(row["seed"]))
            for row in reader]


def records_to_json(records: Iterable[SweepRecord], metadata: dict | None = None) -> str:
    payload = {"metadata": metadata or {}, "records": [asdict(r) for r in records]}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def records_from_json(text: str) -> list[SweepRecord]:
    names = [f.name for f in fields(SweepRecord)]
    return [SweepRecord(**{n: row[n] for n in names}) for row in json.loads(text)["records"]]


def sweep_metadata(command: str, specs: Sequence[ExperimentSpec]) -> dict:
    return {
        "tool": "noma-ee",
        "version": __version__,
        "command": command,
        "columns": list(CSV_COLUMNS),
        "seeding": SEEDING,
        "experiments": [s.metadata() for s in specs],
    }


def write_figure(records: Sequence[SweepRecord], metadata: dict, path: Path,
                 fmt: str = "csv") -> list[Path]:
    """Write records to ``path``; CSV output also gets a ``.meta.json`` sidecar."""
    path = Path(path)
    if fmt == "json":
        path.write_text(records_to_json(records, metadata), encoding="utf-8")
        return [path]
    sidecar = path.with_name(path.stem + ".meta.json")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(records))
    sidecar.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return [path, sidecar]
