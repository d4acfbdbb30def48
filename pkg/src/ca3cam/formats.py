"""Raster serialization: CSV ``step,population,neuron`` and JSON triples."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Sequence

from .snn import Raster, SpikeEvent

HEADER = ("step", "population", "neuron")


def raster_to_csv(raster: Raster) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    w.writerows(raster.events)
    return buf.getvalue()


def raster_to_json(raster: Raster) -> str:
    return json.dumps([list(e) for e in raster.events], indent=None) + "\n"


def raster_from_csv(text: str, populations: Sequence[str]) -> Raster:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != HEADER:
        raise ValueError(f"raster CSV must start with header {','.join(HEADER)}")
    events = [SpikeEvent(int(s), p, int(n)) for s, p, n in rows[1:] if s]
    return Raster.from_events(populations, events)


def raster_from_json(text: str, populations: Sequence[str]) -> Raster:
    return Raster.from_events(populations, [SpikeEvent(int(s), p, int(n)) for s, p, n in json.loads(text)])


def write_raster(raster: Raster, path: Path, fmt: str = "csv") -> Path:
    path = Path(path)
    if fmt == "csv":
        path.write_text(raster_to_csv(raster))
    elif fmt == "json":
        path.write_text(raster_to_json(raster))
    else:
        raise ValueError(f"unknown raster format {fmt!r}")
    return path
