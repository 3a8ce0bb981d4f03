"""Maneuver timelines at 1 Hz and the per-tick configuration simulation."""

from __future__ import annotations

import csv
import io
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .application import ModuleActivation, apply_mlam
from .attention import MLAM, Directional, Lateral, Situation, build_mlam
from .configuration import EMPTY, Candidate, Fixture, build_forest, optimize
from .errors import InfeasibleError, SituationError, TimelineError

TICK_PERIOD_S = 1.0


@dataclass(frozen=True)
class Segment:
    situation: Situation
    duration_s: int


@dataclass(frozen=True)
class ManeuverTimeline:
    ticks: tuple[Situation, ...]
    name: str = "route"

    @property
    def tick_period_s(self) -> float:
        return TICK_PERIOD_S

    def __len__(self):
        return len(self.ticks)

    @property
    def duration_s(self) -> float:
        return len(self.ticks) * TICK_PERIOD_S

    @classmethod
    def from_segments(cls, segments: Iterable[Segment], name="route") -> "ManeuverTimeline":
        ticks = []
        for seg in segments:
            ticks.extend([seg.situation] * seg.duration_s)
        return cls(tuple(ticks), name)

    def segments(self) -> list[Segment]:
        """Run-length encode consecutive identical ticks."""
        out: list[Segment] = []
        for s in self.ticks:
            if out and out[-1].situation == s:
                out[-1] = Segment(s, out[-1].duration_s + 1)
            else:
                out.append(Segment(s, 1))
        return out


# ---------------------------------------------------------------------------
# file formats

def _parse_duration(value, line):
    if isinstance(value, bool):
        raise TimelineError(f"bad duration {value!r}", line)
    try:
        d = float(value)
    except (TypeError, ValueError):
        raise TimelineError(f"bad duration {value!r}", line) from None
    if d <= 0:
        raise TimelineError(f"duration must be positive, got {value!r}", line)
    if d != int(d):
        raise TimelineError(f"duration must be a whole number of 1 s ticks, got {value!r}", line)
    return int(d)


def _parse_situation(record, line):
    try:
        return Situation(record["directional"], record.get("lateral") or "none")
    except KeyError:
        raise TimelineError("record needs a 'directional' field", line) from None
    except SituationError as exc:
        raise TimelineError(str(exc), line) from None


def _element_lines(text: str, key: str | None) -> list[int]:
    """1-based start line of each element of the JSON array under ``key``."""
    if key is None:
        m = re.match(r"\s*\[", text)
    else:
        m = re.search(r'"%s"\s*:\s*\[' % re.escape(key), text)
    if not m:
        return []
    decoder = json.JSONDecoder()
    pos = m.end()
    lines = []
    while True:
        while pos < len(text) and text[pos] in " \t\r\n,":
            pos += 1
        if pos >= len(text) or text[pos] == "]":
            break
        lines.append(text.count("\n", 0, pos) + 1)
        try:
            _, pos = decoder.raw_decode(text, pos)
        except json.JSONDecodeError:
            break
    return lines


def _records_from_json(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TimelineError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    name = "route"
    if isinstance(data, list):
        key, records = None, data
    elif isinstance(data, dict):
        name = str(data.get("name", name))
        if "segments" in data:
            key = "segments"
        elif "ticks" in data:
            key = "ticks"
        else:
            raise TimelineError("expected a 'segments' or 'ticks' list", 1)
        records = data[key]
    else:
        raise TimelineError("expected a JSON object or list", 1)
    if not isinstance(records, list):
        raise TimelineError(f"'{key}' must be a list", 1)
    lines = _element_lines(text, key)
    lines += [None] * (len(records) - len(lines))
    segment_form = key == "segments" or (key is None and any(isinstance(r, dict) and "duration_s" in r for r in records))
    return name, segment_form, list(zip(records, lines))


def _records_from_csv(text):
    reader = csv.DictReader(io.StringIO(text))
    if not reader.fieldnames or "directional" not in reader.fieldnames:
        raise TimelineError("CSV header must contain 'directional'", 1)
    segment_form = "duration_s" in reader.fieldnames
    out = [(row, reader.line_num) for row in reader]
    return "route", segment_form, out


def parse_timeline(text: str, fmt: str = "json", name: str | None = None) -> ManeuverTimeline:
    if fmt == "csv":
        route_name, segment_form, records = _records_from_csv(text)
    else:
        route_name, segment_form, records = _records_from_json(text)
    ticks: list[Situation] = []
    for rec, line in records:
        if not isinstance(rec, dict):
            raise TimelineError(f"record is not an object: {rec!r}", line)
        situation = _parse_situation(rec, line)
        n = _parse_duration(rec.get("duration_s"), line) if segment_form else 1
        ticks.extend([situation] * n)
    if not ticks:
        raise TimelineError("empty timeline")
    return ManeuverTimeline(tuple(ticks), name or route_name)


def load_timeline(path: str | Path) -> ManeuverTimeline:
    """Read a segment-form or tick-form timeline from a JSON or CSV file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise TimelineError(f"cannot read {path}: {exc.strerror}") from None
    fmt = "csv" if path.suffix.lower() == ".csv" else "json"
    return parse_timeline(text, fmt)


def dump_segments(timeline: ManeuverTimeline) -> str:
    """Canonical segment-form JSON, one segment per line."""
    rows = [
        json.dumps({**seg.situation.to_dict(), "duration_s": seg.duration_s})
        for seg in timeline.segments()
    ]
    head = json.dumps({"name": timeline.name, "tick_period_s": TICK_PERIOD_S})[:-1]
    return head + ', "segments": [\n  ' + ",\n  ".join(rows) + "\n]}\n"


# ---------------------------------------------------------------------------
# reference route: shuttle trip from a train station to a test track

REFERENCE_SEGMENTS: tuple[tuple[str, str, int], ...] = (
    ("left", "none", 8),            # sideways out of the station bay
    ("forward", "none", 25),
    ("maneuvering", "none", 8),     # station forecourt
    ("forward", "none", 40),
    ("forward", "turn_right", 4),
    ("forward", "none", 35),
    ("forward", "change_left", 2),
    ("forward", "none", 45),
    ("maneuvering", "none", 7),     # roundabout
    ("forward", "none", 30),
    ("forward", "turn_left", 4),
    ("forward", "none", 50),
    ("forward", "change_right", 3),
    ("forward", "none", 40),
    ("forward", "change_left", 2),
    ("forward", "none", 30),
    ("maneuvering", "none", 9),     # village centre
    ("forward", "turn_right", 4),
    ("forward", "none", 45),
    ("forward", "turn_left", 4),
    ("forward", "none", 35),
    ("maneuvering", "none", 6),     # roundabout
    ("forward", "none", 30),
    ("forward", "change_right", 3),
    ("forward", "none", 20),
    ("forward", "turn_right", 4),
    ("forward", "none", 10),
    ("forward", "turn_left", 3),
    ("forward", "none", 10),
    ("maneuvering", "none", 11),    # test-centre gate
    ("forward", "none", 20),
    ("right", "none", 8),           # sideways into the parking bay
)


def generate_reference_route() -> ManeuverTimeline:
    """Deterministic 555 s reference trip (9 min 15 s)."""
    segs = [Segment(Situation(d, lat), n) for d, lat, n in REFERENCE_SEGMENTS]
    return ManeuverTimeline.from_segments(segs, name="reference")


@dataclass(frozen=True)
class DistributionReport:
    directional: dict[Directional, float]
    lateral: dict[Lateral, float]
    directional_ticks: dict[Directional, int] = field(default_factory=dict)
    lateral_ticks: dict[Lateral, int] = field(default_factory=dict)

    def rows(self):
        for d, share in self.directional.items():
            yield "directional", d.value, self.directional_ticks.get(d, 0), share
        for lat, share in self.lateral.items():
            yield "lateral", lat.value, self.lateral_ticks.get(lat, 0), share


def maneuver_distribution(timeline: ManeuverTimeline) -> DistributionReport:
    n = len(timeline.ticks)
    if n == 0:
        raise TimelineError("empty timeline")
    dcount = Counter(s.directional for s in timeline.ticks)
    lcount = Counter(s.lateral for s in timeline.ticks)
    return DistributionReport(
        directional={d: dcount[d] / n for d in Directional},
        lateral={lat: lcount[lat] / n for lat in Lateral},
        directional_ticks={d: dcount[d] for d in Directional},
        lateral_ticks={lat: lcount[lat] for lat in Lateral},
    )


# ---------------------------------------------------------------------------
# simulation

@dataclass(frozen=True)
class TickRecord:
    situation: Situation
    mlam: MLAM
    candidate: Candidate
    activations: tuple[ModuleActivation, ...]


@dataclass(frozen=True)
class ModuleSummary:
    module: str
    uptime: float
    mean_active_quadrants: float | None
    active_ticks: int


@dataclass(frozen=True)
class SimulationTrace:
    ticks: tuple[TickRecord, ...]
    module_ids: tuple[str, ...]

    def __len__(self):
        return len(self.ticks)

    def __add__(self, other: "SimulationTrace") -> "SimulationTrace":
        if self.module_ids != other.module_ids:
            raise ValueError("cannot concatenate traces over different module sets")
        return SimulationTrace(self.ticks + other.ticks, self.module_ids)

    def summary(self) -> dict[str, ModuleSummary]:
        n = len(self.ticks)
        out = {}
        for idx, mid in enumerate(self.module_ids):
            quads = [t.activations[idx].active_quadrants for t in self.ticks]
            active = [q for q in quads if q > 0]
            out[mid] = ModuleSummary(
                module=mid,
                uptime=len(active) / n if n else 0.0,
                mean_active_quadrants=sum(active) / len(active) if active else None,
                active_ticks=len(active),
            )
        return out


def run_simulation(timeline: ManeuverTimeline | Sequence[Situation], fixture: Fixture,
                   initial: Candidate = EMPTY) -> SimulationTrace:
    """Attention map, configuration and quadrant application for every tick.

    The previous tick's candidate is handed to the optimizer as the current
    configuration so that equally cheap alternatives do not flap.
    """
    situations = timeline.ticks if isinstance(timeline, ManeuverTimeline) else tuple(timeline)
    modules = fixture.modules
    forest = build_forest(modules)
    current = initial
    records = []
    cache: dict = {}
    for i, situation in enumerate(situations):
        mlam = build_mlam(situation)
        key = (mlam, current)
        if key not in cache:
            try:
                cand = optimize(mlam, modules, current, forest=forest)
            except InfeasibleError as exc:
                raise InfeasibleError(exc.regions, f"tick {i}: {exc}") from None
            cache[key] = (cand, tuple(apply_mlam(cand, mlam, fixture.layouts)))
        current, activations = cache[key]
        records.append(TickRecord(situation, mlam, current, activations))
    return SimulationTrace(tuple(records), tuple(layout.module for layout in fixture.layouts))
