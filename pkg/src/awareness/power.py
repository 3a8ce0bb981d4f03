"""Sensor-module power model, measured-sample statistics and energy accounting."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

import numpy as np

from .application import ModuleActivation
from .errors import SampleError
from .route import SimulationTrace, TickRecord, TICK_PERIOD_S

DEFAULT_RATIO_PARTIAL = 1.023
DEFAULT_RATIO_STANDBY = 0.56
SAMPLE_HEADER = ("timestamp_s", "active_quadrants", "watts")


@dataclass(frozen=True)
class PowerModel:
    """Electrical power of one sensor module by number of processed quadrants.

    Three quadrants draw ``p_full``; one or two draw ``ratio_partial * p_full``
    (slightly more than full processing on the current hardware); standby
    draws ``ratio_standby * p_full``.
    """

    p_full: float
    ratio_partial: float = DEFAULT_RATIO_PARTIAL
    ratio_standby: float = DEFAULT_RATIO_STANDBY

    def __post_init__(self):
        if not (self.p_full > 0 and math.isfinite(self.p_full)):
            raise ValueError(f"p_full must be positive, got {self.p_full}")
        if not 0 < self.ratio_standby < 1:
            raise ValueError(f"ratio_standby must lie in (0, 1), got {self.ratio_standby}")
        if not self.ratio_partial > 0:
            raise ValueError(f"ratio_partial must be positive, got {self.ratio_partial}")

    def power(self, active_quadrants: int) -> float:
        if active_quadrants == 0:
            return self.ratio_standby * self.p_full
        if active_quadrants in (1, 2):
            return self.ratio_partial * self.p_full
        if active_quadrants == 3:
            return self.p_full
        raise ValueError(f"active_quadrants must be 0..3, got {active_quadrants}")

    @property
    def standby_w(self) -> float:
        return self.power(0)

    def to_dict(self) -> dict:
        return {"p_full_w": self.p_full, "ratio_partial": self.ratio_partial, "ratio_standby": self.ratio_standby}


def calibrate_from_trip(baseline_kwh: float, trip_duration_s: float, n_modules: int = 4) -> PowerModel:
    """Full-processing power implied by an all-active trip energy."""
    for name, v in (("baseline_kwh", baseline_kwh), ("trip_duration_s", trip_duration_s), ("n_modules", n_modules)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    p_full = baseline_kwh * 1000.0 / (n_modules * trip_duration_s / 3600.0)
    return PowerModel(p_full)


def module_power(model: PowerModel, activation: ModuleActivation) -> float:
    return model.power(activation.active_quadrants)


# ---------------------------------------------------------------------------
# measured samples

@dataclass(frozen=True)
class PowerSample:
    timestamp_s: float
    active_quadrants: int
    watts: float


@dataclass(frozen=True)
class PowerSampleSet:
    samples: tuple[PowerSample, ...]

    def __post_init__(self):
        for s in self.samples:
            if s.active_quadrants not in (0, 1, 2, 3):
                raise SampleError(f"active_quadrants must be 0..3, got {s.active_quadrants}")
            if not s.watts > 0:
                raise SampleError(f"watts must be positive, got {s.watts}")

    @classmethod
    def from_tuples(cls, rows: Iterable[tuple]) -> "PowerSampleSet":
        return cls(tuple(PowerSample(float(t), int(q), float(w)) for t, q, w in rows))


def load_samples(path: str | Path) -> PowerSampleSet:
    """Read a ``timestamp_s,active_quadrants,watts`` CSV file."""
    rows = []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise SampleError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SAMPLE_HEADER:
            raise SampleError(f"expected header {','.join(SAMPLE_HEADER)}", 1)
        for row in reader:
            if not row:
                continue
            line = reader.line_num
            if len(row) != 3:
                raise SampleError(f"expected 3 fields, got {len(row)}", line)
            try:
                t, q, w = float(row[0]), int(row[1]), float(row[2])
            except ValueError:
                raise SampleError(f"non-numeric field in {row!r}", line) from None
            if q not in (0, 1, 2, 3):
                raise SampleError(f"active_quadrants must be 0..3, got {q}", line)
            if not w > 0:
                raise SampleError(f"watts must be positive, got {w}", line)
            rows.append(PowerSample(t, q, w))
    return PowerSampleSet(tuple(rows))


@dataclass(frozen=True)
class GroupStats:
    median: float
    q1: float
    q3: float
    count: int


def summarize_samples(samples: PowerSampleSet) -> dict[int, GroupStats]:
    """Median and quartiles per active-quadrant group (linear interpolation)."""
    groups: dict[int, list[float]] = {}
    for s in samples.samples:
        groups.setdefault(s.active_quadrants, []).append(s.watts)
    out = {}
    for q in sorted(groups):
        values = np.asarray(groups[q], dtype=float)
        q1, med, q3 = np.percentile(values, [25, 50, 75])
        out[q] = GroupStats(float(med), float(q1), float(q3), len(values))
    return out


def model_from_samples(samples: PowerSampleSet) -> PowerModel:
    """Power model from group medians; 1- and 2-quadrant medians are averaged."""
    stats = summarize_samples(samples)
    for needed in (0, 3):
        if needed not in stats:
            raise SampleError(f"no samples with {needed} active quadrants")
    partial = [stats[q].median for q in (1, 2) if q in stats]
    if not partial:
        raise SampleError("no samples with 1 or 2 active quadrants")
    p_full = stats[3].median
    return PowerModel(
        p_full,
        ratio_partial=sum(partial) / len(partial) / p_full,
        ratio_standby=stats[0].median / p_full,
    )


# ---------------------------------------------------------------------------
# energy

def tick_power(record: TickRecord, model: PowerModel) -> float:
    return sum(module_power(model, a) for a in record.activations)


def integrate_energy(trace: SimulationTrace, model: PowerModel) -> float:
    """Total energy in kWh, every module contributing every tick (standby included)."""
    if not trace.ticks:
        raise ValueError("cannot integrate an empty trace")
    joules = math.fsum(tick_power(t, model) * TICK_PERIOD_S for t in trace.ticks)
    return joules / 3.6e6


def full_activation(trace: SimulationTrace) -> SimulationTrace:
    """The same trace with every module processing all three quadrants."""
    ticks = tuple(
        replace(t, activations=tuple(ModuleActivation(a.module, 3) for a in t.activations))
        for t in trace.ticks
    )
    return SimulationTrace(ticks, trace.module_ids)


@dataclass(frozen=True)
class EnergyReport:
    baseline_kwh: float
    aware_kwh: float
    horizon: str
    trip_duration_s: float
    boarding_s: float
    shift_s: float
    trips: float
    model: PowerModel

    @property
    def reduction(self) -> float:
        return 1.0 - self.aware_kwh / self.baseline_kwh

    def to_dict(self) -> dict:
        return {
            "spec_version": "1.0",
            "horizon": self.horizon,
            "baseline_kwh": self.baseline_kwh,
            "aware_kwh": self.aware_kwh,
            "reduction": self.reduction,
            "parameters": {
                "trip_duration_s": self.trip_duration_s,
                "boarding_s": self.boarding_s,
                "shift_s": self.shift_s,
                "trips": self.trips,
            },
            "model": self.model.to_dict(),
        }


def trip_report(trace: SimulationTrace, model: PowerModel) -> EnergyReport:
    duration = len(trace) * TICK_PERIOD_S
    return EnergyReport(
        baseline_kwh=integrate_energy(full_activation(trace), model),
        aware_kwh=integrate_energy(trace, model),
        horizon="trip",
        trip_duration_s=duration,
        boarding_s=0.0,
        shift_s=duration,
        trips=1.0,
        model=model,
    )


def day_scenario(trip_kwh_aware: float, trip_duration_s: float, boarding_s: float, shift_s: float,
                 model: PowerModel, n_modules: int = 4, whole_trips: bool = False) -> EnergyReport:
    """Scale one trip to a working shift with standby boarding breaks.

    The baseline keeps every module fully active for the whole shift. With
    awareness processing each trip costs ``trip_kwh_aware`` and the remaining
    shift time is spent with all modules in standby. ``whole_trips`` counts
    only completed trips instead of the fractional trip count.
    """
    if not trip_duration_s > 0 or not shift_s > 0:
        raise ValueError("trip and shift durations must be positive")
    if boarding_s < 0:
        raise ValueError("boarding time must not be negative")
    if trip_kwh_aware < 0:
        raise ValueError("trip energy must not be negative")
    trips = shift_s / (trip_duration_s + boarding_s)
    if whole_trips:
        trips = float(math.floor(trips + 1e-9))
    idle_h = (shift_s - trips * trip_duration_s) / 3600.0
    baseline = n_modules * model.p_full * shift_s / 3600.0 / 1000.0
    aware = trips * trip_kwh_aware + idle_h * n_modules * model.standby_w / 1000.0
    return EnergyReport(
        baseline_kwh=baseline,
        aware_kwh=aware,
        horizon="day",
        trip_duration_s=trip_duration_s,
        boarding_s=boarding_s,
        shift_s=shift_s,
        trips=trips,
        model=model,
    )
