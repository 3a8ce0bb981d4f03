"""Command-line entry point: ``awareness-sim {simulate,day-report,generate-route,calibrate}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from pathlib import Path

from .configuration import ConfigurationError, load_fixture
from .errors import AwarenessError, ConsistencyError, InfeasibleError, SampleError, TimelineError
from .power import (
    PowerModel,
    calibrate_from_trip,
    day_scenario,
    load_samples,
    model_from_samples,
    summarize_samples,
    trip_report,
)
from .route import (
    dump_segments,
    generate_reference_route,
    load_timeline,
    maneuver_distribution,
    run_simulation,
)

EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_INFEASIBLE = 4

DEFAULT_CALIBRATION = "0.171kWh,555s"
TRIP_REPORT = "energy_trip.json"

_ENERGY_UNITS = {"kwh": 1.0, "wh": 1e-3, "j": 1 / 3.6e6}
_TIME_UNITS = {"s": 1.0, "sec": 1.0, "min": 60.0, "h": 3600.0}
_QUANTITY = re.compile(r"^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([a-zA-Z]*)\s*$")


class CliError(Exception):
    def __init__(self, code, message, status):
        super().__init__(message)
        self.code = code
        self.status = status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message, EXIT_USAGE)


def _quantity(text, units, default_unit, what):
    m = _QUANTITY.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"bad {what} {text!r}")
    unit = (m.group(2) or default_unit).lower()
    if unit not in units:
        raise argparse.ArgumentTypeError(f"unknown {what} unit {m.group(2)!r}")
    return float(m.group(1)) * units[unit]


def duration_s(text: str) -> float:
    """Parse ``555s``, ``5min``, ``10h`` or a bare number of seconds."""
    return _quantity(text, _TIME_UNITS, "s", "duration")


def energy_kwh(text: str) -> float:
    """Parse ``0.171kWh``, ``171Wh`` or a bare number of kWh."""
    return _quantity(text, _ENERGY_UNITS, "kwh", "energy")


def calibration(text: str) -> tuple[float, float, int]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError("calibration is ENERGY,DURATION[,MODULES]")
    n = 4
    if len(parts) == 3:
        try:
            n = int(parts[2])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad module count {parts[2]!r}") from None
    return energy_kwh(parts[0]), duration_s(parts[1]), n


def _model(args, fallback: PowerModel | None = None) -> PowerModel:
    if getattr(args, "samples", None):
        return model_from_samples(load_samples(args.samples))
    if getattr(args, "calibrate", None):
        return calibrate_from_trip(*args.calibrate)
    if fallback is not None:
        return fallback
    return calibrate_from_trip(*calibration(DEFAULT_CALIBRATION))


def _add_power_source(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--calibrate", type=calibration, metavar="ENERGY,DURATION[,N]",
                   help=f"calibrate full power from an all-active trip energy (default {DEFAULT_CALIBRATION})")
    g.add_argument("--samples", type=Path, metavar="CSV",
                   help="derive the power model from measured samples (timestamp_s,active_quadrants,watts)")


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def _write_json(path: Path, data):
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def cmd_simulate(args) -> int:
    fixture = load_fixture(args.fixture)
    timeline = generate_reference_route() if args.reference_route else load_timeline(args.route)
    model = _model(args)
    trace = run_simulation(timeline, fixture)
    report = trip_report(trace, model)
    distribution = maneuver_distribution(timeline)
    summary = trace.summary()
    ids = list(trace.module_ids)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    formats = args.format or ["csv", "json"]

    trace_rows = [
        [i, t.situation.directional.value, t.situation.lateral.value, t.candidate.label(ids)]
        + [a.active_quadrants for a in t.activations]
        for i, t in enumerate(trace.ticks)
    ]
    uptime_rows = [
        [s.module, s.uptime, s.active_ticks, "" if s.mean_active_quadrants is None else s.mean_active_quadrants]
        for s in summary.values()
    ]
    dist_rows = list(distribution.rows())
    if "csv" in formats:
        _write_csv(out / "trace.csv", ["tick", "directional", "lateral", "candidate"] + ids, trace_rows)
        _write_csv(out / "uptime.csv", ["module", "uptime", "active_ticks", "mean_active_quadrants"], uptime_rows)
        _write_csv(out / "distribution.csv", ["group", "maneuver", "ticks", "share"], dist_rows)
    if "json" in formats:
        _write_json(out / "trace.json", {
            "spec_version": "1.0",
            "route": timeline.name,
            "modules": ids,
            "ticks": [
                {"tick": i, "situation": t.situation.to_dict(), "mlam": t.mlam.to_dict(),
                 "candidate": [m for m in ids if m in t.candidate],
                 "quadrants": [a.active_quadrants for a in t.activations]}
                for i, t in enumerate(trace.ticks)
            ],
        })
        _write_json(out / "uptime.json", {
            "spec_version": "1.0",
            "modules": [
                {"module": m, "uptime": u, "active_ticks": n, "mean_active_quadrants": q if q != "" else None}
                for m, u, n, q in uptime_rows
            ],
        })
        _write_json(out / "distribution.json", {
            "spec_version": "1.0",
            "directional": {d.value: v for d, v in distribution.directional.items()},
            "lateral": {lat.value: v for lat, v in distribution.lateral.items()},
        })
    _write_json(out / TRIP_REPORT, report.to_dict())

    front = ", ".join(f"{s.module} {s.uptime:.1%}" for s in summary.values())
    print(f"{len(trace)} ticks; uptime {front}; "
          f"trip {report.baseline_kwh:.3f} -> {report.aware_kwh:.3f} kWh ({report.reduction:.1%} reduction)")
    return 0


def cmd_day_report(args) -> int:
    fallback = None
    trip_duration = args.trip_duration
    if args.trip_energy is not None:
        trip_kwh = args.trip_energy
    elif args.from_dir is not None:
        path = Path(args.from_dir) / TRIP_REPORT
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            trip_kwh = float(data["aware_kwh"])
            if trip_duration is None:
                trip_duration = float(data["parameters"]["trip_duration_s"])
            m = data["model"]
            fallback = PowerModel(m["p_full_w"], m["ratio_partial"], m["ratio_standby"])
        except OSError:
            raise CliError("missing_trip_energy", f"cannot read {path}", EXIT_INPUT) from None
        except (ValueError, KeyError, TypeError) as exc:
            raise CliError("parse", f"{path}: malformed trip report ({exc})", EXIT_INPUT) from None
    else:
        raise CliError("missing_trip_energy", "give --trip-energy or --from DIR", EXIT_USAGE)
    if trip_duration is None:
        trip_duration = duration_s("555s")
    model = _model(args, fallback)
    report = day_scenario(trip_kwh, trip_duration, args.boarding, args.shift, model,
                          whole_trips=args.whole_trips)
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_generate_route(args) -> int:
    text = dump_segments(generate_reference_route())
    try:
        Path(args.output).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError("io", f"cannot write {args.output}: {exc.strerror}", EXIT_INPUT) from None
    return 0


def cmd_calibrate(args) -> int:
    out = {"spec_version": "1.0"}
    if args.samples:
        samples = load_samples(args.samples)
        out["groups"] = {
            str(q): {"median_w": s.median, "q1_w": s.q1, "q3_w": s.q3, "count": s.count}
            for q, s in summarize_samples(samples).items()
        }
        model = model_from_samples(samples)
    else:
        model = calibrate_from_trip(*(args.calibrate or calibration(DEFAULT_CALIBRATION)))
    out["model"] = model.to_dict()
    out["power_w"] = {str(q): model.power(q) for q in range(4)}
    sys.stdout.write(json.dumps(out, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="awareness-sim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run the configuration simulation over a route")
    p.add_argument("--fixture", type=Path, help="module descriptor file (default: bundled vehicle)")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--route", type=Path, help="timeline file (JSON or CSV; segment or tick form)")
    g.add_argument("--reference-route", action="store_true", help="use the built-in 555 s reference route")
    _add_power_source(p)
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--format", action="append", choices=["csv", "json"],
                   help="table formats to write; repeatable (default: both)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("day-report", help="scale one trip to a working shift")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--trip-energy", type=energy_kwh, metavar="ENERGY", help="aware energy of one trip")
    g.add_argument("--from", dest="from_dir", metavar="DIR", help=f"read {TRIP_REPORT} written by simulate")
    p.add_argument("--trip-duration", type=duration_s, help="trip duration (default 555s or from the trip report)")
    p.add_argument("--shift", type=duration_s, default=duration_s("10h"), help="shift length (default 10h)")
    p.add_argument("--boarding", type=duration_s, default=duration_s("5min"),
                   help="standby time between trips (default 5min)")
    p.add_argument("--whole-trips", action="store_true", help="count only completed trips")
    _add_power_source(p)
    p.add_argument("--output", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_day_report)

    p = sub.add_parser("generate-route", help="write the reference route segment file")
    p.add_argument("output", help="output path")
    p.set_defaults(func=cmd_generate_route)

    p = sub.add_parser("calibrate", help="print the power model from a trip energy or sample file")
    _add_power_source(p)
    p.set_defaults(func=cmd_calibrate)
    return parser


def _diagnose(exc: BaseException) -> tuple[str, int]:
    if isinstance(exc, InfeasibleError):
        return "infeasible", EXIT_INFEASIBLE
    if isinstance(exc, TimelineError):
        return ("empty_timeline" if "empty timeline" in str(exc) else "parse"), EXIT_INPUT
    if isinstance(exc, (ConfigurationError, SampleError)):
        return "parse", EXIT_INPUT
    if isinstance(exc, ConsistencyError):
        return "consistency", EXIT_INFEASIBLE
    return "input", EXIT_INPUT


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        code, status, message = exc.code, exc.status, str(exc)
    except (AwarenessError, ValueError) as exc:
        (code, status), message = _diagnose(exc), str(exc)
    except OSError as exc:
        code, status, message = "io", EXIT_INPUT, f"{exc.filename}: {exc.strerror}"
    message = " ".join(message.split())
    print(f"error: {code}: {message}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
