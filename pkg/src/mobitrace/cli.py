"""Command-line surface: synth -> analyze -> report.

Exit codes: 0 success, 1 I/O failure, 2 usage or config error, 3 empty
result set. All outputs go to the caller-named run directory; inputs are
never mutated. For identical inputs and config every output is
byte-identical except manifest.json, which records wall time.
"""

from __future__ import annotations

import argparse
import bisect
import hashlib
import json
import sys
import time
from dataclasses import fields
from pathlib import Path

from . import __version__
from .attribution import Factor, LimitingFactorVerdict, attribute
from .congestion import Pool, classify
from .coverage import HandoverEvent, camping_stats, detect_handovers, handover_impact
from .ingest import build_sessions, read_catalog, read_records, record_from_obj, record_to_obj, write_records
from .model import AnalysisConfig, CapabilityCatalog, RadioTechnology, TechnologyGroup
from .reports import (
    _hourly_csv,
    hourly_profile,
    operator_summary,
    pool_trend,
    quarterly_trend,
    signal_correlation,
    throughput_histogram,
)
from .synth import Scenario, ScenarioConfig, generate

REPORT_NAMES = ("histogram", "hourly", "trend", "operators", "pools", "signal", "camping", "handovers")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(obj, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_csv(header, rows, path: Path) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_manifest(out_dir: Path, command: str, config_obj: dict, inputs, outputs, started: float) -> None:
    manifest = {
        "tool": "mobitrace",
        "version": __version__,
        "command": command,
        "config": config_obj,
        "inputs": {str(p): _sha256(Path(p)) for p in inputs},
        "outputs": sorted(outputs),
        "wall_time_s": time.monotonic() - started,
    }
    _write_json(manifest, out_dir / "manifest.json")


def _config_to_obj(cfg: AnalysisConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(AnalysisConfig)}


def _load_analysis_config(args) -> AnalysisConfig:
    values = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_values = json.load(fh)
        known = {f.name for f in fields(AnalysisConfig)}
        unknown = set(file_values) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        values.update(file_values)
    if getattr(args, "utc_offset_minutes", None) is not None:
        values["utc_offset_minutes"] = args.utc_offset_minutes
    return AnalysisConfig(**values)


# ---------------------------------------------------------------------------
# synth


def _scenario_from_args(args) -> ScenarioConfig:
    values = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            values.update(json.load(fh))
    if args.scenario is not None:
        values["scenario"] = args.scenario
    if args.seed is not None:
        values["seed"] = args.seed
    for flag in ("base_capacity_kbps", "diurnal_dip", "records_per_hour", "noise_cv",
                 "spike_rate", "utc_offset_minutes", "boundary_gap_ms"):
        value = getattr(args, flag, None)
        if value is not None:
            values[flag] = value
    if "seed" not in values:
        raise ValueError("a seed is required")
    if "scenario" not in values:
        raise ValueError("a scenario is required")
    values["scenario"] = Scenario(values["scenario"])
    if "technology" in values:
        values["technology"] = RadioTechnology(values["technology"])
    if "cells" in values:
        values["cells"] = tuple(
            (cell_id, RadioTechnology(tech), float(cap)) for cell_id, tech, cap in values["cells"]
        )
    return ScenarioConfig(**values)


def cmd_synth(args) -> int:
    started = time.monotonic()
    try:
        cfg = _scenario_from_args(args)
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        records, truth = generate(cfg)
        write_records(records, out_dir / "trace.jsonl")
        _write_json(truth.to_json_obj(), out_dir / "ground_truth.json")
        config_obj = json.loads(
            json.dumps(
                {**{f.name: getattr(cfg, f.name) for f in fields(ScenarioConfig)}},
                default=lambda o: o.value if hasattr(o, "value") else list(o),
            )
        )
        _write_manifest(out_dir, "synth", config_obj, [], ["trace.jsonl", "ground_truth.json"], started)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# analyze


def _verdict_to_obj(record_id: str, verdict: LimitingFactorVerdict) -> dict:
    return {
        "record_id": record_id,
        "factor": verdict.factor.value,
        "artificial": verdict.artificial,
        "binding_upper_bound_kbps": verdict.binding_upper_bound_kbps,
        "congestion_pool": verdict.congestion_pool.value if verdict.congestion_pool else None,
    }


def _assessment_to_obj(assessment) -> dict:
    return {
        "upper_bound_kbps": assessment.upper_bound_kbps,
        "upper_bound_window": assessment.upper_bound_window,
        "overall_mape_pct": assessment.overall_mape_pct,
        "pool": assessment.pool.value,
        "spikes_replaced": assessment.spikes_replaced,
        "windows": [
            {
                "window_index": w.window_index,
                "mean_kbps": w.mean_kbps,
                "rad": w.rad,
                "mape_pct": w.mape_pct,
                "excluded_slow_start": w.excluded_slow_start,
            }
            for w in assessment.windows
        ],
    }


def _event_to_obj(event: HandoverEvent) -> dict:
    return {
        "user_id": event.user_id,
        "at_ms": event.at_ms,
        "from_cell": event.from_cell,
        "to_cell": event.to_cell,
        "from_tech": event.from_tech.value,
        "to_tech": event.to_tech.value,
        "from_kbps": event.from_kbps,
        "to_kbps": event.to_kbps,
        "from_dbm": event.from_dbm,
        "to_dbm": event.to_dbm,
        "downgrade": event.downgrade,
        "gap_ms": event.gap_ms,
    }


def _event_from_obj(obj: dict) -> HandoverEvent:
    return HandoverEvent(
        user_id=obj["user_id"],
        at_ms=obj["at_ms"],
        from_cell=obj["from_cell"],
        to_cell=obj["to_cell"],
        from_tech=RadioTechnology(obj["from_tech"]),
        to_tech=RadioTechnology(obj["to_tech"]),
        from_kbps=obj["from_kbps"],
        to_kbps=obj["to_kbps"],
        from_dbm=obj.get("from_dbm"),
        to_dbm=obj.get("to_dbm"),
        downgrade=obj["downgrade"],
        gap_ms=obj["gap_ms"],
    )


def cmd_analyze(args) -> int:
    started = time.monotonic()
    try:
        cfg = _load_analysis_config(args)
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    inputs = [args.infile]
    try:
        records, ingest_report = read_records(args.infile)
        if args.catalog:
            catalog, catalog_report = read_catalog(args.catalog)
            inputs.append(args.catalog)
        else:
            catalog, catalog_report = CapabilityCatalog.empty(), None
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not records:
        print("error: no analyzable records", file=sys.stderr)
        return 3

    sessions = build_sessions(records)
    all_events = []
    event_times = {}  # session key -> sorted event timestamps
    for session in sessions:
        events = detect_handovers(session, cfg)
        all_events.extend(events)
        event_times[(session.user_id, session.subscriber_operator)] = sorted(e.at_ms for e in events)

    def handover_nearby(record) -> bool:
        times = event_times.get((record.user_id, record.subscriber_operator), [])
        i = bisect.bisect_left(times, record.timestamp)
        for j in (i - 1, i):
            if 0 <= j < len(times) and abs(times[j] - record.timestamp) <= cfg.handover_max_gap_ms:
                return True
        return False

    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "analyzed.jsonl", "w", encoding="utf-8") as fh:
            for record in records:
                assessment = None
                if record.samples is not None and len(record.samples.values) >= 2 * cfg.window_size:
                    try:
                        assessment = classify(record.samples, cfg)
                    except ValueError:
                        assessment = None
                verdict = attribute(record, catalog, assessment, handover_nearby(record), cfg)
                line = {
                    "record": record_to_obj(record),
                    "verdict": _verdict_to_obj(record.record_id, verdict),
                    "assessment": _assessment_to_obj(assessment) if assessment else None,
                }
                fh.write(json.dumps(line, sort_keys=True))
                fh.write("\n")
        with open(out_dir / "handovers.jsonl", "w", encoding="utf-8") as fh:
            for event in all_events:
                fh.write(json.dumps(_event_to_obj(event), sort_keys=True))
                fh.write("\n")
        ingest_obj = {
            "records": {
                "accepted": ingest_report.accepted,
                "rejected": ingest_report.rejected,
                "warnings": [[line, reason] for line, reason in ingest_report.warnings],
            }
        }
        if catalog_report is not None:
            ingest_obj["catalog"] = {
                "accepted": catalog_report.accepted,
                "rejected": catalog_report.rejected,
                "warnings": [[line, reason] for line, reason in catalog_report.warnings],
            }
        _write_json(ingest_obj, out_dir / "ingest_report.json")
        _write_manifest(
            out_dir,
            "analyze",
            _config_to_obj(cfg),
            inputs,
            ["analyzed.jsonl", "handovers.jsonl", "ingest_report.json"],
            started,
        )
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# report


def _read_analyzed(in_dir: Path):
    records, verdicts, pools = [], [], []
    with open(in_dir / "analyzed.jsonl", "r", encoding="utf-8") as fh:
        for line in fh:
            obj = json.loads(line)
            record, _ = record_from_obj(obj["record"])
            records.append(record)
            v = obj["verdict"]
            verdicts.append(
                LimitingFactorVerdict(
                    factor=Factor(v["factor"]),
                    artificial=v["artificial"],
                    binding_upper_bound_kbps=v.get("binding_upper_bound_kbps"),
                    congestion_pool=Pool(v["congestion_pool"]) if v.get("congestion_pool") else None,
                )
            )
            a = obj.get("assessment")
            pools.append(Pool(a["pool"]) if a else None)
    return records, verdicts, pools


def _read_events(in_dir: Path):
    path = in_dir / "handovers.jsonl"
    if not path.exists():
        return []
    with open(path, "r", encoding="utf-8") as fh:
        return [_event_from_obj(json.loads(line)) for line in fh]


def cmd_report(args) -> int:
    started = time.monotonic()
    names = REPORT_NAMES if args.report == "all" else (args.report,)
    if any(n not in REPORT_NAMES for n in names):
        print(f"error: unknown report '{args.report}'; valid: all, {', '.join(REPORT_NAMES)}",
              file=sys.stderr)
        return 2
    try:
        cfg = _load_analysis_config(args)
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    in_dir = Path(args.indir)
    try:
        records, verdicts, pools = _read_analyzed(in_dir)
        events = _read_events(in_dir)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.include_artificial:
        selected = list(zip(records, pools))
    else:
        selected = [(r, p) for r, v, p in zip(records, verdicts, pools) if not v.artificial]
    report_records = [r for r, _ in selected]

    out_dir = Path(args.out)
    outputs = []

    def emit(name: str, json_obj, header, rows):
        _write_json(json_obj, out_dir / f"{name}.json")
        _write_csv(header, rows, out_dir / f"{name}.csv")
        outputs.extend([f"{name}.json", f"{name}.csv"])

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name in names:
            if name == "histogram":
                h = throughput_histogram(report_records, cfg)
                emit(name, h.to_json_obj(), h.csv_header(), h.csv_rows())
            elif name == "hourly":
                profiles = hourly_profile(report_records, args.key, cfg)
                header, rows = _hourly_csv(profiles)
                emit(name, [p.to_json_obj() for p in profiles], header, rows)
            elif name == "trend":
                t = quarterly_trend(report_records, cfg)
                emit(name, t.to_json_obj(), t.csv_header(), t.csv_rows())
            elif name == "operators":
                summaries = operator_summary(report_records)
                header = ["operator", "count", "min_kbps", "q1_kbps", "median_kbps",
                          "q3_kbps", "max_kbps", "mean_kbps"]
                rows = [[s.operator, s.count, s.min_kbps, s.q1_kbps, s.median_kbps,
                         s.q3_kbps, s.max_kbps, s.mean_kbps] for s in summaries]
                emit(name, [s.to_json_obj() for s in summaries], header, rows)
            elif name == "pools":
                assessed = [(r, p) for r, p in selected if p is not None]
                t = pool_trend(assessed, cfg)
                emit(name, t.to_json_obj(), t.csv_header(), t.csv_rows())
            elif name == "signal":
                s = signal_correlation(report_records, cfg)
                emit(name, s.to_json_obj(), s.csv_header(), s.csv_rows())
            elif name == "camping":
                group = TechnologyGroup.G4 if args.subscription == "4g" else TechnologyGroup.G3
                rows = []
                json_rows = []
                for session in build_sessions(report_records):
                    stats = camping_stats(session, group)
                    rows.append([session.user_id, session.subscriber_operator, stats.total,
                                 stats.on_subscribed, stats.on_lower, stats.fraction_lower])
                    json_rows.append({
                        "user_id": session.user_id,
                        "subscriber_operator": session.subscriber_operator,
                        "subscription_group": stats.subscription_group.value,
                        "total": stats.total,
                        "on_subscribed": stats.on_subscribed,
                        "on_lower": stats.on_lower,
                        "fraction_lower": stats.fraction_lower,
                    })
                header = ["user_id", "subscriber_operator", "total", "on_subscribed",
                          "on_lower", "fraction_lower"]
                emit(name, json_rows, header, rows)
            elif name == "handovers":
                impact = handover_impact(events)
                downgrades = sum(1 for e in events if e.downgrade)
                obj = {
                    "count": impact.count,
                    "downgrades": downgrades,
                    "mean_throughput_ratio": impact.mean_throughput_ratio,
                    "throughput_excluded": impact.throughput_excluded,
                    "mean_signal_ratio": impact.mean_signal_ratio,
                    "signal_excluded": impact.signal_excluded,
                }
                header = ["count", "downgrades", "mean_throughput_ratio", "throughput_excluded",
                          "mean_signal_ratio", "signal_excluded"]
                emit(name, obj, header, [[obj[k] for k in header]])
        _write_manifest(out_dir, "report", _config_to_obj(cfg),
                        [in_dir / "analyzed.jsonl"], outputs, started)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mobitrace",
                                     description="Mobile-Internet measurement analytics toolkit")
    parser.add_argument("--version", action="version", version=f"mobitrace {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic trace with ground truth")
    p_synth.add_argument("--scenario", choices=[s.value for s in Scenario])
    p_synth.add_argument("--seed", type=int)
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--config", help="scenario config JSON; flags override")
    p_synth.add_argument("--base-capacity-kbps", dest="base_capacity_kbps", type=float)
    p_synth.add_argument("--diurnal-dip", dest="diurnal_dip", type=float)
    p_synth.add_argument("--records-per-hour", dest="records_per_hour", type=int)
    p_synth.add_argument("--noise-cv", dest="noise_cv", type=float)
    p_synth.add_argument("--spike-rate", dest="spike_rate", type=float)
    p_synth.add_argument("--boundary-gap-ms", dest="boundary_gap_ms", type=int)
    p_synth.add_argument("--utc-offset-minutes", dest="utc_offset_minutes", type=int)
    p_synth.set_defaults(func=cmd_synth)

    p_analyze = sub.add_parser("analyze", help="attribute and assess a trace")
    p_analyze.add_argument("--in", dest="infile", required=True)
    p_analyze.add_argument("--out", required=True)
    p_analyze.add_argument("--catalog")
    p_analyze.add_argument("--config", help="analysis config JSON; flags override")
    p_analyze.add_argument("--utc-offset-minutes", dest="utc_offset_minutes", type=int)
    p_analyze.set_defaults(func=cmd_analyze)

    p_report = sub.add_parser("report", help="emit aggregate reports from analyzed output")
    p_report.add_argument("--in", dest="indir", required=True)
    p_report.add_argument("--out", required=True)
    p_report.add_argument("--report", default="all")
    p_report.add_argument("--key", choices=["cell", "operator"], default="cell")
    p_report.add_argument("--subscription", choices=["3g", "4g"], default="4g")
    p_report.add_argument("--include-artificial", action="store_true")
    p_report.add_argument("--config", help="analysis config JSON; flags override")
    p_report.add_argument("--utc-offset-minutes", dest="utc_offset_minutes", type=int)
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
