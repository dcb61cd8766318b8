"""File ingest: JSON Lines measurement records and CSV capability catalogs.

Malformed lines are rejected per line with a reason and never abort the
whole file; only an unreadable file is fatal.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .model import CapabilityCatalog, MeasurementRecord, RadioTechnology, SampleSeries

RECORD_FIELDS = (
    "record_id",
    "user_id",
    "timestamp",
    "download_kbps",
    "upload_kbps",
    "manufacturer",
    "model",
    "os_name",
    "os_version",
    "network_operator",
    "subscriber_operator",
    "technology",
    "latitude",
    "longitude",
    "latency_ms",
    "signal_dbm",
    "cell_id",
    "ip_address",
    "transport_port",
    "samples",
    "region_tag",
    "plan_id",
)

_REQUIRED = (
    "record_id",
    "user_id",
    "timestamp",
    "download_kbps",
    "upload_kbps",
    "manufacturer",
    "model",
    "os_name",
    "os_version",
    "network_operator",
    "subscriber_operator",
    "technology",
)

CATALOG_HEADER = ["kind", "manufacturer", "model", "technology", "operator", "plan_id", "cap_kbps"]


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: int = 0
    warnings: List[Tuple[int, str]] = field(default_factory=list)


@dataclass(frozen=True)
class Session:
    """Time-ordered records of one user on one subscription."""

    user_id: str
    subscriber_operator: str
    records: Tuple[MeasurementRecord, ...]


def record_to_obj(record: MeasurementRecord) -> dict:
    obj = {}
    for name in RECORD_FIELDS:
        value = getattr(record, name)
        if value is None:
            continue
        if name == "technology":
            value = value.value
        elif name == "samples":
            value = {"interval_ms": value.interval_ms, "values": list(value.values)}
        obj[name] = value
    return obj


def record_from_obj(obj: dict) -> Tuple[MeasurementRecord, List[str]]:
    """Build a record from a parsed JSON object; returns (record, warnings)."""
    warnings = []
    if not isinstance(obj, dict):
        raise ValueError("record must be a JSON object")
    for name in _REQUIRED:
        if name not in obj:
            raise ValueError(f"missing required field '{name}'")
    kwargs = {}
    for name, value in obj.items():
        if name not in RECORD_FIELDS:
            warnings.append(f"unknown field '{name}' ignored")
            continue
        if name == "technology":
            try:
                value = RadioTechnology(value)
            except ValueError:
                raise ValueError(f"unknown technology '{value}'")
        elif name == "samples" and value is not None:
            if not isinstance(value, dict) or "interval_ms" not in value or "values" not in value:
                raise ValueError("samples must carry interval_ms and values")
            value = SampleSeries(interval_ms=value["interval_ms"], values=tuple(value["values"]))
        kwargs[name] = value
    record = MeasurementRecord(**kwargs)
    if not record.signal_in_range():
        warnings.append(f"signal_dbm {record.signal_dbm} outside physical range")
    return record, warnings


def read_records(path) -> Tuple[List[MeasurementRecord], IngestReport]:
    """Parse a JSON Lines record file. Raises OSError if unreadable."""
    records = []
    report = IngestReport()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                report.rejected += 1
                report.warnings.append((line_no, "invalid JSON"))
                continue
            try:
                record, warns = record_from_obj(obj)
            except (ValueError, TypeError) as exc:
                report.rejected += 1
                report.warnings.append((line_no, str(exc)))
                continue
            report.accepted += 1
            for w in warns:
                report.warnings.append((line_no, w))
            records.append(record)
    return records, report


def write_records(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_obj(record), sort_keys=True))
            fh.write("\n")


def read_catalog(path) -> Tuple[CapabilityCatalog, IngestReport]:
    """Parse a capability catalog CSV (kinds: device, tech, plan).

    Duplicate keys take the last value with a warning; rows with
    non-positive caps or device caps above the technology standard are
    rejected. Tech rows are resolved first so device validation does not
    depend on row order.
    """
    report = IngestReport()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))

    def parse_cap(row, line_no) -> Optional[float]:
        try:
            cap = float(row.get("cap_kbps") or "")
        except ValueError:
            report.rejected += 1
            report.warnings.append((line_no, "bad cap_kbps"))
            return None
        if cap <= 0:
            report.rejected += 1
            report.warnings.append((line_no, "cap must be positive"))
            return None
        return cap

    def parse_tech(row, line_no) -> Optional[RadioTechnology]:
        try:
            return RadioTechnology(row.get("technology") or "")
        except ValueError:
            report.rejected += 1
            report.warnings.append((line_no, f"unknown technology '{row.get('technology')}'"))
            return None

    tech_caps = {}
    deferred = []  # (line_no, row) for device/plan kinds
    for line_no, row in enumerate(rows, start=2):
        kind = (row.get("kind") or "").strip()
        if kind == "tech":
            cap = parse_cap(row, line_no)
            tech = parse_tech(row, line_no) if cap is not None else None
            if cap is None or tech is None:
                continue
            if tech in tech_caps:
                report.warnings.append((line_no, f"duplicate tech cap for {tech.value}; last wins"))
            tech_caps[tech] = cap
            report.accepted += 1
        elif kind in ("device", "plan"):
            deferred.append((line_no, row))
        else:
            report.rejected += 1
            report.warnings.append((line_no, f"unknown kind '{kind}'"))

    device_caps = {}
    plan_caps = {}
    for line_no, row in deferred:
        cap = parse_cap(row, line_no)
        if cap is None:
            continue
        if row["kind"] == "device":
            tech = parse_tech(row, line_no)
            if tech is None:
                continue
            tech_cap = tech_caps.get(tech)
            if tech_cap is not None and cap > tech_cap:
                report.rejected += 1
                report.warnings.append(
                    (line_no, f"device cap {cap:g} exceeds {tech.value} standard cap {tech_cap:g}")
                )
                continue
            key = (row.get("manufacturer") or "", row.get("model") or "", tech)
            if key in device_caps:
                report.warnings.append((line_no, "duplicate device cap; last wins"))
            device_caps[key] = cap
        else:
            key = (row.get("operator") or "", row.get("plan_id") or "")
            if key in plan_caps:
                report.warnings.append((line_no, "duplicate plan cap; last wins"))
            plan_caps[key] = cap
        report.accepted += 1

    catalog = CapabilityCatalog(device_caps=device_caps, tech_caps=tech_caps, plan_caps=plan_caps)
    return catalog, report


def build_sessions(records) -> List[Session]:
    """Partition records by (user, subscriber operator), time-ordered.

    Ties on timestamp break by record_id so the result is deterministic
    regardless of input order.
    """
    by_key = {}
    for record in records:
        by_key.setdefault((record.user_id, record.subscriber_operator), []).append(record)
    sessions = []
    for key in sorted(by_key):
        ordered = sorted(by_key[key], key=lambda r: (r.timestamp, r.record_id))
        sessions.append(Session(user_id=key[0], subscriber_operator=key[1], records=tuple(ordered)))
    return sessions
