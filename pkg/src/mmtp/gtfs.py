"""Parsing, validation, and querying of the eight required GTFS files.

A feed is read from a directory or a zip archive of CSV files. Times are
plain integer seconds since midnight of the service day; values past 24:00:00
are legal for post-midnight trips. Only the minimal column set per file is
interpreted; unknown files and columns are ignored with a logged notice.
"""

from __future__ import annotations

import csv
import io
import logging
import re
import zipfile
from dataclasses import dataclass, field
from datetime import date as ServiceDate
from pathlib import Path

from .errors import BrokenReference, MalformedTime, MissingFile, ParseError

logger = logging.getLogger(__name__)

# Seconds since midnight of the service day (may exceed 86400).
GtfsTime = int

REQUIRED_FILES = (
    "agency.txt",
    "calendar.txt",
    "frequencies.txt",
    "routes.txt",
    "shapes.txt",
    "stop_times.txt",
    "stops.txt",
    "trips.txt",
)

_TIME_RE = re.compile(r"^(\d{1,2}):(\d{2}):(\d{2})$")
_MAX_HOURS = 47


def parse_gtfs_time(text: str) -> GtfsTime:
    """Parse H:MM:SS or HH:MM:SS into seconds; hours 0..47 admit post-midnight trips."""
    m = _TIME_RE.match(text.strip())
    if not m:
        raise MalformedTime(text)
    hours, minutes, seconds = (int(g) for g in m.groups())
    if hours > _MAX_HOURS or minutes > 59 or seconds > 59:
        raise MalformedTime(text)
    return hours * 3600 + minutes * 60 + seconds


def format_gtfs_time(t: GtfsTime) -> str:
    if t < 0:
        raise ValueError(f"negative GTFS time: {t}")
    return f"{t // 3600:02d}:{t % 3600 // 60:02d}:{t % 60:02d}"


def parse_service_date(text: str) -> ServiceDate:
    """Parse a GTFS YYYYMMDD date."""
    s = text.strip()
    if len(s) != 8 or not s.isdigit():
        raise ValueError(f"malformed date: {text!r}")
    return ServiceDate(int(s[:4]), int(s[4:6]), int(s[6:8]))


def format_service_date(d: ServiceDate) -> str:
    return f"{d.year:04d}{d.month:02d}{d.day:02d}"


@dataclass(frozen=True)
class Agency:
    agency_id: str
    name: str
    timezone: str


@dataclass(frozen=True)
class ServiceCalendar:
    service_id: str
    weekday_flags: tuple[bool, bool, bool, bool, bool, bool, bool]  # Mon..Sun
    start_date: ServiceDate
    end_date: ServiceDate


@dataclass(frozen=True)
class Frequency:
    trip_id: str
    start_time: GtfsTime
    end_time: GtfsTime
    headway_secs: int


@dataclass(frozen=True)
class TransitRoute:
    route_id: str
    agency_id: str
    short_name: str
    long_name: str
    route_type: int  # 0 tram, 1 metro, 2 rail, 3 bus


@dataclass(frozen=True)
class ShapePoint:
    shape_id: str
    lat: float
    lon: float
    sequence: int


@dataclass(frozen=True)
class Stop:
    stop_id: str
    name: str
    lat: float
    lon: float


@dataclass(frozen=True)
class StopTime:
    trip_id: str
    arrival: GtfsTime
    departure: GtfsTime
    stop_id: str
    stop_sequence: int


@dataclass(frozen=True)
class Trip:
    trip_id: str
    route_id: str
    service_id: str
    shape_id: str | None = None


@dataclass
class GtfsFeed:
    agencies: dict[str, Agency] = field(default_factory=dict)
    calendars: dict[str, ServiceCalendar] = field(default_factory=dict)
    frequencies: dict[str, list[Frequency]] = field(default_factory=dict)  # by trip_id
    routes: dict[str, TransitRoute] = field(default_factory=dict)
    shapes: dict[str, list[ShapePoint]] = field(default_factory=dict)  # sorted by sequence
    stops: dict[str, Stop] = field(default_factory=dict)
    stop_times: dict[str, list[StopTime]] = field(default_factory=dict)  # by trip, sorted by stop_sequence
    trips: dict[str, Trip] = field(default_factory=dict)


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    file: str
    id: str
    message: str

    def as_dict(self) -> dict[str, str]:
        return {"code": self.code, "file": self.file, "id": self.id, "message": self.message}


def service_active_on(cal: ServiceCalendar, date: ServiceDate) -> bool:
    """True iff the date falls in the calendar window on an enabled weekday."""
    if not (cal.start_date <= date <= cal.end_date):
        return False
    return cal.weekday_flags[date.weekday()]


def next_frequency_departure(freq: Frequency, t: GtfsTime) -> GtfsTime | None:
    """Smallest start + k*headway >= t that is <= end_time, or None."""
    if t <= freq.start_time:
        return freq.start_time
    k = -(-(t - freq.start_time) // freq.headway_secs)  # ceil division
    d = freq.start_time + k * freq.headway_secs
    return d if d <= freq.end_time else None


# --- feed reading ---------------------------------------------------------


class _FeedSource:
    """Uniform access to a feed directory or zip archive."""

    def __init__(self, source: str | Path):
        self.path = Path(source)
        self._zip = None
        if self.path.is_file():
            try:
                self._zip = zipfile.ZipFile(self.path)
            except zipfile.BadZipFile as exc:
                raise ParseError(str(source), 0, f"not a zip archive: {exc}") from exc
        elif not self.path.is_dir():
            raise ParseError(str(source), 0, "feed source is neither a directory nor a file")

    def names(self) -> set[str]:
        if self._zip is not None:
            return {n for n in self._zip.namelist() if not n.endswith("/")}
        return {p.name for p in self.path.iterdir() if p.is_file()}

    def open_text(self, name: str) -> io.TextIOBase:
        if self._zip is not None:
            return io.TextIOWrapper(self._zip.open(name), encoding="utf-8-sig", newline="")
        return open(self.path / name, encoding="utf-8-sig", newline="")


def _rows(src: _FeedSource, name: str, required: tuple[str, ...]):
    """Yield (line_number, row_dict) after checking the header carries the required columns."""
    with src.open_text(name) as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise ParseError(name, 1, f"missing required columns: {', '.join(missing)}")
        for row in reader:
            yield reader.line_num, row


def _parse_int(name: str, line: int, column: str, value: str) -> int:
    try:
        return int(value.strip())
    except ValueError:
        raise ParseError(name, line, f"{column}: not an integer: {value!r}") from None


def _parse_float(name: str, line: int, column: str, value: str) -> float:
    try:
        return float(value.strip())
    except ValueError:
        raise ParseError(name, line, f"{column}: not a number: {value!r}") from None


def _parse_time(name: str, line: int, column: str, value: str) -> GtfsTime:
    try:
        return parse_gtfs_time(value)
    except MalformedTime as exc:
        raise ParseError(name, line, f"{column}: {exc}") from None


def _parse_date(name: str, line: int, column: str, value: str) -> ServiceDate:
    try:
        return parse_service_date(value)
    except ValueError as exc:
        raise ParseError(name, line, f"{column}: {exc}") from None


_WEEKDAY_COLUMNS = ("monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday")


def parse_feed(source: str | Path) -> GtfsFeed:
    """Parse the eight required files and enforce referential integrity.

    Raises MissingFile, ParseError, or BrokenReference; a returned feed is
    structurally sound (semantic checks live in validate_feed).
    """
    src = _FeedSource(source)
    present = src.names()
    for name in REQUIRED_FILES:
        if name not in present:
            raise MissingFile(name)
    for name in sorted(present - set(REQUIRED_FILES)):
        if name.endswith(".txt"):
            logger.info("ignoring non-required feed file %s", name)

    feed = GtfsFeed()

    for line, row in _rows(src, "agency.txt", ("agency_id", "agency_name", "agency_timezone")):
        agency = Agency(row["agency_id"].strip(), row["agency_name"].strip(), row["agency_timezone"].strip())
        if agency.agency_id in feed.agencies:
            raise ParseError("agency.txt", line, f"duplicate agency_id {agency.agency_id!r}")
        feed.agencies[agency.agency_id] = agency

    for line, row in _rows(src, "calendar.txt", ("service_id", *_WEEKDAY_COLUMNS, "start_date", "end_date")):
        flags = tuple(row[c].strip() == "1" for c in _WEEKDAY_COLUMNS)
        cal = ServiceCalendar(
            service_id=row["service_id"].strip(),
            weekday_flags=flags,  # type: ignore[arg-type]
            start_date=_parse_date("calendar.txt", line, "start_date", row["start_date"]),
            end_date=_parse_date("calendar.txt", line, "end_date", row["end_date"]),
        )
        if cal.service_id in feed.calendars:
            raise ParseError("calendar.txt", line, f"duplicate service_id {cal.service_id!r}")
        feed.calendars[cal.service_id] = cal

    for line, row in _rows(src, "routes.txt", ("route_id", "agency_id", "route_short_name", "route_long_name", "route_type")):
        route = TransitRoute(
            route_id=row["route_id"].strip(),
            agency_id=row["agency_id"].strip(),
            short_name=row["route_short_name"].strip(),
            long_name=row["route_long_name"].strip(),
            route_type=_parse_int("routes.txt", line, "route_type", row["route_type"]),
        )
        if route.route_id in feed.routes:
            raise ParseError("routes.txt", line, f"duplicate route_id {route.route_id!r}")
        feed.routes[route.route_id] = route

    for line, row in _rows(src, "shapes.txt", ("shape_id", "shape_pt_lat", "shape_pt_lon", "shape_pt_sequence")):
        pt = ShapePoint(
            shape_id=row["shape_id"].strip(),
            lat=_parse_float("shapes.txt", line, "shape_pt_lat", row["shape_pt_lat"]),
            lon=_parse_float("shapes.txt", line, "shape_pt_lon", row["shape_pt_lon"]),
            sequence=_parse_int("shapes.txt", line, "shape_pt_sequence", row["shape_pt_sequence"]),
        )
        feed.shapes.setdefault(pt.shape_id, []).append(pt)
    for shape_id, pts in feed.shapes.items():
        pts.sort(key=lambda p: p.sequence)
        for a, b in zip(pts, pts[1:]):
            if b.sequence <= a.sequence:
                raise ParseError("shapes.txt", 0, f"shape {shape_id!r}: sequence not strictly increasing")

    for line, row in _rows(src, "stops.txt", ("stop_id", "stop_name", "stop_lat", "stop_lon")):
        stop = Stop(
            stop_id=row["stop_id"].strip(),
            name=row["stop_name"].strip(),
            lat=_parse_float("stops.txt", line, "stop_lat", row["stop_lat"]),
            lon=_parse_float("stops.txt", line, "stop_lon", row["stop_lon"]),
        )
        if stop.stop_id in feed.stops:
            raise ParseError("stops.txt", line, f"duplicate stop_id {stop.stop_id!r}")
        feed.stops[stop.stop_id] = stop

    for line, row in _rows(src, "trips.txt", ("route_id", "service_id", "trip_id")):
        shape_id = (row.get("shape_id") or "").strip() or None
        trip = Trip(
            trip_id=row["trip_id"].strip(),
            route_id=row["route_id"].strip(),
            service_id=row["service_id"].strip(),
            shape_id=shape_id,
        )
        if trip.trip_id in feed.trips:
            raise ParseError("trips.txt", line, f"duplicate trip_id {trip.trip_id!r}")
        feed.trips[trip.trip_id] = trip

    for line, row in _rows(src, "stop_times.txt", ("trip_id", "arrival_time", "departure_time", "stop_id", "stop_sequence")):
        st = StopTime(
            trip_id=row["trip_id"].strip(),
            arrival=_parse_time("stop_times.txt", line, "arrival_time", row["arrival_time"]),
            departure=_parse_time("stop_times.txt", line, "departure_time", row["departure_time"]),
            stop_id=row["stop_id"].strip(),
            stop_sequence=_parse_int("stop_times.txt", line, "stop_sequence", row["stop_sequence"]),
        )
        feed.stop_times.setdefault(st.trip_id, []).append(st)
    for sts in feed.stop_times.values():
        sts.sort(key=lambda s: s.stop_sequence)

    for line, row in _rows(src, "frequencies.txt", ("trip_id", "start_time", "end_time", "headway_secs")):
        freq = Frequency(
            trip_id=row["trip_id"].strip(),
            start_time=_parse_time("frequencies.txt", line, "start_time", row["start_time"]),
            end_time=_parse_time("frequencies.txt", line, "end_time", row["end_time"]),
            headway_secs=_parse_int("frequencies.txt", line, "headway_secs", row["headway_secs"]),
        )
        if freq.headway_secs <= 0:
            raise ParseError("frequencies.txt", line, f"headway_secs must be positive, got {freq.headway_secs}")
        if freq.start_time > freq.end_time:
            raise ParseError("frequencies.txt", line, "start_time after end_time")
        feed.frequencies.setdefault(freq.trip_id, []).append(freq)

    _check_references(feed)
    return feed


def _check_references(feed: GtfsFeed) -> None:
    for route in feed.routes.values():
        if route.agency_id not in feed.agencies:
            raise BrokenReference("routes.txt", "agency_id", route.agency_id)
    for trip in feed.trips.values():
        if trip.route_id not in feed.routes:
            raise BrokenReference("trips.txt", "route_id", trip.route_id)
        if trip.service_id not in feed.calendars:
            raise BrokenReference("trips.txt", "service_id", trip.service_id)
        if trip.shape_id is not None and trip.shape_id not in feed.shapes:
            raise BrokenReference("trips.txt", "shape_id", trip.shape_id)
    for trip_id, sts in feed.stop_times.items():
        if trip_id not in feed.trips:
            raise BrokenReference("stop_times.txt", "trip_id", trip_id)
        for st in sts:
            if st.stop_id not in feed.stops:
                raise BrokenReference("stop_times.txt", "stop_id", st.stop_id)
    for trip_id in feed.frequencies:
        if trip_id not in feed.trips:
            raise BrokenReference("frequencies.txt", "trip_id", trip_id)


def validate_feed(feed: GtfsFeed) -> list[ValidationIssue]:
    """Report semantic defects; an empty list means the feed is clean."""
    issues: list[ValidationIssue] = []

    for trip_id in sorted(feed.trips):
        sts = feed.stop_times.get(trip_id, [])
        if len(sts) < 2:
            issues.append(ValidationIssue(
                "TripTooShort", "stop_times.txt", trip_id,
                f"trip {trip_id!r} has {len(sts)} stop time(s); a trip is a sequence of two or more stops",
            ))
        for a, b in zip(sts, sts[1:]):
            if b.stop_sequence <= a.stop_sequence:
                issues.append(ValidationIssue(
                    "NonMonotonicStopSequence", "stop_times.txt", trip_id,
                    f"trip {trip_id!r}: stop_sequence {b.stop_sequence} after {a.stop_sequence}",
                ))
            if a.departure > b.arrival:
                issues.append(ValidationIssue(
                    "StopTimeOverlap", "stop_times.txt", trip_id,
                    f"trip {trip_id!r}: departure {format_gtfs_time(a.departure)} at sequence "
                    f"{a.stop_sequence} is after arrival {format_gtfs_time(b.arrival)} at {b.stop_sequence}",
                ))
        for st in sts:
            if st.arrival > st.departure:
                issues.append(ValidationIssue(
                    "ArrivalAfterDeparture", "stop_times.txt", trip_id,
                    f"trip {trip_id!r} sequence {st.stop_sequence}: arrival after departure",
                ))

    for service_id in sorted(feed.calendars):
        if not _calendar_ever_active(feed.calendars[service_id]):
            issues.append(ValidationIssue(
                "ServiceNeverActive", "calendar.txt", service_id,
                f"service {service_id!r} is active on no date",
            ))

    for stop_id in sorted(feed.stops):
        stop = feed.stops[stop_id]
        if not (-90.0 <= stop.lat <= 90.0 and -180.0 <= stop.lon <= 180.0):
            issues.append(ValidationIssue(
                "StopOutOfRange", "stops.txt", stop_id,
                f"stop {stop_id!r} has out-of-range coordinates ({stop.lat}, {stop.lon})",
            ))

    return issues


def _calendar_ever_active(cal: ServiceCalendar) -> bool:
    if cal.start_date > cal.end_date or not any(cal.weekday_flags):
        return False
    span = (cal.end_date - cal.start_date).days + 1
    if span >= 7:
        return True
    start_dow = cal.start_date.weekday()
    return any(cal.weekday_flags[(start_dow + i) % 7] for i in range(span))


# --- feed writing (round-trip support) -------------------------------------


def write_feed(feed: GtfsFeed, dest: str | Path) -> None:
    """Write the feed back to the eight CSV files under a directory."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)

    def emit(name: str, header: list[str], rows: list[list[str]]) -> None:
        with open(dest / name, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)

    emit("agency.txt", ["agency_id", "agency_name", "agency_timezone"],
         [[a.agency_id, a.name, a.timezone] for a in feed.agencies.values()])
    emit("calendar.txt", ["service_id", *_WEEKDAY_COLUMNS, "start_date", "end_date"],
         [[c.service_id, *("1" if f else "0" for f in c.weekday_flags),
           format_service_date(c.start_date), format_service_date(c.end_date)]
          for c in feed.calendars.values()])
    emit("frequencies.txt", ["trip_id", "start_time", "end_time", "headway_secs"],
         [[f.trip_id, format_gtfs_time(f.start_time), format_gtfs_time(f.end_time), str(f.headway_secs)]
          for freqs in feed.frequencies.values() for f in freqs])
    emit("routes.txt", ["route_id", "agency_id", "route_short_name", "route_long_name", "route_type"],
         [[r.route_id, r.agency_id, r.short_name, r.long_name, str(r.route_type)]
          for r in feed.routes.values()])
    emit("shapes.txt", ["shape_id", "shape_pt_lat", "shape_pt_lon", "shape_pt_sequence"],
         [[p.shape_id, repr(p.lat), repr(p.lon), str(p.sequence)]
          for pts in feed.shapes.values() for p in pts])
    emit("stop_times.txt", ["trip_id", "arrival_time", "departure_time", "stop_id", "stop_sequence"],
         [[s.trip_id, format_gtfs_time(s.arrival), format_gtfs_time(s.departure), s.stop_id, str(s.stop_sequence)]
          for sts in feed.stop_times.values() for s in sts])
    emit("stops.txt", ["stop_id", "stop_name", "stop_lat", "stop_lon"],
         [[s.stop_id, s.name, repr(s.lat), repr(s.lon)] for s in feed.stops.values()])
    emit("trips.txt", ["route_id", "service_id", "trip_id", "shape_id"],
         [[t.route_id, t.service_id, t.trip_id, t.shape_id or ""] for t in feed.trips.values()])
