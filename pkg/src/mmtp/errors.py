"""Exception hierarchy shared across the planner."""

from __future__ import annotations


class MmtpError(Exception):
    """Base class for all planner errors."""


# --- GTFS ---------------------------------------------------------------

class MalformedTime(MmtpError):
    """A time field does not match H:MM:SS / HH:MM:SS with hours 0..47."""

    def __init__(self, text: str):
        super().__init__(f"malformed time: {text!r}")
        self.text = text


class MissingFile(MmtpError):
    """A required feed file is absent."""

    def __init__(self, name: str):
        super().__init__(f"missing required file: {name}")
        self.name = name


class ParseError(MmtpError):
    def __init__(self, file: str, line: int, reason: str):
        super().__init__(f"{file}:{line}: {reason}")
        self.file = file
        self.line = line
        self.reason = reason


class BrokenReference(MmtpError):
    """A field references an id that does not exist in the feed."""

    def __init__(self, file: str, field: str, value: str):
        super().__init__(f"{file}: {field} references unknown id {value!r}")
        self.file = file
        self.field = field
        self.value = value


# --- OSM ----------------------------------------------------------------

class XmlError(MmtpError):
    def __init__(self, position: tuple[int, int], reason: str):
        super().__init__(f"XML error at line {position[0]}, column {position[1]}: {reason}")
        self.position = position
        self.reason = reason


class EmptyNetwork(MmtpError):
    """The OSM document yields no routable street edges."""


# --- Graph --------------------------------------------------------------

class NoStopsLinked(MmtpError):
    """The feed has stops but none lie within the link radius of a street vertex."""


class NoVertexForMode(MmtpError):
    """No street vertex is permitted for the requested travel mode."""


class VersionMismatch(MmtpError):
    def __init__(self, found: object):
        super().__init__(f"unsupported graph format_version: {found!r}")
        self.found = found


class CorruptGraph(MmtpError):
    """Graph bytes are not a well-formed serialized graph."""


# --- Router -------------------------------------------------------------

BOUNDARY_MESSAGE = (
    "Trip is not possible. You might be trying to plan a trip outside the map boundary."
)
NO_PATH_MESSAGE = "No trip found."


class PlanError(MmtpError):
    """Planning failed; ``kind`` is 'boundary' or 'no_path'."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind
        self.message = message

    @classmethod
    def boundary(cls) -> "PlanError":
        return cls("boundary", BOUNDARY_MESSAGE)

    @classmethod
    def no_path(cls) -> "PlanError":
        return cls("no_path", NO_PATH_MESSAGE)
