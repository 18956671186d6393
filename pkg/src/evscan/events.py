"""Event streams: text parsing, frame grouping, voxel grids, EVXGRID1 files.

Text format, one event per line::

    t x y p

with ``t`` in seconds and ``p`` in ``{0, 1}`` or ``{-1, 1}`` (0 maps to -1).
An optional first line ``W H`` gives the sensor size. Blank lines and lines
starting with ``#`` are ignored.

EVXGRID1 binary layout, all little-endian: the 8-byte magic ``EVXGRID1``,
then ``B, H, W`` as uint32, then ``B*H*W`` float32 values in bin-major,
row-major order.
"""

from __future__ import annotations

import io
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_BINS = 5
MAGIC = b"EVXGRID1"
_HEADER = struct.Struct("<8sIII")

EVENT_DTYPE = np.dtype([("x", np.int64), ("y", np.int64), ("t", np.float64), ("p", np.int8)])


class Event(NamedTuple):
    x: int
    y: int
    t: float
    p: int


class EventParseError(ValueError):
    def __init__(self, lineno: int, line: str, reason: str):
        super().__init__(f"line {lineno}: {reason}: {line.strip()!r}")
        self.lineno = lineno


def events_from_list(events) -> np.ndarray:
    """Structured event array from an iterable of ``Event``/``(x, y, t, p)`` tuples."""
    return np.array([tuple(e) for e in events], dtype=EVENT_DTYPE)


@dataclass(frozen=True, eq=False)
class ParsedEvents:
    events: np.ndarray
    width: int | None = None
    height: int | None = None
    nonmonotonic_lines: tuple[int, ...] = ()

    def __len__(self):
        return len(self.events)


def _parse_polarity(token: str) -> int:
    value = int(token)
    if value in (1, -1):
        return value
    if value == 0:
        return -1
    raise ValueError(f"polarity must be 0, 1 or -1, got {value}")


def parse_events(text) -> ParsedEvents:
    """Parse event text. ``text`` is a string or a readable text stream."""
    stream = io.StringIO(text) if isinstance(text, str) else text
    rows = []
    width = height = None
    last_t = -np.inf
    flagged = []
    seen_data = False
    for lineno, line in enumerate(stream, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if not seen_data and width is None and len(tokens) == 2:
            try:
                width, height = int(tokens[0]), int(tokens[1])
            except ValueError as exc:
                raise EventParseError(lineno, line, "bad header") from exc
            if width < 1 or height < 1:
                raise EventParseError(lineno, line, "sensor size must be positive")
            continue
        if len(tokens) != 4:
            raise EventParseError(lineno, line, f"expected 4 fields, got {len(tokens)}")
        try:
            t = float(tokens[0])
            x, y = int(tokens[1]), int(tokens[2])
            p = _parse_polarity(tokens[3])
        except ValueError as exc:
            raise EventParseError(lineno, line, str(exc)) from exc
        if not np.isfinite(t):
            raise EventParseError(lineno, line, "timestamp is not finite")
        if x < 0 or y < 0:
            raise EventParseError(lineno, line, "negative pixel coordinate")
        if width is not None and (x >= width or y >= height):
            raise EventParseError(lineno, line, f"pixel outside the {width}x{height} sensor")
        if t < last_t:
            flagged.append(lineno)
        last_t = t
        seen_data = True
        rows.append((x, y, t, p))
    if flagged:
        logger.warning("timestamps decrease at %d line(s), first at line %d", len(flagged), flagged[0])
    return ParsedEvents(np.array(rows, dtype=EVENT_DTYPE), width, height, tuple(flagged))


def load_events(path) -> ParsedEvents:
    with open(path, encoding="utf-8") as fh:
        return parse_events(fh)


@dataclass(frozen=True, eq=False)
class EventGroup:
    """Events with ``window_start <= t < window_end``, sorted by time."""

    events: np.ndarray
    window_start: float
    window_end: float

    def __len__(self):
        return len(self.events)

    @property
    def duration(self) -> float:
        return self.window_end - self.window_start


def _as_event_array(events) -> np.ndarray:
    if isinstance(events, ParsedEvents):
        return events.events
    if isinstance(events, np.ndarray) and events.dtype == EVENT_DTYPE:
        return events
    return events_from_list(events)


def group_events(events, frame_timestamps) -> tuple[list[EventGroup], int]:
    """Split events into the half-open windows ``[s_{k-1}, s_k)``.

    Returns the groups and the number of events dropped for falling before
    the first or at/after the last timestamp.
    """
    ev = _as_event_array(events)
    bounds = np.asarray(frame_timestamps, dtype=np.float64)
    if bounds.ndim != 1 or len(bounds) < 2:
        raise ValueError("need at least two frame timestamps")
    if not np.all(np.diff(bounds) > 0):
        raise ValueError("frame timestamps must be strictly increasing")
    order = np.argsort(ev["t"], kind="stable")
    ev = ev[order]
    cuts = np.searchsorted(ev["t"], bounds, side="left")
    groups = [
        EventGroup(ev[cuts[k]:cuts[k + 1]], float(bounds[k]), float(bounds[k + 1]))
        for k in range(len(bounds) - 1)
    ]
    dropped = int(cuts[0] + (len(ev) - cuts[-1]))
    return groups, dropped


def single_group(events) -> EventGroup:
    """One group spanning all events; the end is nudged just past the last timestamp."""
    ev = _as_event_array(events)
    if len(ev) == 0:
        raise ValueError("no events")
    ev = ev[np.argsort(ev["t"], kind="stable")]
    start = float(ev["t"][0])
    end = float(np.nextafter(ev["t"][-1], np.inf))
    return EventGroup(ev, start, end)


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """``(B, H, W)`` accumulation held in float64."""

    values: np.ndarray = field(repr=False)

    @property
    def bins(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]


def normalized_timestamps(group: EventGroup, bins: int) -> np.ndarray:
    """``(B - 1)(t - T_k) / dT`` with ``T_k`` the window start."""
    if not group.duration > 0:
        raise ValueError(f"window [{group.window_start}, {group.window_end}) has no length")
    return (bins - 1) * (group.events["t"] - group.window_start) / group.duration


def voxelize(group: EventGroup, bins: int = DEFAULT_BINS, height: int | None = None,
             width: int | None = None) -> VoxelGrid:
    """Spread each event's polarity over its two nearest time bins.

    Bin ``b`` receives ``p * max(0, 1 - |b - t*|)`` at the event's pixel.
    """
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    ev = group.events
    if height is None or width is None:
        raise ValueError("voxelize needs the sensor height and width")
    if len(ev) and (ev["x"].min() < 0 or ev["y"].min() < 0 or ev["x"].max() >= width or ev["y"].max() >= height):
        raise ValueError(f"event pixel outside the {width}x{height} sensor")
    tn = normalized_timestamps(group, bins)
    grid = np.zeros((bins, height, width), dtype=np.float64)
    if len(ev) == 0:
        return VoxelGrid(grid)
    lo = np.clip(np.floor(tn).astype(np.int64), 0, bins - 1)
    frac = tn - lo
    p = ev["p"].astype(np.float64)
    np.add.at(grid, (lo, ev["y"], ev["x"]), p * np.maximum(0.0, 1.0 - frac))
    upper = (lo + 1 < bins) & (frac > 0)
    np.add.at(grid, (lo[upper] + 1, ev["y"][upper], ev["x"][upper]), p[upper] * frac[upper])
    return VoxelGrid(grid)


def write_voxel_grid(values, dest) -> None:
    """Write a ``(B, H, W)`` array (or :class:`VoxelGrid`) as EVXGRID1."""
    arr = values.values if isinstance(values, VoxelGrid) else np.asarray(values)
    if arr.ndim != 3:
        raise ValueError(f"voxel data must be 3-D, got shape {arr.shape}")
    b, h, w = arr.shape
    data = _HEADER.pack(MAGIC, b, h, w) + np.ascontiguousarray(arr, dtype="<f4").tobytes()
    if isinstance(dest, (str, Path)):
        Path(dest).write_bytes(data)
    else:
        dest.write(data)


def read_voxel_grid(src) -> np.ndarray:
    data = Path(src).read_bytes() if isinstance(src, (str, Path)) else src.read()
    if len(data) < _HEADER.size:
        raise ValueError("file too short for an EVXGRID1 header")
    magic, b, h, w = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    expected = _HEADER.size + 4 * b * h * w
    if len(data) != expected:
        raise ValueError(f"EVXGRID1 payload is {len(data)} bytes, header implies {expected}")
    return np.frombuffer(data, dtype="<f4", offset=_HEADER.size).reshape(b, h, w).astype(np.float32)


def voxel_csv(values) -> str:
    """Nonzero cells as ``bin,y,x,value`` lines."""
    arr = values.values if isinstance(values, VoxelGrid) else np.asarray(values)
    lines = ["bin,y,x,value"]
    for b, y, x in zip(*np.nonzero(arr)):
        lines.append(f"{b},{y},{x},{float(arr[b, y, x]):.9g}")
    return "\n".join(lines) + "\n"
