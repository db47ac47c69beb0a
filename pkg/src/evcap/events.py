"""Event data model: polarities, sensor geometry, streams, and RGB frames.

Streams keep their events in a packed numpy record array so that slicing and
rendering stay cheap for multi-million event recordings. All operations are
pure: they never mutate their inputs and the backing arrays are marked
read-only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Iterable, Iterator

import numpy as np

from .errors import SizeError


class Polarity(enum.IntEnum):
    """Sign of the per-pixel intensity change; PAD marks filler events."""

    NEGATIVE = -1
    PAD = 0
    POSITIVE = 1


# Packed little-endian record layout shared by every stream.
EVENT_DTYPE = np.dtype([("t", "<i8"), ("x", "<i4"), ("y", "<i4"), ("p", "<i1")])


@dataclass(frozen=True)
class SensorGeometry:
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(
                f"sensor geometry must be at least 1x1, got {self.width}x{self.height}"
            )

    @property
    def pixel_count(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class Event:
    """A single intensity-change event: timestamp (us), pixel, polarity."""

    t: int
    x: int
    y: int
    p: Polarity


def _as_event_array(events) -> np.ndarray:
    arr = np.asarray(events)
    if arr.dtype != EVENT_DTYPE:
        raise TypeError(f"expected event records of dtype {EVENT_DTYPE}, got {arr.dtype}")
    return arr


@dataclass(frozen=True, eq=False)
class EventStream:
    """An ordered event recording bound to a sensor geometry.

    ``events`` is a read-only record array with fields t, x, y, p. Equality
    compares geometry and events; ``source_id`` is provenance metadata and is
    deliberately excluded so that format round-trips compare equal.
    """

    geometry: SensorGeometry
    events: np.ndarray
    source_id: str = ""

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(_as_event_array(self.events))
        arr.setflags(write=False)
        object.__setattr__(self, "events", arr)

    @classmethod
    def from_tuples(
        cls,
        geometry: SensorGeometry,
        rows: Iterable[tuple[int, int, int, int]],
        source_id: str = "",
    ) -> "EventStream":
        """Build a stream from (t, x, y, p) tuples with p in {-1, 0, 1}."""
        arr = np.array([tuple(r) for r in rows], dtype=EVENT_DTYPE)
        if arr.size == 0:
            arr = np.empty(0, dtype=EVENT_DTYPE)
        return cls(geometry, arr, source_id)

    @classmethod
    def empty(cls, geometry: SensorGeometry, source_id: str = "") -> "EventStream":
        return cls(geometry, np.empty(0, dtype=EVENT_DTYPE), source_id)

    @property
    def t(self) -> np.ndarray:
        return self.events["t"]

    @property
    def x(self) -> np.ndarray:
        return self.events["x"]

    @property
    def y(self) -> np.ndarray:
        return self.events["y"]

    @property
    def p(self) -> np.ndarray:
        return self.events["p"]

    def __len__(self) -> int:
        return len(self.events)

    def __getitem__(self, index: int) -> Event:
        rec = self.events[index]
        return Event(int(rec["t"]), int(rec["x"]), int(rec["y"]), Polarity(int(rec["p"])))

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return self.geometry == other.geometry and np.array_equal(self.events, other.events)


@dataclass(frozen=True, eq=False)
class RgbFrame:
    """An 8-bit RGB raster stored as a read-only (height, width, 3) array."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
            raise ValueError(f"expected (height, width, 3) uint8 pixels, got {arr.shape} {arr.dtype}")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def filled(cls, width: int, height: int, rgb: tuple[int, int, int] = (255, 255, 255)) -> "RgbFrame":
        arr = np.empty((height, width, 3), dtype=np.uint8)
        arr[:] = rgb
        return cls(arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RgbFrame):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True)
class Violation:
    """One broken stream invariant, locating the offending event."""

    index: int
    rule: str  # "order" or "bounds"
    message: str


def validate_stream(stream: EventStream) -> list[Violation]:
    """Check ordering and geometry bounds; returns [] iff the stream is valid."""
    out: list[Violation] = []
    t = stream.t
    if len(t) > 1:
        for i in np.nonzero(np.diff(t) < 0)[0]:
            idx = int(i) + 1
            out.append(
                Violation(idx, "order", f"event {idx} has t={int(t[idx])} before t={int(t[idx - 1])}")
            )
    geo = stream.geometry
    oob = (stream.x < 0) | (stream.x >= geo.width) | (stream.y < 0) | (stream.y >= geo.height)
    for i in np.nonzero(oob)[0]:
        idx = int(i)
        out.append(
            Violation(
                idx,
                "bounds",
                f"event {idx} at ({int(stream.x[idx])}, {int(stream.y[idx])}) "
                f"outside {geo.width}x{geo.height}",
            )
        )
    out.sort(key=lambda v: (v.index, v.rule))
    return out


def sort_events(stream: EventStream) -> EventStream:
    """Stable sort by timestamp; ties keep arrival order."""
    order = np.argsort(stream.t, kind="stable")
    return replace(stream, events=stream.events[order])


def pad_stream(stream: EventStream, target_count: int) -> EventStream:
    """Append PAD events at (0, 0) until the stream holds target_count events.

    Pad timestamps repeat the last real timestamp (0 for an empty stream) so
    sortedness is preserved. PAD events never contribute to rendering.
    """
    n = len(stream)
    if target_count < n:
        raise SizeError(f"cannot pad {n} events down to {target_count}")
    if target_count == n:
        return stream
    pad = np.zeros(target_count - n, dtype=EVENT_DTYPE)
    pad["t"] = int(stream.t[-1]) if n else 0
    pad["p"] = int(Polarity.PAD)
    return replace(stream, events=np.concatenate([stream.events, pad]))


def slice_by_count(stream: EventStream, events_per_group: int) -> list[EventStream]:
    """Cut the stream into contiguous groups of exactly events_per_group events."""
    if events_per_group < 1:
        raise SizeError(f"events_per_group must be >= 1, got {events_per_group}")
    n = len(stream)
    if n % events_per_group != 0:
        raise SizeError(
            f"stream length {n} is not divisible by group size {events_per_group}"
        )
    return [
        replace(stream, events=stream.events[i : i + events_per_group])
        for i in range(0, n, events_per_group)
    ]
