"""Readers and writers between on-disk event formats and EventStream.

Three formats are supported:

* csv    -- UTF-8 text lines "t,x,y,p" with p in {1, -1}
* evt1   -- this toolkit's canonical binary interchange format (see below)
* atis40 -- 40-bit / 5-byte records as produced by ATIS-style recorders

EVT1 layout, all little-endian: magic b"EVT1", u16 width, u16 height,
u64 event count, then count records of (u64 t_us, u16 x, u16 y, u8 polarity)
where polarity is 0=negative, 1=positive, 2=pad.
"""

from __future__ import annotations

import enum
import struct

import numpy as np

from .errors import BoundsError, ParseError
from .events import EVENT_DTYPE, EventStream, SensorGeometry, sort_events

EVT1_MAGIC = b"EVT1"
_EVT1_HEADER = struct.Struct("<4sHHQ")
_EVT1_RECORD = np.dtype([("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "u1")])

ATIS40_RECORD_SIZE = 5


class FormatKind(enum.Enum):
    CSV = "csv"
    EVT1 = "evt1"
    ATIS40 = "atis40"


def _check_bounds(x: np.ndarray, y: np.ndarray, geometry: SensorGeometry, what: str) -> None:
    oob = (x < 0) | (x >= geometry.width) | (y < 0) | (y >= geometry.height)
    if oob.any():
        i = int(np.nonzero(oob)[0][0])
        raise BoundsError(
            f"{what}: event {i} at ({int(x[i])}, {int(y[i])}) outside "
            f"{geometry.width}x{geometry.height}"
        )


def parse_csv(data: bytes, geometry: SensorGeometry, source_id: str = "") -> EventStream:
    """Parse "t,x,y,p" lines; blank lines and '#' comments are skipped."""
    rows: list[tuple[int, int, int, int]] = []
    for lineno, raw in enumerate(data.decode("utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ParseError(f"line {lineno}: expected 4 comma-separated fields, got {len(parts)}")
        try:
            t, x, y, p = (int(v) for v in parts)
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-integer field in {line!r}") from exc
        if p not in (1, -1):
            raise ParseError(f"line {lineno}: polarity must be 1 or -1, got {p}")
        if t < 0:
            raise ParseError(f"line {lineno}: negative timestamp {t}")
        if not (0 <= x < geometry.width and 0 <= y < geometry.height):
            raise BoundsError(
                f"line {lineno}: event at ({x}, {y}) outside {geometry.width}x{geometry.height}"
            )
        rows.append((t, x, y, p))
    return sort_events(EventStream.from_tuples(geometry, rows, source_id))


def parse_evt_bin(data: bytes, source_id: str = "") -> EventStream:
    """Decode an EVT1 buffer; geometry comes from the header."""
    if len(data) < _EVT1_HEADER.size:
        raise ParseError(f"EVT1 header needs {_EVT1_HEADER.size} bytes, got {len(data)}")
    magic, width, height, count = _EVT1_HEADER.unpack_from(data)
    if magic != EVT1_MAGIC:
        raise ParseError(f"bad magic {magic!r}, expected {EVT1_MAGIC!r}")
    expected = _EVT1_HEADER.size + count * _EVT1_RECORD.itemsize
    if len(data) < expected:
        raise ParseError(
            f"truncated payload: header declares {count} events ({expected} bytes), "
            f"got {len(data)} bytes"
        )
    geometry = SensorGeometry(width, height)
    raw = np.frombuffer(data, dtype=_EVT1_RECORD, count=count, offset=_EVT1_HEADER.size)
    if raw.size and int(raw["p"].max()) > 2:
        i = int(np.nonzero(raw["p"] > 2)[0][0])
        raise ParseError(f"record {i}: polarity byte {int(raw['p'][i])} > 2")
    arr = np.empty(count, dtype=EVENT_DTYPE)
    arr["t"] = raw["t"]
    arr["x"] = raw["x"]
    arr["y"] = raw["y"]
    # polarity byte 0/1/2 -> -1/+1/0
    arr["p"] = np.choose(raw["p"].astype(np.intp), [-1, 1, 0])
    _check_bounds(arr["x"], arr["y"], geometry, "EVT1")
    return sort_events(EventStream(geometry, arr, source_id))


def write_evt_bin(stream: EventStream) -> bytes:
    """Encode a stream as EVT1; parse_evt_bin(write_evt_bin(s)) == s."""
    header = _EVT1_HEADER.pack(
        EVT1_MAGIC, stream.geometry.width, stream.geometry.height, len(stream)
    )
    raw = np.empty(len(stream), dtype=_EVT1_RECORD)
    raw["t"] = stream.t
    raw["x"] = stream.x
    raw["y"] = stream.y
    # polarity -1/+1/0 -> byte 0/1/2
    raw["p"] = np.choose(stream.p.astype(np.intp) + 1, [0, 2, 1])
    return header + raw.tobytes()


def parse_atis40(data: bytes, geometry: SensorGeometry, source_id: str = "") -> EventStream:
    """Decode 5-byte ATIS records: x, y, polarity bit + 23-bit microsecond t."""
    if len(data) % ATIS40_RECORD_SIZE != 0:
        raise ParseError(
            f"ATIS40 payload must be a multiple of {ATIS40_RECORD_SIZE} bytes, got {len(data)}"
        )
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, ATIS40_RECORD_SIZE).astype(np.int64)
    arr = np.empty(raw.shape[0], dtype=EVENT_DTYPE)
    arr["x"] = raw[:, 0]
    arr["y"] = raw[:, 1]
    arr["p"] = np.where(raw[:, 2] & 0x80, 1, -1)
    arr["t"] = ((raw[:, 2] & 0x7F) << 16) | (raw[:, 3] << 8) | raw[:, 4]
    _check_bounds(arr["x"], arr["y"], geometry, "ATIS40")
    return sort_events(EventStream(geometry, arr, source_id))


def detect_format(path: str, leading: bytes) -> FormatKind:
    """Classify a file by magic bytes, then extension; csv is the fallback."""
    if leading[:4] == EVT1_MAGIC:
        return FormatKind.EVT1
    if str(path).lower().endswith(".bin"):
        return FormatKind.ATIS40
    return FormatKind.CSV


def parse_any(path: str, data: bytes, geometry: SensorGeometry | None = None) -> EventStream:
    """Dispatch on detect_format; csv and atis40 require an explicit geometry."""
    kind = detect_format(path, data[:4])
    if kind is FormatKind.EVT1:
        return parse_evt_bin(data, source_id=str(path))
    if geometry is None:
        raise ParseError(f"{kind.value} input needs an explicit sensor geometry")
    if kind is FormatKind.ATIS40:
        return parse_atis40(data, geometry, source_id=str(path))
    return parse_csv(data, geometry, source_id=str(path))
