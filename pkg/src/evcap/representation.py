"""Spatiotemporal frame representation of event streams.

An incoming stream is fixed to ``total_events`` points (padding short
streams, truncating long ones), split into three temporal levels (one frame
per ``n_epsilon`` events, one per ``2 * n_epsilon``, and one global frame),
rendered with the red-blue color map, and the global frame is additionally
cut into high-resolution tiles whose grid is picked from a pre-generated
aspect-ratio set. The resulting bundle keeps temporal frames and spatial
tiles in a fixed order so downstream encoders see a stable layout.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, ConfigError, ParseError
from .events import (
    EventStream,
    Polarity,
    RgbFrame,
    SensorGeometry,
    pad_stream,
    slice_by_count,
)

COLOR_POSITIVE = (255, 0, 0)
COLOR_NEGATIVE = (0, 0, 255)
COLOR_INACTIVE = (255, 255, 255)


@dataclass(frozen=True)
class EsrConfig:
    """Knobs for bundle assembly.

    total_events must be a positive multiple of 2 * n_epsilon so both frame
    counts come out integral. Defaults keep four level-1 frames.
    """

    n_epsilon: int = 20000
    total_events: int | None = None
    n_min: int = 1
    n_max: int = 6
    tile_size: int = 448
    tie_break_area_factor: float = 2.0

    def __post_init__(self) -> None:
        if self.n_epsilon < 1:
            raise ConfigError(f"n_epsilon must be >= 1, got {self.n_epsilon}")
        if self.total_events is None:
            object.__setattr__(self, "total_events", 4 * self.n_epsilon)
        if self.total_events <= 0 or self.total_events % (2 * self.n_epsilon) != 0:
            raise ConfigError(
                f"total_events ({self.total_events}) must be a positive multiple of "
                f"2 * n_epsilon ({2 * self.n_epsilon})"
            )
        if not (1 <= self.n_min <= self.n_max):
            raise ConfigError(f"need 1 <= n_min <= n_max, got ({self.n_min}, {self.n_max})")
        if self.tile_size < 1:
            raise ConfigError(f"tile_size must be >= 1, got {self.tile_size}")

    @property
    def level1_count(self) -> int:
        return self.total_events // self.n_epsilon

    @property
    def level2_count(self) -> int:
        return self.total_events // (2 * self.n_epsilon)


@dataclass(frozen=True)
class RatioSet:
    """Sorted, duplicate-free (columns, rows) tiling grids."""

    ratios: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.ratios)

    def __iter__(self):
        return iter(self.ratios)

    def __contains__(self, pair) -> bool:
        return tuple(pair) in self.ratios


@dataclass(frozen=True)
class MultiLevelEvents:
    """Temporal split output: fine, coarse, and global red-blue frames."""

    level1: tuple[RgbFrame, ...]
    level2: tuple[RgbFrame, ...]
    level3: RgbFrame


@dataclass(frozen=True)
class EsrBundle:
    """Temporal frames plus spatial tiles of the global frame.

    ``frames()`` yields everything in the canonical order: level-1 frames,
    level-2 frames, the global frame, then tiles row-major.
    """

    temporal: MultiLevelEvents
    chosen_ratio: tuple[int, int]
    patches: tuple[RgbFrame, ...]
    provenance: str = ""

    def frames(self) -> list[RgbFrame]:
        return [*self.temporal.level1, *self.temporal.level2, self.temporal.level3, *self.patches]

    def roles(self) -> list[str]:
        cols, rows = self.chosen_ratio
        out = [f"level1[{i}]" for i in range(len(self.temporal.level1))]
        out += [f"level2[{i}]" for i in range(len(self.temporal.level2))]
        out.append("level3")
        out += [f"patch[{r},{c}]" for r in range(rows) for c in range(cols)]
        return out

    def __len__(self) -> int:
        return len(self.temporal.level1) + len(self.temporal.level2) + 1 + len(self.patches)


def render_frame(events: EventStream, geometry: SensorGeometry | None = None) -> RgbFrame:
    """Count polarities per pixel and paint the red-blue color map.

    Positive-dominant pixels are red, negative-dominant blue, untouched
    pixels white. A positive/negative tie on an active pixel renders red so
    the result is order-invariant. PAD events are ignored entirely.
    """
    geo = geometry or events.geometry
    w, h = geo.width, geo.height
    p = events.p
    real = p != int(Polarity.PAD)
    x = events.x[real]
    y = events.y[real]
    if x.size and ((x < 0) | (x >= w) | (y < 0) | (y >= h)).any():
        bad = np.nonzero((x < 0) | (x >= w) | (y < 0) | (y >= h))[0][0]
        raise BoundsError(f"event at ({int(x[bad])}, {int(y[bad])}) outside {w}x{h}")
    flat = y.astype(np.int64) * w + x.astype(np.int64)
    pol = p[real]
    pos = np.bincount(flat[pol > 0], minlength=w * h)
    neg = np.bincount(flat[pol < 0], minlength=w * h)
    active = (pos + neg) > 0
    pixels = np.empty((h * w, 3), dtype=np.uint8)
    pixels[:] = COLOR_INACTIVE
    pixels[active & (pos >= neg)] = COLOR_POSITIVE
    pixels[active & (neg > pos)] = COLOR_NEGATIVE
    return RgbFrame(pixels.reshape(h, w, 3))


def fit_stream_length(stream: EventStream, total_events: int) -> EventStream:
    """Pad short streams with PAD events; truncate long ones to the earliest events."""
    if len(stream) > total_events:
        return EventStream(stream.geometry, stream.events[:total_events], stream.source_id)
    return pad_stream(stream, total_events)


def hierarchical_temporal_split(stream: EventStream, config: EsrConfig) -> MultiLevelEvents:
    """Render one frame per n_epsilon events, per 2*n_epsilon, and one global frame."""
    fixed = fit_stream_length(stream, config.total_events)
    level1 = tuple(render_frame(g) for g in slice_by_count(fixed, config.n_epsilon))
    level2 = tuple(render_frame(g) for g in slice_by_count(fixed, 2 * config.n_epsilon))
    return MultiLevelEvents(level1, level2, render_frame(fixed))


def generate_adaptive_ratios(n_min: int, n_max: int) -> RatioSet:
    """All (columns, rows) grids with n_min <= cols*rows <= n_max and each side <= n_max."""
    if not (1 <= n_min <= n_max):
        raise ConfigError(f"need 1 <= n_min <= n_max, got ({n_min}, {n_max})")
    ratios = sorted(
        {
            (i, j)
            for i in range(1, n_max + 1)
            for j in range(1, n_max + 1)
            if n_min <= i * j <= n_max
        }
    )
    return RatioSet(tuple(ratios))


def match_ratio(
    width: int, height: int, ratios: RatioSet, config: EsrConfig
) -> tuple[int, int]:
    """Pick the grid whose cols/rows ratio is closest to width/height.

    Ties are broken in scan order over the sorted set: a later candidate with
    more tiles only displaces the incumbent when its total tile area stays
    within tie_break_area_factor times the source area, which keeps near-square
    inputs from being blown up into many tiles.
    """
    if width < 1 or height < 1:
        raise ConfigError(f"frame dimensions must be >= 1, got {width}x{height}")
    if not len(ratios):
        raise ConfigError("ratio set is empty")
    aspect = width / height
    tile_area = config.tile_size * config.tile_size
    budget = config.tie_break_area_factor * width * height
    best: tuple[int, int] | None = None
    best_diff = float("inf")
    for cols, rows in ratios:
        diff = abs(aspect - cols / rows)
        if diff < best_diff:
            best, best_diff = (cols, rows), diff
        elif diff == best_diff and best is not None:
            if cols * rows > best[0] * best[1] and cols * rows * tile_area <= budget:
                best = (cols, rows)
    assert best is not None
    return best


def resize_frame(frame: RgbFrame, new_width: int, new_height: int) -> RgbFrame:
    """Bilinear resize with exact corner alignment, per channel."""
    if new_width < 1 or new_height < 1:
        raise ConfigError(f"resize targets must be >= 1, got {new_width}x{new_height}")
    src = frame.pixels.astype(np.float64)
    h, w = frame.height, frame.width

    def grid(src_len: int, dst_len: int) -> np.ndarray:
        if dst_len == 1 or src_len == 1:
            return np.zeros(dst_len)
        return np.arange(dst_len) * ((src_len - 1) / (dst_len - 1))

    gx = grid(w, new_width)
    gy = grid(h, new_height)
    x0 = np.floor(gx).astype(np.intp)
    y0 = np.floor(gy).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (gx - x0)[None, :, None]
    fy = (gy - y0)[:, None, None]
    top = src[y0[:, None], x0[None, :]] * (1 - fx) + src[y0[:, None], x1[None, :]] * fx
    bot = src[y1[:, None], x0[None, :]] * (1 - fx) + src[y1[:, None], x1[None, :]] * fx
    out = top * (1 - fy) + bot * fy
    return RgbFrame(np.rint(out).astype(np.uint8))


def spatial_split(frame: RgbFrame, ratio: tuple[int, int], tile_size: int) -> list[RgbFrame]:
    """Resize to a cols*rows grid of tile_size squares and cut it row-major."""
    cols, rows = ratio
    if cols < 1 or rows < 1:
        raise ConfigError(f"ratio sides must be >= 1, got {ratio}")
    resized = resize_frame(frame, cols * tile_size, rows * tile_size).pixels
    return [
        RgbFrame(resized[r * tile_size : (r + 1) * tile_size, c * tile_size : (c + 1) * tile_size])
        for r in range(rows)
        for c in range(cols)
    ]


def assemble_esr(stream: EventStream, config: EsrConfig | None = None) -> EsrBundle:
    """Full pipeline: temporal split, ratio match on the sensor shape, tiling.

    Every temporal frame is resized to tile_size squares so the bundle is a
    homogeneous frame stack of length N1 + N2 + 1 + cols*rows.
    """
    cfg = config or EsrConfig()
    temporal = hierarchical_temporal_split(stream, cfg)
    ratios = generate_adaptive_ratios(cfg.n_min, cfg.n_max)
    chosen = match_ratio(stream.geometry.width, stream.geometry.height, ratios, cfg)
    patches = tuple(spatial_split(temporal.level3, chosen, cfg.tile_size))
    square = MultiLevelEvents(
        tuple(resize_frame(f, cfg.tile_size, cfg.tile_size) for f in temporal.level1),
        tuple(resize_frame(f, cfg.tile_size, cfg.tile_size) for f in temporal.level2),
        resize_frame(temporal.level3, cfg.tile_size, cfg.tile_size),
    )
    return EsrBundle(square, chosen, patches, provenance=stream.source_id)


def split_image(image: RgbFrame, config: EsrConfig | None = None) -> list[RgbFrame]:
    """Apply the same global-plus-tiles treatment to an ordinary image."""
    cfg = config or EsrConfig()
    ratios = generate_adaptive_ratios(cfg.n_min, cfg.n_max)
    chosen = match_ratio(image.width, image.height, ratios, cfg)
    whole = resize_frame(image, cfg.tile_size, cfg.tile_size)
    return [whole, *spatial_split(image, chosen, cfg.tile_size)]


def write_ppm(frame: RgbFrame) -> bytes:
    """Binary P6 encoding."""
    header = f"P6\n{frame.width} {frame.height}\n255\n".encode("ascii")
    return header + frame.pixels.tobytes()


def read_ppm(data: bytes) -> RgbFrame:
    """Decode binary P6 as written by write_ppm (single whitespace tokens)."""
    parts = data.split(b"\n", 3)
    if len(parts) != 4 or parts[0] != b"P6":
        raise ParseError("not a binary P6 ppm")
    try:
        width, height = (int(v) for v in parts[1].split())
        maxval = int(parts[2])
    except ValueError as exc:
        raise ParseError("malformed ppm header") from exc
    if maxval != 255:
        raise ParseError(f"unsupported ppm maxval {maxval}")
    body = parts[3][: width * height * 3]
    if len(body) != width * height * 3:
        raise ParseError("truncated ppm body")
    return RgbFrame(np.frombuffer(body, dtype=np.uint8).reshape(height, width, 3).copy())


def export_bundle(bundle: EsrBundle, out_dir: str) -> list[str]:
    """Write numbered PPM frames plus a manifest.txt naming each frame's role."""
    os.makedirs(out_dir, exist_ok=True)
    names: list[str] = []
    lines: list[str] = []
    for i, (frame, role) in enumerate(zip(bundle.frames(), bundle.roles())):
        name = f"frame_{i:03d}.ppm"
        with open(os.path.join(out_dir, name), "wb") as fh:
            fh.write(write_ppm(frame))
        names.append(name)
        lines.append(f"{i} {name} {role}")
    cols, rows = bundle.chosen_ratio
    lines.append(f"# ratio {cols}x{rows} source {bundle.provenance}")
    with open(os.path.join(out_dir, "manifest.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return names
