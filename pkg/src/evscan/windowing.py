"""Random window offset (RWO) partitioning and its Monte-Carlo average.

A feature volume of shape ``(C, H, W)`` is shifted cyclically by ``(-dh, -dw)``
and cut into non-overlapping ``s x s`` windows. The offset ``(dh, dw)`` is drawn
uniformly from ``{0..s-1}^2`` on every pass; at test time the output of a
pipeline is averaged over offsets, either all ``s**2`` of them or ``M`` sampled
ones.

Random streams come from :func:`layer_rng`: a PCG64 generator seeded by
``SeedSequence(seed, spawn_key=(layer,))``, so every layer index gets an
independent, reproducible stream from the same user seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

DEFAULT_SAMPLES = 8


@dataclass(frozen=True, order=True)
class WindowOffset:
    dh: int
    dw: int
    s: int

    def __post_init__(self):
        if self.s < 1:
            raise ValueError(f"window size must be >= 1, got {self.s}")
        if not (0 <= self.dh < self.s and 0 <= self.dw < self.s):
            raise ValueError(f"offset ({self.dh}, {self.dw}) outside [0, {self.s - 1}]")


def layer_rng(seed=None, layer: int = 0) -> np.random.Generator:
    """Independent generator for one layer index under a common seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(layer,))))


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return layer_rng(rng)


def sample_offset(s: int, rng=None) -> WindowOffset:
    """Uniform offset in ``{0..s-1}^2``. ``rng`` is a seed or a Generator."""
    if s < 1:
        raise ValueError(f"window size must be >= 1, got {s}")
    dh, dw = _as_rng(rng).integers(0, s, size=2)
    return WindowOffset(int(dh), int(dw), s)


def all_offsets(s: int) -> list[WindowOffset]:
    return [WindowOffset(dh, dw, s) for dh in range(s) for dw in range(s)]


def sample_offsets(s: int, count: int, rng=None, replace: bool = True) -> list[WindowOffset]:
    if count < 1:
        raise ValueError(f"sample count must be >= 1, got {count}")
    if s < 1:
        raise ValueError(f"window size must be >= 1, got {s}")
    if not replace and count > s * s:
        raise ValueError(f"cannot draw {count} distinct offsets from {s * s}")
    flat = _as_rng(rng).choice(s * s, size=count, replace=replace)
    return [WindowOffset(int(i) // s, int(i) % s, s) for i in flat]


@dataclass(frozen=True, eq=False)
class OffsetMask:
    labels: np.ndarray
    region_count: int

    def to_text(self) -> str:
        return "\n".join(" ".join(str(v) for v in row) for row in self.labels) + "\n"


def _bands(offset: int, s: int):
    if offset > 0:
        return (slice(0, -s), slice(-s, -offset), slice(-offset, None))
    return (slice(0, None),)


def build_mask(height: int, width: int, s: int, offset: WindowOffset | None = None, rng=None) -> OffsetMask:
    """Region labels of the shifted-window layout.

    Rows split into the bands ``[0, H-s)``, ``[H-s, H-dh)``, ``[H-dh, H)`` when
    ``dh > 0`` and form one band otherwise; columns likewise with ``dw``.
    Labels count up over the bands in row-major order. When ``H == s`` (or
    ``W == s``) the leading band is empty, so its label is skipped but still
    counted in ``region_count``.
    """
    if s < 1:
        raise ValueError(f"window size must be >= 1, got {s}")
    if s > height or s > width:
        raise ValueError(f"window size {s} exceeds the {height}x{width} grid")
    if offset is None:
        offset = sample_offset(s, rng)
    elif offset.s != s:
        raise ValueError(f"offset drawn for window size {offset.s}, mask uses {s}")
    labels = np.zeros((height, width), dtype=np.int64)
    cnt = 0
    for h in _bands(offset.dh, s):
        for w in _bands(offset.dw, s):
            labels[h, w] = cnt
            cnt += 1
    labels.flags.writeable = False
    return OffsetMask(labels, cnt)


@dataclass(frozen=True, eq=False)
class WindowSet:
    """Windows in row-major window order, shape ``(n_windows, C, s, s)``."""

    windows: np.ndarray
    offset: WindowOffset
    height: int
    width: int

    @property
    def grid_shape(self) -> tuple[int, int]:
        s = self.offset.s
        return (-(-self.height // s), -(-self.width // s))


def _check_volume(vol) -> np.ndarray:
    vol = np.asarray(vol)
    if vol.ndim != 3:
        raise ValueError(f"feature volume must have shape (C, H, W), got {vol.shape}")
    return vol


def partition(vol, offset: WindowOffset) -> WindowSet:
    """Shift ``vol`` by ``(-dh, -dw)`` cyclically and tile it into ``s x s`` windows.

    Sides that are not a multiple of ``s`` are first reflect-padded at the
    bottom/right; :func:`reassemble` crops the padding again.
    """
    vol = _check_volume(vol)
    c, h, w = vol.shape
    s = offset.s
    ph, pw = -h % s, -w % s
    if ph or pw:
        vol = np.pad(vol, ((0, 0), (0, ph), (0, pw)), mode="reflect")
    shifted = np.roll(vol, (-offset.dh, -offset.dw), axis=(1, 2))
    nh, nw = shifted.shape[1] // s, shifted.shape[2] // s
    windows = shifted.reshape(c, nh, s, nw, s).transpose(1, 3, 0, 2, 4).reshape(nh * nw, c, s, s)
    return WindowSet(windows, offset, h, w)


def reassemble(ws: WindowSet) -> np.ndarray:
    s = ws.offset.s
    nh, nw = ws.grid_shape
    n, c = ws.windows.shape[:2]
    if n != nh * nw or ws.windows.shape[2:] != (s, s):
        raise ValueError(f"window array {ws.windows.shape} does not fit a {nh}x{nw} grid of {s}x{s} windows")
    shifted = ws.windows.reshape(nh, nw, c, s, s).transpose(2, 0, 3, 1, 4).reshape(c, nh * s, nw * s)
    vol = np.roll(shifted, (ws.offset.dh, ws.offset.dw), axis=(1, 2))
    return vol[:, : ws.height, : ws.width]


Pipeline = Callable[[np.ndarray, WindowOffset], np.ndarray]


def window_mean_pipeline(vol, offset: WindowOffset) -> np.ndarray:
    """Replace every window by its per-channel mean. Linear in ``vol``."""
    ws = partition(vol, offset)
    pooled = np.broadcast_to(ws.windows.mean(axis=(2, 3), keepdims=True), ws.windows.shape)
    return reassemble(WindowSet(pooled, offset, ws.height, ws.width))


def _ordered_mean(pipeline: Pipeline, vol, offsets) -> np.ndarray:
    # Summing in sorted offset order makes the result independent of draw order.
    outputs = [np.asarray(pipeline(vol, o), dtype=np.float64) for o in sorted(offsets)]
    return np.stack(outputs).sum(axis=0) / len(outputs)


def full_enumeration(pipeline: Pipeline, vol, s: int) -> np.ndarray:
    """Exact expectation of ``pipeline`` over all ``s**2`` offsets."""
    return _ordered_mean(pipeline, _check_volume(vol), all_offsets(s))


def mc_average(pipeline: Pipeline, vol, s: int, samples: int = DEFAULT_SAMPLES, seed=None,
               replace: bool = True, layer: int = 0) -> np.ndarray:
    """Monte-Carlo estimate of :func:`full_enumeration` from ``samples`` offsets.

    Offsets are i.i.d. uniform by default; ``replace=False`` draws distinct
    offsets, so ``samples == s**2`` reproduces the exact expectation.
    """
    vol = _check_volume(vol)
    offsets = sample_offsets(s, samples, layer_rng(seed, layer), replace=replace)
    return _ordered_mean(pipeline, vol, offsets)
