"""Weight-free scan block: dual curve serialization around an SSM scan.

The volume is serialized along the Hilbert and the trans-Hilbert curve, each
sequence is run through the same SSM, both results are put back on the grid
and averaged. The average stands in for the learned projection that would
normally consume the concatenated sequences.

With a window size, the block runs inside every ``s x s`` window of a randomly
offset partition and is averaged over offsets (see :mod:`evscan.windowing`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import CurveKind, GridDims, deserialize, generate, serialize
from .ssm import DiscreteSsm, SsmParams, build_kernel, discretize, scan_convolutional
from .windowing import DEFAULT_SAMPLES, WindowOffset, WindowSet, full_enumeration, mc_average, partition, reassemble

DUAL_SCAN = (CurveKind.HILBERT, CurveKind.TRANS_HILBERT)


@dataclass(frozen=True, eq=False)
class ScanBlockConfig:
    """``curve_dim=3`` scans (x, y, channel) as one 3D grid; 2 scans each channel plane."""

    ssm: SsmParams | DiscreteSsm
    dims: GridDims | None = None
    kinds: tuple = DUAL_SCAN
    win_size: int | None = None
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    curve_dim: int = 2
    enumerate_offsets: bool = False

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.win_size is not None and self.win_size < 1:
            raise ValueError(f"window size must be >= 1, got {self.win_size}")
        if self.curve_dim not in (2, 3):
            raise ValueError(f"curve_dim must be 2 or 3, got {self.curve_dim}")
        if not self.kinds:
            raise ValueError("need at least one curve kind")
        object.__setattr__(self, "kinds", tuple(CurveKind(k) for k in self.kinds))

    @property
    def discrete(self) -> DiscreteSsm:
        return self.ssm if isinstance(self.ssm, DiscreteSsm) else discretize(self.ssm)


def _scan_planes(cfg: ScanBlockConfig, d: DiscreteSsm, vols: np.ndarray) -> np.ndarray:
    # vols: (..., C, h, w). Returns the averaged dual-scan output, same shape.
    c, h, w = vols.shape[-3:]
    dims = GridDims(w, h, c) if cfg.curve_dim == 3 else GridDims(w, h)
    kernel = build_kernel(d, dims.cell_count)
    total = np.zeros(vols.shape)
    for kind in cfg.kinds:
        path = generate(kind, dims)
        seq = serialize(path, vols)
        total += deserialize(path, scan_convolutional(kernel, seq))
    return total / len(cfg.kinds)


def run_hsfc_block(cfg: ScanBlockConfig, vol) -> np.ndarray:
    vol = np.asarray(vol, dtype=np.float64)
    if vol.ndim != 3:
        raise ValueError(f"volume must have shape (C, H, W), got {vol.shape}")
    if cfg.dims is not None:
        c, h, w = vol.shape
        expected = (cfg.dims.width, cfg.dims.height)
        if (w, h) != expected or (cfg.dims.depth != 1 and cfg.dims.depth != c):
            raise ValueError(f"volume {w}x{h}x{c} does not match configured dims {cfg.dims}")
    d = cfg.discrete

    if cfg.win_size is None:
        return _scan_planes(cfg, d, vol)

    def windowed(v, offset: WindowOffset):
        ws = partition(v, offset)
        scanned = _scan_planes(cfg, d, ws.windows)
        return reassemble(WindowSet(scanned, offset, ws.height, ws.width))

    if cfg.enumerate_offsets:
        return full_enumeration(windowed, vol, cfg.win_size)
    return mc_average(windowed, vol, cfg.win_size, cfg.samples, seed=cfg.seed)
