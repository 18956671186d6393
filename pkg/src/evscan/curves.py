"""Space-filling curve traversal orders over 2D and 3D grids.

Every generator returns a :class:`CurvePath`, an explicit list of ``(x, y, z)``
cells. 2D grids are 3D grids with ``depth == 1``.

The Hilbert generator is the generalized ("gilbert") recursion that splits a
cuboid spanned by a major axis ``a`` and two orthogonal axes ``b`` and ``c``.
It handles arbitrary side lengths; on power-of-two cubes every step is a unit
step.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "CurveKind",
    "CurvePath",
    "GridDims",
    "deserialize",
    "generate",
    "generate_hilbert",
    "generate_peano",
    "generate_reshape",
    "generate_trans_hilbert",
    "generate_zorder",
    "read_text",
    "serialize",
    "write_binary",
    "write_text",
]

_INDEX_MAX = np.iinfo(np.int64).max


class CurveKind(str, enum.Enum):
    HILBERT = "hilbert"
    TRANS_HILBERT = "trans_hilbert"
    ZORDER = "zorder"
    PEANO = "peano"
    RESHAPE = "reshape"


@dataclass(frozen=True)
class GridDims:
    """Grid extent in cells. ``depth`` is 1 for 2D grids."""

    width: int
    height: int
    depth: int = 1

    def __post_init__(self):
        for name in ("width", "height", "depth"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise TypeError(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
            object.__setattr__(self, name, int(value))
        if self.width * self.height * self.depth > _INDEX_MAX:
            raise ValueError("grid cell count overflows the index type")

    @classmethod
    def parse(cls, text: str) -> "GridDims":
        """Parse ``"WxH"`` or ``"WxHxD"``."""
        m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*(?:[xX]\s*(\d+))?\s*", text)
        if m is None:
            raise ValueError(f"cannot parse grid dims {text!r}; expected WxH or WxHxD")
        w, h, d = m.groups()
        return cls(int(w), int(h), int(d) if d is not None else 1)

    @property
    def cell_count(self) -> int:
        return self.width * self.height * self.depth

    @property
    def ndim(self) -> int:
        """Dimensionality used by the locality metrics (2 when depth is 1)."""
        return 2 if self.depth == 1 else 3

    @property
    def shape(self) -> tuple[int, ...]:
        """Array shape of a volume over this grid, slowest axis first."""
        if self.depth == 1:
            return (self.height, self.width)
        return (self.depth, self.height, self.width)

    def __str__(self):
        if self.depth == 1:
            return f"{self.width}x{self.height}"
        return f"{self.width}x{self.height}x{self.depth}"


@dataclass(frozen=True, eq=False)
class CurvePath:
    """Ordered traversal of every cell of ``dims``.

    ``points`` is an ``(L, 3)`` int64 array of ``(x, y, z)`` rows, marked
    read-only.
    """

    dims: GridDims
    points: np.ndarray
    kind: CurveKind
    _linear: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.int64, copy=True)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must have shape (L, 3), got {pts.shape}")
        if len(pts) != self.dims.cell_count:
            raise ValueError(f"path has {len(pts)} points, grid has {self.dims.cell_count} cells")
        upper = np.array([self.dims.width, self.dims.height, self.dims.depth])
        if (pts < 0).any() or (pts >= upper).any():
            raise ValueError("path leaves the grid")
        linear = pts[:, 0] + self.dims.width * (pts[:, 1] + self.dims.height * pts[:, 2])
        if np.bincount(linear, minlength=self.dims.cell_count).max() != 1:
            raise ValueError("path visits a cell more than once")
        pts.flags.writeable = False
        linear.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "kind", CurveKind(self.kind))
        object.__setattr__(self, "_linear", linear)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, CurvePath):
            return NotImplemented
        return self.dims == other.dims and self.kind == other.kind and np.array_equal(self.points, other.points)

    __hash__ = None

    @property
    def linear_indices(self) -> np.ndarray:
        """Row-major index ``x + W*(y + H*z)`` of each point, in path order."""
        return self._linear

    def step_lengths(self) -> np.ndarray:
        """L1 distance of each consecutive pair."""
        return np.abs(np.diff(self.points, axis=0)).sum(axis=1)


def _check_dims(dims) -> GridDims:
    if isinstance(dims, GridDims):
        return dims
    if isinstance(dims, str):
        return GridDims.parse(dims)
    return GridDims(*dims)


def _sgn(v: int) -> int:
    return (v > 0) - (v < 0)


def _gilbert3d(out, x, y, z, ax, ay, az, bx, by, bz, cx, cy, cz):
    # ``out`` is a triple of lists (xs, ys, zs); straight runs are appended whole.
    w = abs(ax + ay + az)
    h = abs(bx + by + bz)
    d = abs(cx + cy + cz)

    dax, day, daz = _sgn(ax), _sgn(ay), _sgn(az)
    dbx, dby, dbz = _sgn(bx), _sgn(by), _sgn(bz)
    dcx, dcy, dcz = _sgn(cx), _sgn(cy), _sgn(cz)

    if h == 1 and d == 1:
        _run(out, x, y, z, dax, day, daz, w)
        return
    if w == 1 and d == 1:
        _run(out, x, y, z, dbx, dby, dbz, h)
        return
    if w == 1 and h == 1:
        _run(out, x, y, z, dcx, dcy, dcz, d)
        return

    ax2, ay2, az2 = ax // 2, ay // 2, az // 2
    bx2, by2, bz2 = bx // 2, by // 2, bz // 2
    cx2, cy2, cz2 = cx // 2, cy // 2, cz // 2

    w2 = abs(ax2 + ay2 + az2)
    h2 = abs(bx2 + by2 + bz2)
    d2 = abs(cx2 + cy2 + cz2)

    # prefer even steps
    if (w2 % 2) and (w > 2):
        ax2, ay2, az2 = ax2 + dax, ay2 + day, az2 + daz
    if (h2 % 2) and (h > 2):
        bx2, by2, bz2 = bx2 + dbx, by2 + dby, bz2 + dbz
    if (d2 % 2) and (d > 2):
        cx2, cy2, cz2 = cx2 + dcx, cy2 + dcy, cz2 + dcz

    if (2 * w > 3 * h) and (2 * w > 3 * d):
        # wide case, split in w only
        _gilbert3d(out, x, y, z, ax2, ay2, az2, bx, by, bz, cx, cy, cz)
        _gilbert3d(out, x + ax2, y + ay2, z + az2,
                   ax - ax2, ay - ay2, az - az2, bx, by, bz, cx, cy, cz)
    elif 3 * h > 4 * d:
        # do not split in d
        _gilbert3d(out, x, y, z, bx2, by2, bz2, cx, cy, cz, ax2, ay2, az2)
        _gilbert3d(out, x + bx2, y + by2, z + bz2,
                   ax, ay, az, bx - bx2, by - by2, bz - bz2, cx, cy, cz)
        _gilbert3d(out,
                   x + (ax - dax) + (bx2 - dbx),
                   y + (ay - day) + (by2 - dby),
                   z + (az - daz) + (bz2 - dbz),
                   -bx2, -by2, -bz2,
                   cx, cy, cz,
                   -(ax - ax2), -(ay - ay2), -(az - az2))
    elif 3 * d > 4 * h:
        # do not split in h
        _gilbert3d(out, x, y, z, cx2, cy2, cz2, ax2, ay2, az2, bx, by, bz)
        _gilbert3d(out, x + cx2, y + cy2, z + cz2,
                   ax, ay, az, bx, by, bz, cx - cx2, cy - cy2, cz - cz2)
        _gilbert3d(out,
                   x + (ax - dax) + (cx2 - dcx),
                   y + (ay - day) + (cy2 - dcy),
                   z + (az - daz) + (cz2 - dcz),
                   -cx2, -cy2, -cz2,
                   -(ax - ax2), -(ay - ay2), -(az - az2),
                   bx, by, bz)
    else:
        # regular case, split in all w/h/d
        _gilbert3d(out, x, y, z, bx2, by2, bz2, cx2, cy2, cz2, ax2, ay2, az2)
        _gilbert3d(out, x + bx2, y + by2, z + bz2,
                   cx, cy, cz, ax2, ay2, az2, bx - bx2, by - by2, bz - bz2)
        _gilbert3d(out,
                   x + (bx2 - dbx) + (cx - dcx),
                   y + (by2 - dby) + (cy - dcy),
                   z + (bz2 - dbz) + (cz - dcz),
                   ax, ay, az,
                   -bx2, -by2, -bz2,
                   -(cx - cx2), -(cy - cy2), -(cz - cz2))
        _gilbert3d(out,
                   x + (ax - dax) + bx2 + (cx - dcx),
                   y + (ay - day) + by2 + (cy - dcy),
                   z + (az - daz) + bz2 + (cz - dcz),
                   -cx, -cy, -cz,
                   -(ax - ax2), -(ay - ay2), -(az - az2),
                   bx - bx2, by - by2, bz - bz2)
        _gilbert3d(out,
                   x + (ax - dax) + (bx2 - dbx),
                   y + (ay - day) + (by2 - dby),
                   z + (az - daz) + (bz2 - dbz),
                   -bx2, -by2, -bz2,
                   cx2, cy2, cz2,
                   -(ax - ax2), -(ay - ay2), -(az - az2))


def _axis_run(start, step, n):
    return range(start, start + step * n, step) if step else (start,) * n


def _run(out, x, y, z, dx, dy, dz, n):
    xs, ys, zs = out
    xs.extend(_axis_run(x, dx, n))
    ys.extend(_axis_run(y, dy, n))
    zs.extend(_axis_run(z, dz, n))


def _hilbert_points(width: int, height: int, depth: int) -> np.ndarray:
    out: tuple[list, list, list] = ([], [], [])
    # Entry at the origin; the longest side becomes the major axis.
    if width >= height and width >= depth:
        _gilbert3d(out, 0, 0, 0, width, 0, 0, 0, height, 0, 0, 0, depth)
    elif height >= width and height >= depth:
        _gilbert3d(out, 0, 0, 0, 0, height, 0, width, 0, 0, 0, 0, depth)
    else:
        _gilbert3d(out, 0, 0, 0, 0, 0, depth, width, 0, 0, 0, height, 0)
    return np.array(out, dtype=np.int64).T


def generate_hilbert(dims) -> CurvePath:
    """Generalized Hilbert curve over a grid of any side lengths.

    Starts at ``(0, 0, 0)``. Odd side lengths may force a few diagonal steps,
    but the path always visits every cell exactly once.
    """
    dims = _check_dims(dims)
    pts = _hilbert_points(dims.width, dims.height, dims.depth)
    return CurvePath(dims, pts, CurveKind.HILBERT)


def generate_trans_hilbert(dims) -> CurvePath:
    """Hilbert curve generated on x/y-swapped dims, with coordinates swapped back."""
    dims = _check_dims(dims)
    pts = _hilbert_points(dims.height, dims.width, dims.depth)
    return CurvePath(dims, pts[:, [1, 0, 2]], CurveKind.TRANS_HILBERT)


def _is_power_of(n: int, base: int) -> bool:
    while n > 1 and n % base == 0:
        n //= base
    return n == 1


def generate_zorder(dims) -> CurvePath:
    """Morton order. Bits interleave as x (least significant), then y, then z."""
    dims = _check_dims(dims)
    sizes = (dims.width, dims.height, dims.depth)
    if not all(_is_power_of(n, 2) for n in sizes):
        raise ValueError(f"Z-order needs power-of-two sides, got {dims}")
    nbits = max(n.bit_length() - 1 for n in sizes)
    z, y, x = np.indices((dims.depth, dims.height, dims.width), dtype=np.int64).reshape(3, -1)
    code = np.zeros_like(x)
    for bit in range(nbits):
        for axis, coord in enumerate((x, y, z)):
            code |= ((coord >> bit) & 1) << (3 * bit + axis)
    order = np.argsort(code, kind="stable")
    pts = np.stack([x[order], y[order], z[order]], axis=1)
    return CurvePath(dims, pts, CurveKind.ZORDER)


def generate_peano(dims) -> CurvePath:
    """Peano curve on grids whose sides are powers of three.

    Uses Peano's digit construction: the curve index is written in base 3 and
    its digits are dealt to the axes coarse-to-fine (z, y, x within a level, so
    x moves fastest). A digit ``t`` becomes ``2 - t`` whenever the digits
    already dealt to the other axes sum to an odd number.
    """
    dims = _check_dims(dims)
    sizes = (dims.width, dims.height, dims.depth)
    if not all(_is_power_of(n, 3) for n in sizes):
        raise ValueError(f"Peano curve needs power-of-three sides, got {dims}")
    levels = [_log3(n) for n in sizes]
    depth = max(levels)
    # Axis sequence for the digits, most significant first. An axis with fewer
    # levels only joins once its remaining digits fit.
    sequence = [axis for lvl in range(depth, 0, -1) for axis in (2, 1, 0) if levels[axis] >= lvl]
    n = dims.cell_count
    idx = np.arange(n, dtype=np.int64)
    digits = [(idx // 3 ** (len(sequence) - 1 - k)) % 3 for k in range(len(sequence))]
    coords = [np.zeros(n, dtype=np.int64) for _ in range(3)]
    axis_digit_sum = [np.zeros(n, dtype=np.int64) for _ in range(3)]
    total = np.zeros(n, dtype=np.int64)
    for axis, t in zip(sequence, digits):
        others = total - axis_digit_sum[axis]
        coords[axis] = 3 * coords[axis] + np.where(others % 2 == 1, 2 - t, t)
        axis_digit_sum[axis] += t
        total += t
    pts = np.stack(coords, axis=1)
    return CurvePath(dims, pts, CurveKind.PEANO)


def _log3(n: int) -> int:
    k = 0
    while n > 1:
        n //= 3
        k += 1
    return k


def generate_reshape(dims) -> CurvePath:
    """Row-major order: z outermost, then y, x innermost."""
    dims = _check_dims(dims)
    z, y, x = np.indices((dims.depth, dims.height, dims.width), dtype=np.int64).reshape(3, -1)
    return CurvePath(dims, np.stack([x, y, z], axis=1), CurveKind.RESHAPE)


_GENERATORS = {
    CurveKind.HILBERT: generate_hilbert,
    CurveKind.TRANS_HILBERT: generate_trans_hilbert,
    CurveKind.ZORDER: generate_zorder,
    CurveKind.PEANO: generate_peano,
    CurveKind.RESHAPE: generate_reshape,
}


def generate(kind, dims) -> CurvePath:
    """Dispatch to the generator for ``kind`` (a :class:`CurveKind` or its value)."""
    return _GENERATORS[CurveKind(kind)](dims)


def _volume_view(path: CurvePath, volume: np.ndarray) -> np.ndarray:
    shape = path.dims.shape
    if volume.shape[-len(shape):] != shape:
        raise ValueError(f"volume trailing shape {volume.shape[-len(shape):]} does not match grid {shape}")
    return volume.reshape(volume.shape[: volume.ndim - len(shape)] + (-1,))


def serialize(path: CurvePath, volume) -> np.ndarray:
    """Read the cells of ``volume`` in path order.

    ``volume`` has trailing shape ``(H, W)`` for 2D paths or ``(D, H, W)`` for
    3D paths; any leading axes are carried through, so the result has shape
    ``volume.shape[:-k] + (L,)``.
    """
    volume = np.asarray(volume)
    return _volume_view(path, volume)[..., path.linear_indices]


def deserialize(path: CurvePath, seq) -> np.ndarray:
    """Inverse of :func:`serialize`."""
    seq = np.asarray(seq)
    if seq.shape[-1:] != (len(path),):
        raise ValueError(f"sequence length {seq.shape[-1:]} does not match path length {len(path)}")
    flat = np.empty_like(seq)
    flat[..., path.linear_indices] = seq
    return flat.reshape(seq.shape[:-1] + path.dims.shape)


def write_text(path: CurvePath, dest) -> None:
    """One ``"x y z"`` line per point, in path order."""
    np.savetxt(dest, path.points, fmt="%d", delimiter=" ")


def read_text(src, dims, kind=CurveKind.HILBERT) -> CurvePath:
    pts = np.loadtxt(src, dtype=np.int64, ndmin=2)
    return CurvePath(_check_dims(dims), pts, kind)


def write_binary(path: CurvePath, dest) -> None:
    """Row-major linear indices as 32-bit little-endian unsigned integers."""
    if path.dims.cell_count > 2**32:
        raise ValueError("grid too large for 32-bit indices")
    data = path.linear_indices.astype("<u4").tobytes()
    if isinstance(dest, (str, Path)):
        Path(dest).write_bytes(data)
    else:
        dest.write(data)
