"""Locality statistics of curve paths.

Segment statistics count, for every consecutive pair of points, whether the
step is a jump (Euclidean length above one) and in which axes it stands
still. Ratios are exact :class:`fractions.Fraction` values normalized by
``D * (cells - 1)``.

A jump segment that moves along ``m > 1`` axes at once is counted ``m - 1``
times (once for every axis it crosses beyond the first); a jump along a single
axis counts once. In 2D every row wrap moves along exactly two axes, so this
is the plain number of jump segments there. In 3D it is the counting that
makes the row-major closed form come out exact.

The space-to-linear ratio (SLR) compares the squared distance of two points,
with the grid scaled into the unit square, against the distance of their curve
parameters. Cell ``i`` of the path sits at parameter ``i / L`` for ``L`` cells,
i.e. each cell owns an interval of length ``1 / L`` of the unit parameter
range.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .curves import CurveKind, CurvePath, generate

HILBERT_SLR = 6


@dataclass(frozen=True)
class SegmentStats:
    total_segments: int
    jump_count: int
    jump_segments: int
    still_count_per_dim: tuple[int, ...]
    jump_ratio: Fraction
    still_ratio: Fraction

    @property
    def ndim(self) -> int:
        return len(self.still_count_per_dim)


@dataclass(frozen=True)
class SlrResult:
    max_ratio: float
    argmax_pair: tuple[float, float]
    argmax_index: tuple[int, int]
    exhaustive: bool
    pairs_evaluated: int


def segment_stats(path: CurvePath) -> SegmentStats:
    if len(path) < 2:
        raise ValueError("segment statistics need a path with at least two points")
    ndim = path.dims.ndim
    steps = np.diff(path.points[:, :ndim], axis=0)
    moved_axes = np.count_nonzero(steps, axis=1)
    is_jump = (steps**2).sum(axis=1) > 1
    jump_count = int(np.where(is_jump, np.maximum(moved_axes - 1, 1), 0).sum())
    still = tuple(int(v) for v in (steps == 0).sum(axis=0))
    total = len(path) - 1
    norm = ndim * total
    return SegmentStats(
        total_segments=total,
        jump_count=jump_count,
        jump_segments=int(is_jump.sum()),
        still_count_per_dim=still,
        jump_ratio=Fraction(jump_count, norm),
        still_ratio=Fraction(sum(still), norm),
    )


def closed_form_stats(n: int, d: int, kind) -> tuple[Fraction, Fraction]:
    """Closed-form (jump_ratio, still_ratio) for row-major or Hilbert order on an ``n**d`` grid."""
    kind = CurveKind(kind)
    if n < 2:
        raise ValueError(f"grid side must be >= 2, got {n}")
    if d not in (2, 3):
        raise ValueError(f"dimensionality must be 2 or 3, got {d}")
    segments = n**d - 1
    norm = d * segments
    if kind is CurveKind.RESHAPE:
        geometric = Fraction(segments, n - 1)  # 1 + n + ... + n**(d-1)
        jump = (geometric - d) / norm
        still = (d * n**d - n * geometric) / norm
        return jump, still
    if kind in (CurveKind.HILBERT, CurveKind.TRANS_HILBERT):
        return Fraction(0), Fraction((d - 1) * segments, norm)
    raise ValueError(f"no closed form for {kind.value}")


def reshape_slr(order: int) -> int:
    """SLR of row-major order on a ``2**order`` square: ``4**n - 2**(n+1) + 2``."""
    return 4**order - 2 ** (order + 1) + 2


def _normalized_coords(path: CurvePath) -> np.ndarray:
    dims = path.dims
    scale = np.array([dims.width, dims.height], dtype=np.float64)
    return (path.points[:, :2] + 0.5) / scale


def empirical_slr(path: CurvePath, pair_budget: int = 1 << 25, seed: int = 0) -> SlrResult:
    """Maximum space-to-linear ratio over point pairs of a 2D path.

    All pairs are scanned when ``L**2 <= pair_budget``. Otherwise every gap up
    to a small cutoff plus geometrically spaced larger gaps are scanned, each
    with a seeded random subset of start indices when the budget runs short.
    """
    if path.dims.depth != 1:
        raise ValueError("SLR is defined for 2D paths only")
    n = len(path)
    if n < 2:
        raise ValueError("SLR needs a path with at least two points")
    pts = _normalized_coords(path)

    exhaustive = n * n <= pair_budget
    if exhaustive:
        gaps = np.arange(1, n)
        per_gap = None
    else:
        dense = min(n - 1, 64)
        sparse = np.geomspace(dense, n - 1, num=64).astype(np.int64)
        gaps = np.unique(np.concatenate([np.arange(1, dense + 1), sparse]))
        per_gap = max(1, pair_budget // len(gaps))
    rng = np.random.default_rng(seed)

    best = -1.0
    best_pair = (0, 1)
    evaluated = 0
    for g in gaps:
        g = int(g)
        starts = None
        if per_gap is not None and n - g > per_gap:
            starts = np.sort(rng.choice(n - g, size=per_gap, replace=False))
            diff = pts[starts + g] - pts[starts]
        else:
            diff = pts[g:] - pts[:-g]
        ratio = (diff**2).sum(axis=1) * (n / g)
        k = int(np.argmax(ratio))
        evaluated += len(ratio)
        if ratio[k] > best:
            best = float(ratio[k])
            i = int(starts[k]) if starts is not None else k
            best_pair = (i, i + g)
    i, j = best_pair
    return SlrResult(
        max_ratio=best,
        argmax_pair=(i / n, j / n),
        argmax_index=best_pair,
        exhaustive=exhaustive,
        pairs_evaluated=evaluated,
    )


REPORT_COLUMNS = ("kind", "N", "D", "jump_ratio", "still_ratio", "slr")


def locality_rows(kinds, sizes, dims=(2,), pair_budget: int = 1 << 25) -> list[dict]:
    """One row per (kind, N, D) over ``N**D`` grids. ``slr`` is ``None`` for 3D."""
    rows = []
    for kind in kinds:
        kind = CurveKind(kind)
        for d in dims:
            for n in sizes:
                shape = (n, n, n if d == 3 else 1)
                path = generate(kind, shape)
                stats = segment_stats(path)
                slr = empirical_slr(path, pair_budget).max_ratio if d == 2 else None
                rows.append({
                    "kind": kind.value,
                    "N": n,
                    "D": d,
                    "jump_ratio": stats.jump_ratio,
                    "still_ratio": stats.still_ratio,
                    "slr": slr,
                })
    return rows


def format_report(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in rows:
        writer.writerow([
            row["kind"],
            row["N"],
            row["D"],
            f"{float(row['jump_ratio']):.12g}",
            f"{float(row['still_ratio']):.12g}",
            "" if row["slr"] is None else f"{row['slr']:.12g}",
        ])
    return buf.getvalue()
