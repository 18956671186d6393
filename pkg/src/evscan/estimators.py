"""scikit-learn style transformers around the library functions.

All of them are stateless apart from what ``fit`` records about input shape,
so they can sit inside a :class:`sklearn.pipeline.Pipeline`::

    Pipeline([("serialize", CurveSerializer("hilbert")),
              ("scan", SsmScan(a=-0.5, b=1.0, c=1.0))])
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .block import ScanBlockConfig, run_hsfc_block
from .curves import CurveKind, GridDims, deserialize, generate, serialize
from .events import DEFAULT_BINS, EventGroup, voxelize
from .ssm import SsmParams, build_kernel, discretize, scan_convolutional, scan_recurrent
from .windowing import DEFAULT_SAMPLES, full_enumeration, mc_average, window_mean_pipeline


def _check_volumes(X, ndim):
    X = check_array(X, allow_nd=True, ensure_2d=False, dtype=np.float64)
    if X.ndim != ndim:
        raise ValueError(f"expected a {ndim}-D array, got shape {X.shape}")
    return X


class VoxelGridTransformer(TransformerMixin, BaseEstimator):
    """Event groups to stacked voxel grids of shape ``(n, bins, height, width)``."""

    def __init__(self, bins=DEFAULT_BINS, height=None, width=None):
        self.bins = bins
        self.height = height
        self.width = width

    def fit(self, X=None, y=None):
        if self.height is None or self.width is None:
            raise ValueError("height and width are required")
        self.n_bins_ = int(self.bins)
        return self

    def transform(self, X):
        check_is_fitted(self, "n_bins_")
        groups = list(X)
        if not all(isinstance(g, EventGroup) for g in groups):
            raise TypeError("expected a sequence of EventGroup")
        out = np.zeros((len(groups), self.n_bins_, self.height, self.width))
        for i, g in enumerate(groups):
            out[i] = voxelize(g, self.n_bins_, self.height, self.width).values
        return out


class CurveSerializer(TransformerMixin, BaseEstimator):
    """Flatten ``(n, H, W)`` (2D) or ``(n, D, H, W)`` (3D) arrays along a curve.

    ``fit`` reads the grid size from ``X`` and generates the path.
    """

    def __init__(self, kind="hilbert"):
        self.kind = kind

    def fit(self, X, y=None):
        X = check_array(X, allow_nd=True, dtype=np.float64)
        if X.ndim == 3:
            dims = GridDims(X.shape[2], X.shape[1])
        elif X.ndim == 4:
            dims = GridDims(X.shape[3], X.shape[2], X.shape[1])
        else:
            raise ValueError(f"expected (n, H, W) or (n, D, H, W), got shape {X.shape}")
        self.path_ = generate(CurveKind(self.kind), dims)
        self.n_features_in_ = dims.cell_count
        return self

    def transform(self, X):
        check_is_fitted(self, "path_")
        X = _check_volumes(X, len(self.path_.dims.shape) + 1)
        return serialize(self.path_, X)

    def inverse_transform(self, X):
        check_is_fitted(self, "path_")
        X = check_array(X, dtype=np.float64)
        return deserialize(self.path_, X)


class SsmScan(TransformerMixin, BaseEstimator):
    """Scan each row of ``X`` (shape ``(n, M)``) with a diagonal SSM."""

    def __init__(self, a=-0.5, b=1.0, c=1.0, delta=1.0, mode="recurrent"):
        self.a = a
        self.b = b
        self.c = c
        self.delta = delta
        self.mode = mode

    def fit(self, X=None, y=None):
        if self.mode not in ("recurrent", "convolutional"):
            raise ValueError(f"mode must be 'recurrent' or 'convolutional', got {self.mode!r}")
        self.discrete_ = discretize(SsmParams(np.atleast_1d(self.a), np.atleast_1d(self.b),
                                              np.atleast_1d(self.c), self.delta))
        return self

    def transform(self, X):
        check_is_fitted(self, "discrete_")
        X = check_array(X, dtype=np.float64)
        if self.mode == "convolutional":
            return scan_convolutional(build_kernel(self.discrete_, X.shape[1]), X)
        return scan_recurrent(self.discrete_, X)


class RandomWindowOffsetAverager(TransformerMixin, BaseEstimator):
    """Average a windowed pipeline over random offsets for each ``(C, H, W)`` sample.

    ``pipeline(vol, offset)`` defaults to per-window mean pooling. With
    ``enumerate_offsets=True`` every offset is used and the result is exact.
    """

    def __init__(self, win_size=4, samples=DEFAULT_SAMPLES, seed=0, pipeline=None, enumerate_offsets=False):
        self.win_size = win_size
        self.samples = samples
        self.seed = seed
        self.pipeline = pipeline
        self.enumerate_offsets = enumerate_offsets

    def fit(self, X=None, y=None):
        if self.win_size < 1 or self.samples < 1:
            raise ValueError("win_size and samples must be >= 1")
        self.pipeline_ = self.pipeline if self.pipeline is not None else window_mean_pipeline
        return self

    def transform(self, X):
        check_is_fitted(self, "pipeline_")
        X = _check_volumes(X, 4)
        out = np.empty_like(X)
        for i, vol in enumerate(X):
            if self.enumerate_offsets:
                out[i] = full_enumeration(self.pipeline_, vol, self.win_size)
            else:
                # Each sample gets its own stream so rows do not share offsets.
                out[i] = mc_average(self.pipeline_, vol, self.win_size, self.samples, seed=self.seed, layer=i)
        return out


class HsfcScanBlock(TransformerMixin, BaseEstimator):
    """:func:`evscan.block.run_hsfc_block` applied to each ``(C, H, W)`` sample."""

    def __init__(self, a=-0.5, b=1.0, c=1.0, delta=1.0, win_size=None, samples=DEFAULT_SAMPLES,
                 seed=0, curve_dim=2, enumerate_offsets=False):
        self.a = a
        self.b = b
        self.c = c
        self.delta = delta
        self.win_size = win_size
        self.samples = samples
        self.seed = seed
        self.curve_dim = curve_dim
        self.enumerate_offsets = enumerate_offsets

    def fit(self, X=None, y=None):
        ssm = SsmParams(np.atleast_1d(self.a), np.atleast_1d(self.b), np.atleast_1d(self.c), self.delta)
        self.config_ = ScanBlockConfig(ssm=discretize(ssm), win_size=self.win_size, samples=self.samples,
                                       seed=self.seed, curve_dim=self.curve_dim,
                                       enumerate_offsets=self.enumerate_offsets)
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        X = _check_volumes(X, 4)
        return np.stack([run_hsfc_block(self.config_, vol) for vol in X])
