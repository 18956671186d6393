"""Linear state-space scan: ZOH discretization, recurrence and convolution.

The continuous system ``h' = A h + B x, y = C h`` is discretized with a
zero-order hold at time scale ``delta``::

    A_bar = exp(delta * A)
    B_bar = (delta * A)^-1 (exp(delta * A) - I) * delta * B

and then evaluated either step by step or as a causal convolution with the
kernel ``K[j] = C A_bar^j B_bar``. Both forms start from ``h_0 = 0``.

``A`` is normally diagonal (stored as a length-N vector). A dense ``(N, N)``
``A`` is accepted too; it is discretized through the matrix exponential of
the augmented block matrix ``[[A, B], [0, 0]]``, which stays well defined when
``A`` is singular.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

# Below this |delta * a| the closed form (e^x - 1)/x loses digits; use its series.
SMALL_ARG = 1e-4
# Sequence length above which the convolutional scan switches to FFT.
FFT_THRESHOLD = 128


def _as_float_array(name, value, allowed_ndim=(1,)):
    arr = np.array(value, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim not in allowed_ndim:
        raise ValueError(f"{name} must have {' or '.join(map(str, allowed_ndim))} dimensions, got {arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SsmParams:
    """Continuous-time parameters. ``A`` is diagonal when 1-D, dense when 2-D."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    delta: float

    def __post_init__(self):
        A = _as_float_array("A", self.A, (1, 2))
        n = A.shape[0]
        if A.ndim == 2 and A.shape != (n, n):
            raise ValueError(f"dense A must be square, got {A.shape}")
        B = _as_float_array("B", self.B)
        C = _as_float_array("C", self.C)
        if B.shape != (n,) or C.shape != (n,):
            raise ValueError(f"B and C must have length {n}, got {B.shape} and {C.shape}")
        delta = float(self.delta)
        if not np.isfinite(delta) or delta <= 0:
            raise ValueError(f"delta must be finite and > 0, got {self.delta}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "delta", delta)

    @property
    def state_dim(self) -> int:
        return self.B.shape[0]

    @property
    def diagonal(self) -> bool:
        return self.A.ndim == 1


@dataclass(frozen=True, eq=False)
class DiscreteSsm:
    A_bar: np.ndarray
    B_bar: np.ndarray
    C: np.ndarray

    @property
    def state_dim(self) -> int:
        return self.B_bar.shape[0]

    @property
    def diagonal(self) -> bool:
        return self.A_bar.ndim == 1


@dataclass(frozen=True, eq=False)
class ScanKernel:
    values: np.ndarray

    def __len__(self):
        return len(self.values)


def expm1_over_x(x):
    """``(e^x - 1) / x`` elementwise, equal to 1 at ``x = 0``."""
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < SMALL_ARG
    safe = np.where(small, 1.0, x)
    series = 1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0
    return np.where(small, series, np.expm1(safe) / safe)


def discretize(params: SsmParams) -> DiscreteSsm:
    dt = params.delta
    if params.diagonal:
        x = dt * params.A
        return DiscreteSsm(np.exp(x), expm1_over_x(x) * dt * params.B, params.C)
    n = params.state_dim
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = params.A
    aug[:n, n] = params.B
    blk = scipy.linalg.expm(dt * aug)
    return DiscreteSsm(blk[:n, :n], blk[:n, n].copy(), params.C)


def _prepare_input(x):
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise ValueError("input sequence is empty")
    out_dtype = x.dtype if x.dtype in (np.float32, np.float64) else np.float64
    return x.astype(np.float64, copy=False), out_dtype


def _step(A_bar, B_bar, C, h, xt):
    # One recurrence step on a batch of states ``h`` of shape (..., N).
    # Row-wise sums instead of matmul keep batched and single runs bit-identical.
    if A_bar.ndim == 1:
        h = A_bar * h + B_bar * xt[..., None]
    else:
        h = (h[..., None, :] * A_bar).sum(axis=-1) + B_bar * xt[..., None]
    return h, (h * C).sum(axis=-1)


def scan_recurrent(d: DiscreteSsm, x) -> np.ndarray:
    """Run ``h_t = A_bar h_{t-1} + B_bar x_t, y_t = C h_t`` over the last axis of ``x``."""
    x, out_dtype = _prepare_input(x)
    h = np.zeros(x.shape[:-1] + (d.state_dim,))
    y = np.empty(x.shape)
    for t in range(x.shape[-1]):
        h, y[..., t] = _step(d.A_bar, d.B_bar, d.C, h, x[..., t])
    return y.astype(out_dtype, copy=False)


def build_kernel(d: DiscreteSsm, length: int) -> ScanKernel:
    """``K[j] = C A_bar^j B_bar`` for ``j < length``."""
    if length < 1:
        raise ValueError(f"kernel length must be >= 1, got {length}")
    if d.diagonal:
        powers = d.A_bar[None, :] ** np.arange(length)[:, None]
        k = powers @ (d.C * d.B_bar)
    else:
        k = np.empty(length)
        v = d.B_bar
        for j in range(length):
            k[j] = d.C @ v
            v = d.A_bar @ v
    return ScanKernel(k)


def scan_convolutional(kernel: ScanKernel, x, method: str = "auto") -> np.ndarray:
    """Causal convolution ``y_t = sum_{j<=t} K[j] x_{t-j}`` over the last axis of ``x``.

    ``method`` is ``"direct"``, ``"fft"`` or ``"auto"`` (FFT above
    ``FFT_THRESHOLD`` samples).
    """
    x, out_dtype = _prepare_input(x)
    k = np.asarray(kernel.values, dtype=np.float64)
    m = x.shape[-1]
    if len(k) != m:
        raise ValueError(f"kernel length {len(k)} does not match input length {m}")
    if method == "auto":
        method = "fft" if m > FFT_THRESHOLD else "direct"
    if method == "direct":
        y = np.zeros(x.shape)
        for j in range(m):
            y[..., j:] += k[j] * x[..., : m - j]
    elif method == "fft":
        n = 1 << (2 * m - 1).bit_length()
        y = np.fft.irfft(np.fft.rfft(x, n) * np.fft.rfft(k, n), n)[..., :m]
    else:
        raise ValueError(f"unknown method {method!r}")
    return y.astype(out_dtype, copy=False)


def selective_scan(per_step_params: Sequence[SsmParams], x) -> np.ndarray:
    """Recurrence with per-timestep parameters, each discretized on its own.

    ``x`` has time on its last axis and one entry of ``per_step_params`` per
    timestep. The convolutional form does not apply here.
    """
    x, out_dtype = _prepare_input(x)
    m = x.shape[-1]
    if len(per_step_params) != m:
        raise ValueError(f"{len(per_step_params)} parameter sets for {m} timesteps")
    n = per_step_params[0].state_dim
    h = np.zeros(x.shape[:-1] + (n,))
    y = np.empty(x.shape)
    for t, params in enumerate(per_step_params):
        if params.state_dim != n:
            raise ValueError(f"state size changes at step {t}")
        d = discretize(params)
        h, y[..., t] = _step(d.A_bar, d.B_bar, d.C, h, x[..., t])
    return y.astype(out_dtype, copy=False)
