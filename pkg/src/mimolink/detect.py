"""Linear and maximum-likelihood detectors for uncoded spatial multiplexing.

The transmit model is y = H x + w with x carrying one constellation symbol
per transmit antenna, scaled by 1/sqrt(N_t) so the total transmit energy per
channel use is 1. All three detectors return hard symbol decisions drawn
from the constellation (unscaled), so callers compare decisions against the
symbols they modulated, not against x.

zf_detect      pseudo-inverse projection, then per-antenna slicing
mmse_detect    regularized projection (H^H H + noise_var N_t I)^{-1} H^H y,
               which is the true MMSE filter for this power convention
ml_detect      exhaustive search over all |C|^N_t hypotheses

The linear detectors' pre-slicing estimates (in the transmit domain, i.e.
targeting x = s / sqrt(N_t)) are available through zf_estimate_batch and
mmse_estimate_batch, since several of their analytic properties (the MMSE
estimate shrinking to zero as noise_var grows, MMSE converging to ZF as
noise_var vanishes) live on the estimate, not on the hard decisions.

ZF raises DetectionFailure when H^H H is numerically singular (smallest
eigenvalue below 1e-12 times the largest); MMSE with noise_var > 0 cannot
fail that way.
"""

from __future__ import annotations

import enum
import math

import numpy as np

__all__ = [
    "DetectorKind",
    "DetectionFailure",
    "zf_detect",
    "mmse_detect",
    "ml_detect",
    "zf_detect_batch",
    "mmse_detect_batch",
    "ml_detect_batch",
    "zf_estimate_batch",
    "mmse_estimate_batch",
]

# Relative eigenvalue floor below which H^H H is treated as singular.
SINGULARITY_RTOL = 1e-12

# Cap on constellation^n_tx, keeping exhaustive ML search tractable.
ML_MAX_HYPOTHESES = 1_000_000


class DetectorKind(enum.Enum):
    ZF = "zf"
    MMSE = "mmse"
    ML = "ml"


class DetectionFailure(Exception):
    """The channel matrix was too ill-conditioned to invert."""


def _slice_to(points: np.ndarray, estimates: np.ndarray) -> np.ndarray:
    # Nearest constellation point per estimate; ties go to the lowest index.
    d = np.abs(estimates[..., None] - points) ** 2
    return points[np.argmin(d, axis=-1)]


def _check_y_h(h: np.ndarray, y: np.ndarray, batched: bool) -> tuple[np.ndarray, np.ndarray]:
    h = np.asarray(h, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    want = 3 if batched else 2
    if h.ndim != want or y.ndim != want - 1:
        raise ValueError(f"bad ranks: h {h.shape}, y {y.shape}")
    if h.shape[-2] != y.shape[-1] or (batched and h.shape[0] != y.shape[0]):
        raise ValueError(f"h {h.shape} and y {y.shape} do not agree")
    return h, y


def zf_estimate_batch(h: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pre-slicing zero-forcing estimates (H^H H)^-1 H^H y, shape (n, N_t).

    Raises DetectionFailure if any channel in the batch is singular.
    """
    h, y = _check_y_h(h, y, batched=True)
    hh = h.conj().swapaxes(-1, -2)
    gram = hh @ h
    eig = np.linalg.eigvalsh(gram)
    if np.any((eig[:, 0] < SINGULARITY_RTOL * eig[:, -1]) | (eig[:, -1] <= 0.0)):
        raise DetectionFailure("channel matrix numerically singular under ZF")
    rhs = np.einsum("ntr,nr->nt", hh, y)
    return np.linalg.solve(gram, rhs[..., None])[..., 0]


def mmse_estimate_batch(h: np.ndarray, y: np.ndarray, noise_var: float) -> np.ndarray:
    """Pre-slicing MMSE estimates (H^H H + noise_var N_t I)^-1 H^H y.

    The regularizer noise_var * N_t * I matches transmit power 1/N_t per
    antenna; with noise_var = 0 the filter degenerates to zero forcing.
    """
    if noise_var < 0.0:
        raise ValueError("noise_var must be nonnegative")
    h, y = _check_y_h(h, y, batched=True)
    n_tx = h.shape[-1]
    hh = h.conj().swapaxes(-1, -2)
    gram = hh @ h + noise_var * n_tx * np.eye(n_tx)
    rhs = np.einsum("ntr,nr->nt", hh, y)
    return np.linalg.solve(gram, rhs[..., None])[..., 0]


def zf_detect_batch(h: np.ndarray, y: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Zero-forcing detection of a batch: h (n, N_r, N_t), y (n, N_r).

    Returns hard decisions (n, N_t) from `points`. Raises DetectionFailure
    if any channel in the batch is singular.
    """
    x_hat = zf_estimate_batch(h, y)
    n_tx = np.asarray(h).shape[-1]
    return _slice_to(points, x_hat * math.sqrt(n_tx))


def mmse_detect_batch(
    h: np.ndarray, y: np.ndarray, points: np.ndarray, noise_var: float
) -> np.ndarray:
    """Linear MMSE detection of a batch, same shapes as zf_detect_batch."""
    x_hat = mmse_estimate_batch(h, y, noise_var)
    n_tx = np.asarray(h).shape[-1]
    return _slice_to(points, x_hat * math.sqrt(n_tx))


def _hypothesis_grid(points: np.ndarray, n_tx: int) -> np.ndarray:
    # All |C|^n_tx transmit hypotheses in lexicographic order: the first
    # antenna's symbol index is the most significant digit. Row b of the
    # result is the hypothesis with index b.
    m = len(points)
    idx = np.indices((m,) * n_tx).reshape(n_tx, -1).T
    return points[idx]


def ml_detect_batch(h: np.ndarray, y: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Exhaustive maximum-likelihood detection of a batch.

    Minimizes ||y - H x||^2 over every constellation combination. Distance
    ties resolve to the lexicographically smallest hypothesis (antenna 0
    most significant, constellation order as given). The search size
    |points|^N_t must stay under one million.
    """
    h, y = _check_y_h(h, y, batched=True)
    n_tx = h.shape[-1]
    if len(points) ** n_tx > ML_MAX_HYPOTHESES:
        raise ValueError("hypothesis space too large for exhaustive search")
    grid = _hypothesis_grid(np.asarray(points, dtype=np.complex128), n_tx)
    candidates = np.einsum("nrt,kt->nkr", h, grid) / math.sqrt(n_tx)
    dist = np.sum(np.abs(y[:, None, :] - candidates) ** 2, axis=2)
    best = np.argmin(dist, axis=1)
    return grid[best]


def zf_detect(h: np.ndarray, y: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Single-matrix zero forcing: h (N_r, N_t), y (N_r,) -> (N_t,)."""
    h, y = _check_y_h(h, y, batched=False)
    return zf_detect_batch(h[None], y[None], points)[0]


def mmse_detect(h: np.ndarray, y: np.ndarray, points: np.ndarray, noise_var: float) -> np.ndarray:
    """Single-matrix MMSE detection."""
    h, y = _check_y_h(h, y, batched=False)
    return mmse_detect_batch(h[None], y[None], points, noise_var)[0]


def ml_detect(h: np.ndarray, y: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Single-matrix exhaustive ML detection."""
    h, y = _check_y_h(h, y, batched=False)
    return ml_detect_batch(h[None], y[None], points)[0]
