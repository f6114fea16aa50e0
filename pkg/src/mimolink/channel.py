"""Time-varying MIMO channel: independent scalar fading links per antenna
pair, exponential spatial correlation at both ends, a scalar path gain, and
additive white Gaussian noise.

The spatial model is the usual Kronecker one. With G(t) the matrix of
uncorrelated unit-power link gains,

    H(t) = g * Rr^{1/2} G(t) Rt^{1/2},    g = 10^{path_gain_db / 20},

where Rt and Rr are exponential correlation matrices R[i, j] = rho^|i-j|
(the same rho at both ends). The covariance of vec(H) is then
g^2 * (Rt kron Rr) for column-major vectorization.

SNR convention: for a transmit row x with total energy 1, snr_db is the
ratio of transmit energy to noise power per receive antenna, so the complex
noise variance per receive antenna is 10^(-snr_db / 10).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fading import FadingProcess, FadingSpec, fading_init, fading_next
from .numerics import RngStream

__all__ = [
    "CORRELATION_LEVELS",
    "correlation_rho",
    "correlation_matrix",
    "ChannelSpec",
    "ChannelProcess",
    "NoisySignal",
    "channel_init",
    "channel_matrix_at",
    "apply_channel",
]

CORRELATION_LEVELS = {"none": 0.0, "low": 0.1, "medium": 0.5, "high": 0.9}


def correlation_rho(level) -> float:
    """Resolve a named correlation level or an explicit coefficient.

    Accepts "none", "low", "medium", "high" (0, 0.1, 0.5, 0.9) or any float
    in [0, 1).
    """
    if isinstance(level, str):
        name = level.strip().lower()
        if name in CORRELATION_LEVELS:
            return CORRELATION_LEVELS[name]
        try:
            value = float(name)
        except ValueError:
            raise ValueError(f"unknown correlation level {level!r}") from None
    else:
        value = float(level)
    if not 0.0 <= value < 1.0:
        raise ValueError(f"correlation coefficient must lie in [0, 1), got {value}")
    return value


def correlation_matrix(n: int, rho: float) -> np.ndarray:
    """Exponential correlation matrix R[i, j] = rho^|i - j|, complex dtype."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    idx = np.arange(n)
    return (rho ** np.abs(idx[:, None] - idx[None, :])).astype(np.complex128)


def _corr_sqrt(r: np.ndarray) -> np.ndarray:
    # Hermitian PSD square root via eigendecomposition. Exponential
    # correlation matrices with rho < 1 are strictly positive definite, so
    # the clip only guards floating-point dust.
    w, v = np.linalg.eigh(r)
    w = np.clip(w.real, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


@dataclass(frozen=True)
class ChannelSpec:
    """Geometry plus fading parameters for one MIMO link."""

    n_tx: int = 4
    n_rx: int = 4
    fading: FadingSpec = field(default_factory=FadingSpec)
    correlation: float = 0.0
    path_gain_db: float = 0.0

    def validate(self) -> None:
        if not 1 <= self.n_tx <= 4:
            raise ValueError("n_tx must be in 1..4")
        if not 1 <= self.n_rx <= 4:
            raise ValueError("n_rx must be in 1..4")
        if not 0.0 <= self.correlation < 1.0:
            raise ValueError("correlation must lie in [0, 1)")
        if not math.isfinite(self.path_gain_db):
            raise ValueError("path_gain_db must be finite")
        self.fading.validate()


@dataclass
class ChannelProcess:
    """A running channel: one scalar fading process per (rx, tx) link, in
    row-major link order (index r * n_tx + t), plus the frozen correlation
    square roots and linear path gain."""

    spec: ChannelSpec
    links: list[FadingProcess]
    rr_sqrt: np.ndarray
    rt_sqrt: np.ndarray
    gain: float


@dataclass(frozen=True)
class NoisySignal:
    """Received samples (n, n_rx) together with the complex noise variance
    per receive antenna that was actually applied."""

    samples: np.ndarray
    noise_var: float


def channel_init(spec: ChannelSpec, rng: RngStream) -> ChannelProcess:
    """Create the per-link fading processes and correlation square roots.

    Each of the n_rx * n_tx scalar links gets its own independent stream,
    derived from `rng` by link index, so the links are uncorrelated by
    construction and the whole channel is reproducible from (seed, stream).
    """
    spec.validate()
    links = [
        fading_init(spec.fading, rng.spawn(idx))
        for idx in range(spec.n_rx * spec.n_tx)
    ]
    rr = _corr_sqrt(correlation_matrix(spec.n_rx, spec.correlation))
    rt = _corr_sqrt(correlation_matrix(spec.n_tx, spec.correlation))
    return ChannelProcess(
        spec=spec,
        links=links,
        rr_sqrt=rr,
        rt_sqrt=rt,
        gain=10.0 ** (spec.path_gain_db / 20.0),
    )


def channel_matrix_at(proc: ChannelProcess, n_samples: int) -> np.ndarray:
    """Advance every link and return the next n_samples channel matrices
    as an (n_samples, n_rx, n_tx) array."""
    nr, nt = proc.spec.n_rx, proc.spec.n_tx
    g = np.empty((n_samples, nr, nt), dtype=np.complex128)
    for r in range(nr):
        for t in range(nt):
            g[:, r, t] = fading_next(proc.links[r * nt + t], n_samples)
    if proc.spec.correlation != 0.0:
        g = np.einsum("ij,njk,kl->nil", proc.rr_sqrt, g, proc.rt_sqrt)
    return proc.gain * g


def apply_channel(
    proc: ChannelProcess,
    x: np.ndarray,
    snr_db: float,
    rng: RngStream,
) -> tuple[NoisySignal, np.ndarray]:
    """Push transmit rows through the channel and add receiver noise.

    x has shape (n, n_tx), one row per channel use with total energy 1 by
    the encoder contract. Returns the noisy receive rows and the exact
    channel matrices used, so callers can hand perfect CSI to a combiner.
    snr_db = inf disables the noise entirely.
    """
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 2 or x.shape[1] != proc.spec.n_tx:
        raise ValueError(f"x must have shape (n, {proc.spec.n_tx}), got {x.shape}")
    n = x.shape[0]
    h = channel_matrix_at(proc, n)
    y = np.einsum("nrt,nt->nr", h, x)
    if math.isinf(snr_db):
        noise_var = 0.0
    else:
        noise_var = 10.0 ** (-snr_db / 10.0)
        y = y + rng.complex_normal((n, proc.spec.n_rx), var=noise_var)
    return NoisySignal(samples=y, noise_var=noise_var), h
