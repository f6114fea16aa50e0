"""Orthogonal space-time block codes over 2 to 4 transmit antennas.

Every code is stored in dispersion form: a codeword for the symbol block
s = (s_1, .., s_k) is

    X(s) = (1 / sqrt(N_t)) * sum_i ( A_i Re(s_i) + j B_i Im(s_i) )

with real T x N_t matrices A_i, B_i chosen so that X(s)^H X(s)
= (sum_i |s_i|^2 / N_t) * I for every s. That orthogonality is what makes
the linear combiner below coincide with maximum-likelihood detection on a
block-constant channel: stacking the received block Y = X H^T + W and
minimizing ||Y - X(s) H^T||_F^2 decouples per symbol into

    s_hat_i = sqrt(N_t) * (Re(c_i) - j Im(d_i)) / ||H||_F^2
    c_i = tr(H^T Y^H A_i),   d_i = tr(H^T Y^H B_i).

The rate-1/2 designs are normalized by an extra 1/sqrt(2) relative to their
usual textbook form so the orthogonality constant is sum|s_i|^2 for every
code here, rate 1/2 or not.

Available designs, keyed by (n_tx, rate):

    (2, 1)    Alamouti, k=2 symbols over T=2 uses
    (3, 1/2)  k=4 over T=8
    (3, 3/4)  k=3 over T=4
    (4, 1/2)  k=4 over T=8
    (4, 3/4)  k=3 over T=4
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "OstbcCode",
    "CodewordBlock",
    "ostbc_code",
    "supported_codes",
    "ostbc_encode",
    "ostbc_combine",
    "encode_array",
    "combine_array",
]


def _codeword_g2(s):
    s1, s2 = s
    return np.array([
        [s1, s2],
        [-np.conj(s2), np.conj(s1)],
    ])


def _codeword_g4(s):
    s1, s2, s3, s4 = s
    top = np.array([
        [s1, s2, s3, s4],
        [-s2, s1, -s4, s3],
        [-s3, s4, s1, -s2],
        [-s4, -s3, s2, s1],
    ])
    return np.concatenate([top, np.conj(top)], axis=0) / math.sqrt(2.0)


def _codeword_g3(s):
    return _codeword_g4(s)[:, :3]


def _codeword_h4(s):
    s1, s2, s3 = s
    r2 = math.sqrt(2.0)
    return np.array([
        [s1, s2, s3 / r2, s3 / r2],
        [-np.conj(s2), np.conj(s1), s3 / r2, -s3 / r2],
        [np.conj(s3) / r2, np.conj(s3) / r2,
         (-s1 - np.conj(s1) + s2 - np.conj(s2)) / 2,
         (-s2 - np.conj(s2) + s1 - np.conj(s1)) / 2],
        [np.conj(s3) / r2, -np.conj(s3) / r2,
         (s2 + np.conj(s2) + s1 - np.conj(s1)) / 2,
         -(s1 + np.conj(s1) + s2 - np.conj(s2)) / 2],
    ])


def _codeword_h3(s):
    return _codeword_h4(s)[:, :3]


_DESIGNS = {
    (2, Fraction(1)): (_codeword_g2, 2, 2),
    (3, Fraction(1, 2)): (_codeword_g3, 4, 8),
    (3, Fraction(3, 4)): (_codeword_h3, 3, 4),
    (4, Fraction(1, 2)): (_codeword_g4, 4, 8),
    (4, Fraction(3, 4)): (_codeword_h4, 3, 4),
}


@dataclass(frozen=True, eq=False)
class OstbcCode:
    """One orthogonal design in dispersion form.

    a_mats and b_mats have shape (n_symbols, block_len, n_tx) and are real;
    rate = n_symbols / block_len.
    """

    n_tx: int
    rate: Fraction
    n_symbols: int
    block_len: int
    a_mats: np.ndarray
    b_mats: np.ndarray


@dataclass(frozen=True, eq=False)
class CodewordBlock:
    """A transmitted block: the (block_len, n_tx) matrix actually sent
    (per-antenna 1/sqrt(N_t) scaling applied) plus the symbols it encodes."""

    matrix: np.ndarray
    source_symbols: np.ndarray


def supported_codes() -> list[tuple[int, Fraction]]:
    return sorted(_DESIGNS.keys())


@functools.lru_cache(maxsize=None)
def _build(n_tx: int, rate: Fraction) -> OstbcCode:
    builder, k, t = _DESIGNS[(n_tx, rate)]
    a_mats = np.empty((k, t, n_tx))
    b_mats = np.empty((k, t, n_tx))
    basis = np.eye(k)
    for i in range(k):
        a_mats[i] = builder(basis[i]).real
        b_mats[i] = (builder(1j * basis[i]) / 1j).real
    a_mats.setflags(write=False)
    b_mats.setflags(write=False)
    return OstbcCode(n_tx=n_tx, rate=rate, n_symbols=k, block_len=t,
                     a_mats=a_mats, b_mats=b_mats)


def ostbc_code(n_tx: int, rate) -> OstbcCode:
    """Look up a design by antenna count and rate.

    rate may be a Fraction, an exactly-representable float (1, 0.5, 0.75),
    or a string like "3/4". Unknown combinations raise ValueError.
    """
    key = (int(n_tx), Fraction(rate))
    if key not in _DESIGNS:
        options = ", ".join(f"({n}, {r})" for n, r in supported_codes())
        raise ValueError(f"no design for n_tx={key[0]}, rate={key[1]}; have {options}")
    return _build(*key)


def encode_array(code: OstbcCode, sym_blocks: np.ndarray) -> np.ndarray:
    """Encode symbol blocks (n, k) into codeword matrices (n, T, n_tx)."""
    s = np.asarray(sym_blocks, dtype=np.complex128)
    if s.ndim != 2 or s.shape[1] != code.n_symbols:
        raise ValueError(f"expected shape (n, {code.n_symbols}), got {s.shape}")
    x = np.einsum("nk,ktm->ntm", s.real, code.a_mats)
    x = x + 1j * np.einsum("nk,ktm->ntm", s.imag, code.b_mats)
    return x / math.sqrt(code.n_tx)


def ostbc_encode(code: OstbcCode, symbols) -> list[CodewordBlock]:
    """Encode a flat symbol stream into a list of codeword blocks.

    The stream length must be a multiple of the code's symbols-per-block.
    """
    s = np.asarray(symbols, dtype=np.complex128).ravel()
    k = code.n_symbols
    if len(s) % k != 0:
        raise ValueError(f"symbol count {len(s)} not a multiple of {k}")
    blocks = s.reshape(-1, k)
    mats = encode_array(code, blocks)
    return [CodewordBlock(matrix=mats[i], source_symbols=blocks[i].copy())
            for i in range(len(blocks))]


def combine_array(code: OstbcCode, y: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Combine received blocks y (n, T, N_r) under channels h (n, N_r, N_t)
    into symbol estimates (n, k).

    Exact on any noiseless block whose channel was constant over the block;
    with noise the estimate is the per-symbol ML statistic. Raises on an
    all-zero channel (the estimate would be undefined).
    """
    y = np.asarray(y, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    if y.ndim != 3 or y.shape[1] != code.block_len:
        raise ValueError(f"y must have shape (n, {code.block_len}, n_rx), got {y.shape}")
    if h.ndim != 3 or h.shape[0] != y.shape[0] or h.shape[1] != y.shape[2] or h.shape[2] != code.n_tx:
        raise ValueError(f"h shape {h.shape} inconsistent with y {y.shape} and n_tx={code.n_tx}")
    h_norm_sq = np.sum(np.abs(h) ** 2, axis=(1, 2))
    if np.any(h_norm_sq < 1e-300):
        raise ValueError("channel block has zero Frobenius norm")
    yc = y.conj()
    c = np.einsum("brm,btr,ktm->bk", h, yc, code.a_mats)
    d = np.einsum("brm,btr,ktm->bk", h, yc, code.b_mats)
    return math.sqrt(code.n_tx) * (c.real - 1j * d.imag) / h_norm_sq[:, None]


def ostbc_combine(code: OstbcCode, y: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Single-block combiner: y is (T, N_r), h is (N_r, N_t), result (k,)."""
    y = np.asarray(y, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    if y.ndim != 2 or h.ndim != 2:
        raise ValueError("y and h must be 2-d")
    return combine_array(code, y[None, :, :], h[None, :, :])[0]
