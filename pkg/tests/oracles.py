"""Independent reference implementations the tests check the library against.

Everything here is deliberately naive (quadratic DFTs, explicit loops) so a
bug in the library's vectorized code cannot hide in a shared shortcut.
"""

from __future__ import annotations

import math

import numpy as np


def naive_dft(x: np.ndarray, n: int | None = None) -> np.ndarray:
    """O(n^2) forward DFT of a 1-D sequence, zero-padded to n."""
    x = np.asarray(x, dtype=np.complex128)
    if n is None:
        n = x.size
    if n < x.size:
        raise ValueError("n shorter than input")
    out = np.zeros(n, dtype=np.complex128)
    for k in range(n):
        acc = 0.0 + 0.0j
        for m in range(x.size):
            acc += x[m] * np.exp(-2j * math.pi * k * m / n)
        out[k] = acc
    return out


def dft_matrix(n: int, in_len: int | None = None) -> np.ndarray:
    """DFT as an explicit (n, in_len) matrix from the defining formula.

    Same O(n^2) direct evaluation as naive_dft (no FFT factorization), built
    as a matrix so bulk checks over many columns stay affordable. in_len < n
    expresses zero-padding by simply dropping the absent input columns.
    """
    if in_len is None:
        in_len = n
    if in_len > n:
        raise ValueError("input longer than transform")
    k = np.arange(n)[:, None]
    m = np.arange(in_len)[None, :]
    return np.exp(-2j * math.pi * k * m / n)


def naive_idft(x: np.ndarray) -> np.ndarray:
    """O(n^2) inverse DFT with 1/n normalization."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    out = np.zeros(n, dtype=np.complex128)
    for m in range(n):
        acc = 0.0 + 0.0j
        for k in range(n):
            acc += x[k] * np.exp(2j * math.pi * k * m / n)
        out[m] = acc / n
    return out


def hann_periodic(n: int) -> np.ndarray:
    """Periodic Hann window from its defining formula."""
    m = np.arange(n)
    return 0.5 - 0.5 * np.cos(2.0 * math.pi * m / n)
