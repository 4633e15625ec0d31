from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from padicqm.padic_core import PAdicApprox
from padicqm.states import SpectralState, Window, eval_wavelet


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_vector(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def random_spectral(rng, window: Window, zero_constant: bool = False) -> SpectralState:
    v = random_vector(rng, window.size)
    if zero_constant:
        v[0] = 0
    return SpectralState.from_vector(window, v / np.linalg.norm(v))


def brute_basis_matrix(window: Window) -> np.ndarray:
    """Rows: constant mode then every wavelet, evaluated pointwise at the coset representatives.

    Independent of the library's transform: every entry comes from eval_wavelet.
    """
    p, R, K = window.prime, window.R, window.K
    pts = [PAdicApprox.from_rational(Fraction(n, p**R), p, cap=K) for n in range(window.size)]
    rows = [np.full(window.size, p ** (-R / 2), dtype=complex)]
    for idx in window.wavelet_indices():
        rows.append(np.array([eval_wavelet(idx, x) for x in pts]))
    return np.array(rows)


def padic_distance_matrix(window: Window) -> np.ndarray:
    """|x_n - x_m|_p over coset representatives, from exact rational arithmetic."""
    p, R = window.prime, window.R
    size = window.size
    out = np.zeros((size, size))
    for n in range(size):
        for m in range(size):
            if n != m:
                q = Fraction(n - m, p**R)
                v = 0
                num = abs(q.numerator)
                while num % p == 0:
                    num //= p
                    v += 1
                den = q.denominator
                while den % p == 0:
                    den //= p
                    v -= 1
                out[n, m] = float(Fraction(p) ** (-v))
    return out


def vladimirov_oracle(window: Window, alpha: float, values: np.ndarray) -> np.ndarray:
    """Brute-force D^alpha on the window: pairwise sum over cosets plus the outer tail.

    The outer tail integral over |z|_p > p^R of |z|^(-alpha-1) is summed shell
    by shell until the terms underflow, without using any closed form.
    """
    p, R, K = window.prime, window.R, window.K
    c = (1 - p**alpha) / (1 - p ** (-alpha - 1))
    dist = padic_distance_matrix(window)
    cell = float(p) ** (-K)
    weights = np.zeros_like(dist)
    off = dist > 0
    weights[off] = dist[off] ** (-alpha - 1) * cell
    tail = 0.0
    k = R + 1
    while True:
        term = (p**k - p ** (k - 1)) * float(p) ** (-k * (alpha + 1))
        tail += term
        if term < 1e-18 * tail:
            break
        k += 1
    inner = weights @ values - values * weights.sum(axis=1)
    return c * (inner - values * tail)
