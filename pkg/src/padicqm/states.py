"""Wavefunctions on Q_p (grid and wavelet coefficients) and on the real line.

Window conventions
------------------
A window ``(p, R, K)`` is the domain ball ``p**-R Z_p`` cut into the
``p**(R+K)`` cosets of ``p**K Z_p``.  Coset ``n`` is ``n * p**-R + p**K Z_p``,
i.e. the digit at position ``i - R`` of the representative is the base-p digit
``i`` of ``n``.  Balls of the domain at scale ``l`` are residue classes of
``n`` modulo ``p**(R + l)``.

Spectral vectors have length ``p**(R+K)``: entry 0 is the constant mode
(the normalized domain indicator); then wavelet blocks for ``r = R, R-1, ...,
1-K``.  Block ``j = R - r`` holds ``p**j * (p-1)`` entries ordered by the
support class ``beta`` (lexicographic in the digits of ``b``) and then ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterator, Sequence

import numpy as np

from .padic_core import (
    Ball,
    PAdicApprox,
    additive_character,
    ord_p,
)


# --------------------------------------------------------------------------
# index types


@dataclass(frozen=True, order=True)
class FractionIndex:
    """An element ``sum_{j=1..m} x_{-j} p**-j`` of Q_p/Z_p.

    ``digits`` lists ``x_{-1}, x_{-2}, ...``; the deepest digit is nonzero
    unless the element is zero (empty tuple).
    """

    prime: int
    digits: tuple[int, ...] = ()

    def __post_init__(self):
        if any(not 0 <= d < self.prime for d in self.digits):
            raise ValueError("digits out of range")
        if self.digits and self.digits[-1] == 0:
            raise ValueError("deepest digit must be nonzero")

    @classmethod
    def from_digits(cls, prime: int, digits: Sequence[int]) -> "FractionIndex":
        digits = list(digits)
        while digits and digits[-1] == 0:
            digits.pop()
        return cls(prime, tuple(digits))

    @property
    def value(self) -> Fraction:
        p = Fraction(self.prime)
        return sum((d * p ** -(j + 1) for j, d in enumerate(self.digits)), Fraction(0))

    def __str__(self) -> str:
        return "0" if not self.digits else "." + "".join(map(str, self.digits))


@dataclass(frozen=True)
class WaveletIndex:
    """Index ``(r, b, k)`` of the wavelet supported on ``b p**-r + p**-r Z_p``."""

    r: int
    b: FractionIndex
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= self.b.prime - 1:
            raise ValueError(f"k must lie in 1..{self.b.prime - 1}")

    @property
    def prime(self) -> int:
        return self.b.prime

    def support(self) -> Ball:
        return Ball(self.prime, -self.r, self.b.value * Fraction(self.prime) ** (-self.r))

    def sort_key(self):
        return (-self.r, self.b.digits, self.k)

    def __str__(self) -> str:
        return f"(r={self.r},b={self.b},k={self.k})"


def eval_wavelet(idx: WaveletIndex, x: PAdicApprox) -> complex:
    """Pointwise value ``p^{-r/2} chi_p(k (p^r x - b) / p)`` on the support, else 0."""
    p = idx.prime
    if x.prime != p:
        raise ValueError("prime mismatch")
    if x.resolution_cap < 1 - idx.r:
        raise ValueError("point not resolved finely enough for this wavelet")
    y = x * Fraction(p) ** idx.r - idx.b.value
    if not y.is_zero and y.valuation < 0:
        return 0j
    return p ** (-idx.r / 2) * additive_character(y * Fraction(idx.k, p))


# --------------------------------------------------------------------------
# window bookkeeping


@dataclass(frozen=True)
class Window:
    """Truncation window: domain ``p**-R Z_p`` at coset resolution ``p**K Z_p``."""

    prime: int
    R: int
    K: int

    def __post_init__(self):
        if self.prime < 2:
            raise ValueError("prime must be >= 2")
        if self.R < 0 or self.K < 0:
            raise ValueError("R and K must be nonnegative")

    @property
    def size(self) -> int:
        return self.prime ** (self.R + self.K)

    @property
    def levels(self) -> int:
        return self.R + self.K

    @property
    def cell_measure(self) -> Fraction:
        return Fraction(self.prime) ** (-self.K)

    @property
    def domain(self) -> Ball:
        return Ball(self.prime, -self.R, Fraction(0))

    def level_slice(self, j: int) -> slice:
        p = self.prime
        start = 1 + (p**j - 1)  # 1 + sum_{i<j} p^i (p-1)
        return slice(start, start + p**j * (p - 1))

    @cached_property
    def scales(self) -> np.ndarray:
        """Scale r of every spectral entry (entry 0, the constant mode, gets R + 1)."""
        out = np.empty(self.size, dtype=int)
        out[0] = self.R + 1
        for j in range(self.levels):
            out[self.level_slice(j)] = self.R - j
        return out

    def wavelet_indices(self) -> list[WaveletIndex]:
        """All admissible wavelet indices in canonical order."""
        p = self.prime
        out = []
        for j in range(self.levels):
            r = self.R - j
            for beta in range(p**j):
                b = FractionIndex.from_digits(p, [(beta // p ** (j - i)) % p for i in range(1, j + 1)])
                out.extend(WaveletIndex(r, b, k) for k in range(1, p))
        return out

    def flat_index(self, idx: WaveletIndex) -> int:
        p = self.prime
        j = self.R - idx.r
        if not 0 <= j < self.levels or idx.prime != p:
            raise ValueError(f"{idx} is outside the window")
        digits = idx.b.digits + (0,) * (j - len(idx.b.digits))
        if len(digits) != j:
            raise ValueError(f"{idx} support is not inside the domain")
        beta = sum(d * p ** (j - i - 1) for i, d in enumerate(digits))
        return self.level_slice(j).start + beta * (p - 1) + (idx.k - 1)

    def point(self, n: int) -> PAdicApprox:
        """Canonical representative of coset ``n``."""
        return PAdicApprox.from_rational(Fraction(n, self.prime**self.R), self.prime, cap=self.K)

    def points(self) -> list[PAdicApprox]:
        return [self.point(n) for n in range(self.size)]

    def coset_ball(self, n: int) -> Ball:
        return Ball(self.prime, self.K, Fraction(n, self.prime**self.R))

    @cached_property
    def monna_order(self) -> np.ndarray:
        """Digit-reversed coset numbers: coset n maps onto [m p^-K, (m+1) p^-K]."""
        p, L = self.prime, self.levels
        n = np.arange(self.size)
        rev = np.zeros(self.size, dtype=np.int64)
        for i in range(L):
            rev = rev * p + (n // p**i) % p
        return rev

    def monna_left(self) -> np.ndarray:
        """Left endpoints of the Monna image interval of every coset."""
        return self.monna_order * float(self.prime) ** (-self.K)

    def contains_ball(self, ball: Ball) -> bool:
        if ball.prime != self.prime:
            return False
        return ball.scale >= -self.R and ord_p(ball.center, self.prime) >= -self.R

    def ball_mask(self, ball: Ball) -> np.ndarray:
        """Boolean membership of every coset in ``ball`` (ball must be resolved at scale <= K)."""
        if ball.prime != self.prime:
            raise ValueError("prime mismatch")
        if ball.scale > self.K:
            raise ValueError(f"ball {ball} is finer than the window resolution p^{self.K}")
        p = self.prime
        if ball.scale <= -self.R:
            return np.full(self.size, ball.contains(0))
        if ball.center != 0 and ord_p(ball.center, p) < -self.R:
            return np.zeros(self.size, dtype=bool)
        mod = p ** (self.R + ball.scale)
        beta = int(ball.center * p**self.R) % mod
        return np.arange(self.size) % mod == beta

    def refine(self, K: int) -> "Window":
        return Window(self.prime, self.R, K)


# --------------------------------------------------------------------------
# grid and spectral states


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class GridState:
    """Locally constant function on the window domain, one value per coset."""

    window: Window
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values).reshape(-1)
        if vals.size != self.window.size:
            raise ValueError(f"expected {self.window.size} values, got {vals.size}")
        object.__setattr__(self, "values", vals)

    @property
    def prime(self) -> int:
        return self.window.prime

    @classmethod
    def zeros(cls, window: Window) -> "GridState":
        return cls(window, np.zeros(window.size, dtype=complex))

    @classmethod
    def from_function(cls, window: Window, f: Callable[[PAdicApprox], complex]) -> "GridState":
        return cls(window, [f(x) for x in window.points()])

    @classmethod
    def indicator(cls, window: Window, ball: Ball) -> "GridState":
        return cls(window, window.ball_mask(ball).astype(complex))

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2)) * self.prime ** (-self.window.K)

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def integral(self) -> complex:
        return complex(np.sum(self.values)) * self.prime ** (-self.window.K)

    def refine(self, K: int) -> "GridState":
        """Same function at a finer resolution ``K`` (children inherit the parent value)."""
        if K < self.window.K:
            raise ValueError("refine cannot coarsen")
        return GridState(self.window.refine(K), np.tile(self.values, self.prime ** (K - self.window.K)))

    def __add__(self, other: "GridState") -> "GridState":
        a, b = _match(self, other)
        return GridState(a.window, a.values + b.values)

    def __sub__(self, other: "GridState") -> "GridState":
        a, b = _match(self, other)
        return GridState(a.window, a.values - b.values)

    def __mul__(self, scalar) -> "GridState":
        return GridState(self.window, self.values * scalar)

    __rmul__ = __mul__

    def normalized(self) -> "GridState":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize a zero state")
        return self * (1.0 / n)

    def to_spectral(self) -> "SpectralState":
        return grid_to_spectral(self)


def _match(f: GridState, g: GridState) -> tuple[GridState, GridState]:
    wf, wg = f.window, g.window
    if wf.prime != wg.prime or wf.R != wg.R:
        raise ValueError("domain mismatch")
    K = max(wf.K, wg.K)
    return f.refine(K), g.refine(K)


def inner_product(f: GridState, g: GridState) -> complex:
    """<f, g> = integral of f * conj(g); the coarser state is refined first."""
    f, g = _match(f, g)
    return complex(np.vdot(g.values, f.values)) * f.prime ** (-f.window.K)


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Wavelet coefficients (canonical order) plus the constant mode, on a window."""

    window: Window
    coefficients: np.ndarray
    constant_mode: complex = 0j

    def __post_init__(self):
        coeffs = _frozen(self.coefficients).reshape(-1)
        if coeffs.size != self.window.size - 1:
            raise ValueError(f"expected {self.window.size - 1} coefficients, got {coeffs.size}")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "constant_mode", complex(self.constant_mode))

    @classmethod
    def from_vector(cls, window: Window, vector) -> "SpectralState":
        vec = np.asarray(vector, dtype=complex).reshape(-1)
        return cls(window, vec[1:], vec[0])

    @classmethod
    def from_mapping(cls, window: Window, coeffs: dict[WaveletIndex, complex],
                     constant_mode: complex = 0j) -> "SpectralState":
        vec = np.zeros(window.size, dtype=complex)
        vec[0] = constant_mode
        for idx, c in coeffs.items():
            vec[window.flat_index(idx)] = c
        return cls.from_vector(window, vec)

    @classmethod
    def basis(cls, window: Window, idx: WaveletIndex | None) -> "SpectralState":
        """Single basis element; ``None`` selects the constant mode."""
        vec = np.zeros(window.size, dtype=complex)
        vec[0 if idx is None else window.flat_index(idx)] = 1
        return cls.from_vector(window, vec)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([[self.constant_mode], self.coefficients])

    def as_dict(self) -> dict[WaveletIndex, complex]:
        return {idx: complex(c) for idx, c in zip(self.window.wavelet_indices(), self.coefficients) if c != 0}

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2) + abs(self.constant_mode) ** 2)

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def inner(self, other: "SpectralState") -> complex:
        if other.window != self.window:
            raise ValueError("window mismatch")
        return complex(np.vdot(other.vector, self.vector))

    def __add__(self, other: "SpectralState") -> "SpectralState":
        if other.window != self.window:
            raise ValueError("window mismatch")
        return SpectralState.from_vector(self.window, self.vector + other.vector)

    def __sub__(self, other: "SpectralState") -> "SpectralState":
        if other.window != self.window:
            raise ValueError("window mismatch")
        return SpectralState.from_vector(self.window, self.vector - other.vector)

    def __mul__(self, scalar) -> "SpectralState":
        return SpectralState.from_vector(self.window, self.vector * scalar)

    __rmul__ = __mul__

    def normalized(self) -> "SpectralState":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize a zero state")
        return self * (1.0 / n)

    def to_grid(self) -> GridState:
        return spectral_to_grid(self)


def grid_to_spectral(f: GridState) -> SpectralState:
    """Hierarchical transform up the coset tree: one length-p DFT per parent ball."""
    w = f.window
    p, R = w.prime, w.R
    mass = f.values * float(p) ** (-w.K)  # integral of f over each coset
    out = np.empty(w.size, dtype=complex)
    for j in range(w.levels - 1, -1, -1):
        r = R - j
        F = np.fft.fft(mass.reshape(p, p**j), axis=0)
        out[w.level_slice(j)] = (p ** (-r / 2) * F[1:, :]).T.reshape(-1)
        mass = F[0]
    out[0] = p ** (-R / 2) * mass[0]
    return SpectralState.from_vector(w, out)


def spectral_to_grid(s: SpectralState) -> GridState:
    w = s.window
    p, R = w.prime, w.R
    vec = s.vector
    mass = np.array([vec[0] * p ** (R / 2)], dtype=complex)
    for j in range(w.levels):
        r = R - j
        F = np.empty((p, p**j), dtype=complex)
        F[0] = mass
        F[1:] = vec[w.level_slice(j)].reshape(p**j, p - 1).T * p ** (r / 2)
        mass = np.fft.ifft(F, axis=0).reshape(-1)
    return GridState(w, mass * float(p) ** w.K)


def sample_wavelet(window: Window, idx: WaveletIndex) -> GridState:
    """Grid samples of a window wavelet via closed-form digit arithmetic."""
    p, R = window.prime, window.R
    j = R - idx.r
    flat = window.flat_index(idx)
    beta = (flat - window.level_slice(j).start) // (p - 1)
    n = np.arange(window.size)
    on_support = n % p**j == beta
    d = (n // p**j) % p
    vals = np.where(on_support, p ** (-idx.r / 2) * np.exp(2j * np.pi * idx.k * d / p), 0)
    return GridState(window, vals)


def expand_indicator(ball: Ball, window: Window) -> tuple[SpectralState, Fraction]:
    """Window coefficients of the indicator of ``ball`` and its exact tail mass.

    The tail mass is the part of ``||1_B||^2`` held by the constant mode,
    i.e. the mass that on all of Q_p sits in wavelets of scale above ``R``:
    ``p^(-2l-R)`` for a ball of scale ``l``.
    """
    if not window.contains_ball(ball):
        raise ValueError(f"ball {ball} is not inside the domain {window.domain}")
    state = grid_to_spectral(GridState.indicator(window, ball))
    tail = Fraction(window.prime) ** (-2 * ball.scale - window.R)
    return state, tail


def discretize(f: Callable[[PAdicApprox], complex], l: int, R: int = 0, p: int = 2) -> GridState:
    """phi^(l): sample ``f`` at the canonical representative of each coset of ``p^l Z_p``."""
    if l < 0:
        raise ValueError("l must be nonnegative")
    return GridState.from_function(Window(p, R, l), f)


# --------------------------------------------------------------------------
# real line


def _gauss_overlap(a1: complex, c1: complex, w1: complex, a2: complex, c2: complex, w2: complex,
                   moment: int = 0) -> complex:
    """integral conj(a1 g1) a2 g2 x^moment dx for g_i = exp(-(x-c_i)^2 / (2 w_i))."""
    w1c, c1c = np.conj(w1), np.conj(c1)
    a = 1 / (2 * w1c) + 1 / (2 * w2)
    b = c1c / w1c + c2 / w2
    c = -(c1c**2 / (2 * w1c) + c2**2 / (2 * w2))
    base = np.conj(a1) * a2 * np.sqrt(np.pi / a) * np.exp(b * b / (4 * a) + c)
    if moment == 0:
        return base
    mu = b / (2 * a)
    if moment == 1:
        return base * mu
    if moment == 2:
        return base * (mu * mu + 1 / (2 * a))
    raise ValueError("moment must be 0, 1 or 2")


@dataclass(frozen=True)
class GaussianTerm:
    """``amplitude * exp(-(x - center)^2 / (2 width2))`` with Re(1/width2) > 0.

    A complex center carries a momentum kick; products with further Gaussians
    and free propagation keep this form closed.
    """

    amplitude: complex
    center: complex
    width2: complex

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.amplitude * np.exp(-((x - self.center) ** 2) / (2 * self.width2))


@dataclass(frozen=True)
class RealPacketState:
    """Finite superposition of (possibly chirped) Gaussian packets on the real line."""

    terms: tuple[GaussianTerm, ...]

    @classmethod
    def gaussian(cls, center: float, sigma: float, amplitude: complex = 1.0) -> "RealPacketState":
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        return cls((GaussianTerm(complex(amplitude), complex(center), complex(sigma**2)),))

    @classmethod
    def two_slit(cls, s: float, sigma: float) -> "RealPacketState":
        """Normalized ``A (exp(-(x-s)^2/2sigma^2) + exp(-(x+s)^2/2sigma^2))``."""
        state = cls(cls.gaussian(s, sigma).terms + cls.gaussian(-s, sigma).terms)
        return state.normalized()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for t in self.terms:
            out = out + t(x)
        return out

    def inner(self, other: "RealPacketState") -> complex:
        """<self, other> = integral self * conj(other)."""
        return complex(sum(_gauss_overlap(u.amplitude, u.center, u.width2, v.amplitude, v.center, v.width2)
                           for u in other.terms for v in self.terms))

    def norm_squared(self) -> float:
        return float(self.inner(self).real)

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def scaled(self, factor: complex) -> "RealPacketState":
        return RealPacketState(tuple(GaussianTerm(t.amplitude * factor, t.center, t.width2) for t in self.terms))

    def normalized(self) -> "RealPacketState":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize a zero state")
        return self.scaled(1 / n)

    def moments(self) -> tuple[float, float]:
        """Mean and variance of the position density ``|psi|^2 / ||psi||^2``."""
        m0 = m1 = m2 = 0j
        for u in self.terms:
            for v in self.terms:
                args = (u.amplitude, u.center, u.width2, v.amplitude, v.center, v.width2)
                m0 += _gauss_overlap(*args)
                m1 += _gauss_overlap(*args, moment=1)
                m2 += _gauss_overlap(*args, moment=2)
        mean = (m1 / m0).real
        return float(mean), float((m2 / m0).real - mean**2)


def hermite_functions(x, count: int, mass: float = 0.5, omega: float = 1.0) -> np.ndarray:
    """Normalized oscillator eigenfunctions theta_0..theta_{count-1} at ``x`` (rows).

    Uses the stable three-term recurrence in the scaled variable ``sqrt(m w) x``.
    """
    x = np.asarray(x, dtype=float)
    a = math.sqrt(mass * omega)
    y = a * x
    out = np.empty((count,) + x.shape)
    if count == 0:
        return out
    out[0] = math.sqrt(a) * np.pi ** -0.25 * np.exp(-y * y / 2)
    if count > 1:
        out[1] = math.sqrt(2) * y * out[0]
    for m in range(2, count):
        out[m] = math.sqrt(2 / m) * y * out[m - 1] - math.sqrt((m - 1) / m) * out[m - 2]
    return out


@dataclass(frozen=True, eq=False)
class HarmonicState:
    """Real-line state expanded on the oscillator eigenbasis ``theta_m``."""

    coefficients: np.ndarray
    mass: float = 0.5
    omega: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _frozen(self.coefficients).reshape(-1))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        theta = hermite_functions(x, len(self.coefficients), self.mass, self.omega)
        return np.tensordot(self.coefficients, theta, axes=1)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())


# --------------------------------------------------------------------------
# product states


@dataclass(frozen=True, eq=False)
class ProductState:
    """Separable joint state Psi(x_inf, x_p) = Psi_inf(x_inf) Psi_p(x_p)."""

    real_part: RealPacketState | HarmonicState
    padic_part: SpectralState | GridState

    def norm(self) -> float:
        return self.real_part.norm() * self.padic_part.norm()

    def joint(self) -> "JointSpectralState":
        if not isinstance(self.real_part, HarmonicState):
            raise TypeError("joint coefficients need a harmonic-basis real part")
        pad = self.padic_part
        if isinstance(pad, GridState):
            pad = grid_to_spectral(pad)
        h = self.real_part
        return JointSpectralState(pad.window, np.outer(pad.vector, h.coefficients), h.mass, h.omega)


@dataclass(frozen=True, eq=False)
class JointSpectralState:
    """Joint amplitudes A[rbk, m] on (window spectral basis) x (oscillator basis).

    Row 0 is the constant mode; rows follow the canonical spectral order.
    """

    window: Window
    amplitudes: np.ndarray
    mass: float = 0.5
    omega: float = 1.0

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 2 or amps.shape[0] != self.window.size:
            raise ValueError(f"amplitudes must have shape ({self.window.size}, M)")
        object.__setattr__(self, "amplitudes", amps)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def evaluate(self, x_real) -> np.ndarray:
        """Psi(x_inf, coset n) as an array of shape (len(x_real), p^(R+K))."""
        theta = hermite_functions(x_real, self.amplitudes.shape[1], self.mass, self.omega)
        basis = np.stack([SpectralState.from_vector(self.window, e).to_grid().values
                          for e in np.eye(self.window.size)])
        return theta.T @ self.amplitudes.T @ basis


# --------------------------------------------------------------------------
# Born-rule densities


def density_padic(state: GridState | SpectralState, normalize: bool = True) -> GridState:
    """Type 2 density |Psi_p|^2 per coset (integrates to 1 when normalized)."""
    grid = state.to_grid() if isinstance(state, SpectralState) else state
    dens = np.abs(grid.values) ** 2
    if normalize:
        total = grid.norm_squared()
        if total == 0:
            raise ValueError("zero-norm state cannot be normalized")
        dens = dens / total
    return GridState(grid.window, dens)


def density_real(state: RealPacketState | HarmonicState, x, normalize: bool = True) -> np.ndarray:
    """Type 1 density |Psi_inf|^2 on the sample points ``x``."""
    dens = np.abs(state(x)) ** 2
    if normalize:
        total = state.norm_squared()
        if total == 0:
            raise ValueError("zero-norm state cannot be normalized")
        dens = dens / total
    return dens


def density_joint(state: ProductState | JointSpectralState, x, normalize: bool = True) -> np.ndarray:
    """Type 3 density on (real sample points) x (cosets)."""
    if isinstance(state, JointSpectralState):
        dens = np.abs(state.evaluate(x)) ** 2
        total = state.norm_squared()
    else:
        real = density_real(state.real_part, x, normalize=False)
        pad = density_padic(state.padic_part, normalize=False).values.real
        dens = np.outer(real, pad)
        total = state.real_part.norm_squared() * state.padic_part.norm_squared()
    if normalize:
        if total == 0:
            raise ValueError("zero-norm state cannot be normalized")
        dens = dens / total
    return dens


def iter_spectral(state: SpectralState) -> Iterator[tuple[str, complex]]:
    """(label, coefficient) pairs in canonical order, constant mode first."""
    yield "const", state.constant_mode
    for idx, c in zip(state.window.wavelet_indices(), state.coefficients):
        yield str(idx), complex(c)


@dataclass(frozen=True)
class RealGrid:
    """Uniform real sample grid ``[-extent, extent]`` with the given spacing."""

    extent: float = 12.0
    spacing: float = 0.01

    def points(self) -> np.ndarray:
        n = int(round(2 * self.extent / self.spacing))
        return np.linspace(-self.extent, self.extent, n + 1)


def trapezoid(y, x) -> float:
    return float(np.trapezoid(y, x))


# --------------------------------------------------------------------------
# CSV serialization


def write_state_csv(path, state: GridState | SpectralState) -> None:
    """``index,re,im`` rows in canonical order below a ``# p=..,R=..,K=..`` line."""
    w = state.window
    kind = "spectral" if isinstance(state, SpectralState) else "grid"
    vec = state.vector if kind == "spectral" else state.values
    with open(path, "w") as fh:
        fh.write(f"# p={w.prime},R={w.R},K={w.K},domain={w.prime}^-{w.R}Z_{w.prime},basis={kind}\n")
        fh.write("index,re,im\n")
        for i, c in enumerate(vec):
            fh.write(f"{i},{float(c.real)!r},{float(c.imag)!r}\n")


def read_state_csv(path) -> GridState | SpectralState:
    with open(path) as fh:
        meta_line = fh.readline()
        if not meta_line.startswith("#"):
            raise ValueError("missing '# p=..,R=..,K=..' header line")
        meta = dict(item.split("=", 1) for item in meta_line[1:].strip().split(","))
        window = Window(int(meta["p"]), int(meta["R"]), int(meta["K"]))
        if fh.readline().strip() != "index,re,im":
            raise ValueError("expected column header 'index,re,im'")
        vec = np.zeros(window.size, dtype=complex)
        seen = 0
        for line in fh:
            if not line.strip():
                continue
            i, re_, im_ = line.split(",")
            vec[int(i)] = complex(float(re_), float(im_))
            seen += 1
    if seen != window.size:
        raise ValueError(f"expected {window.size} rows, found {seen}")
    if meta.get("basis", "spectral") == "grid":
        return GridState(window, vec)
    return SpectralState.from_vector(window, vec)


__all__ = [
    "FractionIndex", "WaveletIndex", "Window", "GridState", "SpectralState", "GaussianTerm",
    "RealPacketState", "HarmonicState", "ProductState", "JointSpectralState", "RealGrid",
    "eval_wavelet", "inner_product", "grid_to_spectral", "spectral_to_grid", "sample_wavelet",
    "expand_indicator", "discretize", "write_state_csv", "read_state_csv", "density_padic", "density_real", "density_joint",
    "hermite_functions", "iter_spectral", "trapezoid",
]
