"""Hamiltonians on Q_p and on the real line.

* :class:`VladimirovOperator` -- the Taibleson-Vladimirov fractional derivative,
  applied either diagonally on wavelet coefficients or by exact quadrature of
  its singular integral on grid functions.
* :class:`KernelOperator` -- a Hermitian N x N matrix lifted to an integral
  operator on L^2(Z_p) through scaled ball indicators (the CTQW construction).
* :class:`FreeHamiltonian` / :class:`HarmonicHamiltonian` -- the real sector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np

from .padic_core import PAdicApprox, ord_p
from .states import (
    GridState,
    HarmonicState,
    RealPacketState,
    SpectralState,
    Window,
    _gauss_overlap,
    hermite_functions,
)

HERMITIAN_TOL = 1e-12


# --------------------------------------------------------------------------
# Taibleson-Vladimirov operator


def vladimirov_constant(p: int, alpha: float) -> float:
    """Prefactor (1 - p^a) / (1 - p^(-a-1)) of the singular integral."""
    return (1 - p**alpha) / (1 - p ** (-alpha - 1))


def outer_tail_integral(p: int, alpha: float, R: int) -> float:
    """Integral of |z|^(-alpha-1) over |z|_p > p^R (a geometric series over spheres)."""
    return (1 - 1 / p) * p ** (-(R + 1) * alpha) / (1 - p ** (-alpha))


def constant_mode_eigenvalue(p: int, alpha: float, R: int) -> float:
    """Galerkin diagonal <e0, D^a e0> for the normalized indicator of p^-R Z_p.

    D^a applied to the indicator of the domain is constant inside the domain,
    equal to ``-C * outer_tail_integral``; that constant is the diagonal entry.
    """
    return (1 - 1 / p) * p ** (-R * alpha) / (1 - p ** (-alpha - 1))


@dataclass(frozen=True)
class VladimirovOperator:
    alpha: float
    window: Window
    mass: float = 0.5

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.mass > 0:
            raise ValueError("mass must be positive")

    @property
    def prime(self) -> int:
        return self.window.prime

    @property
    def constant_eigenvalue(self) -> float:
        return constant_mode_eigenvalue(self.prime, self.alpha, self.window.R)

    def eigenvalues(self) -> np.ndarray:
        """D^a diagonal over the spectral vector (constant mode first)."""
        scales = self.window.scales
        eig = float(self.prime) ** ((1 - scales) * self.alpha)
        eig[0] = self.constant_eigenvalue
        return eig

    def energies(self) -> np.ndarray:
        """Hamiltonian diagonal D^a / (2 m_p)."""
        return self.eigenvalues() / (2 * self.mass)

    def truncation_leakage(self) -> float:
        """||D^a e0||^2 outside the domain: the part the Galerkin diagonal discards."""
        p, a, R = self.prime, self.alpha, self.window.R
        c = vladimirov_constant(p, a)
        q = p ** (-(2 * a + 1))
        return c * c * p**R * (1 - 1 / p) * q ** (R + 1) / (1 - q)


def apply_vladimirov_spectral(op: VladimirovOperator, s: SpectralState) -> SpectralState:
    if s.window != op.window:
        raise ValueError("state window does not match operator window")
    return SpectralState.from_vector(s.window, s.vector * op.eigenvalues())


@lru_cache(maxsize=32)
def _distance_weights(p: int, R: int, K: int, alpha: float) -> np.ndarray:
    """W[n, m] = p^-K |x_n - x_m|^(-alpha-1) for n != m, 0 on the diagonal."""
    size = p ** (R + K)
    n = np.arange(size)
    diff = n[:, None] - n[None, :]
    val = np.zeros((size, size), dtype=int)
    mod = p
    for _ in range(R + K - 1):
        val += diff % mod == 0
        mod *= p
    # |x_n - x_m|_p = p^(R - v) with v = ord_p(n - m) < R + K
    w = float(p) ** (-K) * float(p) ** (-(R - val) * (alpha + 1))
    np.fill_diagonal(w, 0.0)
    w.flags.writeable = False
    return w


def apply_vladimirov_direct(op: VladimirovOperator, f: GridState) -> GridState:
    """Exact quadrature of the singular integral for f supported in the domain.

    Inside the domain the integral is a finite sum over cosets; the region
    ``|z| > p^R`` (where f = 0) contributes ``-f(x)`` times a geometric tail.
    """
    w = f.window
    if w.prime != op.prime or w.R != op.window.R:
        raise ValueError("grid domain does not match operator domain")
    p, a = w.prime, op.alpha
    W = _distance_weights(p, w.R, w.K, float(a))
    vals = f.values
    inner = W @ vals - vals * W.sum(axis=1)
    tail = outer_tail_integral(p, a, w.R)
    return GridState(w, vladimirov_constant(p, a) * (inner - vals * tail))


def vladimirov_direct_at(op: VladimirovOperator, f: GridState, x: PAdicApprox | Fraction | int) -> complex:
    """D^a f evaluated at any point of Q_p (f supported in the domain)."""
    w = f.window
    q = x.to_fraction() if isinstance(x, PAdicApprox) else Fraction(x)
    v = ord_p(q, w.prime)
    if v >= -w.R:
        n = int(q * w.prime**w.R) % w.size
        return complex(apply_vladimirov_direct(op, f).values[n])
    # |z - x| = |x| for every z in the domain
    dist = float(w.prime) ** (-v)
    return vladimirov_constant(w.prime, op.alpha) * dist ** (-op.alpha - 1) * f.integral()


# --------------------------------------------------------------------------
# kernel operators from Hermitian matrices


@dataclass(frozen=True, eq=False)
class KernelOperator:
    """Kernel h(x,y) = p^l sum H[J,K] 1_J(x) 1_K(y) on Z_p, J, K in ``sites``."""

    prime: int
    level: int
    sites: tuple[int, ...]
    matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.sites)

    def _check_window(self, window: Window) -> None:
        if window.prime != self.prime or window.R != 0:
            raise ValueError("kernel operators act on grid states over Z_p (R = 0)")
        if window.K < self.level:
            raise ValueError(f"grid resolution {window.K} is coarser than kernel level {self.level}")

    def basis(self, window: Window) -> np.ndarray:
        """Rows are the grid samples of p^(l/2) 1_{I + p^l Z_p}, I in ``sites``."""
        self._check_window(window)
        n = np.arange(window.size)
        mod = self.prime**self.level
        return np.stack([(n % mod == I) * self.prime ** (self.level / 2) for I in self.sites]).astype(complex)

    def coefficients(self, f: GridState) -> np.ndarray:
        """c_I = <f, e_I> for every site."""
        B = self.basis(f.window)
        return B.conj() @ f.values * self.prime ** (-f.window.K)

    def from_coefficients(self, window: Window, c) -> GridState:
        return GridState(window, np.asarray(c, dtype=complex) @ self.basis(window))

    def kernel_l2_norm(self) -> float:
        """||h||_{L^2(Z_p x Z_p)}; equals the Frobenius norm of H."""
        return float(np.linalg.norm(self.matrix))

    def kernel_values(self, window: Window) -> np.ndarray:
        """h(x_n, y_m) on the grid."""
        B = self.basis(window) * self.prime ** (self.level / 2)  # p^l 1_J
        ind = B * self.prime ** (-self.level)
        return self.prime**self.level * (ind.T @ self.matrix @ ind)


def build_kernel(H, p: int, l: int, sites: Sequence[int] | None = None) -> KernelOperator:
    H = np.array(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("H must be a square matrix")
    N = H.shape[0]
    if N > p**l:
        raise ValueError(f"N = {N} exceeds p^l = {p**l}")
    if not np.allclose(H, H.conj().T, atol=HERMITIAN_TOL, rtol=0):
        raise ValueError("H is not Hermitian")
    if sites is None:
        sites = range(N)
    sites = tuple(int(s) for s in sites)
    if len(sites) != N or len(set(sites)) != N or any(not 0 <= s < p**l for s in sites):
        raise ValueError(f"sites must be {N} distinct integers in [0, {p**l})")
    H.flags.writeable = False
    return KernelOperator(p, l, sites, H)


def apply_kernel(op: KernelOperator, f: GridState) -> GridState:
    """H f = sum_J (H c)_J e_J with c_K = <f, e_K>: the integral against h(x, y)."""
    c = op.coefficients(f)
    return op.from_coefficients(f.window, op.matrix @ c)


def ctqw_hamiltonian(adjacency, gamma: float = 1.0) -> np.ndarray:
    """Standard CTQW generator -gamma * A."""
    A = np.asarray(adjacency, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("adjacency must be square")
    return -gamma * A


class MatrixFormatError(ValueError):
    pass


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_dense_matrix(text: str) -> np.ndarray:
    """Rows of ``re,im`` pairs (row-major): line i holds 2N numbers."""
    rows = []
    for lineno, line in _content_lines(text):
        try:
            nums = [float(tok) for tok in line.split(",")]
        except ValueError as exc:
            raise MatrixFormatError(f"line {lineno}: non-numeric entry ({exc})") from None
        if len(nums) % 2:
            raise MatrixFormatError(f"line {lineno}: odd number of values; expected re,im pairs")
        rows.append((lineno, [complex(nums[i], nums[i + 1]) for i in range(0, len(nums), 2)]))
    if not rows:
        raise MatrixFormatError("matrix file is empty")
    n = len(rows)
    for lineno, row in rows:
        if len(row) != n:
            raise MatrixFormatError(f"line {lineno}: expected {n} entries, found {len(row)}")
    return np.array([row for _, row in rows])


def parse_edge_list(text: str, size: int | None = None) -> np.ndarray:
    """``u v weight`` lines -> symmetric adjacency matrix."""
    edges = []
    for lineno, line in _content_lines(text):
        toks = line.split()
        if len(toks) not in (2, 3):
            raise MatrixFormatError(f"line {lineno}: expected 'u v [weight]'")
        try:
            u, v = int(toks[0]), int(toks[1])
            wgt = float(toks[2]) if len(toks) == 3 else 1.0
        except ValueError:
            raise MatrixFormatError(f"line {lineno}: malformed edge '{line}'") from None
        if u < 0 or v < 0:
            raise MatrixFormatError(f"line {lineno}: negative vertex index")
        edges.append((u, v, wgt))
    n = size if size is not None else 1 + max((max(u, v) for u, v, _ in edges), default=-1)
    A = np.zeros((n, n))
    for u, v, wgt in edges:
        if u >= n or v >= n:
            raise MatrixFormatError(f"vertex {max(u, v)} exceeds matrix size {n}")
        A[u, v] = A[v, u] = wgt
    return A


def load_matrix(path: str | Path, fmt: str = "dense", gamma: float = 1.0) -> np.ndarray:
    text = Path(path).read_text()
    if fmt == "dense":
        return parse_dense_matrix(text)
    if fmt == "edges":
        return ctqw_hamiltonian(parse_edge_list(text), gamma).astype(complex)
    raise ValueError(f"unknown matrix format {fmt!r}")


# --------------------------------------------------------------------------
# real line


@dataclass(frozen=True)
class FreeHamiltonian:
    mass: float = 0.5


@dataclass(frozen=True)
class HarmonicHamiltonian:
    mass: float = 0.5
    omega: float = 1.0


RealHamiltonian = Union[FreeHamiltonian, HarmonicHamiltonian]


@dataclass(frozen=True)
class CompositeHamiltonian:
    """H_inf + H_p acting on product states."""

    padic: VladimirovOperator | KernelOperator
    real: RealHamiltonian


def real_eigensystem(h: RealHamiltonian, cutoff: int) -> tuple[np.ndarray, Callable]:
    """Eigenvalues w (m + 1/2) and a theta_m evaluator for the oscillator."""
    if isinstance(h, FreeHamiltonian):
        raise ValueError("free Hamiltonian has continuous spectrum; evolve packets with evolve_real_free")
    energies = h.omega * (np.arange(cutoff) + 0.5)

    def theta(x):
        return hermite_functions(x, cutoff, h.mass, h.omega)

    return energies, theta


def apply_real_fd(h: RealHamiltonian, values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Fourth-order finite-difference action of H_inf on samples (zero beyond the ends)."""
    dx = x[1] - x[0]
    v = np.pad(values, 2)
    lap = (-v[:-4] + 16 * v[1:-3] - 30 * v[2:-2] + 16 * v[3:-1] - v[4:]) / (12 * dx * dx)
    out = -lap / (2 * h.mass)
    if isinstance(h, HarmonicHamiltonian):
        out = out + 0.5 * h.mass * h.omega**2 * x**2 * values
    return out


def kinetic_energy(state: RealPacketState, mass: float) -> float:
    """<psi, -(1/2m) d^2/dx^2 psi> = (1/2m) ||psi'||^2, in closed form."""
    total = 0j
    for u in state.terms:
        for v in state.terms:
            args = (u.amplitude, u.center, u.width2, v.amplitude, v.center, v.width2)
            m0 = _gauss_overlap(*args)
            m1 = _gauss_overlap(*args, moment=1)
            m2 = _gauss_overlap(*args, moment=2)
            cu, cv = np.conj(u.center), v.center
            total += (m2 - (cu + cv) * m1 + cu * cv * m0) / (np.conj(u.width2) * v.width2)
    return float(total.real) / (2 * mass)


def harmonic_energy(state: HarmonicState) -> float:
    E = state.omega * (np.arange(len(state.coefficients)) + 0.5)
    return float(np.sum(E * np.abs(state.coefficients) ** 2))


def padic_energy(op: VladimirovOperator | KernelOperator, state: SpectralState | GridState) -> float:
    """<psi, H_p psi> with H_p = D^a / (2 m_p) or the kernel operator."""
    if isinstance(op, VladimirovOperator):
        if isinstance(state, GridState):
            state = state.to_spectral()
        return float(np.sum(op.energies() * np.abs(state.vector) ** 2))
    if isinstance(state, SpectralState):
        state = state.to_grid()
    c = op.coefficients(state)
    return float(np.vdot(c, op.matrix @ c).real)


__all__ = [
    "VladimirovOperator", "KernelOperator", "FreeHamiltonian", "HarmonicHamiltonian",
    "CompositeHamiltonian", "MatrixFormatError", "apply_vladimirov_spectral",
    "apply_vladimirov_direct", "vladimirov_direct_at", "build_kernel", "apply_kernel",
    "ctqw_hamiltonian", "parse_dense_matrix", "parse_edge_list", "load_matrix",
    "real_eigensystem", "apply_real_fd", "kinetic_energy", "harmonic_energy", "padic_energy",
    "vladimirov_constant", "outer_tail_integral", "constant_mode_eigenvalue",
]
