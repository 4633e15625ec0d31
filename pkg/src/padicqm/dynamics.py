"""Unitary evolution e^{-itH} for every sector; all of it by exact phases."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .operators import (
    CompositeHamiltonian,
    FreeHamiltonian,
    HarmonicHamiltonian,
    KernelOperator,
    VladimirovOperator,
    harmonic_energy,
    kinetic_energy,
    padic_energy,
)
from .states import (
    GaussianTerm,
    GridState,
    HarmonicState,
    JointSpectralState,
    ProductState,
    RealPacketState,
    SpectralState,
)


def evolve_padic(s: SpectralState, op: VladimirovOperator, t: float) -> SpectralState:
    """Multiply every coefficient by exp(-i t E) with E = D^a eigenvalue / (2 m_p)."""
    if s.window != op.window:
        raise ValueError("state window does not match operator window")
    return SpectralState.from_vector(s.window, s.vector * np.exp(-1j * t * op.energies()))


def evolve_real_free(s: RealPacketState, mass: float, t: float) -> RealPacketState:
    """Closed-form free propagation: width2 -> width2 + i t / m per Gaussian term."""
    terms = []
    for term in s.terms:
        w_new = term.width2 + 1j * t / mass
        # principal roots on the right half-plane compose exactly under t1 + t2
        amp = term.amplitude * np.sqrt(term.width2) / np.sqrt(w_new)
        terms.append(GaussianTerm(complex(amp), term.center, complex(w_new)))
    return RealPacketState(tuple(terms))


def evolve_real_harmonic(s: HarmonicState, t: float) -> HarmonicState:
    E = s.omega * (np.arange(len(s.coefficients)) + 0.5)
    return HarmonicState(s.coefficients * np.exp(-1j * t * E), s.mass, s.omega)


def evolve_ctqw(op: KernelOperator, initial: GridState, t: float) -> GridState:
    """Evolve the chi_N component by the eigen-decomposition of H; the rest is untouched."""
    c = op.coefficients(initial)
    inside = op.from_coefficients(initial.window, c)
    evals, evecs = np.linalg.eigh(op.matrix)
    c_t = evecs @ (np.exp(-1j * t * evals) * (evecs.conj().T @ c))
    return (initial - inside) + op.from_coefficients(initial.window, c_t)


def _evolve_padic_any(state, op, t):
    if isinstance(op, VladimirovOperator):
        if isinstance(state, GridState):
            return evolve_padic(state.to_spectral(), op, t).to_grid()
        return evolve_padic(state, op, t)
    if isinstance(state, SpectralState):
        return evolve_ctqw(op, state.to_grid(), t).to_spectral()
    return evolve_ctqw(op, state, t)


def evolve_product(state: ProductState | JointSpectralState, H: CompositeHamiltonian, t: float):
    """Evolve under the separable H_inf + H_p.

    Product states evolve factor by factor; joint amplitudes A[rbk, m] pick up
    the phase exp(-i t (E_rbk + E_m)).
    """
    if isinstance(state, JointSpectralState):
        if not isinstance(H.real, HarmonicHamiltonian) or not isinstance(H.padic, VladimirovOperator):
            raise ValueError("joint amplitudes need a harmonic real sector and a Vladimirov p-adic sector")
        if H.padic.window != state.window:
            raise ValueError("window mismatch")
        if (H.real.mass, H.real.omega) != (state.mass, state.omega):
            raise ValueError("oscillator parameters do not match the state's basis")
        E_p = H.padic.energies()
        E_m = H.real.omega * (np.arange(state.amplitudes.shape[1]) + 0.5)
        phase = np.exp(-1j * t * (E_p[:, None] + E_m[None, :]))
        return JointSpectralState(state.window, state.amplitudes * phase, state.mass, state.omega)

    real = state.real_part
    if isinstance(H.real, FreeHamiltonian):
        if not isinstance(real, RealPacketState):
            raise ValueError("free real sector evolves packet states")
        real = evolve_real_free(real, H.real.mass, t)
    else:
        if not isinstance(real, HarmonicState):
            raise ValueError("harmonic real sector evolves eigenbasis states")
        real = evolve_real_harmonic(real, t)
    return ProductState(real, _evolve_padic_any(state.padic_part, H.padic, t))


def energy(state, H) -> float:
    """<psi, H psi> for any supported (state, Hamiltonian) pair."""
    if isinstance(H, CompositeHamiltonian):
        if isinstance(state, JointSpectralState):
            E_p = H.padic.energies()
            E_m = H.real.omega * (np.arange(state.amplitudes.shape[1]) + 0.5)
            return float(np.sum((E_p[:, None] + E_m[None, :]) * np.abs(state.amplitudes) ** 2))
        nr = state.real_part.norm_squared()
        npd = state.padic_part.norm_squared()
        return energy(state.real_part, H.real) * npd + energy(state.padic_part, H.padic) * nr
    if isinstance(H, FreeHamiltonian):
        return kinetic_energy(state, H.mass)
    if isinstance(H, HarmonicHamiltonian):
        return harmonic_energy(state)
    return padic_energy(H, state)


def fidelity(a: SpectralState, b: SpectralState) -> float:
    return abs(b.inner(a)) / (a.norm() * b.norm())


# --------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class EvolutionPlan:
    hamiltonian: object
    times: tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if not all(np.isfinite(times)):
            raise ValueError("time values must be finite")
        object.__setattr__(self, "times", times)


def _evolve_any(state, H, t):
    if isinstance(H, CompositeHamiltonian):
        return evolve_product(state, H, t)
    if isinstance(H, VladimirovOperator):
        return evolve_padic(state, H, t)
    if isinstance(H, KernelOperator):
        return evolve_ctqw(H, state, t)
    if isinstance(H, FreeHamiltonian):
        return evolve_real_free(state, H.mass, t)
    if isinstance(H, HarmonicHamiltonian):
        return evolve_real_harmonic(state, t)
    raise TypeError(f"unsupported Hamiltonian {type(H).__name__}")


def run_plan(initial, plan: EvolutionPlan) -> list:
    """State at every time of the plan, each evolved from ``initial`` in one shot."""
    return [_evolve_any(initial, plan.hamiltonian, t) for t in plan.times]


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory(path: str | Path, times: Sequence[float], states: Iterable[SpectralState | GridState],
                     header: Sequence[str] = ()) -> None:
    """CSV rows ``t,index,re,im`` in canonical index order."""
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["t", "index", "re", "im"])
        for t, st in zip(times, states):
            vec = st.vector if isinstance(st, SpectralState) else st.values
            for i, c in enumerate(vec):
                out.writerow([_fmt(t), i, _fmt(c.real), _fmt(c.imag)])


def write_diagnostics(path: str | Path, times: Sequence[float], norms: Sequence[float],
                      energies: Sequence[float], header: Sequence[str] = ()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["t", "norm", "energy"])
        for t, n, e in zip(times, norms, energies):
            out.writerow([_fmt(t), _fmt(n), _fmt(e)])
