"""Ball-projection collapse through the Monna map, and the GRW comparison model."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .dynamics import evolve_real_free
from .padic_core import Ball, BallRelation, PAdicApprox, ball_relation, monna_image_of_ball
from .states import (
    GaussianTerm,
    GridState,
    ProductState,
    RealPacketState,
    SpectralState,
    Window,
    WaveletIndex,
    eval_wavelet,
    expand_indicator,
    sample_wavelet,
)

RealField = Union[RealPacketState, Callable[[np.ndarray], np.ndarray]]

DEFAULT_EXTRA_LEVELS = 4
ADAPTIVE_TOL = 1e-8


# --------------------------------------------------------------------------
# restriction of single wavelets to a ball


class RestrictionCase(enum.Enum):
    UNCHANGED = "support_inside_ball"
    CONSTANT_ON_BALL = "ball_inside_support"
    ZERO = "disjoint"


@dataclass(frozen=True)
class WaveletRestriction:
    """1_B * psi_rbk: the wavelet itself, a constant times 1_B, or zero."""

    case: RestrictionCase
    index: WaveletIndex
    ball: Ball
    constant: complex = 0j

    def to_grid(self, window: Window) -> GridState:
        if self.case is RestrictionCase.UNCHANGED:
            return sample_wavelet(window, self.index)
        if self.case is RestrictionCase.CONSTANT_ON_BALL:
            return GridState.indicator(window, self.ball) * self.constant
        return GridState.zeros(window)


def restrict_wavelet(idx: WaveletIndex, ball: Ball) -> WaveletRestriction:
    relation = ball_relation(idx.support(), ball)
    if relation in (BallRelation.FIRST_IN_SECOND, BallRelation.EQUAL):
        return WaveletRestriction(RestrictionCase.UNCHANGED, idx, ball)
    if relation is BallRelation.DISJOINT:
        return WaveletRestriction(RestrictionCase.ZERO, idx, ball)
    # the ball sits inside one level set of the character, so any point of it will do
    point = PAdicApprox.from_rational(ball.center, ball.prime, cap=max(ball.scale, 1 - idx.r))
    return WaveletRestriction(RestrictionCase.CONSTANT_ON_BALL, idx, ball, eval_wavelet(idx, point))


# --------------------------------------------------------------------------
# projection onto a ball


def project_ball(psi: SpectralState, ball: Ball) -> tuple[SpectralState, SpectralState]:
    """Split psi = psi^(B) + psi^(B^c) with psi^(B) = 1_B psi, on the spectral side.

    Wavelets supported inside B are kept; wavelets whose support contains B
    (and the constant mode) collapse to constants on B; the rest drop out.
    """
    w = psi.window
    if not w.contains_ball(ball):
        raise ValueError(f"ball {ball} is outside the domain {w.domain}")
    if ball.scale > w.K:
        raise ValueError(f"ball {ball} is finer than the window resolution")
    inside = np.zeros(w.size, dtype=complex)
    on_ball = psi.constant_mode * w.prime ** (-w.R / 2)
    for pos, (idx, c) in enumerate(zip(w.wavelet_indices(), psi.coefficients), start=1):
        if c == 0:
            continue
        res = restrict_wavelet(idx, ball)
        if res.case is RestrictionCase.UNCHANGED:
            inside[pos] = c
        elif res.case is RestrictionCase.CONSTANT_ON_BALL:
            on_ball += c * res.constant
    indicator, _ = expand_indicator(ball, w)
    projected = SpectralState.from_vector(w, inside + on_ball * indicator.vector)
    return projected, psi - projected


# --------------------------------------------------------------------------
# Monna pullback and interaction probabilities


def _real_values(field_: RealField, x: np.ndarray) -> np.ndarray:
    return np.asarray(field_(x), dtype=complex) * np.ones_like(x)


@dataclass(frozen=True, eq=False)
class Pullback:
    """Psi_p(x) Psi_inf(M(x)) sampled at the Monna-image midpoints of level-m cosets."""

    grid: GridState
    level: int
    error_bound: float

    def weight(self) -> float:
        return self.grid.norm_squared()


def _lipschitz_sq(field_: RealField, lo: float, hi: float, samples: int = 4097) -> float:
    x = np.linspace(lo, hi, samples)
    dens = np.abs(_real_values(field_, x)) ** 2
    return float(np.max(np.abs(np.diff(dens))) / (x[1] - x[0]))


def _pullback_at(psi_p: GridState, field_: RealField, m: int) -> GridState:
    fine = psi_p.refine(m)
    w = fine.window
    mid = w.monna_left() + 0.5 * float(w.prime) ** (-m)
    return GridState(w, fine.values * _real_values(field_, mid))


def pullback_real(psi_inf: RealField, psi_p: GridState | SpectralState,
                  refinement: int | str | None = None) -> Pullback:
    """Pull the real wavefunction back to Q_p through the Monna map.

    ``refinement`` is the coset level m (default ``K + 4``) or ``"adaptive"``,
    which doubles the resolution until the weight changes by less than 1e-8.
    The bound is ``Lip(|Psi_inf|^2) p^-m / 2 * ||Psi_p||^2``, a bound on the
    midpoint-rule error of the weight.
    """
    grid = psi_p.to_grid() if isinstance(psi_p, SpectralState) else psi_p
    w = grid.window
    if refinement is None:
        refinement = w.K + DEFAULT_EXTRA_LEVELS
    if refinement == "adaptive":
        m = w.K
        pb = _pullback_at(grid, psi_inf, m)
        while m < w.K + 16:
            nxt = _pullback_at(grid, psi_inf, m + 1)
            m += 1
            converged = abs(nxt.norm_squared() - pb.norm_squared()) < ADAPTIVE_TOL
            pb = nxt
            if converged:
                break
    else:
        m = int(refinement)
        if m < w.K:
            raise ValueError("refinement must be at least the state resolution K")
        pb = _pullback_at(grid, psi_inf, m)
    lip = _lipschitz_sq(psi_inf, 0.0, float(w.prime) ** w.R)
    bound = lip * 0.5 * float(w.prime) ** (-m) * grid.norm_squared()
    return Pullback(pb, m, bound)


def joint_weight(psi_p, psi_inf: RealField, refinement=None) -> float:
    """A(M) = ||Psi_p(.) Psi_inf(M(.))||^2 over Q_p."""
    return pullback_real(psi_inf, psi_p, refinement).weight()


def interaction_probability(psi_p, psi_inf: RealField, ball: Ball, refinement=None) -> float:
    """P_int(B) = (1/A(M)) integral_B |Psi_p|^2 |Psi_inf(M(x))|^2 dx, for states at one time."""
    pb = pullback_real(psi_inf, psi_p, refinement).grid
    total = pb.norm_squared()
    if total == 0:
        raise ValueError("joint weight A(M) is zero")
    mask = pb.window.ball_mask(ball)
    return float(np.sum(np.abs(pb.values[mask]) ** 2)) * pb.prime ** (-pb.window.K) / total


@dataclass(frozen=True, eq=False)
class CollapseOutcome:
    """Result of one apparatus scan of ``ball``.

    ``found`` is False when the scanned region carries no weight; the other
    state fields are then None.
    """

    ball: Ball
    found: bool
    weight: float
    p_int: float
    localized: GridState | None = None
    post_state: SpectralState | None = None
    monna_interval: tuple = field(default=())

    @property
    def post_norm(self) -> float:
        return self.post_state.norm() if self.post_state is not None else 0.0


def collapse_joint(psi: ProductState, ball: Ball, refinement=None, tol: float = 1e-24) -> CollapseOutcome:
    """Localize the joint state on ``ball``: 1_B Psi_p Psi_inf(M(x)) plus its weight.

    The post-measurement p-adic state is ``Psi^(B) / ||Psi^(B)||``.  A scan
    whose projected mass is below ``tol`` (relative) is a zero-weight outcome.
    """
    psi_p = psi.padic_part
    if isinstance(psi_p, GridState):
        psi_p = psi_p.to_spectral()
    projected, _ = project_ball(psi_p, ball)
    pb = pullback_real(psi.real_part, projected, refinement)
    total = joint_weight(psi_p, psi.real_part, pb.level)
    weight = pb.weight()
    interval = monna_image_of_ball(ball)
    if weight <= tol * total or projected.norm_squared() <= tol * psi_p.norm_squared():
        return CollapseOutcome(ball, False, 0.0, 0.0, monna_interval=interval)
    return CollapseOutcome(ball, True, weight, weight / total if total > 0 else 0.0,
                           pb.grid, projected.normalized(), interval)


# --------------------------------------------------------------------------
# GRW comparison model


@dataclass(frozen=True)
class GrwParams:
    sigma: float
    rate: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.rate > 0:
            raise ValueError("rate must be positive")


def grw_gaussian(r: float, sigma: float) -> RealPacketState:
    """g_r(x) = (2 pi sigma^2)^(-1/4) exp(-(x - r)^2 / (4 sigma^2))."""
    amp = (2 * math.pi * sigma**2) ** -0.25
    return RealPacketState((GaussianTerm(complex(amp), complex(r), complex(2 * sigma**2)),))


def _multiply(psi: RealPacketState, r: float, sigma: float) -> RealPacketState:
    """g_r * psi, kept in closed Gaussian form."""
    W = 2 * sigma**2
    amp0 = (2 * math.pi * sigma**2) ** -0.25
    terms = []
    for t in psi.terms:
        w_new = 1 / (1 / t.width2 + 1 / W)
        c_new = w_new * (t.center / t.width2 + r / W)
        amp = t.amplitude * amp0 * np.exp(-((t.center - r) ** 2) / (2 * (t.width2 + W)))
        terms.append(GaussianTerm(complex(amp), complex(c_new), complex(w_new)))
    return RealPacketState(tuple(terms))


def grw_probability_density(psi: RealPacketState, r, sigma: float) -> np.ndarray:
    """P(r)^2 = integral g_r(x)^2 |psi(x)|^2 dx, vectorized over ``r``."""
    r = np.asarray(r, dtype=float)
    s2 = sigma**2
    total = np.zeros(r.shape, dtype=complex)
    for u in psi.terms:
        for v in psi.terms:
            wuc, cuc = np.conj(u.width2), np.conj(u.center)
            a = 1 / (2 * wuc) + 1 / (2 * v.width2) + 1 / (2 * s2)
            b = cuc / wuc + v.center / v.width2 + r / s2
            c = -(cuc**2 / (2 * wuc) + v.center**2 / (2 * v.width2) + r**2 / (2 * s2))
            total += np.conj(u.amplitude) * v.amplitude * np.sqrt(np.pi / a) * np.exp(b * b / (4 * a) + c)
    return total.real / math.sqrt(2 * math.pi * s2)


def grw_localize(psi: RealPacketState, r: float, sigma: float) -> tuple[RealPacketState, float]:
    """Return (g_r psi / P(r), P(r))."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    hit = _multiply(psi, r, sigma)
    P = hit.norm()
    if P == 0:
        raise ValueError("P(r) vanishes; localization undefined")
    return hit.scaled(1 / P), P


def _sample_r(psi: RealPacketState, sigma: float, rng: np.random.Generator, points: int = 4001) -> float:
    mean, var = psi.moments()
    half = 12 * (math.sqrt(max(var, 0.0)) + sigma)
    r = np.linspace(mean - half, mean + half, points)
    dens = np.clip(grw_probability_density(psi, r, sigma), 0, None)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(r))])
    return float(np.interp(rng.uniform() * cdf[-1], cdf, r))


@dataclass(frozen=True)
class GrwEvent:
    t: float
    r: float
    pre_norm: float
    post_norm: float


@dataclass(frozen=True, eq=False)
class GrwTrajectory:
    events: tuple[GrwEvent, ...]
    final_state: RealPacketState


def grw_trajectory(psi0: RealPacketState, params: GrwParams, horizon: float, seed: int,
                   mass: float = 0.5) -> GrwTrajectory:
    """Free evolution interrupted by localizations at Poisson(rate) times.

    Hit centers r are drawn from the density P(r)^2, which integrates to one.
    """
    rng = np.random.default_rng(seed)
    state = psi0
    t = 0.0
    events = []
    while True:
        dt = rng.exponential(1 / params.rate)
        if t + dt > horizon:
            state = evolve_real_free(state, mass, horizon - t)
            break
        t += dt
        state = evolve_real_free(state, mass, dt)
        r = _sample_r(state, params.sigma, rng)
        pre = state.norm()
        state, _ = grw_localize(state, r, params.sigma)
        events.append(GrwEvent(t, r, pre, state.norm()))
    return GrwTrajectory(tuple(events), state)


def write_grw_log(path, trajectory: GrwTrajectory) -> None:
    with open(path, "w") as fh:
        fh.write("t_event,r,pre_norm,post_norm\n")
        for e in trajectory.events:
            fh.write(f"{e.t!r},{e.r!r},{e.pre_norm!r},{e.post_norm!r}\n")


def format_collapse_record(number: int, t: float, outcome: CollapseOutcome) -> str:
    """One scan as a ``key=value`` line: ball, P_int, weight, post-norm, outcome."""
    lo, hi = outcome.monna_interval
    result = "localized" if outcome.found else "zero_weight"
    return (f"scan={number} t={t!r} ball={outcome.ball} monna=[{lo},{hi}] "
            f"P_int={outcome.p_int!r} weight={outcome.weight!r} "
            f"post_norm={outcome.post_norm!r} outcome={result}")


def write_collapse_report(path, records, header=()) -> None:
    """``records`` holds (t, CollapseOutcome) pairs in scan order."""
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for i, (t, outcome) in enumerate(records, start=1):
            fh.write(format_collapse_record(i, t, outcome) + "\n")
