"""Scenario runners: two-slit patterns, CTQW occupations, collapse scans, spectra.

Every runner writes CSV files into an output directory.  Each file opens
with a ``#`` comment block holding the fully resolved configuration, and all
floats are written with ``repr`` so reruns are byte-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .config import ConfigError, ScenarioConfig
from .dynamics import evolve_ctqw, evolve_padic, evolve_real_free
from .measurement import collapse_joint, write_collapse_report
from .operators import (
    MatrixFormatError,
    VladimirovOperator,
    build_kernel,
    kinetic_energy,
    load_matrix,
    padic_energy,
)
from .padic_core import Ball
from .states import (
    GridState,
    ProductState,
    RealGrid,
    RealPacketState,
    SpectralState,
    Window,
    density_padic,
    density_real,
    trapezoid,
)

NORM_TOL = 1e-10
REAL_MASS_TOL = 1e-6


class NumericalContractError(RuntimeError):
    """A computed result broke a guaranteed invariant (norm drift and the like)."""


@dataclass(frozen=True)
class RunResult:
    files: tuple[Path, ...]
    summary: dict


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_table(path: Path, cfg: ScenarioConfig, columns, rows, extra=()) -> Path:
    with open(path, "w", newline="") as fh:
        for line in cfg.as_lines():
            fh.write(f"# {line}\n")
        for line in extra:
            fh.write(f"# {line}\n")
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(columns)
        for row in rows:
            out.writerow([_fmt(v) for v in row])
    return path


def _out_dir(out: str | Path | None, cfg: ScenarioConfig) -> Path:
    path = Path(out or cfg.output_dir or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _check_norm(label: str, value: float, target: float = 1.0, tol: float | None = None) -> None:
    tol = NORM_TOL if tol is None else tol
    if abs(value - target) > tol:
        raise NumericalContractError(f"{label}: norm {value!r} drifted from {target!r} by more than {tol}")


# --------------------------------------------------------------------------
# two-slit


def slit_balls(cfg: ScenarioConfig) -> tuple[Ball, Ball]:
    return Ball(cfg.p, cfg.L, cfg.s), Ball(cfg.p, cfg.L, -cfg.s)


def two_slit_padic_state(cfg: ScenarioConfig) -> tuple[SpectralState, float]:
    """A_p (1_{s + p^L Z_p} + 1_{-s + p^L Z_p}) and its normalization A_p."""
    window = Window(cfg.p, cfg.R, cfg.K)
    b1, b2 = slit_balls(cfg)
    grid = GridState.indicator(window, b1) + GridState.indicator(window, b2)
    amp = 1.0 / grid.norm()
    return (grid * amp).to_spectral(), amp


def fringe_visibility(x: np.ndarray, density: np.ndarray, half_width: float) -> float:
    """(max - min) / (max + min) of the density over |x| <= half_width."""
    central = density[np.abs(x) <= half_width]
    hi, lo = float(np.max(central)), float(np.min(central))
    return (hi - lo) / (hi + lo) if hi + lo > 0 else 0.0


def run_two_slit(cfg: ScenarioConfig, out: str | Path | None = None) -> RunResult:
    out_dir = _out_dir(out, cfg)
    psi_p, amp_p = two_slit_padic_state(cfg)
    psi_inf = RealPacketState.two_slit(float(cfg.s), cfg.sigma)
    op = VladimirovOperator(cfg.alpha, psi_p.window, cfg.m_p)
    x = RealGrid(cfg.real_extent, cfg.real_spacing).points()
    window = psi_p.window
    monna = window.monna_left()
    order = np.argsort(monna, kind="stable")
    cell = float(window.prime) ** (-window.K)
    half = abs(float(cfg.s))

    padic_rows, real_rows, diag_rows = [], [], []
    for t in cfg.times:
        st = evolve_padic(psi_p, op, t)
        rt = evolve_real_free(psi_inf, cfg.m_inf, t)
        pn, rn = st.norm(), rt.norm()
        _check_norm(f"p-adic state at t={t!r}", pn)
        _check_norm(f"real state at t={t!r}", rn)
        dens_p = density_padic(st).values.real
        for n in order:
            padic_rows.append((t, int(n), monna[n], dens_p[n]))
        dens_r = density_real(rt, x)
        mass = trapezoid(dens_r, x)
        if abs(mass - 1) > REAL_MASS_TOL:
            raise NumericalContractError(
                f"real density at t={t!r} integrates to {mass!r} on the grid; widen real_extent or refine real_spacing")
        real_rows.extend(zip([t] * len(x), x, dens_r))
        diag_rows.append((t, pn, pn - 1.0, rn, rn - 1.0, padic_energy(op, st), kinetic_energy(rt, cfg.m_inf),
                          float(np.sum(dens_p)) * cell, mass,
                          fringe_visibility(x, dens_r, half)))

    tail = abs(psi_p.constant_mode) ** 2
    extra = [f"A_p = {amp_p!r}", f"tail_mass = {tail!r}", f"truncation_leakage = {op.truncation_leakage()!r}"]
    files = (
        _write_table(out_dir / "padic_pattern.csv", cfg, ["t", "coset", "monna", "density"], padic_rows,
                     ["label = dark", *extra]),
        _write_table(out_dir / "real_pattern.csv", cfg, ["t", "x", "density"], real_rows, ["label = bright"]),
        _write_table(out_dir / "diagnostics.csv", cfg,
                     ["t", "padic_norm", "padic_drift", "real_norm", "real_drift", "padic_energy",
                      "real_energy", "padic_integral", "real_integral", "visibility"], diag_rows, extra),
    )
    return RunResult(files, {"A_p": amp_p, "tail_mass": tail, "visibility": [r[-1] for r in diag_rows]})


# --------------------------------------------------------------------------
# CTQW


def ctqw_initial_state(cfg: ScenarioConfig, op) -> GridState:
    window = Window(cfg.p, 0, cfg.K)
    if cfg.initial == "random":
        rng = np.random.default_rng(cfg.seed)
        c = rng.normal(size=op.dimension) + 1j * rng.normal(size=op.dimension)
        c /= np.linalg.norm(c)
    else:
        c = np.zeros(op.dimension, dtype=complex)
        c[int(cfg.initial)] = 1.0
    return op.from_coefficients(window, c)


def run_ctqw(cfg: ScenarioConfig, out: str | Path | None = None) -> RunResult:
    out_dir = _out_dir(out, cfg)
    try:
        H = load_matrix(cfg.matrix_path, cfg.matrix_format, cfg.gamma)
    except OSError as exc:
        raise ConfigError("matrix_path", f"cannot read {cfg.matrix_path}: {exc.strerror}") from None
    except MatrixFormatError as exc:
        raise ConfigError("matrix_path", str(exc)) from None
    try:
        op = build_kernel(H, cfg.p, cfg.level, cfg.sites or None)
    except ValueError as exc:
        field = "sites" if "sites" in str(exc) else "matrix_path"
        raise ConfigError(field, str(exc)) from None
    if cfg.initial != "random" and not (cfg.initial.isdigit() and int(cfg.initial) < op.dimension):
        raise ConfigError("initial", f"must be 'random' or a site position below {op.dimension}")
    psi0 = ctqw_initial_state(cfg, op)
    occ_rows, diag_rows = [], []
    for t in cfg.times:
        st = evolve_ctqw(op, psi0, t)
        occ = np.abs(op.coefficients(st)) ** 2
        total = float(np.sum(occ))
        _check_norm(f"total occupation at t={t!r}", total)
        occ_rows.extend((t, site, o) for site, o in zip(op.sites, occ))
        diag_rows.append((t, total, padic_energy(op, st)))
    files = (
        _write_table(out_dir / "occupations.csv", cfg, ["t", "site", "occupation"], occ_rows),
        _write_table(out_dir / "diagnostics.csv", cfg, ["t", "total_occupation", "energy"], diag_rows),
    )
    return RunResult(files, {"sites": op.sites})


# --------------------------------------------------------------------------
# collapse scans


def run_collapse(cfg: ScenarioConfig, out: str | Path | None = None) -> RunResult:
    """Scans in time order; pure Schroedinger evolution between them."""
    out_dir = _out_dir(out, cfg)
    psi_p, _ = two_slit_padic_state(cfg)
    psi_inf = RealPacketState.two_slit(float(cfg.s), cfg.sigma)
    op = VladimirovOperator(cfg.alpha, psi_p.window, cfg.m_p)
    window = psi_p.window
    monna = window.monna_left()
    order = np.argsort(monna, kind="stable")
    refinement = cfg.resolved_refinement()

    t_now = 0.0
    records, dens_rows = [], []
    for number, scan in enumerate(cfg.scans, start=1):
        psi_p = evolve_padic(psi_p, op, scan.t - t_now)
        psi_inf = evolve_real_free(psi_inf, cfg.m_inf, scan.t - t_now)
        t_now = scan.t
        _check_norm(f"p-adic state before scan {number}", psi_p.norm())
        ball = Ball(cfg.p, scan.scale, Fraction(scan.center))
        outcome = collapse_joint(ProductState(psi_inf, psi_p), ball, refinement)
        pre = density_padic(psi_p).values.real
        if outcome.found:
            psi_p = outcome.post_state
            _check_norm(f"post-measurement state of scan {number}", psi_p.norm())
        post = density_padic(psi_p).values.real
        records.append((scan.t, outcome))
        for phase, dens in (("pre", pre), ("post", post)):
            dens_rows.extend((number, scan.t, phase, int(n), monna[n], dens[n]) for n in order)

    report = out_dir / "scans.txt"
    write_collapse_report(report, records, cfg.as_lines())
    files = (
        report,
        _write_table(out_dir / "densities.csv", cfg, ["scan", "t", "phase", "coset", "monna", "density"],
                     dens_rows),
    )
    return RunResult(files, {"outcomes": [o for _, o in records]})


# --------------------------------------------------------------------------
# spectrum


def spectrum_rows(cfg: ScenarioConfig) -> list[tuple]:
    """(r, multiplicity, eigenvalue, energy) per window scale, constant mode last."""
    op = VladimirovOperator(cfg.alpha, Window(cfg.p, cfg.R, cfg.K), cfg.m_p)
    p = cfg.p
    rows = []
    for r in range(cfg.R, -cfg.K, -1):
        lam = float(p) ** ((1 - r) * cfg.alpha)
        rows.append((r, (p - 1) * p ** (cfg.R - r), lam, lam / (2 * cfg.m_p)))
    lam0 = op.constant_eigenvalue
    rows.append(("const", 1, lam0, lam0 / (2 * cfg.m_p)))
    return rows


def run_spectrum(cfg: ScenarioConfig, out: str | Path | None = None) -> RunResult:
    out_dir = _out_dir(out, cfg)
    rows = spectrum_rows(cfg)
    path = _write_table(out_dir / "spectrum.csv", cfg, ["r", "multiplicity", "eigenvalue", "energy"], rows)
    return RunResult((path,), {"rows": rows})


RUNNERS = {
    "two_slit": run_two_slit,
    "ctqw": run_ctqw,
    "collapse": run_collapse,
    "spectrum": run_spectrum,
}


def run_scenario(cfg: ScenarioConfig, out: str | Path | None = None) -> RunResult:
    return RUNNERS[cfg.scenario](cfg, out)


__all__ = [
    "NumericalContractError", "RunResult", "RUNNERS", "run_scenario", "run_two_slit", "run_ctqw",
    "run_collapse", "run_spectrum", "spectrum_rows", "two_slit_padic_state", "fringe_visibility",
    "slit_balls",
]
