"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

from __future__ import annotations

import math
import random
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import brute_basis_matrix, random_spectral, random_vector, vladimirov_oracle
from padicqm.config import parse_config_text
from padicqm.dynamics import evolve_ctqw, evolve_padic, evolve_product, evolve_real_free, evolve_real_harmonic, fidelity
from padicqm.experiments import run_two_slit
from padicqm.measurement import (
    GrwParams,
    RestrictionCase,
    grw_localize,
    grw_probability_density,
    grw_trajectory,
    interaction_probability,
    project_ball,
    restrict_wavelet,
)
from padicqm.operators import (
    CompositeHamiltonian,
    FreeHamiltonian,
    HarmonicHamiltonian,
    VladimirovOperator,
    apply_vladimirov_direct,
    apply_vladimirov_spectral,
    build_kernel,
    vladimirov_direct_at,
)
from padicqm.padic_core import Ball, BallRelation, ball_relation, monna_image_of_ball, partition
from padicqm.states import (
    GridState,
    HarmonicState,
    JointSpectralState,
    ProductState,
    RealPacketState,
    SpectralState,
    Window,
    expand_indicator,
)


@pytest.fixture
def report(capsys):
    def _report(number: int, name: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\nACCEPTANCE {number:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}")
        assert ok, detail
    return _report


def test_01_basis_orthonormality(report):
    w = Window(2, 2, 3)
    B = brute_basis_matrix(w)
    gram = B.conj() @ B.T * 2.0**-3
    dev = float(np.max(np.abs(gram - np.eye(32))))
    report(1, "basis orthonormality (2,2,3)", gram.shape == (32, 32) and dev <= 1e-12, f"max deviation {dev:.2e}")


def test_02_eigenvalue_relation(report):
    worst = 0.0
    for p, R, K in ((2, 2, 2), (3, 1, 2)):
        w = Window(p, R, K)
        for alpha in (0.5, 1.0, 2.0):
            op = VladimirovOperator(alpha, w)
            for pos in range(w.size):
                e = np.zeros(w.size)
                e[pos] = 1
                s = SpectralState.from_vector(w, e)
                spectral = apply_vladimirov_spectral(op, s).to_grid().values
                direct = apply_vladimirov_direct(op, s.to_grid()).values
                brute = vladimirov_oracle(w, alpha, s.to_grid().values)
                scale = np.max(np.abs(direct))
                worst = max(worst, np.max(np.abs(spectral - direct)) / scale, np.max(np.abs(brute - direct)) / scale)
    report(2, "spectral vs direct D^alpha", worst <= 1e-10, f"max relative difference {worst:.2e}")


def test_03_worked_example(report):
    p, alpha = 2, 1.0
    # oracle: integral over |z|_2 > 1 of |z|^-2, summed shell by shell
    tail = sum((2**k - 2 ** (k - 1)) * 2.0 ** (-2 * k) for k in range(1, 80))
    c = (1 - p**alpha) / (1 - p ** (-alpha - 1))
    inside_oracle = c * (-tail)
    outside_oracle = c * 2.0**-2  # only z in x + Z_2 contributes, |z| = 2
    w = Window(p, 1, 2)
    f = GridState.indicator(w, Ball(p, 0))
    op = VladimirovOperator(alpha, w)
    out = apply_vladimirov_direct(op, f).values
    mask = w.ball_mask(Ball(p, 0))
    far = vladimirov_direct_at(op, f, Fraction(1, 4))
    errs = [abs(tail - 0.5), np.max(np.abs(out[mask] - inside_oracle)), np.max(np.abs(out[~mask] - outside_oracle)),
            abs(inside_oracle - 2 / 3), abs(outside_oracle + 1 / 3), abs(far - (-(4 / 3) / 16))]
    report(3, "worked example 2/3 and -1/3", max(errs) <= 1e-10, f"max error {max(errs):.2e}")


def test_04_indicator_expansion(report):
    worst, exact = 0.0, True
    for p, R in ((2, 3), (3, 2), (5, 1)):
        w = Window(p, R, 1)
        s, tail = expand_indicator(Ball(p, 0), w)
        B = brute_basis_matrix(w)
        brute = B.conj() @ GridState.indicator(w, Ball(p, 0)).values * float(p) ** (-w.K)
        for pos, idx in enumerate(w.wavelet_indices(), start=1):
            if idx.r >= 1 and not idx.b.digits:
                worst = max(worst, abs(brute[pos] - p ** (-idx.r / 2)), abs(s.vector[pos] - p ** (-idx.r / 2)))
        captured = sum((p - 1) * Fraction(p) ** (-r) for r in range(1, R + 1))
        exact &= captured == 1 - Fraction(p) ** (-R) and tail == 1 - captured
        worst = max(worst, abs(np.sum(np.abs(s.coefficients) ** 2) - float(captured)))
    report(4, "indicator expansion", worst <= 1e-12 and exact, f"max error {worst:.2e}, exact mass {exact}")


def test_05_unitarity(report, rng):
    drift = {}
    w = Window(3, 1, 2)
    op = VladimirovOperator(1.0, w)
    s = random_spectral(rng, w)
    n0 = s.norm()
    for _ in range(100):
        s = evolve_padic(s, op, 0.07)
    drift["p-adic"] = abs(s.norm() - n0)

    packet = RealPacketState((RealPacketState.gaussian(rng.normal(), 0.6).terms
                              + RealPacketState.gaussian(rng.normal(), 0.9, complex(*rng.normal(size=2))).terms))
    st, n0 = packet, packet.norm()
    for _ in range(100):
        st = evolve_real_free(st, 0.5, 0.07)
    drift["real free"] = abs(st.norm() - n0)

    h = HarmonicState(random_vector(rng, 8), 0.5, 1.0)
    n0 = h.norm()
    for _ in range(100):
        h = evolve_real_harmonic(h, 0.07)
    drift["real harmonic"] = abs(h.norm() - n0)

    H = CompositeHamiltonian(op, HarmonicHamiltonian(0.5, 1.0))
    joint = JointSpectralState(w, random_vector(rng, w.size * 6).reshape(w.size, 6), 0.5, 1.0)
    n0 = joint.norm()
    for _ in range(100):
        joint = evolve_product(joint, H, 0.07)
    drift["product (joint amplitudes)"] = abs(joint.norm() - n0)
    prod = ProductState(packet, random_spectral(rng, w))
    Hf = CompositeHamiltonian(op, FreeHamiltonian(0.5))
    n0 = prod.norm()
    for _ in range(100):
        prod = evolve_product(prod, Hf, 0.07)
    drift["product (packet x p-adic)"] = abs(prod.norm() - n0)

    A = random_vector(rng, 64).reshape(8, 8)
    kop = build_kernel((A + A.conj().T) / 2, 2, 3)
    c = random_vector(rng, 8)
    g = kop.from_coefficients(Window(2, 0, 4), c / np.linalg.norm(c)) + GridState(Window(2, 0, 4), random_vector(rng, 16))
    n0 = g.norm()
    for _ in range(100):
        g = evolve_ctqw(kop, g, 0.07)
    drift["CTQW"] = abs(g.norm() - n0)
    worst = max(drift.values())
    report(5, "unitarity over 100 steps", worst <= 1e-12,
           ", ".join(f"{k} {v:.1e}" for k, v in drift.items()))


def test_06_revival(report, rng):
    p, R = 3, 2
    w = Window(p, R, 1)
    op = VladimirovOperator(1.0, w, 0.5)
    s = random_spectral(rng, w, zero_constant=True)
    tau = 2 * math.pi * 3 ** (R - 1)
    phases = tau * op.energies()[1:] / (2 * math.pi)
    integer_phases = bool(np.allclose(phases, np.round(phases), rtol=0, atol=1e-9))
    err = abs(fidelity(s, evolve_padic(s, op, tau)) - 1)
    report(6, "revival at 2 pi 3^(R-1)", err <= 1e-9 and integer_phases, f"|fidelity - 1| = {err:.2e}")


def test_07_ctqw_oracle(report):
    rng = np.random.default_rng(7)
    A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    H = (A + A.conj().T) / 2
    op = build_kernel(H, 2, 3)
    w = Window(2, 0, 3)
    c0 = rng.normal(size=8) + 1j * rng.normal(size=8)
    c0 /= np.linalg.norm(c0)
    worst = 0.0
    for t in (0.1, 1.0, 10.0):
        out = op.coefficients(evolve_ctqw(op, op.from_coefficients(w, c0), t))
        worst = max(worst, float(np.max(np.abs(out - expm(-1j * t * H) @ c0))))
    report(7, "CTQW vs matrix exponential", worst <= 1e-9, f"max amplitude difference {worst:.2e}")


def test_08_monna_measure(report):
    gen = random.Random(8)
    ok = True
    for _ in range(100):
        p = gen.choice([2, 3, 5])
        l = gen.randint(-4, 6)
        ball = Ball(p, l, Fraction(gen.randrange(p**10), p**4))
        lo, hi = monna_image_of_ball(ball)
        ok &= isinstance(lo, Fraction) and hi - lo == ball.haar_measure
    report(8, "Monna image length = Haar measure", ok, "100 seeded balls, exact rational comparison")


def test_09_collapse_calculus(report, rng):
    pyth, cases_ok, part = 0.0, True, 0.0
    expected = {BallRelation.EQUAL: RestrictionCase.UNCHANGED, BallRelation.FIRST_IN_SECOND: RestrictionCase.UNCHANGED,
                BallRelation.SECOND_IN_FIRST: RestrictionCase.CONSTANT_ON_BALL, BallRelation.DISJOINT: RestrictionCase.ZERO}
    for p, R, K in ((2, 2, 2), (3, 1, 2)):
        w = Window(p, R, K)
        balls = [b for l in range(-R, K + 1) for b in partition(w.domain, l)]
        psi = random_spectral(rng, w)
        for ball in balls:
            a, b = project_ball(psi, ball)
            pyth = max(pyth, abs(psi.norm_squared() - a.norm_squared() - b.norm_squared()))
        for idx in w.wavelet_indices():
            for ball in balls:
                cases_ok &= restrict_wavelet(idx, ball).case is expected[ball_relation(idx.support(), ball)]
        field = RealPacketState.two_slit(0.9, 0.6)
        for l in range(-R, K + 1):
            total = sum(interaction_probability(psi, field, b) for b in partition(w.domain, l))
            part = max(part, abs(total - 1))
    ok = pyth <= 1e-12 and cases_ok and part <= 1e-6
    report(9, "collapse calculus", ok, f"Pythagoras {pyth:.1e}, case table {cases_ok}, partition sum {part:.1e}")


def _split_step(psi0, x, mass, t):
    k = 2 * np.pi * np.fft.fftfreq(len(x), d=x[1] - x[0])
    return np.fft.ifft(np.exp(-1j * t * k**2 / (2 * mass)) * np.fft.fft(psi0))


def test_10_two_slit_real_sector(report, tmp_path):
    cfg = parse_config_text("times = 0,0.5,1,2", "two_slit")
    run_two_slit(cfg, tmp_path)
    lines = [ln for ln in (tmp_path / "real_pattern.csv").read_text().splitlines() if not ln.startswith("#")]
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    s, sigma, m = float(cfg.s), cfg.sigma, cfg.m_inf
    # independent periodic grid with the same spacing that contains every emitted point
    h, N = cfg.real_spacing, 2**13
    xg = (np.arange(N) - N // 2) * h
    psi0 = np.exp(-((xg - s) ** 2) / (2 * sigma**2)) + np.exp(-((xg + s) ** 2) / (2 * sigma**2))
    psi0 /= math.sqrt(np.sum(np.abs(psi0) ** 2) * h)
    worst, vis = 0.0, []
    for t in cfg.times:
        sl = data[data[:, 0] == t]
        w2 = sigma**2 + 1j * t / m
        closed = sum(np.sqrt(sigma**2 / w2) * np.exp(-((sl[:, 1] - c) ** 2) / (2 * w2)) for c in (s, -s))
        closed = np.abs(closed) ** 2 / (2 * math.sqrt(math.pi) * sigma * (1 + math.exp(-(s**2) / sigma**2)))
        grid = np.abs(_split_step(psi0, xg, m, t)) ** 2
        idx = np.round(sl[:, 1] / h).astype(int) + N // 2
        worst = max(worst, np.max(np.abs(sl[:, 2] - closed)), np.max(np.abs(sl[:, 2] - grid[idx])))
        if t > 0:
            central = sl[np.abs(sl[:, 1]) <= s, 2]
            vis.append(float((central.max() - central.min()) / (central.max() + central.min())))
    ok = worst <= 1e-6 and all(v > 0 for v in vis)
    report(10, "two-slit real sector", ok, f"max density error {worst:.2e}, visibilities {[round(v, 4) for v in vis]}")


def test_11_grw(report):
    psi = RealPacketState.two_slit(1.0, 0.5)
    post = max(abs(grw_localize(psi, r, 0.4)[0].norm() - 1) for r in np.linspace(-2, 2, 21))
    r = np.linspace(-20, 20, 8001)
    mass = abs(np.trapezoid(grw_probability_density(psi, r, 0.4), r) - 1)
    rate, horizon, n = 2.0, 1.5, 1000
    counts = np.array([len(grw_trajectory(psi, GrwParams(0.4, rate), horizon, seed=k).events) for k in range(n)])
    se = math.sqrt(rate * horizon / n)
    z = abs(counts.mean() - rate * horizon) / se
    ok = post <= 1e-12 and mass <= 1e-6 and z <= 3
    report(11, "GRW comparison", ok, f"post-norm error {post:.1e}, |int P^2 - 1| {mass:.1e}, "
                                     f"event mean {counts.mean():.3f} vs {rate * horizon} ({z:.2f} SE)")


def test_12_determinism(report, tmp_path):
    A = np.random.default_rng(12).normal(size=(6, 6))
    H = A + A.T
    (tmp_path / "h.csv").write_text("\n".join(",".join(f"{float(v)!r},0.0" for v in row) for row in H) + "\n")
    configs = {
        "two-slit": "times = 0,0.5,1\nseed = 3",
        "ctqw": "p = 3\nlevel = 2\nmatrix_path = h.csv\ninitial = random\nseed = 3\ntimes = 0,1,4",
        "collapse": "scans = 0.2 1 2; 0.4 2 1; 0.8 0 -1\nseed = 3",
        "spectrum": "p = 2\nR = 2\nK = 3\nalpha = 1.5",
    }
    same = {}
    for cmd, text in configs.items():
        path = tmp_path / f"{cmd}.cfg"
        path.write_text(text)
        outputs = []
        for run in ("a", "b"):
            out = tmp_path / cmd / run
            cp = subprocess.run([sys.executable, "-m", "padicqm", cmd, "--config", str(path), "--out", str(out)],
                                capture_output=True, text=True)
            assert cp.returncode == 0, cp.stderr
            outputs.append({p.name: p.read_bytes() for p in sorted(Path(out).iterdir())})
        same[cmd] = outputs[0] == outputs[1] and bool(outputs[0])
    report(12, "determinism", all(same.values()), ", ".join(f"{k} {'identical' if v else 'DIFFERS'}"
                                                            for k, v in same.items()))
