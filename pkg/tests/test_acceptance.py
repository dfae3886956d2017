"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v``; criteria 3 and 7
dominate the runtime (about a quarter of an hour together on one core).
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from ringsqueeze import analytic, fock
from ringsqueeze.config import RunConfig
from ringsqueeze.experiments import SweepSpec, optimal_seed, run_experiment
from ringsqueeze.model import (FreeEvolution, PhysicalConfig, RamanPulse, SeedPulse, SqueezeWindow,
                               derive_dimensionless, tau_for_r)
from ringsqueeze.sequence import TWASettings, readout, run_schedule, xi_vs_interrogation
from ringsqueeze.twa import engine
from ringsqueeze.twa.ensemble import MINUS, PLUS, mode_numbers
from ringsqueeze.twa.moments import estimate_moments

CFG = PhysicalConfig()
PARAMS = derive_dimensionless(CFG)
N0 = CFG.atom_number_initial
L = CFG.winding_number
CHI = analytic.OPTIMAL_CHI


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_1_closed_form_pins(report):
    t0 = time.perf_counter()
    xi_r0 = [analytic.wineland_xi(analytic.TwoModeState(0.0, CHI, n)) for n in (0.1, 1, 10, 1e4)]
    hl = analytic.heisenberg_xi_approx(0.25)
    trips = [analytic.wineland_xi(analytic.TwoModeState(r, CHI, analytic.min_seed_for_squeezing(r)))
             for r in (0.1, 0.5, 1.0, 2.0, 4.0)]
    ok = (all(x == 1.0 for x in xi_r0) and abs(hl - math.sqrt(2)) <= 1e-9
          and all(abs(x - 1) <= 1e-9 for x in trips))
    report(1, ok, f"xi(r=0)={xi_r0}, xi_HL(1/4)-sqrt2={hl - math.sqrt(2):.2e}, "
                  f"max|round trip-1|={max(abs(x - 1) for x in trips):.2e} "
                  f"({1e3 * (time.perf_counter() - t0):.1f} ms)")


def test_criterion_2_fock_equivalence(report):
    worst = {"n_plus": 0.0, "j_perp": 0.0, "var_jz": 0.0, "xi": 0.0}
    var_const = 0.0
    for n_seed in (1.0, 2.0, 4.0):
        for r in np.linspace(0.0, 1.5, 7):
            psi = fock.squeezed_seed_state(r, CHI, n_seed, fock.cutoff_for(r, n_seed))
            m = fock.moments(psi)
            s = analytic.TwoModeState(float(r), CHI, n_seed)
            j_perp = math.hypot(m["jx"], m["jy"])
            n_t = m["n_plus"] + m["n_minus"]
            fock_xi = math.sqrt(n_t * m["var_jz"]) / j_perp
            worst["n_plus"] = max(worst["n_plus"], rel(analytic.mode_population(s), m["n_plus"]))
            worst["j_perp"] = max(worst["j_perp"], rel(analytic.perpendicular_spin(s), j_perp))
            worst["var_jz"] = max(worst["var_jz"], rel(analytic.jz_variance(s), m["var_jz"]))
            worst["xi"] = max(worst["xi"], rel(analytic.wineland_xi(s), fock_xi))
            # the two seeded modes together hold 2 N_seed atoms, so Var = (2 N_seed) / 4
            var_const = max(var_const, rel(m["var_jz"], 2 * n_seed / 4))
    ok = max(worst.values()) <= 1e-6 and var_const <= 1e-8
    report(2, ok, f"max relative deviation {worst}; Var(Jz) vs total-seed/4: {var_const:.1e}")


def test_criterion_3_single_mode_twa_vs_analytic(report):
    t0 = time.perf_counter()
    settings = TWASettings(n_traj=10_000, master_seed=2024, single_mode=True)
    ens = run_schedule(CFG, [SeedPulse(10.0, CHI)], settings)
    lines, worst = [], 0.0
    for r in (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0):
        tau = tau_for_r(PARAMS, N0, r)
        ens = run_schedule(CFG, [SqueezeWindow(tau - ens.tau)], settings, ens)
        m = estimate_moments(ens, L)
        s = analytic.TwoModeState(r, CHI, 10.0)
        n_exact, xi_exact = analytic.mode_population(s), analytic.wineland_xi(s)
        assert n_exact < 0.02 * N0
        devs = (rel(m.populations[0], n_exact), rel(m.populations[2], n_exact), rel(m.xi, xi_exact))
        worst = max(worst, *devs)
        lines.append(f"r={r}: N+ {devs[0]:.3f} N- {devs[1]:.3f} xi {devs[2]:.3f}")
    report(3, worst <= 0.05, f"max relative deviation {worst:.4f} "
                             f"({time.perf_counter() - t0:.0f} s); " + "; ".join(lines))


def test_criterion_4_conservation(report):
    settings = TWASettings(n_traj=16, master_seed=5)
    ens = run_schedule(CFG, [SeedPulse(100.0, CHI)], settings)
    numbers = lambda e: np.sum(np.abs(e.amplitudes) ** 2, axis=-1)  # noqa: E731
    worst_n = worst_m = 0.0
    for seg in (SqueezeWindow(0.1), FreeEvolution(0.1, interaction_scale=1.0),
                FreeEvolution(0.1, interaction_scale=0.02)):
        out = engine.evolve(ens, seg, settings.step, params=PARAMS, winding=L, n0=N0)
        a, b = numbers(ens), numbers(out)
        total = a.sum(axis=1)
        worst_n = max(worst_n, float(np.max(np.abs(b.sum(axis=1) / total - 1)) / seg.duration))
        mag_a, mag_b = a[:, PLUS] - a[:, MINUS], b[:, PLUS] - b[:, MINUS]
        worst_m = max(worst_m, float(np.max(np.abs(mag_b - mag_a) / total)) / seg.duration)
        ens = out
    worst_p = 0.0
    for pulse in (RamanPulse(math.pi / 2, 0.1), RamanPulse(math.pi, 0.7)):
        out = engine.apply_raman_pulse(ens, pulse, L)
        worst_p = max(worst_p, float(np.max(np.abs(numbers(out).sum(1) / numbers(ens).sum(1) - 1))))
    ok = worst_n <= 1e-8 and worst_m <= 1e-8 and worst_p <= 1e-14
    report(4, ok, f"number drift {worst_n:.2e}/tau, magnetization drift {worst_m:.2e}/tau, "
                  f"pulse norm error {worst_p:.1e}")


def test_criterion_5_fringe_and_sql(report):
    settings = TWASettings(n_traj=4000, master_seed=11)
    ens = run_schedule(CFG, [SeedPulse(500.0, CHI), SqueezeWindow(0.0), RamanPulse(),
                             FreeEvolution(0.3)], settings)
    phis = np.linspace(0, 2 * math.pi, 12, endpoint=False)
    signals = np.array([readout(ens, RamanPulse(beam_rotation=p / (2 * L)), L, 1e-2).centre
                        for p in phis])  # (n_phi, n_traj)
    atoms = readout(ens, RamanPulse(), L, 1e-2).atoms
    design = np.stack([np.sin(phis), np.cos(phis)], axis=1)

    def visibility(sl):
        coef, *_ = np.linalg.lstsq(design, signals[:, sl].mean(axis=1), rcond=None)
        return math.hypot(*coef) / (0.5 * atoms[sl].mean())

    v = visibility(slice(None))
    edges = np.linspace(0, settings.n_traj, 21).astype(int)
    vb = [visibility(slice(lo, hi)) for lo, hi in zip(edges[:-1], edges[1:])]
    v_err = float(np.std(vb, ddof=1) / math.sqrt(len(vb)))
    s = readout(ens, RamanPulse(), L, settings.delta_phase)
    st = s.stats()
    sql_ratio = math.sqrt(st["signal_var"]) / abs(st["fringe_slope"]) * math.sqrt(st["atoms_used"])
    ok = abs(v - 1) <= 3 * v_err and abs(sql_ratio - 1) <= 0.05
    report(5, ok, f"visibility {v:.6f} +- {v_err:.1e}; dphi*sqrt(N_t) at phi=0: {sql_ratio:.4f}")


def test_criterion_6_revivals(report):
    assert CFG.winding_number == 2
    settings = TWASettings(n_traj=1000, master_seed=6, n_modes=16)
    prepared = run_schedule(CFG, [SeedPulse(100.0, CHI), SqueezeWindow(PARAMS.to_tau(0.125))], settings)
    m = estimate_moments(prepared, L)
    populated = [int(k) for k, n in zip(mode_numbers(16), m.mode_populations[PLUS]) if n > 1.0]
    period = analytic.common_period(L, populated)
    split = run_schedule(CFG, [RamanPulse()], settings, prepared)
    dt = 0.01
    grid = np.round(np.arange(0, 4.0 + dt / 2, dt), 10)
    rows = xi_vs_interrogation(CFG, None, grid, settings=settings, ensemble=split)
    log_xi = np.log([r["xi"] for r in rows])
    window = grid <= 2.0
    lags = np.arange(int(0.75 * period / dt), int(1.25 * period / dt) + 1)
    mismatch = [np.mean(np.abs(log_xi[lag:][window[:-lag]] - log_xi[:-lag][window[:-lag]]))
                for lag in lags]
    best = lags[int(np.argmin(mismatch))] * dt
    xi0, xi0_err = rows[0]["xi"], rows[0]["xi_stderr"]
    ok = abs(best - period) <= dt and abs(xi0 - m.xi) <= 3 * math.hypot(xi0_err, m.stderr["xi"])
    report(6, ok, f"populated +1 modes {populated}; common period {period:.4f}, best lag {best:.2f} "
                  f"(grid step {dt}); xi(T=0) {xi0:.4f} vs input {m.xi:.4f} +- {m.stderr['xi']:.4f}")


def test_criterion_7_figures(report):
    t0 = time.perf_counter()
    cfg = RunConfig().with_overrides(n_traj=1000)
    timings = {}

    def run(name):
        t = time.perf_counter()
        table = run_experiment(SweepSpec(name, cfg, workers=os.cpu_count() or 1))
        timings[name] = round(time.perf_counter() - t)
        return table

    fig5 = run("fig5_seed_sweep")
    sm, mm = optimal_seed(fig5, "smtwa"), optimal_seed(fig5, "mmtwa")

    fig6 = run("fig6_xi_dynamics")
    depth = {}
    for n_seed in cfg.fig6_seeds:
        xi = np.array([r["xi"] for r in fig6.rows if r["n_seed"] == n_seed])
        depth[n_seed] = float(xi.max() / xi.min())
    # presets are listed from the strongest to the weakest squeezing
    ordered = [depth[s] for s in cfg.fig6_seeds]

    fig7 = run("fig7_rotation_sensitivity")
    beyond = {}
    for n_seed in cfg.fig6_seeds:
        rows = [r for r in fig7.rows if r["n_seed"] == n_seed and r["interaction_scale"] == 1.0]
        tail = rows[-len(rows) // 4:]
        beyond[n_seed] = all(r["delta_omega"] > r["delta_omega_sql"] for r in tail)
    elapsed = time.perf_counter() - t0
    ok = (mm > sm and all(a > b for a, b in zip(ordered, ordered[1:]))
          and all(beyond.values()) and elapsed <= 30 * 60)
    report(7, ok, f"optimal seed SMTWA {sm} < MMTWA {mm}; fig6 max/min xi {depth}; "
                  f"fig7 beyond SQL at long T (scale 1) {beyond}; runtimes {timings} s")


def test_criterion_8_determinism(report, tmp_path):
    small = dict(n_traj=200, t_points=11, t_max=1.0, fig7_t_points=6, fig5_r_points=5,
                 fig5_seeds=(1.0, 16.0), fig6_t_prep_ms=(30.0,), fig6_seeds=(1000.0,))
    cfg_path = tmp_path / "det.cfg"
    cfg_path.write_text("".join(
        f"{k} = {','.join(map(str, v)) if isinstance(v, tuple) else v}\n" for k, v in small.items()))
    workers = sorted({1, 2, os.cpu_count() or 1})
    identical = {}
    for name in ("fig4_xi_curve", "fig5_seed_sweep", "fig6_xi_dynamics",
                 "fig7_rotation_sensitivity", "custom"):
        outputs = []
        for w in workers:
            out = tmp_path / f"{name}_{w}.csv"
            res = subprocess.run([sys.executable, "-m", "ringsqueeze.cli", "run", name,
                                  "--config", str(cfg_path), "--seed", "99", "--threads", str(w),
                                  "--out", str(out)], capture_output=True, text=True)
            assert res.returncode == 0, res.stderr
            outputs.append(out.read_bytes())
        identical[name] = len(set(outputs)) == 1
    report(8, all(identical.values()), f"byte-identical at workers {workers}: {identical}")
