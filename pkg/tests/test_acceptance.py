"""Acceptance suite: one test per shipped criterion, each printing a
PASS/FAIL line with the measured quantities.

Run with:  pytest tests/test_acceptance.py -v -s

The long simulations are shared through session fixtures; their wall time
is accounted against the criterion that prescribes the run.
"""

import time

import numpy as np
import pytest

from dremsim import numkit
from dremsim.cli import execute, load_config, write_outputs
from dremsim.estimators import GainSchedule, closed_form_error, monotonicity_audit
from dremsim.mapping import verify_bundle
from dremsim.numkit import TimeSeries
from dremsim.scenarios import (
    ACADEMIC_THETA_BOX,
    ROBOT_THETA_BOX,
    AcademicScenario,
    RobotScenario,
    academic_bundle,
    academic_problem,
    robot_bundle,
    robot_problem,
    robot_theta_map,
    run_closed_loop,
    simulate_academic,
)
from dremsim.scenarios.robot import robot_coriolis, robot_inertia

MONO_SLACK = 1e-9
DELTA_SLACK = 1e-12


def _criterion(num: int, ok: bool, detail: str) -> None:
    print(f"\nCRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def _err_matrix(sim, law: str, q: int) -> np.ndarray:
    return np.stack(
        [sim.column(f"theta_err_{law}_{i + 1}") for i in range(q)], axis=1
    )


@pytest.fixture(scope="session")
def academic_run():
    return simulate_academic(AcademicScenario(), stride=10)


@pytest.fixture(scope="session")
def chain_run():
    return simulate_academic(AcademicScenario(horizon=10.0), laws=("drem",), stride=10)


@pytest.fixture(scope="session")
def robot_drem():
    return run_closed_loop(RobotScenario(), estimator="drem", stride=10)


@pytest.fixture(scope="session")
def robot_pmono():
    return run_closed_loop(RobotScenario(), estimator="pmono", stride=10)


def test_criterion_1_algebraic_kernel():
    rng = np.random.default_rng(42)
    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for n in (2, 3, 4, 5, 6):
        for _ in range(2000):
            a = rng.uniform(-1.0, 1.0, (n, n))
            resid = numkit.adjugate(a) @ a - numkit.det(a) * np.eye(n)
            bound = 1e-9 * max(1.0, np.max(np.abs(a)) ** n)
            worst = max(worst, np.max(np.abs(resid)) / bound)
            count += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1.0 and elapsed < 5.0
    _criterion(
        1,
        ok,
        f"{count} matrices sizes 2-6, worst residual at {worst:.2e} of the "
        f"bound, runtime {elapsed:.2f} s (< 5 s)",
    )


def test_criterion_2_bundle_verifier():
    from dataclasses import replace

    t0 = time.perf_counter()
    rep_a = verify_bundle(academic_problem(), academic_bundle(), 1000, 42,
                          ACADEMIC_THETA_BOX)
    rep_r = verify_bundle(robot_problem(), robot_bundle(), 1000, 42,
                          ROBOT_THETA_BOX)
    bundle = academic_bundle()

    def zeroed_row(psi):
        g = bundle.G_eval(psi)
        g[1, :] = 0.0
        return g

    rep_bad = verify_bundle(
        academic_problem(), replace(bundle, G_eval=zeroed_row), 100, 42,
        ACADEMIC_THETA_BOX,
    )
    elapsed = time.perf_counter() - t0
    ok = (
        rep_a.passed
        and rep_r.passed
        and not rep_bad.passed
        and "rank_G" in rep_bad.failed_checks()
        and elapsed < 2.0
    )
    _criterion(
        2,
        ok,
        f"academic max residual {max(rep_a.max_residual_SG, rep_a.max_residual_PiG, rep_a.max_residual_PiS):.1e}, "
        f"robot {max(rep_r.max_residual_SG, rep_r.max_residual_PiG, rep_r.max_residual_PiS):.1e} "
        f"(both <= 1e-9); corrupted bundle fails with {rep_bad.failed_checks()}; "
        f"runtime {elapsed:.2f} s (< 2 s)",
    )


def test_criterion_3_consistency_chain(chain_run):
    window = chain_run.times >= 1.0
    res = {
        k: float(np.max(chain_run.audit[k][window]))
        for k in ("res_ybar", "res_ypsi", "res_ytheta")
    }
    ok = all(v <= 1e-5 for v in res.values()) and chain_run.wall_time < 10.0
    _criterion(
        3,
        ok,
        "max relative residuals on t in [1, 10]: "
        f"ybar={res['res_ybar']:.1e}, Ypsi={res['res_ypsi']:.1e}, "
        f"Ytheta={res['res_ytheta']:.1e} (each <= 1e-5); "
        f"sim wall {chain_run.wall_time:.1f} s (< 10 s)",
    )


def test_criterion_4_closed_form_match(academic_run):
    theta_true = np.asarray(academic_run.params["theta_true"])
    err0 = np.zeros(2) - theta_true
    scale = np.max(np.abs(err0))
    gain = GainSchedule("constant", academic_run.params["gamma"])
    sim_err = _err_matrix(academic_run, "drem", 2)
    im2 = academic_run.column("integral_m2")
    worst = 0.0
    for j in range(len(academic_run.times)):
        cf = closed_form_error(err0, gain, float(im2[j]))
        worst = max(worst, float(np.max(np.abs(sim_err[j] - cf))) / scale)
    ok = worst <= 1e-3
    _criterion(
        4,
        ok,
        f"simulated error vs exp(-gamma int M^2) decay: worst deviation "
        f"{worst:.2e} of initial error (<= 1e-3) across "
        f"{len(academic_run.times)} samples",
    )


def test_criterion_5_elementwise_monotonicity(academic_run, robot_drem, robot_pmono):
    aud_acad = monotonicity_audit(
        TimeSeries(academic_run.times, _err_matrix(academic_run, "drem", 2)),
        slack=MONO_SLACK,
    )
    aud_robot = monotonicity_audit(
        TimeSeries(robot_drem.times, _err_matrix(robot_drem, "drem", 4)),
        slack=MONO_SLACK,
    )
    aud_base = monotonicity_audit(
        TimeSeries(robot_pmono.times, _err_matrix(robot_pmono, "pmono", 4)),
        slack=MONO_SLACK,
    )
    ok = aud_acad.violations == 0 and aud_robot.violations == 0
    if aud_base.violations >= 1:
        contrast = f"baseline violations = {aud_base.violations} (>= 1, contrast holds)"
    else:
        contrast = "baseline happened to be monotone: no assertion (reported only)"
    _criterion(
        5,
        ok,
        f"proposed-law violations at slack {MONO_SLACK:g}: academic = "
        f"{aud_acad.violations}, robot = {aud_robot.violations} (both 0); {contrast}",
    )


def test_criterion_6_academic_comparison(academic_run):
    results = {}
    for law in ("drem", "pmono"):
        errs = _err_matrix(academic_run, law, 2)
        results[law] = np.max(np.abs(errs[-1])) / np.max(np.abs(errs[0]))
    over = _err_matrix(academic_run, "overparam", 2)
    finite = np.isfinite(over).all(axis=1)
    over_final = float(np.max(np.abs(over[finite][-1])))
    ok = (
        results["drem"] <= 0.01
        and results["pmono"] <= 0.01
        and over_final >= 0.1
        and academic_run.wall_time < 30.0
    )
    _criterion(
        6,
        ok,
        f"final/initial error: proposed {results['drem']:.1e}, baseline "
        f"{results['pmono']:.1e} (both <= 1e-2); overparameterized readout "
        f"final error {over_final:.2f} (>= 0.1, no convergence without PE); "
        f"sim wall {academic_run.wall_time:.1f} s (< 30 s)",
    )


def test_criterion_7_delta_monotone_growth(academic_run):
    delta = academic_run.column("delta")
    drops = np.diff(delta) < -DELTA_SLACK
    meta = academic_run.streams_meta[""]
    t_e = meta["t_e"]
    held = True
    if t_e is not None:
        after = delta[academic_run.times >= t_e]
        held = bool(np.all(after >= after[0] - DELTA_SLACK))
    ok = not drops.any() and t_e is not None and held
    _criterion(
        7,
        ok,
        f"delta nondecreasing at slack {DELTA_SLACK:g}: {int(drops.sum())} "
        f"violations; t_e detected at {t_e:g} s with delta_lb "
        f"{meta['delta_lb_observed']:.2e}, held above it afterwards: {held}",
    )


def test_criterion_8_robot_comparison(robot_drem, robot_pmono):
    q_err = np.stack(
        [robot_drem.column(f"q_err_drem_{i + 1}") for i in range(2)], axis=1
    )
    qd_err = np.stack(
        [robot_drem.column(f"qd_err_drem_{i + 1}") for i in range(2)], axis=1
    )
    errs = _err_matrix(robot_drem, "drem", 4)
    final_q = float(np.max(np.abs(q_err[-1])))
    final_qd = float(np.max(np.abs(qd_err[-1])))
    err_ratio = float(np.max(np.abs(errs[-1])) / np.max(np.abs(errs[0])))
    peak_drem = float(np.max(np.abs(qd_err)))
    qd_base = np.stack(
        [robot_pmono.column(f"qd_err_pmono_{i + 1}") for i in range(2)], axis=1
    )
    finite = np.isfinite(qd_base).all(axis=1)
    peak_base = float(np.max(np.abs(qd_base[finite])))
    wall = robot_drem.wall_time + robot_pmono.wall_time
    ok = (
        final_q <= 1e-2
        and final_qd <= 1e-2
        and err_ratio <= 0.05
        and peak_drem <= peak_base + 1e-9
        and wall < 60.0
    )
    _criterion(
        8,
        ok,
        f"proposed law at T=60 s: |q_err|={final_q:.1e}, |qd_err|={final_qd:.1e} "
        f"(both <= 1e-2), error ratio {err_ratio:.1e} (<= 0.05); peak |qd_err| "
        f"proposed {peak_drem:.4f} <= baseline {peak_base:.4f}; "
        f"sim wall {wall:.1f} s (< 60 s)",
    )


def test_criterion_9_manipulator_physics():
    rng = np.random.default_rng(42)
    theta = np.array([0.7, 0.8, 1.5, 0.5])
    Theta = robot_theta_map(theta)
    eps = 1e-6
    min_eig = np.inf
    worst_skew = 0.0
    t0 = time.perf_counter()
    for _ in range(1000):
        q = rng.uniform(-np.pi, np.pi, 2)
        qd = rng.uniform(-2.0, 2.0, 2)
        x = rng.uniform(-1.0, 1.0, 2)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(robot_inertia(q, Theta))[0]))
        mdot = (robot_inertia(q + eps * qd, Theta)
                - robot_inertia(q - eps * qd, Theta)) / (2.0 * eps)
        skew = abs(float(x @ (mdot - 2.0 * robot_coriolis(q, qd, Theta)) @ x))
        worst_skew = max(worst_skew, skew)
    elapsed = time.perf_counter() - t0
    ok = min_eig > 0.0 and worst_skew <= 1e-9
    _criterion(
        9,
        ok,
        f"1000 samples: min inertia eigenvalue {min_eig:.3f} (> 0), worst "
        f"|x^T(Mdot-2C)x| = {worst_skew:.1e} (<= 1e-9), {elapsed:.2f} s",
    )


def test_criterion_10_deterministic_csv(tmp_path):
    cfg_a = load_config(scenario="academic", horizon=2.0, out=str(tmp_path / "a"))
    cfg_b = load_config(scenario="academic", horizon=2.0, out=str(tmp_path / "b"))
    write_outputs(execute(cfg_a), cfg_a.output_dir)
    write_outputs(execute(cfg_b), cfg_b.output_dir)
    bytes_a = (tmp_path / "a" / "timeseries.csv").read_bytes()
    bytes_b = (tmp_path / "b" / "timeseries.csv").read_bytes()
    ok = bytes_a == bytes_b and len(bytes_a) > 0
    _criterion(
        10,
        ok,
        f"two runs with identical config: {len(bytes_a)} CSV bytes, "
        f"byte-identical: {bytes_a == bytes_b}",
    )
