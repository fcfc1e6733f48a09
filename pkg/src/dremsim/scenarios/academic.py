"""Academic scenario: scalar regression with a 3-component nonlinear lift.

The regressor row is (exp(-t), sin t, 1) and the overparameterized vector is
Theta(theta) = (theta1 theta2 + theta1^2, theta1 + theta2, cos theta1). The
first two components are selected as psi; the linearizing bundle for that
psi is polynomial, with Pi(delta) = diag(delta, delta^2). Three estimation
laws run on one shared signal stream: the proposed mixed-regression law, the
P-monotone change-of-variables baseline, and the classic overparameterized
gradient law with its divide-by-Theta2 readout.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .. import numkit
from ..drem import (
    DeltaMonitor,
    ExtensionState,
    extension_rhs,
    mix_first,
    mix_second,
    monitor_delta,
)
from ..estimators import (
    DremEstimatorState,
    GainSchedule,
    OverparamEstimatorState,
    PMonotoneBundle,
    SingularityError,
    drem_rhs,
    overparam_readout,
    overparam_rhs,
    pmono_rhs,
)
from ..mapping import MappingBundle, NlpreProblem
from .result import SimResult

ALL_LAWS = ("drem", "pmono", "overparam")

THETA_BOX = (np.array([0.2, 0.2]), np.array([3.0, 3.0]))


def academic_regressor(t: float) -> np.ndarray:
    """Regressor row (1 x 3): (exp(-t), sin t, 1)."""
    return np.array([[math.exp(-t), math.sin(t), 1.0]])


def academic_theta_map(theta: np.ndarray) -> np.ndarray:
    t1, t2 = float(theta[0]), float(theta[1])
    return np.array([t1 * t2 + t1 * t1, t2 + t1, math.cos(t1)])


def academic_problem() -> NlpreProblem:
    return NlpreProblem(
        n=1,
        p=3,
        q=2,
        theta_map=academic_theta_map,
        regressor=academic_regressor,
        selector_L=np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
    )


def academic_bundle() -> MappingBundle:
    """Linearizing bundle for psi = (theta1 theta2 + theta1^2, theta1 + theta2).

    G = diag(psi2, psi2), S = (psi1, psi2^2 - psi1),
    Pi = diag(delta, delta^2), so det Pi = delta^3 exactly.
    """

    def g_eval(psi):
        return np.array([[psi[1], 0.0], [0.0, psi[1]]])

    def s_eval(psi):
        return np.array([psi[0], psi[1] * psi[1] - psi[0]])

    def xibar_g(delta):
        return np.array([[0.0, 1.0], [0.0, delta]])

    def xibar_s(delta):
        return np.array([[1.0, 0.0], [delta, 0.0], [0.0, 1.0]])

    def t_g(v):
        return np.array([[v[0], 0.0], [0.0, v[1]]])

    def t_s(w):
        return np.array([w[0], w[2] * w[2] - w[1]])

    def pi_eval(delta):
        return np.array([[delta, 0.0], [0.0, delta * delta]])

    return MappingBundle(
        q=2,
        G_eval=g_eval,
        S_eval=s_eval,
        xibar_G=xibar_g,
        xibar_S=xibar_s,
        T_G=t_g,
        T_S=t_s,
        ell_theta=3,
        pi_eval=pi_eval,
        exponents_G=(np.array([[0, 1], [0, 1]]), np.array([[1, 1], [1, 2]])),
        exponents_S=(
            np.array([[1, 0], [1, 0], [0, 1]]),
            np.array([[1, 1], [2, 1], [1, 1]]),
        ),
    )


def academic_pmono_bundle(kappa: float = 10.0, gamma_eta: float = 1e5) -> PMonotoneBundle:
    """Monotonizability baseline: eta = (theta1, theta1 + theta2).

    W(eta) = (eta1 eta2, eta2) and the inverse change of variables is
    division-free here, unlike the manipulator case.
    """

    def w_eval(eta):
        return np.array([eta[0] * eta[1], eta[1]])

    def di_eval(eta):
        return np.array([eta[0], eta[1] - eta[0]])

    return PMonotoneBundle(
        eta_dim=2,
        W_eval=w_eval,
        DI_eval=di_eval,
        P=np.diag([kappa, 1.0]),
        selector_C=np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
        gain=GainSchedule("constant", gamma_eta),
    )


@dataclass(frozen=True)
class AcademicScenario:
    """Experiment settings; defaults are the published operating point."""

    theta_true: tuple[float, float] = (1.0, 2.0)
    sigma: float = 1.0
    gamma: float = 1e13
    gamma_eta: float = 1e5
    Gamma_diag: float = 10.0
    kappa: float = 10.0
    theta_hat0: tuple[float, float] = (0.0, 0.0)
    eta_hat0: tuple[float, float] = (0.0, 0.0)
    Theta_hat0: tuple[float, float, float] = (0.0, 1.0, 0.0)
    horizon: float = 30.0
    step: float = 1e-3
    gain_mode: str = "constant"

    def __post_init__(self):
        if self.step <= 0 or self.horizon <= self.step:
            raise ValueError("need step > 0 and horizon > step")


def simulate_academic(
    scenario: AcademicScenario = AcademicScenario(),
    laws: tuple[str, ...] = ALL_LAWS,
    stride: int = 10,
) -> SimResult:
    """Run the scenario with the requested laws on one shared signal stream.

    All requested estimator ODEs are co-integrated with the extension in a
    single composite state vector, so every law sees the identical mixed
    signals. Returns the strided sample table plus consistency audits.
    """
    for law in laws:
        if law not in ALL_LAWS:
            raise ValueError(f"unknown estimator {law!r}; choose from {ALL_LAWS}")
    if not laws:
        raise ValueError("at least one estimator required")
    t_start = time.perf_counter()

    problem = academic_problem()
    bundle = academic_bundle()
    pbundle = academic_pmono_bundle(scenario.kappa, scenario.gamma_eta)
    gain = GainSchedule(scenario.gain_mode, scenario.gamma)
    theta_true = np.asarray(scenario.theta_true, dtype=float)
    Theta_true = academic_theta_map(theta_true)
    psi_true = problem.selector_L @ Theta_true
    sigma = scenario.sigma
    Gamma = scenario.Gamma_diag * np.eye(3)

    # Composite state: y_bar(3) | Omega_bar(9) | iM2(1) | per-law blocks.
    offs = {"y": 0, "ob": 3, "im2": 12}
    dim = 13
    if "drem" in laws:
        offs["drem"] = dim
        dim += 2
    if "pmono" in laws:
        offs["pmono"] = dim
        dim += 2
    if "overparam" in laws:
        offs["over"] = dim
        dim += 3
    x0 = np.zeros(dim)
    if "drem" in laws:
        x0[offs["drem"]: offs["drem"] + 2] = scenario.theta_hat0
    if "pmono" in laws:
        x0[offs["pmono"]: offs["pmono"] + 2] = scenario.eta_hat0
    if "overparam" in laws:
        x0[offs["over"]: offs["over"] + 3] = scenario.Theta_hat0

    def ext_state(t: float, x: np.ndarray) -> ExtensionState:
        return ExtensionState(
            y_bar=x[0:3], omega_bar=x[3:12].reshape(3, 3), t=t, sigma=sigma
        )

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        omega = academic_regressor(t)
        y = omega @ Theta_true
        est = ext_state(t, x)
        dyb, dob = extension_rhs(est, omega, y)
        mixed = mix_first(problem, est)
        reg = mix_second(bundle, mixed)
        out = np.empty(dim)
        out[0:3] = dyb
        out[3:12] = dob.ravel()
        out[12] = reg.M * reg.M
        if "drem" in laws:
            o = offs["drem"]
            st = DremEstimatorState(theta_hat=x[o: o + 2], gain=gain, integral_M2=x[12])
            dth, _ = drem_rhs(st, reg)
            out[o: o + 2] = dth
        if "pmono" in laws:
            o = offs["pmono"]
            out[o: o + 2] = pmono_rhs(pbundle, x[o: o + 2], mixed)
        if "overparam" in laws:
            o = offs["over"]
            st = OverparamEstimatorState(Theta_hat=x[o: o + 3], Gamma=Gamma)
            out[o: o + 3] = overparam_rhs(st, omega, y)
        return out

    n_steps = int(round(scenario.horizon / scenario.step))
    n_rec = n_steps // stride + 1

    columns = ["delta", "m_signal", "integral_m2", "y_psi_1", "y_psi_2",
               "y_theta_1", "y_theta_2"]
    for law in laws:
        columns += [f"theta_hat_{law}_{i + 1}" for i in range(2)]
        columns += [f"theta_err_{law}_{i + 1}" for i in range(2)]
        if law == "overparam":
            columns += [f"Theta_hat_overparam_{i + 1}" for i in range(3)]
    audit_names = ("res_ybar", "res_ypsi", "res_ytheta", "sym_drift")

    times = np.empty(n_rec)
    data = np.full((n_rec, len(columns)), np.nan)
    audit = {k: np.empty(n_rec) for k in audit_names}
    col = {name: j for j, name in enumerate(columns)}
    monitor = DeltaMonitor()
    over_truncated_at: list[float] = []
    state = {"i": 0, "r": 0, "monitor": monitor}

    def observer(t: float, x: np.ndarray) -> None:
        i = state["i"]
        state["i"] = i + 1
        if i % stride != 0:
            return
        r = state["r"]
        state["r"] = r + 1
        est = ext_state(t, x)
        mixed = mix_first(problem, est)
        reg = mix_second(bundle, mixed)
        state["monitor"] = monitor_delta(state["monitor"], mixed)
        times[r] = t
        row = data[r]
        row[col["delta"]] = mixed.delta
        row[col["m_signal"]] = reg.M
        row[col["integral_m2"]] = x[12]
        row[col["y_psi_1"]: col["y_psi_1"] + 2] = mixed.Y_psi
        row[col["y_theta_1"]: col["y_theta_1"] + 2] = reg.Y_theta
        if "drem" in laws:
            th = x[offs["drem"]: offs["drem"] + 2]
            row[col["theta_hat_drem_1"]: col["theta_hat_drem_1"] + 2] = th
            row[col["theta_err_drem_1"]: col["theta_err_drem_1"] + 2] = th - theta_true
        if "pmono" in laws:
            eta = x[offs["pmono"]: offs["pmono"] + 2]
            th = pbundle.DI_eval(eta)
            row[col["theta_hat_pmono_1"]: col["theta_hat_pmono_1"] + 2] = th
            row[col["theta_err_pmono_1"]: col["theta_err_pmono_1"] + 2] = th - theta_true
        if "overparam" in laws:
            Th = x[offs["over"]: offs["over"] + 3]
            row[col["Theta_hat_overparam_1"]: col["Theta_hat_overparam_1"] + 3] = Th
            if not over_truncated_at:
                try:
                    th = overparam_readout(Th, t=t)
                    row[col["theta_hat_overparam_1"]: col["theta_hat_overparam_1"] + 2] = th
                    row[col["theta_err_overparam_1"]: col["theta_err_overparam_1"] + 2] = (
                        th - theta_true
                    )
                except SingularityError:
                    over_truncated_at.append(t)
        # Consistency audits against the known true parameters.
        ob = est.omega_bar
        ref = ob @ Theta_true
        audit["res_ybar"][r] = _relinf(est.y_bar - ref, ref)
        ref2 = mixed.delta * psi_true
        audit["res_ypsi"][r] = _relinf(mixed.Y_psi - ref2, ref2)
        ref3 = reg.M * theta_true
        audit["res_ytheta"][r] = _relinf(reg.Y_theta - ref3, ref3)
        audit["sym_drift"][r] = float(np.max(np.abs(ob - ob.T)))

    def post_step(t: float, x: np.ndarray) -> None:
        ob = x[3:12].reshape(3, 3)
        ob += ob.T
        ob *= 0.5

    prob = numkit.OdeProblem(dimension=dim, rhs=rhs, t0=0.0, x0=x0)
    numkit.integrate(prob, scenario.horizon, scenario.step,
                     observer=observer, post_step=post_step, keep_states=False)

    mon = state["monitor"]
    law_meta = {law: {} for law in laws}
    if "overparam" in laws and over_truncated_at:
        law_meta["overparam"]["truncated_at"] = over_truncated_at[0]
        law_meta["overparam"]["note"] = "readout singular: |Theta_2| < 1e-9"
    streams_meta = {
        "": {
            "t_e": mon.t_e_detected,
            "delta_lb_observed": None if mon.t_e_detected is None else mon.delta_lb_observed,
            "decrease_violations": mon.decrease_violations,
            "worst_decrease": mon.worst_decrease,
        }
    }
    return SimResult(
        scenario="academic",
        laws=tuple(laws),
        times=times[: state["r"]],
        columns=columns,
        data=data[: state["r"]],
        streams_meta=streams_meta,
        law_meta=law_meta,
        audit={k: v[: state["r"]] for k, v in audit.items()},
        wall_time=time.perf_counter() - t_start,
        params={
            "theta_true": list(theta_true),
            "sigma": sigma,
            "gamma": scenario.gamma,
            "gamma_eta": scenario.gamma_eta,
            "Gamma_diag": scenario.Gamma_diag,
            "kappa": scenario.kappa,
            "horizon": scenario.horizon,
            "step": scenario.step,
            "stride": stride,
            "gain_mode": scenario.gain_mode,
        },
    )


def _relinf(err: np.ndarray, ref: np.ndarray) -> float:
    return float(np.max(np.abs(err)) / max(1.0, np.max(np.abs(ref))))
