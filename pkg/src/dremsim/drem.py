"""Dynamic regressor extension, the two mixing steps, and excitation monitoring.

The extension filters the raw regression into a square system

    ybar' = exp(-sigma (t - t0)) Omega^T y
    Obar' = exp(-sigma (t - t0)) Omega^T Omega

whose adjugate mixing yields Y_psi = delta * psi(theta) with the scalar
regressor delta = det(Obar). A second mixing through the bundle mappings
produces the fully linear regression Y_theta = M * theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

from . import numkit
from .mapping import MappingBundle, NlpreProblem
from .numkit import TimeSeries


@dataclass(frozen=True)
class ExtensionState:
    """State of the dynamic extension filters at time t."""

    y_bar: np.ndarray
    omega_bar: np.ndarray
    t: float
    sigma: float
    t0: float = 0.0


@dataclass(frozen=True)
class MixedSignals:
    """First mixing output: Y_psi = L adj(Obar) ybar and delta = det(Obar)."""

    Y_psi: np.ndarray
    delta: float
    t: float


@dataclass(frozen=True)
class LinearRegression:
    """Second mixing output: Y_theta = adj(T_G) T_S and M = det(T_G)."""

    Y_theta: np.ndarray
    M: float
    t: float


@dataclass(frozen=True)
class ExcitationReport:
    """Gram matrix of a regressor over a window and its excitation level."""

    window: tuple[float, float]
    gram: np.ndarray
    alpha: float
    is_FE: bool


@dataclass(frozen=True)
class DeltaMonitor:
    """Tracks when delta clears a threshold and audits its monotone growth.

    t_e_detected is the first sample time with delta >= threshold;
    delta_lb_observed is the running minimum of delta after that time.
    decrease_violations counts samples where delta dropped by more than
    the rounding slack (it never should: Obar grows in the Loewner order).
    """

    threshold: float = 1e-12
    t_e_detected: Optional[float] = None
    delta_lb_observed: float = math.inf
    decrease_violations: int = 0
    worst_decrease: float = 0.0
    last_t: Optional[float] = None
    last_delta: Optional[float] = None
    slack: float = 1e-12


def extension_rhs(
    state: ExtensionState, omega: np.ndarray, y: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Derivatives (ybar', Obar') of the extension filters.

    The forgetting factor exp(-sigma (t - t0)) is evaluated in closed form
    from the state's clock rather than carried as an extra ODE.
    """
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    f = math.exp(-state.sigma * (state.t - state.t0))
    return f * (omega.T @ y), f * (omega.T @ omega)


def mix_first(
    problem: NlpreProblem,
    state: ExtensionState,
    selector: Optional[np.ndarray] = None,
) -> MixedSignals:
    """First mixing: Y_psi = selector @ adj(Obar) @ ybar, delta = det(Obar).

    selector defaults to the problem's L; baseline laws that mix through a
    different component picker pass their own.
    """
    sel = problem.selector_L if selector is None else np.asarray(selector, dtype=float)
    adj_y, delta = numkit.adjugate_times(state.omega_bar, state.y_bar)
    return MixedSignals(Y_psi=sel @ adj_y, delta=delta, t=state.t)


def mix_second(bundle: MappingBundle, mixed: MixedSignals) -> LinearRegression:
    """Second mixing through the bundle: Y_theta = adj(T_G) T_S, M = det(T_G)."""
    yv = mixed.Y_psi
    tg = np.asarray(bundle.T_G(bundle.xibar_G(mixed.delta) @ yv), dtype=float)
    ts = np.asarray(bundle.T_S(bundle.xibar_S(mixed.delta) @ yv), dtype=float)
    y_theta, m = numkit.adjugate_times(tg, ts)
    return LinearRegression(Y_theta=y_theta, M=m, t=mixed.t)


def excitation_level(
    omega_series: TimeSeries, window: tuple[float, float], fe_threshold: float = 1e-10
) -> ExcitationReport:
    """Excitation level of a regressor over [t1, t2].

    Integrates omega(t) omega(t)^T by the trapezoidal rule on the recorded
    grid and reports the smallest eigenvalue of the resulting Gram matrix.
    omega samples are (k, m) matrices (vectors are treated as single
    columns); the Gram is k x k.
    """
    t1, t2 = window
    if t2 <= t1:
        raise ValueError("window must satisfy t1 < t2")
    sub = omega_series.window(t1, t2)
    if len(sub) < 2:
        raise ValueError("window must contain at least two samples")
    vals = sub.values
    if vals.ndim == 2:
        vals = vals[:, :, None]
    outer = np.einsum("tik,tjk->tij", vals, vals)
    gram = _trapezoid(outer, sub.times, axis=0)
    gram = 0.5 * (gram + gram.T)
    alpha = float(np.linalg.eigvalsh(gram)[0])
    return ExcitationReport(
        window=(float(sub.times[0]), float(sub.times[-1])),
        gram=gram,
        alpha=alpha,
        is_FE=alpha > fe_threshold,
    )


def monitor_delta(monitor: DeltaMonitor, mixed: MixedSignals) -> DeltaMonitor:
    """Feed one delta sample (in time order) and return the updated monitor."""
    if monitor.last_t is not None and mixed.t <= monitor.last_t:
        raise ValueError(
            f"delta samples must be fed in time order: got t={mixed.t} after {monitor.last_t}"
        )
    d = float(mixed.delta)
    violations = monitor.decrease_violations
    worst = monitor.worst_decrease
    if monitor.last_delta is not None and d < monitor.last_delta - monitor.slack:
        violations += 1
        worst = max(worst, monitor.last_delta - d)
    t_e = monitor.t_e_detected
    lb = monitor.delta_lb_observed
    if t_e is None:
        if d >= monitor.threshold:
            t_e = mixed.t
            lb = d
    else:
        lb = min(lb, d)
    return replace(
        monitor,
        t_e_detected=t_e,
        delta_lb_observed=lb,
        decrease_violations=violations,
        worst_decrease=worst,
        last_t=mixed.t,
        last_delta=d,
    )
