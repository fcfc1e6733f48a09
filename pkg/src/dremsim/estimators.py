"""Estimation laws: the proposed mixed-regression gradient law and baselines.

The proposed law runs gradient descent on the fully mixed scalar regression,

    theta_hat' = -gamma M (M theta_hat - Y_theta),

whose error admits the closed-form decay exp(-gamma int M^2) under constant
gain. Baselines: the P-monotone law adapting in transformed coordinates
eta = D(theta), and the classic overparameterized gradient law estimating
Theta directly with a hand-derived readout back to theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .drem import LinearRegression, MixedSignals
from .numkit import TimeSeries


class SingularityError(RuntimeError):
    """A readout or update hit a division by (near-)zero."""

    def __init__(self, message: str, component: Optional[int] = None,
                 t: Optional[float] = None):
        if t is not None:
            message = f"{message} at t={t:g}"
        super().__init__(message)
        self.component = component
        self.t = t


@dataclass(frozen=True)
class GainSchedule:
    """Adaptive gain: constant gamma0 or normalized gamma0 / (1 + s^2).

    The normalizing signal s is the law's scalar regressor: M for the
    proposed law, delta for the P-monotone law.
    """

    mode: str
    gamma0: float

    def __post_init__(self):
        if self.mode not in ("constant", "normalized"):
            raise ValueError(f"unknown gain mode {self.mode!r}")
        if self.gamma0 <= 0:
            raise ValueError("gamma0 must be positive")

    def gamma(self, s: float) -> float:
        if self.mode == "constant":
            return self.gamma0
        return self.gamma0 / (1.0 + s * s)


@dataclass(frozen=True)
class DremEstimatorState:
    """Estimate theta_hat plus the running integral of M^2."""

    theta_hat: np.ndarray
    gain: GainSchedule
    integral_M2: float = 0.0


@dataclass(frozen=True)
class PMonotoneBundle:
    """Change-of-variables baseline: adapt eta_hat, read out theta = DI(eta).

    W_eval maps eta to the selected overparameterized components,
    selector_C picks those components out of the full adj-mixed vector, and
    P is the PSD diagonal weighting of the update.
    """

    eta_dim: int
    W_eval: Callable[[np.ndarray], np.ndarray]
    DI_eval: Callable[[np.ndarray], np.ndarray]
    P: np.ndarray
    selector_C: np.ndarray
    gain: GainSchedule

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        if P.shape != (self.eta_dim, self.eta_dim):
            raise ValueError(f"P must be {self.eta_dim}x{self.eta_dim}")
        if np.any(P != np.diag(np.diag(P))) or np.any(np.diag(P) < 0):
            raise ValueError("P must be diagonal with nonnegative entries")
        object.__setattr__(self, "P", P)


@dataclass(frozen=True)
class OverparamEstimatorState:
    """Estimate of the full overparameterized vector Theta."""

    Theta_hat: np.ndarray
    Gamma: np.ndarray

    def __post_init__(self):
        G = np.asarray(self.Gamma, dtype=float)
        if np.any(np.diag(G) <= 0):
            raise ValueError("Gamma diagonal must be positive")
        object.__setattr__(self, "Gamma", G)


def drem_rhs(
    state: DremEstimatorState, reg: LinearRegression
) -> tuple[np.ndarray, float]:
    """Derivatives (theta_hat', integral_M2') of the proposed law."""
    m = reg.M
    g = state.gain.gamma(m)
    dtheta = -g * m * (m * state.theta_hat - reg.Y_theta)
    return dtheta, m * m


def closed_form_error(
    theta_err0: np.ndarray, gain: GainSchedule, integral_M2: float
) -> np.ndarray:
    """Error predicted by the closed-form solution under constant gain.

    theta_err(t) = exp(-gamma * int M^2) * theta_err(t0), the same scalar
    decay for every component. Only valid for the constant schedule; the
    normalized schedule has no single closed-form exponent.
    """
    if gain.mode != "constant":
        raise ValueError("closed-form error requires the constant gain schedule")
    if integral_M2 < 0:
        raise ValueError("integral_M2 must be nonnegative")
    factor = math.exp(-gain.gamma0 * integral_M2) if gain.gamma0 * integral_M2 < 745.0 else 0.0
    return factor * np.asarray(theta_err0, dtype=float)


def pmono_rhs(
    bundle: PMonotoneBundle, eta_hat: np.ndarray, mixed: MixedSignals
) -> np.ndarray:
    """Derivative of the P-monotone baseline.

    mixed must carry the selector_C-mixed signal (Y = C adj(Obar) ybar), so
    that eta_hat' = gain * P * delta * (Y - delta * W(eta_hat)).
    """
    d = mixed.delta
    g = bundle.gain.gamma(d)
    w = np.asarray(bundle.W_eval(eta_hat), dtype=float)
    return g * np.diag(bundle.P) * (d * (mixed.Y_psi - d * w))


def pmono_readout(bundle: PMonotoneBundle, eta_hat: np.ndarray,
                  t: Optional[float] = None) -> np.ndarray:
    """theta_hat = DI(eta_hat); raises SingularityError on division blowup."""
    out = np.asarray(bundle.DI_eval(eta_hat), dtype=float)
    if not np.isfinite(out).all():
        bad = int(np.argmax(~np.isfinite(out)))
        raise SingularityError(
            f"inverse change of variables singular in component {bad + 1}",
            component=bad, t=t,
        )
    return out


def overparam_rhs(
    state: OverparamEstimatorState, omega: np.ndarray, y: np.ndarray
) -> np.ndarray:
    """Classic gradient law on the raw regression: Theta' = -Gamma Om^T (Om Theta - y)."""
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return -state.Gamma @ (omega.T @ (omega @ state.Theta_hat - y))


def overparam_readout(Theta_hat: np.ndarray, t: Optional[float] = None) -> np.ndarray:
    """Recover (theta1, theta2) from Theta via (Theta1/Theta2, Theta2 - Theta1/Theta2).

    The division is the structural weakness of this baseline; a near-zero
    Theta2 raises SingularityError rather than returning junk.
    """
    Theta_hat = np.asarray(Theta_hat, dtype=float)
    if abs(Theta_hat[1]) < 1e-9:
        raise SingularityError(
            "overparameterized readout singular: |Theta_2| < 1e-9", component=2, t=t
        )
    ratio = Theta_hat[0] / Theta_hat[1]
    return np.array([ratio, Theta_hat[1] - ratio])


@dataclass(frozen=True)
class MonotonicityAudit:
    """Count of elementwise |error| increases across consecutive samples."""

    per_component: np.ndarray
    violations: int
    worst_excess: float


def monotonicity_audit(series: TimeSeries, slack: float = 1e-9) -> MonotonicityAudit:
    """Audit elementwise monotone decay of an error series.

    Counts consecutive sample pairs where |err_i| grows by more than slack,
    per component; worst_excess is the largest such growth.
    """
    vals = np.atleast_2d(series.values)
    if len(vals) == 0:
        raise ValueError("series must be nonempty")
    mags = np.abs(vals)
    growth = mags[1:] - mags[:-1]
    bad = growth > slack
    per_component = bad.sum(axis=0).astype(int)
    worst = float(growth.max()) if growth.size else 0.0
    return MonotonicityAudit(
        per_component=per_component,
        violations=int(per_component.sum()),
        worst_excess=max(worst, 0.0),
    )
