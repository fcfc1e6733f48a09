"""Nonlinearly parameterized regression model and its linearizing calculus.

A problem couples a regressand/regressor pair y = Omega * Theta(theta) with a
selector L picking the q "good" components psi = L Theta(theta). A mapping
bundle supplies the algebraic identities that turn the psi-level regression
into one linear in theta:

    S(psi) = G(psi) theta
    Pi(delta) G(psi) = T_G(Xi_G(delta) psi)
    Pi(delta) S(psi) = T_S(Xi_S(delta) psi)

with Xi(delta) = XiBar(delta) * delta and XiBar entries c * delta**(l - 1).
The inverse map theta = F(psi) is deliberately never implemented; the bundle
is audited purely through the identities above (verify_bundle).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import numkit


class BundleStructureError(ValueError):
    """A bundle evaluator returned an object of the wrong shape."""


@dataclass(frozen=True)
class NlpreProblem:
    """Regression y = Omega(t) Theta(theta) with selector psi = L Theta.

    regressor may be None for scenarios whose Omega is produced by
    simulation rather than a closed form of t.
    """

    n: int
    p: int
    q: int
    theta_map: Callable[[np.ndarray], np.ndarray]
    regressor: Optional[Callable[[float], np.ndarray]]
    selector_L: np.ndarray

    def __post_init__(self):
        if not (self.p > self.q >= 1):
            raise ValueError(f"need p > q >= 1, got p={self.p}, q={self.q}")
        L = np.asarray(self.selector_L, dtype=float)
        if L.shape != (self.q, self.p):
            raise ValueError(f"selector_L must be {self.q}x{self.p}, got {L.shape}")
        if not np.all((L == 0.0) | (L == 1.0)):
            raise ValueError("selector_L entries must be 0 or 1")
        if np.any(L.sum(axis=1) != 1.0):
            raise ValueError("selector_L must have exactly one 1 per row")
        picked = [int(np.argmax(row)) for row in L]
        if len(set(picked)) != self.q:
            raise ValueError("selector_L rows must pick distinct columns")
        object.__setattr__(self, "selector_L", L)


@dataclass(frozen=True)
class MappingBundle:
    """Evaluators and metadata for the linearizing identities.

    exponents_G / exponents_S are (c, l) integer-array pairs declaring the
    structure of XiBar: entry (i, j) of XiBar(delta) must equal
    c[i, j] * delta**(l[i, j] - 1), with c in {0, 1} and l >= 1.

    pi_eval and ell_theta exist for verification only; the runtime mixing
    pipeline never evaluates Pi.
    """

    q: int
    G_eval: Callable[[np.ndarray], np.ndarray]
    S_eval: Callable[[np.ndarray], np.ndarray]
    xibar_G: Callable[[float], np.ndarray]
    xibar_S: Callable[[float], np.ndarray]
    T_G: Callable[[np.ndarray], np.ndarray]
    T_S: Callable[[np.ndarray], np.ndarray]
    ell_theta: int
    pi_eval: Callable[[float], np.ndarray]
    exponents_G: tuple[np.ndarray, np.ndarray]
    exponents_S: tuple[np.ndarray, np.ndarray]

    def __post_init__(self):
        if self.ell_theta < 1:
            raise ValueError("ell_theta must be >= 1")
        for name, (c, ell) in (("G", self.exponents_G), ("S", self.exponents_S)):
            c = np.asarray(c)
            ell = np.asarray(ell)
            if c.shape != ell.shape or c.shape[1] != self.q:
                raise BundleStructureError(f"exponent table {name} has shape {c.shape}")
            if not np.all((c == 0) | (c == 1)):
                raise BundleStructureError(f"exponent table {name}: c entries must be 0/1")
            if np.any(ell < 1):
                raise BundleStructureError(f"exponent table {name}: l entries must be >= 1")


@dataclass(frozen=True)
class VerificationReport:
    """Worst-case residuals of the bundle identities over sampled (theta, delta)."""

    samples_checked: int
    max_residual_SG: float
    max_residual_PiG: float
    max_residual_PiS: float
    min_detPi_margin: float
    min_rankG_sigma: float
    tolerance: float
    passed: bool

    def failed_checks(self) -> list[str]:
        out = []
        if self.max_residual_SG > self.tolerance:
            out.append("residual_SG")
        if self.max_residual_PiG > self.tolerance:
            out.append("residual_PiG")
        if self.max_residual_PiS > self.tolerance:
            out.append("residual_PiS")
        if self.min_detPi_margin < -self.tolerance:
            out.append("detPi_margin")
        if self.min_rankG_sigma <= self.tolerance:
            out.append("rank_G")
        return out

    def to_json(self) -> str:
        return json.dumps(
            {
                "samples_checked": self.samples_checked,
                "max_residual_SG": self.max_residual_SG,
                "max_residual_PiG": self.max_residual_PiG,
                "max_residual_PiS": self.max_residual_PiS,
                "min_detPi_margin": self.min_detPi_margin,
                "min_rankG_sigma": self.min_rankG_sigma,
                "tolerance": self.tolerance,
                "pass": self.passed,
                "failed_checks": self.failed_checks(),
            },
            indent=2,
        )


def eval_theta_map(problem: NlpreProblem, theta: np.ndarray) -> np.ndarray:
    """Theta(theta): lift physical parameters to the overparameterized vector."""
    theta = np.asarray(theta, dtype=float)
    out = np.asarray(problem.theta_map(theta), dtype=float)
    if out.shape != (problem.p,):
        raise BundleStructureError(
            f"theta_map returned shape {out.shape}, expected ({problem.p},)"
        )
    return out


def eval_psi(problem: NlpreProblem, theta: np.ndarray) -> np.ndarray:
    """psi(theta) = L Theta(theta), the selected identifiable components."""
    return problem.selector_L @ eval_theta_map(problem, theta)


def check_domain(problem: NlpreProblem, theta: np.ndarray, fd_step: float = 1e-6,
                 tol: float = 1e-8) -> bool:
    """True iff theta lies in the safe domain: det of the psi Jacobian is nonzero.

    The Jacobian is formed by central finite differences with step fd_step.
    """
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")
    theta = np.asarray(theta, dtype=float)
    q = problem.q
    jac = np.empty((q, q))
    for j in range(q):
        e = np.zeros(q)
        e[j] = fd_step
        jac[:, j] = (eval_psi(problem, theta + e) - eval_psi(problem, theta - e)) / (2 * fd_step)
    return abs(numkit.det(jac)) > tol


def _eval_checked(fn, arg, shape, name: str) -> np.ndarray:
    out = np.asarray(fn(arg), dtype=float)
    if out.shape != shape:
        raise BundleStructureError(f"{name} returned shape {out.shape}, expected {shape}")
    return out


def exponent_table_residual(bundle: MappingBundle, delta: float) -> float:
    """Worst deviation of XiBar entries from the declared c * delta**(l-1) form."""
    worst = 0.0
    for which, fn in (("G", bundle.xibar_G), ("S", bundle.xibar_S)):
        c, ell = bundle.exponents_G if which == "G" else bundle.exponents_S
        xb = np.asarray(fn(delta), dtype=float)
        if xb.shape != c.shape:
            raise BundleStructureError(
                f"xibar_{which} returned shape {xb.shape}, expected {c.shape}"
            )
        expected = c * delta ** (ell - 1.0)
        scale = max(1.0, float(np.max(np.abs(expected))))
        worst = max(worst, float(np.max(np.abs(xb - expected))) / scale)
    return worst


def verify_bundle(
    problem: NlpreProblem,
    bundle: MappingBundle,
    sample_count: int,
    seed: int,
    theta_box: tuple[np.ndarray, np.ndarray],
    delta_range: tuple[float, float] = (0.1, 10.0),
    tolerance: float = 1e-9,
) -> VerificationReport:
    """Audit the three linearizing identities on seeded random samples.

    For each sampled (theta, delta) with theta drawn from theta_box by
    rejection against check_domain:

      (i)   S(psi) = G(psi) theta
      (ii)  Pi(delta) G(psi) = T_G(XiBar_G(delta) * delta * psi)
      (iii) Pi(delta) S(psi) = T_S(XiBar_S(delta) * delta * psi)
      (iv)  det Pi(delta) >= delta**ell_theta   (margin, delta > 0)
      (v)   G(psi) has full rank (smallest singular value)

    Residuals are relative to the magnitude of the left-hand side.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = (np.asarray(v, dtype=float) for v in theta_box)
    q = bundle.q
    dg = np.asarray(bundle.exponents_G[0]).shape[0]
    ds = np.asarray(bundle.exponents_S[0]).shape[0]

    max_sg = max_pig = max_pis = 0.0
    min_margin = np.inf
    min_sigma = np.inf
    checked = 0
    attempts = 0
    while checked < sample_count:
        attempts += 1
        if attempts > 50 * sample_count:
            raise RuntimeError("rejection sampling failed to find domain points")
        theta = lo + (hi - lo) * rng.random(q)
        if not check_domain(problem, theta):
            continue
        delta = float(delta_range[0] + (delta_range[1] - delta_range[0]) * rng.random())
        psi = eval_psi(problem, theta)

        G = _eval_checked(bundle.G_eval, psi, (q, q), "G_eval")
        S = _eval_checked(bundle.S_eval, psi, (q,), "S_eval")
        Pi = _eval_checked(bundle.pi_eval, delta, (q, q), "pi_eval")
        xg = _eval_checked(bundle.xibar_G, delta, (dg, q), "xibar_G")
        xs = _eval_checked(bundle.xibar_S, delta, (ds, q), "xibar_S")
        TG = _eval_checked(bundle.T_G, xg @ (delta * psi), (q, q), "T_G")
        TS = _eval_checked(bundle.T_S, xs @ (delta * psi), (q,), "T_S")

        r_sg = np.max(np.abs(S - G @ theta)) / max(1.0, np.max(np.abs(S)))
        lhs_g = Pi @ G
        r_pig = np.max(np.abs(lhs_g - TG)) / max(1.0, np.max(np.abs(lhs_g)))
        lhs_s = Pi @ S
        r_pis = np.max(np.abs(lhs_s - TS)) / max(1.0, np.max(np.abs(lhs_s)))
        margin = (numkit.det(Pi) - delta ** bundle.ell_theta) / max(
            1.0, delta ** bundle.ell_theta
        )
        sigma = float(np.linalg.svd(G, compute_uv=False)[-1])

        max_sg = max(max_sg, float(r_sg))
        max_pig = max(max_pig, float(r_pig))
        max_pis = max(max_pis, float(r_pis))
        min_margin = min(min_margin, float(margin))
        min_sigma = min(min_sigma, sigma)
        checked += 1

    passed = (
        max_sg <= tolerance
        and max_pig <= tolerance
        and max_pis <= tolerance
        and min_margin >= -tolerance
        and min_sigma > tolerance
    )
    return VerificationReport(
        samples_checked=checked,
        max_residual_SG=max_sg,
        max_residual_PiG=max_pig,
        max_residual_PiS=max_pis,
        min_detPi_margin=float(min_margin),
        min_rankG_sigma=float(min_sigma),
        tolerance=tolerance,
        passed=passed,
    )
