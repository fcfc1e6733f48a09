"""Run records: the exported row table, metrics, and file writers.

Metrics are pure functions of the recorded rows so that everything in the
metrics block of metrics.json can be recomputed exactly from timeseries.csv.
Runner-side diagnostics (abort reasons, wall time) live in a separate
diagnostics block that is not subject to that invariant.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .drem import DeltaMonitor, MixedSignals, excitation_level, monitor_delta
from .estimators import monotonicity_audit
from .numkit import TimeSeries
from .scenarios.academic import academic_regressor
from .scenarios.result import SimResult

CSV_ENCODING = "utf-8"


@dataclass(frozen=True)
class RunRecord:
    """Config snapshot, strided sample rows, and derived metrics."""

    config: dict
    times: np.ndarray
    columns: list[str]
    data: np.ndarray
    metrics: dict
    diagnostics: dict

    @property
    def header(self) -> list[str]:
        return ["t"] + list(self.columns)


def _finite_prefix(values: np.ndarray) -> int:
    """Length of the leading all-finite block of a (N, k) array."""
    ok = np.isfinite(values).all(axis=1)
    bad = np.flatnonzero(~ok)
    return int(bad[0]) if bad.size else len(values)


def _law_columns(columns: list[str], prefix: str) -> list[int]:
    idx = [j for j, c in enumerate(columns) if c.startswith(prefix)]
    return sorted(idx, key=lambda j: columns[j])


def _convergence_time(times: np.ndarray, err_inf: np.ndarray,
                      level: float) -> Optional[float]:
    """Earliest recorded time after which the error stays at or below level."""
    if len(err_inf) == 0:
        return None
    below = err_inf <= level
    if not below[-1]:
        return None
    above = np.flatnonzero(~below)
    first = int(above[-1]) + 1 if above.size else 0
    return float(times[first])


def _delta_metrics(times: np.ndarray, delta: np.ndarray, threshold: float,
                   slack: float) -> dict:
    mon = DeltaMonitor(threshold=threshold, slack=slack)
    for t, d in zip(times, delta):
        if not math.isfinite(d):
            break
        mon = monitor_delta(mon, MixedSignals(Y_psi=np.empty(0), delta=d, t=float(t)))
    held_above_te = True
    if mon.t_e_detected is not None:
        after = delta[times >= mon.t_e_detected]
        after = after[np.isfinite(after)]
        held_above_te = bool(np.all(after >= after[0] - slack))
    return {
        "t_e": mon.t_e_detected,
        "delta_lb_observed": (
            None if mon.t_e_detected is None else mon.delta_lb_observed
        ),
        "decrease_violations": mon.decrease_violations,
        "worst_decrease": mon.worst_decrease,
        "nondecreasing": mon.decrease_violations == 0,
        "held_above_t_e_value": held_above_te,
    }


def _excitation_from_rows(scenario: str, law: str, columns: list[str],
                          times: np.ndarray, data: np.ndarray) -> Optional[dict]:
    if scenario == "academic":
        omegas = np.stack([academic_regressor(float(t)).T for t in times])
    else:
        names = [f"omega_{law}_{ij}" for ij in
                 ("11", "12", "13", "14", "15", "22", "23", "24")]
        if not all(n in columns for n in names):
            return None
        cols = np.stack([data[:, columns.index(n)] for n in names], axis=1)
        n_ok = _finite_prefix(cols)
        if n_ok < 2:
            return None
        cols = cols[:n_ok]
        times = times[:n_ok]
        om = np.zeros((n_ok, 2, 5))
        om[:, 0, 0:5] = cols[:, 0:5]
        om[:, 1, 1] = cols[:, 5]
        om[:, 1, 2] = cols[:, 6]
        om[:, 1, 3] = cols[:, 7]
        omegas = np.transpose(om, (0, 2, 1))
    series = TimeSeries(times, omegas)
    rep = excitation_level(series, (float(times[0]), float(times[-1])))
    return {
        "alpha": rep.alpha,
        "window": list(rep.window),
        "is_fe": rep.is_FE,
    }


def metrics_from_rows(
    scenario: str,
    columns: list[str],
    times: np.ndarray,
    data: np.ndarray,
    laws: tuple[str, ...],
    mono_slack: float = 1e-9,
    delta_threshold: float = 1e-12,
    delta_slack: float = 1e-12,
) -> dict:
    """Derive the full metrics block from the recorded rows alone."""
    per_law: dict = {}
    for law in laws:
        entry: dict = {}
        err_idx = _law_columns(columns, f"theta_err_{law}_")
        if err_idx:
            errs = data[:, err_idx]
            n_ok = _finite_prefix(errs)
            entry["valid_until"] = float(times[n_ok - 1]) if n_ok else None
            entry["truncated"] = n_ok < len(times)
            if n_ok:
                ev = errs[:n_ok]
                einf = np.max(np.abs(ev), axis=1)
                entry["initial_error_inf"] = float(einf[0])
                entry["final_error_inf"] = float(einf[-1])
                entry["convergence_time_5pct"] = _convergence_time(
                    times[:n_ok], einf, 0.05 * einf[0]
                )
                entry["convergence_time_1pct"] = _convergence_time(
                    times[:n_ok], einf, 0.01 * einf[0]
                )
                audit = monotonicity_audit(
                    TimeSeries(times[:n_ok], ev), slack=mono_slack
                )
                entry["monotonicity_violations"] = audit.violations
                entry["monotonicity_violations_per_component"] = [
                    int(v) for v in audit.per_component
                ]
                entry["monotonicity_worst_excess"] = audit.worst_excess
        for kind in ("q_err", "qd_err"):
            idx = _law_columns(columns, f"{kind}_{law}_")
            if idx:
                vals = data[:, idx]
                n_ok = _finite_prefix(vals)
                if n_ok:
                    vinf = np.max(np.abs(vals[:n_ok]), axis=1)
                    entry[f"final_{kind}_inf"] = float(vinf[-1])
                    entry[f"peak_{kind}_inf"] = float(vinf.max())
        delta_col = f"delta_{law}" if f"delta_{law}" in columns else None
        if delta_col is not None:
            d = data[:, columns.index(delta_col)]
            entry["delta_monitor"] = _delta_metrics(
                times, d, delta_threshold, delta_slack
            )
            exc = _excitation_from_rows(scenario, law, columns, times, data)
            if exc is not None:
                entry["excitation"] = exc
        per_law[law] = entry

    metrics: dict = {"scenario": scenario, "laws": list(laws), "per_law": per_law}
    if "delta" in columns:
        d = data[:, columns.index("delta")]
        metrics["delta_monitor"] = _delta_metrics(
            times, d, delta_threshold, delta_slack
        )
        metrics["excitation"] = _excitation_from_rows(
            scenario, "", columns, times, data
        )
    if "m_signal" in columns:
        m = data[:, columns.index("m_signal")]
        metrics["m_signal_final"] = float(m[-1])
        metrics["m_signal_peak_abs"] = float(np.max(np.abs(m)))
    return metrics


def build_record(config: dict, sim: SimResult, mono_slack: float = 1e-9,
                 delta_threshold: float = 1e-12) -> RunRecord:
    metrics = metrics_from_rows(
        sim.scenario, sim.columns, sim.times, sim.data, sim.laws,
        mono_slack=mono_slack, delta_threshold=delta_threshold,
    )
    diagnostics = {
        "law_meta": sim.law_meta,
        "streams_meta": sim.streams_meta,
        "wall_time_s": sim.wall_time,
        "params": sim.params,
    }
    return RunRecord(
        config=config,
        times=sim.times,
        columns=list(sim.columns),
        data=sim.data,
        metrics=metrics,
        diagnostics=diagnostics,
    )


def format_value(x: float) -> str:
    """Full-precision decimal text that round-trips to the same float."""
    return repr(float(x))


def write_csv(record: RunRecord, path) -> None:
    lines = [",".join(record.header)]
    for t, row in zip(record.times, record.data):
        lines.append(",".join([format_value(t)] + [format_value(v) for v in row]))
    with open(path, "w", encoding=CSV_ENCODING, newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Parse a timeseries.csv back into (columns, times, data)."""
    with open(path, "r", encoding=CSV_ENCODING) as fh:
        header = fh.readline().strip().split(",")
        rows = [
            [float(tok) for tok in line.strip().split(",")]
            for line in fh
            if line.strip()
        ]
    arr = np.array(rows, dtype=float)
    if header[0] != "t":
        raise ValueError("timeseries.csv must start with a 't' column")
    return header[1:], arr[:, 0], arr[:, 1:]


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    return obj


def write_metrics_json(record: RunRecord, path) -> None:
    payload = {
        "config": _sanitize(record.config),
        "metrics": _sanitize(record.metrics),
        "diagnostics": _sanitize(record.diagnostics),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
