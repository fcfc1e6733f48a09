"""Configuration-driven experiment runner.

Subcommands:
  run             simulate a scenario and write timeseries.csv, metrics.json,
                  and figure.svg into the output directory
  verify          audit a scenario's mapping bundle identities and the
                  excitation of its regressor
  list-scenarios  print the registered scenario names

Run settings come from an optional TOML file plus command-line overrides;
the DREM_SEED environment variable overrides the default sampling seed.
Exit codes: 0 success, 2 configuration error, 3 output I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import records, svgplot
from .drem import excitation_level
from .mapping import verify_bundle
from .numkit import TimeSeries
from .scenarios import (
    ACADEMIC_THETA_BOX,
    ALL_LAWS,
    ROBOT_LAWS,
    ROBOT_THETA_BOX,
    SCENARIO_NAMES,
    AcademicScenario,
    RobotScenario,
    SineReference,
    academic_bundle,
    academic_problem,
    academic_regressor,
    robot_bundle,
    robot_problem,
    run_closed_loop,
    simulate_academic,
)

DEFAULT_SEED = 42

_SCENARIO_DEFAULTS = {
    "academic": {"horizon": 30.0, "estimators": ("drem", "pmono", "overparam")},
    "robot": {"horizon": 60.0, "estimators": ("drem", "pmono")},
}

_OVERRIDE_KEYS = {
    "academic": {
        "theta_true", "sigma", "gamma", "gamma_eta", "Gamma_diag", "kappa",
        "theta_hat0", "eta_hat0", "Theta_hat0", "gain_mode",
    },
    "robot": {
        "theta_true", "g", "k1_gain", "k2_gain", "sigma", "kappa", "eta_hat0",
        "filter_k", "gamma0", "gamma_eta0", "q0", "qdot0",
        "reference_amplitude", "reference_frequency", "reference_phase",
    },
}


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


@dataclass(frozen=True)
class RunConfig:
    """Validated settings for one `run` invocation."""

    scenario: str
    estimators: tuple[str, ...]
    horizon: float
    step: float
    stride: int
    output_dir: Path
    seed: int
    overrides: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "estimators": list(self.estimators),
            "horizon": self.horizon,
            "step": self.step,
            "stride": self.stride,
            "output_dir": str(self.output_dir),
            "seed": self.seed,
            "overrides": dict(self.overrides),
        }


def _env_seed() -> int:
    raw = os.environ.get("DREM_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"DREM_SEED must be an integer, got {raw!r}") from None


def load_config(
    config_path: str | None = None,
    scenario: str | None = None,
    estimators: str | None = None,
    horizon: float | None = None,
    step: float | None = None,
    stride: int | None = None,
    out: str | None = None,
    gamma: float | None = None,
    seed: int | None = None,
) -> RunConfig:
    """Merge the TOML file (if any) with command-line overrides and validate."""
    raw: dict = {}
    if config_path is not None:
        try:
            with open(config_path, "rb") as fh:
                raw = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {config_path}") from None
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"config file is not valid TOML: {e}") from None

    known_top = {"scenario", "estimators", "horizon", "step", "stride",
                 "output_dir", "seed", "overrides"}
    for key in raw:
        if key not in known_top:
            raise ConfigError(f"unknown config key: {key!r}")

    name = scenario or raw.get("scenario")
    if name is None:
        raise ConfigError("missing config key: 'scenario'")
    if name not in SCENARIO_NAMES:
        raise ConfigError(
            f"unknown scenario {name!r}; registered: {', '.join(SCENARIO_NAMES)}"
        )

    if estimators is not None:
        laws = tuple(s.strip() for s in estimators.split(",") if s.strip())
    elif "estimators" in raw:
        laws = tuple(raw["estimators"])
    else:
        laws = _SCENARIO_DEFAULTS[name]["estimators"]
    if not laws:
        raise ConfigError("config key 'estimators' must name at least one law")
    valid = ALL_LAWS if name == "academic" else ROBOT_LAWS
    for law in laws:
        if law not in valid:
            raise ConfigError(
                f"estimator {law!r} is not valid for scenario {name!r} "
                f"(valid: {', '.join(valid)})"
            )
    if name != "academic" and "overparam" in laws:
        raise ConfigError("estimator 'overparam' is only defined for 'academic'")

    hz = horizon if horizon is not None else raw.get(
        "horizon", _SCENARIO_DEFAULTS[name]["horizon"]
    )
    st = step if step is not None else raw.get("step", 1e-3)
    sd = stride if stride is not None else raw.get("stride", 10)
    try:
        hz, st = float(hz), float(st)
        sd = int(sd)
    except (TypeError, ValueError):
        raise ConfigError("keys 'horizon', 'step', 'stride' must be numeric") from None
    if st <= 0:
        raise ConfigError("config key 'step' must be positive")
    if hz <= st:
        raise ConfigError("config key 'horizon' must exceed 'step'")
    if sd < 1:
        raise ConfigError("config key 'stride' must be a positive integer")

    overrides = dict(raw.get("overrides", {}))
    if gamma is not None:
        overrides["gamma" if name == "academic" else "gamma0"] = gamma
    allowed = _OVERRIDE_KEYS[name]
    for key in overrides:
        if key not in allowed:
            raise ConfigError(
                f"unknown override key for {name!r}: {key!r} "
                f"(allowed: {', '.join(sorted(allowed))})"
            )

    out_dir = Path(out if out is not None else raw.get("output_dir", "out"))
    use_seed = seed if seed is not None else raw.get("seed", _env_seed())
    return RunConfig(
        scenario=name,
        estimators=laws,
        horizon=hz,
        step=st,
        stride=sd,
        output_dir=out_dir,
        seed=int(use_seed),
        overrides=overrides,
    )


def _build_academic(config: RunConfig) -> AcademicScenario:
    ov = config.overrides
    kwargs = {}
    for key in ("sigma", "gamma", "gamma_eta", "Gamma_diag", "kappa", "gain_mode"):
        if key in ov:
            kwargs[key] = ov[key]
    for key in ("theta_true", "theta_hat0", "eta_hat0", "Theta_hat0"):
        if key in ov:
            kwargs[key] = tuple(ov[key])
    return AcademicScenario(horizon=config.horizon, step=config.step, **kwargs)


def _build_robot(config: RunConfig) -> RobotScenario:
    ov = config.overrides
    kwargs = {}
    for key in ("g", "sigma", "kappa", "filter_k", "gamma0", "gamma_eta0"):
        if key in ov:
            kwargs[key] = ov[key]
    for key in ("theta_true", "eta_hat0", "q0", "qdot0"):
        if key in ov:
            kwargs[key] = tuple(ov[key])
    if "k1_gain" in ov:
        kwargs["K1"] = float(ov["k1_gain"]) * np.eye(2)
    if "k2_gain" in ov:
        kwargs["K2"] = float(ov["k2_gain"]) * np.eye(2)
    ref_keys = ("reference_amplitude", "reference_frequency", "reference_phase")
    if any(k in ov for k in ref_keys):
        base = SineReference()
        kwargs["reference"] = SineReference(
            amplitude=tuple(ov.get("reference_amplitude", base.amplitude)),
            frequency=tuple(ov.get("reference_frequency", base.frequency)),
            phase=tuple(ov.get("reference_phase", base.phase)),
        )
    return RobotScenario(horizon=config.horizon, step=config.step, **kwargs)


def execute(config: RunConfig) -> records.RunRecord:
    """Simulate per the config and return the assembled record."""
    if config.scenario == "academic":
        sim = simulate_academic(
            _build_academic(config), laws=config.estimators, stride=config.stride
        )
    else:
        scenario = _build_robot(config)
        sims = [
            run_closed_loop(scenario, estimator=law, stride=config.stride)
            for law in config.estimators
        ]
        sim = sims[0]
        for other in sims[1:]:
            sim = sim.merged_with(other)
    return records.build_record(config.as_dict(), sim)


def _figure_panels(record: records.RunRecord) -> list[svgplot.Panel]:
    cols = record.columns
    t = record.times
    hat_traces = [
        (c, record.data[:, j]) for j, c in enumerate(cols)
        if c.startswith("theta_hat_")
    ]
    panels = [
        svgplot.Panel(
            title="Parameter estimates",
            xlabel="t [s]",
            ylabel="theta_hat",
            x=t,
            traces=hat_traces,
        )
    ]
    err_norms = []
    laws = record.metrics["laws"]
    for law in laws:
        idx = [j for j, c in enumerate(cols) if c.startswith(f"theta_err_{law}_")]
        if idx:
            err_norms.append(
                (f"|theta_err_{law}|_inf", np.max(np.abs(record.data[:, idx]), axis=1))
            )
    if err_norms:
        panels.append(
            svgplot.Panel(
                title="Estimation error (log scale)",
                xlabel="t [s]",
                ylabel="log10 |theta_err|_inf",
                x=t,
                traces=err_norms,
                log_y=True,
            )
        )
    for kind, label in (("q_err", "q - q*"), ("qd_err", "qd - qd*")):
        traces = [
            (c, record.data[:, j]) for j, c in enumerate(cols)
            if c.startswith(kind + "_")
        ]
        if traces:
            panels.append(
                svgplot.Panel(
                    title=f"Tracking error {label}",
                    xlabel="t [s]",
                    ylabel=label,
                    x=t,
                    traces=traces,
                )
            )
    return panels


def write_outputs(record: records.RunRecord, out_dir: Path) -> dict[str, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "timeseries": out_dir / "timeseries.csv",
        "metrics": out_dir / "metrics.json",
        "figure": out_dir / "figure.svg",
    }
    records.write_csv(record, paths["timeseries"])
    records.write_metrics_json(record, paths["metrics"])
    with open(paths["figure"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svgplot.render_figure(_figure_panels(record)))
    return paths


def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(
        config_path=args.config,
        scenario=args.scenario,
        estimators=args.estimators,
        horizon=args.horizon,
        step=args.step,
        stride=args.stride,
        out=args.out,
        gamma=args.gamma,
        seed=args.seed,
    )
    record = execute(config)
    try:
        paths = write_outputs(record, config.output_dir)
    except OSError as e:
        print(f"error: failed to write outputs: {e}", file=sys.stderr)
        return 3
    for law, meta in record.diagnostics["law_meta"].items():
        if meta.get("note"):
            print(f"note: {law}: {meta['note']} (traces truncated)")
    for name, path in paths.items():
        print(f"{name}: {path}")
    per_law = record.metrics["per_law"]
    for law in record.metrics["laws"]:
        entry = per_law.get(law, {})
        fin = entry.get("final_error_inf")
        if fin is not None:
            print(f"{law}: final |theta_err|_inf = {fin:.3e}, "
                  f"monotonicity violations = {entry.get('monotonicity_violations')}")
    return 0


def _verify_excitation(name: str) -> object:
    if name == "academic":
        ts = np.arange(0.0, 10.0 + 1e-12, 1e-3)
        omegas = np.stack([academic_regressor(float(t)).T for t in ts])
        return excitation_level(TimeSeries(ts, omegas), (0.0, 10.0))
    sim = run_closed_loop(RobotScenario(), estimator="frozen", stride=10,
                          horizon=10.0)
    names = [f"omega_frozen_{ij}" for ij in
             ("11", "12", "13", "14", "15", "22", "23", "24")]
    cols = np.stack([sim.column(n) for n in names], axis=1)
    om = np.zeros((len(sim.times), 2, 5))
    om[:, 0, :] = cols[:, 0:5]
    om[:, 1, 1:4] = cols[:, 5:8]
    return excitation_level(
        TimeSeries(sim.times, np.transpose(om, (0, 2, 1))),
        (0.0, float(sim.times[-1])),
    )


def cmd_verify(args: argparse.Namespace) -> int:
    name = args.scenario
    if name not in SCENARIO_NAMES:
        print(f"error: unknown scenario {name!r}; registered: "
              f"{', '.join(SCENARIO_NAMES)}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else _env_seed()
    if name == "academic":
        problem, bundle, box = academic_problem(), academic_bundle(), ACADEMIC_THETA_BOX
    else:
        problem, bundle, box = robot_problem(), robot_bundle(), ROBOT_THETA_BOX
    report = verify_bundle(problem, bundle, args.samples, seed, box)
    print(f"bundle verification: {name} ({report.samples_checked} samples, "
          f"seed {seed})")
    for label, value in (
        ("max residual S=G*theta", report.max_residual_SG),
        ("max residual Pi*G=T_G", report.max_residual_PiG),
        ("max residual Pi*S=T_S", report.max_residual_PiS),
        ("min det-Pi margin", report.min_detPi_margin),
        ("min sigma(G)", report.min_rankG_sigma),
    ):
        print(f"  {label:<26} {value: .3e}")
    print(f"  {'tolerance':<26} {report.tolerance: .3e}")
    print(f"  pass: {report.passed}"
          + (f" (failed: {', '.join(report.failed_checks())})"
             if not report.passed else ""))
    exc = _verify_excitation(name)
    print(f"excitation: alpha = {exc.alpha:.6e} over window "
          f"[{exc.window[0]:g}, {exc.window[1]:g}] -> "
          f"{'FE' if exc.is_FE else 'not FE'}")
    return 0 if (report.passed and exc.is_FE) else 1


def cmd_list(_args: argparse.Namespace) -> int:
    for name in SCENARIO_NAMES:
        laws = _SCENARIO_DEFAULTS[name]["estimators"]
        print(f"{name}: default horizon {_SCENARIO_DEFAULTS[name]['horizon']:g} s, "
              f"estimators: {', '.join(laws)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dremsim",
        description="Simulate mixed-regression parameter estimation scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write outputs")
    p_run.add_argument("--config", help="TOML config file")
    p_run.add_argument("--scenario", choices=SCENARIO_NAMES)
    p_run.add_argument("--estimators", help="comma list, e.g. drem,pmono")
    p_run.add_argument("--horizon", type=float)
    p_run.add_argument("--step", type=float)
    p_run.add_argument("--stride", type=int)
    p_run.add_argument("--gamma", type=float,
                       help="proposed-law gain (gamma / gamma0)")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--out", help="output directory (default: out)")
    p_run.set_defaults(func=cmd_run)

    p_ver = sub.add_parser("verify", help="audit bundle identities and excitation")
    p_ver.add_argument("scenario")
    p_ver.add_argument("--samples", type=int, default=1000)
    p_ver.add_argument("--seed", type=int)
    p_ver.set_defaults(func=cmd_verify)

    p_list = sub.add_parser("list-scenarios", help="print registered scenarios")
    p_list.set_defaults(func=cmd_list)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
