"""Executable experiment definitions and their closed-loop runners."""

from .academic import (
    ALL_LAWS,
    AcademicScenario,
    academic_bundle,
    academic_pmono_bundle,
    academic_problem,
    academic_regressor,
    academic_theta_map,
    simulate_academic,
)
from .academic import THETA_BOX as ACADEMIC_THETA_BOX
from .result import SimResult
from .robot import (
    ROBOT_LAWS,
    RobotScenario,
    RobotState,
    SineReference,
    regression_outputs,
    robot_bundle,
    robot_dynamics,
    robot_pmono_bundle,
    robot_problem,
    robot_regression_rhs,
    robot_theta_map,
    run_closed_loop,
    slotine_li,
)
from .robot import THETA_BOX as ROBOT_THETA_BOX

SCENARIO_NAMES = ("academic", "robot")

__all__ = [
    "ACADEMIC_THETA_BOX",
    "ALL_LAWS",
    "AcademicScenario",
    "ROBOT_LAWS",
    "ROBOT_THETA_BOX",
    "RobotScenario",
    "RobotState",
    "SCENARIO_NAMES",
    "SimResult",
    "SineReference",
    "academic_bundle",
    "academic_pmono_bundle",
    "academic_problem",
    "academic_regressor",
    "academic_theta_map",
    "regression_outputs",
    "robot_bundle",
    "robot_dynamics",
    "robot_pmono_bundle",
    "robot_problem",
    "robot_regression_rhs",
    "robot_theta_map",
    "run_closed_loop",
    "simulate_academic",
    "slotine_li",
]
