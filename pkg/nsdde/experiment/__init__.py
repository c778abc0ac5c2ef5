from nsdde.experiment.config import StudyConfig
from nsdde.experiment.rate_fit import RateFit, fit_rate
from nsdde.experiment.study import (
    ConvergenceReport,
    LevelResult,
    MomentResult,
    prepare_study,
    strong_error_study,
    theory_moment_order,
)

__all__ = [
    "ConvergenceReport",
    "LevelResult",
    "MomentResult",
    "RateFit",
    "StudyConfig",
    "fit_rate",
    "prepare_study",
    "strong_error_study",
    "theory_moment_order",
]
