"""Two-part likelihood ratio tests for semi-continuous outcomes with an atom."""

from .baselines import BaselineResult, t_test, wilcoxon
from .empirical import el_lambda, el_profile_w1, semiparametric_lrt
from .errors import (AtomTestError, ConfigError, ContinuousPartUndefinedError, DegenerateError,
                     HullError, InputError, RegionError, SeparationError)
from .inference import (ConfidenceInterval, ConfidenceRegion, ci_beta_delta, ci_delta_combined,
                        ci_mu_delta, simultaneous_region)
from .model import ScenarioSpec, TrialData, marginal_delta, split_by_atom
from .numerics import chisq_quantile, chisq_sf
from .parametric import PARAMETRIC, SEMIPARAMETRIC, TestResult, parametric_lrt
from .simulate import PowerTable, power_study, sample_dataset

__version__ = "0.1.0"

__all__ = [
    "AtomTestError", "BaselineResult", "ConfidenceInterval", "ConfidenceRegion", "ConfigError",
    "ContinuousPartUndefinedError", "DegenerateError", "HullError", "InputError", "PARAMETRIC",
    "PowerTable", "RegionError", "SEMIPARAMETRIC", "ScenarioSpec", "SeparationError", "TestResult",
    "TrialData", "ci_beta_delta", "ci_delta_combined", "ci_mu_delta", "chisq_quantile", "chisq_sf",
    "el_lambda", "el_profile_w1", "marginal_delta", "parametric_lrt", "power_study",
    "sample_dataset", "semiparametric_lrt", "simultaneous_region", "split_by_atom", "t_test",
    "wilcoxon",
]
