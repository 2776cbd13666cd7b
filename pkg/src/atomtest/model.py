"""Data model for semi-continuous two-group outcomes.

A record carries the combined outcome ``y`` (the continuous value when it was
observed, otherwise the atom), a 0/1 group label and optional covariates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InputError

DISTRIBUTIONS = ("normal", "t2sq")


@dataclass(frozen=True, eq=False)
class TrialData:
    y: np.ndarray
    group: np.ndarray
    atom: float = 0.0
    covariates: Optional[np.ndarray] = None
    covariate_names: tuple = ()

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).ravel()
        g = np.asarray(self.group).ravel()
        if y.shape != g.shape:
            raise InputError(f"y has {y.size} entries but group has {g.size}")
        if not np.all(np.isfinite(y)):
            raise InputError("combined outcome contains non-finite values")
        if not np.all((g == 0) | (g == 1)):
            raise InputError("group labels must be 0 or 1")
        g = g.astype(np.int64)
        for lab in (0, 1):
            if not np.any(g == lab):
                raise InputError(f"group {lab} has no records")
        if not math.isfinite(self.atom):
            raise InputError("atom must be finite")
        x = self.covariates
        names = tuple(self.covariate_names)
        if x is not None:
            x = np.asarray(x, dtype=float)
            if x.ndim == 1:
                x = x[:, None]
            if x.shape[0] != y.size:
                raise InputError("covariate rows do not match the number of records")
            if x.shape[1] == 0:
                x = None
            elif not np.all(np.isfinite(x)):
                raise InputError("covariates contain non-finite values")
        if x is not None and not names:
            names = tuple(f"x{k + 1}" for k in range(x.shape[1]))
        if x is None:
            names = ()
        elif len(names) != x.shape[1]:
            raise InputError("covariate_names length does not match covariate columns")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "group", g)
        object.__setattr__(self, "atom", float(self.atom))
        object.__setattr__(self, "covariates", x)
        object.__setattr__(self, "covariate_names", names)

    @property
    def n(self) -> int:
        return self.y.size

    def swap_groups(self) -> "TrialData":
        return TrialData(self.y, 1 - self.group, self.atom, self.covariates,
                         self.covariate_names)

    @classmethod
    def from_groups(cls, y0, y1, atom: float = 0.0) -> "TrialData":
        y0 = np.asarray(y0, dtype=float)
        y1 = np.asarray(y1, dtype=float)
        return cls(np.concatenate([y0, y1]),
                   np.concatenate([np.zeros(y0.size, int), np.ones(y1.size, int)]),
                   atom)


@dataclass(frozen=True, eq=False)
class SplitData:
    observed_0: np.ndarray
    observed_1: np.ndarray
    n_obs: tuple
    n_total: tuple

    @property
    def n_unobserved(self) -> tuple:
        return (self.n_total[0] - self.n_obs[0], self.n_total[1] - self.n_obs[1])


def observed_mask(data: TrialData, atom_eps: float = 0.0) -> np.ndarray:
    """Boolean mask of records whose outcome was observed (not the atom)."""
    return np.abs(data.y - data.atom) > atom_eps


def split_by_atom(data: TrialData, atom_eps: float = 0.0) -> SplitData:
    """Separate observed continuous values from atoms, per group.

    A value within ``atom_eps`` of the atom counts as unobserved; with the
    default of 0 only exact matches do, including observed values that happen
    to coincide with the atom.
    """
    if atom_eps < 0:
        raise InputError("atom_eps must be non-negative")
    obs = observed_mask(data, atom_eps)
    g0 = data.group == 0
    g1 = ~g0
    y0 = data.y[g0 & obs]
    y1 = data.y[g1 & obs]
    return SplitData(y0, y1, (y0.size, y1.size), (int(g0.sum()), int(g1.sum())))


@dataclass(frozen=True)
class ScenarioSpec:
    """Generative two-group model; ``pi0``/``pi1`` are observation probabilities."""

    mu0: float
    mu1: float
    pi0: float
    pi1: float
    dist: str = "normal"
    atom: float = 0.0
    name: str = ""

    def __post_init__(self):
        for label, p in (("pi0", self.pi0), ("pi1", self.pi1)):
            if not 0.0 < p <= 1.0:
                raise InputError(f"{label} must lie in (0, 1], got {p}")
        if self.dist not in DISTRIBUTIONS:
            raise InputError(f"unknown survivor distribution {self.dist!r}; "
                             f"expected one of {DISTRIBUTIONS}")
        if self.dist == "t2sq" and (self.mu0 <= 0 or self.mu1 <= 0):
            raise InputError("scaled squared-t survivors need positive locations")


@dataclass(frozen=True)
class EffectEstimates:
    mu_delta_hat: float
    beta_delta_hat: float
    delta_hat: float
    or_hat: float = field(init=False)

    def __post_init__(self):
        b = self.beta_delta_hat
        if math.isnan(b):
            odds = math.nan
        else:
            odds = math.exp(b) if b < 709.0 else math.inf
        object.__setattr__(self, "or_hat", odds)


def marginal_delta(spec: ScenarioSpec) -> float:
    """Difference in combined-outcome means, group 1 minus group 0.

    For the squared-t family the survivor location is its median, so the
    value returned is the one implied by those locations.
    """
    e = spec.atom
    return (spec.pi1 * spec.mu1 + (1.0 - spec.pi1) * e) - (spec.pi0 * spec.mu0 + (1.0 - spec.pi0) * e)


def recompose_delta(mu_delta_hat: float, pi0_hat: float, pi1_hat: float,
                    mu0_hat: float, atom: float) -> float:
    """Combined-outcome mean difference from two-part estimates."""
    return (pi1_hat * (mu0_hat + mu_delta_hat) + (1.0 - pi1_hat) * atom
            - pi0_hat * mu0_hat - (1.0 - pi0_hat) * atom)
