import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from atomtest.errors import InputError
from atomtest.model import (EffectEstimates, ScenarioSpec, TrialData, marginal_delta,
                            observed_mask, recompose_delta, split_by_atom)


def test_trial_data_validates():
    with pytest.raises(InputError):
        TrialData([1.0, 2.0], [0])
    with pytest.raises(InputError):
        TrialData([1.0, 2.0], [0, 2])
    with pytest.raises(InputError):
        TrialData([1.0, 2.0], [0, 0])
    with pytest.raises(InputError):
        TrialData([1.0, math.nan], [0, 1])
    with pytest.raises(InputError):
        TrialData([1.0, 2.0], [0, 1], covariates=[[1.0], [2.0], [3.0]])


def test_covariate_names_default():
    d = TrialData([1.0, 2.0, 3.0], [0, 1, 1], covariates=[[1, 2], [3, 4], [5, 7]])
    assert d.covariate_names == ("x1", "x2")
    assert d.covariates.shape == (3, 2)


def test_split_by_atom_counts():
    d = TrialData([0.0, 1.5, 2.5, 0.0, 0.0, 3.0], [0, 0, 0, 1, 1, 1])
    s = split_by_atom(d)
    assert s.n_obs == (2, 1)
    assert s.n_total == (3, 3)
    assert s.n_unobserved == (1, 2)
    np.testing.assert_array_equal(s.observed_1, [3.0])


def test_atom_eps_widens_classification():
    d = TrialData([1e-9, 1.0, 2.0, -1e-12], [0, 0, 1, 1])
    assert split_by_atom(d).n_obs == (2, 2)
    assert split_by_atom(d, atom_eps=1e-6).n_obs == (1, 1)
    with pytest.raises(InputError):
        split_by_atom(d, atom_eps=-1.0)


def test_nonzero_atom():
    d = TrialData([-1.0, 2.0, -1.0, 4.0], [0, 0, 1, 1], atom=-1.0)
    assert observed_mask(d).tolist() == [False, True, False, True]


def test_swap_groups_involution():
    d = TrialData([0.0, 1.0, 2.0, 3.0], [0, 1, 0, 1])
    np.testing.assert_array_equal(d.swap_groups().swap_groups().group, d.group)


def test_scenario_validation():
    with pytest.raises(InputError):
        ScenarioSpec(1, 2, 0.0, 0.5)
    with pytest.raises(InputError):
        ScenarioSpec(1, 2, 0.5, 0.5, dist="cauchy")
    with pytest.raises(InputError):
        ScenarioSpec(-1, 2, 0.5, 0.5, dist="t2sq")


@pytest.mark.parametrize("spec,expected", [
    (ScenarioSpec(3.0, 4.0, 0.35, 0.35), 0.35),
    (ScenarioSpec(3.5, 3.5, 0.40, 0.30), -0.35),
    (ScenarioSpec(3.0, 4.0, 0.40, 0.30), 0.0),
])
def test_marginal_delta_table_setups(spec, expected):
    assert marginal_delta(spec) == pytest.approx(expected, abs=1e-12)


def test_cancellation_identity():
    # survivors better, fewer observed: the combined means can coincide
    spec = ScenarioSpec(3.0, 4.0, 0.4, 0.3)
    assert spec.pi1 * spec.mu1 == pytest.approx(spec.pi0 * spec.mu0)
    assert marginal_delta(spec) == pytest.approx(0.0, abs=1e-12)


@given(st.floats(-5, 5), st.floats(0, 1), st.floats(0, 1), st.floats(-5, 5), st.floats(-3, 3))
def test_recompose_matches_direct(md, p0, p1, m0, e):
    direct = (p1 * (m0 + md) + (1 - p1) * e) - (p0 * m0 + (1 - p0) * e)
    assert recompose_delta(md, p0, p1, m0, e) == pytest.approx(direct, abs=1e-10)


@given(st.floats(-5, 5), st.floats(0.01, 1), st.floats(-5, 5))
def test_recompose_atom_invariance_when_pi_equal(md, p, m0):
    # with equal observation probabilities the atom drops out
    assert recompose_delta(md, p, p, m0, 0.0) == pytest.approx(recompose_delta(md, p, p, m0, 7.0), abs=1e-9)


def test_effect_estimates_odds_ratio():
    assert EffectEstimates(1.0, math.log(2.0), 0.0).or_hat == pytest.approx(2.0)
    assert EffectEstimates(1.0, math.inf, 0.0).or_hat == math.inf
    assert EffectEstimates(1.0, -math.inf, 0.0).or_hat == 0.0
    assert math.isnan(EffectEstimates(1.0, math.nan, 0.0).or_hat)
