import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stakereward.calibration import calibrate_weights, three_traveler_profiles
from stakereward.errors import DimensionError, DomainError
from stakereward.judges import (CHECKLIST_CATEGORY_WEIGHTS, RUBRIC_WEIGHTS, ChecklistItem, JudgeNoiseProfile,
                                JudgeOutput, LatentPlanState, checklist_score, default_checklist,
                                judge_checklist, judge_decomposed_adaptive, judge_decomposed_fixed,
                                judge_direct, judge_rubric, renormalize_weights)
from stakereward.metrics import weight_shift
from stakereward.noise_model import NoiseSpec

U3 = (0.40, 0.95, 0.80)


def quiet(n, **kw):
    return JudgeNoiseProfile(NoiseSpec.homogeneous(n), **kw)


def noisy(n, sd=0.05, se=0.1, eps=0.05, kappa=1.0, **kw):
    return JudgeNoiseProfile(NoiseSpec.homogeneous(n, sd, se, eps), presentation_sensitivity=kappa, **kw)


# -- direct --------------------------------------------------------------------

def test_direct_noiseless():
    s = LatentPlanState(U3, (0.2, 0.3, 0.5))
    out = judge_direct(s, quiet(3), np.random.default_rng(0))
    assert out.score == pytest.approx(1 + 9 * (0.08 + 0.285 + 0.4), abs=1e-12)


def test_direct_presentation_acts_as_noise():
    base = LatentPlanState(U3, unit_seed=5)
    prof = noisy(3, repeat_scale=0.0)
    scores = [judge_direct(base.with_presentation(p), prof, 0).score for p in range(55)]
    assert np.var(scores) > 0
    assert judge_direct(base.with_presentation(3), prof, 0).score == judge_direct(
        base.with_presentation(3), prof, 99).score


def test_direct_zero_dispersion_ignores_presentation():
    base = LatentPlanState((0.6,) * 4, (0.1, 0.2, 0.3, 0.4))
    prof = JudgeNoiseProfile(NoiseSpec.homogeneous(4, 0.0, 0.2, 0.0), presentation_sensitivity=1.0)
    scores = {judge_direct(base.with_presentation(p), prof, p).score for p in range(20)}
    assert len(scores) == 1
    assert scores.pop() == pytest.approx(1 + 9 * 0.6, abs=1e-12)


def test_repeat_scale_zero_kappa_zero_is_deterministic():
    s = LatentPlanState(U3)
    prof = noisy(3, kappa=0.0, repeat_scale=0.0, checklist_flip_prob=0.3, dimension_sigma=0.2)
    for judge in (judge_direct, judge_rubric, judge_checklist, judge_decomposed_adaptive):
        assert len({judge(s, prof, r).score for r in range(10)}) == 1


# -- rubric --------------------------------------------------------------------

def test_rubric_weights_sum_to_one():
    assert math.fsum(RUBRIC_WEIGHTS) == pytest.approx(1.0, abs=1e-15)


def test_rubric_perfect_quality():
    s = LatentPlanState(U3, dimension_quality=(1.0,) * 5)
    assert judge_rubric(s, quiet(3), 0).score == pytest.approx(10.0)


def test_rubric_formula():
    q = (0.9, 0.5, 0.3, 0.7, 0.1)
    s = LatentPlanState(U3, dimension_quality=q)
    expected = 1 + 9 * (0.27 + 0.125 + 0.06 + 0.105 + 0.01)
    assert judge_rubric(s, quiet(3), 0).score == pytest.approx(expected, abs=1e-12)


def test_rubric_has_no_weight_channel():
    s = LatentPlanState(U3, dimension_quality=(0.5,) * 5)
    prof = JudgeNoiseProfile(NoiseSpec.homogeneous(3, 0.0, 0.5, 0.0), presentation_sensitivity=1.0)
    assert len({judge_rubric(s.with_presentation(p), prof, p).score for p in range(10)}) == 1


# -- checklist -----------------------------------------------------------------

def test_checklist_score_formula():
    assert checklist_score([True, False], [5.0, 5.0]) == 5.5
    assert checklist_score([True] * 3, [1, 2, 3]) == 10.0
    assert checklist_score([False] * 3, [1, 2, 3]) == 1.0
    with pytest.raises(DomainError):
        checklist_score([], [])
    with pytest.raises(DimensionError):
        checklist_score([True], [1.0, 2.0])


def test_checklist_all_true_and_all_false():
    true_items = tuple(ChecklistItem("B", 2.0, True) for _ in range(4))
    false_items = tuple(ChecklistItem("B", 2.0, False) for _ in range(4))
    assert judge_checklist(LatentPlanState(U3, checklist=true_items), quiet(3), 0).score == 10.0
    assert judge_checklist(LatentPlanState(U3, checklist=false_items), quiet(3), 0).score == 1.0


def test_default_checklist_shape():
    items = default_checklist(U3, (0.5,) * 5)
    cat_a = [it for it in items if it.category == "A"]
    assert len(cat_a) == 3 * len(U3)
    assert all(it.weight == CHECKLIST_CATEGORY_WEIGHTS["A"] for it in cat_a)
    # 0.40 passes the 0.25 threshold only; 0.95 passes all; 0.80 passes all three
    assert [it.truth for it in cat_a] == [True, False, False, True, True, True, True, True, True]
    assert {it.category for it in items} == set("ABCDE")


def test_checklist_grows_with_n():
    assert len(default_checklist((0.5,) * 8, (0.5,) * 5)) - len(default_checklist((0.5,) * 2, (0.5,) * 5)) == 18


def test_checklist_item_weight_positive():
    with pytest.raises(DomainError):
        ChecklistItem("A", 0.0, True)


def test_checklist_flip_rate():
    items = tuple(ChecklistItem("B", 1.0, True) for _ in range(200))
    s = LatentPlanState(U3, checklist=items)
    prof = quiet(3, checklist_flip_prob=0.2)
    flips = sum(sum(not a for a in judge_checklist(s, prof, np.random.default_rng(k)).items) for k in range(50))
    assert flips / (200 * 50) == pytest.approx(0.2, abs=0.01)


# -- decomposed ------------------------------------------------------------------

def test_adaptive_noiseless():
    s = LatentPlanState(U3, (0.2, 0.3, 0.5))
    out = judge_decomposed_adaptive(s, quiet(3), 0)
    assert out.score == pytest.approx(1 + 9 * (0.08 + 0.285 + 0.4), abs=1e-12)
    assert out.per_role_weights == pytest.approx((0.2, 0.3, 0.5))
    assert out.per_role_utilities == pytest.approx(tuple(1 + 9 * u for u in U3))


def test_adaptive_weights_stay_on_simplex():
    s = LatentPlanState((0.1, 0.5, 0.9, 0.3, 0.7))
    prof = noisy(5, se=0.3)
    for k in range(10_000):
        w = judge_decomposed_adaptive(s, prof, np.random.default_rng(k)).per_role_weights
        assert abs(math.fsum(w) - 1) <= 1e-12 and min(w) >= 0


def test_renormalize_floors_negative():
    assert renormalize_weights([0.5, -0.1, 0.6]).tolist() == pytest.approx([0.5 / 1.1, 0.0, 0.6 / 1.1])
    assert renormalize_weights([-1.0, -1.0]).tolist() == [0.5, 0.5]


def test_fixed_uniform_noiseless_is_mean():
    s = LatentPlanState(U3, (0.2, 0.3, 0.5))
    out = judge_decomposed_fixed(s, quiet(3), (1 / 3,) * 3, 0)
    assert out.score == pytest.approx(1 + 9 * sum(U3) / 3, abs=1e-12)


def test_fixed_and_adaptive_share_utilities():
    s = LatentPlanState(U3, (0.2, 0.3, 0.5), unit_seed=3, presentation_seed=8)
    prof = noisy(3)
    a = judge_decomposed_adaptive(s, prof, np.random.default_rng(21))
    f = judge_decomposed_fixed(s, prof, (1 / 3,) * 3, np.random.default_rng(21))
    assert a.per_role_utilities == f.per_role_utilities
    assert a.score != f.score


def test_fixed_with_calibrated_weights():
    cw = calibrate_weights(three_traveler_profiles())
    mp.mp.dps = 40
    e = [mp.exp(mp.mpf(d) / 5) for d in (5, 1, 3)]
    oracle = [float(x / mp.fsum(e)) for x in e]
    out = judge_decomposed_fixed(LatentPlanState(U3), quiet(3), cw.weights.values, 0)
    assert out.per_role_weights == pytest.approx(oracle, abs=1e-15)
    assert out.score == pytest.approx(1 + 9 * sum(w * u for w, u in zip(oracle, U3)), abs=1e-12)
    assert out.per_role_weights != pytest.approx((1 / 3,) * 3)


def test_fixed_dimension_mismatch():
    with pytest.raises(DimensionError):
        judge_decomposed_fixed(LatentPlanState(U3), quiet(3), (0.5, 0.5), 0)


def test_noise_spec_must_match_state():
    with pytest.raises(DimensionError):
        judge_direct(LatentPlanState(U3), quiet(4), 0)


def test_weight_drift_grows_with_dispersion():
    prof = noisy(4, sd=0.02, se=0.05, eps=0.0)
    spreads = []
    for disp in (0.0, 0.1, 0.3):
        u = tuple(0.5 + disp * x for x in (-1.0, -0.3, 0.3, 1.0))
        s = LatentPlanState(u, unit_seed=1)
        outs = [judge_decomposed_adaptive(s.with_presentation(k), prof, np.random.default_rng(k))
                for k in range(1000)]
        w = np.array([o.per_role_weights for o in outs])
        w_bar = w.mean(axis=0)
        shifts = [weight_shift(o.per_role_weights, w_bar, o.per_role_utilities) for o in outs]
        spreads.append(np.var(shifts))
    assert spreads[0] < spreads[1] < spreads[2]
    assert spreads[1] > 0


@given(st.lists(st.floats(0, 1), min_size=2, max_size=8), st.floats(0, 1), st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_scores_in_range(u, sigma, seed):
    n = len(u)
    s = LatentPlanState(tuple(u), unit_seed=seed, presentation_seed=seed // 2)
    prof = JudgeNoiseProfile(NoiseSpec.homogeneous(n, sigma, sigma, sigma), presentation_sensitivity=1.0,
                             checklist_flip_prob=min(sigma, 0.9), dimension_sigma=sigma)
    for judge in (judge_direct, judge_rubric, judge_checklist, judge_decomposed_adaptive):
        assert 1.0 <= judge(s, prof, seed).score <= 10.0
    assert 1.0 <= judge_decomposed_fixed(s, prof, (1 / n,) * n, seed).score <= 10.0


def test_output_and_profile_validation():
    with pytest.raises(DomainError):
        JudgeOutput(10.5)
    with pytest.raises(DomainError):
        JudgeNoiseProfile(NoiseSpec.homogeneous(2), presentation_sensitivity=-1)
    with pytest.raises(DomainError):
        JudgeNoiseProfile(NoiseSpec.homogeneous(2), checklist_flip_prob=1.0)
    with pytest.raises(DomainError):
        LatentPlanState(U3, dimension_quality=(0.5,) * 4)
