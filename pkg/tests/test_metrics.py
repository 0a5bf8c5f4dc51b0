import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stakereward.errors import InsufficientDataError, MissingDataError, NotApplicableError
from stakereward.metrics import (EXACT_REPEAT, ScoreRecord, cell_table, coefficient_of_variation,
                                 consistency_report, delta_r_w, growth, normalized_shift_stats,
                                 population_variance, read_jsonl, sigma2_rep, sigma2_sem, sr_ratio,
                                 weight_drift_report, write_jsonl)


def welford(xs):
    mean, m2 = 0.0, 0.0
    for k, x in enumerate(xs, 1):
        d = x - mean
        mean += d / k
        m2 += d * (x - mean)
    return m2 / len(xs)


def rec(score, family="format_conversion", version=1, seed="s0", n=3, quality="high", **kw):
    return ScoreRecord(seed, n, quality, family, version, score, **kw)


# multiplier example: the mean weights are reconstructed from the product column
# (w_bar = w - product/u_hat); a second record mirrors the first around w_bar
W_ACTUAL = (0.100, 0.100, 0.300, 0.300, 0.200)
W_BAR = (0.1265, 0.1395, 0.228, 0.251, 0.255)
U_HAT = (8.0, 8.0, 1.0, 2.0, 6.0)


def multiplier_group():
    mirror = tuple(2 * b - a for a, b in zip(W_ACTUAL, W_BAR))
    return [rec(5.0, version=1, n=5, weights=W_ACTUAL, utilities=U_HAT),
            rec(6.0, version=2, n=5, weights=mirror, utilities=(5.0,) * 5)]


# -- variances -----------------------------------------------------------------

def test_sigma2_sem_examples():
    assert sigma2_sem([rec(4.0), rec(4.0, version=2)]) == 0
    assert sigma2_sem([rec(3.5), rec(5.5, version=2)]) == 1.0


def test_sigma2_sem_ignores_repeats_and_needs_two():
    recs = [rec(3.5), rec(5.5, version=2), rec(9.0, EXACT_REPEAT, 1)]
    assert sigma2_sem(recs) == 1.0
    with pytest.raises(InsufficientDataError):
        sigma2_sem([rec(3.0), rec(4.0, EXACT_REPEAT)])


def test_sigma2_rep():
    assert sigma2_rep([rec(7.0, EXACT_REPEAT, r) for r in range(1, 6)]) == 0
    assert sigma2_rep([rec(6.0, EXACT_REPEAT, 1), rec(8.0, EXACT_REPEAT, 2)]) == 1.0
    with pytest.raises(InsufficientDataError):
        sigma2_rep([rec(6.0, EXACT_REPEAT, 1)])


def test_sigma2_rep_gaussian_pool():
    rng = np.random.default_rng(0)
    pooled = np.mean([sigma2_rep([rec(float(x), EXACT_REPEAT, r + 1) for r, x in enumerate(rng.normal(5, 0.5, 5))])
                      for _ in range(4000)])
    # population variance of 5 draws has mean 0.25 * 4/5
    assert pooled == pytest.approx(0.2, abs=0.005)


def test_variance_matches_welford_on_55_scores():
    scores = np.random.default_rng(3).uniform(1, 10, 55)
    recs = [rec(float(s), version=k + 1) for k, s in enumerate(scores)]
    assert sigma2_sem(recs) == pytest.approx(welford(scores), rel=1e-9)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=200))
@settings(max_examples=200)
def test_population_variance_oracle(xs):
    assert population_variance(xs) == pytest.approx(welford(xs), rel=1e-9, abs=1e-9)


@given(st.lists(st.floats(1, 10), min_size=2, max_size=30), st.floats(0.1, 10))
def test_scale_equivariance(xs, c):
    recs = [rec(x, version=k + 1) for k, x in enumerate(xs)]
    scaled = [rec(c * x, version=k + 1) for k, x in enumerate(xs)]
    assert sigma2_sem(scaled) == pytest.approx(c * c * sigma2_sem(recs), rel=1e-9, abs=1e-12)


def test_cv_definition():
    recs = [rec(4.0), rec(6.0, version=2)]
    assert coefficient_of_variation(recs) == pytest.approx(1.0 / 5.0)


# -- growth and S/R ------------------------------------------------------------

def test_growth_examples():
    assert growth({2: 0.59, 8: 1.10}) == pytest.approx(1.864, abs=5e-4)
    assert growth({2: 0.45, 8: 1.57}) == pytest.approx(3.489, abs=5e-4)
    assert growth({2: 0.7, 8: 0.7}) == 1.0


def test_growth_errors():
    with pytest.raises(MissingDataError):
        growth({2: 0.5})
    assert growth({2: 0.0, 8: 0.3}) == math.inf
    assert math.isnan(growth({2: 0.0, 8: 0.0}))


def test_sr_ratio_examples():
    assert sr_ratio(1.10, 0.42) == pytest.approx(2.619, abs=5e-4)
    assert sr_ratio(0.93, 0.0) == math.inf
    assert math.isnan(sr_ratio(0.0, 0.0))
    with pytest.raises(ValueError):
        sr_ratio(-1.0, 1.0)


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.1, 10))
def test_ratios_scale_free(a, b, r, c):
    assert growth({2: c * a, 8: c * b}) == pytest.approx(growth({2: a, 8: b}), rel=1e-12)
    assert sr_ratio(c * a, c * r) == pytest.approx(sr_ratio(a, r), rel=1e-12)


# -- drift ---------------------------------------------------------------------

def test_multiplier_example():
    shifts = delta_r_w(multiplier_group())
    assert shifts[0] == pytest.approx(-0.688, abs=1e-3)


def test_identical_weights_no_shift():
    w = (0.2, 0.3, 0.5)
    group = [rec(float(k), version=k + 1, weights=w, utilities=(k, 2.0, 3.0)) for k in range(6)]
    assert delta_r_w(group) == [0.0] * 6


def test_missing_weights():
    with pytest.raises(NotApplicableError):
        delta_r_w([rec(1.0), rec(2.0, version=2)])


@given(st.integers(2, 8), st.integers(2, 10), st.integers(0, 2**32))
@settings(max_examples=50)
def test_shift_translation_invariance(n, m, seed):
    rng = np.random.default_rng(seed)
    ws = rng.dirichlet(np.ones(n), size=m)
    us = rng.uniform(1, 10, (m, n))
    c = rng.uniform(-3, 3)
    a = delta_r_w([rec(1.0, version=k + 1, n=n, weights=tuple(ws[k]), utilities=tuple(us[k])) for k in range(m)])
    b = delta_r_w([rec(1.0, version=k + 1, n=n, weights=tuple(ws[k]), utilities=tuple(us[k] + c))
                   for k in range(m)])
    assert np.allclose(a, b, atol=1e-9)
    w_bar = ws.mean(axis=0)
    assert np.all(np.abs((ws - w_bar).sum(axis=1)) <= 1e-12)


def test_normalized_shift_hand_example():
    mean, p95, rng_ = normalized_shift_stats([[-0.2, 0.0, 0.2]], [0.5])
    assert rng_ == pytest.approx(0.8)
    assert mean == pytest.approx(0.4 * 2 / 3, abs=1e-12)
    assert p95 >= mean


def test_drift_report_fixed_weights_all_zero():
    w = (0.25,) * 4
    groups = [[rec(float(s), version=k + 1, seed=f"s{g}", n=4, weights=w, utilities=(s, 1.0, 2.0, 3.0))
               for k, s in enumerate((4.0, 5.0, 6.5))] for g in range(3)]
    r = weight_drift_report(groups)
    assert (r.mean_abs_shift_over_sigma, r.p95_shift_over_sigma, r.shift_range_over_sigma, r.w_var_pct,
            r.w_cv) == (0, 0, 0, 0, 0)
    assert r.groups == 3 and r.excluded_groups == 0


def test_drift_report_excludes_flat_groups():
    flat = [rec(5.0, version=k + 1, weights=(0.5, 0.5), utilities=(1.0, 2.0), n=2) for k in range(3)]
    moving = [rec(5.0 + k, version=k + 1, seed="s1", n=2, weights=(0.4 + 0.1 * k, 0.6 - 0.1 * k),
                  utilities=(2.0, 8.0)) for k in range(3)]
    r = weight_drift_report([flat, moving])
    assert r.excluded_groups == 1 and r.groups == 2
    assert r.mean_abs_shift_over_sigma > 0
    assert r.p95_shift_over_sigma >= r.mean_abs_shift_over_sigma


def test_drift_report_needs_groups():
    with pytest.raises(InsufficientDataError):
        weight_drift_report([])
    with pytest.raises(InsufficientDataError):
        weight_drift_report([[rec(1.0, weights=(1.0,), utilities=(1.0,))]])


# -- consistency report ---------------------------------------------------------

def unit_records(seed, n, quality, sem_scores, rep_scores):
    out = [rec(s, version=k + 1, seed=seed, n=n, quality=quality) for k, s in enumerate(sem_scores)]
    out += [rec(s, EXACT_REPEAT, k + 1, seed=seed, n=n, quality=quality) for k, s in enumerate(rep_scores)]
    return out


def test_consistency_report_cells_and_growth():
    records = (unit_records("s0", 2, "high", [5, 6], [5, 5]) + unit_records("s1", 2, "high", [4, 6], [5, 6])
               + unit_records("s0", 8, "high", [3, 7], [5, 5]) + unit_records("s0", 8, "medium", [1, 9], [2, 2]))
    rep = consistency_report(records, qualities=("high",))
    assert rep.per_n[2].sigma2_sem == pytest.approx((0.25 + 1.0) / 2)
    assert rep.per_n[8].sigma2_sem == 4.0
    assert rep.growth == pytest.approx(4.0 / 0.625)
    assert rep.sr_ratio == math.inf
    assert rep.per_n[2].units == 2
    cells = cell_table(records)
    assert set(cells) == {(2, "high"), (8, "high"), (8, "medium")}
    pooled = consistency_report(records)
    assert pooled.per_n[8].sigma2_sem == pytest.approx((4.0 + 16.0) / 2)


def test_consistency_report_empty():
    with pytest.raises(InsufficientDataError):
        consistency_report([rec(1.0), rec(2.0, version=2)], qualities=("low",))


def test_jsonl_round_trip(tmp_path):
    records = multiplier_group() + [rec(3.0, EXACT_REPEAT, 1, judge="direct")]
    path = tmp_path / "r.jsonl"
    write_jsonl(records, path)
    assert read_jsonl(path) == records


def test_version_must_be_positive():
    with pytest.raises(ValueError):
        rec(1.0, version=0)
