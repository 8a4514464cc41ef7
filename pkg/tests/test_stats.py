import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from neckbrace import protocol, stats as s
from neckbrace.errors import UndefinedTestError

from oracles import naive_wilcoxon_p


def paired(diff):
    diff = np.asarray(diff, dtype=float)
    return s.PairedSample(np.zeros_like(diff), diff)


def test_all_negative_eight():
    res = s.wilcoxon_signed_rank(paired(-np.arange(1, 9)))
    assert res.p_value == 0.0078125
    assert res.statistic == 0 and res.method == "exact"


@given(st.lists(st.integers(-4, 4), min_size=1, max_size=10))
@settings(max_examples=80, deadline=None)
def test_exact_matches_enumeration_with_ties_and_zeros(values):
    d = np.array(values, dtype=float)
    if not np.any(d):
        with pytest.raises(UndefinedTestError):
            s.wilcoxon_signed_rank(paired(d))
        return
    assert s.wilcoxon_signed_rank(paired(d)).p_value == pytest.approx(naive_wilcoxon_p(d), abs=1e-12)


@given(st.lists(st.floats(-5, 5, allow_nan=False).filter(lambda v: v != 0), min_size=1, max_size=12))
@settings(max_examples=40, deadline=None)
def test_sign_flip_symmetry(values):
    d = np.array(values)
    a = s.wilcoxon_signed_rank(paired(d))
    b = s.wilcoxon_signed_rank(paired(-d))
    assert a.p_value == pytest.approx(b.p_value, abs=1e-12)
    total = d.size * (d.size + 1) / 2
    assert a.statistic + b.statistic == pytest.approx(total)


def test_rank_sum_counts_total():
    counts = s.rank_sum_counts(2 * np.arange(1, 21))
    assert counts.sum() == 2 ** 20
    assert np.array_equal(counts, counts[::-1])


def test_matches_scipy_exact_and_normal():
    rng = np.random.default_rng(0)
    for n in (10, 40):
        d = rng.normal(0.3, 1, n)
        ours = s.wilcoxon_signed_rank(paired(d))
        method = "exact" if n <= 25 else "approx"
        ref = sps.wilcoxon(d, method=method, correction=True)
        assert ours.p_value == pytest.approx(ref.pvalue, rel=1e-9)


def test_unknown_method():
    with pytest.raises(ValueError):
        s.wilcoxon_signed_rank(paired([1.0, 2.0]), method="bootstrap")


def test_paired_sample_validation():
    with pytest.raises(ValueError):
        s.PairedSample([1, 2], [1])
    with pytest.raises(ValueError):
        s.PairedSample([np.nan], [1])


def test_compare_conditions_detects_imposed_effect():
    table = protocol.synth_activity_table(seed=1)
    out = s.compare_conditions(table)
    assert list(out.columns[:10]) == s.COMPARISON_COLUMNS
    assert len(out) == 4 * 11
    spl = out[out.muscle.str.startswith("spl") & (out.posture_plane == "sagittal") & (out.posture_deg > 0)]
    assert spl.significant_05.all()
    with_back = s.compare_conditions(table, include_backward_40=True)
    assert len(with_back) == 4 * 12


def test_compare_conditions_zero_and_incomplete_cells():
    rows = []
    for pid in ("P1", "P2", "P3"):
        for cond in ("base", "loaded"):
            rows.append((pid, cond, "scm_left", "transverse", 15.0, 0.5))
    rows.append(("P1", "base", "spl_left", "transverse", 15.0, 0.5))
    table = pd.DataFrame(rows, columns=["participant", "condition", "muscle", "posture_plane",
                                        "posture_deg", "activity_norm"])
    out = s.compare_conditions(table).set_index("muscle")
    assert np.isnan(out.loc["scm_left", "p_value"]) and not out.loc["scm_left", "significant_05"]
    assert out.loc["spl_left", "note"] == "incomplete"
