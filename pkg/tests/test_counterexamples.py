import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sid import counterexamples as cx
from sid.identify import Query, is_s_id

from oracles import chain_joint_selection_oracle, kernel_marginal_quadrature

# frozen from a direct evaluation of the closed forms
R_M1 = 0.46178137868962094
GAP_M1 = 0.16870918158057258


def test_kernel_marginal_reference_value():
    assert cx.gaussian_bernoulli_marginal(0.0, 1.0, 0.0) == pytest.approx(1 / math.sqrt(4 * math.pi), abs=1e-15)
    assert cx.gaussian_bernoulli_marginal(0.0, 1.0, 0.0) == pytest.approx(0.2820948, abs=1e-7)
    assert cx.gaussian_bernoulli_marginal(0.0, 1.0, 0.0) == pytest.approx(kernel_marginal_quadrature(0.0, 1.0, 0.0), abs=1e-6)


def test_kernel_marginal_zero_variance_is_kernel():
    for mu in (-2.0, 0.3, 1.5):
        want = math.exp(-((mu + 1) ** 2) / 2) / math.sqrt(2 * math.pi)
        assert cx.gaussian_bernoulli_marginal(mu, 0.0, 1.0) == pytest.approx(want, abs=1e-15)
    with pytest.raises(ValueError):
        cx.gaussian_bernoulli_marginal(0.0, -1.0, 1.0)


@given(st.floats(-5, 5), st.floats(0, 10), st.floats(-2, 2))
@settings(max_examples=200, deadline=None)
def test_kernel_marginal_sign_symmetry_and_range(mu, s2, b):
    v = cx.gaussian_bernoulli_marginal(mu, s2, b)
    assert v == cx.gaussian_bernoulli_marginal(-mu, s2, -b)
    assert 0 < v <= 1 / math.sqrt(2 * math.pi)


def test_type1_ratios():
    for k in range(1, 6):
        for m in range(1, 6):
            r0 = cx.interventional_ratio(0.0, k, m)
            r, _, _ = cx.ratio_gap_certificate(m)
            assert r0 == pytest.approx(r, rel=1e-12)
            assert (1 + math.exp(-1 - 1 / (2 * m))) / (1 + math.exp(1 - 1 / (2 * m))) == pytest.approx(r0, rel=1e-12)
            assert cx.interventional_ratio(1.0, k, m) == pytest.approx(math.exp(-2) / r0, rel=1e-12)


def test_m1_reference():
    r, other, gap = cx.ratio_gap_certificate(1)
    assert r == pytest.approx((1 + math.exp(-1.5)) / (1 + math.exp(0.5)), abs=1e-15)
    assert r == pytest.approx(R_M1, abs=1e-15)
    assert gap == pytest.approx(GAP_M1, abs=1e-15)
    assert r > math.exp(-1)
    assert other == pytest.approx(math.exp(-2) / r)


def test_gap_positive_sweep():
    for m in range(1, 10_001):
        r, _, gap = cx.ratio_gap_certificate(m)
        assert r > math.exp(-1) and gap > 0
    limit = (1 + math.exp(-1)) / (1 + math.e)
    assert cx.ratio_gap_certificate(10 ** 9)[0] == pytest.approx(limit, rel=1e-8)
    # the m -> infinity limit is exactly 1/e, so the bound is strict only for finite m
    assert limit == pytest.approx(math.exp(-1), rel=1e-15)


def test_params_validation():
    for bad in ((0, 1), (1, 0), (1.5, 1)):
        with pytest.raises(ValueError):
            cx.ChainParams(*bad)
    with pytest.raises(ValueError):
        cx.ChainParams(1, 1, 0.5)
    with pytest.raises(ValueError):
        cx.ratio_gap_certificate(0)


def test_log_space_stays_finite_for_long_chains():
    v = cx.log_type1_joint_selection(40.0, cx.ChainParams(400, 400, 1.0))
    assert math.isfinite(v)


def test_type2_sign_flip_identity():
    for k in (1, 2, 4):
        for m in (1, 3):
            for b in (1.0, -1.0):
                p = cx.ChainParams(k, m, b)
                for y in (-1.0, 0.0, 0.4, 2.0):
                    assert cx.type2_joint_selection(y, p) == pytest.approx(cx.type1_joint_selection(-y, p), rel=1e-14)
                    assert cx.type2_joint_selection(y, p, False) == pytest.approx(
                        cx.type1_joint_selection(-y, cx.ChainParams(1, m, b)), rel=1e-14
                    )


@pytest.mark.parametrize("family", cx.FAMILIES)
@pytest.mark.parametrize("k,m", [(1, 1), (2, 1), (1, 3), (3, 2), (4, 4)])
def test_closed_form_matches_linear_gaussian_oracle(family, k, m):
    fam = cx.build_family(family, k, m)
    for b in (1.0, -1.0):
        for y in (-1.5, -1.0, 0.0, 1.0, 2.5):
            want = chain_joint_selection_oracle(fam, y, b)
            got = math.exp(cx._log_joint(family, y, fam.k, m, b))
            assert got == pytest.approx(want, rel=1e-9)


def test_type1_with_path_extras_matches_oracle():
    fam = cx.type1_graph(3, 4, z_extra=1, x_extra=1, zx_extra=2)
    for b in (1.0, -1.0):
        for y in (-1.0, 0.0, 1.0):
            want = chain_joint_selection_oracle(fam, y, b)
            assert cx.type1_joint_selection(y, cx.ChainParams(3, 4, b)) == pytest.approx(want, rel=1e-9)
    assert cx.observational_match_check(fam) < 1e-12


def test_minimal_chain_observational_match():
    fam = cx.type1_graph(1, 1)
    assert fam.graph.edges == {("Z", "X"), ("Z", "Y"), ("X", "Y"), ("Y", "S")}
    assert cx.observational_match_check(fam, n_points=100, seed=0) < 1e-12


@pytest.mark.parametrize("family", cx.FAMILIES)
def test_symbolic_coefficients_and_child_counts(family):
    for k in range(1, 5):
        for m in range(1, 5):
            fam = cx.build_family(family, k, m)
            assert set(cx.parent_sum_coefficients(fam).values()) == {0}
            counts = cx.child_multiplicities(fam)
            assert counts.pop("Z") == 2
            assert counts.pop("S") == 0
            assert set(counts.values()) == {1}


def test_negative_controls_break_cancellation():
    fam = cx.type1_graph(2, 2)
    # an extra edge gives X a second child
    g = fam.graph.with_edges(list(fam.graph.edges) + [("X", "S")])
    bad = cx.ChainFamily(fam.family, g, fam.k, fam.m)
    assert cx.parent_sum_coefficients(bad)["X"] != 0
    assert cx.observational_match_check(bad) > 1e-3
    # the sign flip on Z's child is what makes the two models agree
    assert cx.observational_match_check(fam, zprime_sign=1.0) > 1e-3


def test_graphs_are_not_s_id():
    for family in cx.FAMILIES:
        for k in range(1, 4):
            for m in range(1, 4):
                fam = cx.build_family(family, k, m)
                assert not is_s_id(fam.graph, Query(fam.x, fam.y))


def test_graph_builders_reject_bad_extras():
    with pytest.raises(ValueError):
        cx.type1_graph(1, 2, z_extra=1, x_extra=1)
    with pytest.raises(ValueError):
        cx.build_family("type3", 1, 1)


@pytest.mark.parametrize("k,m", [(2, 1), (5, 3)])
def test_falsification_report(k, m):
    rep = cx.falsification_report(k, m)
    assert rep.certified and not rep.graph_s_id
    assert rep.gap == abs(rep.ratio_y0 - rep.ratio_y1)
    d = json.loads(rep.to_json())
    assert len(d["grid"]) == 100
    assert all(math.isfinite(v) for v in (d["gap"], d["ratio_y0"], d["ratio_y1"], d["max_observational_discrepancy"]))
