import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thinwidth.families import TypeNParams, build_gen_g, build_prop47, build_type_n
from thinwidth.morse import validate, width_direct
from thinwidth.thinning import (
    HypothesisError,
    composite_reduction,
    gen_reduce,
    lemma32_bound,
    lemma34_bound,
    prop47_closed_form,
    prop47_move,
    reduce_n_minus_1,
    reduce_n_minus_2,
    six_term,
    thin_params,
    thin_pipeline,
    two_term,
)


def P(s, slack=0):
    return TypeNParams.uniform(s, slack)


# -- n -> n-1 ----------------------------------------------------------------------


def test_lemma32_reference_point():
    out = reduce_n_minus_1(P((3, 3, 3)))
    out.check()
    assert out.delta == 30
    assert out.details["equality_line"] == 2 * 9 + 2 * 9 - 18 - 18 - 6 + 36 == 30
    assert out.bound == 18 and out.passed


def test_lemma32_bounds():
    assert lemma32_bound(3) == 18
    assert lemma32_bound(4) == 54


def test_lemma32_output_is_type_n_minus_1():
    out = reduce_n_minus_1(P((3, 5, 7, 3), 1))
    d = out.diagram_after
    assert d.layout.n == 3 and d.layout.s == (5, 7, 3)
    assert d.check() is d
    assert d.compile() == out.after
    assert validate(out.after) == []


def test_lemma32_runs_without_hypothesis():
    out = reduce_n_minus_1(P((3, 3)))
    out.check()
    assert out.bound is None and not out.hypothesis_holds
    out = reduce_n_minus_1(P((5, 3, 3)))  # s1 > s3
    assert out.bound is None


# -- n -> n-2 ----------------------------------------------------------------------


def test_lemma34_reference_point():
    out = reduce_n_minus_2(P((3, 3, 3)))
    out.check()
    assert (width_direct(out.before), width_direct(out.after)) == (128, 92)
    assert out.delta == 36 == out.bound
    d = out.details
    assert (d["m1"], d["M1"], d["m2"], d["M2"]) == (0, 3, 3, 0)
    assert (d["mT1"], d["MT1"], d["mT2"], d["MT2"]) == (0, 3, 3, 0)
    assert six_term(0, 3, 3, 0, 0, 3, 3, 0) == 36
    assert d["two_term"] == two_term(0, 3, 0, 3, 3, 3, 3) == 36


def test_lemma34_bounds():
    assert lemma34_bound(3) == 36
    assert lemma34_bound(5) == 156
    assert reduce_n_minus_2(P((3, 3, 1))).bound == 36


def test_lemma34_output_is_type_n_minus_2():
    out = reduce_n_minus_2(P((5, 3, 3, 5, 3), 2))
    lay = out.diagram_after.layout
    assert lay.n == 3 and lay.s == (3, 5, 3)
    assert out.diagram_after.compile() == out.after


def test_lemma34_needs_n_at_least_3():
    with pytest.raises(HypothesisError):
        reduce_n_minus_2(P((3, 3)))


# -- composite ---------------------------------------------------------------------


@pytest.mark.parametrize("s2", [1, 3, 5, 7])
def test_composite_n2(s2):
    out = composite_reduction(P((1, s2)), 1)
    out.check()
    assert out.bound == 6 and out.delta >= 6


def test_composite_n3_first_unit():
    out = composite_reduction(P((1, 3, 3)), 1)
    assert out.details["r"] >= 4
    assert out.delta >= 16


def test_composite_n3_middle_unit():
    out = composite_reduction(P((3, 1, 3)), 2)
    l, r = out.details["l"], out.details["r"]
    assert (l + 1) * r + 2 >= 8 * 2 + 2 > 16
    assert out.delta >= (l + 1) * r + 2


def test_composite_needs_unit_bundle():
    with pytest.raises(HypothesisError):
        composite_reduction(P((3, 3, 3)))


def test_composite_accounting():
    out = composite_reduction(P((3, 3, 1, 5, 3)))
    d = out.details
    kp, kq = out.steps
    assert out.delta == d["reduction_p"] + d["reduction_q"] + (d["l"] + 1) * d["r"] + 2
    assert kp.delta == d["reduction_p"] and kq.delta == d["reduction_q"]


# -- pipeline ----------------------------------------------------------------------


def test_pipeline_n3():
    out = thin_pipeline(P((3, 3, 3)))
    out.check()
    assert out.delta >= 18 == out.bound


@pytest.mark.parametrize("s", [(3, 3, 3, 3), (3, 5, 5, 3), (3, 3, 7, 5), (5, 3, 5, 3)])
def test_pipeline_n4(s):
    out = thin_pipeline(P(s))
    assert out.delta >= 54 >= 2 * 4 * 4


@pytest.mark.parametrize("s", [(5, 3, 3, 3, 3), (7, 5, 3, 3, 5), (5, 5, 3, 7, 7)])
def test_pipeline_n5_case_two(s):
    out = thin_pipeline(P(s))
    assert out.details["steps"][0] == "lemma34"
    assert out.delta >= 156 >= 2 * 25


def test_pipeline_tie_prefers_lemma34():
    assert thin_pipeline(P((3, 3, 3))).details["steps"] == ("lemma34",)
    assert thin_pipeline(P((3, 3, 5))).details["steps"] == ("lemma32",)


def test_pipeline_routes_unit_bundles():
    out = thin_pipeline(P((3, 1, 3)))
    assert out.hypothesis == "composite" and out.bound == 16


def test_pipeline_needs_n_above_2():
    with pytest.raises(HypothesisError):
        thin_pipeline(P((3, 3)))


def test_pipeline_refuses_unit_diagram():
    with pytest.raises(HypothesisError):
        thin_pipeline(build_type_n(P((3, 1, 3))))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([1, 3, 5, 7]), min_size=2, max_size=5), st.integers(0, 2))
def test_thin_params_property(s, slack):
    out = thin_params(P(s, slack))
    out.check()
    assert out.passed
    n = len(s)
    if out.hypothesis == "composite":
        assert out.delta >= 2 * n * n - 2
    elif out.hypothesis == "pipeline":
        assert out.delta >= 2 * n * n


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([3, 5, 7]), min_size=3, max_size=6), st.integers(0, 2))
def test_lemma_formulas_property(s, slack):
    a = reduce_n_minus_1(P(s, slack))
    a.check()
    assert a.delta == a.details["equality_line"]
    b = reduce_n_minus_2(P(s, slack))
    b.check()
    assert b.delta == b.details["six_term"] == b.details["two_term"]
    assert a.passed and b.passed


# -- generalized scripts -------------------------------------------------------------


@pytest.mark.parametrize("s", [(3, 3, 5), (3, 5, 3, 7)])
def test_gen_equal_columns_match_lemma32(s):
    n = len(s)
    d = build_gen_g(s, s, (1,) * n, (1,) * n)
    assert gen_reduce(d, "prop43").delta == reduce_n_minus_1(P(s, 1)).delta


@pytest.mark.parametrize("s", [(5, 3, 3), (7, 3, 5, 3)])
def test_gen_equal_columns_match_lemma34(s):
    n = len(s)
    d = build_gen_g(s, s, (0,) * n, (0,) * n)
    assert gen_reduce(d, "prop44").delta == reduce_n_minus_2(P(s)).delta


def test_prop43_unequal_columns():
    out = gen_reduce(build_gen_g((3, 3, 3), (5, 5, 5)), "prop43")
    out.check()
    assert out.delta >= 1


def test_prop45_unique_minimum():
    out = gen_reduce(build_gen_g((5, 5, 5, 5), (5, 5, 3, 5)), "prop45")
    out.check()
    assert out.details["depth"] == 2 and out.delta >= 1


def test_gen_hypothesis_violation():
    with pytest.raises(HypothesisError):
        gen_reduce(build_gen_g((5, 3, 3), (5, 3, 3)), "prop43")
    with pytest.raises(HypothesisError):
        gen_reduce(build_gen_g((3, 3, 3), (3, 3, 3)), "prop45")


# -- prop 4.7 ------------------------------------------------------------------------


@pytest.mark.parametrize("pattern, r", [([1, -1], 1), ([1, 1, -1, -1], 2), ([1, -1, 1, -1, 1, -1], 3)])
def test_prop47_bound(pattern, r):
    out = prop47_move(build_prop47(pattern))
    out.check()
    assert out.bound == 8 * r + 4
    assert out.delta >= out.bound
    assert out.delta == prop47_closed_form(r, 1, 1, 0, 0)


@pytest.mark.parametrize("k1, k2, m1, M2", [(2, 1, 0, 0), (1, 3, 1, 2), (3, 3, 2, 0)])
def test_prop47_closed_form(k1, k2, m1, M2):
    out = prop47_move(build_prop47([1, 1, -1, -1], k1=k1, k2=k2, m1=m1, M2=M2))
    assert out.delta == prop47_closed_form(2, k1, k2, m1, M2)


def test_prop47_degenerate_tangle_flagged():
    out = prop47_move(build_prop47([]))
    out.check()
    assert not out.hypothesis_holds and out.passed
    assert out.delta == prop47_closed_form(0, 1, 1, 0, 0) == 4


def test_prop47_needs_configuration():
    with pytest.raises(HypothesisError):
        prop47_move(build_type_n(P((3, 3))))
