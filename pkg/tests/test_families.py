import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thinwidth.families import (
    BraidBoxSpec,
    Bundle,
    TemplateDiagram,
    TemplateError,
    TypeNParams,
    bridge_profile_width,
    build_gen_g,
    build_gen_l,
    build_prop47,
    build_type_n,
    check_reversal,
    format_template_params,
    gen_l_from_permutation,
    parse_template,
    parse_type_n_params,
    inner_counts,
    split_composite,
    thick_over,
    type_n_gap_closed_form,
)
from thinwidth.morse import profile, width_direct

odd = st.sampled_from([1, 3, 5, 7, 9])


def type_n(s, slack=0):
    return build_type_n(TypeNParams.uniform(s, slack))


# -- anchors -----------------------------------------------------------------------


def test_type3_gaps_and_width():
    d = type_n((3, 3, 3))
    assert d.gap_widths() == [4, 10, 16, 10, 4]
    assert width_direct(d.compile()) == 128


def test_type3_per_box_interior_sums():
    p = type_n((3, 3, 3)).compile()
    counts = profile(p)
    sums, gaps = {}, 0
    for i, c in enumerate(counts):
        if p.owners[i] == p.owners[i + 1]:
            sums[p.owners[i]] = sums.get(p.owners[i], 0) + c
        else:
            gaps += c
    order = ["X1,2", "X2,2", "X3,2", "X3,1", "X2,1", "X1,1"]
    assert [sums[b] for b in order] == [2, 14, 26, 26, 14, 2]
    assert gaps == 44


def test_type1_is_the_unknot_with_width_two():
    p = build_type_n(TypeNParams(1, (1,), (0,), (0,))).compile()
    assert p == type_n((1,)).compile()
    assert list(p.kinds) == [1, -1] and width_direct(p) == 2


def test_single_box_closed_by_self_bundle():
    d = TemplateDiagram([BraidBoxSpec("X", 1, 1)], [Bundle("X", "bottom", "X", "top", 2, "loop")])
    p = d.compile()
    assert list(p.kinds) == [1, -1]


def test_thick_sphere_over_x21():
    for m1 in range(3):
        params = TypeNParams(3, (3, 3, 3), (0, m1, 0), (0, 0, 0))
        p = build_type_n(params).compile()
        a = 3 + 3 + 2 * m1
        assert thick_over(p, "X2,1") == a + 3 + 1


def test_inner_counts_minimal():
    rk = inner_counts(type_n((3, 3, 3)))
    assert (rk.a, rk.b, rk.r, rk.r_bound) == (6, 6, 6, 6)
    assert rk.holds


def test_bridge_profile_width():
    for n in range(1, 8):
        prof = list(range(2, 2 * n + 1, 2)) + list(range(2 * n - 2, 0, -2))
        assert bridge_profile_width(n) == sum(prof) == 2 * n * n


# -- properties over the grid --------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(st.lists(odd, min_size=1, max_size=8), st.integers(0, 2))
def test_gap_closed_form_and_symmetry(s, slack):
    d = type_n(s, slack)
    g = d.gap_widths()
    assert g == type_n_gap_closed_form(s)
    assert g == g[::-1]
    assert g[0] == s[0] + 1
    if len(s) >= 2:
        assert g[1] == 2 * s[0] + s[1] + 1
    d.compile()  # gap widths are re-checked against the event levels here


@settings(max_examples=200, deadline=None)
@given(st.lists(odd, min_size=1, max_size=7), st.lists(st.integers(0, 2), min_size=7, max_size=7),
       st.lists(st.integers(0, 2), min_size=7, max_size=7))
def test_entering_strand_law(s, lm, rm):
    n = len(s)
    params = TypeNParams(n, s, lm[:n], rm[:n])
    d = build_type_n(params)
    for i, b in enumerate(params.entering, 1):
        left, right = d.box(f"X{i},1"), d.box(f"X{i},2")
        assert left.M - left.m == b // 2
        assert right.m - right.M == b // 2
        assert d.degree(f"X{i},1", "bottom") == b
        assert d.degree(f"X{i},2", "top") == b


@settings(max_examples=150, deadline=None)
@given(st.lists(odd, min_size=3, max_size=7), st.integers(0, 2))
def test_inner_counts_holds(s, slack):
    rk = inner_counts(type_n(s, slack))
    assert rk.a >= rk.s12 and rk.b >= rk.s12
    n = len(s)
    assert rk.r_bound == s[1] + 2 * sum(s[2 : n - 1]) + s[n - 1]
    assert rk.r >= rk.r_bound


# -- generalized families ----------------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(st.lists(odd, min_size=1, max_size=6), st.integers(0, 2))
def test_gen_g_with_equal_columns_is_type_n(s, slack):
    n = len(s)
    g = build_gen_g(s, s, (slack,) * n, (slack,) * n)
    t = type_n(s, slack)
    assert g.compile() == t.compile()
    assert g.gap_widths() == t.gap_widths()


def test_gen_g_unequal_columns():
    d = build_gen_g((3, 3, 3), (5, 3, 3))
    p = d.compile()
    assert d.check() is d
    # the gap above X(1,2) carries W and B_1: 1 + 5
    assert d.gap_widths()[0] == 6
    assert width_direct(p) == sum(profile(p))


def test_gen_g_rejects_even_sizes():
    with pytest.raises(TemplateError):
        build_gen_g((3, 2, 3), (3, 3, 3))


def test_gen_l_identity_matches_type_n():
    params = TypeNParams.uniform((3, 5, 3), 1)
    assert gen_l_from_permutation([1, 2, 3], params).compile() == build_type_n(params).compile()


def test_gen_l_permutation_respects_reversal():
    params = TypeNParams.uniform((3, 3, 3), 0)
    d = gen_l_from_permutation([2, 1, 3], params)
    top_down = d.ids()[::-1]
    assert top_down == ["X2,1", "X1,1", "X3,1", "X3,2", "X1,2", "X2,2"]
    d.compile()


def test_reversal_violation_detected():
    assert check_reversal(["X1,1", "X2,1", "X1,2", "X2,2"])
    ref = type_n((3, 3))
    with pytest.raises(TemplateError):
        build_gen_l(["X1,1", "X2,1", "X1,2", "X2,2"], ref.boxes, ref.bundles)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_prop47_configuration(r):
    d = build_prop47([1] * r + [-1] * r)
    assert d.ids()[::-1] == ["X1,1", "X2,1", "T", "X2,2", "X1,2"]
    assert d.degree("T", "top") == d.degree("T", "bottom") == 1
    d.compile()


def test_prop47_rejects_unbalanced_tangle():
    with pytest.raises(TemplateError):
        build_prop47([1, 1, -1])


# -- composite splitting -------------------------------------------------------------


def test_split_n2():
    sp = split_composite(TypeNParams.uniform((1, 3)), 1)
    assert (sp.l, sp.r) == (1, 4)
    assert sp.r >= 2


def test_split_n3_l_is_seven():
    sp = split_composite(TypeNParams.uniform((3, 1, 3)), 2)
    assert sp.l == 1 + 2 * 3


def test_split_requires_unit_bundle():
    with pytest.raises(TemplateError):
        split_composite(TypeNParams.uniform((3, 3, 3)), 1)


def test_split_bounds_on_grid():
    for n in range(2, 6):
        for s in itertools.product((1, 3, 5), repeat=n):
            for p in range(1, n):
                if s[p - 1] != 1:
                    continue
                sp = split_composite(TypeNParams.uniform(s), p)
                q = n - p
                assert sp.l == 1 + 2 * sum(s[: p - 1])
                assert sp.l >= 2 * p - 1 and sp.r >= 2 * q
                kn = type_n(s).compile()
                kp = type_n(s[:p]).compile()
                assert width_direct(kn) >= width_direct(kp) + width_direct(sp.tangle) + sp.l * (sp.r - 1) + sp.l + 1


# -- invalid parameters and template files ------------------------------------------


@pytest.mark.parametrize(
    "n, s, lm, rm",
    [(2, (3, 2), (0, 0), (0, 0)), (2, (3, 3), (-1, 0), (0, 0)), (3, (3, 3), (0, 0, 0), (0, 0, 0))],
)
def test_bad_params(n, s, lm, rm):
    with pytest.raises(TemplateError):
        TypeNParams(n, s, lm, rm)


def test_template_round_trip():
    params = TypeNParams(3, (3, 5, 3), (1, 0, 2), (0, 1, 0))
    text = format_template_params(params)
    assert parse_type_n_params(text) == params
    assert parse_template(text).compile() == build_type_n(params).compile()


def test_template_errors():
    with pytest.raises(TemplateError):
        parse_template("type type-n\n")
    with pytest.raises(TemplateError):
        parse_template("type nonsense\ns 3\n")
    with pytest.raises(TemplateError):
        parse_template("s 3 x\n")
