"""Scripted thinning isotopies of type-n projections.

Each script rewrites a compiled template through certified moves and
returns a ``ThinningOutcome`` carrying the trace, the width reduction and
the lower bound guaranteed when the relevant hypothesis holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .families import (
    BraidBoxSpec,
    Bundle,
    TemplateDiagram,
    TemplateError,
    TypeNLayout,
    TypeNParams,
    box_id,
    build_type_n,
    middle_tangle_ids,
    inner_counts,
    split_composite,
)
from .morse import Kind, MorsePresentation, width_direct
from .tangles import (
    FREE,
    level_at,
    RewriteTrace,
    _Builder,
    connect_sum,
    excise_move,
    extract_strand,
    insert_move,
    move_block_past,
    open_knot,
    rewrite_move,
)

HYPOTHESES = ("lemma32", "lemma34", "composite", "pipeline", "prop43", "prop44", "prop45", "prop47")


class HypothesisError(ValueError):
    pass


@dataclass(frozen=True)
class ThinningOutcome:
    before: MorsePresentation
    after: MorsePresentation
    trace: RewriteTrace
    delta: int
    bound: int | None
    hypothesis: str
    hypothesis_holds: bool
    diagram_after: TemplateDiagram | None = None
    details: dict = field(default_factory=dict)
    steps: tuple = ()

    @property
    def passed(self) -> bool:
        if not self.hypothesis_holds or self.bound is None:
            return True
        return self.delta >= self.bound

    def check(self) -> None:
        """Re-derive both widths and replay the trace."""
        self.trace.verify()
        if self.trace.start != self.before or self.trace.end != self.after:
            raise AssertionError("trace endpoints differ from the outcome presentations")
        if width_direct(self.before) - width_direct(self.after) != self.delta:
            raise AssertionError("outcome delta disagrees with recomputed widths")
        if self.delta != -self.trace.total_delta:
            raise AssertionError("outcome delta disagrees with the trace total")


def _as_diagram(x) -> TemplateDiagram:
    if isinstance(x, TypeNParams):
        return build_type_n(x)
    if isinstance(x, TemplateDiagram):
        if x.layout is None:
            raise TemplateError("diagram has no type-n layout")
        return x
    raise TypeError(f"expected TypeNParams or TemplateDiagram, got {type(x).__name__}")


def _single(stack, what):
    if len(stack) != 1:
        raise TemplateError(f"{what} must be a single braid box, found stack {stack}")
    return stack[0]


def _strands_between(d: TemplateDiagram, group_a, group_b) -> int:
    a, b = set(group_a), set(group_b)
    return sum(bd.strands for bd in d.bundles if (bd.a in a and bd.b in b) or (bd.a in b and bd.b in a))


def _bundles_between(d, group_a, group_b):
    a, b = set(group_a), set(group_b)
    return [bd for bd in d.bundles if (bd.a in a and bd.b in b) or (bd.a in b and bd.b in a)]


def _rename(bd: Bundle, old: str, new: str) -> Bundle:
    return replace(bd, a=new if bd.a == old else bd.a, b=new if bd.b == old else bd.b)


def _counts(d: TemplateDiagram, ids) -> tuple[int, int]:
    return sum(d.box(i).m for i in ids), sum(d.box(i).M for i in ids)


def _tangle_bottom(d: TemplateDiagram, ids) -> int:
    """Strands entering the run of boxes ``ids`` from below."""
    inside = set(ids)
    low = min(d.position(i) for i in ids)
    total = 0
    for bd in d.bundles:
        for here, there in ((bd.a, bd.b), (bd.b, bd.a)):
            if here in inside and there not in inside and d.position(there) < low:
                total += bd.strands
    return total


# -- hypotheses --------------------------------------------------------------


def lemma32_hypothesis(s) -> bool:
    n = len(s)
    return n >= 3 and all(x >= 3 for x in s[: n - 1]) and s[0] <= s[2]


def lemma34_hypothesis(s) -> bool:
    n = len(s)
    return n > 2 and all(x >= 3 for x in s[: n - 1]) and s[0] >= s[2]


def lemma32_bound(n: int) -> int:
    return 18 + 36 * (n - 3)


def lemma34_bound(n: int) -> int:
    return max(72 * n - 204, 36)


def lemma32_equality_line(a, b, s1, s2, r) -> int:
    return 2 * (a + s1) + 2 * (b + s1) - 2 * s1 * s1 - 2 * s1 * s2 - 2 * s1 + 2 * r * s1


def six_term(m1, M1, m2, M2, mT1, MT1, mT2, MT2) -> int:
    """Width reduction of the two block moves, written out term by term."""
    return -4 * m1 * MT1 + 4 * M1 * mT1 - 4 * M2 * mT2 + 4 * m2 * MT2 - 4 * M2 * m1 + 4 * m2 * M1


def two_term(m1, m2, mT1, mT2, s1, s2, s3) -> int:
    return 2 * (m1 + m2) * (s1 - s3) + 2 * (s1 + s2) * (mT1 + mT2)


# -- n -> n-1 ----------------------------------------------------------------------


def reduce_n_minus_1(x) -> ThinningOutcome:
    """Merge the second level into the outer boxes and re-insert the middle tangle.

    The middle tangle T (levels 3..n) is excised at the level where
    ``1 + s_1 + s_1`` strands pass beside it, one strand is split off each of
    ``X(2,1)`` and ``X(2,2)``, the two boxes are rewritten so the first-level
    bundles no longer run past T, and T is put back where only the wrapping
    strand passes.  The result is a type-(n-1) template with ``s[1:]``.
    """
    d = _as_diagram(x)
    lay = d.layout
    n = lay.n
    if n < 2:
        raise HypothesisError("reduce_n_minus_1 needs n >= 2")
    x21 = _single(lay.left[1], "X(2,1)")
    x22 = _single(lay.right[1], "X(2,2)")
    L1, R1 = lay.left[0], lay.right[0]
    a_bundles = _bundles_between(d, L1, [x22])
    b_bundles = _bundles_between(d, R1, [x21])
    s_a = sum(bd.strands for bd in a_bundles)
    s_b = sum(bd.strands for bd in b_bundles)
    if not a_bundles or not b_bundles:
        raise TemplateError("first-level bundles not found")
    shift = (s_a + s_b) // 2

    b21, b22 = d.box(x21), d.box(x22)
    if b21.M < 1 or b22.m < 1:
        raise TemplateError("X(2,1) needs a maximum and X(2,2) a minimum")
    new21 = BraidBoxSpec(x21 + "'", b21.m + shift - 1, b21.M - 1)
    new22 = BraidBoxSpec(x22 + "'", b22.m - 1, b22.M + shift - 1)

    before = d.compile()
    build = _Builder(before)
    t_ids = middle_tangle_ids(lay)
    tangle = None
    carried = None
    if t_ids:
        bottom = _tangle_bottom(d, t_ids)
        tlo, thi = before.owner_span(set(t_ids))
        if level_at(before, tlo) == level_at(before, thi):
            host, tangle, _, mv = excise_move(before, t_ids, bottom)
            build.push(host, mv)
        else:
            # unequal boundary levels: T rides along inside the rewrite
            carried = (before.kinds[tlo:thi].tolist(), before.owners[tlo:thi])
    build.extend(extract_strand(build.current, x21, Kind.MAX)[1])
    build.extend(extract_strand(build.current, x22, Kind.MIN)[1])

    cur = build.current
    group = {FREE, x21, x22} | (set(t_ids) if carried else set())
    lo, hi = cur.owner_span(group)
    kinds = list(new22.kinds)
    owners = [new22.id] * new22.n_events
    if carried:
        kinds += carried[0]
        owners += list(carried[1])
    kinds += list(new21.kinds)
    owners += [new21.id] * new21.n_events
    repl = MorsePresentation(kinds, tuple(owners), level_at(cur, lo), level_at(cur, hi))
    new, mv = rewrite_move(cur, group, repl)
    build.push(new, mv)
    if tangle is not None:
        new, mv = insert_move(build.current, lo + new22.n_events, tangle)
        build.push(new, mv)
    trace = build.build()

    # the matching template
    boxes = []
    for b in d.boxes:
        boxes.append(new21 if b.id == x21 else new22 if b.id == x22 else b)
    drop = set(map(id, a_bundles + b_bundles))
    bundles = [bd for bd in d.bundles if id(bd) not in drop]
    bundles = [_rename(_rename(bd, x21, new21.id), x22, new22.id) for bd in bundles]
    for bd in a_bundles:
        outer = bd.a if bd.a in L1 else bd.b
        bundles.append(Bundle(outer, "bottom", new21.id, "top", bd.strands, bd.name + "'"))
    for bd in b_bundles:
        outer = bd.a if bd.a in R1 else bd.b
        bundles.append(Bundle(outer, "top", new22.id, "bottom", bd.strands, bd.name + "'"))
    layout = TypeNLayout(
        n - 1,
        lay.s[1:],
        ((new21.id,) + L1,) + lay.left[2:],
        (R1 + (new22.id,),) + lay.right[2:],
        None if lay.s2 is None else lay.s2[1:],
    )
    after_d = TemplateDiagram(tuple(boxes), tuple(bundles), d.family, layout)
    if after_d.compile() != trace.end:
        raise AssertionError("rewritten template does not compile to the trace end")

    s = lay.s
    delta = -trace.total_delta
    details = {"s_a": s_a, "s_b": s_b, "excised": tangle is not None}
    holds = lay.s2 is None and lemma32_hypothesis(s)
    if n >= 3:
        rk = inner_counts(d)
        details.update(a=rk.a, b=rk.b, r=rk.r, counts_hold=rk.holds)
        if lay.s2 is None:
            details["equality_line"] = lemma32_equality_line(rk.a, rk.b, s[0], s[1], rk.r)
    return ThinningOutcome(
        before,
        trace.end,
        trace,
        delta,
        lemma32_bound(n) if holds else None,
        "lemma32",
        holds,
        after_d,
        details,
    )


# -- n -> n-2 ----------------------------------------------------------------------


def reduce_n_minus_2(x, depth: int = 2) -> ThinningOutcome:
    """Lower X(k,1) past T1, then raise X(k,2) past T2 and X(k,1) (k = ``depth``).

    With ``depth == 2`` the result is a type-(n-2) template with ``s[2:]``.
    """
    d = _as_diagram(x)
    lay = d.layout
    n = lay.n
    k = depth
    if not 2 <= k <= n - 1:
        raise HypothesisError(f"depth {k} needs 2 <= depth <= n - 1 (n = {n})")
    xk1 = _single(lay.left[k - 1], f"X({k},1)")
    xk2 = _single(lay.right[k - 1], f"X({k},2)")
    xn1 = _single(lay.left[k], f"X({k + 1},1)")
    xn2 = _single(lay.right[k], f"X({k + 1},2)")

    before = d.compile()
    pos = d.position
    t1 = [b.id for b in d.boxes if pos(xn2) < pos(b.id) < pos(xk1)]
    p1, step1, tr1 = move_block_past(before, xk1, t1, "down", diagram=d)
    order1 = [o for o in _box_order(p1)]
    d1 = d.reordered(order1)
    t2 = [b for b in order1 if d1.position(xk2) < d1.position(b) < d1.position(xn1) and b != xk1]
    p2, step2, tr2 = move_block_past(p1, xk2, t2 + [xk1], "up", diagram=d1)
    trace = tr1.then(tr2)
    order2 = _box_order(p2)

    m1, M1 = _counts(d, [xk1])
    m2, M2 = _counts(d, [xk2])
    mT1, MT1 = _counts(d, t1)
    mT2, MT2 = _counts(d, t2)
    six = six_term(m1, M1, m2, M2, mT1, MT1, mT2, MT2)
    delta = -trace.total_delta
    if six != delta:
        raise AssertionError(f"six-term value {six} differs from certified delta {delta}")
    details = {
        "m1": m1, "M1": M1, "m2": m2, "M2": M2,
        "mT1": mT1, "MT1": MT1, "mT2": mT2, "MT2": MT2,
        "six_term": six, "T1": tuple(t1), "T2": tuple(t2), "depth": k,
    }

    layout = None
    s = lay.s
    if k == 2:
        L1, R1 = lay.left[0], lay.right[0]
        layout = TypeNLayout(
            n - 2,
            s[2:],
            ((xk2, xn1) + L1,) + lay.left[3:],
            (R1 + (xn2, xk1),) + lay.right[3:],
            None if lay.s2 is None else lay.s2[2:],
        )
        if lay.s2 is None:
            details["two_term"] = two_term(m1, m2, mT1, mT2, s[0], s[1], s[2])
    after_d = d.reordered(order2, layout=layout) if layout else replace(d.reordered(order2), layout=None)
    after_d.check()
    if after_d.compile() != trace.end:
        raise AssertionError("reordered template does not compile to the trace end")
    holds = k == 2 and lay.s2 is None and lemma34_hypothesis(s)
    return ThinningOutcome(
        before, trace.end, trace, delta, lemma34_bound(n) if holds else None, "lemma34", holds, after_d, details
    )


def _box_order(p: MorsePresentation) -> list[str]:
    out = []
    for o in p.owners:
        if not out or out[-1] != o:
            out.append(o)
    if len(out) != len(set(out)):
        raise AssertionError("box events are not contiguous")
    return out


# -- composite projections ------------------------------------------------------


def _first_unit_index(s) -> int | None:
    for i, x in enumerate(s[:-1], 1):
        if x == 1:
            return i
    return None


def thin_params(params: TypeNParams, offset: int = 0) -> ThinningOutcome:
    """Thin any type-n projection as far as the scripted isotopies allow."""
    if _first_unit_index(params.s) is not None:
        return composite_reduction(params, offset=offset)
    if params.n >= 3:
        return thin_pipeline(params, offset=offset)
    p = build_type_n(params, offset).compile()
    return ThinningOutcome(p, p, RewriteTrace.empty(p), 0, None, "none", False, build_type_n(params, offset))


def composite_reduction(params: TypeNParams, p: int | None = None, offset: int = 0) -> ThinningOutcome:
    """Thin both summands of a projection with a single-strand bundle and reassemble them."""
    n = params.n
    if p is None:
        p = _first_unit_index(params.s)
        if p is None:
            raise HypothesisError("no index p <= n-1 with s_p = 1")
    split = split_composite(params, p)
    before = build_type_n(params, offset).compile()
    out_p = thin_params(split.kp, offset=offset)
    out_q = thin_params(split.kq, offset=offset + p)

    build = _Builder(before)
    t_ids = [box_id(i + offset, j) for i in range(p + 1, n + 1) for j in (1, 2)]
    host, _, _, mv = excise_move(before, t_ids, 1)
    build.push(host, mv)
    build.extend(out_p.trace)
    if len(out_q.after) > 2:
        t = open_knot(out_q.after)
        new, mv = insert_move(build.current, 1, t)
        build.push(new, mv)
    trace = build.build()
    after = connect_sum(out_p.after, out_q.after)
    if after != trace.end:
        raise AssertionError("trace end differs from the connect sum of the thinned summands")
    delta = -trace.total_delta
    accounted = out_p.delta + out_q.delta + (split.l + 1) * split.r + 2
    if delta != accounted:
        raise AssertionError(f"composite reduction {delta} != summand accounting {accounted}")
    return ThinningOutcome(
        before,
        after,
        trace,
        delta,
        2 * n * n - 2,
        "composite",
        n >= 2,
        None,
        {"p": p, "l": split.l, "r": split.r, "reduction_p": out_p.delta, "reduction_q": out_q.delta},
        (out_p, out_q),
    )


# -- pipeline ------------------------------------------------------------------------


def thin_pipeline(x, offset: int = 0) -> ThinningOutcome:
    """Chain the n-1 and n-2 reductions down to n <= 2.

    At each stage the n-1 script runs when s_1 < s_3 and the n-2 script
    otherwise.  Projections with a unit bundle go to ``composite_reduction``.
    """
    if isinstance(x, TypeNParams):
        if _first_unit_index(x.s) is not None:
            return composite_reduction(x, offset=offset)
        d = build_type_n(x, offset)
    else:
        d = _as_diagram(x)
        if _first_unit_index(d.layout.s) is not None:
            raise HypothesisError("unit bundles need composite_reduction on the original parameters")
    n0 = d.layout.n
    if n0 < 3:
        raise HypothesisError("the pipeline needs n > 2")
    s0 = d.layout.s
    before = d.compile()
    trace = RewriteTrace.empty(before)
    steps = []
    while d.layout.n >= 3:
        s = d.layout.s
        step = reduce_n_minus_1(d) if s[0] < s[2] else reduce_n_minus_2(d)
        steps.append(step)
        trace = trace.then(step.trace)
        d = step.diagram_after
    delta = -trace.total_delta
    holds = all(v >= 3 for v in s0[: n0 - 1])
    return ThinningOutcome(
        before,
        trace.end,
        trace,
        delta,
        2 * n0 * n0 if holds else None,
        "pipeline",
        holds,
        d,
        {"steps": tuple(st.hypothesis for st in steps)},
        tuple(steps),
    )


# -- generalized diagrams ----------------------------------------------------------


def prop43_hypothesis(s1, s2) -> bool:
    return len(s1) >= 3 and s1[0] + s2[0] <= s1[2] + s2[2]


def prop44_hypothesis(s1, s2) -> bool:
    # bundle columns here are A_i = s1, B_i = s2; the cross-indexed form of
    # the statement compares the same bundles under side-based labels
    return len(s1) >= 3 and s1[0] >= s1[2] and s2[0] >= s2[2]


def prop45_index(s1, s2):
    """(i, j) of the unique strictly smallest bundle size with i >= 3, else None."""
    vals = [((i + 1, 1), v) for i, v in enumerate(s1)] + [((i + 1, 2), v) for i, v in enumerate(s2)]
    low = min(v for _, v in vals)
    at = [ij for ij, v in vals if v == low]
    if len(at) == 1 and at[0][0] >= 3:
        return at[0]
    return None


def gen_reduce(d: TemplateDiagram, mode: str) -> ThinningOutcome:
    """Generalized scripts for diagrams whose two bundle columns differ."""
    lay = d.layout
    if lay is None or lay.n < 3:
        raise HypothesisError("needs a generalized type-n diagram with n >= 3")
    s1 = lay.s
    s2 = lay.s2 if lay.s2 is not None else lay.s
    if mode == "prop43":
        holds = prop43_hypothesis(s1, s2)
        out = reduce_n_minus_1(d)
    elif mode == "prop44":
        holds = prop44_hypothesis(s1, s2)
        out = reduce_n_minus_2(d)
    elif mode == "prop45":
        ij = prop45_index(s1, s2)
        holds = ij is not None
        depth = (ij[0] - 1) if ij else 2
        depth = min(max(depth, 2), lay.n - 1)
        out = reduce_n_minus_2(d, depth=depth)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if not holds:
        raise HypothesisError(f"{mode} hypothesis does not hold for s1={s1}, s2={s2}")
    return replace(out, hypothesis=mode, hypothesis_holds=True, bound=1)


def prop47_move(d: TemplateDiagram) -> ThinningOutcome:
    """Lower X(2,1) past T, then raise X(2,2) past T and X(2,1)."""
    ids = d.ids()
    expected = ["X1,2", "X2,2", "T", "X2,1", "X1,1"]
    if ids != expected:
        raise HypothesisError(f"expected boxes bottom to top {expected}, got {ids}")
    t = d.box("T")
    if d.degree("T", "top") != d.degree("T", "bottom"):
        raise HypothesisError("T must have equal strand counts above and below")
    before = d.compile()
    if t.n_events:
        p1, _, tr1 = move_block_past(before, "X2,1", "T", "down", diagram=d)
        d1 = d.reordered(_box_order(p1))
        p2, _, tr2 = move_block_past(p1, "X2,2", ["T", "X2,1"], "up", diagram=d1)
        trace = tr1.then(tr2)
        order = _box_order(p2)
    else:
        # empty T: only the second move remains
        p2, _, trace = move_block_past(before, "X2,2", "X2,1", "up", diagram=d)
        order = _box_order(p2)
        order.insert(order.index("X2,1") + 1, "T")
    after_d = replace(d.reordered(order), family="template", layout=None)
    after_d.check()
    r = t.M
    x21, x22 = d.box("X2,1"), d.box("X2,2")
    k1, k2 = x21.M - x21.m, x22.m - x22.M
    closed = prop47_closed_form(r, k1, k2, x21.m, x22.M)
    delta = -trace.total_delta
    if closed != delta:
        raise AssertionError(f"closed form {closed} differs from certified delta {delta}")
    return ThinningOutcome(
        before, p2, trace, delta, 8 * r + 4, "prop47", k1 >= 1 and k2 >= 1 and r >= 1, after_d,
        {"r": r, "k1": k1, "k2": k2, "closed_form": closed},
    )


def prop47_closed_form(r, k1, k2, m1, M2) -> int:
    return 4 * r * (k1 + k2) + 4 * (M2 * k1 + k2 * m1 + k1 * k2)
