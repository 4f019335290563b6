"""Braid-box templates and the type-n knot family.

A template is a height-ordered list of boxes joined by strand bundles.
Boxes are stored bottom to top, the order in which their events compile.
Box ids follow ``X<i>,<j>``: ``j = 1`` for the upper (left) column, whose
strands all leave through the bottom, ``j = 2`` for the lower (right)
column, whose strands all leave through the top.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .morse import MorsePresentation, require_valid, width_direct
from .tangles import InsertionContext, excise_tangle, insert_tangle, lemma22_width


class TemplateError(ValueError):
    pass


def box_id(i: int, j: int) -> str:
    return f"X{i},{j}"


@dataclass(frozen=True)
class BraidBoxSpec:
    """A block of events.  Without ``pattern`` it is a braid box: ``m`` minima then ``M`` maxima."""

    id: str
    m: int
    M: int
    pattern: tuple | None = None

    def __post_init__(self):
        if self.m < 0 or self.M < 0:
            raise TemplateError(f"box {self.id}: negative critical count")
        if self.pattern is not None:
            pat = tuple(int(k) for k in self.pattern)
            if sum(k == 1 for k in pat) != self.m or sum(k == -1 for k in pat) != self.M:
                raise TemplateError(f"box {self.id}: pattern does not match (m, M)")
            object.__setattr__(self, "pattern", pat)

    @property
    def kinds(self) -> tuple:
        if self.pattern is not None:
            return self.pattern
        return (1,) * self.m + (-1,) * self.M

    @property
    def is_bridge(self) -> bool:
        k = self.kinds
        return all(a >= b for a, b in zip(k, k[1:]))

    @property
    def n_events(self) -> int:
        return self.m + self.M


@dataclass(frozen=True)
class Bundle:
    """``strands`` parallel strands from one side of box ``a`` to one side of box ``b``."""

    a: str
    a_side: str
    b: str
    b_side: str
    strands: int
    name: str = ""

    def __post_init__(self):
        if self.strands < 1:
            raise TemplateError(f"bundle {self.name or (self.a, self.b)} needs at least one strand")
        for side in (self.a_side, self.b_side):
            if side not in ("top", "bottom"):
                raise TemplateError(f"bad side {side!r}")

    @property
    def is_self(self) -> bool:
        return self.a == self.b


@dataclass(frozen=True)
class TypeNLayout:
    """Column structure of a type-n style template.

    ``left[i]`` / ``right[i]`` is the stack of box ids (bottom to top) that
    plays the role of ``X(i+1, 1)`` / ``X(i+1, 2)``.  Outer stacks grow as
    the thinning isotopies merge boxes into them.
    """

    n: int
    s: tuple
    left: tuple
    right: tuple
    s2: tuple | None = None  # second bundle column for generalized diagrams


@dataclass(frozen=True)
class TemplateDiagram:
    boxes: tuple  # bottom -> top
    bundles: tuple
    family: str = "template"
    layout: TypeNLayout | None = None
    _pos: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "bundles", tuple(self.bundles))
        pos = {}
        for i, b in enumerate(self.boxes):
            if b.id in pos:
                raise TemplateError(f"duplicate box id {b.id}")
            pos[b.id] = i
        for bd in self.bundles:
            for end in (bd.a, bd.b):
                if end not in pos:
                    raise TemplateError(f"bundle {bd.name} references unknown box {end}")
        object.__setattr__(self, "_pos", pos)

    # -- queries ---------------------------------------------------------------

    def box(self, bid: str) -> BraidBoxSpec:
        return self.boxes[self._pos[bid]]

    def position(self, bid: str) -> int:
        return self._pos[bid]

    @cached_property
    def _degrees(self) -> dict:
        deg = {}
        for bd in self.bundles:
            if bd.is_self:
                continue
            for end, side in ((bd.a, bd.a_side), (bd.b, bd.b_side)):
                deg[end, side] = deg.get((end, side), 0) + bd.strands
        return deg

    def degree(self, bid: str, side: str) -> int:
        return self._degrees.get((bid, side), 0)

    def gap_widths(self) -> list[int]:
        """Strands crossing the gap above box k, k = 0 .. len(boxes) - 2."""
        g = [0] * max(len(self.boxes) - 1, 0)
        for bd in self.bundles:
            lo, hi = sorted((self._pos[bd.a], self._pos[bd.b]))
            for k in range(lo, hi):
                g[k] += bd.strands
        return g

    def connected(self, a, b) -> bool:
        a = {a} if isinstance(a, str) else set(a)
        b = {b} if isinstance(b, str) else set(b)
        return any((bd.a in a and bd.b in b) or (bd.a in b and bd.b in a) for bd in self.bundles)

    def violations(self) -> list[str]:
        out = []
        for bd in self.bundles:
            if bd.is_self:
                continue
            pa, pb = self._pos[bd.a], self._pos[bd.b]
            # a strand leaving a box's bottom must run down to the other end
            for p_here, side, p_other, who in ((pa, bd.a_side, pb, bd.a), (pb, bd.b_side, pa, bd.b)):
                if side == "bottom" and p_other > p_here:
                    out.append(f"bundle {bd.name or (bd.a, bd.b)} leaves the bottom of {who} but ends above it")
                if side == "top" and p_other < p_here:
                    out.append(f"bundle {bd.name or (bd.a, bd.b)} leaves the top of {who} but ends below it")
        for b in self.boxes:
            lo, hi = self.degree(b.id, "bottom"), self.degree(b.id, "top")
            if lo - hi != 2 * (b.M - b.m):
                out.append(
                    f"box {b.id}: bottom degree {lo} - top degree {hi} != 2(M - m) = {2 * (b.M - b.m)}"
                )
        return out

    def check(self) -> "TemplateDiagram":
        bad = self.violations()
        if bad:
            raise TemplateError("; ".join(bad))
        return self

    def compile(self) -> MorsePresentation:
        """Concatenate box events bottom to top; verify every gap count."""
        self.check()
        kinds, owners = [], []
        for b in self.boxes:
            kinds.extend(b.kinds)
            owners.extend([b.id] * b.n_events)
        p = MorsePresentation(np.array(kinds, dtype=np.int8), tuple(owners), 0, 0)
        require_valid(p)
        gaps = self.gap_widths()
        count = 0
        for k, b in enumerate(self.boxes[:-1]):
            count += 2 * sum(b.kinds)
            if count != gaps[k]:
                raise TemplateError(f"level above {b.id} has {count} strands, bundles give {gaps[k]}")
        return p

    def reordered(self, ids_bottom_to_top: Sequence[str], layout: TypeNLayout | None = None, family=None):
        if sorted(ids_bottom_to_top) != sorted(self._pos):
            raise TemplateError("reorder must be a permutation of the box ids")
        return TemplateDiagram(
            tuple(self.box(i) for i in ids_bottom_to_top),
            self.bundles,
            family or self.family,
            layout if layout is not None else self.layout,
        )

    def ids(self) -> list[str]:
        return [b.id for b in self.boxes]

    def precedence_pairs(self) -> list[tuple[str, str]]:
        """(lower, upper) box pairs forced by bundle attachments."""
        pairs = set()
        for bd in self.bundles:
            if bd.is_self:
                continue
            a_pos, b_pos = self._pos[bd.a], self._pos[bd.b]
            lower, upper = (bd.a, bd.b) if a_pos < b_pos else (bd.b, bd.a)
            pairs.add((lower, upper))
        return sorted(pairs)


# -- type-n ---------------------------------------------------------------------


@dataclass(frozen=True)
class TypeNParams:
    """Parameters of a type-n projection.

    ``s`` holds the odd bundle sizes, ``left_minima[i]`` the minima of
    ``X(i+1, 1)`` and ``right_maxima[i]`` the maxima of ``X(i+1, 2)``; the
    remaining counts are forced by the strands entering each box.
    """

    n: int
    s: tuple
    left_minima: tuple = None
    right_maxima: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(int(x) for x in self.s))
        lm = (0,) * self.n if self.left_minima is None else tuple(int(x) for x in self.left_minima)
        rm = (0,) * self.n if self.right_maxima is None else tuple(int(x) for x in self.right_maxima)
        object.__setattr__(self, "left_minima", lm)
        object.__setattr__(self, "right_maxima", rm)
        bad = self.violations()
        if bad:
            raise TemplateError("; ".join(bad))

    @classmethod
    def uniform(cls, s: Sequence[int], slack: int = 0) -> "TypeNParams":
        n = len(s)
        return cls(n, tuple(s), (slack,) * n, (slack,) * n)

    def violations(self) -> list[str]:
        out = []
        if self.n < 1:
            out.append("n must be at least 1")
        if len(self.s) != self.n:
            out.append(f"need {self.n} bundle sizes, got {len(self.s)}")
        if len(self.left_minima) != self.n or len(self.right_maxima) != self.n:
            out.append("left_minima and right_maxima need one entry per level")
        if any(x < 1 or x % 2 == 0 for x in self.s):
            out.append("bundle sizes must be odd positive integers")
        if any(x < 0 for x in self.left_minima + self.right_maxima):
            out.append("critical counts must be non-negative")
        return out

    @property
    def entering(self) -> tuple:
        """Strands entering box i from its open side (b_i)."""
        s, n = self.s, self.n
        b = [s[0] + 1]
        for i in range(1, n):
            b.append(s[i - 1] + s[i])
        return tuple(b)

    def left_counts(self, i: int) -> tuple[int, int]:
        m = self.left_minima[i - 1]
        return m, m + self.entering[i - 1] // 2

    def right_counts(self, i: int) -> tuple[int, int]:
        M = self.right_maxima[i - 1]
        return M + self.entering[i - 1] // 2, M


def _type_n_bundles(n, a_col, b_col, offset=0):
    bundles = []
    X = lambda i, j: box_id(i + offset, j)  # noqa: E731
    for i in range(1, n):
        bundles.append(Bundle(X(i, 1), "bottom", X(i + 1, 2), "top", a_col[i - 1], f"A{i + offset}"))
        bundles.append(Bundle(X(i, 2), "top", X(i + 1, 1), "bottom", b_col[i - 1], f"B{i + offset}"))
    bundles.append(Bundle(X(n, 1), "bottom", X(n, 2), "top", a_col[n - 1], f"N{n + offset}"))
    bundles.append(Bundle(X(1, 1), "bottom", X(1, 2), "top", 1, f"W{1 + offset}"))
    return bundles


def _column_layout(n, s, offset=0, s2=None):
    left = tuple((box_id(i + offset, 1),) for i in range(1, n + 1))
    right = tuple((box_id(i + offset, 2),) for i in range(1, n + 1))
    return TypeNLayout(n, tuple(s), left, right, None if s2 is None else tuple(s2))


def build_type_n(params: TypeNParams, offset: int = 0) -> TemplateDiagram:
    """Type-n template: X(1,2) .. X(n,2) below X(n,1) .. X(1,1)."""
    n = params.n
    boxes = []
    for i in range(1, n + 1):
        m, M = params.right_counts(i)
        boxes.append(BraidBoxSpec(box_id(i + offset, 2), m, M))
    for i in range(n, 0, -1):
        m, M = params.left_counts(i)
        boxes.append(BraidBoxSpec(box_id(i + offset, 1), m, M))
    d = TemplateDiagram(tuple(boxes), tuple(_type_n_bundles(n, params.s, params.s, offset)), "type-n",
                        _column_layout(n, params.s, offset))
    return d.check()


def compile_type_n(params: TypeNParams) -> MorsePresentation:
    return build_type_n(params).compile()


def type_n_gap_closed_form(s: Sequence[int]) -> list[int]:
    """Gap widths g_1 .. g_{2n-1} (bottom to top) of a type-n template."""
    n = len(s)
    half = []
    for k in range(1, n + 1):
        half.append(s[k - 1] + 2 * sum(s[: k - 1]) + 1)
    return half + half[-2::-1]


# -- generalized families ----------------------------------------------------------


def build_gen_g(s1: Sequence[int], s2: Sequence[int], left_minima=None, right_maxima=None) -> TemplateDiagram:
    """Generalized type-n: bundles ``A_i`` carry ``s1[i]``, ``B_i`` carry ``s2[i]``.

    The bundle joining ``X(n,1)`` and ``X(n,2)`` carries ``s1[n-1]``; the
    last entry of ``s2`` only enters hypotheses about the diagram.
    """
    n = len(s1)
    if len(s2) != n:
        raise TemplateError("s1 and s2 must have the same length")
    if any(x < 1 or x % 2 == 0 for x in list(s1) + list(s2)):
        raise TemplateError("bundle sizes must be odd positive integers")
    lm = tuple(left_minima) if left_minima is not None else (0,) * n
    rm = tuple(right_maxima) if right_maxima is not None else (0,) * n
    bundles = _type_n_bundles(n, s1, s2)
    # degrees are forced by the bundles; counts follow from the slack
    proto = TemplateDiagram(
        tuple(BraidBoxSpec(box_id(i, j), 0, 0) for j, rng in ((2, range(1, n + 1)), (1, range(n, 0, -1))) for i in rng),
        tuple(bundles),
    )
    boxes = []
    for b in proto.boxes:
        i = int(b.id[1:].split(",")[0])
        if b.id.endswith(",1"):
            deg = proto.degree(b.id, "bottom")
            if deg % 2:
                raise TemplateError(f"box {b.id} has odd degree {deg}")
            boxes.append(BraidBoxSpec(b.id, lm[i - 1], lm[i - 1] + deg // 2))
        else:
            deg = proto.degree(b.id, "top")
            if deg % 2:
                raise TemplateError(f"box {b.id} has odd degree {deg}")
            boxes.append(BraidBoxSpec(b.id, rm[i - 1] + deg // 2, rm[i - 1]))
    family = "type-n" if tuple(s1) == tuple(s2) else "gen-g"
    layout = _column_layout(n, s1, s2=s2)
    if family == "type-n":
        layout = _column_layout(n, s1)
    return TemplateDiagram(tuple(boxes), tuple(bundles), family, layout).check()


def check_reversal(order_top_to_bottom: Sequence[str]) -> list[str]:
    """Violations of the column-reversal rule and of 'left column above right column'."""
    pos = {bid: k for k, bid in enumerate(order_top_to_bottom)}  # 0 = top
    out = []
    lefts = [b for b in pos if b.endswith(",1")]
    rights = [b for b in pos if b.endswith(",2")]
    for a in lefts:
        for b in rights:
            if pos[a] > pos[b]:
                out.append(f"{a} is not above {b}")
    idx = lambda bid: bid[1:].split(",")[0]  # noqa: E731
    for a in lefts:
        for b in lefts:
            if a >= b:
                continue
            ra, rb = f"X{idx(a)},2", f"X{idx(b)},2"
            if ra not in pos or rb not in pos:
                continue
            # a lower than b on the left  <=>  a higher than b on the right
            if (pos[a] > pos[b]) != (pos[ra] < pos[rb]):
                out.append(f"order of {a}/{b} is not reversed by {ra}/{rb}")
    return out


def build_gen_l(
    order_top_to_bottom: Sequence[str],
    boxes: Iterable[BraidBoxSpec],
    bundles: Iterable[Bundle],
) -> TemplateDiagram:
    """Template with an explicit height order obeying the column-reversal rule."""
    order = list(order_top_to_bottom)
    bad = check_reversal(order)
    if bad:
        raise TemplateError("; ".join(bad))
    by_id = {b.id: b for b in boxes}
    if set(by_id) != set(order):
        raise TemplateError("order must list every box exactly once")
    return TemplateDiagram(tuple(by_id[b] for b in reversed(order)), tuple(bundles), "gen-l").check()


def gen_l_from_permutation(perm: Sequence[int], params: TypeNParams) -> TemplateDiagram:
    """Left column top to bottom follows ``perm``; the right column reverses it."""
    n = params.n
    if sorted(perm) != list(range(1, n + 1)):
        raise TemplateError("perm must be a permutation of 1..n")
    ref = build_type_n(params)
    order = [box_id(i, 1) for i in perm] + [box_id(i, 2) for i in reversed(perm)]
    d = build_gen_l(order, ref.boxes, ref.bundles)
    if list(perm) == list(range(1, n + 1)):
        d = replace(d, family="type-n", layout=ref.layout)
    return d


def build_prop47(
    tangle_pattern: Sequence[int],
    t: int = 1,
    k1: int = 1,
    k2: int = 1,
    m1: int = 0,
    M2: int = 0,
    outer_slack: int = 0,
) -> TemplateDiagram:
    """A rearrangeable configuration with a tangle T between X(2,1) and X(2,2).

    Top to bottom: X(1,1), X(2,1), T, X(2,2), X(1,2).  ``X(2,1)`` takes
    ``2 k1`` strands from below that run to ``X(1,2)``, ``X(2,2)`` sends
    ``2 k2`` strands up to ``X(1,1)``, and T has ``t`` strands on each side,
    joined to the outer boxes; a single wrapping strand joins X(1,1) and
    X(1,2).  ``t`` must be odd so the outer boxes have even degree.
    """
    pat = tuple(int(x) for x in tangle_pattern)
    r_min, r_max = sum(x == 1 for x in pat), sum(x == -1 for x in pat)
    if r_min != r_max:
        raise TemplateError("T must have as many strands leaving above as entering below")
    if t < 1 or t % 2 == 0:
        raise TemplateError("t must be odd")
    lvl, low = t, t
    for x in pat:
        lvl += 2 * x
        low = min(low, lvl)
    if low < 0:
        raise TemplateError("tangle pattern needs more than t strands from below")
    boxes = [
        BraidBoxSpec("X1,1", outer_slack, outer_slack + (1 + t + 2 * k2) // 2),
        BraidBoxSpec("X2,1", m1, m1 + k1),
        BraidBoxSpec("T", r_min, r_max, pat),
        BraidBoxSpec("X2,2", M2 + k2, M2),
        BraidBoxSpec("X1,2", outer_slack + (1 + t + 2 * k1) // 2, outer_slack),
    ]
    bundles = [
        Bundle("X1,1", "bottom", "X1,2", "top", 1, "W"),
        Bundle("T", "top", "X1,1", "bottom", t, "Tup"),
        Bundle("T", "bottom", "X1,2", "top", t, "Tdown"),
        Bundle("X2,1", "bottom", "X1,2", "top", 2 * k1, "C1"),
        Bundle("X2,2", "top", "X1,1", "bottom", 2 * k2, "C2"),
    ]
    return replace(build_gen_l(["X1,1", "X2,1", "T", "X2,2", "X1,2"], boxes, bundles), family="prop47")


# -- anchors and decompositions -------------------------------------------------


@dataclass(frozen=True)
class InnerCounts:
    a: int
    b: int
    r: int
    r_bound: int
    s12: int  # s_1 + s_2

    @property
    def holds(self) -> bool:
        return self.a >= self.s12 and self.b >= self.s12 and self.r >= self.r_bound


def middle_tangle_ids(layout: TypeNLayout, first: int = 3) -> list[str]:
    ids = []
    for i in range(first, layout.n + 1):
        ids.extend(layout.left[i - 1])
        ids.extend(layout.right[i - 1])
    return ids


def inner_counts(d: TemplateDiagram) -> InnerCounts:
    """a, b and the middle-tangle event count r with their lower bounds (n >= 3)."""
    lay = d.layout
    if lay is None or lay.n < 3:
        raise TemplateError("needs a type-n layout with n >= 3")
    s = lay.s
    (x21,), (x22,) = lay.left[1], lay.right[1]
    b21, b22 = d.box(x21), d.box(x22)
    a = d.degree(x21, "bottom") + 2 * b21.m
    b = d.degree(x22, "top") + 2 * b22.M
    r = sum(d.box(i).n_events for i in middle_tangle_ids(lay))
    n = lay.n
    r_bound = s[1] + s[n - 1] + 2 * sum(s[2 : n - 1])
    return InnerCounts(a, b, r, r_bound, s[0] + s[1])


def thick_over(p: MorsePresentation, owner: str) -> int:
    """Largest level count met by the events of ``owner`` (including its boundary levels)."""
    lo = p.owners.index(owner)
    hi = len(p.owners) - p.owners[::-1].index(owner)
    lv = p.punctures_bottom + 2 * np.concatenate([[0], np.cumsum(p.kinds.astype(np.int64))])
    return int(lv[lo : hi + 1].max())


@dataclass(frozen=True)
class CompositeSplit:
    kp: TypeNParams
    kq: TypeNParams
    tangle: MorsePresentation
    l: int
    r: int


def split_composite(params: TypeNParams, p: int) -> CompositeSplit:
    """Split K^n along a bundle with a single strand into K^p and the tangle T^q."""
    n, s = params.n, params.s
    if not 1 <= p <= n - 1:
        raise TemplateError(f"split index must lie in 1..{n - 1}")
    if s[p - 1] != 1:
        raise TemplateError(f"s_{p} = {s[p - 1]} is not 1")
    kp = TypeNParams(p, s[:p], params.left_minima[:p], params.right_maxima[:p])
    kq = TypeNParams(n - p, s[p:], params.left_minima[p:], params.right_maxima[p:])
    whole = compile_type_n(params)
    owners = [box_id(i, j) for i in range(p + 1, n + 1) for j in (1, 2)]
    host, tangle, ctx = excise_tangle(whole, owners, punctures_bottom=1)
    l = 1 + 2 * sum(s[: p - 1])
    r = len(tangle)
    if ctx.l != l or ctx.wP != l + 1:
        raise TemplateError(f"split level has l={ctx.l}, wP={ctx.wP}; expected l={l}")
    if host != compile_type_n(kp):
        raise TemplateError("K^n / T^q is not the expected K^p")
    kq_pres = build_type_n(kq, offset=p).compile()
    if width_direct(tangle) != width_direct(kq_pres) + (r - 1):
        raise TemplateError("w(T^q) != w(K^q) + (r - 1)")
    if width_direct(whole) != lemma22_width(width_direct(host), width_direct(tangle), l, r, l + 1):
        raise TemplateError("splice identity fails on the split")
    # rebuilding must reproduce the original
    if insert_tangle(InsertionContext.at(host, ctx.level_index, tangle), tangle) != whole:
        raise TemplateError("re-inserting T^q does not reproduce K^n")
    return CompositeSplit(kp, kq, tangle, l, r)


def bridge_profile_width(n: int) -> int:
    """Width of the n-bridge profile 2, 4, .., 2n, .., 4, 2."""
    counts = list(range(2, 2 * n + 1, 2)) + list(range(2 * n - 2, 0, -2))
    return sum(counts)


# -- template text format ---------------------------------------------------------


def _template_fields(text: str):
    fields: dict[str, list[str]] = {}
    bundle_lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *vals = line.split()
        if key == "bundle":
            if len(vals) != 3:
                raise TemplateError(f"line {lineno}: expected 'bundle <boxA> <boxB> <strands>'")
            bundle_lines.append(vals)
        else:
            fields[key] = vals
    return fields, bundle_lines


def _ints(fields, key, default=None):
    if key not in fields:
        return default
    try:
        return [int(x) for x in fields[key]]
    except ValueError:
        raise TemplateError(f"{key}: expected integers, got {' '.join(fields[key])}") from None


def template_kind(text: str) -> str:
    fields, _ = _template_fields(text)
    return (fields.get("type") or ["type-n"])[0]


def parse_type_n_params(text: str) -> TypeNParams:
    """The ``TypeNParams`` of a ``type-n`` template file."""
    fields, _ = _template_fields(text)
    kind = (fields.get("type") or ["type-n"])[0]
    if kind != "type-n":
        raise TemplateError(f"expected a type-n template, got {kind!r}")
    s = _ints(fields, "s")
    if s is None:
        raise TemplateError("type-n template needs an 's' line")
    n = _ints(fields, "n", [len(s)])[0]
    return TypeNParams(n, s, _ints(fields, "left_minima"), _ints(fields, "right_maxima"))


def parse_template(text: str) -> TemplateDiagram:
    """Build a diagram from the ``key values...`` template format.

    ``type`` is one of type-n, gen-g, gen-l or prop47.
    """
    fields, bundle_lines = _template_fields(text)

    def ints(key, default=None):
        return _ints(fields, key, default)

    kind = (fields.get("type") or ["type-n"])[0]
    s = ints("s")
    n = ints("n", [len(s) if s else len(ints("s1", []))])[0]
    lm, rm = ints("left_minima"), ints("right_maxima")
    if kind == "type-n":
        return build_type_n(parse_type_n_params(text))
    if kind == "prop47":
        toks = fields.get("tangle")
        if not toks or any(t not in ("m", "M") for t in toks):
            raise TemplateError("prop47 template needs a 'tangle' line of m/M tokens")
        one = lambda key, d: ints(key, [d])[0]  # noqa: E731
        return build_prop47(
            [1 if t == "m" else -1 for t in toks],
            t=one("t", 1), k1=one("k1", 1), k2=one("k2", 1), m1=one("m1", 0), M2=one("M2", 0),
            outer_slack=one("outer_slack", 0),
        )
    if kind == "gen-g":
        s1, s2 = ints("s1"), ints("s2")
        if s1 is None or s2 is None:
            raise TemplateError("gen-g template needs 's1' and 's2' lines")
        return build_gen_g(s1, s2, lm, rm)
    if kind == "gen-l":
        params = TypeNParams(n, s if s is not None else ints("s1"), lm, rm)
        perm = ints("order", list(range(1, n + 1)))
        if not bundle_lines:
            return gen_l_from_permutation(perm, params)
        ref = build_type_n(params)
        order = [box_id(i, 1) for i in perm] + [box_id(i, 2) for i in reversed(perm)]
        pos = {bid: k for k, bid in enumerate(order)}  # 0 = top
        bundles = []
        for a, b, k in bundle_lines:
            upper, lower = (a, b) if pos[a] < pos[b] else (b, a)
            bundles.append(Bundle(upper, "bottom", lower, "top", int(k), f"{upper}-{lower}"))
        return build_gen_l(order, ref.boxes, bundles)
    raise TemplateError(f"unknown template type {kind!r}")


def format_template_params(params: TypeNParams) -> str:
    return (
        "type type-n\n"
        f"n {params.n}\n"
        f"s {' '.join(map(str, params.s))}\n"
        f"left_minima {' '.join(map(str, params.left_minima))}\n"
        f"right_maxima {' '.join(map(str, params.right_maxima))}\n"
    )
