"""Parameter sweeps, the reordering oracle and report output."""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .families import TemplateDiagram, TemplateError, TypeNParams, build_gen_g, build_prop47, build_type_n
from .morse import MorsePresentation, profile, require_valid, thick_thin_of_profile, width_direct
from .thinning import (
    HypothesisError,
    ThinningOutcome,
    composite_reduction,
    gen_reduce,
    lemma32_hypothesis,
    lemma34_hypothesis,
    prop43_hypothesis,
    prop44_hypothesis,
    prop45_index,
    prop47_move,
    reduce_n_minus_1,
    reduce_n_minus_2,
    thin_pipeline,
)

log = logging.getLogger(__name__)

FAMILIES = ("type-n", "gen-g", "prop47")
TYPE_N_HYPOTHESES = ("lemma32", "lemma34", "pipeline", "composite")
GEN_HYPOTHESES = ("prop43", "prop44", "prop45")
CSV_HEADER = ("params", "w_before", "w_after", "delta", "bound", "pass", "ms")


class BudgetExceeded(ValueError):
    pass


# -- sweep spec ----------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    """A finite grid of instances.

    For ``type-n`` and ``gen-g`` every index draws its bundle size from
    ``s_values`` and every box gets the same extra slack from ``slack_values``.
    For ``prop47`` the ``n_values`` are the maxima counts r of T, ``s_values``
    the strand multiplicities k1 = k2 and ``slack_values`` the extra counts
    m1 = M2 of the inner boxes.
    """

    n_values: tuple = (3,)
    s_values: tuple = (3, 5)
    slack_values: tuple = (0,)
    family: str = "type-n"
    hypotheses: tuple = ()
    timings: bool = False

    def __post_init__(self):
        for name in ("n_values", "s_values", "slack_values", "hypotheses"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family != "prop47" and any(s < 1 or s % 2 == 0 for s in self.s_values):
            raise ValueError("bundle sizes must be odd positive integers")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        known = {"n_values", "s_values", "slack_values", "family", "hypotheses", "timings"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown sweep keys: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "SweepSpec":
        return cls.from_dict(json.loads(text))

    def wants(self, hyp: str) -> bool:
        return not self.hypotheses or hyp in self.hypotheses

    def work_items(self) -> list[tuple]:
        items = []
        if self.family == "type-n":
            for n in self.n_values:
                for s in itertools.product(self.s_values, repeat=n):
                    for slack in self.slack_values:
                        for hyp in _type_n_hypotheses(s):
                            if self.wants(hyp):
                                items.append(("type-n", hyp, s, slack))
        elif self.family == "gen-g":
            for n in self.n_values:
                for s1 in itertools.product(self.s_values, repeat=n):
                    for s2 in itertools.product(self.s_values, repeat=n):
                        for slack in self.slack_values:
                            for hyp in _gen_hypotheses(s1, s2):
                                if self.wants(hyp):
                                    items.append(("gen-g", hyp, (s1, s2), slack))
        else:
            for r in self.n_values:
                for k in self.s_values:
                    for slack in self.slack_values:
                        if self.wants("prop47"):
                            items.append(("prop47", "prop47", (r, k), slack))
        return items


def _type_n_hypotheses(s) -> list[str]:
    n = len(s)
    out = []
    if any(x == 1 for x in s[: n - 1]):
        out.append("composite")
        return out
    if lemma32_hypothesis(s):
        out.append("lemma32")
    if lemma34_hypothesis(s):
        out.append("lemma34")
    if n >= 3:
        out.append("pipeline")
    return out


def _gen_hypotheses(s1, s2) -> list[str]:
    out = []
    if prop43_hypothesis(s1, s2):
        out.append("prop43")
    if prop44_hypothesis(s1, s2):
        out.append("prop44")
    if len(s1) >= 3 and prop45_index(s1, s2) is not None:
        out.append("prop45")
    return out


@dataclass(frozen=True)
class SweepRow:
    params: str
    hypothesis: str
    w_before: int
    w_after: int
    delta: int
    bound: int
    passed: bool
    ms: int = 0

    def __post_init__(self):
        if self.passed != (self.delta >= self.bound):
            raise ValueError("pass flag must equal delta >= bound")


@dataclass
class SweepSummary:
    total: int = 0
    failures: int = 0
    per_hypothesis: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failures == 0


def instance_key(item) -> str:
    family, hyp, s, slack = item
    if family == "type-n":
        body = f"n={len(s)};s={'-'.join(map(str, s))};slack={slack}"
    elif family == "gen-g":
        body = f"n={len(s[0])};s1={'-'.join(map(str, s[0]))};s2={'-'.join(map(str, s[1]))};slack={slack}"
    else:
        body = f"r={s[0]};k={s[1]};slack={slack}"
    return f"{hyp};{body}"


def run_item(item) -> ThinningOutcome:
    family, hyp, s, slack = item
    if family == "type-n":
        params = TypeNParams.uniform(s, slack)
        if hyp == "lemma32":
            return reduce_n_minus_1(params)
        if hyp == "lemma34":
            return reduce_n_minus_2(params)
        if hyp == "composite":
            return composite_reduction(params)
        return thin_pipeline(params)
    if family == "gen-g":
        s1, s2 = s
        n = len(s1)
        return gen_reduce(build_gen_g(s1, s2, (slack,) * n, (slack,) * n), hyp)
    r, k = s
    return prop47_move(build_prop47([1] * r + [-1] * r, k1=k, k2=k, m1=slack, M2=slack))


def _evaluate(args) -> SweepRow:
    item, timings = args
    t0 = time.perf_counter()
    out = run_item(item)
    # re-derive both widths instead of trusting the outcome
    w_before, w_after = width_direct(out.before), width_direct(out.after)
    delta = w_before - w_after
    if delta != out.delta:
        raise AssertionError(f"{instance_key(item)}: outcome delta {out.delta} != recomputed {delta}")
    if out.trace.replay() != out.after:
        raise AssertionError(f"{instance_key(item)}: trace replay does not reach the outcome")
    bound = out.bound if out.bound is not None else 0
    ms = int(round((time.perf_counter() - t0) * 1000)) if timings else 0
    return SweepRow(instance_key(item), item[1], w_before, w_after, delta, bound, delta >= bound, ms)


def _threads() -> int:
    raw = os.environ.get("THINWIDTH_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        log.warning("ignoring THINWIDTH_THREADS=%r", raw)
        return 1


def sweep_verify(spec: SweepSpec, threads: int | None = None) -> tuple[list[SweepRow], SweepSummary]:
    """Evaluate every instance of ``spec``; rows come back sorted by key."""
    items = spec.work_items()
    jobs = [(it, spec.timings) for it in items]
    threads = threads or _threads()
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_evaluate, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        rows = [_evaluate(j) for j in jobs]
    rows.sort(key=lambda r: r.params)
    summary = SweepSummary()
    for r in rows:
        summary.total += 1
        summary.failures += not r.passed
        ok, bad = summary.per_hypothesis.get(r.hypothesis, (0, 0))
        summary.per_hypothesis[r.hypothesis] = (ok + r.passed, bad + (not r.passed))
    return rows, summary


# -- oracle ----------------------------------------------------------------------


def pred_masks(p: MorsePresentation, diagram: TemplateDiagram | None = None, pairs=None) -> np.ndarray:
    """Bitmask per event of the events that must stay below it.

    With a diagram, every event of the lower box of a bundle stays below
    every event of the upper box.  ``pairs`` adds explicit (below, above)
    event index pairs.
    """
    n = len(p)
    masks = np.zeros(n, dtype=np.int64)
    if diagram is not None:
        idx = {}
        for i, o in enumerate(p.owners):
            idx.setdefault(o, []).append(i)
        for lower, upper in diagram.precedence_pairs():
            below = 0
            for i in idx.get(lower, ()):
                below |= 1 << i
            for j in idx.get(upper, ()):
                masks[j] |= below
    for i, j in pairs or ():
        masks[j] |= 1 << i
    return masks


def _floor(p):
    return 2 if p.punctures_bottom == p.punctures_top == 0 else 0


def brute_force_min_width(
    p: MorsePresentation, diagram: TemplateDiagram | None = None, pairs=None, budget: int = 12
) -> int:
    """Least width over event orderings allowed by the bundle order.

    Orderings may not drive a level below zero strands, and a knot keeps
    at least two strands on every interior level.  Raises
    ``BudgetExceeded`` above ``budget`` events.
    """
    require_valid(p)
    if len(p) > budget:
        raise BudgetExceeded(f"{len(p)} events exceed the oracle budget of {budget}")
    if len(p) == 0:
        return 0
    best = _kernels.min_width_dp(p.kinds, p.punctures_bottom, pred_masks(p, diagram, pairs), _floor(p))
    if best < 0:
        raise ValueError("no ordering satisfies the constraints")
    return best


def oracle_ordering(p: MorsePresentation, diagram=None, pairs=None, budget: int = 12) -> tuple[int, list[int]]:
    """A minimizing ordering (event indices bottom to top) and its width."""
    require_valid(p)
    if len(p) > budget:
        raise BudgetExceeded(f"{len(p)} events exceed the oracle budget of {budget}")
    n = len(p)
    kinds = [int(k) for k in p.kinds]
    masks = [int(m) for m in pred_masks(p, diagram, pairs)]
    full = (1 << n) - 1
    floor = _floor(p)
    inf = float("inf")

    @lru_cache(maxsize=None)
    def rest(state, count):
        if state == full:
            return 0, ()
        best = (inf, ())
        for i in range(n):
            if state >> i & 1 or masks[i] & ~state:
                continue
            nxt = count + 2 * kinds[i]
            ns = state | 1 << i
            if nxt < 0 or (ns != full and nxt < floor):
                continue
            cost, tail = rest(ns, nxt)
            cost += 0 if ns == full else nxt
            if cost < best[0]:
                best = (cost, (i,) + tail)
        return best

    cost, order = rest(0, p.punctures_bottom)
    if cost == inf:
        raise ValueError("no ordering satisfies the constraints")
    return int(cost), list(order)


def reorder(p: MorsePresentation, order) -> MorsePresentation:
    return MorsePresentation(p.kinds[list(order)], tuple(p.owners[i] for i in order), p.punctures_bottom, p.punctures_top)


# -- rendering and reports ---------------------------------------------------------


def render_profile(p: MorsePresentation, char: str = "#") -> str:
    """Top-to-bottom picture: one row per event and per interior level."""
    require_valid(p)
    counts = profile(p)
    marks = [""] * len(counts)
    if p.is_knot:
        padded = [0, *counts, 0]
        for i, c in enumerate(counts, 1):
            if c > padded[i - 1] and c > padded[i + 1]:
                marks[i - 1] = "thick"
            elif c < padded[i - 1] and c < padded[i + 1]:
                marks[i - 1] = "thin"
    pad = max([len(str(c)) for c in counts] + [1])
    lines = []
    for i in range(len(p) - 1, -1, -1):
        kind = "max" if p.kinds[i] < 0 else "min"
        owner = f" {p.owners[i]}" if p.owners[i] else ""
        lines.append(f"{'':>{pad}}   {kind}{owner}")
        if i > 0:
            c = counts[i - 1]
            tail = f"  {marks[i - 1]}" if marks[i - 1] else ""
            lines.append(f"{c:>{pad}} | {char * c}{tail}".rstrip())
    if p.is_knot:
        thick, thin = thick_thin_of_profile(counts)
        lines.append(f"width {sum(counts)}  thick {thick}  thin {thin}")
    else:
        lines.append(f"width {sum(counts)}  punctures {p.punctures_bottom}/{p.punctures_top}")
    return "\n".join(lines) + "\n"


def _row_values(r: SweepRow) -> list[str]:
    return [r.params, str(r.w_before), str(r.w_after), str(r.delta), str(r.bound), "true" if r.passed else "false", str(r.ms)]


def format_report(rows, fmt: str = "csv") -> str:
    if fmt in ("csv", "tsv"):
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="," if fmt == "csv" else "\t", lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow(_row_values(r))
        return buf.getvalue()
    if fmt == "text":
        table = [list(CSV_HEADER)] + [_row_values(r) for r in rows]
        widths = [max(len(row[k]) for row in table) for k in range(len(CSV_HEADER))]
        lines = ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in table]
        fails = sum(not r.passed for r in rows)
        lines.append(f"{len(rows)} rows, {fails} failures")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def report_emit(rows, fmt: str = "csv", path=None) -> str:
    """Format ``rows`` and write them to ``path`` if given."""
    text = format_report(rows, fmt)
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as e:
            raise OSError(f"cannot write report to {path}: {e.strerror or e}") from e
    return text


# -- small-instance enumeration for the oracle ------------------------------------


def small_instances(budget: int = 12):
    """(label, diagram, outcome) triples whose start fits the oracle budget."""
    out = []
    for n in range(1, 5):
        for s in itertools.product((1, 3, 5), repeat=n):
            for slack in (0, 1):
                try:
                    params = TypeNParams.uniform(s, slack)
                except TemplateError:
                    continue
                d = build_type_n(params)
                if sum(b.n_events for b in d.boxes) > budget:
                    continue
                for hyp in ("lemma32", "lemma34", "composite", "pipeline"):
                    try:
                        if hyp == "lemma32":
                            o = reduce_n_minus_1(params) if n >= 2 else None
                        elif hyp == "lemma34":
                            o = reduce_n_minus_2(params) if n >= 3 else None
                        elif hyp == "composite":
                            o = composite_reduction(params)
                        else:
                            o = thin_pipeline(params)
                    except (HypothesisError, TemplateError):
                        continue
                    if o is not None:
                        out.append((f"{hyp};n={n};s={'-'.join(map(str, s))};slack={slack}", d, o))
    for r in (1, 2):
        for k in (1, 2):
            d = build_prop47([1] * r + [-1] * r, k1=k, k2=1)
            if sum(b.n_events for b in d.boxes) <= budget:
                out.append((f"prop47;r={r};k1={k}", d, prop47_move(d)))
    return out
