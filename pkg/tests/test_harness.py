import numpy as np
import pytest

from thinwidth.families import TypeNParams, build_prop47, build_type_n
from thinwidth.harness import (
    CSV_HEADER,
    BudgetExceeded,
    SweepRow,
    SweepSpec,
    brute_force_min_width,
    format_report,
    oracle_ordering,
    pred_masks,
    render_profile,
    reorder,
    report_emit,
    small_instances,
    sweep_verify,
)
from thinwidth.morse import Kind, MorsePresentation, iter_knot_sequences, thick_thin, thick_thin_of_profile, width_direct
from thinwidth.thinning import prop47_move, reduce_n_minus_2


def knot(tokens):
    return MorsePresentation.knot(tokens)


# -- oracle ----------------------------------------------------------------------


def test_oracle_on_bridge_knot():
    p = knot("m m M M")
    assert brute_force_min_width(p) == width_direct(p)


def test_oracle_two_orderings_of_a_tangle():
    t = MorsePresentation.from_events([Kind.MIN, Kind.MAX], 2, 2)
    assert width_direct(t) == 4
    assert brute_force_min_width(t) == 0


def test_oracle_never_exceeds_current_width():
    for seq in iter_knot_sequences(10):
        p = MorsePresentation(seq, (), 0, 0)
        assert brute_force_min_width(p) <= width_direct(p)


def test_oracle_budget():
    p = build_type_n(TypeNParams.uniform((3, 3, 3))).compile()
    with pytest.raises(BudgetExceeded):
        brute_force_min_width(p)
    assert brute_force_min_width(p, budget=16) <= width_direct(p)


def test_oracle_ordering_matches_kernel_and_identity():
    d = build_prop47([1, -1])
    p = d.compile()
    low = brute_force_min_width(p, diagram=d)
    cost, order = oracle_ordering(p, diagram=d)
    assert cost == low
    best = reorder(p, order)
    counts = [int(c) for c in (np.cumsum(best.kinds.astype(np.int64)) * 2)[:-1]]
    thick, thin = thick_thin_of_profile(counts)
    assert sum(counts) == low == (sum(b * b for b in thick) - sum(a * a for a in thin)) // 2


def test_pred_masks_from_bundles():
    d = build_type_n(TypeNParams.uniform((1,)))
    p = d.compile()  # [m@X1,2, M@X1,1]
    masks = pred_masks(p, diagram=d)
    assert list(masks) == [0, 1]


def test_oracle_bounds_vertical_scripts():
    p = build_type_n(TypeNParams.uniform((1, 1, 1))).compile()
    out = reduce_n_minus_2(TypeNParams.uniform((1, 1, 1)))
    d = build_type_n(TypeNParams.uniform((1, 1, 1)))
    assert width_direct(out.after) >= brute_force_min_width(p, diagram=d)
    d47 = build_prop47([1, 1, -1, -1])
    out = prop47_move(d47)
    assert width_direct(out.after) >= brute_force_min_width(out.before, diagram=d47)


def test_small_instances_fit_budget():
    items = small_instances()
    assert items
    assert all(len(o.before) <= 12 for _, _, o in items)


# -- sweeps ----------------------------------------------------------------------


def test_lemma34_sweep():
    spec = SweepSpec(n_values=(3, 4, 5), s_values=(3, 5), slack_values=(0, 1), hypotheses=("lemma34",))
    rows, summary = sweep_verify(spec)
    assert rows and summary.ok
    for r in rows:
        n = int(r.params.split(";")[1][2:])
        assert r.delta >= max(72 * n - 204, 36)


def test_composite_sweep():
    spec = SweepSpec(n_values=(2, 3, 4), s_values=(1, 3), slack_values=(0,), hypotheses=("composite",))
    rows, summary = sweep_verify(spec)
    assert rows and summary.ok
    for r in rows:
        n = int(r.params.split(";")[1][2:])
        assert r.delta >= 2 * n * n - 2


def test_gen_and_prop47_sweeps():
    rows, summary = sweep_verify(SweepSpec(n_values=(3,), s_values=(3, 5), family="gen-g"))
    assert rows and summary.ok
    assert set(summary.per_hypothesis) <= {"prop43", "prop44", "prop45"}
    rows, summary = sweep_verify(SweepSpec(n_values=(1, 2, 3), s_values=(1, 2), slack_values=(0, 1), family="prop47"))
    assert len(rows) == 12 and summary.ok


def test_empty_sweep():
    rows, summary = sweep_verify(SweepSpec(n_values=()))
    assert rows == [] and summary.total == 0 and summary.failures == 0
    assert format_report(rows) == ",".join(CSV_HEADER) + "\n"


def test_sweep_is_deterministic_across_workers(monkeypatch):
    spec = SweepSpec(n_values=(3,), s_values=(1, 3, 5))
    one, _ = sweep_verify(spec, threads=1)
    two, _ = sweep_verify(spec, threads=2)
    assert format_report(one) == format_report(two)
    monkeypatch.setenv("THINWIDTH_THREADS", "nonsense")
    assert sweep_verify(spec)[0] == one


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(s_values=(2,))
    with pytest.raises(ValueError):
        SweepSpec(family="nope")
    with pytest.raises(ValueError):
        SweepSpec.from_dict({"n_values": [3], "bogus": 1})
    assert SweepSpec.from_json('{"n_values": [3], "s_values": [3]}').n_values == (3,)


def test_row_pass_flag_is_checked():
    with pytest.raises(ValueError):
        SweepRow("x", "lemma34", 10, 5, 5, 6, True)


# -- reports and rendering ---------------------------------------------------------


def test_report_one_row(tmp_path):
    row = SweepRow("lemma34;n=3;s=3-3-3;slack=0", "lemma34", 128, 92, 36, 36, True)
    text = report_emit([row], "csv", tmp_path / "r.csv")
    lines = text.splitlines()
    assert lines[0] == "params,w_before,w_after,delta,bound,pass,ms"
    assert lines[1] == "lemma34;n=3;s=3-3-3;slack=0,128,92,36,36,true,0"
    assert (tmp_path / "r.csv").read_text() == text
    report_emit([row], "csv", tmp_path / "r2.csv")
    assert (tmp_path / "r.csv").read_bytes() == (tmp_path / "r2.csv").read_bytes()


def test_report_formats():
    row = SweepRow("k", "lemma32", 2, 1, 1, 2, False)
    assert format_report([row], "tsv").splitlines()[1] == "k\t2\t1\t1\t2\tfalse\t0"
    assert format_report([row], "text").splitlines()[-1] == "1 rows, 1 failures"
    with pytest.raises(ValueError):
        format_report([row], "xml")


def test_report_io_error_names_path(tmp_path):
    bad = tmp_path / "missing" / "r.csv"
    with pytest.raises(OSError, match="missing"):
        report_emit([], "csv", bad)


def bars(text):
    return [len(line.split("|")[1].split()[0]) for line in text.splitlines() if "|" in line]


def test_render_unknot():
    assert bars(render_profile(knot("m M"))) == [2]


def test_render_bridge_profile_top_down():
    out = render_profile(knot("m m M M"))
    assert bars(out) == [2, 4, 2]
    assert "thick" in out and out == render_profile(knot("m m M M"))


def test_render_annotations_match_thick_thin():
    p = knot("m m M m m M M M")
    out = render_profile(p)
    rep = thick_thin(p)
    thick = [int(l.split("|")[0]) for l in out.splitlines() if l.endswith("thick")]
    thin = [int(l.split("|")[0]) for l in out.splitlines() if l.endswith("thin")]
    assert sorted(thick) == sorted(rep.thick) and sorted(thin) == sorted(rep.thin)


def test_render_tangle():
    t = MorsePresentation.from_events([Kind.MIN, Kind.MAX], 2, 2)
    assert "punctures 2/2" in render_profile(t)
