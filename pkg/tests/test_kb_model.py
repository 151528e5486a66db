import math

import pytest

from nonmono.kb import (
    Feature,
    Fmf,
    KbValidationError,
    LinguisticTerm,
    contradiction_graph,
    parse_kb,
    trust_level_range,
)

KB1_RULE_LABELS = {
    "B1", "B2", "B3", "AF1", "AF2", "AF3", "AN1", "AN2", "U1", "U2", "U3",
    "C1", "C2", "C3", "C4", "P1", "P2", "P3", "P4", "F1", "F2", "F3", "F4",
    "R1", "R2", "R3", "R4", "NM1", "NM2",
}
KB1_CONTRA_LABELS = (
    {f"CC{i}" for i in range(1, 29)}
    | {f"Bot.{s}" for s in "abcdefgh"}
    | {f"Vandal.{s}" for s in "abcd"}
    | {f"OnlyAge.{s}" for s in "abc"}
)


def test_fmf_shapes():
    tri = Fmf("triangular", (0.0, 1.0, 2.0))
    assert tri(1.0) == 1.0
    assert tri(0.5) == 0.5
    assert tri(1.5) == 0.5
    assert tri(-0.1) == 0.0 and tri(2.1) == 0.0
    trap = Fmf("trapezoidal", (0.0, 1.0, 2.0, 4.0))
    assert trap(1.5) == 1.0
    assert trap(0.5) == 0.5
    assert trap(3.0) == 0.5
    gauss = Fmf("gaussian", (0.5, 0.1))
    assert gauss(0.5) == 1.0
    assert abs(gauss(0.6) - math.exp(-0.5)) < 1e-12
    crisp = Fmf("crisp", (1.0, 1.0))
    assert crisp(1.0) == 1.0 and crisp(0.999) == 0.0


def test_fmf_validation():
    with pytest.raises(KbValidationError):
        Fmf("triangular", (2.0, 1.0, 0.0))
    with pytest.raises(KbValidationError):
        Fmf("gaussian", (0.5, 0.0))
    with pytest.raises(KbValidationError):
        Fmf("pentagon", (0.0, 1.0))


def test_fmf_outputs_bounded():
    fns = [
        Fmf("triangular", (0.0, 0.3, 1.0)),
        Fmf("trapezoidal", (0.0, 0.2, 0.6, 1.0)),
        Fmf("gaussian", (0.4, 0.2)),
        Fmf("crisp", (0.2, 0.8)),
    ]
    for fmf in fns:
        for i in range(101):
            assert 0.0 <= fmf(i / 100) <= 1.0


def test_term_overlap_rejected():
    mk = lambda label, lo, hi: LinguisticTerm(label, lo, hi, {"triangular": Fmf("crisp", (lo, hi))})
    with pytest.raises(KbValidationError):
        Feature("f", 1, (mk("a", 0.0, 0.6), mk("b", 0.5, 1.0)), 0.0, 1.0)
    # shared endpoints are crisp-legal; ties go to the lower term
    f = Feature("f", 1, (mk("a", 0.0, 0.5), mk("b", 0.5, 1.0)), 0.0, 1.0)
    assert f.active_term(0.5).label == "a"


def test_weight_range_enforced():
    term = LinguisticTerm("a", 0.0, 1.0, {"triangular": Fmf("crisp", (0.0, 1.0))})
    with pytest.raises(KbValidationError):
        Feature("f", 9, (term,), 0.0, 1.0)


def test_trust_level_ranges(kb1):
    assert trust_level_range(kb1, "high") == (0.75, 1.0)
    assert trust_level_range(kb1, "low") == (0.0, 0.25)
    with pytest.raises(KeyError, match="very_high"):
        trust_level_range(kb1, "very_high")


def test_trust_levels_tile_unit_interval(kb1):
    levels = sorted(kb1.trust_levels.values(), key=lambda l: l.lower)
    assert levels[0].lower == 0.0 and levels[-1].upper == 1.0
    for prev, cur in zip(levels, levels[1:]):
        assert cur.lower == prev.upper


def test_transcription_is_bijective(kb1, kb2):
    assert set(kb1.rules) == KB1_RULE_LABELS
    assert set(kb1.contradictions) == KB1_CONTRA_LABELS
    assert set(kb2.rules) == KB1_RULE_LABELS


def test_contradiction_graph_kb1(kb1):
    g = contradiction_graph(kb1)
    assert set(g.nodes) == KB1_CONTRA_LABELS
    assert g.edges["CC3"] == ("OnlyAge.a", "OnlyAge.b", "OnlyAge.c")
    assert all(not g.edges[n] for n in g.nodes if n != "CC3")
    assert g.cyclic_groups == ()
    assert set(g.layers[1]) == {"OnlyAge.a", "OnlyAge.b", "OnlyAge.c"}


def test_contradiction_graph_no_edges(kb2):
    g = contradiction_graph(kb2)
    assert all(not targets for targets in g.edges.values())
    assert len(g.layers) == 1


def test_contradiction_graph_cycle():
    src = """
feature f weight 1 domain [0.0, 1.0] {
    term low = [0.0, 1.0] fmf crisp(0.0, 1.0)
}
trustlevel low = [0.0, 1.0] fmf crisp(0.0, 1.0)
rule R: IF f is low THEN trust is low
contradiction X: IF rule R THEN NOT contradiction Y
contradiction Y: IF rule R THEN NOT contradiction X
"""
    kb = parse_kb(src).kb
    g = contradiction_graph(kb)
    assert g.cyclic_groups == (frozenset({"X", "Y"}),)
    assert len(g.layers) == 1


def test_contradiction_graph_deterministic(kb1):
    a = contradiction_graph(kb1)
    b = contradiction_graph(kb1)
    assert a.nodes == b.nodes and a.edges == b.edges and a.layers == b.layers
