"""Mamdani-style fuzzy pipeline with a possibilistic non-monotonic layer.

Stages: fuzzify crisp inputs, combine premise grades into rule necessities
(t-norm/t-conorm), shrink necessities through contradictions (possibility of
every proposition is fixed at 1, so an attacker Q caps its target at
``1 - Nec(Q)``), apply normalised rule weights, aggregate per trust level
disjunctively, defuzzify the clipped level curves.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

from .kb.model import (
    MAX_FEATURE_WEIGHT,
    ContradictionGraph,
    Dnf,
    KnowledgeBase,
    RuleRef,
    contradiction_graph,
)

log = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 1001
MAX_TIE_EPS = 1e-9


@dataclass(frozen=True)
class FuzzyOperatorSet:
    id: str
    t_norm: Callable[[float, float], float]
    t_conorm: Callable[[float, float], float]


OPERATORS = {
    "zadeh": FuzzyOperatorSet("zadeh", min, max),
    "product": FuzzyOperatorSet("product", lambda x, y: x * y, lambda x, y: x + y - x * y),
    "lukasiewicz": FuzzyOperatorSet(
        "lukasiewicz", lambda x, y: max(x + y - 1.0, 0.0), lambda x, y: min(x + y, 1.0)
    ),
}


@dataclass(frozen=True)
class AggregatedFuzzySet:
    """Trust-level truth values and the resulting clipped membership curve."""

    level_truths: dict[str, float]
    xs: tuple[float, ...]
    mu: tuple[float, ...]


def fuzzify(features, kb: KnowledgeBase, variant: str = "triangular") -> dict[tuple[str, str], float]:
    """Membership grade of every (feature, term) pair for a feature vector.

    Inputs are clamped to the feature domain first, so values beyond a
    saturation bound keep full membership in the saturated term.
    """
    grades: dict[tuple[str, str], float] = {}
    for fname, feat in kb.features.items():
        if fname not in features:
            raise KeyError(f"feature {fname!r} missing from feature vector")
        x = min(max(features[fname], feat.domain_min), feat.domain_max)
        for term in feat.terms:
            grades[(fname, term.label)] = term.fmf(variant)(x)
    return grades


def dnf_necessity(dnf: Dnf, grades, ops: FuzzyOperatorSet) -> float:
    """AND via t-norm, OR via t-conorm over a DNF antecedent."""
    acc = None
    for conj in dnf:
        val = None
        for premise in conj:
            g = grades[premise]
            val = g if val is None else ops.t_norm(val, g)
        acc = val if acc is None else ops.t_conorm(acc, val)
    return acc


def rule_necessity(rule, grades, ops: FuzzyOperatorSet) -> float:
    return dnf_necessity(rule.antecedent, grades, ops)


def necessity_update(nec: float, supports, attackers) -> float:
    """Possibilistic update of one proposition's necessity.

    The union over supporting necessities is a max (including the current
    value); every attacker Q intersects in a cap of ``1 - Nec(Q)``.
    """
    value = nec
    for s in supports:
        value = max(value, s)
    for a in attackers:
        value = min(value, 1.0 - a)
    return value


def initial_necessities(kb: KnowledgeBase, grades, ops: FuzzyOperatorSet) -> dict[str, float]:
    return {label: rule_necessity(rule, grades, ops) for label, rule in kb.rules.items()}


def resolve_possibility(
    kb: KnowledgeBase,
    necessities: dict[str, float],
    grades,
    ops: FuzzyOperatorSet,
    graph: ContradictionGraph | None = None,
) -> dict[str, float]:
    """Shrink rule necessities through the contradiction precedence graph.

    Layers run root to leaf.  All contradictions of a layer take their own
    necessity from the state at layer entry (RuleRef antecedents read the
    referenced rule's current necessity, premise antecedents their static
    grade) and apply their caps together, so cyclic or incomparable
    contradictions are solved simultaneously from that stored snapshot.
    """
    graph = graph or contradiction_graph(kb)
    rule_nec = dict(necessities)
    contra_cap = {label: 1.0 for label in kb.contradictions}
    for layer in graph.layers:
        snap = dict(rule_nec)
        layer_nec: dict[str, float] = {}
        for label in layer:
            c = kb.contradictions[label]
            if isinstance(c.antecedent, RuleRef):
                base = snap[c.antecedent.label]
            else:
                base = dnf_necessity(c.antecedent, grades, ops)
            layer_nec[label] = min(base, contra_cap[label])
        for label in layer:
            q = layer_nec[label]
            for target in kb.contradictions[label].targets:
                if target in rule_nec:
                    rule_nec[target] = necessity_update(rule_nec[target], (), (q,))
                else:
                    contra_cap[target] = min(contra_cap[target], 1.0 - q)
    return rule_nec


def apply_rule_weights(necessities: dict[str, float], kb: KnowledgeBase) -> dict[str, float]:
    """Scale each necessity by its rule weight normalised over the maximum weight."""
    return {
        label: (kb.rule_weight(label) / MAX_FEATURE_WEIGHT) * nec
        for label, nec in necessities.items()
    }


def aggregate_levels(
    necessities: dict[str, float],
    kb: KnowledgeBase,
    variant: str = "triangular",
    resolution: int = DEFAULT_RESOLUTION,
) -> AggregatedFuzzySet:
    """Disjunctive aggregation: level truth = max over rules inferring it;
    the output curve is the pointwise max of level functions clipped there."""
    truths = {level: 0.0 for level in kb.trust_levels}
    for label, nec in necessities.items():
        level = kb.rules[label].consequent_level
        truths[level] = max(truths[level], nec)
    xs = tuple(i / (resolution - 1) for i in range(resolution))
    fmfs = {level: tl.fmf(variant) for level, tl in kb.trust_levels.items()}
    mu = tuple(
        max((min(truths[level], fmfs[level](x)) for level in truths), default=0.0)
        for x in xs
    )
    return AggregatedFuzzySet(level_truths=truths, xs=xs, mu=mu)


def defuzzify(agg: AggregatedFuzzySet, method: str) -> float | None:
    """Centroid or mean-of-max of the aggregated curve; a flat zero curve
    defuzzifies to no value."""
    peak = max(agg.mu, default=0.0)
    if peak <= 0.0:
        return None
    if method == "centroid":
        area = sum(agg.mu)
        return sum(x * m for x, m in zip(agg.xs, agg.mu)) / area
    if method == "mean_of_max":
        top = [x for x, m in zip(agg.xs, agg.mu) if m >= peak - MAX_TIE_EPS]
        return sum(top) / len(top)
    raise ValueError(f"unknown defuzzification method {method!r}")


def run_fuzzy(
    kb: KnowledgeBase,
    features,
    operator: str,
    defuzz: str,
    use_weights: bool,
    variant: str = "triangular",
    resolution: int = DEFAULT_RESOLUTION,
    graph: ContradictionGraph | None = None,
) -> float | None:
    ops = OPERATORS[operator]
    grades = fuzzify(features, kb, variant)
    necs = initial_necessities(kb, grades, ops)
    necs = resolve_possibility(kb, necs, grades, ops, graph)
    if use_weights:
        necs = apply_rule_weights(necs, kb)
    agg = aggregate_levels(necs, kb, variant, resolution)
    return defuzzify(agg, defuzz)
