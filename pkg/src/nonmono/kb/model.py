"""Immutable domain model for knowledge bases.

A knowledge base couples quantitative features (with linguistic terms mapped
to numeric ranges and fuzzy membership functions) to IF-THEN trust rules and
to contradictions (meta-rules that retract other rules or contradictions).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "Fmf",
    "LinguisticTerm",
    "Feature",
    "TrustLevel",
    "Premise",
    "Rule",
    "RuleRef",
    "Contradiction",
    "KnowledgeBase",
    "ContradictionGraph",
    "KbValidationError",
    "contradiction_graph",
    "trust_level_range",
]

MAX_FEATURE_WEIGHT = 8


class KbValidationError(ValueError):
    """Raised when a knowledge base violates a structural invariant."""


@dataclass(frozen=True)
class Fmf:
    """Fuzzy membership function: triangular, trapezoidal, gaussian or crisp."""

    shape: str
    params: tuple[float, ...]

    _ARITY = {"triangular": 3, "trapezoidal": 4, "gaussian": 2, "crisp": 2}

    def __post_init__(self):
        if self.shape not in self._ARITY:
            raise KbValidationError(f"unknown fmf shape {self.shape!r}")
        if len(self.params) != self._ARITY[self.shape]:
            raise KbValidationError(
                f"fmf {self.shape} expects {self._ARITY[self.shape]} parameters, "
                f"got {len(self.params)}"
            )
        p = self.params
        if self.shape == "gaussian":
            if p[1] <= 0:
                raise KbValidationError("gaussian sigma must be > 0")
        elif list(p) != sorted(p):
            raise KbValidationError(f"fmf {self.shape} parameters must be ordered: {p}")

    def __call__(self, x: float) -> float:
        p = self.params
        if self.shape == "gaussian":
            mu, sigma = p
            return math.exp(-((x - mu) ** 2) / (2 * sigma * sigma))
        if self.shape == "crisp":
            return 1.0 if p[0] <= x <= p[1] else 0.0
        if self.shape == "triangular":
            a, b, c = p
            if x < a or x > c:
                return 0.0
            if x <= b:
                return (x - a) / (b - a) if b > a else 1.0
            return (c - x) / (c - b) if c > b else 1.0
        a, b, c, d = p
        if x < a or x > d:
            return 0.0
        if x < b:
            return (x - a) / (b - a)
        if x <= c:
            return 1.0
        return (d - x) / (d - c)


@dataclass(frozen=True)
class LinguisticTerm:
    """A named numeric range of a feature, e.g. ``medium_high = [10, 19]``.

    ``upper`` may be a saturation bound standing in for an unbounded range;
    ``saturated`` records that.  ``fmfs`` maps variant name (``triangular`` /
    ``gaussian``) to a membership function; terms modelled with a single
    function store it under its shape family and serve it for any variant.
    """

    label: str
    lower: float
    upper: float
    fmfs: dict[str, Fmf] = field(default_factory=dict)
    saturated: bool = False

    def __post_init__(self):
        if self.lower > self.upper:
            raise KbValidationError(
                f"term {self.label}: lower {self.lower} > upper {self.upper}"
            )

    def fmf(self, variant: str | None = None) -> Fmf:
        """Membership function for ``variant``, falling back to the sole one."""
        if variant is not None and variant in self.fmfs:
            return self.fmfs[variant]
        if not self.fmfs:
            raise KbValidationError(f"term {self.label}: no membership function declared")
        return next(iter(self.fmfs.values()))

    def contains(self, value: float) -> bool:
        """Crisp range membership; saturated terms are unbounded above."""
        if self.saturated:
            return value >= self.lower
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class Feature:
    name: str
    weight: int
    terms: tuple[LinguisticTerm, ...]
    domain_min: float
    domain_max: float

    def __post_init__(self):
        if not 0 <= self.weight <= MAX_FEATURE_WEIGHT:
            raise KbValidationError(
                f"feature {self.name}: weight {self.weight} outside [0, {MAX_FEATURE_WEIGHT}]"
            )
        ordered = sorted(self.terms, key=lambda t: (t.lower, t.upper))
        for prev, cur in zip(ordered, ordered[1:]):
            if cur.lower < prev.upper:
                raise KbValidationError(
                    f"feature {self.name}: terms {prev.label} and {cur.label} overlap"
                )
        for t in self.terms:
            if t.lower < self.domain_min or (t.upper > self.domain_max):
                raise KbValidationError(
                    f"feature {self.name}: term {t.label} outside domain "
                    f"[{self.domain_min}, {self.domain_max}]"
                )

    def term(self, label: str) -> LinguisticTerm:
        for t in self.terms:
            if t.label == label:
                return t
        raise KeyError(f"feature {self.name} has no term {label!r}")

    def active_term(self, value: float) -> LinguisticTerm | None:
        """The term whose crisp range holds ``value``.

        Adjacent closed ranges may share an endpoint; the tie goes to the
        lower-ranged term (terms are scanned in ascending range order).
        """
        for t in sorted(self.terms, key=lambda t: (t.lower, t.upper)):
            if t.contains(value):
                return t
        return None


@dataclass(frozen=True)
class TrustLevel:
    """A consequent level with its numeric range and membership functions."""

    label: str
    lower: float
    upper: float
    fmfs: dict[str, Fmf] = field(default_factory=dict)

    def fmf(self, variant: str | None = None) -> Fmf:
        if variant is not None and variant in self.fmfs:
            return self.fmfs[variant]
        if not self.fmfs:
            raise KbValidationError(f"trust level {self.label}: no membership function declared")
        return next(iter(self.fmfs.values()))


# A premise is a (feature, term) pair; an antecedent is a DNF over premises:
# a tuple of disjuncts, each a tuple of conjoined premises.
Premise = tuple[str, str]
Dnf = tuple[tuple[Premise, ...], ...]


@dataclass(frozen=True)
class Rule:
    label: str
    antecedent: Dnf
    consequent_level: str

    def features(self) -> set[str]:
        return {f for conj in self.antecedent for (f, _t) in conj}


@dataclass(frozen=True)
class RuleRef:
    label: str


@dataclass(frozen=True)
class Contradiction:
    """A meta-rule: when its antecedent holds, its targets are retracted.

    ``targets`` normally holds one label; a group target is expanded at parse
    time into the member labels.  ``unresolved`` lists targets that name no
    declared rule or contradiction (kept, surfaced as warnings, never fired).
    ``mutual_with`` links the twin of a mutual-exclusion pair.
    """

    label: str
    antecedent: RuleRef | Dnf
    targets: tuple[str, ...]
    unresolved: tuple[str, ...] = ()
    mutual_with: str | None = None

    def features(self, kb: "KnowledgeBase") -> set[str]:
        if isinstance(self.antecedent, RuleRef):
            return kb.rules[self.antecedent.label].features()
        return {f for conj in self.antecedent for (f, _t) in conj}


@dataclass(frozen=True)
class KnowledgeBase:
    id: str
    features: dict[str, Feature]
    trust_levels: dict[str, TrustLevel]
    rules: dict[str, Rule]
    contradictions: dict[str, Contradiction]

    def validate(self) -> None:
        """Check cross-references and the trust-level tiling of [0, 1]."""
        levels = sorted(self.trust_levels.values(), key=lambda l: (l.lower, l.upper))
        if not levels:
            raise KbValidationError("no trust levels declared")
        if levels[0].lower != 0.0 or levels[-1].upper != 1.0:
            raise KbValidationError("trust levels must span [0, 1]")
        for prev, cur in zip(levels, levels[1:]):
            if cur.lower != prev.upper:
                raise KbValidationError(
                    f"trust levels {prev.label} and {cur.label} do not tile [0, 1]"
                )
        for rule in self.rules.values():
            self._check_dnf(rule.antecedent, f"rule {rule.label}")
            if rule.consequent_level not in self.trust_levels:
                raise KbValidationError(
                    f"rule {rule.label}: unknown trust level {rule.consequent_level!r}"
                )
        for c in self.contradictions.values():
            if isinstance(c.antecedent, RuleRef):
                if c.antecedent.label not in self.rules:
                    raise KbValidationError(
                        f"contradiction {c.label}: unknown rule {c.antecedent.label!r}"
                    )
            else:
                self._check_dnf(c.antecedent, f"contradiction {c.label}")
            for t in c.targets:
                if t not in self.rules and t not in self.contradictions:
                    raise KbValidationError(
                        f"contradiction {c.label}: dangling target {t!r}"
                    )

    def _check_dnf(self, dnf: Dnf, where: str) -> None:
        if not dnf or any(not conj for conj in dnf):
            raise KbValidationError(f"{where}: empty antecedent")
        for conj in dnf:
            for fname, tlabel in conj:
                feat = self.features.get(fname)
                if feat is None:
                    raise KbValidationError(f"{where}: unknown feature {fname!r}")
                try:
                    feat.term(tlabel)
                except KeyError:
                    raise KbValidationError(
                        f"{where}: feature {fname} has no term {tlabel!r}"
                    ) from None

    def rule_weight(self, rule_label: str) -> int:
        """Weight of a rule: max weight over its antecedent's features."""
        rule = self.rules[rule_label]
        return max(self.features[f].weight for f in rule.features())


@dataclass(frozen=True)
class ContradictionGraph:
    """Contradiction-on-contradiction structure of a knowledge base.

    ``edges[x]`` holds the contradiction labels retracted by ``x``.  ``layers``
    are Kahn levels over the cycle condensation, root first; every node of a
    strongly connected component shares its component's layer.  ``cyclic_groups``
    lists the components with more than one node.
    """

    nodes: tuple[str, ...]
    edges: dict[str, tuple[str, ...]]
    layers: tuple[tuple[str, ...], ...]
    cyclic_groups: tuple[frozenset[str], ...]


def contradiction_graph(kb: KnowledgeBase) -> ContradictionGraph:
    nodes = sorted(kb.contradictions)
    edges = {
        x: tuple(sorted(t for t in kb.contradictions[x].targets if t in kb.contradictions))
        for x in nodes
    }
    comp_of = _tarjan_scc(nodes, edges)
    comps: dict[int, list[str]] = {}
    for n, c in comp_of.items():
        comps.setdefault(c, []).append(n)
    # longest-path depth of each component in the condensation
    comp_succ = {
        c: {comp_of[t] for n in members for t in edges[n] if comp_of[t] != c}
        for c, members in comps.items()
    }
    depth: dict[int, int] = {}

    def comp_depth(c: int) -> int:
        if c not in depth:
            preds = [d for d in comps if c in comp_succ[d]]
            depth[c] = 1 + max((comp_depth(p) for p in preds), default=-1)
        return depth[c]

    for c in comps:
        comp_depth(c)
    n_layers = 1 + max(depth.values(), default=0)
    layers = [sorted(n for n in nodes if depth[comp_of[n]] == i) for i in range(n_layers)]
    cyclic = sorted(
        (frozenset(m) for m in comps.values() if len(m) > 1),
        key=lambda s: sorted(s),
    )
    return ContradictionGraph(
        nodes=tuple(nodes),
        edges=edges,
        layers=tuple(tuple(l) for l in layers),
        cyclic_groups=tuple(cyclic),
    )


def _tarjan_scc(nodes: list[str], edges: dict[str, tuple[str, ...]]) -> dict[str, int]:
    """Iterative Tarjan; returns node -> component id (deterministic)."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    comp_of: dict[str, int] = {}
    counter = iter(range(len(nodes) * 2 + 1))
    n_comps = 0

    for root in nodes:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            node, ei = work[-1]
            if ei == 0:
                index[node] = low[node] = next(counter)
                stack.append(node)
                on_stack.add(node)
            advanced = False
            for j in range(ei, len(edges[node])):
                succ = edges[node][j]
                if succ not in index:
                    work[-1] = (node, j + 1)
                    work.append((succ, 0))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp_of[w] = n_comps
                    if w == node:
                        break
                n_comps += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return comp_of


def trust_level_range(kb: KnowledgeBase, level: str) -> tuple[float, float]:
    """Numeric range of a declared trust level."""
    tl = kb.trust_levels.get(level)
    if tl is None:
        raise KeyError(f"unknown trust level {level!r}")
    return (tl.lower, tl.upper)
