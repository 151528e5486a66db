"""Five-layer defeasible argumentation over a knowledge base.

Layer 1-2 turn rules into forecast arguments and contradictions into
mitigating arguments with attacks (mutual-exclusion contradiction pairs
become rebuttal attacks directly between the two forecast arguments).
Layer 3 elicits the per-editor sub-framework, optionally filtering attacks
by argument strength.  Layer 4 computes acceptance (grounded, complete,
preferred, stable labellings, or categoriser scores).  Layer 5 accrues the
accepted forecast-argument values into one scalar.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import expert
from .kb.model import Dnf, KnowledgeBase, RuleRef

log = logging.getLogger(__name__)

IN, OUT, UNDEC = "in", "out", "undec"
ENUMERATION_CAP = 24
CAT_TIE_EPS = 1e-9


class FrameworkTooLargeError(ValueError):
    """Exact labelling enumeration refused; use grounded or categoriser."""


@dataclass(frozen=True)
class Argument:
    label: str
    kind: str  # "forecast" | "mitigating"
    premises: Dnf
    strength: int
    consequent_level: str | None = None
    source: str | None = None  # rule/contradiction label it came from


@dataclass(frozen=True)
class ArgumentationFramework:
    arguments: dict[str, Argument]
    attacks: tuple[tuple[str, str], ...]
    attack_kinds: dict[tuple[str, str], str] = field(default_factory=dict)

    def attackers(self) -> dict[str, tuple[str, ...]]:
        inc: dict[str, list[str]] = {a: [] for a in self.arguments}
        for src, tgt in self.attacks:
            inc[tgt].append(src)
        return {a: tuple(v) for a, v in inc.items()}


@dataclass(frozen=True)
class Labelling:
    labels: dict[str, str]

    def in_set(self) -> frozenset[str]:
        return frozenset(a for a, l in self.labels.items() if l == IN)

    def out_set(self) -> frozenset[str]:
        return frozenset(a for a, l in self.labels.items() if l == OUT)

    def undec_set(self) -> frozenset[str]:
        return frozenset(a for a, l in self.labels.items() if l == UNDEC)


def build_af(kb: KnowledgeBase) -> ArgumentationFramework:
    """Arguments and attacks of a whole knowledge base.

    Every rule yields a forecast argument; every directed contradiction a
    mitigating argument attacking its targets (premise-based antecedents are
    undercutting attacks, rule-based ones undermining).  The two halves of a
    mutual-exclusion pair collapse into rebuttal attacks straight between
    the conflicting forecast arguments.  Unresolved targets yield no attack.
    """
    args: dict[str, Argument] = {}
    attacks: list[tuple[str, str]] = []
    kinds: dict[tuple[str, str], str] = {}
    for rule in kb.rules.values():
        args[rule.label] = Argument(
            label=rule.label,
            kind="forecast",
            premises=rule.antecedent,
            strength=kb.rule_weight(rule.label),
            consequent_level=rule.consequent_level,
            source=rule.label,
        )
    for c in kb.contradictions.values():
        if c.unresolved:
            log.warning("contradiction %s: unresolved target(s) %s; attack omitted",
                        c.label, ", ".join(c.unresolved))
        if c.mutual_with is not None:
            src = c.antecedent.label
            for tgt in c.targets:
                attacks.append((src, tgt))
                kinds[(src, tgt)] = "rebuttal"
            continue
        if isinstance(c.antecedent, RuleRef):
            premises = kb.rules[c.antecedent.label].antecedent
            attack_kind = "undermining"
        else:
            premises = c.antecedent
            attack_kind = "undercutting"
        strength = max(kb.features[f].weight for conj in premises for (f, _t) in conj)
        args[c.label] = Argument(
            label=c.label,
            kind="mitigating",
            premises=premises,
            strength=strength,
            source=c.label,
        )
        for tgt in c.targets:
            attacks.append((c.label, tgt))
            kinds[(c.label, tgt)] = attack_kind
    return ArgumentationFramework(args, tuple(attacks), kinds)


def elicit_subaf(af: ArgumentationFramework, features, kb: KnowledgeBase,
                 use_strength: bool = False) -> ArgumentationFramework:
    """Sub-framework of activated arguments; an attack survives when both
    endpoints are active and, under strength filtering, the source is at
    least as strong as the target."""
    active = {
        label: arg for label, arg in af.arguments.items()
        if expert.antecedent_holds(arg.premises, features, kb)
    }
    attacks = []
    kinds = {}
    for src, tgt in af.attacks:
        if src not in active or tgt not in active:
            continue
        if use_strength and active[src].strength < active[tgt].strength:
            continue
        attacks.append((src, tgt))
        kinds[(src, tgt)] = af.attack_kinds.get((src, tgt), "undermining")
    return ArgumentationFramework(active, tuple(attacks), kinds)


def grounded(af: ArgumentationFramework) -> Labelling:
    """The unique maximal-undec reinstatement labelling, by fixpoint
    iteration: in when all attackers are out, out when some attacker is in."""
    attackers = af.attackers()
    labels: dict[str, str] = {}
    changed = True
    while changed:
        changed = False
        for a in af.arguments:
            if a in labels:
                continue
            if all(labels.get(b) == OUT for b in attackers[a]):
                labels[a] = IN
                changed = True
            elif any(labels.get(b) == IN for b in attackers[a]):
                labels[a] = OUT
                changed = True
    for a in af.arguments:
        labels.setdefault(a, UNDEC)
    return Labelling({a: labels[a] for a in af.arguments})


def _check_labelling(labels: dict[str, str], attackers: dict[str, tuple[str, ...]]) -> bool:
    """Both reinstatement conditions of a total labelling."""
    for a, lab in labels.items():
        has_in = any(labels[b] == IN for b in attackers[a])
        all_out = all(labels[b] == OUT for b in attackers[a])
        if lab == IN:
            if not all_out:
                return False
        elif lab == OUT:
            if not has_in:
                return False
        else:
            if has_in or all_out:
                return False
    return True


def complete(af: ArgumentationFramework) -> list[Labelling]:
    """All complete labellings.

    Every complete labelling extends the grounded one on its in/out parts,
    so only the grounded-undec region is searched, by branching each of its
    arguments over in/out/undec with early pruning and a final reinstatement
    check.  Refuses frameworks whose undecided region exceeds
    ENUMERATION_CAP arguments.
    """
    attackers = af.attackers()
    base = grounded(af).labels
    undec_args = sorted(a for a, l in base.items() if l == UNDEC)
    if len(undec_args) > ENUMERATION_CAP:
        raise FrameworkTooLargeError(
            f"{len(undec_args)} arguments in the undecided region exceeds the "
            f"exact-enumeration cap of {ENUMERATION_CAP}; use grounded or "
            f"categoriser semantics"
        )
    if not undec_args:
        return [Labelling(base)]
    results: list[Labelling] = []
    assignment: dict[str, str] = {}

    def no_in_attacker_yet(a: str) -> bool:
        # pruning only; unassigned attackers still read undec from the base
        return all(assignment.get(b, base[b]) != IN for b in attackers[a])

    def search(i: int):
        if i == len(undec_args):
            labels = dict(base)
            labels.update(assignment)
            if _check_labelling(labels, attackers):
                results.append(Labelling(labels))
            return
        a = undec_args[i]
        for lab in (IN, OUT, UNDEC):
            if lab == IN and not no_in_attacker_yet(a):
                continue
            assignment[a] = lab
            search(i + 1)
            del assignment[a]

    search(0)
    return results


def preferred(af: ArgumentationFramework) -> list[Labelling]:
    """Complete labellings with subset-maximal in-sets."""
    all_complete = complete(af)
    in_sets = [l.in_set() for l in all_complete]
    return [
        l for l, s in zip(all_complete, in_sets)
        if not any(s < other for other in in_sets)
    ]


def stable(af: ArgumentationFramework) -> list[Labelling]:
    """Complete labellings with no undec argument."""
    return [l for l in complete(af) if not l.undec_set()]


def categoriser(af: ArgumentationFramework, tolerance: float = 1e-9,
                max_iter: int = 10**5, damping: float = 0.5) -> dict[str, float]:
    """Fixed point of ``Cat(a) = 1 / (1 + sum of attacker scores)``.

    Damped Jacobi iteration from all ones; unattacked arguments are pinned at
    exactly 1.  One undamped application after convergence returns scores
    whose residual stays below the tolerance while acyclic chains come out
    exact.
    """
    attackers = af.attackers()

    def apply(scores: dict[str, float]) -> dict[str, float]:
        return {
            a: 1.0 if not attackers[a] else 1.0 / (1.0 + sum(scores[b] for b in attackers[a]))
            for a in af.arguments
        }

    scores = {a: 1.0 for a in af.arguments}
    for _ in range(max_iter):
        nxt = apply(scores)
        residual = max((abs(nxt[a] - scores[a]) for a in scores), default=0.0)
        if residual < tolerance / 2:
            return apply(scores)
        scores = {a: scores[a] + damping * (nxt[a] - scores[a]) for a in scores}
    raise RuntimeError(
        f"categoriser did not converge within {max_iter} iterations (residual {residual:.3e})"
    )


def argument_value(kb: KnowledgeBase, arg: Argument, features) -> float:
    """Trust value of an activated forecast argument (same valuation as the
    expert engine's rules)."""
    act = expert.evaluate_antecedent(arg.premises, features, kb)
    level = kb.trust_levels[arg.consequent_level]
    return expert.rule_value(act.v, act.r_min, act.r_max, level.lower, level.upper)


def _accrue_values(pairs: list[tuple[float, int]], weighted: bool) -> float | None:
    if not pairs:
        return None
    if not weighted:
        return sum(v for v, _w in pairs) / len(pairs)
    total = sum(w for _v, w in pairs)
    if total == 0:
        log.warning("total argument strength is 0; falling back to unweighted mean")
        return sum(v for v, _w in pairs) / len(pairs)
    return sum(v * w for v, w in pairs) / total


def accrue_extensions(subaf: ArgumentationFramework, labellings: list[Labelling],
                      values: dict[str, float], weighted: bool) -> float | None:
    """Cardinality accrual: keep the largest extensions (all accepted
    arguments counted); ties average the per-extension trusts.  Extensions
    without an accepted forecast argument contribute nothing."""
    if not labellings:
        return None
    sizes = [len(l.in_set()) for l in labellings]
    top = max(sizes)
    trusts = []
    for l, size in zip(labellings, sizes):
        if size != top:
            continue
        pairs = [
            (values[a], subaf.arguments[a].strength)
            for a in sorted(l.in_set())
            if subaf.arguments[a].kind == "forecast"
        ]
        trust = _accrue_values(pairs, weighted)
        if trust is not None:
            trusts.append(trust)
    if not trusts:
        return None
    return sum(trusts) / len(trusts)


def accrue_categoriser(subaf: ArgumentationFramework, scores: dict[str, float],
                       values: dict[str, float], weighted: bool) -> float | None:
    """Top-ranked accrual over forecast arguments only; mitigating arguments
    have already played their part in the ranking."""
    forecast = [a for a, arg in subaf.arguments.items() if arg.kind == "forecast"]
    if not forecast:
        return None
    best = max(scores[a] for a in forecast)
    pairs = [
        (values[a], subaf.arguments[a].strength)
        for a in sorted(forecast)
        if scores[a] >= best - CAT_TIE_EPS
    ]
    return _accrue_values(pairs, weighted)


def run_argumentation(
    kb: KnowledgeBase,
    features,
    semantics: str,
    use_strength: bool,
    af: ArgumentationFramework | None = None,
) -> float | None:
    """Full per-editor pipeline: elicit, label, accrue."""
    af = af or build_af(kb)
    subaf = elicit_subaf(af, features, kb, use_strength)
    values = {
        a: argument_value(kb, arg, features)
        for a, arg in subaf.arguments.items()
        if arg.kind == "forecast"
    }
    if semantics == "categoriser":
        scores = categoriser(subaf)
        return accrue_categoriser(subaf, scores, values, weighted=use_strength)
    if semantics == "grounded":
        labellings = [grounded(subaf)]
    elif semantics == "preferred":
        labellings = preferred(subaf)
    elif semantics == "stable":
        labellings = stable(subaf)
    else:
        raise ValueError(f"unknown semantics {semantics!r}")
    return accrue_extensions(subaf, labellings, values, weighted=use_strength)


def explain(kb: KnowledgeBase, features, semantics: str, use_strength: bool,
            af: ArgumentationFramework | None = None) -> dict:
    """Structured trace of one editor's argumentation run."""
    af = af or build_af(kb)
    subaf = elicit_subaf(af, features, kb, use_strength)
    values = {
        a: argument_value(kb, arg, features)
        for a, arg in subaf.arguments.items()
        if arg.kind == "forecast"
    }
    trace: dict = {
        "activated_arguments": sorted(subaf.arguments),
        "kept_attacks": [
            {"from": s, "to": t, "kind": subaf.attack_kinds[(s, t)]}
            for s, t in subaf.attacks
        ],
        "forecast_values": {a: values[a] for a in sorted(values)},
    }
    if semantics == "categoriser":
        scores = categoriser(subaf)
        trace["scores"] = {a: scores[a] for a in sorted(scores)}
        trace["trust"] = accrue_categoriser(subaf, scores, values, weighted=use_strength)
    else:
        labellings = [grounded(subaf)] if semantics == "grounded" else (
            preferred(subaf) if semantics == "preferred" else stable(subaf))
        trace["labellings"] = [
            {a: l.labels[a] for a in sorted(l.labels)} for l in labellings
        ]
        trace["trust"] = accrue_extensions(subaf, labellings, values, weighted=use_strength)
    return trace
