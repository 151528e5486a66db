"""Parser and serializer for the line-oriented knowledge-base DSL.

Grammar (one declaration per line, ``#`` starts a comment)::

    kb <id>
    feature <name> weight <0-8> domain [<lo>, <hi>] {
        term <label> = [<lo>, <hi>|inf] fmf <shape>(<params>) [<shape>(<params>) ...]
    }
    trustlevel <label> = [<lo>, <hi>] fmf <shape>(<params>) [<shape>(<params>) ...]
    rule <L>: IF <expr> THEN trust is <level>
    contradiction <L>: IF (rule <L2> | <expr>) THEN NOT (rule|contradiction|group) <L3>
    contradiction <L>: rule <A> MUTEX rule <B>
    group <name> = { <label>, <label>, ... }

``<expr>`` is ``<feature> is <term>`` combined with AND/OR; AND binds tighter
and parentheses are allowed.  Antecedents are normalized to DNF.  ``inf`` in a
term range is replaced by the feature's domain upper bound (saturation).  A
``MUTEX`` declaration expands to the two directed contradictions ``<L>.a`` and
``<L>.b``.  Unresolved contradiction targets are kept and reported as warnings.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .model import (
    Contradiction,
    Feature,
    Fmf,
    KbValidationError,
    KnowledgeBase,
    LinguisticTerm,
    Rule,
    RuleRef,
    TrustLevel,
)

__all__ = ["ParseDiagnostic", "ParseResult", "KbParseError", "parse_kb", "serialize_kb", "load_builtin"]

BUILTIN_IDS = ("KB1", "KB2")


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" | "warning"
    line: int
    message: str

    def __str__(self):
        return f"{self.severity}: line {self.line}: {self.message}"


@dataclass
class ParseResult:
    kb: KnowledgeBase | None
    diagnostics: list[ParseDiagnostic]

    @property
    def errors(self) -> list[ParseDiagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]


class KbParseError(ValueError):
    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


_TOKEN = re.compile(r"\(|\)|\[|\]|\{|\}|,|=|:|[^\s()\[\]{},=:]+")


def _tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text)


# Rule and contradiction labels share one namespace, so the rule|contradiction
# keyword ahead of a target list is a reader hint; resolution is by lookup.


class _LineParser:
    """Token cursor over one logical line."""

    def __init__(self, tokens: list[str], line_no: int):
        self.tokens = tokens
        self.pos = 0
        self.line = line_no

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise _SyntaxError(self.line, "unexpected end of line")
        self.pos += 1
        return tok

    def expect(self, *want: str) -> str:
        tok = self.next()
        if tok not in want and tok.upper() not in want:
            raise _SyntaxError(self.line, f"expected {' or '.join(want)!r}, got {tok!r}")
        return tok

    def number(self) -> float:
        tok = self.next()
        try:
            return float(tok)
        except ValueError:
            raise _SyntaxError(self.line, f"expected a number, got {tok!r}") from None

    def done(self) -> bool:
        return self.pos >= len(self.tokens)


class _SyntaxError(Exception):
    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(message)


def parse_kb(source: str, kb_id: str | None = None) -> ParseResult:
    """Parse DSL text into a validated knowledge base.

    Returns the knowledge base together with all diagnostics; the knowledge
    base is ``None`` when any error-severity diagnostic was produced.
    """
    diags: list[ParseDiagnostic] = []
    features: dict[str, Feature] = {}
    trust_levels: dict[str, TrustLevel] = {}
    rules: dict[str, Rule] = {}
    groups: dict[str, tuple[str, ...]] = {}
    # raw contradictions: (line, label, antecedent, kind, target, mutual_with)
    raw_contras: list[tuple[int, str, object, str, str, str | None]] = []
    declared_id = kb_id

    def err(line: int, msg: str):
        diags.append(ParseDiagnostic("error", line, msg))

    def warn(line: int, msg: str):
        diags.append(ParseDiagnostic("warning", line, msg))

    lines = source.splitlines()
    in_feature: dict | None = None  # name, weight, domain, terms, line
    for idx, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        lp = _LineParser(_tokenize(text), idx)
        try:
            head = lp.next()
            if in_feature is not None:
                if head == "}":
                    f = in_feature
                    try:
                        features[f["name"]] = Feature(
                            name=f["name"],
                            weight=f["weight"],
                            terms=tuple(f["terms"]),
                            domain_min=f["domain"][0],
                            domain_max=f["domain"][1],
                        )
                    except KbValidationError as e:
                        err(f["line"], str(e))
                    in_feature = None
                elif head == "term":
                    _parse_term_line(lp, in_feature)
                else:
                    raise _SyntaxError(idx, f"expected 'term' or '}}' inside feature block, got {head!r}")
                continue
            if head == "kb":
                declared_id = lp.next()
            elif head == "feature":
                name = lp.next()
                if name in features:
                    err(idx, f"duplicate feature {name!r}")
                lp.expect("weight")
                weight = int(lp.number())
                lp.expect("domain")
                lo, hi = _range(lp)
                lp.expect("{")
                in_feature = {"name": name, "weight": weight, "domain": (lo, hi), "terms": [], "line": idx}
            elif head == "trustlevel":
                label = lp.next()
                if label in trust_levels:
                    err(idx, f"duplicate trust level {label!r}")
                lp.expect("=")
                lo, hi = _range(lp)
                if lo > hi:
                    raise _SyntaxError(idx, f"malformed range [{lo}, {hi}]")
                fmfs = _parse_fmfs(lp) if not lp.done() else {}
                trust_levels[label] = TrustLevel(label, lo, hi, fmfs)
            elif head == "rule":
                label = lp.next()
                if label in rules:
                    err(idx, f"duplicate rule {label!r}")
                lp.expect(":")
                lp.expect("IF")
                dnf = _parse_expr_dnf(lp)
                lp.expect("THEN")
                lp.expect("trust")
                lp.expect("is")
                level = lp.next()
                rules[label] = Rule(label, dnf, level)
            elif head == "contradiction":
                label = lp.next()
                lp.expect(":")
                tok = lp.peek()
                if tok == "rule" and "MUTEX" in lp.tokens:
                    lp.expect("rule")
                    a = lp.next()
                    lp.expect("MUTEX")
                    lp.expect("rule")
                    b = lp.next()
                    raw_contras.append((idx, f"{label}.a", RuleRef(a), "rule", (b,), f"{label}.b"))
                    raw_contras.append((idx, f"{label}.b", RuleRef(b), "rule", (a,), f"{label}.a"))
                else:
                    lp.expect("IF")
                    if lp.peek() == "rule":
                        lp.next()
                        ante: object = RuleRef(lp.next())
                    else:
                        ante = _parse_expr_dnf(lp)
                    lp.expect("THEN")
                    lp.expect("NOT")
                    kind = lp.expect("rule", "contradiction", "group")
                    targets = [lp.next()]
                    while lp.peek() == ",":
                        lp.next()
                        targets.append(lp.next())
                    raw_contras.append((idx, label, ante, kind, tuple(targets), None))
            elif head == "group":
                name = lp.next()
                if name in groups:
                    err(idx, f"duplicate group {name!r}")
                lp.expect("=")
                lp.expect("{")
                members = []
                while lp.peek() != "}":
                    tok = lp.next()
                    if tok != ",":
                        members.append(tok)
                lp.expect("}")
                groups[name] = tuple(members)
            else:
                raise _SyntaxError(idx, f"unknown declaration {head!r}")
            if in_feature is None and not lp.done() and head != "feature":
                raise _SyntaxError(idx, f"trailing tokens: {' '.join(lp.tokens[lp.pos:])}")
        except _SyntaxError as e:
            err(e.line, e.message)
        except (KbValidationError, ValueError) as e:
            err(idx, str(e))
    if in_feature is not None:
        err(in_feature["line"], f"feature {in_feature['name']!r} block never closed")
    if not features:
        err(len(lines) or 1, "no features declared")

    # second phase: resolve contradictions (labels, groups, targets)
    contradictions: dict[str, Contradiction] = {}
    seen = set(rules)
    declared_contras = {label for (_l, label, *_rest) in raw_contras}
    for line, label, ante, kind, raw_targets, mutual in raw_contras:
        if label in seen or label in contradictions:
            err(line, f"duplicate label {label!r}")
            continue
        if kind == "group":
            expanded: list[str] = []
            missing_group = False
            for g in raw_targets:
                members = groups.get(g)
                if members is None:
                    err(line, f"unknown group {g!r}")
                    missing_group = True
                else:
                    expanded.extend(members)
            if missing_group:
                continue
            raw_targets = tuple(expanded)
        targets = tuple(t for t in raw_targets if t in rules or t in declared_contras)
        unresolved = tuple(t for t in raw_targets if t not in rules and t not in declared_contras)
        for t in unresolved:
            warn(line, f"contradiction {label}: unresolved target {t!r}")
        if label in targets:
            warn(line, f"contradiction {label} targets itself")
        contradictions[label] = Contradiction(label, ante, targets, unresolved, mutual)

    if any(d.severity == "error" for d in diags):
        return ParseResult(None, _sorted(diags))
    kb = KnowledgeBase(
        id=declared_id or "KB",
        features=features,
        trust_levels=trust_levels,
        rules=rules,
        contradictions=contradictions,
    )
    try:
        kb.validate()
    except KbValidationError as e:
        err(0, str(e))
        return ParseResult(None, _sorted(diags))
    return ParseResult(kb, _sorted(diags))


def _sorted(diags: list[ParseDiagnostic]) -> list[ParseDiagnostic]:
    return sorted(diags, key=lambda d: (d.line, d.message))


def _range(lp: _LineParser) -> tuple[float, float]:
    lp.expect("[")
    lo = lp.number()
    lp.expect(",")
    hi = lp.number()
    lp.expect("]")
    if lo > hi:
        raise _SyntaxError(lp.line, f"malformed range [{lo}, {hi}]")
    return lo, hi


def _parse_fmfs(lp: _LineParser) -> dict[str, Fmf]:
    lp.expect("fmf")
    fmfs: dict[str, Fmf] = {}
    while not lp.done():
        shape = lp.next()
        lp.expect("(")
        params = []
        while lp.peek() != ")":
            tok = lp.next()
            if tok != ",":
                params.append(float(tok))
        lp.expect(")")
        fmf = Fmf(shape, tuple(params))
        variant = "gaussian" if shape == "gaussian" else "triangular"
        if variant in fmfs:
            raise _SyntaxError(lp.line, f"duplicate {variant!r} membership function")
        fmfs[variant] = fmf
    if not fmfs:
        raise _SyntaxError(lp.line, "missing membership function")
    return fmfs


def _parse_term_line(lp: _LineParser, feature_ctx: dict) -> None:
    label = lp.next()
    if any(t.label == label for t in feature_ctx["terms"]):
        raise _SyntaxError(lp.line, f"duplicate term {label!r}")
    lp.expect("=")
    lp.expect("[")
    lo = lp.number()
    lp.expect(",")
    tok = lp.next()
    saturated = tok == "inf"
    hi = feature_ctx["domain"][1] if saturated else float(tok)
    lp.expect("]")
    if lo > hi:
        raise _SyntaxError(lp.line, f"malformed range [{lo}, {hi}]")
    fmfs = _parse_fmfs(lp)
    feature_ctx["terms"].append(LinguisticTerm(label, lo, hi, fmfs, saturated))


def _parse_expr_dnf(lp: _LineParser) -> tuple:
    """Parse a premise expression into DNF; AND binds tighter than OR."""

    def atom():
        if lp.peek() == "(":
            lp.next()
            dnf = or_expr()
            lp.expect(")")
            return dnf
        feature = lp.next()
        lp.expect("is")
        term = lp.next()
        return (((feature, term),),)

    def and_expr():
        dnf = atom()
        while lp.peek() == "AND":
            lp.next()
            rhs = atom()
            dnf = tuple(l + r for l in dnf for r in rhs)
        return dnf

    def or_expr():
        dnf = and_expr()
        while lp.peek() == "OR":
            lp.next()
            dnf = dnf + and_expr()
        return dnf

    return or_expr()


def serialize_kb(kb: KnowledgeBase) -> str:
    """Emit canonical DSL text; ``parse_kb`` on it reproduces the KB."""
    out = [f"kb {kb.id}", ""]
    for f in kb.features.values():
        out.append(f"feature {f.name} weight {f.weight} domain [{f.domain_min!r}, {f.domain_max!r}] {{")
        for t in f.terms:
            hi = "inf" if t.saturated else repr(t.upper)
            out.append(f"    term {t.label} = [{t.lower!r}, {hi}] {_fmt_fmfs(t.fmfs)}")
        out.append("}")
    out.append("")
    for tl in kb.trust_levels.values():
        out.append(f"trustlevel {tl.label} = [{tl.lower!r}, {tl.upper!r}] {_fmt_fmfs(tl.fmfs)}")
    out.append("")
    for r in kb.rules.values():
        out.append(f"rule {r.label}: IF {_fmt_dnf(r.antecedent)} THEN trust is {r.consequent_level}")
    out.append("")
    emitted_mutex = set()
    for c in kb.contradictions.values():
        if c.mutual_with is not None:
            base = c.label.rsplit(".", 1)[0]
            if base in emitted_mutex:
                continue
            emitted_mutex.add(base)
            twin = kb.contradictions[c.mutual_with]
            out.append(f"contradiction {base}: rule {c.antecedent.label} MUTEX rule {twin.antecedent.label}")
            continue
        if isinstance(c.antecedent, RuleRef):
            ante = f"rule {c.antecedent.label}"
        else:
            ante = _fmt_dnf(c.antecedent)
        all_targets = c.targets + c.unresolved
        kind = "contradiction" if any(t in kb.contradictions for t in all_targets) else "rule"
        out.append(
            f"contradiction {c.label}: IF {ante} THEN NOT {kind} {', '.join(all_targets)}"
        )
    out.append("")
    return "\n".join(out)


def _fmt_fmfs(fmfs: dict[str, Fmf]) -> str:
    specs = []
    seen = set()
    for fmf in fmfs.values():
        key = (fmf.shape, fmf.params)
        if key in seen:
            continue
        seen.add(key)
        specs.append(f"{fmf.shape}({', '.join(repr(p) for p in fmf.params)})")
    return "fmf " + " ".join(specs)


def _fmt_dnf(dnf) -> str:
    parts = []
    for conj in dnf:
        inner = " AND ".join(f"{f} is {t}" for f, t in conj)
        parts.append(f"({inner})" if len(dnf) > 1 and len(conj) > 1 else inner)
    return " OR ".join(parts)


def load_builtin(kb_id: str, validate: bool = True) -> KnowledgeBase:
    """Load one of the shipped knowledge bases (``KB1`` or ``KB2``)."""
    if kb_id not in BUILTIN_IDS:
        raise ValueError(f"unknown builtin knowledge base {kb_id!r}; expected one of {BUILTIN_IDS}")
    text = resources.files(__package__).joinpath(f"data/{kb_id.lower()}.kb").read_text("utf-8")
    result = parse_kb(text, kb_id=kb_id)
    if result.kb is None:
        raise KbParseError(result.errors)
    return result.kb
