"""Knowledge-base DSL (``.kbl``): parsing, pretty-printing and linting.

A KB file is line oriented::

    # comment
    finding costophrenic_blunting
    diagnosis pleural_effusion
    rule eff1: costophrenic_blunting -> pleural_effusion

Formula operators, tightest first: ``!``, ``&``, ``|``, ``->``, ``<->``.
``->`` and ``<->`` associate to the right.  Atoms must be declared before a
rule mentions them.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

from entail_audit.logic import (
    And,
    Atom,
    Const,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    atoms_of,
    conj,
    dpll_sat,
    tseitin_compile,
)

IDENT = re.compile(r"[a-z_][a-z0-9_]*")

REACHABILITY_CAP = 20


class KBError(ValueError):
    """Base class for knowledge-base parse errors. Carries a 1-based position."""

    def __init__(self, message: str, line: int, column: int = 1) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class KBSyntaxError(KBError):
    pass


class UndeclaredAtomError(KBError):
    pass


class DuplicateDeclarationError(KBError):
    pass


class DuplicateRuleError(KBError):
    pass


@dataclass(frozen=True)
class Rule:
    name: str
    formula: Formula


@dataclass(frozen=True)
class Ontology:
    """Findings F, diagnoses D and rules K.

    ``atoms`` lists F and D interleaved in declaration order, so
    ``atoms[i].index == i``.
    """

    atoms: tuple[Atom, ...]
    rules: tuple[Rule, ...] = ()

    @cached_property
    def findings(self) -> tuple[Atom, ...]:
        return tuple(a for a in self.atoms if a.kind == "finding")

    @cached_property
    def diagnoses(self) -> tuple[Atom, ...]:
        return tuple(a for a in self.atoms if a.kind == "diagnosis")

    @cached_property
    def by_name(self) -> dict[str, Atom]:
        return {a.name: a for a in self.atoms}

    def atom(self, name: str) -> Atom:
        return self.by_name[name]

    @cached_property
    def knowledge(self) -> Formula:
        """Conjunction of every rule (``TRUE`` for an empty KB)."""
        return conj(r.formula for r in self.rules)

    @classmethod
    def build(
        cls,
        findings: list[str],
        diagnoses: list[str],
        rules: dict[str, str] | None = None,
    ) -> "Ontology":
        """Convenience constructor going through the DSL, findings first."""
        lines = [f"finding {f}" for f in findings]
        lines += [f"diagnosis {d}" for d in diagnoses]
        lines += [f"rule {name}: {text}" for name, text in (rules or {}).items()]
        return parse_kb("\n".join(lines))


# ---------------------------------------------------------------- tokenizer

_TOKEN = re.compile(
    r"\s*(?:(?P<op><->|->|[!&|()])|(?P<ident>[a-z_][a-z0-9_]*)|(?P<bad>\S))"
)


@dataclass
class _Token:
    kind: str  # "op", "ident" or "end"
    text: str
    column: int


def _tokenize(text: str, line: int, offset: int) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        assert m is not None
        column = offset + m.start(m.lastgroup) + 1
        if m.lastgroup == "bad":
            raise KBSyntaxError(f"unexpected character {m.group('bad')!r}", line, column)
        tokens.append(_Token(m.lastgroup, m.group(m.lastgroup), column))
        pos = m.end()
    tokens.append(_Token("end", "", offset + len(text.rstrip()) + 1))
    return tokens


class _FormulaParser:
    """Recursive descent, one method per precedence level."""

    def __init__(self, tokens: list[_Token], atoms: dict[str, Atom], line: int) -> None:
        self.tokens = tokens
        self.pos = 0
        self.atoms = atoms
        self.line = line

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def accept(self, op: str) -> bool:
        tok = self.peek()
        if tok.kind == "op" and tok.text == op:
            self.pos += 1
            return True
        return False

    def fail(self, message: str) -> KBSyntaxError:
        tok = self.peek()
        found = "end of line" if tok.kind == "end" else repr(tok.text)
        return KBSyntaxError(f"{message}, found {found}", self.line, tok.column)

    def parse(self) -> Formula:
        result = self.iff()
        if self.peek().kind != "end":
            raise self.fail("expected operator")
        return result

    def iff(self) -> Formula:
        left = self.implies()
        if self.accept("<->"):
            return Iff(left, self.iff())
        return left

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.accept("->"):
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.accept("|"):
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.accept("&"):
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Formula:
        if self.accept("!"):
            return Not(self.unary())
        if self.accept("("):
            inner = self.iff()
            if not self.accept(")"):
                raise self.fail("expected ')'")
            return inner
        tok = self.peek()
        if tok.kind == "ident":
            self.pos += 1
            try:
                return self.atoms[tok.text]
            except KeyError:
                raise UndeclaredAtomError(
                    f"atom {tok.text!r} used before declaration", self.line, tok.column
                ) from None
        raise self.fail("expected atom, '!' or '('")


def parse_formula(text: str, atoms: dict[str, Atom], line: int = 1, offset: int = 0) -> Formula:
    return _FormulaParser(_tokenize(text, line, offset), atoms, line).parse()


_DECL = re.compile(r"(finding|diagnosis)\s+(\S+)\s*$")
_RULE = re.compile(r"rule\s+([^\s:]+)\s*:(.*)$")


def parse_kb(text: str) -> Ontology:
    """Parse KB source into an :class:`Ontology`.

    Raises a :class:`KBError` subclass naming the offending line and column.
    """
    atoms: dict[str, Atom] = {}
    rules: list[Rule] = []
    rule_names: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.lstrip()
        if not stripped:
            continue
        indent = len(line) - len(stripped)

        m = _DECL.match(stripped)
        if m:
            kind, name = m.groups()
            column = indent + m.start(2) + 1
            if not IDENT.fullmatch(name):
                raise KBSyntaxError(f"invalid identifier {name!r}", lineno, column)
            if name in atoms:
                raise DuplicateDeclarationError(f"{name!r} already declared", lineno, column)
            atoms[name] = Atom(name, kind, len(atoms))
            continue

        m = _RULE.match(stripped)
        if m:
            name = m.group(1)
            column = indent + m.start(1) + 1
            if not IDENT.fullmatch(name):
                raise KBSyntaxError(f"invalid rule name {name!r}", lineno, column)
            if name in rule_names:
                raise DuplicateRuleError(f"rule {name!r} already defined", lineno, column)
            body_offset = indent + m.start(2)
            formula = parse_formula(m.group(2), atoms, lineno, body_offset)
            rule_names.add(name)
            rules.append(Rule(name, formula))
            continue

        keyword = stripped.split(None, 1)[0]
        if keyword in ("finding", "diagnosis", "rule"):
            raise KBSyntaxError(f"malformed {keyword} line", lineno, indent + 1)
        raise KBSyntaxError(f"unknown statement {keyword!r}", lineno, indent + 1)

    return Ontology(tuple(atoms.values()), tuple(rules))


def load_kb(path) -> Ontology:
    with open(path, encoding="utf-8") as fh:
        return parse_kb(fh.read())


# ---------------------------------------------------------- pretty-printing

_PRECEDENCE = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5, Atom: 6}
_SYMBOL = {Iff: "<->", Implies: "->", Or: "|", And: "&"}


def format_formula(formula: Formula) -> str:
    """Render ``formula`` in DSL syntax with the fewest parentheses that
    re-parse to the same tree."""
    if isinstance(formula, Atom):
        return formula.name
    if isinstance(formula, Const):
        raise ValueError("the DSL has no constant literals")
    level = _PRECEDENCE[type(formula)]

    def sub(child: Formula, strict: bool) -> str:
        text = format_formula(child)
        child_level = _PRECEDENCE[type(child)]
        if child_level < level or (strict and child_level == level):
            return f"({text})"
        return text

    if isinstance(formula, Not):
        return "!" + sub(formula.child, False)
    if isinstance(formula, (And, Or)):
        # nested same-operator children were parenthesized in the source
        return f" {_SYMBOL[type(formula)]} ".join(sub(c, True) for c in formula.children)
    return f"{sub(formula.left, True)} {_SYMBOL[type(formula)]} {sub(formula.right, False)}"


def format_kb(ontology: Ontology) -> str:
    lines = [f"{a.kind} {a.name}" for a in ontology.atoms]
    lines += [f"rule {r.name}: {format_formula(r.formula)}" for r in ontology.rules]
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ linting


class Reachability(str, Enum):
    ENTAILABLE = "entailable_by_some_evidence"
    NEVER = "never_entailed"
    ALWAYS = "always_entailed"
    UNKNOWN = "unknown"


@dataclass
class LintReport:
    global_consistent: bool
    reachability: dict[str, Reachability]
    # diagnosis -> a finding vector (name -> bool) under which it is entailed
    witnesses: dict[str, dict[str, bool]] = field(default_factory=dict)
    consistent_vectors: int | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return self.global_consistent and not self.warnings

    def to_dict(self) -> dict:
        return {
            "global_consistent": self.global_consistent,
            "consistent_vectors": self.consistent_vectors,
            "reachability": {d: r.value for d, r in self.reachability.items()},
            "witnesses": self.witnesses,
            "warnings": self.warnings,
        }


def _is_sat(formula: Formula, n: int) -> bool:
    return dpll_sat(tseitin_compile(formula, n)).satisfiable


def lint_kb(ontology: Ontology) -> LintReport:
    """Check K for global consistency and classify each diagnosis by whether
    any finding vector can force it.

    Reachability enumerates all ``2**|F|`` vectors and is skipped (``unknown``)
    above :data:`REACHABILITY_CAP` findings.
    """
    n = len(ontology.atoms)
    knowledge = ontology.knowledge
    findings = ontology.findings
    diagnoses = ontology.diagnoses
    warnings: list[str] = []

    consistent = _is_sat(knowledge, n)
    if not consistent:
        warnings.append("knowledge base is inconsistent: the rules admit no model")

    used = {a.name for r in ontology.rules for a in atoms_of(r.formula)}
    for a in ontology.atoms:
        if a.name not in used:
            warnings.append(f"{a.kind} {a.name!r} is not referenced by any rule")

    if len(findings) > REACHABILITY_CAP:
        warnings.append(
            f"{len(findings)} findings exceeds the enumeration cap of "
            f"{REACHABILITY_CAP}; reachability not computed"
        )
        return LintReport(
            consistent, {d.name: Reachability.UNKNOWN for d in diagnoses}, warnings=warnings
        )

    hits = {d.name: 0 for d in diagnoses}
    witnesses: dict[str, dict[str, bool]] = {}
    n_consistent = 0
    for row in itertools.product((False, True), repeat=len(findings)):
        evidence = conj(a if v else Not(a) for a, v in zip(findings, row))
        context = conj((evidence, knowledge))
        if not _is_sat(context, n):
            continue
        n_consistent += 1
        for d in diagnoses:
            if not _is_sat(conj((context, Not(d))), n):
                hits[d.name] += 1
                witnesses.setdefault(d.name, {a.name: v for a, v in zip(findings, row)})

    reach = {}
    for d in diagnoses:
        if hits[d.name] == 0:
            reach[d.name] = Reachability.NEVER
            warnings.append(f"diagnosis {d.name!r} is never entailed by any consistent evidence")
        elif hits[d.name] == n_consistent:
            reach[d.name] = Reachability.ALWAYS
            warnings.append(f"diagnosis {d.name!r} is entailed by every consistent evidence vector")
        else:
            reach[d.name] = Reachability.ENTAILABLE
    witnesses = {d.name: witnesses[d.name] for d in diagnoses if d.name in witnesses}
    return LintReport(consistent, reach, witnesses, n_consistent, warnings)
