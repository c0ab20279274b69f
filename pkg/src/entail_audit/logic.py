"""Propositional formulas, Tseitin compilation to CNF and a DPLL decision procedure.

Formulas are immutable trees built from :class:`Atom` leaves and the
connectives below.  Atoms carry a dense integer index; CNF literals refer to
those indices so compiled problems stay independent of atom names.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

ATOM_KINDS = ("finding", "diagnosis", "auxiliary")

TRUTH_TABLE_CAP = 20


class IncompleteAssignmentError(KeyError):
    """An assignment does not cover every atom of the formula being evaluated."""


class CapacityError(ValueError):
    """Too many atoms for exhaustive enumeration."""


@dataclass(frozen=True)
class Atom:
    name: str
    kind: str
    index: int

    def __post_init__(self) -> None:
        if self.kind not in ATOM_KINDS:
            raise ValueError(f"unknown atom kind {self.kind!r}")
        if self.index < 0:
            raise ValueError("atom index must be non-negative")


@dataclass(frozen=True)
class Const:
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    children: tuple["Formula", ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("And needs at least two children")


@dataclass(frozen=True)
class Or:
    children: tuple["Formula", ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("Or needs at least two children")


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


Formula = Union[Atom, Const, Not, And, Or, Implies, Iff]


def conj(parts: Iterable[Formula]) -> Formula:
    """Conjunction of ``parts``; collapses to ``TRUE`` or the single child when short."""
    parts = tuple(parts)
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return And(parts)


def disj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    return Or(parts)


def atoms_of(formula: Formula) -> list[Atom]:
    """Distinct atoms referenced by ``formula``, sorted by index."""
    seen: dict[int, Atom] = {}
    stack = [formula]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            seen.setdefault(node.index, node)
        elif isinstance(node, Not):
            stack.append(node.child)
        elif isinstance(node, (And, Or)):
            stack.extend(node.children)
        elif isinstance(node, (Implies, Iff)):
            stack.append(node.left)
            stack.append(node.right)
    return [seen[i] for i in sorted(seen)]


def evaluate(formula: Formula, assignment: Mapping[str, bool]) -> bool:
    """Truth value of ``formula`` under ``assignment`` (atom name -> bool)."""
    if isinstance(formula, Atom):
        try:
            return bool(assignment[formula.name])
        except KeyError:
            raise IncompleteAssignmentError(formula.name) from None
    if isinstance(formula, Const):
        return formula.value
    if isinstance(formula, Not):
        return not evaluate(formula.child, assignment)
    # all()/any() would short-circuit past unassigned atoms, so evaluate every child
    if isinstance(formula, And):
        values = [evaluate(c, assignment) for c in formula.children]
        return all(values)
    if isinstance(formula, Or):
        values = [evaluate(c, assignment) for c in formula.children]
        return any(values)
    if isinstance(formula, Implies):
        left = evaluate(formula.left, assignment)
        right = evaluate(formula.right, assignment)
        return (not left) or right
    if isinstance(formula, Iff):
        return evaluate(formula.left, assignment) == evaluate(formula.right, assignment)
    raise TypeError(f"not a formula: {formula!r}")


def simplify_constants(formula: Formula) -> Formula:
    """Fold ``Const`` nodes away. The result is either a ``Const`` or constant-free."""
    if isinstance(formula, (Atom, Const)):
        return formula
    if isinstance(formula, Not):
        child = simplify_constants(formula.child)
        if isinstance(child, Const):
            return Const(not child.value)
        return Not(child)
    if isinstance(formula, (And, Or)):
        absorbing = isinstance(formula, Or)
        kept = []
        for c in formula.children:
            c = simplify_constants(c)
            if isinstance(c, Const):
                if c.value == absorbing:
                    return Const(absorbing)
                continue
            kept.append(c)
        if not kept:
            return Const(not absorbing)
        if len(kept) == 1:
            return kept[0]
        return type(formula)(tuple(kept))
    if isinstance(formula, Implies):
        left = simplify_constants(formula.left)
        right = simplify_constants(formula.right)
        if isinstance(left, Const):
            return right if left.value else TRUE
        if isinstance(right, Const):
            return TRUE if right.value else simplify_constants(Not(left))
        return Implies(left, right)
    if isinstance(formula, Iff):
        left = simplify_constants(formula.left)
        right = simplify_constants(formula.right)
        if isinstance(left, Const):
            left, right = right, left
        if isinstance(right, Const):
            if isinstance(left, Const):
                return Const(left.value == right.value)
            return left if right.value else simplify_constants(Not(left))
        return Iff(left, right)
    raise TypeError(f"not a formula: {formula!r}")


class Lit(NamedTuple):
    index: int
    positive: bool

    def __neg__(self) -> "Lit":
        return Lit(self.index, not self.positive)


Clause = tuple[Lit, ...]


@dataclass(frozen=True)
class CNF:
    """Clause set over variables ``0..var_count-1``.

    Variables below ``original_count`` are the source formula's atoms; the
    rest are Tseitin auxiliaries.
    """

    clauses: tuple[Clause, ...]
    var_count: int
    original_count: int


def normalize_clause(literals: Iterable[Lit]) -> Clause | None:
    """Deduplicate literals; ``None`` marks a tautological clause."""
    seen: dict[int, bool] = {}
    out = []
    for lit in literals:
        prev = seen.get(lit.index)
        if prev is None:
            seen[lit.index] = lit.positive
            out.append(lit)
        elif prev != lit.positive:
            return None
    return tuple(out)


def tseitin_compile(formula: Formula, num_atoms: int | None = None) -> CNF:
    """Compile ``formula`` to an equisatisfiable CNF.

    Every connective gets an auxiliary variable constrained by a full
    biconditional with its operands. Negation is absorbed into literal
    polarity. ``num_atoms`` fixes the number of original variables; it
    defaults to one past the largest atom index in the formula.
    """
    formula = simplify_constants(formula)
    atom_indices = [a.index for a in atoms_of(formula)]
    highest = max(atom_indices, default=-1)
    if num_atoms is None:
        num_atoms = highest + 1
    elif num_atoms <= highest:
        raise ValueError(f"num_atoms={num_atoms} but formula uses index {highest}")

    if isinstance(formula, Const):
        clauses: tuple[Clause, ...] = () if formula.value else ((),)
        return CNF(clauses, num_atoms, num_atoms)

    out: list[Clause] = []
    cache: dict[Formula, Lit] = {}
    next_var = num_atoms

    def emit(*literals: Lit) -> None:
        clause = normalize_clause(literals)
        if clause is not None:
            out.append(clause)

    def encode(node: Formula) -> Lit:
        nonlocal next_var
        if isinstance(node, Atom):
            return Lit(node.index, True)
        if isinstance(node, Not):
            return -encode(node.child)
        hit = cache.get(node)
        if hit is not None:
            return hit
        if isinstance(node, (And, Or)):
            kids = [encode(c) for c in node.children]
        else:
            a, b = encode(node.left), encode(node.right)
        g = Lit(next_var, True)
        next_var += 1
        if isinstance(node, And):
            for k in kids:
                emit(-g, k)
            emit(g, *(-k for k in kids))
        elif isinstance(node, Or):
            for k in kids:
                emit(g, -k)
            emit(-g, *kids)
        elif isinstance(node, Implies):
            emit(-g, -a, b)
            emit(g, a)
            emit(g, -b)
        elif isinstance(node, Iff):
            emit(-g, -a, b)
            emit(-g, a, -b)
            emit(g, a, b)
            emit(g, -a, -b)
        else:
            raise TypeError(f"not a formula: {node!r}")
        cache[node] = g
        return g

    root = encode(formula)
    out.append((root,))
    return CNF(tuple(out), next_var, num_atoms)


@dataclass(frozen=True)
class SatResult:
    """Outcome of a satisfiability check.

    ``model`` is a total assignment over the original variables (index ->
    bool) when satisfiable and ``None`` otherwise.
    """

    satisfiable: bool
    model: tuple[bool, ...] | None = None

    def __bool__(self) -> bool:
        return self.satisfiable

    def named(self, atoms: Sequence[Atom]) -> dict[str, bool]:
        if self.model is None:
            raise ValueError("unsatisfiable result has no model")
        return {a.name: self.model[a.index] for a in atoms}


UNSAT = SatResult(False)


def _signed(lit: Lit) -> int:
    return lit.index + 1 if lit.positive else -(lit.index + 1)


def _assign(clauses: list[tuple[int, ...]], lit: int) -> list[tuple[int, ...]] | None:
    """Simplify ``clauses`` with ``lit`` set true; ``None`` on an empty clause."""
    out = []
    for clause in clauses:
        if lit in clause:
            continue
        if -lit in clause:
            clause = tuple(x for x in clause if x != -lit)
            if not clause:
                return None
        out.append(clause)
    return out


def _search(clauses: list[tuple[int, ...]], values: dict[int, bool]) -> dict[int, bool] | None:
    while True:
        unit = next((c[0] for c in clauses if len(c) == 1), None)
        if unit is not None:
            values[abs(unit)] = unit > 0
            clauses = _assign(clauses, unit)
            if clauses is None:
                return None
            continue
        polarity: dict[int, int] = {}
        for clause in clauses:
            for x in clause:
                v = abs(x)
                sign = 1 if x > 0 else -1
                polarity[v] = sign if polarity.get(v, sign) == sign else 0
        pure = sorted((v * s for v, s in polarity.items() if s), key=abs)
        if not pure:
            break
        for x in pure:
            values[abs(x)] = x > 0
            clauses = _assign(clauses, x)
    if not clauses:
        return values
    var = min(abs(x) for c in clauses for x in c)
    for lit in (var, -var):
        reduced = _assign(clauses, lit)
        if reduced is None:
            continue
        trial = dict(values)
        trial[var] = lit > 0
        found = _search(reduced, trial)
        if found is not None:
            return found
    return None


def dpll_sat(cnf: CNF) -> SatResult:
    """Decide ``cnf`` by DPLL.

    Unit propagation runs to a fixpoint, then pure literals are assigned,
    then the search branches on the lowest unassigned variable, true first.
    Variables left open when every clause is satisfied default to false.
    """
    clauses = [tuple(_signed(l) for l in c) for c in cnf.clauses]
    if any(not c for c in clauses):
        return UNSAT
    values = _search(clauses, {})
    if values is None:
        return UNSAT
    model = tuple(values.get(i + 1, False) for i in range(cnf.original_count))
    return SatResult(True, model)


def truth_table_sat(formula: Formula, num_atoms: int | None = None) -> SatResult:
    """Exhaustive satisfiability check, used as an oracle for :func:`dpll_sat`.

    Rows are enumerated lexicographically with the lowest-index atom most
    significant and false before true; the first satisfying row wins.
    Atoms not in the formula are false in the returned model.
    """
    atoms = atoms_of(formula)
    if len(atoms) > TRUTH_TABLE_CAP:
        raise CapacityError(f"{len(atoms)} atoms exceeds the cap of {TRUTH_TABLE_CAP}")
    highest = atoms[-1].index if atoms else -1
    if num_atoms is None:
        num_atoms = highest + 1
    for row in itertools.product((False, True), repeat=len(atoms)):
        assignment = {a.name: v for a, v in zip(atoms, row)}
        if evaluate(formula, assignment):
            model = [False] * num_atoms
            for a, v in zip(atoms, row):
                model[a.index] = v
            return SatResult(True, tuple(model))
    return UNSAT
