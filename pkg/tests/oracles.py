"""Independent reference computations used to check the library.

Nothing here calls the DPLL solver or the Tseitin compiler.
"""

from __future__ import annotations

import itertools
import random

from entail_audit.logic import And, Atom, Const, Formula, Iff, Implies, Not, Or, evaluate


def make_atoms(n: int, kind: str = "finding") -> list[Atom]:
    return [Atom(f"x{i}", kind, i) for i in range(n)]


def random_formula(rng: random.Random, atoms: list[Atom], depth: int = 4) -> Formula:
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.05:
            return Const(rng.random() < 0.5)
        return rng.choice(atoms)
    op = rng.choice(["not", "and", "or", "implies", "iff"])
    if op == "not":
        return Not(random_formula(rng, atoms, depth - 1))
    if op in ("and", "or"):
        kids = tuple(random_formula(rng, atoms, depth - 1) for _ in range(rng.randint(2, 3)))
        return And(kids) if op == "and" else Or(kids)
    left = random_formula(rng, atoms, depth - 1)
    right = random_formula(rng, atoms, depth - 1)
    return Implies(left, right) if op == "implies" else Iff(left, right)


def random_3cnf(rng: random.Random, n: int, m: int) -> list[list[tuple[int, bool]]]:
    clauses = []
    for _ in range(m):
        vars_ = rng.sample(range(n), min(3, n))
        clauses.append([(v, rng.random() < 0.5) for v in vars_])
    return clauses


def brute_force_cnf(clauses, n: int) -> bool:
    for row in itertools.product((False, True), repeat=n):
        if all(any(row[i] == pos for i, pos in clause) for clause in clauses):
            return True
    return False


def brute_force_sat(formula: Formula, atoms: list[Atom]) -> bool:
    return any(
        evaluate(formula, dict(zip((a.name for a in atoms), row)))
        for row in itertools.product((False, True), repeat=len(atoms))
    )


def brute_entails(knowledge: Formula, atoms: list[Atom], fixed: dict[str, bool], goal: str) -> bool:
    """True when every assignment agreeing with ``fixed`` and satisfying
    ``knowledge`` makes ``goal`` true. Vacuously true when none does."""
    free = [a.name for a in atoms if a.name not in fixed]
    for row in itertools.product((False, True), repeat=len(free)):
        world = dict(fixed)
        world.update(zip(free, row))
        if evaluate(knowledge, world) and not world[goal]:
            return False
    return True


def toy_entailed(v: dict[str, bool]) -> set[str]:
    """Entailed diagnoses of the toy KB, worked out by enumerating pe/pna rows
    against the two rules written directly in Python."""
    out = set()
    for goal in ("pe", "pna"):
        forced = True
        for pe, pna in itertools.product((False, True), repeat=2):
            world = dict(v, pe=pe, pna=pna)
            rules_hold = (not (world["cb"] and world["ms"]) or world["pe"]) and (
                not (world["lo"] and world["ab"]) or world["pna"]
            )
            if rules_hold and not world[goal]:
                forced = False
        if forced:
            out.add(goal)
    return out
