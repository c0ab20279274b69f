import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entail_audit.logic import (
    CNF,
    FALSE,
    TRUE,
    And,
    Atom,
    CapacityError,
    IncompleteAssignmentError,
    Iff,
    Implies,
    Lit,
    Not,
    Or,
    dpll_sat,
    evaluate,
    simplify_constants,
    truth_table_sat,
    tseitin_compile,
)
from oracles import brute_force_cnf, brute_force_sat, make_atoms, random_3cnf, random_formula

a, b, c = make_atoms(3)


def test_eval_implication_false_row():
    assert evaluate(Implies(a, b), {"x0": True, "x1": False}) is False


def test_eval_constant_needs_no_assignment():
    assert evaluate(TRUE, {}) is True


def test_eval_effusion_rule_row():
    cb, ms, pe = (Atom(n, "finding", i) for i, n in enumerate(["cb", "ms", "pe"]))
    rule = Implies(And((cb, ms)), pe)
    assert evaluate(rule, {"cb": True, "ms": True, "pe": True}) is True


def test_eval_iff():
    assert evaluate(Iff(a, b), {"x0": False, "x1": False}) is True
    assert evaluate(Iff(a, b), {"x0": True, "x1": False}) is False


def test_eval_missing_atom_raises():
    with pytest.raises(IncompleteAssignmentError):
        evaluate(Or((a, b)), {"x0": True})


def test_connectives_need_two_children():
    with pytest.raises(ValueError):
        And((a,))
    with pytest.raises(ValueError):
        Or(())


def test_atom_kind_checked():
    with pytest.raises(ValueError):
        Atom("q", "symptom", 0)


def test_tseitin_single_atom():
    cnf = tseitin_compile(a)
    assert cnf.clauses == ((Lit(0, True),),)
    assert cnf.var_count == cnf.original_count == 1


def test_tseitin_contradiction_is_unsat():
    assert not dpll_sat(tseitin_compile(And((a, Not(a))))).satisfiable


def test_tseitin_auxiliaries_above_originals():
    cnf = tseitin_compile(Or((And((a, b)), Iff(b, c))), num_atoms=5)
    assert cnf.original_count == 5
    assert cnf.var_count > 5
    indices = {lit.index for clause in cnf.clauses for lit in clause}
    assert indices - {0, 1, 2} and min(indices - {0, 1, 2}) >= 5


def test_tseitin_clauses_normalized():
    cnf = tseitin_compile(Or((a, And((b, Not(b))), Implies(a, a))))
    for clause in cnf.clauses:
        assert len({lit.index for lit in clause}) == len(clause)


def test_constants_folded():
    assert tseitin_compile(Or((a, TRUE))).clauses == ()
    assert tseitin_compile(And((a, FALSE))).clauses == ((),)
    assert simplify_constants(Implies(TRUE, a)) == a
    assert simplify_constants(Iff(a, FALSE)) == Not(a)
    assert not dpll_sat(tseitin_compile(FALSE)).satisfiable


def test_dpll_empty_cnf_all_false_model():
    result = dpll_sat(CNF((), 3, 3))
    assert result.satisfiable and result.model == (False, False, False)


def test_dpll_unit_contradiction():
    assert not dpll_sat(CNF(((Lit(0, True),), (Lit(0, False),)), 1, 1)).satisfiable


def test_dpll_branches_true_first():
    # (a | b) & (!a | !b): no unit or pure literal, so the first branch decides
    cnf = CNF(((Lit(0, True), Lit(1, True)), (Lit(0, False), Lit(1, False))), 2, 2)
    assert dpll_sat(cnf).model == (True, False)


def test_truth_table_first_row():
    assert truth_table_sat(Or((a, Not(a)))).model == (False,)
    assert not truth_table_sat(And((a, Not(a)))).satisfiable


def test_truth_table_capacity():
    big = make_atoms(21)
    with pytest.raises(CapacityError):
        truth_table_sat(Or(tuple(big)))


def test_sat_result_named():
    result = dpll_sat(tseitin_compile(And((a, Not(b)))))
    assert result.named([a, b]) == {"x0": True, "x1": False}


def test_dpll_matches_brute_force_on_random_3cnf():
    rng = random.Random(20240501)
    for _ in range(500):
        n = rng.randint(1, 10)
        clauses = random_3cnf(rng, n, rng.randint(1, 5 * n))
        cnf = CNF(tuple(tuple(Lit(i, p) for i, p in cl) for cl in clauses), n, n)
        result = dpll_sat(cnf)
        assert result.satisfiable == brute_force_cnf(clauses, n)
        if result:
            assert all(any(result.model[i] == p for i, p in cl) for cl in clauses)


def test_tseitin_dpll_agree_with_truth_table():
    rng = random.Random(7)
    for _ in range(500):
        atoms = make_atoms(rng.randint(1, 8))
        f = random_formula(rng, atoms)
        got = dpll_sat(tseitin_compile(f, len(atoms)))
        assert got.satisfiable == truth_table_sat(f).satisfiable == brute_force_sat(f, atoms)
        if got:
            assert evaluate(f, got.named(atoms))


def test_dpll_deterministic():
    rng = random.Random(3)
    atoms = make_atoms(6)
    for _ in range(50):
        cnf = tseitin_compile(random_formula(rng, atoms), 6)
        assert dpll_sat(cnf) == dpll_sat(cnf)


@st.composite
def formulas(draw, n_atoms=5):
    atoms = make_atoms(n_atoms)
    leaf = st.sampled_from(atoms)
    return draw(
        st.recursive(
            leaf,
            lambda kids: st.one_of(
                kids.map(Not),
                st.tuples(kids, kids).map(And),
                st.tuples(kids, kids, kids).map(Or),
                st.tuples(kids, kids).map(lambda p: Implies(*p)),
                st.tuples(kids, kids).map(lambda p: Iff(*p)),
            ),
            max_leaves=12,
        )
    )


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_tseitin_models_project_to_models(f):
    atoms = make_atoms(5)
    result = dpll_sat(tseitin_compile(f, 5))
    assert result.satisfiable == brute_force_sat(f, atoms)
    if result:
        assert evaluate(f, result.named(atoms))


def test_every_formula_model_extends_to_cnf_model():
    rng = random.Random(11)
    for _ in range(100):
        atoms = make_atoms(rng.randint(1, 5))
        f = random_formula(rng, atoms)
        cnf = tseitin_compile(f, len(atoms))
        for row in itertools.product((False, True), repeat=len(atoms)):
            if not evaluate(f, {a.name: v for a, v in zip(atoms, row)}):
                continue
            pinned = tuple((Lit(i, v),) for i, v in enumerate(row))
            assert dpll_sat(CNF(cnf.clauses + pinned, cnf.var_count, cnf.original_count))
