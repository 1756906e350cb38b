import os
import random

import pytest

from agverify import formula as F
from agverify import lia


def sat(text, nonneg=()):
    return lia.is_satisfiable(F.parse_formula(text), nonneg=nonneg)


def test_mod_reduction_forces_small_value():
    # after x := x % 5 the guard x > 5 cannot hold
    got = sat("(x % 5) > 5 && x >= 0")
    assert not got


def test_sat_with_mod_equality():
    got = sat("x > 0 && x <= 5 && x % 5 = 0")
    assert got
    assert got.witness == {"x": 5}
    assert F.evaluate(F.parse_formula("x > 0 && x <= 5 && x % 5 = 0"),
                      got.witness)


def test_gcd_tightening_unsat():
    # 2x = 1 has no integer solution though rationally feasible
    assert not sat("2 * x = 1")
    # 3x >= 1 && 3x <= 2 squeezes out every integer
    assert not sat("3 * x >= 1 && 3 * x <= 2")


def test_branch_and_bound_finds_integer_point():
    # rational relaxation is feasible only at x = 3/2 unless y moves
    got = sat("2 * x - y = 3 && y >= 0 && y <= 1 && x >= 0")
    assert got
    assert got.witness["y"] in (1,)  # y must be odd


def test_nonneg_restriction():
    assert sat("x <= -1")
    assert not sat("x <= -1", nonneg=("x",))
    assert not sat("x + y <= -1", nonneg="all")


def test_validity():
    assert lia.is_valid(F.parse_formula("x <= 5 || x > 5"))
    assert not lia.is_valid(F.parse_formula("x <= 5"))
    assert lia.is_valid(F.parse_formula("x >= 0"), nonneg=("x",))


def test_negated_forall_becomes_existential():
    # not(forall h. h > 3) is satisfiable (pick h = 0)
    f = F.negate(F.Forall("h", F.parse_formula("h > 3")))
    assert lia.is_satisfiable(f)
    # forall cannot be decided positively
    with pytest.raises(lia.ResourceError):
        lia.is_satisfiable(F.Forall("h", F.parse_formula("h > 3")))


def test_neq_split():
    assert sat("x != 0 && x >= 0 && x <= 1")
    assert not sat("x != 0 && x >= 0 && x <= 0")


def random_formula(rng, depth=2):
    names = ("x", "y", "z")
    if depth == 0 or rng.random() < 0.4:
        k = rng.randint(1, 2)
        term = F.Const(rng.randint(-5, 5))
        for _ in range(k):
            c = rng.randint(-3, 3)
            v = F.Var(rng.choice(names))
            term = F.Add(term, F.Mul(c, v))
        if rng.random() < 0.2:
            term = F.Mod(term, rng.randint(1, 7))
        op = rng.choice(("<=", "<", "=", ">=", ">", "!="))
        return F.Cmp(op, term, F.Const(rng.randint(-10, 10)))
    kind = rng.random()
    args = tuple(random_formula(rng, depth - 1) for _ in range(rng.randint(1, 3)))
    if kind < 0.4:
        return F.And(args)
    if kind < 0.8:
        return F.Or(args)
    return F.Not(args[0])


def test_solver_matches_enumeration_oracle():
    rng = random.Random(7)
    for i in range(1000):
        f = random_formula(rng)
        nonneg = "all" if rng.random() < 0.3 else ()
        got = lia.is_satisfiable(f, nonneg=nonneg)
        if got:
            # a quick sound check: the witness must satisfy the formula
            assert F.evaluate(f, got.witness), (i, f)
        else:
            # no false unsat within the enumeration bound
            want = lia.enumerate_satisfiable(f, nonneg=nonneg, bound=12)
            assert not want, (i, f)


def test_witnesses_always_check(tmp_path):
    rng = random.Random(21)
    for _ in range(300):
        f = random_formula(rng, depth=3)
        got = lia.is_satisfiable(f)
        if got:
            assert F.evaluate(f, got.witness)


def test_smt_dump_naming(tmp_path):
    s = lia.Solver(dump_dir=str(tmp_path))
    s.is_satisfiable(F.parse_formula("x > 0"), nonneg=("x",))
    s.is_satisfiable(F.parse_formula("x < 0 && y % 3 = 1"))
    files = sorted(os.listdir(tmp_path))
    assert files == ["query_0.smt2", "query_1.smt2"]
    text = (tmp_path / "query_0.smt2").read_text()
    assert "(set-logic QF_LIA)" in text
    assert "(declare-const x Int)" in text
    assert "(assert (>= x 0))" in text
    assert text.strip().endswith("(check-sat)")
    assert "(mod" in (tmp_path / "query_1.smt2").read_text()


def test_query_counter():
    s = lia.Solver()
    s.is_satisfiable(F.TRUE)
    s.is_valid(F.parse_formula("x = x"))
    assert s.query_count == 2
