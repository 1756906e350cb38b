import random

import pytest

from agverify.agfinite import (AgTask, analyze_cex, assumption_alphabet,
                               build_weakest_assumption, check_premise1,
                               check_premise2, teacher_membership,
                               verify_compositional, weakest_environment,
                               RefineAssumption, RealViolation)
from agverify.csm import (Csm, ModelError, check_reachability,
                          complement_property, compose, compose_all,
                          dfa_bounded_language, trace_csm)
from agcheck import monolithic, random_task, replays_to_error
from gen import load_model, random_env


def protocol_task():
    model = load_model("finprotocol.agv")
    return AgTask(model["Sender"].to_csm(), model["Receiver"].to_csm(),
                  model["Order"].to_csm())


def test_assumption_alphabet():
    task = protocol_task()
    assert assumption_alphabet(task) == {"send", "out", "ack"}


def test_protocol_holds_with_two_state_assumption():
    v = verify_compositional(protocol_task())
    assert v.holds
    assert v.iterations <= 2
    assert v.assumption.alphabet == frozenset({"send", "out", "ack"})
    assert v.assumption.restricted_csm().n_states == 2


def test_bad_protocol_violated_and_replays():
    model = load_model("finprotocol_bad.agv")
    task = AgTask(model["Sender"].to_csm(), model["Receiver"].to_csm(),
                  model["Order"].to_csm())
    v = verify_compositional(task)
    assert not v.holds
    assert replays_to_error(task, v.cex)


def test_membership_examples():
    task = protocol_task()
    # receiver-side context: output only after a send
    assert teacher_membership(task, ("send", "out", "ack"))
    assert not teacher_membership(task, ("out",))
    assert teacher_membership(task, ())


def test_premises_on_weakest_assumption():
    task = protocol_task()
    sigma = assumption_alphabet(task)
    aw = build_weakest_assumption(task.m1, task.p, sigma)
    assert check_premise1(aw, task) is None
    assert check_premise2(aw, task) is None


def test_analyze_cex_classifies():
    model = load_model("finprotocol_bad.agv")
    task = AgTask(model["Sender"].to_csm(), model["Receiver"].to_csm(),
                  model["Order"].to_csm())
    # 'out' alone is a real violation: the receiver can emit it first
    outcome = analyze_cex(task, ("out",))
    assert isinstance(outcome, RealViolation)
    good = protocol_task()
    outcome = analyze_cex(good, ("send", "out", "ack"))
    # a behavior of M2 in which M1 stays safe: refine the assumption
    assert isinstance(outcome, RefineAssumption)


def test_random_tasks_match_monolithic():
    # the full 300-task suite runs in the acceptance gate
    rng = random.Random(31)
    for i in range(60):
        task = random_task(rng)
        want = monolithic(task)
        got = verify_compositional(task)
        assert got.holds == want.safe, i
        if not got.holds:
            assert replays_to_error(task, got.cex), i


def test_weakest_assumption_characterizes_environments():
    rng = random.Random(37)
    for i in range(12):
        task = random_task(rng)
        sigma = assumption_alphabet(task)
        aw = build_weakest_assumption(task.m1, task.p, sigma)
        perr = complement_property(task.p).as_csm()
        for j in range(12):
            env = random_env(rng, sigma)
            direct = check_reachability(
                compose_all([task.m1, env, perr])).safe
            via_aw = check_reachability(
                compose(env, aw.as_csm())).safe
            assert direct == via_aw, (i, j)


def test_learned_assumption_within_weakest():
    rng = random.Random(41)
    for _ in range(25):
        task = random_task(rng)
        v = verify_compositional(task)
        if not v.holds:
            continue
        sigma = assumption_alphabet(task)
        aw = build_weakest_assumption(task.m1, task.p, sigma)
        for word in dfa_bounded_language(v.assumption, 4):
            assert aw.accepts(word), word


def test_weakest_environment_stuck_is_accepting():
    # machine that can only do one 'a'; after that the environment may do
    # anything without risk
    m = Csm(2, {"a"}, [(0, "a", 1)])
    aw = weakest_environment(m, {"a"})
    assert aw.accepts(("a", "a", "a"))
    # but an error right after 'a' flips that word to rejected
    bad = Csm(2, {"a"}, [(0, "a", 1)], error_states={1})
    aw = weakest_environment(bad, {"a"})
    assert aw.accepts(())
    assert not aw.accepts(("a",))
    assert not aw.accepts(("a", "a"))


def test_property_alphabet_must_be_covered():
    m1 = Csm(1, {"a"}, [])
    m2 = Csm(1, {"b"}, [])
    p = Csm(1, {"z"}, [])
    with pytest.raises(ModelError):
        AgTask(m1, m2, p)


def test_unblockable_violation():
    # M1 errs alone, with no shared action: Violated even though the
    # premise-1 counterexample projects to the empty word
    m1 = Csm(2, {"x", "s"}, [(0, "x", 1)])
    m2 = Csm(1, {"s"}, [(0, "s", 0)])
    p = Csm(1, {"x"}, [])  # no 'x' allowed, ever
    task = AgTask(m1, m2, p)
    v = verify_compositional(task)
    assert not v.holds
    assert replays_to_error(task, v.cex)
