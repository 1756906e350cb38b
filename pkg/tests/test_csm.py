import random

import pytest

from agverify import _kernel
from agverify.csm import (TAU, Csm, Dfa, ModelError, ResourceLimit,
                          Transition, bounded_language, check_reachability,
                          complement_property, compose, compose_all,
                          determinize, dfa_bounded_language, dfa_equal,
                          minimize, project_csm, project_trace,
                          simulate_trace, trace_csm)
from gen import random_csm


def test_tau_reserved():
    with pytest.raises(ModelError):
        Csm(1, {"a", TAU}, [])
    with pytest.raises(ModelError):
        Csm(1, {"a"}, [(0, "b", 0)])


def test_project_trace():
    assert project_trace(("a", "b", "a", "c"), {"a", "c"}) == ("a", "a", "c")
    assert project_trace((), {"a"}) == ()


def test_project_csm_language():
    m = Csm(3, {"a", "b"}, [(0, "a", 1), (1, "b", 2), (2, "a", 0)])
    p = project_csm(m, {"a"})
    assert p.alphabet == frozenset({"a"})
    # a projected trace of length <= 6 needs at most 18 raw steps here
    all_proj = {project_trace(t, {"a"}) for t in bounded_language(m, 18)}
    want = {t for t in all_proj if len(t) <= 6}
    assert bounded_language(p, 6) == want


def test_compose_synchronizes_shared_actions():
    m1 = Csm(2, {"s", "x"}, [(0, "s", 1), (1, "x", 1)])
    m2 = Csm(2, {"s", "y"}, [(0, "s", 1), (1, "y", 1)])
    c = compose(m1, m2)
    lang = bounded_language(c, 3)
    assert ("s",) in lang
    assert ("s", "x", "y") in lang or ("s", "y", "x") in lang
    # s is shared: neither component can take it alone twice
    assert ("s", "s") not in lang


def test_compose_interleaves_disjoint_alphabets():
    m1 = Csm(2, {"a"}, [(0, "a", 1)])
    m2 = Csm(2, {"b"}, [(0, "b", 1)])
    c = compose(m1, m2)
    lang = bounded_language(c, 2)
    assert ("a", "b") in lang and ("b", "a") in lang


def test_compose_language_is_projection_intersection():
    # trace semantics of composition: t is a trace of m1||m2 iff its
    # projections are traces of the components
    rng = random.Random(5)
    for _ in range(40):
        m1 = random_csm(rng)
        m2 = random_csm(rng)
        c = compose(m1, m2)
        sigma = c.alphabet
        depth = 4
        got = bounded_language(c, depth)
        l1 = bounded_language(m1, depth)
        l2 = bounded_language(m2, depth)
        want = set()
        for t in _words(sorted(sigma), depth):
            if (project_trace(t, m1.alphabet) in l1
                    and project_trace(t, m2.alphabet) in l2):
                want.add(t)
        assert got == want


def _words(sigma, depth):
    out = [()]
    frontier = [()]
    for _ in range(depth):
        frontier = [w + (a,) for w in frontier for a in sigma]
        out.extend(frontier)
    return out


def test_compose_commutes_up_to_language():
    rng = random.Random(9)
    for _ in range(30):
        m1 = random_csm(rng)
        m2 = random_csm(rng)
        a = compose(m1, m2)
        b = compose(m2, m1)
        assert bounded_language(a, 4) == bounded_language(b, 4)


def test_compose_error_propagates():
    m1 = Csm(2, {"a"}, [(0, "a", 1)], error_states={1})
    m2 = Csm(1, {"a"}, [(0, "a", 0)])
    c = compose(m1, m2)
    v = check_reachability(c)
    assert not v.safe and v.trace == ("a",)


def test_compose_provenance():
    m1 = Csm(2, {"a"}, [(0, "a", 1)])
    m2 = Csm(2, {"a"}, [(0, "a", 1)])
    c = compose(m1, m2)
    (t,) = c.transitions
    assert t.info == (m1.transitions[0], m2.transitions[0])


def test_complement_property_completes():
    p = Csm(2, {"in", "out"}, [(0, "in", 1), (1, "out", 0)])
    d = complement_property(p)
    assert d.n_states == 3
    assert d.error_states == {2}
    assert d.accepts(("in", "out", "in"))
    assert not d.accepts(("out",))
    assert d.run(("out",)) in d.error_states
    # the error state is absorbing
    assert d.run(("out", "in", "out")) in d.error_states


def test_complement_property_rejects_nondeterministic():
    p = Csm(2, {"a"}, [(0, "a", 0), (0, "a", 1)])
    with pytest.raises(ModelError):
        complement_property(p)
    with pytest.raises(ModelError):
        complement_property(Csm(2, {"a"}, [(0, TAU, 1), (1, "a", 1)]))


def test_check_reachability_minimal_witness():
    # two error paths; the witness must be the observably shorter one
    m = Csm(5, {"a", "b"},
            [(0, "a", 1), (1, "a", 2), (2, "a", 4),
             (0, "b", 3), (3, TAU, 4)],
            error_states={4})
    v = check_reachability(m)
    assert not v.safe
    assert v.trace == ("b",)
    assert [t.label for t in v.path] == ["b", TAU]


def test_check_reachability_custom_target():
    m = Csm(3, {"a"}, [(0, "a", 1), (1, "a", 2)])
    assert check_reachability(m).safe
    v = check_reachability(m, target={2})
    assert v.trace == ("a", "a")
    v = check_reachability(m, target=lambda q: q == 0)
    assert v.trace == ()


def test_simulate_trace():
    m = Csm(3, {"a", "b"}, [(0, TAU, 1), (1, "a", 2), (2, "b", 0)])
    assert simulate_trace(m, ("a", "b", "a")).accepted
    r = simulate_trace(m, ("a", "a"))
    assert not r.accepted and r.failed_at == 1
    with pytest.raises(ModelError):
        simulate_trace(m, ("c",))


def test_determinize_preserves_language():
    rng = random.Random(11)
    for _ in range(40):
        m = random_csm(rng)
        d = determinize(m)
        assert dfa_bounded_language(d, 4) == bounded_language(m, 4)


def test_determinize_error_subsuming():
    # same word reaches a safe and an error state: the subset is an error
    m = Csm(4, {"a"}, [(0, TAU, 1), (0, "a", 2), (1, "a", 3)],
            error_states={3})
    d = determinize(m)
    q = d.run(("a",))
    assert q in d.error_states and q in d.accepting


def test_determinize_state_cap():
    rng = random.Random(3)
    m = random_csm(rng, max_states=5)
    with pytest.raises(ResourceLimit):
        determinize(m, max_states=1)


def test_trace_csm():
    m = trace_csm(("a", "b"), {"a", "b", "c"})
    assert bounded_language(m, 3) == {(), ("a",), ("a", "b")}
    with pytest.raises(ModelError):
        trace_csm(("d",), {"a"})


def test_minimize_preserves_language_and_is_minimal():
    rng = random.Random(13)
    for _ in range(40):
        m = random_csm(rng)
        d = determinize(m)
        md = minimize(d)
        eq, word = dfa_equal(d, md)
        assert eq, word
        # minimal: all states reachable and pairwise distinguishable
        again = minimize(md)
        assert again.n_states == md.n_states


def test_dfa_equal_finds_difference():
    d1 = trace_to_dfa(("a",), {"a"})
    d2 = trace_to_dfa(("a", "a"), {"a"})
    eq, word = dfa_equal(d1, d2)
    assert not eq and word in {("a",), ("a", "a")}


def trace_to_dfa(t, sigma):
    return determinize(trace_csm(t, sigma))


def test_restricted_csm_drops_rejecting():
    d = Dfa(2, {"a"}, {(0, "a"): 1, (1, "a"): 1}, 0, {0})
    r = d.restricted_csm()
    assert r.n_states == 1 and not r.transitions
    dead = Dfa(1, {"a"}, {(0, "a"): 0}, 0, accepting=())
    r = dead.restricted_csm()
    assert r.n_states == 1 and not r.transitions


def test_kernel_backends_agree():
    assert _kernel.BACKEND in ("compiled", "pure")
    rng = random.Random(17)
    for _ in range(60):
        m = random_csm(rng, max_states=6)
        errs = {rng.randrange(m.n_states)}
        flags = bytearray(m.n_states)
        for q in errs:
            flags[q] = 1
        src = [t.src for t in m.transitions]
        lab = [-1 if t.label == TAU else 1 for t in m.transitions]
        dst = [t.dst for t in m.transitions]
        pure = _kernel._pure.shortest_error_path(
            m.n_states, m.initial, src, lab, dst, flags)
        active = _kernel.shortest_error_path(
            m.n_states, m.initial, src, lab, dst, flags)
        assert pure == active


def test_compose_all_matches_pairwise():
    rng = random.Random(19)
    ms = [random_csm(rng) for _ in range(3)]
    a = compose_all(ms)
    b = compose(compose(ms[0], ms[1]), ms[2])
    assert bounded_language(a, 3) == bounded_language(b, 3)
