"""Finite-state assume-guarantee verification.

Checks M1 || M2 |= P through the two-premise rule: an environment assumption
A is learned such that A constrains M1 enough to satisfy P (premise 1) while
M2's behavior stays within A (premise 2).  The learner's teacher answers
membership by simulating a context word against M1 composed with the
completed property, and answers conjectures by model checking the premises.

Also provides the direct weakest-assumption construction, used both as the
learning target's semantics and as an independent test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .csm import (Csm, Dfa, ModelError, Transition, check_reachability,
                  complement_property, compose, compose_all, determinize,
                  project_trace, trace_csm)
from .lstar import Learner


@dataclass(frozen=True)
class AgTask:
    m1: Csm
    m2: Csm
    p: Csm  # deterministic property automaton

    def __post_init__(self):
        if not self.p.alphabet <= (self.m1.alphabet | self.m2.alphabet):
            raise ModelError("property alphabet must be contained in the "
                             "union of the component alphabets")


@dataclass(frozen=True)
class AgVerdict:
    holds: bool
    assumption: Dfa | None = None
    iterations: int = 0
    cex: tuple | None = None
    log: list = field(default_factory=list, compare=False)

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class RefineAssumption:
    projected: tuple


@dataclass(frozen=True)
class RealViolation:
    trace: tuple


def assumption_alphabet(task):
    """Interaction actions of M1 (and the property) with M2."""
    return frozenset((task.m1.alphabet | task.p.alphabet) & task.m2.alphabet)


def _m1_perr(task):
    return compose(task.m1, complement_property(task.p).as_csm())


def teacher_membership(task, s, sigma=None, _m1p=None):
    """True iff in the context of word s (over the assumption alphabet) M1
    cannot violate the property."""
    sigma = assumption_alphabet(task) if sigma is None else sigma
    m1p = _m1p if _m1p is not None else _m1_perr(task)
    product = compose(trace_csm(tuple(s), sigma), m1p)
    return check_reachability(product).safe


def check_premise1(a, task, _m1p=None):
    """<A> M1 <P>: None if it holds, else the shortest violating trace."""
    m1p = _m1p if _m1p is not None else _m1_perr(task)
    product = compose(a.restricted_csm(), m1p)
    v = check_reachability(product)
    return None if v.safe else v


def check_premise2(a, task):
    """<true> M2 <A>: None if every M2 behavior stays within L(A), else the
    shortest trace of M2 leaving it."""
    product = compose(task.m2, a.as_csm())
    v = check_reachability(product)
    return None if v.safe else v


def analyze_cex(task, c, sigma=None, _m1p=None):
    """Premise-2 counterexample analysis: either the assumption was too
    restrictive (refine with the projection) or c exposes a real violation."""
    sigma = assumption_alphabet(task) if sigma is None else sigma
    projected = project_trace(tuple(c), sigma)
    if teacher_membership(task, projected, sigma, _m1p=_m1p):
        return RefineAssumption(projected)
    return RealViolation(_system_cex(task, tuple(c), _m1p=_m1p))


def _system_cex(task, c, _m1p=None):
    """Lift an M2 trace c (in whose context M1 violates P) to a violating
    trace of the whole system, replayable on M1 || M2 || P_err."""
    m1p = _m1p if _m1p is not None else _m1_perr(task)
    guided = compose(trace_csm(c, task.m2.alphabet), m1p)
    v = check_reachability(guided)
    if v.safe:
        raise ModelError("internal: real violation did not replay")
    return v.trace


def verify_compositional(task, max_conjectures=1000, event_log=None):
    """Learn an assumption completing the two-premise rule, or return a
    replayable counterexample.  Exceeding the conjecture cap is an internal
    error: the procedure is guaranteed to terminate."""
    sigma = assumption_alphabet(task)
    m1p = _m1_perr(task)
    log = event_log if event_log is not None else []
    learner = Learner(sigma, lambda s: teacher_membership(task, s, sigma, _m1p=m1p),
                      event_log=log)
    for iteration in range(1, max_conjectures + 1):
        a = learner.conjecture()
        v1 = check_premise1(a, task, _m1p=m1p)
        if v1 is not None:
            projected = project_trace(v1.trace, sigma)
            log.append({"event": "premise1", "ok": False,
                        "cex": list(v1.trace)})
            if not a.accepts(projected):
                # only possible when M1 errs with no environment action at
                # all (projection empty, initial already rejecting): no
                # assumption can block it
                return AgVerdict(False, iterations=iteration, cex=v1.trace,
                                 log=log)
            learner.refine(projected)
            continue
        log.append({"event": "premise1", "ok": True})
        v2 = check_premise2(a, task)
        if v2 is None:
            log.append({"event": "premise2", "ok": True})
            return AgVerdict(True, assumption=a, iterations=iteration, log=log)
        log.append({"event": "premise2", "ok": False, "cex": list(v2.trace)})
        outcome = analyze_cex(task, v2.trace, sigma, _m1p=m1p)
        if isinstance(outcome, RealViolation):
            return AgVerdict(False, iterations=iteration, cex=outcome.trace,
                             log=log)
        learner.refine(outcome.projected)
    raise RuntimeError("conjecture cap (%d) exceeded; this signals an "
                       "implementation bug, not a user error" % max_conjectures)


# ------------------------------------------------- weakest assumption

def build_weakest_assumption(m1, p, sigma):
    """The most permissive environment constraint over sigma under which m1
    satisfies p: safe, and accepting every environment that preserves p."""
    m1p = compose(m1, complement_property(p).as_csm())
    return weakest_environment(m1p, sigma)


def weakest_environment(m, sigma):
    """Weakest safe environment of a machine with designated error states.

    Built by projecting to sigma, determinizing with the error-subsuming
    subset rule, merging error subsets into one rejecting sink, and making
    stuck extensions accepting: once the machine cannot follow, nothing the
    environment does can reach an error anymore.
    """
    sigma = frozenset(sigma)
    if not sigma <= m.alphabet:
        m = Csm(m.n_states, m.alphabet | sigma, m.transitions, m.initial,
                m.error_states, m.state_names)
    from .csm import project_csm
    det = determinize(project_csm(m, sigma))
    # remap: all error subsets -> one rejecting absorbing state; empty
    # subset (stuck) -> accepting absorbing state
    reject = "reject"
    top = "top"

    def cls(q):
        if q in det.error_states:
            return reject
        if q not in det.accepting:  # the empty-subset completion sink
            return top
        return q

    kept = sorted({cls(q) for q in range(det.n_states)}, key=repr)
    index = {c: i for i, c in enumerate(kept)}
    delta = {}
    for c in kept:
        for a in sorted(sigma):
            if c == reject:
                delta[(index[c], a)] = index[c]
            elif c == top:
                delta[(index[c], a)] = index[c]
            else:
                delta[(index[c], a)] = index[cls(det.delta[(c, a)])]
    accepting = {index[c] for c in kept if c != reject}
    errors = {index[reject]} if reject in index else frozenset()
    names = [("reject" if c == reject else "top" if c == top
              else det.state_name(c)) for c in kept]
    return Dfa(len(kept), sigma, delta, index[cls(det.initial)],
               accepting, errors, names)
