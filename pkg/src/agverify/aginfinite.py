"""Assume-guarantee verification for infinite-state components.

Learning runs against may abstractions of the two components, and every
counterexample is replayed concretely before it is trusted: a spurious
counterexample refines the abstraction of the component that produced it,
a real one either refines the learned assumption or witnesses a violation.
Because membership answers are validated against the concrete semantics,
abstraction refinement never invalidates the learner's observation table.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import lia
from .csm import (Csm, Dfa, ModelError, check_reachability,
                  complement_property, compose, project_trace, trace_csm)
from .lstar import Learner
from .symbolic import (SymbolicComponent, SymEdge, abstract_may, as_symbolic,
                       refine, simulate_symbolic)


class ResourceExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class InfVerdict:
    status: str  # "Holds" | "Violated" | "ResourceExhausted"
    assumption: Dfa | None = None
    preds1: object = None
    preds2: object = None
    cex: tuple | None = None
    reason: str | None = None
    stats: dict = field(default_factory=dict, compare=False)

    def __bool__(self):
        return self.status == "Holds"


@dataclass(frozen=True)
class RefineAssumption:
    projected: tuple


@dataclass(frozen=True)
class Violation:
    trace: tuple


@dataclass(frozen=True)
class Holds:
    pass


def _as_component(m, name):
    if isinstance(m, SymbolicComponent):
        return m
    return as_symbolic(m, name)


def _component_edges(path, picks):
    """Extract one component's symbolic edge sequence from a composed error
    path by following the provenance pair at each composition level."""
    out = []
    for tr in path:
        t = tr
        for i in picks:
            if t is None:
                break
            t = t.info[i]
        if t is not None:
            assert isinstance(t.info, SymEdge)
            out.append(t.info)
    return out


class Session:
    """One verification run: owns the growing predicate sets, the current may
    abstractions and the learner's observation table."""

    def __init__(self, c1, c2, p, preds1=None, preds2=None,
                 max_refinements=50, max_conjectures=1000, solver=None,
                 event_log=None, seed=0):
        from .symbolic import PredicateSet
        self.c1 = _as_component(c1, "c1")
        self.c2 = _as_component(c2, "c2")
        self.preds1 = preds1 if preds1 is not None else PredicateSet()
        self.preds2 = preds2 if preds2 is not None else PredicateSet()
        self.perr = complement_property(p).as_csm()
        if not self.perr.alphabet <= (self.c1.alphabet | self.c2.alphabet):
            raise ModelError("property alphabet must be contained in the "
                             "union of the component alphabets")
        self.sigma = frozenset((self.c1.alphabet | self.perr.alphabet)
                               & self.c2.alphabet)
        self.max_refinements = max_refinements
        self.max_conjectures = max_conjectures
        self.solver = solver or lia._default_solver
        self.log = event_log if event_log is not None else []
        self.rng = random.Random(seed)
        self.refinements = [0, 0]  # per component
        self.inconsistencies = 0
        self._m1_inner = None  # compose(m1may, perr), rebuilt on refinement
        self._m2_may = None
        self.learner = None
        self._in_recheck = False

    # -- abstractions --------------------------------------------------

    def m1_inner(self):
        if self._m1_inner is None:
            self._m1_inner = compose(abstract_may(self.c1, self.preds1,
                                                  self.solver), self.perr)
        return self._m1_inner

    def m2_may(self):
        if self._m2_may is None:
            self._m2_may = abstract_may(self.c2, self.preds2, self.solver)
        return self._m2_may

    def _refine(self, which, component, preds, edge_path):
        new = refine(component, preds, edge_path, self.solver)
        if len(new) <= len(preds):
            raise RuntimeError("refinement made no progress; this signals an "
                               "implementation bug, not a user error")
        self.refinements[which] += 1
        if self.refinements[which] > self.max_refinements:
            raise ResourceExhausted("refinement cap (%d) exceeded for "
                                    "component %d" % (self.max_refinements,
                                                      which + 1))
        self.log.append({"event": "refine-abstraction",
                         "component": which + 1,
                         "preds": [str(a) for a in new.atoms]})
        if which == 0:
            self.preds1 = new
            self._m1_inner = None
        else:
            self.preds2 = new
            self._m2_may = None
        self._recheck_cache()
        return new

    def _recheck_cache(self):
        """Re-ask a random 10% of the cached membership answers; abstraction
        refinement must never flip an answer already given to the learner."""
        if self.learner is None or self._in_recheck:
            return
        cached = list(self.learner.cached_answers().items())
        if not cached:
            return
        k = max(1, len(cached) // 10)
        self._in_recheck = True
        try:
            for word, old in self.rng.sample(cached, k):
                if self.membership(word) != old:
                    self.inconsistencies += 1
        finally:
            self._in_recheck = False

    # -- membership ----------------------------------------------------

    def _context_error(self, context):
        """Error analysis of M1's may abstraction in an environment context.

        Returns None when no concretely feasible error exists (the abstract
        check is conclusive after enough refinement), else the full composed
        error trace.  Spurious abstract errors refine preds1 and retry.
        """
        while True:
            product = compose(context, self.m1_inner())
            v = check_reachability(product)
            if v.safe:
                return None
            edges = _component_edges(v.path, (1, 0))
            sim = simulate_symbolic(self.c1, edges, self.solver)
            if sim:
                return v.trace
            if not self._in_recheck:
                self.log.append({"event": "spurious-cex",
                                 "trace": list(v.trace),
                                 "infeasible_at": sim.prefix_len})
            self._refine(0, self.c1, self.preds1, edges)

    def membership(self, s):
        """True iff M1 cannot concretely violate the property in the context
        of word s over the assumption alphabet."""
        return self._context_error(trace_csm(tuple(s), self.sigma)) is None

    # -- conjecture checking --------------------------------------------

    def check_conjecture(self, a):
        # premise 1 on the may abstraction, spurious cexs refine preds1
        while True:
            product = compose(a.restricted_csm(), self.m1_inner())
            v = check_reachability(product)
            if v.safe:
                self.log.append({"event": "premise1", "ok": True})
                break
            edges = _component_edges(v.path, (1, 0))
            sim = simulate_symbolic(self.c1, edges, self.solver)
            self.log.append({"event": "premise1", "ok": False,
                             "cex": list(v.trace),
                             "feasible": bool(sim)})
            if sim:
                projected = project_trace(v.trace, self.sigma)
                if not a.accepts(projected):
                    # M1 errs with no environment action at all; no
                    # assumption can block it
                    return Violation(v.trace)
                return RefineAssumption(projected)
            self._refine(0, self.c1, self.preds1, edges)
        # premise 2 on M2's may abstraction, spurious cexs refine preds2
        while True:
            product = compose(self.m2_may(), a.as_csm())
            v = check_reachability(product)
            if v.safe:
                self.log.append({"event": "premise2", "ok": True})
                return Holds()
            edges = _component_edges(v.path, (0,))
            sim = simulate_symbolic(self.c2, edges, self.solver)
            self.log.append({"event": "premise2", "ok": False,
                             "cex": list(v.trace),
                             "feasible": bool(sim)})
            if not sim:
                self._refine(1, self.c2, self.preds2, edges)
                continue
            projected = project_trace(v.trace, self.sigma)
            if self.membership(projected):
                return RefineAssumption(projected)
            # c is feasible in M2 and drives M1 to a concrete error: lift it
            # to a full system trace
            full = self._context_error(trace_csm(v.trace, self.c2.alphabet))
            if full is None:
                raise RuntimeError("violation did not replay; this signals "
                                   "an implementation bug")
            return Violation(full)

    # -- main loop -------------------------------------------------------

    def run(self):
        self.learner = Learner(self.sigma, self.membership,
                               event_log=self.log)
        try:
            for iteration in range(1, self.max_conjectures + 1):
                a = self.learner.conjecture()
                outcome = self.check_conjecture(a)
                if isinstance(outcome, Holds):
                    return InfVerdict("Holds", assumption=a,
                                      preds1=self.preds1, preds2=self.preds2,
                                      stats=self._stats(iteration))
                if isinstance(outcome, Violation):
                    return InfVerdict("Violated", cex=outcome.trace,
                                      preds1=self.preds1, preds2=self.preds2,
                                      stats=self._stats(iteration))
                self.learner.refine(outcome.projected)
        except ResourceExhausted as e:
            return InfVerdict("ResourceExhausted", reason=str(e),
                              preds1=self.preds1, preds2=self.preds2,
                              stats=self._stats(0))
        raise RuntimeError("conjecture cap (%d) exceeded; this signals an "
                           "implementation bug, not a user error"
                           % self.max_conjectures)

    def _stats(self, iterations):
        return {
            "conjectures": iterations,
            "refinements": {"c1": self.refinements[0],
                            "c2": self.refinements[1]},
            "membership_queries": (self.learner.membership_queries
                                   if self.learner else 0),
            "cache_inconsistencies": self.inconsistencies,
            "preds1": [str(a) for a in self.preds1.atoms],
            "preds2": [str(a) for a in self.preds2.atoms],
        }


def membership_query_abs(session, s):
    return session.membership(s)


def check_conjecture_inf(session, a):
    return session.check_conjecture(a)


def verify_infinite(c1, c2, p, preds1=None, preds2=None, **kw):
    """Convenience wrapper: build a session and run it to a verdict."""
    return Session(c1, c2, p, preds1, preds2, **kw).run()
