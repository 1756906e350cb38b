"""Behavioral interface generation for a single component with error states.

The generated interface is a DFA over a chosen alphabet that is safe (no
accepted word can drive the component to an error) and permissive (every
word the component can execute without erring is accepted).  Safety is
checked against the may abstraction, permissiveness against the must
abstraction; when the must abstraction is observationally nondeterministic
it is determinized with the error-subsuming subset rule, so a word that can
reach both a safe state and an error resolves to an error and is rightly
blocked.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import formula as F
from . import lia
from .csm import (TAU, Csm, Dfa, ModelError, ResourceLimit,
                  check_reachability, compose, project_csm, project_trace,
                  trace_csm)
from .lstar import Learner
from .symbolic import (SymbolicComponent, abstract_may, abstract_must,
                       as_symbolic, refine, simulate_symbolic, wp)
from .aginfinite import ResourceExhausted, _component_edges


@dataclass(frozen=True)
class IfaceResult:
    interface: Dfa
    preds: object
    stats: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class Cex:
    trace: tuple


def observationally_deterministic(m):
    """Every reachable state has at most one a-successor out of its tau
    closure, for each action a."""
    adj = m.adjacency()
    seen = {m.initial}
    stack = [m.initial]
    while stack:
        q = stack.pop()
        for t in adj[q]:
            if t.dst not in seen:
                seen.add(t.dst)
                stack.append(t.dst)
    for q in seen:
        by_action = {}
        for s in m.tau_closure(q):
            for t in adj[s]:
                if t.label != TAU:
                    by_action.setdefault(t.label, set()).add(t.dst)
        if any(len(ds) > 1 for ds in by_action.values()):
            return False
    return True


class InterfaceSession:
    """One interface-generation run: owns the predicate set, the current
    abstractions and the learner."""

    def __init__(self, c, sigma, preds=None, max_refinements=50,
                 max_conjectures=1000, max_subset_states=1 << 14,
                 solver=None, event_log=None):
        from .symbolic import PredicateSet
        self.c = c if isinstance(c, SymbolicComponent) else as_symbolic(c)
        self.sigma = frozenset(sigma)
        if not self.sigma <= self.c.alphabet:
            raise ModelError("interface alphabet must be part of the "
                             "component alphabet")
        self.preds = preds if preds is not None else PredicateSet()
        self.max_refinements = max_refinements
        self.max_conjectures = max_conjectures
        self.max_subset_states = max_subset_states
        self.solver = solver or lia._default_solver
        self.log = event_log if event_log is not None else []
        self.refinements = 0
        self.determinization_invoked = False
        self._may = None
        self._must = None
        self.learner = None

    def may(self):
        if self._may is None:
            self._may = abstract_may(self.c, self.preds, self.solver)
        return self._may

    def must(self):
        if self._must is None:
            self._must = abstract_must(self.c, self.preds, self.solver)
        return self._must

    def _grow(self, new):
        if len(new) <= len(self.preds):
            raise ResourceExhausted("predicate refinement made no progress")
        self.refinements += 1
        if self.refinements > self.max_refinements:
            raise ResourceExhausted("refinement cap (%d) exceeded"
                                    % self.max_refinements)
        self.preds = new
        self._may = self._must = None
        self.log.append({"event": "refine-abstraction",
                         "preds": [str(a) for a in new.atoms]})

    # -- membership ------------------------------------------------------

    def _context_error_path(self, context):
        """Feasible concrete error path of the component in an environment
        context, or None; spurious abstract errors refine the predicates."""
        while True:
            product = compose(context, self.may())
            v = check_reachability(product)
            if v.safe:
                return None
            edges = _component_edges(v.path, (1,))
            sim = simulate_symbolic(self.c, edges, self.solver)
            if sim:
                return edges
            self._grow(refine(self.c, self.preds, edges, self.solver))

    def membership(self, s):
        """True iff the component cannot err when the environment sticks to
        the word s."""
        return self._context_error_path(trace_csm(tuple(s), self.sigma)) is None

    # -- conjecture checks -------------------------------------------------

    def safety_check(self, a):
        """Ok (None) iff no word accepted by `a` can feasibly drive the
        component to an error."""
        while True:
            product = compose(a.restricted_csm(),
                              project_csm(self.may(), self.sigma))
            v = check_reachability(product)
            if v.safe:
                return None
            edges = _component_edges(v.path, (1,))
            sim = simulate_symbolic(self.c, edges, self.solver)
            if sim:
                word = project_trace(v.trace, self.sigma)
                if not a.accepts(word):
                    # only possible when the component errs with zero
                    # interface actions and `a` is the empty language:
                    # nothing a accepts reaches an error, so a is safe
                    return None
                return Cex(word)
            self._grow(refine(self.c, self.preds, edges, self.solver))

    def permissiveness_check(self, a):
        """Ok (None) iff `a` accepts every word the must abstraction can
        execute without erring; blocked words that can also reach an error
        are resolved in favor of blocking (error-subsuming subsets)."""
        while True:
            proj = project_csm(self.must(), self.sigma)
            if not observationally_deterministic(proj):
                self.determinization_invoked = True
            word = self._blocked_word(proj, a)
            if word is None:
                return None
            err = self._context_error_path(trace_csm(word, self.sigma))
            if err is None:
                return Cex(word)
            # the word can err concretely, so blocking it is right; the must
            # abstraction was too coarse to see the error -- refine it
            self._grow(self._harvest(err))

    def _blocked_word(self, proj, a):
        """Shortest word driving the must abstraction to a non-error state
        while `a` rejects it: a subset-construction product of proj with a,
        error-subsuming on the subsets, rejecting-subset-capped.

        A subset that ever touched an error stays tainted: error states are
        absorbing (no outgoing edges), so they silently drop out of later
        subsets, but a word that can err must block all of its extensions.
        The empty subset is a safe absorbing continuation: once the component
        cannot follow the word, nothing the environment does can reach an
        error anymore (the same completion the weakest environment uses)."""
        first = proj.closure_of({proj.initial})
        start = (first, bool(first & proj.error_states), a.initial)
        seen = {start: ()}
        queue = [start]
        adj = proj.adjacency()
        while queue:
            subset, tainted, qa = queue.pop(0)
            word = seen[(subset, tainted, qa)]
            if not tainted and qa not in a.accepting:
                return word
            for act in sorted(self.sigma):
                raw = {t.dst for q in subset for t in adj[q]
                       if t.label == act}
                closed = proj.closure_of(raw) if raw else frozenset()
                nxt = (closed, tainted or bool(closed & proj.error_states),
                       a.delta[(qa, act)])
                if nxt not in seen:
                    seen[nxt] = word + (act,)
                    if len(seen) > self.max_subset_states:
                        raise ResourceLimit(
                            "permissiveness subset product exceeded %d states"
                            % self.max_subset_states)
                    queue.append(nxt)
        return None

    def _harvest(self, edges):
        """Predicates from a feasible error path: pull the last guard back
        through the path, collecting normalized atoms at every step."""
        nonneg = tuple(self.c.nat_vars())

        def useful(atom):
            return (self.solver.is_satisfiable(atom, nonneg=nonneg)
                    and not self.solver.is_valid(atom, nonneg=nonneg))

        f = edges[-1].guard
        out = self.preds.union(x for x in F.harvest_atoms(f) if useful(x))
        for e in reversed(edges[:-1]):
            f = wp(f, e)
            out = out.union(x for x in F.harvest_atoms(f) if useful(x))
        return out

    # -- main loop ---------------------------------------------------------

    def run(self):
        self.learner = Learner(self.sigma, self.membership,
                               event_log=self.log)
        for _ in range(self.max_conjectures):
            a = self.learner.conjecture()
            bad = self.safety_check(a)
            if bad is not None:
                self.log.append({"event": "safety", "ok": False,
                                 "cex": list(bad.trace)})
                self.learner.refine(bad.trace)
                continue
            self.log.append({"event": "safety", "ok": True})
            bad = self.permissiveness_check(a)
            if bad is not None:
                self.log.append({"event": "permissiveness", "ok": False,
                                 "cex": list(bad.trace)})
                self.learner.refine(bad.trace)
                continue
            self.log.append({"event": "permissiveness", "ok": True})
            return IfaceResult(a, self.preds, self._stats())
        raise RuntimeError("conjecture cap (%d) exceeded; this signals an "
                           "implementation bug, not a user error"
                           % self.max_conjectures)

    def _stats(self):
        return {
            "refinements": self.refinements,
            "determinization_invoked": self.determinization_invoked,
            "membership_queries": self.learner.membership_queries,
            "preds": [str(a) for a in self.preds.atoms],
        }


def safety_check_iface(session, a):
    return session.safety_check(a)


def permissiveness_check(session, a):
    return session.permissiveness_check(a)


def gen_interface(c, sigma, preds=None, **kw):
    """Convenience wrapper: build a session and run it to an interface."""
    return InterfaceSession(c, sigma, preds, **kw).run()
