"""Infinite-state components as guarded-command programs over integers, and
their predicate abstractions.

A symbolic component has named control locations and integer variables; each
edge carries a guard and either parallel deterministic assignments or havoc
(nondeterministic read) updates.  Its semantics is the possibly infinite
machine over (location, valuation) states.  `abstract_may` and `abstract_must`
build the finite over- and under-approximating machines for a predicate set;
`simulate_symbolic` replays an abstract path concretely; `refine` derives new
predicates from an infeasible path by pulling the failing guard backwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import formula as F
from . import lia
from .csm import TAU, Csm, ModelError, Transition


@dataclass(frozen=True)
class Assign:
    var: str
    term: object

    def __str__(self):
        return "%s := %s" % (self.var, self.term)


@dataclass(frozen=True)
class Havoc:
    var: str

    def __str__(self):
        return "havoc(%s)" % self.var


@dataclass(frozen=True)
class SymEdge:
    src: str
    label: str            # action or TAU
    guard: object         # formula
    updates: tuple        # Assign / Havoc, parallel
    dst: str

    def havocked(self):
        return frozenset(u.var for u in self.updates if isinstance(u, Havoc))

    def assignment(self):
        """The deterministic part as a substitution map."""
        return {u.var: u.term for u in self.updates if isinstance(u, Assign)}

    def __str__(self):
        ups = "; ".join(str(u) for u in self.updates)
        return "%s -%s-> %s [%s] {%s}" % (self.src, self.label, self.dst,
                                          self.guard, ups)


class SymbolicComponent:
    """Guarded-command program over integer (or natural) variables.

    `init` maps each variable to a concrete initial value.  Variables with
    mode 'nat' are implicitly constrained to be non-negative: guards see the
    constraint, and updates that would drive such a variable negative simply
    disable the transition.  `error_locations` mark absorbing bad locations.
    """

    def __init__(self, locations, alphabet, edges, initial, init,
                 modes=None, error_locations=(), name=None):
        self.locations = tuple(locations)
        if initial not in self.locations:
            raise ModelError("initial location %r unknown" % initial)
        self.alphabet = frozenset(alphabet)
        if TAU in self.alphabet:
            raise ModelError("tau is reserved")
        self.initial = initial
        self.init = dict(init)
        self.modes = {v: (modes or {}).get(v, "nat") for v in self.init}
        for v, m in self.modes.items():
            if m not in ("nat", "int"):
                raise ModelError("variable mode must be nat or int, got %r" % m)
            if m == "nat" and self.init[v] < 0:
                raise ModelError("nat variable %s initialized negative" % v)
        self.error_locations = frozenset(error_locations)
        if not self.error_locations <= set(self.locations):
            raise ModelError("unknown error location")
        self.name = name
        es = []
        known = set(self.init)
        for e in edges:
            if not isinstance(e, SymEdge):
                e = SymEdge(*e)
            if e.src not in self.locations or e.dst not in self.locations:
                raise ModelError("edge endpoint unknown: %s" % e)
            if e.label != TAU and e.label not in self.alphabet:
                raise ModelError("edge label %r not in alphabet" % e.label)
            used = F.variables(e.guard) | {u.var for u in e.updates}
            for u in e.updates:
                if isinstance(u, Assign):
                    used |= F.term_variables(u.term)
            if not used <= known:
                raise ModelError("edge %s uses undeclared variables %s"
                                 % (e, sorted(used - known)))
            if len({u.var for u in e.updates}) != len(e.updates):
                raise ModelError("parallel update assigns %s twice" % e)
            es.append(e)
        self.edges = tuple(es)

    def variables(self):
        return sorted(self.init)

    def nat_vars(self):
        return sorted(v for v, m in self.modes.items() if m == "nat")

    def outgoing(self, loc):
        return [e for e in self.edges if e.src == loc]

    def domain_constraint(self, names=None):
        """Non-negativity of the nat-mode variables among `names`."""
        nat = set(self.nat_vars())
        names = self.variables() if names is None else names
        return F.conj([F.Cmp(">=", F.Var(v), F.Const(0))
                       for v in sorted(names) if v in nat])

    def __repr__(self):
        return "SymbolicComponent(%s: %d locations, %d edges)" % (
            self.name or "anon", len(self.locations), len(self.edges))


class PredicateSet:
    """Ordered, duplicate-free list of normalized linear atoms."""

    def __init__(self, atoms=()):
        self.atoms = []
        for a in atoms:
            self.add(a)

    def add(self, atom):
        """Normalize and add; returns True if the set grew."""
        if isinstance(atom, str):
            atom = F.parse_formula(atom)
        norm = F.canonical_atom(atom)
        if norm is None or norm in self.atoms:
            return False
        self.atoms.append(norm)
        return True

    def union(self, atoms):
        out = PredicateSet(self.atoms)
        for a in atoms:
            out.add(a)
        return out

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __contains__(self, atom):
        return F.canonical_atom(atom) in self.atoms

    def __eq__(self, other):
        return isinstance(other, PredicateSet) and self.atoms == other.atoms

    def __repr__(self):
        return "PredicateSet(%s)" % ", ".join(str(a) for a in self.atoms)


def litconj(preds, valuation):
    """Conjunction of each predicate or its negation per the truth tuple."""
    lits = []
    for p, v in zip(preds.atoms, valuation):
        lits.append(p if v else F.negate(p))
    return F.conj(lits)


MAX_PREDICATES = 16


# ------------------------------------------------------- weakest precondition

def wp(f, edge):
    """States all of whose `edge`-successors satisfy f: guard -> f[update],
    with havocked variables universally quantified (fresh bound names)."""
    subst = dict(edge.assignment())
    body = f
    bound = []
    for v in sorted(edge.havocked()):
        fresh = F.fresh_var("_h")
        subst[v] = F.Var(fresh)
        bound.append(fresh)
    body = F.substitute(body, subst)
    for name in reversed(bound):
        body = F.Forall(name, body)
    return F.implies(edge.guard, body)


def wp_trace(f, path):
    """Right fold of wp over a connected edge sequence."""
    for e in reversed(list(path)):
        f = wp(f, e)
    return f


# ------------------------------------------------------- abstraction

def _abstract(c, preds, must, solver=None):
    solver = solver or lia._default_solver
    if len(preds) > MAX_PREDICATES:
        raise lia.ResourceError("abstraction limited to %d predicates, got %d"
                                % (MAX_PREDICATES, len(preds)))
    nonneg = tuple(c.nat_vars())
    k = len(preds)
    # satisfiable (location, valuation) pairs only
    vals = []
    for bits in range(1 << k):
        v = tuple(bool(bits >> i & 1) for i in range(k))
        if solver.is_satisfiable(litconj(preds, v), nonneg=nonneg):
            vals.append(v)
    states = [(loc, v) for loc in c.locations for v in vals]
    index = {s: i for i, s in enumerate(states)}
    init_env = dict(c.init)
    init_val = tuple(F.evaluate(p, init_env) for p in preds.atoms)
    if (c.initial, init_val) not in index:
        raise ModelError("initial valuation is predicate-unsatisfiable")
    trs = []
    for e in c.edges:
        if e.src in c.error_locations:
            continue  # error locations are absorbing
        for sv in vals:
            for tv in vals:
                src = index[(e.src, sv)]
                dst = index[(e.dst, tv)]
                ok = (_must_edge(c, preds, e, sv, tv, solver) if must
                      else _may_edge(c, preds, e, sv, tv, solver))
                if ok:
                    trs.append(Transition(src, e.label, dst, e))
    errors = [index[(loc, v)] for loc in c.error_locations for v in vals]
    names = ["%s|%s" % (loc, _val_name(preds, v)) for loc, v in states]
    return Csm(len(states), c.alphabet, trs, index[(c.initial, init_val)],
               errors, names)


def _val_name(preds, v):
    if not preds.atoms:
        return "*"
    return ",".join(("" if b else "!") + str(p) for p, b in zip(preds.atoms, v))


def _post_formula(c, preds, e, tv):
    """litconj of the target valuation pulled back through e's update; the
    havocked variables become fresh existential (free) variables constrained
    to the variable domain."""
    subst = dict(e.assignment())
    extra = []
    for v in sorted(e.havocked()):
        fresh = F.fresh_var("_n")
        subst[v] = F.Var(fresh)
        if c.modes.get(v) == "nat":
            extra.append(F.Cmp(">=", F.Var(fresh), F.Const(0)))
    post = F.substitute(litconj(preds, tv), subst)
    # updates may not drive a nat variable negative
    for u in e.updates:
        if isinstance(u, Assign) and c.modes.get(u.var) == "nat":
            extra.append(F.Cmp(">=", u.term, F.Const(0)))
    return F.conj([post] + extra)


def _may_edge(c, preds, e, sv, tv, solver):
    """Some concrete source in the valuation can fire e into the target
    valuation."""
    q = F.conj([litconj(preds, sv), e.guard, _post_formula(c, preds, e, tv)])
    return bool(solver.is_satisfiable(q, nonneg=tuple(c.nat_vars())))


def _must_edge(c, preds, e, sv, tv, solver):
    """Every concrete source in the valuation can fire e into the target
    valuation.

    Deterministic updates: validity of source -> guard /\\ target[update]
    (also requiring the update to respect nat domains).  Havoc updates: the
    guard must be implied by the source, target literals not naming a
    havocked variable must be implied through the deterministic part, and
    target literals naming only havocked variables must be jointly
    satisfiable (the read can always pick such a value, independent of the
    source).  A target literal mixing havocked and untouched variables would
    need a per-source witness, which is a genuine forall-exists question;
    we conservatively report no must-edge there, keeping the abstraction a
    sound under-approximation.
    """
    nonneg = tuple(c.nat_vars())
    src = litconj(preds, sv)
    hav = e.havocked()
    if not hav:
        q = F.conj([e.guard, _post_formula(c, preds, e, tv)])
        return solver.is_valid(F.implies(src, q), nonneg=nonneg)
    # guard must hold on the whole source region
    if not solver.is_valid(F.implies(src, e.guard), nonneg=nonneg):
        return False
    det = e.assignment()
    fixed, free = [], []
    for p, b in zip(preds.atoms, tv):
        lit = p if b else F.negate(p)
        names = F.variables(lit)
        if names & hav:
            if names - hav:
                return False  # mixed literal: no source-independent witness
            free.append(lit)
        else:
            fixed.append(F.substitute(lit, det))
    for u in e.updates:
        if isinstance(u, Assign) and c.modes.get(u.var) == "nat":
            fixed.append(F.Cmp(">=", u.term, F.Const(0)))
    if fixed and not solver.is_valid(F.implies(F.conj([src, e.guard]),
                                               F.conj(fixed)), nonneg=nonneg):
        return False
    domain = F.conj([F.Cmp(">=", F.Var(v), F.Const(0))
                     for v in sorted(hav) if c.modes.get(v) == "nat"])
    return bool(solver.is_satisfiable(F.conj(free + [domain])))


def abstract_may(c, preds, solver=None):
    """Over-approximating abstraction: edge iff some concrete instance."""
    return _abstract(c, preds, must=False, solver=solver)


def abstract_must(c, preds, solver=None):
    """Under-approximating abstraction: edge iff every concrete instance."""
    return _abstract(c, preds, must=True, solver=solver)


# ------------------------------------------------------- concrete replay

@dataclass(frozen=True)
class Feasible:
    witness: dict = field(default=None, compare=False)

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Infeasible:
    prefix_len: int  # 1-indexed position of the first infeasible step

    def __bool__(self):
        return False


def simulate_symbolic(c, path, solver=None):
    """Replay an edge path concretely by strongest-postcondition threading.

    Variables are renamed to timestamped symbols; havoc introduces fresh
    symbols.  Feasible iff the accumulated constraint is satisfiable;
    otherwise Infeasible(i) with i the 1-indexed first failing step.
    """
    solver = solver or lia._default_solver
    path = list(path)
    loc = c.initial
    for e in path:
        if e not in c.edges:
            raise ModelError("path edge not in component: %s" % e)
        if e.src != loc:
            raise ModelError("path is not connected at %s" % e)
        loc = e.dst
    store = {v: F.Const(c.init[v]) for v in c.init}
    constraints = []
    nonneg = []
    for i, e in enumerate(path, start=1):
        constraints.append(F.substitute(e.guard, store))
        if not solver.is_satisfiable(F.conj(constraints), nonneg=tuple(nonneg)):
            return Infeasible(i)
        new = dict(store)
        for u in e.updates:
            if isinstance(u, Havoc):
                fresh = F.fresh_var("_s")
                new[u.var] = F.Var(fresh)
                if c.modes.get(u.var) == "nat":
                    nonneg.append(fresh)
            else:
                t = F.substitute_term(u.term, store)
                new[u.var] = t
                if c.modes.get(u.var) == "nat":
                    constraints.append(F.Cmp(">=", t, F.Const(0)))
        store = new
        if not solver.is_satisfiable(F.conj(constraints), nonneg=tuple(nonneg)):
            return Infeasible(i)
    got = solver.is_satisfiable(F.conj(constraints), nonneg=tuple(nonneg))
    return Feasible(dict(got.witness or {}))


def refine(c, preds, path, solver=None):
    """New predicate set from an infeasible path: pull the failing edge's
    guard back through the prefix, harvesting normalized atoms at every
    intermediate weakest precondition.  Monotone; the exact spurious path is
    absent from the refined may abstraction."""
    solver = solver or lia._default_solver
    sim = simulate_symbolic(c, path, solver)
    if sim:
        raise ModelError("refine called on a feasible path")
    path = list(path)
    j = sim.prefix_len - 1
    nonneg = tuple(c.nat_vars())

    def useful(atom):
        # an atom that is constant over the variable domain cannot split
        # any abstract state
        return (solver.is_satisfiable(atom, nonneg=nonneg)
                and not solver.is_valid(atom, nonneg=nonneg))

    f = path[j].guard
    out = preds.union(a for a in F.harvest_atoms(f) if useful(a))
    for e in reversed(path[:j]):
        f = wp(f, e)
        out = out.union(a for a in F.harvest_atoms(f) if useful(a))
    return out


# ------------------------------------------------------- bounded exploration

def concrete_bounded_language(c, depth, havoc_bound=20, value_cap=10000,
                              tau_budget=None):
    """Observable traces of length <= depth of the concrete semantics, with
    havoc restricted to [0, havoc_bound] (or [-havoc_bound, havoc_bound] for
    int-mode variables) and states dropped once any value exceeds value_cap
    in magnitude.  An under-approximate test oracle, exact whenever the
    bounds cover the reachable fragment."""
    if tau_budget is None:
        tau_budget = 4 * depth + 12
    init = (c.initial, tuple(c.init[v] for v in c.variables()))
    names = c.variables()

    def successors(state):
        loc, vals = state
        if loc in c.error_locations:
            return
        env = dict(zip(names, vals))
        for e in c.outgoing(loc):
            if not F.evaluate(e.guard, env):
                continue
            hav = sorted(e.havocked())
            det = e.assignment()
            choices = [[]]
            for v in hav:
                lo = 0 if c.modes.get(v) == "nat" else -havoc_bound
                choices = [p + [(v, x)] for p in choices
                           for x in range(lo, havoc_bound + 1)]
            for picks in choices:
                env2 = dict(env)
                for v, x in picks:
                    env2[v] = x
                ok = True
                for v, t in det.items():
                    val = F.eval_term(t, env)
                    if c.modes.get(v) == "nat" and val < 0:
                        ok = False
                        break
                    env2[v] = val
                if not ok:
                    continue
                if any(abs(env2[v]) > value_cap for v in names):
                    continue
                yield e.label, (e.dst, tuple(env2[v] for v in names))

    def tau_close(states):
        seen = set(states)
        stack = list(states)
        steps = 0
        while stack and steps < tau_budget * max(1, len(seen)):
            s = stack.pop()
            for label, t in successors(s):
                if label == TAU and t not in seen:
                    seen.add(t)
                    stack.append(t)
                    steps += 1
        return frozenset(seen)

    out = set()
    frontier = {(): tau_close([init])}
    out.add(())
    for _ in range(depth):
        nxt = {}
        for trace, states in frontier.items():
            by_action = {}
            for s in states:
                for label, t in successors(s):
                    if label != TAU:
                        by_action.setdefault(label, set()).add(t)
            for a, raw in by_action.items():
                key = trace + (a,)
                nxt.setdefault(key, set()).update(raw)
        frontier = {t: tau_close(s) for t, s in nxt.items()}
        out.update(frontier)
    return out


def find_feasible_path(c, abstraction, trace, solver=None):
    """A concrete-feasible edge path of `abstraction` realizing `trace`
    (observable actions), or None.  Depth-first over the abstract transitions
    with incremental feasibility checks."""
    solver = solver or lia._default_solver
    adj = abstraction.adjacency()
    limit = 4 * (len(trace) + 1) + 8  # tau padding

    def walk(q, i, path):
        if len(path) > limit:
            return None
        if i == len(trace):
            sim = simulate_symbolic(c, [t.info for t in path], solver)
            return list(path) if sim else None
        for t in adj[q]:
            nxt = None
            if t.label == trace[i]:
                nxt = i + 1
            elif t.label == TAU:
                nxt = i
            if nxt is None:
                continue
            path.append(t)
            if simulate_symbolic(c, [x.info for x in path], solver):
                got = walk(t.dst, nxt, path)
                if got is not None:
                    return got
            path.pop()
        return None

    got = walk(abstraction.initial, 0, [])
    return got


def as_symbolic(m, name=None):
    """View a finite machine as a trivially symbolic component (no variables;
    one edge per transition, guard true)."""
    locs = ["q%d" % q for q in range(m.n_states)]
    edges = [SymEdge(locs[t.src], t.label, F.TRUE, (), locs[t.dst])
             for t in m.transitions]
    return SymbolicComponent(locs, m.alphabet, edges, locs[m.initial], {},
                             error_locations=[locs[q] for q in m.error_states],
                             name=name)
