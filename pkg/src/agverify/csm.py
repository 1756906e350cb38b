"""Communicating state machines: construction, projection, parallel
composition, determinization, property complementation, reachability and
trace simulation.

States are opaque integers.  The internal action is the reserved label `tau`,
which is never a member of any alphabet.  All values are immutable after
construction; operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import _kernel

TAU = "tau"


class ModelError(ValueError):
    """Ill-formed machine or operation precondition violation."""


@dataclass(frozen=True)
class Transition:
    src: int
    label: str
    dst: int
    info: object = field(default=None, compare=False, hash=False)


class Csm:
    """Finite communicating state machine.

    `error_states` flags designated states (used as reachability targets,
    e.g. the error state of a completed property).  `state_names` is optional
    diagnostic provenance (e.g. pair labels for composed states).
    """

    def __init__(self, n_states, alphabet, transitions, initial=0,
                 error_states=(), state_names=None):
        if n_states <= 0:
            raise ModelError("a CSM needs at least one state")
        alphabet = frozenset(alphabet)
        if TAU in alphabet:
            raise ModelError("tau is reserved and cannot be part of an alphabet")
        if not (0 <= initial < n_states):
            raise ModelError("initial state out of range")
        trs = []
        for t in transitions:
            if not isinstance(t, Transition):
                t = Transition(*t)
            if not (0 <= t.src < n_states and 0 <= t.dst < n_states):
                raise ModelError("transition endpoint out of range: %r" % (t,))
            if t.label != TAU and t.label not in alphabet:
                raise ModelError("transition label %r not in alphabet" % t.label)
            trs.append(t)
        self.n_states = n_states
        self.alphabet = alphabet
        self.transitions = tuple(trs)
        self.initial = initial
        self.error_states = frozenset(error_states)
        if not all(0 <= q < n_states for q in self.error_states):
            raise ModelError("error state out of range")
        self.state_names = tuple(state_names) if state_names else None
        self._closure_cache = {}
        self._adj = None

    # -- helpers ---------------------------------------------------------

    def state_name(self, q):
        if self.state_names:
            return self.state_names[q]
        return "s%d" % q

    def adjacency(self):
        if self._adj is None:
            adj = [[] for _ in range(self.n_states)]
            for t in self.transitions:
                adj[t.src].append(t)
            self._adj = adj
        return self._adj

    def tau_closure(self, q):
        """States reachable from q via tau transitions (memoized)."""
        got = self._closure_cache.get(q)
        if got is not None:
            return got
        seen = {q}
        stack = [q]
        adj = self.adjacency()
        while stack:
            u = stack.pop()
            for t in adj[u]:
                if t.label == TAU and t.dst not in seen:
                    seen.add(t.dst)
                    stack.append(t.dst)
        out = frozenset(seen)
        self._closure_cache[q] = out
        return out

    def closure_of(self, states):
        out = set()
        for q in states:
            out |= self.tau_closure(q)
        return frozenset(out)

    def is_deterministic(self):
        """No tau transitions and at most one successor per (state, action)."""
        seen = {}
        for t in self.transitions:
            if t.label == TAU:
                return False
            key = (t.src, t.label)
            if key in seen and seen[key] != t.dst:
                return False
            seen[key] = t.dst
        return True

    def __repr__(self):
        return "Csm(states=%d, |alphabet|=%d, transitions=%d)" % (
            self.n_states, len(self.alphabet), len(self.transitions))


class Dfa:
    """Deterministic complete automaton over a finite alphabet.

    `accepting` defines the automaton's language.  `error_states` marks
    states flagged as errors (a subset reached through an error during
    determinization, or the completion state of a complemented property);
    they are ordinarily exactly the non-accepting states, but determinization
    keeps the two notions separate.
    """

    def __init__(self, n_states, alphabet, delta, initial, accepting,
                 error_states=(), state_names=None):
        alphabet = frozenset(alphabet)
        if TAU in alphabet:
            raise ModelError("tau is reserved")
        for q in range(n_states):
            for a in alphabet:
                if (q, a) not in delta:
                    raise ModelError("DFA is not complete at (%s, %s)" % (q, a))
        self.n_states = n_states
        self.alphabet = alphabet
        self.delta = dict(delta)
        self.initial = initial
        self.accepting = frozenset(accepting)
        self.error_states = frozenset(error_states)
        self.state_names = tuple(state_names) if state_names else None

    def run(self, word):
        q = self.initial
        for a in word:
            if a not in self.alphabet:
                raise ModelError("action %r outside DFA alphabet" % a)
            q = self.delta[(q, a)]
        return q

    def accepts(self, word):
        return self.run(word) in self.accepting

    def rejecting_states(self):
        return frozenset(range(self.n_states)) - self.accepting

    def as_csm(self, error_states=None):
        """View as a CSM; by default the non-accepting states are flagged as
        error states (the property-automaton reading)."""
        if error_states is None:
            error_states = self.rejecting_states()
        trs = [Transition(q, a, self.delta[(q, a)])
               for q in range(self.n_states) for a in sorted(self.alphabet)]
        return Csm(self.n_states, self.alphabet, trs, self.initial,
                   error_states, self.state_names)

    def restricted_csm(self):
        """The CSM of accepted behavior: non-accepting states and the
        transitions through them are removed.  Used when a DFA plays the role
        of an environment assumption."""
        keep = sorted(self.accepting)
        if self.initial not in self.accepting:
            return Csm(1, self.alphabet, [], 0)
        idx = {q: i for i, q in enumerate(keep)}
        trs = []
        for (q, a), r in sorted(self.delta.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            if q in idx and r in idx:
                trs.append(Transition(idx[q], a, idx[r]))
        names = [self.state_name(q) for q in keep]
        return Csm(len(keep), self.alphabet, trs, idx[self.initial],
                   state_names=names)

    def state_name(self, q):
        if self.state_names:
            return self.state_names[q]
        return "q%d" % q

    def __repr__(self):
        return "Dfa(states=%d, |alphabet|=%d, accepting=%d)" % (
            self.n_states, len(self.alphabet), len(self.accepting))


@dataclass(frozen=True)
class Verdict:
    safe: bool
    trace: tuple | None = None      # observable actions only
    path: tuple | None = None       # full Transition sequence incl. tau

    def __bool__(self):
        return self.safe


@dataclass(frozen=True)
class SimResult:
    accepted: bool
    failed_at: int | None = None


# ------------------------------------------------------------ operations

def project_trace(t, sigma):
    """Keep exactly the actions of t that are in sigma, order preserved."""
    sigma = frozenset(sigma)
    return tuple(a for a in t if a in sigma)


def project_csm(m, sigma):
    """Rename to tau every transition whose label is outside sigma; the
    alphabet becomes sigma.  States and error flags are unchanged."""
    sigma = frozenset(sigma)
    if TAU in sigma:
        raise ModelError("tau cannot be projected onto")
    trs = [Transition(t.src, t.label if t.label in sigma else TAU, t.dst, t.info)
           for t in m.transitions]
    return Csm(m.n_states, sigma, trs, m.initial, m.error_states, m.state_names)


def compose(m1, m2):
    """Parallel composition: synchronize shared non-tau actions, interleave
    the rest.  Only reachable pairs are constructed.  A composed state is an
    error state iff either component state is; transition provenance records
    the pair of component transitions that fired (None = did not move)."""
    a1, a2 = m1.alphabet, m2.alphabet
    alphabet = a1 | a2
    adj1, adj2 = m1.adjacency(), m2.adjacency()
    start = (m1.initial, m2.initial)
    index = {start: 0}
    order = [start]
    trs = []
    i = 0
    while i < len(order):
        q1, q2 = order[i]
        here = index[(q1, q2)]

        def reach(pair):
            if pair not in index:
                index[pair] = len(order)
                order.append(pair)
            return index[pair]

        for t in adj1[q1]:
            if t.label == TAU or t.label not in a2:
                trs.append(Transition(here, t.label, reach((t.dst, q2)), (t, None)))
        for t in adj2[q2]:
            if t.label == TAU or t.label not in a1:
                trs.append(Transition(here, t.label, reach((q1, t.dst)), (None, t)))
        for t in adj1[q1]:
            if t.label == TAU or t.label not in a2:
                continue
            for u in adj2[q2]:
                if u.label == t.label:
                    trs.append(Transition(here, t.label, reach((t.dst, u.dst)), (t, u)))
        i += 1
    errors = [index[p] for p in order
              if p[0] in m1.error_states or p[1] in m2.error_states]
    names = ["(%s,%s)" % (m1.state_name(p[0]), m2.state_name(p[1])) for p in order]
    return Csm(len(order), alphabet, trs, 0, errors, names)


def compose_all(machines):
    out = machines[0]
    for m in machines[1:]:
        out = compose(out, m)
    return out


def complement_property(p):
    """Complete a deterministic property automaton with a fresh absorbing
    error state; every missing (state, action) pair transitions to it."""
    if isinstance(p, Dfa):
        p = p.as_csm(error_states=p.rejecting_states())
        if p.error_states:
            raise ModelError("property automaton must accept in every state")
    if not p.is_deterministic():
        raise ModelError("property automaton must be deterministic (no tau, "
                         "no two transitions on the same action from a state)")
    err = p.n_states
    trs = list(p.transitions)
    have = {(t.src, t.label) for t in p.transitions}
    for q in range(p.n_states):
        for a in sorted(p.alphabet):
            if (q, a) not in have:
                trs.append(Transition(q, a, err))
    for a in sorted(p.alphabet):
        trs.append(Transition(err, a, err))
    delta = {(t.src, t.label): t.dst for t in trs}
    names = [p.state_name(q) for q in range(p.n_states)] + ["error"]
    return Dfa(err + 1, p.alphabet, delta, p.initial,
               accepting=frozenset(range(p.n_states)),
               error_states={err}, state_names=names)


def check_reachability(m, target=None):
    """Safe iff no target state is reachable; Unsafe carries a witness trace
    of minimal observable length (tau steps elided from the trace but present
    in the path).  `target` is a state set or predicate; defaults to the
    machine's error states."""
    if target is None:
        targets = m.error_states
    elif callable(target):
        targets = {q for q in range(m.n_states) if target(q)}
    else:
        targets = set(target)
    flags = bytearray(m.n_states)
    for q in targets:
        flags[q] = 1
    src = [t.src for t in m.transitions]
    lab = [-1 if t.label == TAU else 1 for t in m.transitions]
    dst = [t.dst for t in m.transitions]
    path = _kernel.shortest_error_path(m.n_states, m.initial, src, lab, dst, flags)
    if path is None:
        return Verdict(True)
    steps = tuple(m.transitions[e] for e in path)
    trace = tuple(t.label for t in steps if t.label != TAU)
    return Verdict(False, trace, steps)


def simulate_trace(m, t):
    """Accepted if some tau-closed path realizes t; otherwise FailedAt(i) for
    the first unrealizable action."""
    for a in t:
        if a not in m.alphabet:
            raise ModelError("action %r outside machine alphabet" % a)
    current = m.tau_closure(m.initial)
    adj = m.adjacency()
    for i, a in enumerate(t):
        nxt = set()
        for q in current:
            for tr in adj[q]:
                if tr.label == a:
                    nxt |= m.tau_closure(tr.dst)
        if not nxt:
            return SimResult(False, i)
        current = frozenset(nxt)
    return SimResult(True)


def determinize(m, max_states=None):
    """Subset construction with tau closure.  A subset state is an error
    state iff it contains an error state of m; the empty subset is the
    non-accepting completion sink.  Language (the set of traces of m) is
    preserved: accepting = non-empty subsets."""
    sigma = sorted(m.alphabet)
    adj = m.adjacency()
    start = m.closure_of({m.initial})
    index = {start: 0}
    order = [start]
    delta = {}
    sink = None
    i = 0
    while i < len(order):
        cur = order[i]
        for a in sigma:
            raw = {t.dst for q in cur for t in adj[q] if t.label == a}
            nxt = m.closure_of(raw) if raw else frozenset()
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
                if max_states is not None and len(order) > max_states:
                    raise ResourceLimit("subset construction exceeded %d states"
                                        % max_states)
            delta[(i, a)] = index[nxt]
        i += 1
    errors = {index[s] for s in order if s & m.error_states}
    accepting = {index[s] for s in order if s}
    names = ["{%s}" % ",".join(sorted(m.state_name(q) for q in s)) if s else "sink"
             for s in order]
    return Dfa(len(order), m.alphabet, delta, 0, accepting, errors, names)


class ResourceLimit(RuntimeError):
    pass


def trace_csm(t, sigma=None):
    """Linear machine with len(t)+1 states whose paths are exactly the
    prefixes of t.  `sigma` widens the alphabet (an assumption alphabet);
    actions of sigma not at the expected position are thereby blocked."""
    actions = frozenset(t) if sigma is None else frozenset(sigma)
    missing = frozenset(t) - actions
    if missing:
        raise ModelError("trace actions %s not in alphabet" % sorted(missing))
    trs = [Transition(i, a, i + 1) for i, a in enumerate(t)]
    return Csm(len(t) + 1, actions, trs, 0)


def bounded_language(m, depth):
    """All observable traces of length <= depth (includes the empty trace)."""
    memo = {}

    def traces(states, d):
        key = (states, d)
        got = memo.get(key)
        if got is not None:
            return got
        out = {()}
        if d > 0:
            by_action = {}
            for q in states:
                for t in m.adjacency()[q]:
                    if t.label != TAU:
                        by_action.setdefault(t.label, set()).add(t.dst)
            for a, raw in by_action.items():
                for suffix in traces(m.closure_of(raw), d - 1):
                    out.add((a,) + suffix)
        out = frozenset(out)
        memo[key] = out
        return out

    return set(traces(m.closure_of({m.initial}), depth))


def dfa_bounded_language(d, depth):
    """Accepted words of length <= depth."""
    out = set()

    def walk(q, prefix):
        if q in d.accepting:
            out.add(prefix)
        if len(prefix) < depth:
            for a in sorted(d.alphabet):
                walk(d.delta[(q, a)], prefix + (a,))

    walk(d.initial, ())
    return out


def dfa_equal(d1, d2):
    """Exact language equality via product reachability; returns (equal,
    distinguishing word or None)."""
    if d1.alphabet != d2.alphabet:
        raise ModelError("alphabet mismatch")
    start = (d1.initial, d2.initial)
    seen = {start: ()}
    queue = [start]
    while queue:
        q1, q2 = queue.pop(0)
        word = seen[(q1, q2)]
        if (q1 in d1.accepting) != (q2 in d2.accepting):
            return False, word
        for a in sorted(d1.alphabet):
            nxt = (d1.delta[(q1, a)], d2.delta[(q2, a)])
            if nxt not in seen:
                seen[nxt] = word + (a,)
                queue.append(nxt)
    return True, None


def minimize(d):
    """Moore partition refinement; unreachable states dropped first."""
    reach = {d.initial}
    queue = [d.initial]
    while queue:
        q = queue.pop()
        for a in d.alphabet:
            r = d.delta[(q, a)]
            if r not in reach:
                reach.add(r)
                queue.append(r)
    states = sorted(reach)
    sigma = sorted(d.alphabet)
    block = {q: int(q in d.accepting) for q in states}
    while True:
        sig = {q: (block[q],) + tuple(block[d.delta[(q, a)]] for a in sigma)
               for q in states}
        classes = {}
        for q in states:
            classes.setdefault(sig[q], []).append(q)
        new_block = {}
        for i, key in enumerate(sorted(classes, key=repr)):
            for q in classes[key]:
                new_block[q] = i
        if len(classes) == len(set(block.values())):
            block = new_block
            break  # signatures include the old block, so equal count = stable
        block = new_block
    ids = sorted(set(block.values()))
    remap = {b: i for i, b in enumerate(ids)}
    n = len(ids)
    delta = {}
    for q in states:
        for a in sigma:
            delta[(remap[block[q]], a)] = remap[block[d.delta[(q, a)]]]
    accepting = {remap[block[q]] for q in states if q in d.accepting}
    errors = {remap[block[q]] for q in states if q in d.error_states}
    return Dfa(n, d.alphabet, delta, remap[block[d.initial]], accepting, errors)
