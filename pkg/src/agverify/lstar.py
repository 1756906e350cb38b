"""Active learning of minimal DFAs with the Rivest-Schapire counterexample
rule: each counterexample contributes one distinguishing suffix found by
binary search over membership queries.

The observation table keeps one access string per state (rows of S stay
pairwise distinct), so only closure needs restoring between conjectures.
"""

from __future__ import annotations

from .csm import Dfa


class InconsistentTeacher(RuntimeError):
    """The teacher's answers cannot all be consistent with one language."""


class LearningLimit(RuntimeError):
    pass


class Learner:
    """Incremental L* session over a fixed alphabet.

    `membership` must behave as a pure function of its input word (a tuple of
    actions).  Answers are cached; `membership_queries` counts actual calls.
    """

    def __init__(self, alphabet, membership, event_log=None):
        self.alphabet = tuple(sorted(alphabet))
        self._membership = membership
        self._cache = {}
        self.membership_queries = 0
        self.conjecture_count = 0
        self.event_log = event_log
        self.S = [()]            # access strings, one per state
        self.E = [()]            # distinguishing suffixes
        self._last_sizes = []

    # -- queries ---------------------------------------------------------

    def query(self, word):
        word = tuple(word)
        if word not in self._cache:
            self.membership_queries += 1
            ans = bool(self._membership(word))
            self._cache[word] = ans
            if self.event_log is not None:
                self.event_log.append({"event": "query", "word": list(word),
                                       "answer": ans})
        return self._cache[word]

    def cached_answers(self):
        return dict(self._cache)

    def _row(self, s):
        return tuple(self.query(s + e) for e in self.E)

    # -- table maintenance -------------------------------------------------

    def _close(self):
        changed = True
        while changed:
            changed = False
            rows = {self._row(s) for s in self.S}
            for s in list(self.S):
                for a in self.alphabet:
                    r = self._row(s + (a,))
                    if r not in rows:
                        self.S.append(s + (a,))
                        rows.add(r)
                        changed = True

    def conjecture(self):
        """Build the hypothesis DFA from the closed table."""
        self._close()
        rows = [self._row(s) for s in self.S]
        if len(set(rows)) != len(rows):
            raise InconsistentTeacher("duplicate access-string rows")
        index = {r: i for i, r in enumerate(rows)}
        delta = {}
        for i, s in enumerate(self.S):
            for a in self.alphabet:
                delta[(i, a)] = index[self._row(s + (a,))]
        accepting = {i for i, s in enumerate(self.S) if self.query(s)}
        dfa = Dfa(len(self.S), self.alphabet, delta, 0, accepting,
                  error_states=frozenset(range(len(self.S))) - accepting,
                  state_names=["<%s>" % " ".join(s) for s in self.S])
        self.conjecture_count += 1
        if self._last_sizes and dfa.n_states <= self._last_sizes[-1]:
            raise InconsistentTeacher(
                "conjecture did not grow (%d -> %d states)"
                % (self._last_sizes[-1], dfa.n_states))
        self._last_sizes.append(dfa.n_states)
        if self.event_log is not None:
            self.event_log.append({"event": "conjecture",
                                   "iteration": self.conjecture_count,
                                   "states": dfa.n_states})
        return dfa

    def refine(self, cex):
        """Process a counterexample word from the symmetric difference of the
        hypothesis and the target language."""
        cex = tuple(cex)
        for a in cex:
            if a not in self.alphabet:
                raise ValueError("counterexample action %r outside alphabet" % a)
        target_ans = self.query(cex)
        hyp_state = self._hyp_path(cex)
        if self.query(self.S[hyp_state[-1]]) == target_ans:
            raise InconsistentTeacher(
                "counterexample %r does not distinguish the conjecture "
                "from the target" % (cex,))

        def probe(i):
            # membership of access(state after cex[:i]) . cex[i:]
            return self.query(self.S[hyp_state[i]] + cex[i:])

        lo, hi = 0, len(cex)   # probe(lo) == target_ans != probe(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if probe(mid) == target_ans:
                lo = mid
            else:
                hi = mid
        suffix = cex[hi:]
        if suffix in self.E:
            raise InconsistentTeacher("suffix %r already distinguishes" % (suffix,))
        self.E.append(suffix)
        if self.event_log is not None:
            self.event_log.append({"event": "refine", "cex": list(cex),
                                   "suffix": list(suffix)})

    def _hyp_path(self, word):
        """Hypothesis state index after each prefix of word (len(word)+1 entries)."""
        rows = [self._row(s) for s in self.S]
        index = {r: i for i, r in enumerate(rows)}
        cur = index[self._row(())]
        out = [cur]
        for a in word:
            cur = index[self._row(self.S[cur] + (a,))]
            out.append(cur)
        return out


def learn(teacher_membership, teacher_equivalence, alphabet,
          max_conjectures=1000, event_log=None):
    """Run L* to convergence.

    `teacher_equivalence(dfa)` returns None when the hypothesis is correct,
    or a counterexample word otherwise.  Returns the final (minimal) DFA.
    """
    learner = Learner(alphabet, teacher_membership, event_log=event_log)
    for _ in range(max_conjectures):
        dfa = learner.conjecture()
        cex = teacher_equivalence(dfa)
        if cex is None:
            return dfa
        learner.refine(cex)
    raise LearningLimit("no convergence after %d conjectures" % max_conjectures)
