"""Shared routine checking the learning guarantees on one random target."""

import math

from agverify.csm import dfa_equal, minimize
from agverify.lstar import Learner


def learn_and_check(target):
    """Learn the language of `target` and assert minimality, the conjecture
    bound and the query bound.  Returns (final dfa, stats dict)."""
    goal = minimize(target)
    n = goal.n_states
    k = len(target.alphabet)
    learner = Learner(target.alphabet, target.accepts)
    longest_cex = 1
    while True:
        hyp = learner.conjecture()
        eq, word = dfa_equal(hyp, goal)
        if eq:
            break
        longest_cex = max(longest_cex, len(word))
        learner.refine(word)
    wrong = learner.conjecture_count - 1
    assert wrong <= max(n - 1, 0), (wrong, n)
    assert hyp.n_states == n
    eq, word = dfa_equal(hyp, goal)
    assert eq, word
    bound = 4 * (k * n * n + n * math.log2(max(longest_cex, 1)))
    assert learner.membership_queries <= bound, \
        (learner.membership_queries, bound)
    return hyp, {"queries": learner.membership_queries,
                 "conjectures": learner.conjecture_count,
                 "states": n,
                 "query_ratio": learner.membership_queries / bound}
