"""Shared helpers for checking assume-guarantee results against direct
monolithic reachability."""

import random

from agverify.agfinite import AgTask
from agverify.csm import (check_reachability, complement_property,
                          compose, compose_all, trace_csm)
from gen import random_csm, random_property


def random_task(rng, max_states=5, alphabet=("a", "b", "c", "d")):
    while True:
        m1 = random_csm(rng, max_states=max_states, alphabet=alphabet)
        m2 = random_csm(rng, max_states=max_states, alphabet=alphabet)
        union = m1.alphabet | m2.alphabet
        psigma = frozenset(rng.sample(sorted(union),
                                      rng.randint(1, len(union))))
        p = random_property(rng, psigma)
        if p.is_deterministic():
            return AgTask(m1, m2, p)


def monolithic(task):
    """Direct check of M1 || M2 |= P; returns the reachability verdict."""
    system = compose_all([task.m1, task.m2,
                          complement_property(task.p).as_csm()])
    return check_reachability(system)


def replays_to_error(task, cex):
    """The cex, taken verbatim, must drive the full system to an error."""
    system = compose_all([task.m1, task.m2,
                          complement_property(task.p).as_csm()])
    guided = compose(trace_csm(tuple(cex), system.alphabet), system)
    return not check_reachability(guided).safe
