"""Bounded-exploration oracle for interface safety and permissiveness."""

from agverify import formula as FF
from agverify.csm import project_trace
from agverify.symbolic import (SymbolicComponent, as_symbolic,
                               concrete_bounded_language)


def check_safe_permissive(c, iface, sigma, depth, bound=20):
    """Safety and permissiveness versus the bounded concrete oracle.

    A word is unsafe when some concrete execution consistent with it errs;
    such words (and their extensions) must be rejected.  A word the
    component can follow without any possibility of error must be accepted.
    """
    sym = c if isinstance(c, SymbolicComponent) else as_symbolic(c)
    traces = concrete_bounded_language(sym, depth + 4, havoc_bound=bound)
    # sigma-words with a concrete execution whose prefix errs must be
    # rejected, along with every extension
    unsafe = {project_trace(t, sigma)
              for t in unsafe_words(sym, sigma, depth, bound)}
    for w in sorted(unsafe):
        if len(w) <= depth:
            assert not iface.accepts(w), ("unsafe accepted", w)
    executable = {project_trace(t, sigma) for t in traces}
    for w in sorted(executable):
        if len(w) <= depth and not any(w[:len(u)] == u for u in unsafe):
            assert iface.accepts(w), ("permissive miss", w)


def unsafe_words(sym, sigma, depth, bound):
    """Words with a concrete execution reaching an error, by explicit
    bounded exploration.  Depth bounds the sigma-projected length; the raw
    trace horizon matches the executable-word oracle (depth + 4)."""
    names = sym.variables()
    init = (sym.initial, tuple(sym.init[v] for v in names))
    seen_words = set()
    words = {(): {init}}
    if sym.initial in sym.error_locations:
        seen_words.add(())
    for _ in range((depth + 4) * 2):
        nxt = {}
        for w, states in words.items():
            for st in states:
                loc, vals = st
                if loc in sym.error_locations:
                    continue
                env = dict(zip(names, vals))
                for e in sym.outgoing(loc):
                    if not FF.evaluate(e.guard, env):
                        continue
                    hav = sorted(e.havocked())
                    det = e.assignment()
                    picks = [{}]
                    for v in hav:
                        picks = [dict(p, **{v: x}) for p in picks
                                 for x in range(bound + 1)]
                    for p in picks:
                        env2 = dict(env)
                        env2.update(p)
                        ok = True
                        for v, t in det.items():
                            val = FF.eval_term(t, env)
                            if sym.modes.get(v) == "nat" and val < 0:
                                ok = False
                                break
                            env2[v] = val
                        if not ok:
                            continue
                        w2 = w + (e.label,) if e.label != "tau" else w
                        st2 = (e.dst, tuple(env2[v] for v in names))
                        if len(w2) > depth + 4:
                            continue
                        if len(project_trace(w2, sigma)) > depth:
                            continue
                        nxt.setdefault(w2, set()).add(st2)
                        if e.dst in sym.error_locations:
                            seen_words.add(w2)
        words = nxt
        if not words:
            break
    return seen_words
