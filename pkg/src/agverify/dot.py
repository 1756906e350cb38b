"""Graphviz DOT export for machines and automata."""

from .csm import TAU, Csm, Dfa


def _quote(s):
    return '"%s"' % str(s).replace('"', '\\"')


def to_dot(m, name="machine"):
    """One node per state, labeled edges; error states double-circled."""
    lines = ["digraph %s {" % _quote(name).strip('"').replace(" ", "_"),
             "  rankdir=LR;",
             '  __init [shape=point, label=""];']
    if isinstance(m, Dfa):
        errors = m.error_states or m.rejecting_states()
        trans = [(q, a, m.delta[(q, a)]) for q in range(m.n_states)
                 for a in sorted(m.alphabet)]
    else:
        errors = m.error_states
        trans = [(t.src, t.label, t.dst) for t in m.transitions]
    for q in range(m.n_states):
        shape = "doublecircle" if q in errors else "circle"
        lines.append("  n%d [shape=%s, label=%s];" % (q, shape, _quote(m.state_name(q))))
    lines.append("  __init -> n%d;" % m.initial)
    for src, label, dst in trans:
        style = ', style=dashed' if label == TAU else ""
        lines.append("  n%d -> n%d [label=%s%s];" % (src, dst, _quote(label), style))
    lines.append("}")
    return "\n".join(lines) + "\n"
