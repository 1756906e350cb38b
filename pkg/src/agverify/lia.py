"""Satisfiability of linear integer formulas.

Main path: negation normal form, mod elimination via fresh quotient/remainder
variables, disjunctive splitting, then per-conjunct Fourier-Motzkin over the
rationals with gcd tightening and branch-and-bound on fractional witnesses.

A bounded-enumeration decision procedure lives here too; it is a test oracle
and is never called by the solver itself.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from fractions import Fraction

from . import formula as F


class ResourceError(RuntimeError):
    """Formula exceeded the solver's size or search budget."""


@dataclass(frozen=True)
class SatResult:
    satisfiable: bool
    witness: dict | None = None

    def __bool__(self):
        return self.satisfiable


UNSAT = SatResult(False)

_MAX_DISJUNCTS = 20000
_MAX_BRANCH_NODES = 2000


# ------------------------------------------------------------------- NNF

def _nnf(f, positive=True):
    if isinstance(f, F.Bool):
        return f if positive else F.Bool(not f.value)
    if isinstance(f, F.Cmp):
        return f if positive else _negate_atom(f)
    if isinstance(f, F.Not):
        return _nnf(f.arg, not positive)
    if isinstance(f, F.And):
        args = tuple(_nnf(a, positive) for a in f.args)
        return F.conj(list(args)) if positive else F.disj(list(args))
    if isinstance(f, F.Or):
        args = tuple(_nnf(a, positive) for a in f.args)
        return F.disj(list(args)) if positive else F.conj(list(args))
    if isinstance(f, F.Forall):
        if positive:
            raise ResourceError("universal quantification is not decided directly")
        # not(forall v. b) == exists v. not(b); the bound variable is fresh,
        # so it simply becomes free in the existential query
        return _nnf(f.body, False)
    raise TypeError(f)


_NEG_OP = {"<=": ">", "<": ">=", "=": "!=", ">=": "<", ">": "<=", "!=": "="}


def _negate_atom(a):
    return F.Cmp(_NEG_OP[a.op], a.left, a.right)


# ------------------------------------------------------- mod elimination

def _eliminate_mods(f):
    """Replace each mod unit with a fresh remainder variable.

    Returns (formula-without-mods, defining constraints) where constraints is
    a list of mod-free inequality rows tying each remainder to its term.
    """
    tbl = {}
    rows = []

    def conv_linear(units, const):
        """(units, const) -> mod-free linear row {var: coeff}, const."""
        out = {}
        for key, c in units.items():
            name = key if isinstance(key, str) else remainder_for(key)
            out[name] = out.get(name, 0) + c
        return out, const

    def remainder_for(key):
        if key in tbl:
            return tbl[key]
        _, sub_units, sub_const, k = key
        r = F.fresh_var("_r")
        q = F.fresh_var("_q")
        tbl[key] = r
        inner, ic = conv_linear(dict(sub_units), sub_const)
        # inner + ic == k*q + r, 0 <= r < k
        eq = dict(inner)
        eq[q] = eq.get(q, 0) - k
        eq[r] = eq.get(r, 0) - 1
        rows.append(("=", eq, -ic))
        rows.append(("<=", {r: -1}, 0))
        rows.append(("<=", {r: 1}, k - 1))
        return r

    def conv(g):
        if isinstance(g, F.Bool):
            return g
        if isinstance(g, F.Cmp):
            ul, cl = F.linearize_term(g.left)
            ur, cr = F.linearize_term(g.right)
            lin, c0 = conv_linear(F._merge(ul, ur, -1), 0)
            return ("atom", g.op, lin, (cr - cl) - c0)
        if isinstance(g, F.And):
            return F.And(tuple(conv(a) for a in g.args))
        if isinstance(g, F.Or):
            return F.Or(tuple(conv(a) for a in g.args))
        raise TypeError(g)

    return conv(f), rows


# ------------------------------------------------------------- DNF split

def _dnf(f):
    """Yield conjuncts (lists of atom quadruples) of the NNF, mod-free tree."""
    if isinstance(f, F.Bool):
        if f.value:
            yield []
        return
    if isinstance(f, tuple) and f[0] == "atom":
        yield [f]
        return
    if isinstance(f, F.Or):
        for a in f.args:
            yield from _dnf(a)
        return
    if isinstance(f, F.And):
        pools = [list(_dnf(a)) for a in f.args]
        total = 1
        for p in pools:
            total *= max(len(p), 1)
            if total > _MAX_DISJUNCTS:
                raise ResourceError("formula exceeds disjunct budget")
        for combo in itertools.product(*pools):
            yield [atom for part in combo for atom in part]
        return
    raise TypeError(f)


def _atom_rows(op, lin, const):
    """One atom -> list of ('<=', row, bound) style rows; '!=' must have been
    split before this point."""
    if op == "<=":
        return [(lin, const)]
    if op == "<":
        return [(lin, const - 1)]
    if op == ">=":
        return [({k: -v for k, v in lin.items()}, -const)]
    if op == ">":
        return [({k: -v for k, v in lin.items()}, -const - 1)]
    if op == "=":
        return [(lin, const), ({k: -v for k, v in lin.items()}, -const)]
    raise ValueError(op)


def _split_neq(f):
    """Rewrite '!=' atoms into strict disjunctions (pre-DNF)."""
    if isinstance(f, F.Bool):
        return f
    if isinstance(f, tuple) and f[0] == "atom":
        _, op, lin, const = f
        if op != "!=":
            return f
        return F.Or((("atom", "<", lin, const), ("atom", ">", lin, const)))
    if isinstance(f, F.And):
        return F.And(tuple(_split_neq(a) for a in f.args))
    if isinstance(f, F.Or):
        return F.Or(tuple(_split_neq(a) for a in f.args))
    raise TypeError(f)


# ------------------------------------------- Fourier-Motzkin + bounding

def _tighten(row, bound):
    vs = [v for v in row.values() if v]
    if not vs:
        return {}, bound
    g = 0
    for v in vs:
        g = _gcd(g, abs(v))
    if g > 1:
        row = {k: v // g for k, v in row.items() if v}
        bound = bound // g  # floor: sound and integer-tight
    else:
        row = {k: v for k, v in row.items() if v}
    return row, bound


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _fm_eliminate(ineqs):
    """Fourier-Motzkin elimination with gcd tightening.

    ineqs: list of (row: {var: int}, bound: int) meaning row.x <= bound.
    Returns (feasible_over_rationals, elimination_stack) where the stack
    holds (var, lowers, uppers) in elimination order for back-substitution.
    Bounds combined during elimination use exact Fraction arithmetic.
    """
    work = []
    for row, bound in ineqs:
        row, bound = _tighten(row, bound)
        if not row:
            if bound < 0:
                return False, None
            continue
        work.append((row, Fraction(bound)))

    stack = []
    while True:
        vars_left = set()
        for row, _ in work:
            vars_left.update(row)
        if not vars_left:
            return True, stack
        # eliminate the variable minimizing the product of bound counts
        def cost(v):
            lo = sum(1 for r, _ in work if r.get(v, 0) < 0)
            hi = sum(1 for r, _ in work if r.get(v, 0) > 0)
            return lo * hi
        x = min(sorted(vars_left), key=cost)
        lowers, uppers, rest = [], [], []
        for row, bound in work:
            c = row.get(x, 0)
            if c == 0:
                rest.append((row, bound))
            else:
                # c*x + r.y <= b  ->  x <= (b - r.y)/c (c>0) or >= (c<0)
                red = {k: Fraction(v, abs(c)) for k, v in row.items() if k != x}
                b = Fraction(bound, abs(c))
                (uppers if c > 0 else lowers).append((red, b))
        stack.append((x, lowers, uppers))
        work = rest
        for lrow, lb in lowers:       # -x + l.y <= lb   i.e.  x >= l.y - lb
            for urow, ub in uppers:   # x + u.y <= ub    i.e.  x <= ub - u.y
                row = {}
                for k, v in lrow.items():
                    row[k] = row.get(k, 0) + v
                for k, v in urow.items():
                    row[k] = row.get(k, 0) + v
                row = {k: v for k, v in row.items() if v}
                bound = lb + ub
                if not row:
                    if bound < 0:
                        return False, None
                    continue
                work.append(_tighten_frac(row, bound))


def _tighten_frac(row, bound):
    # clear denominators, then gcd-tighten over the integers
    denom = 1
    for v in row.values():
        denom = denom * v.denominator // _gcd(denom, v.denominator)
    denom = denom * bound.denominator // _gcd(denom, bound.denominator)
    irow = {k: int(v * denom) for k, v in row.items()}
    ibound = bound * denom
    irow, ib = _tighten(irow, int(ibound) if ibound.denominator == 1 else _floor(ibound))
    return irow, Fraction(ib)


def _floor(fr):
    return fr.numerator // fr.denominator


def _back_substitute(stack):
    """Pick a rational witness from the elimination stack, preferring integer
    values inside each interval."""
    env = {}

    def val(row):
        # a variable can drop out of the system entirely (all its rows
        # cancel during elimination); any value works, pin it at 0
        out = Fraction(0)
        for k, c in row.items():
            if k not in env:
                env[k] = Fraction(0)
            out += c * env[k]
        return out

    for x, lowers, uppers in reversed(stack):
        lo = None
        for row, b in lowers:
            cand = val(row) - b
            lo = cand if lo is None or cand > lo else lo
        hi = None
        for row, b in uppers:
            cand = b - val(row)
            hi = cand if hi is None or cand < hi else hi
        if lo is None and hi is None:
            env[x] = Fraction(0)
        elif lo is None:
            env[x] = Fraction(min(0, _floor(hi)))
        elif hi is None:
            env[x] = Fraction(max(0, -(-lo.numerator // lo.denominator)))
        else:
            ilo = -(-lo.numerator // lo.denominator)  # ceil
            ihi = _floor(hi)
            if ilo <= ihi:
                env[x] = Fraction(max(ilo, min(ihi, 0)))
            else:
                env[x] = (lo + hi) / 2
    return env


def _solve_conjunct(ineqs, budget):
    """Integer feasibility of a conjunction of rows; returns witness or None."""
    if budget[0] <= 0:
        raise ResourceError("branch-and-bound budget exhausted")
    budget[0] -= 1
    feasible, stack = _fm_eliminate(ineqs)
    if not feasible:
        return None
    env = _back_substitute(stack)
    frac = [(k, v) for k, v in env.items() if v.denominator != 1]
    if not frac:
        return {k: int(v) for k, v in env.items()}
    x, v = frac[0]
    lo_branch = ineqs + [({x: 1}, _floor(v))]
    w = _solve_conjunct(lo_branch, budget)
    if w is not None:
        return w
    hi_branch = ineqs + [({x: -1}, -(_floor(v) + 1))]
    return _solve_conjunct(hi_branch, budget)


def _quantified(f):
    if isinstance(f, F.Forall):
        return True
    if isinstance(f, F.Not):
        return _quantified(f.arg)
    if isinstance(f, (F.And, F.Or)):
        return any(_quantified(a) for a in f.args)
    return False


# ---------------------------------------------------------------- solver

class Solver:
    """Decides linear integer satisfiability; optionally dumps each query in
    SMT-LIB 2 form (QF_LIA) for offline cross-checking."""

    def __init__(self, dump_dir=None):
        self.dump_dir = dump_dir
        self._dump_seq = 0
        self.query_count = 0

    def is_satisfiable(self, f, nonneg=()):
        """SatResult for `f`; variables named in `nonneg` (or all variables if
        nonneg == 'all') are constrained to be >= 0."""
        self.query_count += 1
        if self.dump_dir is not None:
            self._dump(f, nonneg)
        fvars = F.variables(f)
        if nonneg == "all":
            nonneg = fvars
        nnf = _nnf(f)
        core, mod_rows = _eliminate_mods(nnf)
        core = _split_neq(core)
        base_rows = []
        for op, lin, const in mod_rows:
            base_rows.extend(_atom_rows("<=" if op == "<=" else op, lin, const))
        for v in nonneg:
            if v in fvars:
                base_rows.append(({v: -1}, 0))
        budget = [_MAX_BRANCH_NODES]
        for conjunct in _dnf(core):
            rows = list(base_rows)
            ok = True
            for _, op, lin, const in conjunct:
                if op == "!=":  # split earlier; defensive
                    ok = False
                    break
                rows.extend(_atom_rows(op, lin, const))
            if not ok:
                continue
            w = _solve_conjunct(rows, budget)
            if w is not None:
                witness = {v: w.get(v, 0) for v in fvars}
                if not _quantified(f):
                    assert F.evaluate(f, witness), "solver produced a bad witness"
                return SatResult(True, witness)
        return UNSAT

    def is_valid(self, f, nonneg=()):
        """f holds for all integer valuations (restricted to nonneg if given)."""
        return not self.is_satisfiable(F.negate(f), nonneg)

    # SMT-LIB dump -------------------------------------------------------
    def _dump(self, f, nonneg):
        os.makedirs(self.dump_dir, exist_ok=True)
        path = os.path.join(self.dump_dir, "query_%d.smt2" % self._dump_seq)
        self._dump_seq += 1
        fvars = sorted(F.variables(f))
        lines = ["(set-logic QF_LIA)"]
        for v in fvars:
            lines.append("(declare-const %s Int)" % v)
        if nonneg == "all":
            nonneg = fvars
        for v in nonneg:
            if v in fvars:
                lines.append("(assert (>= %s 0))" % v)
        lines.append("(assert %s)" % _smt_formula(f))
        lines.append("(check-sat)")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def _smt_term(t):
    if isinstance(t, F.Var):
        return t.name
    if isinstance(t, F.Const):
        return str(t.value) if t.value >= 0 else "(- %d)" % -t.value
    if isinstance(t, F.Add):
        return "(+ %s %s)" % (_smt_term(t.left), _smt_term(t.right))
    if isinstance(t, F.Sub):
        return "(- %s %s)" % (_smt_term(t.left), _smt_term(t.right))
    if isinstance(t, F.Mul):
        return "(* %d %s)" % (t.coeff, _smt_term(t.term))
    if isinstance(t, F.Mod):
        return "(mod %s %d)" % (_smt_term(t.term), t.modulus)
    raise TypeError(t)


def _smt_formula(f):
    if isinstance(f, F.Bool):
        return "true" if f.value else "false"
    if isinstance(f, F.Cmp):
        op = {"=": "=", "!=": "distinct"}.get(f.op, f.op)
        return "(%s %s %s)" % (op, _smt_term(f.left), _smt_term(f.right))
    if isinstance(f, F.Not):
        return "(not %s)" % _smt_formula(f.arg)
    if isinstance(f, F.And):
        return "(and %s)" % " ".join(_smt_formula(a) for a in f.args) if f.args else "true"
    if isinstance(f, F.Or):
        return "(or %s)" % " ".join(_smt_formula(a) for a in f.args) if f.args else "false"
    if isinstance(f, F.Forall):
        return "(forall ((%s Int)) %s)" % (f.var, _smt_formula(f.body))
    raise TypeError(f)


_default_solver = Solver()


def is_satisfiable(f, nonneg=()):
    return _default_solver.is_satisfiable(f, nonneg)


def is_valid(f, nonneg=()):
    return _default_solver.is_valid(f, nonneg)


# ------------------------------------------------------------ test oracle

def enumerate_satisfiable(f, nonneg=(), bound=None):
    """Bounded-enumeration oracle: search integer valuations with |x| <= B
    where B = 10 * (largest constant + 1).  Complete only when a computed
    variable bound argument applies; used in tests, never by the solver."""
    fvars = sorted(F.variables(f))
    if bound is None:
        bound = 10 * (_largest_const(f) + 1)
    if nonneg == "all":
        nonneg = fvars
    rng = {}
    for v in fvars:
        lo = 0 if v in nonneg else -bound
        rng[v] = range(lo, bound + 1)
    for combo in itertools.product(*(rng[v] for v in fvars)):
        env = dict(zip(fvars, combo))
        if F.evaluate(f, env):
            return SatResult(True, env)
    return UNSAT


def _largest_const(f):
    best = 0

    def walk_t(t):
        nonlocal best
        if isinstance(t, F.Const):
            best = max(best, abs(t.value))
        elif isinstance(t, (F.Add, F.Sub)):
            walk_t(t.left)
            walk_t(t.right)
        elif isinstance(t, F.Mul):
            best = max(best, abs(t.coeff))
            walk_t(t.term)
        elif isinstance(t, F.Mod):
            best = max(best, t.modulus)
            walk_t(t.term)

    def walk(g):
        if isinstance(g, F.Cmp):
            walk_t(g.left)
            walk_t(g.right)
        elif isinstance(g, F.Not):
            walk(g.arg)
        elif isinstance(g, (F.And, F.Or)):
            for a in g.args:
                walk(a)
        elif isinstance(g, F.Forall):
            walk(g.body)

    walk(f)
    return best
