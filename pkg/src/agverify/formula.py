"""Linear integer formulas: terms, boolean structure, evaluation, substitution,
canonical atom normalization and a small concrete-syntax parser.

Atoms compare two linear terms; terms are integer-coefficient combinations of
variables and constants, plus ``t % k`` for a positive constant k.  Formulas
are finite trees of and/or/not over atoms.  ``Forall`` appears only in results
of weakest-precondition computation over nondeterministic reads; it is never
produced by the parser and never stored in components.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Add:
    left: object
    right: object

    def __str__(self):
        return "%s + %s" % (self.left, self.right)


@dataclass(frozen=True)
class Sub:
    left: object
    right: object

    def __str__(self):
        return "%s - %s" % (self.left, _paren_term(self.right))


@dataclass(frozen=True)
class Mul:
    coeff: int
    term: object

    def __str__(self):
        return "%d * %s" % (self.coeff, _paren_term(self.term))


@dataclass(frozen=True)
class Mod:
    term: object
    modulus: int

    def __post_init__(self):
        if self.modulus <= 0:
            raise ValueError("modulus must be a positive constant")

    def __str__(self):
        return "(%s %% %d)" % (self.term, self.modulus)


Term = (Var, Const, Add, Sub, Mul, Mod)


def _paren_term(t):
    if isinstance(t, (Var, Const, Mod)):
        return str(t)
    return "(%s)" % t


# ---------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Bool:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


TRUE = Bool(True)
FALSE = Bool(False)

CMP_OPS = ("<=", "<", "=", ">=", ">", "!=")


@dataclass(frozen=True)
class Cmp:
    op: str
    left: object
    right: object

    def __post_init__(self):
        if self.op not in CMP_OPS:
            raise ValueError("bad comparison op %r" % self.op)

    def __str__(self):
        return "%s %s %s" % (self.left, self.op, self.right)


@dataclass(frozen=True)
class Not:
    arg: object

    def __str__(self):
        return "!(%s)" % self.arg


@dataclass(frozen=True)
class And:
    args: tuple

    def __str__(self):
        if not self.args:
            return "true"
        return " && ".join(_paren_formula(a) for a in self.args)


@dataclass(frozen=True)
class Or:
    args: tuple

    def __str__(self):
        if not self.args:
            return "false"
        return " || ".join(_paren_formula(a) for a in self.args)


@dataclass(frozen=True)
class Forall:
    var: str
    body: object

    def __str__(self):
        return "forall %s. (%s)" % (self.var, self.body)


def _paren_formula(f):
    if isinstance(f, (Or, And, Forall)):
        return "(%s)" % f
    return str(f)


def conj(args):
    args = [a for a in args if a != TRUE]
    if any(a == FALSE for a in args):
        return FALSE
    if not args:
        return TRUE
    if len(args) == 1:
        return args[0]
    return And(tuple(args))


def disj(args):
    args = [a for a in args if a != FALSE]
    if any(a == TRUE for a in args):
        return TRUE
    if not args:
        return FALSE
    if len(args) == 1:
        return args[0]
    return Or(tuple(args))


def implies(a, b):
    return disj([negate(a), b])


def negate(f):
    if isinstance(f, Not):
        return f.arg
    return Not(f)


# ---------------------------------------------------------------- traversal

def term_variables(t):
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Const):
        return set()
    if isinstance(t, (Add, Sub)):
        return term_variables(t.left) | term_variables(t.right)
    if isinstance(t, Mul):
        return term_variables(t.term)
    if isinstance(t, Mod):
        return term_variables(t.term)
    raise TypeError(t)


def variables(f):
    if isinstance(f, Bool):
        return set()
    if isinstance(f, Cmp):
        return term_variables(f.left) | term_variables(f.right)
    if isinstance(f, Not):
        return variables(f.arg)
    if isinstance(f, (And, Or)):
        out = set()
        for a in f.args:
            out |= variables(a)
        return out
    if isinstance(f, Forall):
        return variables(f.body) - {f.var}
    raise TypeError(f)


def substitute_term(t, subst):
    """Replace variables in term `t` per `subst` (name -> Term), in parallel."""
    if isinstance(t, Var):
        return subst.get(t.name, t)
    if isinstance(t, Const):
        return t
    if isinstance(t, Add):
        return Add(substitute_term(t.left, subst), substitute_term(t.right, subst))
    if isinstance(t, Sub):
        return Sub(substitute_term(t.left, subst), substitute_term(t.right, subst))
    if isinstance(t, Mul):
        return Mul(t.coeff, substitute_term(t.term, subst))
    if isinstance(t, Mod):
        return Mod(substitute_term(t.term, subst), t.modulus)
    raise TypeError(t)


def substitute(f, subst):
    if isinstance(f, Bool):
        return f
    if isinstance(f, Cmp):
        return Cmp(f.op, substitute_term(f.left, subst), substitute_term(f.right, subst))
    if isinstance(f, Not):
        return Not(substitute(f.arg, subst))
    if isinstance(f, And):
        return And(tuple(substitute(a, subst) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(substitute(a, subst) for a in f.args))
    if isinstance(f, Forall):
        inner = {k: v for k, v in subst.items() if k != f.var}
        # bound variables are always fresh, so capture cannot occur
        return Forall(f.var, substitute(f.body, inner))
    raise TypeError(f)


# ---------------------------------------------------------------- evaluation

def eval_term(t, env):
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Add):
        return eval_term(t.left, env) + eval_term(t.right, env)
    if isinstance(t, Sub):
        return eval_term(t.left, env) - eval_term(t.right, env)
    if isinstance(t, Mul):
        return t.coeff * eval_term(t.term, env)
    if isinstance(t, Mod):
        return eval_term(t.term, env) % t.modulus
    raise TypeError(t)


_CMJ = {
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    "=": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
    "!=": lambda a, b: a != b,
}


def evaluate(f, env, forall_bound=None):
    """Evaluate under an integer valuation.

    `forall_bound`, when given, evaluates Forall over [0, forall_bound]; it
    makes universal formulas decidable for bounded test oracles only.
    """
    if isinstance(f, Bool):
        return f.value
    if isinstance(f, Cmp):
        return _CMJ[f.op](eval_term(f.left, env), eval_term(f.right, env))
    if isinstance(f, Not):
        return not evaluate(f.arg, env, forall_bound)
    if isinstance(f, And):
        return all(evaluate(a, env, forall_bound) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, env, forall_bound) for a in f.args)
    if isinstance(f, Forall):
        if forall_bound is None:
            raise ValueError("cannot evaluate a universal formula exactly")
        env2 = dict(env)
        for v in range(forall_bound + 1):
            env2[f.var] = v
            if not evaluate(f.body, env2, forall_bound):
                return False
        return True
    raise TypeError(f)


# ------------------------------------------------------- linear normal form

def linearize_term(t):
    """Term -> (units, const) where units maps a unit key to an int coefficient.

    A unit key is a variable name, or ('mod', units*, const, k) for a mod
    subterm with canonically linearized argument.
    """
    if isinstance(t, Var):
        return {t.name: 1}, 0
    if isinstance(t, Const):
        return {}, t.value
    if isinstance(t, Add):
        u1, c1 = linearize_term(t.left)
        u2, c2 = linearize_term(t.right)
        return _merge(u1, u2, 1), c1 + c2
    if isinstance(t, Sub):
        u1, c1 = linearize_term(t.left)
        u2, c2 = linearize_term(t.right)
        return _merge(u1, u2, -1), c1 - c2
    if isinstance(t, Mul):
        u, c = linearize_term(t.term)
        return {k: t.coeff * v for k, v in u.items() if t.coeff * v != 0}, t.coeff * c
    if isinstance(t, Mod):
        u, c = linearize_term(t.term)
        key = ("mod", tuple(sorted(u.items())), c, t.modulus)
        return {key: 1}, 0
    raise TypeError(t)


def _merge(u1, u2, sign):
    out = dict(u1)
    for k, v in u2.items():
        out[k] = out.get(k, 0) + sign * v
        if out[k] == 0:
            del out[k]
    return out


def _unit_term(key):
    if isinstance(key, str):
        return Var(key)
    _, units, const, k = key
    return Mod(term_from_linear(dict(units), const), k)


def term_from_linear(units, const):
    parts = []
    for key in sorted(units, key=repr):
        c = units[key]
        base = _unit_term(key)
        parts.append(base if c == 1 else Mul(c, base))
    t = None
    for p in parts:
        t = p if t is None else Add(t, p)
    if t is None:
        return Const(const)
    if const:
        t = Add(t, Const(const))
    return t


def _gcd_all(values):
    g = 0
    for v in values:
        g = _gcd(g, abs(v))
    return g or 1


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def canonical_atom(f):
    """Normalize a comparison into a canonical polarity-free atom, or a Bool.

    The result is Cmp('<=', t, Const(b)) or Cmp('=', t, Const(b)) with gcd-
    reduced coefficients and positive leading coefficient (for '='), so that
    an atom and its negation normalize to the same predicate.  Returns None
    for constant atoms.
    """
    if not isinstance(f, Cmp):
        raise TypeError(f)
    ul, cl = linearize_term(f.left)
    ur, cr = linearize_term(f.right)
    units = _merge(ul, ur, -1)
    const = cr - cl  # units . x  <op>  const
    if not units:
        return None
    op = f.op
    if op == ">":
        op, units, const = "<=", _neg(units), -const - 1
    elif op == ">=":
        op, units, const = "<=", _neg(units), -const
    elif op == "<":
        op, const = "<=", const - 1
    elif op == "!=":
        op = "="  # predicate family of the equality
    g = _gcd_all(units.values())
    if op == "=":
        if const % g:
            return None  # equivalent to a constant (false) atom
        units = {k: v // g for k, v in units.items()}
        const = const // g
        lead = units[min(units, key=repr)]
        if lead < 0:
            units, const = _neg(units), -const
    else:
        units = {k: v // g for k, v in units.items()}
        const = const // g  # floor is the integer-tight bound
        # canonicalize the negation pair {t<=b, t>b}: pick the orientation
        # with the lexicographically smaller unit signature
        neg_units = _neg(units)
        if repr(sorted(neg_units.items(), key=repr)) < repr(sorted(units.items(), key=repr)):
            units, const = neg_units, -const - 1
    return Cmp(op, term_from_linear(units, 0), Const(const))


def _neg(units):
    return {k: -v for k, v in units.items()}


def harvest_atoms(f):
    """Collect normalized comparison atoms, skipping any atom that mentions a
    universally bound variable."""
    out = []

    def walk(g, bound):
        if isinstance(g, Bool):
            return
        if isinstance(g, Cmp):
            if term_variables(g.left) & bound or term_variables(g.right) & bound:
                return
            a = canonical_atom(g)
            if a is not None and a not in out:
                out.append(a)
            return
        if isinstance(g, Not):
            walk(g.arg, bound)
            return
        if isinstance(g, (And, Or)):
            for a in g.args:
                walk(a, bound)
            return
        if isinstance(g, Forall):
            walk(g.body, bound | {g.var})
            return
        raise TypeError(g)

    walk(f, set())
    return out


# ---------------------------------------------------------------- parsing

class FormulaSyntaxError(ValueError):
    pass


def _tokenize(text):
    toks = []
    i, n = 0, len(text)
    two = ("<=", ">=", "!=", "==", "&&", "||")
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if text[i:i + 2] in two:
            toks.append(text[i:i + 2])
            i += 2
        elif c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("int", int(text[i:j])))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("name", text[i:j]))
            i = j
        elif c in "()<>=!%*+-":
            toks.append(c)
            i += 1
        else:
            raise FormulaSyntaxError("unexpected character %r" % c)
    return toks


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, expected=None):
        t = self.peek()
        if t is None:
            raise FormulaSyntaxError("unexpected end of formula")
        if expected is not None and t != expected:
            raise FormulaSyntaxError("expected %r, got %r" % (expected, t))
        self.pos += 1
        return t

    # formula := conj ('||' conj)*
    def formula(self):
        parts = [self.conjunct()]
        while self.peek() == "||":
            self.take()
            parts.append(self.conjunct())
        return disj(parts)

    def conjunct(self):
        parts = [self.unary()]
        while self.peek() == "&&":
            self.take()
            parts.append(self.unary())
        return conj(parts)

    def unary(self):
        t = self.peek()
        if t == "!":
            self.take()
            return negate(self.unary())
        if t == ("name", "true"):
            self.take()
            return TRUE
        if t == ("name", "false"):
            self.take()
            return FALSE
        if t == "(":
            # could be parenthesized formula or a term; try formula first
            save = self.pos
            try:
                self.take()
                f = self.formula()
                self.take(")")
                if self.peek() in CMP_OPS or self.peek() == "==":
                    raise FormulaSyntaxError("term context")
                return f
            except FormulaSyntaxError:
                self.pos = save
        return self.atom()

    def atom(self):
        left = self.term()
        t = self.peek()
        if t == "==":
            op = "="
            self.take()
        elif t in CMP_OPS:
            op = self.take()
        else:
            raise FormulaSyntaxError("expected comparison, got %r" % (t,))
        right = self.term()
        return Cmp(op, left, right)

    def term(self):
        t = self.factor()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.factor()
            t = Add(t, rhs) if op == "+" else Sub(t, rhs)
        return t

    def factor(self):
        t = self.primary()
        while self.peek() in ("%", "*"):
            op = self.take()
            if op == "%":
                k = self.take()
                if not (isinstance(k, tuple) and k[0] == "int"):
                    raise FormulaSyntaxError("modulus must be a constant")
                t = Mod(t, k[1])
            else:
                rhs = self.primary()
                t = _mk_mul(t, rhs)
        return t

    def primary(self):
        t = self.peek()
        if t == "(":
            self.take()
            inner = self.term()
            self.take(")")
            return inner
        if t == "-":
            self.take()
            return _mk_mul(Const(-1), self.primary())
        if isinstance(t, tuple) and t[0] == "int":
            self.take()
            return Const(t[1])
        if isinstance(t, tuple) and t[0] == "name":
            self.take()
            return Var(t[1])
        raise FormulaSyntaxError("expected term, got %r" % (t,))


def _mk_mul(a, b):
    if isinstance(a, Const):
        return Mul(a.value, b) if not isinstance(b, Const) else Const(a.value * b.value)
    if isinstance(b, Const):
        return Mul(b.value, a)
    raise FormulaSyntaxError("nonlinear product")


def parse_formula(text):
    p = _Parser(_tokenize(text))
    f = p.formula()
    if p.peek() is not None:
        raise FormulaSyntaxError("trailing input at %r" % (p.peek(),))
    return f


def parse_term(text):
    p = _Parser(_tokenize(text))
    t = p.term()
    if p.peek() is not None:
        raise FormulaSyntaxError("trailing input at %r" % (p.peek(),))
    return t


_fresh_counter = itertools.count()


def fresh_var(prefix="_v"):
    return "%s%d" % (prefix, next(_fresh_counter))
