"""Textual model format.

A model file is a sequence of named blocks:

    csm Receiver {
      alphabet { send, out, ack }
      init r0;
      r0 -send-> r1;
      r1 -out-> r2;
      r2 -ack-> r0;
      error rbad;            // optional, repeatable
    }

    property Order {         // same syntax, must be deterministic
      alphabet { in, out }
      init p0;
      p0 -in-> p1;
      p1 -out-> p0;
    }

    symbolic Sender {
      alphabet { in, read, mod, sendValid, sendInvalid, ack }
      var x: nat = 0;        // or: var y: int = -3;
      init l0;
      l0 -in-> l1;
      l1 -read-> l2 { havoc(x) };
      l2 -mod-> l3 { x := x % 5 };
      l3 -sendInvalid-> l0 [x > 5];
      l3 -sendValid-> l4 [x <= 5];
      l4 -ack-> l0;
    }

    preds initial { x = 0; x > 5; }

`//` starts a comment; whitespace is free-form; `tau` names the internal
action.  Parsing then printing then parsing again yields a structurally
identical model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import formula as F
from .csm import TAU, Csm, ModelError
from .symbolic import Assign, Havoc, PredicateSet, SymEdge, SymbolicComponent


class ParseError(ValueError):
    def __init__(self, msg, line=None, col=None):
        if line is not None:
            msg = "line %d, column %d: %s" % (line, col, msg)
        super().__init__(msg)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class CsmBlock:
    kind: str            # "csm" | "property"
    name: str
    alphabet: tuple      # sorted action names
    states: tuple        # in declaration order
    initial: str
    transitions: tuple   # (src, label, dst)
    errors: tuple = ()

    def to_csm(self):
        idx = {s: i for i, s in enumerate(self.states)}
        trs = [(idx[s], a, idx[d]) for s, a, d in self.transitions]
        m = Csm(len(self.states), self.alphabet, trs, idx[self.initial],
                {idx[e] for e in self.errors}, self.states)
        if self.kind == "property" and not m.is_deterministic():
            raise ModelError("property %s must be deterministic (no tau, no "
                             "two transitions on one action from a state)"
                             % self.name)
        return m


@dataclass(frozen=True)
class VarDecl:
    name: str
    mode: str            # "nat" | "int"
    init: int


@dataclass(frozen=True)
class SymbolicBlock:
    name: str
    alphabet: tuple
    variables: tuple     # VarDecl, declaration order
    locations: tuple
    initial: str
    edges: tuple         # SymEdge over location names
    errors: tuple = ()

    def to_component(self):
        return SymbolicComponent(
            self.locations, self.alphabet, self.edges, self.initial,
            {v.name: v.init for v in self.variables},
            modes={v.name: v.mode for v in self.variables},
            error_locations=self.errors, name=self.name)


@dataclass(frozen=True)
class PredsBlock:
    name: str
    formulas: tuple

    def to_predicates(self):
        return PredicateSet(self.formulas)


@dataclass(frozen=True)
class ModelFile:
    blocks: tuple

    def __getitem__(self, name):
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def __contains__(self, name):
        return any(b.name == name for b in self.blocks)

    def names(self):
        return [b.name for b in self.blocks]


# ----------------------------------------------------------------- scanner

class _Scanner:
    def __init__(self, text):
        self.text = _strip_comments(text)
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self):
        self._skip_ws()
        return self.pos >= len(self.text)

    def location(self, pos=None):
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, msg, pos=None):
        line, col = self.location(pos)
        raise ParseError(msg, line, col)

    def peek_char(self):
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take_char(self, c):
        if self.peek_char() != c:
            self.error("expected %r, got %r" % (c, self.peek_char() or "EOF"))
        self.pos += 1

    def word(self):
        self._skip_ws()
        i = self.pos
        n = len(self.text)
        if i >= n or not (self.text[i].isalpha() or self.text[i] == "_"):
            self.error("expected a name")
        j = i
        while j < n and (self.text[j].isalnum() or self.text[j] == "_"):
            j += 1
        self.pos = j
        return self.text[i:j]

    def integer(self):
        self._skip_ws()
        i = self.pos
        n = len(self.text)
        j = i + 1 if i < n and self.text[i] == "-" else i
        while j < n and self.text[j].isdigit():
            j += 1
        if j == i or self.text[i:j] == "-":
            self.error("expected an integer")
        self.pos = j
        return int(self.text[i:j])

    def try_char(self, c):
        if self.peek_char() == c:
            self.pos += 1
            return True
        return False

    def match(self, s):
        """Consume the literal string s (after whitespace) if present."""
        self._skip_ws()
        if self.text.startswith(s, self.pos):
            self.pos += len(s)
            return True
        return False

    def until(self, close):
        """Raw text up to an unnested closing character, consumed."""
        self._skip_ws()
        depth = 0
        i = self.pos
        n = len(self.text)
        while i < n:
            c = self.text[i]
            if c in "([{":
                depth += 1
            elif c in ")]}":
                if depth == 0 and c == close:
                    out = self.text[self.pos:i]
                    self.pos = i + 1
                    return out
                depth -= 1
            elif c == close and depth == 0:
                out = self.text[self.pos:i]
                self.pos = i + 1
                return out
            i += 1
        self.error("unterminated %r section" % close)


def _strip_comments(text):
    out = []
    for line in text.split("\n"):
        cut = line.find("//")
        out.append(line if cut < 0 else line[:cut])
    return "\n".join(out)


# ----------------------------------------------------------------- parser

def parse_model(text):
    sc = _Scanner(text)
    blocks = []
    names = set()
    while not sc.at_end():
        kind = sc.word()
        if kind not in ("csm", "property", "symbolic", "preds"):
            sc.error("unknown block kind %r" % kind)
        name = sc.word()
        if name in names:
            sc.error("duplicate block name %r" % name)
        names.add(name)
        sc.take_char("{")
        if kind == "preds":
            blocks.append(_parse_preds(sc, name))
        elif kind == "symbolic":
            blocks.append(_parse_symbolic(sc, name))
        else:
            blocks.append(_parse_csm(sc, kind, name))
    return ModelFile(tuple(blocks))


def _parse_alphabet(sc):
    sc.take_char("{")
    actions = []
    while not sc.try_char("}"):
        actions.append(sc.word())
        sc.try_char(",")
    if TAU in actions:
        sc.error("tau is reserved and may not be declared")
    if len(set(actions)) != len(actions):
        sc.error("duplicate action in alphabet")
    return tuple(actions)


def _parse_arrow_label(sc):
    sc.take_char("-")
    label = sc.word()
    if not sc.match("->"):
        sc.error("expected '->' after transition label")
    return label


def _parse_csm(sc, kind, name):
    alphabet = None
    states = []
    seen = set()
    initial = None
    transitions = []
    errors = []

    def state(s):
        if s not in seen:
            seen.add(s)
            states.append(s)
        return s

    while not sc.try_char("}"):
        pos = sc.pos
        w = sc.word()
        if w == "alphabet":
            if alphabet is not None:
                sc.error("alphabet declared twice", pos)
            alphabet = _parse_alphabet(sc)
        elif w == "init":
            if initial is not None:
                sc.error("init declared twice", pos)
            initial = state(sc.word())
            sc.take_char(";")
        elif w == "error":
            errors.append(state(sc.word()))
            sc.take_char(";")
        else:
            src = state(w)
            label = _parse_arrow_label(sc)
            dst = state(sc.word())
            sc.take_char(";")
            if alphabet is None:
                sc.error("alphabet must be declared before transitions", pos)
            if label != TAU and label not in alphabet:
                sc.error("action %r not in alphabet" % label, pos)
            transitions.append((src, label, dst))
    if alphabet is None or initial is None:
        raise ParseError("block %s needs an alphabet and an init state" % name)
    block = CsmBlock(kind, name, alphabet, tuple(states), initial,
                     tuple(transitions), tuple(errors))
    block.to_csm()  # validate eagerly, with the property determinism check
    return block


def _parse_symbolic(sc, name):
    alphabet = None
    variables = []
    locations = []
    seen = set()
    initial = None
    edges = []
    errors = []

    def loc(s):
        if s not in seen:
            seen.add(s)
            locations.append(s)
        return s

    while not sc.try_char("}"):
        pos = sc.pos
        w = sc.word()
        if w == "alphabet":
            alphabet = _parse_alphabet(sc)
        elif w == "var":
            vname = sc.word()
            sc.take_char(":")
            mode = sc.word()
            if mode not in ("nat", "int"):
                sc.error("variable mode must be nat or int", pos)
            sc.take_char("=")
            value = sc.integer()
            sc.take_char(";")
            variables.append(VarDecl(vname, mode, value))
        elif w == "init":
            initial = loc(sc.word())
            sc.take_char(";")
        elif w == "error":
            errors.append(loc(sc.word()))
            sc.take_char(";")
        else:
            src = loc(w)
            label = _parse_arrow_label(sc)
            dst = loc(sc.word())
            guard = F.TRUE
            updates = ()
            if sc.peek_char() == "[":
                sc.take_char("[")
                raw = sc.until("]")
                try:
                    guard = F.parse_formula(raw)
                except F.FormulaSyntaxError as e:
                    sc.error("bad guard: %s" % e, pos)
            if sc.peek_char() == "{":
                sc.take_char("{")
                raw = sc.until("}")
                updates = _parse_updates(raw, sc, pos)
            sc.take_char(";")
            edges.append(SymEdge(src, label, guard, updates, dst))
    if alphabet is None or initial is None:
        raise ParseError("block %s needs an alphabet and an init location"
                         % name)
    block = SymbolicBlock(name, alphabet, tuple(variables), tuple(locations),
                          initial, tuple(edges), tuple(errors))
    block.to_component()  # validate eagerly
    return block


def _parse_updates(raw, sc, pos):
    updates = []
    for part in raw.split(";"):
        part = part.strip()
        if not part:
            continue
        if part.startswith("havoc"):
            inner = part[len("havoc"):].strip()
            if not (inner.startswith("(") and inner.endswith(")")):
                sc.error("malformed havoc: %r" % part, pos)
            updates.append(Havoc(inner[1:-1].strip()))
            continue
        if ":=" not in part:
            sc.error("update must be 'v := term' or 'havoc(v)': %r" % part,
                     pos)
        lhs, rhs = part.split(":=", 1)
        try:
            updates.append(Assign(lhs.strip(), F.parse_term(rhs)))
        except F.FormulaSyntaxError as e:
            sc.error("bad update term: %s" % e, pos)
    return tuple(updates)


def _parse_preds(sc, name):
    formulas = []
    while not sc.try_char("}"):
        raw = sc.until(";")
        try:
            formulas.append(F.parse_formula(raw))
        except F.FormulaSyntaxError as e:
            sc.error("bad predicate: %s" % e)
    return PredsBlock(name, tuple(formulas))


# ---------------------------------------------------------------- printer

def print_model(model):
    return "\n".join(_print_block(b) for b in model.blocks)


def _print_block(b):
    if isinstance(b, PredsBlock):
        body = "".join("  %s;\n" % f for f in b.formulas)
        return "preds %s {\n%s}\n" % (b.name, body)
    out = ["%s %s {" % ("symbolic" if isinstance(b, SymbolicBlock)
                        else b.kind, b.name)]
    out.append("  alphabet { %s }" % ", ".join(b.alphabet))
    if isinstance(b, SymbolicBlock):
        for v in b.variables:
            out.append("  var %s: %s = %d;" % (v.name, v.mode, v.init))
    out.append("  init %s;" % b.initial)
    if isinstance(b, SymbolicBlock):
        for e in b.edges:
            line = "  %s -%s-> %s" % (e.src, e.label, e.dst)
            if e.guard != F.TRUE:
                line += " [%s]" % e.guard
            if e.updates:
                line += " { %s }" % "; ".join(str(u) for u in e.updates)
            out.append(line + ";")
    else:
        for s, a, d in b.transitions:
            out.append("  %s -%s-> %s;" % (s, a, d))
    for e in b.errors:
        out.append("  error %s;" % e)
    out.append("}\n")
    return "\n".join(out)


def csm_block_of(m, name, kind="csm"):
    """Render a finite machine (e.g. a learned assumption) as a model block."""
    states = []
    for q in range(m.n_states):
        s = _safe_name(m.state_name(q), q)
        if s in states:
            s = "%s_%d" % (s, q)
        states.append(s)
    trs = [(states[t.src], t.label, states[t.dst]) for t in m.transitions]
    return CsmBlock(kind, name, tuple(sorted(m.alphabet)), tuple(states),
                    states[m.initial], tuple(trs),
                    tuple(states[q] for q in sorted(m.error_states)))


def _safe_name(n, q):
    cleaned = "".join(c if c.isalnum() or c == "_" else "_" for c in n)
    if not cleaned or not (cleaned[0].isalpha() or cleaned[0] == "_"):
        cleaned = "s%d_%s" % (q, cleaned) if cleaned else "s%d" % q
    return cleaned
