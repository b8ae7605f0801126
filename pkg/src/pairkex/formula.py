"""Typed expression trees for session-secret formulas.

A formula describes how one side of a handshake combines its own
secrets with public values.  Kinds: scalar (integers mod q), element
(curve points), target (pairing values).  Atoms are written from the
actor's point of view:

    a, x, h_A, u_A    own static, own ephemeral, own message coefficient,
                      own identity scalar
    b, y, h_B, u_B    the peer's counterparts
    s                 the key centre's master scalar (recovery formulas only)
    P, P_0            group generator, master public key
    Q_A, T_A, S_A     own public key, own message, own identity key
    Q_B, T_B, S_B     the peer's counterparts
    F_AB              the static shared point a*Q_B
    Q, Q_1, Q_2       placeholders used by the rewriting rules

Grammar, loosest binding first:

    expr    := ['-'] term (('+'|'-') term)*
    term    := power ('*' power)*
    power   := primary ['^' primary]
    primary := NAME | INT | '(' expr ')' | 'e(' expr ',' expr ')'
             | 'inv(' expr ')'

'*' is scalar or point multiplication or a target-group product,
depending on the operand kinds; '^' is target-group exponentiation;
'e' is the pairing; 'inv' inverts a scalar.  Atoms normally of element
kind can be declared target-valued through a context mapping (needed
by protocols whose messages live in the target group).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from .backend import PairingParams
from .errors import FormulaParseError, FormulaTypeError, ValidationError

__all__ = [
    "SAtom", "SLit", "SAdd", "SMul", "SInv",
    "EAtom", "EAdd", "EMul", "Pair", "TMul", "TExp",
    "SCALAR_ATOMS", "ELEMENT_ATOMS", "DEFAULT_CTX",
    "parse", "render", "kind_of", "atoms_of", "substitute", "evaluate",
]

SCALAR_ATOMS = ("a", "b", "x", "y", "s", "h_A", "h_B", "u_A", "u_B")
ELEMENT_ATOMS = ("P_0", "S_A", "S_B", "P", "T_A", "T_B",
                 "Q_A", "Q_B", "F_AB", "Q", "Q_1", "Q_2")

# every element atom is a curve point unless a protocol says otherwise
DEFAULT_CTX: Dict[str, str] = {name: "g1" for name in ELEMENT_ATOMS}


# ---------------------------------------------------------------------------
# nodes


@dataclass(frozen=True)
class SAtom:
    name: str


@dataclass(frozen=True)
class SLit:
    value: int


@dataclass(frozen=True)
class SAdd:
    terms: Tuple


@dataclass(frozen=True)
class SMul:
    factors: Tuple


@dataclass(frozen=True)
class SInv:
    arg: object


@dataclass(frozen=True)
class EAtom:
    name: str


@dataclass(frozen=True)
class EAdd:
    terms: Tuple


@dataclass(frozen=True)
class EMul:
    scalar: object
    elem: object


@dataclass(frozen=True)
class Pair:
    left: object
    right: object


@dataclass(frozen=True)
class TMul:
    factors: Tuple


@dataclass(frozen=True)
class TExp:
    base: object
    exp: object


_SCALAR_NODES = (SAtom, SLit, SAdd, SMul, SInv)


def kind_of(node, ctx: Optional[Dict[str, str]] = None) -> str:
    """'scalar', 'g1', or 'gt' for a well-formed tree."""
    ctx = DEFAULT_CTX if ctx is None else ctx
    if isinstance(node, _SCALAR_NODES):
        return "scalar"
    if isinstance(node, EAtom):
        return ctx.get(node.name, "g1")
    if isinstance(node, (EAdd, EMul)):
        return "g1"
    if isinstance(node, (Pair, TMul, TExp)):
        return "gt"
    raise FormulaTypeError(f"not a formula node: {node!r}")


def atoms_of(node) -> set:
    """All atom names appearing in the tree."""
    out = set()

    def walk(n):
        if isinstance(n, (SAtom, EAtom)):
            out.add(n.name)
        elif isinstance(n, SLit):
            pass
        elif isinstance(n, (SAdd, SMul, TMul)):
            for c in n.terms if isinstance(n, SAdd) else n.factors:
                walk(c)
        elif isinstance(n, SInv):
            walk(n.arg)
        elif isinstance(n, EAdd):
            for c in n.terms:
                walk(c)
        elif isinstance(n, EMul):
            walk(n.scalar)
            walk(n.elem)
        elif isinstance(n, Pair):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, TExp):
            walk(n.base)
            walk(n.exp)
        else:
            raise FormulaTypeError(f"not a formula node: {n!r}")

    walk(node)
    return out


def substitute(node, mapping: Dict[str, object]):
    """Replace atoms by name; replacement nodes must keep the kind
    consistent (scalar for scalar, element for element)."""
    def walk(n):
        if isinstance(n, (SAtom, EAtom)) and n.name in mapping:
            return mapping[n.name]
        if isinstance(n, (SLit, SAtom, EAtom)):
            return n
        if isinstance(n, SAdd):
            return SAdd(tuple(walk(t) for t in n.terms))
        if isinstance(n, SMul):
            return SMul(tuple(walk(t) for t in n.factors))
        if isinstance(n, SInv):
            return SInv(walk(n.arg))
        if isinstance(n, EAdd):
            return EAdd(tuple(walk(t) for t in n.terms))
        if isinstance(n, EMul):
            return EMul(walk(n.scalar), walk(n.elem))
        if isinstance(n, Pair):
            return Pair(walk(n.left), walk(n.right))
        if isinstance(n, TMul):
            return TMul(tuple(walk(f) for f in n.factors))
        if isinstance(n, TExp):
            return TExp(walk(n.base), walk(n.exp))
        raise FormulaTypeError(f"not a formula node: {n!r}")

    return walk(node)


# ---------------------------------------------------------------------------
# parsing


_SYMBOLS = "+-*^(),"


def _tokenize(text: str):
    toks = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in _SYMBOLS:
            toks.append((c, c, i))
            i += 1
        elif c.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append(("int", text[i:j], i))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("name", text[i:j], i))
            i = j
        else:
            raise FormulaParseError(f"unexpected character {c!r}", i)
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, ctx: Dict[str, str]):
        self.text = text
        self.ctx = ctx
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def take(self, kind=None):
        tok = self.toks[self.pos]
        if kind is not None and tok[0] != kind:
            raise FormulaParseError(
                f"expected {kind!r}, found {tok[1]!r}", tok[2])
        self.pos += 1
        return tok

    # ---- kinds -----------------------------------------------------------

    def kind(self, node):
        return kind_of(node, self.ctx)

    # ---- grammar ---------------------------------------------------------

    def expr(self):
        negate = False
        if self.peek()[0] == "-":
            self.take()
            negate = True
        node = self.term()
        if negate:
            node = self._scale(SLit(-1), node, self.peek()[2])
        while self.peek()[0] in ("+", "-"):
            op, _, at = self.take()
            rhs = self.term()
            if op == "-":
                rhs = self._scale(SLit(-1), rhs, at)
            node = self._add(node, rhs, at)
        return node

    def term(self):
        node = self.power()
        while self.peek()[0] == "*":
            _, _, at = self.take()
            node = self._mul(node, self.power(), at)
        return node

    def power(self):
        node = self.primary()
        if self.peek()[0] == "^":
            _, _, at = self.take()
            exp = self.primary()
            if self.kind(node) != "gt" or self.kind(exp) != "scalar":
                raise FormulaTypeError(
                    "'^' raises a target element to a scalar power")
            node = TExp(node, exp)
        return node

    def primary(self):
        tok = self.peek()
        if tok[0] == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if tok[0] == "int":
            self.take()
            return SLit(int(tok[1]))
        if tok[0] == "name":
            self.take()
            name = tok[1]
            if name == "e":
                self.take("(")
                left = self.expr()
                self.take(",")
                right = self.expr()
                self.take(")")
                if self.kind(left) != "g1" or self.kind(right) != "g1":
                    raise FormulaTypeError(
                        "the pairing takes two curve points")
                return Pair(left, right)
            if name == "inv":
                self.take("(")
                arg = self.expr()
                self.take(")")
                if self.kind(arg) != "scalar":
                    raise FormulaTypeError("inv() takes a scalar")
                return SInv(arg)
            if name in SCALAR_ATOMS:
                return SAtom(name)
            if name in ELEMENT_ATOMS:
                return EAtom(name)
            raise FormulaParseError(f"unknown atom {name!r}", tok[2])
        raise FormulaParseError(f"unexpected token {tok[1]!r}", tok[2])

    # ---- kind-directed constructors ---------------------------------------

    def _add(self, lhs, rhs, at):
        kl, kr = self.kind(lhs), self.kind(rhs)
        if kl != kr or kl == "gt":
            raise FormulaTypeError(
                f"'+' cannot join {kl} and {kr} operands (offset {at})")
        if kl == "scalar":
            terms = (lhs.terms if isinstance(lhs, SAdd) else (lhs,)) + \
                    (rhs.terms if isinstance(rhs, SAdd) else (rhs,))
            return SAdd(terms)
        terms = (lhs.terms if isinstance(lhs, EAdd) else (lhs,)) + \
                (rhs.terms if isinstance(rhs, EAdd) else (rhs,))
        return EAdd(terms)

    def _scale(self, k, node, at):
        kind = self.kind(node)
        if kind == "scalar":
            return self._mul(k, node, at)
        if kind == "g1":
            return EMul(k, node)
        raise FormulaTypeError(
            f"cannot negate a target element (offset {at})")

    def _mul(self, lhs, rhs, at):
        kl, kr = self.kind(lhs), self.kind(rhs)
        if kl == "scalar" and kr == "scalar":
            factors = (lhs.factors if isinstance(lhs, SMul) else (lhs,)) + \
                      (rhs.factors if isinstance(rhs, SMul) else (rhs,))
            return SMul(factors)
        if kl == "scalar" and kr == "g1":
            return EMul(lhs, rhs)
        if kl == "g1" and kr == "scalar":
            return EMul(rhs, lhs)
        if kl == "gt" and kr == "gt":
            factors = (lhs.factors if isinstance(lhs, TMul) else (lhs,)) + \
                      (rhs.factors if isinstance(rhs, TMul) else (rhs,))
            return TMul(factors)
        raise FormulaTypeError(
            f"'*' cannot join {kl} and {kr} operands (offset {at})")


def parse(text: str, ctx: Optional[Dict[str, str]] = None):
    """Parse a formula; raises FormulaParseError / FormulaTypeError."""
    parser = _Parser(text, DEFAULT_CTX if ctx is None else ctx)
    node = parser.expr()
    parser.take("end")
    return node


# ---------------------------------------------------------------------------
# rendering


def render(node) -> str:
    """Text form that parses back to an equal tree."""
    return _render(node)


def _joined_sum(terms) -> str:
    parts = []
    for i, t in enumerate(terms):
        r = _render(t)
        if i == 0:
            parts.append(r)
        elif r.startswith("-"):
            parts.append(" - " + r[1:])
        else:
            parts.append(" + " + r)
    return "".join(parts)


def _render(node) -> str:
    if isinstance(node, SAtom):
        return node.name
    if isinstance(node, SLit):
        return str(node.value)
    if isinstance(node, SAdd):
        return _joined_sum(node.terms)
    if isinstance(node, SMul):
        parts = []
        for f in node.factors:
            r = _render(f)
            if isinstance(f, SAdd) or (isinstance(f, SLit) and f.value < 0
                                       and parts):
                r = f"({r})"
            parts.append(r)
        # fold a leading -1 into a sign
        if parts and parts[0] == "-1" and len(parts) > 1:
            return "-" + "*".join(parts[1:])
        return "*".join(parts)
    if isinstance(node, SInv):
        return f"inv({_render(node.arg)})"
    if isinstance(node, EAtom):
        return node.name
    if isinstance(node, EAdd):
        return _joined_sum(node.terms)
    if isinstance(node, EMul):
        s = _render(node.scalar)
        if isinstance(node.scalar, SAdd):
            s = f"({s})"
        e = _render(node.elem)
        if isinstance(node.elem, (EAdd, EMul)):
            e = f"({e})"
        if s == "-1":
            return "-" + e
        return f"{s}*{e}"
    if isinstance(node, Pair):
        return f"e({_render(node.left)}, {_render(node.right)})"
    if isinstance(node, TMul):
        return "*".join(_render(f) for f in node.factors)
    if isinstance(node, TExp):
        b = _render(node.base)
        if isinstance(node.base, TMul):
            b = f"({b})"
        x = _render(node.exp)
        if not isinstance(node.exp, (SAtom, SLit)) or (
                isinstance(node.exp, SLit) and node.exp.value < 0):
            x = f"({x})"
        return f"{b}^{x}"
    raise FormulaTypeError(f"not a formula node: {node!r}")


# ---------------------------------------------------------------------------
# evaluation


def evaluate(node, env: Dict[str, object], params: PairingParams,
             ctx: Optional[Dict[str, str]] = None):
    """Evaluate a tree against concrete atom values.

    env maps atom names to ints (scalars), points (g1) or target
    elements (gt, per ctx).  Missing atoms raise FormulaTypeError.
    """
    ctx = DEFAULT_CTX if ctx is None else ctx
    q = params.q

    def need(name):
        if name not in env:
            raise FormulaTypeError(f"no value bound for atom {name!r}")
        return env[name]

    def walk(n):
        if isinstance(n, SAtom):
            return need(n.name) % q
        if isinstance(n, SLit):
            return n.value % q
        if isinstance(n, SAdd):
            return sum(walk(t) for t in n.terms) % q
        if isinstance(n, SMul):
            acc = 1
            for f in n.factors:
                acc = acc * walk(f) % q
            return acc
        if isinstance(n, SInv):
            v = walk(n.arg)
            if v % q == 0:
                raise ValidationError("scalar has no inverse mod q")
            return pow(v, -1, q)
        if isinstance(n, EAtom):
            return need(n.name)
        if isinstance(n, EAdd):
            acc = None
            for t in n.terms:
                acc = params.g1_add(acc, walk(t))
            return acc
        if isinstance(n, EMul):
            return params.g1_mul(walk(n.scalar), walk(n.elem))
        if isinstance(n, Pair):
            return params.pair(walk(n.left), walk(n.right))
        if isinstance(n, TMul):
            acc = None
            for f in n.factors:
                v = walk(f)
                acc = v if acc is None else params.gt_mul(acc, v)
            return acc
        if isinstance(n, TExp):
            return params.gt_exp(walk(n.base), walk(n.exp))
        raise FormulaTypeError(f"not a formula node: {n!r}")

    return walk(node)
