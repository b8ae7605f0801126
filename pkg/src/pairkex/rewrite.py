"""Canonical forms and the classical-to-identity rewriting engine.

Scalars canonicalize to Laurent polynomials: maps from monomials
(sorted tuples of (atom, exponent), exponents nonzero, possibly
negative) to Fraction coefficients.  Curve-point expressions become
maps from element atoms to scalar polynomials.  Target expressions
become two maps: folded pairing slots (unordered atom pairs, since the
pairing here is symmetric) to exponent polynomials, plus bare
target-valued atoms to exponent polynomials.

normalize() rebuilds a tree from the canonical form, grouping pairing
slots whose columns are proportional so that sums re-enter the pairing
arguments; the result is deterministic and idempotent.

apply_rules() converts an actor-side classical formula into its
identity-based image:

  ruleset "sok"  a*E      ->  pairs with the identity key:  e(S_A, E)
                 x-only   ->  pairs with the master key:    e(P_0, x*E)
                 (static-free formulas pass through unchanged unless
                 translate_pure_ephemeral is set)
  ruleset "sk"   inv(a)*E ->  e(S_A, E)
                 m*P      ->  e(P, P)^m

Residual scalar factors ride along inside the pairing (sok) or in the
exponent (sk).  Anything else is untranslatable.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Dict, Optional, Tuple

from .backend import PairingParams
from .errors import FormulaTypeError, UntranslatableError
from .formula import (
    DEFAULT_CTX, EAdd, EAtom, EMul, Pair, SAdd, SAtom, SInv, SLit, SMul,
    TExp, TMul, atoms_of, evaluate, kind_of, render,
)

__all__ = [
    "SUM_ORDER", "to_canonical", "normalize", "structural_equiv",
    "apply_rules", "semantic_equiv", "verify_correspondence",
]

# emission order for element atoms inside sums and pairing slots
SUM_ORDER = ("P_0", "S_A", "S_B", "P", "T_A", "T_B",
             "Q_A", "Q_B", "F_AB", "Q", "Q_1", "Q_2")

# ephemerals sort before statics so "x + a" keeps the ephemeral first
_LEX_ORDER = ("x", "y", "a", "b", "s", "h_A", "h_B", "u_A", "u_B")

_ONE = Fraction(1)

Mono = Tuple[Tuple[str, int], ...]
Poly = Dict[Mono, Fraction]


def _eidx(name: str) -> int:
    return SUM_ORDER.index(name)


def _sidx(name: str) -> int:
    return _LEX_ORDER.index(name)


# ---------------------------------------------------------------------------
# polynomial arithmetic


def _mono(pairs) -> Mono:
    return tuple(sorted(((n, e) for n, e in pairs if e != 0),
                        key=lambda it: _sidx(it[0])))


def _mono_mul(m1: Mono, m2: Mono) -> Mono:
    exps = dict(m1)
    for n, e in m2:
        exps[n] = exps.get(n, 0) + e
    return _mono(exps.items())


def _mono_vec(m: Mono):
    exps = dict(m)
    return tuple(exps.get(n, 0) for n in _LEX_ORDER)


def _mono_sort_key(m: Mono):
    # constants last, then total degree ascending, then lex with
    # ephemerals first
    deg = sum(e for _, e in m)
    return (0 if m else 1, deg, tuple(-v for v in _mono_vec(m)))


def _p_add(p1: Poly, p2: Poly) -> Poly:
    out = dict(p1)
    for m, c in p2.items():
        c2 = out.get(m, 0) + c
        if c2:
            out[m] = c2
        else:
            out.pop(m, None)
    return out


def _p_scale(p: Poly, m: Mono, c: Fraction) -> Poly:
    if not c:
        return {}
    return {_mono_mul(m2, m): c2 * c for m2, c2 in p.items()}


def _p_mul(p1: Poly, p2: Poly) -> Poly:
    out: Poly = {}
    for m, c in p1.items():
        out = _p_add(out, _p_scale(p2, m, c))
    return out


def _p_int(n: int) -> Poly:
    return {(): Fraction(n)} if n else {}


_P_ONE: Poly = {(): _ONE}


def _p_is_one(p: Poly) -> bool:
    return p == _P_ONE


def _p_div(num: Poly, den: Poly) -> Optional[Poly]:
    """Exact quotient num/den, or None when it does not divide."""
    if not den:
        return None
    if not num:
        return {}
    if len(den) == 1:
        (dm, dc), = den.items()
        inv = tuple((n, -e) for n, e in dm)
        return {_mono_mul(m, inv): c / dc for m, c in num.items()}
    lead = max(den, key=_mono_vec)
    lc = den[lead]
    inv_lead = tuple((n, -e) for n, e in lead)
    quot: Poly = {}
    rem = dict(num)
    for _ in range(64):
        if not rem:
            return quot
        rlead = max(rem, key=_mono_vec)
        t_m = _mono_mul(rlead, inv_lead)
        t_c = rem[rlead] / lc
        quot = _p_add(quot, {t_m: t_c})
        rem = _p_add(rem, _p_scale(den, t_m, -t_c))
    return None


# ---------------------------------------------------------------------------
# canonical forms


CanonG1 = Dict[str, Poly]
# (pair slots, bare target atoms)
CanonGT = Tuple[Dict[Tuple[str, str], Poly], Dict[str, Poly]]


def _fold(a: str, b: str) -> Tuple[str, str]:
    return (a, b) if _eidx(a) <= _eidx(b) else (b, a)


def _scalar_poly(node) -> Poly:
    if isinstance(node, SAtom):
        return {_mono([(node.name, 1)]): _ONE}
    if isinstance(node, SLit):
        return _p_int(node.value)
    if isinstance(node, SAdd):
        return reduce(_p_add, (_scalar_poly(t) for t in node.terms), {})
    if isinstance(node, SMul):
        return reduce(_p_mul, (_scalar_poly(f) for f in node.factors),
                      _P_ONE)
    if isinstance(node, SInv):
        p = _scalar_poly(node.arg)
        if len(p) != 1:
            raise FormulaTypeError(
                f"cannot invert a sum symbolically: inv({render(node.arg)})")
        (m, c), = p.items()
        return {tuple((n, -e) for n, e in m): 1 / c}
    raise FormulaTypeError(f"not a scalar node: {node!r}")


def _g1_canon(node, ctx) -> CanonG1:
    if isinstance(node, EAtom):
        if ctx.get(node.name, "g1") != "g1":
            raise FormulaTypeError(
                f"{node.name} is target-valued in this protocol")
        return {node.name: dict(_P_ONE)}
    if isinstance(node, EAdd):
        out: CanonG1 = {}
        for t in node.terms:
            for name, p in _g1_canon(t, ctx).items():
                merged = _p_add(out.get(name, {}), p)
                if merged:
                    out[name] = merged
                else:
                    out.pop(name, None)
        return out
    if isinstance(node, EMul):
        k = _scalar_poly(node.scalar)
        out = {}
        for name, p in _g1_canon(node.elem, ctx).items():
            p2 = _p_mul(k, p)
            if p2:
                out[name] = p2
        return out
    raise FormulaTypeError(f"not a curve-point node: {node!r}")


def _gt_canon(node, ctx) -> CanonGT:
    if isinstance(node, EAtom):
        if ctx.get(node.name, "g1") != "gt":
            raise FormulaTypeError(f"{node.name} is not target-valued")
        return ({}, {node.name: dict(_P_ONE)})
    if isinstance(node, Pair):
        pairs: Dict[Tuple[str, str], Poly] = {}
        for a, pa in _g1_canon(node.left, ctx).items():
            for b, pb in _g1_canon(node.right, ctx).items():
                key = _fold(a, b)
                merged = _p_add(pairs.get(key, {}), _p_mul(pa, pb))
                if merged:
                    pairs[key] = merged
                else:
                    pairs.pop(key, None)
        return (pairs, {})
    if isinstance(node, TMul):
        pairs, tatoms = {}, {}
        for f in node.factors:
            p2, t2 = _gt_canon(f, ctx)
            for k, p in p2.items():
                merged = _p_add(pairs.get(k, {}), p)
                if merged:
                    pairs[k] = merged
                else:
                    pairs.pop(k, None)
            for k, p in t2.items():
                merged = _p_add(tatoms.get(k, {}), p)
                if merged:
                    tatoms[k] = merged
                else:
                    tatoms.pop(k, None)
        return (pairs, tatoms)
    if isinstance(node, TExp):
        k = _scalar_poly(node.exp)
        pairs, tatoms = _gt_canon(node.base, ctx)
        pairs = {key: p2 for key, p in pairs.items()
                 if (p2 := _p_mul(p, k))}
        tatoms = {key: p2 for key, p in tatoms.items()
                  if (p2 := _p_mul(p, k))}
        return (pairs, tatoms)
    raise FormulaTypeError(f"not a target-group node: {node!r}")


def to_canonical(node, ctx: Optional[Dict[str, str]] = None):
    """(kind, canonical form); equal canonicals mean equal values."""
    ctx = DEFAULT_CTX if ctx is None else ctx
    kind = kind_of(node, ctx)
    if kind == "scalar":
        return ("scalar", _scalar_poly(node))
    if kind == "g1":
        return ("g1", _g1_canon(node, ctx))
    return ("gt", _gt_canon(node, ctx))


def structural_equiv(f, g, ctx: Optional[Dict[str, str]] = None) -> bool:
    """Same kind and same canonical form."""
    return to_canonical(f, ctx) == to_canonical(g, ctx)


# ---------------------------------------------------------------------------
# reconstruction


def _coeff_tree(c: Fraction):
    factors = []
    if c.numerator != 1 or c.denominator == 1:
        factors.append(SLit(c.numerator))
    if c.denominator != 1:
        factors.append(SInv(SLit(c.denominator)))
    if len(factors) == 1:
        return factors[0]
    return SMul(tuple(factors))


def _mono_tree(m: Mono, c: Fraction):
    factors = []
    for name, e in sorted(m, key=lambda it: _sidx(it[0])):
        node = SAtom(name) if e > 0 else SInv(SAtom(name))
        factors.extend([node] * abs(e))
    if not factors:
        return _coeff_tree(c)
    if c != 1:
        head = _coeff_tree(c)
        factors = (list(head.factors) if isinstance(head, SMul)
                   else [head]) + factors
    if len(factors) == 1:
        return factors[0]
    return SMul(tuple(factors))


def _poly_tree(p: Poly):
    if not p:
        return SLit(0)
    terms = [_mono_tree(m, p[m]) for m in sorted(p, key=_mono_sort_key)]
    if len(terms) == 1:
        return terms[0]
    return SAdd(tuple(terms))


def _g1_tree(canon: CanonG1):
    if not canon:
        return EMul(SLit(0), EAtom("P"))
    terms = []
    for name in sorted(canon, key=_eidx):
        p = canon[name]
        if _p_is_one(p):
            terms.append(EAtom(name))
        else:
            terms.append(EMul(_poly_tree(p), EAtom(name)))
    if len(terms) == 1:
        return terms[0]
    return EAdd(tuple(terms))


def _content(polys) -> Tuple[Mono, Fraction]:
    """Common monomial factor across every term of every poly."""
    monos = [m for p in polys for m in p]
    coeffs = [c for p in polys for c in p.values()]
    exps: Dict[str, int] = {}
    for name in _LEX_ORDER:
        lo = min(dict(m).get(name, 0) for m in monos)
        if lo != 0:
            exps[name] = lo
    num = reduce(gcd, (abs(c.numerator) for c in coeffs))
    den = reduce(lambda a, b: a * b // gcd(a, b),
                 (c.denominator for c in coeffs))
    return _mono(exps.items()), Fraction(num, den)


def _gt_tree(canon: CanonGT):
    pairs, tatoms = canon
    # group the pairing slots by second atom, then merge proportional
    # columns so sums land back inside pairing arguments
    columns: Dict[str, Dict[str, Poly]] = {}
    for (a, b), p in pairs.items():
        columns.setdefault(b, {})[a] = p
    groups = []  # [u: {atom: poly}, v: {atom: poly}]
    for b in sorted(columns, key=_eidx):
        col = columns[b]
        for u, v in groups:
            if set(col) != set(u):
                continue
            a0 = min(col, key=_eidx)
            lam = _p_div(col[a0], u[a0])
            if lam is None:
                continue
            if all(col[a] == _p_mul(lam, u[a]) for a in col):
                v[b] = lam
                break
        else:
            groups.append((dict(col), {b: dict(_P_ONE)}))
    factors = []
    for u, v in groups:
        if len(u) == 1:
            (a0, outer), = u.items()
            u = {a0: dict(_P_ONE)}
        else:
            cm, cc = _content(u.values())
            if cm or cc != 1:
                inv = tuple((n, -e) for n, e in cm)
                u = {a: _p_scale(p, inv, 1 / cc) for a, p in u.items()}
                outer = {cm: cc}
            else:
                outer = dict(_P_ONE)
        node = Pair(_g1_tree(u), _g1_tree(v))
        if not _p_is_one(outer):
            node = TExp(node, _poly_tree(outer))
        factors.append(node)
    for name in sorted(tatoms, key=_eidx):
        p = tatoms[name]
        node = EAtom(name)
        if not _p_is_one(p):
            node = TExp(node, _poly_tree(p))
        factors.append(node)
    if not factors:
        return TExp(Pair(EAtom("P"), EAtom("P")), SLit(0))
    if len(factors) == 1:
        return factors[0]
    return TMul(tuple(factors))


def normalize(node, ctx: Optional[Dict[str, str]] = None):
    """Deterministic, idempotent restatement of a formula."""
    kind, canon = to_canonical(node, ctx)
    if kind == "scalar":
        return _poly_tree(canon)
    if kind == "g1":
        return _g1_tree(canon)
    return _gt_tree(canon)


# ---------------------------------------------------------------------------
# rewriting rules


_RULE_ELEMS = {"P", "T_A", "T_B", "Q_A", "Q_B", "F_AB", "Q", "Q_1", "Q_2"}
_RULE_SCALARS = {"a", "x", "h_A", "h_B"}


def _mono_exp(m: Mono, name: str) -> int:
    return dict(m).get(name, 0)


def _strip(m: Mono, name: str) -> Mono:
    return tuple((n, e) for n, e in m if n != name)


def apply_rules(node, ruleset: str, *,
                translate_pure_ephemeral: bool = False):
    """Rewrite an actor-side classical formula into the identity-based
    setting named by ruleset ('sok' or 'sk').

    Raises UntranslatableError when some term has no image under the
    rules, FormulaTypeError when the input is not a classical
    actor-side curve-point formula.
    """
    if ruleset not in ("sok", "sk"):
        raise FormulaTypeError(f"unknown ruleset {ruleset!r}")
    if kind_of(node, DEFAULT_CTX) != "g1":
        raise FormulaTypeError(
            "the rules rewrite curve-point formulas, not "
            + kind_of(node, DEFAULT_CTX))
    bad = atoms_of(node) - _RULE_ELEMS - _RULE_SCALARS
    if bad:
        raise FormulaTypeError(
            "not an actor-side classical formula; unexpected atoms: "
            + ", ".join(sorted(bad)))
    canon = _g1_canon(node, DEFAULT_CTX)
    if any(name == "F_AB" for name in canon):
        raise UntranslatableError(
            "F_AB", "no rule rewrites the static shared point")

    if ruleset == "sok":
        return _apply_sok(node, canon, translate_pure_ephemeral)
    return _apply_sk(canon)


def _apply_sok(node, canon: CanonG1, translate_pure_ephemeral: bool):
    id_map: Dict[str, Poly] = {}
    master_map: Dict[str, Poly] = {}
    has_static = False
    for name, poly in canon.items():
        for m, c in poly.items():
            ea = _mono_exp(m, "a")
            if ea == 1:
                has_static = True
                id_map[name] = _p_add(id_map.get(name, {}),
                                      {_strip(m, "a"): c})
            elif ea == 0:
                master_map[name] = _p_add(master_map.get(name, {}), {m: c})
            else:
                raise UntranslatableError(
                    render(_mono_tree(m, c)),
                    f"static factor a^{ea} has no identity-based image")
    if not has_static and not translate_pure_ephemeral:
        # static-free component: carried over verbatim
        return node
    for name, poly in master_map.items():
        for m, c in poly.items():
            if _mono_exp(m, "x") < 1:
                raise UntranslatableError(
                    render(_mono_tree(m, c)),
                    "term has neither a static nor an ephemeral factor")
    factors = []
    for lhs, mapping in (("S_A", id_map), ("P_0", master_map)):
        for name in sorted(mapping, key=_eidx):
            factors.append(Pair(EAtom(lhs), _g1_tree({name: mapping[name]})))
    if len(factors) == 1:
        return factors[0]
    return TMul(tuple(factors))


def _apply_sk(canon: CanonG1):
    id_map: Dict[str, Poly] = {}
    gen_poly: Poly = {}
    for name, poly in canon.items():
        for m, c in poly.items():
            ea = _mono_exp(m, "a")
            if ea == -1:
                id_map[name] = _p_add(id_map.get(name, {}),
                                      {_strip(m, "a"): c})
            elif ea == 0 and name == "P":
                gen_poly = _p_add(gen_poly, {m: c})
            else:
                raise UntranslatableError(
                    render(_mono_tree(m, c)) + "*" + name,
                    "only inv(a)-scaled points and multiples of the "
                    "generator have images")
    factors = []
    for name in sorted(id_map, key=_eidx):
        base = Pair(EAtom("S_A"), EAtom(name))
        for m in sorted(id_map[name], key=_mono_sort_key):
            c = id_map[name][m]
            if m == () and c == 1:
                factors.append(base)
            else:
                factors.append(TExp(base, _mono_tree(m, c)))
    base = Pair(EAtom("P"), EAtom("P"))
    for m in sorted(gen_poly, key=_mono_sort_key):
        factors.append(TExp(base, _mono_tree(m, gen_poly[m])))
    if not factors:
        return TExp(base, SLit(0))
    if len(factors) == 1:
        return factors[0]
    return TMul(tuple(factors))


# ---------------------------------------------------------------------------
# randomized equivalence


def _sample_env(atoms, params: PairingParams, rng, mode: str, ctx):
    q, P = params.q, params.generator
    env: Dict[str, object] = {}
    if mode == "free":
        for name in atoms:
            if name in ctx and ctx[name] == "gt":
                env[name] = params.gt_exp(params.pair(P, P),
                                          rng.randrange(1, q))
            elif name in DEFAULT_CTX:
                env[name] = params.g1_mul(rng.randrange(1, q), P)
            else:
                env[name] = rng.randrange(1, q)
        return env
    s = rng.randrange(1, q)
    if mode == "sok":
        qa, qb = rng.randrange(1, q), rng.randrange(1, q)
        a, b = qa, qb
        env["S_A"] = params.g1_mul(s * qa % q, P)
        env["S_B"] = params.g1_mul(s * qb % q, P)
    elif mode == "sk":
        ua, ub = rng.randrange(1, q), rng.randrange(1, q)
        while (s + ua) % q == 0:
            ua = rng.randrange(1, q)
        while (s + ub) % q == 0:
            ub = rng.randrange(1, q)
        a, b = (s + ua) % q, (s + ub) % q
        env["u_A"], env["u_B"] = ua, ub
        env["S_A"] = params.g1_mul(pow(a, -1, q), P)
        env["S_B"] = params.g1_mul(pow(b, -1, q), P)
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    env.update({
        "a": a, "b": b, "s": s,
        "P": P, "P_0": params.g1_mul(s, P),
        "Q_A": params.g1_mul(a, P), "Q_B": params.g1_mul(b, P),
        "F_AB": params.g1_mul(a * b % q, P),
    })
    for name in atoms:
        if name in env:
            continue
        if name in ctx and ctx[name] == "gt":
            env[name] = params.gt_exp(params.pair(P, P), rng.randrange(1, q))
        elif name in DEFAULT_CTX:
            env[name] = params.g1_mul(rng.randrange(1, q), P)
        else:
            env[name] = rng.randrange(1, q)
    return env


def semantic_equiv(f, g, params: PairingParams, rng, *,
                   trials: int = 16, mode: str = "free",
                   ctx: Optional[Dict[str, str]] = None) -> bool:
    """Randomized equality check under shared atom assignments.

    mode 'free' samples every atom independently; 'sok' and 'sk'
    constrain the keyed atoms (S_A, P_0, Q_A, ...) to a consistent key
    setup so formulas that only agree on honest keys compare equal.
    """
    ctx = DEFAULT_CTX if ctx is None else ctx
    if kind_of(f, ctx) != kind_of(g, ctx):
        return False
    names = atoms_of(f) | atoms_of(g)
    for _ in range(trials):
        env = _sample_env(names, params, rng, mode, ctx)
        if evaluate(f, env, params, ctx) != evaluate(g, env, params, ctx):
            return False
    return True


def verify_correspondence(dh_formula, id_formula, *, ruleset: str,
                          message_form: Optional[str],
                          params: PairingParams, rng,
                          trials: int = 16,
                          id_ctx: Optional[Dict[str, str]] = None) -> bool:
    """Check the discrete-log relation between a classical component
    and its identity-based image over honest joint key material.

    For each trial both formulas are evaluated against matched
    environments (same identities, same ephemerals, same messages).  A
    target-valued image must satisfy log(image) = c * log(classical)
    with c = s for the sok setting and c = 1 for sk; a point-valued
    image must equal the classical value.  Needs dlog-capable (tiny)
    parameters.
    """
    q, P = params.q, params.generator
    for _ in range(trials):
        s = rng.randrange(1, q)
        x, y = rng.randrange(1, q), rng.randrange(1, q)
        h_a, h_b = rng.randrange(1, q), rng.randrange(1, q)
        if ruleset == "sok":
            a, b = rng.randrange(1, q), rng.randrange(1, q)
            S_A = params.g1_mul(s * a % q, P)
            S_B = params.g1_mul(s * b % q, P)
            c = s
            extra = {}
        elif ruleset == "sk":
            ua, ub = rng.randrange(1, q), rng.randrange(1, q)
            while (s + ua) % q == 0:
                ua = rng.randrange(1, q)
            while (s + ub) % q == 0:
                ub = rng.randrange(1, q)
            a, b = (s + ua) % q, (s + ub) % q
            S_A = params.g1_mul(pow(a, -1, q), P)
            S_B = params.g1_mul(pow(b, -1, q), P)
            c = 1
            extra = {"u_A": ua, "u_B": ub}
        else:
            raise ValueError(f"unknown ruleset {ruleset!r}")
        Q_A, Q_B = params.g1_mul(a, P), params.g1_mul(b, P)
        F = params.g1_mul(a * b % q, P)
        if message_form == "xP" or message_form is None:
            T_A, T_B = params.g1_mul(x, P), params.g1_mul(y, P)
        elif message_form == "xQ_A":
            # each side scales its own public key
            T_A, T_B = params.g1_mul(x, Q_A), params.g1_mul(y, Q_B)
        elif message_form == "xQ_B":
            # each side scales the peer's public key
            T_A, T_B = params.g1_mul(x, Q_B), params.g1_mul(y, Q_A)
        elif message_form == "xF_AB":
            T_A, T_B = params.g1_mul(x, F), params.g1_mul(y, F)
        else:
            raise ValueError(f"unknown message form {message_form!r}")
        env = {
            "a": a, "x": x, "h_A": h_a, "h_B": h_b, "s": s,
            "P": P, "P_0": params.g1_mul(s, P),
            "Q_A": Q_A, "Q_B": Q_B, "T_A": T_A, "T_B": T_B,
            "F_AB": F, "S_A": S_A, "S_B": S_B,
        }
        env.update(extra)
        v = evaluate(dh_formula, env, params)
        w = evaluate(id_formula, env, params, id_ctx)
        if kind_of(id_formula, id_ctx or DEFAULT_CTX) == "g1":
            if v != w:
                return False
            continue
        k = params.dlog_g1(v)
        if params.dlog_gt(w) != c * k % q:
            return False
    return True
