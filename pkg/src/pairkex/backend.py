"""Bilinear group backend on a supersingular curve.

The curve is y^2 = x^3 + x over F_p with p = 3 (mod 4).  It is
supersingular with #E(F_p) = p + 1 and embedding degree 2, so a prime
q | p + 1 gives an order-q subgroup whose pairing values live in
F_{p^2} = F_p[i], i^2 = -1.

The pairing is the reduced Tate pairing composed with the distortion
map phi(x, y) = (-x, i*y):

    pair(A, B) = miller(A, phi(B)) ^ ((p^2 - 1) / q)

Because no two points of E(F_p) with nonzero y share an x coordinate
up to sign (exactly one of +/-(x^3 + x) is a square when p = 3 mod 4),
the line functions of the Miller loop never vanish at phi(B), and the
map is non-degenerate on the order-q subgroup.  Both arguments come
from the same cyclic group, so the pairing is symmetric.

Two parameter tiers exist: "tiny" keeps q small enough that discrete
logs are brute-forceable, which the test oracles rely on; "demo" uses
a 160-bit q.  Neither tier is a security claim.

Group elements are affine tuples (x, y) with None for the identity.
Target-group elements are tuples (re, im) in F_{p^2}.  Scalars are
plain ints.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import DecodeError, ParamError, ValidationError

__all__ = [
    "PairingParams",
    "Point",
    "Target",
    "param_gen",
    "params_to_json",
    "params_from_json",
    "is_prime",
]

Point = Optional[Tuple[int, int]]
Target = Tuple[int, int]

GT_ONE: Target = (1, 0)

TIER_TINY = "tiny"
TIER_DEMO = "demo"

# q ranges per tier; tiny stays small enough for brute-force dlogs.
_TINY_Q_RANGE = (1 << 11, 1 << 14)
_DEMO_Q_BITS = 160

_MAX_SEARCH = 100_000


# ---------------------------------------------------------------------------
# primality

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def is_prime(n: int) -> bool:
    """Miller-Rabin.  Deterministic for n < 3.3e24 via fixed bases;
    larger n get 40 extra pseudo-random rounds derived from n."""
    if n < 2:
        return False
    for sp in _SMALL_PRIMES:
        if n % sp == 0:
            return n == sp
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1

    def witness(a: int) -> bool:
        x = pow(a, d, n)
        if x in (1, n - 1):
            return False
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                return False
        return True

    bases = list(_SMALL_PRIMES[:12])
    if n >= 3_317_044_064_679_887_385_961_981:
        seed = hashlib.sha256(n.to_bytes((n.bit_length() + 7) // 8, "big")).digest()
        for i in range(40):
            h = hashlib.sha256(seed + i.to_bytes(4, "big")).digest()
            bases.append(2 + int.from_bytes(h, "big") % (n - 3))
    return not any(witness(a % n) for a in bases if a % n > 1)


# ---------------------------------------------------------------------------
# F_{p^2} = F_p[i] / (i^2 + 1), elements as (re, im)


def _f2_mul(p: int, u: Target, v: Target) -> Target:
    a, b = u
    c, d = v
    return ((a * c - b * d) % p, (a * d + b * c) % p)


def _f2_sqr(p: int, u: Target) -> Target:
    a, b = u
    return ((a * a - b * b) % p, (2 * a * b) % p)


def _f2_inv(p: int, u: Target) -> Target:
    a, b = u
    norm = (a * a + b * b) % p
    if norm == 0:
        raise ValidationError("zero has no inverse in F_p^2")
    ninv = pow(norm, -1, p)
    return (a * ninv % p, (-b * ninv) % p)


def _f2_pow(p: int, u: Target, e: int) -> Target:
    if e < 0:
        return _f2_pow(p, _f2_inv(p, u), -e)
    acc = GT_ONE
    base = u
    while e:
        if e & 1:
            acc = _f2_mul(p, acc, base)
        base = _f2_sqr(p, base)
        e >>= 1
    return acc


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairingParams:
    """Public parameters: the curve, the subgroup, and its generator."""

    tier: str
    p: int
    q: int
    cofactor: int
    generator: Tuple[int, int]
    hash_name: str = "sha256"

    # -- widths ------------------------------------------------------------

    @property
    def point_width(self) -> int:
        """Bytes per field coordinate."""
        return (self.p.bit_length() + 7) // 8

    @property
    def scalar_width(self) -> int:
        return (self.q.bit_length() + 7) // 8

    def _hash(self, data: bytes) -> bytes:
        return hashlib.new(self.hash_name, data).digest()

    def fingerprint(self) -> str:
        """Short stable digest identifying this parameter set."""
        blob = b"|".join((self.tier.encode(), str(self.p).encode(),
                          str(self.q).encode(), str(self.cofactor).encode(),
                          self.encode_point(self.generator),
                          self.hash_name.encode()))
        return hashlib.new(self.hash_name, blob).hexdigest()[:16]

    # -- curve group -------------------------------------------------------

    def on_curve(self, A: Point) -> bool:
        if A is None:
            return True
        x, y = A
        if not (0 <= x < self.p and 0 <= y < self.p):
            return False
        return (y * y - (x * x * x + x)) % self.p == 0

    def validate_point(self, A: Point, allow_identity: bool = True) -> None:
        """On curve and in the order-q subgroup, else ValidationError."""
        if A is None:
            if not allow_identity:
                raise ValidationError("identity element not allowed here")
            return
        if not self.on_curve(A):
            raise ValidationError("point is not on the curve")
        if self._mul_noreduce(self.q, A) is not None:
            raise ValidationError("point is not in the order-q subgroup")

    def g1_neg(self, A: Point) -> Point:
        if A is None:
            return None
        x, y = A
        return (x, (-y) % self.p)

    def g1_add(self, A: Point, B: Point) -> Point:
        if A is not None and not self.on_curve(A):
            raise ValidationError("left addend is not on the curve")
        if B is not None and not self.on_curve(B):
            raise ValidationError("right addend is not on the curve")
        return self._add_raw(A, B)

    def _add_raw(self, A: Point, B: Point) -> Point:
        p = self.p
        if A is None:
            return B
        if B is None:
            return A
        x1, y1 = A
        x2, y2 = B
        if x1 == x2:
            if (y1 + y2) % p == 0:
                return None
            lam = (3 * x1 * x1 + 1) * pow(2 * y1, -1, p) % p
        else:
            lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
        x3 = (lam * lam - x1 - x2) % p
        y3 = (lam * (x1 - x3) - y1) % p
        return (x3, y3)

    def g1_mul(self, k: int, A: Point) -> Point:
        if A is not None and not self.on_curve(A):
            raise ValidationError("point is not on the curve")
        return self._mul_noreduce(k, A)

    def _mul_noreduce(self, k: int, A: Point) -> Point:
        if A is None or k == 0:
            return None
        if k < 0:
            return self._mul_noreduce(-k, self.g1_neg(A))
        acc: Point = None
        add = A
        while k:
            if k & 1:
                acc = self._add_raw(acc, add)
            add = self._add_raw(add, add)
            k >>= 1
        return acc

    # -- pairing -----------------------------------------------------------

    def pair(self, A: Point, B: Point) -> Target:
        """Symmetric pairing on the order-q subgroup."""
        self.validate_point(A)
        self.validate_point(B)
        if A is None or B is None:
            return GT_ONE
        p = self.p
        xb, yb = B
        # distortion map: ((-xb, 0), (0, yb)) in F_{p^2}
        qx = ((-xb) % p, 0)
        qy = (0, yb)
        num, den = self._miller(A, qx, qy)
        f = _f2_mul(p, num, _f2_inv(p, den))
        return _f2_pow(p, f, (p * p - 1) // self.q)

    def _miller(self, A: Tuple[int, int], qx: Target, qy: Target):
        """Left-to-right Miller loop over the bits of q, with the
        vertical-line denominators kept."""
        p = self.p
        xa, ya = A
        num = GT_ONE
        den = GT_ONE
        xt, yt = xa, ya
        at_infinity = False
        for i in range(self.q.bit_length() - 2, -1, -1):
            if not at_infinity:
                # tangent at T, then vertical at 2T
                lam = (3 * xt * xt + 1) * pow(2 * yt, -1, p) % p
                l_val = ((qy[0] - yt - lam * (qx[0] - xt)) % p,
                         (qy[1] - lam * qx[1]) % p)
                x3 = (lam * lam - 2 * xt) % p
                y3 = (lam * (xt - x3) - yt) % p
                v_val = ((qx[0] - x3) % p, qx[1])
                num = _f2_mul(p, _f2_sqr(p, num), l_val)
                den = _f2_mul(p, _f2_sqr(p, den), v_val)
                xt, yt = x3, y3
            if (self.q >> i) & 1 and not at_infinity:
                if xt == xa and yt == ya:
                    # doubling disguised as addition; cannot occur for
                    # prime order q, kept for safety
                    lam = (3 * xt * xt + 1) * pow(2 * yt, -1, p) % p
                elif xt == xa:
                    # T = -A: the "line" is the vertical at A, no vertex
                    l_val = ((qx[0] - xa) % p, qx[1])
                    num = _f2_mul(p, num, l_val)
                    at_infinity = True
                    continue
                else:
                    lam = (ya - yt) * pow(xa - xt, -1, p) % p
                l_val = ((qy[0] - yt - lam * (qx[0] - xt)) % p,
                         (qy[1] - lam * qx[1]) % p)
                x3 = (lam * lam - xt - xa) % p
                y3 = (lam * (xt - x3) - yt) % p
                v_val = ((qx[0] - x3) % p, qx[1])
                num = _f2_mul(p, num, l_val)
                den = _f2_mul(p, den, v_val)
                xt, yt = x3, y3
        return num, den

    # -- target group ------------------------------------------------------

    def gt_valid(self, u: Target) -> bool:
        a, b = u
        if not (0 <= a < self.p and 0 <= b < self.p):
            return False
        if u == (0, 0):
            return False
        return _f2_pow(self.p, u, self.q) == GT_ONE

    def _gt_check(self, u: Target) -> None:
        if not self.gt_valid(u):
            raise ValidationError("element is outside the order-q target subgroup")

    def gt_mul(self, u: Target, v: Target) -> Target:
        self._gt_check(u)
        self._gt_check(v)
        return _f2_mul(self.p, u, v)

    def gt_exp(self, u: Target, k: int) -> Target:
        self._gt_check(u)
        return _f2_pow(self.p, u, k % self.q)

    def gt_inv(self, u: Target) -> Target:
        self._gt_check(u)
        return _f2_inv(self.p, u)

    # -- hashing -----------------------------------------------------------

    def hash_to_g1(self, data: bytes) -> Tuple[int, int]:
        """Try-and-increment onto the order-q subgroup (never identity)."""
        p = self.p
        ctr = 0
        while True:
            h = self._hash(data + ctr.to_bytes(4, "big"))
            x = int.from_bytes(h, "big") % p
            rhs = (x * x * x + x) % p
            if rhs != 0:
                y = pow(rhs, (p + 1) // 4, p)  # p = 3 (mod 4)
                if y * y % p == rhs:
                    R = self._mul_noreduce(self.cofactor, (x, y))
                    if R is not None:
                        return R
            ctr += 1
            if ctr > 0xFFFFFFFF:
                raise ParamError("hash_to_g1 exhausted its counter")

    def hash_to_zq(self, data: bytes) -> int:
        """Hash onto [1, q-1]; zero never comes back."""
        return int.from_bytes(self._hash(data), "big") % (self.q - 1) + 1

    # -- wire format ---------------------------------------------------------

    def encode_point(self, A: Point) -> bytes:
        if A is None:
            return b"\x00"
        if not self.on_curve(A):
            raise ValidationError("refusing to encode an off-curve point")
        w = self.point_width
        x, y = A
        return b"\x04" + x.to_bytes(w, "big") + y.to_bytes(w, "big")

    def decode_point(self, data: bytes) -> Point:
        if data == b"\x00":
            return None
        w = self.point_width
        if len(data) != 1 + 2 * w:
            raise DecodeError("point encoding has the wrong length", "length")
        if data[0] != 0x04:
            raise DecodeError("unknown point encoding prefix", "prefix")
        x = int.from_bytes(data[1:1 + w], "big")
        y = int.from_bytes(data[1 + w:], "big")
        A = (x, y)
        if not self.on_curve(A):
            raise DecodeError("decoded point is not on the curve", "curve")
        if self._mul_noreduce(self.q, A) is not None:
            raise DecodeError("decoded point is outside the subgroup", "subgroup")
        return A

    def encode_target(self, u: Target) -> bytes:
        self._gt_check(u)
        w = self.point_width
        return u[0].to_bytes(w, "big") + u[1].to_bytes(w, "big")

    def decode_target(self, data: bytes) -> Target:
        w = self.point_width
        if len(data) != 2 * w:
            raise DecodeError("target encoding has the wrong length", "length")
        u = (int.from_bytes(data[:w], "big"), int.from_bytes(data[w:], "big"))
        if not self.gt_valid(u):
            raise DecodeError("decoded element is outside the target subgroup",
                              "subgroup")
        return u

    def encode_scalar(self, k: int) -> bytes:
        if not 0 <= k < self.q:
            raise ValidationError("scalar out of range")
        return k.to_bytes(self.scalar_width, "big")

    def decode_scalar(self, data: bytes) -> int:
        if len(data) != self.scalar_width:
            raise DecodeError("scalar encoding has the wrong length", "length")
        k = int.from_bytes(data, "big")
        if k >= self.q:
            raise DecodeError("scalar exceeds the group order", "range")
        return k

    # -- oracles -------------------------------------------------------------

    def _require_tiny(self):
        if self.tier != TIER_TINY:
            raise ValidationError("brute-force discrete log is tiny-tier only")

    def dlog_g1(self, A: Point, base: Point = None) -> int:
        """Brute-force discrete log of A to the given base (default:
        the group generator).  Tiny tier only."""
        self._require_tiny()
        if base is None:
            base = self.generator
        acc: Point = None
        for k in range(self.q):
            if acc == A:
                return k
            acc = self._add_raw(acc, base)
        raise ValidationError("element has no discrete log to this base")

    def dlog_gt(self, u: Target, base: Target = None) -> int:
        """Brute-force discrete log in the target group.  Tiny tier only."""
        self._require_tiny()
        if base is None:
            base = self.pair(self.generator, self.generator)
        acc = GT_ONE
        for k in range(self.q):
            if acc == u:
                return k
            acc = _f2_mul(self.p, acc, base)
        raise ValidationError("element has no discrete log to this base")


# ---------------------------------------------------------------------------
# parameter generation


def _stream(seed: bytes, label: bytes, width: int):
    """Deterministic byte stream H(seed || label || counter)."""
    ctr = 0
    while True:
        yield hashlib.sha256(seed + label + ctr.to_bytes(4, "big")).digest()[:width]
        ctr += 1
        if ctr > _MAX_SEARCH:
            raise ParamError("parameter search space exhausted")


def param_gen(tier: str, seed: bytes) -> PairingParams:
    """Deterministically derive parameters for the given tier from seed.

    Finds a prime q (tiny: 11..14 bits, demo: 160 bits), then the
    smallest cofactor c = 0 (mod 4) with p = c*q - 1 prime; that makes
    p = 3 (mod 4) and q^2 no divisor of p + 1.  The generator is the
    cofactor multiple of the first hashed curve point that survives.
    """
    if tier not in (TIER_TINY, TIER_DEMO):
        raise ParamError(f"unknown tier {tier!r}")
    if not seed:
        raise ParamError("seed must be non-empty")

    if tier == TIER_TINY:
        lo, hi = _TINY_Q_RANGE
        q = 0
        for chunk in _stream(seed, b"q", 4):
            cand = lo + int.from_bytes(chunk, "big") % (hi - lo)
            cand |= 1
            if is_prime(cand):
                q = cand
                break
    else:
        q = 0
        for chunk in _stream(seed, b"q", _DEMO_Q_BITS // 8):
            cand = int.from_bytes(chunk, "big")
            cand |= (1 << (_DEMO_Q_BITS - 1)) | 1
            if is_prime(cand):
                q = cand
                break

    p = 0
    cofactor = 0
    c = 4
    for _ in range(_MAX_SEARCH):
        if c % q != 0:  # keeps q^2 from dividing p + 1 = c*q
            cand = c * q - 1
            if is_prime(cand):
                p, cofactor = cand, c
                break
        c += 4
    if p == 0:
        raise ParamError("no usable cofactor found")

    # probe object to reuse the arithmetic while searching for a generator
    probe = PairingParams(tier=tier, p=p, q=q, cofactor=cofactor,
                          generator=(0, 0))
    for chunk in _stream(seed, b"P", probe.point_width + 2):
        x = int.from_bytes(chunk, "big") % p
        rhs = (x * x * x + x) % p
        if rhs == 0:
            continue
        y = pow(rhs, (p + 1) // 4, p)
        if y * y % p != rhs:
            continue
        G = probe._mul_noreduce(cofactor, (x, y))
        if G is None:
            continue
        params = PairingParams(tier=tier, p=p, q=q, cofactor=cofactor,
                               generator=G)
        if params._mul_noreduce(q, G) is not None:
            raise ParamError("generator search produced a bad point")
        if params.pair(G, G) == GT_ONE:
            raise ParamError("degenerate pairing at the generator")
        return params
    raise ParamError("no generator found")


# ---------------------------------------------------------------------------
# parameter files: JSON with lowercase hex integers


def params_to_json(params: PairingParams) -> str:
    doc = {
        "tier": params.tier,
        "p": format(params.p, "x"),
        "q": format(params.q, "x"),
        "cofactor": format(params.cofactor, "x"),
        "generator": params.encode_point(params.generator).hex(),
        "hash_name": params.hash_name,
    }
    return json.dumps(doc, indent=2) + "\n"


def params_from_json(text: str) -> PairingParams:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParamError(f"parameter file is not valid JSON: {exc}") from exc
    try:
        tier = doc["tier"]
        p = int(doc["p"], 16)
        q = int(doc["q"], 16)
        cofactor = int(doc["cofactor"], 16)
        gen_hex = doc["generator"]
        hash_name = doc.get("hash_name", "sha256")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParamError(f"parameter file is missing or mangles a field: {exc}") from exc
    if tier not in (TIER_TINY, TIER_DEMO):
        raise ParamError(f"unknown tier {tier!r}")
    if p % 4 != 3 or not is_prime(p) or not is_prime(q):
        raise ParamError("parameters fail the primality/congruence checks")
    if cofactor * q != p + 1 or cofactor % q == 0:
        raise ParamError("cofactor does not match p + 1 = c*q with q^2 excluded")
    params = PairingParams(tier=tier, p=p, q=q, cofactor=cofactor,
                           generator=(0, 0), hash_name=hash_name)
    try:
        G = params.decode_point(bytes.fromhex(gen_hex))
    except (ValueError, DecodeError) as exc:
        raise ParamError(f"generator does not decode: {exc}") from exc
    if G is None:
        raise ParamError("generator cannot be the identity")
    params = PairingParams(tier=tier, p=p, q=q, cofactor=cofactor,
                           generator=G, hash_name=hash_name)
    params.validate_point(G, allow_identity=False)
    return params
