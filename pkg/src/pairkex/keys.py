"""Key material for the three settings the catalog runs in.

dh      classical: an identity holds a random scalar and publishes
        scalar*P.
sok     identity-based: a key centre with master scalar s publishes
        s*P and hands user ID the private key s*H(ID).  The inverted
        flavour publishes s^{-1}*P instead; extraction is unchanged.
sk      identity-based with inverted extraction: the centre publishes
        s*P and hands user ID the key (s + u)^{-1}*P, where u = H'(ID)
        is a nonzero public scalar.  The user's implicit public key is
        s*P + u*P = (s + u)*P.

Key files are JSON: {"setting", "id", "public": {...}, "private": {...}},
hex-encoded fields, private part optional, id null for master keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Tuple

from .backend import PairingParams, Point
from .errors import KeyError_, ValidationError

__all__ = [
    "DhIdentity", "SokMaster", "SokIdentity", "SkMaster", "SkIdentity",
    "StaticSharedSecret", "dh_keygen", "sok_setup", "sok_extract",
    "sk_setup", "sk_extract", "static_secret", "key_to_json", "key_from_json",
]

SETTINGS = ("dh", "sok", "sok_inv", "sk")


@dataclass(frozen=True)
class DhIdentity:
    id: str
    secret: Optional[int]     # None when only the public half is known
    public: Tuple[int, int]   # secret*P

    setting = "dh"


@dataclass(frozen=True)
class SokMaster:
    secret: int
    public: Tuple[int, int]   # secret*P, or secret^{-1}*P when inverted
    inverted: bool = False

    @property
    def setting(self) -> str:
        return "sok_inv" if self.inverted else "sok"


@dataclass(frozen=True)
class SokIdentity:
    id: str
    public: Tuple[int, int]               # H(id)
    private: Optional[Tuple[int, int]]    # s*H(id)
    master_public: Tuple[int, int]
    inverted: bool = False

    @property
    def setting(self) -> str:
        return "sok_inv" if self.inverted else "sok"


@dataclass(frozen=True)
class SkMaster:
    secret: int
    public: Tuple[int, int]   # secret*P

    setting = "sk"


@dataclass(frozen=True)
class SkIdentity:
    id: str
    id_scalar: int                        # H'(id), public
    public: Tuple[int, int]               # (s + id_scalar)*P
    private: Optional[Tuple[int, int]]    # (s + id_scalar)^{-1}*P
    master_public: Tuple[int, int]

    setting = "sk"


@dataclass(frozen=True)
class StaticSharedSecret:
    setting: str
    value: object             # point for dh, target element for sok


def dh_keygen(params: PairingParams, id: str, rng) -> DhIdentity:
    secret = rng.randrange(1, params.q)
    return DhIdentity(id=id, secret=secret,
                      public=params.g1_mul(secret, params.generator))


def sok_setup(params: PairingParams, rng, inverted: bool = False) -> SokMaster:
    s = rng.randrange(1, params.q)
    exponent = pow(s, -1, params.q) if inverted else s
    return SokMaster(secret=s, public=params.g1_mul(exponent, params.generator),
                     inverted=inverted)


def sok_extract(params: PairingParams, master: SokMaster,
                id: str) -> SokIdentity:
    hashed = params.hash_to_g1(id.encode())
    return SokIdentity(id=id, public=hashed,
                       private=params.g1_mul(master.secret, hashed),
                       master_public=master.public, inverted=master.inverted)


def sk_setup(params: PairingParams, rng) -> SkMaster:
    s = rng.randrange(1, params.q)
    return SkMaster(secret=s, public=params.g1_mul(s, params.generator))


def sk_extract(params: PairingParams, master: SkMaster, id: str) -> SkIdentity:
    u = params.hash_to_zq(id.encode())
    if (master.secret + u) % params.q == 0:
        # the one unusable identity per master key; the centre must re-key
        raise KeyError_(f"identity {id!r} collides with the master scalar, "
                        "regenerate the master key")
    private = params.g1_mul(pow(master.secret + u, -1, params.q),
                            params.generator)
    public = params.g1_add(master.public,
                           params.g1_mul(u, params.generator))
    return SkIdentity(id=id, id_scalar=u, public=public, private=private,
                      master_public=master.public)


def static_secret(params: PairingParams, me, peer) -> StaticSharedSecret:
    """Non-interactive shared secret: dh pairs scalars classically,
    sok pairs the private key with the peer's hashed identity."""
    if isinstance(me, DhIdentity):
        if me.secret is None:
            raise KeyError_("private half required")
        return StaticSharedSecret("dh", params.g1_mul(me.secret, peer.public))
    if isinstance(me, SokIdentity):
        if me.private is None:
            raise KeyError_("private half required")
        return StaticSharedSecret(me.setting,
                                  params.pair(me.private, peer.public))
    raise KeyError_("static secrets exist for dh and sok identities only")


# ---------------------------------------------------------------------------
# key files


def _pt(params: PairingParams, point: Point) -> str:
    return params.encode_point(point).hex()


def key_to_json(params: PairingParams, key) -> str:
    """Serialize any identity or master key."""
    if isinstance(key, DhIdentity):
        doc = {"setting": "dh", "id": key.id,
               "public": {"point": _pt(params, key.public)},
               "private": ({"scalar": format(key.secret, "x")}
                           if key.secret is not None else None)}
    elif isinstance(key, SokMaster):
        doc = {"setting": key.setting, "id": None,
               "public": {"master_point": _pt(params, key.public)},
               "private": {"scalar": format(key.secret, "x")}}
    elif isinstance(key, SokIdentity):
        doc = {"setting": key.setting, "id": key.id,
               "public": {"point": _pt(params, key.public),
                          "master_point": _pt(params, key.master_public)},
               "private": ({"point": _pt(params, key.private)}
                           if key.private is not None else None)}
    elif isinstance(key, SkMaster):
        doc = {"setting": "sk", "id": None,
               "public": {"master_point": _pt(params, key.public)},
               "private": {"scalar": format(key.secret, "x")}}
    elif isinstance(key, SkIdentity):
        doc = {"setting": "sk", "id": key.id,
               "public": {"point": _pt(params, key.public),
                          "master_point": _pt(params, key.master_public),
                          "id_scalar": format(key.id_scalar, "x")},
               "private": ({"point": _pt(params, key.private)}
                           if key.private is not None else None)}
    else:
        raise KeyError_(f"cannot serialize {type(key).__name__}")
    if doc["private"] is None:
        del doc["private"]
    return json.dumps(doc, indent=2) + "\n"


def key_from_json(params: PairingParams, text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise KeyError_(f"key file is not valid JSON: {exc}") from exc
    try:
        setting = doc["setting"]
        ident = doc["id"]
        pub = doc["public"]
        priv = doc.get("private")
    except (KeyError, TypeError) as exc:
        raise KeyError_(f"key file is missing a field: {exc}") from exc
    if setting not in SETTINGS:
        raise KeyError_(f"unknown setting {setting!r}")

    def point(hexstr):
        decoded = params.decode_point(bytes.fromhex(hexstr))
        if decoded is None:
            raise KeyError_("identity point in a key file")
        return decoded

    try:
        if setting == "dh":
            return DhIdentity(id=ident, public=point(pub["point"]),
                              secret=int(priv["scalar"], 16) if priv else None)
        if setting in ("sok", "sok_inv"):
            inv = setting == "sok_inv"
            if ident is None:
                return SokMaster(secret=int(priv["scalar"], 16),
                                 public=point(pub["master_point"]),
                                 inverted=inv)
            return SokIdentity(id=ident, public=point(pub["point"]),
                               master_public=point(pub["master_point"]),
                               private=point(priv["point"]) if priv else None,
                               inverted=inv)
        if ident is None:
            return SkMaster(secret=int(priv["scalar"], 16),
                            public=point(pub["master_point"]))
        return SkIdentity(id=ident, id_scalar=int(pub["id_scalar"], 16),
                          public=point(pub["point"]),
                          master_public=point(pub["master_point"]),
                          private=point(priv["point"]) if priv else None)
    except (KeyError, TypeError, ValueError, ValidationError) as exc:
        raise KeyError_(f"key file does not decode: {exc}") from exc
