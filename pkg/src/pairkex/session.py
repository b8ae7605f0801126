"""Handshake execution: emit a message, absorb the peer's, derive.

A Session is one side of one run.  Sessions are built in the actor's
frame: the entry's formula atoms a/x/Q_A/T_A/S_A/h_A resolve to this
party's own material and the B-side atoms to the peer's, so the same
catalog formula drives both roles.

Phases: non-interactive entries complete immediately; a transport
sender completes at start and the receiver on absorb; two-message
entries go fresh -> sent -> complete.

The session key is the hash of protocol name, sorted identities, an
optional context string, the transcript (entries sorted by sender and
bytes, so both roles agree without negotiating who moves first), and
the encoded secret components in formula order.  Every field is
length-prefixed; the layout is injective.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .backend import GT_ONE, PairingParams
from .catalog import CatalogEntry
from .errors import KeyError_, ProtocolError, ValidationError
from .formula import EAtom, evaluate, kind_of, substitute
from .keys import DhIdentity, SkIdentity, SokIdentity

__all__ = ["Session", "Transcript", "session_key"]

_FAMILY_TYPES = {"DH": DhIdentity, "SOK": SokIdentity, "SK": SkIdentity}


@dataclass(frozen=True)
class Transcript:
    """Global view of an exchange, initiator's message first."""

    protocol: str
    params_ref: str
    ids: Tuple[str, str]
    entries: Tuple[Tuple[str, str, bytes], ...]   # (sender, kind, payload)

    def to_jsonl(self) -> str:
        lines = [json.dumps({"protocol": self.protocol,
                             "params_ref": self.params_ref,
                             "ids": list(self.ids)})]
        for seq, (sender, kind, payload) in enumerate(self.entries):
            lines.append(json.dumps({"seq": seq, "sender_id": sender,
                                     "kind": kind,
                                     "bytes_hex": payload.hex()}))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if line:
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise ValidationError(
                        f"transcript line is not JSON: {exc}") from exc
        if not rows:
            raise ValidationError("transcript file is empty")
        head, *body = rows
        try:
            entries = tuple(
                (row["sender_id"], row["kind"], bytes.fromhex(row["bytes_hex"]))
                for row in sorted(body, key=lambda r: r["seq"]))
            return cls(protocol=head["protocol"],
                       params_ref=head["params_ref"],
                       ids=tuple(head["ids"]), entries=entries)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(
                f"transcript file is malformed: {exc}") from exc


def _lp(data: bytes) -> bytes:
    return len(data).to_bytes(4, "big") + data


def session_key(params: PairingParams, protocol: str, ids, context: bytes,
                entries, components) -> bytes:
    """The KDF, callable from outside a Session (the analysis probes
    recompute keys from recovered components)."""
    h = hashlib.new(params.hash_name)
    h.update(_lp(protocol.encode()))
    for ident in sorted(ids):
        h.update(_lp(ident.encode()))
    h.update(_lp(context))
    ordered = sorted(entries, key=lambda e: (e[0], e[2]))
    h.update(len(ordered).to_bytes(4, "big"))
    for sender, kind, payload in ordered:
        h.update(_lp(sender.encode()))
        h.update(_lp(kind.encode()))
        h.update(_lp(payload))
    h.update(len(components).to_bytes(4, "big"))
    for kind, value in components:
        h.update(_lp(kind.encode()))
        if kind == "g1":
            h.update(_lp(params.encode_point(value)))
        else:
            h.update(_lp(params.encode_target(value)))
    return h.digest()


class Session:
    """One side of one handshake."""

    def __init__(self, params: PairingParams, entry: CatalogEntry,
                 own, peer, role: str, rng=None, *, pin_h: bool = False):
        if role not in ("initiator", "responder"):
            raise ProtocolError(f"unknown role {role!r}")
        self.params = params
        self.entry = entry
        self.own = own
        self.peer = peer
        self.role = role
        self.pin_h = pin_h
        self._check_keys()
        self.x: Optional[int] = None
        self.own_message: Optional[bytes] = None
        self.peer_message: Optional[bytes] = None
        self._own_value = None
        self._peer_value = None

        if entry.kind == "non_interactive":
            self.phase = "complete"
            return
        if entry.kind == "transport" and role == "responder":
            self.phase = "fresh"
            return
        if rng is None:
            raise ProtocolError("this role emits a message and needs an rng")
        self.x = rng.randrange(1, params.q)
        self._own_value = self._message_value()
        if self.entry.message_form == "F^x":
            self.own_message = params.encode_target(self._own_value)
        else:
            self.own_message = params.encode_point(self._own_value)
        self.phase = "complete" if entry.kind == "transport" else "sent"

    # -- construction helpers ------------------------------------------------

    def _check_keys(self) -> None:
        want = _FAMILY_TYPES[self.entry.family]
        for key, who in ((self.own, "own"), (self.peer, "peer")):
            if not isinstance(key, want):
                raise KeyError_(
                    f"{self.entry.name} needs {self.entry.family} keys, "
                    f"{who} side holds {type(key).__name__}")
        if self.entry.family == "DH" and self.own.secret is None:
            raise KeyError_("own classical key lacks the private scalar")
        if self.entry.family in ("SOK", "SK") and self.own.private is None:
            raise KeyError_("own identity key lacks the private half")
        self.inverted = bool(self.entry.family == "SOK"
                             and self.own.inverted)
        if self.inverted and not self.entry.supports_inverted:
            raise KeyError_(
                f"{self.entry.name} does not run under the inverted "
                "master key")
        if (self.entry.family == "SOK" and not self.inverted
                and self.peer.inverted):
            raise KeyError_("key settings disagree about inversion")

    def _message_value(self):
        params, form = self.params, self.entry.message_form
        if self.inverted:
            # the inverted variant replaces x*P with x*P_0
            return params.g1_mul(self.x, self.own.master_public)
        if form == "xP":
            return params.g1_mul(self.x, params.generator)
        if form == "xQ_A":
            return params.g1_mul(self.x, self.own.public)
        if form == "xQ_B":
            return params.g1_mul(self.x, self.peer.public)
        if form == "xF_AB":
            shared = params.g1_mul(self.own.secret, self.peer.public)
            return params.g1_mul(self.x, shared)
        if form == "F^x":
            blind = params.pair(self.own.private, self.peer.public)
            return params.gt_exp(blind, self.x)
        raise ProtocolError(f"unknown message form {form!r}")

    # -- the wire -------------------------------------------------------------

    @property
    def message_kind(self) -> str:
        return "gt" if self.entry.message_form == "F^x" else "g1"

    def absorb(self, data: bytes) -> None:
        expect = "fresh" if (self.entry.kind == "transport") else "sent"
        if self.phase != expect:
            raise ProtocolError(
                f"message arrived in phase {self.phase!r}")
        if self.message_kind == "gt":
            value = self.params.decode_target(data)
            if value == GT_ONE:
                raise ValidationError("identity element refused")
        else:
            value = self.params.decode_point(data)
            if value is None:
                raise ValidationError("identity element refused")
        self.peer_message = bytes(data)
        self._peer_value = value
        self.phase = "complete"

    # -- derivation ------------------------------------------------------------

    def _coefficients(self) -> Tuple[Optional[int], Optional[int]]:
        if self.pin_h:
            return 1, 1
        h_own = h_peer = None
        if self.own_message is not None:
            h_own = self.params.hash_to_zq(
                self.own_message + self.peer.id.encode())
        if self.peer_message is not None:
            h_peer = self.params.hash_to_zq(
                self.peer_message + self.own.id.encode())
        return h_own, h_peer

    def _env(self) -> Dict[str, object]:
        params = self.params
        env: Dict[str, object] = {
            "P": params.generator,
            "Q_A": self.own.public,
            "Q_B": self.peer.public,
        }
        if self.entry.family == "DH":
            env["a"] = self.own.secret
            env["F_AB"] = params.g1_mul(self.own.secret, self.peer.public)
        else:
            env["S_A"] = self.own.private
            env["P_0"] = self.own.master_public
        if self.entry.family == "SK":
            env["u_A"] = self.own.id_scalar
            env["u_B"] = self.peer.id_scalar
        if self.x is not None:
            env["x"] = self.x
        if self._own_value is not None:
            env["T_A"] = self._own_value
        if self._peer_value is not None:
            env["T_B"] = self._peer_value
        h_own, h_peer = self._coefficients()
        if h_own is not None:
            env["h_A"] = h_own
        if h_peer is not None:
            env["h_B"] = h_peer
        return env

    def secret_components(self) -> List[Tuple[str, object]]:
        """Ordered (kind, value) pairs, kinds 'g1' or 'gt'."""
        if self.phase != "complete":
            raise ProtocolError(f"cannot derive in phase {self.phase!r}")
        receiver = (self.entry.kind == "transport"
                    and self.role == "responder")
        formulas = self.entry.parsed_secret(receiver=receiver)
        if self.inverted:
            formulas = tuple(substitute(f, {"P_0": EAtom("P")})
                             for f in formulas)
        ctx = self.entry.ctx()
        env = self._env()
        return [(kind_of(f, ctx), evaluate(f, env, self.params, ctx))
                for f in formulas]

    def transcript_entries(self) -> List[Tuple[str, str, bytes]]:
        """This session's view of the exchange, initiator first."""
        mine = (self.own.id, self.message_kind, self.own_message)
        theirs = (self.peer.id, self.message_kind, self.peer_message)
        ordered = [mine, theirs] if self.role == "initiator" else [theirs, mine]
        return [e for e in ordered if e[2] is not None]

    def derive_key(self, context: bytes = b"") -> bytes:
        return session_key(self.params, self.entry.name,
                           (self.own.id, self.peer.id), context,
                           self.transcript_entries(),
                           self.secret_components())
