"""The protocol catalog: every handshake this package speaks.

Formulas are written for the actor: a and x are the actor's own static
and ephemeral scalars, Q_A / T_A / S_A / h_A the actor's public key,
outgoing message, identity key and message coefficient, and the B-side
atoms are the peer's.  One formula therefore serves both roles.  For
transport entries `secret` is the sender's view and `receiver_secret`
the receiver's.

Message forms: xP, xQ_A (scale own public), xQ_B (scale the peer's),
xF_AB (scale the static shared point), F^x (Scott: blind the static
pairing value), or None for non-interactive entries.

Flag semantics record what the analysis harness can demonstrate, not
security proofs:
  escrowed        the key centre recovers session keys from the
                  transcript alone; `pkg_recover` holds the formulas.
  pfs=False       a static-compromise recovery is on file
                  (`static_attack`, written over global transcript
                  atoms: a/T_A are the initiator's, b/T_B the
                  responder's).
  kci_resilient=False  the harness carries a working impersonation
                  against a party whose static key leaked.
  known_broken    published break; the entry still runs and agrees,
                  but is excluded from the secure listing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Tuple

from .errors import ProtocolError
from .formula import DEFAULT_CTX, parse

__all__ = [
    "Flags", "CatalogEntry", "catalog", "secure_catalog", "lookup",
    "RULE_CHECKED_PAIRS", "DEGENERATION_PAIRS",
]


@dataclass(frozen=True)
class Flags:
    escrowed: bool = False
    pfs: bool = True
    kci_resilient: bool = True
    known_broken: bool = False


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    family: str                     # DH | SOK | SK
    kind: str                       # non_interactive | transport | two_message
    message_form: Optional[str]
    secret: Tuple[str, ...]
    receiver_secret: Optional[Tuple[str, ...]] = None
    flags: Flags = field(default_factory=Flags)
    counterpart: Optional[str] = None
    pkg_recover: Optional[Tuple[str, ...]] = None
    static_attack: Optional[Tuple[str, ...]] = None
    supports_inverted: bool = False
    target_atoms: Tuple[str, ...] = ()
    notes: str = ""

    def ctx(self) -> Dict[str, str]:
        ctx = dict(DEFAULT_CTX)
        for name in self.target_atoms:
            ctx[name] = "gt"
        return ctx

    def parsed_secret(self, receiver: bool = False):
        formulas = self.secret
        if receiver:
            if self.receiver_secret is None:
                raise ProtocolError(f"{self.name} has no receiver formula")
            formulas = self.receiver_secret
        ctx = self.ctx()
        return tuple(parse(f, ctx) for f in formulas)

    @property
    def ruleset(self) -> Optional[str]:
        if self.family == "SOK":
            return "sok"
        if self.family == "SK":
            return "sk"
        return None


def _e(name, family, kind, form, secret, **kw) -> CatalogEntry:
    if isinstance(secret, str):
        secret = (secret,)
    recv = kw.pop("receiver", None)
    if isinstance(recv, str):
        recv = (recv,)
    rec = kw.pop("recover", None)
    if isinstance(rec, str):
        rec = (rec,)
    atk = kw.pop("attack", None)
    if isinstance(atk, str):
        atk = (atk,)
    flags = Flags(escrowed=kw.pop("escrowed", False),
                  pfs=kw.pop("pfs", True),
                  kci_resilient=kw.pop("kci", True),
                  known_broken=kw.pop("broken", False))
    return CatalogEntry(name=name, family=family, kind=kind,
                        message_form=form, secret=secret,
                        receiver_secret=recv, flags=flags,
                        pkg_recover=rec, static_attack=atk, **kw)


_ENTRIES = (
    # ---- classical family -------------------------------------------------
    _e("Static DH", "DH", "non_interactive", None, "a*Q_B",
       counterpart="SOK-NIKD", pfs=False, attack="a*Q_B",
       notes="secret is a function of static keys only; leaking either "
             "static key reveals every session"),
    _e("Semi-static DH", "DH", "transport", "xP", "x*Q_B",
       receiver="a*T_B", counterpart="Semi-static SOK",
       pfs=False, attack="b*T_A"),
    _e("Ephemeral DH", "DH", "two_message", "xP", "x*T_B",
       counterpart="Ephemeral SOK",
       notes="unauthenticated; included as the baseline"),
    _e("UM", "DH", "two_message", "xP", ("a*Q_B", "x*T_B"),
       counterpart="RYY", kci=False),
    _e("MTI/A0", "DH", "two_message", "xP", "a*T_B + x*Q_B",
       counterpart="Smart", pfs=False, attack="a*T_B + b*T_A"),
    _e("MTI/A1", "DH", "two_message", "xQ_A", "a*T_B + a*x*Q_B",
       counterpart="Chen-Kudla", pfs=False, attack="a*T_B + b*T_A"),
    _e("MTI/B0", "DH", "two_message", "xQ_B", "inv(a)*T_B + x*P",
       counterpart="MB-2", pfs=False, attack="inv(a)*T_B + inv(b)*T_A"),
    _e("MTI/C0", "DH", "two_message", "xQ_B", "x*(inv(a)*T_B)",
       counterpart="MB-1"),
    _e("MTI/C1", "DH", "two_message", "xF_AB", "x*T_B",
       counterpart="Scott",
       notes="messages are multiples of the static shared point, which "
             "no rewrite rule covers; the counterpart link is by "
             "construction, not by the engine"),
    _e("HMQV", "DH", "two_message", "xP",
       "(x + h_A*a)*(T_B + h_B*Q_B)", counterpart="ID-MQV"),
    _e("MQV-1", "DH", "two_message", "xQ_A",
       "(x + h_A)*a*(T_B + h_B*Q_B)", counterpart="Wang-Chow-Choo"),
    _e("Reduced MQV", "DH", "two_message", "xP",
       "(x + a)*(T_B + Q_B)", counterpart="Shim", broken=True,
       notes="h = 1 weakening of HMQV; kept for the degeneration checks"),
    _e("nID-SYL", "DH", "two_message", "xP",
       ("(x + a)*(T_B + Q_B)", "x*T_B"), counterpart="SYL"),
    _e("ECKE-1N", "DH", "two_message", "xQ_B",
       "(x + h_A)*(inv(a)*(T_B + h_B*Q_A))", counterpart="eMB"),
    _e("Enhanced MTI/C1", "DH", "two_message", "xF_AB",
       "(x + h_A)*(T_B + h_B*F_AB)",
       notes="no identity-based counterpart is known"),
    _e("Hughes", "DH", "transport", "xQ_B", "x*P",
       receiver="inv(a)*T_B", counterpart="SK transport",
       pfs=False, attack="inv(b)*T_A",
       notes="key transport: the sender alone picks the key x*P"),
    _e("Xie-DH", "DH", "two_message", "xQ_B",
       "x*(inv(a)*T_B) + x*P + inv(a)*T_B", counterpart="Xie-ID",
       broken=True,
       notes="secret is (x + y + x*y)*P"),
    _e("LYL-DH", "DH", "two_message", "xQ_B",
       ("inv(a)*T_B + x*P", "x*(inv(a)*T_B)"), counterpart="LYL-ID"),

    # ---- identity-based, sok key extraction -------------------------------
    _e("SOK-NIKD", "SOK", "non_interactive", None, "e(S_A, Q_B)",
       counterpart="Static DH", escrowed=True, pfs=False,
       recover="e(Q_A, Q_B)^s", attack="e(S_A, Q_B)"),
    _e("Semi-static SOK", "SOK", "transport", "xP", "e(Q_B, P_0)^x",
       receiver="e(S_A, T_B)", counterpart="Semi-static DH",
       escrowed=True, pfs=False,
       recover="e(T_A, Q_B)^s", attack="e(S_B, T_A)"),
    _e("Ephemeral SOK", "SOK", "two_message", "xP", "e(x*P_0, T_B)",
       counterpart="Ephemeral DH", escrowed=True,
       recover="e(T_A, T_B)^s",
       notes="authenticated only toward the key centre"),
    _e("RYY", "SOK", "two_message", "xP", ("e(S_A, Q_B)", "x*T_B"),
       counterpart="UM", kci=False,
       notes="the ephemeral half blocks the key centre"),
    _e("Escrowable RYY", "SOK", "two_message", "xP",
       ("e(S_A, Q_B)", "e(x*P_0, T_B)"), escrowed=True, kci=False,
       recover=("e(Q_A, Q_B)^s", "e(T_A, T_B)^s")),
    _e("Smart", "SOK", "two_message", "xP",
       "e(S_A, T_B)*e(P_0, x*Q_B)", counterpart="MTI/A0",
       escrowed=True, pfs=False, supports_inverted=True,
       recover="e(Q_A, T_B)^s*e(Q_B, T_A)^s",
       attack="e(S_A, T_B)*e(S_B, T_A)"),
    _e("Chen-Kudla", "SOK", "two_message", "xQ_A",
       "e(S_A, T_B + x*Q_B)", counterpart="MTI/A1",
       escrowed=True, pfs=False,
       recover="e(T_B, Q_A)^s*e(T_A, Q_B)^s",
       attack="e(S_A, T_B)*e(S_B, T_A)"),
    _e("Wang-Chow-Choo", "SOK", "two_message", "xQ_A",
       "e((x + h_A)*S_A, T_B + h_B*Q_B)", counterpart="MQV-1",
       escrowed=True,
       recover="e(T_A + h_A*Q_A, T_B + h_B*Q_B)^s"),
    _e("Shim", "SOK", "two_message", "xP",
       "e(x*P_0 + S_A, T_B + Q_B)", counterpart="Reduced MQV",
       escrowed=True, broken=True, supports_inverted=True,
       recover="e(T_A + Q_A, T_B + Q_B)^s"),
    _e("SYL", "SOK", "two_message", "xP",
       ("e(x*P_0 + S_A, T_B + Q_B)", "x*T_B"), counterpart="nID-SYL",
       supports_inverted=True,
       notes="adding the bare ephemeral point restores forward secrecy "
             "toward the key centre"),
    _e("ID-MQV", "SOK", "two_message", "xP",
       "e(x*P_0 + h_A*S_A, T_B + h_B*Q_B)", counterpart="HMQV",
       escrowed=True, supports_inverted=True,
       recover="e(T_A + h_A*Q_A, T_B + h_B*Q_B)^s"),
    _e("Escrowless ID-MQV", "SOK", "two_message", "xP",
       ("e(x*P_0 + h_A*S_A, T_B + h_B*Q_B)", "x*T_B")),
    _e("Scott", "SOK", "two_message", "F^x", "T_B^x",
       counterpart="MTI/C1", target_atoms=("T_A", "T_B"),
       notes="messages are powers of the static pairing value and ride "
             "the target-group wire format"),

    # ---- identity-based, sk key extraction --------------------------------
    _e("SK transport", "SK", "transport", "xQ_B", "e(P, P)^x",
       receiver="e(T_B, S_A)", counterpart="Hughes",
       escrowed=True, pfs=False,
       recover="e(T_A, S_B)", attack="e(T_A, S_B)",
       notes="the centre can extract the receiver key, so transport "
             "keys are always recoverable"),
    _e("MB-1", "SK", "two_message", "xQ_B", "e(S_A, T_B)^x",
       counterpart="MTI/C0",
       notes="centre recovery of e(P,P)^{xy} from the transcript is a "
             "pairing Diffie-Hellman instance even with the master "
             "scalar, so the entry is flagged escrowless"),
    _e("MB-2", "SK", "two_message", "xQ_B",
       "e(S_A, T_B)*e(P, P)^x", counterpart="MTI/B0", pfs=False,
       attack="e(S_A, T_B)*e(S_B, T_A)",
       notes="same escrow reasoning as MB-1"),
    _e("eMB", "SK", "two_message", "xQ_B",
       "e(S_A, T_B + h_B*Q_A)^(x + h_A)", counterpart="ECKE-1N"),
    _e("Xie-ID", "SK", "two_message", "xQ_B",
       "e(S_A, T_B)^(x + 1)*e(P, P)^x", counterpart="Xie-DH",
       broken=True),
    _e("LYL-ID", "SK", "two_message", "xQ_B",
       ("e(S_A, T_B)*e(P, P)^x", "e(S_A, T_B)^x"), counterpart="LYL-DH"),
)


# counterpart pairs whose link is witnessed by the rewrite engine
# (classical name, identity-based name)
RULE_CHECKED_PAIRS = (
    ("MTI/A0", "Smart"),
    ("HMQV", "ID-MQV"),
    ("MTI/A1", "Chen-Kudla"),
    ("MQV-1", "Wang-Chow-Choo"),
    ("MTI/C0", "MB-1"),
    ("ECKE-1N", "eMB"),
    ("MTI/B0", "MB-2"),
    ("Hughes", "SK transport"),
    ("Reduced MQV", "Shim"),
    ("nID-SYL", "SYL"),
    ("Xie-DH", "Xie-ID"),
    ("LYL-DH", "LYL-ID"),
)

# entries whose session secrets coincide once the message coefficients
# are pinned to 1 (same family: equal values; cross family: equal
# discrete logs)
DEGENERATION_PAIRS = (
    ("HMQV", "Reduced MQV", "equal"),
    ("ID-MQV", "Shim", "equal"),
    ("ECKE-1N", "eMB", "dlog"),
)


def catalog() -> Tuple[CatalogEntry, ...]:
    """Every entry, classical family first."""
    return _ENTRIES


def secure_catalog() -> Tuple[CatalogEntry, ...]:
    """The catalog without the known-broken entries."""
    return tuple(e for e in _ENTRIES if not e.flags.known_broken)


def _slug(name: str) -> str:
    return "".join(c for c in name.lower() if c.isalnum())


_ALIASES = {
    "mqv": "HMQV",
    "wangchow": "Wang-Chow-Choo",
    "sokstatic": "SOK-NIKD",
    "staticsok": "SOK-NIKD",
}


@lru_cache(maxsize=1)
def _index() -> Dict[str, CatalogEntry]:
    idx = {}
    for entry in _ENTRIES:
        idx[_slug(entry.name)] = entry
    for alias, name in _ALIASES.items():
        idx[_slug(alias)] = idx[_slug(name)]
    return idx


def lookup(name: str) -> CatalogEntry:
    """Find an entry by name; punctuation and case are ignored."""
    entry = _index().get(_slug(name))
    if entry is None:
        raise ProtocolError(f"unknown protocol {name!r}")
    return entry
