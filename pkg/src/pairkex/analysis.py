"""Probes that run the catalog and check what the flags claim.

Each probe recomputes a session key from a restricted view:

  escrow_probe        master secret plus the public transcript
  static_compromise_probe
                      both parties' long-term keys plus the transcript,
                      no master secret, no ephemerals
  kci_probe           one party's long-term key, used to impersonate
                      the other towards them

A probe answers "recovered"/"succeeded" only when the rebuilt key is
byte-equal to the honest one, so a probe can never pass by accident of
representation.  Degeneration checks pin the message coefficients to 1
and compare protocol pairs that collapse onto each other.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .backend import PairingParams
from .catalog import DEGENERATION_PAIRS, CatalogEntry, catalog, lookup
from .errors import KeyError_, ProtocolError, ValidationError
from .formula import evaluate, kind_of, parse
from .keys import dh_keygen, sk_extract, sk_setup, sok_extract, sok_setup
from .session import Session, Transcript, session_key

__all__ = [
    "HandshakeRun", "RunReport", "provision", "run_handshake",
    "escrow_probe", "static_compromise_probe", "kci_probe",
    "degeneration_checks", "tamper_probe", "analyze", "full_matrix",
]


def provision(params: PairingParams, entry: CatalogEntry, id_a: str,
              id_b: str, rng, *, inverted: bool = False):
    """Long-term keys for one run: (side A, side B, master or None)."""
    if entry.family == "DH":
        return dh_keygen(params, id_a, rng), dh_keygen(params, id_b, rng), None
    if entry.family == "SOK":
        master = sok_setup(params, rng, inverted=inverted)
        return (sok_extract(params, master, id_a),
                sok_extract(params, master, id_b), master)
    while True:
        master = sk_setup(params, rng)
        try:
            return (sk_extract(params, master, id_a),
                    sk_extract(params, master, id_b), master)
        except KeyError_:
            continue    # identity hashed onto the master scalar, redraw


@dataclass
class HandshakeRun:
    entry: CatalogEntry
    params: PairingParams
    ids: Tuple[str, str]
    session_a: Session
    session_b: Session
    master: Optional[object]
    transcript: Transcript
    key_a: bytes
    key_b: bytes

    @property
    def agreement(self) -> bool:
        return self.key_a == self.key_b


def run_handshake(params: PairingParams, entry: CatalogEntry, rng, *,
                  id_a: str = "alice", id_b: str = "bob",
                  pin_h: bool = False, inverted: bool = False,
                  context: bytes = b"") -> HandshakeRun:
    own_a, own_b, master = provision(params, entry, id_a, id_b, rng,
                                     inverted=inverted)
    A = Session(params, entry, own_a, own_b, "initiator", rng, pin_h=pin_h)
    B = Session(params, entry, own_b, own_a, "responder",
                rng if entry.kind == "two_message" else None, pin_h=pin_h)
    if entry.kind == "two_message":
        B.absorb(A.own_message)
        A.absorb(B.own_message)
    elif entry.kind == "transport":
        B.absorb(A.own_message)
    transcript = Transcript(entry.name, params.fingerprint(), (id_a, id_b),
                            tuple(A.transcript_entries()))
    return HandshakeRun(entry=entry, params=params, ids=(id_a, id_b),
                        session_a=A, session_b=B, master=master,
                        transcript=transcript,
                        key_a=A.derive_key(context),
                        key_b=B.derive_key(context))


# -- probe views -------------------------------------------------------------

def _global_env(run: HandshakeRun) -> Dict[str, object]:
    """Transcript atoms in the global frame: A is the initiator."""
    params, A, B = run.params, run.session_a, run.session_b
    env: Dict[str, object] = {"P": params.generator,
                              "Q_A": A.own.public, "Q_B": B.own.public}
    if run.entry.family == "DH":
        env["a"] = A.own.secret
        env["b"] = B.own.secret
        env["F_AB"] = params.g1_mul(A.own.secret, B.own.public)
    else:
        env["s"] = run.master.secret
        env["P_0"] = A.own.master_public
        env["S_A"] = A.own.private
        env["S_B"] = B.own.private
    if run.entry.family == "SK":
        env["u_A"] = A.own.id_scalar
        env["u_B"] = B.own.id_scalar
    if A.x is not None:
        env["x"] = A.x
    if B.x is not None:
        env["y"] = B.x
    if A.own_message is not None:
        env["T_A"] = A._own_value
        env["h_A"] = 1 if A.pin_h else params.hash_to_zq(
            A.own_message + B.own.id.encode())
    if B.own_message is not None:
        env["T_B"] = B._own_value
        env["h_B"] = 1 if A.pin_h else params.hash_to_zq(
            B.own_message + A.own.id.encode())
    return env


def _rebuild_key(run: HandshakeRun, formulas, env) -> bytes:
    ctx = run.entry.ctx()
    comps = [(kind_of(f, ctx), evaluate(f, env, run.params, ctx))
             for f in formulas]
    return session_key(run.params, run.entry.name, run.ids, b"",
                       run.transcript.entries, comps)


def escrow_probe(run: HandshakeRun) -> str:
    """Replay the key centre: master secret plus transcript, no
    party ever contacted."""
    if run.entry.pkg_recover is None:
        return "not_applicable"
    env = _global_env(run)
    view = {k: env[k] for k in
            ("P", "P_0", "Q_A", "Q_B", "S_A", "S_B", "u_A", "u_B",
             "T_A", "T_B", "h_A", "h_B", "s") if k in env}
    ctx = run.entry.ctx()
    formulas = tuple(parse(f, ctx) for f in run.entry.pkg_recover)
    key = _rebuild_key(run, formulas, view)
    return "recovered" if key == run.key_a else "failed"


def static_compromise_probe(run: HandshakeRun) -> str:
    """Both long-term keys leak after the fact; ephemerals are gone."""
    if run.entry.static_attack is None:
        return "no_attack_defined"
    env = _global_env(run)
    view = {k: env[k] for k in
            ("P", "P_0", "Q_A", "Q_B", "S_A", "S_B", "u_A", "u_B",
             "T_A", "T_B", "h_A", "h_B", "a", "b", "F_AB") if k in env}
    ctx = run.entry.ctx()
    formulas = tuple(parse(f, ctx) for f in run.entry.static_attack)
    key = _rebuild_key(run, formulas, view)
    return "succeeded" if key == run.key_a else "failed"


# entries where holding the victim's own long-term key lets the
# adversary impersonate someone else to the victim
_KCI_TARGETS = ("UM", "RYY", "Escrowable RYY")


def kci_probe(params: PairingParams, entry: CatalogEntry, rng, *,
              id_a: str = "alice", id_b: str = "bob") -> str:
    if entry.name not in _KCI_TARGETS:
        return "no_attack_defined"
    own_a, own_b, _ = provision(params, entry, id_a, id_b, rng)
    victim = Session(params, entry, own_a, own_b, "initiator", rng)
    y = rng.randrange(1, params.q)
    forged_point = params.g1_mul(y, params.generator)   # all targets send xP
    forged_bytes = params.encode_point(forged_point)
    victim.absorb(forged_bytes)
    honest = victim.derive_key()
    # adversary view: victim's long-term key, y, public transcript
    if entry.name == "UM":
        comps = [("g1", params.g1_mul(own_a.secret, own_b.public)),
                 ("g1", params.g1_mul(y, victim._own_value))]
    elif entry.name == "RYY":
        comps = [("gt", params.pair(own_a.private, own_b.public)),
                 ("g1", params.g1_mul(y, victim._own_value))]
    else:
        comps = [("gt", params.pair(own_a.private, own_b.public)),
                 ("gt", params.gt_exp(
                     params.pair(victim._own_value, own_a.master_public), y))]
    entries = [(id_a, "g1", victim.own_message), (id_b, "g1", forged_bytes)]
    forged = session_key(params, entry.name, (id_a, id_b), b"",
                         entries, comps)
    return "succeeded" if forged == honest else "failed"


# -- degenerations ------------------------------------------------------------

def _pinned_initiator(params, entry, seed) -> Session:
    """One pinned run; ephemerals drawn from their own streams so the
    draws line up across entries from different families."""
    keys = random.Random(seed)
    own_a, own_b, _ = provision(params, entry, "alice", "bob", keys)
    A = Session(params, entry, own_a, own_b, "initiator",
                random.Random(seed + 1), pin_h=True)
    B = Session(params, entry, own_b, own_a, "responder",
                random.Random(seed + 2), pin_h=True)
    B.absorb(A.own_message)
    A.absorb(B.own_message)
    return A


def degeneration_checks(params: PairingParams, rng, *,
                        trials: int = 10) -> List[dict]:
    """Pin every message coefficient to 1 and compare the pairs the
    catalog says collapse onto each other.  Needs the tiny tier when a
    pair compares across groups (discrete logs are brute-forced)."""
    results = []
    for strong_name, weak_name, mode in DEGENERATION_PAIRS:
        strong, weak = lookup(strong_name), lookup(weak_name)
        agree = True
        for _ in range(trials):
            seed = rng.randrange(1 << 62)
            side_s = _pinned_initiator(params, strong, seed)
            side_w = _pinned_initiator(params, weak, seed)
            cs = [v for _, v in side_s.secret_components()]
            cw = [v for _, v in side_w.secret_components()]
            if mode == "equal":
                agree &= cs == cw
            else:   # same exponent, different groups
                logs_s = [params.dlog_g1(v) for v in cs]
                logs_w = [params.dlog_gt(v) for v in cw]
                agree &= logs_s == logs_w
        results.append({"pair": [strong_name, weak_name],
                        "mode": mode, "agree": agree, "trials": trials})
    return results


# -- wire robustness -----------------------------------------------------------

def tamper_probe(params: PairingParams, entry: CatalogEntry, rng, *,
                 id_a: str = "alice", id_b: str = "bob") -> bool:
    """Flip one byte of one in-flight message.  True when the run is
    rejected outright or the two sides end up with different keys."""
    if entry.message_form is None:
        raise ProtocolError(f"{entry.name} sends no messages")
    own_a, own_b, _ = provision(params, entry, id_a, id_b, rng)
    A = Session(params, entry, own_a, own_b, "initiator", rng)
    B = Session(params, entry, own_b, own_a, "responder",
                rng if entry.kind == "two_message" else None)

    def flip(data: bytes) -> bytes:
        i = rng.randrange(len(data))
        out = bytearray(data)
        out[i] ^= rng.randrange(1, 256)
        return bytes(out)

    hit_b_to_a = entry.kind == "two_message" and rng.randrange(2) == 0
    try:
        if hit_b_to_a:
            B.absorb(A.own_message)
            A.absorb(flip(B.own_message))
        else:
            B.absorb(flip(A.own_message))
            if entry.kind == "two_message":
                A.absorb(B.own_message)
    except ValidationError:
        return True
    return A.derive_key() != B.derive_key()


# -- reports -------------------------------------------------------------------

@dataclass
class RunReport:
    protocol: str
    family: str
    kind: str
    agreement: bool
    escrow: str
    static_compromise: str
    kci: str
    known_broken: bool
    runs: int
    notes: str = ""

    def matches_flags(self, entry: CatalogEntry) -> bool:
        f = entry.flags
        return (self.agreement
                and self.escrow == ("recovered" if f.escrowed
                                    else "not_applicable")
                and self.static_compromise == ("succeeded" if not f.pfs
                                               else "no_attack_defined")
                and self.kci == ("succeeded" if not f.kci_resilient
                                 else "no_attack_defined"))

    def to_dict(self) -> dict:
        return {"protocol": self.protocol, "family": self.family,
                "kind": self.kind, "runs": self.runs,
                "agreement": self.agreement, "escrow": self.escrow,
                "static_compromise": self.static_compromise,
                "kci": self.kci, "known_broken": self.known_broken,
                "notes": self.notes}


def _stable(values) -> str:
    seen = set(values)
    if "failed" in seen:
        return "failed"
    if len(seen) != 1:
        return "failed"
    return seen.pop()


def analyze(params: PairingParams, entry: CatalogEntry, rng, *,
            runs: int = 3) -> RunReport:
    agreement = True
    escrows, statics, kcis = [], [], []
    for _ in range(runs):
        run = run_handshake(params, entry, rng)
        agreement &= run.agreement
        escrows.append(escrow_probe(run))
        statics.append(static_compromise_probe(run))
        kcis.append(kci_probe(params, entry, rng))
    return RunReport(protocol=entry.name, family=entry.family,
                     kind=entry.kind, agreement=agreement,
                     escrow=_stable(escrows),
                     static_compromise=_stable(statics),
                     kci=_stable(kcis),
                     known_broken=entry.flags.known_broken,
                     runs=runs, notes=entry.notes)


def full_matrix(params: PairingParams, rng, *,
                runs: int = 3) -> Dict[str, RunReport]:
    return {entry.name: analyze(params, entry, rng, runs=runs)
            for entry in catalog()}
