"""Session state machine, key derivation, transcripts."""

import random

import pytest

from pairkex.analysis import provision
from pairkex.backend import GT_ONE
from pairkex.catalog import catalog, lookup
from pairkex.errors import KeyError_, ProtocolError, ValidationError
from pairkex.keys import dh_keygen, sok_extract, sok_setup
from pairkex.session import Session, Transcript


def _complete_pair(params, entry, rng, **kw):
    own_a, own_b, _ = provision(params, entry, "alice", "bob", rng,
                                inverted=kw.pop("inverted", False))
    A = Session(params, entry, own_a, own_b, "initiator", rng, **kw)
    B = Session(params, entry, own_b, own_a, "responder",
                rng if entry.kind == "two_message" else None, **kw)
    if entry.kind == "two_message":
        B.absorb(A.own_message)
        A.absorb(B.own_message)
    elif entry.kind == "transport":
        B.absorb(A.own_message)
    return A, B


def test_every_entry_agrees(params, rng):
    for entry in catalog():
        for _ in range(10):
            A, B = _complete_pair(params, entry, rng)
            assert A.derive_key() == B.derive_key(), entry.name


def test_seeded_runs_are_reproducible(params):
    entry = lookup("Wang-Chow-Choo")
    keys = []
    for _ in range(2):
        rng = random.Random(1234)
        A, B = _complete_pair(params, entry, rng)
        keys.append((A.own_message, B.own_message, A.derive_key()))
    assert keys[0] == keys[1]


def test_context_separates_keys(params, rng):
    A, B = _complete_pair(params, lookup("HMQV"), rng)
    assert A.derive_key(b"one") == B.derive_key(b"one")
    assert A.derive_key(b"one") != A.derive_key(b"two")
    assert len(A.derive_key()) == 32


def test_phase_machine(params, rng):
    entry = lookup("HMQV")
    own_a, own_b, _ = provision(params, entry, "alice", "bob", rng)
    A = Session(params, entry, own_a, own_b, "initiator", rng)
    assert A.phase == "sent"
    with pytest.raises(ProtocolError):
        A.secret_components()
    B = Session(params, entry, own_b, own_a, "responder", rng)
    B.absorb(A.own_message)
    assert B.phase == "complete"
    with pytest.raises(ProtocolError):
        B.absorb(A.own_message)
    A.absorb(B.own_message)
    assert A.derive_key() == B.derive_key()


def test_non_interactive_never_absorbs(params, rng):
    entry = lookup("SOK-NIKD")
    own_a, own_b, _ = provision(params, entry, "alice", "bob", rng)
    A = Session(params, entry, own_a, own_b, "initiator")
    assert A.phase == "complete"
    assert A.own_message is None
    with pytest.raises(ProtocolError):
        A.absorb(b"\x00")


def test_transport_roles(params, rng):
    entry = lookup("Hughes")
    own_a, own_b, _ = provision(params, entry, "alice", "bob", rng)
    sender = Session(params, entry, own_a, own_b, "initiator", rng)
    receiver = Session(params, entry, own_b, own_a, "responder")
    assert sender.phase == "complete"
    assert receiver.phase == "fresh"
    with pytest.raises(ProtocolError):
        receiver.secret_components()
    receiver.absorb(sender.own_message)
    assert sender.derive_key() == receiver.derive_key()
    # the sender never takes a message back
    with pytest.raises(ProtocolError):
        sender.absorb(receiver.own_message or b"\x00")


def test_emitting_role_requires_rng(params, rng):
    entry = lookup("HMQV")
    own_a, own_b, _ = provision(params, entry, "alice", "bob", rng)
    with pytest.raises(ProtocolError):
        Session(params, entry, own_a, own_b, "initiator")


def test_identity_message_refused(params, rng):
    entry = lookup("HMQV")
    own_a, own_b, _ = provision(params, entry, "alice", "bob", rng)
    A = Session(params, entry, own_a, own_b, "initiator", rng)
    with pytest.raises(ValidationError):
        A.absorb(b"\x00")


def test_scott_runs_in_the_target_group(params, rng):
    entry = lookup("Scott")
    A, B = _complete_pair(params, entry, rng)
    assert A.message_kind == "gt"
    assert len(A.own_message) == 2 * params.point_width
    assert A.derive_key() == B.derive_key()
    own_a, own_b, _ = provision(params, entry, "alice", "bob", rng)
    fresh = Session(params, entry, own_a, own_b, "initiator", rng)
    with pytest.raises(ValidationError):
        fresh.absorb(params.encode_target(GT_ONE))


def test_family_mismatch_refused(params, rng):
    dh_key = dh_keygen(params, "alice", rng)
    master = sok_setup(params, rng)
    sok_key = sok_extract(params, master, "bob")
    with pytest.raises(KeyError_):
        Session(params, lookup("HMQV"), sok_key, sok_key, "initiator", rng)
    with pytest.raises(KeyError_):
        Session(params, lookup("Smart"), dh_key, dh_key, "initiator", rng)


def test_missing_private_half_refused(params, rng):
    entry = lookup("HMQV")
    own_a, own_b, _ = provision(params, entry, "alice", "bob", rng)
    hollow = type(own_a)(id="alice", secret=None, public=own_a.public)
    with pytest.raises(KeyError_):
        Session(params, entry, hollow, own_b, "initiator", rng)


def test_inverted_master_agreement(params, rng):
    for name in ("Smart", "Shim", "SYL", "ID-MQV"):
        for _ in range(5):
            A, B = _complete_pair(params, lookup(name), rng, inverted=True)
            assert A.derive_key() == B.derive_key(), name


def test_inverted_master_rejected_elsewhere(params, rng):
    entry = lookup("RYY")
    own_a, own_b, _ = provision(params, entry, "alice", "bob", rng,
                                inverted=True)
    with pytest.raises(KeyError_):
        Session(params, entry, own_a, own_b, "initiator", rng)


def test_mixed_inversion_rejected(params, rng):
    entry = lookup("Smart")
    plain_a, _, _ = provision(params, entry, "alice", "bob", rng)
    _, inv_b, _ = provision(params, entry, "alice", "bob", rng,
                            inverted=True)
    with pytest.raises(KeyError_):
        Session(params, entry, plain_a, inv_b, "initiator", rng)


def test_transcript_round_trip(params, rng):
    entry = lookup("HMQV")
    A, B = _complete_pair(params, entry, rng)
    t = Transcript(entry.name, params.fingerprint(), ("alice", "bob"),
                   tuple(A.transcript_entries()))
    assert t.entries[0][0] == "alice"  # initiator first
    again = Transcript.from_jsonl(t.to_jsonl())
    assert again == t


@pytest.mark.parametrize("text", [
    "",
    "not json",
    "{\"protocol\": \"HMQV\"}\n{\"seq\": 0}",
    "{\"protocol\": \"HMQV\", \"params_ref\": \"x\", \"ids\": [\"a\", \"b\"]}\n"
    "{\"seq\": 0, \"sender_id\": \"a\", \"kind\": \"g1\", \"bytes_hex\": \"zz\"}",
])
def test_transcript_rejects_malformed(text):
    with pytest.raises(ValidationError):
        Transcript.from_jsonl(text)


def test_reflection_runs(params, rng):
    # both sides under one identity still agree
    entry = lookup("HMQV")
    own, _, _ = provision(params, entry, "alice", "alice", rng)
    A = Session(params, entry, own, own, "initiator", rng)
    B = Session(params, entry, own, own, "responder", rng)
    B.absorb(A.own_message)
    A.absorb(B.own_message)
    assert A.derive_key() == B.derive_key()
