"""Key settings: extraction identities, inversion, serialization."""

import pytest

import _oracles as ref
from pairkex.errors import KeyError_
from pairkex.keys import (DhIdentity, SkMaster, dh_keygen, key_from_json,
                          key_to_json, sk_extract, sk_setup, sok_extract,
                          sok_setup, static_secret)


def test_dh_keygen(params, rng):
    key = dh_keygen(params, "alice", rng)
    assert key.id == "alice"
    assert 1 <= key.secret < params.q
    assert key.public == ref.ec_mul(params.p, key.secret, params.generator)


def test_sok_extraction_identity(params, rng):
    master = sok_setup(params, rng)
    key = sok_extract(params, master, "alice")
    assert key.public == params.hash_to_g1(b"alice")
    # private = master exponent times the identity point
    assert params.dlog_g1(key.private, base=key.public) == master.secret
    assert key.master_public == master.public
    assert master.public == params.g1_mul(master.secret, params.generator)
    assert not key.inverted


def test_sok_inverted_master(params, rng):
    master = sok_setup(params, rng, inverted=True)
    key = sok_extract(params, master, "alice")
    assert key.inverted and master.inverted
    assert master.setting == "sok_inv"
    # the advertised point is the inverse scale of the generator
    assert params.g1_mul(master.secret, master.public) == params.generator
    # extraction is unchanged, so this identity survives inversion
    assert params.pair(key.private, master.public) \
        == params.pair(key.public, params.generator)


def test_sk_extraction_identity(params, rng):
    master = sk_setup(params, rng)
    key = sk_extract(params, master, "alice")
    assert key.id_scalar == params.hash_to_zq(b"alice")
    assert key.public == params.g1_add(
        master.public, params.g1_mul(key.id_scalar, params.generator))
    # e(private, public) collapses to the fixed base value
    assert params.pair(key.private, key.public) \
        == params.pair(params.generator, params.generator)


def test_sk_identity_collision_refused(params):
    u = params.hash_to_zq(b"alice")
    s = (params.q - u) % params.q
    master = SkMaster(secret=s, public=params.g1_mul(s, params.generator))
    with pytest.raises(KeyError_):
        sk_extract(params, master, "alice")


def test_static_secret_symmetry(params, rng):
    for i in range(40):
        a = dh_keygen(params, f"a{i}", rng)
        b = dh_keygen(params, f"b{i}", rng)
        assert static_secret(params, a, b).value \
            == static_secret(params, b, a).value
    master = sok_setup(params, rng)
    for i in range(40):
        a = sok_extract(params, master, f"a{i}")
        b = sok_extract(params, master, f"b{i}")
        left, right = static_secret(params, a, b), static_secret(params, b, a)
        assert left.setting == "sok"
        assert left.value == right.value


def test_key_json_round_trips(params, rng):
    master_sok = sok_setup(params, rng)
    master_inv = sok_setup(params, rng, inverted=True)
    master_sk = sk_setup(params, rng)
    samples = [
        dh_keygen(params, "alice", rng),
        master_sok,
        master_inv,
        master_sk,
        sok_extract(params, master_sok, "alice"),
        sok_extract(params, master_inv, "bob"),
        sk_extract(params, master_sk, "carol"),
    ]
    for key in samples:
        again = key_from_json(params, key_to_json(params, key))
        assert again == key


def test_key_json_rejects_garbage(params):
    with pytest.raises(KeyError_):
        key_from_json(params, "{\"setting\": \"nope\"}")
    with pytest.raises(KeyError_):
        key_from_json(params, "not json at all")


def test_public_half_round_trip(params, rng):
    # a peer file carries no private material
    key = dh_keygen(params, "alice", rng)
    public_only = DhIdentity(id="alice", secret=None, public=key.public)
    again = key_from_json(params, key_to_json(params, public_only))
    assert again.secret is None and again.public == key.public
