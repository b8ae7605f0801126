"""Pairing backend against frozen vectors and the reference arithmetic."""

import pytest

import _oracles as ref
from pairkex.backend import GT_ONE, param_gen, params_from_json, params_to_json
from pairkex.errors import DecodeError, ParamError, ValidationError

# frozen for seed b"pairkex-test-vectors", tiny tier
TINY_P = 32531
TINY_Q = 2711
TINY_COFACTOR = 12
TINY_GENERATOR = (19383, 10784)
TINY_FINGERPRINT = "736e6ef8d46f1bea"
TINY_PAIR_GG = (18030, 26796)
TINY_HASH_ZQ_ALICE = 841
TINY_HASH_G1_ALICE = (15470, 13204)
TINY_ENC_GENERATOR = "044bb72a20"


def test_frozen_parameters(params):
    assert params.p == TINY_P
    assert params.q == TINY_Q
    assert params.cofactor == TINY_COFACTOR
    assert params.generator == TINY_GENERATOR
    assert params.fingerprint() == TINY_FINGERPRINT


def test_parameters_against_reference(params):
    assert ref.is_prime(params.p)
    assert ref.is_prime(params.q)
    assert params.p % 4 == 3
    assert params.p + 1 == params.cofactor * params.q
    assert ref.on_curve(params.p, params.generator)
    assert ref.ec_mul(params.p, params.q, params.generator) is None


def test_param_gen_is_deterministic():
    a = param_gen("tiny", seed=b"pairkex-test-vectors")
    b = param_gen("tiny", seed=b"pairkex-test-vectors")
    c = param_gen("tiny", seed=b"a different seed")
    assert a == b
    assert (a.p, a.generator) != (c.p, c.generator)


def test_tiny_tier_sizes(params):
    assert 11 <= params.q.bit_length() < 14


def test_demo_tier():
    demo = param_gen("demo", seed=b"demo-vector")
    assert demo.q.bit_length() >= 160
    assert ref.is_prime(demo.p) and ref.is_prime(demo.q)
    assert demo.p % 4 == 3
    assert demo.p + 1 == demo.cofactor * demo.q
    u = demo.pair(demo.generator, demo.generator)
    assert u != GT_ONE
    # one bilinearity sample is enough at this size
    A = demo.g1_mul(7, demo.generator)
    B = demo.g1_mul(11, demo.generator)
    assert demo.pair(A, B) == demo.gt_exp(u, 77)
    with pytest.raises(ValidationError):
        demo.dlog_g1(A)


def test_unknown_tier_rejected():
    with pytest.raises(ParamError):
        param_gen("huge", seed=b"x")


def test_params_json_round_trip(params):
    again = params_from_json(params_to_json(params))
    assert again == params
    assert again.fingerprint() == TINY_FINGERPRINT
    with pytest.raises(ParamError):
        params_from_json("{\"p\": 4}")


# -- group one ----------------------------------------------------------------

def test_g1_matches_reference(params, rng):
    for _ in range(25):
        j, k = rng.randrange(params.q), rng.randrange(params.q)
        A = params.g1_mul(j, params.generator)
        B = params.g1_mul(k, params.generator)
        assert A == ref.ec_mul(params.p, j, params.generator)
        assert params.g1_add(A, B) == ref.ec_add(params.p, A, B)
    assert params.g1_mul(0, params.generator) is None
    assert params.g1_add(None, params.generator) == params.generator


def test_g1_group_laws(params, rng):
    G = params.generator
    for _ in range(10):
        j, k = rng.randrange(1, params.q), rng.randrange(1, params.q)
        A, B = params.g1_mul(j, G), params.g1_mul(k, G)
        assert params.g1_add(A, B) == params.g1_add(B, A)
        assert params.g1_add(A, params.g1_neg(A)) is None
        assert params.g1_mul(j + k, G) == params.g1_add(A, B)


def test_dlog_oracles(params, rng):
    u = params.pair(params.generator, params.generator)
    for _ in range(8):
        k = rng.randrange(params.q)
        assert params.dlog_g1(params.g1_mul(k, params.generator)) == k
        assert params.dlog_gt(params.gt_exp(u, k) if k else GT_ONE) == k
    # base override
    B = params.g1_mul(3, params.generator)
    assert params.dlog_g1(params.g1_mul(15, params.generator), base=B) == 5


# -- the pairing ----------------------------------------------------------------

def test_pair_frozen_value(params):
    assert params.pair(params.generator, params.generator) == TINY_PAIR_GG


def test_pair_non_degenerate(params):
    u = params.pair(params.generator, params.generator)
    assert u != GT_ONE
    assert ref.fp2_pow(params.p, u, params.q) == GT_ONE  # order divides q, q prime


def test_pair_bilinear_against_reference(params, rng):
    u = params.pair(params.generator, params.generator)
    for _ in range(30):
        a = rng.randrange(1, params.q)
        b = rng.randrange(1, params.q)
        A = params.g1_mul(a, params.generator)
        B = params.g1_mul(b, params.generator)
        assert params.pair(A, B) == ref.fp2_pow(params.p, u, a * b % params.q)
        assert params.pair(A, B) == params.pair(B, A)


def test_pair_identity_absorbs(params):
    G = params.generator
    assert params.pair(None, G) == GT_ONE
    assert params.pair(G, None) == GT_ONE


def test_pair_rejects_foreign_points(params):
    with pytest.raises(ValidationError):
        params.pair((1, 1), params.generator)


# -- target group ------------------------------------------------------------------

def test_gt_ops(params, rng):
    u = params.pair(params.generator, params.generator)
    for _ in range(10):
        a, b = rng.randrange(params.q), rng.randrange(params.q)
        assert params.gt_mul(params.gt_exp(u, a), params.gt_exp(u, b)) \
            == params.gt_exp(u, a + b)
    assert params.gt_mul(u, params.gt_inv(u)) == GT_ONE
    assert params.gt_exp(u, -1) == params.gt_inv(u)
    assert params.gt_exp(u, 0) == GT_ONE


def test_gt_identity_is_a_member(params):
    # the subgroup test alone does not reject the identity; refusing
    # it on the wire is the session layer's job
    assert params.gt_valid(GT_ONE)


def test_gt_rejects_outsiders(params):
    bad = (2, 0)
    assert not params.gt_valid(bad)
    with pytest.raises(ValidationError):
        params.gt_mul(bad, bad)
    with pytest.raises(ValidationError):
        params.gt_exp(bad, 2)


# -- hashing -----------------------------------------------------------------------

def test_hash_anchors(params):
    assert params.hash_to_zq(b"alice") == TINY_HASH_ZQ_ALICE
    assert params.hash_to_g1(b"alice") == TINY_HASH_G1_ALICE


def test_hash_to_g1_lands_in_subgroup(params):
    for i in range(20):
        R = params.hash_to_g1(f"id-{i}".encode())
        assert ref.on_curve(params.p, R)
        assert ref.ec_mul(params.p, params.q, R) is None
        assert params.decode_point(params.encode_point(R)) == R


def test_hash_to_zq_range(params):
    for i in range(200):
        v = params.hash_to_zq(f"msg-{i}".encode())
        assert 1 <= v < params.q


# -- wire format -----------------------------------------------------------------

def test_point_round_trips(params, rng):
    assert params.encode_point(params.generator).hex() == TINY_ENC_GENERATOR
    assert params.encode_point(None) == b"\x00"
    assert params.decode_point(b"\x00") is None
    for _ in range(100):
        A = params.g1_mul(rng.randrange(1, params.q), params.generator)
        assert params.decode_point(params.encode_point(A)) == A


def test_target_round_trips(params, rng):
    u = params.pair(params.generator, params.generator)
    for _ in range(100):
        v = params.gt_exp(u, rng.randrange(params.q))
        assert params.decode_target(params.encode_target(v)) == v


def test_scalar_round_trips(params, rng):
    for _ in range(100):
        k = rng.randrange(params.q)
        assert params.decode_scalar(params.encode_scalar(k)) == k


def _full_order_point(params):
    # a curve point outside the order-q subgroup
    p = params.p
    x = 2
    while True:
        rhs = (x * x * x + x) % p
        if rhs:
            y = pow(rhs, (p + 1) // 4, p)
            if y * y % p == rhs and ref.ec_mul(p, params.q, (x, y)) is not None:
                return (x, y)
        x += 1


def test_decode_point_negatives(params):
    w = params.point_width
    with pytest.raises(DecodeError) as e:
        params.decode_point(b"\x04" + b"\x00" * w)
    assert e.value.reason == "length"
    with pytest.raises(DecodeError) as e:
        params.decode_point(b"\x07" + b"\x00" * 2 * w)
    assert e.value.reason == "prefix"
    off = b"\x04" + (1).to_bytes(w, "big") + (1).to_bytes(w, "big")
    with pytest.raises(DecodeError) as e:
        params.decode_point(off)
    assert e.value.reason == "curve"
    x, y = _full_order_point(params)
    raw = b"\x04" + x.to_bytes(w, "big") + y.to_bytes(w, "big")
    with pytest.raises(DecodeError) as e:
        params.decode_point(raw)
    assert e.value.reason == "subgroup"


def test_decode_target_negatives(params):
    w = params.point_width
    with pytest.raises(DecodeError) as e:
        params.decode_target(b"\x00" * (2 * w - 1))
    assert e.value.reason == "length"
    bad = (2).to_bytes(w, "big") + (0).to_bytes(w, "big")
    with pytest.raises(DecodeError) as e:
        params.decode_target(bad)
    assert e.value.reason == "subgroup"


def test_scalar_negatives(params):
    with pytest.raises(ValidationError):
        params.encode_scalar(params.q)
    with pytest.raises(DecodeError) as e:
        params.decode_scalar(params.q.to_bytes(params.scalar_width, "big"))
    assert e.value.reason == "range"
    with pytest.raises(DecodeError) as e:
        params.decode_scalar(b"\x01")
    assert e.value.reason == "length"


def test_encode_rejects_off_curve(params):
    with pytest.raises(ValidationError):
        params.encode_point((1, 1))
