"""Acceptance gate: one test per criterion, exact tolerances, tiny tier.

Each test prints a single PASS/FAIL line (visible under pytest -s; the
pytest verdict itself carries the same information per criterion).
"""

import random

import _oracles as ref
from pairkex import analysis
from pairkex.backend import GT_ONE
from pairkex.catalog import RULE_CHECKED_PAIRS, catalog, lookup
from pairkex.formula import kind_of, parse, render
from pairkex.rewrite import (apply_rules, normalize, structural_equiv,
                             verify_correspondence)


def _report(num, label, ok):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {label}")
    assert ok, f"criterion {num}: {label}"


def test_criterion_1_pairing_axioms(params):
    rng = random.Random(101)
    ok = True
    for _ in range(100):
        j = rng.randrange(1, params.q)
        k = rng.randrange(1, params.q)
        a = rng.randrange(1, params.q)
        b = rng.randrange(1, params.q)
        Q = params.g1_mul(j, params.generator)
        R = params.g1_mul(k, params.generator)
        ok &= params.pair(params.g1_mul(a, Q), params.g1_mul(b, R)) \
            == params.gt_exp(params.pair(Q, R), a * b)
    u = params.pair(params.generator, params.generator)
    ok &= u != GT_ONE
    ok &= ref.fp2_pow(params.p, u, params.q) == GT_ONE
    _report(1, "100 bilinearity checks and non-degeneracy, exact", ok)


def test_criterion_2_agreement(params):
    rng = random.Random(102)
    entries = catalog()
    ok = len(entries) >= 28
    for entry in entries:
        for _ in range(100):
            run = analysis.run_handshake(params, entry, rng)
            ok &= run.key_a == run.key_b
    _report(2, f"{len(entries)} protocols x 100 honest runs, "
            "byte-equal keys", ok)


def test_criterion_3_rule_soundness(params):
    rng = random.Random(103)
    ok = True
    for dh_name, id_name in RULE_CHECKED_PAIRS:
        dh, ib = lookup(dh_name), lookup(id_name)
        views = [(dh.parsed_secret(), ib.parsed_secret())]
        if dh.kind == "transport":
            views.append((dh.parsed_secret(receiver=True),
                          ib.parsed_secret(receiver=True)))
        for dh_comps, id_comps in views:
            ok &= len(dh_comps) == len(id_comps)
            for dh_f, id_f in zip(dh_comps, id_comps):
                lift = kind_of(id_f, ib.ctx()) == "gt"
                image = apply_rules(dh_f, ib.ruleset,
                                    translate_pure_ephemeral=lift)
                ok &= structural_equiv(normalize(image), id_f, ib.ctx())
                ok &= verify_correspondence(
                    dh_f, id_f, ruleset=ib.ruleset,
                    message_form=dh.message_form, params=params,
                    rng=rng, trials=50, id_ctx=ib.ctx())
    _report(3, "12 counterpart pairs: structural match and 50-trial "
            "correspondence", ok)


def test_criterion_4_mqv_derivation_pin():
    secret = parse(lookup("HMQV").secret[0], lookup("HMQV").ctx())
    image = render(normalize(apply_rules(secret, "sok")))
    ok = image == "e(x*P_0 + h_A*S_A, T_B + h_B*Q_B)"
    _report(4, "rule image of the MQV secret normalizes to "
            "e(x*P_0 + h_A*S_A, T_B + h_B*Q_B)", ok)


def test_criterion_5_degenerations(params):
    rng = random.Random(105)
    ok = True
    for strong, weak in (("ID-MQV", "Shim"), ("HMQV", "Reduced MQV")):
        for _ in range(50):
            seed = rng.randrange(1 << 62)
            side_s = analysis._pinned_initiator(params, lookup(strong), seed)
            side_w = analysis._pinned_initiator(params, lookup(weak), seed)
            ok &= [v for _, v in side_s.secret_components()] \
                == [v for _, v in side_w.secret_components()]
    _report(5, "h=1 hook: ID-MQV == Shim and MQV == Reduced MQV, "
            "50 paired runs each", ok)


def test_criterion_6_security_witnesses(params):
    rng = random.Random(106)
    ok = True
    for entry in catalog():
        escrow_want = "recovered" if entry.flags.escrowed \
            else "not_applicable"
        static_want = "no_attack_defined" if entry.flags.pfs \
            else "succeeded"
        kci_want = "no_attack_defined" if entry.flags.kci_resilient \
            else "succeeded"
        for _ in range(50):
            run = analysis.run_handshake(params, entry, rng)
            ok &= analysis.escrow_probe(run) == escrow_want
            ok &= analysis.static_compromise_probe(run) == static_want
        for _ in range(50):
            ok &= analysis.kci_probe(params, entry, rng) == kci_want
    # the named witnesses in particular
    ok &= not lookup("MTI/A0").flags.pfs and not lookup("Smart").flags.pfs
    ok &= not lookup("UM").flags.kci_resilient
    ok &= not lookup("RYY").flags.kci_resilient
    _report(6, "escrow/static-compromise/KCI witnesses match flags, "
            "50 runs per cell", ok)


def test_criterion_7_inverted_master(params):
    rng = random.Random(107)
    ok = True
    for name in ("Smart", "Shim", "SYL", "ID-MQV"):
        for _ in range(50):
            run = analysis.run_handshake(params, lookup(name), rng,
                                         inverted=True)
            ok &= run.agreement
    _report(7, "Smart/Shim/SYL/ID-MQV agree under the inverted master, "
            "50 runs each", ok)


def test_criterion_8_robustness(params):
    rng = random.Random(108)
    ok = True
    u = params.pair(params.generator, params.generator)
    for _ in range(1000):
        A = params.g1_mul(rng.randrange(1, params.q), params.generator)
        v = params.gt_exp(u, rng.randrange(params.q))
        k = rng.randrange(params.q)
        ok &= params.decode_point(params.encode_point(A)) == A
        ok &= params.decode_target(params.encode_target(v)) == v
        ok &= params.decode_scalar(params.encode_scalar(k)) == k
    mutated = 0
    for entry in catalog():
        if entry.message_form is None:
            continue
        for _ in range(20):
            ok &= analysis.tamper_probe(params, entry, rng)
            mutated += 1
    _report(8, f"1000 wire round trips and {mutated} mutated runs "
            "all detected", ok)


def test_criterion_9_exponent_characterizations(params):
    rng = random.Random(109)
    q = params.q
    ok = True
    for _ in range(50):
        run = analysis.run_handshake(params, lookup("MTI/A1"), rng)
        env = analysis._global_env(run)
        comp = run.session_a.secret_components()[0][1]
        ok &= params.dlog_g1(comp) \
            == env["a"] * env["b"] * (env["x"] + env["y"]) % q
    for _ in range(50):
        run = analysis.run_handshake(params, lookup("HMQV"), rng)
        env = analysis._global_env(run)
        comp = run.session_a.secret_components()[0][1]
        ok &= params.dlog_g1(comp) \
            == (env["x"] + env["h_A"] * env["a"]) \
            * (env["y"] + env["h_B"] * env["b"]) % q
    for _ in range(50):
        run = analysis.run_handshake(params, lookup("Chen-Kudla"), rng)
        env = analysis._global_env(run)
        comp = run.session_a.secret_components()[0][1]
        qa = params.dlog_g1(env["Q_A"])
        qb = params.dlog_g1(env["Q_B"])
        ok &= params.dlog_gt(comp) \
            == env["s"] * qa * qb * (env["x"] + env["y"]) % q
    for _ in range(50):
        run = analysis.run_handshake(params, lookup("eMB"), rng)
        env = analysis._global_env(run)
        comp = run.session_a.secret_components()[0][1]
        ok &= params.dlog_gt(comp) \
            == (env["x"] + env["h_A"]) * (env["y"] + env["h_B"]) % q
    _report(9, "dlog closed forms for MTI/A1, MQV, Chen-Kudla, eMB, "
            "50 runs each", ok)
