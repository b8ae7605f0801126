"""Command line entry point.

Exit codes: 0 success, 1 usage, 2 configuration (parameter or key
files missing or mismatched), 3 validation (bad wire data or formula),
4 key agreement failure, 5 invariant failure from the analysis
matrix, 6 I/O.

The parameter file defaults to $PAIRKEX_PARAMS, the key store
directory to $PAIRKEX_STORE.  Commands that take --seed are
byte-reproducible; without a seed they draw from the OS.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import secrets
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional
from urllib.parse import quote

from . import analysis
from .backend import PairingParams, param_gen, params_from_json, params_to_json
from .catalog import catalog, lookup
from .errors import (AgreementError, FormulaError, InvariantError, KeyError_,
                     ParamError, ProtocolError, ValidationError)
from .formula import DEFAULT_CTX, kind_of, parse, render
from .keys import (SETTINGS, dh_keygen, key_from_json, key_to_json,
                   sk_extract, sk_setup, sok_extract, sok_setup)
from .rewrite import apply_rules, normalize, verify_correspondence
from .session import Session, Transcript

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this surface reserves 2 for
    # configuration problems
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class Config:
    params_path: Path
    store_dir: Path
    json_output: bool
    seed: Optional[bytes]


def _hex_bytes(text: str) -> bytes:
    try:
        data = bytes.fromhex(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not hex")
    if not data:
        raise argparse.ArgumentTypeError("seed must not be empty")
    return data


def _rng(cfg: Config):
    if cfg.seed is not None:
        return random.Random(int.from_bytes(cfg.seed, "big"))
    return random.SystemRandom()


def _load_params(cfg: Config) -> PairingParams:
    try:
        text = cfg.params_path.read_text()
    except FileNotFoundError:
        raise ParamError(f"no parameter file at {cfg.params_path}; "
                         "run `pairkex params gen` first")
    return params_from_json(text)


# -- key store ----------------------------------------------------------------

_META = "store.json"
_MASTER = "master.json"


def _store_meta(cfg: Config) -> dict:
    try:
        return json.loads((cfg.store_dir / _META).read_text())
    except FileNotFoundError:
        raise KeyError_(f"no key store at {cfg.store_dir}; "
                        "run `pairkex keys setup` first")
    except json.JSONDecodeError as exc:
        raise KeyError_(f"key store metadata is unreadable: {exc}")


def _id_path(cfg: Config, ident: str) -> Path:
    return cfg.store_dir / f"id_{quote(ident, safe='')}.json"


def _load_identity(cfg: Config, params: PairingParams, ident: str):
    path = _id_path(cfg, ident)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise KeyError_(f"no key file for {ident!r} in {cfg.store_dir}; "
                        "run `pairkex keys extract --id ...`")
    return key_from_json(params, text)


# -- subcommands ---------------------------------------------------------------

def cmd_params_gen(cfg: Config, args) -> int:
    seed = cfg.seed if cfg.seed is not None else secrets.token_bytes(16)
    params = param_gen(args.tier, seed=seed)
    out = Path(args.out) if args.out else cfg.params_path
    out.write_text(params_to_json(params))
    if cfg.json_output:
        print(json.dumps({"path": str(out), "tier": params.tier,
                          "fingerprint": params.fingerprint()},
                         sort_keys=True))
    else:
        print(f"wrote {out} (tier {params.tier}, "
              f"fingerprint {params.fingerprint()})")
    return 0


def cmd_keys_setup(cfg: Config, args) -> int:
    params = _load_params(cfg)
    rng = _rng(cfg)
    cfg.store_dir.mkdir(parents=True, exist_ok=True)
    if args.setting == "sok":
        master = sok_setup(params, rng)
    elif args.setting == "sok_inv":
        master = sok_setup(params, rng, inverted=True)
    elif args.setting == "sk":
        master = sk_setup(params, rng)
    else:
        master = None    # classical setting has no key centre
    if master is not None:
        (cfg.store_dir / _MASTER).write_text(key_to_json(params, master))
    meta = {"setting": args.setting, "params_ref": params.fingerprint()}
    (cfg.store_dir / _META).write_text(json.dumps(meta, sort_keys=True))
    if cfg.json_output:
        print(json.dumps(meta, sort_keys=True))
    else:
        print(f"key store at {cfg.store_dir} ({args.setting})")
    return 0


def cmd_keys_extract(cfg: Config, args) -> int:
    params = _load_params(cfg)
    meta = _store_meta(cfg)
    if meta.get("params_ref") != params.fingerprint():
        raise KeyError_("key store was built for a different parameter set")
    setting = meta.get("setting")
    if setting == "dh":
        identity = dh_keygen(params, args.id, _rng(cfg))
    else:
        master = key_from_json(params,
                               (cfg.store_dir / _MASTER).read_text())
        if setting in ("sok", "sok_inv"):
            identity = sok_extract(params, master, args.id)
        elif setting == "sk":
            identity = sk_extract(params, master, args.id)
        else:
            raise KeyError_(f"key store setting {setting!r} is unknown")
    _id_path(cfg, args.id).write_text(key_to_json(params, identity))
    if cfg.json_output:
        print(json.dumps({"id": args.id, "setting": setting,
                          "path": str(_id_path(cfg, args.id))},
                         sort_keys=True))
    else:
        print(f"extracted {args.id!r} into {_id_path(cfg, args.id)}")
    return 0


_FLAG_FILTERS = {
    "escrowed": lambda e: e.flags.escrowed,
    "no-pfs": lambda e: not e.flags.pfs,
    "no-kci": lambda e: not e.flags.kci_resilient,
    "broken": lambda e: e.flags.known_broken,
    "secure": lambda e: not e.flags.known_broken,
}


def _flag_text(entry) -> str:
    bits = []
    if entry.flags.escrowed:
        bits.append("escrowed")
    if not entry.flags.pfs:
        bits.append("no-pfs")
    if not entry.flags.kci_resilient:
        bits.append("no-kci")
    if entry.flags.known_broken:
        bits.append("broken")
    return ",".join(bits) or "-"


def cmd_catalog_list(cfg: Config, args) -> int:
    entries = catalog()
    if args.family:
        entries = tuple(e for e in entries if e.family == args.family)
    if args.flag:
        entries = tuple(e for e in entries if _FLAG_FILTERS[args.flag](e))
    if cfg.json_output:
        rows = [{"name": e.name, "family": e.family, "kind": e.kind,
                 "message_form": e.message_form, "secret": list(e.secret),
                 "flags": _flag_text(e), "counterpart": e.counterpart,
                 "notes": e.notes} for e in entries]
        print(json.dumps(rows, indent=2, sort_keys=True))
        return 0
    for e in entries:
        counterpart = e.counterpart or "-"
        print(f"{e.name:<18} {e.family:<4} {e.kind:<16} "
              f"{e.message_form or '-':<6} {_flag_text(e):<26} "
              f"-> {counterpart}")
    return 0


def cmd_run(cfg: Config, args) -> int:
    entry = lookup(args.protocol)
    params = _load_params(cfg)
    meta = _store_meta(cfg)
    if meta.get("params_ref") != params.fingerprint():
        raise KeyError_("key store was built for a different parameter set")
    allowed = {"DH": ("dh",), "SOK": ("sok", "sok_inv"),
               "SK": ("sk",)}[entry.family]
    if meta.get("setting") not in allowed:
        raise KeyError_(f"{entry.name} needs a {'/'.join(allowed)} key "
                        f"store, this one holds {meta.get('setting')!r}")
    own_a = _load_identity(cfg, params, args.a)
    own_b = _load_identity(cfg, params, args.b)
    rng = _rng(cfg)
    A = Session(params, entry, own_a, own_b, "initiator", rng)
    B = Session(params, entry, own_b, own_a, "responder",
                rng if entry.kind == "two_message" else None)
    if entry.kind == "two_message":
        B.absorb(A.own_message)
        A.absorb(B.own_message)
    elif entry.kind == "transport":
        B.absorb(A.own_message)
    key_a, key_b = A.derive_key(), B.derive_key()
    transcript = Transcript(entry.name, params.fingerprint(),
                            (args.a, args.b),
                            tuple(A.transcript_entries()))
    if args.transcript_out:
        Path(args.transcript_out).write_text(transcript.to_jsonl())
    if key_a != key_b:
        raise AgreementError(f"{entry.name}: the two sides derived "
                             "different keys")
    print(json.dumps({
        "protocol": entry.name,
        "params_ref": params.fingerprint(),
        "ids": [args.a, args.b],
        "transcript": [{"seq": i, "sender_id": s, "kind": k,
                        "bytes_hex": payload.hex()}
                       for i, (s, k, payload)
                       in enumerate(transcript.entries)],
        "key_a": key_a.hex(),
        "key_b": key_b.hex(),
    }, indent=2, sort_keys=True))
    return 0


def cmd_translate(cfg: Config, args) -> int:
    params = _load_params(cfg)
    rng = _rng(cfg)
    node = parse(args.formula, DEFAULT_CTX)
    image = apply_rules(node, args.rules,
                        translate_pure_ephemeral=args.lift_ephemeral)
    verified = verify_correspondence(node, image, ruleset=args.rules,
                                     message_form=args.message_form,
                                     params=params, rng=rng,
                                     trials=args.trials)
    out = {"input": args.formula, "ruleset": args.rules,
           "message_form": args.message_form,
           "image": render(image),
           "normalized": render(normalize(image)),
           "image_kind": kind_of(image, DEFAULT_CTX),
           "verified": verified, "trials": args.trials}
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0 if verified else 5


def cmd_analyze(cfg: Config, args) -> int:
    params = _load_params(cfg)
    rng = _rng(cfg)
    if args.protocol == "all":
        entries = catalog()
    else:
        entries = (lookup(args.protocol),)
    reports = [analysis.analyze(params, e, rng, runs=args.runs)
               for e in entries]
    print(json.dumps([r.to_dict() for r in reports], indent=2,
                     sort_keys=True))
    failures = [r.protocol for r, e in zip(reports, entries)
                if not r.matches_flags(e)]
    # cross-entry collapses need the brute-force log oracle
    if args.protocol == "all" and params.tier == "tiny":
        for check in analysis.degeneration_checks(params, rng,
                                                  trials=args.runs):
            if not check["agree"]:
                failures.append("degeneration " + " / ".join(check["pair"]))
    if failures:
        raise InvariantError("analysis invariants failed: "
                             + "; ".join(failures))
    return 0


# -- wiring ---------------------------------------------------------------------

def build_parser() -> _Parser:
    p = _Parser(prog="pairkex",
                description="Key agreement protocols, classical and "
                            "identity-based, with a rule engine that "
                            "maps one family onto the other.")
    p.add_argument("--params", metavar="FILE",
                   help="parameter file (default $PAIRKEX_PARAMS "
                        "or ./params.json)")
    p.add_argument("--store", metavar="DIR",
                   help="key store directory (default $PAIRKEX_STORE "
                        "or ./keystore)")
    p.add_argument("--json", action="store_true",
                   help="machine-readable output where the command "
                        "has a text form")
    sub = p.add_subparsers(dest="command", required=True)

    params_p = sub.add_parser("params", help="parameter files")
    params_sub = params_p.add_subparsers(dest="subcommand", required=True)
    gen = params_sub.add_parser("gen", help="generate a parameter file")
    gen.add_argument("--tier", choices=("tiny", "demo"), default="tiny")
    gen.add_argument("--seed", type=_hex_bytes, metavar="HEX")
    gen.add_argument("--out", metavar="FILE")
    gen.set_defaults(func=cmd_params_gen)

    keys_p = sub.add_parser("keys", help="key store management")
    keys_sub = keys_p.add_subparsers(dest="subcommand", required=True)
    setup = keys_sub.add_parser("setup", help="initialise a key store")
    setup.add_argument("--setting", choices=SETTINGS, required=True)
    setup.add_argument("--seed", type=_hex_bytes, metavar="HEX")
    setup.set_defaults(func=cmd_keys_setup)
    extract = keys_sub.add_parser("extract",
                                  help="issue a key for an identity")
    extract.add_argument("--id", required=True)
    extract.add_argument("--seed", type=_hex_bytes, metavar="HEX")
    extract.set_defaults(func=cmd_keys_extract)

    cat_p = sub.add_parser("catalog", help="the protocol catalog")
    cat_sub = cat_p.add_subparsers(dest="subcommand", required=True)
    lst = cat_sub.add_parser("list", help="list catalog entries")
    lst.add_argument("--family", choices=("DH", "SOK", "SK"))
    lst.add_argument("--flag", choices=sorted(_FLAG_FILTERS))
    lst.set_defaults(func=cmd_catalog_list)

    run = sub.add_parser("run", help="execute one handshake")
    run.add_argument("protocol")
    run.add_argument("--a", required=True, metavar="ID")
    run.add_argument("--b", required=True, metavar="ID")
    run.add_argument("--seed", type=_hex_bytes, metavar="HEX")
    run.add_argument("--transcript-out", metavar="FILE")
    run.set_defaults(func=cmd_run)

    tr = sub.add_parser("translate",
                        help="map a classical secret formula onto the "
                             "identity-based setting")
    tr.add_argument("formula")
    tr.add_argument("--rules", choices=("sok", "sk"), required=True)
    tr.add_argument("--message-form",
                    choices=("xP", "xQ_A", "xQ_B", "xF_AB"), default="xP")
    tr.add_argument("--trials", type=int, default=50)
    tr.add_argument("--lift-ephemeral", action="store_true",
                    help="also move purely ephemeral terms into the "
                         "pairing group")
    tr.add_argument("--seed", type=_hex_bytes, metavar="HEX")
    tr.set_defaults(func=cmd_translate)

    an = sub.add_parser("analyze", help="run the analysis matrix")
    an.add_argument("protocol", nargs="?", default="all")
    an.add_argument("--runs", type=int, default=5)
    an.add_argument("--seed", type=_hex_bytes, metavar="HEX")
    an.set_defaults(func=cmd_analyze)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = Config(
        params_path=Path(args.params or os.environ.get("PAIRKEX_PARAMS")
                         or "params.json"),
        store_dir=Path(args.store or os.environ.get("PAIRKEX_STORE")
                       or "keystore"),
        json_output=args.json,
        seed=getattr(args, "seed", None),
    )
    try:
        return args.func(cfg, args)
    except ProtocolError as exc:
        print(f"pairkex: {exc}", file=sys.stderr)
        return 1
    except (ParamError, KeyError_) as exc:
        print(f"pairkex: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, FormulaError) as exc:
        print(f"pairkex: {exc}", file=sys.stderr)
        return 3
    except AgreementError as exc:
        print(f"pairkex: {exc}", file=sys.stderr)
        return 4
    except InvariantError as exc:
        print(f"pairkex: {exc}", file=sys.stderr)
        return 5
    except OSError as exc:
        print(f"pairkex: {exc}", file=sys.stderr)
        return 6


if __name__ == "__main__":
    sys.exit(main())
