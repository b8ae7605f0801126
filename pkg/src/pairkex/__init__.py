"""Two-party key agreement, classical and identity-based, plus the
rule engine that maps one family onto the other."""

from .backend import (GT_ONE, PairingParams, param_gen, params_from_json,
                      params_to_json)
from .catalog import (DEGENERATION_PAIRS, RULE_CHECKED_PAIRS, CatalogEntry,
                      Flags, catalog, lookup, secure_catalog)
from .errors import (AgreementError, DecodeError, FormulaError,
                     FormulaParseError, FormulaTypeError, InvariantError,
                     KeyError_, PairkexError, ParamError, ProtocolError,
                     UntranslatableError, ValidationError)
from .formula import DEFAULT_CTX, evaluate, kind_of, parse, render, substitute
from .keys import (SETTINGS, DhIdentity, SkIdentity, SkMaster, SokIdentity,
                   SokMaster, StaticSharedSecret, dh_keygen, key_from_json,
                   key_to_json, sk_extract, sk_setup, sok_extract, sok_setup,
                   static_secret)
from .rewrite import (apply_rules, normalize, semantic_equiv,
                      structural_equiv, to_canonical, verify_correspondence)
from .session import Session, Transcript, session_key

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "GT_ONE", "PairingParams", "param_gen", "params_from_json",
    "params_to_json",
    "CatalogEntry", "Flags", "catalog", "secure_catalog", "lookup",
    "RULE_CHECKED_PAIRS", "DEGENERATION_PAIRS",
    "PairkexError", "ParamError", "KeyError_", "ValidationError",
    "DecodeError", "FormulaError", "FormulaParseError", "FormulaTypeError",
    "UntranslatableError", "ProtocolError", "AgreementError",
    "InvariantError",
    "DEFAULT_CTX", "parse", "render", "evaluate", "kind_of", "substitute",
    "SETTINGS", "DhIdentity", "SokMaster", "SokIdentity", "SkMaster",
    "SkIdentity", "StaticSharedSecret", "dh_keygen", "sok_setup",
    "sok_extract", "sk_setup", "sk_extract", "static_secret",
    "key_to_json", "key_from_json",
    "to_canonical", "normalize", "structural_equiv", "apply_rules",
    "semantic_equiv", "verify_correspondence",
    "Session", "Transcript", "session_key",
]
