"""Produce and re-verify the four-file proof-carrying evidence bundle.

The bundle is a precomputed cache, never trusted: verification re-runs all
three methods against the live skill tree and compares canonical hashes.
Nothing in the bundle carries a timestamp, so production is deterministic
and byte-reproducible.

Tamper vs drift, per evidence slot: file bytes disagreeing with the signed
attestation hash is tamper (``hash-mismatch:<slot>``); file bytes matching
the attestation but disagreeing with the live re-run is drift.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric import ed25519

from ._version import __version__
from .bmc import BmcVerdict, faithful_runtime, instance_hash, method_c
from .canonical import canonicalize, hash_bytes
from .dispatch import TypedDispatchVerdict, method_b
from .errors import (
    EntropyUnavailable,
    LayerFailed,
    MalformedManifest,
    MissingBundleFile,
    MissingManifest,
)
from .manifest import Manifest, declared_kinds, level_rank, manifest_to_json_dict, parse_manifest
from .static_analysis import RulePack, StaticReport, default_rule_packs, method_a

EVIDENCE_DIR = "evidence"

SLOT_FILES = {
    "static": "static.json",
    "types": "types.proof",
    "smt": "smt.unsat",
    "attest": "manifest.attest.json",
}


def evidence_path(skill_dir: Path | str, slot: str) -> Path:
    return Path(skill_dir) / EVIDENCE_DIR / SLOT_FILES[slot]


def manifest_hash(manifest: Manifest) -> str:
    return hash_bytes(canonicalize(manifest_to_json_dict(manifest)))


# ---------------------------------------------------------------------------
# Keys and trust roots
# ---------------------------------------------------------------------------


def mint_ephemeral_key() -> tuple[ed25519.Ed25519PrivateKey, ed25519.Ed25519PublicKey]:
    """A fresh Ed25519 keypair; print the public key so the operator can
    register it in a trust root."""
    try:
        private = ed25519.Ed25519PrivateKey.generate()
    except Exception as exc:  # pragma: no cover - platform entropy failure
        raise EntropyUnavailable(str(exc)) from exc
    return private, private.public_key()


def private_key_pem(private: ed25519.Ed25519PrivateKey) -> bytes:
    return private.private_bytes(
        encoding=serialization.Encoding.PEM,
        format=serialization.PrivateFormat.PKCS8,
        encryption_algorithm=serialization.NoEncryption(),
    )


def load_private_key(path: Path | str) -> ed25519.Ed25519PrivateKey:
    data = Path(path).read_bytes()
    key = serialization.load_pem_private_key(data, password=None)
    if not isinstance(key, ed25519.Ed25519PrivateKey):
        raise ValueError(f"{path} is not an Ed25519 private key")
    return key


def public_key_b64(public: ed25519.Ed25519PublicKey) -> str:
    raw = public.public_bytes(
        encoding=serialization.Encoding.Raw, format=serialization.PublicFormat.Raw
    )
    return base64.b64encode(raw).decode("ascii")


@dataclass(frozen=True)
class TrustEntry:
    signer_id: str
    public_key: str  # base64 of the raw 32-byte key
    max_level: str


@dataclass(frozen=True)
class TrustRoot:
    entries: tuple[TrustEntry, ...]

    def __post_init__(self) -> None:
        ids = [e.signer_id for e in self.entries]
        if len(ids) != len(set(ids)):
            raise ValueError("trust root signer_ids must be unique")

    def lookup(self, signer_id: str) -> TrustEntry | None:
        for entry in self.entries:
            if entry.signer_id == signer_id:
                return entry
        return None


def trust_root_to_json(root: TrustRoot) -> dict[str, Any]:
    return {
        "entries": [
            {"signer_id": e.signer_id, "public_key": e.public_key, "max_level": e.max_level}
            for e in root.entries
        ]
    }


def load_trust_root(path: Path | str) -> TrustRoot:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    entries = tuple(
        TrustEntry(e["signer_id"], e["public_key"], e["max_level"])
        for e in doc["entries"]
    )
    return TrustRoot(entries)


# ---------------------------------------------------------------------------
# Attestation
# ---------------------------------------------------------------------------


def _toolchain() -> list[dict[str, str]]:
    return [
        {"name": "skillproof-static", "version": __version__},
        {"name": "skillproof-dispatch", "version": __version__},
        {"name": "skillproof-bmc", "version": __version__},
    ]


def attestation_body(
    manifest_digest: str, evidence_hashes: dict[str, str], signer_id: str
) -> dict[str, Any]:
    return {
        "evidence_hashes": dict(evidence_hashes),
        "manifest_hash": manifest_digest,
        "signer_id": signer_id,
        "toolchain": _toolchain(),
        "verification_level": "formal",
    }


def sign_attestation(body: dict[str, Any], key: ed25519.Ed25519PrivateKey) -> dict[str, Any]:
    signature = key.sign(canonicalize(body))
    doc = dict(body)
    doc["signature"] = base64.b64encode(signature).decode("ascii")
    return doc


# ---------------------------------------------------------------------------
# Production
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProducedBundle:
    evidence_dir: Path
    files: dict[str, Path]
    attestation_hash: str
    static_report: StaticReport
    dispatch_verdict: TypedDispatchVerdict
    bmc_verdict: BmcVerdict


def produce_formal_bundle(
    skill_dir: Path | str,
    manifest: Manifest,
    key: ed25519.Ed25519PrivateKey,
    signer_id: str,
    k_max: int = 8,
    packs: Iterable[RulePack] | None = None,
    out_dir: Path | str | None = None,
) -> ProducedBundle:
    """Run all three methods and, only if every layer passes, write the
    four canonical evidence files. Same inputs and key produce byte-identical
    bundles."""
    packs = tuple(packs) if packs is not None else default_rule_packs()

    static_report = method_a(skill_dir, manifest, packs)
    if not static_report.verdict.contained:
        raise LayerFailed("methodA", static_report.verdict)
    dispatch_verdict = method_b(manifest)
    if not dispatch_verdict.passed:
        raise LayerFailed("methodB", dispatch_verdict)
    bmc_verdict = method_c(faithful_runtime(declared_kinds(manifest)), declared_kinds(manifest), k_max)
    if bmc_verdict.result != "unsat":
        raise LayerFailed("methodC", bmc_verdict)

    static_bytes = canonicalize(static_report.to_json_dict())
    types_bytes = canonicalize(dispatch_verdict.to_json_dict())
    smt_bytes = canonicalize(bmc_verdict.to_json_dict())
    evidence_hashes = {
        "static": hash_bytes(static_bytes),
        "types": hash_bytes(types_bytes),
        "smt": hash_bytes(smt_bytes),
    }
    body = attestation_body(manifest_hash(manifest), evidence_hashes, signer_id)
    attest_bytes = canonicalize(sign_attestation(body, key))

    target = Path(out_dir) if out_dir is not None else Path(skill_dir)
    evidence = target / EVIDENCE_DIR
    evidence.mkdir(parents=True, exist_ok=True)
    contents = {
        "static": static_bytes,
        "types": types_bytes,
        "smt": smt_bytes,
        "attest": attest_bytes,
    }
    files: dict[str, Path] = {}
    for slot, data in contents.items():
        path = evidence / SLOT_FILES[slot]
        path.write_bytes(data)
        files[slot] = path
    return ProducedBundle(
        evidence_dir=evidence,
        files=files,
        attestation_hash=hash_bytes(attest_bytes),
        static_report=static_report,
        dispatch_verdict=dispatch_verdict,
        bmc_verdict=bmc_verdict,
    )


# ---------------------------------------------------------------------------
# Verification (the bootstrap re-check)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerifyOutcome:
    accepted_level: str
    reasons: tuple[str, ...]

    def to_json_dict(self) -> dict[str, Any]:
        return {"accepted_level": self.accepted_level, "reasons": list(self.reasons)}


def _verify_signature(doc: dict[str, Any], trust_root: TrustRoot, reasons: list[str]) -> None:
    level = doc.get("verification_level")
    signer_id = doc.get("signer_id")
    if level != "formal" or not isinstance(signer_id, str):
        reasons.append("signer-not-authorised")
        return
    entry = trust_root.lookup(signer_id)
    if entry is None or level_rank(entry.max_level) < level_rank("formal"):
        reasons.append("signer-not-authorised")
        return
    try:
        public = ed25519.Ed25519PublicKey.from_public_bytes(
            base64.b64decode(entry.public_key, validate=True)
        )
        body = {k: v for k, v in doc.items() if k != "signature"}
        signature = base64.b64decode(doc["signature"], validate=True)
        public.verify(signature, canonicalize(body))
    except (InvalidSignature, KeyError, TypeError, ValueError) as exc:
        _ = exc
        reasons.append("sig-invalid")


def verify_formal_bundle(
    skill_dir: Path | str,
    trust_root: TrustRoot,
    packs: Iterable[RulePack] | None = None,
) -> VerifyOutcome:
    """The five-step bootstrap re-check. Every step runs (no short-circuit)
    and all applicable reasons accumulate; the accepted level is formal only
    when every step reproduces, otherwise declared."""
    skill_dir = Path(skill_dir)
    packs = tuple(packs) if packs is not None else default_rule_packs()
    raw: dict[str, bytes] = {}
    for slot in SLOT_FILES:
        path = evidence_path(skill_dir, slot)
        if not path.is_file():
            raise MissingBundleFile(slot)
        raw[slot] = path.read_bytes()

    reasons: list[str] = []

    # Step 1+2: attestation signature and signer authorization.
    attest_doc: dict[str, Any] | None = None
    try:
        parsed = json.loads(raw["attest"].decode("utf-8"))
        if not isinstance(parsed, dict) or "signature" not in parsed:
            raise ValueError("attestation shape")
        attest_doc = parsed
    except (ValueError, UnicodeDecodeError):
        reasons.append("sig-invalid")
    if attest_doc is not None:
        _verify_signature(attest_doc, trust_root, reasons)

    # Step 1 continued: the live manifest must be the attested one.
    manifest: Manifest | None = None
    try:
        manifest = parse_manifest(skill_dir)
    except (MissingManifest, MalformedManifest):
        reasons.append("hash-mismatch:manifest")
    if manifest is not None and attest_doc is not None:
        if attest_doc.get("manifest_hash") != manifest_hash(manifest):
            reasons.append("hash-mismatch:manifest")

    attested_hashes = (attest_doc or {}).get("evidence_hashes")
    if not isinstance(attested_hashes, dict):
        attested_hashes = None

    # Step 3: static evidence. Tamper beats drift per slot.
    if attested_hashes is not None:
        if hash_bytes(raw["static"]) != attested_hashes.get("static"):
            reasons.append("hash-mismatch:static")
        elif manifest is not None:
            live = canonicalize(method_a(skill_dir, manifest, packs).to_json_dict())
            if live != raw["static"]:
                reasons.append("method-A-cache-miss")

    # Step 4: dispatch evidence.
    if attested_hashes is not None:
        if hash_bytes(raw["types"]) != attested_hashes.get("types"):
            reasons.append("hash-mismatch:types")
        elif manifest is not None:
            verdict = method_b(manifest)
            if not verdict.passed or canonicalize(verdict.to_json_dict()) != raw["types"]:
                reasons.append("method-B-fail")

    # Step 5: trace-bound evidence, re-run at the recorded k_max.
    if attested_hashes is not None:
        if hash_bytes(raw["smt"]) != attested_hashes.get("smt"):
            reasons.append("hash-mismatch:smt")
        elif manifest is not None:
            try:
                smt_doc = json.loads(raw["smt"].decode("utf-8"))
                k_recorded = smt_doc["k_max"]
                recorded_instance = smt_doc["instance_hash"]
                if not isinstance(k_recorded, int) or k_recorded < 1:
                    raise ValueError("k_max shape")
            except (ValueError, KeyError, TypeError, UnicodeDecodeError):
                reasons.append("method-C-fail")
            else:
                kinds = declared_kinds(manifest)
                if instance_hash(kinds, k_recorded) != recorded_instance:
                    reasons.append("bound-mismatch")
                try:
                    live_verdict = method_c(faithful_runtime(kinds), kinds, k_recorded)
                except Exception:
                    reasons.append("method-C-fail")
                else:
                    if (
                        live_verdict.result != "unsat"
                        or canonicalize(live_verdict.to_json_dict()) != raw["smt"]
                    ):
                        reasons.append("method-C-fail")

    deduped = tuple(dict.fromkeys(reasons))
    return VerifyOutcome(
        accepted_level="formal" if not deduped else "declared",
        reasons=deduped,
    )
