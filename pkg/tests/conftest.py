"""Shared fixtures: the fetch-to-cache demo skill and trust-root helpers."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from skillproof.bundle import TrustEntry, TrustRoot, public_key_b64

WORKED_MANIFEST = {
    "id": "summarise-fetched-html",
    "label": {"rank": "public", "compartments": [], "releasability": []},
    "caps": ["net.egress(*.example.com)", "fs.read(./.cache/)"],
    "verification": "tested",
    "version": 7,
    "signer": "operator-root-2026",
}

WORKED_SCRIPT = '''"""Fetch a page from the example.com zone, cache it, and summarise it."""

import requests


def fetch_to_cache(subdomain: str, name: str) -> str:
    response = requests.get(f"https://{subdomain}.example.com/{name}.html", timeout=30)
    with open(f"./.cache/{name}.html", "w") as fh:
        fh.write(response.text)
    with open(f"./.cache/{name}.html", "r") as fh:
        return fh.read()


def summarise(subdomain: str, name: str) -> str:
    return fetch_to_cache(subdomain, name)[:400]
'''

EXTENDED_CAP = "fs.write.rev(./.cache/)"


def write_worked_skill(directory: Path, fixed: bool = False) -> Path:
    """The demo skill: the two-capability manifest plus one Python script
    that fetches into the cache and reads back from it. ``fixed=True``
    declares the cache write the static layer surfaces."""
    directory.mkdir(parents=True, exist_ok=True)
    manifest = json.loads(json.dumps(WORKED_MANIFEST))
    if fixed:
        manifest["caps"].append(EXTENDED_CAP)
    (directory / "skill.json").write_text(json.dumps(manifest, indent=2))
    (directory / "summarise.py").write_text(WORKED_SCRIPT)
    return directory


@pytest.fixture
def worked_skill(tmp_path: Path) -> Path:
    return write_worked_skill(tmp_path / "skill", fixed=False)


@pytest.fixture
def fixed_skill(tmp_path: Path) -> Path:
    return write_worked_skill(tmp_path / "skill", fixed=True)


def trust_root_for(signer_id: str, public_key, max_level: str = "formal") -> TrustRoot:
    return TrustRoot((TrustEntry(signer_id, public_key_b64(public_key), max_level),))


def write_trust_root(path: Path, root: TrustRoot) -> Path:
    from skillproof.bundle import trust_root_to_json

    path.write_text(json.dumps(trust_root_to_json(root)))
    return path
