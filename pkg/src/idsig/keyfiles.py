"""On-disk key files: versioned JSON, owner-only permissions.

Three kinds share the envelope: "ecdsa" and "master" hold a bare signing
key; "ibs" adds the identity, certificate and issuing address. Loading
re-derives the public data from the secret and refuses mismatches, so a
corrupted or hand-edited file cannot silently sign under the wrong
address.
"""

from __future__ import annotations

import json
import os
import stat
from pathlib import Path
from typing import Optional, Union

from .curve import G, int_to_bytes32, scalar_mul
from .ecdsa_recovery import RecoverableSignature, SigningKey
from .errors import KeyFileError
from .hashing import address_of, address_to_hex, parse_address
from .ibs import Certificate, IbsSigningKey, Identity

KEYFILE_VERSION = 1
KINDS = ("ecdsa", "master", "ibs")

PathLike = Union[str, Path]


def _write_private(path: Path, payload: dict) -> None:
    data = json.dumps(payload, indent=2) + "\n"
    try:
        fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o600)
    except FileExistsError as exc:
        raise KeyFileError(f"refusing to overwrite existing key file {path}") from exc
    except OSError as exc:
        raise KeyFileError(f"cannot create key file {path}: {exc}") from exc
    with os.fdopen(fd, "w") as handle:
        handle.write(data)


def _check_private(path: Path) -> None:
    mode = stat.S_IMODE(os.stat(path).st_mode)
    if mode & 0o077:
        raise KeyFileError(
            f"{path} is readable by group/other (mode {mode:o}); refusing"
        )


def save_signing_key(path: PathLike, key: SigningKey, kind: str = "ecdsa") -> None:
    if kind not in ("ecdsa", "master"):
        raise KeyFileError(f"kind {kind!r} does not hold a bare signing key")
    _write_private(
        Path(path),
        {
            "version": KEYFILE_VERSION,
            "kind": kind,
            "secret": "0x" + int_to_bytes32(key.d).hex(),
            "public_key": "0x"
            + int_to_bytes32(key.public_key.x).hex()
            + int_to_bytes32(key.public_key.y).hex(),
            "address": address_to_hex(key.address),
        },
    )


def save_ibs_key(
    path: PathLike, key: IbsSigningKey, kgc_address: Optional[bytes] = None
) -> None:
    payload = {
        "version": KEYFILE_VERSION,
        "kind": "ibs",
        "secret": "0x" + int_to_bytes32(key.d).hex(),
        "public_key": "0x"
        + int_to_bytes32(key.public_key.x).hex()
        + int_to_bytes32(key.public_key.y).hex(),
        "address": address_to_hex(key.address),
        "id": key.identity.hex,
        "cert": "0x" + key.cert.to_bytes().hex(),
    }
    if kgc_address is not None:
        payload["kgc_address"] = address_to_hex(kgc_address)
    _write_private(Path(path), payload)


def _load_envelope(path: Path) -> dict:
    if not path.exists():
        raise KeyFileError(f"no key file at {path}")
    _check_private(path)
    try:
        obj = json.loads(path.read_text())
    except (OSError, ValueError) as exc:
        raise KeyFileError(f"cannot parse key file {path}: {exc}") from exc
    if obj.get("version") != KEYFILE_VERSION:
        raise KeyFileError(f"unrecognized key file version {obj.get('version')!r}")
    if obj.get("kind") not in KINDS:
        raise KeyFileError(f"unrecognized key file kind {obj.get('kind')!r}")
    return obj


def _signing_key_from(obj: dict, path: Path) -> SigningKey:
    try:
        d = int(obj["secret"], 16)
        address = parse_address(obj["address"])
    except (KeyError, ValueError) as exc:
        raise KeyFileError(f"{path} is missing or mangles key material") from exc
    public_key = scalar_mul(d, G)
    if address_of(public_key) != address:
        raise KeyFileError(f"{path}: address does not match the secret key")
    return SigningKey(d=d, public_key=public_key, address=address)


def load_key_file(
    path: PathLike, expect_kind: Optional[str] = None
) -> tuple[str, Union[SigningKey, IbsSigningKey], dict]:
    """Load any key file; returns (kind, key object, raw envelope)."""
    path = Path(path)
    obj = _load_envelope(path)
    kind = obj["kind"]
    if expect_kind is not None and kind != expect_kind:
        raise KeyFileError(f"{path} holds a {kind!r} key, expected {expect_kind!r}")
    signing_key = _signing_key_from(obj, path)
    if kind in ("ecdsa", "master"):
        return kind, signing_key, obj
    try:
        identity = Identity.from_hex(obj["id"])
        cert = Certificate.from_bytes(bytes.fromhex(obj["cert"][2:]))
    except (KeyError, ValueError) as exc:
        raise KeyFileError(f"{path} is missing identity or certificate") from exc
    key = IbsSigningKey(cert=cert, signing_key=signing_key, identity=identity)
    return kind, key, obj


def load_signing_key(path: PathLike, expect_kind: str = "ecdsa") -> SigningKey:
    _, key, _ = load_key_file(path, expect_kind=expect_kind)
    return key


def load_ibs_key(path: PathLike) -> tuple[IbsSigningKey, Optional[bytes]]:
    _, key, obj = load_key_file(path, expect_kind="ibs")
    kgc_address = (
        parse_address(obj["kgc_address"]) if "kgc_address" in obj else None
    )
    return key, kgc_address
