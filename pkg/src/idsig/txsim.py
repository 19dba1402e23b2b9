"""Minimal transaction flow: RLP-encoded payloads signed with identity-bound
signatures, verified with a verify-the-certificate-once cache.

The transaction model is deliberately tiny (nonce, to, value, data); replay
protection and fee fields belong to a real chain, not to this simulation.
"""

from __future__ import annotations

import json
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional

from . import rlp
from .ecdsa_recovery import recover_verified
from .errors import IdsigError
from .hashing import address_to_hex, parse_address
from .ibs import IbsSignature, IbsSigningKey, Identity, ibs_sign, verify_certificate


@dataclass(frozen=True)
class Transaction:
    nonce: int
    to: bytes
    value: int
    data: bytes = b""

    def __post_init__(self) -> None:
        if self.nonce < 0:
            raise ValueError("nonce must be non-negative")
        if self.value < 0:
            raise ValueError("value must be non-negative")
        if len(self.to) != 20:
            raise ValueError("to must be a 20-byte address")

    def to_json_obj(self) -> dict:
        return {
            "nonce": self.nonce,
            "to": address_to_hex(self.to),
            "value": self.value,
            "data": "0x" + self.data.hex(),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Transaction":
        return cls(
            nonce=int(obj["nonce"]),
            to=parse_address(obj["to"]),
            value=int(obj["value"]),
            data=bytes.fromhex(obj.get("data", "0x")[2:]),
        )


def encode_tx(tx: Transaction) -> bytes:
    """Canonical RLP of [nonce, to, value, data]."""
    return rlp.encode([tx.nonce, tx.to, tx.value, tx.data])


class CertCache:
    """Remembers which (address, identity) bindings passed a certificate
    check, keyed on the pair and storing the witnessing certificate bytes.

    A later transaction presenting the exact certificate already verified
    for its (address, identity) skips the second recovery; any other
    certificate is re-verified in full, so acceptance never depends on
    cache state. Eviction is LRU and only ever costs a re-verification.
    """

    def __init__(self, capacity: int = 4096):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._entries: OrderedDict[tuple[bytes, bytes], bytes] = OrderedDict()
        self._lock = threading.RLock()

    def __len__(self) -> int:
        return len(self._entries)

    def lookup(self, address: bytes, identity: Identity) -> Optional[bytes]:
        with self._lock:
            key = (address, identity.data)
            cert_bytes = self._entries.get(key)
            if cert_bytes is not None:
                self._entries.move_to_end(key)
            return cert_bytes

    def remember(self, address: bytes, identity: Identity, cert_bytes: bytes) -> None:
        with self._lock:
            key = (address, identity.data)
            self._entries[key] = cert_bytes
            self._entries.move_to_end(key)
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)

    def pairs(self) -> set[tuple[bytes, bytes]]:
        with self._lock:
            return set(self._entries)


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    cert_checked: bool


@dataclass(frozen=True)
class OpCount:
    recoveries: int
    hashes: int


def sign_tx(key: IbsSigningKey, tx: Transaction) -> IbsSignature:
    return ibs_sign(key, encode_tx(tx))


def verify_tx(
    kgc_address: bytes,
    identity: Identity,
    sig: IbsSignature,
    tx: Transaction,
    cache: CertCache,
) -> Verdict:
    """Identity-bound verification with certificate-once amortization.

    The message-signature check always runs. The certificate check runs
    only when this exact certificate has not already been verified for
    (signer address, identity); the verdict always equals what a full
    verification would return.
    """
    payload = encode_tx(tx)
    public_key = recover_verified(sig.address, sig.sigma, payload)
    if public_key is None:
        return Verdict(accepted=False, cert_checked=False)

    cert_bytes = sig.cert.to_bytes()
    if cache.lookup(sig.address, identity) == cert_bytes:
        return Verdict(accepted=True, cert_checked=False)

    if verify_certificate(kgc_address, identity, public_key, sig.cert):
        cache.remember(sig.address, identity, cert_bytes)
        return Verdict(accepted=True, cert_checked=True)
    return Verdict(accepted=False, cert_checked=True)


def count_ops(cache_state: str) -> OpCount:
    """Analytic cost of one verification: recoveries and hash evaluations.

    A cache miss runs both recovery procedures (message signature and
    certificate); a hit runs only the message one. Each recovery costs two
    hashes: the payload hash and the address hash of the recovered key.
    """
    if cache_state == "miss":
        return OpCount(recoveries=2, hashes=4)
    if cache_state == "hit":
        return OpCount(recoveries=1, hashes=2)
    raise ValueError("cache_state must be 'hit' or 'miss'")


# ---------------------------------------------------------------------------
# Signed-transaction file format: {"tx": {...}, "id": hex, "signature": hex150}


def signed_tx_to_json(tx: Transaction, identity: Identity, sig: IbsSignature) -> str:
    return json.dumps(
        {
            "tx": tx.to_json_obj(),
            "id": identity.hex,
            "signature": "0x" + sig.to_bytes().hex(),
        },
        indent=2,
    )


def signed_tx_from_json(text: str) -> tuple[Transaction, Identity, IbsSignature]:
    try:
        obj = json.loads(text)
        tx = Transaction.from_json_obj(obj["tx"])
        identity = Identity.from_hex(obj["id"])
        sig = IbsSignature.from_bytes(bytes.fromhex(obj["signature"][2:]))
    except (KeyError, ValueError, TypeError) as exc:
        raise IdsigError(f"malformed signed-transaction file: {exc}") from exc
    return tx, identity, sig
