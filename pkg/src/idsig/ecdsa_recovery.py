"""ECDSA over secp256k1 with verification-key recovery.

Signatures are (s, R_x, v): the scalar s, the x-coordinate of the nonce
point, and a parity flag picking which of the two points with that x was
the nonce point. Verification recovers the public key and compares its
address, so no verification key travels with the signature.

Nonces are derived deterministically from (secret, message hash, counter)
by default, so identical inputs give identical signature bytes and nonce
reuse across distinct messages is impossible. Pass ``rng`` to get random
nonces instead (useful for statistical tests only).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

from . import curve
from .curve import (
    G,
    Point,
    Q,
    bytes_to_int,
    decompress,
    flag_to_recovery_byte,
    int_to_bytes32,
    point_add,
    recovery_byte_to_flag,
    scalar_inverse,
    scalar_mul,
    y_parity,
)
from .errors import InvalidSignature, RetryExhausted, WeakSeed
from .hashing import address_of, digest_to_scalar, hash_to_scalar, keccak256

_LOW_S_MAX = Q // 2  # valid s is in [1, Q // 2]
_NONCE_RETRY_LIMIT = 64


@dataclass(frozen=True)
class SigningKey:
    """Secret scalar with its public point and derived address."""

    d: int
    public_key: Point
    address: bytes


@dataclass(frozen=True)
class RecoverableSignature:
    s: int
    r_x: int
    v: int  # parity bit, 0 or 1; externally encoded as 27/28

    def to_bytes(self) -> bytes:
        """65-byte wire form: s(32) || r_x(32) || v(1, as 27/28)."""
        return (
            int_to_bytes32(self.s)
            + int_to_bytes32(self.r_x)
            + bytes([flag_to_recovery_byte(self.v)])
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "RecoverableSignature":
        if len(data) != 65:
            raise InvalidSignature("signature wire form must be 65 bytes")
        try:
            v = recovery_byte_to_flag(data[64])
        except ValueError as exc:
            raise InvalidSignature(str(exc)) from exc
        return cls(s=bytes_to_int(data[:32]), r_x=bytes_to_int(data[32:64]), v=v)

    def to_json(self) -> str:
        return json.dumps(
            {
                "s": "0x" + int_to_bytes32(self.s).hex(),
                "rx": "0x" + int_to_bytes32(self.r_x).hex(),
                "v": hex(flag_to_recovery_byte(self.v)),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "RecoverableSignature":
        obj = json.loads(text)
        return cls(
            s=int(obj["s"], 16),
            r_x=int(obj["rx"], 16),
            v=recovery_byte_to_flag(int(obj["v"], 16)),
        )


def keygen(seed: bytes) -> SigningKey:
    """Derive a signing key from 32+ bytes of caller-supplied entropy."""
    if len(seed) < 32:
        raise WeakSeed("seed must be at least 32 bytes")
    if not any(seed):
        raise WeakSeed("seed is all zero")
    material = seed
    d = hash_to_scalar(material)
    while d == 0:  # pragma: no cover - probability ~2**-256
        material = keccak256(material)
        d = hash_to_scalar(material)
    return _key_from_scalar(d)


def _key_from_scalar(d: int) -> SigningKey:
    public_key = scalar_mul(d, G)
    return SigningKey(d=d, public_key=public_key, address=address_of(public_key))


def _derive_nonce(d: int, h: int, counter: int) -> int:
    material = int_to_bytes32(d) + int_to_bytes32(h) + counter.to_bytes(4, "big")
    return hash_to_scalar(material)


def _sign_scalar(
    d: int, h: int, rng: Optional[Callable[[int], bytes]] = None
) -> RecoverableSignature:
    for counter in range(_NONCE_RETRY_LIMIT):
        if rng is None:
            r = _derive_nonce(d, h, counter)
        else:
            r = bytes_to_int(rng(32)) % Q
        if r == 0:
            continue
        R = scalar_mul(r, G)
        r_x = R.x
        # r_x must be a usable nonzero scalar or recovery cannot undo it
        if r_x == 0 or r_x >= Q:
            continue
        s = (h + d * r_x) * scalar_inverse(r) % Q
        if s == 0:
            continue
        v = y_parity(R)
        if s > _LOW_S_MAX:
            # -s with the opposite flag recovers the same key; keep the
            # low form so every emitted signature is canonical
            s = Q - s
            v ^= 1
        return RecoverableSignature(s=s, r_x=r_x, v=v)
    raise RetryExhausted(f"no usable nonce in {_NONCE_RETRY_LIMIT} attempts")


def sign(
    key: SigningKey, message: bytes, rng: Optional[Callable[[int], bytes]] = None
) -> RecoverableSignature:
    """Sign raw message bytes (hashed internally)."""
    return _sign_scalar(key.d, hash_to_scalar(message), rng)


def sign_prehashed(
    key: SigningKey, digest: bytes, rng: Optional[Callable[[int], bytes]] = None
) -> RecoverableSignature:
    """Sign a 32-byte digest the caller already computed."""
    return _sign_scalar(key.d, digest_to_scalar(digest), rng)


def _recover_scalar(sig: RecoverableSignature, h: int) -> Point:
    if not 1 <= sig.r_x < Q:
        raise InvalidSignature("r_x outside [1, Q)")
    if not 1 <= sig.s < Q:
        raise InvalidSignature("s outside [1, Q)")
    if sig.v not in (0, 1):
        raise InvalidSignature("v is not a parity bit")
    R = decompress(sig.r_x, sig.v)  # NonResidue propagates
    rx_inv = scalar_inverse(sig.r_x)
    u1 = (-h * rx_inv) % Q
    u2 = sig.s * rx_inv % Q
    # (s*R - h*G) / R_x, evaluated as one sum of two multiplications
    public_key = point_add(scalar_mul(u1, G), scalar_mul(u2, R))
    if public_key.infinity:
        raise InvalidSignature("recovery produced the point at infinity")
    return public_key


def recover(sig: RecoverableSignature, message: bytes) -> Point:
    """Reconstruct the signer's public key from signature and message.

    Deliberately does not apply the low-s rule; that lives in verify so
    the malleable twin of a signature can still be recovered and studied.
    """
    return _recover_scalar(sig, hash_to_scalar(message))


def recover_prehashed(sig: RecoverableSignature, digest: bytes) -> Point:
    return _recover_scalar(sig, digest_to_scalar(digest))


def is_low_s(sig: RecoverableSignature) -> bool:
    return 1 <= sig.s <= _LOW_S_MAX


def recover_verified(
    addr: bytes, sig: RecoverableSignature, message: bytes
) -> Optional[Point]:
    """Full verification returning the recovered key, or None on failure.

    Exists because some callers (certificate checks) need the key after a
    successful verification; ``verify`` is the boolean view of this.
    """
    if not is_low_s(sig):
        return None
    try:
        public_key = recover(sig, message)
    except Exception:
        return None
    if address_of(public_key) != addr:
        return None
    return public_key


def verify(addr: bytes, sig: RecoverableSignature, message: bytes) -> bool:
    """True iff sig is well-formed (incl. low-s) and recovers to addr."""
    return recover_verified(addr, sig, message) is not None


def verify_prehashed(addr: bytes, sig: RecoverableSignature, digest: bytes) -> bool:
    if not is_low_s(sig):
        return False
    try:
        public_key = recover_prehashed(sig, digest)
    except Exception:
        return False
    return address_of(public_key) == addr


def malleable_twin(sig: RecoverableSignature) -> RecoverableSignature:
    """The (Q - s, R_x, flipped v) counterpart signature.

    Recovers the same key when the low-s rule is bypassed; rejected by
    verify because exactly one of the pair is in low form.
    """
    return RecoverableSignature(s=Q - sig.s, r_x=sig.r_x, v=sig.v ^ 1)
