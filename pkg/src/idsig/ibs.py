"""Certificate-based identity-bound signatures.

A key-issuing authority (the KGC) holds an ordinary recoverable-ECDSA
master key. To bind an identity string to a fresh user key, it signs
``user_public_key || identity``; that signature is the certificate. An
identity-bound signature is then (message signature, signer address,
certificate), and verifying it means recovering the signer key from the
message signature and checking the certificate under the KGC's address.

The construction is written against a small abstract scheme interface,
with the recoverable-ECDSA instantiation as the only one shipped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from . import ecdsa_recovery as ec
from .curve import Point, decompress, int_to_bytes32, point_from_bytes, point_to_bytes
from .errors import IdentityLength, NonResidue
from .hashing import address_of, address_to_hex, parse_address
from .ecdsa_recovery import RecoverableSignature, SigningKey

IDENTITY_LEN = 16  # bytes; 128 bits covers ~13 ASCII characters plus padding

Certificate = RecoverableSignature


@dataclass(frozen=True)
class Identity:
    """Exactly 16 bytes. Text identities are right-padded with zero bytes."""

    data: bytes

    def __post_init__(self) -> None:
        if len(self.data) != IDENTITY_LEN:
            raise IdentityLength(
                f"identity must be exactly {IDENTITY_LEN} bytes, got {len(self.data)}"
            )

    @classmethod
    def from_text(cls, text: str) -> "Identity":
        raw = text.encode("utf-8")
        if len(raw) > IDENTITY_LEN:
            raise IdentityLength(f"identity text longer than {IDENTITY_LEN} bytes")
        return cls(raw.ljust(IDENTITY_LEN, b"\x00"))

    @classmethod
    def from_hex(cls, text: str) -> "Identity":
        cleaned = text[2:] if text.lower().startswith("0x") else text
        return cls(bytes.fromhex(cleaned))

    @property
    def hex(self) -> str:
        return "0x" + self.data.hex()

    @property
    def text(self) -> str:
        return self.data.rstrip(b"\x00").decode("utf-8", errors="replace")


def cert_message(public_key: Point, identity: Identity) -> bytes:
    """The 80-byte payload a certificate signs: P(64 bytes x||y) || id(16)."""
    return point_to_bytes(public_key) + identity.data


@dataclass(frozen=True)
class MasterKeypair:
    msk: SigningKey

    @property
    def mpk(self) -> Point:
        return self.msk.public_key

    @property
    def address(self) -> bytes:
        return self.msk.address


@dataclass(frozen=True)
class IbsSigningKey:
    cert: Certificate
    signing_key: SigningKey
    identity: Identity

    @property
    def d(self) -> int:
        return self.signing_key.d

    @property
    def public_key(self) -> Point:
        return self.signing_key.public_key

    @property
    def address(self) -> bytes:
        return self.signing_key.address

    def to_bytes(self) -> bytes:
        """cert(65) || P(64) || d(32) || id(16), 177 bytes total."""
        return (
            self.cert.to_bytes()
            + point_to_bytes(self.public_key)
            + int_to_bytes32(self.d)
            + self.identity.data
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "IbsSigningKey":
        if len(data) != 177:
            raise ValueError("serialized signing key must be 177 bytes")
        cert = Certificate.from_bytes(data[:65])
        public_key = point_from_bytes(data[65:129])
        d = int.from_bytes(data[129:161], "big")
        identity = Identity(data[161:177])
        key = SigningKey(d=d, public_key=public_key, address=address_of(public_key))
        return cls(cert=cert, signing_key=key, identity=identity)


@dataclass(frozen=True)
class IbsSignature:
    sigma: RecoverableSignature
    address: bytes
    cert: Certificate

    def to_bytes(self) -> bytes:
        """sigma(65) || addr(20) || cert(65), 150 bytes total."""
        return self.sigma.to_bytes() + self.address + self.cert.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "IbsSignature":
        if len(data) != 150:
            raise ValueError("serialized signature must be 150 bytes")
        return cls(
            sigma=RecoverableSignature.from_bytes(data[:65]),
            address=data[65:85],
            cert=Certificate.from_bytes(data[85:150]),
        )

    def to_json(self, identity: Identity) -> str:
        return json.dumps(
            {
                "sigma": "0x" + self.sigma.to_bytes().hex(),
                "addr": address_to_hex(self.address),
                "cert": "0x" + self.cert.to_bytes().hex(),
                "id": identity.hex,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> tuple["IbsSignature", Identity]:
        obj = json.loads(text)
        sig = cls(
            sigma=RecoverableSignature.from_bytes(bytes.fromhex(obj["sigma"][2:])),
            address=parse_address(obj["addr"]),
            cert=Certificate.from_bytes(bytes.fromhex(obj["cert"][2:])),
        )
        return sig, Identity.from_hex(obj["id"])


# ---------------------------------------------------------------------------
# Base-scheme interface. The construction only ever calls these six
# methods, so swapping in another recoverable scheme means implementing
# this class, nothing more.


class RecoverySignatureScheme:
    def keygen(self, seed: bytes) -> SigningKey:
        raise NotImplementedError

    def sign(self, key: SigningKey, message: bytes) -> RecoverableSignature:
        raise NotImplementedError

    def verify(self, identifier: bytes, sig: RecoverableSignature, message: bytes) -> bool:
        raise NotImplementedError

    def recover_identified(
        self, identifier: bytes, sig: RecoverableSignature, message: bytes
    ) -> Optional[Point]:
        """Verify and hand back the recovered key, or None."""
        raise NotImplementedError

    def public_bytes(self, public_key: Point) -> bytes:
        raise NotImplementedError

    def identifier_of(self, public_key: Point) -> bytes:
        raise NotImplementedError


class EcdsaRecoveryScheme(RecoverySignatureScheme):
    def keygen(self, seed: bytes) -> SigningKey:
        return ec.keygen(seed)

    def sign(self, key: SigningKey, message: bytes) -> RecoverableSignature:
        return ec.sign(key, message)

    def verify(self, identifier: bytes, sig: RecoverableSignature, message: bytes) -> bool:
        return ec.verify(identifier, sig, message)

    def recover_identified(
        self, identifier: bytes, sig: RecoverableSignature, message: bytes
    ) -> Optional[Point]:
        return ec.recover_verified(identifier, sig, message)

    def public_bytes(self, public_key: Point) -> bytes:
        return point_to_bytes(public_key)

    def identifier_of(self, public_key: Point) -> bytes:
        return address_of(public_key)


DEFAULT_SCHEME = EcdsaRecoveryScheme()


# ---------------------------------------------------------------------------
# The construction itself.


def ibs_setup(seed: bytes, scheme: RecoverySignatureScheme = DEFAULT_SCHEME) -> MasterKeypair:
    return MasterKeypair(msk=scheme.keygen(seed))


def ibs_keyder(
    master: MasterKeypair,
    identity: Identity,
    user_seed: bytes,
    scheme: RecoverySignatureScheme = DEFAULT_SCHEME,
) -> IbsSigningKey:
    """Issue a fresh user key plus certificate over P || identity."""
    user_key = scheme.keygen(user_seed)
    payload = scheme.public_bytes(user_key.public_key) + identity.data
    cert = scheme.sign(master.msk, payload)
    return IbsSigningKey(cert=cert, signing_key=user_key, identity=identity)


def ibs_sign(
    key: IbsSigningKey,
    message: bytes,
    scheme: RecoverySignatureScheme = DEFAULT_SCHEME,
) -> IbsSignature:
    sigma = scheme.sign(key.signing_key, message)
    return IbsSignature(
        sigma=sigma,
        address=scheme.identifier_of(key.public_key),
        cert=key.cert,
    )


def verify_certificate(
    kgc_address: bytes,
    identity: Identity,
    public_key: Point,
    cert: Certificate,
    scheme: RecoverySignatureScheme = DEFAULT_SCHEME,
) -> bool:
    """Certificate check on its own: message-free, reusable across messages."""
    payload = scheme.public_bytes(public_key) + identity.data
    return scheme.verify(kgc_address, cert, payload)


def ibs_verify(
    kgc_address: bytes,
    identity: Identity,
    sig: IbsSignature,
    message: bytes,
    scheme: RecoverySignatureScheme = DEFAULT_SCHEME,
) -> bool:
    """Both checks, in order: message signature first (it yields the key),
    then the certificate binding that key to the identity."""
    public_key = scheme.recover_identified(sig.address, sig.sigma, message)
    if public_key is None:
        return False
    return verify_certificate(kgc_address, identity, public_key, sig.cert, scheme)


# ---------------------------------------------------------------------------
# Why an identity cannot simply *be* a verification key here: executable
# documentation of the negative result.


@dataclass(frozen=True)
class ObstructionReport:
    identity: str          # hex of the 16-byte identity
    x_candidate: str       # hex of the 32-byte x-coordinate embedding
    padding: str           # how the 16 bytes became 32
    on_curve: bool         # does any point have that x at all
    point_y: Optional[str] # even-parity y if on curve
    discrete_log_required: bool
    master_key_required: bool
    explanation: str

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ObstructionReport":
        return cls(**json.loads(text))


def demo_id_recovery_obstruction(identity: Identity) -> ObstructionReport:
    """Show why a chosen identity cannot serve as a recovered key.

    Even when the identity's bytes are a valid x-coordinate, a signature
    that *recovers* to that point can only be produced by someone holding
    its discrete log, which is exactly the brute-force key search the
    identity layer was supposed to avoid; and verification still needs the
    issuing authority's address on top of the identity.
    """
    x = int.from_bytes(identity.data, "big")  # left-zero-padded to 32 bytes
    on_curve = True
    point_y: Optional[str] = None
    try:
        point = decompress(x, 0)
        point_y = "0x" + int_to_bytes32(point.y).hex()
    except NonResidue:
        on_curve = False
    return ObstructionReport(
        identity=identity.hex,
        x_candidate="0x" + int_to_bytes32(x).hex(),
        padding="left-zero-padded big-endian to 32 bytes",
        on_curve=on_curve,
        point_y=point_y,
        discrete_log_required=True,
        master_key_required=True,
        explanation=(
            "A recovered verification key is a curve point determined by the "
            "signature and message. Forcing it to equal a chosen identity "
            "requires a secret scalar d with d*G landing on that point - a "
            "discrete logarithm, i.e. the same try-and-error search as plain "
            "address grinding. Verification also always needs the issuing "
            "authority's address, so the identity alone is never sufficient."
        ),
    )
