"""Identity-bound signatures and vanity tooling for Ethereum-style addresses.

Everything is built on two primitives implemented here from scratch:
secp256k1 group arithmetic and Keccak-256. On top sit recoverable ECDSA
(verify-by-address), the certificate construction binding arbitrary
16-byte identities to addresses, a brute-force vanity address searcher
with an entropy guard, a key-issuing HTTP service with an append-only
registry, and a transaction flow whose verifier amortizes certificate
checks.

Research-grade code: arithmetic is not constant time and the key wrapping
is a mock. Do not point it at funds.
"""

from .curve import G, INFINITY, P, Point, Q, SECP256K1, decompress, point_add, scalar_mul
from .ecdsa_recovery import (
    RecoverableSignature,
    SigningKey,
    keygen,
    recover,
    sign,
    verify,
)
from .hashing import address_of, address_to_hex, hash_to_scalar, keccak256
from .ibs import (
    Certificate,
    IbsSignature,
    IbsSigningKey,
    Identity,
    MasterKeypair,
    demo_id_recovery_obstruction,
    ibs_keyder,
    ibs_setup,
    ibs_sign,
    ibs_verify,
)
from .txsim import CertCache, Transaction, encode_tx, sign_tx, verify_tx
from .vanity import Pattern, SearchResult, audit_seed, estimate, search

__version__ = "0.1.0"

__all__ = [
    "G", "INFINITY", "P", "Point", "Q", "SECP256K1",
    "decompress", "point_add", "scalar_mul",
    "RecoverableSignature", "SigningKey", "keygen", "recover", "sign", "verify",
    "address_of", "address_to_hex", "hash_to_scalar", "keccak256",
    "Certificate", "IbsSignature", "IbsSigningKey", "Identity", "MasterKeypair",
    "demo_id_recovery_obstruction", "ibs_keyder", "ibs_setup", "ibs_sign", "ibs_verify",
    "CertCache", "Transaction", "encode_tx", "sign_tx", "verify_tx",
    "Pattern", "SearchResult", "audit_seed", "estimate", "search",
    "__version__",
]
