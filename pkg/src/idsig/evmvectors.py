"""Differential test corpus for the on-chain verifier harness.

Emits signature and certificate cases with the native verdict attached,
plus one storage fixture whose message is an exactly-32-byte RLP payload,
matching how the contract stores its message. Every emitted signature is
low-s normalised; the raw recovery precompile applies no low-s policy, so
high-s twins would compare policies rather than implementations and are
deliberately absent.
"""

from __future__ import annotations

import random

from .curve import Q, int_to_bytes32
from .ecdsa_recovery import RecoverableSignature, SigningKey, keygen, sign, verify
from .hashing import address_to_hex
from .ibs import Identity, cert_message, ibs_keyder, ibs_setup, verify_certificate
from .txsim import Transaction, encode_tx


def _sig_fields(sig: RecoverableSignature) -> dict:
    return {
        "s": "0x" + int_to_bytes32(sig.s).hex(),
        "rx": "0x" + int_to_bytes32(sig.r_x).hex(),
        "v": 27 + sig.v,
    }


def _sig_case(name, message, address, sig, expected_hint):
    expected = verify(address, sig, message)
    assert expected == expected_hint, f"case {name}: native verdict surprised us"
    return {
        "name": name,
        "msg": "0x" + message.hex(),
        "signer_address": address_to_hex(address),
        **_sig_fields(sig),
        "expected": expected,
    }


def _cert_case(name, payload, kgc_address, cert, expected_hint):
    # payload is the 80-byte P||id the certificate signs
    expected = verify(kgc_address, cert, payload)
    assert expected == expected_hint, f"case {name}: native verdict surprised us"
    return {
        "name": name,
        "payload": "0x" + payload.hex(),
        "kgc_address": address_to_hex(kgc_address),
        **_sig_fields(cert),
        "expected": expected,
    }


def _flip_byte(data: bytes, index: int) -> bytes:
    out = bytearray(data)
    out[index] ^= 0x01
    return bytes(out)


def _gas_fixture(rng: random.Random) -> dict:
    """Fixture shaped like the measured scenario: a 32-byte RLP message
    and an 80-byte key||identity certificate payload."""
    master = ibs_setup(rng.randbytes(32))
    identity = Identity.from_text("gas-fixture")
    key = ibs_keyder(master, identity, rng.randbytes(32))
    tx = Transaction(nonce=1, to=rng.randbytes(20), value=5, data=rng.randbytes(7))
    message = encode_tx(tx)
    assert len(message) == 32, "gas fixture message must be exactly 32 bytes"
    sigma = sign(key.signing_key, message)
    payload = cert_message(key.public_key, identity)
    assert verify(key.address, sigma, message)
    assert verify_certificate(master.address, identity, key.public_key, key.cert)
    return {
        "msg": "0x" + message.hex(),
        "signer_address": address_to_hex(key.address),
        **_sig_fields(sigma),
        "sig_pbk_id": "0x" + payload.hex(),
        "kgc_address": address_to_hex(master.address),
        "cert_s": "0x" + int_to_bytes32(key.cert.s).hex(),
        "cert_rx": "0x" + int_to_bytes32(key.cert.r_x).hex(),
        "cert_v": 27 + key.cert.v,
    }


def generate_vectors(count: int = 100, seed: bytes = b"evm-parity-corpus") -> dict:
    """Roughly ``count`` cases, half message-signature, half certificate,
    each group one part valid to four parts tampered."""
    rng = random.Random(seed)
    units = max(1, count // 10)
    sig_cases = []
    cert_cases = []
    other_master = ibs_setup(rng.randbytes(32))

    for unit in range(units):
        key: SigningKey = keygen(rng.randbytes(32))
        message = rng.randbytes(rng.randint(8, 64))
        sig = sign(key, message)
        sig_cases.append(_sig_case(f"valid-{unit}", message, key.address, sig, True))
        sig_cases.append(
            _sig_case(
                f"flipped-v-{unit}",
                message,
                key.address,
                RecoverableSignature(sig.s, sig.r_x, sig.v ^ 1),
                False,
            )
        )
        sig_cases.append(
            _sig_case(
                f"tampered-msg-{unit}",
                _flip_byte(message, rng.randrange(len(message))),
                key.address,
                sig,
                False,
            )
        )
        sig_cases.append(
            _sig_case(f"wrong-signer-{unit}", message, rng.randbytes(20), sig, False)
        )
        sig_cases.append(
            _sig_case(
                f"zero-s-{unit}",
                message,
                key.address,
                RecoverableSignature(0, sig.r_x, sig.v),
                False,
            )
        )

        master = ibs_setup(rng.randbytes(32))
        identity = Identity(rng.randbytes(16))
        user = ibs_keyder(master, identity, rng.randbytes(32))
        payload = cert_message(user.public_key, identity)
        cert = user.cert
        cert_cases.append(
            _cert_case(f"cert-valid-{unit}", payload, master.address, cert, True)
        )
        cert_cases.append(
            _cert_case(
                f"cert-flipped-id-{unit}",
                _flip_byte(payload, 64 + rng.randrange(16)),
                master.address,
                cert,
                False,
            )
        )
        cert_cases.append(
            _cert_case(
                f"cert-wrong-kgc-{unit}", payload, other_master.address, cert, False
            )
        )
        cert_cases.append(
            _cert_case(
                f"cert-flipped-v-{unit}",
                payload,
                master.address,
                RecoverableSignature(cert.s, cert.r_x, cert.v ^ 1),
                False,
            )
        )
        cert_cases.append(
            _cert_case(
                f"cert-tampered-key-{unit}",
                _flip_byte(payload, rng.randrange(64)),
                master.address,
                cert,
                False,
            )
        )

    return {
        "curve_order": "0x" + int_to_bytes32(Q).hex(),
        "sig_cases": sig_cases,
        "cert_cases": cert_cases,
        "gas_fixture": _gas_fixture(rng),
    }
