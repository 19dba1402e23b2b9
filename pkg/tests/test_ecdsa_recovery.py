import random

import pytest

from idsig.curve import G, Q, scalar_mul
from idsig.ecdsa_recovery import (
    RecoverableSignature,
    SigningKey,
    is_low_s,
    keygen,
    malleable_twin,
    recover,
    recover_prehashed,
    recover_verified,
    sign,
    sign_prehashed,
    verify,
    verify_prehashed,
)
from idsig.errors import InvalidSignature, NonResidue, RetryExhausted, WeakSeed
from idsig.hashing import address_of, keccak256


def key_from_d(d: int) -> SigningKey:
    point = scalar_mul(d, G)
    return SigningKey(d=d, public_key=point, address=address_of(point))


def rng_from(seed: int):
    inner = random.Random(seed)
    return lambda n: inner.randbytes(n)


# --- keygen -----------------------------------------------------------------


def test_keygen_is_deterministic():
    seed = bytes(range(32))
    a, b = keygen(seed), keygen(seed)
    assert a.d == b.d and a.address == b.address


def test_keygen_key_is_in_the_group():
    key = keygen(b"\x01" * 32)
    assert not key.public_key.infinity
    assert scalar_mul(Q, key.public_key).infinity
    assert key.public_key == scalar_mul(key.d, G)


def test_keygen_rejects_weak_seeds():
    with pytest.raises(WeakSeed):
        keygen(b"\x01" * 31)
    with pytest.raises(WeakSeed):
        keygen(bytes(32))
    with pytest.raises(WeakSeed):
        keygen(b"1234")


def test_keygen_distinct_seeds_distinct_addresses():
    rng = random.Random(12)
    addresses = {keygen(rng.randbytes(32)).address for _ in range(1000)}
    assert len(addresses) == 1000


# --- sign -------------------------------------------------------------------


def test_sign_verify_roundtrip():
    key = keygen(b"\x21" * 32)
    message = b"round trip"
    assert verify(key.address, sign(key, message), message)


def test_signature_always_low_s():
    rng = random.Random(3)
    for _ in range(100):
        key = keygen(rng.randbytes(32))
        sig = sign(key, rng.randbytes(16))
        assert 1 <= sig.s <= Q // 2


def test_deterministic_signature_bytes_match_frozen_vectors(sig_vectors):
    for vector in sig_vectors:
        key = key_from_d(int(vector["d"], 16))
        message = bytes.fromhex(vector["message"][2:])
        sig = sign(key, message)
        assert sig.s == int(vector["s"], 16)
        assert sig.r_x == int(vector["rx"], 16)
        assert sig.v == vector["v27"] - 27


def test_sign_is_reproducible_and_rng_mode_is_not():
    key = keygen(b"\x11" * 32)
    message = b"nonce determinism"
    assert sign(key, message) == sign(key, message)
    one = sign(key, message, rng=rng_from(1))
    two = sign(key, message, rng=rng_from(2))
    assert one != two
    assert verify(key.address, one, message)
    assert verify(key.address, two, message)


def test_sign_retry_exhaustion_with_degenerate_rng():
    key = keygen(b"\x31" * 32)
    with pytest.raises(RetryExhausted):
        sign(key, b"x", rng=lambda n: bytes(n))  # nonce 0 forever


def test_sign_prehashed_equals_sign():
    key = keygen(b"\x41" * 32)
    message = b"hash outside"
    assert sign_prehashed(key, keccak256(message)) == sign(key, message)


# --- recover ----------------------------------------------------------------


def test_recover_returns_signer_key(sig_vectors):
    for vector in sig_vectors:
        sig = RecoverableSignature(
            s=int(vector["s"], 16), r_x=int(vector["rx"], 16), v=vector["v27"] - 27
        )
        point = recover(sig, bytes.fromhex(vector["message"][2:]))
        assert point.x == int(vector["pub_x"], 16)
        assert point.y == int(vector["pub_y"], 16)


def test_recover_on_tampered_message_gives_other_address():
    rng = random.Random(77)
    key = keygen(b"\x51" * 32)
    message = bytearray(b"pay alice 5 wei now")
    sig = sign(key, bytes(message))
    for _ in range(50):
        tampered = bytearray(message)
        tampered[rng.randrange(len(tampered))] ^= 1 + rng.randrange(255)
        try:
            point = recover(sig, bytes(tampered))
        except (InvalidSignature, NonResidue):
            continue
        assert address_of(point) != key.address


def test_recover_rejects_degenerate_signatures():
    key = keygen(b"\x61" * 32)
    message = b"m"
    sig = sign(key, message)
    with pytest.raises(InvalidSignature):
        recover(RecoverableSignature(sig.s, 0, sig.v), message)
    with pytest.raises(InvalidSignature):
        recover(RecoverableSignature(sig.s, Q, sig.v), message)
    with pytest.raises(InvalidSignature):
        recover(RecoverableSignature(0, sig.r_x, sig.v), message)
    with pytest.raises(InvalidSignature):
        recover(RecoverableSignature(sig.s, sig.r_x, 2), message)


def test_recover_prehashed_matches_recover():
    key = keygen(b"\x71" * 32)
    message = b"two entries"
    sig = sign(key, message)
    assert recover_prehashed(sig, keccak256(message)) == recover(sig, message)


# --- verify and malleability --------------------------------------------------


def test_verify_wrong_address_fails():
    key = keygen(b"\x81" * 32)
    other = keygen(b"\x82" * 32)
    message = b"hello"
    sig = sign(key, message)
    assert verify(key.address, sig, message)
    assert not verify(other.address, sig, message)


def test_high_s_twin_rejected_but_recovers_same_key():
    rng = random.Random(41)
    for _ in range(50):
        key = keygen(rng.randbytes(32))
        message = rng.randbytes(24)
        sig = sign(key, message)
        twin = malleable_twin(sig)
        assert not is_low_s(twin)
        # with the low-s rule bypassed, both recover the signer's key
        assert recover(twin, message) == recover(sig, message) == key.public_key
        # with the rule applied, only the canonical form verifies
        assert verify(key.address, sig, message)
        assert not verify(key.address, twin, message)


def test_unforgeability_smoke():
    rng = random.Random(55)
    for _ in range(200):
        signer = keygen(rng.randbytes(32))
        other = keygen(rng.randbytes(32))
        message = rng.randbytes(12)
        assert not verify(other.address, sign(signer, message), message)


def test_recover_verified_returns_the_key_or_none():
    key = keygen(b"\x91" * 32)
    message = b"payload"
    sig = sign(key, message)
    assert recover_verified(key.address, sig, message) == key.public_key
    assert recover_verified(key.address, sig, b"other") is None
    assert recover_verified(key.address, malleable_twin(sig), message) is None


def test_verify_prehashed():
    key = keygen(b"\xa1" * 32)
    message = b"digest entry"
    sig = sign(key, message)
    assert verify_prehashed(key.address, sig, keccak256(message))
    assert not verify_prehashed(key.address, sig, keccak256(b"other"))
    assert not verify_prehashed(key.address, malleable_twin(sig), keccak256(message))


def test_verify_never_raises_on_garbage():
    key = keygen(b"\xb1" * 32)
    message = b"m"
    assert not verify(key.address, RecoverableSignature(0, 0, 0), message)
    assert not verify(key.address, RecoverableSignature(1, 1, 1), message)
    assert not verify(bytes(20), sign(key, message), message)


# --- wire formats -------------------------------------------------------------


def test_wire_format_roundtrip():
    key = keygen(b"\xc1" * 32)
    sig = sign(key, b"wire")
    blob = sig.to_bytes()
    assert len(blob) == 65
    assert blob[64] in (27, 28)
    assert RecoverableSignature.from_bytes(blob) == sig


def test_wire_format_rejects_bad_inputs():
    with pytest.raises(InvalidSignature):
        RecoverableSignature.from_bytes(bytes(64))
    bad_v = bytes(64) + b"\x1d"  # 29
    with pytest.raises(InvalidSignature):
        RecoverableSignature.from_bytes(bad_v)


def test_json_format_roundtrip():
    key = keygen(b"\xd1" * 32)
    sig = sign(key, b"json")
    parsed = RecoverableSignature.from_json(sig.to_json())
    assert parsed == sig
