"""Acceptance suite: one test per criterion, at the stated tolerance.

Run with `pytest tests/test_acceptance.py -v`; the terminal summary prints
one PASS/FAIL line per criterion (see conftest).
"""

import os
import random
import statistics
import time

import pytest

from idsig import rlp
from idsig.curve import G, scalar_mul
from idsig.ecdsa_recovery import (
    is_low_s,
    keygen,
    malleable_twin,
    recover,
    sign,
    verify,
)
from idsig.errors import WeakSeed
from idsig.hashing import address_of, keccak256
from idsig.ibs import (
    IbsSignature,
    Identity,
    demo_id_recovery_obstruction,
    ibs_keyder,
    ibs_setup,
    ibs_verify,
)
from idsig.txsim import (
    CertCache,
    Transaction,
    count_ops,
    encode_tx,
    sign_tx,
    verify_tx,
)
from idsig.vanity import Pattern, audit_seed, search

from conftest import load_vectors


@pytest.mark.acceptance("recovery correctness: 1000 roundtrips, 0 failures, <30s")
def test_recovery_correctness_1000():
    rng = random.Random(0xACCE97)
    started = time.perf_counter()
    failures = 0
    for _ in range(1000):
        key = keygen(rng.randbytes(32))
        message = rng.randbytes(rng.randint(1, 120))
        sig = sign(key, message)
        if recover(sig, message) != key.public_key:
            failures += 1
        elif not verify(key.address, sig, message):
            failures += 1
    elapsed = time.perf_counter() - started
    assert failures == 0
    assert elapsed < 30.0, f"took {elapsed:.1f}s"


@pytest.mark.acceptance("reference parity: keccak / addresses / RLP, >=100 vectors each")
def test_reference_parity():
    keccak_vectors = load_vectors("keccak_vectors")["vectors"]
    assert len(keccak_vectors) >= 100
    for vector in keccak_vectors:
        assert keccak256(bytes.fromhex(vector["data"][2:])).hex() == vector["digest"][2:]

    address_vectors = load_vectors("address_vectors")["vectors"]
    assert len(address_vectors) >= 100
    for vector in address_vectors:
        point = scalar_mul(int(vector["d"], 16), G)
        assert "0x" + address_of(point).hex() == vector["address"]

    rlp_vectors = load_vectors("rlp_vectors")["vectors"]
    assert len(rlp_vectors) >= 100

    def tree_to_value(node):
        if "b" in node:
            return bytes.fromhex(node["b"][2:])
        if "i" in node:
            return int(node["i"])
        return [tree_to_value(child) for child in node["l"]]

    for vector in rlp_vectors:
        assert rlp.encode(tree_to_value(vector["tree"])).hex() == vector["encoding"][2:]


@pytest.mark.acceptance("malleability: 200 high-s twins recover yet fail low-s verify")
def test_malleability_suite_200():
    rng = random.Random(0x3A11E)
    for _ in range(200):
        key = keygen(rng.randbytes(32))
        message = rng.randbytes(rng.randint(1, 64))
        sig = sign(key, message)
        twin = malleable_twin(sig)
        assert not is_low_s(twin)
        # rule bypassed: the twin recovers the very same key
        assert recover(twin, message) == key.public_key
        # rule applied: the twin is rejected, the original accepted
        assert verify(key.address, sig, message)
        assert not verify(key.address, twin, message)


@pytest.mark.acceptance("IBS differential: verify_tx == ibs_verify on 1000 cases")
def test_ibs_differential_1000():
    rng = random.Random(0xD1FF)
    master = ibs_setup(rng.randbytes(32))
    signers = [
        ibs_keyder(master, Identity(rng.randbytes(16)), rng.randbytes(32))
        for _ in range(20)
    ]
    shared_cache = CertCache()
    tampered_total = 0
    for case_no in range(1000):
        signer = signers[rng.randrange(len(signers))]
        tx = Transaction(
            nonce=rng.randrange(1000),
            to=rng.randbytes(20),
            value=rng.randrange(10**9),
            data=rng.randbytes(rng.randrange(16)),
        )
        sig = sign_tx(signer, tx)
        identity = signer.identity
        variant = case_no % 5
        tampered = variant != 0
        if variant == 1:
            tx = Transaction(tx.nonce, tx.to, tx.value ^ 1, tx.data)
        elif variant == 2:
            identity = Identity(rng.randbytes(16))
        elif variant == 3:
            bad_cert = type(sig.cert)(
                s=sig.cert.s, r_x=sig.cert.r_x, v=sig.cert.v ^ 1
            )
            sig = IbsSignature(sigma=sig.sigma, address=sig.address, cert=bad_cert)
        elif variant == 4:
            sig = IbsSignature(sigma=sig.sigma, address=rng.randbytes(20), cert=sig.cert)

        expected = ibs_verify(master.address, identity, sig, encode_tx(tx))
        warm = verify_tx(master.address, identity, sig, tx, shared_cache)
        cold = verify_tx(master.address, identity, sig, tx, CertCache())
        assert warm.accepted == expected, f"case {case_no}: warm cache diverged"
        assert cold.accepted == expected, f"case {case_no}: cold cache diverged"
        if tampered:
            tampered_total += 1
            assert not expected, f"case {case_no}: tampered case accepted"
    assert tampered_total == 800


@pytest.mark.acceptance("cert-once: 1 check per signer per session; ops 2 on miss, 1 on hit")
def test_cert_once_amortization_100():
    rng = random.Random(0xCE27)
    master = ibs_setup(rng.randbytes(32))
    signer = ibs_keyder(master, Identity.from_text("amortized"), rng.randbytes(32))
    cache = CertCache()
    cert_checks = 0
    for nonce in range(100):
        tx = Transaction(nonce=nonce, to=bytes(20), value=nonce, data=b"")
        verdict = verify_tx(master.address, signer.identity, sign_tx(signer, tx), tx, cache)
        assert verdict.accepted
        cert_checks += verdict.cert_checked
    assert cert_checks == 1
    assert count_ops("miss").recoveries == 2
    assert count_ops("hit").recoveries == 1


@pytest.mark.acceptance("vanity scaling: 3 chars median <10s; 1-char mean in derived band")
def test_vanity_scaling():
    workers = min(2, os.cpu_count() or 1)
    wall_times = []
    for _ in range(3):
        started = time.perf_counter()
        result = search(
            Pattern("abc", "prefix"),
            entropy=os.urandom(32),
            max_attempts=2_000_000,
            workers=workers,
        )
        wall_times.append(time.perf_counter() - started)
        assert result.key.address.hex().startswith("abc")
    assert statistics.median(wall_times) < 10.0, f"median {statistics.median(wall_times):.1f}s"

    band = load_vectors("geom_band")
    attempts = [
        search(Pattern("a", "prefix"), entropy=os.urandom(32), max_attempts=10_000).attempts
        for _ in range(band["trials"])
    ]
    mean = sum(attempts) / len(attempts)
    assert band["mean_lo"] <= mean <= band["mean_hi"], (
        f"mean {mean:.2f} outside [{band['mean_lo']}, {band['mean_hi']}]"
    )


@pytest.mark.acceptance("weak-seed guard: 4-byte seed rejected, 32-byte random passes")
def test_weak_seed_guard():
    four_byte = (1).to_bytes(4, "big")
    assert not audit_seed(four_byte).strong
    with pytest.raises(WeakSeed):
        search(Pattern("a"), entropy=four_byte, max_attempts=10)
    strong = os.urandom(32)
    assert audit_seed(strong).strong
    result = search(Pattern("a"), entropy=strong, max_attempts=100_000)
    assert result.attempts >= 1


@pytest.mark.acceptance("negative-result demo: discrete log required for 100 identities")
def test_negative_result_demo_100():
    for _ in range(100):
        report = demo_id_recovery_obstruction(Identity(os.urandom(16)))
        assert report.discrete_log_required is True
        assert report.master_key_required is True
