import json
import os
import signal
import socket
import stat
import subprocess
import sys
import time
from pathlib import Path

import httpx
import pytest

from idsig.cli import main
from idsig.hashing import address_to_hex
from idsig.ibs import Identity, ibs_keyder, ibs_setup
from idsig.keyfiles import save_ibs_key, save_signing_key


SEED = "0x" + "ab" * 32  # fine for keygen, too uniform for the vanity guard
VANITY_SEED = "0x" + bytes(range(32)).hex()


def run_cli(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_keygen_sign_verify_roundtrip(tmp_path, capsys):
    key_file = tmp_path / "k.json"
    sig_file = tmp_path / "m.sig"

    code, out, _ = run_cli(capsys, "keygen", "--out", str(key_file),
                           "--seed-hex", SEED, "--json")
    assert code == 0
    keygen_obj = json.loads(out)
    assert "private_key_hex" not in keygen_obj  # no secret without the flag

    code, out, _ = run_cli(capsys, "sign", "--key", str(key_file),
                           "--message", "hello", "--out", str(sig_file), "--json")
    assert code == 0

    code, out, _ = run_cli(capsys, "verify", "--address", keygen_obj["address"],
                           "--signature", str(sig_file), "--message", "hello", "--json")
    assert code == 0
    assert json.loads(out) == {"valid": True}

    code, out, _ = run_cli(capsys, "verify", "--address", keygen_obj["address"],
                           "--signature", str(sig_file), "--message", "tampered", "--json")
    assert code == 1
    assert json.loads(out) == {"valid": False}


def test_keygen_insecure_print(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "keygen", "--out", str(tmp_path / "k.json"),
                           "--seed-hex", SEED, "--insecure-print", "--json")
    assert code == 0
    assert json.loads(out)["private_key_hex"].startswith("0x")


def test_address_from_key_and_pubkey(tmp_path, capsys):
    key_file = tmp_path / "k.json"
    code, out, _ = run_cli(capsys, "keygen", "--out", str(key_file),
                           "--seed-hex", SEED, "--json")
    expected = json.loads(out)
    code, out, _ = run_cli(capsys, "address", "--key", str(key_file), "--json")
    assert code == 0 and json.loads(out)["address"] == expected["address"]
    code, out, _ = run_cli(capsys, "address",
                           "--public-key", expected["public_key"], "--json")
    assert code == 0 and json.loads(out)["address"] == expected["address"]


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["sign"])  # missing required arguments
    assert excinfo.value.code == 2


def test_io_error_exit_code(tmp_path, capsys):
    code, _, err = run_cli(capsys, "sign", "--key", str(tmp_path / "missing.json"),
                           "--message", "x")
    assert code == 3


def test_estimate_three_chars(capsys):
    code, out, _ = run_cli(capsys, "estimate", "--pattern", "abc",
                           "--rate", "1000", "--json")
    assert code == 0
    obj = json.loads(out)
    assert obj["expected_attempts"] == 4096


def test_vanity_refuses_bare_secret(capsys):
    code, _, err = run_cli(capsys, "vanity", "--pattern", "a", "--seed-hex", VANITY_SEED)
    assert code == 2
    assert "insecure-print" in err


def test_vanity_writes_key_file(tmp_path, capsys):
    key_file = tmp_path / "vanity.json"
    code, out, _ = run_cli(capsys, "vanity", "--pattern", "a",
                           "--seed-hex", VANITY_SEED, "--out", str(key_file),
                           "--max-attempts", "100000")
    assert code == 0
    obj = json.loads(out)
    assert set(obj) == {"address", "attempts", "seconds", "key_file"}
    assert obj["address"][2:].startswith("a")
    assert stat.S_IMODE(os.stat(key_file).st_mode) == 0o600


def test_vanity_insecure_print_includes_secret(capsys):
    code, out, _ = run_cli(capsys, "vanity", "--pattern", "a",
                           "--seed-hex", VANITY_SEED, "--insecure-print",
                           "--max-attempts", "100000")
    assert code == 0
    assert json.loads(out)["private_key_hex"].startswith("0x")


def test_weak_seed_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "vanity", "--pattern", "a",
                           "--seed-hex", "0xdeadbeef", "--insecure-print")
    assert code == 2


def test_ibs_sign_verify_and_demo(tmp_path, capsys):
    master = ibs_setup(b"\x77" * 32)
    key = ibs_keyder(master, Identity.from_text("zoe"), b"\x78" * 32)
    key_file = tmp_path / "ibs.json"
    save_ibs_key(key_file, key, kgc_address=master.address)
    sig_file = tmp_path / "m.ibssig"
    kgc_addr = address_to_hex(master.address)

    code, out, _ = run_cli(capsys, "ibs", "sign", "--key", str(key_file),
                           "--message", "hi", "--out", str(sig_file), "--json")
    assert code == 0

    code, out, _ = run_cli(capsys, "ibs", "verify", "--kgc-address", kgc_addr,
                           "--id", "zoe", "--signature", str(sig_file),
                           "--message", "hi", "--json")
    assert code == 0 and json.loads(out)["valid"] is True

    code, out, _ = run_cli(capsys, "ibs", "verify", "--kgc-address", kgc_addr,
                           "--id", "eve", "--signature", str(sig_file),
                           "--message", "hi", "--json")
    assert code == 1

    code, out, _ = run_cli(capsys, "ibs", "demo", "--id", "zoe", "--json")
    assert code == 0
    assert json.loads(out)["discrete_log_required"] is True


def test_tx_sign_verify_files(tmp_path, capsys):
    master = ibs_setup(b"\x79" * 32)
    key = ibs_keyder(master, Identity.from_text("yan"), b"\x7a" * 32)
    key_file = tmp_path / "ibs.json"
    save_ibs_key(key_file, key, kgc_address=master.address)
    tx_file = tmp_path / "tx.json"
    kgc_addr = address_to_hex(master.address)

    code, out, _ = run_cli(capsys, "tx", "sign", "--key", str(key_file),
                           "--nonce", "3", "--to", "0x" + "22" * 20,
                           "--value", "1000", "--data", "0xbeef",
                           "--out", str(tx_file), "--json")
    assert code == 0

    code, out, _ = run_cli(capsys, "tx", "verify", "--kgc-address", kgc_addr,
                           "--tx", str(tx_file), "--json")
    assert code == 0
    obj = json.loads(out)
    assert obj["accepted"] is True and obj["cert_checked"] is True

    # corrupt the value field: signature no longer covers the payload
    blob = json.loads(tx_file.read_text())
    blob["tx"]["value"] = 2000
    tx_file.write_text(json.dumps(blob))
    code, out, _ = run_cli(capsys, "tx", "verify", "--kgc-address", kgc_addr,
                           "--tx", str(tx_file), "--json")
    assert code == 1


def test_registry_audit_cli(tmp_path, capsys):
    import random
    from idsig.kgc import IssuanceLog, Kgc
    from idsig.curve import G, scalar_mul

    master = ibs_setup(b"\x7b" * 32)
    log_path = tmp_path / "log.ndjson"
    kgc = Kgc(master=master, log=IssuanceLog(log_path),
              entropy_source=random.Random(5).randbytes)
    kgc.issue(Identity.from_text("rob"), scalar_mul(99, G))
    master_file = tmp_path / "master.json"
    save_signing_key(master_file, master.msk, kind="master")

    code, out, _ = run_cli(capsys, "registry", "audit", "--log", str(log_path),
                           "--master-key", str(master_file), "--json")
    assert code == 0
    obj = json.loads(out)
    assert obj["ok"] is True and obj["records"] == 1

    code, out, _ = run_cli(capsys, "registry", "audit", "--log", str(log_path),
                           "--kgc-address", "0x" + "00" * 20, "--json")
    assert code == 1


def test_evm_vectors_command(tmp_path, capsys):
    out_file = tmp_path / "vectors.json"
    code, out, _ = run_cli(capsys, "evm-vectors", "--out", str(out_file),
                           "--count", "40", "--json")
    assert code == 0
    corpus = json.loads(out_file.read_text())
    assert len(corpus["sig_cases"]) == 20
    assert len(corpus["cert_cases"]) == 20
    assert any(c["expected"] for c in corpus["sig_cases"])
    assert any(not c["expected"] for c in corpus["sig_cases"])
    fixture = corpus["gas_fixture"]
    assert len(bytes.fromhex(fixture["msg"][2:])) == 32
    assert len(bytes.fromhex(fixture["sig_pbk_id"][2:])) == 80


def test_kgc_serve_and_issue_over_real_http(tmp_path, capsys):
    master_file = tmp_path / "master.json"
    log_file = tmp_path / "issuance.ndjson"
    code, out, _ = run_cli(capsys, "keygen", "--kind", "master",
                           "--out", str(master_file), "--seed-hex", SEED, "--json")
    assert code == 0
    kgc_address = json.loads(out)["address"]

    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]

    env = dict(os.environ)
    env["IDSIG_KGC_MASTER_KEY"] = str(master_file)
    env["IDSIG_KGC_LOG"] = str(log_file)
    server = subprocess.Popen(
        [sys.executable, "-m", "idsig.cli", "kgc", "serve",
         "--listen", f"127.0.0.1:{port}"],
        env=env,
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    try:
        base = f"http://127.0.0.1:{port}"
        deadline = time.time() + 30
        while True:
            try:
                response = httpx.get(base + "/v1/kgc/address", timeout=2.0)
                break
            except Exception:
                if time.time() > deadline:
                    raise
                time.sleep(0.2)
        assert response.json()["address"] == kgc_address

        key_file = tmp_path / "issued.json"
        code, out, _ = run_cli(capsys, "kgc", "issue", "--url", base,
                               "--id", "walt", "--out", str(key_file),
                               "--kgc-address", kgc_address, "--json")
        assert code == 0
        issued = json.loads(out)
        assert issued["sequence"] == 1

        sig_file = tmp_path / "m.sig"
        code, _, _ = run_cli(capsys, "ibs", "sign", "--key", str(key_file),
                             "--message", "served", "--out", str(sig_file))
        assert code == 0
        code, out, _ = run_cli(capsys, "ibs", "verify", "--kgc-address", kgc_address,
                               "--id", "walt", "--signature", str(sig_file),
                               "--message", "served", "--json")
        assert code == 0 and json.loads(out)["valid"] is True

        registry = httpx.get(base + "/v1/registry",
                             params={"id": Identity.from_text("walt").hex}).json()
        assert len(registry["records"]) == 1
    finally:
        server.send_signal(signal.SIGINT)
        try:
            server.wait(timeout=10)
        except subprocess.TimeoutExpired:
            server.kill()
