"""Command-line entry point.

Exit codes: 0 success, 1 verification/search failure, 2 usage error,
3 I/O error. With --json each command prints exactly one JSON object on
stdout; progress and human-oriented notes always go to stderr. Secret
material is never printed unless --insecure-print is given; the default
destination for secrets is an owner-only key file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import report as report_mod
from . import vanity as vanity_mod
from .curve import G, int_to_bytes32, point_from_bytes, point_to_bytes, scalar_mul
from .ecdsa_recovery import RecoverableSignature, keygen, sign, verify
from .errors import (
    Exhausted,
    IdentityLength,
    IdsigError,
    KeyFileError,
    StorageFailure,
    WeakSeed,
)
from .evmvectors import generate_vectors
from .hashing import (
    address_of,
    address_to_checksum_hex,
    address_to_hex,
    parse_address,
)
from .ibs import (
    IbsSignature,
    Identity,
    demo_id_recovery_obstruction,
    ibs_sign,
    ibs_verify,
)
from .keyfiles import (
    load_ibs_key,
    load_signing_key,
    save_ibs_key,
    save_signing_key,
)
from .kgc import (
    IssuanceLog,
    KgcConfig,
    audit_log,
    load_kgc,
    request_issue,
    serve,
)
from .txsim import (
    CertCache,
    Transaction,
    sign_tx,
    signed_tx_from_json,
    signed_tx_to_json,
    verify_tx,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _note(text: str) -> None:
    print(text, file=sys.stderr)


def _emit(args, obj: dict, human: str) -> None:
    if args.json:
        print(json.dumps(obj))
    else:
        print(human)


def _read_seed(args) -> bytes:
    if getattr(args, "seed_hex", None):
        return bytes.fromhex(args.seed_hex.removeprefix("0x"))
    if getattr(args, "seed_file", None):
        return Path(args.seed_file).read_bytes()
    return os.urandom(32)


def _read_message(args) -> bytes:
    if args.message is not None:
        return args.message.encode("utf-8")
    if args.message_hex is not None:
        return bytes.fromhex(args.message_hex.removeprefix("0x"))
    return Path(args.message_file).read_bytes()


def _add_message_args(parser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--message", help="UTF-8 message text")
    group.add_argument("--message-hex", help="message bytes as hex")
    group.add_argument("--message-file", help="file with raw message bytes")


def _add_json_flag(parser) -> None:
    parser.add_argument("--json", action="store_true",
                        help="print one machine-readable JSON object on stdout")


def _identity_from_arg(value: str) -> Identity:
    if value.lower().startswith("0x"):
        return Identity.from_hex(value)
    return Identity.from_text(value)


# --- commands ---------------------------------------------------------------


def cmd_keygen(args) -> int:
    seed = _read_seed(args)
    key = keygen(seed)
    save_signing_key(args.out, key, kind=args.kind)
    obj = {
        "address": address_to_hex(key.address),
        "public_key": "0x" + point_to_bytes(key.public_key).hex(),
        "key_file": str(args.out),
    }
    if args.insecure_print:
        obj["private_key_hex"] = "0x" + int_to_bytes32(key.d).hex()
    _emit(args, obj, f"address {obj['address']}  key file {args.out}")
    return EXIT_OK


def cmd_address(args) -> int:
    if args.key:
        key = load_signing_key(args.key, expect_kind=None)
        addr = key.address
    else:
        point = point_from_bytes(bytes.fromhex(args.public_key.removeprefix("0x")))
        addr = address_of(point)
    rendered = address_to_checksum_hex(addr) if args.eip55 else address_to_hex(addr)
    _emit(args, {"address": rendered}, rendered)
    return EXIT_OK


def cmd_sign(args) -> int:
    key = load_signing_key(args.key, expect_kind=None)
    sig = sign(key, _read_message(args))
    text = sig.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    _emit(
        args,
        {"signature": json.loads(text), "address": address_to_hex(key.address),
         "signature_file": args.out},
        f"signed under {address_to_hex(key.address)}"
        + (f", wrote {args.out}" if args.out else f": {text}"),
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    sig = RecoverableSignature.from_json(Path(args.signature).read_text())
    ok = verify(parse_address(args.address), sig, _read_message(args))
    _emit(args, {"valid": ok}, "valid" if ok else "INVALID")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_vanity(args) -> int:
    pattern = vanity_mod.Pattern(args.pattern, args.position)
    seed = _read_seed(args)
    if not args.insecure_print and not args.out:
        _note("refusing to print the private key; pass --out FILE or --insecure-print")
        return EXIT_USAGE

    def progress(attempts: int, elapsed: float) -> None:
        rate = attempts / elapsed if elapsed > 0 else 0.0
        _note(f"... {attempts} attempts, {rate:,.0f}/s")

    result = vanity_mod.search(
        pattern,
        entropy=seed,
        max_attempts=args.max_attempts,
        workers=args.workers,
        progress=progress,
    )
    obj = {
        "address": address_to_hex(result.key.address),
        "attempts": result.attempts,
        "seconds": round(result.elapsed, 6),
    }
    if args.out:
        save_signing_key(args.out, result.key)
        obj["key_file"] = str(args.out)
    if args.insecure_print:
        obj["private_key_hex"] = "0x" + int_to_bytes32(result.key.d).hex()
    # this command's primary output is the JSON object itself
    print(json.dumps(obj))
    return EXIT_OK


def cmd_estimate(args) -> int:
    pattern = vanity_mod.Pattern(args.pattern, args.position)
    rate = args.rate or vanity_mod.measure_rate(args.measure_seconds)
    est = vanity_mod.estimate(pattern, rate)
    obj = {
        "pattern": pattern.chars,
        "position": pattern.position,
        "rate_per_s": rate,
        "expected_attempts": est.expected_attempts,
        "t50_seconds": est.t50_seconds,
    }
    _emit(
        args, obj,
        f"expected attempts {est.expected_attempts:,.0f}, "
        f"50% time {est.t50_seconds:,.1f}s at {rate:,.0f}/s",
    )
    return EXIT_OK


def cmd_kgc_serve(args) -> int:
    config = KgcConfig.load(
        config_file=args.config,
        master_key_path=args.master_key,
        log_path=args.log,
        host=args.listen.rpartition(":")[0] if args.listen else None,
        port=int(args.listen.rpartition(":")[2]) if args.listen else None,
    )
    _note(f"serving on {config.host}:{config.port}")
    serve(config)
    return EXIT_OK


def cmd_kgc_issue(args) -> int:
    identity = _identity_from_arg(args.id)
    unwrap_secret = int.from_bytes(os.urandom(32), "big") % (2**255) or 1
    key, record = request_issue(args.url, identity, unwrap_secret)
    kgc_address = None
    if args.kgc_address:
        kgc_address = parse_address(args.kgc_address)
    save_ibs_key(args.out, key, kgc_address=kgc_address)
    obj = {
        "address": address_to_hex(key.address),
        "id": identity.hex,
        "sequence": record.sequence,
        "key_file": str(args.out),
    }
    _emit(args, obj, f"issued {identity.hex} -> {obj['address']} (key file {args.out})")
    return EXIT_OK


def cmd_ibs_sign(args) -> int:
    key, _ = load_ibs_key(args.key)
    sig = ibs_sign(key, _read_message(args))
    text = sig.to_json(key.identity)
    if args.out:
        Path(args.out).write_text(text + "\n")
    _emit(
        args,
        {"signature": json.loads(text), "signature_file": args.out},
        f"signed as {key.identity.hex} / {address_to_hex(key.address)}"
        + (f", wrote {args.out}" if args.out else f": {text}"),
    )
    return EXIT_OK


def cmd_ibs_verify(args) -> int:
    sig, embedded_id = IbsSignature.from_json(Path(args.signature).read_text())
    identity = _identity_from_arg(args.id) if args.id else embedded_id
    ok = ibs_verify(parse_address(args.kgc_address), identity, sig, _read_message(args))
    _emit(args, {"valid": ok, "id": identity.hex}, "valid" if ok else "INVALID")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_ibs_demo(args) -> int:
    demo = demo_id_recovery_obstruction(_identity_from_arg(args.id))
    print(demo.to_json())
    return EXIT_OK


def cmd_tx_sign(args) -> int:
    key, _ = load_ibs_key(args.key)
    tx = Transaction(
        nonce=args.nonce,
        to=parse_address(args.to),
        value=args.value,
        data=bytes.fromhex(args.data.removeprefix("0x")) if args.data else b"",
    )
    sig = sign_tx(key, tx)
    text = signed_tx_to_json(tx, key.identity, sig)
    Path(args.out).write_text(text + "\n")
    obj = {"tx_file": str(args.out), "address": address_to_hex(key.address)}
    _emit(args, obj, f"wrote signed transaction to {args.out}")
    return EXIT_OK


def cmd_tx_verify(args) -> int:
    tx, identity, sig = signed_tx_from_json(Path(args.tx).read_text())
    cache = CertCache()
    verdict = verify_tx(parse_address(args.kgc_address), identity, sig, tx, cache)
    obj = {
        "accepted": verdict.accepted,
        "cert_checked": verdict.cert_checked,
        "id": identity.hex,
    }
    _emit(args, obj, "accepted" if verdict.accepted else "REJECTED")
    return EXIT_OK if verdict.accepted else EXIT_VERIFY_FAILED


def cmd_registry_audit(args) -> int:
    if args.master_key:
        kgc_address = load_signing_key(args.master_key, expect_kind="master").address
    else:
        kgc_address = parse_address(args.kgc_address)
    findings = audit_log(IssuanceLog(args.log), kgc_address)
    ok = all(f["ok"] for f in findings)
    obj = {"ok": ok, "records": len(findings), "findings": findings}
    _emit(
        args, obj,
        f"{len(findings)} records, {'all valid' if ok else 'PROBLEMS FOUND'}",
    )
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_bench(args) -> int:
    results = report_mod.run_bench(rate_seconds=args.seconds)
    obj = results.to_json_obj()
    if args.report_dir:
        attempts = (
            report_mod.sample_attempts(trials=args.hist_trials)
            if args.hist_trials
            else None
        )
        written = report_mod.write_report(results, Path(args.report_dir), attempts)
        obj["report_files"] = [str(p) for p in written]
        _note("wrote " + ", ".join(str(p) for p in written))
    _emit(
        args, obj,
        f"rate {results.vanity_rate:,.0f}/s; verification ms: "
        f"ecdsa {results.ecdsa_verify_ms:.2f}, first {results.ibs_first_ms:.2f} "
        f"({results.first_ratio:.2f}x), cached {results.ibs_cached_ms:.2f} "
        f"({results.cached_ratio:.2f}x)",
    )
    return EXIT_OK


def cmd_evm_vectors(args) -> int:
    seed = args.seed.encode() if args.seed else b"evm-parity-corpus"
    corpus = generate_vectors(count=args.count, seed=seed)
    Path(args.out).write_text(json.dumps(corpus, indent=1) + "\n")
    obj = {
        "out": str(args.out),
        "sig_cases": len(corpus["sig_cases"]),
        "cert_cases": len(corpus["cert_cases"]),
    }
    _emit(args, obj, f"wrote {obj['sig_cases']}+{obj['cert_cases']} cases to {args.out}")
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="idsig",
        description="identity-bound signatures and vanity tooling "
        "for Ethereum-style addresses",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="derive a signing key from fresh or given entropy")
    p.add_argument("--out", required=True, help="key file to create (0600)")
    p.add_argument("--kind", choices=["ecdsa", "master"], default="ecdsa")
    p.add_argument("--seed-hex")
    p.add_argument("--seed-file")
    p.add_argument("--insecure-print", action="store_true",
                   help="include the private key in the output")
    _add_json_flag(p)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("address", help="derive the address of a key or public key")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--key", help="key file")
    group.add_argument("--public-key", help="64-byte public key hex")
    p.add_argument("--eip55", action="store_true", help="checksummed display casing")
    _add_json_flag(p)
    p.set_defaults(func=cmd_address)

    p = sub.add_parser("sign", help="sign a message with a recoverable signature")
    p.add_argument("--key", required=True)
    p.add_argument("--out", help="signature file to write")
    _add_message_args(p)
    _add_json_flag(p)
    p.set_defaults(func=cmd_sign)

    p = sub.add_parser("verify", help="verify a recoverable signature by address")
    p.add_argument("--address", required=True)
    p.add_argument("--signature", required=True, help="signature file")
    _add_message_args(p)
    _add_json_flag(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("vanity", help="search for an address matching a pattern")
    p.add_argument("--pattern", required=True)
    p.add_argument("--position", choices=["prefix", "suffix", "substring"],
                   default="prefix")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-attempts", type=int, default=10_000_000)
    p.add_argument("--seed-hex")
    p.add_argument("--seed-file")
    p.add_argument("--out", help="key file for the found key")
    p.add_argument("--insecure-print", action="store_true")
    _add_json_flag(p)
    p.set_defaults(func=cmd_vanity)

    p = sub.add_parser("estimate", help="analytic cost of a vanity pattern")
    p.add_argument("--pattern", required=True)
    p.add_argument("--position", choices=["prefix", "suffix", "substring"],
                   default="prefix")
    p.add_argument("--rate", type=float, help="attempts/s; measured if omitted")
    p.add_argument("--measure-seconds", type=float, default=0.5)
    _add_json_flag(p)
    p.set_defaults(func=cmd_estimate)

    kgc = sub.add_parser("kgc", help="key-issuing service").add_subparsers(
        dest="kgc_command", required=True
    )
    p = kgc.add_parser("serve", help="run the issuance HTTP service")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--listen", help="host:port")
    p.add_argument("--master-key", help="master key file")
    p.add_argument("--log", help="issuance log path")
    _add_json_flag(p)
    p.set_defaults(func=cmd_kgc_serve)
    p = kgc.add_parser("issue", help="request a key from a running service")
    p.add_argument("--url", required=True)
    p.add_argument("--id", required=True, help="identity text or 0x-hex (16 bytes)")
    p.add_argument("--out", required=True, help="key file to create")
    p.add_argument("--kgc-address", help="record the issuer address in the key file")
    _add_json_flag(p)
    p.set_defaults(func=cmd_kgc_issue)

    ibs = sub.add_parser("ibs", help="identity-bound signatures").add_subparsers(
        dest="ibs_command", required=True
    )
    p = ibs.add_parser("sign", help="sign with an issued identity key")
    p.add_argument("--key", required=True, help="ibs key file")
    p.add_argument("--out")
    _add_message_args(p)
    _add_json_flag(p)
    p.set_defaults(func=cmd_ibs_sign)
    p = ibs.add_parser("verify", help="verify an identity-bound signature")
    p.add_argument("--kgc-address", required=True)
    p.add_argument("--id", help="identity; defaults to the one in the file")
    p.add_argument("--signature", required=True)
    _add_message_args(p)
    _add_json_flag(p)
    p.set_defaults(func=cmd_ibs_verify)
    p = ibs.add_parser(
        "demo",
        help="report on why a chosen identity cannot act as a recovered key",
    )
    p.add_argument("--id", required=True)
    _add_json_flag(p)
    p.set_defaults(func=cmd_ibs_demo)

    tx = sub.add_parser("tx", help="transaction flow").add_subparsers(
        dest="tx_command", required=True
    )
    p = tx.add_parser("sign", help="sign a transaction with an identity key")
    p.add_argument("--key", required=True)
    p.add_argument("--nonce", type=int, required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--value", type=int, required=True)
    p.add_argument("--data", help="hex payload")
    p.add_argument("--out", required=True)
    _add_json_flag(p)
    p.set_defaults(func=cmd_tx_sign)
    p = tx.add_parser("verify", help="verify a signed-transaction file")
    p.add_argument("--kgc-address", required=True)
    p.add_argument("--tx", required=True)
    _add_json_flag(p)
    p.set_defaults(func=cmd_tx_verify)

    registry = sub.add_parser("registry", help="issuance registry").add_subparsers(
        dest="registry_command", required=True
    )
    p = registry.add_parser("audit", help="re-verify every issuance record")
    p.add_argument("--log", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--kgc-address")
    group.add_argument("--master-key")
    _add_json_flag(p)
    p.set_defaults(func=cmd_registry_audit)

    p = sub.add_parser("bench", help="measure local rates and render a report")
    p.add_argument("--seconds", type=float, default=1.0,
                   help="sampling window for the attempt rate")
    p.add_argument("--report-dir", help="write bench.csv and figures here")
    p.add_argument("--hist-trials", type=int, default=0,
                   help="1-char searches to sample for the histogram figure")
    _add_json_flag(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("evm-vectors",
                       help="emit the differential corpus for the EVM harness")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", help="corpus seed string")
    _add_json_flag(p)
    p.set_defaults(func=cmd_evm_vectors)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (WeakSeed, IdentityLength, ValueError) as exc:
        _note(f"error: {exc}")
        return EXIT_USAGE
    except Exhausted as exc:
        _note(f"search exhausted: {exc}")
        return EXIT_VERIFY_FAILED
    except (KeyFileError, StorageFailure, OSError) as exc:
        _note(f"i/o error: {exc}")
        return EXIT_IO
    except IdsigError as exc:
        _note(f"error: {exc}")
        return EXIT_VERIFY_FAILED


if __name__ == "__main__":
    sys.exit(main())
