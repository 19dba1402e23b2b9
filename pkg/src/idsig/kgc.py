"""Key-issuing service: HTTP API, append-only registry, key wrapping.

The service holds the master key and, per request, derives a fresh
identity-bound signing key, wraps it under the client's public key, and
durably appends an issuance record before anything is returned. The
wrapping is a deliberately simple stand-in for delivering keys out of a
hardware enclave: ephemeral ECDH plus a keyed-hash stream and a keyed-hash
tag. It is not a production ECIES and is labelled accordingly.

(No ``from __future__ import annotations`` here: the HTTP handlers'
annotations must stay real objects for the framework to resolve them.)
"""

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Optional, Union

from .curve import G, Point, int_to_bytes32, on_curve, point_from_bytes, point_to_bytes, scalar_mul
from .errors import (
    IdentityLength,
    IdsigError,
    InvalidClientKey,
    StorageFailure,
    TagMismatch,
    Uninitialized,
)
from .hashing import address_of, address_to_hex, hash_to_scalar, keccak256, parse_address
from .ibs import (
    Certificate,
    IbsSigningKey,
    Identity,
    MasterKeypair,
    ibs_keyder,
    verify_certificate,
)

PathLike = Union[str, Path]


# ---------------------------------------------------------------------------
# Key wrapping.


@dataclass(frozen=True)
class WrappedKey:
    ephemeral_pub: Point
    ciphertext: bytes
    tag: bytes

    def to_json_obj(self) -> dict:
        return {
            "ephemeral_pub": "0x" + point_to_bytes(self.ephemeral_pub).hex(),
            "ciphertext": "0x" + self.ciphertext.hex(),
            "tag": "0x" + self.tag.hex(),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "WrappedKey":
        return cls(
            ephemeral_pub=point_from_bytes(bytes.fromhex(obj["ephemeral_pub"][2:])),
            ciphertext=bytes.fromhex(obj["ciphertext"][2:]),
            tag=bytes.fromhex(obj["tag"][2:]),
        )


def _require_client_key(client_pub: Point) -> None:
    if client_pub.infinity or not on_curve(client_pub):
        raise InvalidClientKey("client public key is not a curve point")


def _keystream(shared_x: bytes, length: int) -> bytes:
    blocks = []
    for counter in range((length + 31) // 32):
        blocks.append(keccak256(shared_x + counter.to_bytes(4, "big")))
    return b"".join(blocks)[:length]


def wrap_key(plaintext: bytes, client_pub: Point, entropy: bytes) -> WrappedKey:
    """Encrypt to client_pub: ephemeral ECDH, hash stream, hash tag."""
    _require_client_key(client_pub)
    e = hash_to_scalar(entropy)
    while e == 0:  # pragma: no cover - probability ~2**-256
        entropy = keccak256(entropy)
        e = hash_to_scalar(entropy)
    shared = scalar_mul(e, client_pub)
    shared_x = int_to_bytes32(shared.x)
    ciphertext = bytes(
        a ^ b for a, b in zip(plaintext, _keystream(shared_x, len(plaintext)))
    )
    tag = keccak256(shared_x + ciphertext)
    return WrappedKey(
        ephemeral_pub=scalar_mul(e, G), ciphertext=ciphertext, tag=tag
    )


def unwrap_key(wrapped: WrappedKey, client_secret: int) -> bytes:
    """Recover the plaintext; the tag is checked before anything decrypts."""
    shared = scalar_mul(client_secret, wrapped.ephemeral_pub)
    if shared.infinity:
        raise TagMismatch("unwrapping scalar does not fit this wrapped key")
    shared_x = int_to_bytes32(shared.x)
    if keccak256(shared_x + wrapped.ciphertext) != wrapped.tag:
        raise TagMismatch("authenticator check failed")
    stream = _keystream(shared_x, len(wrapped.ciphertext))
    return bytes(a ^ b for a, b in zip(wrapped.ciphertext, stream))


# ---------------------------------------------------------------------------
# Append-only issuance registry.


@dataclass(frozen=True)
class IssuanceRecord:
    sequence: int
    identity: Identity
    address: bytes
    public_key: Point  # stored so each record is auditable on its own
    cert: Certificate
    issued_at: float

    def to_json_obj(self) -> dict:
        return {
            "sequence": self.sequence,
            "id": self.identity.hex,
            "address": address_to_hex(self.address),
            "public_key": "0x" + point_to_bytes(self.public_key).hex(),
            "cert": "0x" + self.cert.to_bytes().hex(),
            "issued_at": self.issued_at,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "IssuanceRecord":
        return cls(
            sequence=int(obj["sequence"]),
            identity=Identity.from_hex(obj["id"]),
            address=parse_address(obj["address"]),
            public_key=point_from_bytes(bytes.fromhex(obj["public_key"][2:])),
            cert=Certificate.from_bytes(bytes.fromhex(obj["cert"][2:])),
            issued_at=float(obj["issued_at"]),
        )


class IssuanceLog:
    """Newline-delimited JSON log, fsynced per append, indexed in memory.

    Appends happen under a single writer lock which also assigns sequence
    numbers; reads serve from the in-memory snapshot rebuilt at startup.
    """

    def __init__(self, path: PathLike):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: list[IssuanceRecord] = []
        self._by_id: dict[bytes, list[int]] = {}
        if self.path.exists():
            for line in self.path.read_text().splitlines():
                if not line.strip():
                    continue
                record = IssuanceRecord.from_json_obj(json.loads(line))
                self._remember(record)

    def _remember(self, record: IssuanceRecord) -> None:
        self._records.append(record)
        self._by_id.setdefault(record.identity.data, []).append(len(self._records) - 1)

    def append(
        self,
        identity: Identity,
        address: bytes,
        public_key: Point,
        cert: Certificate,
        now: Optional[float] = None,
    ) -> IssuanceRecord:
        with self._lock:
            record = IssuanceRecord(
                sequence=self._records[-1].sequence + 1 if self._records else 1,
                identity=identity,
                address=address,
                public_key=public_key,
                cert=cert,
                issued_at=time.time() if now is None else now,
            )
            line = json.dumps(record.to_json_obj()) + "\n"
            try:
                with open(self.path, "a") as handle:
                    handle.write(line)
                    handle.flush()
                    os.fsync(handle.fileno())
            except OSError as exc:
                raise StorageFailure(f"cannot append to {self.path}: {exc}") from exc
            self._remember(record)
            return record

    def lookup(self, identity: Identity) -> list[IssuanceRecord]:
        with self._lock:
            return [self._records[i] for i in self._by_id.get(identity.data, [])]

    def records(self) -> list[IssuanceRecord]:
        with self._lock:
            return list(self._records)


def audit_log(log: IssuanceLog, kgc_address: bytes) -> list[dict]:
    """Re-verify every record; returns one finding per record."""
    findings = []
    previous_sequence = 0
    for record in log.records():
        problems = []
        if record.sequence <= previous_sequence:
            problems.append("sequence not strictly increasing")
        previous_sequence = record.sequence
        if address_of(record.public_key) != record.address:
            problems.append("address does not match stored public key")
        if not verify_certificate(
            kgc_address, record.identity, record.public_key, record.cert
        ):
            problems.append("certificate does not verify under the master address")
        findings.append(
            {
                "sequence": record.sequence,
                "id": record.identity.hex,
                "address": address_to_hex(record.address),
                "ok": not problems,
                "problems": problems,
            }
        )
    return findings


# ---------------------------------------------------------------------------
# The issuer.


class Kgc:
    def __init__(
        self,
        master: Optional[MasterKeypair],
        log: IssuanceLog,
        entropy_source: Callable[[int], bytes] = os.urandom,
    ):
        self._master = master
        self._log = log
        self._entropy = entropy_source

    @property
    def log(self) -> IssuanceLog:
        return self._log

    def _require_master(self) -> MasterKeypair:
        if self._master is None:
            raise Uninitialized("no master key loaded")
        return self._master

    def master_address(self) -> bytes:
        return self._require_master().address

    def issue(
        self, identity: Identity, client_pub: Point
    ) -> tuple[WrappedKey, IssuanceRecord]:
        """Derive, wrap, durably record, then return. If the record cannot
        be written the wrapped key is never released."""
        master = self._require_master()
        _require_client_key(client_pub)
        key = ibs_keyder(master, identity, self._entropy(32))
        wrapped = wrap_key(key.to_bytes(), client_pub, self._entropy(32))
        record = self._log.append(
            identity=identity,
            address=key.address,
            public_key=key.public_key,
            cert=key.cert,
        )
        return wrapped, record

    def lookup(self, identity: Identity) -> list[IssuanceRecord]:
        return self._log.lookup(identity)

    def audit(self) -> list[dict]:
        return audit_log(self._log, self.master_address())


# ---------------------------------------------------------------------------
# Configuration and the HTTP surface.

ENV_LISTEN = "IDSIG_KGC_LISTEN"
ENV_MASTER_KEY = "IDSIG_KGC_MASTER_KEY"
ENV_LOG = "IDSIG_KGC_LOG"


@dataclass(frozen=True)
class KgcConfig:
    master_key_path: Path
    log_path: Path
    host: str = "127.0.0.1"
    port: int = 8700

    @classmethod
    def load(
        cls,
        config_file: Optional[PathLike] = None,
        env: Optional[Mapping[str, str]] = None,
        **overrides,
    ) -> "KgcConfig":
        """Precedence: explicit overrides > environment > config file."""
        env = os.environ if env is None else env
        values: dict = {}
        if config_file is not None:
            file_obj = json.loads(Path(config_file).read_text())
            for key in ("master_key_path", "log_path", "host", "port"):
                if key in file_obj:
                    values[key] = file_obj[key]
        if ENV_LISTEN in env:
            host, _, port = env[ENV_LISTEN].rpartition(":")
            values["host"] = host or values.get("host", "127.0.0.1")
            values["port"] = int(port)
        if ENV_MASTER_KEY in env:
            values["master_key_path"] = env[ENV_MASTER_KEY]
        if ENV_LOG in env:
            values["log_path"] = env[ENV_LOG]
        values.update({k: v for k, v in overrides.items() if v is not None})
        missing = {"master_key_path", "log_path"} - set(values)
        if missing:
            raise IdsigError(f"missing KGC configuration: {sorted(missing)}")
        values["master_key_path"] = Path(values["master_key_path"])
        values["log_path"] = Path(values["log_path"])
        if "port" in values:
            values["port"] = int(values["port"])
        return cls(**values)


def load_kgc(config: KgcConfig) -> Kgc:
    from .keyfiles import load_signing_key

    master_key = load_signing_key(config.master_key_path, expect_kind="master")
    return Kgc(master=MasterKeypair(msk=master_key), log=IssuanceLog(config.log_path))


def create_app(kgc: Kgc):
    """FastAPI application exposing issuance, registry lookup and the
    master address. Error responses are {"error": code, "message": text}."""
    from fastapi import FastAPI
    from fastapi.exceptions import RequestValidationError
    from fastapi.responses import JSONResponse
    from pydantic import BaseModel

    app = FastAPI(title="idsig key issuance service", docs_url=None, redoc_url=None)

    def error_response(status: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(
            status_code=status, content={"error": code, "message": message}
        )

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request, exc):
        return error_response(400, "bad_request", str(exc.errors()))

    class IssueRequest(BaseModel):
        id: str
        client_pub: str

    @app.post("/v1/keys")
    async def issue_key(body: IssueRequest):
        try:
            identity = Identity.from_hex(body.id)
            client_pub = point_from_bytes(bytes.fromhex(body.client_pub.removeprefix("0x")))
        except IdentityLength as exc:
            return error_response(400, "identity_length", str(exc))
        except (ValueError, TypeError) as exc:
            return error_response(400, "bad_request", f"malformed request: {exc}")
        try:
            wrapped, record = kgc.issue(identity, client_pub)
        except InvalidClientKey as exc:
            return error_response(400, "invalid_client_key", str(exc))
        except StorageFailure as exc:
            return error_response(500, "storage_failure", str(exc))
        return {
            "wrapped_key": wrapped.to_json_obj(),
            "record": record.to_json_obj(),
        }

    @app.get("/v1/registry")
    async def registry(id: Optional[str] = None):
        if id is None:
            return error_response(400, "bad_request", "missing id query parameter")
        try:
            identity = Identity.from_hex(id)
        except (IdentityLength, ValueError) as exc:
            return error_response(400, "bad_request", f"malformed id: {exc}")
        return {"records": [r.to_json_obj() for r in kgc.lookup(identity)]}

    @app.get("/v1/kgc/address")
    async def master_address():
        try:
            return {"address": address_to_hex(kgc.master_address())}
        except Uninitialized as exc:
            return error_response(503, "uninitialized", str(exc))

    return app


def serve(config: KgcConfig) -> None:  # pragma: no cover - exercised manually
    import uvicorn

    uvicorn.run(create_app(load_kgc(config)), host=config.host, port=config.port)


# ---------------------------------------------------------------------------
# Client-side issuance: generate an unwrap keypair, call the service,
# unwrap and reconstruct the signing key.


def request_issue(
    base_url: str,
    identity: Identity,
    unwrap_secret: int,
    http_client=None,
) -> tuple[IbsSigningKey, IssuanceRecord]:
    import httpx

    client_pub = scalar_mul(unwrap_secret, G)
    payload = {
        "id": identity.hex,
        "client_pub": "0x" + point_to_bytes(client_pub).hex(),
    }
    close_after = False
    if http_client is None:
        http_client = httpx.Client(base_url=base_url, timeout=30.0)
        close_after = True
    try:
        response = http_client.post("/v1/keys", json=payload)
        if response.status_code != 200:
            raise IdsigError(f"issuance failed: {response.status_code} {response.text}")
        body = response.json()
        wrapped = WrappedKey.from_json_obj(body["wrapped_key"])
        record = IssuanceRecord.from_json_obj(body["record"])
    finally:
        if close_after:
            http_client.close()
    key = IbsSigningKey.from_bytes(unwrap_key(wrapped, unwrap_secret))
    if key.identity != identity or key.address != record.address:
        raise IdsigError("issued key does not match the issuance record")
    return key, record
