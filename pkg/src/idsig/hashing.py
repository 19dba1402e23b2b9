"""Keccak-256 and Ethereum-style address derivation.

This is original Keccak (pad byte 0x01), not FIPS-202 SHA-3 (0x06); the
two differ on every input. Implemented from scratch because the address
rule and the scalar hash both sit on the exact bit-level behaviour.
"""

from __future__ import annotations

from .curve import Point, Q, point_to_bytes
from .errors import InfinityPoint

_MASK64 = (1 << 64) - 1
_RATE = 136  # bytes; Keccak-256 uses capacity 512

_ROUND_CONSTANTS = (
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A,
    0x8000000080008000, 0x000000000000808B, 0x0000000080000001,
    0x8000000080008081, 0x8000000000008009, 0x000000000000008A,
    0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089,
    0x8000000000008003, 0x8000000000008002, 0x8000000000000080,
    0x000000000000800A, 0x800000008000000A, 0x8000000080008081,
    0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
)


def _rho_pi_tables():
    # Lane i = x + 5y. rho offsets follow the (t+1)(t+2)/2 walk; pi sends
    # (x, y) to (y, 2x+3y).
    rot = [0] * 25
    x, y = 1, 0
    for t in range(24):
        rot[x + 5 * y] = ((t + 1) * (t + 2) // 2) % 64
        x, y = y, (2 * x + 3 * y) % 5
    dest = [0] * 25
    for xx in range(5):
        for yy in range(5):
            dest[xx + 5 * yy] = yy + 5 * ((2 * xx + 3 * yy) % 5)
    return tuple(rot), tuple(dest)


_ROT, _PI = _rho_pi_tables()
# (lane, lane mod 5, rotation, destination) per lane; hoisted out of the
# permutation because this loop dominates every hash in the package
_RHO_PI_STEPS = tuple((i, i % 5, _ROT[i], _PI[i]) for i in range(25))


def _keccak_f(a: list) -> None:
    b = [0] * 25
    for rc in _ROUND_CONSTANTS:
        c0 = a[0] ^ a[5] ^ a[10] ^ a[15] ^ a[20]
        c1 = a[1] ^ a[6] ^ a[11] ^ a[16] ^ a[21]
        c2 = a[2] ^ a[7] ^ a[12] ^ a[17] ^ a[22]
        c3 = a[3] ^ a[8] ^ a[13] ^ a[18] ^ a[23]
        c4 = a[4] ^ a[9] ^ a[14] ^ a[19] ^ a[24]
        d = (
            c4 ^ ((c1 << 1 | c1 >> 63) & _MASK64),
            c0 ^ ((c2 << 1 | c2 >> 63) & _MASK64),
            c1 ^ ((c3 << 1 | c3 >> 63) & _MASK64),
            c2 ^ ((c4 << 1 | c4 >> 63) & _MASK64),
            c3 ^ ((c0 << 1 | c0 >> 63) & _MASK64),
        )
        for i, i5, off, dest in _RHO_PI_STEPS:
            lane = a[i] ^ d[i5]
            if off:
                lane = ((lane << off) | (lane >> (64 - off))) & _MASK64
            b[dest] = lane
        for y in range(0, 25, 5):
            b0, b1, b2, b3, b4 = b[y], b[y + 1], b[y + 2], b[y + 3], b[y + 4]
            a[y] = b0 ^ (~b1 & b2)
            a[y + 1] = b1 ^ (~b2 & b3)
            a[y + 2] = b2 ^ (~b3 & b4)
            a[y + 3] = b3 ^ (~b4 & b0)
            a[y + 4] = b4 ^ (~b0 & b1)
        a[0] ^= rc


def keccak256(data: bytes) -> bytes:
    """32-byte Keccak-256 digest of an arbitrary byte string."""
    padded = bytearray(data)
    pad_len = _RATE - (len(padded) % _RATE)
    padded += b"\x01" + b"\x00" * (pad_len - 1)
    padded[-1] |= 0x80

    state = [0] * 25
    from_bytes = int.from_bytes
    for block_start in range(0, len(padded), _RATE):
        block = padded[block_start:block_start + _RATE]
        for j in range(17):
            state[j] ^= from_bytes(block[8 * j:8 * j + 8], "little")
        _keccak_f(state)
    return b"".join(state[j].to_bytes(8, "little") for j in range(4))


def address_of(point: Point) -> bytes:
    """Rightmost 20 bytes of Keccak-256 over the 64-byte x||y encoding."""
    if point.infinity:
        raise InfinityPoint("infinity has no address")
    return keccak256(point_to_bytes(point))[12:]


def hash_to_scalar(data: bytes) -> int:
    """Keccak-256 of the input read as a big-endian integer, mod Q.

    Q is within 2**-128 of 2**256, so the reduction bias is negligible.
    """
    return int.from_bytes(keccak256(data), "big") % Q


def digest_to_scalar(digest: bytes) -> int:
    """Same reduction for callers already holding a 32-byte digest."""
    if len(digest) != 32:
        raise ValueError("digest must be exactly 32 bytes")
    return int.from_bytes(digest, "big") % Q


def address_to_hex(addr: bytes) -> str:
    """0x-prefixed lowercase rendering; the matching format everywhere."""
    if len(addr) != 20:
        raise ValueError("address must be exactly 20 bytes")
    return "0x" + addr.hex()


def parse_address(text: str) -> bytes:
    """Parse a hex address; case-insensitive, no checksum validation."""
    cleaned = text[2:] if text.lower().startswith("0x") else text
    if len(cleaned) != 40:
        raise ValueError("address must be 40 hex characters")
    return bytes.fromhex(cleaned.lower())


def address_to_checksum_hex(addr: bytes) -> str:
    """EIP-55 mixed-case rendering. Display only; never used for matching."""
    plain = addr.hex()
    digest = keccak256(plain.encode("ascii")).hex()
    chars = [
        c.upper() if c.isalpha() and int(digest[i], 16) >= 8 else c
        for i, c in enumerate(plain)
    ]
    return "0x" + "".join(chars)
