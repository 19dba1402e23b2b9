"""secp256k1 group and scalar-field arithmetic.

Plain-integer affine/Jacobian implementation. NOT constant time: timing
varies with operand values, so this module must not be used where a
side-channel adversary is part of the threat model. It exists to make the
whole pipeline self-contained and auditable.

Scalars are plain ints reduced mod Q; field coordinates are ints in [0, P).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import NonResidue, ZeroInverse

# Field modulus, group order, coefficients and base point (SEC2 v2, 2.4.1).
P = 2**256 - 2**32 - 977
Q = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
A = 0
B = 7
GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8


@dataclass(frozen=True)
class Point:
    """Affine curve point; ``Point()`` with no coordinates is infinity."""

    x: Optional[int] = None
    y: Optional[int] = None

    @property
    def infinity(self) -> bool:
        return self.x is None

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        if self.infinity:
            return "Point(infinity)"
        return f"Point(x={self.x:#x}, y={self.y:#x})"


INFINITY = Point()
G = Point(GX, GY)


@dataclass(frozen=True)
class CurveParams:
    p: int
    q: int
    a: int
    b: int
    g: Point


SECP256K1 = CurveParams(p=P, q=Q, a=A, b=B, g=G)


def on_curve(point: Point) -> bool:
    """True for infinity and for points satisfying y^2 = x^3 + 7 mod p."""
    if point.infinity:
        return True
    x, y = point.x, point.y
    if not (0 <= x < P and 0 <= y < P):
        return False
    return (y * y - x * x * x - B) % P == 0


def point_neg(point: Point) -> Point:
    if point.infinity:
        return INFINITY
    return Point(point.x, (-point.y) % P)


def scalar_inverse(k: int) -> int:
    """Multiplicative inverse mod the group order Q."""
    k %= Q
    if k == 0:
        raise ZeroInverse("0 has no inverse mod the group order")
    return pow(k, -1, Q)


# ---------------------------------------------------------------------------
# Jacobian internals. A point is (X, Y, Z) with x = X/Z^2, y = Y/Z^3;
# Z == 0 encodes infinity. Used so a scalar multiplication costs a single
# field inversion instead of one per group operation.

_JAC_INF = (0, 0, 0)


def _jac_from_affine(point: Point):
    if point.infinity:
        return _JAC_INF
    return (point.x, point.y, 1)


def _jac_to_affine(j) -> Point:
    X, Y, Z = j
    if Z == 0:
        return INFINITY
    zinv = pow(Z, -1, P)
    zinv2 = zinv * zinv % P
    return Point(X * zinv2 % P, Y * zinv2 * zinv % P)


def _jac_double(j):
    X, Y, Z = j
    if Z == 0 or Y == 0:
        return _JAC_INF
    ysq = Y * Y % P
    s = 4 * X * ysq % P
    m = 3 * X * X % P  # a == 0 so no a*Z^4 term
    x3 = (m * m - 2 * s) % P
    y3 = (m * (s - x3) - 8 * ysq * ysq) % P
    z3 = 2 * Y * Z % P
    return (x3, y3, z3)


def _jac_add(j1, j2):
    X1, Y1, Z1 = j1
    X2, Y2, Z2 = j2
    if Z1 == 0:
        return j2
    if Z2 == 0:
        return j1
    z1sq = Z1 * Z1 % P
    z2sq = Z2 * Z2 % P
    u1 = X1 * z2sq % P
    u2 = X2 * z1sq % P
    s1 = Y1 * z2sq * Z2 % P
    s2 = Y2 * z1sq * Z1 % P
    if u1 == u2:
        if s1 != s2:
            return _JAC_INF
        return _jac_double(j1)
    h = (u2 - u1) % P
    r = (s2 - s1) % P
    hsq = h * h % P
    hcu = hsq * h % P
    u1hsq = u1 * hsq % P
    x3 = (r * r - hcu - 2 * u1hsq) % P
    y3 = (r * (u1hsq - x3) - s1 * hcu) % P
    z3 = h * Z1 * Z2 % P
    return (x3, y3, z3)


def _jac_add_affine(j, ax: int, ay: int):
    """Mixed addition of a Jacobian point and an affine point."""
    X1, Y1, Z1 = j
    if Z1 == 0:
        return (ax, ay, 1)
    z1sq = Z1 * Z1 % P
    u2 = ax * z1sq % P
    s2 = ay * z1sq * Z1 % P
    if X1 == u2:
        if Y1 != s2:
            return _JAC_INF
        return _jac_double(j)
    h = (u2 - X1) % P
    r = (s2 - Y1) % P
    hsq = h * h % P
    hcu = hsq * h % P
    u1hsq = X1 * hsq % P
    x3 = (r * r - hcu - 2 * u1hsq) % P
    y3 = (r * (u1hsq - x3) - Y1 * hcu) % P
    z3 = h * Z1 % P
    return (x3, y3, z3)


# Fixed-window table for multiples of G: row i holds (w * 16^i) * G for
# w in 1..15. Built lazily; costs a few ms once per process.
_G_TABLE: Optional[list] = None


def _g_table() -> list:
    global _G_TABLE
    if _G_TABLE is None:
        table = []
        base = (GX, GY, 1)
        for _ in range(64):
            row = []
            acc = base
            for _ in range(15):
                row.append(_jac_to_affine(acc))
                acc = _jac_add(acc, base)
            table.append(row)
            for _ in range(4):
                base = _jac_double(base)
        _G_TABLE = table
    return _G_TABLE


def _mul_g(k: int):
    table = _g_table()
    acc = _JAC_INF
    i = 0
    while k:
        nib = k & 0xF
        if nib:
            p = table[i][nib - 1]
            acc = _jac_add_affine(acc, p.x, p.y)
        k >>= 4
        i += 1
    return acc


def scalar_mul(k: int, point: Point) -> Point:
    """k * point under the group law; 0 * point is infinity.

    k is reduced mod Q first, which is sound because every non-infinity
    point of this curve has order Q (cofactor 1).
    """
    k %= Q
    if k == 0 or point.infinity:
        return INFINITY
    if point.x == GX and point.y == GY:
        result = _jac_to_affine(_mul_g(k))
        assert on_curve(result)
        return result
    acc = _JAC_INF
    px, py = point.x, point.y
    for bit in bin(k)[2:]:
        acc = _jac_double(acc)
        if bit == "1":
            acc = _jac_add_affine(acc, px, py)
    result = _jac_to_affine(acc)
    assert on_curve(result)
    return result


def point_add(p: Point, q: Point) -> Point:
    """Group addition; handles doubling, inverse pairs and infinity."""
    if p.infinity:
        return q
    if q.infinity:
        return p
    result = _jac_to_affine(_jac_add(_jac_from_affine(p), _jac_from_affine(q)))
    assert on_curve(result)
    return result


# ---------------------------------------------------------------------------
# Decompression and the recovery flag.


def decompress(x: int, flag: int) -> Point:
    """The unique on-curve point with this x whose y has parity ``flag``.

    Raises NonResidue when x^3 + 7 is not a square mod P, i.e. no point
    exists at that x.
    """
    if not 0 <= x < P:
        raise ValueError("x out of field range")
    if flag not in (0, 1):
        raise ValueError("parity flag must be 0 or 1")
    rhs = (pow(x, 3, P) + B) % P
    y = pow(rhs, (P + 1) // 4, P)  # P % 4 == 3, so this is a square root
    if y * y % P != rhs:
        raise NonResidue(f"no curve point has x = {x:#x}")
    if y & 1 != flag:
        y = P - y
    return Point(x, y)


def y_parity(point: Point) -> int:
    """Recovery flag bit of a point: parity of its y-coordinate."""
    if point.infinity:
        raise ValueError("infinity has no parity")
    return point.y & 1


def flag_to_recovery_byte(flag: int) -> int:
    """Canonical external encoding of the flag bit: 27 or 28."""
    if flag not in (0, 1):
        raise ValueError("parity flag must be 0 or 1")
    return 27 + flag


def recovery_byte_to_flag(v: int) -> int:
    if v not in (27, 28):
        raise ValueError("recovery byte must be 27 or 28")
    return v - 27


# ---------------------------------------------------------------------------
# Serialization: scalars/coordinates as 32-byte big-endian, points as
# 64 bytes x||y or 33 bytes parity-prefix||x.


def int_to_bytes32(value: int) -> bytes:
    if not 0 <= value < 2**256:
        raise ValueError("value does not fit in 32 bytes")
    return value.to_bytes(32, "big")


def bytes_to_int(data: bytes) -> int:
    return int.from_bytes(data, "big")


def point_to_bytes(point: Point) -> bytes:
    """Uncompressed 64-byte x||y encoding (no prefix byte)."""
    if point.infinity:
        raise ValueError("infinity has no 64-byte encoding")
    return int_to_bytes32(point.x) + int_to_bytes32(point.y)


def point_from_bytes(data: bytes) -> Point:
    if len(data) != 64:
        raise ValueError("expected 64 bytes of x||y")
    point = Point(bytes_to_int(data[:32]), bytes_to_int(data[32:]))
    if not on_curve(point) or point.infinity:
        raise ValueError("encoded point is not on the curve")
    return point


def point_to_bytes_compressed(point: Point) -> bytes:
    """33-byte flag||x encoding; flag byte is 0x02 even-y, 0x03 odd-y."""
    if point.infinity:
        raise ValueError("infinity has no compressed encoding")
    return bytes([2 + (point.y & 1)]) + int_to_bytes32(point.x)


def point_from_bytes_compressed(data: bytes) -> Point:
    if len(data) != 33 or data[0] not in (2, 3):
        raise ValueError("expected 33 bytes of flag||x")
    return decompress(bytes_to_int(data[1:]), data[0] - 2)
