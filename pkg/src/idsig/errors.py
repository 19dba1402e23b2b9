"""Exception types shared across the package."""


class IdsigError(Exception):
    """Base class for all errors raised by this package."""


class WeakSeed(IdsigError):
    """Seed material is too short, degenerate, or fails the entropy guard."""


class NonResidue(IdsigError):
    """x**3 + 7 is not a quadratic residue; no curve point has this x."""


class ZeroInverse(IdsigError):
    """Attempted to invert zero in the scalar field."""


class InfinityPoint(IdsigError):
    """The point at infinity is not valid here (e.g. it has no address)."""


class InvalidSignature(IdsigError):
    """Signature is structurally invalid or recovery produced no key."""


class RetryExhausted(IdsigError):
    """Nonce derivation kept hitting degenerate values; retry budget spent."""


class IdentityLength(IdsigError):
    """Identity payload is not exactly 16 bytes (or too long to pad)."""


class InvalidClientKey(IdsigError):
    """Client-supplied public key is not a usable curve point."""


class StorageFailure(IdsigError):
    """Append-only log write could not be completed durably."""


class Exhausted(IdsigError):
    """Search hit its attempt budget without finding a match."""


class Uninitialized(IdsigError):
    """Service used before its master key was loaded."""


class TagMismatch(IdsigError):
    """Authenticator check failed; wrapped payload is not released."""


class KeyFileError(IdsigError):
    """Key file is missing, malformed, or has unsafe permissions."""
