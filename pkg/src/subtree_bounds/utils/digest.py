"""SHA-256 digests for structured reports."""

from typing import Iterable

from cryptography.hazmat.primitives import constant_time, hashes


def sha256_hex(data: bytes) -> str:
    """
    Hex SHA-256 of ``data``.

    Args:
        data: Bytes to hash

    Returns:
        64-character lowercase hex string
    """
    digest = hashes.Hash(hashes.SHA256())
    digest.update(data)
    return digest.finalize().hex()


def digest_lines(lines: Iterable[str]) -> str:
    """Digest of newline-joined report lines (UTF-8)."""
    return sha256_hex("\n".join(lines).encode("utf-8"))


def verify_digest(lines: Iterable[str], expected_hex: str) -> bool:
    """
    Check report lines against a digest recorded earlier.

    Returns:
        True if the digest matches, False otherwise
    """
    try:
        expected = bytes.fromhex(expected_hex)
    except ValueError:
        return False
    actual = bytes.fromhex(digest_lines(lines))
    return constant_time.bytes_eq(actual, expected)
