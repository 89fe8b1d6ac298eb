"""Utility functions and helpers."""

from .config import Config, load_config
from .digest import digest_lines, sha256_hex, verify_digest
from .extended import ext_le, ext_slack, ext_sum, format_ext

__all__ = [
    "Config",
    "load_config",
    "digest_lines",
    "sha256_hex",
    "verify_digest",
    "ext_le",
    "ext_slack",
    "ext_sum",
    "format_ext",
]
