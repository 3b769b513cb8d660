"""Shared exception types and enumeration caps.

Caps guard every potentially explosive enumeration (full groups, closures,
product spaces, Cayley balls). Defaults can be overridden with the
ERGLAB_CAPS environment variable, a comma-separated list such as

    ERGLAB_CAPS="full_group=5000,product=200000"
"""

from __future__ import annotations

import os


class ValidationError(ValueError):
    """Malformed input: broken bijection, bad pairing, schema violation."""


class CapExceeded(RuntimeError):
    """An enumeration or materialization guard tripped."""

    def __init__(self, cap_name: str, needed: int, cap: int):
        self.cap_name = cap_name
        self.needed = needed
        self.cap = cap
        super().__init__(
            f"cap '{cap_name}' exceeded: need {needed}, cap is {cap}"
        )


class CheckFailed(AssertionError):
    """An exact identity that must hold was violated. This is a bug signal."""


DEFAULT_CAPS = {
    "full_group": 20000,
    "closure": 20000,
    "product": 10**6,
    "ball": 4 * 10**6,
}


def get_cap(name: str, override: int | None = None) -> int:
    """Resolve a cap: explicit argument wins, then ERGLAB_CAPS, then default."""
    if override is not None:
        return int(override)
    raw = os.environ.get("ERGLAB_CAPS", "")
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        key, _, value = item.partition("=")
        if key.strip() == name:
            try:
                return int(value)
            except ValueError as exc:
                raise ValidationError(
                    f"ERGLAB_CAPS entry {item!r} is not an integer"
                ) from exc
    if name not in DEFAULT_CAPS:
        raise ValidationError(f"unknown cap name {name!r}")
    return DEFAULT_CAPS[name]
