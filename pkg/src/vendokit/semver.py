"""Semantic version parsing, comparison, formatting, and bumping.

Implements the SemVer 2.0.0 grammar and precedence rules. Build metadata
is parsed and preserved but never participates in ordering.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class MalformedVersion(ValueError):
    """Raised when a version string violates the SemVer 2.0.0 grammar."""


_VERSION_RE = re.compile(
    r"^(0|[1-9]\d*)\.(0|[1-9]\d*)\.(0|[1-9]\d*)"
    r"(?:-((?:0|[1-9]\d*|\d*[a-zA-Z-][0-9a-zA-Z-]*)"
    r"(?:\.(?:0|[1-9]\d*|\d*[a-zA-Z-][0-9a-zA-Z-]*))*))?"
    r"(?:\+([0-9a-zA-Z-]+(?:\.[0-9a-zA-Z-]+)*))?$"
)

_NUMERIC_RE = re.compile(r"^\d+$")

BUMP_PARTS = ("major", "minor", "patch")


@dataclass(frozen=True)
class SemVer:
    """A parsed semantic version.

    Equality is structural (build metadata included); the ordering
    operators follow SemVer precedence and ignore build metadata.
    """

    major: int
    minor: int
    patch: int
    prerelease: tuple[str, ...] = field(default=())
    build: tuple[str, ...] = field(default=())

    def __str__(self) -> str:
        return format_version(self)

    def __lt__(self, other: "SemVer") -> bool:
        return compare_versions(self, other) < 0

    def __le__(self, other: "SemVer") -> bool:
        return compare_versions(self, other) <= 0

    def __gt__(self, other: "SemVer") -> bool:
        return compare_versions(self, other) > 0

    def __ge__(self, other: "SemVer") -> bool:
        return compare_versions(self, other) >= 0


def parse_version(text: str) -> SemVer:
    """Parse a SemVer 2.0.0 version string.

    Raises MalformedVersion for anything outside the grammar: missing
    components, negative or zero-padded numeric fields, empty identifiers.
    """
    if not text:
        raise MalformedVersion("empty version string")
    m = _VERSION_RE.match(text)
    if m is None:
        raise MalformedVersion(f"invalid version string: {text!r}")
    major, minor, patch = int(m.group(1)), int(m.group(2)), int(m.group(3))
    prerelease = tuple(m.group(4).split(".")) if m.group(4) else ()
    build = tuple(m.group(5).split(".")) if m.group(5) else ()
    return SemVer(major, minor, patch, prerelease, build)


def format_version(v: SemVer) -> str:
    """Render the canonical "MAJOR.MINOR.PATCH[-pre][+build]" string."""
    text = f"{v.major}.{v.minor}.{v.patch}"
    if v.prerelease:
        text += "-" + ".".join(v.prerelease)
    if v.build:
        text += "+" + ".".join(v.build)
    return text


def _prerelease_key(ident: str) -> tuple[int, int, str]:
    # Numeric identifiers order numerically and below alphanumerics.
    if _NUMERIC_RE.match(ident):
        return (0, int(ident), "")
    return (1, 0, ident)


def compare_versions(a: SemVer, b: SemVer) -> int:
    """Total order per SemVer 2.0.0 precedence: -1, 0, or 1.

    Build metadata never influences the result.
    """
    for x, y in ((a.major, b.major), (a.minor, b.minor), (a.patch, b.patch)):
        if x != y:
            return -1 if x < y else 1
    if a.prerelease == b.prerelease:
        return 0
    # A prerelease sorts below the corresponding release.
    if not a.prerelease:
        return 1
    if not b.prerelease:
        return -1
    for ia, ib in zip(a.prerelease, b.prerelease):
        ka, kb = _prerelease_key(ia), _prerelease_key(ib)
        if ka != kb:
            return -1 if ka < kb else 1
    if len(a.prerelease) != len(b.prerelease):
        return -1 if len(a.prerelease) < len(b.prerelease) else 1
    return 0


def bump_version(v: SemVer, part: str) -> SemVer:
    """Increment one component, zeroing lower ones and clearing
    prerelease/build."""
    if part == "major":
        return SemVer(v.major + 1, 0, 0)
    if part == "minor":
        return SemVer(v.major, v.minor + 1, 0)
    if part == "patch":
        return SemVer(v.major, v.minor, v.patch + 1)
    raise ValueError(f"unknown version part: {part!r}")
