"""Comment-embedded metadata blocks at the top of managed source files.

A managed file opens (after an optional shebang and leading comments)
with a sentinel-delimited block::

    # /// zerodep
    # version = "0.3.1"
    # deps = ["httpclient"]
    # tier = "subsystem"
    # category = "serialization"
    # ///

Interior lines are ``key = value`` assignments in a minimal TOML subset:
double-quoted strings and arrays of double-quoted strings. The comment
prefix is configurable; ``#`` is the default profile.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .semver import SemVer, format_version, parse_version

DEFAULT_PREFIX = "#"
BLOCK_NAME = "zerodep"

TIERS = ("simple", "medium", "subsystem")
CATEGORIES = (
    "network",
    "protocol",
    "serialization",
    "validation",
    "text",
    "config",
    "terminal",
    "crypto",
    "image",
    "process",
    "storage",
    "devtools",
)

MODULE_NAME_RE = re.compile(r"^[a-z][a-z0-9_]*$")

_KEY_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_-]*)\s*=\s*(.*)$")


class FrontmatterError(ValueError):
    """Base class for frontmatter extraction/parsing failures."""


class NoFrontmatter(FrontmatterError):
    """No opening sentinel before the first non-comment, non-blank line."""


class UnterminatedBlock(FrontmatterError):
    """Opening sentinel without a closing sentinel."""


class MalformedAssignment(FrontmatterError):
    """Interior line does not match the ``key = value`` grammar."""


class MissingRequiredKey(FrontmatterError):
    """A required key (version, tier, category) is absent."""


class InvalidTier(FrontmatterError):
    """Tier value outside the taxonomy."""


class InvalidCategory(FrontmatterError):
    """Category value outside the taxonomy."""


class DuplicateKey(FrontmatterError):
    """The same key assigned twice within one block."""


class InvalidDeps(FrontmatterError):
    """Deps list with bad identifiers, duplicates, or a self-dependency."""


class InvalidModuleName(FrontmatterError):
    """Module identifier outside the allowed grammar."""


@dataclass(frozen=True)
class FrontmatterBlock:
    """The raw sentinel-delimited block, with 0-based line bounds."""

    start_line: int
    end_line: int
    raw_lines: tuple[str, ...]


@dataclass(frozen=True)
class ModuleMetadata:
    """Typed view of a parsed frontmatter block."""

    name: str
    version: SemVer
    deps: tuple[str, ...]
    tier: str
    category: str
    extra: tuple[tuple[str, str], ...] = field(default=())


def open_sentinel(prefix: str = DEFAULT_PREFIX) -> str:
    return f"{prefix} /// {BLOCK_NAME}"


def close_sentinel(prefix: str = DEFAULT_PREFIX) -> str:
    return f"{prefix} ///"


def extract_block(source: str, prefix: str = DEFAULT_PREFIX) -> FrontmatterBlock:
    """Locate the first frontmatter block in `source`.

    The opening sentinel must precede any non-comment, non-blank line;
    a shebang line and leading comments (e.g. an encoding declaration)
    may come first.
    """
    opening = open_sentinel(prefix)
    closing = close_sentinel(prefix)
    lines = source.splitlines()
    start = None
    for i, line in enumerate(lines):
        if line == opening:
            start = i
            break
        if line.strip() == "" or line.startswith(prefix):
            continue
        if i == 0 and line.startswith("#!"):
            continue
        raise NoFrontmatter("code precedes the frontmatter block")
    if start is None:
        raise NoFrontmatter("no frontmatter block found")
    for j in range(start + 1, len(lines)):
        line = lines[j]
        if line == closing:
            return FrontmatterBlock(start, j, tuple(lines[start : j + 1]))
        if not line.startswith(prefix):
            raise UnterminatedBlock(
                f"non-comment line {j + 1} inside unterminated block"
            )
    raise UnterminatedBlock("opening sentinel without closing sentinel")


def _parse_quoted(text: str) -> tuple[str, str]:
    """Parse a leading double-quoted string; return (value, rest)."""
    if not text.startswith('"'):
        raise MalformedAssignment(f"expected quoted string at: {text!r}")
    out = []
    i = 1
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text) and text[i + 1] in ('"', "\\"):
            out.append(text[i + 1])
            i += 2
            continue
        if c == '"':
            return "".join(out), text[i + 1 :]
        out.append(c)
        i += 1
    raise MalformedAssignment(f"unterminated string in: {text!r}")


def _parse_value(text: str):
    """Parse a value: a quoted string or an array of quoted strings."""
    text = text.strip()
    if text.startswith('"'):
        value, rest = _parse_quoted(text)
        if rest.strip():
            raise MalformedAssignment(f"trailing content after value: {rest!r}")
        return value
    if text.startswith("["):
        rest = text[1:].lstrip()
        items: list[str] = []
        if rest.startswith("]"):
            if rest[1:].strip():
                raise MalformedAssignment(f"trailing content after array: {rest!r}")
            return items
        while True:
            item, rest = _parse_quoted(rest)
            items.append(item)
            rest = rest.lstrip()
            if rest.startswith(","):
                rest = rest[1:].lstrip()
                continue
            if rest.startswith("]"):
                if rest[1:].strip():
                    raise MalformedAssignment(
                        f"trailing content after array: {rest!r}"
                    )
                return items
            raise MalformedAssignment(f"malformed array near: {rest!r}")
    raise MalformedAssignment(f"unsupported value syntax: {text!r}")


def _assignments(block: FrontmatterBlock, prefix: str):
    """Yield (key, raw_value_text) pairs from the block interior."""
    for line in block.raw_lines[1:-1]:
        body = line[len(prefix) :]
        if body.startswith(" "):
            body = body[1:]
        if not body.strip():
            continue
        m = _KEY_RE.match(body)
        if m is None:
            raise MalformedAssignment(f"not a key = value line: {line!r}")
        yield m.group(1), m.group(2)


def parse_metadata(
    block: FrontmatterBlock, module_name: str, prefix: str = DEFAULT_PREFIX
) -> ModuleMetadata:
    """Parse the block interior into typed metadata.

    Unknown keys are preserved verbatim, in source order, in `extra`.
    """
    if not MODULE_NAME_RE.match(module_name):
        raise InvalidModuleName(f"bad module identifier: {module_name!r}")
    seen: set[str] = set()
    version: SemVer | None = None
    deps: tuple[str, ...] = ()
    tier: str | None = None
    category: str | None = None
    extra: list[tuple[str, str]] = []
    for key, raw_value in _assignments(block, prefix):
        if key in seen:
            raise DuplicateKey(f"duplicate key: {key!r}")
        seen.add(key)
        if key == "version":
            value = _parse_value(raw_value)
            if not isinstance(value, str):
                raise MalformedAssignment("version must be a string")
            version = parse_version(value)
        elif key == "deps":
            value = _parse_value(raw_value)
            if not isinstance(value, list):
                raise MalformedAssignment("deps must be an array of strings")
            deps = _validate_deps(value, module_name)
        elif key == "tier":
            value = _parse_value(raw_value)
            if value not in TIERS:
                raise InvalidTier(f"unknown tier: {value!r}")
            tier = value
        elif key == "category":
            value = _parse_value(raw_value)
            if value not in CATEGORIES:
                raise InvalidCategory(f"unknown category: {value!r}")
            category = value
        else:
            extra.append((key, raw_value))
    if version is None:
        raise MissingRequiredKey("version")
    if tier is None:
        raise MissingRequiredKey("tier")
    if category is None:
        raise MissingRequiredKey("category")
    return ModuleMetadata(module_name, version, deps, tier, category, tuple(extra))


def _validate_deps(values: list[str], module_name: str) -> tuple[str, ...]:
    seen: set[str] = set()
    for dep in values:
        if not MODULE_NAME_RE.match(dep):
            raise InvalidDeps(f"bad dependency identifier: {dep!r}")
        if dep == module_name:
            raise InvalidDeps(f"module depends on itself: {dep!r}")
        if dep in seen:
            raise InvalidDeps(f"duplicate dependency: {dep!r}")
        seen.add(dep)
    return tuple(values)


def _rewrite_version_value(
    source: str, replacement: str, prefix: str = DEFAULT_PREFIX
) -> str:
    """Replace the quoted version value in place, touching nothing else."""
    block = extract_block(source, prefix)
    version_offset = None
    for offset, line in enumerate(block.raw_lines[1:-1], start=1):
        body = line[len(prefix) :]
        m = _KEY_RE.match(body[1:] if body.startswith(" ") else body)
        if m is not None and m.group(1) == "version":
            version_offset = offset
            break
    if version_offset is None:
        raise MissingRequiredKey("version")
    lines = source.splitlines(keepends=True)
    idx = block.start_line + version_offset
    line = lines[idx]
    eq = line.index("=")
    open_q = line.index('"', eq)
    close_q = line.index('"', open_q + 1)
    lines[idx] = line[: open_q + 1] + replacement + line[close_q:]
    return "".join(lines)


def replace_version(
    source: str, new_version: SemVer, prefix: str = DEFAULT_PREFIX
) -> str:
    """Rewrite only the version assignment line; every other byte is
    preserved."""
    return _rewrite_version_value(source, format_version(new_version), prefix)
