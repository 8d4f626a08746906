"""Registry manifest: version-invariant content hashing, manifest
build/load/serialize, and module fetching from local or HTTP stores.

The content hash is SHA-256 over the file text after normalizing line
endings to LF and masking the frontmatter version value with
``@VERSION@``, so hashes survive version bumps and line-ending churn but
change on any other edit.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Union

from . import depgraph, frontmatter
from .semver import SemVer, format_version, parse_version

SCHEMA_VERSION = 1
VERSION_PLACEHOLDER = "@VERSION@"

_HASH_RE = re.compile(r"^[0-9a-f]{64}$")


class RegistryError(Exception):
    """Base class for registry failures."""


class ManifestBuildError(RegistryError):
    """Per-file parse errors collected during a registry scan."""

    def __init__(self, failures: list[tuple[str, Exception]]):
        self.failures = list(failures)
        detail = "; ".join(f"{path}: {err}" for path, err in self.failures)
        super().__init__(f"registry scan failed: {detail}")


class UnknownDependency(RegistryError):
    """A declared dep names no scanned module."""


class MalformedManifest(RegistryError):
    """Manifest document violates the schema or entry invariants."""


class UnsupportedSchemaVersion(RegistryError):
    """Manifest schema_version outside what this build understands."""


class NotFound(RegistryError):
    """Requested path is absent from the store."""


class TransportError(RegistryError):
    """Connection or I/O failure talking to the store."""


class HashMismatch(RegistryError):
    """Fetched bytes disagree with the manifest's content hash."""


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    version: SemVer
    content_hash: str
    deps: tuple[str, ...]
    tier: str
    category: str
    path: str


@dataclass(frozen=True)
class Manifest:
    modules: dict[str, ManifestEntry]
    schema_version: int = SCHEMA_VERSION

    def __contains__(self, name: str) -> bool:
        return name in self.modules


class LocalStatus(Enum):
    CLEAN = "clean"
    MODIFIED = "modified"
    VERSION_DRIFT = "version_drift"


def _normalize_endings(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n")


def content_hash(source: str, prefix: str = frontmatter.DEFAULT_PREFIX) -> str:
    """Version-invariant SHA-256 digest of a managed file."""
    text = _normalize_endings(source)
    masked = frontmatter._rewrite_version_value(text, VERSION_PLACEHOLDER, prefix)
    return hashlib.sha256(masked.encode("utf-8")).hexdigest()


def build_manifest(
    registry_root: Union[str, Path], prefix: str = frontmatter.DEFAULT_PREFIX
) -> Manifest:
    """Scan `<root>/modules/` and assemble a validated manifest."""
    root = Path(registry_root)
    modules_dir = root / "modules"
    if not modules_dir.is_dir():
        raise RegistryError(f"no modules directory under {root}")
    entries: dict[str, ManifestEntry] = {}
    failures: list[tuple[str, Exception]] = []
    for path in sorted(modules_dir.iterdir()):
        if not path.is_file() or path.name.startswith("."):
            continue
        name = path.stem
        try:
            source = path.read_text(encoding="utf-8")
            block = frontmatter.extract_block(source, prefix)
            meta = frontmatter.parse_metadata(block, name, prefix)
            digest = content_hash(source, prefix)
        except (frontmatter.FrontmatterError, UnicodeDecodeError, ValueError) as e:
            failures.append((str(path), e))
            continue
        entries[name] = ManifestEntry(
            name=name,
            version=meta.version,
            content_hash=digest,
            deps=meta.deps,
            tier=meta.tier,
            category=meta.category,
            path=f"modules/{path.name}",
        )
    if failures:
        raise ManifestBuildError(failures)
    for entry in entries.values():
        for dep in entry.deps:
            if dep not in entries:
                raise UnknownDependency(
                    f"{entry.name} depends on unknown module {dep!r}"
                )
    depgraph.build_graph({n: e.deps for n, e in entries.items()})
    return Manifest(modules=dict(sorted(entries.items())))


def serialize_manifest(manifest: Manifest) -> str:
    """Canonical manifest document: sorted keys, LF, trailing newline."""
    doc = {
        "schema_version": manifest.schema_version,
        "modules": {
            name: {
                "version": format_version(e.version),
                "content_hash": e.content_hash,
                "deps": list(e.deps),
                "tier": e.tier,
                "category": e.category,
                "path": e.path,
            }
            for name, e in manifest.modules.items()
        },
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _reject_duplicate_keys(pairs):
    seen = set()
    for key, _ in pairs:
        if key in seen:
            raise MalformedManifest(f"duplicate key: {key!r}")
        seen.add(key)
    return dict(pairs)


def load_manifest(document: Union[str, bytes]) -> Manifest:
    """Parse a manifest document, re-validating all entry invariants."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as e:
        raise MalformedManifest(f"invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise MalformedManifest("manifest root must be an object")
    schema = doc.get("schema_version")
    if schema != SCHEMA_VERSION:
        raise UnsupportedSchemaVersion(f"schema_version {schema!r}")
    modules = doc.get("modules")
    if not isinstance(modules, dict):
        raise MalformedManifest("missing modules object")
    entries: dict[str, ManifestEntry] = {}
    for name, raw in modules.items():
        if not frontmatter.MODULE_NAME_RE.match(name):
            raise MalformedManifest(f"bad module name: {name!r}")
        if not isinstance(raw, dict):
            raise MalformedManifest(f"entry for {name!r} must be an object")
        try:
            version = parse_version(raw["version"])
            digest = raw["content_hash"]
            deps = tuple(raw["deps"])
            tier = raw["tier"]
            category = raw["category"]
            path = raw["path"]
        except (KeyError, TypeError) as e:
            raise MalformedManifest(f"entry for {name!r}: {e}") from e
        except ValueError as e:
            raise MalformedManifest(f"entry for {name!r}: {e}") from e
        if not isinstance(digest, str) or not _HASH_RE.match(digest):
            raise MalformedManifest(f"entry for {name!r}: bad content_hash")
        if tier not in frontmatter.TIERS:
            raise MalformedManifest(f"entry for {name!r}: bad tier {tier!r}")
        if category not in frontmatter.CATEGORIES:
            raise MalformedManifest(
                f"entry for {name!r}: bad category {category!r}"
            )
        if not isinstance(path, str) or not path:
            raise MalformedManifest(f"entry for {name!r}: bad path")
        entries[name] = ManifestEntry(name, version, digest, deps, tier, category, path)
    for entry in entries.values():
        for dep in entry.deps:
            if dep not in entries:
                raise MalformedManifest(
                    f"{entry.name} depends on unknown module {dep!r}"
                )
    return Manifest(modules=dict(sorted(entries.items())), schema_version=schema)


class LocalStore:
    """Registry store backed by a local directory."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    def get(self, rel_path: str) -> bytes:
        path = self.root / rel_path
        if not path.is_file():
            raise NotFound(rel_path)
        try:
            return path.read_bytes()
        except OSError as e:
            raise TransportError(str(e)) from e


class HttpStore:
    """Registry store behind an HTTP(S) base URL.

    Transient failures (connection errors, timeouts) are retried twice
    with a fixed delay; HTTP 4xx responses are never retried.
    """

    def __init__(
        self,
        base_url: str,
        retries: int = 2,
        retry_delay: float = 0.5,
        timeout: float = 10.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.retries = retries
        self.retry_delay = retry_delay
        self.timeout = timeout

    def get(self, rel_path: str) -> bytes:
        url = f"{self.base_url}/{rel_path}"
        attempts = self.retries + 1
        last: Exception | None = None
        for attempt in range(attempts):
            try:
                with urllib.request.urlopen(url, timeout=self.timeout) as resp:
                    return resp.read()
            except urllib.error.HTTPError as e:
                if e.code == 404:
                    raise NotFound(rel_path) from e
                raise TransportError(f"HTTP {e.code} for {url}") from e
            except (urllib.error.URLError, TimeoutError, ConnectionError, OSError) as e:
                last = e
                if attempt + 1 < attempts:
                    time.sleep(self.retry_delay)
        raise TransportError(f"failed after {attempts} attempts: {last}")


Store = Union[LocalStore, HttpStore]


def open_store(source: Union[str, Path]) -> Store:
    text = str(source)
    if text.startswith("http://") or text.startswith("https://"):
        return HttpStore(text)
    return LocalStore(source)


def fetch_manifest(store: Store) -> Manifest:
    return load_manifest(store.get("manifest.json"))


def fetch_module(
    store: Store, entry: ManifestEntry, prefix: str = frontmatter.DEFAULT_PREFIX
) -> str:
    """Fetch a module file and verify its content hash before returning."""
    data = store.get(entry.path)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise HashMismatch(f"{entry.name}: payload is not valid UTF-8") from e
    try:
        digest = content_hash(text, prefix)
    except frontmatter.FrontmatterError as e:
        raise HashMismatch(f"{entry.name}: payload has no frontmatter") from e
    if digest != entry.content_hash:
        raise HashMismatch(
            f"{entry.name}: expected {entry.content_hash}, got {digest}"
        )
    return text


def verify_local(
    file_text: str,
    entry: ManifestEntry,
    prefix: str = frontmatter.DEFAULT_PREFIX,
) -> LocalStatus:
    """Compare a vendored copy against its manifest entry."""
    if content_hash(file_text, prefix) != entry.content_hash:
        return LocalStatus.MODIFIED
    block = frontmatter.extract_block(file_text, prefix)
    meta = frontmatter.parse_metadata(block, entry.name, prefix)
    if meta.version != entry.version:
        return LocalStatus.VERSION_DRIFT
    return LocalStatus.CLEAN
