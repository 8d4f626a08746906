"""Static import audit: find import statements in a source file and
classify each root name as stdlib, registry, local, or third-party.

The scanner is line-based with a best-effort triple-quote state machine;
it never fails on arbitrary input. Classification precedence is
local > stdlib > registry > third_party.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

from .registry import Manifest

STDLIB = "stdlib"
REGISTRY = "registry"
LOCAL = "local"
THIRD_PARTY = "third_party"

CLASSIFICATIONS = (STDLIB, REGISTRY, LOCAL, THIRD_PARTY)

DEFAULT_INDEX_LABEL = "python3.12"

_IMPORT_RE = re.compile(r"^\s*import\s+(.+)$")
_FROM_RE = re.compile(r"^\s*from\s+(\.+[\w.]*|[\w.]+)\s+import\b")
_NAME_RE = re.compile(r"^[A-Za-z_][\w.]*$")


class UnknownIndexLabel(ValueError):
    """No bundled stdlib index matches the requested label."""


@dataclass(frozen=True)
class ImportFinding:
    line_number: int
    statement: str
    root_name: str
    classification: Optional[str] = None


@dataclass(frozen=True)
class StdlibIndex:
    language_version_label: str
    names: frozenset[str]


@dataclass(frozen=True)
class AuditReport:
    counts: dict[str, int]
    offenders: tuple[ImportFinding, ...]
    passed: bool


def load_stdlib_index(label_or_path: str = DEFAULT_INDEX_LABEL) -> StdlibIndex:
    """Load a stdlib index from a file path or a bundled version label.

    Index files carry one module name per line; ``#`` starts a comment.
    """
    path = Path(label_or_path)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
        label = path.stem
    else:
        resource = resources.files("vendokit").joinpath(
            f"data/stdlib_{label_or_path}.txt"
        )
        if not resource.is_file():
            raise UnknownIndexLabel(label_or_path)
        text = resource.read_text(encoding="utf-8")
        label = label_or_path
    names = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            names.add(line)
    return StdlibIndex(label, frozenset(names))


def _import_targets(clause: str) -> list[str]:
    """Root names from the clause of an ``import a.b as c, d`` line."""
    roots = []
    for part in clause.split(","):
        token = part.strip().split()
        if not token:
            continue
        name = token[0]
        if _NAME_RE.match(name):
            roots.append(name.split(".")[0])
    return roots


def scan_imports(source: str) -> list[ImportFinding]:
    """Find import statements, excluding lines inside triple-quoted
    strings (best-effort line-state scan). Classification is left unset."""
    findings: list[ImportFinding] = []
    delim: Optional[str] = None
    for lineno, line in enumerate(source.splitlines(), start=1):
        if delim is None:
            m = _FROM_RE.match(line)
            if m is not None:
                module = m.group(1)
                root = "." if module.startswith(".") else module.split(".")[0]
                findings.append(ImportFinding(lineno, line.rstrip(), root))
            else:
                m = _IMPORT_RE.match(line)
                if m is not None:
                    for root in _import_targets(m.group(1)):
                        findings.append(ImportFinding(lineno, line.rstrip(), root))
        delim = _advance_string_state(line, delim)
    return findings


def _advance_string_state(line: str, delim: Optional[str]) -> Optional[str]:
    pos = 0
    while True:
        if delim is not None:
            idx = line.find(delim, pos)
            if idx < 0:
                return delim
            pos = idx + 3
            delim = None
        else:
            candidates = [
                (line.find(q, pos), q) for q in ('"""', "'''") if line.find(q, pos) >= 0
            ]
            if not candidates:
                return None
            idx, q = min(candidates)
            delim = q
            pos = idx + 3


def classify(
    findings: Iterable[ImportFinding],
    stdlib: StdlibIndex,
    manifest: Union[Manifest, Iterable[str], None] = None,
) -> list[ImportFinding]:
    """Assign each finding its classification.

    Precedence: relative import -> local; stdlib index -> stdlib;
    registry manifest -> registry; anything else -> third_party.
    """
    if manifest is None:
        registry_names: set[str] = set()
    elif isinstance(manifest, Manifest):
        registry_names = set(manifest.modules)
    else:
        registry_names = set(manifest)
    out = []
    for f in findings:
        if f.root_name == ".":
            cls = LOCAL
        elif f.root_name in stdlib.names:
            cls = STDLIB
        elif f.root_name in registry_names:
            cls = REGISTRY
        else:
            cls = THIRD_PARTY
        out.append(replace(f, classification=cls))
    return out


def audit_report(findings: Iterable[ImportFinding]) -> AuditReport:
    """Summarize classified findings; passes iff nothing is third-party."""
    counts = {c: 0 for c in CLASSIFICATIONS}
    offenders = []
    for f in findings:
        counts[f.classification] += 1
        if f.classification == THIRD_PARTY:
            offenders.append(f)
    return AuditReport(counts, tuple(offenders), passed=not offenders)
