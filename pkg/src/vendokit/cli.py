"""vendokit command-line interface.

Subcommands: list, info, add, update, bump, manifest, dep-graph, audit,
bench-report, bench-run. Reports go to stdout, diagnostics to stderr.

Exit codes: 0 success, 2 environment/input error, 3 unknown module,
4 overwrite refusal, 5 fetch/integrity failure, 6 registry validation
failure, 7 audit failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import audit, benchcompare, depgraph, frontmatter, registry
from .semver import bump_version, compare_versions, format_version

EXIT_OK = 0
EXIT_ENV = 2
EXIT_UNKNOWN_MODULE = 3
EXIT_WOULD_OVERWRITE = 4
EXIT_FETCH = 5
EXIT_VALIDATION = 6
EXIT_AUDIT = 7

REGISTRY_ENV = "VENDOKIT_REGISTRY"

_TIER_ORDER = {t: i for i, t in enumerate(frontmatter.TIERS)}
_CATEGORY_ORDER = {c: i for i, c in enumerate(frontmatter.CATEGORIES)}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _resolve_registry(args) -> str:
    if getattr(args, "registry", None):
        return args.registry
    env = os.environ.get(REGISTRY_ENV)
    if env:
        return env
    if Path("manifest.json").is_file():
        return "."
    raise CliError(
        EXIT_ENV,
        "no registry source: pass --registry, set "
        f"{REGISTRY_ENV}, or run where manifest.json exists",
    )


def _load_registry(args) -> tuple[registry.Store, registry.Manifest]:
    source = _resolve_registry(args)
    store = registry.open_store(source)
    try:
        return store, registry.fetch_manifest(store)
    except registry.RegistryError as e:
        raise CliError(EXIT_ENV, f"cannot load manifest: {e}") from e


def _graph(manifest: registry.Manifest) -> depgraph.DepGraph:
    return depgraph.build_graph(
        {n: e.deps for n, e in manifest.modules.items()}
    )


def cmd_list(args) -> int:
    _, manifest = _load_registry(args)
    entries = sorted(
        manifest.modules.values(),
        key=lambda e: (_CATEGORY_ORDER[e.category], _TIER_ORDER[e.tier], e.name),
    )
    current = None
    for e in entries:
        if e.category != current:
            current = e.category
            print(f"[{e.category}]")
        print(f"  {e.name}  {format_version(e.version)}  {e.tier}")
    print(f"{len(entries)} modules")
    return EXIT_OK


def cmd_info(args) -> int:
    _, manifest = _load_registry(args)
    entry = manifest.modules.get(args.name)
    if entry is None:
        raise CliError(EXIT_UNKNOWN_MODULE, f"unknown module: {args.name}")
    transitive = len(closure_of(manifest, [args.name])) - 1
    print(f"name: {entry.name}")
    print(f"version: {format_version(entry.version)}")
    print(f"tier: {entry.tier}")
    print(f"category: {entry.category}")
    print(f"deps: {', '.join(entry.deps) if entry.deps else '(none)'}")
    print(f"content_hash: {entry.content_hash}")
    print(f"transitive deps: {transitive}")
    return EXIT_OK


def closure_of(manifest: registry.Manifest, names: list[str]) -> list[str]:
    graph = _graph(manifest)
    try:
        return depgraph.closure(graph, names)
    except depgraph.UnknownModule as e:
        raise CliError(EXIT_UNKNOWN_MODULE, f"unknown module: {e.args[0]}") from e


def cmd_add(args) -> int:
    store, manifest = _load_registry(args)
    for name in args.names:
        if name not in manifest.modules:
            raise CliError(EXIT_UNKNOWN_MODULE, f"unknown module: {name}")
    order = closure_of(manifest, args.names)
    target = Path(args.target)
    try:
        fetched = {
            name: registry.fetch_module(store, manifest.modules[name])
            for name in order
        }
    except registry.RegistryError as e:
        raise CliError(EXIT_FETCH, str(e)) from e
    conflicts = []
    skipped = []
    to_write = []
    for name in order:
        dest = target / Path(manifest.modules[name].path).name
        if dest.exists():
            if dest.read_text(encoding="utf-8") == fetched[name]:
                skipped.append(name)
                continue
            if not args.force:
                conflicts.append(str(dest))
                continue
        to_write.append((name, dest))
    if conflicts:
        raise CliError(
            EXIT_WOULD_OVERWRITE,
            "would overwrite locally differing files: " + ", ".join(conflicts),
        )
    target.mkdir(parents=True, exist_ok=True)
    for name, dest in to_write:
        dest.write_text(fetched[name], encoding="utf-8")
        print(f"wrote {dest.name}")
    for name in skipped:
        print(f"unchanged {name}")
    print(f"{len(to_write)} written, {len(skipped)} unchanged")
    return EXIT_OK


def _vendored_modules(target: Path, manifest: registry.Manifest) -> list[str]:
    names = []
    for path in sorted(target.iterdir()):
        if path.is_file() and path.stem in manifest.modules:
            try:
                frontmatter.extract_block(path.read_text(encoding="utf-8"))
            except (frontmatter.FrontmatterError, UnicodeDecodeError):
                continue
            names.append(path.stem)
    return names


def cmd_update(args) -> int:
    store, manifest = _load_registry(args)
    target = Path(args.target)
    if not target.is_dir():
        raise CliError(EXIT_ENV, f"target directory {target} does not exist")
    names = args.names or _vendored_modules(target, manifest)
    updated, skipped, unchanged = [], [], []
    for name in names:
        entry = manifest.modules.get(name)
        if entry is None:
            raise CliError(EXIT_UNKNOWN_MODULE, f"unknown module: {name}")
        dest = target / Path(entry.path).name
        if not dest.is_file():
            raise CliError(EXIT_ENV, f"no vendored copy of {name} in {target}")
        local = dest.read_text(encoding="utf-8")
        try:
            block = frontmatter.extract_block(local)
            local_version = frontmatter.parse_metadata(block, name).version
        except frontmatter.FrontmatterError as e:
            raise CliError(EXIT_VALIDATION, f"{dest}: {e}") from e
        status = registry.verify_local(local, entry)
        if status is registry.LocalStatus.CLEAN:
            unchanged.append(name)
            continue
        if (
            status is registry.LocalStatus.MODIFIED
            and compare_versions(local_version, entry.version) >= 0
            and not args.force
        ):
            print(f"warning: {name} is locally modified; skipped", file=sys.stderr)
            skipped.append(name)
            continue
        try:
            dest.write_text(
                registry.fetch_module(store, entry), encoding="utf-8"
            )
        except registry.RegistryError as e:
            raise CliError(EXIT_FETCH, str(e)) from e
        updated.append(name)
    print(
        f"updated: {', '.join(updated) or '(none)'}; "
        f"skipped: {', '.join(skipped) or '(none)'}; "
        f"unchanged: {', '.join(unchanged) or '(none)'}"
    )
    return EXIT_OK


def _working_tree(args) -> Path:
    source = _resolve_registry(args)
    if str(source).startswith(("http://", "https://")):
        raise CliError(EXIT_ENV, "this command needs a local registry tree")
    return Path(source)


def cmd_bump(args) -> int:
    root = _working_tree(args)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise CliError(EXIT_ENV, f"no manifest at {manifest_path}")
    try:
        manifest = registry.load_manifest(manifest_path.read_text(encoding="utf-8"))
    except registry.RegistryError as e:
        raise CliError(EXIT_ENV, f"cannot load manifest: {e}") from e
    part = "major" if args.major else "minor" if args.minor else "patch"
    names = args.names or sorted(manifest.modules)
    failures = []
    for name in names:
        entry = manifest.modules.get(name)
        if entry is None:
            raise CliError(EXIT_UNKNOWN_MODULE, f"unknown module: {name}")
        path = root / entry.path
        try:
            source = path.read_text(encoding="utf-8")
            if registry.content_hash(source) == entry.content_hash:
                continue
            block = frontmatter.extract_block(source)
            old = frontmatter.parse_metadata(block, name).version
            new = bump_version(old, part)
            path.write_text(
                frontmatter.replace_version(source, new), encoding="utf-8"
            )
            print(f"{name}: {format_version(old)} -> {format_version(new)}")
        except (frontmatter.FrontmatterError, OSError, UnicodeDecodeError) as e:
            failures.append(f"{path}: {e}")
    if failures:
        raise CliError(EXIT_VALIDATION, "; ".join(failures))
    return EXIT_OK


def cmd_manifest(args) -> int:
    root = _working_tree(args)
    try:
        manifest = registry.build_manifest(root)
    except (registry.RegistryError, depgraph.DependencyCycle) as e:
        raise CliError(EXIT_VALIDATION, str(e)) from e
    (root / "manifest.json").write_text(
        registry.serialize_manifest(manifest), encoding="utf-8"
    )
    print(f"{len(manifest.modules)} modules")
    return EXIT_OK


def cmd_depgraph(args) -> int:
    _, manifest = _load_registry(args)
    graph = _graph(manifest)
    labels = {
        n: f"{n}@{format_version(e.version)}" for n, e in manifest.modules.items()
    }
    sys.stdout.write(depgraph.to_dot(graph, labels))
    return EXIT_OK


def cmd_audit(args) -> int:
    try:
        index = audit.load_stdlib_index(args.stdlib_index)
    except audit.UnknownIndexLabel as e:
        raise CliError(EXIT_ENV, f"unknown stdlib index: {e.args[0]}") from e
    try:
        _, manifest = _load_registry(args)
        registry_names = set(manifest.modules)
    except CliError:
        registry_names = set()
    failed = False
    for file_arg in args.files:
        path = Path(file_arg)
        try:
            source = path.read_bytes().decode("utf-8", errors="replace")
        except OSError as e:
            raise CliError(EXIT_ENV, f"cannot read {path}: {e}") from e
        findings = audit.classify(
            audit.scan_imports(source), index, registry_names
        )
        report = audit.audit_report(findings)
        verdict = "pass" if report.passed else "FAIL"
        counts = " ".join(
            f"{c}={report.counts[c]}" for c in audit.CLASSIFICATIONS
        )
        print(f"{path}: {verdict} ({counts})")
        for f in report.offenders:
            print(f"{path}:{f.line_number}: third-party import: {f.statement}")
        failed = failed or not report.passed
    return EXIT_AUDIT if failed else EXIT_OK


def cmd_benchreport(args) -> int:
    path = Path(args.results)
    try:
        loaded = benchcompare.load_results(path.read_bytes())
    except OSError as e:
        raise CliError(EXIT_ENV, f"cannot read {path}: {e}") from e
    except benchcompare.BenchError as e:
        raise CliError(EXIT_ENV, str(e)) from e
    for name in loaded.skipped:
        print(f"warning: skipped record {name}", file=sys.stderr)
    try:
        pairs, warnings = benchcompare.pair_records(loaded.records)
    except benchcompare.BenchError as e:
        raise CliError(EXIT_ENV, str(e)) from e
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    verdicts = benchcompare.module_verdicts(pairs)
    fmt = "markdown" if args.format == "markdown" else "text"
    sys.stdout.write(benchcompare.render_report(verdicts, fmt))
    if args.figure:
        benchcompare.render_figure(verdicts, args.figure)
        print(f"figure written to {args.figure}", file=sys.stderr)
    return EXIT_OK


def cmd_benchrun(args) -> int:
    try:
        run = benchcompare.run_paired(
            args.subject,
            args.reference,
            min_rounds=args.min_rounds,
            target_seconds=args.target_seconds,
            timeout=args.timeout,
            group=args.group,
        )
    except benchcompare.BenchError as e:
        raise CliError(EXIT_ENV, str(e)) from e
    document = json.dumps(run.document, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(document, encoding="utf-8")
    else:
        sys.stdout.write(document)
    verdict = benchcompare.classify_ratio(run.pair.ratio)
    print(f"ratio={run.pair.ratio:.3f} verdict={verdict}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vendokit",
        description="Registry toolchain for single-file vendorable modules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--registry", help="registry source: local path or HTTP(S) base URL"
    )

    p = sub.add_parser("list", parents=[common], help="list available modules")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("info", parents=[common], help="show one module's metadata")
    p.add_argument("name")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser(
        "add", parents=[common], help="vendor modules and their dependencies"
    )
    p.add_argument("names", nargs="+")
    p.add_argument("--target", default=".", help="directory for vendored copies")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_add)

    p = sub.add_parser("update", parents=[common], help="refresh vendored copies")
    p.add_argument("names", nargs="*")
    p.add_argument("--target", default=".")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_update)

    p = sub.add_parser(
        "bump", parents=[common], help="bump versions of changed modules"
    )
    p.add_argument("names", nargs="*")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--minor", action="store_true")
    group.add_argument("--major", action="store_true")
    p.set_defaults(func=cmd_bump)

    p = sub.add_parser(
        "manifest", parents=[common], help="regenerate the registry manifest"
    )
    p.set_defaults(func=cmd_manifest)

    p = sub.add_parser(
        "dep-graph", parents=[common], help="emit the dependency DAG as DOT"
    )
    p.set_defaults(func=cmd_depgraph)

    p = sub.add_parser(
        "audit", parents=[common], help="check files for third-party imports"
    )
    p.add_argument("files", nargs="+")
    p.add_argument(
        "--stdlib-index",
        default=audit.DEFAULT_INDEX_LABEL,
        help="stdlib index: bundled version label or a file path",
    )
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser(
        "bench-report", help="classify paired benchmark results"
    )
    p.add_argument("results", help="path to a benchmark results document")
    p.add_argument("--format", choices=("text", "markdown"), default="text")
    p.add_argument("--figure", help="also render a ratio chart to this file")
    p.set_defaults(func=cmd_benchreport)

    p = sub.add_parser(
        "bench-run", help="time a subject command against a reference command"
    )
    p.add_argument("subject")
    p.add_argument("reference")
    p.add_argument("--min-rounds", type=int, default=5)
    p.add_argument("--target-seconds", type=float, default=1.0)
    p.add_argument("--timeout", type=float, default=120.0)
    p.add_argument("--group", default="paired/run")
    p.add_argument("-o", "--output", help="write the results document here")
    p.set_defaults(func=cmd_benchrun)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"vendokit: error: {e}", file=sys.stderr)
        return e.code


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
