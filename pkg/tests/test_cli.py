import json
from pathlib import Path

import pytest

from conftest import perf_results_document
from vendokit import registry
from vendokit.cli import main
from vendokit.frontmatter import CATEGORIES


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- list / info ------------------------------------------------------------

def test_list_groups_all_categories(registry_root, capsys):
    code, out, _ = run(capsys, "list", "--registry", str(registry_root))
    assert code == 0
    headers = [line for line in out.splitlines() if line.startswith("[")]
    assert headers == [f"[{c}]" for c in CATEGORIES]
    assert out.splitlines()[-1] == "44 modules"


def test_list_empty_registry(tmp_path, capsys):
    (tmp_path / "modules").mkdir()
    manifest = registry.build_manifest(tmp_path)
    (tmp_path / "manifest.json").write_text(registry.serialize_manifest(manifest))
    code, out, _ = run(capsys, "list", "--registry", str(tmp_path))
    assert code == 0
    assert out.strip() == "0 modules"


def test_list_without_registry_fails(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("VENDOKIT_REGISTRY", raising=False)
    code, _, err = run(capsys, "list")
    assert code == 2
    assert "registry" in err


def test_registry_env_var(registry_root, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("VENDOKIT_REGISTRY", str(registry_root))
    code, out, _ = run(capsys, "list")
    assert code == 0 and "44 modules" in out


def test_info_with_deps(registry_root, capsys):
    code, out, _ = run(capsys, "info", "sse", "--registry", str(registry_root))
    assert code == 0
    assert "version: 0.3.1" in out
    assert "deps: httpclient" in out
    assert "tier: subsystem" in out
    assert "transitive deps: 1" in out
    assert "content_hash:" in out


def test_info_dep_free(registry_root, capsys):
    code, out, _ = run(capsys, "info", "yaml", "--registry", str(registry_root))
    assert code == 0
    assert "deps: (none)" in out
    assert "transitive deps: 0" in out


def test_info_unknown(registry_root, capsys):
    code, _, err = run(capsys, "info", "nosuch", "--registry", str(registry_root))
    assert code == 3 and "nosuch" in err


# --- add --------------------------------------------------------------------

def test_add_dep_free_pair(registry_root, tmp_path, capsys):
    target = tmp_path / "proj"
    code, out, _ = run(
        capsys, "add", "yaml", "retry",
        "--registry", str(registry_root), "--target", str(target),
    )
    assert code == 0
    assert sorted(p.name for p in target.iterdir()) == ["retry.py", "yaml.py"]


def test_add_resolves_deps_dependency_first(registry_root, tmp_path, capsys):
    target = tmp_path / "proj"
    code, out, _ = run(
        capsys, "add", "sse",
        "--registry", str(registry_root), "--target", str(target),
    )
    assert code == 0
    writes = [l for l in out.splitlines() if l.startswith("wrote ")]
    assert writes == ["wrote httpclient.py", "wrote sse.py"]


def test_add_idempotent(registry_root, tmp_path, capsys):
    target = tmp_path / "proj"
    run(capsys, "add", "sse", "--registry", str(registry_root), "--target", str(target))
    code, out, _ = run(
        capsys, "add", "sse", "--registry", str(registry_root), "--target", str(target)
    )
    assert code == 0
    assert "0 written, 2 unchanged" in out


def test_add_refuses_overwrite_atomically(registry_root, tmp_path, capsys):
    target = tmp_path / "proj"
    target.mkdir()
    (target / "httpclient.py").write_text("locally edited\n")
    code, _, err = run(
        capsys, "add", "sse", "--registry", str(registry_root), "--target", str(target)
    )
    assert code == 4
    assert "httpclient.py" in err
    assert not (target / "sse.py").exists()  # nothing written


def test_add_force_overwrites(registry_root, tmp_path, capsys):
    target = tmp_path / "proj"
    target.mkdir()
    (target / "httpclient.py").write_text("locally edited\n")
    code, _, _ = run(
        capsys, "add", "sse", "--force",
        "--registry", str(registry_root), "--target", str(target),
    )
    assert code == 0
    assert "locally edited" not in (target / "httpclient.py").read_text()


def test_add_unknown_module(registry_root, tmp_path, capsys):
    code, _, _ = run(
        capsys, "add", "nosuch",
        "--registry", str(registry_root), "--target", str(tmp_path / "p"),
    )
    assert code == 3


def test_add_hash_mismatch(registry_root, tmp_path, capsys):
    # Corrupt the stored module after the manifest was generated.
    path = registry_root / "modules" / "yaml.py"
    path.write_text(path.read_text().replace('return "yaml"', "return None"))
    code, _, err = run(
        capsys, "add", "yaml",
        "--registry", str(registry_root), "--target", str(tmp_path / "p"),
    )
    assert code == 5 and "yaml" in err


# --- update -----------------------------------------------------------------

def vendored(registry_root, tmp_path, capsys, name="yaml"):
    target = tmp_path / "proj"
    run(capsys, "add", name, "--registry", str(registry_root), "--target", str(target))
    return target


def test_update_unchanged(registry_root, tmp_path, capsys):
    target = vendored(registry_root, tmp_path, capsys)
    code, out, _ = run(
        capsys, "update", "--registry", str(registry_root), "--target", str(target)
    )
    assert code == 0
    assert "unchanged: yaml" in out


def test_update_refetches_older_copy(registry_root, tmp_path, capsys):
    target = vendored(registry_root, tmp_path, capsys)
    # Upstream gains a new version with a body change.
    module = registry_root / "modules" / "yaml.py"
    newer = module.read_text().replace('return "yaml"', 'return "yaml2"')
    newer = newer.replace('"1.0.0"', '"1.1.0"')
    module.write_text(newer)
    run(capsys, "manifest", "--registry", str(registry_root))
    code, out, _ = run(
        capsys, "update", "--registry", str(registry_root), "--target", str(target)
    )
    assert code == 0
    assert "updated: yaml" in out
    assert 'return "yaml2"' in (target / "yaml.py").read_text()


def test_update_skips_locally_modified(registry_root, tmp_path, capsys):
    target = vendored(registry_root, tmp_path, capsys)
    local = target / "yaml.py"
    local.write_text(local.read_text() + "# local tweak\n")
    code, out, err = run(
        capsys, "update", "--registry", str(registry_root), "--target", str(target)
    )
    assert code == 0
    assert "skipped: yaml" in out
    assert "locally modified" in err
    assert "# local tweak" in local.read_text()


def test_update_force_overwrites_modified(registry_root, tmp_path, capsys):
    target = vendored(registry_root, tmp_path, capsys)
    local = target / "yaml.py"
    local.write_text(local.read_text() + "# local tweak\n")
    code, out, _ = run(
        capsys, "update", "--force",
        "--registry", str(registry_root), "--target", str(target),
    )
    assert code == 0
    assert "updated: yaml" in out
    assert "# local tweak" not in local.read_text()


# --- bump / manifest --------------------------------------------------------

def test_bump_only_changed_modules(registry_root, capsys):
    module = registry_root / "modules" / "yaml.py"
    module.write_text(module.read_text().replace('return "yaml"', 'return 1'))
    code, out, _ = run(capsys, "bump", "--registry", str(registry_root))
    assert code == 0
    assert out.strip() == "yaml: 1.0.0 -> 1.0.1"


def test_bump_minor_and_major(registry_root, capsys):
    module = registry_root / "modules" / "yaml.py"
    module.write_text(module.read_text().replace('return "yaml"', 'return 1'))
    code, out, _ = run(capsys, "bump", "--minor", "--registry", str(registry_root))
    assert code == 0 and "yaml: 1.0.0 -> 1.1.0" in out
    module.write_text(module.read_text().replace("return 1", "return 2"))
    code, out, _ = run(capsys, "bump", "--major", "--registry", str(registry_root))
    assert code == 0 and "yaml: 1.1.0 -> 2.0.0" in out


def test_bump_ignores_version_only_edit(registry_root, capsys):
    from vendokit.frontmatter import replace_version
    from vendokit.semver import parse_version

    module = registry_root / "modules" / "yaml.py"
    module.write_text(replace_version(module.read_text(), parse_version("1.0.5")))
    code, out, _ = run(capsys, "bump", "--registry", str(registry_root))
    assert code == 0 and out.strip() == ""


def test_bump_without_manifest(tmp_path, capsys):
    (tmp_path / "modules").mkdir()
    code, _, _ = run(capsys, "bump", "--registry", str(tmp_path))
    assert code == 2


def test_manifest_regeneration_deterministic(registry_root, capsys):
    before = (registry_root / "manifest.json").read_bytes()
    code, out, _ = run(capsys, "manifest", "--registry", str(registry_root))
    assert code == 0 and "44 modules" in out
    assert (registry_root / "manifest.json").read_bytes() == before


def test_manifest_reports_cycle(tmp_path, capsys):
    from conftest import module_source

    modules = tmp_path / "modules"
    modules.mkdir()
    (modules / "a.py").write_text(module_source("a", "simple", "text", deps=["b"]))
    (modules / "b.py").write_text(module_source("b", "simple", "text", deps=["a"]))
    code, _, err = run(capsys, "manifest", "--registry", str(tmp_path))
    assert code == 6
    assert "a" in err and "b" in err


def test_manifest_reports_parse_errors(tmp_path, capsys):
    (tmp_path / "modules").mkdir()
    (tmp_path / "modules" / "bad.py").write_text("x = 1\n")
    code, _, err = run(capsys, "manifest", "--registry", str(tmp_path))
    assert code == 6 and "bad.py" in err


# --- dep-graph --------------------------------------------------------------

def test_depgraph_output(registry_root, capsys):
    code, out, _ = run(capsys, "dep-graph", "--registry", str(registry_root))
    assert code == 0
    assert out.startswith("digraph deps {")
    assert '"sse" -> "httpclient";' in out
    assert '"sse" [label="sse@0.3.1"];' in out
    again, out2, _ = run(capsys, "dep-graph", "--registry", str(registry_root))
    assert out2 == out


# --- audit ------------------------------------------------------------------

def test_audit_pass_and_fail(registry_root, tmp_path, capsys):
    clean = tmp_path / "clean.py"
    clean.write_text("import json\nimport re\nimport httpclient\n")
    code, out, _ = run(
        capsys, "audit", str(clean), "--registry", str(registry_root)
    )
    assert code == 0 and "pass" in out

    dirty = tmp_path / "dirty.py"
    dirty.write_text("import json\nimport requests\n")
    code, out, _ = run(
        capsys, "audit", str(dirty), "--registry", str(registry_root)
    )
    assert code == 7
    assert "import requests" in out


def test_audit_without_registry_still_checks_stdlib(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("VENDOKIT_REGISTRY", raising=False)
    f = tmp_path / "f.py"
    f.write_text("import json\n")
    code, out, _ = run(capsys, "audit", str(f))
    assert code == 0


def test_audit_custom_index(tmp_path, capsys):
    index = tmp_path / "index.txt"
    index.write_text("onlythis\n")
    f = tmp_path / "f.py"
    f.write_text("import onlythis\n")
    code, _, _ = run(capsys, "audit", str(f), "--stdlib-index", str(index))
    assert code == 0
    f.write_text("import json\n")
    code, _, _ = run(capsys, "audit", str(f), "--stdlib-index", str(index))
    assert code == 7


def test_audit_unknown_index_label(tmp_path, capsys):
    f = tmp_path / "f.py"
    f.write_text("import json\n")
    code, _, _ = run(capsys, "audit", str(f), "--stdlib-index", "python0.0")
    assert code == 2


# --- bench-report / bench-run -----------------------------------------------

def test_bench_report(tmp_path, capsys):
    results = tmp_path / "benchmark-results.json"
    results.write_text(perf_results_document())
    code, out, _ = run(capsys, "bench-report", str(results))
    assert code == 0
    assert out.splitlines()[-1].startswith("faster=")


def test_bench_report_markdown_and_figure(tmp_path, capsys):
    results = tmp_path / "benchmark-results.json"
    results.write_text(perf_results_document())
    figure = tmp_path / "ratios.png"
    code, out, err = run(
        capsys, "bench-report", str(results),
        "--format", "markdown", "--figure", str(figure),
    )
    assert code == 0
    assert out.startswith("| module |")
    assert figure.stat().st_size > 0


def test_bench_report_empty(tmp_path, capsys):
    results = tmp_path / "empty.json"
    results.write_text('{"benchmarks": []}')
    code, _, _ = run(capsys, "bench-report", str(results))
    assert code == 2


def test_bench_run_parity(tmp_path, capsys):
    out_path = tmp_path / "results.json"
    code, _, err = run(
        capsys, "bench-run", "/bin/true", "/bin/true",
        "--target-seconds", "0.01", "-o", str(out_path),
    )
    assert code == 0
    assert "verdict=Parity" in err
    doc = json.loads(out_path.read_text())
    assert {b["role"] for b in doc["benchmarks"]} == {"subject", "reference"}


def test_bench_run_command_failure(capsys):
    code, _, err = run(
        capsys, "bench-run", "/bin/true", "/bin/false", "--target-seconds", "0.01"
    )
    assert code == 2
    assert "reference" in err
