"""Paired benchmark comparison: ingest subject/reference timing results,
compute speed ratios, classify into performance regimes, and render a
summary report. Also drives paired timing runs of external commands.

The speed ratio is reference mean time / subject mean time, so r > 1
means the subject is faster. Regimes: Faster (r > 2.0), Parity
(0.5 <= r <= 2.0, both boundaries inclusive), Slower (r < 0.5).
"""

from __future__ import annotations

import json
import shlex
import statistics
import subprocess
import time
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

FASTER = "Faster"
PARITY = "Parity"
SLOWER = "Slower"
MIXED = "Mixed"

VERDICT_ORDER = (FASTER, PARITY, SLOWER, MIXED)

PARITY_LOW = 0.5
PARITY_HIGH = 2.0

SUBJECT = "subject"
REFERENCE = "reference"

SUBJECT_TOKEN = "zerodep"
REFERENCE_TOKEN = "reference"


class BenchError(Exception):
    """Base class for benchmark comparison failures."""


class MalformedResults(BenchError):
    pass


class EmptyResults(BenchError):
    pass


class DuplicateRole(BenchError):
    pass


class NonPositiveRatio(BenchError):
    pass


class EmptyModule(BenchError):
    pass


class EmptySamples(BenchError):
    pass


class NonPositiveSample(BenchError):
    pass


class CommandFailed(BenchError):
    def __init__(self, side: str, returncode: int):
        self.side = side
        self.returncode = returncode
        super().__init__(f"{side} command failed with exit status {returncode}")


class BenchTimeout(BenchError):
    def __init__(self, side: str, limit: float):
        self.side = side
        super().__init__(f"{side} command exceeded the {limit:g} s wall cap")


@dataclass(frozen=True)
class SampleStats:
    mean: float
    stddev: float
    rounds: int
    ops_per_second: float


@dataclass(frozen=True)
class BenchmarkRecord:
    group: str
    name: str
    role: str
    stats: SampleStats
    module: str
    ref_label: str = ""


@dataclass(frozen=True)
class PairedResult:
    group: str
    module: str
    t_ref: float
    t_subject: float
    ratio: float
    ref_label: str = ""


@dataclass(frozen=True)
class ModuleVerdict:
    module: str
    verdict: str
    counts: dict[str, int]
    ratio_min: float
    ratio_max: float
    ref_label: str = ""


@dataclass(frozen=True)
class LoadedResults:
    records: tuple[BenchmarkRecord, ...]
    skipped: tuple[str, ...]


@dataclass(frozen=True)
class PairedRun:
    subject: SampleStats
    reference: SampleStats
    pair: PairedResult
    document: dict


def summarize_samples(samples: Sequence[float]) -> SampleStats:
    """Mean, sample standard deviation (n-1; zero for n=1), and ops/s."""
    if not samples:
        raise EmptySamples("no samples")
    for s in samples:
        if s <= 0:
            raise NonPositiveSample(f"sample {s!r} is not positive")
    mean = statistics.fmean(samples)
    stddev = statistics.stdev(samples) if len(samples) > 1 else 0.0
    return SampleStats(mean, stddev, len(samples), 1.0 / mean)


def _infer_role(name: str) -> str | None:
    if SUBJECT_TOKEN in name:
        return SUBJECT
    if REFERENCE_TOKEN in name:
        return REFERENCE
    return None


def load_results(document: Union[str, bytes, dict]) -> LoadedResults:
    """Parse a results document into benchmark records.

    Role comes from an explicit "role" field, else from the name tokens
    "zerodep"/"reference"; records with neither are skipped, not fatal.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise MalformedResults(f"invalid JSON: {e}") from e
    if not isinstance(document, dict) or not isinstance(
        document.get("benchmarks"), list
    ):
        raise MalformedResults('missing "benchmarks" array')
    benchmarks = document["benchmarks"]
    if not benchmarks:
        raise EmptyResults("no benchmark entries")
    records: list[BenchmarkRecord] = []
    skipped: list[str] = []
    for i, raw in enumerate(benchmarks):
        if not isinstance(raw, dict):
            raise MalformedResults(f"benchmark #{i} is not an object")
        group = raw.get("group")
        name = raw.get("name", "")
        if not isinstance(group, str) or not group:
            raise MalformedResults(f"benchmark #{i}: missing group")
        role = raw.get("role") or _infer_role(str(name))
        if role not in (SUBJECT, REFERENCE):
            skipped.append(str(name) or f"benchmark #{i}")
            continue
        stats_raw = raw.get("stats")
        if not isinstance(stats_raw, dict):
            raise MalformedResults(f"benchmark #{i}: missing stats")
        try:
            mean = float(stats_raw["mean"])
            stddev = float(stats_raw.get("stddev", 0.0))
            rounds = int(stats_raw.get("rounds", 1))
            ops = float(stats_raw.get("ops", 1.0 / mean))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
            raise MalformedResults(f"benchmark #{i}: bad stats: {e}") from e
        if mean <= 0:
            raise MalformedResults(f"benchmark #{i}: non-positive mean")
        module = group.split("/", 1)[0]
        ref_label = str(raw.get("reference", ""))
        records.append(
            BenchmarkRecord(
                group, str(name), role, SampleStats(mean, stddev, rounds, ops),
                module, ref_label,
            )
        )
    return LoadedResults(tuple(records), tuple(skipped))


def pair_records(
    records: Iterable[BenchmarkRecord],
) -> tuple[list[PairedResult], list[str]]:
    """Match subject/reference within each group; ratio = ref mean /
    subject mean. Unpaired groups are excluded and reported as warnings."""
    by_group: dict[str, dict[str, BenchmarkRecord]] = {}
    order: list[str] = []
    for r in records:
        slot = by_group.setdefault(r.group, {})
        if r.role in slot:
            raise DuplicateRole(f"group {r.group!r} has two {r.role} records")
        slot[r.role] = r
        if r.group not in order:
            order.append(r.group)
    pairs: list[PairedResult] = []
    warnings: list[str] = []
    for group in order:
        slot = by_group[group]
        if SUBJECT not in slot or REFERENCE not in slot:
            missing = REFERENCE if REFERENCE not in slot else SUBJECT
            warnings.append(f"group {group!r} has no {missing} record; excluded")
            continue
        subj = slot[SUBJECT]
        ref = slot[REFERENCE]
        label = ref.ref_label or subj.ref_label
        pairs.append(
            PairedResult(
                group, subj.module, ref.stats.mean, subj.stats.mean,
                ref.stats.mean / subj.stats.mean, label,
            )
        )
    return pairs, warnings


def classify_ratio(r: float) -> str:
    """Op-level regime for a speed ratio. Boundaries fall inside Parity."""
    if not r > 0:
        raise NonPositiveRatio(f"ratio must be positive, got {r!r}")
    if r > PARITY_HIGH:
        return FASTER
    if r < PARITY_LOW:
        return SLOWER
    return PARITY


def module_verdict(pairs: Sequence[PairedResult]) -> ModuleVerdict:
    """Aggregate one module's op-level classes: unanimity, else Mixed."""
    if not pairs:
        raise EmptyModule("no paired results for module")
    counts = Counter(classify_ratio(p.ratio) for p in pairs)
    verdict = next(iter(counts)) if len(counts) == 1 else MIXED
    ratios = [p.ratio for p in pairs]
    labels = sorted({p.ref_label for p in pairs if p.ref_label})
    return ModuleVerdict(
        module=pairs[0].module,
        verdict=verdict,
        counts={k: counts.get(k, 0) for k in (FASTER, PARITY, SLOWER)},
        ratio_min=min(ratios),
        ratio_max=max(ratios),
        ref_label=", ".join(labels),
    )


def module_verdicts(pairs: Iterable[PairedResult]) -> list[ModuleVerdict]:
    """Group paired results by module and aggregate each one."""
    by_module: dict[str, list[PairedResult]] = {}
    for p in pairs:
        by_module.setdefault(p.module, []).append(p)
    return [module_verdict(by_module[m]) for m in sorted(by_module)]


def _format_ratio(v: ModuleVerdict) -> str:
    lo, hi = v.ratio_min, v.ratio_max
    if f"{lo:.2f}" == f"{hi:.2f}":
        return f"{lo:.2f}x"
    return f"{lo:.2f}-{hi:.2f}x"


def render_report(verdicts: Iterable[ModuleVerdict], fmt: str = "text") -> str:
    """Deterministic summary table grouped by verdict, with a footer of
    per-verdict counts."""
    ordered: list[ModuleVerdict] = []
    tally = {v: 0 for v in VERDICT_ORDER}
    for verdict in VERDICT_ORDER:
        group = sorted(
            (v for v in verdicts if v.verdict == verdict), key=lambda v: v.module
        )
        tally[verdict] = len(group)
        ordered.extend(group)
    rows = [
        (v.module, v.ref_label or "-", _format_ratio(v), v.verdict) for v in ordered
    ]
    header = ("module", "reference", "ratio", "verdict")
    footer = (
        f"faster={tally[FASTER]} parity={tally[PARITY]} "
        f"slower={tally[SLOWER]} mixed={tally[MIXED]}"
    )
    if fmt == "markdown":
        lines = [
            "| " + " | ".join(header) + " |",
            "| " + " | ".join("---" for _ in header) + " |",
        ]
        lines += ["| " + " | ".join(row) + " |" for row in rows]
        lines += ["", footer]
        return "\n".join(lines) + "\n"
    widths = [
        max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
        for i in range(4)
    ]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(row)).rstrip())
    lines.append(footer)
    return "\n".join(lines) + "\n"


def render_figure(verdicts: Iterable[ModuleVerdict], path: str) -> None:
    """Render a horizontal bar chart of representative ratios to a file.

    Bars show the min-max ratio span per module on a log axis, colored by
    verdict, with guide lines at the 0.5 and 2.0 regime boundaries.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    colors = {FASTER: "#2a9d2a", PARITY: "#4878cf", SLOWER: "#d43d3d", MIXED: "#b8860b"}
    ordered = []
    for verdict in VERDICT_ORDER:
        ordered.extend(
            sorted((v for v in verdicts if v.verdict == verdict), key=lambda v: v.module)
        )
    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.3 * len(ordered) + 1)))
    for i, v in enumerate(reversed(ordered)):
        lo, hi = v.ratio_min, max(v.ratio_max, v.ratio_min * 1.0001)
        ax.barh(i, hi - lo, left=lo, color=colors[v.verdict], height=0.6)
    ax.set_yticks(range(len(ordered)))
    ax.set_yticklabels([v.module for v in reversed(ordered)], fontsize=7)
    ax.set_xscale("log")
    ax.axvline(PARITY_LOW, color="gray", linestyle="--", linewidth=0.8)
    ax.axvline(PARITY_HIGH, color="gray", linestyle="--", linewidth=0.8)
    ax.set_xlabel("speed ratio (reference / subject)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _as_argv(cmd: Union[str, Sequence[str]]) -> list[str]:
    if isinstance(cmd, str):
        return shlex.split(cmd)
    return list(cmd)


def _timed_round(argv: list[str], side: str) -> float:
    start = time.perf_counter()
    proc = subprocess.run(
        argv, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL
    )
    elapsed = time.perf_counter() - start
    if proc.returncode != 0:
        raise CommandFailed(side, proc.returncode)
    return elapsed


def run_paired(
    subject_cmd: Union[str, Sequence[str]],
    reference_cmd: Union[str, Sequence[str]],
    min_rounds: int = 5,
    target_seconds: float = 1.0,
    timeout: float = 120.0,
    group: str = "paired/run",
) -> PairedRun:
    """Time two external commands under a calibrated round schedule.

    Each side gets one discarded warmup, then the sides alternate timed
    rounds until both have at least `min_rounds` rounds and at least
    `target_seconds` of accumulated measured time. `timeout` caps the
    accumulated wall time per side.
    """
    subject_argv = _as_argv(subject_cmd)
    reference_argv = _as_argv(reference_cmd)
    _timed_round(subject_argv, SUBJECT)
    _timed_round(reference_argv, REFERENCE)
    samples: dict[str, list[float]] = {SUBJECT: [], REFERENCE: []}
    while True:
        for side, argv in ((SUBJECT, subject_argv), (REFERENCE, reference_argv)):
            samples[side].append(_timed_round(argv, side))
            if sum(samples[side]) > timeout:
                raise BenchTimeout(side, timeout)
        if all(
            len(s) >= min_rounds and sum(s) >= target_seconds
            for s in samples.values()
        ):
            break
    subject_stats = summarize_samples(samples[SUBJECT])
    reference_stats = summarize_samples(samples[REFERENCE])
    pair = PairedResult(
        group=group,
        module=group.split("/", 1)[0],
        t_ref=reference_stats.mean,
        t_subject=subject_stats.mean,
        ratio=reference_stats.mean / subject_stats.mean,
    )
    document = {
        "benchmarks": [
            {
                "group": group,
                "name": "test_zerodep",
                "role": SUBJECT,
                "stats": {
                    "mean": subject_stats.mean,
                    "stddev": subject_stats.stddev,
                    "rounds": subject_stats.rounds,
                    "ops": subject_stats.ops_per_second,
                },
            },
            {
                "group": group,
                "name": "test_reference",
                "role": REFERENCE,
                "stats": {
                    "mean": reference_stats.mean,
                    "stddev": reference_stats.stddev,
                    "rounds": reference_stats.rounds,
                    "ops": reference_stats.ops_per_second,
                },
            },
        ]
    }
    return PairedRun(subject_stats, reference_stats, pair, document)
