"""Batch analysis of a tree of Prolog packages.

Every immediate subdirectory of the corpus root is one package; files lying
directly in the root form the package ``"."``. Operators defined anywhere in a
package are collected first, then every file is analyzed on its own and the
per-file statistics are folded into one report.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import time
from collections import Counter
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import asdict, dataclass, field, replace
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Final, Literal, get_args

import termplotlib as tpl

from prolint import _quoting
from prolint.diagnostics import SYNTAX_ERROR
from prolint.dialect import DialectOptions
from prolint.lexer import LexError, ParseTimeout, Token, tokenize
from prolint.operators import OpDef, OperatorTable, OpError, default_table, scan_op_directives
from prolint.parser import CstNode, parse_program
from prolint.style import (
    OFF,
    RULE_OP_BREAK_MESSAGE,
    Check,
    IndentationClass,
    StyleOptions,
    check_style,
    indentation_class,
    rule_metrics,
    split_lines,
)

__all__ = [
    "CSV_FIELDS",
    "EXTENSIONS",
    "FEATURES",
    "HISTOGRAM_BINS",
    "REPORT_VERSION",
    "CorpusReport",
    "FeatureId",
    "FileStats",
    "Limits",
    "PackageStats",
    "aggregate",
    "analyze_file",
    "collect_operators",
    "detect_features",
    "discover_packages",
    "report_json",
    "report_text",
    "run_corpus",
    "stats_csv",
]

_logger = logging.getLogger(__name__)

FeatureId = Literal[
    "shebang",
    "digit_groups",
    "dicts",
    "unicode_character_escape",
    "missing_closing_backslash",
    "single_quote_char_constant",
    "zero_arguments_compound",
    "tab_in_quotes",
    "integer_exponential_notation",
]
FEATURES: Final[tuple[FeatureId, ...]] = get_args(FeatureId)

ParseStatus = Literal["yes", "no", "skipped"]
SkipReason = Literal["too_large", "too_long", "timeout"]

REPORT_VERSION: Final = 1
# Bins 0..24 and one overflow bin for 25 and more.
HISTOGRAM_BINS: Final = 26
EXTENSIONS: Final = (".pl", ".pro", ".prolog")
ROOT_PACKAGE: Final = "."

_QUOTED_KINDS = frozenset({"double_quoted", "back_quoted"})


@dataclass(frozen=True)
class Limits:
    """Bounds under which a corpus file is analyzed at all."""

    timeout_seconds: float = 10.0
    max_bytes: int = 1_048_576
    max_lines: int = 20_000
    long_line_limit: int = 80

    def __post_init__(self) -> None:
        """Reject limits that no file could meet."""
        if self.timeout_seconds <= 0:
            raise ValueError(f"timeout_seconds must be positive, got {self.timeout_seconds}")
        for name in ("max_bytes", "max_lines", "long_line_limit"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class FileStats:
    """What one file of the corpus looks like."""

    path: str
    package: str = ROOT_PACKAGE
    line_count: int = 0
    parsed: ParseStatus = "yes"
    skip_reason: SkipReason | None = None
    clause_count: int = 0
    rule_count: int = 0
    error_count: int = 0
    fact_only: bool = False
    max_subgoals: int = 0
    max_rule_lines: int = 0
    long_line_count: int = 0
    indentation_class: IndentationClass = "no_indentation"
    missing_space_after_comma_count: int = 0
    trailing_whitespace_line_count: int = 0
    missing_newline_after_rule_op_count: int = 0
    missing_newline_after_subgoal_count: int = 0
    missing_newline_after_clause_count: int = 0
    feature_counts: dict[str, int] = field(default_factory=dict)

    @property
    def analyzed(self) -> bool:
        """Whether the file was tokenized and parsed, successfully or not."""
        return self.parsed != "skipped"


@dataclass(frozen=True)
class PackageStats:
    """Totals of one package."""

    name: str
    files: int = 0
    parsed: int = 0
    failed: int = 0
    skipped: int = 0
    clauses: int = 0
    lines: int = 0


@dataclass(frozen=True)
class CorpusReport:
    """The aggregate of a set of FileStats."""

    files: list[FileStats]
    packages: list[PackageStats]
    histograms: dict[str, list[int]]
    indentation: dict[str, dict[str, float]]
    features: dict[str, dict[str, int]]
    totals: dict[str, int]
    parse_success_ratio: float
    limits: Limits | None = None
    version: int = REPORT_VERSION

    def to_dict(self) -> dict[str, Any]:
        """Return the report as plain data, the shape of the JSON document."""
        data = asdict(self)
        for stats in data["files"]:
            stats["feature_counts"] = dict(sorted(stats["feature_counts"].items()))
        return {
            "version": data.pop("version"),
            "limits": data.pop("limits"),
            **data,
        }


def _read_text(path: Path) -> str:
    return path.read_bytes().decode("utf-8")


def discover_packages(root: Path) -> dict[str, list[Path]]:
    """Group the Prolog files below `root` by package, in sorted order.

    Directories that cannot be listed are logged and left out.
    """

    def _unreadable(error: OSError) -> None:
        _logger.warning("skipping unreadable entry %s: %s", error.filename, error.strerror)

    packages: dict[str, list[Path]] = {}
    for directory, subdirs, files in os.walk(root, onerror=_unreadable):
        subdirs.sort()
        base = Path(directory)
        relative = base.relative_to(root)
        package = relative.parts[0] if relative.parts else ROOT_PACKAGE
        for name in sorted(files):
            if name.endswith(EXTENSIONS):
                packages.setdefault(package, []).append(base / name)
    return {name: sorted(paths) for name, paths in sorted(packages.items())}


def collect_operators(
    package_files: Iterable[Path],
    *,
    table: OperatorTable | None = None,
    dialect: DialectOptions | None = None,
) -> OperatorTable:
    """Fold the op/3 directives of every file of a package into one table.

    Files are visited in sorted path order. Only the tokens are scanned, so a
    file that does not parse still contributes its operators. When two files
    define the same operator differently the later one wins.
    """
    dialect = dialect or DialectOptions.for_profile("swi")
    if table is None:
        table = default_table(dialect.profile, dicts=dialect.dicts)
    defined: dict[tuple[str, str], tuple[OpDef, Path]] = {}
    for path in sorted(package_files):
        try:
            tokens = tokenize(_read_text(path), dialect)
        except OSError as exc:
            _logger.warning("cannot read %s: %s", path, exc.strerror)
            continue
        except UnicodeDecodeError as exc:
            _logger.warning("cannot scan %s for operators: not UTF-8: %s", path, exc.reason)
            continue
        except LexError as exc:
            _logger.warning("cannot scan %s for operators: %s", path, exc.message)
            continue
        for directive in scan_op_directives(tokens):
            try:
                table = directive.apply(table)
            except OpError as exc:
                _logger.warning("%s: ignoring op directive: %s", path, exc)
                continue
            for name in directive.names:
                op = OpDef(name, directive.priority, directive.specifier)  # type: ignore[arg-type]
                key = (name, "prefix" if op.kind == "prefix" else "infix_postfix")
                earlier = defined.get(key)
                if earlier is not None and earlier[0] != op and earlier[1] != path:
                    _logger.warning(
                        "operator %s redefined in %s (was %d %s in %s)",
                        name,
                        path,
                        earlier[0].priority,
                        earlier[0].specifier,
                        earlier[1],
                    )
                defined[key] = (op, path)
    return table


def _quoted_escapes(token: Token) -> list[_quoting.Escape]:
    text = token.text
    if token.kind in _QUOTED_KINDS or (token.kind == "name" and text.startswith("'")):
        scanned = _quoting.scan_quoted(text, 1, text[0])
        return scanned[1] if scanned is not None else []
    if token.kind == "char_code_constant" and text.startswith("\\", 2):
        return [_quoting.read_escape(text, 2)]
    return []


def _is_quoted(token: Token) -> bool:
    return token.kind in _QUOTED_KINDS or (token.kind == "name" and token.text.startswith("'"))


def _has_no_arguments(compound: CstNode) -> bool:
    arguments = compound.children[2]
    return isinstance(arguments, CstNode) and not arguments.children


def detect_features(
    tokens: Sequence[Token], cst: CstNode | None, dialect: DialectOptions
) -> dict[FeatureId, int]:
    """Count the constructs a file uses that ISO Prolog does not accept.

    `tokens` must come from a lexer accepting the constructs; `cst` is the
    parsed program, or None when it could not be built, in which case the
    features that need the tree are counted as zero.
    """
    counts: Counter[FeatureId] = Counter({feature: 0 for feature in FEATURES})
    for token in tokens:
        counts["shebang"] += sum(item.kind == "shebang" for item in token.layout_before)
        if token.kind == "integer" and "_" in token.text:
            counts["digit_groups"] += 1
        elif token.kind == "float" and "." not in token.text:
            counts["integer_exponential_notation"] += 1
        elif token.kind == "char_code_constant" and token.text == "0''":
            counts["single_quote_char_constant"] += 1
        if (_is_quoted(token) or token.kind == "char_code_constant") and "\t" in token.text:
            counts["tab_in_quotes"] += 1
        for escape in _quoted_escapes(token):
            if escape.kind == "unicode":
                counts["unicode_character_escape"] += 1
            elif escape.kind in ("octal", "hex") and not escape.closed:
                counts["missing_closing_backslash"] += 1
    if cst is not None:
        for node in cst.nodes():
            if node.label == "dict" and dialect.dicts:
                counts["dicts"] += 1
            elif node.label == "compound" and _has_no_arguments(node):
                counts["zero_arguments_compound"] += 1
    return dict(counts)


def _survey_options(limits: Limits) -> StyleOptions:
    return StyleOptions(
        indent=OFF,
        max_line_length=Check(limits.long_line_limit),
        max_subgoals=OFF,
        max_rule_lines=OFF,
        indent_between_repeat_cut=OFF,
    )


def analyze_file(  # noqa: PLR0913
    path: Path,
    table: OperatorTable,
    dialect: DialectOptions,
    limits: Limits,
    *,
    package: str = ROOT_PACKAGE,
    name: str | None = None,
    clock: Callable[[], float] = time.monotonic,
) -> FileStats:
    """Measure one file.

    Files over the byte or line limit are skipped before anything is parsed,
    and a file whose analysis outlives ``limits.timeout_seconds`` (measured
    with `clock`) is skipped without partial results. Failures never raise;
    they are recorded in the returned stats.
    """
    display = name or str(path)
    base = FileStats(path=display, package=package)
    try:
        if path.stat().st_size > limits.max_bytes:
            return replace(base, parsed="skipped", skip_reason="too_large")
        data = path.read_bytes()
    except OSError as exc:
        _logger.warning("cannot read %s: %s", path, exc.strerror)
        return replace(base, parsed="no")
    lines = split_lines(data.decode("utf-8", errors="replace"))
    base = replace(base, line_count=len(lines))
    if len(lines) > limits.max_lines:
        return replace(base, parsed="skipped", skip_reason="too_long")
    try:
        source = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        _logger.debug("%s: not UTF-8: %s", display, exc.reason)
        return replace(base, parsed="no", error_count=1)

    deadline = clock() + limits.timeout_seconds
    try:
        tokens = tokenize(source, dialect, deadline=deadline, clock=clock)
        outcome = parse_program(tokens, table, dialect, deadline=deadline, clock=clock)
    except LexError as exc:
        _logger.debug("%s: %s", display, exc.message)
        return replace(base, parsed="no", error_count=1)
    except ParseTimeout:
        _logger.warning("%s: analysis exceeded %ss", display, limits.timeout_seconds)
        return replace(base, parsed="skipped", skip_reason="timeout")

    diagnostics, _ = check_style(outcome.cst, lines, _survey_options(limits), file=display)
    found = Counter(
        "cov_2_7_op" if d.rule_id == "cov_2_7" and d.message == RULE_OP_BREAK_MESSAGE else d.rule_id
        for d in diagnostics
        if d.rule_id != SYNTAX_ERROR
    )
    metrics = rule_metrics(outcome.cst)
    rules = [m for m in metrics if m.kind == "rule"]
    return replace(
        base,
        parsed="no" if outcome.errors else "yes",
        clause_count=len(outcome.clauses),
        rule_count=len(rules),
        error_count=len(outcome.errors),
        fact_only=not outcome.errors and not rules and any(m.kind == "fact" for m in metrics),
        max_subgoals=max((m.subgoals for m in rules), default=0),
        max_rule_lines=max((m.lines for m in rules), default=0),
        long_line_count=found["cov_2_3"],
        indentation_class=indentation_class(tokens),
        missing_space_after_comma_count=found["cov_2_5"],
        trailing_whitespace_line_count=found["style.trailing_whitespace"],
        missing_newline_after_rule_op_count=found["cov_2_7_op"],
        missing_newline_after_subgoal_count=found["cov_2_7"],
        missing_newline_after_clause_count=found["cov_2_6"],
        feature_counts=dict(detect_features(tokens, outcome.cst, dialect)),
    )


def _histogram(values: Iterable[int]) -> list[int]:
    bins = [0] * HISTOGRAM_BINS
    for value in values:
        bins[min(value, HISTOGRAM_BINS - 1)] += 1
    return bins


def _packages(stats: Sequence[FileStats]) -> list[PackageStats]:
    grouped: dict[str, list[FileStats]] = {}
    for stat in stats:
        grouped.setdefault(stat.package, []).append(stat)
    return [
        PackageStats(
            name=name,
            files=len(files),
            parsed=sum(s.parsed == "yes" for s in files),
            failed=sum(s.parsed == "no" for s in files),
            skipped=sum(s.parsed == "skipped" for s in files),
            clauses=sum(s.clause_count for s in files),
            lines=sum(s.line_count for s in files if s.analyzed),
        )
        for name, files in sorted(grouped.items())
    ]


def _indentation(stats: Sequence[FileStats]) -> dict[str, dict[str, float]]:
    parsed = [s for s in stats if s.parsed == "yes"]
    counts = Counter(s.indentation_class for s in parsed)
    return {
        cls: {
            "files": counts[cls],
            "share": round(100 * counts[cls] / len(parsed), 2) if parsed else 0.0,
        }
        for cls in get_args(IndentationClass)
    }


def _features(stats: Sequence[FileStats]) -> dict[str, dict[str, int]]:
    packages = {s.package for s in stats}
    result: dict[str, dict[str, int]] = {}
    for feature in FEATURES:
        using = [s for s in stats if s.feature_counts.get(feature, 0) > 0]
        result[feature] = {
            "occurrences": sum(s.feature_counts[feature] for s in using),
            "files": len(using),
            "packages": len({s.package for s in using}),
            "of_packages": len(packages),
        }
    return result


_TOTALS: Final[Mapping[str, str]] = {
    "lines": "line_count",
    "long_lines": "long_line_count",
    "missing_space_after_comma": "missing_space_after_comma_count",
    "trailing_whitespace_lines": "trailing_whitespace_line_count",
    "missing_newline_after_rule_op": "missing_newline_after_rule_op_count",
    "missing_newline_after_subgoal": "missing_newline_after_subgoal_count",
    "missing_newline_after_clause": "missing_newline_after_clause_count",
    "clauses": "clause_count",
}


def _totals(stats: Sequence[FileStats]) -> dict[str, int]:
    analyzed = [s for s in stats if s.analyzed]
    totals = {key: sum(getattr(s, attr) for s in analyzed) for key, attr in _TOTALS.items()}
    totals.update(
        files=len(stats),
        parsed=sum(s.parsed == "yes" for s in stats),
        failed=sum(s.parsed == "no" for s in stats),
        skipped=sum(not s.analyzed for s in stats),
        skipped_too_large=sum(s.skip_reason == "too_large" for s in stats),
        skipped_too_long=sum(s.skip_reason == "too_long" for s in stats),
        skipped_timeout=sum(s.skip_reason == "timeout" for s in stats),
        files_with_clauses=sum(s.clause_count > 0 for s in analyzed),
        files_with_rules=sum(s.rule_count > 0 for s in analyzed),
        fact_only_files=sum(s.fact_only for s in analyzed),
        files_with_long_lines=sum(s.long_line_count > 0 for s in analyzed),
    )
    return totals


def aggregate(stats: Iterable[FileStats]) -> CorpusReport:
    """Fold per-file statistics into a report.

    Histograms cover analyzed files with at least one clause; indentation
    shares cover files that parsed completely. The result does not depend on
    the order of `stats`.
    """
    files = sorted(stats, key=lambda s: (s.package, s.path))
    measured = [s for s in files if s.analyzed and s.clause_count > 0]
    analyzed = [s for s in files if s.analyzed]
    parsed = sum(s.parsed == "yes" for s in analyzed)
    return CorpusReport(
        files=files,
        packages=_packages(files),
        histograms={
            "max_subgoals": _histogram(s.max_subgoals for s in measured),
            "max_rule_lines": _histogram(s.max_rule_lines for s in measured),
        },
        indentation=_indentation(files),
        features=_features(files),
        totals=_totals(files),
        parse_success_ratio=round(parsed / len(analyzed), 4) if analyzed else 0.0,
    )


@dataclass(frozen=True)
class _Task:
    path: Path
    name: str
    package: str
    table: OperatorTable
    dialect: DialectOptions
    limits: Limits
    clock: Callable[[], float]


def _run_task(task: _Task) -> FileStats:
    return analyze_file(
        task.path,
        task.table,
        task.dialect,
        task.limits,
        package=task.package,
        name=task.name,
        clock=task.clock,
    )


def _tasks(
    root: Path,
    table: OperatorTable,
    dialect: DialectOptions,
    limits: Limits,
    clock_for: Callable[[Path], Callable[[], float]],
) -> Iterator[_Task]:
    for package, files in discover_packages(root).items():
        package_table = collect_operators(files, table=table, dialect=dialect)
        for path in files:
            name = path.relative_to(root).as_posix()
            yield _Task(path, name, package, package_table, dialect, limits, clock_for(path))


def _monotonic(_path: Path) -> Callable[[], float]:
    return time.monotonic


def run_corpus(  # noqa: PLR0913
    root: Path,
    table: OperatorTable,
    dialect: DialectOptions,
    limits: Limits,
    *,
    jobs: int = 1,
    clock_for: Callable[[Path], Callable[[], float]] = _monotonic,
) -> CorpusReport:
    """Analyze every package below `root` and aggregate the results.

    The operator pre-pass runs package by package; the files are then
    analyzed by `jobs` worker processes. `clock_for` supplies the clock each
    file's deadline is measured with.
    """
    tasks = list(_tasks(root, table, dialect, limits, clock_for))
    _logger.debug("analyzing %d files with %d jobs", len(tasks), jobs)
    if jobs > 1 and len(tasks) > 1:
        with Pool(jobs) as pool:
            stats = list(pool.imap(_run_task, tasks))
    else:
        stats = [_run_task(task) for task in tasks]
    return replace(aggregate(stats), limits=limits)


def report_json(report: CorpusReport) -> str:
    """Render the report as a JSON document."""
    return json.dumps(report.to_dict(), indent=2) + "\n"


CSV_FIELDS: Final = (
    "path",
    "package",
    "line_count",
    "parsed",
    "skip_reason",
    "clause_count",
    "rule_count",
    "error_count",
    "fact_only",
    "max_subgoals",
    "max_rule_lines",
    "long_line_count",
    "indentation_class",
    "missing_space_after_comma_count",
    "trailing_whitespace_line_count",
    "missing_newline_after_rule_op_count",
    "missing_newline_after_subgoal_count",
    "missing_newline_after_clause_count",
    *FEATURES,
)


def stats_csv(stats: Iterable[FileStats]) -> str:
    """Render per-file statistics as CSV with a fixed header row."""
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for stat in stats:
        row = {key: value for key, value in asdict(stat).items() if key != "feature_counts"}
        row["skip_reason"] = stat.skip_reason or ""
        row["fact_only"] = "yes" if stat.fact_only else "no"
        row.update((feature, stat.feature_counts.get(feature, 0)) for feature in FEATURES)
        writer.writerow(row)
    return out.getvalue()


def _bars(title: str, values: Sequence[float], labels: Sequence[str]) -> list[str]:
    lines = [title]
    if not any(values):
        return [*lines, "  (no data)", ""]
    fig = tpl.figure()
    fig.barh(list(values), list(labels), force_ascii=True)
    return [*lines, fig.get_string(), ""]


def report_text(report: CorpusReport) -> str:
    """Render the report for a terminal, with bar charts for the histograms."""
    totals = report.totals
    lines = [
        f"files: {totals['files']} ({totals['parsed']} parsed, {totals['failed']} failed, "
        f"{totals['skipped']} skipped)",
        f"parse success: {100 * report.parse_success_ratio:.1f}%",
        f"lines: {totals['lines']}, {totals['long_lines']} over the limit "
        f"in {totals['files_with_long_lines']} files",
        f"files with rules: {totals['files_with_rules']}, "
        f"fact-only files: {totals['fact_only_files']}",
        f"missing space after argument comma: {totals['missing_space_after_comma']}",
        f"trailing whitespace lines: {totals['trailing_whitespace_lines']}",
        f"missing newline after ':-': {totals['missing_newline_after_rule_op']}, "
        f"after subgoal: {totals['missing_newline_after_subgoal']}, "
        f"after clause: {totals['missing_newline_after_clause']}",
        "",
    ]
    bins = [str(i) for i in range(HISTOGRAM_BINS - 1)] + [f"{HISTOGRAM_BINS - 1}+"]
    lines += _bars("maximal number of subgoals", report.histograms["max_subgoals"], bins)
    lines += _bars("maximal number of lines per rule", report.histograms["max_rule_lines"], bins)
    classes = list(report.indentation)
    shares = [report.indentation[cls]["share"] for cls in classes]
    lines += _bars("indentation (% of parsed files)", shares, classes)
    lines.append("features:")
    for feature, row in report.features.items():
        lines.append(
            f"  {feature}: {row['occurrences']} in {row['packages']} of "
            f"{row['of_packages']} packages"
        )
    return "\n".join(lines) + "\n"
