"""The `prolint` entrypoint."""

import argparse
import difflib
import json
import logging
import sys
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Any, NoReturn

from prolint import __version__
from prolint.config import Config, ConfigError, emit_config, resolve_config
from prolint.corpus import EXTENSIONS, report_json, report_text, run_corpus, stats_csv
from prolint.diagnostics import Diagnostic, sort_diagnostics, syntax_diagnostic
from prolint.formatter import SerializeError, format_source
from prolint.lexer import LexError, PrologSyntaxError, Token, tokenize
from prolint.operators import OperatorTable
from prolint.parser import CstNode, ParseOutcome, parse_program
from prolint.quality import check_quality
from prolint.style import StyleOptions, check_style, merge_inferred, split_lines
from prolint.terms import cst_to_ast, dump, render_term

logging.basicConfig(format="%(message)s", datefmt="[%X]", handlers=[logging.StreamHandler()])
_logger = logging.getLogger(__name__)
_logger.setLevel(logging.INFO)

EXIT_CLEAN = 0
EXIT_VIOLATIONS = 1
EXIT_SYNTAX = 2
EXIT_USAGE = 3

STDIN = "-"

_COLORS = {"error": "\033[31m", "warning": "\033[33m"}
_RESET = "\033[0m"


def _die(message: str, code: int = EXIT_USAGE) -> NoReturn:
    """Handle errors and terminate the program with an error code."""
    _logger.error(message)
    raise SystemExit(code)


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the configuration error code instead of 2."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        _die(f"{self.prog}: error: {message}")


def _use_color(choice: str, stream: IO[str]) -> bool:
    if choice == "auto":
        return stream.isatty()
    return choice == "always"


def _read_source(path: Path) -> str:
    if str(path) == STDIN:
        return sys.stdin.read()
    try:
        return path.read_bytes().decode("utf-8")
    except OSError as e:
        _die(f"Cannot read {path}: {e.strerror}")
    except UnicodeDecodeError as e:
        _die(f"File {path} is not UTF-8: {e}", EXIT_SYNTAX)


def _expand(paths: Sequence[Path]) -> list[Path]:
    """Replace directories by the Prolog files below them."""
    found: list[Path] = []
    for path in paths:
        if str(path) == STDIN:
            found.append(path)
        elif path.is_dir():
            found.extend(
                sorted(p for p in path.rglob("*") if p.is_file() and p.name.endswith(EXTENSIONS))
            )
        elif path.is_file():
            found.append(path)
        else:
            _die(f"File {path} not found")
    return found


def _parse_overrides(values: Sequence[str]) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for value in values:
        key, sep, setting = value.partition("=")
        if not sep or not key.strip():
            _die(f"Expected key=value after --set, got {value!r}")
        overrides[key.strip()] = setting.strip()
    return overrides


def _config(args: argparse.Namespace, targets: Sequence[Path]) -> Config:
    start = next((p for p in targets if str(p) != STDIN), None)
    overrides = _parse_overrides(args.set)
    if args.format is not None:
        overrides["format"] = args.format
    try:
        config = resolve_config(
            config_path=args.config, dialect=args.dialect, overrides=overrides, start=start
        )
        table = config.initial_table()
    except ConfigError as e:
        _die(f"Invalid configuration: {e}")
    _logger.debug("configuration: %s (operators: %d)", config, len(list(table)))
    return config


def _parse(source: str, config: Config, table: OperatorTable) -> ParseOutcome:
    tokens = tokenize(source, config.dialect)
    return parse_program(tokens, table, config.dialect)


@dataclass
class _LintResult:
    diagnostics: list[Diagnostic]
    inferred: StyleOptions | None
    syntax_errors: bool


def _lint_source(source: str, name: str, config: Config, table: OperatorTable) -> _LintResult:
    try:
        outcome = _parse(source, config, table)
    except LexError as e:
        return _LintResult([syntax_diagnostic(e, file=name)], None, syntax_errors=True)
    diagnostics = [syntax_diagnostic(error, file=name) for error in outcome.errors]
    style, inferred = check_style(outcome.cst, split_lines(source), config.style, file=name)
    for key, reason in inferred.unresolved.items():
        _logger.debug("%s: cannot infer %s: %s", name, key, reason)
    quality = check_quality(cst_to_ast(outcome.cst), config.quality, file=name)
    return _LintResult(
        sort_diagnostics([*diagnostics, *style, *quality]),
        inferred.options,
        syntax_errors=bool(outcome.errors),
    )


def _format_diagnostic(diagnostic: Diagnostic, *, color: bool) -> str:
    text = diagnostic.format_text()
    if not color:
        return text
    return f"{_COLORS[diagnostic.severity]}{text}{_RESET}"


def _cmd_lint(args: argparse.Namespace) -> int:
    files = _expand(args.paths)
    config = _config(args, files)
    table = config.initial_table()
    if args.emit_config is not None and args.emit_config.exists():
        _die(f"Output file {args.emit_config} already exists")

    results = [_lint_source(_read_source(p), str(p), config, table) for p in files]
    diagnostics = [d for result in results for d in result.diagnostics]
    if config.output_format == "json":
        print(json.dumps([d.to_dict() for d in diagnostics], indent=2))
    else:
        color = _use_color(args.color, sys.stdout)
        for diagnostic in diagnostics:
            print(_format_diagnostic(diagnostic, color=color))

    if args.emit_config is not None:
        merged = merge_inferred(r.inferred for r in results if r.inferred is not None)
        args.emit_config.write_text(emit_config(merged, config.dialect))
        _logger.info("Wrote inferred options to %s", args.emit_config)

    if any(result.syntax_errors for result in results):
        return EXIT_SYNTAX
    return EXIT_VIOLATIONS if diagnostics else EXIT_CLEAN


def _cmd_fmt(args: argparse.Namespace) -> int:
    files = _expand(args.paths)
    config = _config(args, files)
    if not config.style.concrete:
        _die("fmt needs concrete style options; 'infer' cannot be used here")
    table = config.initial_table()

    status = EXIT_CLEAN
    for path in files:
        name = str(path)
        source = _read_source(path)
        try:
            formatted = format_source(source, config.style, config.dialect, table=table)
        except (PrologSyntaxError, SerializeError) as e:
            _logger.error("%s: %s", name, e)
            status = EXIT_SYNTAX
            continue
        if name == STDIN and args.mode == "write":
            sys.stdout.write(formatted)
            continue
        if formatted == source:
            continue
        if args.mode == "write":
            path.write_bytes(formatted.encode("utf-8"))
            _logger.info("Reformatted %s", name)
        elif args.mode == "diff":
            sys.stdout.writelines(
                difflib.unified_diff(
                    source.splitlines(keepends=True),
                    formatted.splitlines(keepends=True),
                    fromfile=f"a/{name}",
                    tofile=f"b/{name}",
                )
            )
        else:
            _logger.info("Would reformat %s", name)
            status = max(status, EXIT_VIOLATIONS)
    return status


def _write_output(target: Path, text: str) -> None:
    if str(target) == STDIN:
        sys.stdout.write(text)
    else:
        target.write_text(text)
        _logger.info("Wrote %s", target)


def _cmd_stats(args: argparse.Namespace) -> int:
    if not args.root.is_dir():
        _die(f"Directory {args.root} not found")
    config = _config(args, [args.root])
    if args.jobs < 1:
        _die(f"--jobs must be positive, got {args.jobs}")
    report = run_corpus(
        args.root, config.initial_table(), config.dialect, config.limits, jobs=args.jobs
    )
    if args.json is not None:
        _write_output(args.json, report_json(report))
    if args.csv is not None:
        _write_output(args.csv, stats_csv(report.files))
    if STDIN not in (str(args.json), str(args.csv)):
        if config.output_format == "json":
            sys.stdout.write(report_json(report))
        else:
            sys.stdout.write(report_text(report))
    return EXIT_CLEAN


def _span_text(token: Token) -> str:
    span = token.span
    return f"{span.line_start}:{span.col_start}-{span.line_end}:{span.col_end}"


def _token_dict(token: Token) -> dict[str, Any]:
    span = token.span
    return {
        "kind": token.kind,
        "text": token.text,
        "line": span.line_start,
        "col": span.col_start,
        "end_line": span.line_end,
        "end_col": span.col_end,
        "layout": [{"kind": item.kind, "text": item.text} for item in token.layout_before],
    }


def _cmd_tokens(args: argparse.Namespace) -> int:
    config = _config(args, [args.file])
    source = _read_source(args.file)
    try:
        tokens = tokenize(source, config.dialect)
    except LexError as e:
        _die(f"{args.file}: {e}", EXIT_SYNTAX)
    if config.output_format == "json":
        print(json.dumps([_token_dict(token) for token in tokens], indent=2))
        return EXIT_CLEAN
    for token in tokens:
        if args.layout:
            for item in token.layout_before:
                print(f"  {item.kind} {item.text!r}")
        print(f"{_span_text(token)} {token.kind} {token.text!r}")
    return EXIT_CLEAN


def _parse_file(args: argparse.Namespace) -> ParseOutcome:
    config = _config(args, [args.file])
    source = _read_source(args.file)
    try:
        outcome = _parse(source, config, config.initial_table())
    except LexError as e:
        _die(f"{args.file}: {e}", EXIT_SYNTAX)
    if outcome.errors:
        for error in outcome.errors:
            _logger.error("%s: %s", args.file, error)
        raise SystemExit(EXIT_SYNTAX)
    return outcome


def _cst_lines(node: CstNode | Token, depth: int) -> Iterator[str]:
    indent = "  " * depth
    if isinstance(node, Token):
        layout = "".join(item.text for item in node.layout_before)
        suffix = f" layout={layout!r}" if layout else ""
        yield f"{indent}{node.kind} {node.text!r}{suffix}"
        return
    priority = f" {node.priority}" if node.priority else ""
    yield f"{indent}{node.label}{priority}"
    for child in node.children:
        yield from _cst_lines(child, depth + 1)


def _cmd_ast(args: argparse.Namespace) -> int:
    program = cst_to_ast(_parse_file(args).cst).ast
    if args.term:
        print(render_term(program))
    else:
        sys.stdout.write(dump(program))
    return EXIT_CLEAN


def _cmd_cst(args: argparse.Namespace) -> int:
    for line in _cst_lines(_parse_file(args).cst, 0):
        print(line)
    return EXIT_CLEAN


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Run with additional debug logging; supply multiple times to increase verbosity",
    )
    common.add_argument("--config", type=Path, help="Path to a configuration file")
    common.add_argument("--dialect", choices=["iso", "swi"], help="Dialect profile")
    common.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override one configuration value; may be repeated",
    )
    common.add_argument("--format", choices=["text", "json"], help="Output format")
    return common


def _parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _ArgumentParser(
        prog="prolint",
        description="Parse, lint, format and survey Prolog source code",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument(
        "-V",
        "--version",
        action="version",
        version=f"prolint {__version__}",
    )
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    lint = commands.add_parser("lint", parents=[common], help="Check layout and naming rules")
    lint.add_argument("paths", nargs="+", type=Path, help="Files or directories; - for stdin")
    lint.add_argument(
        "--color", choices=["auto", "always", "never"], default="auto", help="Colorize output"
    )
    lint.add_argument(
        "--emit-config", type=Path, help="Write the inferred options to a new configuration file"
    )
    lint.set_defaults(handler=_cmd_lint)

    fmt = commands.add_parser("fmt", parents=[common], help="Reformat source files")
    fmt.add_argument("paths", nargs="+", type=Path, help="Files or directories; - for stdin")
    mode = fmt.add_mutually_exclusive_group()
    mode.add_argument("--write", dest="mode", action="store_const", const="write")
    mode.add_argument("--diff", dest="mode", action="store_const", const="diff")
    mode.add_argument("--check", dest="mode", action="store_const", const="check")
    fmt.set_defaults(handler=_cmd_fmt, mode="write")

    stats = commands.add_parser("stats", parents=[common], help="Analyze a corpus of packages")
    stats.add_argument("root", type=Path, help="Directory whose subdirectories are packages")
    stats.add_argument("--json", type=Path, metavar="OUT", help="Write the JSON report")
    stats.add_argument("--csv", type=Path, metavar="OUT", help="Write per-file statistics")
    stats.add_argument("-j", "--jobs", type=int, default=1, help="Number of worker processes")
    stats.set_defaults(handler=_cmd_stats)

    tokens = commands.add_parser("tokens", parents=[common], help="Print the tokens of a file")
    tokens.add_argument("file", type=Path)
    tokens.add_argument("--layout", action="store_true", help="Also print layout items")
    tokens.set_defaults(handler=_cmd_tokens)

    ast = commands.add_parser("ast", parents=[common], help="Print the abstract syntax tree")
    ast.add_argument("file", type=Path)
    ast.add_argument("--term", action="store_true", help="Print the tree as one term")
    ast.set_defaults(handler=_cmd_ast)

    cst = commands.add_parser("cst", parents=[common], help="Print the concrete syntax tree")
    cst.add_argument("file", type=Path)
    cst.set_defaults(handler=_cmd_cst)
    return parser


def main(argv: Sequence[str] | None = None) -> NoReturn:
    args: argparse.Namespace = _parser().parse_args(argv)

    if args.verbose >= 1:
        logging.getLogger("prolint").setLevel("DEBUG")
    if args.verbose >= 2:  # noqa: PLR2004
        logging.getLogger().setLevel("DEBUG")

    _logger.debug(args)

    raise SystemExit(args.handler(args))
