import io
import json
import sys
import tomllib
from pathlib import Path

import pretend
import pytest

from prolint import _cli
from prolint._cli import main
from prolint.config import CONFIG_ENV
from prolint.corpus import aggregate


@pytest.fixture(autouse=True)
def _no_config_from_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv(CONFIG_ENV, raising=False)


def _run(*argv: str) -> int | str | None:
    with pytest.raises(SystemExit) as info:
        main(list(argv))
    return info.value.code


def _file(tmp_path: Path, text: str, name: str = "test.pl") -> Path:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_version(capsys: pytest.CaptureFixture[str]) -> None:
    assert _run("--version") == 0
    assert capsys.readouterr().out.startswith("prolint ")


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["lint"],
        ["frobnicate"],
        ["lint", "--dialect", "gnu", "x.pl"],
        ["stats", "root", "--jobs", "many"],
    ],
)
def test_usage_errors(argv: list[str]) -> None:
    assert _run(*argv) == 3


class TestLint:
    def test_clean(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = _file(tmp_path, "a :-\n    b.\n")
        assert _run("lint", str(path)) == 0
        assert capsys.readouterr().out == ""

    def test_violations(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = _file(tmp_path, "foo(X,Y) :- bar(X), baz(Y).\n")
        assert _run("lint", str(path)) == 1
        assert capsys.readouterr().out.splitlines() == [
            f"{path}:1:6: warning cov_2_5 Missing space after argument comma",
            f"{path}:1:10: warning cov_2_7 Missing line break after ':-'",
            f"{path}:1:19: warning cov_2_7 Missing line break after subgoal",
        ]

    def test_json(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = _file(tmp_path, "a. b.\n")
        assert _run("lint", "--format", "json", str(path)) == 1
        (diagnostic,) = json.loads(capsys.readouterr().out)
        assert diagnostic == {
            "file": str(path),
            "line": 1,
            "col": 2,
            "end_line": 1,
            "end_col": 3,
            "rule": "cov_2_6",
            "severity": "warning",
            "message": "Missing line break after clause",
        }

    def test_color(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = _file(tmp_path, "a. b.\n")
        assert _run("lint", "--color", "always", str(path)) == 1
        assert capsys.readouterr().out.startswith("\033[33m")

    def test_color_follows_the_terminal(self) -> None:
        assert _cli._use_color("auto", pretend.stub(isatty=lambda: True))
        assert not _cli._use_color("auto", pretend.stub(isatty=lambda: False))
        assert not _cli._use_color("never", pretend.stub(isatty=lambda: True))

    def test_syntax_error(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = _file(tmp_path, "a.\nfoo(.\n")
        assert _run("lint", str(path)) == 2
        assert f"{path}:2:" in capsys.readouterr().out

    def test_lex_error(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = _file(tmp_path, "X = 'open\n")
        assert _run("lint", str(path)) == 2
        assert "error syntax.error" in capsys.readouterr().out

    def test_stdin(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setattr(sys, "stdin", io.StringIO("a :-\n    b.\n"))
        assert _run("lint", "-") == 0

    def test_directory(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        _file(tmp_path, "a. b.\n", "one.pl")
        (tmp_path / "sub").mkdir()
        _file(tmp_path / "sub", "c. d.\n", "two.pro")
        _file(tmp_path, "not prolog", "notes.txt")
        assert _run("lint", str(tmp_path)) == 1
        out = capsys.readouterr().out
        assert "one.pl:1:2:" in out
        assert "two.pro:1:2:" in out

    def test_overrides(self, tmp_path: Path) -> None:
        path = _file(tmp_path, "a :-\n  b.\n")
        assert _run("lint", str(path)) == 1
        assert _run("lint", "--set", "indent=2", str(path)) == 0

    def test_configuration_file(self, tmp_path: Path) -> None:
        path = _file(tmp_path, "a :-\n  b.\n")
        _file(tmp_path, "indent = 2\n", ".prolintrc")
        assert _run("lint", str(path)) == 0
        config = _file(tmp_path, "indent = 8\n", "other.toml")
        assert _run("lint", "--config", str(config), str(path)) == 1

    @pytest.mark.parametrize(
        "option",
        [["--set", "colour=red"], ["--set", "indent"], ["--set", "indent=0"]],
    )
    def test_invalid_configuration(self, tmp_path: Path, option: list[str]) -> None:
        path = _file(tmp_path, "a.\n")
        assert _run("lint", *option, str(path)) == 3

    def test_missing_file(self, tmp_path: Path) -> None:
        assert _run("lint", str(tmp_path / "missing.pl")) == 3

    def test_emit_config(self, tmp_path: Path) -> None:
        path = _file(tmp_path, "a :-\n  b.\n")
        out = tmp_path / "inferred.toml"
        argv = ["--set", "indent=infer", "--set", "max_line_length=infer"]
        assert _run("lint", *argv, "--emit-config", str(out), str(path)) == 0
        values = tomllib.loads(out.read_text())
        assert values["dialect"] == "swi"
        assert values["indent"] == 2
        assert values["max_line_length"] == 4
        assert values["newline_after_clause"] is True

        assert _run("lint", *argv, "--emit-config", str(out), str(path)) == 3


class TestFmt:
    def test_write(self, tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
        path = _file(tmp_path, "p:-q.")
        assert _run("fmt", str(path)) == 0
        assert path.read_text() == "p :-\n    q.\n"
        assert f"Reformatted {path}" in caplog.text

    def test_check(self, tmp_path: Path) -> None:
        path = _file(tmp_path, "p:-q.")
        assert _run("fmt", "--check", str(path)) == 1
        assert path.read_text() == "p:-q."
        formatted = _file(tmp_path, "p :-\n    q.\n", "done.pl")
        assert _run("fmt", "--check", str(formatted)) == 0

    def test_diff(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = _file(tmp_path, "p:-q.\n")
        assert _run("fmt", "--diff", str(path)) == 0
        out = capsys.readouterr().out
        assert f"+++ b/{path}" in out
        assert "-p:-q.\n" in out
        assert "+    q.\n" in out
        assert path.read_text() == "p:-q.\n"

    def test_stdin(
        self, monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
    ) -> None:
        monkeypatch.setattr(sys, "stdin", io.StringIO("a:-b,c."))
        assert _run("fmt", "-") == 0
        assert capsys.readouterr().out == "a :-\n    b,\n    c.\n"

    def test_style_options(self, tmp_path: Path) -> None:
        path = _file(tmp_path, "p:-q.")
        assert _run("fmt", "--set", "indent=tab", str(path)) == 0
        assert path.read_text() == "p :-\n\tq.\n"

    def test_syntax_error(self, tmp_path: Path) -> None:
        path = _file(tmp_path, "foo(.\n")
        assert _run("fmt", str(path)) == 2
        assert path.read_text() == "foo(.\n"

    def test_inferred_style_is_rejected(self, tmp_path: Path) -> None:
        path = _file(tmp_path, "a.\n")
        assert _run("fmt", "--set", "indent=infer", str(path)) == 3


class TestStats:
    @pytest.fixture
    def root(self, tmp_path: Path) -> Path:
        (tmp_path / "alpha").mkdir()
        _file(tmp_path / "alpha", "a :-\n    b.\n", "a.pl")
        _file(tmp_path, "c.\n", "top.pl")
        return tmp_path

    def test_text(self, root: Path, capsys: pytest.CaptureFixture[str]) -> None:
        assert _run("stats", str(root)) == 0
        assert "files: 2 (2 parsed, 0 failed, 0 skipped)" in capsys.readouterr().out

    def test_outputs(
        self, root: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        report = tmp_path / "report.json"
        assert _run("stats", str(root), "--json", str(report), "--csv", "-") == 0
        assert json.loads(report.read_text())["totals"]["files"] == 2
        out = capsys.readouterr().out
        assert out.startswith("path,package,line_count,parsed,")
        assert "alpha/a.pl,alpha," in out

    def test_json_format(self, root: Path, capsys: pytest.CaptureFixture[str]) -> None:
        assert _run("stats", "--format", "json", str(root)) == 0
        assert json.loads(capsys.readouterr().out)["version"] == 1

    def test_jobs_and_limits(self, root: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        run_corpus = pretend.call_recorder(lambda *args, **kwargs: aggregate([]))
        monkeypatch.setattr(_cli, "run_corpus", run_corpus)
        assert _run("stats", str(root), "--jobs", "3", "--set", "max_lines=10") == 0
        (call,) = run_corpus.calls
        assert call.kwargs == {"jobs": 3}
        assert call.args[0] == root
        assert call.args[3].max_lines == 10

    def test_bad_arguments(self, root: Path) -> None:
        assert _run("stats", str(root / "missing")) == 3
        assert _run("stats", str(root), "--jobs", "0") == 3


class TestInspect:
    SOURCE = "positive(X) :- X > 0.\n"

    def test_tokens(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = _file(tmp_path, "a :- b.\n")
        assert _run("tokens", str(path)) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "1:1-1:2 name 'a'"
        assert lines[2] == "1:6-1:7 name 'b'"

    def test_tokens_with_layout(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = _file(tmp_path, "a. % note\n")
        assert _run("tokens", "--layout", str(path)) == 0
        assert "  line_comment '% note'" in capsys.readouterr().out.splitlines()

    def test_tokens_json(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = _file(tmp_path, "a :- b.\n")
        assert _run("tokens", "--format", "json", str(path)) == 0
        tokens = json.loads(capsys.readouterr().out)
        assert tokens[0] == {
            "kind": "name",
            "text": "a",
            "line": 1,
            "col": 1,
            "end_line": 1,
            "end_col": 2,
            "layout": [],
        }
        assert tokens[1]["layout"] == [{"kind": "space", "text": " "}]

    def test_tokens_lex_error(self, tmp_path: Path) -> None:
        path = _file(tmp_path, "X = 'open\n")
        assert _run("tokens", str(path)) == 2

    def test_ast(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = _file(tmp_path, self.SOURCE)
        assert _run("ast", str(path)) == 0
        assert capsys.readouterr().out.splitlines()[:3] == [
            "prolog",
            "  rule",
            "    compound positive/1",
        ]

    def test_ast_term(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = _file(tmp_path, self.SOURCE)
        assert _run("ast", "--term", str(path)) == 0
        assert capsys.readouterr().out == (
            "prolog([rule(compound(atom(positive), [variable('X')]), "
            "[infix(>, xfx, variable('X'), integer(0))])])\n"
        )

    def test_cst(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = _file(tmp_path, self.SOURCE)
        assert _run("cst", str(path)) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "prolog_text"
        assert lines[1] == "  clause 1200"
        assert "name 'positive'" in [line.strip() for line in lines]
        assert "eof '' layout='\\n'" in [line.strip() for line in lines]

    @pytest.mark.parametrize("command", ["ast", "cst"])
    def test_parse_error(self, tmp_path: Path, command: str) -> None:
        path = _file(tmp_path, "foo(.\n")
        assert _run(command, str(path)) == 2
