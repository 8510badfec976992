import io

import pytest

from models.schemas import SolverOptions
from run_queries import build_parser, main, repl, run_file
from services.evaluator import eval_ground
from services.session import Session, Verdict, split_statements
from tests.conftest import project_root
from utils.fresh import FreshSupply

VC_DIR = project_root / "examples_vc"


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_run_file_echoes_each_statement(tmp_path, session):
    path = write(tmp_path, "q.slog", "% 질의 두 개\nX = 1.\n\nneg(true).\n")
    out = io.StringIO()
    assert run_file(str(path), session, out=out) == 0
    assert out.getvalue() == "% q.slog:2  X = 1.\nX = 1\n% q.slog:4  neg(true).\nno\n"


def test_run_file_reports_unexpected_verdicts(tmp_path, session):
    path = write(tmp_path, "q.slog", "X in {}.\nX = 2.\n")
    out = io.StringIO()
    assert run_file(str(path), session, expect=Verdict.UNSAT, out=out) == 1
    failures = [line for line in out.getvalue().splitlines() if line.startswith("FAILED")]
    assert failures == ["FAILED q.slog:2: unsat 기대, 결과 sat"]


def test_run_file_counts_errors_as_failures(tmp_path, session):
    path = write(tmp_path, "q.slog", "X = = 1.\n")
    out = io.StringIO()
    assert run_file(str(path), session, out=out) == 1
    assert "FAILED q.slog:1: 오류 - error:" in out.getvalue()


def test_run_file_directives_are_not_checked(tmp_path, session):
    path = write(tmp_path, "q.slog", "add_lib('array.slog').\nneg(true).\n")
    out = io.StringIO()
    assert run_file(str(path), session, expect=Verdict.UNSAT, out=out) == 0
    assert "yes (6 definitions)\n" in out.getvalue()


def test_run_file_stops_at_halt(tmp_path, session):
    path = write(tmp_path, "q.slog", "X = 1.\nhalt.\nX = 2.\n")
    out = io.StringIO()
    run_file(str(path), session, out=out)
    assert "X = 2" not in out.getvalue()


def test_run_file_missing_file(tmp_path, session):
    assert run_file(str(tmp_path / "none.slog"), session, out=io.StringIO()) == 2


def test_run_file_prints_several_answers(tmp_path):
    session = Session(options=SolverOptions(max_answers=3))
    path = write(tmp_path, "q.slog", "X in {1,2}.\n")
    out = io.StringIO()
    run_file(str(path), session, out=out)
    assert out.getvalue().endswith("X = 1\n;\nX = 2\n")


def test_repl_joins_lines_until_period(session):
    stdin = io.StringIO("X in\n {1,2}.\n;\n;\nhalt.\nX = 3.\n")
    out = io.StringIO()
    assert repl(session, stdin, out) == 0
    assert out.getvalue() == "X = 1\nX = 2\nno\n"


def test_repl_ends_at_eof(session):
    out = io.StringIO()
    assert repl(session, io.StringIO("\nneg(true).\n"), out) == 0
    assert out.getvalue() == "no\n"


def test_parser_rejects_both_expectations():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["q.slog", "--expect-sat", "--expect-unsat"])


def test_main_batch_mode(tmp_path, capsys):
    path = write(tmp_path, "vc.slog", "neg(true).\nX in {}.\n")
    assert main([str(path), "--expect-unsat", "--budget", "5000"]) == 0
    captured = capsys.readouterr().out
    assert "% vc.slog:1  neg(true).\nno\n" in captured
    assert "FAILED" not in captured


def test_main_missing_consult_file(tmp_path):
    assert main(["--consult", str(tmp_path / "none.slog")]) == 2


# ---- 동봉 검증 조건 파일 ----

def test_binary_search_conditions_are_all_unsat(session):
    out = io.StringIO()
    assert run_file(str(VC_DIR / "binsearch.slog"), session, expect=Verdict.UNSAT, out=out) == 0
    lines = out.getvalue().splitlines()
    assert "FAILED" not in out.getvalue()
    assert lines.count("no") == 3


def test_test_generation_file_in_ground_mode():
    session = Session(groundsol=True)
    out = io.StringIO()
    assert run_file(str(VC_DIR / "testgen.slog"), session, expect=Verdict.SAT, out=out) == 0
    assert "FAILED" not in out.getvalue()
    assert out.getvalue().count("A = {[1,") == 4


def test_test_generation_witnesses_satisfy_their_queries(solver):
    text = (VC_DIR / "testgen.slog").read_text(encoding="utf-8")
    queries = split_statements(text, "testgen.slog")
    assert len(queries) == 4
    for source in queries:
        supply = FreshSupply()
        f = solver.parse(source.text, supply, source.origin, source.line)
        answer = next(iter(solver.groundsol(f, supply)))
        assert answer.ground
        assert eval_ground(f, answer.subst)
