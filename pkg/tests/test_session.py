from services.session import Session, Verdict, repl_eval, split_statements


def test_next_answer_and_exhaustion(session):
    first = repl_eval("X in {1,2}.", session)
    assert (first.output, first.verdict) == ("X = 1", Verdict.SAT)
    assert repl_eval(";", session).output == "X = 2"
    last = repl_eval(";", session)
    assert (last.output, last.verdict) == ("no", Verdict.UNSAT)
    assert repl_eval(";", session).output == "no"


def test_unsatisfiable_query_prints_no(session):
    assert repl_eval("neg(true).", session).output == "no"


def test_answer_without_bindings_prints_true(session):
    assert repl_eval("{1,2} = {2,1}.", session).output == "true"


def test_groundsol_toggle(session):
    assert repl_eval("groundsol.", session).output == "groundsol: on"
    assert session.groundsol
    assert repl_eval("size(E,0).", session).output == "E = {}"
    assert repl_eval("groundsol.", session).output == "groundsol: off"


def test_halt(session):
    assert repl_eval("halt.", session).halt


def test_parse_errors_are_reported(session):
    result = repl_eval("X = .", session)
    assert result.verdict == Verdict.ERROR
    assert result.output.startswith("error: <repl>:1:")


def test_add_lib_loads_array_library_once(session):
    assert repl_eval("add_lib('array.slog').", session).output == "yes (6 definitions)"
    assert repl_eval("add_lib('array.slog').", session).output == "yes (0 definitions)"
    assert session.registry.knows("beq")


def test_library_predicates_in_queries(array_session):
    assert repl_eval("arr_get(A,2,3,Y).", array_session).output == "no"
    assert repl_eval("arr_get(A,2,1,Y).", array_session).verdict == Verdict.SAT


def test_consult_relative_to_base_dir(tmp_path):
    (tmp_path / "defs.slog").write_text("nonempty(S) :- X in S.\n", encoding="utf-8")
    (tmp_path / "main.slog").write_text(":- consult('defs.slog').\n", encoding="utf-8")
    session = Session(base_dir=tmp_path)
    assert repl_eval("consult('main.slog').", session).output == "yes (1 definitions)"
    assert repl_eval("nonempty({1}).", session).output == "true"
    assert repl_eval("nonempty({}).", session).output == "no"


def test_consult_errors(tmp_path):
    session = Session(base_dir=tmp_path)
    missing = repl_eval("consult('nowhere.slog').", session)
    assert missing.verdict == Verdict.ERROR
    (tmp_path / "bad.slog").write_text("arr(A,N) :- A = {}.\n", encoding="utf-8")
    assert repl_eval("consult('bad.slog').", session).verdict == Verdict.ERROR


def test_history_records_inputs(session):
    repl_eval("X = 1.", session)
    repl_eval(";", session)
    assert session.history == ["X = 1.", ";"]


def test_answers_collects_up_to_limit(session):
    results = session.answers("X in {1,2,3}.", 2)
    assert [r.output for r in results] == ["X = 1", "X = 2"]
    assert [r.output for r in session.answers("X in {}.", 3)] == ["no"]


def test_split_statements_keeps_lines_and_quotes():
    text = "X = 1.\n% 주석.\nY in {1,2}. Z = 'a.b'.\nW =\n  2.\n"
    statements = split_statements(text, "q.slog")
    assert [s.text for s in statements] == ["X = 1.", "Y in {1,2}.", "Z = 'a.b'.", "W =\n  2."]
    assert [s.line for s in statements] == [1, 3, 3, 4]
    assert {s.origin for s in statements} == {"q.slog"}
