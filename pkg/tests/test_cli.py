import json
import subprocess
import sys

import pytest

from engelnq import cli
from engelnq.io import ParseError, format_matrix, parse_presentation, read_matrix
from engelnq.exactalg import ZZ, SparseRow


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def structured(argv, capsys):
    code, out, _ = run(argv + ["--format", "structured"], capsys)
    return code, json.loads(out)


PRES = """\
# three commuting a's, x of degree at most 4
ring Q
gens x a1 a2 a3
commute-all-a
cap x 4
cap a 1
"""


def test_build_reports_dimension_and_ideal(tmp_path, capsys):
    f = tmp_path / "m3.pres"
    f.write_text(PRES)
    table = tmp_path / "m3.table"
    code, rep = structured(["build", str(f), "--ideal", "x", "--dump-table", str(table)], capsys)
    assert code == 0
    assert rep["result"]["dimension"] == 76
    assert rep["result"]["integral"] is True
    assert rep["result"]["ideal_class"]["x"] >= 1
    assert table.read_text().startswith("# engelnq structure table")
    assert rep["tool"] == "engelnq" and len(rep["input_sha256"]) == 64


def test_structured_report_is_deterministic_apart_from_timestamp(tmp_path, capsys):
    f = tmp_path / "m3.pres"
    f.write_text(PRES)
    _, a = structured(["build", str(f)], capsys)
    _, b = structured(["build", str(f)], capsys)
    a.pop("timestamp"), b.pop("timestamp")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_human_format_mentions_the_dimension(tmp_path, capsys):
    f = tmp_path / "m3.pres"
    f.write_text(PRES)
    code, out, _ = run(["build", str(f)], capsys)
    assert code == 0 and "dimension: 76" in out


def test_output_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _, _ = run(["count-bound", "--format", "structured", "-o", str(out)], capsys)
    assert code == 0
    assert json.loads(out.read_text())["result"]["bound"] == 5705


def test_count_bound(capsys):
    code, rep = structured(["count-bound", "--m", "1", "--cap-x", "2"], capsys)
    assert code == 0 and rep["result"]["bound"] == 4


def test_engel_primes_small_case(tmp_path, capsys):
    dump = tmp_path / "m.txt"
    code, rep = structured(["engel-primes", "--case", "6,1,1", "--dump-matrix", str(dump)], capsys)
    res = rep["result"]
    assert code == 0
    assert res["full_rank"] and res["rank"] == res["columns"] == 6
    assert set(res["primes"]) <= {2, 3, 5, 7}
    assert all(isinstance(d, str) for d in res["nonunit_divisors"])
    # the dumped matrix round-trips through the snf subcommand
    code, snf = structured(["snf", str(dump)], capsys)
    assert code == 0 and snf["result"]["rank"] == 6 and snf["result"]["primes"] == res["primes"]


def test_gfp_table_small_run_and_usage_errors(capsys):
    code, rep = structured(["gfp-table", "--p", "7", "--m", "2", "--cap-x", "5"], capsys)
    assert code == 0 and rep["result"]["expected"] is None
    code, _, err = run(["gfp-table", "--p", "3"], capsys)
    assert code == 1 and "not supported" in err


def test_wreath3_subcommands(capsys):
    code, rep = structured(["wreath3", "verify", "--max-index", "4", "--weight-cap", "5"], capsys)
    assert code == 0 and rep["result"]["passed"] and rep["result"]["instances"]["total"] > 0
    code, rep = structured(["wreath3", "witness", "--k", "3"], capsys)
    assert code == 0
    assert rep["result"]["bracket_indices"] == [2, 3, 4]
    assert rep["result"]["witness"] == "[b,[a2,a1],[a3,a1],[a4,a1]]"
    code, _, _ = run(["wreath3", "witness", "--k", "3", "--max-index", "3"], capsys)
    assert code == 1


def test_usage_errors_exit_one(tmp_path, capsys):
    assert run(["build", str(tmp_path / "missing.pres")], capsys)[0] == 1
    assert run(["engel-primes", "--case", "2,2"], capsys)[0] == 1
    with pytest.raises(SystemExit) as info:
        cli.main(["nonsense"])
    assert info.value.code == 1
    bad = tmp_path / "bad.pres"
    bad.write_text("ring Q\ngens x a\ncap x four\n")
    code, _, err = run(["build", str(bad)], capsys)
    assert code == 1 and "line 3, column 7" in err


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("ENGELNQ_THREADS", "3")
    assert cli.resolve_threads(None) == 3
    assert cli.resolve_threads(2) == 2


def test_console_script_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "engelnq.cli", "count-bound", "--format", "structured"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert json.loads(out.stdout)["result"]["bound"] == 5705


# -- parsers ------------------------------------------------------------------


def test_presentation_parser_accepts_every_directive():
    pres = parse_presentation(
        "ring GF 7\ngens x a1 a2\ncommute a1 a2\ncap x 5\ncap a 2\ncap a2 1\nmaxclass 9\n"
        "engel 5 multilinear+power\nrelator x a1 a1\n"
    )
    assert pres.ring.name == "GF(7)"
    assert pres.commuting_pairs == frozenset({(1, 2)})
    assert pres.trunc.cap_vector(3) == (5, 2, 1)
    assert pres.engel.mode == "multilinear_plus_power"
    assert pres.relators == ((0, 1, 1),)


@pytest.mark.parametrize(
    "text,line,column",
    [
        ("ring R\ngens x\n", 1, 6),
        ("gens x y\ncommute x z\n", 2, 11),
        ("gens x\nengel 4 direct\n", 2, 7),
        ("gens x\nfoo 1\n", 2, 1),
        ("ring Q\n", 1, 1),
        ("gens x x\n", 1, 8),
    ],
)
def test_presentation_parse_errors_carry_positions(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_presentation(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_matrix_round_trip_and_errors():
    rows = [SparseRow.from_dict(ZZ, {0: 2, 3: -1}), SparseRow.from_dict(ZZ, {1: 5})]
    text = format_matrix(rows, 4)
    assert read_matrix(text, is_text=True) == (rows, 4)
    with pytest.raises(ParseError) as info:
        read_matrix("# columns 2\n0:1 1x\n", is_text=True)
    assert (info.value.line, info.value.column) == (2, 5)
