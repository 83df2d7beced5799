import json
import subprocess
import sys

import pytest

from tubealg.cli import main
from tubealg.report import (DEGENERATE, EXIT_CODES, INPUT_ERROR, NONDEGENERATE, OBSTRUCTED, PASSES,
                            InputError, ProblemFile, Report, RunOptions, corpus_problems,
                            emit_corpus, load_problem, resolve_bounds, run, run_guess)


def problem(**kw):
    data = {"n": 2, "d": 1, "mode": "tube"}
    data.update(kw)
    return ProblemFile.from_dict(data)


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return path


@pytest.fixture(scope="module")
def corpus_reports():
    return {p.name: run(p) for p in corpus_problems()}


# -- run() examples ----------------------------------------------------------------

def test_square_passes():
    r = run(problem(phi=["y1^2"]))
    assert r.verdict == PASSES and r.exit_code == 0
    assert r.entries[0][0].polynomial.to_text() == "2*T - 1"
    assert r.minimality == "TRUE"


def test_sine_of_square_obstructed():
    r = run(problem(phi=["sin(y1^2)"]))
    assert r.verdict == OBSTRUCTED and r.exit_code == 0
    assert r.bounds["degree"] == 6 and r.bounds["order"] == 36
    assert "degree <= 6" in r.message and "order 36" in r.message


def test_polar_exp_obstructed():
    r = run(ProblemFile.from_dict({"n": 2, "mode": "rigid-polar", "phi": ["exp(y1)-1"]}))
    assert r.verdict == OBSTRUCTED
    assert r.assumptions["automorphism_algebra"] == "NOT_ASSERTED"


def test_polar_degenerate_profile_flagged():
    r = run(ProblemFile.from_dict({"n": 2, "mode": "rigid-polar", "phi": ["y1^2"]}))
    assert r.assumptions["automorphism_algebra"] == "UNCHECKED-HYPOTHESES"
    assert r.minimality == "UNCHECKED"


def test_degenerate_exit_code():
    r = run(problem(phi=["y1^9"]))
    assert r.verdict == DEGENERATE and r.exit_code == 2


def test_nondegen_command():
    r = run(problem(phi=["y1^3"]), command="nondegen")
    assert r.verdict == NONDEGENERATE
    assert r.witness.to_dict() == {"betas": [[2]], "ks": [1]}
    assert r.entries is None


def test_witness_override():
    r = run(problem(phi=["y1^2 + y1^3"]), RunOptions(witness=None))
    assert r.witness.to_dict() == {"betas": [[1]], "ks": [1]}
    from tubealg.obstruction import Witness
    r = run(problem(phi=["y1^2 + y1^3"]), RunOptions(witness=Witness(((2,),), (1,)), degree=2))
    assert r.witness.to_dict() == {"betas": [[2]], "ks": [1]}
    assert r.recentering_constants == [2]


def test_invalid_witness_override_is_input_error():
    from tubealg.obstruction import Witness
    r = run(problem(phi=["y1^3"]), RunOptions(witness=Witness(((1,),), (1,))))
    assert r.verdict == INPUT_ERROR and r.exit_code == 1


def test_assume_family_recorded():
    r = run(problem(phi=["y1^2"]), RunOptions(assume_family=True))
    assert r.assumptions["family_membership"] == "ASSERTED"


def test_first_second_flag():
    r = run(problem(phi=["y1^2"]), RunOptions(first_second=True))
    assert r.first_second[0][0].polynomial.to_text() == "T - 2"


def test_first_second_singular_hessian():
    r = run(problem(phi=["y1^3"]), RunOptions(first_second=True))
    assert r.verdict == INPUT_ERROR and "Hessian" in r.error


def test_series_literal_input():
    r = run(problem(phi_series=[{"dense": ["0", "0", "1"] + ["0"] * 60}]))
    assert r.verdict == PASSES


def test_parse_error_carries_position():
    r = run(problem(phi=["y1^2 + foo(y1)"]))
    assert r.verdict == INPUT_ERROR and "position 7" in r.error


def test_underdetermined_order_rejected():
    r = run(problem(phi=["y1^2"]), RunOptions(order=10))
    assert r.verdict == INPUT_ERROR and "underdetermined" in r.error


def test_nonvanishing_phi_rejected():
    r = run(problem(phi=["1 + y1^2"]))
    assert r.verdict == INPUT_ERROR


@pytest.mark.parametrize("data", [
    {"n": 2, "d": 1},
    {"n": 2, "d": 2, "phi": ["y1"]},
    {"n": 2, "d": 1, "phi": ["y1^2"], "phi_series": [{"dense": ["0"]}]},
    {"n": 2, "d": 1, "phi": ["y1^2", "y1^3"]},
    {"n": 2, "d": 1, "mode": "other", "phi": ["y1^2"]},
    {"n": 2, "d": 1, "phi": ["y1^2"], "bounds": {"colour": 3}},
    [1, 2],
])
def test_malformed_problem_files(data):
    with pytest.raises(InputError):
        ProblemFile.from_dict(data)


def test_resolve_bounds_precedence():
    b = resolve_bounds(1, RunOptions(margin=9), {"degree": 3, "margin": 2})
    assert b == {"degree": 3, "order": 19, "margin": 9, "max_witness_order": 6, "validate_bump": 10}


def test_guess_report():
    r = run_guess({"expr": "exp(1/2*log1p(y1))"}, RunOptions(degree=2))
    assert r.verdict == PASSES
    assert r.entries[0][0].polynomial.to_text() == "T^2 - y1 - 1"
    r = run_guess({"expr": "exp(y1)"}, RunOptions(degree=4, order=40))
    assert r.verdict == OBSTRUCTED
    assert run_guess({"expr": "exp(1 + y1)"}).verdict == INPUT_ERROR


# -- reports --------------------------------------------------------------------------

def test_report_round_trip(corpus_reports):
    for r in corpus_reports.values():
        again = Report.from_json(r.to_json())
        assert again == r
        assert again.to_json() == r.to_json()


def test_report_round_trip_with_timings():
    r = run(problem(phi=["y1^2"]), RunOptions(timings=True))
    assert set(r.timings) >= {"expand", "witness", "obstruction"}
    assert Report.from_json(r.to_json()) == r


def test_exit_codes_over_corpus(corpus_reports):
    expected = {name: (PASSES if name.startswith("control") or name == "polar-control-quadratic"
                       else OBSTRUCTED) for name in corpus_reports}
    for name, r in corpus_reports.items():
        assert r.verdict == expected[name], name
        assert r.exit_code == EXIT_CODES[r.verdict] == 0


def test_obstructed_reports_carry_bounds(corpus_reports):
    for r in corpus_reports.values():
        if r.verdict == OBSTRUCTED:
            assert r.bounds and any(not e.found for row in r.entries for e in row)


def test_reruns_are_bit_identical(corpus_reports):
    for p in corpus_problems()[:6]:
        assert run(p).to_json() == corpus_reports[p.name].to_json()


# -- command line -----------------------------------------------------------------------

def test_cli_obstruct(tmp_path, capsys):
    path = write(tmp_path, "p.json", {"n": 2, "d": 1, "mode": "tube", "phi": ["sin(y1^2)"]})
    assert main(["obstruct", str(path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == OBSTRUCTED
    assert out["witness"] == {"betas": [[1]], "ks": [1]}


def test_cli_out_flag_and_degree(tmp_path):
    path = write(tmp_path, "p.json", {"n": 2, "d": 1, "mode": "tube", "phi": ["y1^2 + y1^6"]})
    out = tmp_path / "r.json"
    assert main(["obstruct", str(path), "--degree", "10", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["verdict"] == PASSES
    assert report["bounds"]["order"] == 74
    assert report["entries"][0][0]["validated_order"] == 84


def test_cli_nondegen_exit_two(tmp_path, capsys):
    path = write(tmp_path, "p.json", {"n": 2, "d": 1, "mode": "tube", "phi": ["y1^8"]})
    assert main(["nondegen", str(path), "--max-witness-order", "3"]) == 2
    assert json.loads(capsys.readouterr().out)["verdict"] == DEGENERATE


def test_cli_witness_flag(tmp_path, capsys):
    path = write(tmp_path, "p.json", {"n": 2, "d": 1, "mode": "tube", "phi": ["y1^2 + y1^3"]})
    assert main(["nondegen", str(path), "--witness", '{"betas": [[2]], "ks": [1]}']) == 0
    assert json.loads(capsys.readouterr().out)["witness"]["betas"] == [[2]]


def test_cli_bad_witness_flag(tmp_path):
    path = write(tmp_path, "p.json", {"n": 2, "d": 1, "mode": "tube", "phi": ["y1^2"]})
    with pytest.raises(SystemExit) as info:
        main(["nondegen", str(path), "--witness", "not json"])
    assert info.value.code == 2  # argparse usage error


def test_cli_polar(tmp_path, capsys):
    path = write(tmp_path, "p.json", {"n": 2, "d": 1, "mode": "rigid-polar", "phi": ["y1 + y1^2"]})
    assert main(["polar", str(path), "--degree", "4", "--order", "40"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["entries"][0][0]["polynomial"]["text"] == "T - 2*y1 - 1"


def test_cli_mode_mismatch(tmp_path, capsys):
    path = write(tmp_path, "p.json", {"n": 2, "d": 1, "mode": "tube", "phi": ["y1^2"]})
    assert main(["polar", str(path)]) == 1
    assert json.loads(capsys.readouterr().out)["verdict"] == INPUT_ERROR


def test_cli_invalid_json(tmp_path, capsys):
    path = write(tmp_path, "p.json", '{"n": 2,\n "phi": [}')
    assert main(["obstruct", str(path)]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == INPUT_ERROR and "line 2" in out["error"]


def test_cli_missing_file(tmp_path, capsys):
    assert main(["obstruct", str(tmp_path / "nope.json")]) == 1
    assert json.loads(capsys.readouterr().out)["verdict"] == INPUT_ERROR


def test_cli_guess(tmp_path, capsys):
    path = write(tmp_path, "s.json", {"var_count": 1, "dense": ["1"] * 40})
    assert main(["guess", str(path), "--degree", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["entries"][0][0]["polynomial"]["text"] == "y1*T - T + 1"


def test_cli_guess_bad_json(tmp_path, capsys):
    path = write(tmp_path, "s.json", "nope")
    assert main(["guess", str(path)]) == 1


def test_cli_corpus(tmp_path, capsys):
    assert main(["corpus", str(tmp_path)]) == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"tube-sin-y2.json", "tube-exp-exp.json", "control-y2.json"} <= names
    assert load_problem(tmp_path / "tube-sin-y2.json").phi == ("sin(y1^2)",)
    assert len(emit_corpus(tmp_path)) == len(corpus_problems())


def test_cli_corpus_run(tmp_path, capsys):
    assert main(["corpus", str(tmp_path), "--run"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == len(corpus_problems())
    assert all(line.split("\t")[1] in (PASSES, OBSTRUCTED) for line in lines)
    report = Report.from_json((tmp_path / "control-y2.report.json").read_text())
    assert report.verdict == PASSES


def test_module_entry_point(tmp_path):
    path = write(tmp_path, "p.json", {"n": 2, "d": 1, "mode": "tube", "phi": ["y1^2"]})
    proc = subprocess.run([sys.executable, "-m", "tubealg", "obstruct", str(path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == PASSES
