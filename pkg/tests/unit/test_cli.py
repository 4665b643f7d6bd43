import sys
import os
import json
import math

import pytest
from unittest.mock import patch
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

# Add parent directory to path so we can import the app package
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.cli import main
from app.core.database import Base
from app.services.sat_core import to_dimacs

SAMPLE_DIR = os.path.join(os.path.dirname(__file__), '..', '..', 'sample_data')


def sample(name):
    return os.path.join(SAMPLE_DIR, name)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_three_clause_instance(capsys):
    code, out, _ = run_cli(capsys, "solve", sample("three_clause.cnf"))
    report = json.loads(out)

    assert code == 10
    assert report["schema"] == 1
    assert report["n"] == 3
    assert report["num_clauses"] == 3
    assert report["verdict"] == "SAT"
    assert report["crossing_step"] == 1
    assert abs(report["q_squared"] - 0.125) <= 1e-12
    assert report["params"] == {"a": 3.71, "tau": 0.2, "k_max": 10}
    assert "wall_time" not in report
    assert "r" not in report


def test_solve_contradiction(capsys):
    code, out, _ = run_cli(capsys, "solve", sample("contradiction.cnf"))
    report = json.loads(out)

    assert code == 20
    assert report["verdict"] == "UNSAT"
    assert report["q_squared"] == 0.0
    assert "crossing_step" not in report


def test_solve_empty_formula_precheck(capsys):
    code, out, _ = run_cli(capsys, "solve", sample("empty.cnf"))
    report = json.loads(out)

    assert code == 10
    assert report["crossing_step"] == 0


def test_solve_with_oracle(capsys):
    code, out, _ = run_cli(capsys, "solve", sample("pigeonhole_3_2.cnf"), "--oracle", "--with-trajectory")
    report = json.loads(out)

    assert code == 20
    assert report["r"] == 0
    assert report["trajectory"] == [0.0] * (report["params"]["k_max"] + 1)


def test_solve_reports_are_byte_stable(capsys):
    _, first, _ = run_cli(capsys, "solve", sample("three_clause.cnf"), "--oracle")
    _, second, _ = run_cli(capsys, "solve", sample("three_clause.cnf"), "--oracle")

    assert first == second


def test_solve_timing_opt_in(capsys):
    _, out, _ = run_cli(capsys, "solve", sample("three_clause.cnf"), "--timing")

    assert json.loads(out)["wall_time"] >= 0.0


def test_solve_flag_overrides(capsys):
    _, out, _ = run_cli(capsys, "solve", sample("three_clause.cnf"), "--a", "3.9", "--tau", "0.05", "--kmax", "5")

    assert json.loads(out)["params"] == {"a": 3.9, "tau": 0.05, "k_max": 5}


def test_solve_trace_and_dump(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    dump = tmp_path / "state.csv"
    code, _, _ = run_cli(capsys, "solve", sample("three_clause.cnf"), "--trace", str(trace), "--dump-state", str(dump))

    assert code == 10
    header, first = trace.read_text().splitlines()[:2]
    column, label = header.split(",")
    step, value = first.split(",")
    assert (column, step) == ("step", "0")
    # q^2 for n=3 is 1/8 only to within rounding of the amplitudes
    assert float(label) == pytest.approx(0.125, abs=1e-12)
    assert float(value) == float(label)
    lines = dump.read_text().splitlines()
    assert len(lines) == 17
    assert lines[2].startswith("1,000|1,0.35355339059327")


def test_solve_parse_error(capsys, tmp_path):
    path = tmp_path / "bad.cnf"
    path.write_text("p cnf 2 1\n1 3 0\n")
    code, out, err = run_cli(capsys, "solve", str(path))

    assert code == 1
    assert out == ""
    assert "error: line 2" in err


def test_solve_over_bound(capsys, tmp_path):
    path = tmp_path / "wide.cnf"
    path.write_text("p cnf 21 0\n")
    code, _, err = run_cli(capsys, "solve", str(path))

    assert code == 1
    assert "exceeds" in err


def test_solve_missing_file(capsys):
    code, _, err = run_cli(capsys, "solve", sample("no_such_file.cnf"))

    assert code == 1
    assert "error:" in err


@pytest.mark.parametrize("name, r, code", [("three_clause.cnf", 1, 10), ("empty.cnf", 4, 10), ("contradiction.cnf", 0, 20)])
def test_oracle(capsys, name, r, code):
    exit_code, out, _ = run_cli(capsys, "oracle", sample(name))
    report = json.loads(out)

    assert exit_code == code
    assert report["r"] == r
    assert report["fraction"] == r / 2 ** report["n"]


def test_solve_json_instance(capsys):
    code, out, _ = run_cli(capsys, "solve", sample("three_clause.json"))
    report = json.loads(out)

    assert code == 10
    assert report["instance"].endswith("three_clause.json")
    assert report["n"] == 3
    assert report["crossing_step"] == 1


def test_oracle_json_matches_dimacs(capsys):
    _, from_json, _ = run_cli(capsys, "oracle", sample("three_clause.json"))
    _, from_dimacs, _ = run_cli(capsys, "oracle", sample("three_clause.cnf"))

    assert json.loads(from_json)["r"] == json.loads(from_dimacs)["r"] == 1


def test_oracle_formula_flag(capsys):
    _, plain, _ = run_cli(capsys, "oracle", sample("three_clause.cnf"))
    _, out, _ = run_cli(capsys, "oracle", sample("three_clause.cnf"), "--formula")

    assert "formula" not in json.loads(plain)
    with open(sample("three_clause.json"), encoding="utf-8") as f:
        assert json.loads(out)["formula"] == json.load(f)


def test_solve_agrees_with_oracle(capsys, tmp_path, rng, random_formula):
    path = tmp_path / "random.cnf"
    for _ in range(500):
        n = int(rng.integers(1, 17))
        formula = random_formula(n, int(rng.integers(1, 4 * n + 1)))
        path.write_text(to_dimacs(formula))

        solve_code, solve_out, _ = run_cli(capsys, "solve", str(path))
        oracle_code, oracle_out, _ = run_cli(capsys, "oracle", str(path))

        assert solve_code == oracle_code
        assert (json.loads(solve_out)["verdict"] == "SAT") == (json.loads(oracle_out)["r"] > 0)


def test_amplify_csv(capsys):
    code, out, _ = run_cli(capsys, "amplify", "--q2", "0.125")
    lines = out.splitlines()

    assert code == 0
    assert lines[0] == "step,0.125"
    assert len(lines) == 3


def test_amplify_zero_column(capsys):
    _, out, _ = run_cli(capsys, "amplify", "--q2", "0")
    lines = out.splitlines()

    assert lines[0] == "step,0.0"
    assert len(lines) == 21
    assert all(line.endswith(",0.0") for line in lines[1:])


def test_amplify_json_twenty_qubits(capsys):
    _, out, _ = run_cli(capsys, "amplify", "--q2", "9.5367431640625e-7", "--json")
    data = json.loads(out)

    assert data["crossing_step"] == 10
    assert data["params"]["k_max"] == 19
    assert len(data["values"]) == 11


def test_amplify_table(capsys):
    _, out, _ = run_cli(capsys, "amplify", "--q2", "0.125", "--q2", "0", "--kmax", "4", "--json")
    data = json.loads(out)

    assert data["steps"] == [0, 1, 2, 3, 4]
    assert data["crossings"] == {"0.125": 1, "0.0": None}


def test_amplify_start_past_tau(capsys):
    _, out, _ = run_cli(capsys, "amplify", "--q2", "1.0", "--json")
    data = json.loads(out)

    assert data["crossing_step"] == 0
    assert data["values"] == [1.0]


def test_amplify_rejects_non_finite(capsys):
    code, out, err = run_cli(capsys, "amplify", "--q2", "inf")

    assert code == 1
    assert out == ""
    assert "error: q_squared must be finite" in err


def test_amplify_rejects_tau_in_band(capsys):
    code, _, err = run_cli(capsys, "amplify", "--q2", "0.1", "--tau", "0.3")

    assert code == 1
    assert "chaotic band" in err


def test_lyapunov_chaotic(capsys):
    code, out, _ = run_cli(capsys, "lyapunov", "--samples", "20000")
    report = json.loads(out)

    assert code == 0
    assert report["exponent"] > 0.3
    assert report["used"] == 20000


def test_lyapunov_contracting(capsys):
    _, out, _ = run_cli(capsys, "lyapunov", "--a", "0.5", "--samples", "1000")

    assert json.loads(out)["exponent"] == pytest.approx(math.log(0.5), abs=1e-9)


def test_lyapunov_superstable(capsys):
    _, out, _ = run_cli(capsys, "lyapunov", "--a", "2.0", "--x0", "0.5", "--samples", "100")
    report = json.loads(out)

    assert "Infinity" not in out
    assert report["exponent"] is None
    assert report["used"] == 0
    assert report["skipped"] == 100


def test_lyapunov_superstable_approach(capsys):
    _, out, _ = run_cli(capsys, "lyapunov", "--a", "2.0", "--x0", "0.3", "--samples", "100")
    report = json.loads(out)

    assert report["exponent"] < -30.0
    assert report["skipped"] == 0


def test_gate_evolve_rabi_summary(capsys):
    code, out, _ = run_cli(capsys, "gate", "evolve", sample("rabi_gate.json"), "--json")
    data = json.loads(out)

    assert code == 0
    assert data["final"][0] == pytest.approx([0.0, 0.0], abs=1e-6)
    assert data["final"][1] == pytest.approx([0.0, -1.0], abs=1e-6)
    assert data["linear_deviation"] < 1e-6


def test_gate_evolve_rabi_trace(capsys):
    _, out, _ = run_cli(capsys, "gate", "evolve", sample("rabi_gate.json"))
    lines = out.splitlines()

    assert lines[0] == "t,re0,im0,re1,im1,norm"
    assert lines[1] == "0.0,1.0,0.0,0.0,0.0,1.0"
    # 1571 steps sampled every 100, plus t=0 and the final step
    assert len(lines) == 18


def test_gate_evolve_trace_file(capsys, tmp_path):
    trace = tmp_path / "gate.csv"
    _, out, _ = run_cli(capsys, "gate", "evolve", sample("rabi_gate.json"), "--trace", str(trace), "--dt", "0.01")

    assert out == ""
    assert len(trace.read_text().splitlines()) == 4


def test_gate_evolve_infinite_time(capsys, tmp_path):
    path = tmp_path / "forever.json"
    path.write_text('{"A": [[0, 1], [1, 0]], "phi0": [1, 0], "T": Infinity}')
    code, _, err = run_cli(capsys, "gate", "evolve", str(path))

    assert code == 1
    assert "must be finite" in err


def test_gate_evolve_cross_density(capsys):
    _, out, _ = run_cli(capsys, "gate", "evolve", sample("cross_density_gate.json"), "--json")
    data = json.loads(out)
    expected = [math.cos(0.5) / math.sqrt(2), -math.sin(0.5) / math.sqrt(2)]

    assert data["final"][0] == pytest.approx(expected, abs=1e-9)
    assert data["final"][1] == pytest.approx(expected, abs=1e-9)
    assert "linear_deviation" not in data


def test_gate_slater_pair(capsys):
    _, out, _ = run_cli(capsys, "gate", "slater", sample("slater_pair.json"), "--amplitudes")
    report = json.loads(out)
    s = 1 / math.sqrt(2)

    assert report["N"] == 2
    assert report["is_zero"] is False
    assert report["norm"] == pytest.approx(1.0)
    assert [entry["index"] for entry in report["amplitudes"]] == [[0, 1], [1, 0]]
    assert report["amplitudes"][0]["value"] == pytest.approx([s, 0.0])
    assert report["amplitudes"][1]["value"] == pytest.approx([-s, 0.0])


def test_gate_slater_identical(capsys):
    code, out, _ = run_cli(capsys, "gate", "slater", sample("slater_identical.json"))
    report = json.loads(out)

    assert code == 0
    assert report["is_zero"] is True
    assert report["norm"] == 0.0


def test_gate_overlap(capsys):
    _, out, _ = run_cli(capsys, "gate", "overlap", sample("overlap_pair.json"))
    report = json.loads(out)

    assert report["overlap"] == pytest.approx([0.48, 0.48], abs=1e-12)
    assert report["match"] is True


def test_gate_overlap_missing_field(capsys, tmp_path):
    path = tmp_path / "half.json"
    path.write_text(json.dumps({"a": [[1.0, 0.0]]}))
    code, _, err = run_cli(capsys, "gate", "overlap", str(path))

    assert code == 1
    assert "fields" in err


def test_gate_hf(capsys):
    code, out, _ = run_cli(capsys, "gate", "hf", sample("hf_plane_waves.json"), "--dt", "0.01", "--steps", "20", "--every", "10")
    lines = out.splitlines()

    assert code == 0
    assert lines[0] == "step,t,norm_1,norm_2,orthonormality_error"
    assert [line.split(",")[0] for line in lines[1:]] == ["0", "10", "20"]


def test_record_and_list_runs(capsys):
    engine = create_engine("sqlite://", connect_args={"check_same_thread": False}, poolclass=StaticPool)
    Base.metadata.create_all(bind=engine)
    Session = sessionmaker(bind=engine)

    def get_test_db():
        db = Session()
        try:
            yield db
        finally:
            db.close()

    with patch('app.cli.get_db', get_test_db), patch('app.cli.init_db'):
        run_cli(capsys, "solve", sample("three_clause.cnf"), "--record")
        run_cli(capsys, "solve", sample("three_clause.cnf"), "--record")
        run_cli(capsys, "solve", sample("contradiction.cnf"), "--record")

        _, out, _ = run_cli(capsys, "runs", "--sort-by", "q_squared", "--order", "desc")
        listing = json.loads(out)
        assert listing["total"] == 2
        assert [item["verdict"] for item in listing["items"]] == ["SAT", "UNSAT"]

        _, out, _ = run_cli(capsys, "runs", "--search", "contradiction")
        assert json.loads(out)["total"] == 1

        _, out, _ = run_cli(capsys, "runs", "--clear")
        assert json.loads(out)["message"] == "Successfully deleted 2 runs"

    Base.metadata.drop_all(bind=engine)
