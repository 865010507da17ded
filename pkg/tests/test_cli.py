import json
import math

import pytest

from reslab import count_in_strip, system_lattice, ToralSuspension
from reslab.cli import main
from reslab.report import parse_key_value_document
from reslab.resonances import resonances_from_csv

CAT = {"system": {"type": "toral_suspension", "matrix": [[2, 1], [1, 1]]}, "horizon": 8}
HORSESHOE = {"system": {"type": "linear_horseshoe", "expansion": 4, "contraction": 0.25}, "horizon": 10}
MORSE_SMALE = {"system": {"type": "morse_smale",
                          "closed_orbits": [{"id": "g", "primitive_period": 1,
                                             "backward_poincare_eigenvalues": [math.exp(0.7)],
                                             "stable_count": 1}],
                          "fixed_points": [{"id": "p", "generator_eigenvalues": [-1, 2], "stable_count": 1}]},
               "horizon": 6}


@pytest.fixture
def write_config(tmp_path):
    def write(doc, name="cfg.json"):
        p = tmp_path / name
        p.write_text(json.dumps(doc, indent=2), encoding="utf-8")
        return str(p)
    return write


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_orbits(capsys, write_config):
    code, out, _ = run(capsys, "orbits", write_config(CAT), "--max-period", 3)
    assert code == 0
    assert out.splitlines() == ["total_period,re_weight,im_weight", "1.0,1.0,0.0", "2.0,1.0,0.0", "3.0,1.0,0.0"]


def test_orbits_fixed_point_sidecar(capsys, write_config, tmp_path):
    out_path = tmp_path / "classes.csv"
    code, _, _ = run(capsys, "orbits", write_config(MORSE_SMALE), "--max-period", 2, "-o", out_path)
    assert code == 0
    sidecar = (tmp_path / "classes.csv.fixed_points.csv").read_text().splitlines()
    assert sidecar[0] == "id,stable_count,generator_eigenvalues,weight_generator_eigenvalues"
    assert sidecar[1].startswith("p,1,")
    code, out, err = run(capsys, "orbits", write_config(MORSE_SMALE), "--max-period", 2)
    assert "generator_eigenvalues" in err and "generator_eigenvalues" not in out


def test_zeta_eval(capsys, write_config):
    code, out, _ = run(capsys, "zeta-eval", write_config(CAT), "--lambda=1,2", "--which", "both")
    assert code == 0
    doc = parse_key_value_document(out)
    assert complex(doc["zeta1"]) == pytest.approx(1 - complex(math.e ** -2 * math.cos(1), math.e ** -2 * math.sin(1)))
    assert doc["ruelle_heuristic"] == "true"


def test_zeta_eval_divergent_series_exits_2(capsys, write_config):
    code, out, err = run(capsys, "zeta-eval", write_config(CAT), "--lambda=1,-2", "--method", "series")
    assert code == 2
    assert "DivergentRegion" in err and out == ""


def test_exact_and_count_round_trip(capsys, write_config, tmp_path):
    cfg = write_config(CAT)
    res_path = tmp_path / "exact.csv"
    assert run(capsys, "exact", cfg, "--window=-101,101,-0.5,0.5", "-o", res_path)[0] == 0
    loaded = resonances_from_csv(res_path.read_text())
    lattice = system_lattice(ToralSuspension(((2, 1), (1, 1))))
    for E in (5, 50, 100):
        assert count_in_strip(loaded, E, 0.5) == count_in_strip(lattice, E, 0.5)
    code, out, _ = run(capsys, "count", cfg, "--emax", 100, "--emin", 10, "--beta", 0.5,
                       "--resonances", res_path)
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "E,N,per_unit_max" and rows[-1] == "100.0,31,1"


def test_count_fit_report(capsys, write_config, tmp_path):
    report = tmp_path / "fit.txt"
    code, out, _ = run(capsys, "count", write_config(CAT), "--emax", 1600, "--emin", 50, "--beta", 0.5,
                       "--fit", "--report", report)
    assert code == 0
    doc = parse_key_value_document(report.read_text())
    assert abs(float(doc["fitted_exponent"]) - 1) < 0.02
    assert doc["per_unit_max"] == "1"


def test_count_needs_beta(capsys, write_config):
    code, _, err = run(capsys, "count", write_config(CAT), "--emax", 100)
    assert code == 1 and "beta" in err


def test_locate(capsys, write_config):
    code, out, _ = run(capsys, "locate", write_config(HORSESHOE), "--window=-1,1,-2.5,-0.3")
    assert code == 0
    res = resonances_from_csv(out)
    assert sorted(r.multiplicity for r in res) == [1, 2]
    assert all(r.provenance.value == "Located" for r in res)


def test_locate_needs_window(capsys, write_config):
    code, _, err = run(capsys, "locate", write_config(CAT))
    assert code == 1 and "window" in err


def test_trace_check(capsys, write_config):
    code, out, _ = run(capsys, "trace-check", write_config(CAT), "--l", 0.5, "--d", 3)
    assert code == 0
    doc = parse_key_value_document(out)
    assert complex(doc["geometric_side"]) == 1
    assert float(doc["abs_residual"]) < 1e-9
    code, out, _ = run(capsys, "trace-check", write_config(HORSESHOE), "--l", 0.5, "--d", 4, "--A", 1)
    doc = parse_key_value_document(out)
    assert doc["within_bound_shape"] == "true" and doc["line_complete"] == "false"


def test_trace_check_bad_bump(capsys, write_config):
    code, _, err = run(capsys, "trace-check", write_config(CAT), "--l", 1.5, "--d", 3)
    assert code == 1


def test_config_errors_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "system": {\n    "type": "toral_suspension",\n    "matrix": [[2, 1], [1, 1]],\n'
                   '    "roof": 1,\n    "colour": "red"\n  }\n}')
    code, _, err = run(capsys, "exact", bad, "--window=-1,1,-1,1")
    assert code == 1 and "line 6" in err and "system.colour" in err
    code, _, err = run(capsys, "exact", tmp_path / "missing.json", "--window=-1,1,-1,1")
    assert code == 1


def test_bad_flag_value_is_usage_error(capsys, write_config):
    with pytest.raises(SystemExit) as info:
        main(["zeta-eval", write_config(CAT), "--lambda=1"])
    assert info.value.code == 2


def test_outputs_are_deterministic(capsys, write_config, tmp_path):
    cfg = write_config(HORSESHOE)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "locate", cfg, "--window=-20,20,-2.5,-0.3", "-o", a)
    run(capsys, "locate", cfg, "--window=-20,20,-2.5,-0.3", "-o", b)
    assert a.read_bytes() == b.read_bytes()


def test_failed_run_leaves_existing_output(capsys, write_config, tmp_path):
    out = tmp_path / "z.txt"
    out.write_text("previous\n")
    code, _, _ = run(capsys, "zeta-eval", write_config(CAT), "--lambda=1,-2", "--method", "series", "-o", out)
    assert code == 2
    assert out.read_text() == "previous\n"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["cfg.json", "z.txt"]
