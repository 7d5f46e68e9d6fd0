import csv
import io
import json
import subprocess
import sys

import jsonschema
import pytest

from nonclassical import schemas
from nonclassical.cli import parse_moments, parse_state_spec, run
from nonclassical.errors import SpecParseError, TruncationTooSmallError, UnknownKindError


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_stats_fock_one():
    code, out, _ = call("stats", "--state", '{"kind":"fock","n":1,"dim":8}')
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, schemas.STATS_REPORT)
    assert report["k"] == -1 and report["sub_poisson"] is True


def test_stats_vacuum_has_null_q():
    code, out, _ = call("stats", "--state", '{"kind":"fock","n":0,"dim":4}')
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, schemas.STATS_REPORT)
    assert report["mandel_q"] is None


def test_stats_out_of_range():
    code, _, err = call("stats", "--state", '{"kind":"fock","n":9,"dim":8}')
    assert code == 2
    assert "out-of-range" in err


@pytest.mark.parametrize(
    "spec",
    [
        '{"kind":"squeezed","dim":8}',
        '{"kind":"fock","dim":8}',
        '{"kind":"fock","n":1}',
        '{"kind":"superposition","coeffs":[0,0],"dim":4}',
        '{"kind":"fock","n":1,"dim":8,"color":"red"}',
        "{not json",
    ],
)
def test_stats_parse_errors(spec):
    code, _, err = call("stats", "--state", spec)
    assert code == 3
    assert "parse error" in err


def test_parse_state_spec_field_listing():
    with pytest.raises(SpecParseError) as info:
        parse_state_spec('{"kind":"coherent","dim":"big"}')
    assert set(info.value.fields) == {"dim", "alpha_re"}
    with pytest.raises(UnknownKindError):
        parse_state_spec('{"kind":"squeezed","dim":8}')


def test_parse_state_spec_kinds():
    assert parse_state_spec('{"kind":"fock","n":2,"dim":8}').build().populations[2] == 1
    rho = parse_state_spec('{"kind":"density","dim":2,"matrix":[[0.5,[0,0.5]],[[0,-0.5],0.5]]}').build()
    assert rho.matrix[0, 1] == 0.5j
    psi = parse_state_spec('{"kind":"superposition","dim":4,"coeffs":[0,1,[0,1]]}').build()
    assert psi.populations[1] == pytest.approx(0.5)


def test_coherent_too_small_suggests_dim():
    spec = parse_state_spec('{"kind":"coherent","alpha_re":5,"dim":8}')
    with pytest.raises(TruncationTooSmallError) as info:
        spec.build()
    need = info.value.required_dim
    parse_state_spec(f'{{"kind":"coherent","alpha_re":5,"dim":{need}}}').build()
    code, _, err = call("stats", "--state", '{"kind":"coherent","alpha_re":5,"dim":8}')
    assert code == 2 and f"dim >= {need}" in err


def test_k_landscape_vertex():
    code, out, _ = call("k-landscape", "--support", "1,2")
    assert code == 0
    result = json.loads(out)
    jsonschema.validate(result, schemas.LANDSCAPE_RESULT)
    assert result["min_k"] == -2 and result["argmin"] == {"1": 0.0, "2": 1.0}


@pytest.mark.parametrize("method", ["grid", "pgd"])
def test_k_landscape_methods(method):
    code, out, _ = call("k-landscape", "--support", "0,1,2", "--method", method, "--resolution", "51")
    assert code == 0
    result = json.loads(out)
    jsonschema.validate(result, schemas.LANDSCAPE_RESULT)
    assert result["min_k"] == pytest.approx(-2, abs=1e-8)


def test_k_landscape_scan_csv(tmp_path):
    path = tmp_path / "scan.csv"
    code, _, _ = call("k-landscape", "--support", "0,1", "--resolution", "3", "--scan-out", str(path))
    assert code == 0
    rows = list(csv.DictReader(path.open(newline="")))
    assert [float(r["k"]) for r in rows] == [0.0, -0.25, -1.0]


def test_k_landscape_duplicate_support():
    code, _, _ = call("k-landscape", "--support", "2,2")
    assert code == 2


def test_classicality_from_state():
    code, out, _ = call("classicality", "--state", '{"kind":"fock","n":2,"dim":12}')
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, schemas.WITNESS_REPORT)
    assert report["classical_feasible"] is False and report["fit"]["feasible"] is False


@pytest.mark.parametrize("content", ["[1, 4, 16, 64, 256]", "1,4,16\n64,256\n", "1 4 16 64 256"])
def test_classicality_from_moment_file(tmp_path, content):
    path = tmp_path / "m.txt"
    path.write_text(content)
    code, out, _ = call("classicality", "--moments", str(path))
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, schemas.WITNESS_REPORT)
    assert report["classical_feasible"] and report["fit"]["feasible"]


def test_parse_moments_rejects_garbage():
    with pytest.raises(SpecParseError):
        parse_moments("1, two, 3")


def test_g2_csv_and_json():
    model = '{"kind":"two-level-driven","gamma":1,"omega_r":0.05}'
    code, out, _ = call("g2", "--model", model, "--tau-max", "10", "--tau-points", "11")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == list(schemas.SERIES_CSV_COLUMNS)
    assert float(rows[0]["p_raw"]) == 0.0 and rows[0]["stderr"] == ""
    code, out, _ = call("g2", "--model", model, "--tau-points", "11", "--format", "json")
    report = json.loads(out)
    jsonschema.validate(report, schemas.CORRELATION_REPORT)
    assert report["report"]["antibunched"] is True


def test_g2_model_fields_from_json():
    model = '{"kind":"two-level-driven","gamma":2,"omega_r":0.1,"tau_max":4,"tau_points":9}'
    code, out, _ = call("g2", "--model", model)
    assert code == 0
    assert len(list(csv.DictReader(io.StringIO(out)))) == 9


def test_g2_undriven_cavity_is_precondition_error():
    code, _, err = call("g2", "--model", '{"kind":"damped-cavity","gamma":1,"dim":6}')
    assert code == 2 and "normalization-undefined" in err


def test_classical_process_json():
    model = '{"kind":"random-telegraph","gamma":1,"tau_max":2,"tau_points":5,"samples":20000,"seed":7}'
    code, out, _ = call("classical-process", "--model", model, "--format", "json")
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, schemas.CORRELATION_REPORT)
    assert report["report"]["antibunched"] is False
    assert all(se > 0 for se in report["stderr"])


def test_classical_process_is_byte_deterministic(tmp_path):
    model = '{"kind":"ou-intensity","rate":1,"sigma":1,"offset":0.3}'
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.csv"
        code, _, _ = call(
            "classical-process", "--model", model, "--samples", "5000", "--seed", "42",
            "--tau-max", "2", "--tau-points", "5", "--workers", "2", "--out", str(path),
        )
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_unknown_kind_model():
    code, _, _ = call("classical-process", "--model", '{"kind":"shot-noise"}')
    assert code == 3


def test_unknown_subcommand_and_bad_flags():
    code, _, err = call("frobnicate")
    assert code == 64 and "usage" in err
    assert call()[0] == 64
    assert call("stats")[0] == 64
    assert call("stats", "--state", "{}", "--bogus")[0] == 64


def test_help():
    code, out, _ = call("--help")
    assert code == 0 and "k-landscape" in out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "nonclassical", "k-landscape", "--support", "1,2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["min_k"] == -2
