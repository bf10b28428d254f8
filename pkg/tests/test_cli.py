import json
import subprocess
import sys

import pytest

from pcgeom.cli import RunConfig, load_manifold, load_spec, main, run, to_json
from pcgeom.examples import builtin_text, example_names
from pcgeom.specfile import SpecParseError, loads
from pcgeom.structure import AxiomError


def run_main(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_list_examples(capsys):
    code, out, _ = run_main(capsys, "list-examples")
    assert code == 0
    for name in example_names():
        assert name in out


def test_export_example_roundtrip(capsys, tmp_path):
    code, out, _ = run_main(capsys, "export-example", "sasakian-r3")
    assert code == 0
    f = tmp_path / "e1.pcm"
    f.write_text(out)
    S = load_spec(f)
    assert S.name == "sasakian-r3"
    code, _, err = run_main(capsys, "export-example", "nope")
    assert code == 2 and "unknown example" in err


def test_verify_e1_seed42_exit_zero(capsys):
    code, out, _ = run_main(capsys, "verify", "--manifold", "E1", "--seed", "42", "--points", "8")
    assert code == 0
    assert "0 failed" in out


def test_json_report_schema(capsys):
    code, out, _ = run_main(capsys, "verify", "--manifold", "E3", "--suite", "contact,normal", "--points", "4", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["example"] == "kenmotsu-warped"
    assert doc["config"]["suites"] == ["contact", "normal"]
    ids = doc["identities"]
    contact = [r for r in ids if r["suite"] == "contact"]
    assert contact and all(r["status"] == "skip" and r["skipped_reason"] for r in contact)
    normal = [r for r in ids if r["suite"] == "normal" and r["status"] != "skip"]
    assert normal and all(r["status"] == "pass" for r in normal)
    for r in ids:
        assert set(r) >= {"id", "example", "max_residual", "mean_residual", "status", "skipped_reason"}
    assert doc["summary"]["skipped"] == sum(r["status"] == "skip" for r in ids)


def test_json_seventeen_digits():
    res = run(RunConfig("E1", suites=("geometry",), points=2))
    text = to_json(res)
    assert '"tol": 9.9999999999999995e-08' in text
    assert json.loads(text)["config"]["tol"] == 1e-7


def test_json_is_byte_identical_across_runs(tmp_path):
    outs = []
    for k in range(2):
        f = tmp_path / f"r{k}.json"
        main(["verify", "--manifold", "E2", "--points", "4", "--seed", "7", "--format", "json", "-o", str(f)])
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]


def test_tiny_tolerance_exit_one(capsys):
    code, out, _ = run_main(capsys, "verify", "--manifold", "hopf-s3", "--points", "4", "--tol", "1e-15")
    assert code == 1
    assert "FAIL" in out


def test_parse_error_reports_line(capsys, tmp_path):
    f = tmp_path / "bad.pcm"
    f.write_text(builtin_text("sasakian-r3").replace("g 2 2 = 1/4", "g 2 2 = 1/*4"))
    code, _, err = run_main(capsys, "verify", "--manifold", str(f))
    assert code == 2
    assert "parse error" in err and "bad.pcm:" in err


def test_axiom_error_names_axiom(capsys, tmp_path):
    f = tmp_path / "eta.pcm"
    f.write_text(builtin_text("sasakian-r3").replace("xi 3 = 2", "xi 3 = 2.5"))
    with pytest.raises(AxiomError):
        load_spec(f)
    code, _, err = run_main(capsys, "verify", "--manifold", str(f))
    assert code == 2 and "axiom" in err


def test_asymmetric_metric_rejected_at_parse(capsys, tmp_path):
    f = tmp_path / "asym.pcm"
    f.write_text(builtin_text("sasakian-r3").replace("g 3 1 = -y/4", "g 3 1 = -y/4\ng 1 3 = y/4"))
    with pytest.raises(SpecParseError):
        loads(f.read_text())
    code, _, err = run_main(capsys, "verify", "--manifold", str(f))
    assert code == 2 and "parse error" in err


def test_bad_arguments(capsys):
    assert run_main(capsys, "verify", "--manifold", "no-such-thing")[0] == 2
    assert run_main(capsys, "verify", "--manifold", "E1", "--suite", "bogus")[0] == 2
    assert run_main(capsys, "verify", "--manifold", "E1", "--points", "0")[0] == 2
    assert run_main(capsys, "verify", "--manifold", "E1", "--tol", "-1")[0] == 2
    with pytest.raises(SystemExit):
        main(["verify", "--manifold", "E1", "--d-eta", "third"])


def test_sampling_error(capsys, tmp_path):
    text = builtin_text("hopf-s3").replace("sample_box = th:[pi/8, 3*pi/8]", "sample_box = th:[0, 1e-10]")
    f = tmp_path / "degenerate.pcm"
    f.write_text(text)
    code, _, err = run_main(capsys, "verify", "--manifold", str(f), "--points", "2")
    assert code == 2 and "sampling error" in err


def test_d_eta_override_is_recorded():
    res = run(RunConfig("E1", suites=("structure",), points=2, d_eta="one"))
    assert res.config["d_eta"] == "one"
    assert not res.classification.contact_metric


def test_load_manifold_by_label_and_path(tmp_path):
    assert load_manifold("E4").name == "cosymplectic-flat"
    f = tmp_path / "x.pcm"
    f.write_text(builtin_text("cosymplectic-flat"))
    assert load_manifold(str(f)).name == "cosymplectic-flat"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pcgeom", "list-examples"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "sasakian-r3" in proc.stdout
