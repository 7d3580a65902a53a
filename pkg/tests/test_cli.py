import io
import json

import pytest

from genrep.cli import run

COMMANDS = [
    ("abgroup", "abgroup.json"),
    ("abgroup", "abgroup_star.json"),
    ("induce", "induce.json"),
    ("katetov", "katetov.json"),
    ("katetov", "katetov_iso.json"),
    ("lzero", "lzero.json"),
    ("freeprod", "freeprod.json"),
    ("unitary", "unitary.json"),
    ("validate", "z2.json"),
    ("validate", "hamming4.json"),
    ("pipeline", "pipeline_density.json"),
    ("pipeline", "pipeline_induce.json"),
    ("pipeline", "pipeline_empty.json"),
]


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("command,name", COMMANDS)
def test_every_sample_input_succeeds(data_dir, command, name):
    code, out, err = invoke(command, str(data_dir / name))
    assert code == 0, err
    report = json.loads(out)
    assert set(report) == {"provenance", "config", "input", "result"}
    assert report["provenance"]["command"] == command


def test_reports_are_deterministic(data_dir):
    a = invoke("katetov", str(data_dir / "katetov.json"))
    b = invoke("katetov", str(data_dir / "katetov.json"))
    assert a == b


def test_triangle_violation_exits_2_with_witness(data_dir):
    code, out, err = invoke("validate", str(data_dir / "bad_metric.json"))
    assert code == 2
    report = json.loads(out)
    assert report["error"]["kind"] == "input"
    assert report["error"]["witness"]["kind"] == "triangle"
    assert "error" in err


def test_unreduced_fraction_rejected(data_dir):
    code, out, err = invoke("validate", str(data_dir / "unreduced.json"))
    assert code == 2
    assert "2/4" in err and "reduced" in err


def test_negative_distance_names_path(data_dir):
    code, out, err = invoke("validate", str(data_dir / "negative.json"))
    assert code == 2
    assert json.loads(out)["error"]["path"] == "$.dist[0][1]"
    assert "negative" in err


def test_missing_file_and_bad_json(tmp_path):
    code, _, err = invoke("validate", str(tmp_path / "nope.json"))
    assert code == 2 and "cannot read" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, err = invoke("validate", str(bad))
    assert code == 2 and "invalid JSON" in err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["--version"])
    assert exc.value.code == 0
    assert "genrep" in capsys.readouterr().out


def test_oscheck_hamming_cube_holds(data_dir):
    code, out, err = invoke("oscheck", "--group", str(data_dir / "hamming4.json"), "--epsilon", "3/5",
                            "--A", "0,1")
    assert code == 0, err
    result = json.loads(out)["result"]
    assert result["holds"] is True


def test_sampled_oscheck_requires_seed(data_dir):
    args = ("oscheck", "--group", str(data_dir / "z2.json"), "--epsilon", "1/2", "--A", "0", "--sample")
    code, _, err = invoke(*args)
    assert code == 2 and "--seed" in err
    code, out, _ = invoke(*args, "--seed", "5")
    assert code == 0
    assert invoke(*args, "--seed", "5")[1] == out


def test_csv_output(data_dir):
    code, out, _ = invoke("lzero", str(data_dir / "lzero.json"), "--out", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "key,value"
    keys = {line.split(",", 1)[0] for line in lines[1:]}
    assert "result.image_order" in keys and "provenance.version" in keys


def test_nonpositive_cap_rejected(data_dir):
    code, _, _ = invoke("abgroup", str(data_dir / "abgroup.json"), "--cap", "0")
    assert code == 2


def test_pipeline_density_reaches_full_closure(data_dir):
    code, out, err = invoke("pipeline", str(data_dir / "pipeline_density.json"))
    assert code == 0, err
    stages = json.loads(out)["result"]["stages"]
    assert len(stages) == 2
    assert stages[1]["result"]["covering_radius"] == "0"
    # the second stage input is the resolved output of the first
    assert stages[1]["input"]["K"] == stages[0]["result"]["value_group"]


def test_pipeline_induce_output_validates(data_dir):
    code, out, err = invoke("pipeline", str(data_dir / "pipeline_induce.json"))
    assert code == 0, err
    stages = json.loads(out)["result"]["stages"]
    assert stages[-1]["command"] == "validate"
    assert stages[-1]["result"]["valid"] is True


def test_pipeline_empty(data_dir):
    code, out, _ = invoke("pipeline", str(data_dir / "pipeline_empty.json"))
    assert code == 0
    assert json.loads(out)["result"] == {"stages": []}


def test_pipeline_stage_errors(tmp_path):
    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps({"stages": [{"command": "lzero", "input": {"K": {"$prev": "x"}, "level": 1,
                                                                              "mode": "density"}}]}))
    code, out, err = invoke("pipeline", str(manifest))
    assert code == 2
    assert json.loads(out)["error"]["stage"] == 0
    manifest.write_text(json.dumps({"stages": [{"command": "frobnicate"}]}))
    code, _, err = invoke("pipeline", str(manifest))
    assert code == 2 and "frobnicate" in err
