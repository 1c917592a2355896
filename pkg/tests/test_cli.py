import json

import pytest

from kahler_fedosov.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_models_lists_builtins(capsys):
    code, out, _ = run(capsys, "models")
    assert code == 0
    assert [line.split(":")[0] for line in out.splitlines()] == ["flat-c1", "flat-c2", "cp1", "disk"]


def test_models_validates_files(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"mode": "kahler", "n": 1, "omega": [["0"]]}))
    code, _, err = run(capsys, "models", "--model-file", str(bad))
    assert code == 2 and "not invertible" in err
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"mode": "kahler", "n": 1, "omega": [["i/(1+z1*zb1)^2"]],
                                "drho0": ["-zb1/(1+z1*zb1)"], "name": "my-cp1"}))
    code, out, _ = run(capsys, "models", "--model-file", str(good))
    assert code == 0 and "my-cp1: valid" in out
    broken = tmp_path / "broken.json"
    broken.write_text('{"mode": ')
    code, _, err = run(capsys, "models", "--model-file", str(broken))
    assert code == 2 and "line 1 column" in err


def test_star_coordinates(capsys):
    code, out, _ = run(capsys, "star", "zb1", "z1", "--model", "cp1", "--format", "json")
    assert code == 0
    coeffs = json.loads(out)["coefficients"]
    assert coeffs[0]["value"] == "z1*zb1"
    assert coeffs[1]["value"] != "0"


def test_star_unit_and_holomorphic_left(capsys):
    _, out, _ = run(capsys, "star", "1", "z1*zb1^2")
    assert out.splitlines() == ["C_0 = z1*zb1^2", "C_1 = 0", "C_2 = 0", "C_3 = 0"]
    _, out, _ = run(capsys, "star", "z", "z")
    assert out.splitlines()[0] == "C_0 = z1^2"
    assert all(line.endswith("= 0") for line in out.splitlines()[1:])


def test_star_warns_when_cap_hides_order(capsys):
    code, _, err = run(capsys, "star", "z", "zb1", "--order", "5")
    assert code == 0 and "warning" in err


@pytest.mark.parametrize("sign,op,section,expected", [
    ("+", "f:z", "1", "z1"),
    ("+", "xi:1", "z", "1"),
    ("-", "xi:1", "z", "-1"),
])
def test_act_examples(capsys, sign, op, section, expected):
    code, out, _ = run(capsys, "act", op, section, "--sign", sign, "--model", "cp1")
    assert code == 0
    assert out.strip() == expected


@pytest.mark.parametrize("argv", [
    ["act", "g:z", "1"],
    ["act", "f:zb1", "1"],
    ["act", "f:z", "zb1"],
    ["star", "z+", "1"],
    ["verify", "--weight", "1"],
    ["verify", "--level", "0"],
    ["verify", "--model", "nowhere"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_verify_json_schema(capsys):
    code, out, _ = run(capsys, "verify", "--model", "cp1", "--suite", "kernel", "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["schema-version"] == 1
    assert len(report["conventions-fingerprint"]) == 16
    ids = [c["check-id"] for c in report["checks"]]
    assert ids == sorted(ids)
    assert set(report["checks"][0]) >= {"check-id", "model", "cap", "pass", "residual-description"}


def test_verify_low_cap_flagged(capsys):
    code, out, err = run(capsys, "verify", "--model", "cp1", "--weight", "2", "--suite", "fedosov")
    assert code == 0
    assert "low-cap" in err
    assert all("[low-cap]" in line for line in out.splitlines() if line.startswith("PASS"))


def test_verify_user_real_model(capsys, tmp_path):
    path = tmp_path / "real.json"
    path.write_text(json.dumps({"mode": "real", "n": 1, "omega": [["0", "1+x^2"], ["-1-x^2", "0"]]}))
    code, out, _ = run(capsys, "verify", "--model-file", str(path))
    assert code == 0
    assert "curvature-equation/moyal" in out


def test_verify_cp1_failures_are_only_the_right_action_frame(capsys):
    code, out, _ = run(capsys, "verify", "--model", "cp1")
    failed = [line.split()[1] for line in out.splitlines() if line.startswith("FAIL")]
    assert failed == ["frame-annihilated-@k=1", "frame-annihilated-@k=2"]
    assert code == 1


@pytest.mark.parametrize("model", ["cp1", "flat-c1"])
def test_verify_all_passes(capsys, model):
    code, out, _ = run(capsys, "verify", "--model", model, "--suite", "all")
    assert code == 0, "\n".join(line for line in out.splitlines() if line.startswith("FAIL"))


def test_verify_is_deterministic(capsys):
    first = run(capsys, "verify", "--model", "disk", "--format", "json")
    second = run(capsys, "verify", "--model", "disk", "--format", "json", "--jobs", "1")
    assert first == second
