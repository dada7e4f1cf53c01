import json

import pytest

from quatsub.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_report_all_on_anti_invariant_example(capsys):
    code, out, _ = run(capsys, "report", "--all", "--fixture", "example-3-1", "--samples", "8")
    assert code == 0
    assert "classification: h-anti-invariant" in out
    assert "product: flags consistent with RiemannianProduct" in out
    assert "FAILED" not in out


def test_theorem_harmonic_on_lagrangian_example(capsys):
    code, out, _ = run(capsys, "theorem", "harmonic", "--fixture", "example-3-2")
    assert code == 0
    assert "theorem harmonic: pass (property holds: True)" in out


def test_dimension_six_manifest_exits_two(tmp_path, capsys):
    path = tmp_path / "six.toml"
    path.write_text(
        'structure = "canonical"\n[total]\ndim = 6\nbox = [[-1,1],[-1,1],[-1,1],[-1,1],[-1,1],[-1,1]]\n'
        '[base]\ndim = 2\n[map]\ncomponents = ["x1", "x2"]\n'
    )
    code, _, err = run(capsys, "check", "--manifest", str(path))
    assert code == 2
    assert "dimension not divisible by 4" in err


@pytest.mark.parametrize(
    "argv",
    [
        ("check", "--fixture", "no-such"),
        ("theorem", "bogus", "--fixture", "polar"),
        ("tensors", "--fixture", "polar", "--point", "1,a"),
        ("tensors", "--fixture", "polar", "--point", "9,0"),
        ("check",),
        ("frobnicate",),
    ],
)
def test_invalid_input_exits_two(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_failed_verdict_exits_one(tmp_path, capsys):
    path = tmp_path / "sum.toml"
    path.write_text('[total]\ndim = 2\nbox = [[-1,1],[-1,1]]\n[base]\ndim = 1\n[map]\ncomponents = "x1 + x2"\n')
    code, out, _ = run(capsys, "check", "--manifest", str(path))
    assert code == 1
    assert "submersion but not Riemannian submersion" in out


def test_classify_none_still_exits_zero(capsys):
    code, out, _ = run(capsys, "classify", "--fixture", "flat-product", "--samples", "4")
    assert code == 0
    assert "classification: none" in out


def test_tensors_on_polar(capsys):
    code, out, _ = run(capsys, "tensors", "--fixture", "polar", "--point", "1,0")
    assert code == 0
    assert "T(e1, e1) = [-1.,  0.]" in out or "T(e1, e1) = [-1., 0.]" in out


def test_json_to_stdout_and_determinism(tmp_path, capsys):
    argv = ("report", "--all", "--fixture", "gibbons-hawking", "--samples", "6", "--seed", "7")
    code, out, _ = run(capsys, *argv, "--json", "-")
    assert code == 0
    data = json.loads(out)
    assert data["samples"] == {"mode": "lowdiscrepancy", "count": 6, "seed": 7}
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, *argv, "--json", str(a))
    run(capsys, *argv, "--json", str(b))
    assert a.read_bytes() == b.read_bytes()
    assert "wall_time_seconds" not in data


def test_fixtures_listing(capsys):
    code, out, _ = run(capsys, "fixtures")
    assert code == 0
    assert "gibbons-hawking      alias of gibbons-hawking-v1" in out
