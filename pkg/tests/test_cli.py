import json
import subprocess
import sys

import pytest

from pel.cli import main


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rate_ex5(capsys):
    code, out, _ = run(["rate", "--spec", "ex5-mixed-markov"], capsys)
    assert code == 0 and "1.15564" in out


def test_rate_strict(capsys):
    code, out, err = run(["rate", "--spec", "ex7-sticky", "--strict"], capsys)
    assert code == 1 and "recur" in err
    assert run(["rate", "--spec", "ex7-sticky"], capsys)[0] == 0


def test_pattern_file(tmp_path, capsys):
    f = tmp_path / "in.txt"
    f.write_text("english is hard to learn\naaaa\n")
    code, out, _ = run(["pattern", "--input", str(f)], capsys)
    assert code == 0
    assert out.splitlines() == ["1,2,3,4,5,6,7,8,5,6,8,7,9,10,11,8,12,13,8,4,1,9,10,2", "1,1,1,1"]


def test_config_file_and_out(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"task": "exact-entropy", "spec": "ex4-mixed-iid", "n_max": 5, "format": "json"}))
    out = tmp_path / "r.json"
    assert run(["exact-entropy", "--config", str(cfg), "--out", str(out)], capsys)[0] == 0
    rows = json.loads(out.read_text())["rows"]
    assert [r["n"] for r in rows] == [1, 2, 3, 4, 5]
    # command-line flags override the file
    assert run(["exact-entropy", "--config", str(cfg), "--n-max", "2", "--format", "csv"], capsys)[1].count("\n") == 4


def test_inline_and_file_specs(tmp_path, capsys):
    spec = {"kind": "iid", "dist": {"atoms": [{"label": "a", "prob": "1/2"}, {"label": "b", "prob": "1/2"}], "continuous_mass": "0"}}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    code, out, _ = run(["exact-entropy", "--spec", str(path), "--n-max", "3"], capsys)
    assert code == 0 and out.splitlines()[-1].startswith("3,2.0,1.0,exact")
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"spec": spec, "n_max": 2}))
    assert run(["exact-entropy", "--config", str(cfg)], capsys)[0] == 0


def test_invalid_inputs(tmp_path, capsys):
    assert run(["mc-entropy", "--spec", "ex4-mixed-iid", "--n-max", "4", "--samples", "500"], capsys)[0] == 2
    assert run(["exact-entropy", "--spec", "nope", "--n-max", "3"], capsys)[0] == 2
    assert run(["exact-entropy", "--spec", "ex2-finite-iid", "--n-max", "13"], capsys)[0] == 2
    assert run(["exact-entropy", "--spec", "ex5-mixed-markov", "--n-max", "3"], capsys)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bogus": 1}))
    assert run(["rate", "--config", str(bad)], capsys)[0] == 2
    nonerg = tmp_path / "ne.json"
    nonerg.write_text(json.dumps({"kind": "markov", "order": 1, "states": ["a", "b"], "rows": {"a": ["1", "0"], "b": ["0", "1"]}}))
    assert run(["rate", "--spec", str(nonerg)], capsys)[0] == 2
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_mc_reproducible(tmp_path, capsys):
    args = ["mc-entropy", "--spec", "ex4-mixed-iid", "--n-max", "6", "--samples", "1000", "--seed", "3", "--workers", "2"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(args + ["--out", str(a)], capsys)[0] == 0
    assert run(args + ["--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("# pel-entropy-report/1")


def test_bounds_and_growth(capsys):
    code, out, _ = run(["bounds", "--spec", "ex4-mixed-iid", "--n-max", "20"], capsys)
    assert code == 0 and out.splitlines()[-1].startswith("20,0 1,1.58092834701660")
    code, out, _ = run(["bounds", "--spec", "ex5-mixed-markov"], capsys)
    assert code == 0 and "24.0" in out
    code, out, _ = run(["growth", "--eps", "0.5", "--delta", "0.75", "--n-grid", "1000", "1000000"], capsys)
    assert code == 0 and out.splitlines()[1] == "n,bound_bits,argmax_l"


def test_list_specs(capsys):
    code, out, _ = run(["rate", "--list-specs"], capsys)
    names = json.loads(out)
    assert code == 0 and set(names) == {
        "ex2-finite-iid", "ex3-uniform", "ex4-mixed-iid", "ex5-mixed-markov", "ex6-noisy-markov", "ex7-sticky"
    }
    assert names["ex7-sticky"] == {"kind": "sticky", "repeat_prob": "1/2"}


def test_console_script():
    out = subprocess.run(["pel", "rate", "--spec", "ex4-mixed-iid", "--format", "json"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["value"] == pytest.approx(1.584962500721156, abs=1e-12)
    out = subprocess.run([sys.executable, "-m", "pel.cli", "rate"], capture_output=True, text=True)
    assert out.returncode == 2
