"""Acceptance criteria: one printed pass/fail line per criterion."""

import subprocess
import sys

import pytest

from pel import verify


def _report(capsys, line):
    with capsys.disabled():
        print("\n" + line)


@pytest.mark.parametrize("number", sorted(verify.CRITERIA))
def test_criterion(number, capsys):
    fn = verify.CRITERIA[number]
    result = fn(seed=verify.VERIFY_SEED) if number in verify.SEEDED else fn()
    _report(capsys, result.line())
    assert result.passed, result.detail


def test_criterion_11_cli_determinism(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.txt"
        cmd = [sys.executable, "-m", "pel.cli", "verify-all", "--seed", str(verify.VERIFY_SEED), "--out", str(path)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(path.read_bytes())
    same = outs[0] == outs[1]
    line = verify.CriterionResult(11, "determinism", same, f"two verify-all runs byte-identical={same} ({len(outs[0])} bytes)").line()
    _report(capsys, line)
    assert same
