from __future__ import annotations

import json
import subprocess
import sys

import pytest

from mpspace.cli import main


def write(tmp_path, data, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(path)


COLENGTH = {"name": "c", "tasks": [
    {"id": "c", "op": "colength", "args": {"ideal": {"variables": "x y", "gens": ["x^2", "y^3"]}},
     "expected": {"colength": 6}, "provenance": "monomial count"}]}


def test_run_json(tmp_path, capsys):
    assert main(["run", write(tmp_path, COLENGTH)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["tasks"][0]["status"] == "pass"
    assert report["settings"]["modular_filter"] is False


def test_run_text_and_output_file(tmp_path, capsys):
    out = tmp_path / "r.txt"
    assert main(["run", write(tmp_path, COLENGTH), "--text", "-o", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert "[PASS    ] c" in out.read_text()


def test_exit_code_on_failed_expectation(tmp_path):
    bad = json.loads(json.dumps(COLENGTH))
    bad["tasks"][0]["expected"]["colength"] = 7
    assert main(["run", write(tmp_path, bad)]) == 1


def test_exit_code_on_malformed_file(tmp_path, capsys):
    assert main(["run", write(tmp_path, "{\n oops")]) == 2
    assert "s.json:2" in capsys.readouterr().err


def test_modular_filter_and_jobs_flags(tmp_path, capsys):
    assert main(["run", write(tmp_path, COLENGTH), "--modular-filter", "on", "--jobs", "2"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["settings"]["modular_filter"] is True
    assert main(["run", write(tmp_path, COLENGTH), "--jobs", "0"]) == 2


def test_explain(capsys):
    assert main(["explain", "delta"]) == 0
    assert capsys.readouterr().out.startswith("delta:")
    assert main(["explain", "unknown-op"]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "mpspace", "run", write(tmp_path, COLENGTH), "--text"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "summary: 1 passed" in proc.stdout


def test_help_lists_commands(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    assert "run" in out and "explain" in out
