"""CLI tests: exit codes, report shape, round trips, determinism."""

import subprocess
import sys

import pytest

from redhyp import pattern_catalog, validate_reduced_map
from redhyp.cli import (dispatch, parse_certificate, parse_fraction,
                        parse_glued)
from redhyp.fileio import parse_host, write_host
from redhyp.glue import validate_glued
from redhyp.errors import DomainError


def run(args):
    return dispatch(args)


@pytest.fixture
def orientation_file(tmp_path):
    code, text = run(["gen", "--kind", "orientation", "--m", "4"])
    assert code == 0
    path = tmp_path / "orient4.rh"
    path.write_text(text)
    return str(path)


@pytest.fixture
def complete_file(tmp_path):
    code, text = run(["gen", "--kind", "random", "--m", "5",
                      "--class-size", "1", "--d", "1", "--seed", "0"])
    assert code == 0
    path = tmp_path / "complete5.rh"
    path.write_text(text)
    return str(path)


def test_parse_fraction():
    assert parse_fraction("1/4") == 0.25
    assert parse_fraction("3") == 3
    with pytest.raises(DomainError):
        parse_fraction("0.25")
    with pytest.raises(DomainError):
        parse_fraction("1/0")


def test_density_exit_codes(orientation_file):
    code, text = run(["density", "--host", orientation_file, "--d", "1/4",
                      "--deterministic"])
    assert code == 0 and "outcome dense" in text
    code, text = run(["density", "--host", orientation_file, "--d", "26/100",
                      "--deterministic"])
    assert code == 1 and "witness 1 2 3" in text


def test_find_found_and_certificate_revalidates(complete_file):
    code, text = run(["find", "--host", complete_file, "--pattern", "Fstar",
                      "--deterministic"])
    assert code == 0 and "outcome found" in text
    rmap = parse_certificate(text)
    host = parse_host(open(complete_file).read())
    ok, violation = validate_reduced_map(host, pattern_catalog("Fstar"), rmap)
    assert ok, violation


def test_find_not_found_and_budget(orientation_file):
    code, text = run(["find", "--host", orientation_file, "--pattern", "Fstar",
                      "--deterministic"])
    assert code == 1 and "outcome not-found" in text
    code, text = run(["find", "--host", orientation_file, "--pattern", "Fstar",
                      "--budget", "10", "--deterministic"])
    assert code == 2 and "outcome budget-exhausted" in text


def test_find_count_all(complete_file):
    code, text = run(["find", "--host", complete_file, "--pattern", "K4",
                      "--count-all", "--deterministic"])
    assert code == 0
    assert "count 120" in text  # 5*4*3*2 index assignments on singleton classes


def test_oracle_agrees(orientation_file):
    code, text = run(["oracle", "--host", orientation_file,
                      "--pattern", "K4minus", "--deterministic"])
    assert code == 1 and "count 0" in text


def test_unknown_flags_exit_3(orientation_file):
    code, text = run(["find", "--host", orientation_file, "--bogus"])
    assert code == 3 and "usage" in text
    code, text = run(["bogus-command"])
    assert code == 3
    code, text = run(["find", "--host", "/nonexistent.rh", "--pattern", "K4"])
    assert code == 3
    code, text = run(["density", "--host", orientation_file, "--d", "0.25"])
    assert code == 3


def test_gen_round_trip(tmp_path):
    out = tmp_path / "host.rh"
    code, text = run(["gen", "--kind", "random", "--m", "5", "--class-size",
                      "3", "--d", "1/2", "--seed", "9", "--out", str(out),
                      "--deterministic"])
    assert code == 0 and "digest sha256:" in text
    host = parse_host(out.read_text())
    assert write_host(host) == out.read_text()


def test_gen_blowup_and_tournament(tmp_path, orientation_file):
    code, text = run(["gen", "--kind", "blowup", "--host", orientation_file,
                      "--t", "2"])
    assert code == 0
    host = parse_host(text)
    assert host.class_size(1, 2) == 4
    code, text = run(["gen", "--kind", "tournament3", "--n", "6", "--seed", "1"])
    assert code == 0 and text.startswith("V 6")


def test_pipeline_cli_on_complete_host(tmp_path):
    code, text = run(["gen", "--kind", "random", "--m", "10", "--class-size",
                      "2", "--d", "1", "--seed", "0"])
    host_path = tmp_path / "complete10.rh"
    host_path.write_text(text)
    trace_path = tmp_path / "trace.txt"
    code, text = run(["pipeline", "--host", str(host_path), "--eps", "7/10",
                      "--delta", "1/4", "--rounds", "4", "--trace",
                      str(trace_path), "--deterministic"])
    assert code == 0 and "outcome found" in text
    rmap = parse_certificate(text)
    host = parse_host(host_path.read_text())
    ok, violation = validate_reduced_map(host, pattern_catalog("Fstar"), rmap)
    assert ok, violation
    trace = trace_path.read_text()
    assert "row 1" in trace and "pigeonhole" in trace


def test_glue_cli_on_complete_host(tmp_path):
    code, text = run(["gen", "--kind", "random", "--m", "10", "--class-size",
                      "2", "--d", "1", "--seed", "0"])
    host_path = tmp_path / "complete10.rh"
    host_path.write_text(text)
    code, text = run(["glue", "--host", str(host_path), "--eps", "7/10",
                      "--delta", "1/4", "--ladder", "4,3", "--deterministic"])
    assert code == 0 and "outcome found" in text
    cfg = parse_glued(text)
    host = parse_host(host_path.read_text())
    ok, why = validate_glued(host, cfg)
    assert ok, why


def test_glue_oracle_cli(orientation_file):
    code, text = run(["glue-oracle", "--host", orientation_file,
                      "--deterministic"])
    assert code == 1 and "count 0" in text


def test_audit_cli(tmp_path):
    g = tmp_path / "empty6.p3"
    g.write_text("V 6\n")
    code, text = run(["audit", "--graph", str(g), "--d", "1/2", "--eta", "0",
                      "--exhaustive", "--deterministic"])
    assert code == 1 and "witness 1,2,3,4,5,6" in text
    code, text = run(["audit", "--graph", str(g), "--d", "0", "--eta", "0",
                      "--exhaustive", "--deterministic"])
    assert code == 0 and "outcome pass" in text


def test_report_file_redirect(tmp_path, orientation_file):
    report = tmp_path / "report.txt"
    code, text = run(["density", "--host", orientation_file, "--d", "1/4",
                      "--report", str(report), "--deterministic"])
    assert code == 0 and text == ""
    assert "outcome dense" in report.read_text()


def test_reports_are_deterministic(complete_file, orientation_file):
    jobs = [
        ["find", "--host", complete_file, "--pattern", "Fstar",
         "--deterministic", "--threads", "1"],
        ["find", "--host", orientation_file, "--pattern", "K4minus",
         "--count-all", "--deterministic", "--threads", "1"],
        ["oracle", "--host", orientation_file, "--pattern", "K4",
         "--deterministic"],
    ]
    for job in jobs:
        first = run(job)
        second = run(job)
        assert first == second


def test_console_entry_point_subprocess(orientation_file):
    # spot-check byte determinism across separate interpreter processes
    cmd = [sys.executable, "-m", "redhyp.cli", "find", "--host",
           orientation_file, "--pattern", "K4minus", "--count-all",
           "--deterministic", "--threads", "1"]
    a = subprocess.run(cmd, capture_output=True)
    b = subprocess.run(cmd, capture_output=True)
    assert a.returncode == 1 and a.stdout == b.stdout


def test_pipeline_cli_default_rounds_on_complete_host(tmp_path):
    # With no --rounds the default ceil(2/eps^2)+1 applies and the run
    # still succeeds on the complete host.
    code, text = run(["gen", "--kind", "random", "--m", "30", "--class-size",
                      "2", "--d", "1", "--seed", "0"])
    host_path = tmp_path / "complete30.rh"
    host_path.write_text(text)
    code, text = run(["pipeline", "--host", str(host_path), "--eps", "7/10",
                      "--delta", "1/4", "--deterministic"])
    assert code == 0 and "outcome found" in text
    assert "rounds 6" in text


def test_audit_cli_sampled_sizes(tmp_path):
    g = tmp_path / "k8.p3"
    lines = ["V 8"] + [f"T {u} {v} {w}" for u in range(1, 9)
                       for v in range(u + 1, 9) for w in range(v + 1, 9)]
    g.write_text("\n".join(lines) + "\n")
    code, text = run(["audit", "--graph", str(g), "--d", "1", "--eta", "0",
                      "--samples", "3", "--seed", "5", "--sizes", "4,6",
                      "--deterministic"])
    assert code == 0 and "outcome sampled-pass" in text
    assert "subsets-checked 6" in text


def test_glue_cli_trace(tmp_path):
    code, text = run(["gen", "--kind", "random", "--m", "8", "--class-size",
                      "2", "--d", "1", "--seed", "0"])
    host_path = tmp_path / "complete8.rh"
    host_path.write_text(text)
    trace_path = tmp_path / "glue-trace.txt"
    code, text = run(["glue", "--host", str(host_path), "--eps", "7/10",
                      "--delta", "1/4", "--ladder", "3,2", "--trace",
                      str(trace_path), "--deterministic"])
    assert code == 0
    trace = trace_path.read_text()
    assert "row 1" in trace and "configuration validated" in trace


def test_find_cli_threads(tmp_path, complete_file):
    one = run(["find", "--host", complete_file, "--pattern", "K4minus",
               "--count-all", "--deterministic", "--threads", "1"])
    two = run(["find", "--host", complete_file, "--pattern", "K4minus",
               "--count-all", "--deterministic", "--threads", "2"])
    assert one[0] == two[0]
    # node accounting differs across thread splits; counts must not
    count_line = [l for l in one[1].splitlines() if l.startswith("count ")]
    assert count_line == [l for l in two[1].splitlines() if l.startswith("count ")]
