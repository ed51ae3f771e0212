#!/usr/bin/env python3
from __future__ import annotations

import json

import pytest


def test_k_at_the_third_resonance(run_implosion_cookbook):
    run_result = run_implosion_cookbook(["implosion.k", "--gamma=5/3", "--r=1.10102"])

    assert run_result.return_code == 0
    k_line = next(line for line in run_result.stdout.splitlines() if line.startswith("k = "))
    assert float(k_line[len("k = ") :]) == pytest.approx(3.0, abs=1e-3)


def test_k_beyond_r_star_fails(run_implosion_cookbook):
    run_result = run_implosion_cookbook(["implosion.k", "--gamma=5/3", "--r=1.3"])

    assert run_result.return_code == 1


def test_k_sweep_writes_csv_and_manifest(run_implosion_cookbook, output_dir):
    run_result = run_implosion_cookbook(["implosion.k", "--gamma=5/3", "--sweep", "1.01", "1.19", "10"])

    assert run_result.return_code == 0
    lines = (output_dir / "k-sweep.csv").read_text().splitlines()
    assert lines[0] == "r,k"
    assert len(lines) == 11
    manifest = json.loads((output_dir / "k-manifest.json").read_text())
    assert manifest["parameters"]["gamma"] == "5/3"
    assert manifest["artifacts"] == [str(output_dir / "k-sweep.csv")]
