#!/usr/bin/env python3
from __future__ import annotations


def test_portrait_samples_the_whole_grid(run_implosion_cookbook, output_dir):
    run_result = run_implosion_cookbook(["implosion.portrait", "--r=1.13", "--grid=-3:1:5,-3:2:4"])

    assert run_result.return_code == 0
    lines = (output_dir / "portrait.csv").read_text().splitlines()
    assert lines[0] == "W,Z,W_psi,Z_psi"
    assert len(lines) == 21
    assert (output_dir / "nullclines.csv").exists()
    assert "Wrote 20 field samples" in run_result.stdout
