#!/usr/bin/env python3
from __future__ import annotations

import json
import math

R_3 = 6 - 2 * math.sqrt(6)
R_4 = (43 - 5 * math.sqrt(43)) / 9


def test_shoot_brackets_r_inside_the_window(run_implosion_cookbook, output_dir):
    run_result = run_implosion_cookbook(["implosion.shoot", "--gamma=5/3", "--n=3", "--tol-r=1e-3"])

    assert run_result.return_code == 0
    report = json.loads((output_dir / "shoot.json").read_text())
    assert report["n"] == 3
    assert report["end_tags"] == ["HitsDZ", "HitsDW"]
    assert R_3 < report["bracket"][0] <= report["r"] <= report["bracket"][1] < R_4
    assert report["bracket"][1] - report["bracket"][0] <= 1e-3
    assert len(report["history"]) == report["iterations"]
    assert "window ends: HitsDZ / HitsDW" in run_result.stdout
    manifest = json.loads((output_dir / "shoot-manifest.json").read_text())
    assert manifest["parameters"]["n"] == 3


def test_shoot_finds_the_window_around_near(run_implosion_cookbook, output_dir):
    run_result = run_implosion_cookbook(["implosion.shoot", "--near=1.13", "--tol-r=1e-3"])

    assert run_result.return_code == 0
    manifest = json.loads((output_dir / "shoot-manifest.json").read_text())
    assert manifest["parameters"]["n"] == 3
    assert manifest["parameters"]["near"] == 1.13
