#!/usr/bin/env python3
from __future__ import annotations

import json


def test_barriers_are_written_without_certification(run_implosion_cookbook, output_dir):
    run_result = run_implosion_cookbook(["implosion.barriers", "--gamma=5/3", "--r=1.13", "--n=3"])

    assert run_result.return_code == 0
    for label in ("b_nl", "b_fl", "b_nr_3", "B_fr"):
        lines = (output_dir / f"barrier-{label}.csv").read_text().splitlines()
        assert lines[0] == "t,W,Z"
    assert (output_dir / "nullclines.csv").exists()
    intersections = json.loads((output_dir / "intersections.json").read_text())
    assert set(intersections) == {"t_v", "b_nl/b_fl", "b_nr_3/B_fr", "b_nr_4/D_Z"}
    assert intersections["b_nr_4/D_Z"] is None
    descriptors = json.loads((output_dir / "barriers.json").read_text())
    assert [descriptor["label"] for descriptor in descriptors] == ["b_nl", "b_fl", "b_nr_3", "B_fr"]


def test_barriers_beta_comes_from_the_config_file(run_implosion_cookbook, spicerack_config, output_dir):
    (spicerack_config.parent / "implosion.yaml").write_text("beta: 100\n")

    run_result = run_implosion_cookbook(["implosion.barriers", "--r=1.13"])

    assert run_result.return_code == 0
    descriptors = json.loads((output_dir / "barriers.json").read_text())
    assert descriptors[2]["beta"] == 100.0
    manifest = json.loads((output_dir / "barriers-manifest.json").read_text())
    assert manifest["config"]["beta"] == 100.0
