#!/usr/bin/env python3
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pytest
from spicerack._cookbook import main as run_cookbook


@pytest.fixture
def spicerack_config(tmp_path):
    """Fake spicerack config for cookbook tests, implosion.yaml goes next to it."""
    cumin_config_path = tmp_path / "cumin.yaml"
    cookbooks_dir = Path(__file__).parent.parent.parent

    cumin_config_path.write_text(
        f"""transport: clustershell
log_file: {tmp_path}/cumin.log
default_backend: puppetdb

puppetdb:
    host: i.don.t.exist
    port: 443
    api_version: 4
        """
    )
    spicerack_config_path = tmp_path / "spicerack.yaml"
    spicerack_config_path.write_text(
        f"""
cookbooks_base_dirs:
- {cookbooks_dir}
logs_base_dir: {tmp_path}
instance_params:
  cumin_config: {cumin_config_path}
  spicerack_config_dir: {tmp_path}
        """
    )
    return spicerack_config_path


@pytest.fixture
def output_dir(tmp_path):
    return tmp_path / "output"


@dataclass(frozen=True)
class RunResult:
    return_code: None | int
    stdout: str
    stderr: str


@pytest.fixture
def run_implosion_cookbook(capsys, spicerack_config, output_dir):
    """Gives a function to run an implosion cookbook writing into `output_dir`.

    Use like:

    > def test_my_cookbook(run_implosion_cookbook, output_dir):
    >   res = run_implosion_cookbook(["implosion.k", "--r=1.1"])
    >
    >   assert res.return_code == 0
    >   assert "k = " in res.stdout
    """

    def _inner_run(argv: list[str]) -> RunResult:
        cookbook, *args = argv
        return_code = run_cookbook(
            argv=[f"--config-file={spicerack_config}", cookbook, f"--output-dir={output_dir}"] + args
        )
        captured = capsys.readouterr()
        return RunResult(
            return_code=return_code,
            stdout=captured.out,
            stderr=captured.err,
        )

    return _inner_run
