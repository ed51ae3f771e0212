#!/usr/bin/env python3
"""Implosion profile cookbooks, shared helpers"""
from __future__ import annotations

__title__ = __doc__
import argparse
import csv
import json
import logging
from dataclasses import asdict, dataclass, fields
from enum import Enum
from fractions import Fraction
from functools import partial
from importlib.metadata import PackageNotFoundError, version
from itertools import chain
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from spicerack import Spicerack
from spicerack.cookbook import CookbookRunnerBase
from wmflib.config import load_yaml_config

from implosion_libs.exceptions import ConfigError, ImplosionError

LOGGER = logging.getLogger(__name__)
CONFIG_FILE_NAME = "implosion.yaml"
DISTRIBUTION_NAME = "implosion-cookbooks"
CSV_FLOAT_FORMAT = ".17g"
# exit codes of the cookbooks, besides 0 for success
EXIT_ERROR = 1
EXIT_DISPROVED = 2
EXIT_INCONCLUSIVE = 3


def parser_type_gamma(value: str) -> Fraction:
    """Validates an exact rational adiabatic exponent like '5/3' in argparser."""
    try:
        gamma = Fraction(value)
    except (ValueError, ZeroDivisionError) as error:
        raise argparse.ArgumentTypeError(f"'{value}' is not a rational number (ex. 5/3)") from error

    if not 1 < gamma < 3:
        raise argparse.ArgumentTypeError(f"gamma must be in (1, 3), got {value}")

    return gamma


def parser_type_positive_float(value: str) -> float:
    """Validates datatype in argparser if a string is a positive float."""
    try:
        number = float(value)
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"'{value}' is not a number") from error

    if not number > 0:
        raise argparse.ArgumentTypeError(f"'{value}' must be positive")

    return number


class ArgparsableEnum(Enum):
    """Enum that behaves well with argparse.

    Example usage:

    class MyEnum(ArgparsableEnum):
        OPT1 = "option 1"
        OPT2 = "option 2"

    parser.add_argument(
        "--my-enum",
        choices=list(MyEnum),
        type=MyEnum,
        default=MyEnum.OPT1,
    )
    """

    def __str__(self):
        """Needed to show the nice string values and for argparse to use those to call the `type` parameter."""
        return self.value


@dataclass(frozen=True)
class CommonOpts:
    """Common implosion cookbook options."""

    gamma: Fraction = Fraction(5, 3)
    output_dir: Path | None = None

    def to_cli_args(self) -> list[str]:
        """Helper to unwrap the options for use with argument parsers."""
        args = ["--gamma", str(self.gamma)]
        if self.output_dir:
            args.extend(["--output-dir", str(self.output_dir)])

        return args


def add_common_opts(parser: argparse.ArgumentParser, gamma_default: str = "5/3") -> argparse.ArgumentParser:
    """Adds the common options to a cookbook parser."""
    parser.add_argument(
        "--gamma",
        default=parser_type_gamma(gamma_default),
        type=parser_type_gamma,
        help="Adiabatic exponent as an exact fraction (ex. 5/3, 7/5). Default is '%(default)s'.",
    )
    parser.add_argument(
        "--output-dir",
        required=False,
        default=None,
        type=Path,
        help="Directory for the generated files, overrides the output_dir of the configuration file.",
    )

    return parser


def with_common_opts(spicerack: Spicerack, args: argparse.Namespace, runner: Callable) -> Callable:
    """Helper to add CommonOpts to a cookbook instantiation."""
    # pylint: disable=unused-argument
    common_opts = CommonOpts(gamma=args.gamma, output_dir=args.output_dir)

    return partial(runner, common_opts=common_opts)


@dataclass(frozen=True)
class RunConfig:
    """Effective run parameters: command line over implosion.yaml over these defaults."""

    output_dir: Path = Path("implosion-output")
    beta: float = 500.0
    order: int = 8
    tol_bnb: float = 1e-10
    leaf_budget: int = 10**7
    t_min_factor: float = 1e-4
    t_max_factor: float = 1.0
    tol_r: float = 1e-7
    launch_offset: float = 1e-2
    rtol: float = 1e-10
    atol: float = 1e-12
    seed: int = 0

    @classmethod
    def from_config(cls, config: dict[str, Any] | None, **overrides: Any) -> "RunConfig":
        """Merge a loaded configuration with the command line overrides (None meaning not given)."""
        known = {field.name: field for field in fields(cls)}
        values: dict[str, Any] = {}
        for key, value in chain((config or {}).items(), overrides.items()):
            if value is None:
                continue
            if key not in known:
                LOGGER.warning("Ignoring unknown configuration key '%s'", key)
                continue

            default = getattr(cls, key)
            try:
                if isinstance(default, bool) or isinstance(value, bool):
                    raise TypeError(f"booleans are not accepted, got {value!r}")
                values[key] = type(default)(value)
            except (TypeError, ValueError) as error:
                raise ConfigError(f"Invalid value for '{key}': {error}") from error

        run_config = cls(**values)
        for key in ("beta", "tol_bnb", "leaf_budget", "t_min_factor", "t_max_factor", "tol_r", "launch_offset"):
            if not getattr(run_config, key) > 0:
                raise ConfigError(f"'{key}' must be positive, got {getattr(run_config, key)!r}")

        return run_config

    def as_dict(self) -> dict[str, Any]:
        """JSON-friendly view."""
        result = asdict(self)
        result["output_dir"] = str(self.output_dir)
        return result


def artifact_version() -> str:
    """Installed version of this package."""
    try:
        return version(DISTRIBUTION_NAME)
    except PackageNotFoundError:
        return "unknown"


def _csv_cell(value: Any) -> str:
    if isinstance(value, float):
        return format(value, CSV_FLOAT_FORMAT)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV file with a header row, floats with 17 significant digits."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as csv_file:
        writer = csv.writer(csv_file)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(value) for value in row])

    LOGGER.debug("Wrote %s", path)
    return path


def write_json(path: Path, data: Any) -> Path:
    """Write indented, key sorted JSON."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    LOGGER.debug("Wrote %s", path)
    return path


def write_manifest(
    output_dir: Path, cookbook: str, parameters: dict[str, Any], run_config: RunConfig, artifacts: Sequence[Path]
) -> Path:
    """Record every effective parameter of a run next to its outputs."""
    return write_json(
        output_dir / f"{cookbook.rsplit('.', 1)[-1]}-manifest.json",
        {
            "cookbook": cookbook,
            "version": artifact_version(),
            "parameters": parameters,
            "config": run_config.as_dict(),
            "artifacts": sorted(str(artifact) for artifact in artifacts),
        },
    )


# Poor man's namespace to compensate for the restriction to not create modules
@dataclass(frozen=True)
class UtilsForTesting:
    """Generic testing utilities."""

    @staticmethod
    def to_parametrize(test_cases: dict[str, dict[str, Any]]) -> dict[str, str | list[Any]]:
        """Helper for parametrized tests.

        Use like:
        @pytest.mark.parametrize(**_to_parametrize(
            {
                "Test case 1": {"param1": "value1", "param2": "value2"},
                # will set the value of the missing params as `None`
                "Test case 2": {"param1": "value1"},
                ...
            }
        ))
        """
        _param_names = sorted(set(chain(*[list(params.keys()) for params in test_cases.values()])))

        def _fill_up_params(test_case_params):
            return [test_case_params.get(must_param, None) for must_param in _param_names]

        if len(_param_names) == 1:
            argvalues = [_fill_up_params(test_case_params)[0] for test_case_params in test_cases.values()]

        else:
            argvalues = [_fill_up_params(test_case_params) for test_case_params in test_cases.values()]

        return {"argnames": ",".join(_param_names), "argvalues": argvalues, "ids": list(test_cases.keys())}


class ImplosionCookbookRunnerBase(CookbookRunnerBase):
    """Implosion tweaks to the base cookbook runner.

    Current tweaks:
    * Load implosion.yaml from the spicerack configuration directory into a RunConfig.
    * Map library errors to the exit code 1:
      Define the `run_with_outputs` method instead of the `run` method when writing your cookbook.
    """

    def __init__(self, spicerack: Spicerack, common_opts: CommonOpts, **overrides: Any):
        """Init"""
        self.spicerack = spicerack
        self.common_opts = common_opts
        self.implosion_config = self._load_config()
        self.run_config = RunConfig.from_config(self.implosion_config, output_dir=common_opts.output_dir, **overrides)

    def _load_config(self) -> dict[str, Any]:
        config_path = self.spicerack.config_dir / CONFIG_FILE_NAME
        if not config_path.exists():
            LOGGER.debug("No implosion config found on %s. Continuing...", config_path)
            return {}

        LOGGER.info("Loading implosion config from %s", config_path)
        return load_yaml_config(config_file=config_path, raises=False)

    @property
    def output_dir(self) -> Path:
        """Output directory, created on first use."""
        self.run_config.output_dir.mkdir(parents=True, exist_ok=True)
        return self.run_config.output_dir

    def run(self) -> int | None:
        """Main entry point"""
        try:
            return self.run_with_outputs()
        except ImplosionError as error:
            LOGGER.error("%s: %s", type(error).__name__, error)
            return EXIT_ERROR

    def run_with_outputs(self) -> int | None:
        """Main entry point, use in place of `run` to get library errors turned into exit codes."""
        return 0
