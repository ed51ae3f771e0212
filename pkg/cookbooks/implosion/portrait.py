r"""Implosion - phase portrait of the psi-field.

Samples (W_psi, Z_psi) = (N_W D_Z, N_Z D_W) on a rectangular grid and traces the nullclines over the same
rectangle. With --branches, both continuations of the smooth solution out of P_s are integrated and written
with their termination tags.

Usage example:
    cookbook implosion.portrait --gamma 5/3 --r 1.13 --grid=-3:1:81,-3:2:101

    cookbook implosion.portrait --gamma 7/5 --r 1.079404 --grid=-2:0:41,-2:0:41 --branches

"""

from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass

import numpy as np
from spicerack import Spicerack
from spicerack.cookbook import ArgparseFormatter, CookbookBase

from implosion_libs.common import (
    CommonOpts,
    ImplosionCookbookRunnerBase,
    add_common_opts,
    parser_type_positive_float,
    with_common_opts,
    write_csv,
    write_manifest,
)
from implosion_libs.euler_selfsim import GasParams, field_forms, nullcline_polylines
from implosion_libs.shooting import IntegrationSettings, classify_left, classify_right

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular sampling grid, both axes inclusive."""

    w_min: float
    w_max: float
    w_count: int
    z_min: float
    z_max: float
    z_count: int

    @property
    def size(self) -> int:
        """Number of grid points."""
        return self.w_count * self.z_count


def parser_type_grid(value: str) -> GridSpec:
    """Validates a 'wmin:wmax:nw,zmin:zmax:nz' grid in argparser."""
    try:
        w_part, z_part = value.split(",")
        w_min, w_max, w_count = w_part.split(":")
        z_min, z_max, z_count = z_part.split(":")
        grid = GridSpec(float(w_min), float(w_max), int(w_count), float(z_min), float(z_max), int(z_count))
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"'{value}' is not a grid like -3:1:81,-3:2:101") from error

    if grid.w_count < 2 or grid.z_count < 2 or grid.w_min >= grid.w_max or grid.z_min >= grid.z_max:
        raise argparse.ArgumentTypeError(f"'{value}' needs increasing bounds and at least 2 points per axis")

    return grid


class Portrait(CookbookBase):
    """Implosion cookbook sampling the phase portrait of the psi-field."""

    title = __doc__

    def argument_parser(self):
        """Parse the command line arguments for this cookbook."""
        parser = argparse.ArgumentParser(
            prog=__name__,
            description=__doc__,
            formatter_class=ArgparseFormatter,
        )
        add_common_opts(parser)
        parser.add_argument("--r", required=True, type=parser_type_positive_float, help="Self-similar exponent.")
        parser.add_argument(
            "--grid",
            required=True,
            type=parser_type_grid,
            help="Sampling grid as wmin:wmax:nw,zmin:zmax:nz (use --grid=... for negative bounds).",
        )
        parser.add_argument(
            "--out",
            default="portrait.csv",
            help="Name of the field CSV inside the output directory. Default %(default)s.",
        )
        parser.add_argument("--branches", action="store_true", help="Also integrate the smooth solution out of P_s.")

        return parser

    def get_runner(self, args: argparse.Namespace) -> ImplosionCookbookRunnerBase:
        """Get runner"""
        return with_common_opts(self.spicerack, args, PortraitRunner)(
            r=args.r,
            grid=args.grid,
            out=args.out,
            branches=args.branches,
            spicerack=self.spicerack,
        )


class PortraitRunner(ImplosionCookbookRunnerBase):
    """Runner for Portrait."""

    def __init__(
        self,
        common_opts: CommonOpts,
        r: float,
        grid: GridSpec,
        out: str,
        branches: bool,
        spicerack: Spicerack,
    ):
        """Init"""
        super().__init__(spicerack=spicerack, common_opts=common_opts)
        self.g = GasParams(gamma=common_opts.gamma, r=r)
        self.grid = grid
        self.out = out
        self.branches = branches

    def run_with_outputs(self) -> int:
        """Main entry point"""
        grid, forms = self.grid, field_forms(self.g)
        W, Z = np.meshgrid(
            np.linspace(grid.w_min, grid.w_max, grid.w_count),
            np.linspace(grid.z_min, grid.z_max, grid.z_count),
            indexing="ij",
        )
        W, Z = W.ravel(), Z.ravel()
        field_w = forms.N_W(W, Z) * forms.D_Z(W, Z)
        field_z = forms.N_Z(W, Z) * forms.D_W(W, Z)
        artifacts = [
            write_csv(
                self.output_dir / self.out,
                ["W", "Z", "W_psi", "Z_psi"],
                (tuple(float(value) for value in row) for row in zip(W, Z, field_w, field_z)),
            )
        ]

        polylines = nullcline_polylines(
            self.g, np.linspace(grid.z_min, grid.z_max, max(grid.z_count, 401)), (grid.w_min, grid.w_max)
        )
        artifacts.append(
            write_csv(
                self.output_dir / "nullclines.csv",
                ["curve", "branch", "W", "Z"],
                (
                    (name, branch, point_w, point_z)
                    for name, lines in polylines.items()
                    for branch, line in enumerate(lines)
                    for point_w, point_z in line
                ),
            )
        )
        print(f"Wrote {grid.size} field samples to {artifacts[0]}")

        if self.branches:
            settings = IntegrationSettings(
                rtol=self.run_config.rtol, atol=self.run_config.atol, launch_offset=self.run_config.launch_offset
            )
            for name, classify in (("right", classify_right), ("left", classify_left)):
                classification = classify(self.g, settings)
                trajectory = classification.trajectory
                rows = zip(trajectory.psi, trajectory.xi, trajectory.W, trajectory.Z)
                artifacts.append(
                    write_csv(
                        self.output_dir / f"branch-{name}.csv",
                        ["psi", "xi", "W", "Z"],
                        (tuple(float(value) for value in row) for row in rows),
                    )
                )
                suffix = "" if classification.consistent else f" ({classification.check_termination} on refinement)"
                print(f"{name} branch: {classification.termination}{suffix}")

        write_manifest(
            self.output_dir,
            __name__,
            {"gamma": str(self.g.gamma), "r": self.g.r, "grid": vars(grid), "branches": self.branches},
            self.run_config,
            artifacts,
        )
        return 0
