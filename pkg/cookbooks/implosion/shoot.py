r"""Implosion - shoot on r for a smooth profile reaching the origin.

Bisects r inside one resonance window (r_n, r_(n+1)) on the classification of the right branch of the smooth
solution and writes the bracket history as JSON.

Usage example:
    cookbook implosion.shoot --gamma 5/3 --n 3

    cookbook implosion.shoot --gamma 7/5 --near 1.0794 --tol-r 1e-8

"""

from __future__ import annotations

import argparse
import logging

from spicerack import Spicerack
from spicerack.cookbook import ArgparseFormatter, CookbookBase

from implosion_libs.common import (
    CommonOpts,
    ImplosionCookbookRunnerBase,
    add_common_opts,
    parser_type_positive_float,
    with_common_opts,
    write_json,
    write_manifest,
)
from implosion_libs.shooting import IntegrationSettings, find_r_bisect, scan_resonance_window, shooting_report

LOGGER = logging.getLogger(__name__)


class Shoot(CookbookBase):
    """Implosion cookbook bisecting the self-similar exponent r."""

    title = __doc__

    def argument_parser(self):
        """Parse the command line arguments for this cookbook."""
        parser = argparse.ArgumentParser(
            prog=__name__,
            description=__doc__,
            formatter_class=ArgparseFormatter,
        )
        add_common_opts(parser)
        window = parser.add_mutually_exclusive_group(required=True)
        window.add_argument("--n", type=int, help="Bisect in the window (r_n, r_(n+1)).")
        window.add_argument(
            "--near",
            type=parser_type_positive_float,
            help="Bisect in the resonance window containing this r.",
        )
        parser.add_argument(
            "--tol-r",
            type=parser_type_positive_float,
            default=None,
            help="Width of the final bracket, defaults to the 'tol_r' of the configuration.",
        )

        return parser

    def get_runner(self, args: argparse.Namespace) -> ImplosionCookbookRunnerBase:
        """Get runner"""
        return with_common_opts(self.spicerack, args, ShootRunner)(
            n=args.n,
            near=args.near,
            tol_r=args.tol_r,
            spicerack=self.spicerack,
        )


class ShootRunner(ImplosionCookbookRunnerBase):
    """Runner for Shoot."""

    def __init__(
        self,
        common_opts: CommonOpts,
        n: int | None,
        near: float | None,
        tol_r: float | None,
        spicerack: Spicerack,
    ):
        """Init"""
        super().__init__(spicerack=spicerack, common_opts=common_opts, tol_r=tol_r)
        self.n = n
        self.near = near

    def run_with_outputs(self) -> int:
        """Main entry point"""
        gamma = self.common_opts.gamma
        n = self.n
        if n is None:
            n, r_n, r_next = scan_resonance_window(gamma, self.near)
            LOGGER.info("r = %r lies in the window (r_%d, r_%d) = (%r, %r)", self.near, n, n + 1, r_n, r_next)

        settings = IntegrationSettings(
            rtol=self.run_config.rtol,
            atol=self.run_config.atol,
            launch_offset=self.run_config.launch_offset,
            launch_order=max(self.run_config.order, 2),
        )
        result = find_r_bisect(gamma, n, tol_r=self.run_config.tol_r, settings=settings)
        report = shooting_report(result)
        json_path = write_json(self.output_dir / "shoot.json", report)
        print(f"r = {result.r!r} in [{result.bracket[0]!r}, {result.bracket[1]!r}] after {result.iterations} steps")
        print(f"window ends: {result.end_tags[0]} / {result.end_tags[1]}")
        write_manifest(
            self.output_dir,
            __name__,
            {"gamma": str(gamma), "n": n, "near": self.near},
            self.run_config,
            [json_path],
        )
        return 0
