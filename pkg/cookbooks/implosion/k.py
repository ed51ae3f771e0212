r"""Implosion - eigenvalue ratio k(r) at the sonic point.

Prints k, the psi-flow eigenvalues and eigendirections at P_s, or writes a (r, k) sweep as CSV.

Usage example:
    cookbook implosion.k --gamma 5/3 --r 1.10102

    cookbook implosion.k --gamma 7/5 --sweep 1.01 1.19 100 --output-dir /tmp/implosion

"""

from __future__ import annotations

import argparse
import logging

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
from implosion_libs.euler_selfsim import GasParams, SelfSimilarError, k_of_r, k_sweep, r_star, sonic_data

LOGGER = logging.getLogger(__name__)


class K(CookbookBase):
    """Implosion cookbook computing the eigenvalue ratio k(r) at the sonic point."""

    title = __doc__

    def argument_parser(self):
        """Parse the command line arguments for this cookbook."""
        parser = argparse.ArgumentParser(
            prog=__name__,
            description=__doc__,
            formatter_class=ArgparseFormatter,
        )
        add_common_opts(parser)
        what = parser.add_mutually_exclusive_group(required=True)
        what.add_argument("--r", type=parser_type_positive_float, help="Self-similar exponent.")
        what.add_argument(
            "--sweep",
            nargs=3,
            type=float,
            metavar=("RMIN", "RMAX", "STEPS"),
            help="Write k on STEPS equally spaced r values in [RMIN, RMAX] to k-sweep.csv.",
        )

        return parser

    def get_runner(self, args: argparse.Namespace) -> ImplosionCookbookRunnerBase:
        """Get runner"""
        sweep = (args.sweep[0], args.sweep[1], int(args.sweep[2])) if args.sweep else None
        return with_common_opts(self.spicerack, args, KRunner)(
            r=args.r,
            sweep=sweep,
            spicerack=self.spicerack,
        )


class KRunner(ImplosionCookbookRunnerBase):
    """Runner for K."""

    def __init__(
        self,
        common_opts: CommonOpts,
        r: float | None,
        sweep: tuple[float, float, int] | None,
        spicerack: Spicerack,
    ):
        """Init"""
        super().__init__(spicerack=spicerack, common_opts=common_opts)
        self.r = r
        self.sweep = sweep

    def run_with_outputs(self) -> int:
        """Main entry point"""
        gamma = self.common_opts.gamma
        if self.sweep:
            r_min, r_max, steps = self.sweep
            rows = k_sweep(gamma, np.linspace(r_min, r_max, steps))
            csv_path = write_csv(self.output_dir / "k-sweep.csv", ["r", "k"], rows)
            write_manifest(
                self.output_dir,
                __name__,
                {"gamma": str(gamma), "sweep": list(self.sweep)},
                self.run_config,
                [csv_path],
            )
            print(f"Wrote {len(rows)} rows to {csv_path}")
            return 0

        k = k_of_r(gamma, self.r)
        print(f"gamma = {gamma}, r = {self.r!r}, r* = {r_star(gamma)!r}")
        print(f"k = {k!r}")
        try:
            sonic = sonic_data(GasParams(gamma=gamma, r=self.r))
        except SelfSimilarError as error:
            LOGGER.warning("No eigen-decomposition at P_s for r = %r: %s", self.r, error)
            return 0

        print(f"P_s = ({sonic.Ps.W!r}, {sonic.Ps.Z!r})")
        print(f"lambda_- = {sonic.lambda_minus!r}, nu_- = {sonic.nu_minus}")
        print(f"lambda_+ = {sonic.lambda_plus!r}, nu_+ = {sonic.nu_plus}")
        return 0
