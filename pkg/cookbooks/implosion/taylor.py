r"""Implosion - Taylor coefficients of the smooth profile at the sonic point.

Writes the rows (n, W_n, Z_n) in the derivative convention, or a sweep (r, k, W_0..W_N, Z_0..Z_N) over r where
resonant exponents show up as flagged NaN rows.

Usage example:
    cookbook implosion.taylor --gamma 5/3 --r 1.13 --order 20 --out taylor.csv

    cookbook implosion.taylor --gamma 5/3 --order 4 --sweep 1.01 1.26 2000

"""

from __future__ import annotations

import argparse
import logging
import sys

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
from implosion_libs.euler_selfsim import GasParams
from implosion_libs.taylor_engine import coefficient_sweep, series_rows, sweep_rows, taylor_at_Ps

LOGGER = logging.getLogger(__name__)


class Taylor(CookbookBase):
    """Implosion cookbook expanding the smooth profile in Taylor series at P_s."""

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
            help="Expand on STEPS equally spaced r values in [RMIN, RMAX].",
        )
        parser.add_argument(
            "--order",
            type=int,
            default=None,
            help="Highest order N of the expansion, defaults to the 'order' of the configuration.",
        )
        parser.add_argument(
            "--out",
            default=None,
            help="Name of the CSV file inside the output directory (default taylor.csv or taylor-sweep.csv).",
        )
        parser.add_argument(
            "--allow-resonant",
            action="store_true",
            help="Stop at a resonant order with a warning instead of failing.",
        )

        return parser

    def get_runner(self, args: argparse.Namespace) -> ImplosionCookbookRunnerBase:
        """Get runner"""
        return with_common_opts(self.spicerack, args, TaylorRunner)(
            r=args.r,
            sweep=(args.sweep[0], args.sweep[1], int(args.sweep[2])) if args.sweep else None,
            order=args.order,
            out=args.out,
            allow_resonant=args.allow_resonant,
            spicerack=self.spicerack,
        )


class TaylorRunner(ImplosionCookbookRunnerBase):
    """Runner for Taylor."""

    def __init__(
        self,
        common_opts: CommonOpts,
        r: float | None,
        sweep: tuple[float, float, int] | None,
        order: int | None,
        out: str | None,
        allow_resonant: bool,
        spicerack: Spicerack,
    ):
        """Init"""
        super().__init__(spicerack=spicerack, common_opts=common_opts, order=order)
        self.r = r
        self.sweep = sweep
        self.out = out
        self.allow_resonant = allow_resonant

    def run_with_outputs(self) -> int:
        """Main entry point"""
        gamma = self.common_opts.gamma
        order = self.run_config.order
        parameters = {"gamma": str(gamma), "order": order, "allow_resonant": self.allow_resonant}
        if self.sweep:
            r_min, r_max, steps = self.sweep
            rows = coefficient_sweep(gamma, np.linspace(r_min, r_max, steps), order)
            header, csv_rows = sweep_rows(rows)
            csv_path = write_csv(self.output_dir / (self.out or "taylor-sweep.csv"), header, csv_rows)
            flagged = sum(1 for row in rows if row.flag)
            print(f"Wrote {len(rows)} rows ({flagged} flagged) to {csv_path}")
            parameters["sweep"] = list(self.sweep)
        else:
            series = taylor_at_Ps(GasParams(gamma=gamma, r=self.r), order, allow_resonant=self.allow_resonant)
            for warning in series.warnings:
                print(f"WARNING: {warning}", file=sys.stderr)
            csv_path = write_csv(self.output_dir / (self.out or "taylor.csv"), ["n", "W_n", "Z_n"], series_rows(series))
            print(f"Wrote orders 0..{series.order} (k = {series.k_at_r!r}) to {csv_path}")
            parameters["r"] = self.r

        write_manifest(self.output_dir, __name__, parameters, self.run_config, [csv_path])
        return 0
