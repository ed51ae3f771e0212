r"""Implosion - physical fields of the self-similar solution.

Integrates both branches of the smooth profile out of P_s and writes (R, u, sigma, rho) at the requested times
before the implosion time T, one CSV per time.

Usage example:
    cookbook implosion.reconstruct --gamma 5/3 --r 1.13 --T 1 --t 0 0.5 0.9 --R 0.01 1 200

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
from implosion_libs.euler_selfsim import GasParams, reconstruct_physical
from implosion_libs.shooting import IntegrationSettings, build_profile

LOGGER = logging.getLogger(__name__)


class Reconstruct(CookbookBase):
    """Implosion cookbook evaluating velocity, sound speed and density from the profile."""

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
        parser.add_argument("--T", type=float, default=1.0, help="Implosion time. Default %(default)s.")
        parser.add_argument("--t", nargs="+", type=float, required=True, help="Times (< T) to evaluate at.")
        parser.add_argument(
            "--R",
            nargs=3,
            type=float,
            required=True,
            metavar=("RMIN", "RMAX", "COUNT"),
            help="COUNT equally spaced radii in [RMIN, RMAX].",
        )
        parser.add_argument(
            "--out",
            default="reconstruct",
            help="Prefix of the CSV files, one <prefix>-<index>.csv per requested time. Default %(default)s.",
        )

        return parser

    def get_runner(self, args: argparse.Namespace) -> ImplosionCookbookRunnerBase:
        """Get runner"""
        return with_common_opts(self.spicerack, args, ReconstructRunner)(
            r=args.r,
            implosion_time=args.T,
            times=args.t,
            radii=(args.R[0], args.R[1], int(args.R[2])),
            out=args.out,
            spicerack=self.spicerack,
        )


class ReconstructRunner(ImplosionCookbookRunnerBase):
    """Runner for Reconstruct."""

    def __init__(
        self,
        common_opts: CommonOpts,
        r: float,
        implosion_time: float,
        times: list[float],
        radii: tuple[float, float, int],
        out: str,
        spicerack: Spicerack,
    ):
        """Init"""
        super().__init__(spicerack=spicerack, common_opts=common_opts)
        self.g = GasParams(gamma=common_opts.gamma, r=r)
        self.implosion_time = implosion_time
        self.times = times
        self.radii = radii
        self.out = out

    def run_with_outputs(self) -> int:
        """Main entry point"""
        settings = IntegrationSettings(
            rtol=self.run_config.rtol, atol=self.run_config.atol, launch_offset=self.run_config.launch_offset
        )
        profile = build_profile(self.g, settings)
        LOGGER.info("Profile sampled on xi in [%r, %r]", profile.xi[0], profile.xi[-1])
        radii = np.linspace(*self.radii)
        artifacts = []
        for index, time in enumerate(self.times):
            samples = reconstruct_physical(profile, self.g, self.implosion_time, time, radii)
            artifacts.append(
                write_csv(
                    self.output_dir / f"{self.out}-{index}.csv",
                    ["t", "R", "u", "sigma", "rho"],
                    ((time, sample.R, sample.u, sample.sigma, sample.rho) for sample in samples),
                )
            )
            print(f"t = {time!r}: max |u| = {max(abs(sample.u) for sample in samples)!r} -> {artifacts[-1]}")

        write_manifest(
            self.output_dir,
            __name__,
            {
                "gamma": str(self.g.gamma),
                "r": self.g.r,
                "T": self.implosion_time,
                "t": self.times,
                "R": list(self.radii),
            },
            self.run_config,
            artifacts,
        )
        return 0
