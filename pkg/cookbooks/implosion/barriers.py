r"""Implosion - barriers around the sonic point, optionally certified.

Builds the left barriers b_nl and b_fl, the right barrier b_nr_n and, for n = 3, the implicit barrier B_fr. Writes
the sampled curves, the nullclines, the barrier descriptors and their intersections. With --certify, the crossing
sign along every barrier segment is proved with interval arithmetic and the exit code is 0 if all of them are
Proved, 2 if any is Disproved and 3 if any is Inconclusive.

Usage example:
    cookbook implosion.barriers --gamma 5/3 --r 1.13 --n 3 --beta 500

    cookbook implosion.barriers --gamma 5/3 --r 1.1347 --n 4 --beta 500 --certify

"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Any, Callable

import numpy as np
from spicerack import Spicerack
from spicerack.cookbook import ArgparseFormatter, CookbookBase

from implosion_libs.barriers import (
    BarrierError,
    ImplicitBarrier,
    Intersection,
    ParamBarrier,
    barrier_intersection,
    barrier_to_dict,
    dz_crossing_bnr4,
    make_b_fl,
    make_b_nl,
    make_b_nr,
    make_B_fr,
    sample_barrier,
    validity_time,
)
from implosion_libs.certify import (
    CrossingReport,
    certificate_export,
    certify_crossing,
    combine_verdicts,
    verdict_exit_code,
)
from implosion_libs.common import (
    CommonOpts,
    ImplosionCookbookRunnerBase,
    add_common_opts,
    parser_type_positive_float,
    with_common_opts,
    write_csv,
    write_json,
    write_manifest,
)
from implosion_libs.euler_selfsim import GasParams, PhasePoint, find_Po, nullcline_polylines
from implosion_libs.interval_core import Interval
from implosion_libs.taylor_engine import ProfileSeries, taylor_at_Ps

LOGGER = logging.getLogger(__name__)
# crossing directions: negative is upwards
LEFT_SIGN = -1
RIGHT_SIGN = {3: 1, 4: -1}
FR_SIGN = 1


class Barriers(CookbookBase):
    """Implosion cookbook building and certifying the barriers of the smooth profile."""

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
            "--n", type=int, choices=[3, 4], default=3, help="Order of the right barrier b_nr_n. Default %(default)s."
        )
        parser.add_argument(
            "--beta",
            type=parser_type_positive_float,
            default=None,
            help="Perturbation size of b_nr_n, defaults to the 'beta' of the configuration.",
        )
        parser.add_argument(
            "--t-max-factor",
            type=parser_type_positive_float,
            default=None,
            help="Constant c of the b_nr_n domain c beta |k - n|^(1/(n-1)), defaults to the configuration.",
        )
        parser.add_argument("--certify", action="store_true", help="Certify the crossing signs.")
        parser.add_argument(
            "--reverse-sign",
            action="store_true",
            help="Claim the opposite crossing direction everywhere (a sanity check, expected to be Disproved).",
        )

        return parser

    def get_runner(self, args: argparse.Namespace) -> ImplosionCookbookRunnerBase:
        """Get runner"""
        return with_common_opts(self.spicerack, args, BarriersRunner)(
            r=args.r,
            n=args.n,
            beta=args.beta,
            t_max_factor=args.t_max_factor,
            certify=args.certify,
            reverse_sign=args.reverse_sign,
            spicerack=self.spicerack,
        )


class BarriersRunner(ImplosionCookbookRunnerBase):
    """Runner for Barriers."""

    def __init__(
        self,
        common_opts: CommonOpts,
        r: float,
        n: int,
        beta: float | None,
        t_max_factor: float | None,
        certify: bool,
        reverse_sign: bool,
        spicerack: Spicerack,
    ):
        """Init"""
        super().__init__(spicerack=spicerack, common_opts=common_opts, beta=beta, t_max_factor=t_max_factor)
        self.g = GasParams(gamma=common_opts.gamma, r=r)
        self.n = n
        self.certify = certify
        self.sign_flip = -1 if reverse_sign else 1
        self.artifacts: list[Path] = []

    def _nullclines(self, points: list[PhasePoint]) -> Path:
        span = 1.5 * max(point.norm for point in points)
        polylines = nullcline_polylines(self.g, np.linspace(-span, span, 801), (-span, span))
        rows = [
            (name, branch, W, Z)
            for name, branches in polylines.items()
            for branch, polyline in enumerate(branches)
            for W, Z in polyline
        ]
        return write_csv(self.output_dir / "nullclines.csv", ["curve", "branch", "W", "Z"], rows)

    def _intersection(
        self, description: str, finder: Callable[[], Intersection | float]
    ) -> Intersection | float | None:
        try:
            return finder()
        except BarrierError as error:
            LOGGER.warning("No %s: %s", description, error)
            return None

    def _certify(
        self,
        barrier: ParamBarrier | ImplicitBarrier,
        t_range: tuple[float, float],
        claimed_sign: int,
        series: ProfileSeries,
    ) -> CrossingReport:
        report = certify_crossing(
            barrier,
            self.g,
            t_range=Interval(min(t_range), max(t_range)),
            claimed_sign=claimed_sign * self.sign_flip,
            tol=self.run_config.tol_bnb,
            budget=self.run_config.leaf_budget,
            t_min_factor=self.run_config.t_min_factor,
            series=series,
            keep_leaves=True,
        )
        path = self.output_dir / f"certificate-{barrier.label}.json"
        certificate_export(report.certificate, path)
        self.artifacts.append(path)
        print(f"{report.certificate.condition_id} on {report.t_range}: {report.certificate.verdict}")
        if report.near_zero_agrees is False:
            LOGGER.warning(
                "The leading term %r next to P_s doesn't have the claimed sign for %s",
                report.leading_coefficient,
                barrier.label,
            )
        return report

    def run_with_outputs(self) -> int:
        """Main entry point"""
        g, n = self.g, self.n
        beta, c = self.run_config.beta, self.run_config.t_max_factor
        series = taylor_at_Ps(g, max(self.run_config.order, n + 1))
        b_nl = make_b_nl(series)
        b_fl = make_b_fl(g, series)
        b_nr = make_b_nr(series, n, beta, c)
        B_fr = make_B_fr(g, series)
        fr_curve = B_fr.parametrization()

        for barrier in (b_nl, b_fl, b_nr, fr_curve):
            self.artifacts.append(
                write_csv(self.output_dir / f"barrier-{barrier.label}.csv", ["t", "W", "Z"], sample_barrier(barrier))
            )
        self.artifacts.append(self._nullclines([series.Ps, find_Po(g)]))
        self.artifacts.append(
            write_json(
                self.output_dir / "barriers.json",
                [barrier_to_dict(barrier, g) for barrier in (b_nl, b_fl, b_nr, B_fr)],
            )
        )

        t_v = validity_time(b_nl, g)
        left = self._intersection("b_nl / b_fl intersection", lambda: barrier_intersection(b_nl, b_fl))
        intersections: dict[str, Any] = {"t_v": t_v, "b_nl/b_fl": None, "b_nr_3/B_fr": None, "b_nr_4/D_Z": None}
        if left:
            intersections["b_nl/b_fl"] = {"t": left.t, "t_fl": left.other_t, "point": [left.point.W, left.point.Z]}

        right = None
        dz_crossing = None
        if n == 3:
            right = self._intersection("b_nr_3 / B_fr intersection", lambda: barrier_intersection(b_nr, B_fr))
            if right:
                intersections["b_nr_3/B_fr"] = {"t": right.t, "point": [right.point.W, right.point.Z]}
        else:
            dz_crossing = self._intersection("D_Z = 0 crossing of b_nr_4", lambda: dz_crossing_bnr4(series, g, beta, c))
            if dz_crossing is not None:
                point = b_nr.point(dz_crossing)
                intersections["b_nr_4/D_Z"] = {"t": dz_crossing, "point": [point.W, point.Z]}

        self.artifacts.append(write_json(self.output_dir / "intersections.json", intersections))
        for name, value in intersections.items():
            print(f"{name}: {value}")

        exit_code = 0
        if self.certify:
            reports = [
                self._certify(b_nl, (0.0, left.t if left else t_v), LEFT_SIGN, series),
                self._certify(
                    b_fl, (left.other_t if left else 0.0, 1.0 - self.run_config.t_min_factor), LEFT_SIGN, series
                ),
            ]
            if n == 3:
                reports.append(self._certify(b_nr, (0.0, right.t if right else b_nr.t_max), RIGHT_SIGN[3], series))
                start = fr_curve.t_domain[0]
                if right:
                    start = (right.point.Z - series.Ps.Z) / (right.point.W - series.Ps.W)
                reports.append(self._certify(B_fr, (start, fr_curve.t_domain[1]), FR_SIGN, series))
            else:
                end = b_nr.t_max if dz_crossing is None else min(dz_crossing, b_nr.t_max)
                reports.append(self._certify(b_nr, (0.0, end), RIGHT_SIGN[4], series))

            verdict = combine_verdicts(report.certificate.verdict for report in reports)
            print(f"Overall: {verdict}")
            exit_code = verdict_exit_code(verdict)

        write_manifest(
            self.output_dir,
            __name__,
            {
                "gamma": str(g.gamma),
                "r": g.r,
                "n": n,
                "certify": self.certify,
                "reverse_sign": self.sign_flip < 0,
            },
            self.run_config,
            self.artifacts,
        )
        return exit_code
