#!/usr/bin/env python3
"""
Rivlin Cube Toolkit - Central CLI Driver

This script provides a command-line interface for evaluating Biot stresses,
locating bifurcation thresholds, tracing solution branches, scanning
constitutive regions and running the verification suites.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add src directory to path for imports
src_path = str(Path(__file__).parent.parent)
if src_path not in sys.path:
    sys.path.insert(0, src_path)

from config.settings import RunConfig, Settings
from core.biot import jacobian_DT, principal_biot
from core.errors import ConvergenceError, DomainError, EvaluationError, ParameterDomainError
from core.material import MaterialParams, PrincipalStretches, energy_principal
from core.output import OutputGenerator
from pipelines.criteria import RegionBox, RegionMode, classify_point, region_scan
from pipelines.cube_solver import bifurcation_point, trace_branches
from pipelines.verifier import Verifier

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2

TRACE_COLUMNS = ["alpha", "branch", "l1", "l2", "l3", "residual", "monotonicity", "stable", "total_energy"]
REGION_COLUMNS = ["l1", "l2", "l3", "det_DT", "m1", "m2", "m3", "monotonicity", "stable", "inside"]
BIFURCATION_COLUMNS = [
    "M", "lambda_star", "alpha_star", "lambda_flat", "alpha_flat",
    "sextic_residual", "onset_slope", "crossing_gap",
]
EVAL_COLUMNS = [
    "M", "l1", "l2", "l3", "t1", "t2", "t3", "det_DT", "m1", "m2", "m3",
    "energy", "monotonicity", "stable",
]
SCALED_COLUMNS = ["mu", "t1_scaled", "t2_scaled", "t3_scaled", "energy_scaled"]
BIFURCATION_SCALED_COLUMNS = ["mu", "alpha_star_scaled", "alpha_flat_scaled"]
TRACE_SCALED_COLUMNS = ["alpha_scaled", "total_energy_scaled", "internal_energy_scaled"]
CHECK_COLUMNS = ["name", "passed", "worst", "threshold", "detail"]


def _float_list(text: str, count: int) -> List[float]:
    parts = text.split(",")
    if len(parts) != count:
        raise argparse.ArgumentTypeError(f"expected {count} comma-separated numbers, got {text!r}")
    try:
        return [float(part) for part in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}")


def stretch_triple(text: str) -> List[float]:
    return _float_list(text, 3)


def interval(text: str) -> List[float]:
    return _float_list(text, 2)


class CLIDriver:
    """Central command-line interface for the Rivlin cube toolkit."""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or Settings()
        self.output_generator = OutputGenerator(self.settings)
        self.verifier = Verifier(self.settings)

    def _meta(self, config: RunConfig, command: str, **extra) -> dict:
        meta = {"command": command, "version": self.settings.version}
        meta.update(config.meta())
        meta.update(extra)
        return meta

    def _summary(self, config: RunConfig, message: str):
        # stdout carries the data itself when no --out is given
        if config.out is not None:
            print(message)

    def run_eval(self, config: RunConfig, args) -> int:
        """Stresses, Jacobian data, energy and classification at one stretch point."""
        s = PrincipalStretches.of(args.stretches)
        stresses = principal_biot(config.M, s)
        jacobian = jacobian_DT(config.M, s)
        classification = classify_point(config.M, s, config.tol, self.settings.coincidence_rel)
        energy = energy_principal(MaterialParams.from_m(config.M), s)
        m1, m2, m3 = jacobian.minors()
        row = {
            "M": config.M,
            "l1": s.l1, "l2": s.l2, "l3": s.l3,
            "t1": stresses.t1, "t2": stresses.t2, "t3": stresses.t3,
            "det_DT": jacobian.det(),
            "m1": m1, "m2": m2, "m3": m3,
            "energy": energy,
            "monotonicity": classification.monotonicity,
            "stable": classification.energetically_stable,
        }
        columns = list(EVAL_COLUMNS)
        if config.scaled:
            scaled = stresses.scaled(config.mu)
            row.update(
                mu=config.mu,
                t1_scaled=scaled.t1, t2_scaled=scaled.t2, t3_scaled=scaled.t3,
                energy_scaled=config.mu * energy,
            )
            columns += SCALED_COLUMNS
        self.output_generator.write(config.fmt, [row], columns, self._meta(config, "eval"), config.out)
        self._summary(config, f"T = ({stresses.t1:.6g}, {stresses.t2:.6g}, {stresses.t3:.6g}), det DT = {jacobian.det():.6g}")
        return EXIT_OK

    def run_bifurcate(self, config: RunConfig, args) -> int:
        """Bifurcation and branch-onset thresholds."""
        report = bifurcation_point(config.M)
        row = report.as_dict()
        columns = list(BIFURCATION_COLUMNS)
        if config.scaled:
            row.update(
                mu=config.mu,
                alpha_star_scaled=config.mu * report.alpha_star,
                alpha_flat_scaled=config.mu * report.alpha_flat,
            )
            columns += BIFURCATION_SCALED_COLUMNS
        self.output_generator.write(config.fmt, [row], columns, self._meta(config, "bifurcate"), config.out)
        self._summary(config, f"alpha_flat = {report.alpha_flat:.6f}, alpha_star = {report.alpha_star:.6f}")
        return EXIT_OK

    def run_trace(self, config: RunConfig, args) -> int:
        """Radial and non-radial branches over a load grid."""
        trace = trace_branches(
            config.M, args.alpha_min, args.alpha_max, args.step, config.tol, self.settings.onset_tol
        )
        rows = [
            {
                "alpha": record.alpha,
                "branch": record.branch,
                "l1": record.stretches.l1,
                "l2": record.stretches.l2,
                "l3": record.stretches.l3,
                "residual": record.residual,
                "monotonicity": record.classification.monotonicity,
                "stable": record.stable,
                "total_energy": record.total_energy,
                "internal_energy": record.internal_energy,
            }
            for record in trace.records
        ]
        columns = list(TRACE_COLUMNS)
        # the CSV keeps its fixed columns; JSON records carry the extras
        if config.fmt == "json":
            columns.append("internal_energy")
            if config.scaled:
                for row in rows:
                    row.update(
                        alpha_scaled=config.mu * row["alpha"],
                        total_energy_scaled=config.mu * row["total_energy"],
                        internal_energy_scaled=config.mu * row["internal_energy"],
                    )
                columns += TRACE_SCALED_COLUMNS
        meta = self._meta(config, "trace", alpha_min=args.alpha_min, alpha_max=args.alpha_max, step=args.step)
        self.output_generator.write(config.fmt, rows, columns, meta, config.out)
        self._summary(config, f"{len(rows)} records over {len(trace.alphas)} loads")
        return EXIT_OK

    def run_regions(self, config: RunConfig, args) -> int:
        """Grid classification over a stretch box or a two-equal-stretch slice."""
        if args.box3 is not None:
            box = RegionBox.cube(*args.box3)
            bounds = args.box3
        else:
            bounds = args.box or [0.5, 3.0]
            box = RegionBox.square_slice(*bounds)
        samples = region_scan(config.M, box, args.res, RegionMode(args.mode), config.tol, self.settings.coincidence_rel)
        rows = []
        for sample in samples:
            m1, m2, m3 = sample.classification.minors
            rows.append(
                {
                    "l1": sample.stretches.l1,
                    "l2": sample.stretches.l2,
                    "l3": sample.stretches.l3,
                    "det_DT": sample.classification.jacobian_det,
                    "m1": m1, "m2": m2, "m3": m3,
                    "monotonicity": sample.classification.monotonicity,
                    "stable": sample.classification.energetically_stable,
                    "inside": sample.inside,
                }
            )
        meta = self._meta(
            config, "regions",
            box=list(bounds), slice="two-equal" if box.two_equal else "3d",
            resolution=args.res, mode=args.mode,
        )
        self.output_generator.write(config.fmt, rows, REGION_COLUMNS, meta, config.out)
        self._summary(config, f"{len(rows)} grid points, {sum(row['inside'] for row in rows)} inside")
        return EXIT_OK

    def run_verify(self, config: RunConfig, args) -> int:
        """Run every property suite; exit 0 iff all pass."""
        report = self.verifier.run(config.M, config.seed, args.quick)
        print(f"\n--- Verification (M={config.M!r}, seed={config.seed}, {'quick' if args.quick else 'full'}) ---")
        for check in report.checks:
            status = "PASS" if check.passed else "FAIL"
            print(f"{status}  {check.name:<45} worst={check.worst:.3e}  threshold={check.threshold:.1e}")
        print(f"{len(report.checks) - len(report.failed)}/{len(report.checks)} checks passed")

        checks = [check.as_dict() for check in report.checks]
        meta = self._meta(config, "verify", quick=args.quick, passed=report.passed)
        if config.out is not None:
            self.output_generator.write_json(meta, checks, config.out)
        if args.html:
            self.output_generator.save_html_report(checks, args.html, "Verification report", meta)
            print(f"HTML report saved to: {args.html}")

        if not report.passed:
            print("Failed: " + ", ".join(check.name for check in report.failed), file=sys.stderr)
            return EXIT_NUMERICAL
        return EXIT_OK

    def run(self, args) -> int:
        """Resolve configuration and dispatch to the subcommand."""
        config = self.settings.resolve_run_config(args)
        handlers = {
            "eval": self.run_eval,
            "bifurcate": self.run_bifurcate,
            "trace": self.run_trace,
            "regions": self.run_regions,
            "verify": self.run_verify,
        }
        return handlers[args.command](config, args)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=float, help="dimensionless stiffness ratio M > 2/3")
    common.add_argument("--mu", type=float, help="shear modulus (with --lambda)")
    common.add_argument("--lambda", dest="lam", type=float, help="second Lame parameter (with --mu)")
    common.add_argument("--out", help="output file (stdout when omitted)")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--tol", type=float, default=None, help="classification tolerance")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(prog="cube", description="Biot stress analysis and Rivlin's cube")
    commands = parser.add_subparsers(dest="command", required=True)

    evaluate = commands.add_parser("eval", parents=[common], help="stresses and classification at a point")
    evaluate.add_argument("--stretches", type=stretch_triple, required=True, help="l1,l2,l3")

    commands.add_parser("bifurcate", parents=[common], help="bifurcation and branch-onset thresholds")

    trace = commands.add_parser("trace", parents=[common], help="trace radial and non-radial branches")
    trace.add_argument("--alpha-min", type=float, default=0.0)
    trace.add_argument("--alpha-max", type=float, default=5.0)
    trace.add_argument("--step", type=float, default=0.1)

    regions = commands.add_parser("regions", parents=[common], help="classify a grid of stretches")
    regions.add_argument("--slice", choices=["two-equal"], default="two-equal")
    shape = regions.add_mutually_exclusive_group()
    shape.add_argument("--box", type=interval, help="lo,hi of the (l1, l1, l2) slice")
    shape.add_argument("--box3", type=interval, help="lo,hi of a 3D cube of stretches")
    regions.add_argument("--res", type=int, default=50)
    regions.add_argument("--mode", choices=[mode.value for mode in RegionMode], default=RegionMode.MONOTONICITY.value)

    verify = commands.add_parser("verify", parents=[common], help="run the verification suites")
    verify.add_argument("--quick", action="store_true", help="reduced sample counts")
    verify.add_argument("--html", help="also write an HTML report")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point for the CLI application."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    driver = CLIDriver()
    if args.verbose:
        driver.settings.display_settings()
    try:
        return driver.run(args)
    except (ParameterDomainError, DomainError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, EvaluationError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
