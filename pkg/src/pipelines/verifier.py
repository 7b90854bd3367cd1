"""
Verification Pipeline for the Rivlin cube toolkit.

Runs the invariant suites of every module at a configured sample count and
seed, collecting one CheckResult per property.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from core.biot import (
    biot_matrix,
    det_jacobian_radial,
    first_piola,
    jacobian_DT,
    minors_radial,
    minors_two_equal,
    principal_biot,
)
from core.material import (
    MaterialParams,
    PrincipalStretches,
    cg_volumetric,
    check_unique_radial_conditions,
    energy_principal,
    radial_scalar_response,
)
from core.tensor import Rotation3, SymMatrix3, conjugate, leading_minors, sym_eigen
from core.utils import Timer, central_gradient, central_jacobian, log_grid, relative_error
from pipelines.criteria import (
    ORDERED_PAIRS,
    Monotonicity,
    RegionBox,
    RegionMode,
    classify_monotonicity,
    energetic_stability,
    epsilon_sign,
    invertibility_loss_radial,
    region_scan,
)
from pipelines.cube_solver import (
    bifurcation_point,
    distinct_stretch_scan,
    ell,
    nonradial_solutions,
    radial_solution,
    trace_branches,
)

logger = logging.getLogger(__name__)

EPSILON_TABLE = {(1, 2): 1, (2, 3): 1, (3, 1): 1, (2, 1): -1, (3, 2): -1, (1, 3): -1}


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one property check: the worst observed value against its threshold."""

    name: str
    passed: bool
    worst: float
    threshold: float
    detail: str = ""

    def as_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst": self.worst,
            "threshold": self.threshold,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    M: float
    seed: int
    quick: bool
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]


def _error_check(name: str, worst: float, threshold: float, detail: str = "") -> CheckResult:
    return CheckResult(name, bool(worst <= threshold), float(worst), float(threshold), detail)


def _count_check(name: str, failures: int, detail: str = "") -> CheckResult:
    return CheckResult(name, failures == 0, float(failures), 0.0, detail)


class Verifier:
    """Runs the property suites for one material and seed."""

    def __init__(self, settings):
        self.settings = settings

    def run(self, M: float, seed: int = 42, quick: bool = False) -> VerificationReport:
        """
        Run every suite.

        Args:
            M: stiffness ratio
            seed: seed of every random sample
            quick: use the reduced sample counts

        Returns:
            VerificationReport
        """
        report = VerificationReport(M=M, seed=seed, quick=quick)
        samples = self.settings.verify_samples(quick)
        suites: List[Callable[[float, np.random.Generator, int, bool], List[CheckResult]]] = [
            self._tensor_suite,
            self._material_suite,
            self._biot_suite,
            self._criteria_suite,
            self._solver_suite,
        ]
        for offset, suite in enumerate(suites):
            # independent stream per suite
            rng = np.random.default_rng([seed, offset])
            with Timer(suite.__name__.strip("_")):
                report.checks.extend(suite(M, rng, samples, quick))

        for check in report.failed:
            logger.warning("check %s failed: worst %r vs threshold %r", check.name, check.worst, check.threshold)
        return report

    # --- tensor ------------------------------------------------------------

    def _tensor_suite(self, M, rng, samples, quick) -> List[CheckResult]:
        worst_reconstruction = 0.0
        for _ in range(samples * 10):
            a = rng.normal(size=(3, 3))
            S = SymMatrix3.from_array(a + a.T)
            values, Q = sym_eigen(S)
            q = Q.as_array()
            rebuilt = q.T @ np.diag(values) @ q
            scale = max(1.0, float(np.linalg.norm(S.as_array())))
            worst_reconstruction = max(worst_reconstruction, float(np.linalg.norm(rebuilt - S.as_array())) / scale)

        worst_spectrum = 0.0
        for _ in range(samples):
            d = np.sort(rng.uniform(-5.0, 5.0, size=3))[::-1]
            values, _ = sym_eigen(conjugate(Rotation3.random(rng), SymMatrix3.diag(*d)))
            worst_spectrum = max(worst_spectrum, relative_error(values, d))

        return [
            _error_check("tensor.eigen_reconstruction", worst_reconstruction, 1e-10),
            _error_check("tensor.conjugate_spectrum", worst_spectrum, 1e-10),
        ]

    # --- material ----------------------------------------------------------

    def _material_suite(self, M, rng, samples, quick) -> List[CheckResult]:
        h = cg_volumetric(M)
        worst_derivative = 0.0
        for x in log_grid(1e-3, 1e3, samples):
            step = 1e-6 * x
            fd_first = (h.value(x + step) - h.value(x - step)) / (2.0 * step)
            fd_second = (h.first(x + step) - h.first(x - step)) / (2.0 * step)
            worst_derivative = max(
                worst_derivative,
                relative_error(fd_first, h.first(x)),
                relative_error(fd_second, h.second(x)),
            )

        params = MaterialParams.from_m(M)
        orders = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
        asymmetric = 0
        for _ in range(samples):
            s = PrincipalStretches.of(rng.uniform(0.5, 2.0, size=3))
            energies = {energy_principal(params, s.permuted(order)) for order in orders}
            if max(energies) - min(energies) > 1e-12 * max(1.0, abs(max(energies))):
                asymmetric += 1

        grid = log_grid(*self.settings.radial_condition_domain, self.settings.radial_condition_samples)
        response = np.array([radial_scalar_response(h, x) for x in grid])
        non_increasing = int(np.sum(np.diff(response) <= 0))

        conditions = check_unique_radial_conditions(
            h, self.settings.radial_condition_domain, self.settings.radial_condition_samples
        )
        flags_false = sum(
            not flag
            for flag in (
                conditions.derivative_positive_everywhere,
                conditions.lower_divergence,
                conditions.upper_divergence,
                conditions.convex_on_samples,
            )
        )
        return [
            _error_check("material.volumetric_derivatives", worst_derivative, 1e-6),
            _count_check("material.energy_permutation_symmetry", asymmetric),
            _count_check("material.radial_response_increasing", non_increasing),
            _count_check("material.unique_radial_conditions", flags_false, conditions.note),
        ]

    # --- biot stress -------------------------------------------------------

    def _biot_suite(self, M, rng, samples, quick) -> List[CheckResult]:
        params = MaterialParams.from_m(M)
        worst_gradient = worst_hessian = worst_equivariance = 0.0
        for _ in range(samples):
            x = rng.uniform(0.5, 2.0, size=3)
            s = PrincipalStretches.of(x)
            stresses = principal_biot(M, s).as_array()
            gradient = central_gradient(lambda y: energy_principal(params, PrincipalStretches.of(y)), x)
            hessian = central_jacobian(lambda y: principal_biot(M, PrincipalStretches.of(y)).as_array(), x)
            worst_gradient = max(worst_gradient, relative_error(stresses, gradient))
            worst_hessian = max(worst_hessian, relative_error(jacobian_DT(M, s).as_array(), hessian))
            order = tuple(rng.permutation(3))
            permuted = principal_biot(M, s.permuted(order)).as_array()
            worst_equivariance = max(worst_equivariance, relative_error(permuted, stresses[list(order)]))

        worst_isotropy = worst_polar = 0.0
        for _ in range(samples):
            U = conjugate(Rotation3.random(rng), SymMatrix3.diag(*rng.uniform(0.5, 2.0, size=3)))
            Q = Rotation3.random(rng)
            lhs = biot_matrix(M, conjugate(Q, U)).as_array()
            rhs = conjugate(Q, biot_matrix(M, U)).as_array()
            worst_isotropy = max(worst_isotropy, float(np.linalg.norm(lhs - rhs)))
            R = Rotation3.random(rng).as_array()
            pulled_back = R.T @ first_piola(M, R @ U.as_array())
            worst_polar = max(worst_polar, float(np.linalg.norm(pulled_back - biot_matrix(M, U).as_array())))

        worst_minors = 0.0
        for l in np.linspace(0.5, 2.5, samples):
            numeric = jacobian_DT(M, PrincipalStretches.radial(l))
            worst_minors = max(
                worst_minors,
                relative_error(minors_radial(M, l), numeric.minors()),
                relative_error(det_jacobian_radial(M, l), numeric.det()),
            )
        for _ in range(samples):
            l1, l2 = rng.uniform(0.5, 2.0, size=2)
            numeric = leading_minors(jacobian_DT(M, PrincipalStretches.two_equal(l1, l2)).matrix)
            worst_minors = max(worst_minors, relative_error(minors_two_equal(M, l1, l2), numeric[:2]))

        return [
            _error_check("biot.gradient_consistency", worst_gradient, 1e-6),
            _error_check("biot.hessian_consistency", worst_hessian, 1e-5),
            _error_check("biot.permutation_equivariance", worst_equivariance, 1e-12),
            _error_check("biot.isotropy", worst_isotropy, 1e-10),
            _error_check("biot.polar_consistency", worst_polar, 1e-10),
            _error_check("biot.closed_form_minors", worst_minors, 1e-9),
        ]

    # --- criteria ----------------------------------------------------------

    def _criteria_suite(self, M, rng, samples, quick) -> List[CheckResult]:
        tol = self.settings.classification_tol
        disagreements = 0
        for _ in range(samples * 10):
            s = PrincipalStretches.of(rng.uniform(0.5, 2.0, size=3))
            minors = jacobian_DT(M, s).minors()
            if min(abs(m) for m in minors) <= 1e-6:
                continue
            sylvester = all(m > 0 for m in minors)
            strongly = classify_monotonicity(M, s, 0.0) == Monotonicity.STRONGLY_MONOTONE
            disagreements += sylvester != strongly

        lambda_star = invertibility_loss_radial(M)
        delta = 1e-3
        radial_misclassified = 0
        window_misclassified = 0
        for l in np.linspace(0.5, 2.0 * lambda_star, samples * 5):
            s = PrincipalStretches.radial(l)
            monotonicity = classify_monotonicity(M, s, tol)
            if l < lambda_star - delta and monotonicity != Monotonicity.STRONGLY_MONOTONE:
                radial_misclassified += 1
            if l > lambda_star + delta and monotonicity != Monotonicity.NOT_MONOTONE:
                radial_misclassified += 1
            stable = energetic_stability(M, s, tol, self.settings.coincidence_rel)
            if 1.0 + delta <= l <= lambda_star - delta and not stable:
                window_misclassified += 1
            if (l < 1.0 - delta or l > lambda_star + delta) and stable:
                window_misclassified += 1

        resolution = 20 if quick else 100
        scan = region_scan(M, RegionBox.square_slice(0.5, 3.0), resolution, RegionMode.STABILITY, tol)
        containment = sum(
            1
            for sample in scan
            if sample.classification.energetically_stable
            and sample.classification.monotonicity == Monotonicity.NOT_MONOTONE
        )

        epsilon_errors = sum(epsilon_sign(i, j) != EPSILON_TABLE[(i, j)] for i, j in ORDERED_PAIRS)
        return [
            _count_check("criteria.sylvester_agreement", disagreements),
            _count_check("criteria.radial_monotonicity", radial_misclassified, f"lambda_star={lambda_star!r}"),
            _count_check("criteria.radial_stability_window", window_misclassified),
            _count_check("criteria.stability_implies_monotonicity", containment, f"{len(scan)} grid points"),
            _count_check("criteria.epsilon_table", epsilon_errors),
        ]

    # --- cube solver -------------------------------------------------------

    def _solver_suite(self, M, rng, samples, quick) -> List[CheckResult]:
        residual_tol = self.settings.residual_tol
        report = bifurcation_point(M)
        crossing = max(report.crossing_gap, 0.0 if report.alpha_flat <= report.alpha_star else math.inf)

        worst_factor = 0.0
        for _ in range(samples):
            l1, l2 = rng.uniform(0.5, 2.0, size=2)
            t = principal_biot(M, PrincipalStretches.two_equal(l1, l2))
            factor = (3.0 * M - 2.0) * l1 ** 4 * l2 ** 2 - 3.0 * M - 6.0 * l1 * l2 - 4.0
            expected = -(l1 - l2) * factor / (6.0 * l1 * l2)
            worst_factor = max(worst_factor, relative_error(t.t1 - t.t3, expected))

        n_convexity = 200 if quick else 1000
        concave = 0
        for a in log_grid(0.1, 10.0, n_convexity):
            step = 1e-4 * a
            second = (ell(M, a + step) - 2.0 * ell(M, a) + ell(M, a - step)) / step ** 2
            if not second > 0:
                concave += 1

        onset = round(report.alpha_flat, 1)
        grid = [round(onset + 0.1 * k, 12) for k in range(1, 20)]
        worst_residual = 0.0
        for alpha in grid + [-2.0, 0.0]:
            beta = radial_solution(M, alpha)
            worst_residual = max(worst_residual, principal_biot(M, PrincipalStretches.radial(beta)).max_deviation(alpha))
            for solution in nonradial_solutions(M, alpha):
                worst_residual = max(worst_residual, solution.residual)

        betas = [radial_solution(M, alpha) for alpha in np.linspace(-5.0, 10.0, samples)]
        radial_not_increasing = int(np.sum(np.diff(betas) <= 0))

        trace = trace_branches(M, grid[0], grid[-1], 0.1, self.settings.classification_tol)
        dichotomy = 0
        coincidence = 0
        for record in trace.records:
            if record.branch == "nonradial_a" and record.classification.monotonicity != Monotonicity.NOT_MONOTONE:
                dichotomy += 1
            if record.branch == "nonradial_b" and record.classification.monotonicity != Monotonicity.STRONGLY_MONOTONE:
                dichotomy += 1
            if record.branch != "radial":
                strongly = record.classification.monotonicity == Monotonicity.STRONGLY_MONOTONE
                coincidence += strongly != record.stable

        trials = self.settings.distinct_trials if not quick else samples * 2
        all_distinct = unmatched = 0
        for alpha in (grid[2], grid[-1]):
            scan = distinct_stretch_scan(
                M, alpha, trials, int(rng.integers(0, 2 ** 31 - 1)),
                self.settings.cluster_tol, self.settings.distinct_gap,
                self.settings.newton_tol, self.settings.newton_max_iter,
            )
            all_distinct += scan.all_distinct
            unmatched += scan.unmatched

        return [
            _error_check("cube.sextic_residual", report.sextic_residual, 1e-12),
            _error_check("cube.branch_crossing", crossing, 1e-6, f"alpha_flat={report.alpha_flat!r}"),
            _error_check("cube.onset_stationarity", report.onset_slope, 1e-10),
            _error_check("cube.factorization_identity", worst_factor, 1e-10),
            _count_check("cube.ell_convexity", concave),
            _error_check("cube.solution_residuals", worst_residual, residual_tol),
            _count_check("cube.radial_map_increasing", radial_not_increasing),
            _count_check("cube.branch_monotonicity_dichotomy", dichotomy),
            _count_check("cube.branch_stability_equals_monotonicity", coincidence),
            _count_check("cube.no_distinct_stretch_solutions", all_distinct + unmatched),
        ]
