"""
Rivlin's cube under equal dead loads: solve T_Biot(U) = alpha 1.

With k = 3M - 2 and q = 9M^2 + 6M - 8 the solution set is

- the radial state beta 1 with f_biot(beta) = alpha, unique for every alpha;
- states (l1, l1, l2) on the curve l2 = (sqrt(q l1^2 + 9) + 3) / (k l1^3),
  loaded by ell(l1) = l1 + l2(l1); ell is convex with minimum alpha_flat, so
  there are two such states above alpha_flat, one at it and none below;
- nothing with three distinct stretches.

The non-radial states exist on either side of the ell minimiser. The side
containing lambda_star, where that branch meets the radial line, is the
"toward-bifurcation" side.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np
from scipy import optimize

from core.biot import jacobian_DT, principal_biot
from core.errors import ConvergenceError, ParameterDomainError, require_material_m
from core.material import MaterialParams, PrincipalStretches, energy_principal
from core.utils import alpha_grid
from pipelines.criteria import (
    DEFAULT_COINCIDENCE_REL,
    DEFAULT_TOL,
    PointClassification,
    classify_point,
    invertibility_cubic,
    invertibility_loss_radial,
)

logger = logging.getLogger(__name__)

DEFAULT_ONSET_TOL = 1e-8
DEFAULT_NEWTON_TOL = 1e-10
DEFAULT_NEWTON_MAX_ITER = 100
DEFAULT_RESIDUAL_TOL = 1e-9
DEFAULT_CLUSTER_TOL = 1e-4
DEFAULT_DISTINCT_GAP = 1e-6
MAX_BRACKET_STEPS = 2000


class BranchSide(str, Enum):
    TOWARD = "toward-bifurcation"
    AWAY = "away-from-bifurcation"

    @property
    def label(self) -> str:
        return "nonradial_a" if self is BranchSide.TOWARD else "nonradial_b"


def _require_load(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise ParameterDomainError(f"load alpha must be finite, got {alpha!r}")
    return alpha


# --- radial branch ---------------------------------------------------------


def f_biot(M: float, beta: float) -> float:
    """Radial Biot stress ((3M-2) beta^6 + 6 beta^2 - 4 - 3M) / (6 beta)."""
    M = require_material_m(M)
    if not beta > 0:
        raise ParameterDomainError(f"radial stretch must be positive, got {beta!r}")
    return ((3.0 * M - 2.0) * beta ** 6 + 6.0 * beta ** 2 - 4.0 - 3.0 * M) / (6.0 * beta)


def f_biot_derivative(M: float, beta: float) -> float:
    M = require_material_m(M)
    return (5.0 * (3.0 * M - 2.0) * beta ** 6 + 6.0 * beta ** 2 + 4.0 + 3.0 * M) / (6.0 * beta ** 2)


def _newton_polish(func, derivative, x: float, lo: float, hi: float, steps: int = 3) -> float:
    """A few guarded Newton steps that keep x inside [lo, hi] and never worsen |func|."""
    best = func(x)
    for _ in range(steps):
        slope = derivative(x)
        if slope == 0 or not math.isfinite(slope):
            break
        candidate = x - best / slope
        if not lo <= candidate <= hi:
            break
        value = func(candidate)
        if abs(value) >= abs(best):
            break
        x, best = candidate, value
    return x


def radial_solution(M: float, alpha: float) -> float:
    """
    The unique beta > 0 with f_biot(M, beta) = alpha.

    Brackets by doubling (alpha > 0) or halving (alpha < 0) from beta = 1,
    then runs brentq and a Newton polish.
    """
    M = require_material_m(M)
    alpha = _require_load(alpha)

    def residual(beta: float) -> float:
        return f_biot(M, beta) - alpha

    at_one = residual(1.0)
    if at_one == 0:
        return 1.0
    lo = hi = 1.0
    steps = 0
    if at_one < 0:
        while residual(hi) < 0:
            lo, hi = hi, 2.0 * hi
            steps += 1
            if steps > MAX_BRACKET_STEPS:
                raise ConvergenceError(f"could not bracket the radial solution for alpha = {alpha!r}")
    else:
        while residual(lo) > 0:
            lo, hi = 0.5 * lo, lo
            steps += 1
            if steps > MAX_BRACKET_STEPS:
                raise ConvergenceError(f"could not bracket the radial solution for alpha = {alpha!r}")

    beta = optimize.brentq(residual, lo, hi, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=500)
    beta = _newton_polish(residual, lambda b: f_biot_derivative(M, b), beta, lo, hi)
    logger.debug("radial solution M=%r alpha=%r: beta=%r (%d bracket steps)", M, alpha, beta, steps)
    return beta


# --- non-radial branches ---------------------------------------------------


def branch_lambda2(M: float, l1: float) -> float:
    """Third stretch l2 of the non-radial state (l1, l1, l2)."""
    M = require_material_m(M)
    if not l1 > 0:
        raise ParameterDomainError(f"stretch must be positive, got {l1!r}")
    q = 9.0 * M * M + 6.0 * M - 8.0
    return (math.sqrt(q * l1 * l1 + 9.0) + 3.0) / ((3.0 * M - 2.0) * l1 ** 3)


def ell(M: float, l1: float) -> float:
    """Load carried by the non-radial state with repeated stretch l1."""
    return l1 + branch_lambda2(M, l1)


def ell_derivatives(M: float, l1: float) -> Tuple[float, float]:
    """(ell', ell'') in closed form."""
    M = require_material_m(M)
    k = 3.0 * M - 2.0
    q = 9.0 * M * M + 6.0 * M - 8.0
    a = float(l1)
    root = math.sqrt(q * a * a + 9.0)
    numerator = root + 3.0
    d_numerator = q * a / root
    dd_numerator = 9.0 * q / root ** 3
    first = 1.0 + (d_numerator * a - 3.0 * numerator) / (k * a ** 4)
    second = dd_numerator / (k * a ** 3) - 6.0 * d_numerator / (k * a ** 4) + 12.0 * numerator / (k * a ** 5)
    return first, second


def two_equal_factor(M: float, l1: float, l2: float) -> float:
    """(3M - 2) l1^4 l2^2 - 3M - 6 l1 l2 - 4, zero on the non-radial curve."""
    M = require_material_m(M)
    return (3.0 * M - 2.0) * l1 ** 4 * l2 ** 2 - 3.0 * M - 6.0 * l1 * l2 - 4.0


def distinct_stretch_factors(M: float, s: PrincipalStretches) -> Tuple[float, float]:
    """
    The bracketed factors of T_1 - T_3 and T_2 - T_3.

    T_i - T_3 = -(l_i - l_3) f_i3 / (6 l_i l_3) with
    f_i3 = (3M - 2) J^2 - 3M - 6 l_i l_3 - 4, so f13 - f23 = 6 l3 (l2 - l1).
    """
    M = require_material_m(M)
    l1, l2, l3 = s
    j2 = (l1 * l2 * l3) ** 2
    base = (3.0 * M - 2.0) * j2 - 3.0 * M - 4.0
    return base - 6.0 * l1 * l3, base - 6.0 * l2 * l3


@lru_cache(maxsize=64)
def ell_min(M: float) -> Tuple[float, float]:
    """
    (lambda_flat, alpha_flat): minimiser and minimum of the convex ell.

    ell diverges at both ends, so a bracket is grown from l1 = 1 until ell'
    changes sign; bounded scalar minimisation locates the minimum and Newton
    on ell' polishes it to |ell'| <= 1e-10.
    """
    M = require_material_m(M)
    lo = hi = 1.0
    for _ in range(MAX_BRACKET_STEPS):
        if ell_derivatives(M, lo)[0] < 0 and ell_derivatives(M, hi)[0] > 0:
            break
        if ell_derivatives(M, lo)[0] >= 0:
            lo *= 0.5
        if ell_derivatives(M, hi)[0] <= 0:
            hi *= 2.0
    else:
        raise ConvergenceError(f"could not bracket the minimum of ell for M = {M!r}")

    found = optimize.minimize_scalar(
        lambda a: ell(M, a), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
    )
    x = float(found.x)
    for _ in range(50):
        slope, curvature = ell_derivatives(M, x)
        if abs(slope) <= 1e-10:
            break
        x = min(max(x - slope / curvature, lo), hi)
    slope = ell_derivatives(M, x)[0]
    if abs(slope) > 1e-10:
        raise ConvergenceError(f"ell' did not reach 1e-10 at the minimum for M = {M!r} (got {slope!r})")
    logger.debug("ell minimum M=%r: lambda_flat=%r alpha_flat=%r", M, x, ell(M, x))
    return x, ell(M, x)


@dataclass(frozen=True)
class NonRadialSolution:
    """A state (l1, l1, l2) on one side of the ell minimiser."""

    stretches: PrincipalStretches
    side: BranchSide
    residual: float

    @property
    def label(self) -> str:
        return self.side.label


def _toward_side_is_low(M: float) -> bool:
    lambda_flat, _ = ell_min(M)
    return invertibility_loss_radial(M) < lambda_flat


def _solve_ell(M: float, alpha: float, lambda_flat: float, upward: bool) -> float:
    """Root of ell(l1) = alpha on one monotone side of lambda_flat."""

    def residual(a: float) -> float:
        return ell(M, a) - alpha

    end = lambda_flat
    for _ in range(MAX_BRACKET_STEPS):
        end = end * 2.0 if upward else end * 0.5
        if residual(end) > 0:
            break
    else:
        raise ConvergenceError(f"could not bracket ell(l1) = {alpha!r}")
    lo, hi = (lambda_flat, end) if upward else (end, lambda_flat)
    root = optimize.brentq(residual, lo, hi, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=500)
    return _newton_polish(residual, lambda a: ell_derivatives(M, a)[0], root, lo, hi)


def nonradial_solutions(
    M: float,
    alpha: float,
    onset_tol: float = DEFAULT_ONSET_TOL,
    residual_tol: float = DEFAULT_RESIDUAL_TOL,
) -> List[NonRadialSolution]:
    """
    Non-radial solutions (l1, l1, l2) at load alpha.

    Returns none below alpha_flat - onset_tol, the single onset state within
    onset_tol of alpha_flat, and otherwise two states ordered
    toward-bifurcation first.

    Each state carries its absolute residual max_i |t_i - alpha|. The stress
    terms grow like alpha^2, so at large loads cancellation leaves a residual
    of order eps * alpha^2 (about 1e-6 at alpha = 1e5); residual_tol is
    therefore applied relative to max(1, |alpha|).
    """
    M = require_material_m(M)
    alpha = _require_load(alpha)
    lambda_flat, alpha_flat = ell_min(M)
    if alpha < alpha_flat - onset_tol:
        return []

    toward_low = _toward_side_is_low(M)
    if abs(alpha - alpha_flat) <= onset_tol:
        roots = [(lambda_flat, BranchSide.TOWARD)]
    else:
        low = _solve_ell(M, alpha, lambda_flat, upward=False)
        high = _solve_ell(M, alpha, lambda_flat, upward=True)
        if toward_low:
            roots = [(low, BranchSide.TOWARD), (high, BranchSide.AWAY)]
        else:
            roots = [(high, BranchSide.TOWARD), (low, BranchSide.AWAY)]

    solutions = []
    for l1, side in roots:
        s = PrincipalStretches.two_equal(l1, branch_lambda2(M, l1))
        residual = principal_biot(M, s).max_deviation(alpha)
        if residual > residual_tol * max(1.0, abs(alpha)):
            logger.warning("non-radial %s state at alpha=%r has residual %.3e", side.value, alpha, residual)
        solutions.append(NonRadialSolution(s, side, residual))
    return solutions


# --- thresholds ------------------------------------------------------------


@dataclass(frozen=True)
class BifurcationReport:
    """Radial bifurcation (lambda_star, alpha_star) and branch onset (lambda_flat, alpha_flat)."""

    M: float
    lambda_star: float
    alpha_star: float
    lambda_flat: float
    alpha_flat: float
    sextic_residual: float
    onset_slope: float
    crossing_gap: float

    def as_dict(self) -> Dict[str, float]:
        return {
            "M": self.M,
            "lambda_star": self.lambda_star,
            "alpha_star": self.alpha_star,
            "lambda_flat": self.lambda_flat,
            "alpha_flat": self.alpha_flat,
            "sextic_residual": self.sextic_residual,
            "onset_slope": self.onset_slope,
            "crossing_gap": self.crossing_gap,
        }


def bifurcation_point(M: float) -> BifurcationReport:
    """Assemble lambda_star, alpha_star = f_biot(lambda_star) and the ell minimum."""
    M = require_material_m(M)
    lambda_star = invertibility_loss_radial(M)
    alpha_star = f_biot(M, lambda_star)
    lambda_flat, alpha_flat = ell_min(M)
    if alpha_flat > alpha_star + 1e-9:
        raise ConvergenceError(
            f"branch onset alpha_flat = {alpha_flat!r} exceeds the bifurcation load {alpha_star!r}"
        )
    report = BifurcationReport(
        M=M,
        lambda_star=lambda_star,
        alpha_star=alpha_star,
        lambda_flat=lambda_flat,
        alpha_flat=alpha_flat,
        sextic_residual=abs(invertibility_cubic(M, lambda_star * lambda_star)),
        onset_slope=abs(ell_derivatives(M, lambda_flat)[0]),
        crossing_gap=abs(ell(M, lambda_star) - alpha_star),
    )
    logger.info(
        "M=%r: lambda_star=%.6f alpha_star=%.6f lambda_flat=%.6f alpha_flat=%.6f",
        M, lambda_star, alpha_star, lambda_flat, alpha_flat,
    )
    return report


# --- general system --------------------------------------------------------


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a damped Newton run; non-convergence is a result, not an error."""

    stretches: PrincipalStretches
    converged: bool
    iterations: int
    residual: float


def solve_full_system(
    M: float,
    alpha: float,
    initial: PrincipalStretches,
    tol: float = DEFAULT_NEWTON_TOL,
    max_iter: int = DEFAULT_NEWTON_MAX_ITER,
) -> SolveResult:
    """
    Damped Newton on T(l) - alpha 1 with Jacobian DT.

    Each step is halved until it stays in the positive orthant and does not
    increase the residual norm; after 30 halvings the shortest admissible
    step is taken anyway.

    Args:
        M: stiffness ratio
        alpha: dead load
        initial: starting stretches
        tol: max-norm residual to declare convergence
        max_iter: iteration cap

    Returns:
        SolveResult with the last iterate
    """
    M = require_material_m(M)
    alpha = _require_load(alpha)

    def residual(x: np.ndarray) -> np.ndarray:
        return principal_biot(M, PrincipalStretches.of(x)).as_array() - alpha

    x = initial.as_array()
    r = residual(x)
    iterations = 0
    while iterations < max_iter and np.max(np.abs(r)) > tol:
        jacobian = jacobian_DT(M, PrincipalStretches.of(x)).as_array()
        try:
            dx = np.linalg.solve(jacobian, -r)
        except np.linalg.LinAlgError:
            logger.debug("singular Jacobian at %s after %d iterations", x, iterations)
            break
        if not np.all(np.isfinite(dx)):
            break

        norm = np.linalg.norm(r)
        omega = 1.0
        fallback = None
        for _ in range(30):
            trial = x + omega * dx
            if np.all(trial > 0):
                trial_r = residual(trial)
                fallback = (trial, trial_r)
                if np.linalg.norm(trial_r) < norm:
                    break
            omega *= 0.5
        else:
            if fallback is None:
                break
            trial, trial_r = fallback
        x, r = trial, trial_r
        iterations += 1

    value = float(np.max(np.abs(r)))
    converged = value <= tol
    if not converged:
        logger.debug("damped Newton did not converge from %s: residual %.3e", tuple(initial), value)
    return SolveResult(PrincipalStretches.of(x), converged, iterations, value)


@dataclass(frozen=True)
class DistinctScanReport:
    """Evidence that no equilibrium has three distinct stretches."""

    M: float
    alpha: float
    seed: int
    trials: int
    converged: int
    not_converged: int
    all_distinct: int
    unmatched: int
    cluster_counts: Dict[str, int] = field(default_factory=dict)
    cluster_centres: Dict[str, Tuple[float, float, float]] = field(default_factory=dict)


def _random_distinct_start(rng: np.random.Generator, gap: float) -> PrincipalStretches:
    while True:
        values = rng.uniform(0.3, 3.0, size=3)
        if min(abs(values[0] - values[1]), abs(values[1] - values[2]), abs(values[0] - values[2])) > gap:
            return PrincipalStretches.of(values)


def _all_distinct(s: PrincipalStretches, gap: float) -> bool:
    l1, l2, l3 = s
    return min(abs(l1 - l2), abs(l2 - l3), abs(l1 - l3)) > gap


def distinct_stretch_scan(
    M: float,
    alpha: float,
    trials: int = 200,
    seed: int = 42,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    distinct_gap: float = DEFAULT_DISTINCT_GAP,
    tol: float = DEFAULT_NEWTON_TOL,
    max_iter: int = DEFAULT_NEWTON_MAX_ITER,
) -> DistinctScanReport:
    """
    Run the general solver from seeded all-distinct starts in [0.3, 3]^3.

    Converged states are sorted descending and matched within cluster_tol
    against the radial state and the non-radial states (up to permutation).
    """
    M = require_material_m(M)
    alpha = _require_load(alpha)
    if trials < 1:
        raise ParameterDomainError(f"trials must be at least 1, got {trials}")

    centres = {"radial": PrincipalStretches.radial(radial_solution(M, alpha)).sorted_descending()}
    for solution in nonradial_solutions(M, alpha):
        centres[solution.label] = solution.stretches.sorted_descending()
    counts = {name: 0 for name in centres}

    rng = np.random.default_rng(seed)
    converged = all_distinct = unmatched = 0
    for _ in range(trials):
        result = solve_full_system(M, alpha, _random_distinct_start(rng, distinct_gap), tol, max_iter)
        if not result.converged:
            continue
        converged += 1
        if _all_distinct(result.stretches, distinct_gap):
            all_distinct += 1
        found = np.array(result.stretches.sorted_descending())
        for name, centre in centres.items():
            if np.max(np.abs(found - np.array(centre))) <= cluster_tol:
                counts[name] += 1
                break
        else:
            unmatched += 1

    report = DistinctScanReport(
        M=M,
        alpha=alpha,
        seed=seed,
        trials=trials,
        converged=converged,
        not_converged=trials - converged,
        all_distinct=all_distinct,
        unmatched=unmatched,
        cluster_counts=counts,
        cluster_centres=centres,
    )
    if all_distinct or unmatched:
        logger.warning("distinct-stretch scan found %d all-distinct and %d unmatched states", all_distinct, unmatched)
    return report


# --- energies and tracing --------------------------------------------------


def total_energy_homogeneous(M: float, s: PrincipalStretches, alpha: float) -> float:
    """g(l) - alpha (l1 + l2 + l3) per unit reference volume."""
    return energy_principal(MaterialParams.from_m(M), s) - float(alpha) * (s.l1 + s.l2 + s.l3)


@dataclass(frozen=True)
class BranchRecord:
    """One solution at one load of a branch trace."""

    alpha: float
    branch: str
    stretches: PrincipalStretches
    residual: float
    classification: PointClassification
    total_energy: float
    internal_energy: float

    @property
    def stable(self) -> bool:
        return self.classification.energetically_stable


@dataclass(frozen=True)
class BranchTrace:
    M: float
    records: Tuple[BranchRecord, ...]

    @property
    def alphas(self) -> List[float]:
        """Distinct loads in trace order."""
        seen = []
        for record in self.records:
            if not seen or seen[-1] != record.alpha:
                seen.append(record.alpha)
        return seen

    def branch(self, name: str) -> List[BranchRecord]:
        return [record for record in self.records if record.branch == name]


def _record(M: float, alpha: float, branch: str, s: PrincipalStretches, residual: float, tol: float) -> BranchRecord:
    internal = energy_principal(MaterialParams.from_m(M), s)
    return BranchRecord(
        alpha=alpha,
        branch=branch,
        stretches=s,
        residual=residual,
        classification=classify_point(M, s, tol, DEFAULT_COINCIDENCE_REL),
        total_energy=internal - alpha * (s.l1 + s.l2 + s.l3),
        internal_energy=internal,
    )


def trace_branches(
    M: float,
    alpha_min: float,
    alpha_max: float,
    step: float,
    tol: float = DEFAULT_TOL,
    onset_tol: float = DEFAULT_ONSET_TOL,
) -> BranchTrace:
    """
    Radial and non-radial solutions with their classification over a load grid.

    For each alpha the radial record comes first, then nonradial_a and
    nonradial_b when they exist.
    """
    M = require_material_m(M)
    if not alpha_min < alpha_max:
        raise ParameterDomainError(f"need alpha_min < alpha_max, got [{alpha_min!r}, {alpha_max!r}]")
    if not step > 0:
        raise ParameterDomainError(f"step must be positive, got {step!r}")

    records = []
    for alpha in alpha_grid(alpha_min, alpha_max, step):
        beta = radial_solution(M, alpha)
        radial = PrincipalStretches.radial(beta)
        records.append(_record(M, alpha, "radial", radial, principal_biot(M, radial).max_deviation(alpha), tol))
        for solution in nonradial_solutions(M, alpha, onset_tol):
            records.append(_record(M, alpha, solution.label, solution.stretches, solution.residual, tol))

    logger.debug("traced %d records over alpha in [%r, %r]", len(records), alpha_min, alpha_max)
    return BranchTrace(M, tuple(records))
