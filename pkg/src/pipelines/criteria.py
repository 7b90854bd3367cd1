"""
Pointwise constitutive criteria for the Ciarlet-Geymonat Biot response.

Monotonicity is read off the definiteness of DT = D^2 g. Energetic stability
under dead loads combines six pair ratios on the stress gradient with positive
semidefiniteness of D^2 g. Radial invertibility is lost where the shear
eigenvalue of DT(l, l, l) vanishes, i.e. at the positive root of
(2 - 3M) l^6 + 6 l^2 + 4 + 3M.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Dict, List, Sequence, Tuple

from core.biot import jacobian_DT, principal_biot
from core.errors import ConvergenceError, DomainError, ParameterDomainError, require_material_m
from core.material import PrincipalStretches
from core.tensor import Definiteness, is_positive_definite
from core.utils import linear_grid

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_COINCIDENCE_REL = 1e-8

# ordered pairs (i, j), 1-based, with the sign used in the stability ratios
ORDERED_PAIRS: Tuple[Tuple[int, int], ...] = ((1, 2), (2, 1), (2, 3), (3, 2), (3, 1), (1, 3))
_POSITIVE_PAIRS = {(1, 2), (2, 3), (3, 1)}


class Monotonicity(str, Enum):
    STRONGLY_MONOTONE = "StronglyMonotone"
    BOUNDARY = "SemidefiniteBoundary"
    NOT_MONOTONE = "NotMonotone"


_FROM_DEFINITENESS = {
    Definiteness.POSITIVE_DEFINITE: Monotonicity.STRONGLY_MONOTONE,
    Definiteness.BOUNDARY: Monotonicity.BOUNDARY,
    Definiteness.INDEFINITE: Monotonicity.NOT_MONOTONE,
}


class RegionMode(str, Enum):
    MONOTONICITY = "Monotonicity"
    STABILITY = "Stability"
    JACOBIAN_SIGN = "JacobianSign"


def epsilon_sign(i: int, j: int) -> int:
    """+1 for the ordered pairs (1,2), (2,3), (3,1); -1 for their reverses."""
    if i == j or i not in (1, 2, 3) or j not in (1, 2, 3):
        raise ParameterDomainError(f"epsilon is defined for distinct indices in 1..3, got ({i}, {j})")
    return 1 if (i, j) in _POSITIVE_PAIRS else -1


@dataclass(frozen=True)
class PointClassification:
    """Monotonicity, stability and invertibility data at one stretch point."""

    monotonicity: Monotonicity
    energetically_stable: bool
    jacobian_det: float
    minors: Tuple[float, float, float]
    smallest_eigenvalue: float

    @property
    def monotone(self) -> bool:
        return self.monotonicity != Monotonicity.NOT_MONOTONE

    @property
    def locally_invertible(self) -> bool:
        return self.jacobian_det > 0


def _check_tol(tol: float) -> None:
    if not tol >= 0:
        raise ParameterDomainError(f"tolerance must be non-negative, got {tol!r}")


def classify_monotonicity(M: float, s: PrincipalStretches, tol: float = DEFAULT_TOL) -> Monotonicity:
    """Classify DT at s by its smallest eigenvalue against +/- tol."""
    _check_tol(tol)
    return _FROM_DEFINITENESS[is_positive_definite(jacobian_DT(M, s).matrix, tol)]


def stability_ratios(
    M: float,
    s: PrincipalStretches,
    coincidence_rel: float = DEFAULT_COINCIDENCE_REL,
) -> Dict[Tuple[int, int], float]:
    """
    The six ratios (g_i - eps_ij g_j) / (l_i - eps_ij l_j) over ordered pairs.

    When eps_ij = +1 and |l_i - l_j| < coincidence_rel * max(l_i, l_j) the
    difference quotient is replaced by its limit DT_ii - DT_ij.
    """
    grad = principal_biot(M, s).as_array()
    hess = jacobian_DT(M, s).as_array()
    stretches = s.as_array()
    ratios = {}
    for i, j in ORDERED_PAIRS:
        a, b = i - 1, j - 1
        eps = epsilon_sign(i, j)
        li, lj = stretches[a], stretches[b]
        if eps == 1 and abs(li - lj) < coincidence_rel * max(li, lj):
            ratios[(i, j)] = float(hess[a, a] - hess[a, b])
        else:
            ratios[(i, j)] = float((grad[a] - eps * grad[b]) / (li - eps * lj))
    return ratios


def energetic_stability(
    M: float,
    s: PrincipalStretches,
    tol: float = DEFAULT_TOL,
    coincidence_rel: float = DEFAULT_COINCIDENCE_REL,
) -> bool:
    """All six pair ratios >= -tol and D^2 g positive semidefinite to -tol."""
    _check_tol(tol)
    ratios = stability_ratios(M, s, coincidence_rel)
    if min(ratios.values()) < -tol:
        return False
    return jacobian_DT(M, s).smallest_eigenvalue() >= -tol


def radial_stability_margins(M: float, l: float) -> Tuple[float, float]:
    """
    (shear_margin, bulk_margin) on the radial line.

    The radial state l 1 is energetically stable iff both are >= 0, which
    holds exactly for 1 <= l <= lambda_star.
    """
    M = require_material_m(M)
    k = 3.0 * M - 2.0
    l2 = l * l
    l6 = l2 ** 3
    shear = (-k * l6 + 6.0 * l2 + 3.0 * M + 4.0) / (6.0 * l2)
    bulk = (k * l6 + 6.0 * l2 - 4.0 - 3.0 * M) / (3.0 * l2)
    return shear, bulk


def two_equal_stability_margins(
    M: float,
    l1: float,
    l2: float,
    coincidence_rel: float = DEFAULT_COINCIDENCE_REL,
) -> Tuple[float, float, float, float]:
    """
    The four distinct stability ratios at (l1, l1, l2).

    Returns (DT_11 - DT_12, (T_1 - T_3)/(l1 - l2), T_1/l1, (T_1 + T_3)/(l1 + l2)),
    the second taken in its limit form when l1 and l2 coincide.
    """
    ratios = stability_ratios(M, PrincipalStretches.two_equal(l1, l2), coincidence_rel)
    return ratios[(1, 2)], ratios[(3, 1)], ratios[(2, 1)], ratios[(1, 3)]


def invertibility_cubic(M: float, x: float) -> float:
    """s(x) = (2 - 3M) x^3 + 6x + 3M + 4, the radial sextic in x = l^2."""
    M = require_material_m(M)
    return (2.0 - 3.0 * M) * x ** 3 + 6.0 * x + 3.0 * M + 4.0


def cubic_stationary_point(M: float) -> float:
    """Positive stationary point sqrt(2 / (3M - 2)) of the invertibility cubic."""
    M = require_material_m(M)
    return math.sqrt(2.0 / (3.0 * M - 2.0))


def invertibility_loss_radial(M: float, max_doublings: int = 200) -> float:
    """
    The stretch lambda_star at which DT(l, l, l) becomes singular.

    The cubic s(x) is positive on [0, x0] and strictly decreasing beyond its
    stationary point x0, so its single positive root is bracketed by growing
    an upper end from x0, bisected down to 1e-14 and polished by one Newton
    step.

    Args:
        M: stiffness ratio, M > 2/3
        max_doublings: cap on the bracket growth

    Returns:
        lambda_star = sqrt(x_root)
    """
    M = require_material_m(M)
    x0 = cubic_stationary_point(M)
    lo, hi = x0, 2.0 * x0
    doublings = 0
    while invertibility_cubic(M, hi) > 0:
        lo, hi = hi, 2.0 * hi
        doublings += 1
        if doublings > max_doublings:
            raise ConvergenceError(f"could not bracket the invertibility root for M = {M!r}")

    for _ in range(400):
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if invertibility_cubic(M, mid) > 0:
            lo = mid
        else:
            hi = mid

    x = 0.5 * (lo + hi)
    slope = 3.0 * (2.0 - 3.0 * M) * x * x + 6.0
    polished = x - invertibility_cubic(M, x) / slope
    if abs(invertibility_cubic(M, polished)) <= abs(invertibility_cubic(M, x)):
        x = polished
    lambda_star = math.sqrt(x)
    logger.debug("lambda_star(M=%r) = %r after %d bracket doublings", M, lambda_star, doublings)
    return lambda_star


def classify_point(
    M: float,
    s: PrincipalStretches,
    tol: float = DEFAULT_TOL,
    coincidence_rel: float = DEFAULT_COINCIDENCE_REL,
) -> PointClassification:
    """Full classification of one stretch point."""
    _check_tol(tol)
    jacobian = jacobian_DT(M, s)
    return PointClassification(
        monotonicity=_FROM_DEFINITENESS[is_positive_definite(jacobian.matrix, tol)],
        energetically_stable=energetic_stability(M, s, tol, coincidence_rel),
        jacobian_det=jacobian.det(),
        minors=jacobian.minors(),
        smallest_eigenvalue=jacobian.smallest_eigenvalue(),
    )


@dataclass(frozen=True)
class RegionBox:
    """
    Axis-aligned box in stretch space.

    With two_equal=True the box is 2D over (l1, l2) and each grid point maps
    to the stretch triple (l1, l1, l2); otherwise it is a 3D box.
    """

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    two_equal: bool = False

    def __post_init__(self):
        dims = 2 if self.two_equal else 3
        if len(self.lower) != dims or len(self.upper) != dims:
            raise DomainError(f"box needs {dims} lower and upper bounds")
        for lo, hi in zip(self.lower, self.upper):
            if not (lo > 0 and hi > lo):
                raise DomainError(f"empty or non-positive box side [{lo!r}, {hi!r}]")

    @classmethod
    def square_slice(cls, lo: float, hi: float) -> "RegionBox":
        return cls((float(lo), float(lo)), (float(hi), float(hi)), two_equal=True)

    @classmethod
    def cube(cls, lo: float, hi: float) -> "RegionBox":
        return cls((float(lo),) * 3, (float(hi),) * 3)

    @property
    def dims(self) -> int:
        return len(self.lower)

    def to_stretches(self, point: Sequence[float]) -> PrincipalStretches:
        if self.two_equal:
            return PrincipalStretches.two_equal(point[0], point[1])
        return PrincipalStretches.of(point)


@dataclass(frozen=True)
class RegionSample:
    """One scanned grid point."""

    stretches: PrincipalStretches
    classification: PointClassification
    inside: bool


def _inside(mode: RegionMode, classification: PointClassification) -> bool:
    if mode == RegionMode.MONOTONICITY:
        return classification.monotonicity == Monotonicity.STRONGLY_MONOTONE
    if mode == RegionMode.STABILITY:
        return classification.energetically_stable
    return classification.jacobian_det > 0


def region_scan(
    M: float,
    box: RegionBox,
    resolution: Sequence[int],
    mode: RegionMode = RegionMode.MONOTONICITY,
    tol: float = DEFAULT_TOL,
    coincidence_rel: float = DEFAULT_COINCIDENCE_REL,
) -> List[RegionSample]:
    """
    Classify every point of a regular grid over box.

    Points are produced in row-major order: the first axis varies slowest.
    Every sample carries the full classification; `inside` is the membership
    flag selected by mode.

    Args:
        M: stiffness ratio
        box: RegionBox (3D or a two-equal-stretch slice)
        resolution: grid counts per axis, each >= 2 (a single int is broadcast)
        mode: which region the `inside` flag describes
        tol: classification tolerance

    Returns:
        list of RegionSample
    """
    require_material_m(M)
    mode = RegionMode(mode)
    if isinstance(resolution, int):
        resolution = (resolution,) * box.dims
    if len(resolution) != box.dims:
        raise ParameterDomainError(f"resolution needs {box.dims} counts, got {len(resolution)}")
    if any(int(n) < 2 for n in resolution):
        raise ParameterDomainError(f"resolution must be at least 2 per axis, got {tuple(resolution)}")

    axes = [linear_grid(lo, hi, int(n)) for lo, hi, n in zip(box.lower, box.upper, resolution)]
    samples = []
    for point in product(*axes):
        s = box.to_stretches(point)
        classification = classify_point(M, s, tol, coincidence_rel)
        samples.append(RegionSample(s, classification, _inside(mode, classification)))

    logger.debug(
        "region scan M=%r mode=%s: %d points, %d inside",
        M, mode.value, len(samples), sum(sample.inside for sample in samples),
    )
    return samples
