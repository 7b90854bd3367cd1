"""
Neo-Hooke energies W = mu/2 |F|^2 + h(det F) and the Ciarlet-Geymonat family.

All energies and stresses are normalised by the shear modulus mu. The
one-parameter form used throughout is

    W(F) / mu = 1/2 |F|^2 - log det F + (M/4 - 1/6)((det F)^2 - 2 log det F - 1)

with M = (lambda + 2 mu / 3) / mu > 2/3. Physical values are recovered by
multiplying by mu at the CLI boundary.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Iterator, Tuple

import numpy as np

from core.errors import EvaluationError, ParameterDomainError, require_material_m
from core.utils import log_grid

logger = logging.getLogger(__name__)

TWO_THIRDS = 2.0 / 3.0

RADIAL_CONDITION_DOMAIN = (1e-6, 1e6)
RADIAL_CONDITION_SAMPLES = 1000
# a divergent tail keeps at least this share of its first half-decade increment
DIVERGENCE_INCREMENT_RATIO = 0.9


@dataclass(frozen=True)
class MaterialParams:
    """Shear modulus mu, Lame parameter lam and the derived ratio M."""

    mu: float
    lam: float
    M: float = field(init=False)

    def __post_init__(self):
        if not self.mu > 0:
            raise ParameterDomainError(f"shear modulus mu must be positive, got {self.mu!r}")
        if not self.lam > 0:
            raise ParameterDomainError(f"Lame parameter lambda must be positive, got {self.lam!r}")
        object.__setattr__(self, "M", (self.lam + 2.0 * self.mu / 3.0) / self.mu)
        require_material_m(self.M)

    @classmethod
    def from_m(cls, M: float, mu: float = 1.0) -> "MaterialParams":
        """Parameters for a given M; lambda = mu (M - 2/3)."""
        M = require_material_m(M)
        return cls(mu=float(mu), lam=float(mu) * (M - TWO_THIRDS))

    @property
    def volumetric_coefficient(self) -> float:
        """The recurring factor M/2 - 1/3."""
        return self.M / 2.0 - 1.0 / 3.0


@dataclass(frozen=True)
class PrincipalStretches:
    """Ordered triple of principal stretches (singular values of U)."""

    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        for name in ("l1", "l2", "l3"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterDomainError(f"stretch {name} must be a positive finite number, got {value!r}")

    @classmethod
    def of(cls, values) -> "PrincipalStretches":
        l1, l2, l3 = (float(v) for v in values)
        return cls(l1, l2, l3)

    @classmethod
    def radial(cls, beta: float) -> "PrincipalStretches":
        return cls(float(beta), float(beta), float(beta))

    @classmethod
    def two_equal(cls, l1: float, l2: float) -> "PrincipalStretches":
        """The (l1, l1, l2) configuration of a non-radial cube solution."""
        return cls(float(l1), float(l1), float(l2))

    def __iter__(self) -> Iterator[float]:
        return iter((self.l1, self.l2, self.l3))

    def as_array(self) -> np.ndarray:
        return np.array([self.l1, self.l2, self.l3])

    def volume_ratio(self) -> float:
        return self.l1 * self.l2 * self.l3

    def sorted_descending(self) -> Tuple[float, float, float]:
        return tuple(sorted((self.l1, self.l2, self.l3), reverse=True))

    def permuted(self, order: Tuple[int, int, int]) -> "PrincipalStretches":
        values = (self.l1, self.l2, self.l3)
        return PrincipalStretches.of(values[i] for i in order)


@dataclass(frozen=True)
class StressTriple:
    """Principal Biot stresses (t1, t2, t3), mu-normalised."""

    t1: float
    t2: float
    t3: float

    def __iter__(self) -> Iterator[float]:
        return iter((self.t1, self.t2, self.t3))

    def as_array(self) -> np.ndarray:
        return np.array([self.t1, self.t2, self.t3])

    def scaled(self, mu: float) -> "StressTriple":
        return StressTriple(mu * self.t1, mu * self.t2, mu * self.t3)

    def max_deviation(self, alpha: float) -> float:
        """max_i |t_i - alpha|, the dead-load residual."""
        return max(abs(self.t1 - alpha), abs(self.t2 - alpha), abs(self.t3 - alpha))


class VolumetricFunction(ABC):
    """A mu-normalised convex volumetric function h with analytic derivatives."""

    name = "h"

    @abstractmethod
    def value(self, x: float) -> float:
        ...

    @abstractmethod
    def first(self, x: float) -> float:
        ...

    @abstractmethod
    def second(self, x: float) -> float:
        ...


class CiarletGeymonatVolumetric(VolumetricFunction):
    """h(x) = -log x + (M/4 - 1/6)(x^2 - 2 log x - 1)."""

    def __init__(self, M: float):
        self.M = require_material_m(M)
        self.c = self.M / 4.0 - 1.0 / 6.0
        self.name = f"ciarlet-geymonat(M={self.M!r})"

    def value(self, x: float) -> float:
        return -math.log(x) + self.c * (x * x - 2.0 * math.log(x) - 1.0)

    def first(self, x: float) -> float:
        return -1.0 / x + 2.0 * self.c * (x - 1.0 / x)

    def second(self, x: float) -> float:
        return 1.0 / (x * x) + 2.0 * self.c * (1.0 + 1.0 / (x * x))


class CallableVolumetric(VolumetricFunction):
    """Wraps user supplied h, h' and h'' callables."""

    def __init__(
        self,
        h: Callable[[float], float],
        dh: Callable[[float], float],
        d2h: Callable[[float], float],
        name: str = "custom",
    ):
        self._h = h
        self._dh = dh
        self._d2h = d2h
        self.name = name

    def value(self, x: float) -> float:
        return float(self._h(x))

    def first(self, x: float) -> float:
        return float(self._dh(x))

    def second(self, x: float) -> float:
        return float(self._d2h(x))


def cg_volumetric(M: float) -> VolumetricFunction:
    """The normalised Ciarlet-Geymonat volumetric function for ratio M."""
    return CiarletGeymonatVolumetric(M)


def energy_principal(params: MaterialParams, s: PrincipalStretches) -> float:
    """Normalised energy g(l1, l2, l3)."""
    J = s.volume_ratio()
    log_j = math.log(J)
    volumetric = (3.0 * params.M - 2.0) / 6.0 * (J * J - 2.0 * log_j - 1.0)
    return 0.5 * (volumetric - 2.0 * log_j + s.l1 ** 2 + s.l2 ** 2 + s.l3 ** 2)


def principal_biot_nh(h: VolumetricFunction, s: PrincipalStretches) -> StressTriple:
    """Principal Biot stresses T_i = l_i + h'(J) J / l_i for W = 1/2 |U|^2 + h(det U)."""
    J = s.volume_ratio()
    pressure = h.first(J) * J
    return StressTriple(*(l + pressure / l for l in s))


def stress_free_defect(h: VolumetricFunction) -> float:
    """1 + h'(1); zero exactly when the reference configuration is stress free."""
    return 1.0 + h.first(1.0)


def radial_scalar_response(h: VolumetricFunction, x: float) -> float:
    """x^(1/3) + h'(x) x^(2/3): the load alpha carried by a radial state of volume ratio x."""
    if not x > 0:
        raise ParameterDomainError(f"volume ratio must be positive, got {x!r}")
    return x ** (1.0 / 3.0) + h.first(x) * x ** (2.0 / 3.0)


def radial_response_derivative(h: VolumetricFunction, x: float) -> float:
    """Exact d/dx of radial_scalar_response."""
    return (
        x ** (-2.0 / 3.0) / 3.0
        + h.second(x) * x ** (2.0 / 3.0)
        + 2.0 / 3.0 * h.first(x) * x ** (-1.0 / 3.0)
    )


@dataclass(frozen=True)
class RadialConditionReport:
    """Sampled evidence for unique radial solvability of T_Biot(U) = alpha 1."""

    derivative_positive_everywhere: bool
    lower_divergence: bool
    upper_divergence: bool
    convex_on_samples: bool
    n_samples: int
    domain: Tuple[float, float]
    note: str = "sampled evidence"

    @property
    def unique_radial_solution(self) -> bool:
        return self.derivative_positive_everywhere and self.lower_divergence and self.upper_divergence


def _diverges(values: np.ndarray, direction: float) -> bool:
    """
    Heuristic divergence test over one decade of samples ordered toward the end.

    The values must move monotonically in `direction` (+1 up, -1 down), finish
    on that side of zero, and the second half-decade increment must not be
    smaller than DIVERGENCE_INCREMENT_RATIO times the first; a convergent tail
    shrinks its increments.
    """
    if values.size < 3:
        return False
    steps = np.diff(values) * direction
    if not np.all(steps > 0):
        return False
    if values[-1] * direction <= 0:
        return False
    half = values.size // 2
    first = (values[half] - values[0]) * direction
    second = (values[-1] - values[half]) * direction
    return second >= DIVERGENCE_INCREMENT_RATIO * first


def check_unique_radial_conditions(
    h: VolumetricFunction,
    domain: Tuple[float, float] = RADIAL_CONDITION_DOMAIN,
    n_samples: int = RADIAL_CONDITION_SAMPLES,
) -> RadialConditionReport:
    """
    Sample the unique-radial-solution conditions for a volumetric function.

    Checks on a log-spaced grid that the radial response x^(1/3) + h'(x) x^(2/3)
    has a positive derivative, tends to -inf at the lower end and +inf at the
    upper end (judged over the last decade of samples at each end), and that
    h'' >= 0. A non-finite sample of h, h' or h'' raises EvaluationError.
    The result is sampled evidence, not a proof.

    Args:
        h: volumetric function (mu-normalised)
        domain: (lower, upper) with 0 < lower < upper
        n_samples: number of grid points, at least 2

    Returns:
        RadialConditionReport
    """
    lower, upper = (float(v) for v in domain)
    if not (0 < lower < upper):
        raise ParameterDomainError(f"domain must satisfy 0 < lower < upper, got {domain!r}")
    if n_samples < 2:
        raise ParameterDomainError(f"need at least 2 samples, got {n_samples}")

    grid = log_grid(lower, upper, n_samples)
    response = np.empty_like(grid)
    derivative = np.empty_like(grid)
    curvature = np.empty_like(grid)
    for k, x in enumerate(grid):
        try:
            value = float(h.value(x))
            response[k] = radial_scalar_response(h, x)
            derivative[k] = radial_response_derivative(h, x)
            curvature[k] = h.second(x)
        except (ArithmeticError, ValueError) as exc:
            raise EvaluationError(f"{h.name} failed at x = {x!r}: {exc}", x=float(x)) from exc
        samples = (value, response[k], derivative[k], curvature[k])
        if not all(math.isfinite(sample) for sample in samples):
            raise EvaluationError(f"{h.name} is not finite at x = {x!r}", x=float(x))

    low_decade = grid <= lower * 10.0
    high_decade = grid >= upper / 10.0
    # toward x -> 0 the response must fall, toward x -> inf it must rise
    lower_divergence = _diverges(response[low_decade][::-1], direction=-1.0)
    upper_divergence = _diverges(response[high_decade], direction=1.0)

    report = RadialConditionReport(
        derivative_positive_everywhere=bool(np.all(derivative > 0)),
        lower_divergence=bool(lower_divergence),
        upper_divergence=bool(upper_divergence),
        convex_on_samples=bool(np.all(curvature >= 0)),
        n_samples=int(n_samples),
        domain=(lower, upper),
    )
    if not report.unique_radial_solution:
        logger.warning("radial uniqueness conditions not met for %s: %s", h.name, report)
    else:
        logger.debug("radial uniqueness conditions hold for %s on %s", h.name, report.domain)
    return report
