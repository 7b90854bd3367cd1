"""
Principal Biot stresses of the Ciarlet-Geymonat family and their Jacobian.

With c = M/2 - 1/3 the principal stresses are

    T_i = l_i - 1/l_i + c (l_i l_j^2 l_k^2 - 1/l_i)

and DT = D^2 g is the symmetric matrix of their stretch derivatives. The
matrix forms (Biot tensor of U, first Piola-Kirchhoff tensor of F) are
isotropic extensions of the same response.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import linalg

from core.errors import DomainError, require_material_m
from core.material import PrincipalStretches, StressTriple
from core.tensor import Rotation3, SymMatrix3, leading_minors, smallest_eigenvalue

logger = logging.getLogger(__name__)


def _coefficient(M: float) -> float:
    return require_material_m(M) / 2.0 - 1.0 / 3.0


@dataclass(frozen=True)
class DeformationGradient:
    """A 3x3 deformation gradient with det F > 0."""

    rows: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self):
        f = np.asarray(self.rows, dtype=float)
        if f.shape != (3, 3):
            raise DomainError(f"deformation gradient must be 3x3, got shape {f.shape}")
        det = float(np.linalg.det(f))
        if not det > 0:
            raise DomainError(f"deformation gradient must satisfy det F > 0, got det F = {det!r}")

    @classmethod
    def from_array(cls, a) -> "DeformationGradient":
        a = np.asarray(a, dtype=float)
        return cls(tuple(tuple(float(v) for v in row) for row in a))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.rows, dtype=float)

    def det(self) -> float:
        return float(np.linalg.det(self.as_array()))


@dataclass(frozen=True)
class JacobianDT:
    """The stretch derivative dT_i/dl_j of the principal Biot stresses."""

    matrix: SymMatrix3

    def as_array(self) -> np.ndarray:
        return self.matrix.as_array()

    def det(self) -> float:
        return self.matrix.det()

    def minors(self) -> Tuple[float, float, float]:
        return leading_minors(self.matrix)

    def smallest_eigenvalue(self) -> float:
        return smallest_eigenvalue(self.matrix)


def principal_biot(M: float, s: PrincipalStretches) -> StressTriple:
    """Principal Biot stresses of the normalised Ciarlet-Geymonat energy."""
    c = _coefficient(M)
    l1, l2, l3 = s
    return StressTriple(
        l1 - 1.0 / l1 + c * (l1 * l2 * l2 * l3 * l3 - 1.0 / l1),
        l2 - 1.0 / l2 + c * (l2 * l1 * l1 * l3 * l3 - 1.0 / l2),
        l3 - 1.0 / l3 + c * (l3 * l1 * l1 * l2 * l2 - 1.0 / l3),
    )


def cofactor(F) -> np.ndarray:
    """
    Cofactor matrix Cof F = det(F) F^-T in closed form.

    Each row is the cross product of the other two rows of F, so no
    inverse is formed.
    """
    f = np.asarray(F.as_array() if hasattr(F, "as_array") else F, dtype=float)
    if f.shape != (3, 3):
        raise DomainError(f"cofactor needs a 3x3 matrix, got shape {f.shape}")
    return np.array(
        [
            np.cross(f[1], f[2]),
            np.cross(f[2], f[0]),
            np.cross(f[0], f[1]),
        ]
    )


def _volumetric_factor(M: float, J: float) -> float:
    c = _coefficient(M)
    return c * (J - 1.0 / J) - 1.0 / J


def biot_matrix(M: float, U: SymMatrix3) -> SymMatrix3:
    """
    Biot stress tensor T_Biot(U) = U + [c (det U - 1/det U) - 1/det U] Cof U.

    Args:
        M: stiffness ratio, M > 2/3
        U: symmetric positive definite stretch tensor

    Returns:
        SymMatrix3 holding the mu-normalised Biot stress
    """
    if not smallest_eigenvalue(U) > 0:
        raise DomainError("Biot stress needs a positive definite stretch tensor U")
    u = U.as_array()
    J = float(np.linalg.det(u))
    return SymMatrix3.from_array(u + _volumetric_factor(M, J) * cofactor(u))


def first_piola(M: float, F: DeformationGradient) -> np.ndarray:
    """First Piola-Kirchhoff stress S1 = F + [c (det F - 1/det F) - 1/det F] Cof F."""
    if not isinstance(F, DeformationGradient):
        F = DeformationGradient.from_array(F)
    f = F.as_array()
    return f + _volumetric_factor(M, F.det()) * cofactor(f)


def polar_stretch(F: DeformationGradient) -> Tuple[Rotation3, SymMatrix3]:
    """Right polar decomposition F = R U."""
    if not isinstance(F, DeformationGradient):
        F = DeformationGradient.from_array(F)
    rotation, stretch = linalg.polar(F.as_array(), side="right")
    return Rotation3.from_array(rotation), SymMatrix3.from_array(stretch)


def jacobian_DT(M: float, s: PrincipalStretches) -> JacobianDT:
    """
    Jacobian of the principal Biot stresses.

    Diagonal: 1/l_i^2 + 1 + c (1/l_i^2 + l_j^2 l_k^2)
    Off-diagonal (i, j): 2 c l_i l_j l_k^2, k the remaining index.
    """
    c = _coefficient(M)
    l1, l2, l3 = s
    return JacobianDT(
        SymMatrix3(
            xx=1.0 / l1 ** 2 + 1.0 + c * (1.0 / l1 ** 2 + l2 ** 2 * l3 ** 2),
            yy=1.0 / l2 ** 2 + 1.0 + c * (1.0 / l2 ** 2 + l1 ** 2 * l3 ** 2),
            zz=1.0 / l3 ** 2 + 1.0 + c * (1.0 / l3 ** 2 + l1 ** 2 * l2 ** 2),
            xy=2.0 * c * l1 * l2 * l3 ** 2,
            yz=2.0 * c * l2 * l3 * l1 ** 2,
            xz=2.0 * c * l1 * l3 * l2 ** 2,
        )
    )


def _radial_factors(M: float, l: float) -> Tuple[float, float, float]:
    """
    Numerators of the radial eigenvalues, each over 6 l^2.

    shear: (2 - 3M) l^6 + 6 l^2 + 4 + 3M   (double eigenvalue)
    mixed: 3 (3M - 2) l^6 + 6 l^2 + 4 + 3M
    bulk:  5 (3M - 2) l^6 + 6 l^2 + 4 + 3M
    """
    M = require_material_m(M)
    l2 = l * l
    l6 = l2 ** 3
    base = 6.0 * l2 + 4.0 + 3.0 * M
    k = 3.0 * M - 2.0
    return -k * l6 + base, 3.0 * k * l6 + base, 5.0 * k * l6 + base


def det_jacobian_radial(M: float, l: float) -> float:
    """det DT(l, l, l) = shear^2 * bulk / (216 l^6)."""
    shear, _, bulk = _radial_factors(M, l)
    return shear * shear * bulk / (216.0 * l ** 6)


def minors_radial(M: float, l: float) -> Tuple[float, float, float]:
    """Leading principal minors of DT(l, l, l) in closed form."""
    c = _coefficient(M)
    shear, mixed, _ = _radial_factors(M, l)
    m1 = (c * (l ** 6 + 1.0) + l * l + 1.0) / (l * l)
    m2 = shear * mixed / (36.0 * l ** 4)
    m3 = det_jacobian_radial(M, l)
    return m1, m2, m3


def minors_two_equal(M: float, l1: float, l2: float) -> Tuple[float, float]:
    """First two leading minors of DT(l1, l1, l2)."""
    M = require_material_m(M)
    k = 3.0 * M - 2.0
    m1 = (M / 4.0 - 1.0 / 6.0) * (2.0 * l1 ** 2 * l2 ** 2 + 2.0 / l1 ** 2) + 1.0 / l1 ** 2 + 1.0
    cross = k * l1 ** 4 * l2 ** 2
    m2 = -(cross - 3.0 * M - 6.0 * l1 ** 2 - 4.0) * (3.0 * cross + 3.0 * M + 6.0 * l1 ** 2 + 4.0) / (36.0 * l1 ** 4)
    return m1, m2
