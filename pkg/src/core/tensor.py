"""
Symmetric 3x3 matrix algebra.

Only what the stress-stretch analysis needs: exact-symmetric storage, the
symmetric eigenproblem, isotropic conjugation and a definiteness test.
Everything here is an immutable value or a pure function.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from core.errors import DomainError, ParameterDomainError

ROTATION_TOL = 1e-12
DEFAULT_PD_TOL = 1e-9


@dataclass(frozen=True)
class SymMatrix3:
    """Real symmetric 3x3 matrix stored through its six independent entries."""

    xx: float
    yy: float
    zz: float
    xy: float = 0.0
    yz: float = 0.0
    xz: float = 0.0

    @classmethod
    def from_array(cls, a) -> "SymMatrix3":
        """Build from any 3x3 array; the off-diagonal pairs are averaged."""
        a = np.asarray(a, dtype=float)
        if a.shape != (3, 3):
            raise DomainError(f"expected a 3x3 matrix, got shape {a.shape}")
        return cls(
            xx=float(a[0, 0]),
            yy=float(a[1, 1]),
            zz=float(a[2, 2]),
            xy=float(0.5 * (a[0, 1] + a[1, 0])),
            yz=float(0.5 * (a[1, 2] + a[2, 1])),
            xz=float(0.5 * (a[0, 2] + a[2, 0])),
        )

    @classmethod
    def diag(cls, d1: float, d2: float, d3: float) -> "SymMatrix3":
        return cls(float(d1), float(d2), float(d3))

    @classmethod
    def identity(cls) -> "SymMatrix3":
        return cls(1.0, 1.0, 1.0)

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                [self.xx, self.xy, self.xz],
                [self.xy, self.yy, self.yz],
                [self.xz, self.yz, self.zz],
            ]
        )

    def trace(self) -> float:
        return self.xx + self.yy + self.zz

    def det(self) -> float:
        return float(np.linalg.det(self.as_array()))

    def frobenius_distance(self, other: "SymMatrix3") -> float:
        return float(np.linalg.norm(self.as_array() - other.as_array()))


@dataclass(frozen=True)
class Rotation3:
    """Proper orthogonal 3x3 matrix, validated on construction."""

    rows: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self):
        q = np.asarray(self.rows, dtype=float)
        if q.shape != (3, 3):
            raise DomainError(f"rotation must be 3x3, got shape {q.shape}")
        orthogonality = np.linalg.norm(q.T @ q - np.eye(3))
        if orthogonality > ROTATION_TOL:
            raise DomainError(f"matrix is not orthogonal (|Q^T Q - 1| = {orthogonality:.3e})")
        if abs(np.linalg.det(q) - 1.0) > ROTATION_TOL:
            raise DomainError("rotation must have determinant +1")

    @classmethod
    def from_array(cls, a) -> "Rotation3":
        a = np.asarray(a, dtype=float)
        return cls(tuple(tuple(float(v) for v in row) for row in a))

    @classmethod
    def identity(cls) -> "Rotation3":
        return cls.from_array(np.eye(3))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "Rotation3":
        """Uniformly distributed rotation drawn from a seeded generator."""
        matrix = Rotation.random(None, rng).as_matrix()
        # re-orthonormalise so the 1e-12 invariant holds after float round-off
        u, _, vt = np.linalg.svd(matrix)
        return cls.from_array(u @ vt)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.rows, dtype=float)


class Definiteness(str, Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    BOUNDARY = "PositiveSemidefiniteBoundary"
    INDEFINITE = "Indefinite"


def sym_eigen(S: SymMatrix3) -> Tuple[Tuple[float, float, float], Rotation3]:
    """
    Eigen-decomposition S = Q^T diag(e) Q.

    Eigenvalues are returned in descending order; equal eigenvalues keep the
    order the solver produced them in. The rows of Q are the eigenvectors,
    each signed so that its largest component is positive, with the last row
    flipped if needed to make det Q = +1.
    """
    values, vectors = np.linalg.eigh(S.as_array())
    order = np.argsort(-values, kind="stable")
    q = vectors[:, order].T.copy()
    for row in q:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    if np.linalg.det(q) < 0:
        q[2] *= -1.0
    eigenvalues = tuple(float(v) for v in values[order])
    return eigenvalues, Rotation3.from_array(q)


def conjugate(Q: Rotation3, D: SymMatrix3) -> SymMatrix3:
    """Return Q^T D Q, symmetrised."""
    q = Q.as_array()
    return SymMatrix3.from_array(q.T @ D.as_array() @ q)


def smallest_eigenvalue(S: SymMatrix3) -> float:
    return float(np.linalg.eigvalsh(S.as_array())[0])


def is_positive_definite(S: SymMatrix3, tol: float = DEFAULT_PD_TOL) -> Definiteness:
    """Classify S by its smallest eigenvalue against +/- tol."""
    if tol < 0:
        raise ParameterDomainError(f"tolerance must be non-negative, got {tol!r}")
    smallest = smallest_eigenvalue(S)
    if smallest > tol:
        return Definiteness.POSITIVE_DEFINITE
    if smallest < -tol:
        return Definiteness.INDEFINITE
    return Definiteness.BOUNDARY


def leading_minors(S: SymMatrix3) -> Tuple[float, float, float]:
    """Leading principal minors (m1, m2, m3) used by the Sylvester criterion."""
    m1 = S.xx
    m2 = S.xx * S.yy - S.xy * S.xy
    m3 = S.det()
    return float(m1), float(m2), float(m3)


def sylvester_positive_definite(S: SymMatrix3) -> bool:
    """Sylvester's criterion: all leading principal minors strictly positive."""
    return all(m > 0 for m in leading_minors(S))
