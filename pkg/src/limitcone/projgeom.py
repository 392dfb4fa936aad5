"""Linear-algebra substrate: SL(n,R) elements, exterior powers, projective metrics.

All distances are Euclidean (chordal) on real projective space.  The chordal
distance between lines is d(x1, x2) = min over signs of ||v1 -+ v2|| for unit
representatives (algebraically sqrt(2 - 2|<v1, v2>|), computed in difference
form to avoid cancellation), and the gap between a line and a
hyperplane is |<covector, rep>| for unit representatives.  The gap is within a
factor sqrt(2) of the chordal point-to-hyperplane distance.
"""

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InvalidInput

DET_STRICT_TOL = 1e-9
DET_RENORM_TOL = 1e-6


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GroupElement:
    """An n x n real matrix of determinant 1 (n >= 2).

    Inputs with |det - 1| <= 1e-6 are renormalized by det**(1/n); anything
    further from SL(n,R) is rejected.
    """

    entries: np.ndarray
    n: int

    @classmethod
    def from_matrix(cls, matrix) -> "GroupElement":
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidInput(f"expected a square matrix, got shape {m.shape}")
        n = m.shape[0]
        if n < 2:
            raise InvalidInput(f"dimension must be >= 2, got {n}")
        if not np.all(np.isfinite(m)):
            raise InvalidInput("matrix entries must be finite")
        det = float(np.linalg.det(m))
        # a floating-point determinant only resolves unimodularity down to
        # ~ n * eps * sigma_1^n; past that the check is vacuous by necessity
        with np.errstate(over="ignore"):
            resolution = n * np.finfo(float).eps * float(np.linalg.norm(m, 2)) ** n
        if abs(det - 1.0) > max(DET_STRICT_TOL, resolution):
            if abs(det - 1.0) > max(DET_RENORM_TOL, resolution) or det <= 0.0:
                raise InvalidInput(f"determinant {det} is not 1 within {DET_RENORM_TOL}")
            m = m / det ** (1.0 / n)
        return cls(entries=_freeze(m), n=n)

    @classmethod
    def from_unimodular(cls, matrix) -> "GroupElement":
        """Wrap a matrix known to be unimodular by construction.

        Skips the determinant check, which loses all precision for matrices of
        large dynamic range (relative error ~ eps * condition number).
        """
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise InvalidInput(f"expected a square matrix of size >= 2, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidInput("matrix entries must be finite")
        return cls(entries=_freeze(m), n=m.shape[0])

    def inverse(self) -> "GroupElement":
        return GroupElement(entries=_freeze(np.linalg.inv(self.entries)), n=self.n)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if self.n != other.n:
            raise DimensionMismatch(f"cannot multiply SL({self.n}) by SL({other.n})")
        return GroupElement(entries=_freeze(self.entries @ other.entries), n=self.n)


def _canonical_unit(v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    norm = float(np.linalg.norm(v))
    if norm == 0.0 or not np.all(np.isfinite(v)):
        raise InvalidInput(f"{what} must be a nonzero finite vector")
    v = v / norm
    # canonical sign: first coordinate of largest magnitude is positive
    lead = v[np.argmax(np.abs(v))]
    if lead < 0:
        v = -v
    return _freeze(v)


@dataclass(frozen=True)
class ProjectivePoint:
    """A point of P(R^m), stored as a unit representative with canonical sign."""

    rep: np.ndarray

    @classmethod
    def from_vector(cls, v) -> "ProjectivePoint":
        return cls(rep=_canonical_unit(v, "projective point representative"))

    @property
    def dim(self) -> int:
        return self.rep.shape[0]


@dataclass(frozen=True)
class ProjectiveHyperplane:
    """A hyperplane of P(R^m), stored as a unit covector with canonical sign."""

    covector: np.ndarray

    @classmethod
    def from_covector(cls, phi) -> "ProjectiveHyperplane":
        return cls(covector=_canonical_unit(phi, "hyperplane covector"))

    @property
    def dim(self) -> int:
        return self.covector.shape[0]


@dataclass(frozen=True)
class Representation:
    """The k-th exterior power of the standard representation of SL(n,R)."""

    n: int
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= self.n - 1:
            raise DimensionMismatch(
                f"exterior degree {self.k} out of range for SL({self.n})"
            )

    @property
    def dim(self) -> int:
        return comb(self.n, self.k)

    def apply(self, g: GroupElement) -> np.ndarray:
        return exterior_power(g, self.k)


def compound_matrix(m: np.ndarray, k: int) -> np.ndarray:
    """k-th compound of a square matrix: minors over lexicographic k-subsets."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if not 1 <= k <= n:
        raise DimensionMismatch(f"compound degree {k} out of range for size {n}")
    if k == 1:
        return m.copy()
    subsets = list(combinations(range(n), k))
    d = len(subsets)
    out = np.empty((d, d))
    for a, rows in enumerate(subsets):
        mr = m[np.ix_(rows, range(n))]
        for b, cols in enumerate(subsets):
            out[a, b] = np.linalg.det(mr[:, cols])
    return out


def exterior_power(g: GroupElement, k: int) -> np.ndarray:
    """Matrix of Lambda^k g on Lambda^k R^n in the lexicographic wedge basis."""
    if not 1 <= k <= g.n - 1:
        raise DimensionMismatch(f"exterior degree {k} out of range for SL({g.n})")
    return compound_matrix(g.entries, k)


def proj_distance(x1: ProjectivePoint, x2: ProjectivePoint) -> float:
    """Chordal distance sqrt(2 - 2|<v1, v2>|) between projective points."""
    if x1.dim != x2.dim:
        raise DimensionMismatch(f"ambient dimensions differ: {x1.dim} vs {x2.dim}")
    # min over signs of ||v1 -+ v2||: algebraically sqrt(2 - 2|<v1,v2>|), but
    # the difference form keeps full relative accuracy for nearby points
    return float(
        min(
            np.linalg.norm(x1.rep - x2.rep),
            np.linalg.norm(x1.rep + x2.rep),
        )
    )


def gap(x: ProjectivePoint, h: ProjectiveHyperplane) -> float:
    """|<covector, rep>| for unit representatives; in [0, 1], zero iff incident."""
    if x.dim != h.dim:
        raise DimensionMismatch(f"ambient dimensions differ: {x.dim} vs {h.dim}")
    return min(1.0, abs(float(h.covector @ x.rep)))


def hausdorff_distance(p, q) -> float:
    """Hausdorff distance between two finite sets of projective points."""
    p, q = list(p), list(q)
    if not p or not q:
        raise EmptyInput("hausdorff_distance needs two nonempty point sets")
    pm = np.stack([x.rep for x in p])
    qm = np.stack([x.rep for x in q])
    if pm.shape[1] != qm.shape[1]:
        raise DimensionMismatch("point clouds live in different ambient dimensions")
    # sign-minimized differences (see proj_distance), row-chunked to cap memory
    mins_p = np.empty(pm.shape[0])
    mins_q = np.full(qm.shape[0], np.inf)
    for a in range(pm.shape[0]):
        diff = np.minimum(
            np.linalg.norm(qm - pm[a], axis=1),
            np.linalg.norm(qm + pm[a], axis=1),
        )
        mins_p[a] = diff.min()
        np.minimum(mins_q, diff, out=mins_q)
    return float(max(mins_p.max(), mins_q.max()))
