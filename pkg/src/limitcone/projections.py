"""Cartan projection, Jordan (Lyapunov) projection, and the opposition involution.

For SL(n,R) the Cartan projection mu(g) is the sorted vector of log singular
values and the Jordan projection lambda(g) is the sorted vector of log
eigenvalue moduli; both are zero-sum vectors of the closed Weyl chamber.

Long products are handled through log-scaled exterior-power accumulation: the
top singular value (resp. eigenvalue modulus) of the k-th compound of a product
equals the product of its top k singular values (resp. eigenvalue moduli), so
tracking one rescaled matrix per exterior degree recovers the full projection
without overflow.  The rescaling is a scalar bookkeeping device and does not
perturb the computed top value.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NumericalFailure
from .projgeom import GroupElement, compound_matrix

CHAMBER_SUM_TOL = 1e-8


@dataclass(frozen=True)
class ChamberVector:
    """A sorted (nonincreasing), zero-sum real n-vector: an element of a+."""

    coords: np.ndarray

    @classmethod
    def from_coords(cls, coords) -> "ChamberVector":
        c = np.asarray(coords, dtype=float).reshape(-1)
        if c.shape[0] < 2:
            raise InvalidInput("chamber vectors need dimension >= 2")
        if abs(float(c.sum())) > CHAMBER_SUM_TOL:
            raise InvalidInput(f"coordinates must sum to 0, got {c.sum()}")
        if np.any(np.diff(c) > 0):
            raise InvalidInput("coordinates must be sorted nonincreasing")
        # keep the input bits: re-centering here would break exactness of the
        # opposition involution (negation and reversal are lossless)
        c = np.ascontiguousarray(c)
        c.flags.writeable = False
        return cls(coords=c)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def direction(self) -> np.ndarray:
        """Unit vector along self; zero vector if self is zero."""
        norm = float(np.linalg.norm(self.coords))
        if norm == 0.0:
            return np.zeros(self.n)
        return self.coords / norm


def _chamber_from_sorted(values: np.ndarray) -> ChamberVector:
    v = np.sort(np.asarray(values, dtype=float))[::-1]
    v = v - v.sum() / v.shape[0]
    return ChamberVector.from_coords(v)


def cartan_projection(g: GroupElement) -> ChamberVector:
    """mu(g): logs of the singular values of g, sorted nonincreasing."""
    try:
        s = np.linalg.svd(g.entries, compute_uv=False)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"singular value computation failed: {e}") from e
    if np.any(s <= 0.0):
        raise NumericalFailure("nonpositive singular value for an invertible matrix")
    return _chamber_from_sorted(np.log(s))


def jordan_projection(g: GroupElement) -> ChamberVector:
    """lambda(g): logs of the eigenvalue moduli of g, sorted nonincreasing."""
    try:
        w = np.linalg.eigvals(g.entries)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"eigenvalue computation failed: {e}") from e
    mod = np.abs(w)
    if np.any(mod <= 0.0):
        raise NumericalFailure("zero eigenvalue modulus for an invertible matrix")
    return _chamber_from_sorted(np.log(mod))


def opposition_involution(v: ChamberVector) -> ChamberVector:
    """iota(x_1, ..., x_n) = (-x_n, ..., -x_1)."""
    return ChamberVector.from_coords(-v.coords[::-1])


def regularity_gaps(g: GroupElement) -> np.ndarray:
    """Consecutive log-gaps of the Jordan projection; all positive iff g is R-regular."""
    lam = jordan_projection(g).coords
    return -np.diff(lam)


def scaled_product(mats) -> tuple[np.ndarray, float]:
    """Left-to-right product with per-step Frobenius rescaling.

    Returns (P, logscale) with product = exp(logscale) * P.
    """
    mats = list(mats)
    if not mats:
        raise InvalidInput("scaled_product needs at least one factor")
    p = np.asarray(mats[0], dtype=float).copy()
    logscale = 0.0
    s = float(np.linalg.norm(p))
    if s == 0.0 or not np.isfinite(s):
        raise NumericalFailure("zero or non-finite factor in product")
    p /= s
    logscale += np.log(s)
    for m in mats[1:]:
        p = p @ np.asarray(m, dtype=float)
        s = float(np.linalg.norm(p))
        if s == 0.0 or not np.isfinite(s):
            raise NumericalFailure("product underflowed or overflowed despite rescaling")
        p /= s
        logscale += np.log(s)
    return p, logscale


def _log_top_singular(p: np.ndarray, logscale: float) -> float:
    s = np.linalg.svd(p, compute_uv=False)
    return float(np.log(s[0]) + logscale)


def _log_top_eigmod(p: np.ndarray, logscale: float) -> float:
    w = np.linalg.eigvals(p)
    top = float(np.max(np.abs(w)))
    if top <= 0.0:
        raise NumericalFailure("vanishing top eigenvalue modulus")
    return float(np.log(top) + logscale)


def _projection_from_partial_sums(n: int, partial) -> ChamberVector:
    # partial[k-1] = sum of the top k coordinates, k = 1..n-1; determinant 1
    # forces the full sum to 0.
    sums = [0.0] + list(partial) + [0.0]
    coords = np.diff(sums)
    return _chamber_from_sorted(coords)


def product_cartan(mats, n: int) -> ChamberVector:
    """mu of a product of n x n factors, via per-degree compound accumulation."""
    mats = [np.asarray(m, dtype=float) for m in mats]
    partial = []
    for k in range(1, n):
        p, ls = scaled_product(compound_matrix(m, k) for m in mats)
        partial.append(_log_top_singular(p, ls))
    return _projection_from_partial_sums(n, partial)


def product_jordan(mats, n: int) -> ChamberVector:
    """lambda of a product of n x n factors, via per-degree compound accumulation."""
    mats = [np.asarray(m, dtype=float) for m in mats]
    partial = []
    for k in range(1, n):
        p, ls = scaled_product(compound_matrix(m, k) for m in mats)
        partial.append(_log_top_eigmod(p, ls))
    return _projection_from_partial_sums(n, partial)


def iterated_cartan(g: GroupElement, steps: int) -> ChamberVector:
    """(1/steps) * mu(g**steps), stable for steps up to 1e4.

    Converges to jordan_projection(g) as steps grows.
    """
    if steps < 1:
        raise InvalidInput(f"steps must be >= 1, got {steps}")
    partial = []
    for k in range(1, g.n):
        ck = compound_matrix(g.entries, k)
        p, ls = scaled_product([ck] * steps)
        partial.append(_log_top_singular(p, ls) / steps)
    return _projection_from_partial_sums(g.n, partial)
