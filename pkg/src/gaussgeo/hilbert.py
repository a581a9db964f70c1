"""Hilbert projective distance on the SPD cone and its pullback to normals.

``d_H(P0, P1) = log(lambda_max / lambda_min)`` over the spectrum of
``P0^{-1} P1``. It vanishes on rays (``d_H(P, cP) = 0``), so it is a metric on
the projectivized cone. Restricted to the embedded normals ``embed(N, 1)``,
whose last diagonal entry is pinned to one, it is a proper metric on normals.
Geodesics are straight segments of the cone.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidInput, NumericalFailure
from .gaussian import MVN, _embed_inverse_unchecked, embed, embed_inverse
from .matcore import _same_dim, check_spd, generalized_eigvalsh, power_method_extreme


class HilbertGeodesicCoeffs(NamedTuple):
    """Extreme eigenvalues ``alpha <= beta`` of ``P0^{-1} P1``."""

    alpha: float
    beta: float


def _extremes(P0, P1, method, iterations=200, seed=0):
    if method == "exact":
        lam = generalized_eigvalsh(P0, P1)
        return float(lam[0]), float(lam[-1])
    if method == "power":
        L = np.linalg.cholesky(P0)
        Li = np.linalg.inv(L)
        C = Li @ P1 @ Li.T
        lmax, lmin = power_method_extreme((C + C.T) / 2, iterations, seed)
        return lmin, lmax
    raise InvalidInput(f"method must be 'exact' or 'power', got {method!r}")


def hilbert_distance_spd(P0, P1, method: str = "exact", iterations: int = 200, seed: int = 0) -> float:
    """Hilbert projective distance between SPD matrices.

    Parameters
    ----------
    P0, P1 : array_like, shape (n, n)
        SPD matrices.
    method : {'exact', 'power'}
        ``'exact'`` takes the full generalized spectrum; ``'power'`` estimates
        the two extreme eigenvalues with :func:`power_method_extreme` on
        ``L^{-1} P1 L^{-T}`` where ``P0 = L L^T``.
    iterations, seed : int
        Power-method settings, ignored by ``'exact'``.

    Examples
    --------
    >>> round(hilbert_distance_spd(np.eye(2), np.diag([8.0, 2.0])), 12) == round(np.log(4), 12)
    True
    """
    P0 = check_spd(P0, "P0")
    P1 = check_spd(P1, "P1")
    _same_dim(P0, P1)
    lo, hi = _extremes(P0, P1, method, iterations, seed)
    if lo <= 0:
        raise NumericalFailure("non-positive generalized eigenvalue")
    return float(max(np.log(hi / lo), 0.0))


def hilbert_distance_mvn(N0: MVN, N1: MVN, method: str = "exact", iterations: int = 200,
                         seed: int = 0) -> float:
    """Pullback Hilbert distance ``d_H(embed(N0, 1), embed(N1, 1))``."""
    if N0.dim != N1.dim:
        raise InvalidInput("dimension mismatch")
    return hilbert_distance_spd(embed(N0), embed(N1), method, iterations, seed)


def hilbert_coefficients(P0, P1) -> HilbertGeodesicCoeffs:
    """Extreme eigenvalues of ``P0^{-1} P1`` used by :func:`hilbert_geodesic_spd`."""
    P0 = check_spd(P0, "P0")
    P1 = check_spd(P1, "P1")
    _same_dim(P0, P1)
    lo, hi = _extremes(P0, P1, "exact")
    return HilbertGeodesicCoeffs(lo, hi)


def _line_weights(alpha, beta, t):
    if beta - alpha < 1e-12 * beta:
        return 1 - t, t
    c0 = (beta * alpha ** t - alpha * beta ** t) / (beta - alpha)
    c1 = (beta ** t - alpha ** t) / (beta - alpha)
    return c0, c1


def hilbert_geodesic_spd(P0, P1, t: float):
    """Hilbert geodesic ``c0(t) P0 + c1(t) P1`` with unit metric speed.

    With ``alpha <= beta`` the extreme eigenvalues of ``P0^{-1} P1``,
    ``c0 = (beta alpha^t - alpha beta^t) / (beta - alpha)`` and
    ``c1 = (beta^t - alpha^t) / (beta - alpha)``. Then
    ``d_H(P0, gamma(t)) = t d_H(P0, P1)``. Projectively equal endpoints
    fall back to ``(1 - t) P0 + t P1``.
    """
    P0 = check_spd(P0, "P0")
    P1 = check_spd(P1, "P1")
    _same_dim(P0, P1)
    if t == 0:
        return P0
    if t == 1:
        return P1
    alpha, beta = _extremes(P0, P1, "exact")
    c0, c1 = _line_weights(alpha, beta, t)
    return c0 * P0 + c1 * P1


def hilbert_geodesic_mvn(N0: MVN, N1: MVN, t: float) -> MVN:
    """Pullback of the Hilbert geodesic between ``embed(N0, 1)`` and ``embed(N1, 1)``.

    Intermediate cone points are rescaled to unit last diagonal entry
    before inversion, which does not change Hilbert distances. The result
    lies on the mixture geodesic at parameter ``c1 / (c0 + c1)``.
    """
    if N0.dim != N1.dim:
        raise InvalidInput("dimension mismatch")
    if t == 0:
        return N0
    if t == 1:
        return N1
    P = hilbert_geodesic_spd(embed(N0), embed(N1), t)
    P = P / P[-1, -1]
    try:
        return _embed_inverse_unchecked((P + P.T) / 2)[0]
    except InvalidInput as exc:
        raise NumericalFailure("pullback left the embedded region") from exc


def hilbert_mixture_parameter(N0: MVN, N1: MVN, t: float) -> float:
    """Mixture-geodesic parameter reached by :func:`hilbert_geodesic_mvn` at ``t``."""
    alpha, beta = _extremes(embed(N0), embed(N1), "exact")
    c0, c1 = _line_weights(alpha, beta, t)
    return float(c1 / (c0 + c1))


def project_to_embedded(P, scale: float = 1.0):
    """Orthogonal projection of a cone point onto the embedded normals.

    Writing ``P = [[S + b m m^T, b m], [b m^T, b]]`` with ``b = P[d, d]``,
    the closest embedded normal is ``embed(N(m, S), 1)`` at trace-metric
    distance ``|log b|``.

    Parameters
    ----------
    P : array_like, shape (d+1, d+1)
        SPD matrix.
    scale : float
        Multiplier of the reported distance. ``1`` is the trace metric and
        ``1/sqrt(2)`` the Fisher-compatible half-trace metric.

    Returns
    -------
    projection : ndarray, shape (d+1, d+1)
        Embedded normal with unit last diagonal entry.
    distance : float
        ``scale * |log b|``.
    """
    if not scale > 0:
        raise InvalidInput("scale must be positive")
    N, b = embed_inverse(P)
    return embed(N), float(scale * abs(np.log(b)))


__all__ = [
    "HilbertGeodesicCoeffs", "hilbert_coefficients", "hilbert_distance_mvn",
    "hilbert_distance_spd", "hilbert_geodesic_mvn", "hilbert_geodesic_spd",
    "hilbert_mixture_parameter", "project_to_embedded",
]
