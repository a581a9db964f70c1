"""Multivariate normals, mixtures, cone embeddings and the affine group.

The embedding ``f_a`` maps ``N(mu, Sigma)`` to the ``(d+1) x (d+1)`` SPD
matrix::

    [[Sigma + a mu mu^T, a mu],
     [a mu^T,            a   ]]

which is the covariance of a centered ``(d+1)``-variate normal. Its
inverse reads ``a`` from the last diagonal entry.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .matcore import as_sym, check_spd


def _vector(x, name):
    x = np.array(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim != 1 or x.size == 0:
        raise InvalidInput(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(x)):
        raise InvalidInput(f"{name} has non-finite entries")
    return x


def _matrix(M, d):
    M = np.array(M, dtype=float)
    if M.ndim == 0 and d == 1:
        M = M.reshape(1, 1)
    return M


@dataclass(frozen=True, eq=False)
class MVN:
    """Multivariate normal ``N(mean, cov)``.

    Parameters
    ----------
    mean : array_like, shape (d,)
        Mean vector. A scalar is accepted for ``d = 1``.
    cov : array_like, shape (d, d)
        SPD covariance. A scalar is accepted for ``d = 1``. It is
        symmetrized and checked on construction.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _vector(self.mean, "mean")
        cov = check_spd(_matrix(self.cov, mean.size), "cov")
        if cov.shape[0] != mean.size:
            raise InvalidInput(f"mean has length {mean.size} but cov is {cov.shape}")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    @classmethod
    def standard(cls, d: int) -> "MVN":
        """Standard normal ``N(0, I_d)``."""
        return cls(np.zeros(d), np.eye(d))

    def allclose(self, other: "MVN", rtol=1e-9, atol=1e-12) -> bool:
        """Parameter-wise comparison with ``numpy.allclose`` semantics."""
        return (self.dim == other.dim
                and np.allclose(self.mean, other.mean, rtol=rtol, atol=atol)
                and np.allclose(self.cov, other.cov, rtol=rtol, atol=atol))

    def __repr__(self):
        return f"MVN(mean={self.mean.tolist()}, cov={self.cov.tolist()})"


@dataclass(frozen=True, eq=False)
class GMM:
    """Gaussian mixture with normalized weights.

    Weights must be positive and sum to one within 1e-9; they are then
    renormalized exactly.
    """

    weights: np.ndarray
    components: tuple

    def __post_init__(self):
        w = _vector(self.weights, "weights")
        comps = tuple(self.components)
        if len(comps) == 0 or len(comps) != w.size:
            raise InvalidInput("need one positive weight per component and at least one component")
        if not all(isinstance(c, MVN) for c in comps):
            raise InvalidInput("components must be MVN instances")
        if len({c.dim for c in comps}) != 1:
            raise InvalidInput("mixture components must share a dimension")
        if np.any(w <= 0):
            raise InvalidInput("mixture weights must be positive")
        if abs(w.sum() - 1.0) > 1e-9:
            raise InvalidInput(f"mixture weights sum to {w.sum()!r}, not 1")
        w = w / w.sum()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def __len__(self):
        return len(self.components)


@dataclass(frozen=True, eq=False)
class AffineMap:
    """Positive affine map ``x -> shift + linear @ x`` with ``det(linear) > 0``."""

    shift: np.ndarray
    linear: np.ndarray

    def __post_init__(self):
        a = _vector(self.shift, "shift")
        A = _matrix(self.linear, a.size)
        if A.shape != (a.size, a.size) or not np.all(np.isfinite(A)):
            raise InvalidInput("linear part must be a finite d x d matrix matching the shift")
        sign, logdet = np.linalg.slogdet(A)
        if sign <= 0 or not np.isfinite(logdet):
            raise InvalidInput("linear part must have positive determinant")
        a.flags.writeable = False
        A = A.copy()
        A.flags.writeable = False
        object.__setattr__(self, "shift", a)
        object.__setattr__(self, "linear", A)

    @property
    def dim(self) -> int:
        return self.shift.size

    @classmethod
    def identity(cls, d: int) -> "AffineMap":
        return cls(np.zeros(d), np.eye(d))

    def __call__(self, N: MVN) -> MVN:
        return affine_apply(self, N)


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Tangent vector in moment coordinates: ``(dmean, dcov)``.

    ``dmean`` is the velocity of the mean and ``dcov`` the (symmetric)
    velocity of the covariance.
    """

    dmean: np.ndarray
    dcov: np.ndarray

    def __post_init__(self):
        a = _vector(self.dmean, "dmean")
        B = as_sym(_matrix(self.dcov, a.size), "dcov")
        if B.shape[0] != a.size:
            raise InvalidInput("dmean and dcov dimensions disagree")
        object.__setattr__(self, "dmean", a)
        object.__setattr__(self, "dcov", B)

    @property
    def dim(self) -> int:
        return self.dmean.size


def _check_pair(N0: MVN, N1: MVN):
    if N0.dim != N1.dim:
        raise InvalidInput(f"dimension mismatch: {N0.dim} vs {N1.dim}")


def embed(N: MVN, a: float = 1.0):
    """Embed a normal into the SPD cone of dimension ``d + 1``.

    Examples
    --------
    >>> embed(MVN([1.0], [[1.0]]))
    array([[2., 1.],
           [1., 1.]])
    """
    if not a > 0:
        raise InvalidInput("embedding parameter a must be positive")
    mu = N.mean
    d = N.dim
    P = np.empty((d + 1, d + 1))
    P[:d, :d] = N.cov + a * np.outer(mu, mu)
    P[:d, d] = a * mu
    P[d, :d] = a * mu
    P[d, d] = a
    return P


def embed_inverse(P):
    """Recover ``(N, a)`` from an SPD matrix of dimension ``d + 1``.

    ``a = P[d, d]``, ``mu = P[:d, d] / a`` and
    ``Sigma = P[:d, :d] - a mu mu^T``.

    Raises
    ------
    InvalidInput
        If ``P`` is not SPD of dimension at least 2, or the recovered
        covariance is not SPD.
    """
    P = check_spd(P)
    if P.shape[0] < 2:
        raise InvalidInput("embedded matrices have dimension d + 1 >= 2")
    return _embed_inverse_unchecked(P)


def _embed_inverse_unchecked(P):
    d = P.shape[0] - 1
    a = float(P[d, d])
    mu = P[:d, d] / a
    S = P[:d, :d] - a * np.outer(mu, mu)
    try:
        N = MVN(mu, S)
    except InvalidInput as exc:
        raise InvalidInput("matrix is outside the embedded region: recovered covariance is not SPD") from exc
    return N, a


def affine_apply(m: AffineMap, N: MVN) -> MVN:
    """Push a normal through ``x -> a + A x``: ``N(a + A mu, A Sigma A^T)``."""
    if m.dim != N.dim:
        raise InvalidInput("affine map and normal dimensions disagree")
    A = m.linear
    return MVN(m.shift + A @ N.mean, A @ N.cov @ A.T)


def affine_compose(m1: AffineMap, m2: AffineMap) -> AffineMap:
    """Group product ``m1 . m2`` (apply ``m2`` first)."""
    if m1.dim != m2.dim:
        raise InvalidInput("affine map dimensions disagree")
    return AffineMap(m1.shift + m1.linear @ m2.shift, m1.linear @ m2.linear)


def affine_inverse(m: AffineMap) -> AffineMap:
    """Group inverse ``(-A^{-1} a, A^{-1})``."""
    Ai = np.linalg.inv(m.linear)
    return AffineMap(-Ai @ m.shift, Ai)


def kl_divergence(N0: MVN, N1: MVN) -> float:
    """Kullback-Leibler divergence ``KL(N0 || N1)``.

    ``(tr(S1^{-1} S0) - d + dmu^T S1^{-1} dmu + log det S1 - log det S0) / 2``.
    """
    _check_pair(N0, N1)
    S1i = np.linalg.inv(N1.cov)
    dmu = N1.mean - N0.mean
    _, ld0 = np.linalg.slogdet(N0.cov)
    _, ld1 = np.linalg.slogdet(N1.cov)
    val = 0.5 * (np.trace(S1i @ N0.cov) - N0.dim + dmu @ S1i @ dmu + ld1 - ld0)
    return max(float(val), 0.0)


def jeffreys(N0: MVN, N1: MVN) -> float:
    """Jeffreys divergence ``KL(N0||N1) + KL(N1||N0)``.

    The log-determinant terms cancel, leaving
    ``tr((S1^{-1} S0 + S0^{-1} S1)/2 - I) + dmu^T ((S0^{-1} + S1^{-1})/2) dmu``.

    Examples
    --------
    >>> jeffreys(MVN([0.0], [[1.0]]), MVN([1.0], [[1.0]]))
    1.0
    """
    _check_pair(N0, N1)
    S0i = np.linalg.inv(N0.cov)
    S1i = np.linalg.inv(N1.cov)
    dmu = N1.mean - N0.mean
    tr = 0.5 * (np.sum(S1i * N0.cov) + np.sum(S0i * N1.cov)) - N0.dim
    val = tr + 0.5 * dmu @ (S0i + S1i) @ dmu
    return max(float(val), 0.0)


def mixture_geodesic(N0: MVN, N1: MVN, t: float) -> MVN:
    """Mixture (m-)geodesic: mean and second moment interpolate linearly."""
    _check_pair(N0, N1)
    if t == 0:
        return N0
    if t == 1:
        return N1
    mu = (1 - t) * N0.mean + t * N1.mean
    M0 = N0.cov + np.outer(N0.mean, N0.mean)
    M1 = N1.cov + np.outer(N1.mean, N1.mean)
    return MVN(mu, (1 - t) * M0 + t * M1 - np.outer(mu, mu))


def exponential_geodesic(N0: MVN, N1: MVN, t: float) -> MVN:
    """Exponential (e-)geodesic: natural parameters ``(S^{-1} mu, S^{-1})`` interpolate linearly."""
    _check_pair(N0, N1)
    if t == 0:
        return N0
    if t == 1:
        return N1
    P0 = np.linalg.inv(N0.cov)
    P1 = np.linalg.inv(N1.cov)
    Pt = (1 - t) * P0 + t * P1
    S = np.linalg.inv(Pt)
    return MVN(S @ ((1 - t) * P0 @ N0.mean + t * P1 @ N1.mean), S)


def centered_kl(P0, P1) -> float:
    """KL divergence between centered normals ``N(0, P0)`` and ``N(0, P1)``."""
    P0 = check_spd(P0, "P0")
    P1 = check_spd(P1, "P1")
    if P0.shape != P1.shape:
        raise InvalidInput("dimension mismatch")
    _, ld0 = np.linalg.slogdet(P0)
    _, ld1 = np.linalg.slogdet(P1)
    return float(0.5 * (np.trace(np.linalg.solve(P1, P0)) - P0.shape[0] + ld1 - ld0))


__all__ = [
    "MVN", "GMM", "AffineMap", "TangentVector", "embed", "embed_inverse",
    "affine_apply", "affine_compose", "affine_inverse", "kl_divergence",
    "jeffreys", "mixture_geodesic", "exponential_geodesic", "centered_kl",
]
