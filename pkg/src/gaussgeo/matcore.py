"""Dense symmetric and SPD matrix kernels.

Eigendecompositions, spectral matrix functions, the affine-invariant
geodesic and distance on the SPD cone, the arithmetic-harmonic mean
iteration and a restarted power method for extreme eigenvalues.

All functions take and return plain ``numpy.ndarray`` objects. Inputs are
validated and symmetrized; outputs are fresh arrays.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidInput, NumericalFailure

SPD_RTOL = 1e-12

_SCALAR_FUNCS = {
    "exp": np.exp,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "log": np.log,
    "sqrt": np.sqrt,
}


class EigenDecomposition(NamedTuple):
    """Eigendecomposition ``M = rotation @ diag(eigenvalues) @ rotation.T``.

    Eigenvalues are sorted in descending order and the columns of
    ``rotation`` are the matching unit eigenvectors.
    """

    rotation: np.ndarray
    eigenvalues: np.ndarray


def as_sym(M, name="M"):
    """Return a symmetrized float copy of a square matrix.

    Parameters
    ----------
    M : array_like, shape (d, d)
        Input matrix.
    name : str
        Name used in error messages.

    Returns
    -------
    S : ndarray, shape (d, d)
        ``(M + M.T) / 2``.

    Raises
    ------
    InvalidInput
        If ``M`` is not a finite, non-empty square matrix.
    """
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvalidInput(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInput(f"{name} has non-finite entries")
    return (M + M.T) / 2


def is_spd(P) -> bool:
    """Test positive definiteness with the relative eigenvalue threshold.

    A symmetric matrix passes when its smallest eigenvalue exceeds
    ``d * 1e-12`` times its largest one.
    """
    try:
        P = as_sym(P)
    except InvalidInput:
        return False
    w = np.linalg.eigvalsh(P)
    return bool(w[-1] > 0 and w[0] > P.shape[0] * SPD_RTOL * w[-1])


def check_spd(P, name="P"):
    """Symmetrize ``P`` and verify it is SPD.

    Returns
    -------
    P : ndarray
        Symmetrized copy.

    Raises
    ------
    InvalidInput
        If ``P`` is not square, not finite or not positive definite.
    """
    P = as_sym(P, name)
    w = np.linalg.eigvalsh(P)
    if not (w[-1] > 0 and w[0] > P.shape[0] * SPD_RTOL * w[-1]):
        raise InvalidInput(f"{name} is not symmetric positive definite (eigenvalues {w[0]:.3g}..{w[-1]:.3g})")
    return P


def _same_dim(P0, P1):
    if P0.shape != P1.shape:
        raise InvalidInput(f"dimension mismatch: {P0.shape} vs {P1.shape}")


def sym_eig(M) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Parameters
    ----------
    M : array_like, shape (d, d)
        Symmetric matrix. It is symmetrized before decomposition.

    Returns
    -------
    EigenDecomposition
        Orthogonal rotation and descending eigenvalues.

    Examples
    --------
    >>> sym_eig([[2.0, 1.0], [1.0, 2.0]]).eigenvalues
    array([3., 1.])
    """
    M = as_sym(M)
    try:
        w, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalFailure(f"eigendecomposition did not converge: {exc}") from exc
    return EigenDecomposition(V[:, ::-1], w[::-1])


def sym_apply(M, func):
    """Apply a scalar function to the spectrum of a symmetric matrix.

    Returns ``O @ diag(func(w)) @ O.T``.
    """
    w, V = np.linalg.eigh(as_sym(M))
    return (V * func(w)) @ V.T


def sym_func(M, kind: str):
    """Spectral matrix function of a symmetric matrix.

    Parameters
    ----------
    M : array_like, shape (d, d)
        Symmetric matrix.
    kind : {'exp', 'sinh', 'cosh', 'log', 'sqrt'}
        Scalar function applied to the eigenvalues. ``log`` and ``sqrt``
        require an SPD argument.

    Returns
    -------
    F : ndarray, shape (d, d)
        Symmetric matrix ``f(M)``.
    """
    if kind not in _SCALAR_FUNCS:
        raise InvalidInput(f"unknown matrix function {kind!r}; expected one of {sorted(_SCALAR_FUNCS)}")
    if kind in ("log", "sqrt"):
        M = check_spd(M, "M")
    return sym_apply(M, _SCALAR_FUNCS[kind])


def spd_power(P, p: float):
    """Real power of an SPD matrix.

    Examples
    --------
    >>> spd_power(np.diag([4.0, 9.0]), 0.5)
    array([[2., 0.],
           [0., 3.]])
    """
    P = check_spd(P)
    if p == 0:
        return np.eye(P.shape[0])
    if p == 1:
        return P
    return sym_apply(P, lambda w: w ** p)


def _sqrt_and_invsqrt(P):
    w, V = np.linalg.eigh(P)
    s = np.sqrt(w)
    return (V * s) @ V.T, (V / s) @ V.T


def spd_geodesic(P0, P1, t: float):
    """Affine-invariant geodesic ``P0 #_t P1`` on the SPD cone.

    ``P0^{1/2} (P0^{-1/2} P1 P0^{-1/2})^t P0^{1/2}``. The weight ``t`` may
    lie outside [0, 1] for extrapolation. ``t = 0`` gives ``P0`` and
    ``t = 1`` gives ``P1``.
    """
    P0 = check_spd(P0, "P0")
    P1 = check_spd(P1, "P1")
    _same_dim(P0, P1)
    if t == 0:
        return P0
    if t == 1:
        return P1
    return _geodesic_unchecked(P0, P1, t)


def _geodesic_unchecked(P0, P1, t):
    R, Ri = _sqrt_and_invsqrt(P0)
    C = Ri @ P1 @ Ri
    C = sym_apply(C, lambda w: w ** t)
    G = R @ C @ R
    return (G + G.T) / 2


def generalized_eigvalsh(P0, P1):
    """Ascending eigenvalues of ``P0^{-1} P1`` for SPD ``P0`` and symmetric ``P1``.

    Computed as the spectrum of ``L^{-1} P1 L^{-T}`` with ``L`` the
    Cholesky factor of ``P0``.
    """
    try:
        L = np.linalg.cholesky(P0)
    except np.linalg.LinAlgError as exc:
        raise InvalidInput("P0 is not positive definite") from exc
    Li = np.linalg.inv(L)
    return np.linalg.eigvalsh(Li @ P1 @ Li.T)


def spd_trace_distance(P0, P1, scale: float = 1.0) -> float:
    """Affine-invariant Riemannian distance on the SPD cone.

    ``scale * sqrt(sum_i log(lambda_i)^2)`` with ``lambda_i`` the
    eigenvalues of ``P0^{-1} P1``. ``scale = 1`` is the trace metric and
    ``scale = 1/sqrt(2)`` its half, which is the Fisher-Rao distance between
    centered normals.

    Examples
    --------
    >>> round(spd_trace_distance(np.eye(2), np.diag([1.0, 1.0]) * np.e**2, 2**-0.5), 12)
    2.0
    """
    if not scale > 0:
        raise InvalidInput("scale must be positive")
    P0 = check_spd(P0, "P0")
    P1 = check_spd(P1, "P1")
    _same_dim(P0, P1)
    return _trace_distance_unchecked(P0, P1, scale)


def _trace_distance_unchecked(P0, P1, scale=1.0):
    lam = generalized_eigvalsh(P0, P1)
    if lam[0] <= 0:
        raise NumericalFailure("generalized eigenvalue is not positive")
    return float(scale * np.sqrt(np.sum(np.log(lam) ** 2)))


def ahm_mean(X, Y, tol: float = 1e-12, max_iter: int = 64, full_output: bool = False):
    """Matrix geometric mean by the arithmetic-harmonic iteration.

    Iterates ``A <- (A + H) / 2`` and ``H <- 2 (A^{-1} + H^{-1})^{-1}``
    from ``A = X, H = Y``. Both sequences converge quadratically to
    ``X #_{1/2} Y``.

    Parameters
    ----------
    X, Y : array_like, shape (d, d)
        SPD matrices.
    tol : float
        Stop when ``||A - H||_F <= tol * ||A||_F``.
    max_iter : int
        Iteration budget.
    full_output : bool
        If True, also return the list of relative gaps, one per update.

    Returns
    -------
    M : ndarray
        The mean ``(A + H) / 2`` at termination.
    gaps : list of float
        Relative gaps ``||A_k - H_k||_F / ||A_k||_F`` after each update,
        only when ``full_output`` is set.

    Raises
    ------
    NumericalFailure
        If the gap is not below ``tol`` within ``max_iter`` updates.
    """
    if not tol > 0:
        raise InvalidInput("tol must be positive")
    A = check_spd(X, "X")
    H = check_spd(Y, "Y")
    _same_dim(A, H)
    gaps = []
    gap = np.linalg.norm(A - H) / np.linalg.norm(A)
    it = 0
    while gap > tol:
        if it == max_iter:
            raise NumericalFailure(f"arithmetic-harmonic mean did not converge in {max_iter} iterations")
        A, H = (A + H) / 2, 2 * np.linalg.inv(np.linalg.inv(A) + np.linalg.inv(H))
        H = (H + H.T) / 2
        gap = np.linalg.norm(A - H) / np.linalg.norm(A)
        gaps.append(gap)
        it += 1
    M = (A + H) / 2
    return (M, gaps) if full_output else M


def _rayleigh_power(P, iterations, rng, restarts):
    d = P.shape[0]
    best = -np.inf
    for _ in range(restarts):
        x = rng.choice([-1.0, 1.0], size=d)
        for _ in range(iterations):
            y = P @ x
            n = np.linalg.norm(y)
            if n == 0:
                break
            x = y / n
        q = x @ P @ x / (x @ x)
        best = max(best, q)
    return float(best)


def power_method_extreme(P, iterations: int = 200, seed: int = 0, restarts: int = 8):
    """Estimate the extreme eigenvalues of an SPD matrix by power iteration.

    Each run starts from a random sign vector in ``{-1, 1}^d`` and returns
    the Rayleigh quotient after ``iterations`` multiplications. The best
    quotient over ``restarts`` seeded runs is kept. The smallest eigenvalue
    is the reciprocal of the largest eigenvalue estimate of ``P^{-1}``.

    Parameters
    ----------
    P : array_like, shape (d, d)
        SPD matrix.
    iterations : int
        Matrix-vector products per run.
    seed : int
        Seed of the start-vector generator.
    restarts : int
        Independent runs per extreme eigenvalue.

    Returns
    -------
    lambda_max, lambda_min : float
        Both estimates lie inside the spectrum up to rounding.
    """
    if iterations < 1 or restarts < 1:
        raise InvalidInput("iterations and restarts must be positive")
    P = check_spd(P)
    w = np.linalg.eigvalsh(P)
    if w[0] < 1e-14 * w[-1]:
        raise NumericalFailure("matrix too ill-conditioned to invert")
    rng = np.random.default_rng(seed)
    lmax = _rayleigh_power(P, iterations, rng, restarts)
    Pi = np.linalg.inv(P)
    Pi = (Pi + Pi.T) / 2
    lmin = 1.0 / _rayleigh_power(Pi, iterations, rng, restarts)
    return lmax, lmin
