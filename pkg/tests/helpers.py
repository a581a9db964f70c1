"""Random instance generators shared by the tests."""
import numpy as np

from gaussgeo import MVN, AffineMap

SWAP_PAIR = (MVN([0.0, 0.0], np.diag([1.0, 0.1])), MVN([1.0, 1.0], np.diag([0.1, 1.0])))


def random_rotation(rng, d):
    Q, R = np.linalg.qr(rng.normal(size=(d, d)))
    return Q * np.sign(np.diag(R))


def random_spd(rng, d, cond=1e4):
    """SPD matrix with log-uniform eigenvalues in [1, cond] and a Haar rotation."""
    w = np.exp(rng.uniform(0.0, np.log(cond), size=d))
    Q = random_rotation(rng, d)
    P = (Q * w) @ Q.T
    return (P + P.T) / 2


def random_mvn(rng, d, mean_scale=1.0, log_spread=1.0):
    """Normal with Gaussian mean and log-normal covariance spectrum."""
    w = np.exp(rng.normal(scale=log_spread, size=d))
    Q = random_rotation(rng, d)
    return MVN(rng.normal(scale=mean_scale, size=d), (Q * w) @ Q.T)


def random_affine(rng, d):
    """Positive affine map with moderate conditioning."""
    A = random_rotation(rng, d) * np.exp(rng.uniform(-1.0, 1.0, size=d))
    if np.linalg.det(A) < 0:
        A[:, 0] = -A[:, 0]
    return AffineMap(rng.normal(size=d), A)


def rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def mvn_err(N, M):
    """Largest parameter difference, relative to the parameter scale."""
    return max(rel_err(N.mean, M.mean), rel_err(N.cov, M.cov))
