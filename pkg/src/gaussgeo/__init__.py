"""Fisher-Rao and Hilbert cone geometry of multivariate normals.

Submodules
----------
matcore
    Symmetric and SPD matrix kernels.
gaussian
    Normals, mixtures, cone embeddings, affine maps and divergences.
fisherrao
    Fisher-Rao distances, geodesics and bounds.
hilbert
    Hilbert projective distance on the SPD cone and its pullback.
cluster
    Metric clustering, nearest-neighbour search and centers.
"""
from .errors import InvalidInput, NumericalFailure
from .gaussian import (GMM, MVN, AffineMap, TangentVector, affine_apply, affine_compose,
                       affine_inverse, embed, embed_inverse, exponential_geodesic, jeffreys,
                       kl_divergence, mixture_geodesic)
from .fisherrao import (ApproxResult, FisherRaoGeodesic, calvo_oller_lower_bound, fr_distance,
                        fr_distance_approx, fr_distance_same_cov, fr_distance_same_mean,
                        fr_distance_univariate, fr_geodesic, fr_geodesic_bvp,
                        fr_geodesic_ivp_calvo_oller, fr_geodesic_ivp_eriksen, fr_length_approx)

__all__ = [
    "InvalidInput", "NumericalFailure",
    "GMM", "MVN", "AffineMap", "TangentVector", "affine_apply", "affine_compose",
    "affine_inverse", "embed", "embed_inverse", "exponential_geodesic", "jeffreys",
    "kl_divergence", "mixture_geodesic",
    "ApproxResult", "FisherRaoGeodesic", "calvo_oller_lower_bound", "fr_distance",
    "fr_distance_approx", "fr_distance_same_cov", "fr_distance_same_mean",
    "fr_distance_univariate", "fr_geodesic", "fr_geodesic_bvp",
    "fr_geodesic_ivp_calvo_oller", "fr_geodesic_ivp_eriksen", "fr_length_approx",
]

__version__ = "0.1.0"
