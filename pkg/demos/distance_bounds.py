"""Fisher-Rao distance between two bivariate normals, bounded from both sides.

Run with ``python3 demos/distance_bounds.py``.
"""
import numpy as np

from gaussgeo import (MVN, calvo_oller_lower_bound, fr_distance, fr_distance_approx, fr_geodesic,
                      fr_length_approx, jeffreys)
from gaussgeo.hilbert import hilbert_distance_mvn

N0 = MVN([0.0, 0.0], np.diag([1.0, 0.1]))
N1 = MVN([1.0, 1.0], np.diag([0.1, 1.0]))

print("lower bound (cone embedding)  ", calvo_oller_lower_bound(N0, N1))
print("geodesic length (shooting)    ", fr_distance(N0, N1))
r = fr_distance_approx(N0, N1, 1e-4)
print(f"recursive bounds, eps = 1e-4   [{r.lower:.8f}, {r.upper:.8f}] over {r.segments} segments")
print("sqrt Jeffreys (one step)      ", np.sqrt(jeffreys(N0, N1)))
print("Hilbert pullback distance     ", hilbert_distance_mvn(N0, N1))

print("\nJeffreys steps along two curves")
print(f"{'T':>4} {'cone curve':>12} {'geodesic':>12}")
for T in (1, 2, 4, 8, 16, 32, 64, 128):
    print(f"{T:>4} {fr_length_approx(N0, N1, T, method='cone'):12.6f} {fr_length_approx(N0, N1, T):12.6f}")

g = fr_geodesic(N0, N1)
print("\nmidpoint of the geodesic")
print("  mean", g(0.5).mean)
print("  cov ", g(0.5).cov.round(6).tolist())
