"""Quantize a few Gaussian mixtures on a shared codebook, then cluster and center.

Run with ``python3 demos/cluster_mixtures.py``.
"""
import numpy as np

from gaussgeo import GMM, MVN
from gaussgeo.cluster import MetricSpace, gmm_quantize, gmm_simplify, kcenter_gonzalez, kmedioid, miniball

rng = np.random.default_rng(7)
prototypes = [np.array(c) for c in ([0.0, 0.0], [8.0, 0.0], [0.0, 8.0], [8.0, 8.0])]

gmms = []
for _ in range(3):
    comps = [MVN(p + rng.normal(scale=0.1, size=2), np.eye(2) * rng.uniform(0.8, 1.2)) for p in prototypes]
    w = rng.uniform(1, 2, size=4)
    gmms.append(GMM(w / w.sum(), comps))

space = MetricSpace.hilbert()
codebook, weights = gmm_quantize(gmms, 4, space, seed=0)
print("codebook means")
for c in codebook:
    print("  ", c.mean.round(3))
for g, q in zip(gmms, weights):
    print("weights", g.weights.round(4), "->", q.round(4))

small = gmm_simplify(gmms[0], 2, MetricSpace.jeffreys_sqrt())
print("\ntwo-component simplification, weights", small.weights.round(4))

pooled = [c for g in gmms for c in g.components]
kc = kcenter_gonzalez(pooled, 4, space)
km = kmedioid(pooled, 4, space)
print(f"\nk-center radius {kc.radius:.4f}, k-medioid cost {km.cost:.4f}")

center, radius = miniball(pooled, space, 2000)
print(f"miniball center mean {center.mean.round(3)}, radius {radius:.4f}")
