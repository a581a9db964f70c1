"""Command-line front end: ``gaussgeo <command> [flags]``.

Commands
--------
distance  distance between two normals of a dataset
geodesic  sampled curve between two normals, written as CSV
cluster   k-center or k-medioid clustering of a dataset
quantize  shared-codebook quantization of mixtures
miniball  approximate minimax center of a dataset

Datasets are JSON documents, either ``{"mvns": [{"mean": [...], "cov":
[[...]]}, ...]}`` or ``{"gmms": [{"weights": [...], "components": [<mvn>,
...]}, ...]}``. Reports are JSON with sorted keys, written to stdout or to
``--out``. Exit codes: 0 success, 2 input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time

import numpy as np

from . import __version__
from .cluster import (MetricSpace, kcenter_gonzalez, kmedioid, gmm_quantize, miniball,
                      miniball_embedded)
from .errors import InvalidInput, NumericalFailure
from .fisherrao import (calvo_oller_lower_bound, fr_distance, fr_distance_approx, fr_geodesic,
                        fr_length_approx)
from .gaussian import GMM, MVN, exponential_geodesic, jeffreys, kl_divergence, mixture_geodesic
from .hilbert import hilbert_distance_mvn, hilbert_geodesic_mvn

log = logging.getLogger("gaussgeo")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

METRICS = ("fr", "fr-approx", "fr-T", "hilbert", "hilbert-power", "jeffreys-sqrt", "calvo-oller")


# ---------------------------------------------------------------------------
# dataset I/O

def _parse_mvn(rec, where):
    if not isinstance(rec, dict) or "mean" not in rec or "cov" not in rec:
        raise InvalidInput(f"{where}: expected an object with 'mean' and 'cov'")
    cov = np.array(rec["cov"], dtype=float)
    if cov.ndim == 2 and cov.shape[0] == cov.shape[1]:
        if np.max(np.abs(cov - cov.T)) > 1e-9 * max(1.0, np.max(np.abs(cov))):
            raise InvalidInput(f"{where}: covariance is not symmetric")
    try:
        return MVN(rec["mean"], cov)
    except (InvalidInput, ValueError, TypeError) as exc:
        raise InvalidInput(f"{where}: {exc}") from exc


def parse_dataset(doc):
    """Parse a dataset document into ``('mvns', [MVN])`` or ``('gmms', [GMM])``.

    Returns the kind, the parsed items and a list of warnings.
    """
    warnings = []
    if not isinstance(doc, dict):
        raise InvalidInput("dataset must be a JSON object")
    if "mvns" in doc:
        items = [_parse_mvn(r, f"mvns[{i}]") for i, r in enumerate(doc["mvns"])]
        kind = "mvns"
    elif "gmms" in doc:
        items = []
        for i, g in enumerate(doc["gmms"]):
            if not isinstance(g, dict) or "weights" not in g or "components" not in g:
                raise InvalidInput(f"gmms[{i}]: expected 'weights' and 'components'")
            comps = [_parse_mvn(c, f"gmms[{i}].components[{j}]") for j, c in enumerate(g["components"])]
            w = np.array(g["weights"], dtype=float)
            if w.ndim != 1 or w.size != len(comps) or np.any(~np.isfinite(w)) or np.any(w <= 0):
                raise InvalidInput(f"gmms[{i}]: need one positive weight per component")
            if abs(w.sum() - 1) > 1e-9:
                warnings.append(f"gmms[{i}]: weights summed to {w.sum()!r}; renormalized")
            items.append(GMM(w / w.sum(), comps))
        kind = "gmms"
    else:
        raise InvalidInput("dataset needs an 'mvns' or a 'gmms' array")
    if not items:
        raise InvalidInput("dataset is empty")
    if len({x.dim for x in items}) != 1:
        raise InvalidInput("all entries must share a dimension")
    return kind, items, warnings


def load_dataset(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path} is not valid JSON: {exc}") from exc
    return parse_dataset(doc)


def mvn_record(N: MVN):
    """JSON-ready record of a normal; floats keep full precision."""
    return {"mean": [float(x) for x in N.mean], "cov": [[float(x) for x in row] for row in N.cov]}


def dump_report(report, fh):
    # repr-based float output round-trips exactly
    json.dump(report, fh, sort_keys=True, indent=2, allow_nan=False)
    fh.write("\n")


# ---------------------------------------------------------------------------
# metric selection

def metric_space(name, epsilon=1e-3, steps=100):
    if name == "fr":
        return MetricSpace.fisher_rao()
    if name == "fr-approx":
        return MetricSpace.fisher_rao_approx(epsilon)
    if name == "fr-T":
        return MetricSpace.fisher_rao_T(steps)
    if name == "hilbert":
        return MetricSpace.hilbert("exact")
    if name == "hilbert-power":
        return MetricSpace.hilbert("power")
    if name == "jeffreys-sqrt":
        return MetricSpace.jeffreys_sqrt()
    if name == "calvo-oller":
        return MetricSpace.calvo_oller()
    raise InvalidInput(f"unknown metric {name!r}")


def _mvns(kind, items, command):
    if kind != "mvns":
        raise InvalidInput(f"{command} expects an 'mvns' dataset")
    return items


def _pair(items, i, j):
    n = len(items)
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidInput(f"indices must lie in [0, {n - 1}], got {i}, {j}")
    return items[i], items[j]


# ---------------------------------------------------------------------------
# commands

def cmd_distance(args, items):
    N0, N1 = _pair(items, args.i, args.j)
    out = {}
    m = args.method
    if m == "fr-approx":
        r = fr_distance_approx(N0, N1, args.epsilon)
        out = {"value": r.value, "lower": r.lower, "upper": r.upper, "segments": r.segments}
    elif m == "fr-T":
        out = {"value": fr_length_approx(N0, N1, args.steps, method=args.curve_method)}
    elif m == "fr":
        out = {"value": fr_distance(N0, N1)}
    elif m == "jeffreys-sqrt":
        out = {"value": float(np.sqrt(jeffreys(N0, N1)))}
    elif m == "calvo-oller":
        out = {"value": calvo_oller_lower_bound(N0, N1)}
    elif m == "hilbert":
        out = {"value": hilbert_distance_mvn(N0, N1)}
    elif m == "kl":
        out = {"value": kl_divergence(N0, N1)}
    params = {"i": args.i, "j": args.j, "method": m, "epsilon": args.epsilon, "steps": args.steps}
    if m == "fr-T":
        params["curve_method"] = args.curve_method
    return params, out


def _curve(name, N0, N1, curve_method):
    if name == "fisher-rao":
        return fr_geodesic(N0, N1, curve_method)
    if name == "mixture":
        return lambda t: mixture_geodesic(N0, N1, t)
    if name == "exponential":
        return lambda t: exponential_geodesic(N0, N1, t)
    if name == "hilbert":
        return lambda t: hilbert_geodesic_mvn(N0, N1, t)
    raise InvalidInput(f"unknown curve {name!r}")


def ellipse_points(N: MVN, count: int):
    """Image of the unit circle under ``x -> mu + L x`` with ``L L^T = Sigma``."""
    if N.dim != 2:
        raise InvalidInput("ellipse output needs bivariate normals")
    L = np.linalg.cholesky(N.cov)
    th = 2 * np.pi * np.arange(count) / count
    return N.mean + (L @ np.vstack([np.cos(th), np.sin(th)])).T


def cmd_geodesic(args, items):
    N0, N1 = _pair(items, args.i, args.j)
    if args.samples < 2:
        raise InvalidInput("--samples must be at least 2")
    d = N0.dim
    curve = _curve(args.curve, N0, N1, args.curve_method)
    ts = [k / (args.samples - 1) for k in range(args.samples)]
    pts = [curve(t) for t in ts]
    iu = np.triu_indices(d)
    header = ["t"] + [f"mean_{a}" for a in range(d)] + [f"cov_{a}_{b}" for a, b in zip(*iu)]
    try:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for t, N in zip(ts, pts):
                w.writerow([repr(float(t))] + [repr(float(x)) for x in N.mean]
                           + [repr(float(x)) for x in N.cov[iu]])
        outputs = {"csv": args.csv, "rows": len(pts)}
        if args.ellipses:
            path = args.csv[:-4] + "_ellipses.csv" if args.csv.endswith(".csv") else args.csv + ".ellipses.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["sample", "t", "vertex", "x", "y"])
                for s, (t, N) in enumerate(zip(ts, pts)):
                    for v, (x, y) in enumerate(ellipse_points(N, args.ellipse_vertices)):
                        w.writerow([s, repr(float(t)), v, repr(float(x)), repr(float(y))])
            outputs["ellipses_csv"] = path
    except OSError as exc:
        raise InvalidInput(f"cannot write output: {exc}") from exc
    params = {"i": args.i, "j": args.j, "curve": args.curve, "samples": args.samples,
              "ellipses": bool(args.ellipses)}
    if args.curve == "fisher-rao":
        params["curve_method"] = args.curve_method
    return params, outputs


def _clustering_output(cl):
    out = {"centers": [mvn_record(c) for c in cl.centers], "center_indices": [int(i) for i in cl.center_indices],
           "assignment": [int(a) for a in cl.assignment], "radius": cl.radius}
    if cl.cost is not None:
        out["cost"] = cl.cost
        out["cost_history"] = cl.history
    return out


def cmd_cluster(args, items):
    items = _mvns(*items, "cluster")
    space = metric_space(args.metric, args.epsilon, args.steps)
    if args.algo == "kcenter":
        cl = kcenter_gonzalez(items, args.k, space, args.seed)
    else:
        cl = kmedioid(items, args.k, space, seed=args.seed)
    params = {"k": args.k, "algo": args.algo, "metric": args.metric, "seed": args.seed}
    return params, _clustering_output(cl)


def cmd_quantize(args, items):
    kind, gmms = items
    if kind != "gmms":
        raise InvalidInput("quantize expects a 'gmms' dataset")
    space = metric_space(args.metric, args.epsilon, args.steps)
    codebook, quantized = gmm_quantize(gmms, args.k, space, args.seed)
    outputs = {"codebook": [mvn_record(c) for c in codebook],
               "weights": [[float(x) for x in q] for q in quantized]}
    params = {"k": args.k, "metric": args.metric, "seed": args.seed}
    return params, outputs


def cmd_miniball(args, items):
    items = _mvns(*items, "miniball")
    space = metric_space(args.metric, args.epsilon, args.steps)
    if space.geodesic is None:
        space = space.with_geodesic("fisher_rao")
    if args.algo == "direct":
        center, radius = miniball(items, space, args.iters)
        outputs = {"center": mvn_record(center), "radius": radius}
    else:
        center, cone_radius = miniball_embedded(items, args.iters)
        radius = max(space(center, p) for p in items)
        outputs = {"center": mvn_record(center), "radius": radius, "cone_radius": cone_radius}
    params = {"metric": args.metric, "iters": args.iters, "algo": args.algo, "seed": args.seed}
    return params, outputs


COMMANDS = {"distance": cmd_distance, "geodesic": cmd_geodesic, "cluster": cmd_cluster,
            "quantize": cmd_quantize, "miniball": cmd_miniball}


def build_parser():
    p = argparse.ArgumentParser(prog="gaussgeo", description="Fisher-Rao and Hilbert geometry of normals.")
    p.add_argument("--version", action="version", version=f"gaussgeo {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, metric=True, out=True):
        sp.add_argument("input", help="dataset JSON file")
        if out:
            sp.add_argument("--out", dest="report", help="write the JSON report here instead of stdout")
        sp.add_argument("--epsilon", type=float, default=1e-3, help="ratio target of fr-approx (default 1e-3)")
        sp.add_argument("--steps", type=int, default=100, help="segments of fr-T (default 100)")
        sp.add_argument("--timing", action="store_true", help="add wall-clock seconds to the report")
        sp.add_argument("-v", "--verbose", action="store_true")
        if metric:
            sp.add_argument("--metric", choices=METRICS, default="fr-approx")

    sp = sub.add_parser("distance", help="distance between two normals")
    common(sp, metric=False)
    sp.add_argument("--i", type=int, default=0)
    sp.add_argument("--j", type=int, default=1)
    sp.add_argument("--method", default="fr-approx",
                    choices=("fr-approx", "fr-T", "fr", "jeffreys-sqrt", "calvo-oller", "hilbert", "kl"))
    sp.add_argument("--curve-method", choices=("exact", "cone"), default="exact",
                    help="curve sampled by fr-T (default exact geodesic)")

    sp = sub.add_parser("geodesic", help="sample a curve between two normals into CSV")
    common(sp, metric=False, out=False)
    sp.add_argument("--out", dest="csv", required=True, help="CSV output path")
    sp.add_argument("--report", help="write the JSON report here instead of stdout")
    sp.add_argument("--i", type=int, default=0)
    sp.add_argument("--j", type=int, default=1)
    sp.add_argument("--curve", choices=("fisher-rao", "mixture", "exponential", "hilbert"), default="fisher-rao")
    sp.add_argument("--curve-method", choices=("exact", "cone"), default="exact")
    sp.add_argument("--samples", type=int, default=101)
    sp.add_argument("--ellipses", action="store_true", help="also write sampled covariance ellipses")
    sp.add_argument("--ellipse-vertices", type=int, default=64)

    sp = sub.add_parser("cluster", help="k-center or k-medioid clustering")
    common(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--algo", choices=("kcenter", "kmedioid"), default="kcenter")
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("quantize", help="quantize mixtures on a shared codebook")
    common(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("miniball", help="approximate minimax center")
    common(sp)
    sp.add_argument("--iters", type=int, default=1000)
    sp.add_argument("--algo", choices=("direct", "embedded"), default="direct")
    sp.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="gaussgeo: %(message)s")
    t0 = time.perf_counter()
    try:
        kind, items, warnings = load_dataset(args.input)
        if args.command in ("distance", "geodesic"):
            items = _mvns(kind, items, args.command)
            params, outputs = COMMANDS[args.command](args, items)
        else:
            params, outputs = COMMANDS[args.command](args, (kind, items))
    except InvalidInput as exc:
        print(f"gaussgeo: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailure as exc:
        print(f"gaussgeo: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    report = {"command": args.command, "input": args.input, "parameters": params,
              "outputs": outputs, "warnings": warnings}
    elapsed = time.perf_counter() - t0
    if args.timing:
        report["elapsed_seconds"] = elapsed
    log.info("%s finished in %.3f s", args.command, elapsed)
    try:
        if args.report:
            with open(args.report, "w") as fh:
                dump_report(report, fh)
        else:
            dump_report(report, sys.stdout)
    except OSError as exc:
        print(f"gaussgeo: cannot write report: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
