"""Randomized property verification over seeded domain/envelope corpora.

Every suite re-checks one structural fact through two independent code
paths (or against an exact closed form) on a reproducible corpus keyed by
``(seed, case index)``: 200 random convex polygons with 5 random
envelopes each by default.  A violation serializes the domain, the
function descriptor, and the offending numbers, which is enough to
regenerate and re-check the exact case in isolation -- that is what
:func:`replay` does.

Suites are registered in :data:`SUITES`; ``run_suite`` executes one by
name, ``run_all`` executes the registry in order.
"""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import norms
from .bounds import affine_normalize, directional_k1_upper
from .concave import (
    CLASSICAL,
    build_function,
    chord_maxima,
    check_concavity,
    check_partition,
    check_vertex_consistency,
    concave_envelope,
    evaluate,
    gradient_at,
    max_profile,
    transform_function,
)
from .geometry import (
    E1,
    E2,
    ConvexDomain,
    Direction,
    chord,
    domain_from_json,
    domain_to_json,
    max_boundary_slope,
    width,
)
from .sampling import (
    keyed_rng,
    random_convex_polygon,
    random_direction,
    random_envelope_descriptor,
    random_interior_points,
)

DEFAULT_CASES = 200
ENVELOPES_PER_CASE = 5


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Case:
    """One corpus entry: a random polygon and its random envelopes."""

    index: int
    seed: int
    domain: ConvexDomain
    envelopes: tuple

    def rng(self, *key: int) -> np.random.Generator:
        """Extra deterministic draws, disjoint from the corpus streams."""
        return keyed_rng(self.seed, self.index, 100, *key)


@lru_cache(maxsize=2048)
def _case(seed: int, index: int) -> Case:
    dom = random_convex_polygon(keyed_rng(seed, index, 0))
    envs = []
    for j in range(ENVELOPES_PER_CASE):
        desc = random_envelope_descriptor(keyed_rng(seed, index, 1 + j), dom)
        envs.append((desc, build_function(dom, desc)))
    return Case(index=index, seed=seed, domain=dom, envelopes=tuple(envs))


def jsonify(obj):
    """Recursively convert numpy scalars/arrays for json.dumps.

    Non-finite floats become the strings "inf"/"-inf"/"nan" so the output
    round-trips through strict JSON parsers.
    """
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    cases: int
    checks: int
    failures: tuple
    seed: int
    tol: float

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "cases": self.cases,
            "checks": self.checks,
            "violations": len(self.failures),
            "passed": self.passed,
            "seed": self.seed,
            "tol": self.tol,
        }


def _violation(detail: dict, descriptor=None) -> dict:
    out = {"detail": jsonify(detail)}
    if descriptor is not None:
        out["function"] = jsonify(descriptor)
    return out


# ---------------------------------------------------------------------------
# suite bodies.  Each returns (checks_performed, violations).
# ---------------------------------------------------------------------------


def _suite_sandwich(case: Case, tol: float):
    """w*M <= ||d_h u||_1 <= 2*w*M for every envelope, both axes."""
    checks, bad = 0, []
    for h in (E1, E2):
        w = width(case.domain, h)
        for desc, u in case.envelopes:
            val = norms.lp_directional_norm(u, h, 1).value
            lo = w * u.max_value
            scale = max(1.0, lo)
            checks += 1
            if not (lo - tol * scale <= val <= 2.0 * lo + tol * scale):
                bad.append(_violation(
                    {"h": [h.dx, h.dy], "norm": val, "wM": lo, "2wM": 2 * lo},
                    desc))
    return checks, bad


def _suite_cone_mass(case: Case, tol: float):
    """Single-peak envelopes hit the lower wall exactly: ||d_h u||_1 = w*M."""
    checks, bad = 0, []
    rng = case.rng(1)
    pts = random_interior_points(rng, case.domain, 2)
    for pt in pts:
        height = float(rng.uniform(0.2, 1.0))
        desc = {"kind": "envelope",
                "constraints": [[float(pt[0]), float(pt[1]), height]]}
        u = build_function(case.domain, desc)
        for h in (E1, E2):
            val = norms.lp_directional_norm(u, h, 1).value
            target = width(case.domain, h) * u.max_value
            checks += 1
            if abs(val - target) > tol * max(1.0, target):
                bad.append(_violation(
                    {"h": [h.dx, h.dy], "norm": val, "wM": target,
                     "error": val - target}, desc))
    return checks, bad


def _suite_line_mass(case: Case, tol: float):
    """Per line: the one-dimensional |d_h u| mass equals twice the chord max.

    The left side clips facets against the line and adds the endpoint
    trace masses; the right side maximizes the restriction by iterating
    active-plane crossings.  Entirely independent code paths.
    """
    checks, bad = 0, []
    rng = case.rng(2)
    dirs = (E1, random_direction(rng))
    for desc, u in case.envelopes[:2]:
        for h in dirs:
            n = h.perp().as_array()
            proj = case.domain.vertices @ n
            lo, hi = float(proj.min()), float(proj.max())
            for frac in rng.uniform(0.05, 0.95, size=3):
                t = lo + (hi - lo) * float(frac)
                ch = chord(case.domain, n, t)
                if ch is None or ch.length <= 100 * case.domain.tol:
                    continue
                m = float(chord_maxima(u, ch.a[None, :], ch.b[None, :])[0][0])
                li = norms.line_integral_abs_dh(u, h, t)
                checks += 1
                if abs(li - 2.0 * m) > tol * (1.0 + 2.0 * abs(m)):
                    bad.append(_violation(
                        {"h": [h.dx, h.dy], "t": t, "line_mass": li,
                         "chord_max": m}, desc))
    return checks, bad


def _suite_tangent(case: Case, tol: float):
    """Tangent-plane bounds through the normalized extreme points.

    After the shear-and-scale the extremes sit at (0,0) and (2,0) where u
    vanishes, so at every differentiable point the supporting plane gives
    x*u_x <= u - y*u_y and (x-2)*u_x <= u - y*u_y, hence
    |u_x| <= (u - y*u_y)/min(x, 2-x).
    """
    checks, bad = 0, []
    img, lin, shift = affine_normalize(case.domain)
    rng = case.rng(3)
    for desc, u in case.envelopes[:2]:
        tu = transform_function(u, lin, shift, img)
        scale = 1.0 + tu.max_value
        for pt in random_interior_points(rng, img, 25):
            try:
                g = gradient_at(tu, pt)
            except ValueError:
                continue
            x, y = float(pt[0]), float(pt[1])
            val = float(evaluate(tu, pt))
            rhs = val - y * float(g[1])
            gx = float(g[0])
            checks += 1
            if x * gx > rhs + tol * scale or (x - 2.0) * gx > rhs + tol * scale:
                bad.append(_violation(
                    {"point": [x, y], "u": val, "grad": [gx, float(g[1])],
                     "rhs": rhs}, desc))
    return checks, bad


def _suite_edge_slope(case: Case, tol: float):
    """Facet gradients are tangential-derivative-free on boundary edges.

    A facet whose closure contains a segment of a boundary edge has a
    plane vanishing on that edge line, so its gradient is orthogonal to
    the edge direction; equivalently -g_x/g_y equals the edge slope.
    """
    checks, bad = 0, []
    A, B = case.domain.edges()
    edge_dirs = B - A
    edge_dirs /= np.hypot(edge_dirs[:, 0], edge_dirs[:, 1])[:, None]
    normals = case.domain.edge_normals()
    offs = np.einsum("ij,ij->i", normals, A)
    tol_geom = 10 * case.domain.tol
    for desc, u in case.envelopes:
        if u.mode != CLASSICAL:
            continue
        # vertex-to-edge-line incidence; interior points of the domain can
        # only touch an edge line inside the actual edge segment
        d = np.abs(u.verts @ normals.T - offs[None, :])   # (V, E)
        on_edge = d <= tol_geom
        found = 0
        for f in range(u.n_facets):
            tri = u.tris[f]
            g = u.planes[f, :2]
            gn = 1.0 + float(np.hypot(*g))
            for a, b in ((0, 1), (1, 2), (0, 2)):
                va, vb = tri[a], tri[b]
                if np.hypot(*(u.verts[va] - u.verts[vb])) <= tol_geom:
                    continue
                shared = np.flatnonzero(on_edge[va] & on_edge[vb])
                if len(shared) == 0:
                    continue
                e = int(shared[0])
                found += 1
                checks += 1
                if abs(float(g @ edge_dirs[e])) > tol * gn:
                    bad.append(_violation(
                        {"facet": f, "edge": e, "grad": list(map(float, g)),
                         "edge_dir": list(map(float, edge_dirs[e])),
                         "tangential": float(g @ edge_dirs[e])}, desc))
        checks += 1
        if found == 0:
            bad.append(_violation(
                {"reason": "no facet with a boundary edge segment"}, desc))
    return checks, bad


def _suite_sup_boundary(case: Case, tol: float):
    """The sup of |d_h u| is attained on a facet touching the boundary,
    and for any unit h it is at most sqrt(2) times the larger axis sup."""
    checks, bad = 0, []
    dirs = (E1, E2, random_direction(case.rng(4)))
    for desc, u in case.envelopes:
        axis_cap = math.sqrt(2.0) * max(
            norms.sup_directional_norm(u, E1).value,
            norms.sup_directional_norm(u, E2).value)
        for h in dirs:
            rep = norms.sup_directional_norm(u, h)
            checks += 1
            if not rep.attained_on_boundary:
                bad.append(_violation(
                    {"h": [h.dx, h.dy], "sup": rep.value,
                     "argmax_facet": rep.argmax_facet}, desc))
            checks += 1
            if rep.value > axis_cap + tol:
                bad.append(_violation(
                    {"h": [h.dx, h.dy], "sup": rep.value,
                     "axis_cap": axis_cap}, desc))
    return checks, bad


def _suite_oracle_l1(case: Case, tol: float, n_lines: int = 257):
    """Facet-sum L1 norms against the scanline quadrature oracle."""
    checks, bad = 0, []
    for desc, u in case.envelopes[:3]:
        for h in (E1, E2):
            exact = norms.lp_directional_norm(u, h, 1).value
            scan = norms.scanline_l1_norm(u, h, n_lines=n_lines).value
            checks += 1
            denom = max(exact, scan, 1e-300)
            if abs(exact - scan) > tol * denom:
                bad.append(_violation(
                    {"h": [h.dx, h.dy], "facet_sum": exact, "scanline": scan,
                     "rel_err": abs(exact - scan) / denom}, desc))
    return checks, bad


def _suite_shear_transport(case: Case, tol: float):
    """Affine pushforward: gradient transport and norm change of variables.

    Checks, with T the normalizing shear (image = lin @ x + shift):
      (a) facet gradients satisfy g = lin^T g-tilde;
      (b) vertical p-norms scale by |det lin|^(1/p), p in {1, 2};
      (c) the composed horizontal norm bound from the triangle inequality.
    """
    checks, bad = 0, []
    img, lin, shift = affine_normalize(case.domain)
    det = abs(float(np.linalg.det(lin)))
    for desc, u in case.envelopes[:2]:
        tu = transform_function(u, lin, shift, img)
        back = tu.planes[:, :2] @ lin
        gscale = 1.0 + float(np.abs(u.planes[:, :2]).max())
        checks += 1
        if float(np.abs(back - u.planes[:, :2]).max()) > tol * gscale:
            bad.append(_violation(
                {"part": "gradient-transport",
                 "max_err": float(np.abs(back - u.planes[:, :2]).max())},
                desc))
        for p in (1.0, 2.0):
            a = norms.lp_directional_norm(tu, E2, p).value ** p
            b = det * norms.lp_directional_norm(u, E2, p).value ** p
            checks += 1
            if abs(a - b) > tol * max(1.0, a, b):
                bad.append(_violation(
                    {"part": "vertical-norm-scaling", "p": p,
                     "image": a, "scaled_source": b}, desc))
        nx = norms.lp_directional_norm(u, E1, 2).value
        n1 = norms.lp_directional_norm(tu, E1, 2).value
        n2 = norms.lp_directional_norm(tu, E2, 2).value
        cap = (abs(lin[0, 0]) * n1 + abs(lin[1, 0]) * n2) / math.sqrt(det)
        checks += 1
        if nx > cap + tol * max(1.0, cap):
            bad.append(_violation(
                {"part": "composition", "norm": nx, "cap": cap}, desc))
    return checks, bad


def _suite_product_four(case: Case, tol: float):
    """Opposite-order width bounds multiply to exactly 4 for every pair."""
    checks, bad = 0, []
    rng = case.rng(5)
    angles = [0.0] + [float(a) for a in rng.uniform(0.0, math.pi, size=2)]
    for ang in angles:
        h1 = Direction.from_angle(ang)
        h2 = h1.perp()
        b12 = directional_k1_upper(case.domain, h1, h2).value
        b21 = directional_k1_upper(case.domain, h2, h1).value
        checks += 1
        if abs(b12 * b21 - 4.0) > 4.0 * tol:
            bad.append(_violation(
                {"angle": ang, "forward": b12, "reverse": b21,
                 "product": b12 * b21}))
    return checks, bad


def _suite_envelope_structure(case: Case, tol: float):
    """Envelopes tile the domain, stay concave, and dominate their pins."""
    checks, bad = 0, []
    for desc, u in case.envelopes:
        scale = 1.0 + u.max_value
        checks += 3
        if not check_partition(u, tol):
            bad.append(_violation({"part": "partition"}, desc))
        if not check_concavity(u, max(tol, 1e-9)):
            bad.append(_violation({"part": "concavity"}, desc))
        if not check_vertex_consistency(u, max(tol, 1e-9)):
            bad.append(_violation({"part": "vertex-values"}, desc))
        cons = np.asarray(desc["constraints"], dtype=float)
        vals = evaluate(u, cons[:, :2])
        checks += 1
        if np.any(vals < cons[:, 2] - tol * scale):
            bad.append(_violation(
                {"part": "domination",
                 "worst": float((vals - cons[:, 2]).min())}, desc))
        checks += 1
        if abs(u.max_value - float(cons[:, 2].max())) > tol * scale:
            bad.append(_violation(
                {"part": "peak", "max_value": u.max_value,
                 "top_constraint": float(cons[:, 2].max())}, desc))
        rim = evaluate(u, case.domain.vertices)
        checks += 1
        if float(np.abs(rim).max()) > tol * scale:
            bad.append(_violation(
                {"part": "boundary-trace",
                 "max_abs": float(np.abs(rim).max())}, desc))
    return checks, bad


def _suite_profile_concavity(case: Case, tol: float):
    """Chord-max profiles are concave with peak equal to the global max."""
    checks, bad = 0, []
    for desc, u in case.envelopes[:3]:
        prof = max_profile(u, E1, n_lines=33)
        v = prof.values
        scale = 1.0 + u.max_value
        checks += 2
        if float(v.max()) > u.max_value + tol * scale:
            bad.append(_violation(
                {"part": "peak-cap", "profile_max": float(v.max()),
                 "max_value": u.max_value}, desc))
        second = v[2:] + v[:-2] - 2.0 * v[1:-1]
        if second.size and float(second.max()) > tol * scale:
            bad.append(_violation(
                {"part": "concavity", "max_second_diff": float(second.max())},
                desc))
    return checks, bad


def _suite_slope_cap(case: Case, tol: float):
    """No classical function beats the boundary-slope sup-norm cap."""
    checks, bad = 0, []
    m = max_boundary_slope(case.domain)
    if math.isinf(m):
        return 0, []
    for desc, u in case.envelopes:
        s1 = norms.sup_directional_norm(u, E1).value
        s2 = norms.sup_directional_norm(u, E2).value
        checks += 1
        if s1 > (m + tol * (1.0 + m)) * s2:
            bad.append(_violation(
                {"sup_x": s1, "sup_y": s2, "slope_cap": m,
                 "ratio": s1 / s2 if s2 else math.inf}, desc))
    return checks, bad


# ---------------------------------------------------------------------------
# registry and runners
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteSpec:
    fn: object
    tol: float
    description: str


SUITES = {
    "theorem1": SuiteSpec(
        _suite_sandwich, 1e-9,
        "wM <= ||d_h u||_1 <= 2wM for every envelope and both axes"),
    "cone-mass": SuiteSpec(
        _suite_cone_mass, 1e-11,
        "single-peak envelopes attain ||d_h u||_1 = wM exactly"),
    "line-mass": SuiteSpec(
        _suite_line_mass, 1e-9,
        "per-line derivative mass equals twice the chord maximum"),
    "lemma-tan": SuiteSpec(
        _suite_tangent, 1e-9,
        "tangent-plane bound |u_x| <= (u - y u_y)/min(x, 2-x) after "
        "normalization"),
    "edge-slope": SuiteSpec(
        _suite_edge_slope, 1e-9,
        "boundary-edge facets have gradients orthogonal to the edge"),
    "sup-boundary": SuiteSpec(
        _suite_sup_boundary, 1e-9,
        "sup |d_h u| is attained on a boundary-touching facet and is at "
        "most sqrt(2) times the larger axis sup"),
    "oracle-l1": SuiteSpec(
        _suite_oracle_l1, 1e-3,
        "facet-sum L1 norm matches the scanline quadrature"),
    "shear-transport": SuiteSpec(
        _suite_shear_transport, 1e-9,
        "affine pushforward: gradient transport and norm scaling"),
    "product-four": SuiteSpec(
        _suite_product_four, 1e-12,
        "opposite-order width bounds multiply to 4"),
    "envelope-structure": SuiteSpec(
        _suite_envelope_structure, 1e-8,
        "hull envelopes tile, stay concave, and dominate their pins"),
    "profile-concavity": SuiteSpec(
        _suite_profile_concavity, 1e-9,
        "chord-max profiles are concave with the right peak"),
    "slope-cap": SuiteSpec(
        _suite_slope_cap, 1e-9,
        "sup-norm ratios never exceed the max boundary slope"),
}


def run_suite(name: str, cases: int = DEFAULT_CASES, seed: int = 42,
              tol: float | None = None, case_indices=None,
              n_lines: int | None = None) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {sorted(SUITES)}")
    spec = SUITES[name]
    use_tol = spec.tol if tol is None else float(tol)
    extra = {}
    if n_lines is not None:
        if "n_lines" not in inspect.signature(spec.fn).parameters:
            raise ValueError(f"suite {name!r} does not take n_lines")
        extra["n_lines"] = int(n_lines)
    indices = list(case_indices) if case_indices is not None else range(cases)
    total_checks = 0
    failures = []
    n_cases = 0
    for k in indices:
        case = _case(seed, int(k))
        n_cases += 1
        checks, bad = spec.fn(case, use_tol, **extra)
        total_checks += checks
        for v in bad:
            v.update({"suite": name, "case": case.index, "seed": seed,
                      "tol": use_tol, "domain": domain_to_json(case.domain)})
            failures.append(v)
    return SuiteResult(suite=name, cases=n_cases, checks=total_checks,
                       failures=tuple(failures), seed=seed, tol=use_tol)


def run_all(cases: int = DEFAULT_CASES, seed: int = 42,
            tol: float | None = None) -> list:
    return [run_suite(name, cases=cases, seed=seed, tol=tol)
            for name in SUITES]


def first_failure(results) -> dict | None:
    for res in results:
        if res.failures:
            return dict(res.failures[0])
    return None


def replay(counterexample: dict) -> SuiteResult:
    """Re-run the single corpus case a serialized violation came from.

    The corpus is regenerated from (seed, case), so the repeated run sees
    bit-identical inputs; the stored domain is cross-checked against the
    regenerated one to catch stale files.
    """
    name = counterexample["suite"]
    seed = int(counterexample["seed"])
    index = int(counterexample["case"])
    stored = counterexample.get("domain")
    if stored is not None:
        regen = _case(seed, index).domain
        ref = domain_from_json(stored)
        if regen.n != ref.n or not np.allclose(
                regen.vertices, ref.vertices, atol=1e-12):
            raise ValueError(
                "serialized domain does not match the regenerated corpus "
                "case; was the file produced with a different version?")
    return run_suite(name, seed=seed, tol=counterexample.get("tol"),
                     case_indices=[index])
