import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normratio import (
    ConvexDomain,
    Direction,
    DomainError,
    E1,
    E2,
    chord,
    circumscribed_rectangle,
    diamond,
    disc,
    domain_from_json,
    domain_to_json,
    extreme_x_points,
    horizontal_chord,
    load_domain,
    max_boundary_slope,
    parallelogram,
    save_domain,
    square,
    support_line,
    triangle,
    vertical_support_classification,
    width,
    width_extremes,
)
from normratio.geometry import chords_batch
from normratio.sampling import keyed_rng, random_convex_polygon

from conftest import corpus_domains


# ---------------------------------------------------------------------------
# construction and canonicalization
# ---------------------------------------------------------------------------


def test_clockwise_input_is_reordered():
    dom = ConvexDomain([(0, 0), (0, 1), (1, 1), (1, 0)])  # clockwise
    assert dom.area == pytest.approx(1.0)
    v = dom.vertices
    e1 = np.roll(v, -1, axis=0) - v
    e2 = np.roll(v, -2, axis=0) - np.roll(v, -1, axis=0)
    crosses = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    assert np.all(crosses > 0), "canonical order must be counterclockwise"


def test_rejects_degenerate_input():
    with pytest.raises(DomainError):
        ConvexDomain([(0, 0), (1, 0)])
    with pytest.raises(DomainError):
        ConvexDomain([(0, 0), (1, 0), (2, 0)])  # collinear
    with pytest.raises(DomainError):
        ConvexDomain([(0, 0), (2, 0), (2, 2), (1, 0.5), (0, 2)])  # reflex


def test_signed_boundary_distance_signs():
    dom = square()
    d = dom.signed_boundary_distance([(0.5, 0.5), (2.0, 0.5), (0.0, 0.5)])
    assert d[0] == pytest.approx(0.5)
    assert d[1] < 0
    assert abs(d[2]) <= 1e-12


# ---------------------------------------------------------------------------
# widths: rotating calipers against a dense projection grid
# ---------------------------------------------------------------------------


def _extent(dom, theta):
    d = np.array([math.cos(theta), math.sin(theta)])
    proj = dom.vertices @ d
    return float(proj.max() - proj.min())


def test_width_max_is_brute_force_diameter():
    for k, dom in enumerate(corpus_domains(811, 50)):
        v = dom.vertices
        diff = v[:, None, :] - v[None, :, :]
        diam = float(np.hypot(diff[..., 0], diff[..., 1]).max())
        we = width_extremes(dom)
        assert we.w_max == pytest.approx(diam, abs=1e-12), f"case {k}"


def test_width_min_matches_refined_angle_scan():
    from scipy.optimize import minimize_scalar

    grid = np.linspace(0.0, math.pi, 1024, endpoint=False)
    for k, dom in enumerate(corpus_domains(811, 50)):
        ext = np.array([_extent(dom, a) for a in grid])
        we = width_extremes(dom)
        # exactness: no sampled extent may undercut the calipers minimum
        assert we.w_min <= ext.min() + 1e-9, f"case {k}"
        # sharpness: refining the best grid angle reproduces it (the width
        # function has a kink at the minimizer, so the raw grid is O(dtheta)
        # off and a bracketed scalar minimization is needed)
        j = int(np.argmin(ext))
        step = grid[1] - grid[0]
        res = minimize_scalar(lambda a: _extent(dom, a),
                              bounds=(grid[j] - step, grid[j] + step),
                              method="bounded",
                              options={"xatol": 1e-12})
        assert we.w_min == pytest.approx(res.fun, abs=1e-6), f"case {k}"


def test_width_direction_convention():
    # widths are support-line distances PARALLEL to the direction, i.e.
    # extents along its perpendicular
    rect = ConvexDomain([(0, 0), (3, 0), (3, 1), (0, 1)])
    assert width(rect, E1) == pytest.approx(1.0)   # horizontal lines, y-extent
    assert width(rect, E2) == pytest.approx(3.0)
    assert circumscribed_rectangle(rect) == (3.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(s=st.floats(0.1, 10.0), ang=st.floats(0.0, math.pi))
def test_width_extremes_scaled_rotated_square(s, ang):
    c, n = math.cos(ang), math.sin(ang)
    R = np.array([[c, -n], [n, c]])
    dom = ConvexDomain((np.array([(0, 0), (1, 0), (1, 1), (0, 1)]) * s) @ R.T)
    we = width_extremes(dom)
    assert we.w_min == pytest.approx(s, rel=1e-12)
    assert we.w_max == pytest.approx(s * math.sqrt(2), rel=1e-12)


def test_support_line_touches_and_bounds():
    rng = keyed_rng(7, 3)
    for dom in corpus_domains(7, 20):
        for alpha in rng.uniform(0.0, 2 * math.pi, size=5):
            sl = support_line(dom, float(alpha))
            proj = dom.vertices @ sl.normal
            assert proj.max() <= sl.offset + 1e-9
            assert proj.max() >= sl.offset - 1e-9


# ---------------------------------------------------------------------------
# chords
# ---------------------------------------------------------------------------


def test_chord_basic():
    dom = diamond()
    ch = chord(dom, np.array([0.0, 1.0]), 0.0)
    assert ch.a == pytest.approx([-1.0, 0.0])
    assert ch.b == pytest.approx([1.0, 0.0])
    assert ch.length == pytest.approx(2.0)
    assert chord(dom, np.array([0.0, 1.0]), 2.0) is None


def test_horizontal_chord_shorthand():
    ch = horizontal_chord(diamond(), 0.0)
    assert ch.a == pytest.approx([-1.0, 0.0])
    assert ch.b == pytest.approx([1.0, 0.0])
    assert horizontal_chord(square(), 0.25).length == pytest.approx(1.0)
    assert horizontal_chord(square(), 3.0) is None


def test_chord_endpoints_on_boundary():
    rng = keyed_rng(12)
    for dom in corpus_domains(12, 25):
        n = np.array([math.cos(rng.uniform(0, 2 * math.pi)),
                      math.sin(rng.uniform(0, 2 * math.pi))])
        proj = dom.vertices @ n
        t = float(rng.uniform(proj.min(), proj.max()))
        ch = chord(dom, n, t)
        assert ch is not None
        for pt in (ch.a, ch.b):
            assert abs(dom.signed_boundary_distance(pt[None])[0]) <= 1e-9
        mid = 0.5 * (ch.a + ch.b)
        assert dom.contains(mid[None])[0]


def test_chords_batch_matches_scalar():
    dom = corpus_domains(99, 1)[0]
    n = np.array([0.3, 0.9])
    n = n / np.hypot(*n)
    proj = dom.vertices @ n
    ts = np.linspace(proj.min() - 0.1, proj.max() + 0.1, 41)
    P0, P1, valid = chords_batch(dom, n, ts)
    for i, t in enumerate(ts):
        ch = chord(dom, n, float(t))
        if ch is None:
            assert not valid[i]
        else:
            assert valid[i]
            np.testing.assert_allclose(P0[i], ch.a, atol=1e-12)
            np.testing.assert_allclose(P1[i], ch.b, atol=1e-12)


# ---------------------------------------------------------------------------
# extreme points and slope classification
# ---------------------------------------------------------------------------


def test_extreme_points_vertical_edge_picks_lower():
    A, B, rise = extreme_x_points(square())
    assert A == pytest.approx([0.0, 0.0])
    assert B == pytest.approx([1.0, 0.0])
    assert rise == 0.0


def test_vertical_classification_square():
    info = vertical_support_classification(square())
    assert not info.left_angular and not info.right_angular
    assert math.isinf(max(abs(s) for s in info.slopes))


def test_vertical_classification_diamond():
    info = vertical_support_classification(diamond())
    assert info.left_angular and info.right_angular
    assert sorted(abs(s) for s in info.slopes) == [1.0, 1.0, 1.0, 1.0]


def test_max_slope_regular_polygon_closed_form():
    # steepest edge of the 2n-gon inscribed in the unit circle meets the
    # horizontal extreme at slope cot(pi/n)
    for n in (8, 64, 512):
        m = max_boundary_slope(disc(n))
        assert m == pytest.approx(1.0 / math.tan(math.pi / n), rel=1e-12)


def test_max_slope_triangle():
    dom = triangle(0, 0, 2, 0, 1, 1)
    assert max_boundary_slope(dom) == pytest.approx(1.0)
    info = vertical_support_classification(dom)
    assert info.left_angular and info.right_angular


# ---------------------------------------------------------------------------
# presets and serialization
# ---------------------------------------------------------------------------


def test_disc_area_converges():
    assert disc(512).area == pytest.approx(math.pi, rel=1e-4)
    assert disc(512).n == 512


def test_parallelogram_equal_slopes():
    dom = parallelogram(2.0, 1.0)
    v = dom.vertices
    e = np.roll(v, -1, axis=0) - v
    slopes = np.abs(e[:, 1] / e[:, 0])
    np.testing.assert_allclose(slopes, 1.0, atol=1e-12)
    assert max_boundary_slope(dom) == pytest.approx(1.0)


def test_json_roundtrip(tmp_path):
    dom = corpus_domains(5, 1)[0]
    again = domain_from_json(domain_to_json(dom))
    assert again == dom
    path = tmp_path / "dom.json"
    save_domain(dom, str(path))
    assert load_domain(str(path)) == dom
    # also through a plain string
    assert domain_from_json(json.dumps(domain_to_json(dom))) == dom


def test_direction_helpers():
    h = Direction.of(3.0, 4.0)
    assert np.hypot(h.dx, h.dy) == pytest.approx(1.0)
    assert h.perp().dot(h) == pytest.approx(0.0)
    assert Direction.from_angle(0.0).as_array() == pytest.approx([1.0, 0.0])
    assert E1.dot(E2) == 0.0


def test_random_polygon_contract():
    for k in range(40):
        dom = random_convex_polygon(keyed_rng(314, k))
        assert 3 <= dom.n <= 12
        assert dom.area > 0.04
