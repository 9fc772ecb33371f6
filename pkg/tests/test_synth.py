import math

import numpy as np
import pytest
from scipy import stats

from slickseg.levelset import Circle, Rectangle
from slickseg.models import Exponential, Gamma, Weibull
from slickseg.synth import Polygon, SceneSpec, generate, parse_shape


def test_circle_area_close_to_analytic():
    _, truth = generate(SceneSpec(oil_shape=Circle(64, 64, 30), seed=1))
    assert abs(int(truth.sum()) - math.pi * 900) <= 60
    assert set(np.unique(truth).tolist()) <= {0, 1}


def test_generation_is_deterministic():
    spec = SceneSpec(seed=7)
    a, ta = generate(spec)
    b, tb = generate(spec)
    assert a.tobytes() == b.tobytes() and ta.tobytes() == tb.tobytes()
    c, _ = generate(SceneSpec(seed=8))
    assert not np.array_equal(a, c)


def test_equal_sigmas_are_homogeneous():
    spec = SceneSpec(oil_sigma=1.0, background_sigma=1.0, seed=3)
    image, truth = generate(spec, check_contrast=False)
    res = stats.ttest_ind(image[truth == 1], image[truth == 0], equal_var=False)
    # 3-sigma two-sided level
    assert res.pvalue > 0.0027


@pytest.mark.parametrize("model", [Exponential(1.0), Exponential(2.0), Weibull(1.7), Gamma(4.0)],
                         ids=repr)
def test_region_means_match_model(model):
    spec = SceneSpec(oil_shape=Rectangle(10, 10, 70, 70), model=model, seed=5)
    image, truth = generate(spec)
    for region, sigma in ((truth == 1, spec.oil_sigma), (truth == 0, spec.background_sigma)):
        vals = image[region]
        assert vals.size >= 1000
        se = vals.std() / math.sqrt(vals.size)
        assert abs(vals.mean() - model.mean(sigma)) <= 3 * se


def test_contrast_and_area_invariants():
    with pytest.raises(ValueError):
        generate(SceneSpec(oil_sigma=1.0, background_sigma=1.0))
    with pytest.raises(ValueError):
        generate(SceneSpec(oil_shape=Circle(64, 64, 3)))
    with pytest.raises(ValueError):
        generate(SceneSpec(oil_shape=Rectangle(0, 0, 128, 100)))


def test_polygon_even_odd_square():
    sq = Polygon(((2, 2), (6, 2), (6, 6), (2, 6)))
    m = sq.mask((10, 10))
    # pixel centers at integer coordinates; edges at 2 and 6 include the left/top side only
    assert m.sum() == 16
    assert np.array_equal(m, Rectangle(2, 2, 6, 6).mask((10, 10)))


def pnpoly(verts, x, y):
    """Crossing-number point-in-polygon test, one point at a time."""
    inside = False
    j = len(verts) - 1
    for i in range(len(verts)):
        xi, yi = verts[i]
        xj, yj = verts[j]
        if (yi > y) != (yj > y) and x < (xj - xi) * (y - yi) / (yj - yi) + xi:
            inside = not inside
        j = i
    return inside


def test_polygon_matches_point_in_polygon_oracle():
    verts = ((20, 60), (50, 35), (95, 40), (110, 70), (80, 95), (40, 90))
    m = Polygon(verts).mask((128, 128))
    ref = np.array([[pnpoly(verts, x, y) for x in range(128)] for y in range(128)])
    assert np.array_equal(m, ref)


def test_parse_shape():
    assert parse_shape("circle:1,2,3") == Circle(1, 2, 3)
    p = parse_shape("polygon:0,0,4,0,4,4")
    assert p.vertices == ((0, 0), (4, 0), (4, 4))
    assert parse_shape(p.spec()) == p
    for bad in ("polygon:1,2,3", "polygon:0,0,1,1", "hexagon:1"):
        with pytest.raises(ValueError):
            parse_shape(bad)
