import numpy as np
import pytest

from toge import cube, hirzebruch, interval, simplex
from toge.quadrature import interval_breaks, polytope_rule


@pytest.mark.parametrize("P", [interval(), simplex(2), cube(2), hirzebruch(1), hirzebruch(2)],
                         ids=lambda P: P.name)
def test_weights_sum_to_volume(P):
    rule = polytope_rule(P, 8, 6)
    assert rule.weights.sum() == pytest.approx(P.euclidean_volume, rel=1e-13)
    assert np.all(rule.weights > 0)
    assert np.all(P.normals @ rule.nodes.T - P.offsets[:, None] > 0)


def test_simplex_monomials_exact():
    # int_Sigma x^a y^b = a! b! / (a + b + 2)!
    rule = polytope_rule(simplex(2), 4, 8)
    x, y = rule.nodes.T
    for a, b, exact in [(0, 0, 1 / 2), (1, 0, 1 / 6), (2, 3, 2 * 6 / 5040), (5, 1, 120 / 40320)]:
        assert (rule.weights * x ** a * y ** b).sum() == pytest.approx(exact, rel=1e-13)


def test_hirzebruch_moment():
    # P = {0 <= y <= 1, 0 <= x <= 2 - y}: int x dx dy = int (2-y)^2/2 dy = 7/6
    rule = polytope_rule(hirzebruch(1), 4, 8)
    assert (rule.weights * rule.nodes[:, 0]).sum() == pytest.approx(7 / 6, rel=1e-13)


def test_interval_breaks_graded():
    br = interval_breaks(0.0, 1.0, 4, 3, 4.0)
    assert br[0] == 0.0 and br[-1] == 1.0
    np.testing.assert_allclose(br[1:4], [0.25 / 64, 0.25 / 16, 0.25 / 4])
    assert np.all(np.diff(br) > 0)


def test_endpoint_singularity_resolved():
    # x^40 concentrates at the right end; Beta(41, 1) = 1/41
    rule = polytope_rule(interval(), 16, 16)
    assert (rule.weights * rule.nodes[:, 0] ** 40).sum() == pytest.approx(1 / 41, rel=1e-14)
