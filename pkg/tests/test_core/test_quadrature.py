import math

import numpy
import pytest

from diskbio.core.mesh import PairRelation
from diskbio.core.quadrature import (
    RuleKind,
    polar_rule,
    quad_rule,
    reference_barycentrics,
    singular_pair_quad,
    triangle_quad,
    weighted_disk_quad,
)
from diskbio.core.specfun import PolarPoint
from diskbio.errors import DomainError, UnsupportedRuleError


def _monomial_integral(i, j):
    # over the reference triangle {u, v >= 0, u + v <= 1}
    return math.factorial(i) * math.factorial(j) / math.factorial(i + j + 2)


@pytest.mark.parametrize("order", [1, 2, 4, 7, 10])
def test_triangle_exactness(order):
    rule = triangle_quad(order)
    assert (rule.weights > 0).all()
    u, v = rule.nodes.T
    for i in range(order + 1):
        for j in range(order + 1 - i):
            assert rule.integrate(u**i * v**j) == pytest.approx(_monomial_integral(i, j), rel=1e-12)


def test_triangle_nodes_inside():
    rule = triangle_quad(6)
    u, v = rule.nodes.T
    assert (u > 0).all() and (v > 0).all() and (u + v < 1).all()


def test_triangle_unsupported():
    with pytest.raises(UnsupportedRuleError):
        triangle_quad(0)
    with pytest.raises(UnsupportedRuleError):
        triangle_quad(11)


@pytest.mark.parametrize("relation", list(PairRelation))
def test_pair_rules(relation):
    rule = singular_pair_quad(relation, 4)
    assert rule.nodes.shape == (rule.size, 4)
    assert rule.weights.sum() == pytest.approx(0.25, rel=1e-12)

    # all nodes lie in K-hat x K-hat
    x1, x2, y1, y2 = rule.nodes.T
    for first, second in ((x1, x2), (y1, y2)):
        assert (second >= 0).all() and (second <= first).all() and (first <= 1).all()

    # integral of x1 * y2 over K-hat x K-hat is 1/3 * 1/6
    assert rule.integrate(x1 * y2) == pytest.approx(1 / 18, rel=1e-12)


def test_pair_barycentrics():
    rule = singular_pair_quad(PairRelation.VERTEX, 3)
    bary_x, bary_y = rule.pair_barycentrics()
    numpy.testing.assert_allclose(bary_x.sum(axis=1), 1.0)
    numpy.testing.assert_allclose(bary_y, reference_barycentrics(rule.nodes[:, 2:]))
    with pytest.raises(DomainError):
        triangle_quad(3).pair_barycentrics()


def _inverse_distance(rule, corners_x, corners_y):
    bary_x, bary_y = rule.pair_barycentrics()
    x = bary_x @ corners_x
    y = bary_y @ corners_y
    return rule.integrate(1 / numpy.linalg.norm(x - y, axis=1))


@pytest.mark.parametrize(
    "relation, corners_y",
    [
        (PairRelation.COINCIDENT, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        (PairRelation.EDGE, [[0.0, 0.0], [1.0, 0.0], [0.3, -0.8]]),
        (PairRelation.VERTEX, [[0.0, 0.0], [-1.0, 0.2], [-0.4, -0.9]]),
    ],
)
def test_singular_pair_convergence(relation, corners_y):
    # the regularizing maps make 1/|x - y| smooth, so the rules converge quickly
    corners_x = numpy.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    corners_y = numpy.array(corners_y)
    coarse = _inverse_distance(singular_pair_quad(relation, 7), corners_x, corners_y)
    fine = _inverse_distance(singular_pair_quad(relation, 8), corners_x, corners_y)
    assert coarse > 0
    assert coarse == pytest.approx(fine, rel=1e-6)


def test_singular_unsupported():
    with pytest.raises(UnsupportedRuleError):
        singular_pair_quad(PairRelation.EDGE, 1)
    with pytest.raises(UnsupportedRuleError):
        singular_pair_quad(PairRelation.COINCIDENT, 9)


@pytest.mark.parametrize("a", [1.0, 3.0])
def test_weighted_disk(a):
    rule = weighted_disk_quad(a, 8, 16)
    assert rule.size == 128
    assert rule.weights.sum() == pytest.approx(2 * math.pi * a, rel=1e-12)
    # the weight 1/omega cancels against omega, leaving the area
    assert rule.integrate(rule.omega) == pytest.approx(math.pi * a**2, rel=1e-12)
    radii = numpy.linalg.norm(rule.nodes, axis=1)
    numpy.testing.assert_allclose(rule.omega, numpy.sqrt(a**2 - radii**2), atol=1e-12 * a)


def test_weighted_disk_moments():
    # int_D r^2 / omega = 4 pi / 3 on the unit disk
    rule = weighted_disk_quad(1.0, 10, 8)
    radii2 = (rule.nodes**2).sum(axis=1)
    assert rule.integrate(radii2) == pytest.approx(4 * math.pi / 3, rel=1e-12)


def test_weighted_disk_errors():
    with pytest.raises(DomainError):
        weighted_disk_quad(0.0, 8, 8)
    with pytest.raises(UnsupportedRuleError):
        weighted_disk_quad(1.0, 0, 8)


@pytest.mark.parametrize(
    "center", [PolarPoint(0.0, 0.0), PolarPoint(0.3, 1.0), PolarPoint(0.7, 4.0)]
)
def test_polar_rule(center):
    rule = polar_rule(center, 20, 128)
    # weights are for d rho d phi, so the area element is rho d rho d phi
    assert rule.integrate(rule.distance) == pytest.approx(math.pi, rel=1e-10)
    assert (numpy.linalg.norm(rule.nodes, axis=1) <= 1 + 1e-12).all()
    center_xy = numpy.array(center.cartesian())
    numpy.testing.assert_allclose(
        numpy.linalg.norm(rule.nodes - center_xy, axis=1), rule.distance, atol=1e-12
    )


def test_polar_rule_omega():
    center = PolarPoint(0.3, 1.0)
    rule = polar_rule(center, 20, 128)
    radii2 = (rule.nodes**2).sum(axis=1)
    numpy.testing.assert_allclose(rule.omega, numpy.sqrt(numpy.maximum(1 - radii2, 0)), atol=1e-7)
    # int_D 1/omega = 2 pi, with the rim singularity absorbed by the substitution
    assert rule.integrate(rule.distance / rule.omega) == pytest.approx(2 * math.pi, rel=1e-8)


def test_polar_rule_errors():
    with pytest.raises(DomainError):
        polar_rule(PolarPoint(1.0, 0.0), 8, 8)
    with pytest.raises(UnsupportedRuleError):
        polar_rule(PolarPoint(0.2, 0.0), 0, 8)


def test_quad_rule_dispatch():
    assert quad_rule("triangle", 3) is triangle_quad(3)
    assert quad_rule(RuleKind.PAIR_EDGE, 4) is singular_pair_quad(PairRelation.EDGE, 4)
    assert quad_rule("pair-far", 2).kind is RuleKind.PAIR_FAR
    disk = quad_rule("disk-weighted", 6, a=2.0, n_theta=10)
    assert disk.size == 60 and disk.radius == 2.0
    with pytest.raises(UnsupportedRuleError):
        quad_rule("disk-polar", 4)
    with pytest.raises(ValueError):
        quad_rule("hexagon", 4)
