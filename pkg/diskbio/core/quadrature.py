"""
Quadrature rules: symmetric rules on the reference triangle, Sauter-Schwab rules for
pairs of touching triangles, a tensor rule for far pairs, and two rules on the unit disk.

Pair rules live on :math:`\\hat{K} \\times \\hat{K}` with
:math:`\\hat{K} = \\{0 \\le x_2 \\le x_1 \\le 1\\}`; a point :math:`\\hat{x}` of :math:`\\hat{K}`
corresponds to the barycentric coordinates :math:`(1 - x_1, x_1 - x_2, x_2)`.
The integral over a physical pair is the rule applied to the pulled back integrand
times :math:`(2|T_i|)(2|T_j|)`.
For edge-adjacent pairs the shared edge is :math:`P_0 P_1` of both triangles,
for vertex-adjacent pairs the shared vertex is :math:`P_0`.
"""
import enum
import math
from functools import lru_cache
from typing import Iterator, List, Optional, Tuple, Union

import modepy
import numpy
from numpy.polynomial.legendre import leggauss

from diskbio.core.mesh import PairRelation
from diskbio.core.specfun import PolarPoint
from diskbio.errors import DomainError, UnsupportedRuleError
from diskbio.typing import RealArrayT


class RuleKind(enum.Enum):
    TRIANGLE = "triangle"
    PAIR_COINCIDENT = "pair-coincident"
    PAIR_EDGE = "pair-edge"
    PAIR_VERTEX = "pair-vertex"
    PAIR_FAR = "pair-far"
    DISK_WEIGHTED = "disk-weighted"
    DISK_POLAR = "disk-polar"


_PAIR_RULE_KINDS = {
    PairRelation.COINCIDENT: RuleKind.PAIR_COINCIDENT,
    PairRelation.EDGE: RuleKind.PAIR_EDGE,
    PairRelation.VERTEX: RuleKind.PAIR_VERTEX,
    PairRelation.FAR: RuleKind.PAIR_FAR,
}

TRIANGLE_ORDERS = range(1, 11)
SINGULAR_ORDERS = range(2, 9)


def _read_only(array: numpy.ndarray) -> numpy.ndarray:
    array.setflags(write=False)
    return array


class QuadRule:
    """
    Quadrature nodes and weights.

    ``nodes`` has shape ``(n, d)``: reference triangle points for ``d = 2`` triangle rules,
    :math:`(x_1, x_2, y_1, y_2)` for pair rules, Cartesian points for disk rules.
    Disk rules also carry ``omega`` (:math:`\\sqrt{a^2 - r^2}` computed without cancellation)
    and polar rules carry ``distance``, the distance of each node to the rule's center.
    """

    def __init__(
        self,
        nodes: RealArrayT,
        weights: RealArrayT,
        kind: RuleKind,
        omega: Optional[RealArrayT] = None,
        distance: Optional[RealArrayT] = None,
        radius: Optional[float] = None,
    ):
        self.nodes = _read_only(numpy.asarray(nodes, numpy.float64))
        self.weights = _read_only(numpy.asarray(weights, numpy.float64))
        self.kind = kind
        self.omega = None if omega is None else _read_only(numpy.asarray(omega, numpy.float64))
        self.distance = (
            None if distance is None else _read_only(numpy.asarray(distance, numpy.float64))
        )
        self.radius = radius

    @property
    def size(self) -> int:
        return len(self.weights)

    def integrate(self, values: RealArrayT) -> Union[float, complex]:
        """Sum of ``weights * values``, ``values`` given at the nodes."""
        return numpy.sum(self.weights * numpy.asarray(values)).item()

    def pair_barycentrics(self) -> Tuple[RealArrayT, RealArrayT]:
        """``(n, 3)`` barycentric coordinates of the ``x`` and ``y`` halves of a pair rule."""
        if self.nodes.shape[1] != 4:
            raise DomainError(f"{self.kind.value} is not a pair rule")
        return reference_barycentrics(self.nodes[:, :2]), reference_barycentrics(self.nodes[:, 2:])

    def __repr__(self) -> str:
        return f"QuadRule({self.kind.value}, size={self.size})"


def reference_barycentrics(points: RealArrayT) -> RealArrayT:
    """Barycentric coordinates of points :math:`(x_1, x_2)` of :math:`\\hat{K}`."""
    x1 = points[..., 0]
    x2 = points[..., 1]
    return numpy.stack([1 - x1, x1 - x2, x2], axis=-1)


def gauss_legendre(n: int, lower: float = 0.0, upper: float = 1.0) -> Tuple[RealArrayT, RealArrayT]:
    """The ``n``-point Gauss-Legendre rule on ``[lower, upper]``."""
    nodes, weights = leggauss(n)
    half = (upper - lower) / 2
    return lower + half * (nodes + 1), half * weights


@lru_cache(maxsize=None)
def triangle_quad(order: int) -> QuadRule:
    """
    A fully symmetric rule with positive weights on the reference triangle
    :math:`\\{u, v \\ge 0, u + v \\le 1\\}`, exact for polynomials of degree ``order`` (1 to 10).
    The weights sum to 1/2.
    """
    if order not in TRIANGLE_ORDERS:
        raise UnsupportedRuleError(f"No triangle rule of order {order}")
    rule = modepy.XiaoGimbutasSimplexQuadrature(order, 2)
    # modepy rules live on the bi-unit triangle with vertices (-1, -1), (1, -1), (-1, 1)
    nodes = (numpy.asarray(rule.nodes).T + 1) / 2
    weights = numpy.asarray(rule.weights) / 4
    return QuadRule(nodes, weights, RuleKind.TRIANGLE)


_MapT = Tuple[Tuple[RealArrayT, RealArrayT, RealArrayT, RealArrayT], RealArrayT]


def _coincident_maps(xi, e1, e2, e3) -> Iterator[_MapT]:
    jacobian = xi**3 * e1**2 * e2
    regions = [
        (xi, xi * (1 - e1 + e1 * e2), xi * (1 - e1 * e2 * e3), xi * (1 - e1)),
        (xi, xi * e1 * (1 - e2 + e2 * e3), xi * (1 - e1 * e2), xi * e1 * (1 - e2)),
        (xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), xi, xi * e1 * (1 - e2)),
    ]
    for x1, x2, y1, y2 in regions:
        yield (x1, x2, y1, y2), jacobian
        yield (y1, y2, x1, x2), jacobian


def _edge_maps(xi, e1, e2, e3) -> Iterator[_MapT]:
    yield (xi, xi * e1 * e3, xi * (1 - e1 * e2), xi * e1 * (1 - e2)), xi**3 * e1**2
    jacobian = xi**3 * e1**2 * e2
    yield (xi, xi * e1, xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3)), jacobian
    yield (xi * (1 - e1 * e2), xi * e1 * (1 - e2), xi, xi * e1 * e2 * e3), jacobian
    yield (xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3), xi, xi * e1), jacobian
    yield (xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), xi, xi * e1 * e2), jacobian


def _vertex_maps(xi, e1, e2, e3) -> Iterator[_MapT]:
    jacobian = xi**3 * e2
    yield (xi, xi * e1, xi * e2, xi * e2 * e3), jacobian
    yield (xi * e2, xi * e2 * e3, xi, xi * e1), jacobian


_SINGULAR_MAPS: dict = {
    PairRelation.COINCIDENT: _coincident_maps,
    PairRelation.EDGE: _edge_maps,
    PairRelation.VERTEX: _vertex_maps,
}


@lru_cache(maxsize=None)
def singular_pair_quad(relation: PairRelation, order: int) -> QuadRule:
    """
    The rule for a pair of triangles with the given relation.

    Touching pairs use the Sauter-Schwab regularizing maps from the 4-cube with
    ``order`` Gauss points per direction (2 to 8); their Jacobians cancel the
    :math:`|x - y|^{-1}` singularity.
    Far pairs use the tensor product of two :py:func:`triangle_quad` rules of degree ``order``.
    The weights of every rule sum to 1/4.
    """
    relation = PairRelation(relation)

    if relation is PairRelation.FAR:
        base = triangle_quad(order)
        # (u, v) of the reference triangle is (u + v, v) in K-hat
        points = numpy.stack([base.nodes[:, 0] + base.nodes[:, 1], base.nodes[:, 1]], axis=1)
        n = base.size
        nodes = numpy.concatenate(
            [numpy.repeat(points, n, axis=0), numpy.tile(points, (n, 1))], axis=1
        )
        weights = numpy.outer(base.weights, base.weights).ravel()
        return QuadRule(nodes, weights, RuleKind.PAIR_FAR)

    if order not in SINGULAR_ORDERS:
        raise UnsupportedRuleError(f"No singular pair rule of order {order}")

    points, point_weights = gauss_legendre(order)
    grids = numpy.meshgrid(points, points, points, points, indexing="ij")
    xi, e1, e2, e3 = (grid.ravel() for grid in grids)
    cube_weights = numpy.einsum("i,j,k,l->ijkl", *([point_weights] * 4)).ravel()

    node_blocks: List[RealArrayT] = []
    weight_blocks: List[RealArrayT] = []
    for coords, jacobian in _SINGULAR_MAPS[relation](xi, e1, e2, e3):
        node_blocks.append(numpy.stack(coords, axis=1))
        weight_blocks.append(cube_weights * jacobian)

    return QuadRule(
        numpy.concatenate(node_blocks), numpy.concatenate(weight_blocks), _PAIR_RULE_KINDS[relation]
    )


@lru_cache(maxsize=None)
def weighted_disk_quad(a: float, n_r: int, n_theta: int) -> QuadRule:
    """
    A rule for :math:`\\int_D f(x) / \\omega(x) dx` over the disk of radius ``a``:
    with :math:`r = a \\sin\\varphi` the weight becomes :math:`a \\sin\\varphi \\, d\\varphi d\\theta`,
    integrated by Gauss-Legendre in :math:`\\varphi \\in [0, \\pi/2]` and the periodic
    trapezoidal rule in :math:`\\theta`.
    The weights sum to :math:`2 \\pi a`.
    """
    if not a > 0:
        raise DomainError(f"Disk radius must be positive, got {a}")
    if n_r < 1 or n_theta < 1:
        raise UnsupportedRuleError(f"Invalid disk rule size ({n_r}, {n_theta})")

    phi, phi_weights = gauss_legendre(n_r, 0.0, math.pi / 2)
    theta = 2 * math.pi * numpy.arange(n_theta) / n_theta
    r = a * numpy.sin(phi)

    r_grid, theta_grid = numpy.meshgrid(r, theta, indexing="ij")
    nodes = numpy.stack(
        [(r_grid * numpy.cos(theta_grid)).ravel(), (r_grid * numpy.sin(theta_grid)).ravel()], axis=1
    )
    weights = numpy.repeat(r * phi_weights, n_theta) * (2 * math.pi / n_theta)
    omega = numpy.repeat(a * numpy.cos(phi), n_theta)
    return QuadRule(nodes, weights, RuleKind.DISK_WEIGHTED, omega=omega, radius=a)


def polar_rule(x: PolarPoint, n_rho: int, n_phi: int) -> QuadRule:
    """
    A rule for :math:`\\int_D g(z) / |x - z| dz` over the unit disk
    in polar coordinates :math:`z = x + \\rho e_\\varphi` centred at the interior point ``x``:
    the weights are for :math:`d\\rho d\\varphi`, so the integrand is :math:`g` itself.

    With the exit distance :math:`\\rho_+(\\varphi)`, the substitution
    :math:`\\rho = \\rho_+ (1 - u^2)` resolves the square root behaviour of
    :math:`\\omega(z)` at the rim.
    """
    if not x.r < 1:
        raise DomainError("The polar rule needs an interior center")
    if n_rho < 1 or n_phi < 1:
        raise UnsupportedRuleError(f"Invalid polar rule size ({n_rho}, {n_phi})")

    center = numpy.array(x.cartesian())
    omega2 = (1 - x.r) * (1 + x.r)
    phi = 2 * math.pi * (numpy.arange(n_phi) + 0.5) / n_phi
    directions = numpy.stack([numpy.cos(phi), numpy.sin(phi)], axis=1)
    projection = directions @ center
    discriminant = numpy.sqrt(projection**2 + omega2)
    rho_max = omega2 / (projection + discriminant)
    rho_min = -projection - discriminant

    u, u_weights = gauss_legendre(n_rho)
    rho = rho_max[:, None] * (1 - u**2)[None, :]
    weights = (2 * math.pi / n_phi) * 2 * rho_max[:, None] * (u * u_weights)[None, :]
    # 1 - |z|^2 = (rho_max - rho)(rho - rho_min)
    omega = numpy.sqrt(rho_max)[:, None] * u[None, :] * numpy.sqrt(rho - rho_min[:, None])
    nodes = center + rho[..., None] * directions[:, None, :]

    return QuadRule(
        nodes.reshape(-1, 2),
        weights.ravel(),
        RuleKind.DISK_POLAR,
        omega=omega.ravel(),
        distance=rho.ravel(),
        radius=1.0,
    )


def quad_rule(kind: Union[RuleKind, str], order: int, **params) -> QuadRule:
    """
    A rule by kind: ``order`` is the degree for triangle and far pair rules,
    the number of Gauss points per direction for touching pairs,
    and ``n_r`` for weighted disk rules (with ``n_theta`` and ``a`` passed as keywords).
    """
    kind = RuleKind(kind)
    if kind is RuleKind.TRIANGLE:
        return triangle_quad(order)
    for relation, rule_kind in _PAIR_RULE_KINDS.items():
        if kind is rule_kind:
            return singular_pair_quad(relation, order)
    if kind is RuleKind.DISK_WEIGHTED:
        return weighted_disk_quad(params.get("a", 1.0), order, params.get("n_theta", 2 * order))
    raise UnsupportedRuleError(f"Rules of kind {kind.value} are built with polar_rule()")
