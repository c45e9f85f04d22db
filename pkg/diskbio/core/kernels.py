"""
Kernels of the four boundary integral operators on the disk of radius ``a``:

* ``V``: the single layer operator, :math:`\\frac{1}{4\\pi |x - y|}`;
* ``W``: the hypersingular operator, with the finite-part kernel :math:`\\frac{1}{4\\pi |x - y|^3}`;
* ``Vbar``: the modified single layer operator,
  :math:`\\frac{2}{\\pi^2} \\frac{S_a(x, y)}{|x - y|}`;
* ``Wbar``: the modified hypersingular operator,
  :math:`\\frac{2}{\\pi^2} \\left[ \\frac{a}{|x - y|^2 \\omega_x \\omega_y} + \\frac{S_a(x, y)}{|x - y|^3} \\right]`,

where :math:`S_a(x, y) = \\arctan \\frac{\\omega_x \\omega_y}{a |x - y|}`
and :math:`\\omega = \\sqrt{a^2 - r^2}`.
``V`` and ``Wbar`` are diagonal on even PSH modes, ``W`` and ``Vbar`` on odd ones.
"""
import enum
import logging
import math
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy
from scipy.integrate import quad

from diskbio.core.specfun import (
    PolarPoint,
    _check_disk,
    _poisson_from_gap,
    lambda_table,
    psh_table,
)
from diskbio.errors import (
    AccuracyError,
    BoundarySingularityError,
    ConfigError,
    DomainError,
    SingularityError,
)
from diskbio.tools import Dispatcher, Record, extrapolate
from diskbio.typing import RealArrayT


logger = logging.getLogger(__name__)


class OperatorKind(enum.Enum):
    V = "V"
    W = "W"
    Vbar = "Vbar"
    Wbar = "Wbar"

    @classmethod
    def parse(cls, name: "OperatorKindLikeT") -> "OperatorKind":
        if isinstance(name, cls):
            return name
        for kind in cls:
            if kind.value.lower() == str(name).lower():
                return kind
        raise DomainError(f"Unknown operator: {name!r}")

    @property
    def parity(self) -> str:
        """Parity of the PSH modes the operator is diagonal on."""
        return "even" if self in (OperatorKind.V, OperatorKind.Wbar) else "odd"

    @property
    def is_modified(self) -> bool:
        return self in (OperatorKind.Vbar, OperatorKind.Wbar)


OperatorKindLikeT = Union[OperatorKind, str]


class KernelConfig(Record):
    """
    Kernel parameters.

    ``a``: the disk radius;
    ``coincident_tol``: distance below which two points are treated as coincident
    (``1e-12 * a`` if ``None``);
    ``series_terms``: the default truncation degree of :py:func:`kernel_series`;
    ``abel_rho``: the default Abel factor of :py:func:`kernel_series` (1 means raw truncation);
    ``abel_nodes``: the Abel factors extrapolated to 1 in :py:func:`kernel_series_extrapolated`.
    """

    defaults = dict(
        a=1.0,
        coincident_tol=None,
        series_terms=200,
        abel_rho=1.0,
        abel_nodes=(0.7, 0.75, 0.8, 0.85, 0.9, 0.95),
    )

    def check(self) -> None:
        if not self.a > 0:
            raise ConfigError(f"Disk radius must be positive, got {self.a}")
        if self.coincident_tol is not None and not self.coincident_tol >= 0:
            raise ConfigError(f"coincident_tol must be non-negative, got {self.coincident_tol}")
        if not 0 <= self.series_terms <= 10**4:
            raise ConfigError(f"series_terms must lie in [0, 10^4], got {self.series_terms}")
        if not 0 < self.abel_rho <= 1:
            raise ConfigError(f"abel_rho must lie in (0, 1], got {self.abel_rho}")
        if len(self.abel_nodes) < 2 or not all(0 < rho < 1 for rho in self.abel_nodes):
            raise ConfigError("abel_nodes must contain at least two factors in (0, 1)")

    def tolerance(self) -> float:
        return 1e-12 * self.a if self.coincident_tol is None else self.coincident_tol


def _omega_cartesian(a: float, points: RealArrayT) -> RealArrayT:
    r2 = numpy.sum(points * points, axis=-1)
    return numpy.sqrt(numpy.clip(a * a - r2, 0, None))


def s_fun_values(
    a: float, x: RealArrayT, y: RealArrayT, tol: Optional[float] = None
) -> RealArrayT:
    """
    Vectorized :py:func:`s_fun` for Cartesian points of shape ``(..., 2)``.
    """
    x = numpy.asarray(x, numpy.float64)
    y = numpy.asarray(y, numpy.float64)
    tol = 1e-12 * a if tol is None else tol
    d = numpy.linalg.norm(x - y, axis=-1)
    product = _omega_cartesian(a, x) * _omega_cartesian(a, y)
    values = numpy.arctan2(product, a * d)
    return numpy.where((d <= tol) & (product > 0), math.pi / 2, values)


def s_fun(a: float, x: PolarPoint, y: PolarPoint, tol: Optional[float] = None) -> float:
    """
    :math:`S_a(x, y) = \\arctan \\frac{\\omega_x \\omega_y}{a |x - y|} \\in [0, \\pi/2]`.

    Equals :math:`\\pi/2` for coincident interior points and 0 if either point is on the rim.
    """
    if not a > 0:
        raise DomainError(f"Disk radius must be positive, got {a}")
    _check_disk(numpy.array([x.r, y.r]), a)
    return float(
        s_fun_values(a, numpy.array(x.cartesian()), numpy.array(y.cartesian()), tol=tol)
    )


class _KernelFormulas:
    """
    Kernel values from the distance ``d`` and the weights ``wx``, ``wy`` (the :math:`\\omega`'s).
    """

    @staticmethod
    def handle_V(a: float, d: RealArrayT, wx: RealArrayT, wy: RealArrayT) -> RealArrayT:
        return 1 / (4 * math.pi * d)

    @staticmethod
    def handle_W(a: float, d: RealArrayT, wx: RealArrayT, wy: RealArrayT) -> RealArrayT:
        return 1 / (4 * math.pi * d**3)

    @staticmethod
    def handle_Vbar(a: float, d: RealArrayT, wx: RealArrayT, wy: RealArrayT) -> RealArrayT:
        return (2 / math.pi**2) * numpy.arctan2(wx * wy, a * d) / d

    @staticmethod
    def handle_Wbar(a: float, d: RealArrayT, wx: RealArrayT, wy: RealArrayT) -> RealArrayT:
        product = wx * wy
        return (2 / math.pi**2) * (a / (d**2 * product) + numpy.arctan2(product, a * d) / d**3)


_kernel_formula = Dispatcher(OperatorKind, _KernelFormulas)


def kernel_values(kind: OperatorKind, a: float, x: RealArrayT, y: RealArrayT) -> RealArrayT:
    """
    Kernel values for matching (broadcastable) arrays of Cartesian points of shape ``(..., 2)``.
    No singularity checks are performed.
    """
    x = numpy.asarray(x, numpy.float64)
    y = numpy.asarray(y, numpy.float64)
    d = numpy.linalg.norm(x - y, axis=-1)
    return _kernel_formula(
        OperatorKind.parse(kind), a, d, _omega_cartesian(a, x), _omega_cartesian(a, y)
    )


def masked_kernel_values(
    kind: OperatorKind, a: float, x: RealArrayT, y: RealArrayT, tol: float
) -> RealArrayT:
    """
    Kernel values with the coincident pairs (distance at most ``tol``) set to zero.
    """
    x = numpy.asarray(x, numpy.float64)
    y = numpy.asarray(y, numpy.float64)
    d = numpy.linalg.norm(x - y, axis=-1)
    coincident = d <= tol
    safe_d = numpy.where(coincident, 1.0, d)
    values = _kernel_formula(kind, a, safe_d, _omega_cartesian(a, x), _omega_cartesian(a, y))
    return numpy.where(coincident, 0.0, values)


def kernel_eval(
    kind: OperatorKind, x: PolarPoint, y: PolarPoint, config: Optional[KernelConfig] = None
) -> float:
    """
    The kernel of the operator ``kind`` at a pair of points of the disk.

    Raises :py:class:`~diskbio.errors.SingularityError` if the points coincide
    (within ``config.coincident_tol``), and :py:class:`~diskbio.errors.BoundarySingularityError`
    for ``Wbar`` when either point is on the rim.
    """
    kind = OperatorKind.parse(kind)
    config = KernelConfig() if config is None else config
    a = config.a
    _check_disk(numpy.array([x.r, y.r]), a)
    if x.distance(y) <= config.tolerance():
        raise SingularityError(f"The {kind.value} kernel is singular at coincident points")
    if kind is OperatorKind.Wbar and max(x.r, y.r) >= a:
        raise BoundarySingularityError("The Wbar kernel is singular on the rim")
    return float(
        kernel_values(kind, a, numpy.array(x.cartesian()), numpy.array(y.cartesian()))
    )


def _series_terms(kind: OperatorKind, x: PolarPoint, y: PolarPoint, terms: int) -> RealArrayT:
    """
    Per-degree terms of the PSH expansion of the kernel at ``a = 1``:
    :math:`c_l^m (y_l^m(x) \\overline{y_l^m(y)} + \\overline{y_l^m(x)} y_l^m(y))`
    summed over the modes of the operator's parity with degree ``l``,
    with :math:`c = \\lambda/4, 1/\\lambda, \\lambda, 4/\\lambda` for ``V, W, Vbar, Wbar``
    and the ``W`` and ``Wbar`` terms divided by :math:`\\omega_x \\omega_y`.
    """
    wx = x.omega()
    wy = y.omega()
    table_x = psh_table(terms, x.r, x.theta)
    table_y = psh_table(terms, y.r, y.theta)
    lambdas = lambda_table(terms)

    l = numpy.arange(terms + 1)[:, None]
    m = numpy.arange(terms + 1)[None, :]
    valid = m <= l
    parity = 0 if kind.parity == "even" else 1
    selected = valid & ((l + m) % 2 == parity)

    safe_lambdas = numpy.where(valid, lambdas, 1.0)
    coefficients = {
        OperatorKind.V: safe_lambdas / 4,
        OperatorKind.W: 1 / safe_lambdas,
        OperatorKind.Vbar: safe_lambdas,
        OperatorKind.Wbar: 4 / safe_lambdas,
    }[kind]

    # Each m > 0 stands for the pair of orders +-m
    multiplicity = numpy.where(m == 0, 2.0, 4.0)
    products = coefficients * multiplicity * (table_x * numpy.conj(table_y)).real
    terms_by_degree = numpy.where(selected, products, 0.0).sum(axis=1)

    if kind in (OperatorKind.W, OperatorKind.Wbar):
        terms_by_degree = terms_by_degree / (wx * wy)
    return terms_by_degree


def _check_series_points(kind: OperatorKind, x: PolarPoint, y: PolarPoint) -> None:
    if max(x.r, y.r) >= 1:
        raise DomainError("Kernel series are evaluated at interior points of the unit disk")
    if x.distance(y) == 0:
        raise SingularityError("Kernel series diverge at coincident points")


def kernel_series(
    kind: OperatorKind,
    x: PolarPoint,
    y: PolarPoint,
    terms: Optional[int] = None,
    abel_rho: Optional[float] = None,
    config: Optional[KernelConfig] = None,
) -> float:
    """
    The PSH expansion of the kernel on the unit disk truncated at degree ``terms``,
    with the degree-``l`` terms damped by ``abel_rho ** l``.
    Parameters left as ``None`` are taken from ``config``.
    Converges to :py:func:`kernel_eval` slowly; see :py:func:`kernel_series_extrapolated`.
    """
    kind = OperatorKind.parse(kind)
    config = KernelConfig() if config is None else config
    terms = config.series_terms if terms is None else terms
    abel_rho = config.abel_rho if abel_rho is None else abel_rho
    _check_series_points(kind, x, y)
    if not 0 < abel_rho <= 1:
        raise DomainError(f"Abel factor must lie in (0, 1], got {abel_rho}")
    degree_terms = _series_terms(kind, x, y, terms)
    return float(numpy.sum(abel_rho ** numpy.arange(terms + 1) * degree_terms))


def kernel_series_extrapolated(
    kind: OperatorKind,
    x: PolarPoint,
    y: PolarPoint,
    terms: Optional[int] = None,
    abel_nodes: Optional[Sequence[float]] = None,
    config: Optional[KernelConfig] = None,
) -> float:
    """
    Abel-summed kernel series evaluated at several factors and polynomially extrapolated to 1.
    """
    kind = OperatorKind.parse(kind)
    config = KernelConfig() if config is None else config
    terms = config.series_terms if terms is None else terms
    abel_nodes = config.abel_nodes if abel_nodes is None else abel_nodes
    _check_series_points(kind, x, y)
    degree_terms = _series_terms(kind, x, y, terms)
    powers = numpy.arange(terms + 1)
    sums = [float(numpy.sum(rho**powers * degree_terms)) for rho in abel_nodes]
    return extrapolate(abel_nodes, sums, 1.0)


def _abel_radii(x: PolarPoint, y: PolarPoint, radius: float = 1.0) -> Tuple[float, float]:
    if max(x.r, y.r) >= radius:
        raise DomainError(f"Points must lie in the open disk of radius {radius}")
    if x.distance(y) == 0:
        raise SingularityError("The representation is singular at coincident points")
    return max(x.r, y.r), min(x.r, y.r)


# Beyond this the integrand is below e^-300 relative to its scale
_MAX_HYPERBOLIC_ARGUMENT = 300.0


def _abel_integrand(x: PolarPoint, y: PolarPoint, radius: float = 1.0) -> Callable[[float], float]:
    """
    The integrand of :math:`\\int_R^\\cdot p(r_x r_y / s^2, \\Delta\\theta)
    (s^2 - r_x^2)^{-1/2} (s^2 - r_y^2)^{-1/2} ds` after the substitution
    :math:`s = R \\cosh u` with :math:`R = \\max(r_x, r_y)`.
    """
    big, small = _abel_radii(x, y, radius)
    product = x.r * y.r
    delta = x.theta - y.theta

    def integrand(u: float) -> float:
        if u > _MAX_HYPERBOLIC_ARGUMENT:
            return 0.0
        s2 = (big * math.cosh(u)) ** 2
        # s^2 - r_x r_y split into non-negative parts
        gap = ((big * math.sinh(u)) ** 2 + big * (big - small)) / s2
        rho = product / s2
        return float(_poisson_from_gap(gap, rho, delta)) / math.sqrt(s2 - small * small)

    return integrand


def _checked_quad(integrand, lower: float, upper: float) -> float:
    value, error = quad(integrand, lower, upper, epsabs=1e-14, epsrel=1e-12, limit=500)
    if error > 1e-8 * max(abs(value), 1e-300):
        raise AccuracyError(f"Quadrature error estimate {error} too large for value {value}")
    return value


def li_rong_alpha1(x: PolarPoint, y: PolarPoint) -> float:
    """
    The one-dimensional integral representation

    .. math::

        \\frac{1}{\\pi} \\int_{\\max(r_x, r_y)}^\\infty
            \\frac{p(r_x r_y / s^2, \\theta_x - \\theta_y)}{\\sqrt{s^2 - r_x^2} \\sqrt{s^2 - r_y^2}} ds,

    which equals :math:`\\frac{1}{4 \\pi |x - y|}` for distinct points of the open unit disk.
    The integrable endpoint singularity is removed by a hyperbolic substitution.
    """
    return _checked_quad(_abel_integrand(x, y), 0.0, math.inf) / math.pi


def primitive_integral_vbar(a: float, x: PolarPoint, y: PolarPoint) -> float:
    """
    The truncated representation integral
    :math:`\\int_{\\max(r_x, r_y)}^a (\\ldots) ds` of :py:func:`li_rong_alpha1`.
    """
    big, _ = _abel_radii(x, y, a)
    return _checked_quad(_abel_integrand(x, y, a), 0.0, math.acosh(a / big))


def primitive_check_vbar(a: float, x: PolarPoint, y: PolarPoint) -> float:
    """
    The residual :math:`\\int_R^a (\\ldots) ds - \\frac{1}{2\\pi} \\frac{S_a(x, y)}{|x - y|}`,
    which vanishes for distinct points of the open disk of radius ``a``.
    """
    integral = primitive_integral_vbar(a, x, y)
    return integral - s_fun(a, x, y) / (2 * math.pi * x.distance(y))
