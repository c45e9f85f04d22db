"""
Special functions on the unit disk:
the eigenvalue factors :math:`\\lambda_l^m`, associated Legendre functions,
projected spherical harmonics (PSHs), the Poisson kernel of the unit circle
and the kinetic moments :math:`L_\\pm`.

A PSH is a spherical harmonic on the upper unit hemisphere viewed from above:
for a point :math:`x = (r, \\theta)` of the disk with :math:`\\omega = \\sqrt{1 - r^2}`,
:math:`y_l^m(x) = \\bar{P}_l^m(\\omega) e^{i m \\theta}`,
where :math:`\\bar{P}_l^m` is the orthonormal associated Legendre function with
the Condon-Shortley phase.
The mode is even when :math:`l + m` is even; even PSHs are polynomials in ``x``,
odd ones are :math:`\\omega` times a polynomial.
"""
import math
from functools import lru_cache
from typing import Callable, Iterator, Optional, Tuple, Union

import numpy
from numpy.typing import ArrayLike
from scipy.special import gammaln

from diskbio.errors import (
    BoundarySingularityError,
    DomainError,
    ExcludedModeError,
    StepTooLargeError,
)
from diskbio.typing import ComplexArrayT, RealArrayT


class ModeIndex:
    """
    The PSH index pair ``(l, m)`` with ``|m| <= l``.
    Unpacks as a tuple: ``l, m = mode``.
    """

    __slots__ = ("l", "m")

    def __init__(self, l: int, m: int):
        if int(l) != l or int(m) != m:
            raise DomainError(f"Mode indices must be integers, got ({l}, {m})")
        if l < 0 or abs(m) > l:
            raise DomainError(f"Invalid mode (l={l}, m={m}): need 0 <= |m| <= l")
        self.l = int(l)
        self.m = int(m)

    @classmethod
    def coerce(cls, mode: "ModeLikeT") -> "ModeIndex":
        if isinstance(mode, ModeIndex):
            return mode
        l, m = mode
        return cls(l, m)

    @classmethod
    def all_modes(cls, l_max: int, parity: Optional[str] = None) -> Iterator["ModeIndex"]:
        """
        All modes with ``l <= l_max`` ordered by ``l``, then ``m``;
        ``parity`` (``"even"`` or ``"odd"``) restricts the parity of ``l + m``.
        """
        if parity not in (None, "even", "odd"):
            raise DomainError(f"Unknown parity: {parity!r}")
        for l in range(l_max + 1):
            for m in range(-l, l + 1):
                mode = cls(l, m)
                if parity is None or mode.parity == parity:
                    yield mode

    @property
    def is_even(self) -> bool:
        return (self.l + self.m) % 2 == 0

    @property
    def parity(self) -> str:
        return "even" if self.is_even else "odd"

    def conj(self) -> "ModeIndex":
        return ModeIndex(self.l, -self.m)

    def __iter__(self) -> Iterator[int]:
        return iter((self.l, self.m))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ModeIndex):
            return (self.l, self.m) == (other.l, other.m)
        if isinstance(other, tuple):
            return (self.l, self.m) == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.l, self.m))

    def __repr__(self) -> str:
        return f"ModeIndex({self.l}, {self.m})"


ModeLikeT = Union[ModeIndex, Tuple[int, int]]


class PolarPoint:
    """
    A point of the plane in polar coordinates; the angle is normalized to ``[0, 2 pi)``.
    """

    __slots__ = ("r", "theta")

    def __init__(self, r: float, theta: float):
        if not r >= 0:
            raise DomainError(f"Polar radius must be non-negative, got {r}")
        self.r = float(r)
        self.theta = float(theta) % (2 * math.pi)

    @classmethod
    def from_cartesian(cls, x: float, y: float) -> "PolarPoint":
        return cls(math.hypot(x, y), math.atan2(y, x))

    def cartesian(self) -> Tuple[float, float]:
        return (self.r * math.cos(self.theta), self.r * math.sin(self.theta))

    def omega(self, a: float = 1.0) -> float:
        """``sqrt(a^2 - r^2)``, clamped to zero on and outside the rim."""
        return math.sqrt(max((a - self.r) * (a + self.r), 0.0))

    def distance(self, other: "PolarPoint") -> float:
        x1, y1 = self.cartesian()
        x2, y2 = other.cartesian()
        return math.hypot(x1 - x2, y1 - y2)

    def __repr__(self) -> str:
        return f"PolarPoint({self.r!r}, {self.theta!r})"


def _check_disk(r: RealArrayT, a: float = 1.0) -> None:
    if numpy.any(r < 0) or numpy.any(r > a * (1 + 1e-12)):
        raise DomainError(f"Points must lie in the closed disk of radius {a}")


def _omega_of(r: RealArrayT) -> RealArrayT:
    return numpy.sqrt(numpy.clip((1 - r) * (1 + r), 0, None))


# Table of f(p) covers all p = l +- m for l up to 10^4
_RATIO_TABLE_SIZE = 2 * 10**4 + 2


@lru_cache(maxsize=None)
def _half_gamma_ratios() -> RealArrayT:
    """
    ``f(p) = Gamma((p + 1) / 2) / Gamma((p + 2) / 2)``,
    built from ``f(0) = sqrt(pi)``, ``f(1) = 2 / sqrt(pi)`` and ``f(p) = f(p - 2) (p - 1) / p``.
    """
    p = numpy.arange(_RATIO_TABLE_SIZE, dtype=numpy.float64)
    factors = numpy.ones(_RATIO_TABLE_SIZE)
    factors[2:] = (p[2:] - 1) / p[2:]
    table = numpy.empty(_RATIO_TABLE_SIZE)
    table[0::2] = math.sqrt(math.pi) * numpy.cumprod(factors[0::2])
    table[1::2] = (2 / math.sqrt(math.pi)) * numpy.cumprod(factors[1::2])
    table.setflags(write=False)
    return table


def _half_gamma_ratio(p: int) -> float:
    table = _half_gamma_ratios()
    if p < len(table):
        return float(table[p])
    return math.exp(gammaln((p + 1) / 2) - gammaln((p + 2) / 2))


def lambda_lm(mode: ModeLikeT) -> float:
    """
    Returns :math:`\\lambda_l^m = f(l + m) f(l - m)`, where
    :math:`f(p) = \\Gamma((p + 1) / 2) / \\Gamma((p + 2) / 2)`.

    ``lambda_lm((0, 0)) == pi``, ``lambda_lm((1, 1)) == pi / 2``.
    Symmetric in ``m``; :math:`\\lambda_l^m \\sim 2 / l` for large ``l``.
    """
    l, m = ModeIndex.coerce(mode)
    return _half_gamma_ratio(l + m) * _half_gamma_ratio(l - m)


def lambda_table(l_max: int) -> RealArrayT:
    """
    An ``(l_max + 1, l_max + 1)`` array with :math:`\\lambda_l^m` at ``[l, m]`` for ``0 <= m <= l``
    and zeros above the diagonal.
    """
    l = numpy.arange(l_max + 1)[:, None]
    m = numpy.arange(l_max + 1)[None, :]
    valid = m <= l
    ratios = _half_gamma_ratios()
    if 2 * l_max >= len(ratios):
        p = numpy.arange(2 * l_max + 1)
        ratios = numpy.exp(gammaln((p + 1) / 2) - gammaln((p + 2) / 2))
    plus = numpy.where(valid, l + m, 0)
    minus = numpy.where(valid, l - m, 0)
    return numpy.where(valid, ratios[plus] * ratios[minus], 0.0)


def lambda_recursion_residual(mode: ModeLikeT) -> float:
    """
    The residual of the identity

    .. math::

        \\frac{4}{\\lambda_l^m} = \\frac{1}{2} \\left[
            (l + m)(l - m + 1) \\lambda_l^{m - 1} + (l - m)(l + m + 1) \\lambda_l^{m + 1}
        \\right].

    At ``|m| = l`` the vanishing coefficient times the out-of-range :math:`\\lambda` term
    is replaced by its limit.
    Raises :py:class:`~diskbio.errors.ExcludedModeError` for ``(0, 0)``.
    """
    mode = ModeIndex.coerce(mode)
    l, m = mode
    if l == 0:
        raise ExcludedModeError("The Gamma recursion is not defined for the mode (0, 0)")
    p, q = l + m, l - m
    f = _half_gamma_ratio

    if m - 1 >= -l:
        lower = p * (q + 1) * lambda_lm(ModeIndex(l, m - 1))
    else:
        # p f(p - 1) = 2 / f(p) at p = 0
        lower = 2 * (q + 1) * f(q + 1) / f(p)

    if m + 1 <= l:
        upper = q * (p + 1) * lambda_lm(ModeIndex(l, m + 1))
    else:
        upper = 2 * (p + 1) * f(p + 1) / f(q)

    return 4 / lambda_lm(mode) - (lower + upper) / 2


def legendre_table(l_max: int, t: ArrayLike, s: ArrayLike) -> RealArrayT:
    """
    Orthonormal associated Legendre functions with the Condon-Shortley phase
    for all ``0 <= m <= l <= l_max``, as an array of shape ``(l_max + 1, l_max + 1) + shape``
    with :math:`\\bar{P}_l^m` at ``[l, m]`` and zeros above the diagonal.

    ``t`` is the argument and ``s`` stands for :math:`\\sqrt{1 - t^2}`;
    passing ``s = 1`` gives the functions divided by :math:`(1 - t^2)^{m/2}`.
    """
    t = numpy.asarray(t, numpy.float64)
    s = numpy.asarray(s, numpy.float64)
    shape = numpy.broadcast(t, s).shape
    table = numpy.zeros((l_max + 1, l_max + 1) + shape)
    diagonal = numpy.full(shape, 1 / math.sqrt(4 * math.pi))
    for m in range(l_max + 1):
        if m > 0:
            diagonal = -math.sqrt((2 * m + 1) / (2 * m)) * s * diagonal
        table[m:, m] = _legendre_column(l_max, m, t, diagonal)
    return table


def _legendre_column(l_max: int, m: int, t: RealArrayT, diagonal: RealArrayT) -> RealArrayT:
    """
    :math:`\\bar{P}_l^m` for ``l = m .. l_max`` by the three-term recurrence in ``l``,
    starting from the diagonal value :math:`\\bar{P}_m^m`.
    """
    column = numpy.empty((l_max - m + 1,) + diagonal.shape)
    column[0] = diagonal
    if l_max > m:
        column[1] = math.sqrt(2 * m + 3) * t * diagonal
    for l in range(m + 2, l_max + 1):
        a = math.sqrt((4 * l * l - 1) / (l * l - m * m))
        b = math.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
        column[l - m] = a * (t * column[l - m - 1] - b * column[l - m - 2])
    return column


def _normalized_legendre(l: int, m: int, t: RealArrayT, s: RealArrayT) -> RealArrayT:
    """:math:`\\bar{P}_l^m` for ``0 <= m <= l``."""
    shape = numpy.broadcast(t, s).shape
    diagonal = numpy.full(shape, 1 / math.sqrt(4 * math.pi))
    for k in range(1, m + 1):
        diagonal = -math.sqrt((2 * k + 1) / (2 * k)) * s * diagonal
    return _legendre_column(l, m, t, diagonal)[-1]


def assoc_legendre(l: int, m: int, t: ArrayLike) -> Union[float, RealArrayT]:
    """
    The (unnormalized) associated Legendre function :math:`P_l^m(t)`
    with the Condon-Shortley phase, ``|t| <= 1``, ``|m| <= l``.

    ``assoc_legendre(2, 1, 0.6) == -1.44``.
    """
    if l < 0 or abs(m) > l:
        raise DomainError(f"Invalid degree and order (l={l}, m={m})")
    t_arr = numpy.asarray(t, numpy.float64)
    if numpy.any(numpy.abs(t_arr) > 1):
        raise DomainError("Legendre functions are only defined for |t| <= 1")

    m_abs = abs(m)
    s = numpy.sqrt(numpy.clip((1 - t_arr) * (1 + t_arr), 0, None))
    log_ratio = gammaln(l - m_abs + 1) - gammaln(l + m_abs + 1)
    norm = math.exp(0.5 * (math.log((2 * l + 1) / (4 * math.pi)) + log_ratio))
    values = _normalized_legendre(l, m_abs, t_arr, s) / norm
    if m < 0:
        values = (-1) ** m_abs * math.exp(log_ratio) * values

    return float(values) if values.ndim == 0 else values


def psh_values(
    mode: ModeLikeT, r: ArrayLike, theta: ArrayLike, omega: Optional[ArrayLike] = None
) -> ComplexArrayT:
    """
    Vectorized :py:func:`psh`.
    ``omega`` can be passed explicitly to keep full accuracy near the rim.
    """
    l, m = ModeIndex.coerce(mode)
    r = numpy.asarray(r, numpy.float64)
    theta = numpy.asarray(theta, numpy.float64)
    _check_disk(r)
    omega = _omega_of(r) if omega is None else numpy.asarray(omega, numpy.float64)

    m_abs = abs(m)
    values = _normalized_legendre(l, m_abs, omega, r) * numpy.exp(1j * m_abs * theta)
    if m < 0:
        values = (-1) ** m_abs * numpy.conj(values)
    return values


def psh(mode: ModeLikeT, x: PolarPoint) -> complex:
    """
    The projected spherical harmonic :math:`y_l^m(x)`.
    For ``m < 0``, :math:`y_l^{-m} = (-1)^m \\overline{y_l^m}`.

    ``psh((0, 0), x) == 1 / sqrt(4 pi)``; ``psh((1, 1), x) == -sqrt(3 / (8 pi)) r e^{i theta}``.
    """
    return complex(psh_values(mode, x.r, x.theta))


def psh_table(
    l_max: int, r: ArrayLike, theta: ArrayLike, omega: Optional[ArrayLike] = None
) -> ComplexArrayT:
    """
    :math:`y_l^m` for all ``0 <= m <= l <= l_max`` at once, with the same layout
    as :py:func:`legendre_table`; negative orders follow from :math:`y_l^{-m} = (-1)^m \\overline{y_l^m}`.
    """
    r = numpy.asarray(r, numpy.float64)
    theta = numpy.asarray(theta, numpy.float64)
    _check_disk(r)
    omega = _omega_of(r) if omega is None else numpy.asarray(omega, numpy.float64)
    table = legendre_table(l_max, omega, r)
    m = numpy.arange(l_max + 1).reshape((1, l_max + 1) + (1,) * theta.ndim)
    return table * numpy.exp(1j * m * theta)


def psh_reduced(mode: ModeLikeT) -> Callable[[ArrayLike], RealArrayT]:
    """
    The radial profile of :math:`y_l^m` divided by :math:`r^{|m|}`, as a function of :math:`\\omega`;
    for ``m < 0`` it carries the sign :math:`(-1)^m`.
    """
    l, m = ModeIndex.coerce(mode)
    m_abs = abs(m)
    sign = (-1) ** m_abs if m < 0 else 1

    def profile(omega: ArrayLike) -> RealArrayT:
        omega = numpy.asarray(omega, numpy.float64)
        return sign * _normalized_legendre(l, m_abs, omega, numpy.ones_like(omega))

    return profile


def _poisson(rho: ArrayLike, theta: ArrayLike) -> RealArrayT:
    rho = numpy.asarray(rho, numpy.float64)
    return _poisson_from_gap(1 - rho, rho, theta)


def _poisson_from_gap(gap: ArrayLike, rho: ArrayLike, theta: ArrayLike) -> RealArrayT:
    """
    The Poisson kernel given ``gap = 1 - rho`` computed separately,
    which keeps the relative accuracy for ``rho`` close to 1.
    """
    gap = numpy.asarray(gap, numpy.float64)
    half_sine = numpy.sin(numpy.asarray(theta, numpy.float64) / 2)
    denominator = gap**2 + 4 * rho * half_sine**2
    return gap * (1 + rho) / (2 * math.pi * denominator)


def poisson_kernel(rho: ArrayLike, theta: ArrayLike) -> Union[float, RealArrayT]:
    """
    :math:`p(\\rho, \\theta) = \\frac{1 - \\rho^2}{2 \\pi (1 + \\rho^2 - 2 \\rho \\cos\\theta)}`
    for ``|rho| < 1``.
    """
    rho_arr = numpy.asarray(rho, numpy.float64)
    if numpy.any(numpy.abs(rho_arr) >= 1):
        raise DomainError("The Poisson kernel requires |rho| < 1")
    values = _poisson(rho_arr, theta)
    return float(values) if values.ndim == 0 else values


def poisson_kernel_series(rho: float, theta: float, terms: int) -> float:
    """
    The truncated Fourier series :math:`\\frac{1}{2\\pi} \\sum_{|n| \\le N} \\rho^{|n|} e^{i n \\theta}`.
    """
    if abs(rho) >= 1:
        raise DomainError("The Poisson series requires |rho| < 1")
    n = numpy.arange(1, terms + 1)
    return float((1 + 2 * numpy.sum(rho**n * numpy.cos(n * theta))) / (2 * math.pi))


def _as_sign(sign: Union[int, str]) -> int:
    if sign in (1, "+"):
        return 1
    if sign in (-1, "-"):
        return -1
    raise DomainError(f"Kinetic moment sign must be +1 or -1, got {sign!r}")


def ladder(mode: ModeLikeT, sign: Union[int, str]) -> Tuple[float, Optional[ModeIndex]]:
    """
    The coefficient and the target mode of :math:`L_\\pm y_l^m`:
    ``(sqrt((l -+ m)(l +- m + 1)), (l, m +- 1))``, or ``(0, None)`` if the target is out of range.
    """
    l, m = ModeIndex.coerce(mode)
    sign = _as_sign(sign)
    target = m + sign
    if abs(target) > l:
        return 0.0, None
    return math.sqrt((l - sign * m) * (l + sign * m + 1)), ModeIndex(l, target)


def kinetic_psh_values(
    mode: ModeLikeT,
    sign: Union[int, str],
    r: ArrayLike,
    theta: ArrayLike,
    omega: Optional[ArrayLike] = None,
) -> ComplexArrayT:
    """
    Vectorized :py:func:`kinetic_psh`.
    """
    r = numpy.asarray(r, numpy.float64)
    if numpy.any(r >= 1):
        raise BoundarySingularityError("Kinetic moments of PSHs are singular on the rim")
    coefficient, target = ladder(mode, sign)
    shape = numpy.broadcast(r, numpy.asarray(theta)).shape
    if target is None:
        return numpy.zeros(shape, numpy.complex128)
    omega = _omega_of(r) if omega is None else numpy.asarray(omega, numpy.float64)
    return coefficient * psh_values(target, r, theta, omega=omega) / omega


def kinetic_psh(mode: ModeLikeT, sign: Union[int, str], x: PolarPoint) -> complex:
    """
    The kinetic moment of a PSH in closed form:

    .. math::

        L_+ y_l^m = \\sqrt{(l - m)(l + m + 1)} \\, y_l^{m+1} / \\omega, \\quad
        L_- y_l^m = \\sqrt{(l + m)(l - m + 1)} \\, y_l^{m-1} / \\omega.

    Zero when the target order is out of range.
    """
    return complex(kinetic_psh_values(mode, sign, x.r, x.theta))


def kinetic_fd(
    field: Callable[[float, float], complex], sign: Union[int, str], x: PolarPoint, h: float = 1e-4
) -> complex:
    """
    :math:`L_\\pm f = e^{\\pm i \\theta} (\\pm \\partial_r + \\frac{i}{r} \\partial_\\theta) f`
    by central differences with step ``h`` in both ``r`` and :math:`\\theta`.
    ``field`` is called as ``field(r, theta)``.
    """
    sign = _as_sign(sign)
    if x.r <= h:
        raise StepTooLargeError(f"Radius {x.r} is within the difference step {h} of the origin")
    if x.r + h >= 1:
        raise StepTooLargeError(f"Radius {x.r} is within the difference step {h} of the rim")
    r, theta = x.r, x.theta
    d_r = (field(r + h, theta) - field(r - h, theta)) / (2 * h)
    d_theta = (field(r, theta + h) - field(r, theta - h)) / (2 * h)
    return complex(numpy.exp(sign * 1j * theta) * (sign * d_r + 1j / r * d_theta))
