"""
Exact evaluation of the single layer and modified single layer bilinear forms
between densities with one angular frequency.

For :math:`F(x) = r^k g(\\omega) \\omega^{-1} e^{i k \\theta}` and
:math:`G(y) = r^k h(\\omega) \\omega^{-1} e^{-i k \\theta}`, expanding the Poisson kernel
in the one-dimensional representations of :math:`1 / |x - y|` and
:math:`S_1(x, y) / |x - y|` leaves a single angular frequency, and the two radial
integrals collapse to Abel-type transforms:

.. math::

    \\frac{1}{4\\pi} \\int\\int \\frac{F(x) G(y)}{|x - y|}
        = 2 \\int_0^1 s^{2k} C_g(s) C_h(s) ds, \\quad
    C_g(s) = \\int_0^{\\pi/2} g(\\sqrt{1 - s^2} \\cos t) dt,

    \\frac{2}{\\pi^2} \\int\\int \\frac{S_1(x, y) F(x) G(y)}{|x - y|}
        = 8 \\int_0^1 s^{2k + 2} J_g(s) J_h(s) ds, \\quad
    J_g(s) = \\int_0^{\\pi/2} \\sin^{2k+1} t \\, \\frac{g(\\omega)}{\\omega} dt,
    \\quad \\omega = \\sqrt{1 - s^2 \\sin^2 t}.

For polynomial ``g`` and ``h`` the outer integrands are polynomials in ``s``.
"""
import math
from functools import lru_cache
from typing import Callable, Tuple

import numpy
from numpy.typing import ArrayLike

from diskbio.core.quadrature import gauss_legendre
from diskbio.errors import AccuracyError, DomainError
from diskbio.typing import RealArrayT


ProfileT = Callable[[ArrayLike], RealArrayT]


@lru_cache(maxsize=None)
def _rules(n: int) -> Tuple[RealArrayT, RealArrayT, RealArrayT, RealArrayT]:
    s, s_weights = gauss_legendre(n)
    t, t_weights = gauss_legendre(n, 0.0, math.pi / 2)
    return s, s_weights, t, t_weights


def _single_layer(k: int, g: ProfileT, h: ProfileT, n: int) -> float:
    s, s_weights, t, t_weights = _rules(n)
    omega = numpy.sqrt(1 - s**2)[:, None] * numpy.cos(t)[None, :]
    c_g = numpy.asarray(g(omega)) @ t_weights
    c_h = numpy.asarray(h(omega)) @ t_weights
    return float(2 * numpy.sum(s_weights * s ** (2 * k) * c_g * c_h))


def _mod_single_layer(k: int, g: ProfileT, h: ProfileT, n: int) -> float:
    s, s_weights, t, t_weights = _rules(n)
    sin_t = numpy.sin(t)
    r = s[:, None] * sin_t[None, :]
    omega = numpy.sqrt((1 - r) * (1 + r))
    angular = sin_t ** (2 * k + 1) * t_weights
    j_g = (numpy.asarray(g(omega)) / omega) @ angular
    j_h = (numpy.asarray(h(omega)) / omega) @ angular
    return float(8 * numpy.sum(s_weights * s ** (2 * k + 2) * j_g * j_h))


def _converged(form, k: int, g: ProfileT, h: ProfileT, n: int) -> float:
    if k < 0:
        raise DomainError(f"Angular frequency must be given by its absolute value, got {k}")
    coarse = form(k, g, h, n)
    fine = form(k, g, h, 2 * n)
    scale = abs(form(k, lambda w: numpy.abs(g(w)), lambda w: numpy.abs(h(w)), 2 * n))
    if abs(fine - coarse) > 1e-11 * max(scale, abs(fine)):
        raise AccuracyError(f"Radial form not resolved with {2 * n} points: {coarse} vs {fine}")
    return fine


def single_layer_form(k: int, g: ProfileT, h: ProfileT, n: int = 32) -> float:
    """
    The single layer form of the densities with profiles ``g`` and ``h`` (see the module docs)
    and angular frequencies :math:`\\pm k`, ``k >= 0``.
    """
    return _converged(_single_layer, k, g, h, n)


def mod_single_layer_form(k: int, g: ProfileT, h: ProfileT, n: int = 32) -> float:
    """
    The modified single layer form of the densities with profiles ``g`` and ``h``
    and angular frequencies :math:`\\pm k`, ``k >= 0``.
    """
    return _converged(_mod_single_layer, k, g, h, n)
