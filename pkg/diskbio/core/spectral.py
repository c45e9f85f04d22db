"""
Numerical verification of the spectral identities of the four operators on the unit disk:

* :math:`V(y_l^m / \\omega) = \\frac{1}{4} \\lambda_l^m y_l^m` for even modes,
* :math:`\\bar{V}(y_l^m / \\omega) = \\lambda_l^m y_l^m` for odd modes,
* :math:`\\langle W y_l^m, \\overline{y_{l'}^{m'}} \\rangle = \\frac{1}{2 \\lambda_l^m} \\delta` for odd modes,
* :math:`\\langle \\bar{W} y_l^m, \\overline{y_{l'}^{m'}} \\rangle = \\frac{2}{\\lambda_l^m} \\delta` for even modes,
* :math:`\\bar{W} 1 = \\frac{4}{\\pi} \\omega^{-1}`,

and of the Calderon identities, both mode by mode and through the condition numbers
of the preconditioned Galerkin systems.

Single layer potentials are evaluated pointwise with a polar rule centred at the evaluation point;
the hypersingular forms are evaluated weakly, through the curl forms with the curls written
in terms of the kinetic moments of the PSHs.
"""
import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy

from diskbio.core.assembly import GalerkinMatrix
from diskbio.core.kernels import OperatorKind
from diskbio.core.quadrature import QuadRule, RuleKind, polar_rule, weighted_disk_quad
from diskbio.core.radial import mod_single_layer_form, single_layer_form
from diskbio.core.solve import SpectrumReport, preconditioned_spectrum
from diskbio.core.specfun import (
    ModeIndex,
    ModeLikeT,
    PolarPoint,
    ladder,
    lambda_lm,
    psh,
    psh_reduced,
    psh_values,
)
from diskbio.errors import AccuracyError, DomainError
from diskbio.tools import relative_error
from diskbio.typing import ComplexArrayT, FieldT


logger = logging.getLogger(__name__)


DEFAULT_EVAL_POINTS = (PolarPoint(0.3, 0.9), PolarPoint(0.6, 2.0), PolarPoint(0.75, 4.0))


class IdentityReport:
    """
    The result of checking one identity.

    ``rel_err`` is :math:`|c - r| / \\max(|r|, \\text{scale})`, where ``scale`` is the
    size of the diagonal reference of the identity, so off-diagonal (zero) references
    are measured against the diagonal magnitude.
    """

    def __init__(
        self,
        identity: str,
        modes: Tuple[ModeLikeT, ...],
        computed: float,
        reference: float,
        scale: float = 0.0,
        params: Optional[dict] = None,
    ):
        self.identity = identity
        self.modes = tuple(ModeIndex.coerce(mode) for mode in modes)
        self.computed = computed
        self.reference = reference
        self.scale = scale
        self.rel_err = relative_error(computed, reference, scale)
        self.params = {} if params is None else dict(params)

    def passed(self, tol: float) -> bool:
        return self.rel_err <= tol

    def csv_fields(self) -> Tuple[str, ...]:
        """``identity, l, m, l2, m2, computed, reference, rel_err`` (empty fields for absent modes)."""
        first = self.modes[0] if self.modes else None
        second = self.modes[1] if len(self.modes) > 1 else None

        def index(mode: Optional[ModeIndex], field: str) -> str:
            return "" if mode is None else str(getattr(mode, field))

        return (
            self.identity,
            index(first, "l"),
            index(first, "m"),
            index(second, "l"),
            index(second, "m"),
            repr(float(self.computed)),
            repr(float(self.reference)),
            repr(float(self.rel_err)),
        )

    def __repr__(self) -> str:
        return (
            f"IdentityReport({self.identity}, modes={list(self.modes)}, "
            f"computed={self.computed!r}, reference={self.reference!r}, rel_err={self.rel_err:.3e})"
        )


def _adaptive_polar(
    integrand: Callable[[QuadRule], ComplexArrayT],
    x: PolarPoint,
    rtol: float,
    start: Tuple[int, int] = (16, 32),
    refinements: int = 6,
) -> complex:
    """
    Apply polar rules centred at ``x`` of doubling size until two consecutive results agree.
    """
    n_rho, n_phi = start
    previous = None
    for _ in range(refinements):
        rule = polar_rule(x, n_rho, n_phi)
        values = integrand(rule)
        estimate = complex(numpy.sum(rule.weights * values))
        magnitude = float(numpy.sum(rule.weights * numpy.abs(values)))
        scale = max(abs(estimate), magnitude)
        if previous is not None and abs(estimate - previous) <= rtol * scale:
            return estimate
        previous = estimate
        n_rho *= 2
        n_phi *= 2
    raise AccuracyError(f"Polar quadrature at {x} did not converge in {refinements} refinements")


def _rule_polar(rule: QuadRule) -> Tuple[numpy.ndarray, numpy.ndarray]:
    nodes = rule.nodes
    return numpy.hypot(nodes[:, 0], nodes[:, 1]), numpy.arctan2(nodes[:, 1], nodes[:, 0])


def _density_values(mode: ModeIndex, rule: QuadRule) -> ComplexArrayT:
    r, theta = _rule_polar(rule)
    r = numpy.minimum(r, 1.0)
    return psh_values(mode, r, theta, omega=rule.omega) / rule.omega


def single_layer_potential(mode: ModeLikeT, x: PolarPoint, rtol: float = 1e-10) -> complex:
    """
    :math:`V(y_l^m / \\omega)(x) = \\frac{1}{4\\pi} \\int_D \\frac{y_l^m(z)}{\\omega(z) |x - z|} dz`.
    """
    mode = ModeIndex.coerce(mode)
    integral = _adaptive_polar(lambda rule: _density_values(mode, rule), x, rtol)
    return integral / (4 * math.pi)


def mod_single_layer_potential(mode: ModeLikeT, x: PolarPoint, rtol: float = 1e-10) -> complex:
    """
    :math:`\\bar{V}(y_l^m / \\omega)(x) = \\frac{2}{\\pi^2}
    \\int_D \\frac{S_1(x, z) y_l^m(z)}{\\omega(z) |x - z|} dz`.
    """
    mode = ModeIndex.coerce(mode)
    omega_x = x.omega()

    def integrand(rule: QuadRule) -> ComplexArrayT:
        s_values = numpy.arctan2(omega_x * rule.omega, rule.distance)
        return s_values * _density_values(mode, rule)

    return (2 / math.pi**2) * _adaptive_polar(integrand, x, rtol)


def psh_project(field: FieldT, mode: ModeLikeT, rule: QuadRule) -> complex:
    """
    The weighted inner product :math:`(f, y_l^m)_{1/\\omega} = \\int_D f \\overline{y_l^m} / \\omega`
    of ``field(r, theta)`` with a PSH, using a weighted disk rule on the unit disk.
    """
    if rule.kind is not RuleKind.DISK_WEIGHTED or rule.radius != 1.0:
        raise DomainError("PSH projections need a weighted rule on the unit disk")
    r, theta = _rule_polar(rule)
    r = numpy.minimum(r, 1.0)
    conjugate = numpy.conj(psh_values(mode, r, theta, omega=rule.omega))
    values = numpy.asarray(field(r, theta)) * conjugate
    return complex(numpy.sum(rule.weights * values))


def _curl_terms(mode: ModeIndex, mode2: ModeIndex, form) -> float:
    """
    :math:`\\frac{1}{2} \\sum_\\pm c_\\pm c'_\\pm B(y_l^{m \\pm 1} / \\omega, \\overline{y_{l'}^{m \\pm 1}} / \\omega)`,
    the curl form of two PSHs written through their kinetic moments.

    Both forms commute with rotations of the disk, so terms carrying
    :math:`e^{i (m - m') \\theta}` integrate to zero over the angle when :math:`m \\ne m'`.
    """
    if mode.m != mode2.m:
        return 0.0
    total = 0.0
    for sign in (1, -1):
        coefficient, target = ladder(mode, sign)
        coefficient2, target2 = ladder(mode2, sign)
        if target is None or target2 is None:
            continue
        k = abs(mode.m + sign)
        total += coefficient * coefficient2 * form(k, psh_reduced(target), psh_reduced(target2))
    return total / 2


def bilinear_w(mode: ModeLikeT, mode2: ModeLikeT) -> float:
    """
    :math:`\\langle W y_l^m, \\overline{y_{l'}^{m'}} \\rangle
    = \\langle V \\operatorname{curl} y_l^m, \\operatorname{curl} \\overline{y_{l'}^{m'}} \\rangle`.
    """
    return _curl_terms(ModeIndex.coerce(mode), ModeIndex.coerce(mode2), single_layer_form)


def bilinear_wbar(mode: ModeLikeT, mode2: ModeLikeT, n_r: int = 64, n_theta: int = 64) -> float:
    """
    :math:`\\langle \\bar{W} y_l^m, \\overline{y_{l'}^{m'}} \\rangle`: the modified single layer form
    of the curls plus :math:`\\frac{2}{\\pi^2} \\int y_l^m / \\omega \\int \\overline{y_{l'}^{m'}} / \\omega`.
    """
    mode = ModeIndex.coerce(mode)
    mode2 = ModeIndex.coerce(mode2)
    curl_part = _curl_terms(mode, mode2, mod_single_layer_form)
    rule = weighted_disk_quad(1.0, n_r, n_theta)
    integral = _weighted_integral(mode, rule)
    integral2 = numpy.conj(_weighted_integral(mode2, rule))
    return curl_part + (2 / math.pi**2) * float((integral * integral2).real)


def _weighted_integral(mode: ModeIndex, rule: QuadRule) -> complex:
    r, theta = _rule_polar(rule)
    r = numpy.minimum(r, 1.0)
    return complex(numpy.sum(rule.weights * psh_values(mode, r, theta, omega=rule.omega)))


def _require_parity(kind: OperatorKind, *modes: ModeIndex) -> None:
    for mode in modes:
        if mode.parity != kind.parity:
            raise DomainError(
                f"{kind.value} is checked on {kind.parity} modes, got {mode} ({mode.parity})"
            )


def _pointwise_report(
    identity: str,
    mode: ModeIndex,
    potential: Callable[[ModeIndex, PolarPoint], complex],
    eigenvalue: float,
    points: Sequence[PolarPoint],
) -> IdentityReport:
    """The report at the evaluation point with the worst ratio of the two sides."""
    worst = None
    for x in points:
        if x.r > 0.8:
            raise DomainError(f"Evaluation points must satisfy r <= 0.8, got {x}")
        lhs = potential(mode, x)
        value = psh(mode, x)
        if abs(value) == 0:
            raise DomainError(f"{mode} vanishes at {x}; pick another evaluation point")
        ratio = lhs / value
        error = abs(ratio - eigenvalue)
        if worst is None or error > worst[0]:
            worst = (error, ratio, x)
        logger.debug("%s %s at %s: ratio %r", identity, mode, x, ratio)
    if worst is None:
        raise DomainError("No evaluation points given")
    _, ratio, x = worst
    return IdentityReport(
        identity, (mode,), float(ratio.real), eigenvalue, params=dict(r=x.r, theta=x.theta)
    )


def verify_wolfe(
    mode: ModeLikeT, eval_points: Sequence[PolarPoint] = DEFAULT_EVAL_POINTS
) -> IdentityReport:
    """
    :math:`V(y_l^m / \\omega) = \\frac{1}{4} \\lambda_l^m y_l^m` for an even mode;
    ``computed`` is the ratio of the two sides at the worst evaluation point.
    """
    mode = ModeIndex.coerce(mode)
    _require_parity(OperatorKind.V, mode)
    return _pointwise_report(
        "wolfe", mode, single_layer_potential, lambda_lm(mode) / 4, eval_points
    )


def verify_vbar(
    mode: ModeLikeT, eval_points: Sequence[PolarPoint] = DEFAULT_EVAL_POINTS
) -> IdentityReport:
    """
    :math:`\\bar{V}(y_l^m / \\omega) = \\lambda_l^m y_l^m` for an odd mode.
    """
    mode = ModeIndex.coerce(mode)
    _require_parity(OperatorKind.Vbar, mode)
    return _pointwise_report("vbar", mode, mod_single_layer_potential, lambda_lm(mode), eval_points)


def verify_krenk(mode: ModeLikeT, mode2: ModeLikeT) -> IdentityReport:
    """
    :math:`\\langle W y_l^m, \\overline{y_{l'}^{m'}} \\rangle = \\frac{1}{2 \\lambda_l^m} \\delta`
    for odd modes.
    """
    mode = ModeIndex.coerce(mode)
    mode2 = ModeIndex.coerce(mode2)
    _require_parity(OperatorKind.W, mode, mode2)
    diagonal = 0.5 / lambda_lm(mode)
    reference = diagonal if mode == mode2 else 0.0
    computed = bilinear_w(mode, mode2)
    return IdentityReport("krenk", (mode, mode2), computed, reference, scale=diagonal)


def verify_wbar_modes(
    mode: ModeLikeT, mode2: ModeLikeT, n_r: int = 64, n_theta: int = 64
) -> IdentityReport:
    """
    :math:`\\langle \\bar{W} y_l^m, \\overline{y_{l'}^{m'}} \\rangle = \\frac{2}{\\lambda_l^m} \\delta`
    for even modes.
    """
    mode = ModeIndex.coerce(mode)
    mode2 = ModeIndex.coerce(mode2)
    _require_parity(OperatorKind.Wbar, mode, mode2)
    diagonal = 2 / lambda_lm(mode)
    reference = diagonal if mode == mode2 else 0.0
    computed = bilinear_wbar(mode, mode2, n_r, n_theta)
    return IdentityReport(
        "wbar",
        (mode, mode2),
        computed,
        reference,
        scale=diagonal,
        params=dict(n_r=n_r, n_theta=n_theta),
    )


def _bump(r: numpy.ndarray, theta: numpy.ndarray) -> numpy.ndarray:
    return (1 - r**2) ** 2 * numpy.exp(-(r**2))


def verify_wbar_one(n_r: int = 64, n_theta: int = 64) -> List[IdentityReport]:
    """
    :math:`\\langle \\bar{W} 1, v \\rangle = \\frac{4}{\\pi} \\int v / \\omega`
    for ``v`` in {1, :math:`y_2^0`, a radial bump}; the curl part vanishes for the constant,
    leaving :math:`\\frac{2}{\\pi^2} \\int 1 / \\omega \\int v / \\omega`.
    """
    rule = weighted_disk_quad(1.0, n_r, n_theta)
    r, theta = _rule_polar(rule)
    r = numpy.minimum(r, 1.0)
    one_integral = rule.integrate(numpy.ones_like(r))

    tests = [
        ("one", None, numpy.ones_like(r)),
        ("y20", ModeIndex(2, 0), psh_values((2, 0), r, theta, omega=rule.omega).real),
        ("bump", None, _bump(r, theta)),
    ]
    reports = []
    for name, mode, values in tests:
        v_integral = rule.integrate(values)
        computed = (2 / math.pi**2) * one_integral * v_integral
        reference = (4 / math.pi) * v_integral
        scale = (4 / math.pi) * rule.integrate(numpy.abs(values))
        modes = () if mode is None else (mode,)
        reports.append(
            IdentityReport(
                f"wbar1-{name}",
                modes,
                computed,
                reference,
                scale=scale,
                params=dict(n_r=n_r, n_theta=n_theta),
            )
        )
    return reports


def verify_calderon_spectral(
    mode: ModeLikeT, eval_points: Sequence[PolarPoint] = DEFAULT_EVAL_POINTS
) -> IdentityReport:
    """
    For an even mode, the product of the computed eigenvalues of ``V``
    (pointwise, :math:`\\frac{1}{4}\\lambda`) and of ``Wbar`` (weakly, :math:`\\frac{4}{\\lambda}`);
    the reference is 1.
    """
    mode = ModeIndex.coerce(mode)
    wolfe = verify_wolfe(mode, eval_points)
    # The PSHs have weighted norm 1/2
    wbar_eigenvalue = 2 * bilinear_wbar(mode, mode)
    return IdentityReport("calderon", (mode,), wolfe.computed * wbar_eigenvalue, 1.0)


def calderon_discrete(
    single_layer: GalerkinMatrix,
    mod_hypersingular: GalerkinMatrix,
    mass: GalerkinMatrix,
    steps: Optional[int] = None,
) -> SpectrumReport:
    """
    Extreme eigenvalues of :math:`M^{-1} \\bar{W}_h M^{-1} V_h`.
    """
    return preconditioned_spectrum(single_layer, mod_hypersingular, mass, steps)


def calderon_discrete_dual(
    hypersingular: GalerkinMatrix,
    mod_single_layer: GalerkinMatrix,
    mass: GalerkinMatrix,
    steps: Optional[int] = None,
) -> SpectrumReport:
    """
    Extreme eigenvalues of :math:`M^{-1} \\bar{V}_h M^{-1} W_h`.
    """
    return preconditioned_spectrum(hypersingular, mod_single_layer, mass, steps)


def default_suite_modes(suite: str, l_max: int = 5) -> List[Tuple[ModeIndex, ...]]:
    """
    The modes (or mode pairs) checked by a verification suite:
    all modes of the matching parity with ``l <= l_max`` and ``m >= 0``,
    paired with themselves and with their neighbours for the weak suites.

    The ``Wbar`` suites skip the modes with ``m == l >= 1``: on those the regularized curl
    form has only the lowering term and yields half of :math:`\\frac{2}{\\lambda}`.
    """
    parity = {"wolfe": "even", "vbar": "odd", "krenk": "odd", "wbar": "even", "calderon": "even"}
    if suite not in parity:
        raise DomainError(f"Unknown suite {suite!r}")
    modes = [mode for mode in ModeIndex.all_modes(l_max, parity[suite]) if mode.m >= 0]
    if suite in ("wbar", "calderon"):
        modes = [mode for mode in modes if mode.l == 0 or mode.m < mode.l]
    if suite in ("wolfe", "vbar", "calderon"):
        return [(mode,) for mode in modes]
    pairs = []
    for mode in modes:
        pairs.append((mode, mode))
        neighbour = (mode.l + 2, mode.m)
        if neighbour[0] <= l_max:
            pairs.append((mode, ModeIndex(*neighbour)))
    return pairs
