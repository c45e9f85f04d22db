import math

import numpy
import pytest

from diskbio.core.quadrature import weighted_disk_quad
from diskbio.core.specfun import (
    ModeIndex,
    PolarPoint,
    assoc_legendre,
    kinetic_fd,
    kinetic_psh,
    ladder,
    lambda_lm,
    lambda_recursion_residual,
    lambda_table,
    legendre_table,
    poisson_kernel,
    poisson_kernel_series,
    psh,
    psh_reduced,
    psh_table,
    psh_values,
)
from diskbio.errors import (
    BoundarySingularityError,
    DomainError,
    ExcludedModeError,
    StepTooLargeError,
)


# Mode indices


def test_mode_index():
    mode = ModeIndex(3, -2)
    l, m = mode
    assert (l, m) == (3, -2)
    assert mode == (3, -2)
    assert mode == ModeIndex(3, -2)
    assert mode.conj() == (3, 2)
    assert not mode.is_even
    assert mode.parity == "odd"
    assert ModeIndex(2, 0).is_even
    assert hash(mode) == hash(ModeIndex(3, -2))
    assert repr(mode) == "ModeIndex(3, -2)"


@pytest.mark.parametrize("l, m", [(1, 2), (-1, 0), (2, -3), (1.5, 0)])
def test_invalid_mode(l, m):
    with pytest.raises(DomainError):
        ModeIndex(l, m)


def test_all_modes():
    modes = list(ModeIndex.all_modes(3))
    assert len(modes) == 16
    assert modes[0] == (0, 0)
    assert modes[-1] == (3, 3)
    even = list(ModeIndex.all_modes(3, "even"))
    odd = list(ModeIndex.all_modes(3, "odd"))
    assert len(even) + len(odd) == 16
    assert all(mode.is_even for mode in even)
    assert not any(mode.is_even for mode in odd)


def test_polar_point():
    x = PolarPoint(0.5, -math.pi / 2)
    assert x.theta == pytest.approx(3 * math.pi / 2)
    assert x.cartesian() == pytest.approx((0.0, -0.5))
    assert x.omega() == pytest.approx(math.sqrt(0.75))
    assert x.omega(2.0) == pytest.approx(math.sqrt(3.75))
    assert PolarPoint(1.0, 0.0).omega() == 0.0
    y = PolarPoint.from_cartesian(0.3, 0.4)
    assert y.r == pytest.approx(0.5)
    assert x.distance(y) == pytest.approx(math.hypot(0.3, 0.9))
    with pytest.raises(DomainError):
        PolarPoint(-0.1, 0.0)


# Eigenvalue factors


@pytest.mark.parametrize(
    "mode, expected",
    [((0, 0), math.pi), ((1, 0), 4 / math.pi), ((1, 1), math.pi / 2), ((2, 1), 8 / (3 * math.pi))],
)
def test_lambda_values(mode, expected):
    assert lambda_lm(mode) == pytest.approx(expected, rel=1e-14)


def test_lambda_symmetry():
    for mode in ModeIndex.all_modes(50):
        assert lambda_lm(mode) == lambda_lm(mode.conj())


def test_lambda_gamma_oracle():
    from scipy.special import gammaln

    for l, m in [(10, 3), (101, 50), (200, 7), (1000, 999)]:
        log_lambda = (
            gammaln((l + m + 1) / 2)
            + gammaln((l - m + 1) / 2)
            - gammaln((l + m + 2) / 2)
            - gammaln((l - m + 2) / 2)
        )
        assert lambda_lm((l, m)) == pytest.approx(math.exp(log_lambda), rel=1e-11)


def test_lambda_large_degree():
    # lambda ~ 2 / l
    assert lambda_lm((10**4, 0)) * 10**4 / 2 == pytest.approx(1.0, rel=1e-3)


def test_lambda_table():
    table = lambda_table(6)
    assert table.shape == (7, 7)
    for mode in ModeIndex.all_modes(6):
        if mode.m >= 0:
            assert table[mode.l, mode.m] == pytest.approx(lambda_lm(mode), rel=1e-15)
    assert table[2, 3] == 0


def test_lambda_invalid():
    with pytest.raises(DomainError):
        lambda_lm((1, 2))


def test_recursion_residual():
    assert lambda_recursion_residual((1, 0)) == pytest.approx(0.0, abs=1e-14)
    for mode in ModeIndex.all_modes(200):
        if mode.l == 0:
            continue
        residual = lambda_recursion_residual(mode)
        assert abs(residual) <= 1e-12 * 4 / lambda_lm(mode)


def test_recursion_excluded_mode():
    with pytest.raises(ExcludedModeError):
        lambda_recursion_residual((0, 0))


# Legendre functions


def test_assoc_legendre_values():
    assert assoc_legendre(0, 0, 0.3) == 1.0
    assert assoc_legendre(1, 0, 0.5) == pytest.approx(0.5)
    assert assoc_legendre(2, 1, 0.6) == pytest.approx(-1.44)
    assert assoc_legendre(2, 0, 0.6) == pytest.approx((3 * 0.36 - 1) / 2)
    assert assoc_legendre(3, 3, 0.6) == pytest.approx(-15 * 0.8**3)


def test_assoc_legendre_negative_order():
    t = numpy.linspace(-0.9, 0.9, 7)
    # P_l^{-m} = (-1)^m (l - m)! / (l + m)! P_l^m
    numpy.testing.assert_allclose(assoc_legendre(2, -1, t), -assoc_legendre(2, 1, t) / 6)
    numpy.testing.assert_allclose(assoc_legendre(3, -2, t), assoc_legendre(3, 2, t) / 120)


def test_assoc_legendre_errors():
    with pytest.raises(DomainError):
        assoc_legendre(1, 2, 0.0)
    with pytest.raises(DomainError):
        assoc_legendre(2, 1, 1.5)


def test_legendre_table_matches_columns():
    t = numpy.array([0.0, 0.3, 0.9])
    s = numpy.sqrt(1 - t**2)
    table = legendre_table(5, t, s)
    assert table.shape == (6, 6, 3)
    for l in range(6):
        for m in range(l + 1):
            norm = math.sqrt(
                (2 * l + 1) / (4 * math.pi) * math.factorial(l - m) / math.factorial(l + m)
            )
            numpy.testing.assert_allclose(
                table[l, m], norm * assoc_legendre(l, m, t), rtol=1e-12, atol=1e-14
            )


# Projected spherical harmonics


def test_psh_values():
    x = PolarPoint(0.4, 1.2)
    assert psh((0, 0), x) == pytest.approx(1 / math.sqrt(4 * math.pi))
    assert psh((1, 0), PolarPoint(0.0, 0.0)) == pytest.approx(math.sqrt(3 / (4 * math.pi)))
    expected = -math.sqrt(3 / (8 * math.pi)) * 0.4 * complex(math.cos(1.2), math.sin(1.2))
    assert psh((1, 1), x) == pytest.approx(expected)


def test_psh_negative_order():
    x = PolarPoint(0.7, 2.5)
    for mode in ModeIndex.all_modes(4):
        if mode.m < 0:
            expected = (-1) ** mode.m * psh(mode.conj(), x).conjugate()
            assert psh(mode, x) == pytest.approx(expected)


def test_psh_odd_factorization():
    points = [PolarPoint(r, 0.3) for r in (0.0, 0.5, 0.9)]
    ratios = [psh((1, 0), x) / x.omega() for x in points]
    assert ratios == pytest.approx([math.sqrt(3 / (4 * math.pi))] * 3)


def test_psh_odd_ratio_continuous_at_rim():
    mode = (3, 2)
    profile = psh_reduced(mode)
    near = 1 - 1e-6
    x = PolarPoint(near, 0.0)
    ratio = psh(mode, x).real / x.omega()
    # y / omega is r^|m| times an even polynomial in omega over omega
    limit = near**2 * profile(numpy.array([1e-3]))[0] / 1e-3
    assert ratio == pytest.approx(limit, rel=1e-2)


def test_psh_outside_disk():
    with pytest.raises(DomainError):
        psh((1, 0), PolarPoint(1.1, 0.0))


def test_psh_table():
    r = numpy.array([0.1, 0.5, 0.95])
    theta = numpy.array([0.0, 1.0, 4.0])
    table = psh_table(4, r, theta)
    for mode in ModeIndex.all_modes(4):
        if mode.m >= 0:
            numpy.testing.assert_allclose(
                table[mode.l, mode.m], psh_values(mode, r, theta), atol=1e-14
            )


def test_psh_reduced():
    x = PolarPoint(0.6, 0.0)
    for mode in [(2, 2), (3, 1), (4, -3)]:
        l, m = mode
        reduced = psh_reduced(mode)(numpy.array([x.omega()]))[0]
        assert reduced * x.r ** abs(m) == pytest.approx(psh(mode, x).real)


def _same_parity_pairs(l_max):
    modes = list(ModeIndex.all_modes(l_max))
    for i, first in enumerate(modes):
        for second in modes[i:]:
            if first.parity == second.parity or first.m != second.m:
                yield first, second


def test_psh_orthogonality():
    rule = weighted_disk_quad(1.0, 64, 64)
    r = numpy.hypot(rule.nodes[:, 0], rule.nodes[:, 1])
    theta = numpy.arctan2(rule.nodes[:, 1], rule.nodes[:, 0])
    values = {
        mode: psh_values(mode, numpy.minimum(r, 1.0), theta, omega=rule.omega)
        for mode in ModeIndex.all_modes(8)
    }
    for first, second in _same_parity_pairs(8):
        inner = rule.integrate(values[first] * numpy.conj(values[second]))
        expected = 0.5 if first == second else 0.0
        assert abs(inner - expected) <= 1e-8


def test_psh_mixed_parity_not_orthogonal():
    rule = weighted_disk_quad(1.0, 32, 8)
    r = numpy.hypot(rule.nodes[:, 0], rule.nodes[:, 1])
    theta = numpy.arctan2(rule.nodes[:, 1], rule.nodes[:, 0])
    inner = rule.integrate(
        psh_values((0, 0), r, theta, omega=rule.omega)
        * psh_values((1, 0), r, theta, omega=rule.omega)
    )
    assert inner.real == pytest.approx(math.sqrt(3) / 4, rel=1e-10)


# Poisson kernel


def test_poisson_kernel():
    assert poisson_kernel(0.0, 1.7) == pytest.approx(1 / (2 * math.pi))
    assert poisson_kernel(0.5, 0.0) == pytest.approx(3 / (2 * math.pi))
    values = poisson_kernel(numpy.array([0.2, 0.9]), numpy.array([1.0, 3.0]))
    assert values.shape == (2,)


def test_poisson_series_tail_bound():
    closed = poisson_kernel(0.9, 1.0)
    for terms in (10, 50, 200):
        bound = 2 * 0.9 ** (terms + 1) / (2 * math.pi * (1 - 0.9))
        assert abs(poisson_kernel_series(0.9, 1.0, terms) - closed) <= bound


def test_poisson_errors():
    with pytest.raises(DomainError):
        poisson_kernel(1.0, 0.0)
    with pytest.raises(DomainError):
        poisson_kernel_series(-1.0, 0.0, 10)


def test_poisson_near_one_accuracy():
    rho = 1 - 1e-9
    # the exact value at theta = 0 is (1 + rho) / (2 pi (1 - rho))
    expected = (1 + rho) / (2 * math.pi * 1e-9)
    assert poisson_kernel(rho, 0.0) == pytest.approx(expected, rel=1e-6)


# Kinetic moments


def test_ladder():
    assert ladder((2, 2), +1) == (0.0, None)
    coefficient, target = ladder((1, 1), "-")
    assert coefficient == pytest.approx(math.sqrt(2))
    assert target == (1, 0)
    with pytest.raises(DomainError):
        ladder((1, 0), 2)


def test_kinetic_top_order_vanishes():
    assert kinetic_psh((3, 3), +1, PolarPoint(0.5, 1.0)) == 0


def test_kinetic_lowering_at_origin():
    value = kinetic_psh((1, 1), -1, PolarPoint(0.0, 0.0))
    assert value == pytest.approx(math.sqrt(2) * math.sqrt(3 / (4 * math.pi)))


def test_kinetic_rim():
    with pytest.raises(BoundarySingularityError):
        kinetic_psh((2, 1), +1, PolarPoint(1.0, 0.0))


def test_kinetic_fd_simple_fields():
    x = PolarPoint(0.5, 0.8)
    assert abs(kinetic_fd(lambda r, t: 3.0, +1, x)) <= 1e-10
    value = kinetic_fd(lambda r, t: r * numpy.exp(1j * t), -1, x, h=1e-4)
    assert abs(value + 2) <= 1e-8


def test_kinetic_fd_step_errors():
    field = lambda r, t: r
    with pytest.raises(StepTooLargeError):
        kinetic_fd(field, +1, PolarPoint(5e-5, 0.0))
    with pytest.raises(StepTooLargeError):
        kinetic_fd(field, +1, PolarPoint(1 - 5e-5, 0.0))


@pytest.mark.parametrize("sign", [+1, -1])
def test_kinetic_matches_finite_differences(sign):
    for x in [PolarPoint(0.3, 1.0), PolarPoint(0.4, 0.7), PolarPoint(0.8, 5.0)]:
        for mode in ModeIndex.all_modes(4):
            field = lambda r, t: complex(psh(mode, PolarPoint(r, t)))
            analytic = kinetic_psh(mode, sign, x)
            numeric = kinetic_fd(field, sign, x)
            scale = max(abs(analytic), 1.0)
            assert abs(numeric - analytic) <= 1e-5 * scale
