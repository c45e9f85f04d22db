import numpy
import pytest

from diskbio.core.solve import (
    OPERATOR_PAIRS,
    PrecondStudyResult,
    PrecondStudyRow,
    calderon_solver,
    cg,
    dense_generalized_eigvals,
    density_similarity,
    lanczos_extremes,
    precond_study,
    preconditioned_spectrum,
)
from diskbio.errors import DefinitenessError, DomainError


def random_spd(size, seed, shift=1.0):
    rng = numpy.random.default_rng(seed)
    a = rng.standard_normal((size, size))
    return a @ a.T + shift * numpy.eye(size)


def test_cg_diagonal():
    matrix = numpy.diag(numpy.arange(1.0, 101.0))
    rhs = numpy.ones(100)
    result = cg(matrix, rhs, tol=1e-10)
    numpy.testing.assert_allclose(result.solution, 1 / numpy.arange(1.0, 101.0), rtol=1e-8)
    assert result.history[0] == 1.0
    assert result.history[-1] <= 1e-10
    assert len(result.history) == result.iterations + 1
    assert result.iterations <= 100


def test_cg_preconditioned():
    matrix = numpy.diag(numpy.arange(1.0, 101.0))
    rhs = numpy.ones(100)
    exact = numpy.diag(1 / numpy.arange(1.0, 101.0))
    result = cg(matrix, rhs, precond=exact)
    assert result.iterations == 1
    numpy.testing.assert_allclose(result.solution, numpy.diag(exact), rtol=1e-12)


def test_cg_operator_and_zero_rhs():
    matrix = random_spd(20, seed=1)
    rhs = numpy.arange(20.0)
    result = cg(lambda x: matrix @ x, rhs, tol=1e-12)
    numpy.testing.assert_allclose(matrix @ result.solution, rhs, atol=1e-9)

    zero = cg(matrix, numpy.zeros(20))
    assert zero.iterations == 0
    assert not zero.solution.any()


def test_cg_maxit():
    matrix = numpy.diag(numpy.arange(1.0, 101.0))
    result = cg(matrix, numpy.ones(100), tol=1e-14, maxit=3)
    assert result.iterations == 3
    assert result.history[-1] > 1e-14


@pytest.mark.parametrize("jacobi", [False, True])
def test_cg_energy_error_decreases(jacobi):
    matrix = random_spd(30, seed=9, shift=10.0)
    rhs = numpy.random.default_rng(10).standard_normal(30)
    exact = numpy.linalg.solve(matrix, rhs)
    precond = numpy.diag(1 / numpy.diag(matrix)) if jacobi else None

    iterates = []
    result = cg(matrix, rhs, tol=1e-8, precond=precond, callback=iterates.append)
    assert len(iterates) == result.iterations
    numpy.testing.assert_array_equal(iterates[-1], result.solution)

    errors = [(exact @ matrix @ exact)]
    for x in iterates:
        errors.append((x - exact) @ matrix @ (x - exact))
    for previous, current in zip(errors, errors[1:]):
        assert current <= previous * (1 + 1e-10)


def test_cg_indefinite():
    with pytest.raises(DefinitenessError):
        cg(numpy.diag([1.0, -1.0]), numpy.array([0.0, 1.0]))
    with pytest.raises(DefinitenessError):
        cg(numpy.eye(2), numpy.ones(2), precond=-numpy.eye(2))


def test_lanczos_standard():
    matrix = random_spd(40, seed=2)
    report = lanczos_extremes(matrix)
    eigenvalues = numpy.linalg.eigvalsh(matrix)
    assert report.lambda_min == pytest.approx(eigenvalues[0], rel=1e-8)
    assert report.lambda_max == pytest.approx(eigenvalues[-1], rel=1e-8)
    assert report.kappa == pytest.approx(eigenvalues[-1] / eigenvalues[0], rel=1e-7)


def test_lanczos_generalized():
    matrix = random_spd(30, seed=3)
    mass = random_spd(30, seed=4, shift=5.0)
    reference = dense_generalized_eigvals(matrix, mass)
    report = lanczos_extremes(matrix, mass)
    assert report.lambda_min == pytest.approx(reference[0], rel=1e-8)
    assert report.lambda_max == pytest.approx(reference[-1], rel=1e-8)

    # the same problem with an implicit B solve
    inverse = numpy.linalg.inv(mass)
    implicit = lanczos_extremes(lambda x: matrix @ x, solve_b=inverse, size=30)
    assert implicit.lambda_min == pytest.approx(reference[0], rel=1e-8)
    assert implicit.lambda_max == pytest.approx(reference[-1], rel=1e-8)


def test_lanczos_deterministic():
    matrix = random_spd(50, seed=5)
    first = lanczos_extremes(matrix, steps=10)
    second = lanczos_extremes(matrix, steps=10)
    assert first.lambda_min == second.lambda_min
    assert first.lambda_max == second.lambda_max
    assert first.steps <= 10


def test_lanczos_errors():
    with pytest.raises(DefinitenessError):
        lanczos_extremes(-numpy.eye(5))
    with pytest.raises(DefinitenessError):
        lanczos_extremes(numpy.eye(5), mass=numpy.diag([1.0, 1.0, -1.0, 1.0, 1.0]))
    with pytest.raises(DomainError):
        lanczos_extremes(numpy.eye(5), mass=numpy.eye(5), solve_b=numpy.eye(5))
    with pytest.raises(DomainError):
        lanczos_extremes(lambda x: x)


def test_calderon_solver():
    mass = random_spd(10, seed=6)
    partner = random_spd(10, seed=7)
    apply = calderon_solver(mass, partner)
    x = numpy.arange(10.0)
    expected = numpy.linalg.solve(mass, partner @ numpy.linalg.solve(mass, x))
    numpy.testing.assert_allclose(apply(x), expected, rtol=1e-8)


def test_preconditioned_spectrum_checks():
    spd = random_spd(6, seed=8)
    indefinite = numpy.diag([1.0, 1.0, 1.0, 1.0, 1.0, -1.0])
    with pytest.raises(DefinitenessError, match="A is not"):
        preconditioned_spectrum(indefinite, spd, spd)
    with pytest.raises(DefinitenessError, match="B is not"):
        preconditioned_spectrum(spd, indefinite, spd)


def test_study_result():
    rows = [
        PrecondStudyRow(level=1, kappa_pre=2.0),
        PrecondStudyRow(level=2, kappa_pre=2.5),
    ]
    result = PrecondStudyResult("V-Wbar", rows)
    assert result.kappa_pre_spread() == pytest.approx(0.25)
    assert result.as_dicts()[1]["level"] == 2
    assert set(result.as_dicts()[0]) == set(PrecondStudyRow.defaults)


@pytest.mark.parametrize("pair", OPERATOR_PAIRS)
def test_precond_study(pair):
    result = precond_study([1, 2, 3], pair)
    rows = result.rows
    assert [row.level for row in rows] == [1, 2, 3]
    for coarse, fine in zip(rows, rows[1:]):
        assert fine.dofs > coarse.dofs
        assert fine.h < coarse.h
        assert fine.kappa_raw > coarse.kappa_raw
    for row in rows:
        assert row.kappa_pre >= 1
        assert row.iters_raw > 0
        assert row.iters_pre > 0

    # the preconditioned system does not see the refinement
    assert result.kappa_pre_spread() <= 0.1
    iters_pre = [row.iters_pre for row in rows]
    assert max(iters_pre) - min(iters_pre) <= 2


def test_precond_study_errors():
    with pytest.raises(DomainError):
        precond_study([1, 2], "V-W")
    with pytest.raises(DomainError):
        precond_study([2, 1])


def test_density_similarity():
    # the exact density is (4 / pi) / omega
    assert density_similarity(4) >= 0.95
