"""
Iterative solvers and spectral estimates for the Galerkin systems,
and the preconditioning study built on them.
"""
import logging
import math
import time
from typing import Callable, Iterable, List, NamedTuple, Optional, Sequence, Union

import numpy
from scipy.linalg import cho_solve, eigh, eigh_tridiagonal

from diskbio.core.assembly import (
    GalerkinMatrix,
    QuadConfig,
    assemble_hypersingular,
    assemble_mass,
    assemble_mod_hypersingular,
    assemble_mod_single_layer,
    assemble_single_layer,
    cholesky_factor,
)
from diskbio.core.mesh import mesh_disk
from diskbio.core.spaces import FunctionSpace, SpaceKind
from diskbio.errors import DefinitenessError, DomainError
from diskbio.tools import Record, cosine_similarity
from diskbio.typing import FieldT, RealArrayT


logger = logging.getLogger(__name__)


OperatorT = Union[RealArrayT, GalerkinMatrix, Callable[[RealArrayT], RealArrayT]]


def as_operator(matrix: OperatorT) -> Callable[[RealArrayT], RealArrayT]:
    if isinstance(matrix, GalerkinMatrix):
        return matrix.matvec
    if callable(matrix):
        return matrix
    array = numpy.asarray(matrix)
    return lambda x: array @ x


def _dense(matrix: Union[RealArrayT, GalerkinMatrix]) -> RealArrayT:
    return matrix.dense() if isinstance(matrix, GalerkinMatrix) else numpy.asarray(matrix)


class CGResult(NamedTuple):
    solution: RealArrayT
    iterations: int
    history: List[float]


def cg(
    matrix: OperatorT,
    rhs: RealArrayT,
    tol: float = 1e-10,
    maxit: Optional[int] = None,
    precond: Optional[OperatorT] = None,
    callback: Optional[Callable[[RealArrayT], None]] = None,
) -> CGResult:
    """
    The (preconditioned) conjugate gradient method from a zero initial guess.

    Stops when the relative residual :math:`\\|r_k\\| / \\|b\\|` drops to ``tol``
    or after ``maxit`` iterations (``10 n`` by default).
    ``history`` holds the relative residual of every iterate, starting with 1.
    ``callback``, if given, is called with a copy of every new iterate.
    Raises :py:class:`~diskbio.errors.DefinitenessError` on non-positive curvature
    or a non-positive preconditioned residual norm.
    """
    apply_matrix = as_operator(matrix)
    apply_precond = None if precond is None else as_operator(precond)

    rhs = numpy.asarray(rhs, numpy.float64)
    rhs_norm = numpy.linalg.norm(rhs)
    solution = numpy.zeros_like(rhs)
    if rhs_norm == 0:
        return CGResult(solution, 0, [0.0])
    maxit = 10 * rhs.size if maxit is None else maxit

    residual = rhs.copy()
    z = residual if apply_precond is None else apply_precond(residual)
    rz = residual @ z
    if rz <= 0:
        raise DefinitenessError("The preconditioner is not positive definite")
    direction = z.copy()
    history = [1.0]
    iterations = 0

    while history[-1] > tol and iterations < maxit:
        image = apply_matrix(direction)
        curvature = direction @ image
        if curvature <= 0:
            raise DefinitenessError(f"Non-positive curvature {curvature} at iteration {iterations}")
        alpha = rz / curvature
        solution += alpha * direction
        residual -= alpha * image
        iterations += 1
        history.append(float(numpy.linalg.norm(residual) / rhs_norm))
        if callback is not None:
            callback(solution.copy())
        if history[-1] <= tol:
            break

        z = residual if apply_precond is None else apply_precond(residual)
        rz_next = residual @ z
        if rz_next <= 0:
            raise DefinitenessError("The preconditioner is not positive definite")
        direction = z + (rz_next / rz) * direction
        rz = rz_next

    logger.debug("CG: %d iterations, relative residual %.2e", iterations, history[-1])
    return CGResult(solution, iterations, history)


class SpectrumReport:
    """
    Extreme eigenvalues of a (generalized) symmetric eigenproblem and their condition number.
    ``residual_bound`` is the largest Ritz residual bound of the two extremes.
    """

    def __init__(self, lambda_min: float, lambda_max: float, steps: int, residual_bound: float):
        self.lambda_min = lambda_min
        self.lambda_max = lambda_max
        self.steps = steps
        self.residual_bound = residual_bound

    @property
    def kappa(self) -> float:
        return self.lambda_max / self.lambda_min

    def __repr__(self) -> str:
        return (
            f"SpectrumReport(lambda_min={self.lambda_min!r}, lambda_max={self.lambda_max!r}, "
            f"kappa={self.kappa!r}, steps={self.steps})"
        )


def lanczos_extremes(
    matrix: OperatorT,
    mass: Union[RealArrayT, GalerkinMatrix, None] = None,
    steps: Optional[int] = None,
    solve_b: Optional[OperatorT] = None,
    size: Optional[int] = None,
    rtol: float = 1e-10,
    seed: int = 0,
) -> SpectrumReport:
    """
    Extreme eigenvalues of :math:`B^{-1} A` by the Lanczos process in the ``B`` inner product.
    ``B`` is given either as the matrix ``mass`` (factored once by Cholesky)
    or implicitly by ``solve_b`` applying :math:`B^{-1}`; without either, ``B = I``.

    Only products with ``A`` and solves with ``B`` are used;
    :math:`B v` is carried along by the recurrence.
    The basis is fully reorthogonalized (twice) and the start vector is drawn
    from a fixed seed, so the result is deterministic.
    """
    apply_a = as_operator(matrix)
    if mass is not None:
        if solve_b is not None:
            raise DomainError("Pass either the B matrix or its solver, not both")
        factor = cholesky_factor(_dense(mass))
        solve_b = lambda x: cho_solve(factor, x)  # noqa: E731
    apply_b_inv = (lambda x: x) if solve_b is None else as_operator(solve_b)
    if size is None:
        if callable(matrix) and not isinstance(matrix, GalerkinMatrix):
            raise DomainError("The problem size is needed for a matrix-free operator")
        size = _dense(matrix).shape[0]  # type: ignore[arg-type]
    steps = min(size, 150) if steps is None else min(steps, size)

    rng = numpy.random.default_rng(seed)
    # Start from v = B^-1 w, so that u = B v = w is known
    u = rng.standard_normal(size)
    v = apply_b_inv(u)
    norm = math.sqrt(_positive(v @ u))
    v, u = v / norm, u / norm

    basis_v = [v]
    basis_u = [u]
    alphas: List[float] = []
    betas: List[float] = []
    ritz = numpy.array([numpy.nan])
    bound = math.inf

    for step in range(steps):
        w = apply_a(v)
        alpha = float(w @ v)
        alphas.append(alpha)

        # Orthogonalize A v against the basis in the B^-1 inner product of the u-vectors
        for _ in range(2):
            for vi, ui in zip(basis_v, basis_u):
                w = w - (w @ vi) * ui

        w_v = apply_b_inv(w)
        beta = math.sqrt(max(float(w_v @ w), 0.0))

        if (step + 1) % 10 == 0 or step + 1 == steps or beta <= 1e-14 * abs(alpha):
            ritz, vectors = eigh_tridiagonal(numpy.array(alphas), numpy.array(betas))
            last = numpy.abs(vectors[-1, [0, -1]])
            bound = float(beta * last.max())
            if beta <= 1e-14 * abs(alpha) or bound <= rtol * numpy.abs(ritz[[0, -1]]).min():
                break

        if step + 1 == steps:
            break
        betas.append(beta)
        v = w_v / beta
        u = w / beta
        basis_v.append(v)
        basis_u.append(u)

    lambda_min, lambda_max = float(ritz[0]), float(ritz[-1])
    if lambda_min <= 0:
        raise DefinitenessError(f"Non-positive Ritz value {lambda_min}")
    logger.debug(
        "Lanczos: %d steps, extremes %.6g and %.6g, residual bound %.2e",
        len(alphas),
        lambda_min,
        lambda_max,
        bound,
    )
    return SpectrumReport(lambda_min, lambda_max, len(alphas), bound)


def _positive(value: float) -> float:
    if not value > 0:
        raise DefinitenessError(f"B is not positive definite (v^T B v = {value})")
    return value


def dense_generalized_eigvals(
    matrix: Union[RealArrayT, GalerkinMatrix], mass: Union[RealArrayT, GalerkinMatrix, None] = None
) -> RealArrayT:
    """All eigenvalues of :math:`A x = \\lambda B x` in ascending order, by a dense solver."""
    if mass is None:
        return eigh(_dense(matrix), eigvals_only=True)
    return eigh(_dense(matrix), _dense(mass), eigvals_only=True)


def calderon_solver(
    mass: Union[RealArrayT, GalerkinMatrix], partner: Union[RealArrayT, GalerkinMatrix]
) -> Callable[[RealArrayT], RealArrayT]:
    """
    :math:`r \\mapsto M^{-1} B M^{-1} r`, the operator preconditioner built from the mass matrix ``M``
    and the Galerkin matrix ``B`` of the inverse-type operator.
    """
    factor = cholesky_factor(_dense(mass))
    apply_partner = as_operator(partner)

    def apply(residual: RealArrayT) -> RealArrayT:
        return cho_solve(factor, apply_partner(cho_solve(factor, residual)))

    return apply


def _check_spd(matrix: Union[RealArrayT, GalerkinMatrix], name: str) -> None:
    try:
        cholesky_factor(_dense(matrix))
    except DefinitenessError as exc:
        raise DefinitenessError(f"{name} is not positive definite") from exc


def preconditioned_spectrum(
    matrix: Union[RealArrayT, GalerkinMatrix],
    partner: Union[RealArrayT, GalerkinMatrix],
    mass: Union[RealArrayT, GalerkinMatrix],
    steps: Optional[int] = None,
) -> SpectrumReport:
    """
    Extreme eigenvalues of :math:`M^{-1} B M^{-1} A`, i.e. of :math:`C^{-1} A`
    with :math:`C = M B^{-1} M`.
    """
    _check_spd(matrix, "A")
    _check_spd(partner, "B")
    return lanczos_extremes(matrix, steps=steps, solve_b=calderon_solver(mass, partner))


class PrecondStudyRow(Record):
    defaults = dict(
        level=0,
        dofs=0,
        h=0.0,
        kappa_raw=0.0,
        kappa_pre=0.0,
        iters_raw=0,
        iters_pre=0,
    )


class PrecondStudyResult:
    """
    The rows of a preconditioning study, one per mesh level, in increasing level order.
    """

    def __init__(self, pair: str, rows: Sequence[PrecondStudyRow]):
        self.pair = pair
        self.rows = list(rows)

    def kappa_pre_spread(self) -> float:
        """Relative spread ``(max - min) / min`` of the preconditioned condition numbers."""
        values = [row.kappa_pre for row in self.rows]
        return (max(values) - min(values)) / min(values)

    def as_dicts(self) -> List[dict]:
        return [dict(row) for row in self.rows]

    def __repr__(self) -> str:
        return f"PrecondStudyResult({self.pair}, levels={[row.level for row in self.rows]})"


OPERATOR_PAIRS = ("V-Wbar", "W-Vbar")


def _one(r: RealArrayT, theta: RealArrayT) -> RealArrayT:
    return numpy.ones_like(r)


def precond_study(
    levels: Iterable[int],
    operator_pair: str = "V-Wbar",
    rhs: Optional[FieldT] = None,
    a: float = 1.0,
    config: Optional[QuadConfig] = None,
    cg_tol: float = 1e-8,
    lanczos_steps: Optional[int] = None,
) -> PrecondStudyResult:
    """
    For each level: assemble ``A`` (``V`` on ``P1`` or ``W`` on ``P1_0``), the partner ``B``
    (``Wbar`` or ``Vbar`` on the same space) and the mass matrix ``M``,
    estimate the condition numbers of ``A`` and of :math:`M^{-1} B M^{-1} A`,
    and count CG iterations for the load vector of ``rhs`` (1 by default) with and without
    the preconditioner.
    """
    if operator_pair not in OPERATOR_PAIRS:
        raise DomainError(
            f"Unknown operator pair {operator_pair!r}, expected one of {OPERATOR_PAIRS}"
        )
    levels = list(levels)
    if any(b <= a_ for a_, b in zip(levels, levels[1:])):
        raise DomainError(f"Levels must be strictly increasing, got {levels}")
    config = QuadConfig() if config is None else config
    rhs = _one if rhs is None else rhs

    rows = []
    for level in levels:
        start = time.perf_counter()
        mesh = mesh_disk(a, level)
        if operator_pair == "V-Wbar":
            space = SpaceKind.P1
            matrix = assemble_single_layer(mesh, space, config)
            partner = assemble_mod_hypersingular(mesh, space, config)
        else:
            space = SpaceKind.P1_0
            matrix = assemble_hypersingular(mesh, space, config)
            partner = assemble_mod_single_layer(mesh, space, config)
        mass = assemble_mass(mesh, space, space)

        raw = lanczos_extremes(matrix, steps=lanczos_steps)
        pre = preconditioned_spectrum(matrix, partner, mass, steps=lanczos_steps)

        load = FunctionSpace(mesh, space).load_vector(rhs)
        iters_raw = cg(matrix, load, tol=cg_tol).iterations
        iters_pre = cg(matrix, load, tol=cg_tol, precond=calderon_solver(mass, partner)).iterations

        row = PrecondStudyRow(
            level=level,
            dofs=matrix.shape[0],
            h=mesh.max_edge_length,
            kappa_raw=raw.kappa,
            kappa_pre=pre.kappa,
            iters_raw=iters_raw,
            iters_pre=iters_pre,
        )
        logger.info(
            "%s level %d: %d dofs, kappa %.3g -> %.3g, CG %d -> %d iterations (%.1fs)",
            operator_pair,
            level,
            row.dofs,
            row.kappa_raw,
            row.kappa_pre,
            iters_raw,
            iters_pre,
            time.perf_counter() - start,
        )
        rows.append(row)

    return PrecondStudyResult(operator_pair, rows)


def density_similarity(level: int, a: float = 1.0, config: Optional[QuadConfig] = None) -> float:
    """
    Solve :math:`V_h \\sigma = (1, \\varphi_i)` on ``P0`` and return the area-weighted
    cosine similarity of :math:`\\sigma` with :math:`\\omega^{-1}` sampled at the centroids,
    the profile of the exact solution.
    """
    config = QuadConfig() if config is None else config
    mesh = mesh_disk(a, level)
    space = FunctionSpace(mesh, SpaceKind.P0)
    matrix = assemble_single_layer(mesh, SpaceKind.P0, config)
    sigma = cho_solve(matrix.cholesky(), space.load_vector(_one))
    profile = space.interpolate(lambda r, theta: 1 / numpy.sqrt(a**2 - r**2))
    return cosine_similarity(sigma, profile, weights=mesh.areas)
