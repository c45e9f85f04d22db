"""
Galerkin discretization of the four operators.

The weakly singular forms (``V`` and ``Vbar``) are integrated with a tensor
triangle rule for every pair of triangles, after which the pairs sharing a vertex,
an edge, or the whole triangle are corrected with the Sauter-Schwab rules.
The hypersingular forms are reduced to weakly singular ones by integration by parts:
:math:`\\langle W u, v \\rangle = \\langle V \\operatorname{curl} u, \\operatorname{curl} v \\rangle`,
and for ``Wbar`` the rank one term
:math:`\\frac{2}{a \\pi^2} \\int u / \\omega \\int v / \\omega` is added.
"""
import logging
import math
import time
from pathlib import Path
from typing import Iterator, Optional, Tuple, Union

import numpy
from scipy.linalg import LinAlgError, cho_factor
from scipy.sparse import coo_matrix, csr_matrix

from diskbio.core.kernels import OperatorKind, masked_kernel_values
from diskbio.core.mesh import PairRelation, TriangleMesh
from diskbio.core.quadrature import (
    SINGULAR_ORDERS,
    TRIANGLE_ORDERS,
    QuadRule,
    reference_barycentrics,
    singular_pair_quad,
    triangle_quad,
    weighted_disk_quad,
)
from diskbio.core.spaces import FunctionSpace, SpaceKind, mass_matrix, p1_surface_curl
from diskbio.errors import ConfigError, DefinitenessError, DomainError
from diskbio.tools import Dispatcher, Record, chunk_ranges, ordered_map
from diskbio.typing import IndexArrayT, RealArrayT


logger = logging.getLogger(__name__)


MATRIX_MAGIC = b"DBIO1\n"


class QuadConfig(Record):
    """
    Quadrature and scheduling parameters of the assembly.

    ``regular_order``: degree of the triangle rule used for far pairs;
    ``singular_order``: Gauss points per direction of the Sauter-Schwab rules;
    ``weighted_n_r``, ``weighted_n_theta``: size of the weighted disk rule for
    the rank one term (level dependent if ``None``);
    ``chunk_entries``: the number of kernel evaluations per work item;
    ``threads``: worker threads (``DISKBIO_THREADS`` or the CPU count if ``None``).
    """

    defaults = dict(
        regular_order=4,
        singular_order=5,
        weighted_n_r=None,
        weighted_n_theta=None,
        chunk_entries=2**22,
        threads=None,
    )

    def check(self) -> None:
        if self.regular_order not in TRIANGLE_ORDERS:
            raise ConfigError(f"regular_order must lie in [1, 10], got {self.regular_order}")
        if self.singular_order not in SINGULAR_ORDERS:
            raise ConfigError(f"singular_order must lie in [2, 8], got {self.singular_order}")
        for name in ("weighted_n_r", "weighted_n_theta"):
            value = self[name]
            if value is not None and value < 1:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.chunk_entries < 1:
            raise ConfigError(f"chunk_entries must be positive, got {self.chunk_entries}")

    def weighted_sizes(self, level: int) -> Tuple[int, int]:
        n_r = self.weighted_n_r or max(32, 4 * 2**level)
        n_theta = self.weighted_n_theta or 2 * n_r
        return n_r, n_theta


class GalerkinMatrix:
    """
    A dense Galerkin matrix, optionally with a separately stored rank one part
    ``rank_one = (coefficient, q)`` standing for ``coefficient * outer(q, q)``.
    """

    def __init__(
        self,
        operator: str,
        space: str,
        entries: RealArrayT,
        level: int,
        a: float,
        rank_one: Optional[Tuple[float, RealArrayT]] = None,
    ):
        self.operator = operator
        self.space = space
        self.entries = numpy.asarray(entries, numpy.float64)
        self.level = level
        self.a = a
        self.rank_one = rank_one

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape  # type: ignore[return-value]

    def dense(self) -> RealArrayT:
        if self.rank_one is None:
            return self.entries
        coefficient, q = self.rank_one
        return self.entries + coefficient * numpy.outer(q, q)

    def matvec(self, u: RealArrayT) -> RealArrayT:
        result = self.entries @ u
        if self.rank_one is not None:
            coefficient, q = self.rank_one
            result = result + coefficient * q * (q @ u)
        return result

    def quadratic_form(self, u: RealArrayT, v: Optional[RealArrayT] = None) -> float:
        """:math:`v^T A u`, with ``v = u`` by default."""
        v = u if v is None else v
        return float(numpy.asarray(v) @ self.matvec(numpy.asarray(u)))

    def cholesky(self) -> Tuple[RealArrayT, bool]:
        """
        The Cholesky factorization in the form returned by ``scipy.linalg.cho_factor``.
        Raises :py:class:`~diskbio.errors.DefinitenessError` if the matrix is not SPD.
        """
        return cholesky_factor(self.dense())

    def write(self, path: Union[str, Path]) -> None:
        """
        Write the full matrix: the magic line ``DBIO1``, the header line
        ``rows cols operator space level a``, and the little-endian float64 entries in row-major order.
        """
        rows, cols = self.shape
        header = f"{rows} {cols} {self.operator} {self.space} {self.level} {self.a!r}\n"
        with open(path, "wb") as f:
            f.write(MATRIX_MAGIC)
            f.write(header.encode("ascii"))
            f.write(numpy.ascontiguousarray(self.dense(), dtype="<f8").tobytes())

    @classmethod
    def read(cls, path: Union[str, Path]) -> "GalerkinMatrix":
        with open(path, "rb") as f:
            magic = f.readline()
            if magic != MATRIX_MAGIC:
                raise DomainError(f"{path} is not a matrix file")
            fields = f.readline().decode("ascii").split()
            if len(fields) != 6:
                raise DomainError(f"Malformed matrix header in {path}")
            rows, cols = int(fields[0]), int(fields[1])
            data = numpy.frombuffer(f.read(), dtype="<f8")
        if data.size != rows * cols:
            raise DomainError(f"Expected {rows * cols} entries in {path}, found {data.size}")
        entries = data.reshape(rows, cols).astype(numpy.float64)
        return cls(fields[2], fields[3], entries, int(fields[4]), float(fields[5]))

    def __repr__(self) -> str:
        return (
            f"GalerkinMatrix({self.operator}, {self.space}, shape={self.shape}, "
            f"level={self.level}, a={self.a})"
        )


def cholesky_factor(matrix: RealArrayT) -> Tuple[RealArrayT, bool]:
    try:
        return cho_factor(matrix)
    except LinAlgError as exc:
        raise DefinitenessError(f"Matrix is not positive definite: {exc}") from exc


def _far_barycentrics(order: int) -> Tuple[RealArrayT, RealArrayT]:
    """The triangle rule as barycentrics computed the same way as for the far pair rule."""
    base = triangle_quad(order)
    points = numpy.stack([base.nodes[:, 0] + base.nodes[:, 1], base.nodes[:, 1]], axis=1)
    return reference_barycentrics(points), base.weights


def _far_part(
    kind: OperatorKind, space: FunctionSpace, config: QuadConfig, tol: float
) -> RealArrayT:
    """
    The tensor rule applied to every pair of triangles, assembled as :math:`B^T K B`,
    with ``B`` the weighted basis values at the quadrature points.
    """
    mesh = space.mesh
    bary, rule_weights = _far_barycentrics(config.regular_order)
    nodes_per_triangle = len(rule_weights)
    points = numpy.einsum("qk,tkd->tqd", bary, mesh.corners).reshape(-1, 2)
    total = len(points)

    weights = rule_weights[None, :] * (2 * mesh.areas)[:, None]
    values = weights[:, :, None] * space.local_basis(bary)[None, :, :]
    rows = numpy.broadcast_to(
        numpy.arange(total).reshape(mesh.triangle_count, nodes_per_triangle, 1), values.shape
    )
    cols = numpy.broadcast_to(space.local_dofs[:, None, :], values.shape)
    keep = cols >= 0
    basis = coo_matrix(
        (values[keep], (rows[keep], cols[keep])), shape=(total, space.dof_count)
    ).tocsr()
    basis_t = basis.T.tocsr()

    triangles_per_chunk = max(1, config.chunk_entries // (total * nodes_per_triangle))
    chunks = chunk_ranges(mesh.triangle_count, triangles_per_chunk)

    def block(chunk: Tuple[int, int]) -> Tuple[IndexArrayT, RealArrayT]:
        start, stop = chunk
        chunk_rows = slice(start * nodes_per_triangle, stop * nodes_per_triangle)
        kernel = masked_kernel_values(
            kind, mesh.a, points[chunk_rows, None, :], points[None, :, :], tol
        )
        projected = (basis_t @ kernel.T).T
        local = basis[chunk_rows].T.tocsr()
        dofs = numpy.unique(local.nonzero()[0])
        return dofs, local[dofs] @ projected

    result = numpy.zeros((space.dof_count, space.dof_count))
    for dofs, contribution in ordered_map(block, chunks, config.threads):
        result[dofs] += contribution
    return result


def _pair_permutations(
    mesh: TriangleMesh, relation: PairRelation, i: IndexArrayT, j: IndexArrayT
) -> Tuple[IndexArrayT, IndexArrayT]:
    """
    Local vertex orders putting the shared edge at ``P0 P1`` (in the same direction for both triangles)
    or the shared vertex at ``P0``.
    """
    count = len(i)
    if relation is PairRelation.COINCIDENT:
        identity = numpy.tile(numpy.arange(3), (count, 1))
        return identity, identity

    ti = mesh.triangles[i]
    tj = mesh.triangles[j]
    equal = ti[:, :, None] == tj[:, None, :]
    shared_i = equal.any(axis=2)
    shared_j = equal.any(axis=1)
    pairs = numpy.arange(count)

    if relation is PairRelation.EDGE:
        opposite_i = numpy.argmin(shared_i, axis=1)
        first_i = (opposite_i + 1) % 3
        second_i = (opposite_i + 2) % 3
        first_j = numpy.argmax(equal[pairs, first_i], axis=1)
        second_j = numpy.argmax(equal[pairs, second_i], axis=1)
        opposite_j = numpy.argmin(shared_j, axis=1)
        return (
            numpy.stack([first_i, second_i, opposite_i], axis=1),
            numpy.stack([first_j, second_j, opposite_j], axis=1),
        )

    corner_i = numpy.argmax(shared_i, axis=1)
    corner_j = numpy.argmax(shared_j, axis=1)
    return (
        numpy.stack([corner_i, (corner_i + 1) % 3, (corner_i + 2) % 3], axis=1),
        numpy.stack([corner_j, (corner_j + 1) % 3, (corner_j + 2) % 3], axis=1),
    )


def _pair_integrals(
    kind: OperatorKind,
    space: FunctionSpace,
    rule: QuadRule,
    i: IndexArrayT,
    j: IndexArrayT,
    perm_i: IndexArrayT,
    perm_j: IndexArrayT,
    tol: float,
) -> Tuple[RealArrayT, IndexArrayT, IndexArrayT]:
    """
    Local element matrices ``(P, n, n)`` of the given pairs and their dof indices,
    with the triangles' vertices taken in the permuted orders.
    """
    mesh = space.mesh
    bx, by = rule.pair_barycentrics()
    corners_i = numpy.take_along_axis(mesh.corners[i], perm_i[:, :, None], axis=1)
    corners_j = numpy.take_along_axis(mesh.corners[j], perm_j[:, :, None], axis=1)
    x = numpy.einsum("qk,pkd->pqd", bx, corners_i)
    y = numpy.einsum("qk,pkd->pqd", by, corners_j)

    kernel = masked_kernel_values(kind, mesh.a, x, y, tol)
    jacobians = 4 * mesh.areas[i] * mesh.areas[j]
    weighted = kernel * rule.weights[None, :] * jacobians[:, None]
    local = numpy.einsum("pq,qa,qb->pab", weighted, space.local_basis(bx), space.local_basis(by))

    if space.local_size == 1:
        return local, space.local_dofs[i], space.local_dofs[j]
    dofs_i = numpy.take_along_axis(space.local_dofs[i], perm_i, axis=1)
    dofs_j = numpy.take_along_axis(space.local_dofs[j], perm_j, axis=1)
    return local, dofs_i, dofs_j


def _touching_corrections(
    kind: OperatorKind, space: FunctionSpace, config: QuadConfig, tol: float
) -> Iterator[Tuple[RealArrayT, IndexArrayT, IndexArrayT]]:
    """
    For every pair of triangles sharing at least a vertex,
    the singular rule result minus what the far part has already added.
    """
    mesh = space.mesh
    far_rule = singular_pair_quad(PairRelation.FAR, config.regular_order)

    work = []
    for relation in (PairRelation.COINCIDENT, PairRelation.EDGE, PairRelation.VERTEX):
        i, j = mesh.pairs[relation]
        if len(i) == 0:
            continue
        rule = singular_pair_quad(relation, config.singular_order)
        perm_i, perm_j = _pair_permutations(mesh, relation, i, j)
        batch = max(1, config.chunk_entries // max(rule.size, far_rule.size))
        for start, stop in chunk_ranges(len(i), batch):
            window = slice(start, stop)
            work.append((rule, i[window], j[window], perm_i[window], perm_j[window]))

    identity = numpy.arange(3)

    def correction(item):
        rule, i, j, perm_i, perm_j = item
        singular, dofs_i, dofs_j = _pair_integrals(kind, space, rule, i, j, perm_i, perm_j, tol)
        same_order = numpy.broadcast_to(identity, perm_i.shape)
        regular, far_dofs_i, far_dofs_j = _pair_integrals(
            kind, space, far_rule, i, j, same_order, same_order, tol
        )
        return (singular, dofs_i, dofs_j), (-regular, far_dofs_i, far_dofs_j)

    for singular_part, regular_part in ordered_map(correction, work, config.threads):
        yield singular_part
        yield regular_part


def _scatter(
    result: RealArrayT, local: RealArrayT, dofs_i: IndexArrayT, dofs_j: IndexArrayT
) -> None:
    rows = numpy.broadcast_to(dofs_i[:, :, None], local.shape)
    cols = numpy.broadcast_to(dofs_j[:, None, :], local.shape)
    keep = (rows >= 0) & (cols >= 0)
    numpy.add.at(result, (rows[keep], cols[keep]), local[keep])


def weakly_singular_matrix(
    kind: OperatorKind, space: FunctionSpace, config: Optional[QuadConfig] = None
) -> RealArrayT:
    """
    The symmetric dense Galerkin matrix of the ``V`` or ``Vbar`` kernel on ``space``.
    """
    if kind not in (OperatorKind.V, OperatorKind.Vbar):
        raise DomainError(f"{kind.value} does not have a weakly singular kernel")
    config = QuadConfig() if config is None else config
    tol = 1e-12 * space.mesh.a

    result = _far_part(kind, space, config, tol)
    for local, dofs_i, dofs_j in _touching_corrections(kind, space, config, tol):
        _scatter(result, local, dofs_i, dofs_j)

    scale = numpy.abs(result).max()
    asymmetry = numpy.abs(result - result.T).max() / scale if scale > 0 else 0.0
    logger.debug(
        "%s on %r: relative asymmetry before symmetrization %.2e", kind.value, space, asymmetry
    )
    return (result + result.T) / 2


def _curl_form(mesh: TriangleMesh, cell_matrix: RealArrayT, space: FunctionSpace) -> RealArrayT:
    """
    :math:`\\sum_d C_d^T K C_d` with ``K`` the P0 Galerkin matrix of a weakly singular kernel
    and ``C_d`` the ``d``-th components of the P1 surface curls.
    """
    curls = p1_surface_curl(mesh)
    rows = numpy.repeat(numpy.arange(mesh.triangle_count), 3)
    full = numpy.zeros((mesh.vertex_count, mesh.vertex_count))
    for component in range(2):
        curl: csr_matrix = coo_matrix(
            (curls[..., component].ravel(), (rows, mesh.triangles.ravel())),
            shape=(mesh.triangle_count, mesh.vertex_count),
        ).tocsr()
        left = curl.T @ cell_matrix
        full += (curl.T @ left.T).T
    return space.restrict_matrix((full + full.T) / 2)


def dual_weight_vector(space: FunctionSpace, n_r: int, n_theta: int) -> RealArrayT:
    """
    :math:`q_i = \\int \\varphi_i / \\omega` by the weighted disk rule,
    with the rule's nodes located in the mesh.
    """
    mesh = space.mesh
    rule = weighted_disk_quad(mesh.a, n_r, n_theta)
    triangles, bary = mesh.locate(rule.nodes)
    local = rule.weights[:, None] * space.local_basis(bary)
    return space.accumulate(triangles, local)


def _require(space: FunctionSpace, allowed: Tuple[SpaceKind, ...], what: str) -> None:
    if space.kind not in allowed:
        names = ", ".join(kind.value for kind in allowed)
        raise DomainError(f"{what} is assembled on {names}, not {space.kind.value}")


def assemble_single_layer(
    mesh: TriangleMesh, space: Union[SpaceKind, str], config: Optional[QuadConfig] = None
) -> GalerkinMatrix:
    """:math:`\\langle V \\varphi_j, \\varphi_i \\rangle` on ``P0`` or ``P1``."""
    function_space = FunctionSpace(mesh, space)
    _require(function_space, (SpaceKind.P0, SpaceKind.P1), "V")
    return _timed(
        OperatorKind.V,
        function_space,
        lambda: weakly_singular_matrix(OperatorKind.V, function_space, config),
    )


def assemble_mod_single_layer(
    mesh: TriangleMesh, space: Union[SpaceKind, str], config: Optional[QuadConfig] = None
) -> GalerkinMatrix:
    """
    :math:`\\langle \\bar{V} \\varphi_j, \\varphi_i \\rangle` on ``P0`` or ``P1``;
    ``P1_0`` gives the restriction of the ``P1`` matrix.
    """
    function_space = FunctionSpace(mesh, space)
    return _timed(
        OperatorKind.Vbar,
        function_space,
        lambda: weakly_singular_matrix(OperatorKind.Vbar, function_space, config),
    )


def assemble_hypersingular(
    mesh: TriangleMesh,
    space: Union[SpaceKind, str] = SpaceKind.P1_0,
    config: Optional[QuadConfig] = None,
) -> GalerkinMatrix:
    """
    :math:`\\langle W \\varphi_j, \\varphi_i \\rangle` on ``P1_0``
    as the single layer form of the surface curls.
    """
    function_space = FunctionSpace(mesh, space)
    _require(function_space, (SpaceKind.P1_0,), "W")

    def build() -> RealArrayT:
        cells = weakly_singular_matrix(OperatorKind.V, FunctionSpace(mesh, SpaceKind.P0), config)
        return _curl_form(mesh, cells, function_space)

    return _timed(OperatorKind.W, function_space, build)


def assemble_mod_hypersingular(
    mesh: TriangleMesh,
    space: Union[SpaceKind, str] = SpaceKind.P1,
    config: Optional[QuadConfig] = None,
) -> GalerkinMatrix:
    """
    :math:`\\langle \\bar{W} \\varphi_j, \\varphi_i \\rangle` on ``P1``: the modified single layer form
    of the surface curls plus the rank one term :math:`\\frac{2}{a \\pi^2} q q^T`
    with :math:`q_i = \\int \\varphi_i / \\omega`, which is kept separate
    (see :py:meth:`GalerkinMatrix.dense`).
    """
    config = QuadConfig() if config is None else config
    function_space = FunctionSpace(mesh, space)
    _require(function_space, (SpaceKind.P1, SpaceKind.P1_0), "Wbar")

    cells = weakly_singular_matrix(OperatorKind.Vbar, FunctionSpace(mesh, SpaceKind.P0), config)
    matrix = _timed(
        OperatorKind.Wbar, function_space, lambda: _curl_form(mesh, cells, function_space)
    )
    n_r, n_theta = config.weighted_sizes(mesh.level)
    q = dual_weight_vector(function_space, n_r, n_theta)
    matrix.rank_one = (2 / (mesh.a * math.pi**2), q)
    return matrix


def assemble_mass(
    mesh: TriangleMesh,
    row_space: Union[SpaceKind, str],
    col_space: Union[SpaceKind, str, None] = None,
) -> GalerkinMatrix:
    """The mass matrix :math:`\\int \\varphi_j \\psi_i`."""
    rows = FunctionSpace(mesh, row_space)
    cols = rows if col_space is None else FunctionSpace(mesh, col_space)
    label = rows.kind.value if cols.kind is rows.kind else f"{rows.kind.value}x{cols.kind.value}"
    return GalerkinMatrix("mass", label, mass_matrix(mesh, rows, cols), mesh.level, mesh.a)


class _Assemblers:
    @staticmethod
    def handle_V(mesh, space, config):
        return assemble_single_layer(mesh, space, config)

    @staticmethod
    def handle_W(mesh, space, config):
        return assemble_hypersingular(mesh, space, config)

    @staticmethod
    def handle_Vbar(mesh, space, config):
        return assemble_mod_single_layer(mesh, space, config)

    @staticmethod
    def handle_Wbar(mesh, space, config):
        return assemble_mod_hypersingular(mesh, space, config)


_assembler = Dispatcher(OperatorKind, _Assemblers)


DEFAULT_SPACES = {
    OperatorKind.V: SpaceKind.P1,
    OperatorKind.W: SpaceKind.P1_0,
    OperatorKind.Vbar: SpaceKind.P1,
    OperatorKind.Wbar: SpaceKind.P1,
}


def assemble(
    operator: Union[OperatorKind, str],
    mesh: TriangleMesh,
    space: Union[SpaceKind, str, None] = None,
    config: Optional[QuadConfig] = None,
) -> GalerkinMatrix:
    """
    Assemble ``operator`` (an operator kind or ``"mass"``) on ``space``,
    defaulting to the natural space of the operator.
    """
    if isinstance(operator, str) and operator.lower() == "mass":
        return assemble_mass(mesh, SpaceKind.P1 if space is None else space)
    kind = OperatorKind.parse(operator)
    return _assembler(kind, mesh, DEFAULT_SPACES[kind] if space is None else space, config)


def _timed(kind: OperatorKind, space: FunctionSpace, build) -> GalerkinMatrix:
    start = time.perf_counter()
    entries = build()
    logger.info(
        "Assembled %s on %s (%d dofs, level %d) in %.2fs",
        kind.value,
        space.kind.value,
        space.dof_count,
        space.mesh.level,
        time.perf_counter() - start,
    )
    return GalerkinMatrix(kind.value, space.kind.value, entries, space.mesh.level, space.mesh.a)