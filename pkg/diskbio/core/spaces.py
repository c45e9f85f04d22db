"""
Lowest order finite element spaces on a :py:class:`~diskbio.core.mesh.TriangleMesh`:
piecewise constants (``P0``), continuous piecewise linears (``P1``)
and piecewise linears vanishing on the circle (``P1_0``).
"""
import enum
from functools import cached_property
from typing import Union

import numpy
from numpy.typing import ArrayLike
from scipy.sparse import coo_matrix, csr_matrix

from diskbio.core.mesh import TriangleMesh
from diskbio.core.quadrature import triangle_quad
from diskbio.errors import DomainError, EmptySpaceError
from diskbio.typing import FieldT, IndexArrayT, RealArrayT


class SpaceKind(enum.Enum):
    P0 = "P0"
    P1 = "P1"
    P1_0 = "P1_0"

    @classmethod
    def parse(cls, name: Union["SpaceKind", str]) -> "SpaceKind":
        if isinstance(name, cls):
            return name
        for kind in cls:
            if kind.value.lower() == str(name).lower():
                return kind
        raise DomainError(f"Unknown finite element space: {name!r}")


def _polar(points: RealArrayT):
    x, y = points[..., 0], points[..., 1]
    return numpy.hypot(x, y), numpy.arctan2(y, x)


class FunctionSpace:
    """
    A finite element space; ``local_dofs[t, k]`` is the global index of the ``k``-th local
    basis function of triangle ``t``, or ``-1`` if it is excluded by the boundary condition.
    """

    def __init__(self, mesh: TriangleMesh, kind: Union[SpaceKind, str]):
        self.mesh = mesh
        self.kind = SpaceKind.parse(kind)
        if self.kind is SpaceKind.P1_0 and len(mesh.interior_vertices) == 0:
            raise EmptySpaceError("The mesh has no interior vertices")

    @cached_property
    def vertex_dofs(self) -> IndexArrayT:
        """The dof index of every vertex (``-1`` for excluded vertices); ``P1`` and ``P1_0`` only."""
        if self.kind is SpaceKind.P0:
            raise DomainError("P0 has no vertex degrees of freedom")
        if self.kind is SpaceKind.P1:
            return numpy.arange(self.mesh.vertex_count)
        dofs = numpy.full(self.mesh.vertex_count, -1)
        dofs[self.mesh.interior_vertices] = numpy.arange(len(self.mesh.interior_vertices))
        return dofs

    @property
    def dof_count(self) -> int:
        if self.kind is SpaceKind.P0:
            return self.mesh.triangle_count
        if self.kind is SpaceKind.P1:
            return self.mesh.vertex_count
        return len(self.mesh.interior_vertices)

    @property
    def local_size(self) -> int:
        return 1 if self.kind is SpaceKind.P0 else 3

    @cached_property
    def local_dofs(self) -> IndexArrayT:
        if self.kind is SpaceKind.P0:
            return numpy.arange(self.mesh.triangle_count)[:, None]
        return self.vertex_dofs[self.mesh.triangles]

    def local_basis(self, bary: RealArrayT) -> RealArrayT:
        """Values of the local basis functions at points with barycentric coordinates ``bary``."""
        bary = numpy.asarray(bary, numpy.float64)
        if self.kind is SpaceKind.P0:
            return numpy.ones(bary.shape[:-1] + (1,))
        return bary

    @cached_property
    def restriction(self) -> csr_matrix:
        """
        The ``(dof_count, P1 dof_count)`` 0/1 matrix selecting this space's dofs
        among the vertex dofs; for ``P0`` the identity.
        """
        if self.kind is SpaceKind.P0:
            size = self.mesh.triangle_count
            return coo_matrix((numpy.ones(size), (numpy.arange(size),) * 2)).tocsr()
        vertices = numpy.flatnonzero(self.vertex_dofs >= 0)
        return coo_matrix(
            (numpy.ones(len(vertices)), (self.vertex_dofs[vertices], vertices)),
            shape=(self.dof_count, self.mesh.vertex_count),
        ).tocsr()

    def restrict_matrix(self, full: RealArrayT) -> RealArrayT:
        """Restrict a dense ``P1`` matrix to the dofs of this space."""
        if self.kind is not SpaceKind.P1_0:
            return full
        interior = self.mesh.interior_vertices
        return full[numpy.ix_(interior, interior)]

    def accumulate(self, triangle_indices: IndexArrayT, local_values: RealArrayT) -> RealArrayT:
        """
        Sum ``local_values[n, k]`` (contributions to the ``k``-th local basis function
        of the triangle ``triangle_indices[n]``) into a dof vector.
        """
        dofs = self.local_dofs[numpy.asarray(triangle_indices)]
        mask = dofs >= 0
        return numpy.bincount(
            dofs[mask], weights=numpy.asarray(local_values)[mask], minlength=self.dof_count
        )

    def evaluate(
        self, coefficients: ArrayLike, triangle_indices: IndexArrayT, bary: RealArrayT
    ) -> RealArrayT:
        """Values of the finite element function at located points."""
        coefficients = numpy.asarray(coefficients)
        dofs = self.local_dofs[numpy.asarray(triangle_indices)]
        padded = numpy.concatenate([coefficients, numpy.zeros(1, coefficients.dtype)])
        return numpy.sum(padded[dofs] * self.local_basis(bary), axis=-1)

    def interpolate(self, field: FieldT) -> RealArrayT:
        """
        Nodal interpolation of ``field(r, theta)``: vertex values for ``P1`` and ``P1_0``,
        centroid values for ``P0``.
        """
        if self.kind is SpaceKind.P0:
            points = self.mesh.centroids
        else:
            points = self.mesh.vertices[self.vertex_dofs >= 0]
        r, theta = _polar(points)
        return numpy.asarray(field(r, theta)) * numpy.ones(len(points))

    def load_vector(self, field: FieldT, order: int = 4) -> RealArrayT:
        """:math:`b_i = \\int \\varphi_i f`, integrated with a symmetric triangle rule."""
        rule = triangle_quad(order)
        bary = numpy.concatenate([1 - rule.nodes.sum(axis=1, keepdims=True), rule.nodes], axis=1)
        points = numpy.einsum("qk,tkd->tqd", bary, self.mesh.corners)
        r, theta = _polar(points)
        values = numpy.asarray(field(r, theta)) * numpy.ones(points.shape[:2])
        weights = rule.weights[None, :] * (2 * self.mesh.areas)[:, None]
        local = numpy.einsum("tq,tq,qk->tk", weights, values, self.local_basis(bary))
        return self.accumulate(numpy.arange(self.mesh.triangle_count), local)

    def __repr__(self) -> str:
        return f"FunctionSpace({self.kind.value}, dofs={self.dof_count})"


def p1_surface_curl(mesh: TriangleMesh) -> RealArrayT:
    """
    ``(T, 3, 2)`` constant surface curls :math:`(-\\partial_y \\varphi, \\partial_x \\varphi)`
    of the three local P1 basis functions on every triangle.
    """
    gradients_12 = mesh.inverse_jacobians
    gradient_0 = -gradients_12.sum(axis=1, keepdims=True)
    gradients = numpy.concatenate([gradient_0, gradients_12], axis=1)
    return numpy.stack([-gradients[..., 1], gradients[..., 0]], axis=-1)


_LOCAL_MASS = {
    (SpaceKind.P1, SpaceKind.P1): (numpy.ones((3, 3)) + numpy.eye(3)) / 12,
    (SpaceKind.P0, SpaceKind.P1): numpy.full((1, 3), 1 / 3),
    (SpaceKind.P1, SpaceKind.P0): numpy.full((3, 1), 1 / 3),
    (SpaceKind.P0, SpaceKind.P0): numpy.ones((1, 1)),
}


def mass_matrix(
    mesh: TriangleMesh, row_space: FunctionSpace, col_space: FunctionSpace
) -> RealArrayT:
    """
    The dense matrix :math:`\\int \\varphi_j \\psi_i` with exact local mass matrices.
    """
    rows_kind = SpaceKind.P1 if row_space.kind is SpaceKind.P1_0 else row_space.kind
    cols_kind = SpaceKind.P1 if col_space.kind is SpaceKind.P1_0 else col_space.kind
    local = _LOCAL_MASS[(rows_kind, cols_kind)]

    row_dofs = row_space.local_dofs
    col_dofs = col_space.local_dofs
    values = mesh.areas[:, None, None] * local[None, :, :]
    rows = numpy.broadcast_to(row_dofs[:, :, None], values.shape)
    cols = numpy.broadcast_to(col_dofs[:, None, :], values.shape)
    keep = (rows >= 0) & (cols >= 0)

    matrix = coo_matrix(
        (values[keep], (rows[keep], cols[keep])),
        shape=(row_space.dof_count, col_space.dof_count),
    )
    return matrix.toarray()
