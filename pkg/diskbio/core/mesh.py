"""
Flat triangulations of the disk of radius ``a``.

Level 0 is a fan of six triangles around the center; each refinement splits every triangle
into four and pushes the midpoints of boundary edges out to the circle.
Vertices of a coarser mesh keep their indices in the refined one.
"""
import enum
import logging
import math
from functools import cached_property
from typing import Dict, Tuple

import numpy
from scipy.sparse import coo_matrix
from scipy.spatial import cKDTree

from diskbio.errors import DomainError, MeshingError
from diskbio.typing import IndexArrayT, RealArrayT


logger = logging.getLogger(__name__)


class PairRelation(enum.Enum):
    """
    How two triangles of a mesh touch, by the number of shared vertices.
    """

    COINCIDENT = 3
    EDGE = 2
    VERTEX = 1
    FAR = 0


def _read_only(array: numpy.ndarray) -> numpy.ndarray:
    array.setflags(write=False)
    return array


class TriangleMesh:
    """
    A triangulation with counter-clockwise triangles.

    ``vertices``: ``(V, 2)`` float array; ``triangles``: ``(T, 3)`` vertex indices;
    ``boundary``: ``(V,)`` boolean flags of the vertices on the circle.
    """

    def __init__(
        self,
        vertices: RealArrayT,
        triangles: IndexArrayT,
        boundary: numpy.ndarray,
        a: float,
        level: int,
    ):
        self.vertices = _read_only(numpy.array(vertices, numpy.float64))
        self.triangles = _read_only(numpy.array(triangles, numpy.int64))
        self.boundary = _read_only(numpy.array(boundary, bool))
        self.a = float(a)
        self.level = int(level)

        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise MeshingError("Vertices must be an array of shape (V, 2)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshingError("Triangles must be an array of shape (T, 3)")

        doubled_areas = self._doubled_areas()
        if numpy.any(doubled_areas <= 0):
            bad = int(numpy.argmin(doubled_areas))
            raise MeshingError(f"Triangle {bad} is degenerate or clockwise")

    def _doubled_areas(self) -> RealArrayT:
        edges = self.edge_vectors
        return edges[:, 0, 0] * edges[:, 1, 1] - edges[:, 0, 1] * edges[:, 1, 0]

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    @cached_property
    def corners(self) -> RealArrayT:
        """``(T, 3, 2)`` vertex coordinates of each triangle."""
        return _read_only(self.vertices[self.triangles])

    @cached_property
    def edge_vectors(self) -> RealArrayT:
        """``(T, 2, 2)``: ``P1 - P0`` and ``P2 - P0`` of each triangle."""
        corners = self.vertices[self.triangles]
        return _read_only(corners[:, 1:] - corners[:, :1])

    @cached_property
    def areas(self) -> RealArrayT:
        return _read_only(self._doubled_areas() / 2)

    @cached_property
    def centroids(self) -> RealArrayT:
        return _read_only(self.corners.mean(axis=1))

    @cached_property
    def inverse_jacobians(self) -> RealArrayT:
        """
        ``(T, 2, 2)`` inverses of the maps ``(u, v) -> P0 + u (P1 - P0) + v (P2 - P0)``;
        their rows are the gradients of the barycentric coordinates of ``P1`` and ``P2``.
        """
        jacobians = numpy.transpose(self.edge_vectors, (0, 2, 1))
        return _read_only(numpy.linalg.inv(jacobians))

    @cached_property
    def interior_vertices(self) -> IndexArrayT:
        return _read_only(numpy.flatnonzero(~self.boundary))

    @cached_property
    def edges(self) -> IndexArrayT:
        """Unique edges as sorted vertex pairs."""
        return _read_only(self._edge_table()[0])

    def _edge_table(self) -> Tuple[IndexArrayT, IndexArrayT, IndexArrayT]:
        """
        Unique edges, the index of the edge ``(i, (i + 1) % 3)`` of every triangle
        as a ``(T, 3)`` array, and the number of triangles sharing each edge.
        """
        tri = self.triangles
        local = numpy.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        unique, inverse, counts = numpy.unique(
            numpy.sort(local, axis=1), axis=0, return_inverse=True, return_counts=True
        )
        edge_of_triangle = inverse.reshape(-1).reshape(3, len(tri)).T
        return unique, edge_of_triangle, counts

    @cached_property
    def max_edge_length(self) -> float:
        edges = self.edges
        return float(
            numpy.linalg.norm(self.vertices[edges[:, 0]] - self.vertices[edges[:, 1]], axis=1).max()
        )

    def barycentric(self, triangle_indices: IndexArrayT, points: RealArrayT) -> RealArrayT:
        """
        ``(n, 3)`` barycentric coordinates of ``points`` with respect to the given triangles.
        """
        triangle_indices = numpy.asarray(triangle_indices)
        points = numpy.asarray(points, numpy.float64)
        origins = self.vertices[self.triangles[triangle_indices, 0]]
        local = numpy.einsum(
            "...ij,...j->...i", self.inverse_jacobians[triangle_indices], points - origins
        )
        return numpy.concatenate([1 - local.sum(axis=-1, keepdims=True), local], axis=-1)

    @cached_property
    def _centroid_tree(self) -> cKDTree:
        return cKDTree(self.centroids)

    def locate(
        self, points: RealArrayT, candidates: int = 8, tolerance: float = 0.5
    ) -> Tuple[IndexArrayT, RealArrayT]:
        """
        The containing triangle and the barycentric coordinates for each of ``points``.

        The nearest ``candidates`` triangles by centroid are examined and the one maximizing
        the smallest barycentric coordinate is taken, so points in the sliver between
        a boundary edge and the circle go to the adjacent triangle.
        Raises :py:class:`~diskbio.errors.MeshingError` if no candidate has all coordinates
        above ``-tolerance``.
        """
        points = numpy.asarray(points, numpy.float64).reshape(-1, 2)
        k = min(candidates, self.triangle_count)
        _, nearest = self._centroid_tree.query(points, k=k)
        nearest = numpy.asarray(nearest).reshape(len(points), k)

        bary = self.barycentric(nearest, points[:, None, :])
        worst = bary.min(axis=-1)
        best = numpy.argmax(worst, axis=1)
        rows = numpy.arange(len(points))
        if len(points) > 0 and worst[rows, best].min() < -tolerance:
            raise MeshingError("A point lies outside the meshed region")
        return nearest[rows, best], bary[rows, best]

    @cached_property
    def pairs(self) -> Dict[PairRelation, Tuple[IndexArrayT, IndexArrayT]]:
        """
        Ordered triangle pairs ``(i, j)`` sharing at least one vertex, grouped by relation;
        the coincident pairs are ``(i, i)``.
        """
        count = self.triangle_count
        incidence = coo_matrix(
            (
                numpy.ones(3 * count),
                (numpy.repeat(numpy.arange(count), 3), self.triangles.ravel()),
            ),
            shape=(count, self.vertex_count),
        ).tocsr()
        shared = (incidence @ incidence.T).tocoo()
        order = numpy.lexsort((shared.col, shared.row))
        rows = shared.row[order].astype(numpy.int64)
        cols = shared.col[order].astype(numpy.int64)
        shared_counts = numpy.rint(shared.data[order]).astype(numpy.int64)

        result = {}
        for relation in (PairRelation.COINCIDENT, PairRelation.EDGE, PairRelation.VERTEX):
            mask = shared_counts == relation.value
            result[relation] = (_read_only(rows[mask]), _read_only(cols[mask]))
        return result

    def refined(self) -> "TriangleMesh":
        """
        Quadrisection of every triangle, with the midpoints of boundary edges
        projected to the circle.
        """
        tri = self.triangles
        edges, edge_of_triangle, counts = self._edge_table()
        midpoints = 0.5 * (self.vertices[edges[:, 0]] + self.vertices[edges[:, 1]])
        on_boundary = counts == 1
        radii = numpy.linalg.norm(midpoints[on_boundary], axis=1, keepdims=True)
        midpoints[on_boundary] *= self.a / radii

        vertices = numpy.concatenate([self.vertices, midpoints])
        boundary = numpy.concatenate([self.boundary, on_boundary])

        v0, v1, v2 = tri.T
        m01, m12, m20 = (edge_of_triangle + self.vertex_count).T
        children = numpy.stack(
            [
                numpy.stack([v0, m01, m20], axis=1),
                numpy.stack([m01, v1, m12], axis=1),
                numpy.stack([m20, m12, v2], axis=1),
                numpy.stack([m01, m12, m20], axis=1),
            ],
            axis=1,
        ).reshape(-1, 3)

        return TriangleMesh(vertices, children, boundary, self.a, self.level + 1)

    def __repr__(self) -> str:
        return (
            f"TriangleMesh(a={self.a}, level={self.level}, "
            f"vertices={self.vertex_count}, triangles={self.triangle_count})"
        )


def mesh_disk(a: float, level: int) -> TriangleMesh:
    """
    The level ``level`` triangulation of the disk of radius ``a``,
    with :math:`1 + 3 \\cdot 2^\\ell (2^\\ell + 1)` vertices and :math:`6 \\cdot 4^\\ell` triangles.
    """
    if not a > 0:
        raise DomainError(f"Disk radius must be positive, got {a}")
    if level < 0:
        raise DomainError(f"Mesh level must be non-negative, got {level}")

    angles = numpy.arange(6) * (math.pi / 3)
    rim = a * numpy.stack([numpy.cos(angles), numpy.sin(angles)], axis=1)
    vertices = numpy.concatenate([numpy.zeros((1, 2)), rim])
    triangles = numpy.array([[0, 1 + k, 1 + (k + 1) % 6] for k in range(6)])
    boundary = numpy.array([False] + [True] * 6)

    mesh = TriangleMesh(vertices, triangles, boundary, a, 0)
    for _ in range(level):
        mesh = mesh.refined()
    logger.debug("Built %r", mesh)
    return mesh
