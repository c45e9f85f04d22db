import math

import numpy
import pytest

from diskbio.core.mesh import PairRelation, TriangleMesh, mesh_disk
from diskbio.errors import DomainError, MeshingError

from utils import rotation_matrix


@pytest.mark.parametrize("level", [0, 1, 2, 3])
def test_counts(level):
    mesh = mesh_disk(1.0, level)
    assert mesh.vertex_count == 1 + 3 * 2**level * (2**level + 1)
    assert mesh.triangle_count == 6 * 4**level
    assert mesh.boundary.sum() == 6 * 2**level
    assert mesh.level == level


@pytest.mark.parametrize("a", [1.0, 2.5])
def test_boundary_on_circle(a):
    mesh = mesh_disk(a, 2)
    radii = numpy.linalg.norm(mesh.vertices, axis=1)
    numpy.testing.assert_allclose(radii[mesh.boundary], a, rtol=1e-14)
    assert (radii[~mesh.boundary] < a * (1 - 1e-3)).all()


@pytest.mark.parametrize("level", [0, 1, 2, 3])
def test_total_area(level):
    # the triangles tile the regular polygon spanned by the boundary vertices
    sides = 6 * 2**level
    mesh = mesh_disk(1.0, level)
    assert (mesh.areas > 0).all()
    assert mesh.areas.sum() == pytest.approx(sides / 2 * math.sin(2 * math.pi / sides), rel=1e-12)


def test_nested():
    coarse = mesh_disk(1.0, 1)
    fine = mesh_disk(1.0, 2)
    assert (fine.vertices[: coarse.vertex_count] == coarse.vertices).all()
    assert (fine.boundary[: coarse.vertex_count] == coarse.boundary).all()
    assert fine.max_edge_length < coarse.max_edge_length


def test_edge_length_halves():
    lengths = [mesh_disk(1.0, level).max_edge_length for level in range(4)]
    assert lengths[0] == pytest.approx(1.0)
    for coarse, fine in zip(lengths, lengths[1:]):
        assert 0.49 < fine / coarse < 0.7


def test_rotation_symmetry():
    mesh = mesh_disk(1.0, 2)
    rotated = mesh.vertices @ rotation_matrix(math.pi / 3).T
    distances = numpy.linalg.norm(rotated[:, None, :] - mesh.vertices[None, :, :], axis=-1)
    assert distances.min(axis=1).max() < 1e-12


def test_edges():
    mesh = mesh_disk(1.0, 0)
    assert len(mesh.edges) == 12
    assert (mesh.edges[:, 0] < mesh.edges[:, 1]).all()


def test_read_only():
    mesh = mesh_disk(1.0, 1)
    with pytest.raises(ValueError):
        mesh.vertices[0, 0] = 1.0
    with pytest.raises(ValueError):
        mesh.areas[0] = 1.0


def test_invalid_meshes():
    vertices = numpy.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(MeshingError):
        TriangleMesh(vertices, [[0, 2, 1]], [False] * 3, 1.0, 0)
    with pytest.raises(MeshingError):
        TriangleMesh(vertices, [[0, 1, 1]], [False] * 3, 1.0, 0)
    with pytest.raises(MeshingError):
        TriangleMesh(vertices[:, :1], [[0, 1, 2]], [False] * 3, 1.0, 0)
    with pytest.raises(DomainError):
        mesh_disk(0.0, 1)
    with pytest.raises(DomainError):
        mesh_disk(1.0, -1)


def test_pairs_level0():
    pairs = mesh_disk(1.0, 0).pairs
    rows, cols = pairs[PairRelation.COINCIDENT]
    assert (rows == cols).all() and len(rows) == 6
    # neighbours in the fan share a spoke, all other pairs share the center
    assert len(pairs[PairRelation.EDGE][0]) == 12
    assert len(pairs[PairRelation.VERTEX][0]) == 18


@pytest.mark.parametrize("level", [1, 2])
def test_pairs_symmetric(level):
    mesh = mesh_disk(1.0, level)
    for relation, (rows, cols) in mesh.pairs.items():
        forward = set(zip(rows.tolist(), cols.tolist()))
        assert forward == set(zip(cols.tolist(), rows.tolist()))
        for i, j in forward:
            shared = len(set(mesh.triangles[i]) & set(mesh.triangles[j]))
            assert shared == relation.value


def test_pairs_edge_count():
    mesh = mesh_disk(1.0, 2)
    boundary_edges = mesh.boundary[mesh.edges].all(axis=1).sum()
    interior_edges = len(mesh.edges) - boundary_edges
    assert len(mesh.pairs[PairRelation.EDGE][0]) == 2 * interior_edges


def test_barycentric():
    mesh = mesh_disk(1.0, 1)
    bary = mesh.barycentric(numpy.arange(mesh.triangle_count), mesh.centroids)
    numpy.testing.assert_allclose(bary, 1 / 3, atol=1e-14)
    corner = mesh.barycentric([0], mesh.corners[0, 1][None, :])
    numpy.testing.assert_allclose(corner, [[0.0, 1.0, 0.0]], atol=1e-14)


def test_locate():
    mesh = mesh_disk(1.0, 2)
    triangles, bary = mesh.locate(mesh.centroids)
    assert (triangles == numpy.arange(mesh.triangle_count)).all()
    numpy.testing.assert_allclose(bary, 1 / 3, atol=1e-12)

    rng = numpy.random.default_rng(0)
    points = rng.uniform(-0.5, 0.5, size=(50, 2))
    triangles, bary = mesh.locate(points)
    assert (bary >= -1e-12).all()
    numpy.testing.assert_allclose(numpy.einsum("nk,nkd->nd", bary, mesh.corners[triangles]), points)


def test_locate_rim_sliver():
    # a point between a boundary edge and the circle goes to the adjacent triangle
    mesh = mesh_disk(1.0, 0)
    angle = math.pi / 6
    triangles, bary = mesh.locate([[0.99 * math.cos(angle), 0.99 * math.sin(angle)]])
    assert triangles[0] == 0
    assert -0.5 < bary.min() < 0


def test_locate_outside():
    mesh = mesh_disk(1.0, 0)
    with pytest.raises(MeshingError):
        mesh.locate([[3.0, 0.0]])
