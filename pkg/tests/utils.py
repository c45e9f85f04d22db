import math

import numpy

from diskbio.core.specfun import PolarPoint


def random_interior_points(count, seed=0, r_max=0.9):
    """``count`` points distributed uniformly in the disk of radius ``r_max``."""
    rng = numpy.random.default_rng(seed)
    r = r_max * numpy.sqrt(rng.uniform(size=count))
    theta = rng.uniform(0, 2 * math.pi, size=count)
    return [PolarPoint(ri, ti) for ri, ti in zip(r, theta)]


def random_point_pairs(count, seed=0, r_max=0.9, min_distance=1e-3):
    """``count`` pairs of random interior points at least ``min_distance`` apart."""
    points = random_interior_points(4 * count, seed=seed, r_max=r_max)
    pairs = [
        (x, y) for x, y in zip(points[0::2], points[1::2]) if x.distance(y) >= min_distance
    ]
    assert len(pairs) >= count
    return pairs[:count]


def hemisphere_chord(x, y):
    """Distance between the lifts of ``x`` and ``y`` to the upper unit hemisphere."""
    return math.hypot(x.distance(y), x.omega() - y.omega())


def assert_symmetric(matrix, rtol=1e-12):
    dense = numpy.asarray(matrix)
    scale = numpy.abs(dense).max()
    assert numpy.abs(dense - dense.T).max() <= rtol * scale


def assert_positive_definite(matrix):
    dense = numpy.asarray(matrix)
    eigenvalues = numpy.linalg.eigvalsh((dense + dense.T) / 2)
    assert eigenvalues.min() > 0


def rotation_matrix(angle):
    c, s = math.cos(angle), math.sin(angle)
    return numpy.array([[c, -s], [s, c]])
