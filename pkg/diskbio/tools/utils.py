import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple, TypeVar

import numpy
from numpy.typing import ArrayLike
from scipy.interpolate import BarycentricInterpolator

from diskbio.errors import ConfigError


_Item = TypeVar("_Item")
_Result = TypeVar("_Result")

THREADS_VARIABLE = "DISKBIO_THREADS"


def thread_count(threads: Optional[int] = None) -> int:
    """
    Number of worker threads for assembly:
    the explicit value if given, then ``DISKBIO_THREADS``; 0 or unset means the CPU count.
    """
    if threads is None:
        env = os.environ.get(THREADS_VARIABLE, "").strip()
        try:
            threads = int(env) if env else 0
        except ValueError:
            raise ConfigError(f"{THREADS_VARIABLE} must be an integer, got {env!r}") from None
    if threads < 0:
        raise ConfigError(f"Thread count must be non-negative, got {threads}")
    return threads or os.cpu_count() or 1


def ordered_map(
    func: Callable[[_Item], _Result], items: Iterable[_Item], threads: Optional[int] = None
) -> Iterator[_Result]:
    """
    Apply ``func`` to ``items`` in a bounded thread pool,
    yielding the results in the order of ``items``.
    """
    items = list(items)
    workers = min(thread_count(threads), max(len(items), 1))
    if workers == 1:
        for item in items:
            yield func(item)
        return
    with ThreadPoolExecutor(max_workers=workers) as executor:
        yield from executor.map(func, items)


def chunk_ranges(total: int, chunk_size: int) -> List[Tuple[int, int]]:
    """
    Split ``range(total)`` into consecutive ``(start, stop)`` pieces of at most ``chunk_size``.
    """
    chunk_size = max(int(chunk_size), 1)
    return [(start, min(start + chunk_size, total)) for start in range(0, total, chunk_size)]


def relative_error(computed: complex, reference: complex, scale: float = 0.0) -> float:
    """
    ``|computed - reference| / max(|reference|, scale)``; the absolute error if both are zero.
    """
    denominator = max(abs(reference), scale)
    error = abs(computed - reference)
    return float(error / denominator) if denominator > 0 else float(error)


def cosine_similarity(u: ArrayLike, v: ArrayLike, weights: Optional[ArrayLike] = None) -> float:
    """
    Cosine of the angle between ``u`` and ``v`` in the inner product with diagonal ``weights``.
    """
    u = numpy.asarray(u, numpy.float64)
    v = numpy.asarray(v, numpy.float64)
    w = numpy.ones_like(u) if weights is None else numpy.asarray(weights, numpy.float64)
    norm = numpy.sqrt(numpy.sum(w * u * u) * numpy.sum(w * v * v))
    if norm == 0:
        return 0.0
    return float(numpy.sum(w * u * v) / norm)


def extrapolate(nodes: Sequence[float], values: Sequence[float], target: float) -> float:
    """
    Evaluate the interpolating polynomial through ``(nodes, values)`` at ``target``.
    """
    return float(BarycentricInterpolator(nodes, values)(target))
