from diskbio.tools.dispatcher import Dispatcher
from diskbio.tools.immutable import ImmutableDict, ImmutableADict, Record
from diskbio.tools.utils import (
    thread_count,
    ordered_map,
    chunk_ranges,
    relative_error,
    cosine_similarity,
    extrapolate,
)
