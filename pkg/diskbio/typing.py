from typing import Callable

import numpy
from numpy.typing import ArrayLike, NDArray

RealArrayT = NDArray[numpy.float64]
ComplexArrayT = NDArray[numpy.complex128]
IndexArrayT = NDArray[numpy.int64]

# A scalar field on the disk in polar coordinates, ``f(r, theta)``, vectorized over arrays
FieldT = Callable[[RealArrayT, RealArrayT], ArrayLike]
