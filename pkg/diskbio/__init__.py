"""
Special functions
-----------------

.. autoclass:: ModeIndex
.. autoclass:: PolarPoint
.. autofunction:: lambda_lm
.. autofunction:: lambda_table
.. autofunction:: lambda_recursion_residual
.. autofunction:: assoc_legendre
.. autofunction:: psh
.. autofunction:: psh_reduced
.. autofunction:: poisson_kernel
.. autofunction:: kinetic_psh
.. autofunction:: kinetic_fd


Kernels
-------

.. autoclass:: OperatorKind
.. autoclass:: KernelConfig
.. autofunction:: s_fun
.. autofunction:: kernel_eval
.. autofunction:: kernel_series
.. autofunction:: kernel_series_extrapolated
.. autofunction:: li_rong_alpha1
.. autofunction:: primitive_check_vbar


Discretization
--------------

.. autoclass:: TriangleMesh
    :members:
.. autofunction:: mesh_disk
.. autoclass:: QuadRule
    :members:
.. autofunction:: quad_rule
.. autoclass:: SpaceKind
.. autoclass:: FunctionSpace
    :members:
.. autoclass:: QuadConfig
.. autoclass:: GalerkinMatrix
    :members:
.. autofunction:: assemble


Solvers
-------

.. autofunction:: cg
.. autofunction:: lanczos_extremes
.. autofunction:: calderon_solver
.. autofunction:: precond_study


Spectral identities
-------------------

.. autoclass:: IdentityReport
.. autofunction:: verify_wolfe
.. autofunction:: verify_vbar
.. autofunction:: verify_krenk
.. autofunction:: verify_wbar_modes
.. autofunction:: verify_wbar_one
.. autofunction:: verify_calderon_spectral
.. autofunction:: calderon_discrete
.. autofunction:: calderon_discrete_dual


Configuration
-------------

.. autoclass:: RunConfig
.. autofunction:: load_config
"""

from diskbio.core.specfun import (
    ModeIndex,
    PolarPoint,
    lambda_lm,
    lambda_table,
    lambda_recursion_residual,
    assoc_legendre,
    psh,
    psh_reduced,
    poisson_kernel,
    kinetic_psh,
    kinetic_fd,
)
from diskbio.core.kernels import (
    OperatorKind,
    KernelConfig,
    s_fun,
    kernel_eval,
    kernel_series,
    kernel_series_extrapolated,
    li_rong_alpha1,
    primitive_check_vbar,
)
from diskbio.core.mesh import TriangleMesh, mesh_disk
from diskbio.core.quadrature import QuadRule, quad_rule
from diskbio.core.spaces import SpaceKind, FunctionSpace
from diskbio.core.assembly import QuadConfig, GalerkinMatrix, assemble
from diskbio.core.solve import cg, lanczos_extremes, calderon_solver, precond_study
from diskbio.core.spectral import (
    IdentityReport,
    verify_wolfe,
    verify_vbar,
    verify_krenk,
    verify_wbar_modes,
    verify_wbar_one,
    verify_calderon_spectral,
    calderon_discrete,
    calderon_discrete_dual,
)
from diskbio.config import RunConfig, load_config
