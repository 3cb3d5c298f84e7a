"""Integrability toolkit for closed gl(n) spin chains in compact representations."""

from .gtbasis import HighestWeight, LinOp, casimir, dimension, enumerate_patterns, gen, generator_matrix
from .hambuilder import (
    check_rectangular,
    hamiltonian_density,
    hamiltonian_total,
    r_lambda_lambda,
    tensor_shifted_weights,
    tpg_crosscheck,
)
from .laxfactory import lax_fundamental, r0, r_I
from .qfactory import QFamily, det_formula_residual, q_operator, qq_residual, trace_rule
from .weights import capelli_coefficients, shifted_weights, verify_cayley_hamilton, x_basis

__version__ = "0.1.0"

__all__ = [
    "HighestWeight",
    "LinOp",
    "QFamily",
    "capelli_coefficients",
    "casimir",
    "check_rectangular",
    "det_formula_residual",
    "dimension",
    "enumerate_patterns",
    "gen",
    "generator_matrix",
    "hamiltonian_density",
    "hamiltonian_total",
    "lax_fundamental",
    "q_operator",
    "qq_residual",
    "r0",
    "r_I",
    "r_lambda_lambda",
    "shifted_weights",
    "tensor_shifted_weights",
    "tpg_crosscheck",
    "trace_rule",
    "verify_cayley_hamilton",
    "x_basis",
]
