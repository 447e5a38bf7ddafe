"""Algebras of cubic matrices and flows solving the Kolmogorov-Chapman equation."""

from .algebra import (AlgebraReport, analyze, find_idempotents, find_unit, inverse,
                      mu_norm, mul_norm_constant)
from .flows import (ConstraintError, DomainError, FlowFamily, MatrixPath, ScalarFamily,
                    TimeGrid, exp_mu, flow_exp, flow_fg, flow_gamma, flow_idempotent,
                    flow_invertible, flow_power, flow_product, is_uniformly_distributed,
                    transport)
from .rules import AxiomError, BinaryOp, GroupTable, MulRule, multiply, power
from .tensor import CubicMatrix, FlatIndex, add, basis, flat_index, norm_l1, scale, unflatten, zero
from .verify import check_kce, check_pde, ode_oracle, standard_grid

__version__ = "0.1.0"
