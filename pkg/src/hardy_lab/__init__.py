"""Numerical verification of weighted Hardy-type inequalities.

Scalar two-weight and power-weighted inequalities, their optimal constants
and Muckenhoupt brackets, and matrix-valued (Loewner and trace) versions on
step paths.
"""
__version__ = "0.1.0"

from .constants import (ConstantBracket, PowerParams, birman_product_constant, iterated_power_constant,
                        muckenhoupt_A, muckenhoupt_A_tilde, optimal_power_constant)
from .errors import HardyLabError, HypothesisError, QuadratureError
from .hardy_ops import MINUS, PLUS, HardyAccumulator, HardyKind, hardy_apply
from .opvalued import (LoewnerReport, LoewnerVerdict, MatrixPath, check_hansen_base, check_iterated_operator,
                       check_operator_ineq, check_trace_ineq, counterexample_search, matrix_power_psd,
                       schatten_norm)
from .quadrature import QuadConfig, integrate, integrate_vector
from .verify import (InequalityReport, Verdict, check_adhoc, check_birman_chain, check_diff_form, check_iterated,
                     check_power, sharpness_probe)
from .weights import ExpDecay, Interval, MonotoneWeight, Power

__all__ = [
    "ConstantBracket", "PowerParams", "birman_product_constant", "iterated_power_constant", "muckenhoupt_A",
    "muckenhoupt_A_tilde", "optimal_power_constant", "HardyLabError", "HypothesisError", "QuadratureError",
    "MINUS", "PLUS", "HardyAccumulator", "HardyKind", "hardy_apply", "LoewnerReport", "LoewnerVerdict",
    "MatrixPath", "check_hansen_base", "check_iterated_operator", "check_operator_ineq", "check_trace_ineq",
    "counterexample_search", "matrix_power_psd", "schatten_norm", "QuadConfig", "integrate",
    "integrate_vector", "InequalityReport", "Verdict", "check_adhoc", "check_birman_chain", "check_diff_form",
    "check_iterated", "check_power", "sharpness_probe", "ExpDecay", "Interval", "MonotoneWeight", "Power",
]
