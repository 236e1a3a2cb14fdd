"""Exact linear algebra over F_p, Z/p^k and Z_(p)."""
from .coefficients import (Coefficients, PLocalIntegers, PrimeField,
                           PrimePowerRing, p_valuation)
from .kernels import backend
from .linalg import (ModuleShape, Smith, Subquotient, contains, kernel_image,
                     left_kernel, matmul, preimage, same_span, smith_normal_form,
                     solve_left, span_basis, subquotient, vecmat)
from .matrix import ExactMatrix

__all__ = [
    "Coefficients", "PLocalIntegers", "PrimeField", "PrimePowerRing", "p_valuation",
    "backend", "ModuleShape", "Smith", "Subquotient", "contains", "kernel_image",
    "left_kernel", "matmul", "preimage", "same_span", "smith_normal_form",
    "solve_left", "span_basis", "subquotient", "vecmat", "ExactMatrix",
]
