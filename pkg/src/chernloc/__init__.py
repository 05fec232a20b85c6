"""Exact graded-algebra machinery and desk-scale numerics for heat-kernel
localization of Chern characters.

The package is organized around:

* :mod:`chernloc.multiform`  -- finitely generated graded-commutative form
  algebras with a degree (-1) extension variable and d_T = d - iota;
* :mod:`chernloc.clifford`   -- Cl(R^d), quantization map, Clifford symbol,
  Berezin supertrace, operator-word order bookkeeping;
* :mod:`chernloc.barcomplex` -- bar and cyclic chains, the restriction map,
  and the cochain algebra with its codifferential;
* :mod:`chernloc.fredholm`   -- finite matrix models, curvature components,
  the perturbation-series character, idempotent chains, the heat-supertrace
  comparison;
* :mod:`chernloc.mehler`     -- nilpotent Gaussian calculus: the
  characteristic form, oscillator kernels, twisted convolution, boundary
  supertrace;
* :mod:`chernloc.localize`   -- structural small-time limit against the
  characteristic-form side;
* :mod:`chernloc.torus`      -- spectral convergence checks on a flat torus.
"""

from .barcomplex import (BarChain, Cochain, b, b0, b1, beta, cochain_mul,
                         cyclic_symmetrize, is_cyclic, restrict_i)
from .clifford import (CliffordElement, OperatorWord, berezin_str,
                       clifford_mul, exterior_table, getzler_order, quantize,
                       spinor_representation, symbol)
from .formmatrix import FormMatrix
from .fredholm import (CurvatureComponents, FredholmModel, bismut_chern,
                       chern_t, curvature, mckean_singer_check)
from .localize import (LocalizationCase, limit_theorem_check, localized_term,
                       symbol_of_F)
from .mehler import (KAPPA_COEFF, CurvatureMatrix, GaussianKernel, a_hat,
                     heat_element, heat_equation_residual, kappa_form,
                     mehler_kernel, solve_kappa_constant, str_zero,
                     twisted_convolve)
from .multiform import (FormElement, GeneratorTable, check_dga, d_T,
                        parse_form, split_sigma, wedge)
from .scalars import QC, PiScalar, TauPoly
from .torus import (TorusModel, chern_t_torus, convergence_report, heat_trace,
                    poisson_heat_trace)

__version__ = "0.1.0"

__all__ = [
    "BarChain", "Cochain", "b", "b0", "b1", "beta", "cochain_mul",
    "cyclic_symmetrize", "is_cyclic", "restrict_i",
    "CliffordElement", "OperatorWord", "berezin_str", "clifford_mul",
    "exterior_table", "getzler_order", "quantize", "spinor_representation",
    "symbol",
    "FormMatrix",
    "CurvatureComponents", "FredholmModel", "bismut_chern", "chern_t",
    "curvature", "mckean_singer_check",
    "LocalizationCase", "limit_theorem_check", "localized_term", "symbol_of_F",
    "KAPPA_COEFF", "CurvatureMatrix", "GaussianKernel", "a_hat",
    "heat_element", "heat_equation_residual", "kappa_form", "mehler_kernel",
    "solve_kappa_constant", "str_zero", "twisted_convolve",
    "FormElement", "GeneratorTable", "check_dga", "d_T", "parse_form",
    "split_sigma", "wedge",
    "QC", "PiScalar", "TauPoly",
    "TorusModel", "chern_t_torus", "convergence_report", "heat_trace",
    "poisson_heat_trace",
]
