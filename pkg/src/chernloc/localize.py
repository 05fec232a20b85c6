"""Structural small-time limit of the rescaled character, checked against
the characteristic-form side.

At the boundary fiber the one-slot curvature blocks act by wedging with
theta'' and the two-slot blocks act by zero, so a splitting with any
two-slot block contributes exactly nothing.  The all-singleton splitting
leaves theta''_1 ^ ... ^ theta''_N wedged into the time-one heat element;
the time integrand is constant and contributes the simplex volume 1/N!.
The resulting top form must coincide with

    (2 pi i)^(-d/2) (1/N!) [A-hat(R) ^ theta''_1 ^ ... ^ theta''_N]_top,

computed by an independent series path.  (At positive scaling parameter the
series for the character carries a sign per block and the boundary values
of the one-slot blocks each carry a matching sign; at the boundary the two
cancel, which is why no alternating sign appears below.)
"""

from __future__ import annotations

import random as _random
from dataclasses import dataclass, field
from math import factorial

from .clifford import CliffordElement, OperatorWord, getzler_order
from .mehler import CurvatureMatrix, a_hat, heat_element, str_zero
from .multiform import FormElement
from .scalars import PiScalar, QC, two_pi_i_inv_pow


def symbol_of_F(*thetas):
    """Boundary symbol of a curvature block.

    One homogeneous argument theta = theta' + sigma theta'' maps to the
    operator of wedging by theta'' (returned as the form theta''); two
    arguments map to zero.  More slots are not defined.
    """
    if len(thetas) == 1:
        return thetas[0].split_sigma()[1]
    if len(thetas) == 2:
        return thetas[0].table.zero()
    raise ValueError("curvature blocks take one or two slots")


def f_symbol_order(*thetas):
    """Getzler order of a curvature block, through the operator-word count:
    |theta| + 1 for one slot and |theta_1| + |theta_2| for two."""
    if len(thetas) == 1:
        order = thetas[0].degree() + 1
    elif len(thetas) == 2:
        order = thetas[0].degree() + thetas[1].degree()
    else:
        raise ValueError("curvature blocks take one or two slots")
    if order < 0:
        return order
    factors = tuple(OperatorWord.clifford(CliffordElement.generator(max(order, 1), 1))
                    for _ in range(order))
    word = OperatorWord(factors)
    assert getzler_order(word) == order
    return order


@dataclass
class LocalizationCase:
    """One admissible splitting of a word over a curvature background.

    The gap pattern is the increasing index sequence i_1 < ... < i_k = N
    with steps of size one or two; larger steps vanish identically and are
    rejected.
    """

    d: int
    R: CurvatureMatrix
    word: tuple
    gaps: tuple
    mode: str = "symbolic-constant"
    samples: int = 20000
    seed: int = 0

    def __post_init__(self):
        n = len(self.word)
        prev = 0
        for i in self.gaps:
            if i - prev not in (1, 2):
                raise ValueError("invalid gap pattern: steps must be one or two")
            prev = i
        if self.gaps and prev != n:
            raise ValueError("invalid gap pattern: must consume the whole word")
        if n and not self.gaps:
            raise ValueError("invalid gap pattern: empty pattern on a nonempty word")
        for theta in self.word:
            theta.degree()   # raises on non-homogeneous entries


def _order_bookkeeping(case):
    """sum of block orders = |theta| + 2k - N, asserted before evaluation."""
    word = case.word
    total_deg = sum(th.degree() for th in word)
    n = len(word)
    k = len(case.gaps)
    orders = []
    prev = 0
    for i in case.gaps:
        block = word[prev:i]
        orders.append(f_symbol_order(*block))
        prev = i
    assert sum(orders) == total_deg + 2 * k - n, "block-order bookkeeping failed"
    return orders


def simplex_volume_mc(n, samples, seed=0):
    """Monte-Carlo volume of the ordered simplex inside the unit cube."""
    if n == 0:
        return 1.0
    rng = _random.Random(seed)
    hits = 0
    for _ in range(samples):
        u = [rng.random() for _ in range(n)]
        if all(u[i] <= u[i + 1] for i in range(n - 1)):
            hits += 1
    return hits / samples


def localized_term(case):
    """Boundary value of one splitting.

    Splittings with a two-slot block return the zero form.  The
    all-singleton splitting returns
    str_zero(theta''_1 ^ ... ^ theta''_N ^ H_1) times the simplex volume.
    """
    table = case.R.table
    _order_bookkeeping(case)
    n = len(case.word)
    k = len(case.gaps)
    if k < n:
        prev = 0
        for i in case.gaps:
            block = case.word[prev:i]
            if len(block) == 2:
                assert symbol_of_F(*block).is_zero()
            prev = i
        return table.zero()
    wedge = table.one()
    for theta in case.word:
        wedge = wedge * symbol_of_F(theta)
        if wedge.is_zero():
            return table.zero()
    kernel = heat_element(1, case.R).scale_prefactor(wedge)
    value = str_zero(kernel)
    if case.mode == "sampled":
        vol = simplex_volume_mc(n, case.samples, case.seed)
        return value.scale(vol)
    if case.mode != "symbolic-constant":
        raise ValueError(f"unknown simplex-time mode {case.mode!r}")
    return value.scale(QC(1) / factorial(n))


def _gap_patterns(n):
    """All index sequences with steps of one or two consuming the word."""
    if n == 0:
        yield ()
        return
    def rec(prefix, pos):
        if pos == n:
            yield tuple(prefix)
            return
        for step in (1, 2):
            if pos + step <= n:
                yield from rec(prefix + [pos + step], pos + step)
    yield from rec([], 0)


@dataclass
class LocalizationReport:
    d: int
    n: int
    lhs: FormElement
    rhs: FormElement
    exact_equal: bool
    residual: float
    patterns: int
    vanishing_patterns_zero: bool
    case_reports: list = field(default_factory=list)

    @property
    def ok(self):
        return self.vanishing_patterns_zero and (
            self.exact_equal or self.residual < 1e-12)

    def as_dict(self):
        return {
            "d": self.d,
            "word_length": self.n,
            "lhs": self.lhs.canonical_str(),
            "rhs": self.rhs.canonical_str(),
            "exact_equal": self.exact_equal,
            "residual": self.residual,
            "patterns": self.patterns,
            "vanishing_patterns_zero": self.vanishing_patterns_zero,
            "ok": self.ok,
        }


def limit_theorem_check(d, R, word, mode="symbolic-constant"):
    """Sum the boundary values over all admissible splittings and compare
    with the independently computed characteristic-form side.

    Mixed words are decomposed into homogeneous runs first.  Reports exact
    equality where the inputs are exact and the maximal coefficient
    residual otherwise.
    """
    table = R.table
    lhs = table.zero()
    patterns = 0
    zeros_ok = True
    hom_words = _homogeneous_words(table, word)
    for coeff, hw in hom_words:
        n = len(hw)
        for gaps in _gap_patterns(n):
            case = LocalizationCase(d, R, hw, gaps, mode=mode)
            value = localized_term(case)
            patterns += 1
            if len(gaps) < n and not value.is_zero():
                zeros_ok = False
            lhs += value.scale(coeff)

    rhs_form = a_hat(R)
    for theta in word:
        rhs_form = rhs_form * theta.split_sigma()[1]
    constant = two_pi_i_inv_pow(d) * QC(1, 0) / factorial(len(word))
    rhs = rhs_form.top_component().scale(constant)

    exact = lhs == rhs
    residual = 0.0
    if not exact:
        keys = set(lhs.terms) | set(rhs.terms)
        for kmono in keys:
            a = lhs.terms.get(kmono, QC(0))
            bb = rhs.terms.get(kmono, QC(0))
            da = complex(a.evalf() if isinstance(a, PiScalar) else complex(a))
            db = complex(bb.evalf() if isinstance(bb, PiScalar) else complex(bb))
            residual = max(residual, abs(da - db))
        if residual == 0.0:
            exact = True
    return LocalizationReport(d, len(word), lhs, rhs, exact, residual,
                              patterns, zeros_ok)


def _homogeneous_words(table, word):
    weighted = [(QC(1), ())]
    for theta in word:
        parts = theta.homogeneous_parts()
        new = []
        for coeff, prefix in weighted:
            for _, comp in parts.items():
                new.append((coeff, prefix + (comp,)))
        weighted = new
    return weighted
