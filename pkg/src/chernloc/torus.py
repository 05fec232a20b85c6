"""Spectral checks on a flat two-dimensional torus.

The Dirac operator acts on two-component spinors over Fourier modes; its
square is the scalar |kappa|^2, so heat traces are lattice Gaussian sums
with a Poisson-summation cross-check.  The rank-two Clifford conventions
(including the grading) come from :mod:`chernloc.clifford`, so the constant
reproduced by the small-time limit here is pinned to the same normalization
as the symbolic modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clifford import spinor_representation

_SPIN_OFFSETS = {"p": 0.0, "a": 0.5}


@dataclass(frozen=True)
class TorusModel:
    """Flat torus with side lengths L1, L2 and Fourier cutoff K.

    ``spin`` is a two-letter string, one letter per circle, 'p' for
    periodic and 'a' for antiperiodic.
    """

    L1: float = 2 * math.pi
    L2: float = 2 * math.pi
    K: int = 64
    spin: str = "pp"

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("Fourier cutoff must be at least one")
        if len(self.spin) != 2 or any(s not in _SPIN_OFFSETS for s in self.spin):
            raise ValueError("spin structure must be two letters from {p, a}")

    @property
    def area(self):
        return self.L1 * self.L2

    def mode_frequencies(self):
        """kappa_1, kappa_2 grids over the truncated lattice."""
        d1 = _SPIN_OFFSETS[self.spin[0]]
        d2 = _SPIN_OFFSETS[self.spin[1]]
        m = np.arange(-self.K, self.K + 1, dtype=float)
        k1 = 2 * math.pi * (m + d1) / self.L1
        k2 = 2 * math.pi * (m + d2) / self.L2
        K1, K2 = np.meshgrid(k1, k2, indexing="ij")
        return K1, K2

    def mode_energies(self):
        K1, K2 = self.mode_frequencies()
        return K1 ** 2 + K2 ** 2


def heat_trace(model, s):
    """tr e^(-s D^2) over the truncated lattice (two spinor components)."""
    if s <= 0:
        raise ValueError("heat time must be positive")
    lam = np.sort(model.mode_energies().ravel())[::-1]
    return 2.0 * float(np.sum(np.exp(-s * lam)))


def poisson_heat_trace(model, s, q_max=12):
    """Poisson-summation evaluation of the full (untruncated) heat trace."""
    if s <= 0:
        raise ValueError("heat time must be positive")
    total = 2.0
    for L, letter in ((model.L1, model.spin[0]), (model.L2, model.spin[1])):
        delta = _SPIN_OFFSETS[letter]
        base = L / (2.0 * math.sqrt(math.pi * s))
        acc = 1.0
        for q in range(1, q_max + 1):
            acc += 2.0 * math.cos(2 * math.pi * q * delta) * \
                math.exp(-(q * L) ** 2 / (4 * s))
        total *= base * acc
    return total


def heat_supertrace(model, s):
    """Str e^(-s D^2); vanishes identically on the flat torus since D^2 is
    scalar and the grading is traceless."""
    gammas, grading = spinor_representation(2)
    lam = model.mode_energies().ravel()
    return complex(np.trace(grading)) * float(np.sum(np.exp(-s * lam)))


def supertrace_constancy(model, s_grid=(0.01, 0.05, 0.1, 0.5, 1.0)):
    """max |Str e^(-s D^2)| and max |d/ds| over the grid (both should be 0)."""
    vals = [heat_supertrace(model, s) for s in s_grid]
    max_abs = max(abs(v) for v in vals)
    max_slope = 0.0
    for (s1, v1), (s2, v2) in zip(zip(s_grid, vals), list(zip(s_grid, vals))[1:]):
        max_slope = max(max_slope, abs(v2 - v1) / abs(s2 - s1))
    return max_abs, max_slope


def _volume_quantum(model):
    """tr(grading c(vol)) for the rank-two model: the Berezin constant."""
    gammas, grading = spinor_representation(2)
    return complex(np.trace(grading @ gammas[0] @ gammas[1]))


def chern_t_torus(model, t, theta_fourier):
    """Character of the length-one word with entry sigma * (f vol).

    Given theta'' = f vol with f a finite Fourier series, only the one-slot
    curvature block survives; the time-ordered integral collapses by trace
    cyclicity, giving t^2 Str(c(theta'') e^(-t^2 D^2)).  Spectrally only the
    zero mode of f contributes.
    """
    if t <= 0:
        raise ValueError("the scaling parameter must be positive")
    f0 = complex(theta_fourier.get((0, 0), 0.0))
    if f0 == 0:
        return 0j
    lam = model.mode_energies().ravel()
    heat = float(np.sum(np.exp(-(t * t) * lam)))
    return (t * t) * f0 * _volume_quantum(model) * heat


def chern_target(model, theta_fourier):
    """(2 pi i)^(-1) integral of theta'': exact Fourier pairing."""
    f0 = complex(theta_fourier.get((0, 0), 0.0))
    return f0 * model.area / (2j * math.pi)


@dataclass
class ConvergenceRow:
    t: float
    value: complex
    target: complex
    residual: float
    relative: float


@dataclass
class ConvergenceReport:
    model: TorusModel
    rows: list = field(default_factory=list)

    def as_dict(self):
        return {
            "L1": self.model.L1,
            "L2": self.model.L2,
            "K": self.model.K,
            "spin": self.model.spin,
            "rows": [
                {
                    "t": r.t,
                    "value": [r.value.real, r.value.imag],
                    "target": [r.target.real, r.target.imag],
                    "residual": r.residual,
                    "relative": r.relative,
                }
                for r in self.rows
            ],
        }

    def table_text(self):
        lines = ["      t            Ch_t                     |Ch_t - target|   relative"]
        for r in self.rows:
            lines.append(
                f"{r.t:10.4f}   {r.value.real:+.6e}{r.value.imag:+.6e}i"
                f"   {r.residual:11.3e}   {r.relative:9.3e}")
        return "\n".join(lines)


def convergence_report(model, theta_fourier, t_grid):
    """Rows (t, Ch_t, |Ch_t - target|, relative) for a decreasing grid."""
    target = chern_target(model, theta_fourier)
    rows = []
    for t in t_grid:
        v = chern_t_torus(model, t, theta_fourier)
        res = abs(v - target)
        rel = res / abs(target) if target else res
        rows.append(ConvergenceRow(float(t), v, target, res, rel))
    return ConvergenceReport(model, rows)
