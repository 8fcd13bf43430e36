"""Perturbed eigenprojectors and projector-method time evolution.

The projector onto a perturbed level is the contour integral of the
resolvent around its unperturbed energy.  Expanding the resolvent in
Lippmann-Schwinger form and collecting residues order by order gives the
standard composition sum

    P^(m) = - sum_{k_1+...+k_{m+1} = m} S^(k_1) V S^(k_2) V ... V S^(k_{m+1})

with S^(0) = -P0 and S^(k) = [Q/(E_n - H0)]^k, which is evaluated here with
exact rational arithmetic in the sqrt(n!)-weighted basis.  Time evolution
follows by inserting the perturbed resolution of identity: each level
contributes <out|P_n|in> e^(-i E_n t) with the energy from its weak series
at the same order, so phases stay bounded for all t.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import algebra
from .oscillator import TruncationSpec
from .series import radius_estimate, weak_series

__all__ = [
    "ProjectorSeries",
    "AmplitudeTrace",
    "perturbed_projector",
    "evolve_projector_method",
]


@dataclass
class ProjectorSeries:
    """Coefficient matrices of |n><n| in powers of lam.

    weighted[m][i][j] are exact rationals in the sqrt(n!)-weighted basis;
    the standard-basis entry carries an extra sqrt(i!/j!), which is folded
    in by coefficient_matrix / matrices.
    """

    level: int
    order: int
    weighted: list = field(repr=False)
    n_max: int = 0

    def entry_exact(self, m: int, i: int, j: int) -> Fraction:
        """Rational part of the order-m (i, j) entry; multiply by sqrt(i!/j!)."""
        return self.weighted[m][i][j]

    def coefficient_matrix(self, m: int) -> np.ndarray:
        d = np.sqrt([math.factorial(k) for k in range(self.n_max)])
        w = np.array([[float(x) for x in row] for row in self.weighted[m]])
        return (d[:, None] * w) / d[None, :]

    @property
    def matrices(self) -> list[np.ndarray]:
        return [self.coefficient_matrix(m) for m in range(self.order + 1)]

    def evaluate(self, lam: float, order: int | None = None) -> np.ndarray:
        upto = self.order if order is None else min(order, self.order)
        acc = np.zeros((self.n_max, self.n_max))
        for m in range(upto, -1, -1):
            acc = acc * lam + self.coefficient_matrix(m)
        return acc


@dataclass
class AmplitudeTrace:
    """Transition amplitude and probability sampled on a time grid."""

    t: np.ndarray
    amplitude: np.ndarray
    method: str = "projector"

    @property
    def probability(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2


def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative integers summing to `total`."""
    for cuts in combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for c in cuts:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 2 - prev)
        yield tuple(out)


def _convergence_warning(trunc: TruncationSpec, level: int, lam: float) -> None:
    try:
        ser = weak_series(trunc, level, max_order=40)
        radius, _ = radius_estimate(ser, 20, 40)
    except (ValueError, ArithmeticError):
        return
    if abs(lam) >= radius:
        warnings.warn(
            f"|lam|={abs(lam):.4g} is outside the estimated convergence radius "
            f"{radius:.4g} of level {level}; the expansion is not reliable",
            RuntimeWarning,
        )


def perturbed_projector(
    trunc: TruncationSpec,
    level: int,
    sector: str | None = None,
    order: int = 4,
    lam: float | None = None,
    check_convergence: bool = True,
) -> tuple[ProjectorSeries, np.ndarray | None]:
    """Projector series for one level through the given order, plus its value.

    The composition sum runs over the full truncated space (the harmonic
    spectrum is nondegenerate there), with exact rationals throughout.
    Returns (series, evaluated matrix at lam in the standard basis), the
    second entry None when lam is not supplied.
    """
    n = trunc.n_max
    if not 0 <= level < n:
        raise ValueError(f"level {level} outside 0..{n - 1}")
    derived = "even" if level % 2 == 0 else "odd"
    if sector is not None and sector != derived:
        raise ValueError(f"level {level} lies in the {derived} sector, not {sector!r}")

    omega = Fraction(trunc.omega)
    x = algebra.weighted_x_matrix(n)
    x2 = algebra._frac_matmul(x, x)
    v = [[c / (4 * omega**2) for c in row] for row in algebra._frac_matmul(x2, x2)]
    h0 = [omega * (Fraction(k) + Fraction(1, 2)) for k in range(n)]

    zero = Fraction(0)
    denoms = [h0[level] - h0[m] for m in range(n)]

    def apply_s(vec: list[list[Fraction]], k: int) -> list[list[Fraction]]:
        """Left-multiply a matrix by S^(k): S^(0) = -P0, S^(k) = S^k."""
        if k == 0:
            out = [[zero] * n for _ in range(n)]
            out[level] = [-c for c in vec[level]]
            return out
        return [
            [vec[i][j] / denoms[i] ** k if i != level else zero for j in range(n)]
            for i in range(n)
        ]

    def apply_v(mat: list[list[Fraction]]) -> list[list[Fraction]]:
        return algebra._frac_matmul(v, mat)

    identity = [[Fraction(1) if i == j else zero for j in range(n)] for i in range(n)]
    coeff_mats = []
    for m in range(order + 1):
        if m == 0:
            p0 = [[zero] * n for _ in range(n)]
            p0[level][level] = Fraction(1)
            coeff_mats.append(p0)
            continue
        acc = [[zero] * n for _ in range(n)]
        for ks in _compositions(m, m + 1):
            term = apply_s(identity, ks[-1])
            for k_exp in reversed(ks[:-1]):
                term = apply_s(apply_v(term), k_exp)
            for i in range(n):
                row_t = term[i]
                row_a = acc[i]
                for j in range(n):
                    row_a[j] -= row_t[j]
        coeff_mats.append(acc)

    series = ProjectorSeries(level, order, coeff_mats, n)
    value = None
    if lam is not None:
        if check_convergence:
            _convergence_warning(trunc, level, lam)
        value = series.evaluate(lam)
    return series, value


def evolve_projector_method(
    trunc: TruncationSpec,
    order: int,
    lam: float,
    t_grid,
    state_in: int,
    state_out: int,
    check_convergence: bool = True,
) -> AmplitudeTrace:
    """Amplitude <out|U(t)|in> from order-truncated projectors and energies.

    Sums e^(-i E_n(lam) t) weighted by the projector matrix elements over
    every level in the input state's parity sector; both P_n and E_n are
    partial sums through the same order.  States of opposite parity give an
    identically zero trace.
    """
    t = np.asarray(t_grid, dtype=float)
    if state_in % 2 != state_out % 2:
        return AmplitudeTrace(t, np.zeros(len(t), dtype=complex))
    if check_convergence:
        _convergence_warning(trunc, state_in, lam)

    amplitude = np.zeros(len(t), dtype=complex)
    for level in range(state_in % 2, trunc.n_max, 2):
        series, _ = perturbed_projector(trunc, level, None, order, None, False)
        weight = series.evaluate(lam)[state_out, state_in]
        if weight == 0.0:
            continue
        energy = float(weak_series(trunc, level, max_order=order).evaluate(lam))
        amplitude += weight * np.exp(-1j * energy * t)
    return AmplitudeTrace(t, amplitude)
