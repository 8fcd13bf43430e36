"""Exceptional points in the complex coupling plane.

Three independent routes to the same objects: brute-force minimum-gap scans
over a rectangular grid of complex couplings, local simplex refinement of a
candidate until two sector eigenvalues coalesce, and the algebraic route --
the determinant of the Sylvester-style matrix built from a sector's exact
characteristic polynomial f and its z-derivative f', whose roots in lam are
precisely the couplings where f has a double root.

Also provides the weak/strong inversion map and the Riemann-sphere
(Mollweide) projection used to visualize that nothing pinches the positive
real axis.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import algebra
from .hamiltonian import CouplingFamily
from .oscillator import TruncationSpec
from .spectral import SingularityEstimate

__all__ = [
    "GapGrid",
    "ResultantPolynomial",
    "RefineResult",
    "gap_scan",
    "refine_exceptional_point",
    "sylvester_discriminant",
    "strong_weak_map",
    "lambda_to_sphere",
    "mollweide_project",
    "riemann_export",
    "EXCEPTIONAL_GAP_THRESHOLD",
]

EXCEPTIONAL_GAP_THRESHOLD = 1e-7


@dataclass
class GapGrid:
    """Minimum within-sector eigenvalue gap over a rectangular coupling grid."""

    re_range: tuple[float, float]
    im_range: tuple[float, float]
    resolution: tuple[int, int]
    values: np.ndarray = field(repr=False)
    sector: str = "even"
    domain: str = "lambda"
    n_max: int = 0
    failures: int = 0

    def re_axis(self) -> np.ndarray:
        return np.linspace(self.re_range[0], self.re_range[1], self.resolution[0])

    def im_axis(self) -> np.ndarray:
        return np.linspace(self.im_range[0], self.im_range[1], self.resolution[1])

    def min_point(self) -> tuple[complex, float]:
        """Grid point with the smallest finite gap."""
        vals = np.where(np.isnan(self.values), np.inf, self.values)
        j, i = np.unravel_index(np.argmin(vals), vals.shape)
        return complex(self.re_axis()[i], self.im_axis()[j]), float(vals[j, i])

    def points(self):
        """Yield (re, im, gap) rows in deterministic row-major order."""
        res = self.re_axis()
        ims = self.im_axis()
        for j, im in enumerate(ims):
            for i, re in enumerate(res):
                yield re, im, self.values[j, i]


@dataclass
class ResultantPolynomial:
    """Integer resultant of (f, df/dz) in the coupling; roots are the EPs."""

    coeffs: list
    sector: str
    n_max: int

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def expected_degree(self) -> int:
        s = self.n_max // 2
        return s * (s - 1)

    @property
    def degree_deficit(self) -> int:
        return self.expected_degree - self.degree

    def roots(self, dps: int = 60) -> np.ndarray:
        """All complex roots, solved at high precision.

        The integer coefficients span many orders of magnitude, so double
        precision companion-matrix rooting fails already around degree 20;
        mpmath's polished Durand-Kerner handles the degree-56 case of
        n_max = 16 in a few seconds.
        """
        import mpmath as mp

        with mp.workdps(dps):
            roots = mp.polyroots([mp.mpf(c) for c in reversed(self.coeffs)],
                                 maxsteps=200, extraprec=4 * dps)
        return np.array([complex(z) for z in roots])


@dataclass
class RefineResult:
    """Outcome of a local exceptional-point search."""

    location: complex
    gap: float
    exceptional: bool
    estimate: SingularityEstimate | None


def _min_sector_gap(h: np.ndarray) -> float:
    z = np.linalg.eigvals(h)
    if len(z) < 2:
        return np.inf
    diff = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(diff, np.inf)
    return float(diff.min())


def gap_scan(
    family: CouplingFamily,
    region: tuple[tuple[float, float], tuple[float, float]],
    resolution: tuple[int, int],
    sector: str = "even",
    workers: int = 1,
) -> GapGrid:
    """Minimum pairwise |z_i - z_j| within a sector over a complex-lam grid.

    Rows are independent and may be computed in a thread pool; assembly is
    keyed by row index so the result never depends on scheduling.  Isolated
    eigensolver failures are recorded as NaN, not raised.
    """
    (re_lo, re_hi), (im_lo, im_hi) = region
    n_re, n_im = resolution
    res = np.linspace(re_lo, re_hi, n_re)
    ims = np.linspace(im_lo, im_hi, n_im)
    h0s, vs = family.sector_matrices(sector)
    s = h0s.shape[0]
    failures = 0

    def row(j: int) -> np.ndarray:
        lams = res + 1j * ims[j]
        stack = h0s[None, :, :] + lams[:, None, None] * vs[None, :, :]
        try:
            z = np.linalg.eigvals(stack)
        except np.linalg.LinAlgError:
            # batched solve failed somewhere: fall back point by point
            out = np.empty(n_re)
            for i, lam in enumerate(lams):
                try:
                    out[i] = _min_sector_gap(h0s + lam * vs)
                except np.linalg.LinAlgError:
                    out[i] = np.nan
            return out
        diff = np.abs(z[:, :, None] - z[:, None, :])
        diff[:, np.arange(s), np.arange(s)] = np.inf
        return diff.reshape(n_re, -1).min(axis=1)

    values = np.empty((n_im, n_re))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for j, data in enumerate(pool.map(row, range(n_im))):
                values[j] = data
    else:
        for j in range(n_im):
            values[j] = row(j)
    failures = int(np.isnan(values).sum())
    if failures:
        warnings.warn(f"{failures} grid points failed to diagonalize", RuntimeWarning)
    domain = "lambda_tilde" if family.label == "strong" else "lambda"
    return GapGrid((re_lo, re_hi), (im_lo, im_hi), (n_re, n_im), values,
                   sector, domain, family.n_max, failures)


def refine_exceptional_point(
    family: CouplingFamily,
    guess: complex,
    sector: str = "even",
    gap_tol: float = EXCEPTIONAL_GAP_THRESHOLD,
    rel_gap_tol: float = 1e-8,
    level_pair: tuple[int, int] = (-1, -1),
) -> RefineResult:
    """Simplex descent on the minimum gap from an initial guess.

    Classifies the minimum as exceptional when the gap drops below gap_tol,
    or below rel_gap_tol times the local spectral spread (far from the
    origin the eigenvalues, and hence the achievable gap floor, scale with
    |lam|); an avoided crossing (plateau) is a result, not an error.  An
    exactly real guess sits on the ridge between the two conjugate basins,
    so the search is then confined to the real axis, where a Hermitian
    family can only produce avoided crossings.  The reported estimate is
    folded into the upper half-plane (the conjugate point is implied).
    """
    h0s, vs = family.sector_matrices(sector)
    options = {"xatol": 1e-14, "fatol": 1e-15, "maxiter": 4000, "maxfev": 8000}

    if guess.imag == 0.0:
        objective = lambda x: _min_sector_gap(h0s + complex(x[0], 0.0) * vs)
        start = [guess.real]
    else:
        objective = lambda x: _min_sector_gap(h0s + complex(x[0], x[1]) * vs)
        start = [guess.real, guess.imag]
    result = minimize(objective, start, method="Nelder-Mead", options=options)
    # one polish restart; Nelder-Mead stalls on narrow square-root valleys
    result = minimize(objective, result.x, method="Nelder-Mead", options=options)
    loc = complex(result.x[0], result.x[1]) if guess.imag != 0.0 else complex(result.x[0], 0.0)
    gap = float(result.fun)

    z = np.linalg.eigvals(h0s + loc * vs)
    spread = float(np.max(np.abs(z[:, None] - z[None, :]))) if len(z) > 1 else 1.0
    exceptional = gap <= gap_tol or gap <= rel_gap_tol * spread
    estimate = None
    if exceptional and abs(loc.imag) > 0:
        estimate = SingularityEstimate(loc.real, abs(loc.imag), level_pair, "grid_scan")
    return RefineResult(loc, gap, exceptional, estimate)


def sylvester_discriminant(trunc: TruncationSpec, sector: str) -> ResultantPolynomial:
    """Exact resultant of the sector characteristic polynomial and its z-derivative.

    The matrix rows are f, z f, ..., z^(s-2) f followed by f', z f', ...,
    z^(s-1) f' written on the monomial basis 1, z, ..., z^(2s-2); its
    determinant is expanded fraction-free over integer polynomials in lam.
    A degree below s(s-1) is reported via degree_deficit, not an error.
    """
    zc = algebra.sector_char_poly(trunc, sector)
    s = len(zc) - 1
    if s < 2:
        raise ValueError(f"sector block of size {s} has no level pairs (n_max=2 is trivial)")
    fprime = [algebra.poly_trim([c * k for c in zc[k]]) for k in range(1, s + 1)]

    ncols = 2 * s - 1
    rows: list[list[list[int]]] = []
    for shift in range(s - 1):
        row = [[0] for _ in range(ncols)]
        for j, c in enumerate(zc):
            row[j + shift] = list(c)
        rows.append(row)
    for shift in range(s):
        row = [[0] for _ in range(ncols)]
        for j, c in enumerate(fprime):
            row[j + shift] = list(c)
        rows.append(row)

    det = algebra.bareiss_det_poly(rows)
    poly = ResultantPolynomial(det, sector, trunc.n_max)
    if poly.degree_deficit != 0:
        warnings.warn(
            f"resultant degree {poly.degree} below expected {poly.expected_degree} "
            f"(common roots of f and f' beyond simple pairs)",
            RuntimeWarning,
        )
    return poly


def strong_weak_map(point: complex, direction: str = "to_weak") -> complex:
    """Inversion lam <-> lam_tilde = 1/lam between the two coupling planes."""
    if direction not in ("to_weak", "to_strong"):
        raise ValueError(f"direction must be 'to_weak' or 'to_strong', got {direction!r}")
    if point == 0:
        raise ZeroDivisionError("zero has no image under the inversion map")
    return 1.0 / point


def lambda_to_sphere(lam: complex) -> tuple[float, float]:
    """(longitude, latitude) of lam under inverse stereographic projection.

    lam = 0 maps to the south pole, infinity to the north pole, and the
    positive real axis to the zero meridian.
    """
    r2 = abs(lam) ** 2
    z = (r2 - 1.0) / (r2 + 1.0)
    lat = np.arcsin(z)
    lon = np.arctan2(lam.imag, lam.real)
    return float(lon), float(lat)


def mollweide_project(lon: float, lat: float, tol: float = 1e-10) -> tuple[float, float]:
    """Equal-area Mollweide coordinates from longitude/latitude (radians).

    Solves 2 theta + sin 2 theta = pi sin(lat) by Newton iteration to tol;
    raises if the iteration stalls (it converges in a handful of steps away
    from the poles, where the closed form takes over).
    """
    if abs(abs(lat) - np.pi / 2) < 1e-12:
        theta = np.sign(lat) * np.pi / 2
    else:
        theta = lat
        target = np.pi * np.sin(lat)
        for _ in range(100):
            f = 2 * theta + np.sin(2 * theta) - target
            df = 2 + 2 * np.cos(2 * theta)
            if abs(df) < 1e-14:
                theta = np.sign(lat) * np.pi / 2
                break
            step = f / df
            theta -= step
            if abs(step) < tol:
                break
        else:
            raise RuntimeError(f"Mollweide iteration failed at lon={lon}, lat={lat}")
    x = 2.0 * np.sqrt(2.0) / np.pi * lon * np.cos(theta)
    y = np.sqrt(2.0) * np.sin(theta)
    return float(x), float(y)


def riemann_export(source) -> list[tuple]:
    """Project a GapGrid or a point set onto Mollweide plot coordinates.

    For a GapGrid the rows are (re, im, gap, x, y); for an iterable of
    complex points they are (re, im, x, y).  Points at the origin map to
    the bottom pole image (0, -sqrt(2)).
    """
    rows = []
    if isinstance(source, GapGrid):
        for re, im, gap in source.points():
            lam = complex(re, im)
            x, y = mollweide_project(*lambda_to_sphere(lam))
            rows.append((re, im, gap, x, y))
    else:
        for lam in source:
            lam = complex(lam)
            x, y = mollweide_project(*lambda_to_sphere(lam))
            rows.append((lam.real, lam.imag, x, y))
    return rows
