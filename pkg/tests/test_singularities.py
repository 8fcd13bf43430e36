import numpy as np
import pytest

from phi4trunc import (
    TruncationSpec,
    anharmonic_family,
    gap_scan,
    refine_exceptional_point,
    strong_coupling_family,
    strong_weak_map,
    sylvester_discriminant,
    riemann_export,
)
from phi4trunc.singularities import lambda_to_sphere, mollweide_project

EP4_EVEN = -(2 - 1j * np.sqrt(2)) / 9
EP4_ODD = 1j * np.sqrt(2.0 / 27.0)

# reference even-sector resultant for n_max=8 (inner bracket, 2^60 outside)
N8_BRACKET = [36864, 3698688, 194833408, 6739041792, 157100611648, 2408867895168,
              23876641218976, 156815960599872, 729625498514388, 2315977875333360,
              4112778331991700, 2446821666009000, 828875955639375]


def test_gap_scan_finds_nmax4_even_minima():
    fam = anharmonic_family(TruncationSpec(4))
    grid = gap_scan(fam, ((-0.4, 0.1), (-0.3, 0.3)), (101, 121), "even")
    point, gap = grid.min_point()
    assert min(abs(point - EP4_EVEN), abs(point - np.conj(EP4_EVEN))) < 0.01
    # the gap rises like sqrt(distance), so a grid-spacing miss still reads ~0.2
    assert gap < 0.3
    assert grid.failures == 0


def test_gap_scan_conjugation_symmetry():
    fam = anharmonic_family(TruncationSpec(8))
    grid = gap_scan(fam, ((-0.08, -0.05), (-0.02, 0.02)), (21, 21), "even")
    vals = grid.values
    assert np.max(np.abs(vals - vals[::-1, :])) <= 1e-10


def test_gap_scan_threaded_matches_serial():
    fam = anharmonic_family(TruncationSpec(4))
    region = ((-0.3, 0.0), (0.0, 0.25))
    serial = gap_scan(fam, region, (31, 31), "even", workers=1)
    threaded = gap_scan(fam, region, (31, 31), "even", workers=4)
    assert np.array_equal(serial.values, threaded.values)


def test_refine_even_and_odd_nmax4():
    fam = anharmonic_family(TruncationSpec(4))
    even = refine_exceptional_point(fam, -0.2 + 0.15j, "even")
    assert even.exceptional
    assert abs(even.location - EP4_EVEN) <= 1e-6
    odd = refine_exceptional_point(fam, 0.02 + 0.25j, "odd")
    assert odd.exceptional
    assert abs(odd.location - EP4_ODD) <= 1e-6
    assert odd.estimate is not None and odd.estimate.im > 0


def test_refine_nmax8_ground_pair_direct_search_values():
    fam = anharmonic_family(TruncationSpec(8))
    res = refine_exceptional_point(fam, -0.065 + 0.004j, "even")
    assert res.exceptional
    assert abs(res.location.real - (-0.06473)) <= 1e-4
    assert abs(abs(res.location.imag) - 0.00391) <= 1e-4


def test_real_axis_guess_classified_avoided():
    fam = anharmonic_family(TruncationSpec(4))
    res = refine_exceptional_point(fam, 0.3 + 0.0j, "even")
    assert not res.exceptional
    assert res.gap > 1e-3
    assert res.location.imag == 0.0


def test_resultant_nmax4_even_exact():
    poly = sylvester_discriminant(TruncationSpec(4), "even")
    assert poly.coeffs == [-8192 * 2, -8192 * 12, -8192 * 27]
    roots = sorted(poly.roots(), key=lambda z: z.imag)
    assert abs(roots[1] - EP4_EVEN) <= 1e-10
    assert poly.degree_deficit == 0


def test_resultant_nmax4_odd_exact_roots():
    poly = sylvester_discriminant(TruncationSpec(4), "odd")
    roots = sorted(poly.roots(), key=lambda z: z.imag)
    assert abs(roots[1] - EP4_ODD) <= 1e-10
    assert abs(roots[0] + EP4_ODD) <= 1e-10


def test_resultant_nmax8_even_matches_reference_integers():
    poly = sylvester_discriminant(TruncationSpec(8), "even")
    assert poly.coeffs == [(1 << 60) * c for c in N8_BRACKET]
    assert poly.degree == 12 and poly.degree_deficit == 0


@pytest.mark.parametrize("sector", ["even", "odd"])
@pytest.mark.parametrize("n_max", [4, 8])
def test_resultant_roots_match_refined_points(n_max, sector):
    trunc = TruncationSpec(n_max)
    fam = anharmonic_family(trunc)
    poly = sylvester_discriminant(trunc, sector)
    roots = [z for z in poly.roots() if z.imag > -1e-12]
    for root in roots:
        seed = complex(root.real, root.imag if root.imag > 1e-9 else 1e-4)
        res = refine_exceptional_point(fam, seed, sector)
        assert res.exceptional, f"root {root} did not refine to an exceptional point"
        target = complex(root.real, abs(root.imag))
        found = complex(res.location.real, abs(res.location.imag))
        assert abs(found - target) <= 1e-6


def test_nmax16_inner_pairs_consistent_with_level_radii():
    # Ten conjugate pairs live inside |lam| < 0.026; the seven distinct
    # level radii of the n_max=16 even sector each correspond to one of
    # them (the adjacent-level coalescences).  The 0.0191 entry is the
    # paper's least accurate, hence the loose matching tolerance.
    poly = sylvester_discriminant(TruncationSpec(16), "even")
    assert poly.degree == 56 and poly.degree_deficit == 0
    inner = [z for z in poly.roots() if abs(z) < 0.026 and z.imag > 0]
    assert len(inner) >= 7
    distinct_radii = [0.0245, 0.0205, 0.0191, 0.0144, 0.0113, 0.00864, 0.00621]
    for target in distinct_radii:
        best = min(abs(abs(z) - target) / target for z in inner)
        assert best <= 0.13, f"no singularity pair within 13% of radius {target}"
    # the ground pair barely leaves the real axis
    ground = max(inner, key=abs)
    assert abs(ground) == pytest.approx(0.0245, abs=2e-4)
    assert 0 < ground.imag < 5e-5


def test_no_pinching_on_positive_real_axis_nmax8():
    fam = anharmonic_family(TruncationSpec(8))
    for sector in ("even", "odd"):
        grid = gap_scan(fam, ((1e-3, 1.0), (0.0, 0.0)), (200, 1), sector)
        assert np.nanmin(grid.values) > 1e-5


def test_strong_weak_map_properties():
    assert strong_weak_map(1.0) == 1.0
    z = -8.8 + 29.45j
    assert abs(strong_weak_map(strong_weak_map(z)) - z) <= 1e-12
    mapped = strong_weak_map(z)
    assert mapped == pytest.approx(-0.009315 - 0.031173j, abs=1e-5)
    with pytest.raises(ZeroDivisionError):
        strong_weak_map(0.0)
    with pytest.raises(ValueError):
        strong_weak_map(1.0, "sideways")


def test_gap_grid_domain_tags():
    trunc = TruncationSpec(4)
    weak = gap_scan(anharmonic_family(trunc), ((0.0, 0.1), (0.0, 0.1)), (3, 3), "even")
    assert weak.domain == "lambda"
    strong = gap_scan(strong_coupling_family(trunc), ((0.0, 0.1), (0.0, 0.1)), (3, 3), "even")
    assert strong.domain == "lambda_tilde"


def test_strong_family_shares_inverted_singularities():
    trunc = TruncationSpec(4)
    fam = strong_coupling_family(trunc)
    target = 1.0 / EP4_EVEN
    res = refine_exceptional_point(fam, target * (1 + 1e-3), "even")
    assert res.exceptional
    assert abs(res.location - target) <= 1e-5 * abs(target)


def test_sphere_projection_orientation():
    lon, lat = lambda_to_sphere(0.0 + 0j)
    assert lat == pytest.approx(-np.pi / 2)
    lon, lat = lambda_to_sphere(1e12 + 0j)
    assert lat == pytest.approx(np.pi / 2, abs=1e-6)
    lon, lat = lambda_to_sphere(0.7 + 0j)
    assert lon == 0.0
    lon, lat = lambda_to_sphere(1.0 + 0j)
    assert lat == pytest.approx(0.0)


def test_mollweide_anchor_points():
    x, y = mollweide_project(0.0, -np.pi / 2)
    assert (x, y) == pytest.approx((0.0, -np.sqrt(2)))
    x, y = mollweide_project(0.0, 0.0)
    assert (x, y) == pytest.approx((0.0, 0.0))


def test_riemann_export_positive_axis_and_mirror():
    rows = riemann_export([0.5 + 0j, 2.0 + 0j, 10.0 + 0j])
    assert all(abs(r[2]) <= 1e-12 for r in rows)  # x = 0 on the central line
    rows = riemann_export([1.0 + 0.5j, 1.0 - 0.5j])
    (x1, y1), (x2, y2) = rows[0][2:], rows[1][2:]
    assert x1 == pytest.approx(-x2) and y1 == pytest.approx(y2)
    rows = riemann_export([0.0 + 0j])
    assert rows[0][2:] == pytest.approx((0.0, -np.sqrt(2)))


def test_riemann_export_of_grid_includes_gap_column():
    fam = anharmonic_family(TruncationSpec(4))
    grid = gap_scan(fam, ((0.1, 0.5), (0.1, 0.3)), (5, 4), "even")
    rows = riemann_export(grid)
    assert len(rows) == 20
    assert all(len(r) == 5 for r in rows)
