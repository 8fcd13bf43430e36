from fractions import Fraction

import numpy as np
import pytest

from phi4trunc import (
    TruncationSpec,
    evolve_projector_method,
    exact_amplitude,
    perturbed_projector,
    single_site_hamiltonian,
    weak_series,
)

F = Fraction


def test_p0_matrix_matches_closed_form_polynomials():
    # standard-basis (0,0) entry: (-1701 l^4 + 432 l^3 - 72 l^2 + 64)/64
    ser, _ = perturbed_projector(TruncationSpec(4), 0, order=4)
    assert [ser.entry_exact(m, 0, 0) for m in range(5)] == \
        [F(1), F(0), F(-9, 8), F(27, 4), F(-1701, 64)]
    # (0,2) standard entry is (3 l/(8 sqrt2))(27 l^3 - 27 l^2 + 12 l - 4);
    # the weighted basis absorbs the sqrt2, leaving (3 l/8)(...)
    assert [ser.entry_exact(m, 0, 2) for m in range(5)] == \
        [F(0), F(-3, 2), F(9, 2), F(-81, 8), F(81, 8)]
    # (2,2) entry: (9/64) l^2 (189 l^2 - 48 l + 8)
    assert [ser.entry_exact(m, 2, 2) for m in range(5)] == \
        [F(0), F(0), F(9, 8), F(-27, 4), F(1701, 64)]
    # odd rows and columns vanish identically
    for m in range(5):
        for j in (1, 3):
            assert all(ser.entry_exact(m, j, k) == 0 for k in range(4))
            assert all(ser.entry_exact(m, k, j) == 0 for k in range(4))


def test_p2_is_parity_partner_of_p0():
    s0, _ = perturbed_projector(TruncationSpec(4), 0, order=4)
    s2, _ = perturbed_projector(TruncationSpec(4), 2, order=4)
    for m in range(1, 5):
        assert s2.entry_exact(m, 2, 0) == -s0.entry_exact(m, 2, 0)
    assert [s2.entry_exact(m, 0, 0) for m in range(5)] == \
        [F(0), F(0), F(9, 8), F(-27, 4), F(1701, 64)]


def test_successive_approximations_at_lambda_01():
    trunc = TruncationSpec(4)
    e_sums = weak_series(trunc, 0, max_order=4).partial_sums(F(1, 10))
    assert [float(s) for s in e_sums] == pytest.approx(
        [0.5, 0.575, 0.5525, 0.55925, 0.557478], abs=5e-7)
    e2_sums = weak_series(trunc, 2, max_order=4).partial_sums(F(1, 10))
    assert [float(s) for s in e2_sums] == pytest.approx(
        [2.5, 3.175, 3.1975, 3.19075, 3.19252], abs=5e-6)
    ser, _ = perturbed_projector(trunc, 0, order=4)
    sums, acc = [], 0.0
    for m in range(5):
        acc += ser.coefficient_matrix(m)[2, 0] * 0.1**m
        sums.append(acc)
    assert sums == pytest.approx([0.0, -0.106066, -0.0742462, -0.0814057, -0.0806897],
                                 abs=5e-7)


def test_order_zero_is_unperturbed_projector():
    ser, value = perturbed_projector(TruncationSpec(8), 3, order=0, lam=0.05,
                                     check_convergence=False)
    expect = np.zeros((8, 8))
    expect[3, 3] = 1.0
    assert np.array_equal(ser.coefficient_matrix(0), expect)
    assert np.array_equal(value, expect)


@pytest.mark.parametrize("n_max", [4, 8])
def test_projector_completeness_every_order(n_max):
    # exact statement: the weighted-basis rational coefficient matrices of
    # all levels sum to the identity at order 0 and to zero at every higher
    # order, with no tolerance at all
    trunc = TruncationSpec(n_max)
    order = 3
    totals = [[[F(0)] * n_max for _ in range(n_max)] for _ in range(order + 1)]
    for level in range(n_max):
        ser, _ = perturbed_projector(trunc, level, order=order)
        for m in range(order + 1):
            for i in range(n_max):
                for j in range(n_max):
                    totals[m][i][j] += ser.entry_exact(m, i, j)
    assert all(totals[0][i][j] == (1 if i == j else 0)
               for i in range(n_max) for j in range(n_max))
    for m in range(1, order + 1):
        assert all(totals[m][i][j] == 0 for i in range(n_max) for j in range(n_max))


def test_projector_idempotent_order_by_order():
    ser, _ = perturbed_projector(TruncationSpec(4), 0, order=4)
    w = ser.weighted
    n = 4
    for m in range(5):
        conv = [[F(0)] * n for _ in range(n)]
        for a in range(m + 1):
            pa, pb = w[a], w[m - a]
            for i in range(n):
                for j in range(n):
                    conv[i][j] += sum(pa[i][k] * pb[k][j] for k in range(n))
        assert all(conv[i][j] == w[m][i][j] for i in range(n) for j in range(n))


def test_convergence_warning_outside_radius():
    with pytest.warns(RuntimeWarning, match="radius"):
        perturbed_projector(TruncationSpec(4), 0, order=2, lam=0.3)


def test_evolution_amplitude_at_t_zero():
    trunc = TruncationSpec(4)
    for order in (0, 2, 4):
        trace = evolve_projector_method(trunc, order, 0.1, [0.0], 0, 2,
                                        check_convergence=False)
        assert abs(trace.amplitude[0]) == 0.0
        same = evolve_projector_method(trunc, order, 0.1, [0.0], 2, 2,
                                       check_convergence=False)
        assert abs(same.amplitude[0] - 1.0) <= 1e-15


def test_harmonic_limit_no_transition():
    trace = evolve_projector_method(TruncationSpec(4), 0, 0.0, np.linspace(0, 5, 11), 0, 2,
                                    check_convergence=False)
    assert np.max(trace.probability) == 0.0


def test_opposite_parity_amplitude_is_zero():
    trace = evolve_projector_method(TruncationSpec(4), 4, 0.1, np.linspace(0, 5, 6), 0, 1,
                                    check_convergence=False)
    assert np.max(np.abs(trace.amplitude)) == 0.0


def test_order4_transition_probability_close_to_exact():
    trunc = TruncationSpec(4)
    t = np.linspace(0.0, 20.0, 401)
    trace = evolve_projector_method(trunc, 4, 0.1, t, 0, 2, check_convergence=False)
    exact = np.abs(exact_amplitude(single_site_hamiltonian(trunc, 0.1), t, 0, 2)) ** 2
    assert np.max(np.abs(trace.probability - exact)) <= 1e-3


def test_successive_orders_converge():
    trunc = TruncationSpec(4)
    t = np.linspace(0.0, 20.0, 201)
    exact = np.abs(exact_amplitude(single_site_hamiltonian(trunc, 0.1), t, 0, 2)) ** 2
    devs = []
    for order in (1, 2, 3, 4):
        trace = evolve_projector_method(trunc, order, 0.1, t, 0, 2, check_convergence=False)
        devs.append(np.max(np.abs(trace.probability - exact)))
    assert devs[3] < devs[1] < devs[0]


def test_probability_bounded_uniformly_in_time():
    trunc = TruncationSpec(4)
    t = np.linspace(0.0, 200.0, 2001)
    trace = evolve_projector_method(trunc, 4, 0.1, t, 0, 2, check_convergence=False)
    assert np.max(trace.probability) <= 1.0 + 1e-4
