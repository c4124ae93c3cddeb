import numpy as np
import pytest

from extharper import (
    Driving,
    bond_coefficients,
    build_driving,
    build_hamiltonian,
    fibonacci_approximant,
    model_point,
    zero_bond_site,
)


def test_fibonacci_recurrence_base():
    a = fibonacci_approximant(2)
    assert (a.f_m, a.f_m_minus_1) == (2, 1)
    assert a.residue == 2


def test_fibonacci_known_sizes():
    assert fibonacci_approximant(15).f_m == 987
    assert fibonacci_approximant(17).f_m == 2584
    assert fibonacci_approximant(16).f_m == 1597


def test_fibonacci_recurrence_holds():
    for m in range(4, 20):
        a, b, c = (fibonacci_approximant(k) for k in (m - 2, m - 1, m))
        assert c.f_m == a.f_m + b.f_m
        assert c.f_m_minus_1 == b.f_m
        assert c.residue == m % 3
        assert 0.0 < c.flux < 1.0


def test_fibonacci_rejects_small_index():
    with pytest.raises(ValueError):
        fibonacci_approximant(1)


def test_fibonacci_rejects_huge_index():
    with pytest.raises(OverflowError):
        fibonacci_approximant(80)


def test_model_point_validation():
    with pytest.raises(ValueError):
        model_point(-0.5, 0.5, 9)
    with pytest.raises(ValueError):
        model_point(1.0, float("nan"), 9)
    p = model_point(1.0, 0.5, 9, ky=2.0 + 4.0 * np.pi)
    assert 0.0 <= p.ky < 2.0 * np.pi
    assert p.ky == pytest.approx(2.0, abs=1e-12)


def test_zero_parameters_gives_bare_ring():
    h = build_hamiltonian(model_point(0.0, 0.0, 6))
    n = h.shape[0]
    assert np.all(np.diag(h) == 0.0)
    off = h[np.arange(n - 1), np.arange(1, n)]
    assert np.all(off == -1.0)
    assert h[n - 1, 0] == -1.0 and h[0, n - 1] == -1.0


def test_diagonal_entry_direct():
    h = build_hamiltonian(model_point(2.0, 0.0, 6))
    assert h[0, 0] == pytest.approx(-2.0, abs=0.0)


def test_forced_zero_bond_m4():
    # phi = 3/5, mu = 1: the n=2 -> 3 hop is -(1 + exp(3*pi*i)) = 0
    p = model_point(1.0, 1.0, 4)
    h = build_hamiltonian(p)
    assert abs(h[2, 3]) < 1e-15
    assert zero_bond_site(p) == 2


def test_hermitian_exact():
    for lam, mu, ky in ((1.3, 0.7, 0.0), (2.5, 1.2, 1.1), (0.0, 0.9, 5.7)):
        for periodic in (True, False):
            h = build_hamiltonian(model_point(lam, mu, 9, ky), periodic=periodic)
            assert np.array_equal(h, h.conj().T)


def test_row_structure():
    h = build_hamiltonian(model_point(1.3, 0.7, 6))
    assert np.all((h != 0).sum(axis=1) == 3)
    assert np.all((h != 0).sum(axis=0) == 3)


def test_open_boundary_has_no_corners():
    h = build_hamiltonian(model_point(1.3, 0.7, 6), periodic=False)
    n = h.shape[0]
    assert h[n - 1, 0] == 0.0 and h[0, n - 1] == 0.0
    assert (h != 0).sum() == n + 2 * (n - 1)


def test_harper_limit_real_symmetric():
    h = build_hamiltonian(model_point(1.7, 0.0, 9))
    assert np.all(h.imag == 0.0)
    assert np.array_equal(h, h.T)


def test_hamiltonian_linear_in_parameters():
    for m, ky in ((6, 0.0), (9, 2.3)):
        bare = build_hamiltonian(model_point(0.0, 0.0, m, ky))
        h_lam = build_driving(model_point(0.0, 0.0, m, ky), Driving.LAMBDA)
        h_mu = build_driving(model_point(0.0, 0.0, m, ky), Driving.MU)
        for lam, mu in ((1.0, 0.5), (2.7, 1.9), (0.0, 1.0)):
            direct = build_hamiltonian(model_point(lam, mu, m, ky))
            assert np.array_equal(direct, bare + lam * h_lam + mu * h_mu)
    # N = 2 accumulates two bonds per entry; the two routes round in a
    # different order there, so exactness relaxes to the last ulp
    bare = build_hamiltonian(model_point(0.0, 0.0, 2))
    h_lam = build_driving(model_point(0.0, 0.0, 2), Driving.LAMBDA)
    h_mu = build_driving(model_point(0.0, 0.0, 2), Driving.MU)
    direct = build_hamiltonian(model_point(2.7, 1.9, 2))
    np.testing.assert_allclose(direct, bare + 2.7 * h_lam + 1.9 * h_mu, atol=1e-14)


def test_driving_lambda_is_bare_cosine_diagonal():
    d = build_driving(model_point(3.0, 2.0, 6), Driving.LAMBDA)
    assert d[0, 0] == -1.0
    assert np.all(d[~np.eye(d.shape[0], dtype=bool)] == 0.0)


def test_driving_mu_entry_m4():
    d = build_driving(model_point(1.0, 1.0, 4), Driving.MU)
    assert d[2, 3] == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.diag(d) == 0.0)


def test_driving_rejects_bad_kind():
    with pytest.raises(TypeError):
        build_driving(model_point(1.0, 1.0, 4), "lambda")


def test_zero_bond_law_over_sizes():
    for m in range(2, 18):
        p = model_point(1.0, 1.0, m)
        site = zero_bond_site(p)
        if m % 3 == 1:
            assert site == (p.size - 1) // 2
        else:
            assert site is None


def test_zero_bond_site_m16():
    p = model_point(1.0, 1.0, 16)
    assert p.size == 1597
    assert zero_bond_site(p) == 798


def test_zero_bond_needs_unit_mu():
    assert zero_bond_site(model_point(1.0, 0.5, 4)) is None
    assert zero_bond_site(model_point(1.0, 0.5, 16)) is None


def test_bond_coefficients_magnitude_floor():
    # |1 + mu e^{i theta}| >= |1 - mu|
    p = model_point(0.0, 0.7, 9)
    assert np.abs(bond_coefficients(p)).min() >= 0.3 - 1e-12
