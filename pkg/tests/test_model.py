import numpy as np
import pytest

from granuflow.model import (DegenerateEigenvectorError, DomainBox, State,
                             eigenvalues, eigenvectors, flux, flux_conservative,
                             gnl_indicator, jacobian)


def test_flux_examples():
    assert flux(State(0.0, 0.9)) == (0.0, 0.0)
    assert flux(State(0.5, 1.0)) == (0.5, 0.0)
    f1, f2 = flux(State(0.02, 1.1))
    assert abs(f1 - 0.022) < 1e-15 and abs(f2 - 0.002) < 1e-15


def test_conservative_flux_sign():
    # first equation reads h_t - (hp)_x = source
    g1, g2 = flux_conservative(0.02, 1.1)
    assert abs(g1 + 0.022) < 1e-15 and abs(g2 - 0.002) < 1e-15


def test_eigenvalues_on_degenerate_lines():
    h = np.linspace(0, 0.05, 11)
    l1, l2 = eigenvalues(h, np.ones_like(h))
    assert np.max(np.abs(l1 + 1.0)) < 5e-16
    assert np.max(np.abs(l2 - h)) < 5e-16
    p = np.linspace(0.9, 1.1, 11)
    l1, l2 = eigenvalues(np.zeros_like(p), p)
    assert np.max(np.abs(l1 + p)) == 0.0
    assert np.max(np.abs(l2)) == 0.0
    l1, l2 = eigenvalues(0.02, 1.0)
    assert abs(l1 + 1.0) < 5e-16 and abs(l2 - 0.02) < 5e-16


def test_strict_hyperbolicity_on_box(box):
    rng = np.random.default_rng(1)
    h, p = box.sample(rng, 10 ** 5)
    l1, l2 = eigenvalues(h, p)
    assert np.all(l1 < -box.p0 / 2)
    assert np.all(l2 >= 0)


def test_eigenvector_residual(box):
    rng = np.random.default_rng(2)
    h, p = box.sample(rng, 10 ** 5)
    l1, l2 = eigenvalues(h, p)
    r1, r2 = eigenvectors(h, p)
    # A r = lambda r, componentwise with A = [[-p, -h], [p-1, h]]
    for lam, r in ((l1, r1), (l2, r2)):
        res1 = -p * r[0] - h * r[1] - lam * r[0]
        res2 = (p - 1) * r[0] + h * r[1] - lam * r[1]
        norm = np.hypot(r[0], r[1])
        assert np.max(np.abs(res1) / norm) < 1e-12
        assert np.max(np.abs(res2) / norm) < 1e-12


def test_eigenvectors_special_points():
    r1, _ = eigenvectors(State(0.3, 1.0))
    assert r1[0] == 1.0 and abs(r1[1]) < 1e-15
    _, r2 = eigenvectors(State(0.0, 1.05))
    assert r2[0] == 0.0 and r2[1] == 1.0


def test_eigenvector_degenerate_guard():
    with pytest.raises(DegenerateEigenvectorError):
        eigenvectors(State(0.0, 0.0))   # lambda1 = 0 outside the open domain


def test_gnl_indicator_signs(box):
    assert gnl_indicator(State(0.3, 1.0), 1) == 0.0
    assert gnl_indicator(State(0.0, 0.95), 2) == 0.0
    val = gnl_indicator(State(0.02, 1.1), 1)
    assert val > 0
    assert abs(val - 2 * 0.1 / 1.1) < 0.01
    rng = np.random.default_rng(3)
    h, p = box.sample(rng, 20000)
    g1 = gnl_indicator((h, p), 1)
    g2 = gnl_indicator((h, p), 2)
    assert np.all(np.sign(g1) == np.sign(p - 1))
    assert np.all((g2 < 0) == (h > 0))


def test_domain_box_validation():
    DomainBox(0.05, 0.1)
    with pytest.raises(ValueError):
        DomainBox(0.2, 0.1)       # delta0 too large
    with pytest.raises(ValueError):
        DomainBox(0.05, 0.2)      # delta_p too large


def test_jacobian_matches_eigen():
    A = jacobian(0.03, 1.05)
    l1, l2 = eigenvalues(0.03, 1.05)
    tr, det = A[0, 0] + A[1, 1], np.linalg.det(A)
    assert abs(l1 * l2 - det) < 1e-15
    assert abs(l1 + l2 - tr) < 1e-15
