import warnings

import numpy as np
import pytest

from bergman_hankel.errors import DomainError, PreconditionError, TruncationError
from bergman_hankel.geometry import pseudo_disc
from bergman_hankel.kernel import (AnalyticPoly, KernelSeries, ProjectionWarning, SymbolField,
                                   atomic_function, hankel_apply, hankel_norm, kernel_deriv_norm,
                                   kernel_deriv_norm_proxy, kernel_eval, kernel_norm, kernel_series,
                                   lp_norm, poly_symbol, project, random_polynomials,
                                   rule_for_degree)
from bergman_hankel.quadrature import disc_integral, rule_for_disc, unit_disc_rule
from bergman_hankel.weights import power

ZBAR = SymbolField(np.conj, lambda z: np.ones_like(z), "zbar")


def grid_points(n=20, r=0.9):
    rad = np.linspace(0, r, n)
    ang = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return (rad[:, None] * np.exp(1j * ang[None, :])).ravel()


@pytest.mark.parametrize("alpha", [0, 1, 2])
def test_kernel_closed_form(alpha):
    K = kernel_series(power(alpha), 1600)
    z = grid_points()[::7]
    zeta = grid_points()[::5][:len(z)]
    exact = 1.0 / (1.0 - z[:, None] * np.conj(zeta[None, :])) ** (alpha + 2)
    got = K(z[:, None], zeta[None, :], 1e-13)
    assert np.max(np.abs(got - exact) / np.abs(exact)) <= 1e-8


def test_kappa_power_family():
    K = KernelSeries(power(1), 50)
    n = np.arange(51)
    assert np.allclose(K.kappa[:51], (n + 1) * (n + 2) / 2, rtol=1e-11)
    assert np.allclose(KernelSeries(power(0), 50).kappa[:51], n + 1, rtol=1e-12)
    assert np.all(np.diff(KernelSeries(power(2.5), 80).kappa) > 0)


def test_kernel_examples():
    K = kernel_series(power(0))
    assert kernel_eval(K, 0, 0) == pytest.approx(1.0, abs=1e-13)
    for w in [power(0.5), power(3)]:
        K = kernel_series(w)
        for z in [0.1, -0.7j, 0.95]:
            assert K(z, 0) == pytest.approx(K.kappa[0], rel=1e-14)


def test_kernel_hermitian():
    K = kernel_series(power(1), 1600)
    z = grid_points(12, 0.95)
    B = K(z[:, None], z[None, :], 1e-14)
    assert np.max(np.abs(B - np.conj(B.T))) <= 1e-12 * np.max(np.abs(B))


def test_kernel_truncation_errors():
    K = KernelSeries(power(0), 20)
    with pytest.raises(TruncationError) as exc:
        K(0.9, 0.9)
    assert exc.value.best > 0 and exc.value.bound > 0
    with pytest.raises(DomainError):
        kernel_series(power(0))(0.999, 0.999)


def test_kernel_deriv_closed_form():
    K = kernel_series(power(0), 1600)
    z, w = 0.3 + 0.4j, -0.5 + 0.2j
    # d/dz (1 - z conj w)^-2 = 2 conj(w) (1 - z conj w)^-3
    assert K(z, w, deriv=1) == pytest.approx(2 * np.conj(w) / (1 - z * np.conj(w)) ** 3, rel=1e-10)


@pytest.mark.parametrize("alpha", [0, 1])
def test_reproducing_identity(alpha):
    w = power(alpha)
    K = kernel_series(w, 1600)
    for z in [0, 0.5, 0.9j, -0.9]:
        atom = K.atom(z, 1e-14)
        rule = rule_for_degree(atom.degree)
        norm2 = lp_norm(atom.on_rule(rule), rule, 2, w) ** 2
        assert abs(norm2 - K.diag(z)) / K.diag(z) <= 1e-4


def test_kernel_norm_examples():
    w = power(0)
    val, proxy = kernel_norm(w, w, 2, 0)
    assert val == pytest.approx(1.0, rel=1e-10) and proxy > 0
    val, _ = kernel_norm(w, w, 2, 0.5)
    assert val == pytest.approx(4 / 3, rel=1e-8)


def test_kernel_norm_proxy_band():
    # measured: 1.08 at z = 0 rising to 11.3 at 0.95; the asymptotic ratio is about 16
    ratios = [np.divide(*kernel_norm(power(1), power(0), 2, z)) for z in [0, 0.5, 0.8, 0.95]]
    assert max(ratios) / min(ratios) <= 20
    assert np.all(np.diff(ratios) > 0)


def test_deriv_proxy_examples():
    w = power(0)
    assert kernel_deriv_norm_proxy(w, w, 2, 0, 0) == 0
    for x in [0.3, 0.8]:
        exact = np.sqrt(0.25 * ((1 - x) ** -4 - 1))
        assert kernel_deriv_norm_proxy(w, w, 2, 1, x) == pytest.approx(exact, rel=1e-8)


def test_deriv_proxy_band_against_quadrature():
    w = power(1)
    for n in [0, 1]:
        r = [kernel_deriv_norm(w, w, 2, n, x) / kernel_deriv_norm_proxy(w, w, 2, n, x)
             for x in [0.5, 0.7, 0.9]]
        assert max(r) / min(r) <= 5


def test_deriv_proxy_n0_matches_kernel_norm_proxy():
    w = power(1)
    r = [kernel_deriv_norm_proxy(w, w, 2, 0, x) / kernel_norm(w, w, 2, x)[1] for x in [0.5, 0.8, 0.95]]
    assert max(r) / min(r) <= 5


def test_project_examples():
    w = power(0)
    p = project(w, lambda z: z ** 2, 10)
    expect = np.zeros(11)
    expect[2] = 1
    assert np.max(np.abs(p.coeffs - expect)) <= 1e-10
    for om in [power(0), power(1.5)]:
        assert np.max(np.abs(project(om, np.conj, 12).coeffs)) <= 1e-12
    c = project(w, lambda z: np.abs(z) ** 2, 6).coeffs
    assert c[0] == pytest.approx(0.5, abs=1e-12) and np.max(np.abs(c[1:])) <= 1e-12


def test_project_idempotent_and_self_adjoint(rng):
    w = power(1)
    d = 12
    rule = rule_for_degree(d + 8)
    F = lambda z: np.exp(np.conj(z)) * (1 + z) ** 3 + np.abs(z) ** 2
    G = lambda z: np.cos(z * np.conj(z)) + np.conj(z) ** 2 * z
    P1 = project(w, F, d, rule)
    P2 = project(w, P1.on_rule(rule), d, rule)
    assert np.max(np.abs(P1.coeffs - P2.coeffs)) <= 1e-8
    PG = project(w, G, d, rule)
    lhs = disc_integral(P1.on_rule(rule) * np.conj(G(rule.nodes)), rule, w)
    rhs = disc_integral(F(rule.nodes) * np.conj(PG.on_rule(rule)), rule, w)
    assert abs(lhs - rhs) <= 1e-8


def test_project_warns_on_alias():
    rule = unit_disc_rule(n_angular=16)
    with pytest.warns(ProjectionWarning):
        project(power(0), np.conj, 10, rule)


def test_hankel_examples():
    w = power(0)
    z = grid_points(10, 0.9)
    poly = AnalyticPoly(np.array([1, 2, -1j, 0.5]))
    g = AnalyticPoly(np.array([0.3, 1j]))
    H = hankel_apply(w, poly_symbol(poly), g, 10)
    assert np.max(np.abs(H(z))) <= 1e-8
    H = hankel_apply(w, ZBAR, 1.0, 10)
    assert np.allclose(H(z), np.conj(z), atol=1e-12)
    H = hankel_apply(w, ZBAR, AnalyticPoly(np.array([0, 1.0])), 10)
    assert np.allclose(H(z), np.abs(z) ** 2 - 0.5, atol=1e-12)


@pytest.mark.parametrize("n", range(6))
def test_hankel_norm_closed_form(n):
    # ||zbar z^n - n/(n+1) z^(n-1)||^2 = 1/(n+2) - n/(n+1)^2
    g = AnalyticPoly(np.eye(n + 1)[n])
    H = hankel_apply(power(0), ZBAR, g, 20)
    rule = rule_for_degree(24)
    assert hankel_norm(H, rule, 2) ** 2 == pytest.approx(1 / (n + 2) - n / (n + 1) ** 2, rel=1e-10)


def test_hankel_annihilates_analytic(rng):
    w = power(1)
    rule = rule_for_degree(30)
    for _ in range(3):
        f = AnalyticPoly(rng.standard_normal(4) + 1j * rng.standard_normal(4))
        g = AnalyticPoly(rng.standard_normal(5) + 1j * rng.standard_normal(5))
        H = hankel_apply(w, poly_symbol(f), g, 12, rule)
        fg = np.max(np.abs(f(rule.nodes) * g(rule.nodes)))
        assert np.max(np.abs(H.on_rule(rule))) <= 1e-8 * fg


def test_kernel_local_band():
    # |B_a(z)| / B_a(a) over Delta(a, tanh(r/2)) stays in a fixed band
    K = kernel_series(power(1), 1600)
    lo, hi = np.inf, 0
    for a in [0, 0.5, 0.8j, -0.95]:
        rule = rule_for_disc(pseudo_disc(a, np.tanh(0.5)), 8, 16)
        ratio = np.abs(K(rule.nodes, a)) / K.diag(a)
        lo, hi = min(lo, ratio.min()), max(hi, ratio.max())
    assert 0.1 < lo <= hi < 10


def test_symbol_dbar_check(rng):
    z = 0.8 * np.sqrt(rng.uniform(size=30)) * np.exp(2j * np.pi * rng.uniform(size=30))
    assert ZBAR.check_dbar(z) <= 1e-4
    s = SymbolField(lambda z: np.abs(z) ** 2, lambda z: z)
    assert s.check_dbar(z) <= 1e-4
    with pytest.raises(PreconditionError):
        SymbolField(np.conj).check_dbar(z)


def test_atomic_single_atom():
    w = power(0)
    res = atomic_function([1.0], [0.6j], w, w, 2)
    assert res.ratio == pytest.approx(1.0, rel=1e-10)


def test_atomic_infinite_ap():
    with pytest.raises(PreconditionError):
        atomic_function([1.0], [0.5], power(1), power(4), 2)


def test_atomic_random_bounded(lattice_r1, rng):
    lat, _ = lattice_r1
    w = power(0)
    pts = lat.points[np.abs(lat.points) <= 0.98]
    lam = rng.standard_normal(2 * 50)
    r50 = atomic_function(lam[:50], pts[:50], w, w, 2).ratio
    r100 = atomic_function(lam, pts[:100], w, w, 2).ratio
    assert abs(r100 / r50 - 1) <= 0.2
    alt = atomic_function((-1.0) ** np.arange(50), pts[:50], w, w, 2).ratio
    pos = atomic_function(np.ones(50), pts[:50], w, w, 2).ratio
    bound = 3 * max(r50, r100)
    assert alt <= bound and pos <= bound


def test_random_polynomials_normalized():
    v = power(1)
    rule = rule_for_degree(8)
    polys = random_polynomials(5, 8, seed=3, v=v, p=3, rule=rule)
    assert all(lp_norm(q.on_rule(rule), rule, 3, v) == pytest.approx(1.0) for q in polys)
    again = random_polynomials(5, 8, seed=3, v=v, p=3, rule=rule)
    assert all(np.array_equal(a.coeffs, b.coeffs) for a, b in zip(polys, again))


def test_polar_synthesis_matches_horner(rng):
    c = rng.standard_normal(300) + 1j * rng.standard_normal(300)
    poly = AnalyticPoly(c * 0.9 ** np.arange(300))
    rule = unit_disc_rule(r_max=0.95, n_angular=64)
    assert np.allclose(poly.on_rule(rule), poly(rule.nodes), atol=1e-10)
