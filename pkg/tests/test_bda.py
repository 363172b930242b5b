import numpy as np
import pytest
from scipy.optimize import minimize

from bergman_hankel.bda import (BdaProblem, G, bda_solve, bda_value, bda_weighted, bracket,
                                criterion_pq, criterion_qp, decompose, decomposition_lw_norms,
                                g_stability, m_r, validation_radius)
from bergman_hankel.errors import ConvergenceError, DomainError, PreconditionError
from bergman_hankel.geometry import bergman_disc, lattice_sample, mobius
from bergman_hankel.kernel import SymbolField
from bergman_hankel.quadrature import rule_for_disc
from bergman_hankel.symbols import conj_log1mz, polynomial, re_z, zbar
from bergman_hankel.weights import exponential, power


def brute_force(f, disc, q, degree):
    """Direct minimization over the 2(d+1) real coefficients; independent of the IRLS path."""
    rule = rule_for_disc(disc, 24, 48)
    u = (rule.nodes - disc.euclidean_center) / disc.euclidean_radius
    V = u[:, None] ** np.arange(degree + 1)
    w = rule.weights / rule.weights.sum()
    F = f(rule.nodes)

    def obj(x):
        c = x[:degree + 1] + 1j * x[degree + 1:]
        return np.dot(w, np.abs(F - V @ c) ** q)

    res = minimize(obj, np.zeros(2 * degree + 2), method="Powell",
                   options={"xtol": 1e-12, "ftol": 1e-15, "maxiter": 200000, "maxfev": 400000})
    return res.fun ** (1 / q)


def test_polynomial_symbol_value_zero():
    f = polynomial([0.3, 1j, -2, 0.5])
    val, h = bda_value(BdaProblem(f, bergman_disc(0.4 + 0.2j, 1.0), 2, 5))
    assert val <= 1e-12
    rule = rule_for_disc(bergman_disc(0.4 + 0.2j, 1.0), 8, 16)
    assert np.allclose(h(rule.nodes), f(rule.nodes), atol=1e-12)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_zbar_centered(r):
    val, h = bda_value(BdaProblem(zbar(), bergman_disc(0, r)))
    assert val == pytest.approx(np.tanh(r) / np.sqrt(2), rel=1e-12)
    assert np.max(np.abs(h.coeffs)) <= 1e-12


@pytest.mark.parametrize("z", [0.5, -0.3 + 0.6j, 0.95j])
def test_zbar_off_center(z):
    d = bergman_disc(z, 1.0)
    val, h = bda_value(BdaProblem(zbar(), d))
    assert val == pytest.approx(d.euclidean_radius / np.sqrt(2), rel=1e-10)
    assert h(d.euclidean_center) == pytest.approx(np.conj(d.euclidean_center), abs=1e-10)


def test_zbar_matches_brute_force():
    d = bergman_disc(0.5, 1.0)
    val = bda_solve(BdaProblem(zbar(), d, 2, 2, n_radial=24, n_angular=48)).value
    assert val == pytest.approx(brute_force(zbar(), d, 2, 2), rel=1e-6)


@pytest.mark.parametrize("q", [1.5, 3.0])
def test_irls_closed_form(q):
    # h = conj(c) is optimal by symmetry; mean of |w - c|^q over the disc is 2 R^q / (q + 2)
    d = bergman_disc(0.3 - 0.4j, 1.0)
    res = bda_solve(BdaProblem(zbar(), d, q))
    assert res.value == pytest.approx((2 / (q + 2)) ** (1 / q) * d.euclidean_radius, rel=1e-8)
    assert res.iterations >= 1


@pytest.mark.parametrize("q", [1.5, 3.0])
def test_irls_matches_optimizer(q):
    d = bergman_disc(0.5, 1.0)
    irls = bda_solve(BdaProblem(conj_log1mz(), d, q, 3, n_radial=24, n_angular=48), tol=1e-12).value
    assert irls == pytest.approx(brute_force(conj_log1mz(), d, q, 3), rel=1e-6)


def test_irls_nonconvergence():
    with pytest.raises(ConvergenceError) as exc:
        bda_solve(BdaProblem(conj_log1mz(), bergman_disc(0.5, 1.0), 3.0, 3), max_iter=2)
    assert exc.value.best > 0


def test_bda_domain():
    with pytest.raises(DomainError):
        bda_solve(BdaProblem(zbar(), bergman_disc(0, 1), 1.0))
    bad = SymbolField(lambda z: np.where(np.abs(z) < 0.3, np.nan, z), name="hole")
    with pytest.raises(DomainError):
        bda_solve(BdaProblem(bad, bergman_disc(0, 1)))


def test_continuity_in_q():
    d = bergman_disc(0.6j, 1.0)
    base = bda_solve(BdaProblem(zbar(), d, 2.0)).value
    for q in [1.99, 2.01]:
        assert abs(bda_solve(BdaProblem(zbar(), d, q)).value - base) <= 1e-3


@pytest.mark.parametrize("make,z", [(conj_log1mz, 0.7), (re_z, 0.5j), (conj_log1mz, -0.9)])
def test_degree_stabilization(make, z):
    vals = [G(make(), z, 1.0, degree=d) for d in range(4, 13)]
    assert np.all(np.diff(vals) <= 1e-14)
    v8, v12 = vals[4], vals[8]
    assert abs(v8 - v12) <= 0.01 * v8 or v8 < 1e-10


def test_weighted_constant_weight_identical():
    p = BdaProblem(conj_log1mz(), bergman_disc(0.6, 1.0), weight=power(0))
    assert bda_weighted(p) == pytest.approx(bda_solve(BdaProblem(conj_log1mz(), p.disc)).value, rel=1e-12)


def test_weighted_band_and_homogeneity():
    ratios = []
    for t in np.linspace(0, 0.9, 7):
        d = bergman_disc(t * np.exp(0.3j), 1.0)
        ratios.append(bda_weighted(BdaProblem(zbar(), d, weight=power(1)))
                      / bda_solve(BdaProblem(zbar(), d)).value)
    assert 0.5 <= min(ratios) and max(ratios) <= 2
    d = bergman_disc(0.5, 1.0)
    f3 = SymbolField(lambda z: (2 - 1j) * np.conj(z), name="c*zbar")
    assert bda_weighted(BdaProblem(f3, d, weight=power(1))) == pytest.approx(
        abs(2 - 1j) * bda_weighted(BdaProblem(zbar(), d, weight=power(1))), rel=1e-10)


def test_weighted_needs_regular():
    with pytest.raises(PreconditionError):
        bda_weighted(BdaProblem(zbar(), bergman_disc(0, 1), weight=exponential(1.0)))
    with pytest.raises(DomainError):
        bda_weighted(BdaProblem(zbar(), bergman_disc(0, 1)))


def test_m_r_examples():
    c = SymbolField(lambda z: np.full_like(z, 3 - 4j), name="const")
    assert m_r(c, 0.4, 1.0) == pytest.approx(5.0)
    assert m_r(zbar(), 0, 0.8) == pytest.approx(np.tanh(0.8) / np.sqrt(2), rel=1e-12)
    for z in [0, 0.5, -0.8j]:
        for f in [zbar(), conj_log1mz()]:
            assert m_r(f, z, 1.0) >= G(f, z, 1.0) - 1e-14


def test_bracket_values():
    w = power(0)
    for z in [0, 0.5, 0.9j]:
        b = bracket(w, z)
        assert b.value == pytest.approx((1 - abs(z)) ** 2, rel=1e-10)
    assert np.all(power(2).bracket(np.array([0.1, 0.99, 0.999])) > 0)


def test_bracket_disc_mass_band():
    from bergman_hankel.quadrature import disc_mass
    w = power(1)
    r = [w.bracket(t) / disc_mass(rule_for_disc(bergman_disc(t, 1.0)), w) for t in [0.99, 0.999, 0.9999]]
    # both sides scale like (1 - |z|)**3, so the ratio settles to a positive constant
    assert min(r) > 0
    assert abs(r[1] / r[2] - 1) <= 0.02


def test_criterion_pq_analytic_zero():
    w = power(0)
    res = criterion_pq(polynomial([1, 2]), w, w, 2, 2, n_angles=4)
    assert res.sup <= 1e-12


def test_criterion_pq_one_weight_reduction():
    w = power(1)
    res = criterion_pq(conj_log1mz(), w, w, 2, 2, n_angles=4)
    assert np.allclose(res.values, res.G, rtol=1e-12)


def test_criterion_pq_signatures():
    w = power(0)
    compact = criterion_pq(zbar(), w, w, 2, 2)
    assert compact.vanishing and np.isfinite(compact.sup)
    ts = compact.profile.ts
    # G(zbar) = R(z, 1)/sqrt(2) is comparable to (1 - |z|)
    ratio = compact.profile.values / (1 - ts)
    assert ratio.max() / ratio.min() <= 4
    bounded = criterion_pq(conj_log1mz(), w, w, 2, 2)
    assert not bounded.vanishing
    assert bounded.profile.values.min() >= 0.2 and np.isfinite(bounded.sup)


def test_criterion_qp_examples():
    w = power(0)
    val, info = criterion_qp(polynomial([0, 1]), w, w, 3, 2, n_angular=8)
    assert val <= 1e-12
    base, info = criterion_qp(zbar(), w, w, 3, 2, n_angular=8)
    assert np.isfinite(base) and base > 0 and info["exponent"] == 6
    f3 = SymbolField(lambda z: -2j * np.conj(z), name="-2i zbar")
    assert criterion_qp(f3, w, w, 3, 2, n_angular=8)[0] == pytest.approx(2 * base, rel=1e-10)
    with pytest.raises(DomainError):
        criterion_qp(zbar(), w, w, 2.001, 2)
    with pytest.raises(DomainError):
        criterion_qp(zbar(), w, w, 2, 2)


def test_criterion_qp_matches_closed_form():
    # G(zbar)(z) = R(z, 1)/sqrt(2) exactly, so the integral reduces to a radial quadrature
    from scipy.integrate import quad
    w = power(0)
    s = np.tanh(1.0)

    def g(t):
        return s * (1 - t * t) / (1 - s * s * t * t) / np.sqrt(2)

    exact = quad(lambda t: 2 * t * g(t) ** 6, 0, 0.99, epsabs=1e-14)[0] ** (1 / 6)
    val, _ = criterion_qp(zbar(), w, w, 3, 2, n_angular=4, order=8)
    assert val == pytest.approx(exact, rel=1e-8)


def test_g_stability():
    r = 1.0
    ratio, trivial = g_stability(zbar(), 0, 0, r=r)
    assert ratio == pytest.approx(np.tanh(1) / np.tanh(0.5), rel=1e-10) and not trivial
    assert g_stability(polynomial([1, 1]), 0.2, 0.3, r=r) == (1.0, True)
    with pytest.raises(DomainError):
        g_stability(zbar(), 0, 0.9, r=r)


def test_g_stability_random_pairs(rng):
    # oracle: G(zbar)(z, r) = R(z, r)/sqrt(2), so the ratio is R(w, r)/R(z, r/2)
    vals = []
    for _ in range(25):
        z = 0.95 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        w = mobius(z, np.tanh(0.5 * rng.uniform()) * np.exp(2j * np.pi * rng.uniform()))
        ratio, _ = g_stability(zbar(), z, w)
        exact = bergman_disc(w, 1.0).euclidean_radius / bergman_disc(z, 0.5).euclidean_radius
        assert ratio == pytest.approx(exact, rel=1e-10)
        vals.append(ratio)
    # closed-form band: tanh(1)/tanh(1/2) * e^{-1} up to its boundary limit times e
    assert 1.0 <= min(vals) and max(vals) <= 8.5


@pytest.fixture(scope="module")
def zbar_decomposition(lattice_r1):
    lat, pou = lattice_r1
    return decompose(zbar(), lat, pou)


def test_decompose_analytic(lattice_r1):
    lat, pou = lattice_r1
    f = polynomial([0.5, -1j, 0.25, 0.1])
    dec = decompose(f, lat, pou)
    z = lattice_sample(validation_radius(lat), 300, seed=2)
    assert np.max(np.abs(dec.f1(z) - f(z))) <= 1e-8
    assert np.max(np.abs(dec.f2(z))) <= 1e-8
    assert np.max(np.abs(dec.dbar_f1(z))) <= 1e-8


def test_decompose_reconstruction(zbar_decomposition, lattice_r1):
    lat, _ = lattice_r1
    z = lattice_sample(lat.r_max, 1000, seed=5)
    dec = zbar_decomposition
    assert np.max(np.abs(dec.f1(z) + dec.f2(z) - np.conj(z))) <= 1e-12
    assert np.max(dec.n_terms(z)) <= lat.multiplicity


def test_decompose_dbar_fd(zbar_decomposition, lattice_r1):
    lat, _ = lattice_r1
    z = lattice_sample(0.9, 30, seed=6)
    h = 1e-6
    d = zbar_decomposition
    fd = 0.5 * ((d.f1(z + h) - d.f1(z - h)) / (2 * h) + 1j * (d.f1(z + 1j * h) - d.f1(z - 1j * h)) / (2 * h))
    assert np.max(np.abs(fd - d.dbar_f1(z)) * (1 - np.abs(z))) <= 1e-5


def test_decompose_zbar_ratios(zbar_decomposition, lattice_r1):
    lat, _ = lattice_r1
    pts = lattice_sample(validation_radius(lat), 60, seed=3)
    chk = zbar_decomposition.validate(pts)
    bound = 10 * lat.multiplicity
    assert chk.dbar_sup <= bound and chk.f2_sup <= bound
    assert chk.as_dict()["bound"] == bound


def test_decomposition_lw_norms_finite(zbar_decomposition):
    w = power(0)
    norms = decomposition_lw_norms(zbar_decomposition, w, w, 3, 2, n_angular=8, order=2)
    assert np.isfinite(norms["dbar_f1"]) and np.isfinite(norms["f2"])
    assert norms["exponent"] == 6
