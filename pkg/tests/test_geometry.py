import numpy as np
import pytest

from bergman_hankel.errors import DomainError, LatticeError, ResourceError
from bergman_hankel.geometry import (bergman_disc, beta_metric, dbar_beta, generate_lattice,
                                     lattice_sample, load_lattice, mobius, partition_of_unity,
                                     pseudo_disc)


def random_disc_points(rng, n, r_max=0.99):
    return r_max * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))


def test_mobius_examples():
    z, w = 0.3 - 0.4j, -0.2 + 0.1j
    assert mobius(z, z) == 0
    assert mobius(0, w) == pytest.approx(-w)
    assert mobius(z, 0) == pytest.approx(z)
    assert mobius(z, mobius(z, w)) == pytest.approx(w, abs=1e-15)


def test_beta_examples():
    assert beta_metric(0, 0) == 0
    assert beta_metric(0, 0.5) == pytest.approx(0.5 * np.log(3), rel=1e-14)
    # rho = tanh(beta) gives the closed form along the real axis
    assert beta_metric(0, np.tanh(3.0)) == pytest.approx(3.0, rel=1e-12)


def test_beta_mobius_invariance(rng):
    a, z, w = (random_disc_points(rng, 1000) for _ in range(3))
    assert np.allclose(beta_metric(mobius(a, z), mobius(a, w)), beta_metric(z, w), atol=1e-9)


def test_beta_metric_axioms(rng):
    z, w, u = (random_disc_points(rng, 1000, 0.95) for _ in range(3))
    assert np.allclose(beta_metric(z, w), beta_metric(w, z), atol=1e-13)
    assert np.all(beta_metric(z, w) <= beta_metric(z, u) + beta_metric(u, w) + 1e-12)
    assert np.all(beta_metric(z, z) == 0)


def test_dbar_beta_fd(rng):
    z, a = random_disc_points(rng, 50, 0.9), random_disc_points(rng, 50, 0.9)
    h = 1e-6
    fd = 0.5 * ((beta_metric(z + h, a) - beta_metric(z - h, a)) / (2 * h)
                + 1j * (beta_metric(z + 1j * h, a) - beta_metric(z - 1j * h, a)) / (2 * h))
    assert np.allclose(dbar_beta(z, a), fd, rtol=1e-5, atol=1e-7)


def test_bergman_disc_examples():
    d = bergman_disc(0, 0.8)
    assert d.euclidean_center == 0 and d.euclidean_radius == pytest.approx(np.tanh(0.8))
    d = bergman_disc(0.5, 1)
    assert d.euclidean_center.real == pytest.approx(0.24560, abs=5e-6)
    # s(1 - 1/4)/(1 - s^2/4) with s = tanh 1 is 0.668070...
    assert d.euclidean_radius == pytest.approx(0.66807, abs=5e-6)


@pytest.mark.parametrize("z,r", [(0.5, 1.0), (0.9j, 0.5), (-0.7 + 0.2j, 2.0), (0.99, 1.0)])
def test_bergman_disc_membership_sampling(rng, z, r):
    # oracle: brute-force classification of 10^4 points by beta
    d = bergman_disc(z, r)
    w = random_disc_points(rng, 10000, 0.99999)
    b = beta_metric(z, w)
    clear = np.abs(b - r) > 1e-9
    assert np.array_equal(d.contains(w)[clear], (b < r)[clear])
    assert abs(d.euclidean_center) + d.euclidean_radius < 1


def test_disc_errors():
    with pytest.raises(DomainError):
        bergman_disc(1.0, 1)
    with pytest.raises(DomainError):
        bergman_disc(0.1, 40)
    with pytest.raises(DomainError):
        pseudo_disc(0, 1.0)


def test_pseudo_disc_matches_beta():
    a = pseudo_disc(0.4j, 0.5)
    b = bergman_disc(0.4j, np.arctanh(0.5))
    assert a.euclidean_center == pytest.approx(b.euclidean_center)
    assert a.euclidean_radius == pytest.approx(b.euclidean_radius)
    assert a.param == "rho" and b.param == "beta"


def test_euclidean_radius_band():
    zs = np.linspace(0, 0.99, 100)
    for r in [0.5, 1.0]:
        ratio = np.array([bergman_disc(z, r).euclidean_radius for z in zs]) / (1 - zs)
        s = np.tanh(r)
        assert ratio.min() >= s * 0.99 and ratio.max() <= 2 * s / (1 - s * s) * 1.01


def test_lattice_invariants(lattice_r1):
    lat, _ = lattice_r1
    assert lat.covering_ok
    assert lat.min_separation >= lat.r / 2
    assert lat.multiplicity <= 25
    m = min(300, len(lat))
    d = beta_metric(lat.points[:m, None], lat.points[None, :])
    d[np.arange(m), np.arange(m)] = np.inf
    assert d.min() >= lat.r / 2


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_lattice_multiplicity_regression(r):
    lat = generate_lattice(r, 0.99 if r > 1 else 0.95, seed=1)
    assert lat.multiplicity <= 25
    assert lat.min_separation >= r / 2


def test_lattice_small_and_deterministic():
    lat = generate_lattice(2.0, np.tanh(1.0), seed=3)
    # D(0, 2) already contains {|z| <= tanh 1}
    assert len(lat) == 1 and lat.points[0] == 0
    again = generate_lattice(2.0, np.tanh(1.0), seed=3)
    assert np.array_equal(lat.points, again.points)


def test_lattice_resource_error():
    with pytest.raises(ResourceError) as exc:
        generate_lattice(0.5, 0.999999, max_points=5000)
    assert 0 < exc.value.suggestion < 0.999999


def test_lattice_csv_roundtrip(tmp_path, lattice_r1):
    lat, _ = lattice_r1
    path = tmp_path / "lat.csv"
    lat.to_csv(path)
    back = load_lattice(path, lat.r, lat.r_max)
    assert np.array_equal(back.points, lat.points)


def test_lattice_invalid_points(tmp_path):
    path = tmp_path / "lat.csv"
    path.write_text("index,re,im\n0,0,0\n1,0.01,0\n")
    with pytest.raises(LatticeError):
        load_lattice(path, 1.0, 0.5)


def test_partition_sums_to_one(lattice_r1, rng):
    lat, pou = lattice_r1
    z = random_disc_points(rng, 2000, lat.r_max)
    vals = pou.evaluate(z)
    assert np.max(np.abs(vals.sum_phi() - 1)) <= 1e-10
    assert np.max(np.abs(vals.sum_dbar())) <= 1e-10
    assert np.all(vals.phi >= 0)
    assert np.all(beta_metric(z[vals.point], lat.points[vals.index]) < lat.r)


def test_partition_dbar_fd(lattice_r1, rng):
    lat, pou = lattice_r1
    z = random_disc_points(rng, 40, 0.9)
    h = 1e-5

    def phi_of(pts, j):
        v = pou.evaluate(pts)
        out = np.zeros(len(pts))
        m = v.index == j
        out[v.point[m]] = v.phi[m]
        return out

    vals = pou.evaluate(z)
    for k in range(0, len(vals.point), 7):
        p, j = vals.point[k], vals.index[k]
        pts = z[p] + np.array([h, -h, 1j * h, -1j * h])
        f = phi_of(pts, j)
        fd = 0.5 * ((f[0] - f[1]) / (2 * h) + 1j * (f[2] - f[3]) / (2 * h))
        assert abs(fd - vals.dbar_phi[k]) <= 1e-6 * max(1, abs(fd)) / (1 - abs(z[p]))


def test_partition_isolated_atom_is_one(lattice_r1):
    lat, pou = lattice_r1
    vals = pou.evaluate(lat.points[:1])
    # the origin is only covered by its own disc and the first ring
    j0 = vals.index == 0
    if vals.total[0] == pytest.approx(1.0):
        assert vals.phi[j0][0] == pytest.approx(1.0)
    assert np.isfinite(pou.c_pou) and pou.c_pou > 0


def test_partition_constant_stable_under_refinement(lattice_r1):
    lat, pou = lattice_r1
    fine = partition_of_unity(lat, n_validate=16000)
    assert abs(fine.c_pou / pou.c_pou - 1) <= 0.05


def test_partition_uncovered_point(tmp_path):
    path = tmp_path / "lat.csv"
    path.write_text("index,re,im\n0,0,0\n")
    lat = load_lattice(path, 0.5, 0.9, validate=False)
    from bergman_hankel.geometry import PartitionOfUnity
    with pytest.raises(LatticeError):
        PartitionOfUnity(lat).evaluate(np.array([0.85]))
    with pytest.raises(LatticeError):
        partition_of_unity(lat)


def test_lattice_sample_in_range():
    s = lattice_sample(0.9, 1000)
    assert np.all(np.abs(s) <= 0.9)
