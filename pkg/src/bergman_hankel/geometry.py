"""Disc geometry: Mobius maps, Bergman metric, Bergman discs, lattices, partitions of unity."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from .errors import DomainError, LatticeError, ResourceError

MAX_LATTICE_POINTS = 200_000
# rings are added until every probe point lies in some D(a_k, COVER_MARGIN * r),
# which keeps the sum of bumps of the partition of unity bounded below
COVER_MARGIN = 0.75
# neighbours fetched per k-nearest query before falling back to a ball query
NEIGHBOUR_K = 32


def mobius(z, w):
    """phi_z(w) = (z - w) / (1 - conj(z) w); an involution of the disc swapping z and 0."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return (z - w) / (1.0 - np.conj(z) * w)


def pseudo_distance(z, w):
    """rho(z, w) = |phi_z(w)|."""
    return np.abs(mobius(z, w))


def one_minus_rho2(z, w):
    """1 - rho(z, w)**2 without cancellation near the boundary."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return (1.0 - np.abs(z) ** 2) * (1.0 - np.abs(w) ** 2) / np.abs(1.0 - np.conj(z) * w) ** 2


def beta_metric(z, w):
    """Bergman metric: 1/2 log((1 + rho)/(1 - rho)) = log(1 + rho) - 1/2 log(1 - rho**2)."""
    rho = pseudo_distance(z, w)
    # artanh is exact near rho = 0; the second form keeps precision near rho = 1
    with np.errstate(divide="ignore"):
        far = np.log1p(rho) - 0.5 * np.log(one_minus_rho2(z, w))
    return np.where(rho < 0.5, np.arctanh(np.minimum(rho, 0.5)), far)


def dbar_beta(z, a):
    """d-bar with respect to z of beta(z, a); undefined (nan) at z = a."""
    z = np.asarray(z, dtype=complex)
    a = np.asarray(a, dtype=complex)
    big_a = 1.0 - np.abs(a) ** 2
    one_az = 1.0 - np.conj(a) * z
    # rho**2 = 1 - A (1 - |z|^2) / |1 - conj(a) z|^2
    dbar_rho2 = -big_a * (a - z) / (one_az * np.conj(one_az) ** 2)
    rho = np.abs(mobius(a, z))
    with np.errstate(divide="ignore", invalid="ignore"):
        return dbar_rho2 / (2.0 * rho * one_minus_rho2(z, a))


@dataclass(frozen=True)
class BergmanDisc:
    """D(z, r) = {w : beta(z, w) < r} together with its Euclidean realization.

    ``param`` records whether ``radius`` is a Bergman-metric radius ("beta")
    or a pseudohyperbolic radius ("rho") for Delta(z, rho).
    """

    center: complex
    radius: float
    euclidean_center: complex
    euclidean_radius: float
    param: str = "beta"

    def contains(self, w):
        return np.abs(np.asarray(w) - self.euclidean_center) < self.euclidean_radius

    @property
    def area(self):
        """Normalized area |D| = R**2."""
        return self.euclidean_radius ** 2


def _realize(z, s):
    z = complex(z)
    den = 1.0 - s * s * abs(z) ** 2
    c = (1.0 - s * s) * z / den
    big_r = s * (1.0 - abs(z) ** 2) / den
    return c, big_r


def bergman_disc(z, r):
    """Euclidean realization of D(z, r): with s = tanh r,
    center (1 - s^2) z / (1 - s^2 |z|^2), radius s (1 - |z|^2) / (1 - s^2 |z|^2)."""
    if not abs(z) < 1:
        raise DomainError(f"disc center {z} outside the unit disc")
    if r <= 0:
        raise DomainError("disc radius must be positive")
    s = np.tanh(r)
    if 1.0 - s < 1e-15:
        raise DomainError(f"Bergman radius {r} too large for double precision")
    c, big_r = _realize(z, s)
    return BergmanDisc(complex(z), float(r), c, big_r, "beta")


def pseudo_disc(z, rho):
    """Delta(z, rho) = {w : |phi_z(w)| < rho}, equal to D(z, artanh rho)."""
    if not abs(z) < 1:
        raise DomainError(f"disc center {z} outside the unit disc")
    if not 0 < rho < 1:
        raise DomainError("pseudohyperbolic radius must lie in (0, 1)")
    c, big_r = _realize(z, rho)
    return BergmanDisc(complex(z), float(rho), c, big_r, "rho")


def disc_centers_radii(z, r):
    """Vectorized Euclidean centers and radii of D(z, r)."""
    z = np.asarray(z, dtype=complex)
    s2 = np.tanh(r) ** 2
    den = 1.0 - s2 * np.abs(z) ** 2
    return (1.0 - s2) * z / den, np.tanh(r) * (1.0 - np.abs(z) ** 2) / den


# --- lattices ---------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class Lattice:
    """Separated covering point set truncated to |z| <= r_max."""

    points: np.ndarray
    r: float
    r_max: float
    seed: int
    multiplicity: int = 0
    min_separation: float = np.inf
    covering_ok: bool = False
    _tree: cKDTree = field(default=None, repr=False)

    def __len__(self):
        return len(self.points)

    @property
    def tree(self):
        return self._tree

    def neighbours(self, z, radius=None):
        """Pairs (point index, lattice index) with beta(z_i, a_j) < radius (default r)."""
        radius = self.r if radius is None else radius
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        c, big_r = disc_centers_radii(z, radius)
        xy = np.column_stack([c.real, c.imag])
        k = min(self.multiplicity + 6 if self.multiplicity else NEIGHBOUR_K, len(self.points))
        dist, idx = self._tree.query(xy, k=k, workers=-1)
        dist, idx = dist.reshape(len(z), k), idx.reshape(len(z), k)
        inside = dist <= big_r[:, None] * (1 + 1e-12) + 1e-15
        pt = np.broadcast_to(np.arange(len(z))[:, None], inside.shape)[inside]
        idx = idx[inside]
        # the k nearest may not exhaust the disc; redo those points with a ball query
        full = np.nonzero(inside[:, -1])[0] if k < len(self.points) else np.array([], dtype=int)
        if len(full):
            drop = np.isin(pt, full)
            pt, idx = pt[~drop], idx[~drop]
            hits = self._tree.query_ball_point(xy[full], big_r[full] * (1 + 1e-12) + 1e-15)
            counts = np.fromiter((len(h) for h in hits), dtype=int, count=len(hits))
            pt = np.concatenate([pt, np.repeat(full, counts)])
            idx = np.concatenate([idx, np.fromiter((j for h in hits for j in h), dtype=int,
                                                   count=int(counts.sum()))])
            order = np.argsort(pt, kind="stable")
            pt, idx = pt[order], idx[order]
        keep = beta_metric(z[pt], self.points[idx]) < radius
        return pt[keep], idx[keep]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# r={self.r!r}, r_max={self.r_max!r}, seed={self.seed}\n")
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["index", "re", "im"])
            for i, a in enumerate(self.points):
                wr.writerow([i, repr(float(a.real)), repr(float(a.imag))])


def _ring_count(t, spacing):
    """Largest n with beta(rho, rho e^{2 pi i/n}) >= spacing for rho = tanh t."""
    rho = np.tanh(t)
    if beta_metric(rho, -rho) < spacing:
        return 1
    # smallest angle whose chord reaches the spacing
    theta = brentq(lambda th: beta_metric(rho, rho * np.exp(1j * th)) - spacing, 0.0, np.pi,
                   xtol=1e-15, rtol=1e-14)
    n = max(int(np.floor(2 * np.pi / theta)), 1)
    while n > 1 and beta_metric(rho, rho * np.exp(2j * np.pi / n)) < spacing:
        n -= 1
    return n


def _build(points, r, r_max, seed):
    pts = np.asarray(points, dtype=complex)
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    return Lattice(pts, float(r), float(r_max), int(seed), _tree=tree)


def generate_lattice(r, r_max, seed=0, spacing=0.7, n_validate=4000, max_points=MAX_LATTICE_POINTS):
    """Concentric-ring lattice in the Bergman metric.

    Rings sit at Bergman radii m * spacing * r; each ring carries the largest
    number of equally spaced points whose neighbours are at least spacing * r
    apart, with a seeded random rotation. Since beta(a, b) >= |beta(0, a) -
    beta(0, b)|, any spacing >= 1/2 gives pairwise separation >= r/2. The
    fewest rings whose shrunken discs D(a_k, COVER_MARGIN * r) cover
    {|z| <= r_max} on a probe sample (plus the circle |z| = r_max) are kept.
    """
    if not 0 < r <= 2:
        raise DomainError("lattice parameter r must lie in (0, 2]")
    if not 0 < r_max < 1:
        raise DomainError("r_max must lie in (0, 1)")
    if spacing < 0.5:
        raise DomainError("spacing below r/2 breaks separation")
    step = spacing * r * (1.0 + 1e-9)
    t_cover = np.arctanh(r_max)
    n_max = int(np.ceil(t_cover / step)) + 1
    ts = step * np.arange(1, n_max + 1)
    counts = [_ring_count(t, step) for t in ts]
    total = 1 + sum(counts)
    if total > max_points:
        # the count grows like exp(2t); back off until it fits
        budget_t = t_cover + step - 0.5 * np.log(total / max_points)
        raise ResourceError(f"lattice would need {total} points",
                            suggestion=float(np.tanh(max(budget_t - step, step))))
    rng = np.random.default_rng(seed)
    pts = [np.array([0j])]
    for t, n in zip(ts, counts):
        phase = rng.uniform(0.0, 2 * np.pi)
        pts.append(np.tanh(t) * np.exp(1j * (phase + 2 * np.pi * np.arange(n) / n)))
    # use the fewest rings that cover; the outermost ring may lie inside r_max
    reach = COVER_MARGIN * r
    n_min = 0 if t_cover < reach else max(int(np.ceil((t_cover - reach) / step)), 1)
    probe = np.concatenate([lattice_sample(r_max, n_validate, seed),
                            r_max * np.exp(2j * np.pi * np.arange(4096) / 4096)])
    for n_rings in range(n_min, n_max + 1):
        lat = _build(np.concatenate(pts[:n_rings + 1]), r, r_max, seed)
        covered = np.bincount(lat.neighbours(probe, radius=reach)[0], minlength=len(probe))
        if np.all(covered > 0):
            break
    return validate_lattice(lat, n_validate=n_validate, seed=seed)


def lattice_sample(r_max, n, seed=0):
    """Validation sample: half uniform in area, half uniform in Bergman radius."""
    rng = np.random.default_rng(seed + 7919)
    n1 = n // 2
    rad1 = r_max * np.sqrt(rng.uniform(size=n1))
    rad2 = np.tanh(rng.uniform(0.0, np.arctanh(r_max), size=n - n1))
    rad = np.concatenate([rad1, rad2])
    return rad * np.exp(2j * np.pi * rng.uniform(size=n))


def validate_lattice(lat, n_validate=4000, seed=0):
    """Check separation, covering and multiplicity; returns a lattice carrying the measurements."""
    pts = lat.points
    # separation: neighbours within beta < r/2 other than the point itself
    pt, idx = lat.neighbours(pts, radius=lat.r / 2 * (1.0 - 1e-12))
    clash = pt != idx
    if np.any(clash):
        i, j = pt[clash][0], idx[clash][0]
        raise LatticeError(f"points {i} and {j} closer than r/2: beta={beta_metric(pts[i], pts[j])}")
    # nearest other point gives the measured separation
    sep_pt, sep_idx = lat.neighbours(pts, radius=min(2 * lat.r, 5.0))
    other = sep_pt != sep_idx
    min_sep = float(np.min(beta_metric(pts[sep_pt[other]], pts[sep_idx[other]]))) if np.any(other) else np.inf
    sample = lattice_sample(lat.r_max, n_validate, seed)
    spt, _ = lat.neighbours(sample)
    counts = np.bincount(spt, minlength=len(sample))
    if np.any(counts == 0):
        bad = sample[np.argmin(counts)]
        raise LatticeError(f"sample point {bad} not covered by any D(a_k, r)")
    return Lattice(pts, lat.r, lat.r_max, lat.seed, int(np.max(counts)), min_sep, True, lat._tree)


def load_lattice(path, r, r_max, seed=0, validate=True):
    pts = []
    with open(path, newline="") as fh:
        rows = (line for line in fh if not line.startswith("#"))
        for row in csv.DictReader(rows):
            pts.append(complex(float(row["re"]), float(row["im"])))
    lat = _build(pts, r, r_max, seed)
    return validate_lattice(lat, seed=seed) if validate else lat


# --- partition of unity -----------------------------------------------------
def _fade(s):
    """C^2 quintic fade: 1 at s <= 0, 0 at s >= 1."""
    s = np.clip(s, 0.0, 1.0)
    return 1.0 - s ** 3 * (10.0 - 15.0 * s + 6.0 * s * s)


def _fade_deriv(s):
    inside = (s > 0) & (s < 1)
    s = np.clip(s, 0.0, 1.0)
    return np.where(inside, -30.0 * s * s * (1.0 - s) ** 2, 0.0)


# bump sums below FLOOR are replaced by a smooth positive floor; inside r_max the
# cover margin keeps every sum above it, so the partition is exact there
FLOOR = 0.5


def _soft_floor(t):
    """t for t >= FLOOR, else FLOOR * q(t / FLOOR) with q(x) = x + (1 - x)**3 / 4 (C^2 join)."""
    x = np.clip(np.asarray(t) / FLOOR, 0.0, None)
    below = x < 1.0
    val = np.where(below, FLOOR * (x + 0.25 * (1.0 - np.minimum(x, 1.0)) ** 3), t)
    deriv = np.where(below, 1.0 - 0.75 * (1.0 - np.minimum(x, 1.0)) ** 2, 1.0)
    return val, deriv


@dataclass
class PouValues:
    """Partition-of-unity values at a batch of points, stored as sparse pairs."""

    point: np.ndarray      # index into the evaluation batch
    index: np.ndarray      # lattice index j
    phi: np.ndarray
    dbar_phi: np.ndarray
    total: np.ndarray      # sum of the raw bumps at each point
    n_points: int

    def sum_phi(self):
        return np.bincount(self.point, weights=self.phi, minlength=self.n_points)

    def sum_dbar(self):
        re = np.bincount(self.point, weights=self.dbar_phi.real, minlength=self.n_points)
        im = np.bincount(self.point, weights=self.dbar_phi.imag, minlength=self.n_points)
        return re + 1j * im


@dataclass(frozen=True, eq=False)
class PartitionOfUnity:
    """phi_j = chi_j / sum_k chi_k with chi_j a radial bump in beta(., a_j) / r.

    chi_j is 1 on D(a_j, (1 - smoothness) r) and fades to 0 at D(a_j, r)
    with a C^2 quintic profile; d-bar is evaluated in closed form by the chain rule.
    Outside the truncated disc the bump sum may drop below FLOOR; there the
    denominator is a smooth floor, so the phi_j stay C^2 but no longer sum to one.
    """

    lattice: Lattice
    smoothness: float = 0.5
    c_pou: float = np.nan

    def bumps(self, pt, idx, z):
        a = self.lattice.points[idx]
        zz = z[pt]
        t = beta_metric(zz, a) / self.lattice.r
        s = (t - (1.0 - self.smoothness)) / self.smoothness
        chi = _fade(s)
        dchi = _fade_deriv(s) / (self.smoothness * self.lattice.r)
        active = dchi != 0
        dbar_chi = np.zeros(len(idx), dtype=complex)
        dbar_chi[active] = dchi[active] * dbar_beta(zz[active], a[active])
        return chi, dbar_chi

    def evaluate(self, z, strict=True):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        pt, idx = self.lattice.neighbours(z)
        chi, dbar_chi = self.bumps(pt, idx, z)
        n = len(z)
        total = np.bincount(pt, weights=chi, minlength=n)
        dtot = (np.bincount(pt, weights=dbar_chi.real, minlength=n)
                + 1j * np.bincount(pt, weights=dbar_chi.imag, minlength=n))
        if strict:
            weak = (total < FLOOR) & (np.abs(z) <= self.lattice.r_max)
            if np.any(weak):
                bad = z[weak][0]
                what = "not covered" if total[weak][0] <= 0 else "too weakly covered"
                raise LatticeError(f"point {bad} {what} by the partition of unity")
        den, dden = _soft_floor(total)
        phi = chi / den[pt]
        dbar_phi = dbar_chi / den[pt] - chi * dden[pt] * dtot[pt] / den[pt] ** 2
        return PouValues(pt, idx, phi, dbar_phi, total, n)


    def phi_on_patch(self, xi, j, candidates):
        """phi_j at points xi known to lie in D(a_j, r).

        ``candidates`` lists every lattice index within 2r of a_j, which
        includes each disc that can meet D(a_j, r).
        """
        a = self.lattice.points[candidates]
        s = (beta_metric(xi[:, None], a[None, :]) / self.lattice.r - (1.0 - self.smoothness)) / self.smoothness
        chi = _fade(s)
        own = chi[:, np.searchsorted(candidates, j)]
        return own / _soft_floor(chi.sum(axis=1))[0]

    def patch_candidates(self, j):
        _, idx = self.lattice.neighbours(self.lattice.points[j:j + 1], radius=2.0 * self.lattice.r)
        return np.unique(np.append(idx, j))


def partition_of_unity(lat, smoothness=0.5, n_validate=4000, seed=0):
    """Build the partition and measure sup (1 - |a_j|) |d-bar phi_j| on a validation sample."""
    if not 0 < smoothness <= 1:
        raise DomainError("smoothness must lie in (0, 1]")
    pou = PartitionOfUnity(lat, smoothness)
    sample = lattice_sample(lat.r_max, n_validate, seed + 1)
    vals = pou.evaluate(sample)
    c = float(np.max((1.0 - np.abs(lat.points[vals.index])) * np.abs(vals.dbar_phi)))
    return PartitionOfUnity(lat, smoothness, c)
