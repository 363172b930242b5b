"""Carleson-measure tests for A^p_omega: disc ratios, sups, L^s norms, vanishing profiles, embeddings."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import bergman_disc, pseudo_disc
from .kernel import kernel_series, lp_norm, random_polynomials, rule_for_degree
from .profiles import Profile, circle_points, profile_from_grid, radial_levels
from .quadrature import disc_integral, disc_mass, rule_for_disc, unit_disc_rule

EXPONENT_GUARD = 1e3


@dataclass(frozen=True, eq=False)
class DiscMeasure:
    """Positive measure on the disc: point masses or a density against dA.

    ``radial`` marks densities depending on |z| only, which lets profiles
    sample a single ray.
    """

    kind: str
    points: np.ndarray = None
    masses: np.ndarray = None
    density: object = None
    radial: bool = False
    label: str = "mu"

    def __post_init__(self):
        if self.kind == "discrete":
            if np.any(np.asarray(self.masses) <= 0):
                raise DomainError("point masses must be positive")
            if np.any(np.abs(self.points) >= 1):
                raise DomainError("point masses must lie in the open disc")
        elif self.kind != "density":
            raise DomainError(f"unknown measure kind {self.kind!r}")

    def disc_mass(self, disc, n_radial=48, n_angular=96):
        if self.kind == "discrete":
            return float(np.sum(self.masses[disc.contains(self.points)]))
        rule = rule_for_disc(disc, n_radial, n_angular)
        return float(disc_integral(self.density, rule).real)

    def scaled(self, c):
        if c <= 0:
            raise DomainError("scale must be positive")
        if self.kind == "discrete":
            return DiscMeasure("discrete", self.points, self.masses * c, radial=self.radial,
                               label=f"{c}*{self.label}")
        dens = self.density
        return DiscMeasure("density", density=lambda z: c * dens(z), radial=self.radial,
                           label=f"{c}*{self.label}")

    def lq_norm(self, g, q, rule=None):
        """||g||_{L^q(mu)}; g is a callable or an AnalyticPoly."""
        if self.kind == "discrete":
            return float(np.dot(self.masses, np.abs(g(self.points)) ** q) ** (1.0 / q))
        vals = g.on_rule(rule) if hasattr(g, "on_rule") else g(rule.nodes)
        dens = self.density(rule.nodes).real
        return float(np.dot(rule.weights * dens, np.abs(vals) ** q) ** (1.0 / q))


def point_masses(points, masses, label="discrete"):
    return DiscMeasure("discrete", np.asarray(points, dtype=complex), np.asarray(masses, dtype=float),
                       label=label)


def density_measure(func, radial=False, label="density"):
    return DiscMeasure("density", density=func, radial=radial, label=label)


def weighted_area(omega):
    """mu = omega dA."""
    return density_measure(lambda z: omega(np.abs(z)) + 0j, True, f"{omega.label} dA")


def power_density(gamma):
    """mu = (1 - |z|^2)^gamma dA."""
    return density_measure(lambda z: (1.0 - np.abs(z) ** 2) ** gamma + 0j, True,
                           f"(1-|z|^2)^{gamma} dA")


def load_measure(path):
    """Point masses from CSV columns re, im, mass."""
    pts, m = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(line for line in fh if not line.startswith("#")):
            pts.append(complex(float(row["re"]), float(row["im"])))
            m.append(float(row["mass"]))
    return point_masses(pts, m, f"csv:{path}")


def _disc(z, r, param):
    if param == "beta":
        return bergman_disc(z, r)
    if param == "rho":
        return pseudo_disc(z, r)
    raise DomainError(f"unknown disc parameterization {param!r}")


def carleson_ratio(mu, omega, p, q, r, z, param="beta"):
    """mu(D(z,r)) / omega(D(z,r))**(q/p)."""
    if not 1 < p <= q:
        raise DomainError("carleson_ratio needs 1 < p <= q")
    return _ratio(mu, omega, q / p, r, z, param)


def _ratio(mu, omega, expo, r, z, param):
    disc = _disc(z, r, param)
    om = disc_mass(rule_for_disc(disc), omega)
    if not om > 0:
        raise DomainError(f"omega(D({z}, {r})) = 0")
    return mu.disc_mass(disc) / om ** expo


def _ratios(mu, omega, expo, r, pts, param):
    pts = np.asarray(pts, dtype=complex)
    if mu.radial:
        # radial data: one evaluation per distinct modulus
        mods, inv = np.unique(np.round(np.abs(pts.ravel()), 14), return_inverse=True)
        vals = np.array([_ratio(mu, omega, expo, r, t, param) for t in mods])
        return vals[inv].reshape(pts.shape)
    return np.array([_ratio(mu, omega, expo, r, z, param) for z in pts.ravel()]).reshape(pts.shape)


def carleson_sup(mu, omega, p, q, r=1.0, grid=None, r_max=0.99, n_angles=16, param="beta"):
    """sup of carleson_ratio over a grid of circles; returns a Profile (sup, argmax, per-radius sups)."""
    if not 1 < p <= q:
        raise DomainError("carleson_sup needs 1 < p <= q")
    if grid is None:
        ts = np.concatenate([np.arange(0.0, 0.5 - 1e-9, 0.1), radial_levels(r_max)])
        grid = (ts, circle_points(ts, n_angles))
    ts, pts = grid
    return profile_from_grid(ts, pts, _ratios(mu, omega, q / p, r, pts, param))


def carleson_lp_norm(mu, omega, p, q, r=1.0, r_max=0.99, n_angular=32, order=8, param="beta"):
    """(int (mu(D(z,r)) / omega(D(z,r)))^(p/(p-q)) omega dA)^((p-q)/p) over |z| < r_max."""
    if not 1 < q < p:
        raise DomainError("carleson_lp_norm needs 1 < q < p")
    s = p / (p - q)
    if s > EXPONENT_GUARD:
        raise DomainError(f"exponent p/(p-q) = {s:.3g} exceeds {EXPONENT_GUARD:g}; p too close to q")
    rule = unit_disc_rule(r_max=r_max, n_angular=n_angular, order=order)
    vals = _ratios(mu, omega, 1.0, r, rule.nodes, param)
    return float(np.dot(rule.weights * omega(np.abs(rule.nodes)), vals ** s) ** (1.0 / s))


def vanishing_profile(mu, omega, p, q, r=1.0, r_max=0.99, n_angles=16, param="beta"):
    """Per-radius sup of carleson_ratio on t = 0.5, 0.6, ..., r_max with the trend flag."""
    if not 1 < p <= q:
        raise DomainError("vanishing_profile needs 1 < p <= q")
    ts = radial_levels(r_max)
    pts = circle_points(ts, n_angles)
    return profile_from_grid(ts, pts, _ratios(mu, omega, q / p, r, pts, param))


@dataclass
class EmbeddingEstimate:
    value: float
    argmax: str
    ratios: np.ndarray
    labels: list

    def as_dict(self):
        return {"estimate": float(self.value), "argmax": self.argmax, "family_size": len(self.labels),
                "lower_bound": True}


def embedding_family(omega, p, atom_points, n_random=20, degree=10, seed=0, d_max=1600, tol=1e-12):
    """Kernel atoms B_a^omega at ``atom_points`` plus seeded random polynomials."""
    K = kernel_series(omega, d_max)
    fam = [(f"atom({complex(a):.4g})", K.atom(a, tol)) for a in atom_points]
    fam += [(f"poly#{k}", g) for k, g in enumerate(random_polynomials(n_random, degree, seed))]
    return fam


def embedding_norm_estimate(mu, omega, p, q, family=None, atom_points=None, seed=0, r_max=1.0):
    """sup over the family of ||g||_{L^q(mu)} / ||g||_{A^p_omega}; an empirical lower estimate."""
    if family is None:
        if atom_points is None:
            atom_points = np.concatenate([[0.0], radial_levels(0.95)])
        family = embedding_family(omega, p, atom_points, seed=seed)
    deg = max(g.degree for _, g in family)
    rule = rule_for_degree(deg, r_max=r_max)
    ratios = np.array([mu.lq_norm(g, q, rule) / lp_norm(g.on_rule(rule), rule, p, omega)
                       for _, g in family])
    k = int(np.argmax(ratios))
    return EmbeddingEstimate(float(ratios[k]), family[k][0], ratios, [n for n, _ in family])


def embedding_estimate(mu, omega, p, q, **kw):
    return embedding_norm_estimate(mu, omega, p, q, **kw).value
