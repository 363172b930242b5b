"""Local L^q distance to analytic functions (BDA), averages M_r, the two criteria and f = f1 + f2."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, DomainError, PreconditionError
from .geometry import beta_metric, bergman_disc, pseudo_disc
from .kernel import AnalyticPoly, SymbolField
from .profiles import Profile, circle_points, radial_levels, vanishing_trend
from .quadrature import lq_mean_on_rule, rule_for_disc, unit_disc_rule
from .weights import RadialWeight, classify, weight_W

DEFAULT_DEGREE = 10
IRLS_DAMPING = 0.7
IRLS_FLOOR = 1e-10
EXPONENT_GUARD = 1e3


@dataclass
class BdaProblem:
    f: SymbolField
    disc: object
    q: float = 2.0
    degree: int = DEFAULT_DEGREE
    weight: RadialWeight = None
    n_radial: int = 48
    n_angular: int = 96


class BdaResult(NamedTuple):
    value: float
    poly: AnalyticPoly
    iterations: int


def _design(prob):
    disc = prob.disc
    rule = rule_for_disc(disc, prob.n_radial, prob.n_angular)
    c, R = disc.euclidean_center, disc.euclidean_radius
    u = (rule.nodes - c) / R
    V = u[:, None] ** np.arange(prob.degree + 1)[None, :]
    w = rule.weights.copy()
    if prob.weight is not None:
        w = w * prob.weight(np.abs(rule.nodes))
    mass = w.sum()
    if not mass > 0:
        raise DomainError("disc has zero mass")
    return rule, V, w / mass, c, R


def _wls(V, F, w):
    s = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(V * s[:, None], F * s, rcond=None)
    return coef


def bda_solve(prob, tol=1e-9, max_iter=200, damping=IRLS_DAMPING, floor=IRLS_FLOOR):
    """Minimize (mean over the disc of |f - h|^q)^(1/q) over polynomials h of degree <= d.

    q = 2 is a single weighted least-squares solve. Otherwise damped IRLS
    starting from the least-squares fit, stopped once successive values
    agree to ``tol`` (relative).
    """
    q = float(prob.q)
    if q <= 1:
        raise DomainError("bda needs q > 1")
    rule, V, w, c, R = _design(prob)
    F = prob.f(rule.nodes)
    if not np.all(np.isfinite(F)):
        raise DomainError(f"symbol {prob.f.name} not finite on D({prob.disc.center}, {prob.disc.radius})")
    coef = _wls(V, F, w)
    res = np.abs(F - V @ coef)
    value = float(np.dot(w, res ** q) ** (1.0 / q))
    it = 0
    if q != 2.0:
        scale = float(np.sqrt(np.dot(w, np.abs(F) ** 2)))
        for it in range(1, max_iter + 1):
            a = np.maximum(res, floor) ** (q - 2.0)
            coef = coef + damping * (_wls(V, F, w * a) - coef)
            res = np.abs(F - V @ coef)
            new = float(np.dot(w, res ** q) ** (1.0 / q))
            done = abs(new - value) <= tol * new + 1e-15 * scale
            value = new
            if done:
                break
        else:
            raise ConvergenceError(f"IRLS did not converge in {max_iter} iterations (q={q})",
                                   best=value, bound=None)
    return BdaResult(value, AnalyticPoly(coef, c, R), it)


def bda_value(prob, **kw):
    """(G value, minimizing polynomial)."""
    res = bda_solve(prob, **kw)
    return res.value, res.poly


_R_CLASS = {}


def _require_regular(v):
    key = id(v)
    if key not in _R_CLASS:
        _R_CLASS[key] = (v, classify(v, grid_depth=20).in_R)
    if not _R_CLASS[key][1]:
        raise PreconditionError(f"weight {v.label} is not regular")


def bda_weighted(prob, check_class=True, **kw):
    """Weighted BDA value with v dA in place of dA; needs v regular."""
    if prob.weight is None:
        raise DomainError("bda_weighted needs a weight on the problem")
    if check_class:
        _require_regular(prob.weight)
    return bda_solve(prob, **kw).value


def make_disc(z, r, param="beta"):
    return bergman_disc(z, r) if param == "beta" else pseudo_disc(z, r)


def G(f, z, r, q=2.0, degree=DEFAULT_DEGREE, weight=None, param="beta", n_radial=48, n_angular=96):
    """G_{q,r}(f) at each point of z (scalar or array)."""
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.array([bda_solve(BdaProblem(f, make_disc(p, r, param), q, degree, weight,
                                         n_radial, n_angular)).value for p in zs.ravel()])
    return out.reshape(zs.shape) if np.ndim(z) else float(out[0])


def m_r(f, z, r, q=2.0, param="beta", n_radial=48, n_angular=96):
    """((1/|D(z,r)|) int_{D(z,r)} |f|^q dA)^(1/q)."""
    rule = rule_for_disc(make_disc(z, r, param), n_radial, n_angular)
    return lq_mean_on_rule(f, rule, q)


@dataclass(frozen=True)
class BracketValue:
    """[w](z) = w-hat(|z|) (1 - |z|)."""

    weight: RadialWeight
    z: complex
    value: float


def bracket(w, z):
    return BracketValue(w, complex(z), float(w.bracket(z)))


# --- criteria --------------------------------------------------------------------
@dataclass
class CriterionResult:
    profile: Profile
    sup: float
    argmax: complex
    points: np.ndarray
    values: np.ndarray
    G: np.ndarray

    @property
    def vanishing(self):
        return self.profile.vanishing

    def as_dict(self):
        d = self.profile.as_dict()
        d.update(sup=float(self.sup), argmax=[float(self.argmax.real), float(self.argmax.imag)])
        return d


def default_grid(r_max=0.99, n_angles=8):
    """Levels 0, 0.1, ..., 0.4 plus the trend levels 0.5, ..., r_max; n_angles per circle."""
    inner = np.arange(0.0, 0.5 - 1e-9, 0.1)
    ts = np.concatenate([inner, radial_levels(r_max)])
    return ts, circle_points(ts, n_angles)


def criterion_pq(f, v, eta, p, q, r=1.0, grid=None, degree=DEFAULT_DEGREE, r_max=0.99,
                 n_angles=8, param="beta"):
    """z -> [eta]^(1/q) [v]^(-1/p) G_{q,r}(f)(z) on a grid of circles; sup and boundary trend."""
    if not 1 < p <= q:
        raise DomainError("criterion_pq needs 1 < p <= q")
    ts, pts = default_grid(r_max, n_angles) if grid is None else grid
    pts = np.asarray(pts).reshape(len(ts), -1)
    g = G(f, pts.ravel(), r, q, degree, param=param).reshape(pts.shape)
    a = np.abs(pts)
    factor = eta.bracket(a) ** (1.0 / q) * v.bracket(a) ** (-1.0 / p)
    vals = factor * g
    k = int(np.argmax(vals))
    keep = ts >= 0.5 - 1e-12
    prof = Profile(ts[keep], vals[keep].max(axis=1), float(vals[keep].max()),
                   complex(pts[keep].ravel()[int(np.argmax(vals[keep]))]))
    return CriterionResult(prof, float(vals.ravel()[k]), complex(pts.ravel()[k]),
                           pts.ravel(), vals.ravel(), g.ravel())


def _exponent(p, q):
    if not 1 < q < p:
        raise DomainError("this criterion needs 1 < q < p")
    s = p * q / (p - q)
    if s > EXPONENT_GUARD:
        raise DomainError(f"exponent pq/(p-q) = {s:.3g} exceeds {EXPONENT_GUARD:g}; p too close to q")
    return s


def criterion_qp(f, v, eta, p, q, r=1.0, degree=DEFAULT_DEGREE, r_max=0.99, n_angular=16,
                 order=4, param="beta"):
    """(int_{|z|<r_max} G_{q,r}(f)^s W dA)^(1/s) with s = pq/(p-q), W = eta^(p/(p-q)) v^(-q/(p-q))."""
    s = _exponent(p, q)
    W = weight_W(v, eta, p, q)
    rule = unit_disc_rule(r_max=r_max, n_angular=n_angular, order=order)
    g = G(f, rule.nodes, r, q, degree, param=param)
    integral = float(np.dot(rule.weights * W(np.abs(rule.nodes)), g ** s))
    return integral ** (1.0 / s), {"exponent": s, "nodes": int(rule.size), "W": W.label,
                                   "G_max": float(g.max())}


def g_stability(f, z, w, q=2.0, r=1.0, degree=DEFAULT_DEGREE, tiny=1e-12):
    """G_{q,r}(f)(w) / G_{q,r/2}(f)(z) for beta(z, w) < r/2; (ratio, trivial)."""
    if not float(beta_metric(z, w)) < r / 2:
        raise DomainError("g_stability needs beta(z, w) < r/2")
    top = G(f, w, r, q, degree)
    bottom = G(f, z, r / 2, q, degree)
    if top < tiny and bottom < tiny:
        return 1.0, True
    return top / bottom, False


# --- decomposition ------------------------------------------------------------
@dataclass
class DecompositionCheck:
    points: np.ndarray
    G2r: np.ndarray
    dbar_ratio: np.ndarray
    f2_ratio: np.ndarray
    multiplicity: int
    max_terms: int

    @property
    def dbar_sup(self):
        return float(np.nanmax(self.dbar_ratio)) if np.any(np.isfinite(self.dbar_ratio)) else 0.0

    @property
    def f2_sup(self):
        return float(np.nanmax(self.f2_ratio)) if np.any(np.isfinite(self.f2_ratio)) else 0.0

    def as_dict(self):
        return {"dbar_ratio_sup": self.dbar_sup, "f2_ratio_sup": self.f2_sup,
                "multiplicity": self.multiplicity, "max_terms": self.max_terms,
                "bound": 10 * self.multiplicity, "n_points": int(len(self.points))}


@dataclass
class Decomposition:
    """f1 = sum_j h_j phi_j, f2 = f - f1, with h_j the BDA minimizer on D(a_j, r)."""

    f: SymbolField
    pou: object
    q: float
    degree: int
    coeffs: np.ndarray
    centers: np.ndarray
    scales: np.ndarray
    local_G: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def lattice(self):
        return self.pou.lattice

    def _h(self, idx, z):
        u = (z - self.centers[idx]) / self.scales[idx]
        out = np.zeros(len(idx), dtype=complex)
        for k in range(self.degree, -1, -1):
            out = out * u + self.coeffs[idx, k]
        return out

    def _parts(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        vals = self.pou.evaluate(z)
        h = self._h(vals.index, z[vals.point])
        return z, vals, h

    def f1(self, z):
        z, vals, h = self._parts(z)
        s = vals.phi * h
        return np.bincount(vals.point, s.real, len(z)) + 1j * np.bincount(vals.point, s.imag, len(z))

    def f2(self, z):
        return self.f(np.atleast_1d(z)) - self.f1(z)

    def dbar_f1(self, z):
        """sum_i (h_i - h_j) dbar(phi_i), j the patch with the largest phi at z."""
        z, vals, h = self._parts(z)
        n = len(z)
        h_ref = np.zeros(n, dtype=complex)
        if len(h):
            order = np.lexsort((vals.phi, vals.point))
            last = order[np.r_[vals.point[order][1:] != vals.point[order][:-1], True]]
            h_ref[vals.point[last]] = h[last]
        s = (h - h_ref[vals.point]) * vals.dbar_phi
        return np.bincount(vals.point, s.real, n) + 1j * np.bincount(vals.point, s.imag, n)

    def n_terms(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        vals = self.pou.evaluate(z)
        return np.bincount(vals.point, minlength=len(z))

    def validate(self, points, q=None, degree=None, n_radial=24, n_angular=48, tiny=1e-12):
        """Ratios (1-|z|)|dbar f1| / G_{q,2r}(f) and M_r(|f2|^q)^(1/q) / G_{q,2r}(f) on ``points``."""
        q = self.q if q is None else q
        degree = self.degree if degree is None else degree
        r = self.lattice.r
        pts = np.asarray(points, dtype=complex).ravel()
        g2 = G(self.f, pts, 2 * r, q, degree)
        dbar = np.abs(self.dbar_f1(pts)) * (1.0 - np.abs(pts))
        mr = np.array([lq_mean_on_rule(self.f2(rule.nodes), rule, q)
                       for rule in (rule_for_disc(bergman_disc(z, r), n_radial, n_angular) for z in pts)])
        with np.errstate(divide="ignore", invalid="ignore"):
            ok = g2 > tiny
            r1 = np.where(ok, dbar / np.where(ok, g2, 1.0), np.nan)
            r2 = np.where(ok, mr / np.where(ok, g2, 1.0), np.nan)
        return DecompositionCheck(pts, g2, r1, r2, int(self.lattice.multiplicity),
                                  int(np.max(self.n_terms(pts))))


def decompose(f, lat, pou, q=2.0, degree=DEFAULT_DEGREE, n_radial=24, n_angular=48):
    """Local BDA minimizers on every lattice disc D(a_j, r) glued by the partition of unity."""
    n = len(lat.points)
    coeffs = np.zeros((n, degree + 1), dtype=complex)
    centers = np.zeros(n, dtype=complex)
    scales = np.zeros(n)
    local = np.zeros(n)
    for j, a in enumerate(lat.points):
        try:
            res = bda_solve(BdaProblem(f, bergman_disc(a, lat.r), q, degree, None, n_radial, n_angular))
        except (DomainError, ConvergenceError) as exc:
            raise type(exc)(f"patch {j} at {a}: {exc}") from exc
        coeffs[j] = res.poly.coeffs
        centers[j] = res.poly.center
        scales[j] = res.poly.scale
        local[j] = res.value
    return Decomposition(f, pou, q, degree, coeffs, centers, scales, local)


def validation_radius(lat):
    """Largest |z| with D(z, r) inside {|w| <= r_max}."""
    return float(np.tanh(max(np.arctanh(lat.r_max) - lat.r, 0.0)))


def lw_norm(values, points_rule, W, s):
    """(int |values|^s W dA)^(1/s) on a quadrature rule."""
    w = points_rule.weights * W(np.abs(points_rule.nodes))
    return float(np.dot(w, np.abs(values) ** s) ** (1.0 / s))


def decomposition_lw_norms(dec, v, eta, p, q, n_angular=16, order=4):
    """L_W^{pq/(p-q)} norms of (1-|z|)|dbar f1| and M_r(|f2|^q)^(1/q) over the validated region."""
    s = _exponent(p, q)
    W = weight_W(v, eta, p, q)
    rule = unit_disc_rule(r_max=validation_radius(dec.lattice), n_angular=n_angular, order=order)
    r = dec.lattice.r
    z = rule.nodes
    dbar = (1.0 - np.abs(z)) * np.abs(dec.dbar_f1(z))
    mr = np.array([lq_mean_on_rule(dec.f2(rr.nodes), rr, q)
                   for rr in (rule_for_disc(bergman_disc(p_, r), 24, 48) for p_ in z)])
    return {"dbar_f1": lw_norm(dbar, rule, W, s), "f2": lw_norm(mr, rule, W, s), "exponent": s}
