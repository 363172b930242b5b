"""Experiment runners behind the CLI subcommands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import __version__
from ..bda import (G, criterion_pq, criterion_qp, decompose, decomposition_lw_norms,
                   validation_radius)
from ..carleson import carleson_lp_norm, carleson_sup, embedding_norm_estimate, vanishing_profile
from ..errors import BergmanError, DomainError
from ..geometry import bergman_disc, generate_lattice, lattice_sample, partition_of_unity
from ..kernel import (AnalyticPoly, hankel_apply, kernel_norm, kernel_series, lp_norm,
                      random_polynomials, rule_for_degree)
from ..profiles import (boundary_exponent, circle_points, log_slope, radial_levels,
                        vanishing_trend)
from ..quadrature import disc_mass, rule_for_disc
from ..weights import ap_constant, classify, dyadic_grid, sigma_weight
from .report import ExperimentReport

NORM_BAND = 50.0
KERNEL_BAND = 100.0
SLOPE_TOL = 0.1


def _report(s, **kw):
    prov = {"tool_version": __version__, "seed": s.seed}
    prov.update(kw.pop("provenance", {}))
    return ExperimentReport(kind=s.kind, scenario=s.echo(), provenance=prov, **kw)


# --- weights ------------------------------------------------------------------
def run_classify_weight(s):
    omega, v, eta = s.weight("omega"), s.weight("v"), s.weight("eta")
    reports = {k: classify(w, s.grid_depth) for k, w in (("omega", omega), ("v", v), ("eta", eta))}
    rs = dyadic_grid(s.grid_depth)
    tails = omega.tails(np.concatenate([rs, [1 - 2.0 ** -(s.grid_depth + 1)]]))
    rows = []
    for k, r in enumerate(rs):
        dens = float(omega(r))
        reg = tails[k] / (dens * (1 - r)) if dens > 0 else np.inf
        rows.append((k + 1, float(r), float(tails[k]), dens,
                     float(tails[k] / tails[k + 1]) if tails[k + 1] > 0 else np.inf, float(reg)))
    diag = {}
    a_eta = ap_constant(omega, eta, s.p)
    a_v = ap_constant(omega, v, s.p, diagnostics=diag)
    sigma = sigma_weight(omega, v, s.p)
    try:
        sigma_hat0 = float(sigma.tail(0.0))
    except BergmanError:
        sigma_hat0 = np.inf
    summary = {k: r.as_dict() for k, r in reports.items()}
    summary.update(ap_omega_eta=a_eta, ap_omega_v=a_v, sigma_hat0=sigma_hat0,
                   sigma_integrable=bool(np.isfinite(sigma_hat0)))
    checks = {}
    for k, r in reports.items():
        checks[f"{k}_R_implies_D"] = (not r.in_R) or (r.in_Dhat and r.in_Dcheck)
        checks[f"{k}_beta_positive"] = (not r.in_Dhat) or r.beta > 0
    return _report(s, records=rows, summary=summary, checks=checks,
                   columns=["k", "r", "tail", "density", "doubling_ratio", "regular_ratio"])


# --- kernels ------------------------------------------------------------------
def closed_form_kernel(omega):
    """1 / (1 - z conj(zeta))**(alpha + 2) for power weights; None otherwise."""
    if omega.family != "power":
        return None
    (alpha,) = omega.params
    return lambda z, w: 1.0 / (1.0 - z * np.conj(w)) ** (alpha + 2.0)


def kernel_recovery_error(omega, r=0.9, n=20, d_max=400):
    """Max relative error of the series kernel against the closed form on an n x n grid."""
    exact = closed_form_kernel(omega)
    if exact is None:
        return None
    K = kernel_series(omega, d_max)
    rng = np.random.default_rng(1)
    mod = np.linspace(0.0, r, n)
    z = mod * np.exp(2j * np.pi * rng.uniform(size=n))
    w = mod * np.exp(2j * np.pi * rng.uniform(size=n))
    Z, W = np.meshgrid(z, w, indexing="ij")
    B = K(Z, W, 1e-14)
    E = exact(Z, W)
    return float(np.max(np.abs(B - E) / np.abs(E)))


def kernel_bands(omega, v, p, r, zs, d_max=1600):
    """Per-|z| quadrature kernel norm, proxy and disc-mass ratio."""
    out = []
    for z in zs:
        value, proxy = kernel_norm(omega, v, p, z, r, d_max=d_max)
        disc = disc_mass(rule_for_disc(bergman_disc(z, r)), omega)
        out.append((value, proxy, disc / (omega.tail(z) * (1.0 - z))))
    return np.array(out)


def band_summary(abs_z, ratios):
    ratios = np.asarray(ratios)
    return {"min": float(ratios.min()), "max": float(ratios.max()),
            "width": float(ratios.max() / ratios.min()),
            "slope": log_slope(abs_z, ratios), "boundary_exponent": boundary_exponent(abs_z, ratios)}


def run_kernel_check(s):
    omega, v = s.weight("omega"), s.weight("v")
    K = kernel_series(omega, s.d_max)
    zs = np.linspace(0.0, s.z_max, s.n_z)
    bands = kernel_bands(omega, v, s.p, s.r, zs, s.d_max)
    rows = []
    rep_err = []
    for z, (value, proxy, disc_ratio) in zip(zs, bands):
        atom = K.atom(z, s.tol)
        rule = rule_for_degree(atom.degree)
        norm_sq = lp_norm(atom.on_rule(rule), rule, 2.0, omega) ** 2
        bzz = float(K.diag(z, s.tol))
        err = abs(norm_sq - bzz) / bzz
        rep_err.append(err)
        rows.append((float(z), bzz, norm_sq, err, value, proxy, value / proxy, disc_ratio))
    rec = kernel_recovery_error(omega)
    norm_band = band_summary(zs, bands[:, 0] / bands[:, 1])
    disc_band = band_summary(zs, bands[:, 2])
    mask = zs <= 0.9 + 1e-12
    summary = {"recovery_error": rec, "reproducing_error_max": float(np.max(np.array(rep_err)[mask])),
               "norm_ratio": norm_band, "disc_ratio": disc_band, "r": s.r}
    checks = {
        "reproducing_1e-4": summary["reproducing_error_max"] <= 1e-4,
        "norm_band_le_100": norm_band["width"] <= KERNEL_BAND,
        "disc_band_le_100": disc_band["width"] <= KERNEL_BAND,
        "norm_exponent_flat": abs(norm_band["boundary_exponent"]) <= SLOPE_TOL,
        "disc_exponent_flat": abs(disc_band["boundary_exponent"]) <= SLOPE_TOL,
    }
    if rec is not None:
        checks["recovery_1e-8"] = rec <= 1e-8
    return _report(s, records=rows, summary=summary, checks=checks,
                   columns=["abs_z", "B_zz", "norm_sq", "reproducing_err", "kernel_norm", "proxy",
                            "norm_ratio", "disc_ratio"],
                   provenance={"d_max": s.d_max})


# --- Carleson -----------------------------------------------------------------
def run_carleson_test(s):
    omega, mu = s.weight("omega"), s.mu()
    rows, summary, checks = [], {"measure": mu.label}, {}
    if s.p <= s.q:
        for param, rad in (("beta", s.r), ("rho", s.rho)):
            sup = carleson_sup(mu, omega, s.p, s.q, rad, r_max=s.r_max, param=param)
            prof = vanishing_profile(mu, omega, s.p, s.q, rad, r_max=s.r_max, param=param)
            summary[param] = {"radius": rad, "sup": sup.sup, "argmax": sup.argmax,
                              "profile": prof.as_dict()}
            rows += [(param, float(t), float(v)) for t, v in zip(prof.ts, prof.values)]
        est = embedding_norm_estimate(mu, omega, s.p, s.q, seed=s.seed)
        ratio = est.value ** s.q / summary["beta"]["sup"]
        summary["embedding"] = est.as_dict()
        summary["embedding_q_over_sup"] = ratio
        checks["embedding_band_20"] = 1 / 20 <= ratio <= 20
        checks["sup_finite"] = bool(np.isfinite(summary["beta"]["sup"]))
    else:
        for param, rad in (("beta", s.r), ("rho", s.rho)):
            val = carleson_lp_norm(mu, omega, s.p, s.q, rad, r_max=s.r_max, param=param)
            summary[param] = {"radius": rad, "lp_norm": val}
            rows.append((param, float("nan"), val))
        checks["lp_norm_finite"] = bool(np.isfinite(summary["beta"]["lp_norm"]))
    return _report(s, records=rows, summary=summary, checks=checks, columns=["param", "t", "ratio"])


# --- BDA ----------------------------------------------------------------------
def run_bda_profile(s):
    f, v, eta = s.f, s.weight("v"), s.weight("eta")
    if s.p <= s.q:
        crit = criterion_pq(f, v, eta, s.p, s.q, s.r, degree=s.d, r_max=s.r_max, n_angles=s.n_angles)
        pts, g, vals = crit.points, crit.G, crit.values
    else:
        ts = np.concatenate([np.arange(0.0, 0.5 - 1e-9, 0.1), radial_levels(s.r_max)])
        pts = circle_points(ts, s.n_angles).ravel()
        g = G(f, pts, s.r, s.q, s.d)
        vals = g
        crit = None
    # degree-refinement diagnostic on a few mid-disc points
    probe = np.array([0.0, 0.5, 0.9, -0.7j])
    lo, hi = G(f, probe, s.r, s.q, 8), G(f, probe, s.r, s.q, 12)
    with np.errstate(divide="ignore", invalid="ignore"):
        stab = np.where(hi > 1e-12, np.abs(lo - hi) / hi, 0.0)
    rows = [(float(abs(z)), float(np.angle(z)), float(gz), float(c)) for z, gz, c in zip(pts, g, vals)]
    summary = {"G_max": float(np.max(g)), "degree_stability": float(np.max(stab))}
    checks = {"finite": bool(np.all(np.isfinite(g)))}
    if crit is not None:
        summary["criterion"] = crit.as_dict()
        checks["criterion_finite"] = bool(np.isfinite(crit.sup))
    return _report(s, records=rows, summary=summary, checks=checks,
                   columns=["abs_z", "angle", "G", "criterion"])


def build_lattice(s):
    lat = generate_lattice(s.r, s.r_max, s.seed)
    return lat, partition_of_unity(lat, seed=s.seed)


def validation_points(lat, n, seed):
    return lattice_sample(validation_radius(lat), n, seed + 101)


def run_decompose(s):
    lat, pou = build_lattice(s)
    f = s.f
    dec = decompose(f, lat, pou, s.q, s.d)
    pts = validation_points(lat, s.n_validate, s.seed)
    chk = dec.validate(pts)
    recon = float(np.max(np.abs(dec.f1(pts) + dec.f2(pts) - f(pts))))
    rows = [(float(abs(z)), float(np.angle(z)), float(g), float(a), float(b))
            for z, g, a, b in zip(pts, chk.G2r, chk.dbar_ratio, chk.f2_ratio)]
    summary = chk.as_dict()
    summary.update(reconstruction_error=recon, lattice_size=len(lat), c_pou=pou.c_pou,
                   validation_radius=validation_radius(lat))
    bound = 10 * lat.multiplicity
    checks = {"reconstruction_1e-12": recon <= 1e-12,
              "dbar_ratio_le_10N": chk.dbar_sup <= bound,
              "f2_ratio_le_10N": chk.f2_sup <= bound}
    return _report(s, records=rows, summary=summary, checks=checks, lattice=lat,
                   columns=["abs_z", "angle", "G2r", "dbar_ratio", "f2_ratio"],
                   provenance={"lattice": {"r": lat.r, "r_max": lat.r_max, "seed": lat.seed,
                                           "points": len(lat), "multiplicity": lat.multiplicity}})


# --- Hankel operators -------------------------------------------------------------
def select_atoms(lat, n, atom_max):
    """n lattice points with |a| <= atom_max, spread evenly through the ring ordering."""
    pts = lat.points[np.abs(lat.points) <= atom_max]
    if len(pts) <= n:
        return pts
    return pts[np.linspace(0, len(pts) - 1, n).round().astype(int)]


class HankelFamily:
    """H_f applied to a family of analytic polynomials on one shared unit-disc rule."""

    def __init__(self, omega, f, max_degree, extra=16, d_max=1600):
        self.omega, self.f, self.extra = omega, f, extra
        self.kernel = kernel_series(omega, max(d_max, max_degree + extra + 1))
        self.rule = rule_for_degree(max_degree + extra)
        self.f_vals = f(self.rule.nodes)

    def values(self, g):
        d = g.degree + self.extra
        field = hankel_apply(self.omega, self.f, g, d, self.rule, self.kernel)
        return field.on_rule(self.rule)

    def norm(self, g, q, eta):
        return lp_norm(self.values(g), self.rule, q, eta)


def hankel_norm_estimate(omega, v, eta, f, p, q, atoms, n_random=20, degree=10, seed=0, tol=1e-12,
                         d_max=1600):
    """sup over normalized kernel atoms b_{v,a} and random polynomials of ||H_f g||_{L^q_eta}."""
    K = kernel_series(omega, d_max)
    fam = [(f"atom({complex(a):.4g})", K.atom(a, tol)) for a in atoms]
    fam += [(f"poly#{k}", g) for k, g in enumerate(random_polynomials(n_random, degree, seed))]
    H = HankelFamily(omega, f, max(g.degree for _, g in fam), d_max=d_max)
    best, arg, vals = 0.0, None, []
    for name, g in fam:
        g = g * (1.0 / lp_norm(g.on_rule(H.rule), H.rule, p, v))
        val = H.norm(g, q, eta)
        vals.append(val)
        if val > best:
            best, arg = val, name
    return best, arg, np.array(vals)


def hankel_atom_profile(omega, v, eta, f, p, q, ts, tol=1e-10, d_max=4000):
    """||H_f(b_{v,t})||_{L^q_eta} along t in ts on the positive axis."""
    K = kernel_series(omega, d_max)
    atoms = [K.atom(t, tol) for t in ts]
    H = HankelFamily(omega, f, max(a.degree for a in atoms), d_max=d_max)
    out = []
    for a in atoms:
        b = a * (1.0 / lp_norm(a.on_rule(H.rule), H.rule, p, v))
        out.append(H.norm(b, q, eta))
    return np.array(out)


def run_hankel_verify_pq(s):
    omega, v, eta, f = s.weight("omega"), s.weight("v"), s.weight("eta"), s.f
    p, q = s.p, s.q
    if not p <= q:
        raise DomainError("hankel-verify (p <= q) called with q < p")
    warnings = []
    a_p = ap_constant(omega, eta, p)
    if not np.isfinite(a_p):
        warnings.append("A_p(omega, eta) is infinite")
    crit = criterion_pq(f, v, eta, p, q, s.r, degree=s.d, r_max=s.r_max, n_angles=s.n_angles)
    lat, pou = build_lattice(s)
    atoms = select_atoms(lat, s.n_atoms, s.atom_max)
    est, arg, _ = hankel_norm_estimate(omega, v, eta, f, p, q, atoms, s.n_random, s.d, s.seed)
    ts = radial_levels(s.r_max)
    trend = hankel_atom_profile(omega, v, eta, f, p, q, ts)
    summary = {
        "criterion": crit.as_dict(),
        "norm_estimate": {"value": est, "argmax": arg, "lower_bound": True,
                          "family_size": len(atoms) + s.n_random},
        "atom_trend": {"t": ts, "norm": trend, "vanishing": vanishing_trend(trend)},
        "ap_omega_eta": a_p, "ap_omega_v": ap_constant(omega, v, p),
        "lattice": {"points": len(lat), "multiplicity": lat.multiplicity},
        "warnings": warnings,
    }
    scale = max(crit.sup, est)
    if scale < 1e-6:
        band = 1.0
        summary["trivial"] = True
    else:
        band = crit.sup / est if est > 0 else np.inf
    summary["criterion_over_estimate"] = band
    summary["compact"] = bool(crit.vanishing and vanishing_trend(trend))
    checks = {"criterion_finite": bool(np.isfinite(crit.sup)),
              "band_50": 1 / NORM_BAND <= band <= NORM_BAND}
    if s.validate_decomposition:
        dec = decompose(f, lat, pou, q, s.d)
        chk = dec.validate(validation_points(lat, s.n_validate, s.seed))
        summary["decomposition"] = chk.as_dict()
        checks["decomposition_le_10N"] = max(chk.dbar_sup, chk.f2_sup) <= 10 * lat.multiplicity
    rows = [(float(abs(z)), float(np.angle(z)), float(g), float(c))
            for z, g, c in zip(crit.points, crit.G, crit.values)]
    return _report(s, records=rows, summary=summary, checks=checks, lattice=lat,
                   columns=["abs_z", "angle", "G", "criterion"])


@dataclass
class RademacherResult:
    ratio: float
    mean: float
    stderr: float
    lower_sum: float
    samples: np.ndarray
    trivial: bool = False

    def as_dict(self):
        return {"ratio": self.ratio, "mean": self.mean, "stderr": self.stderr,
                "lower_sum": self.lower_sum, "n_samples": int(len(self.samples)),
                "trivial": self.trivial}


def rademacher_lower_bound(s, lam, n_samples, seed, atoms=None, tiny=1e-12):
    """Monte-Carlo mean over sign patterns of ||H_f(sum_j eps_j lam_j b_{v,a_j})||^q_{L^q_eta},
    divided by sum_k |lam_k|^q G_{q,r}(f)(a_k)^q eta(D(a_k,r)) v(D(a_k,r))^(-q/p)."""
    omega, v, eta, f = s.weight("omega"), s.weight("v"), s.weight("eta"), s.f
    p, q, r = s.p, s.q, s.r
    if not 1 < q < p:
        raise DomainError("rademacher_lower_bound needs 1 < q < p")
    lam = np.asarray(lam, dtype=complex)
    if atoms is None:
        lat = generate_lattice(r, s.r_max, s.seed)
        atoms = lat.points[:len(lam)]
    K = kernel_series(omega, s.d_max)
    raw = [K.atom(a, s.tol) for a in atoms]
    H = HankelFamily(omega, f, max(a.degree for a in raw), d_max=s.d_max)
    cols = []
    for a in raw:
        b = a * (1.0 / lp_norm(a.on_rule(H.rule), H.rule, p, v))
        cols.append(H.values(b))
    M = np.array(cols)                                      # (atoms, nodes)
    rng = np.random.default_rng(seed)
    signs = rng.choice([-1.0, 1.0], size=(n_samples, len(lam)))
    w = H.rule.weights * eta(np.abs(H.rule.nodes))
    # chunked so large sample counts do not materialize a (samples, nodes) array at once
    samples = np.concatenate([np.abs((chunk * lam[None, :]) @ M) ** q @ w
                              for chunk in np.array_split(signs, max(1, n_samples // 64))])
    mean = float(samples.mean())
    stderr = float(samples.std(ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else np.inf
    g = G(f, np.asarray(atoms), r, q, s.d)
    lower = 0.0
    for lk, gk, a in zip(lam, g, atoms):
        rule = rule_for_disc(bergman_disc(a, r))
        lower += abs(lk) ** q * gk ** q * disc_mass(rule, eta) * disc_mass(rule, v) ** (-q / p)
    if mean < tiny and lower < tiny:
        return RademacherResult(1.0, mean, stderr, lower, samples, True)
    return RademacherResult(mean / lower if lower > 0 else np.inf, mean, stderr, lower, samples)


def run_hankel_verify_qp(s):
    omega, v, eta, f = s.weight("omega"), s.weight("v"), s.weight("eta"), s.f
    p, q = s.p, s.q
    if not q < p:
        raise DomainError("hankel-verify (q < p) called with p <= q")
    value, info = criterion_qp(f, v, eta, p, q, s.r, s.d, s.r_max)
    rad = rademacher_lower_bound(s, np.ones(s.n_lambda), s.n_samples, s.seed)
    summary = {"criterion_qp": value, "criterion_info": info, "rademacher": rad.as_dict(),
               "ap_omega_eta": ap_constant(omega, eta, p), "ap_omega_v": ap_constant(omega, v, p)}
    checks = {"criterion_finite": bool(np.isfinite(value)),
              "rademacher_positive": bool(rad.trivial or rad.ratio > 0)}
    lat = None
    if s.validate_decomposition:
        lat, pou = build_lattice(s)
        dec = decompose(f, lat, pou, q, s.d)
        norms = decomposition_lw_norms(dec, v, eta, p, q)
        summary["decomposition_lw"] = norms
        checks["decomposition_finite"] = bool(np.isfinite(norms["dbar_f1"]) and np.isfinite(norms["f2"]))
    ts = np.concatenate([np.arange(0.0, 0.5 - 1e-9, 0.1), radial_levels(s.r_max)])
    pts = circle_points(ts, s.n_angles).ravel()
    g = G(f, pts, s.r, q, s.d)
    rows = [(float(abs(z)), float(np.angle(z)), float(gz)) for z, gz in zip(pts, g)]
    return _report(s, records=rows, summary=summary, checks=checks, lattice=lat,
                   columns=["abs_z", "angle", "G"])


def run_hankel_verify(s):
    return run_hankel_verify_pq(s) if s.p <= s.q else run_hankel_verify_qp(s)


RUNNERS = {
    "classify-weight": run_classify_weight,
    "kernel-check": run_kernel_check,
    "carleson-test": run_carleson_test,
    "bda-profile": run_bda_profile,
    "decompose": run_decompose,
    "hankel-verify": run_hankel_verify,
}
