"""Bergman kernels of radial weights, projections, Hankel operators and kernel norms."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, PreconditionError, TruncationError
from .geometry import bergman_disc
from .quadrature import disc_mass, radial_integral, rule_for_disc, unit_disc_rule

MAX_PRODUCT = 0.995
DEFAULT_D_MAX = 400


class ProjectionWarning(UserWarning):
    """Projection degree close to or beyond what the rule resolves."""


# --- analytic polynomials -----------------------------------------------------
@dataclass(frozen=True, eq=False)
class AnalyticPoly:
    """sum_k coeffs[k] * ((z - center) / scale)**k."""

    coeffs: np.ndarray
    center: complex = 0j
    scale: float = 1.0

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, z):
        u = (np.asarray(z, dtype=complex) - self.center) / self.scale
        out = np.zeros_like(u)
        for c in self.coeffs[::-1]:
            out = out * u + c
        return out

    def derivative(self, k=1):
        c = np.asarray(self.coeffs, dtype=complex)
        for _ in range(k):
            c = c[1:] * np.arange(1, len(c)) / self.scale
            if len(c) == 0:
                c = np.zeros(1, dtype=complex)
        return AnalyticPoly(c, self.center, self.scale)

    def __add__(self, other):
        if (other.center, other.scale) != (self.center, self.scale):
            raise DomainError("cannot add polynomials in different local coordinates")
        n = max(len(self.coeffs), len(other.coeffs))
        c = np.zeros(n, dtype=complex)
        c[:len(self.coeffs)] += self.coeffs
        c[:len(other.coeffs)] += other.coeffs
        return AnalyticPoly(c, self.center, self.scale)

    def __mul__(self, s):
        return AnalyticPoly(np.asarray(self.coeffs) * s, self.center, self.scale)

    __rmul__ = __mul__

    def on_rule(self, rule):
        """Values at the nodes of ``rule``; FFT synthesis on origin-centred polar rules."""
        if self.center == 0 and self.scale == 1.0 and rule.center == 0:
            return polar_synthesis(self.coeffs, rule)
        return self(rule.nodes)


def polar_synthesis(coeffs, rule):
    """Evaluate sum c_n z^n on a polar rule centred at 0 by folding modulo n_angular."""
    c = np.asarray(coeffs, dtype=complex)
    m = rule.n_angular
    n = np.arange(len(c))
    powers = c[None, :] * rule.radii[:, None] ** n[None, :]
    pad = (-len(c)) % m
    folded = np.pad(powers, ((0, 0), (0, pad))).reshape(rule.n_radial, -1, m).sum(axis=1)
    return (np.fft.ifft(folded, axis=1) * m).ravel()


def polar_analysis(values, rule, degree, weight=None):
    """Integrals of F * conj(z)**n * weight dA for n = 0..degree on an origin-centred polar rule."""
    m = rule.n_angular
    grid = rule.grid(values)
    fhat = np.fft.fft(grid, axis=1) / m
    radial_w = rule.grid(rule.weights)[:, 0] * m
    if weight is not None:
        radial_w = radial_w * weight(rule.radii)
    n = np.arange(degree + 1)
    cols = fhat[:, n % m]
    return np.einsum("i,in,in->n", radial_w, rule.radii[:, None] ** n[None, :], cols)


# --- symbols ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class SymbolField:
    """A symbol f on the disc, optionally with a closed-form d-bar f."""

    func: object
    dbar: object = None
    name: str = "f"
    smooth: bool = True
    analytic: bool = False

    def __call__(self, z):
        return np.asarray(self.func(np.asarray(z, dtype=complex)), dtype=complex)

    def dbar_fd(self, z, h=1e-5):
        """Centred finite-difference d-bar = (d/dx + i d/dy) / 2."""
        z = np.asarray(z, dtype=complex)
        dx = (self(z + h) - self(z - h)) / (2 * h)
        dy = (self(z + 1j * h) - self(z - 1j * h)) / (2 * h)
        return 0.5 * (dx + 1j * dy)

    def check_dbar(self, z, h=1e-5):
        """Max relative mismatch between closed-form and finite-difference d-bar."""
        if self.dbar is None:
            raise PreconditionError(f"symbol {self.name} has no closed-form d-bar")
        exact = np.asarray(self.dbar(np.asarray(z, dtype=complex)))
        fd = self.dbar_fd(z, h)
        return float(np.max(np.abs(exact - fd) / np.maximum(np.abs(exact), 1.0)))


def poly_symbol(poly, name=None):
    return SymbolField(poly, lambda z: np.zeros_like(z), name or f"poly(deg={poly.degree})",
                       analytic=True)


# --- kernel series ------------------------------------------------------------------
class KernelSeries:
    """B(z, zeta) = sum_n kappa_n (z conj(zeta))**n with kappa_n = 1 / (2 moment(2n + 1))."""

    def __init__(self, weight, d_max=DEFAULT_D_MAX):
        self.weight = weight
        self.d_max = int(d_max)
        n = np.arange(self.d_max + 2)
        self.kappa = 1.0 / (2.0 * weight.moments(2 * n + 1))
        self.kappa.setflags(write=False)
        # ratio majorant: sup_{m >= n} kappa_{m+1} / kappa_m over the table
        ratios = self.kappa[1:] / self.kappa[:-1]
        self._ratio_sup = np.maximum.accumulate(ratios[::-1])[::-1]

    def _falling(self, deriv, length=None):
        n = np.arange(self.d_max + 2 if length is None else length, dtype=float)
        f = np.ones_like(n)
        for k in range(deriv):
            f = f * np.clip(n - k, 0, None)
        return f

    def degree_for(self, x, tol=1e-14, deriv=0):
        """Smallest degree d whose geometric tail bound is <= tol * (partial majorant)."""
        x = float(x)
        if x > MAX_PRODUCT:
            raise DomainError(f"|z conj(zeta)| = {x} exceeds the convergence margin {MAX_PRODUCT}")
        if x == 0:
            return deriv
        fall = self._falling(deriv)
        n = np.arange(self.d_max + 2)
        terms = self.kappa * fall * x ** np.maximum(n - deriv, 0)
        partial = np.cumsum(terms)
        # tail after degree d: term_{d+1} / (1 - growth), growth bounds successive ratios
        growth = self._ratio_sup[:self.d_max + 1] * x
        if deriv:
            ext = self._falling(deriv, self.d_max + 3)
            growth = growth * ext[2:] / np.maximum(ext[1:-1], 1)
        with np.errstate(divide="ignore"):
            bound = np.where(growth < 1, terms[1:] / (1 - growth), np.inf)
        ok = np.nonzero(bound <= tol * partial[:-1])[0]
        ok = ok[ok >= deriv]
        if len(ok) == 0:
            raise TruncationError(f"kernel tail above {tol} at degree {self.d_max} for |z zeta| = {x}",
                                  best=float(partial[-2]), bound=float(bound[-1]))
        return int(ok[0])

    def coefficients(self, d, deriv=0):
        return self.kappa[:d + 1] * self._falling(deriv)[:d + 1]

    def __call__(self, z, zeta, tol=1e-14, deriv=0):
        """B(z, zeta) or its deriv-th derivative in z."""
        z = np.asarray(z, dtype=complex)
        zeta = np.asarray(zeta, dtype=complex)
        zz, ww = np.broadcast_arrays(z, zeta)
        x = zz * np.conj(ww)
        d = self.degree_for(np.max(np.abs(x), initial=0.0), tol, deriv)
        c = self.coefficients(d, deriv)
        out = np.zeros_like(x)
        for k in range(d, deriv - 1, -1):
            out = out * zz * np.conj(ww) + c[k] * np.conj(ww) ** deriv
        return out

    def diag(self, z, tol=1e-14):
        return self(z, z, tol).real

    def atom(self, a, tol=1e-14, r_eval=1.0):
        """B_a(z) = B(z, a) as an AnalyticPoly accurate for |z| <= r_eval."""
        d = self.degree_for(abs(a) * r_eval, tol)
        n = np.arange(d + 1)
        return AnalyticPoly(self.kappa[:d + 1] * np.conj(complex(a)) ** n)


@lru_cache(maxsize=32)
def kernel_series(weight, d_max=DEFAULT_D_MAX):
    return KernelSeries(weight, d_max)


def kernel_eval(K, z, zeta, tol=1e-14):
    return K(z, zeta, tol)


def rule_for_degree(degree, r_max=1.0, min_angular=256):
    """Unit-disc rule whose angular resolution keeps degree-`degree` products alias free."""
    m = min_angular
    while m < 2 * degree + 16:
        m *= 2
    return unit_disc_rule(r_max=r_max, n_angular=m)


def lp_norm(values, rule, p, weight=None):
    w = rule.weights if weight is None else rule.weights * weight(np.abs(rule.nodes))
    return float(np.dot(w, np.abs(values) ** p) ** (1.0 / p))


# --- projection and Hankel operators ------------------------------------------------
def project(omega, F, d, rule=None, kernel=None):
    """Bergman projection truncated to degree d: c_n = kappa_n * int F conj(z)^n omega dA."""
    if rule is None:
        rule = rule_for_degree(d)
    if kernel is None:
        kernel = kernel_series(omega, max(DEFAULT_D_MAX, d + 1))
    if d > kernel.d_max:
        raise DomainError(f"projection degree {d} exceeds kernel table {kernel.d_max}")
    vals = F(rule.nodes) if callable(F) else np.asarray(F)
    if rule.center == 0:
        if d >= rule.n_angular // 2:
            warnings.warn(f"degree {d} aliases on {rule.n_angular} angular nodes", ProjectionWarning)
        moments = polar_analysis(vals, rule, d, omega)
    else:
        warnings.warn("projection on a non-polar rule uses the direct sum", ProjectionWarning)
        w = rule.weights * omega(np.abs(rule.nodes)) * vals
        moments = np.array([np.dot(w, np.conj(rule.nodes) ** n) for n in range(d + 1)])
    return AnalyticPoly(kernel.kappa[:d + 1] * moments)


@dataclass(frozen=True, eq=False)
class HankelField:
    """z -> f(z) g(z) - P_omega(f g)(z)."""

    symbol: SymbolField
    g: object
    projected: AnalyticPoly

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.symbol(z) * _eval(self.g, z) - self.projected(z)

    def on_rule(self, rule, g_values=None):
        gv = _eval_on_rule(self.g, rule) if g_values is None else g_values
        return self.symbol(rule.nodes) * gv - self.projected.on_rule(rule)


def _eval(g, z):
    return g(z) if callable(g) else np.full(np.shape(z), complex(g))


def _eval_on_rule(g, rule):
    if isinstance(g, AnalyticPoly):
        return g.on_rule(rule)
    return _eval(g, rule.nodes)


def hankel_apply(omega, f, g, d, rule=None, kernel=None):
    """H_f(g) = f g - P_omega(f g) with the projection truncated at degree d."""
    if rule is None:
        deg_g = g.degree if isinstance(g, AnalyticPoly) else 0
        rule = rule_for_degree(d + deg_g)
    gv = _eval_on_rule(g, rule)
    proj = project(omega, f(rule.nodes) * gv, d, rule, kernel)
    return HankelField(f, g, proj)


def hankel_norm(field, rule, q, eta=None):
    """||H_f(g)||_{L^q_eta} on a quadrature rule."""
    return lp_norm(field.on_rule(rule), rule, q, eta)


# --- kernel norms -----------------------------------------------------------------
def kernel_norm(omega, v, p, z, r=1.0, rule=None, tol=1e-13, d_max=1600):
    """(||B_z^omega||_{A^p_v} by quadrature, v(D(z,r))**(1/p) / omega(D(z,r)))."""
    if p <= 1:
        raise DomainError("kernel_norm needs p > 1")
    K = kernel_series(omega, d_max)
    atom = K.atom(z, tol)
    if rule is None:
        rule = rule_for_degree(atom.degree)
    value = lp_norm(atom.on_rule(rule), rule, p, v)
    disc_r = rule_for_disc(bergman_disc(z, r))
    proxy = disc_mass(disc_r, v) ** (1.0 / p) / disc_mass(disc_r, omega)
    return value, proxy


def kernel_deriv_norm_proxy(omega, v, p, n, z):
    """(int_0^{|z|} v-hat(t) / (omega-hat(t)**p (1 - t)**(p (n + 1))) dt)**(1/p)."""
    if p <= 1 or n < 0:
        raise DomainError("need p > 1 and n >= 0")
    x = float(abs(z))
    if x == 0:
        return 0.0

    def integrand(t):
        return np.array([v.tail(s) / (omega.tail(s) ** p * (1.0 - s) ** (p * (n + 1))) for s in t])

    val = radial_integral(integrand, 0.0, x, 0.0, rtol=1e-10)
    return float(val) ** (1.0 / p)


def kernel_deriv_norm(omega, v, p, n, z, tol=1e-13, d_max=1600, rule=None):
    """||(B_z^omega)^{(n)}||_{A^p_v} by quadrature of the differentiated series."""
    atom = kernel_series(omega, d_max).atom(z, tol).derivative(n)
    if rule is None:
        rule = rule_for_degree(atom.degree + n)
    return lp_norm(atom.on_rule(rule), rule, p, v)


def normalized_atom(omega, v, p, a, rule=None, d_max=1600, tol=1e-13):
    """b_{v,a} = B_a^omega / ||B_a^omega||_{A^p_v}."""
    atom = kernel_series(omega, d_max).atom(a, tol)
    if rule is None:
        rule = rule_for_degree(atom.degree)
    norm = lp_norm(atom.on_rule(rule), rule, p, v)
    return atom * (1.0 / norm), norm


@dataclass
class AtomicResult:
    function: AnalyticPoly
    norm: float
    lambda_norm: float
    ratio: float
    atom_norms: np.ndarray


def atomic_function(lam, points, omega, v, p, rule=None, ap_limit=None, d_max=1600, tol=1e-13):
    """F = sum_j lam_j B_{z_j}^omega / ||B_{z_j}^omega||_{A^p_v} and ||F||_{A^p_v} / ||lam||_{l^p}."""
    from .weights import ap_constant

    lam = np.asarray(lam, dtype=complex)
    pts = np.asarray(getattr(points, "points", points), dtype=complex)[:len(lam)]
    if len(pts) < len(lam):
        raise DomainError("fewer points than coefficients")
    a_p = ap_constant(omega, v, p) if ap_limit is None else ap_limit
    if not np.isfinite(a_p):
        raise PreconditionError("A_p(omega, v) is infinite")
    K = kernel_series(omega, d_max)
    atoms = [K.atom(a, tol) for a in pts]
    deg = max(a.degree for a in atoms)
    if rule is None:
        rule = rule_for_degree(deg)
    coeffs = np.zeros(deg + 1, dtype=complex)
    norms = np.empty(len(atoms))
    for j, (lj, atom) in enumerate(zip(lam, atoms)):
        norms[j] = lp_norm(atom.on_rule(rule), rule, p, v)
        coeffs[:atom.degree + 1] += lj / norms[j] * atom.coeffs
    F = AnalyticPoly(coeffs)
    f_norm = lp_norm(F.on_rule(rule), rule, p, v)
    l_norm = float(np.sum(np.abs(lam) ** p) ** (1.0 / p))
    return AtomicResult(F, f_norm, l_norm, f_norm / l_norm, norms)


def random_polynomials(n, degree, seed, v=None, p=2.0, rule=None):
    """Seeded complex-Gaussian polynomials normalized in A^p_v."""
    rng = np.random.default_rng(seed)
    if rule is None:
        rule = rule_for_degree(degree)
    out = []
    for _ in range(n):
        c = (rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)) / np.sqrt(2)
        poly = AnalyticPoly(c)
        out.append(poly * (1.0 / lp_norm(poly.on_rule(rule), rule, p, v)))
    return out
