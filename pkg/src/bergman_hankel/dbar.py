"""Solution of d-bar u = g d-bar f by patchwise Cauchy transforms glued with kernel factors.

u(z) = sum_j B_j(z) int phi_j(xi) g(xi) dbar f(xi) / (B_j(xi) (z - xi)) dA(xi),
B_j = B_{a_j} for the lattice points a_j. With dA = dx dy / pi the Cauchy
kernel 1 / (z - xi) has d-bar equal to the point mass at z, so d-bar u = g
dbar f wherever the partition of unity sums to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LatticeError, PreconditionError
from .geometry import bergman_disc
from .kernel import AnalyticPoly, polar_analysis
from .quadrature import gauss_legendre, rule_for_disc, unit_disc_rule

CHUNK = 200_000


class UnweightedKernel:
    """B(z, a) = 1 / (1 - z conj(a))**2, the kernel of the unweighted Bergman space."""

    def __call__(self, z, a, tol=None):
        z = np.asarray(z, dtype=complex)
        return 1.0 / (1.0 - z * np.conj(np.asarray(a, dtype=complex))) ** 2


def _g_values(g, z):
    if g is None:
        return np.ones_like(z)
    if isinstance(g, AnalyticPoly) or callable(g):
        return np.asarray(g(z), dtype=complex)
    return np.full_like(z, complex(g))


@dataclass
class DbarSolution:
    """Evaluator for u; patch data are kept at quadrature-node level."""

    f: object
    g: object
    pou: object
    kernel: object
    centers: np.ndarray        # Euclidean centers of the patch discs
    radii: np.ndarray
    nodes: np.ndarray          # all patch nodes, concatenated
    owner: np.ndarray          # patch index of each node
    coef: np.ndarray           # quadrature weight * psi_j at each node
    n_theta: int = 96
    n_rho: int = 24
    min_kernel: float = np.nan
    _cand: dict = None

    @property
    def lattice(self):
        return self.pou.lattice

    def _candidates(self, j):
        if self._cand is None:
            self._cand = {}
        if j not in self._cand:
            self._cand[j] = self.pou.patch_candidates(j)
        return self._cand[j]

    def psi(self, xi, owner):
        """phi_j g dbar f / B_j at points xi of patch owner (xi inside D(a_j, r))."""
        phi = np.zeros(len(xi))
        order = np.argsort(owner, kind="stable")
        bounds = np.flatnonzero(np.diff(owner[order])) + 1
        for grp in np.split(order, bounds):
            if len(grp):
                j = int(owner[grp[0]])
                phi[grp] = self.pou.phi_on_patch(xi[grp], j, self._candidates(j))
        a = self.lattice.points[owner]
        B = self.kernel(xi, a, 1e-12)
        return phi * _g_values(self.g, xi) * self.f.dbar(xi) / B

    def _near(self, z, inside):
        """Cauchy integrals over patches containing z, on polar rules centred at z."""
        zi, ji = np.nonzero(inside)
        if len(zi) == 0:
            return np.zeros(len(z), dtype=complex)
        theta = 2 * np.pi * (np.arange(self.n_theta) + 0.5) / self.n_theta
        e = np.exp(1j * theta)
        x, w = gauss_legendre(self.n_rho, 0.0, 1.0)
        d = z[zi] - self.centers[ji]
        proj = (np.conj(d)[:, None] * e[None, :]).real
        disc = proj ** 2 + self.radii[ji, None] ** 2 - np.abs(d)[:, None] ** 2
        rho_max = -proj + np.sqrt(np.maximum(disc, 0.0))              # (pairs, theta)
        rho = rho_max[:, :, None] * x[None, None, :]
        xi = z[zi, None, None] + rho * e[None, :, None]
        owner = np.broadcast_to(ji[:, None, None], xi.shape)
        psi = self.psi(xi.ravel(), owner.ravel()).reshape(xi.shape)
        # (1/pi) int psi / (z - xi) rho drho dtheta = -(1/pi) int psi e^{-i theta} drho dtheta
        inner = np.einsum("ptl,l->pt", psi, w) * rho_max
        I = -(2.0 / self.n_theta) * np.einsum("pt,t->p", inner, np.conj(e))
        B = self.kernel(z[zi], self.lattice.points[ji], 1e-12)
        return np.bincount(zi, (B * I).real, len(z)) + 1j * np.bincount(zi, (B * I).imag, len(z))

    def __call__(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.zeros(len(z), dtype=complex)
        step = max(1, CHUNK // max(len(self.nodes), 1))
        pts = self.lattice.points
        for s in range(0, len(z), step):
            zc = z[s:s + step]
            inside = np.abs(zc[:, None] - self.centers[None, :]) < self.radii[None, :]
            Bz = self.kernel(zc[:, None], pts[None, :], 1e-12)                 # (m, patches)
            far = ~inside[:, self.owner]
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = np.where(far, self.coef[None, :] / (zc[:, None] - self.nodes[None, :]), 0.0)
            sums = np.zeros((len(zc), len(pts)), dtype=complex)
            for k in range(len(zc)):
                sums[k] = (np.bincount(self.owner, terms[k].real, len(pts))
                           + 1j * np.bincount(self.owner, terms[k].imag, len(pts)))
            out[s:s + step] = np.sum(Bz * sums, axis=1) + self._near(zc, inside)
        return out


def dbar_solve(f, g, lat, pou, kernel=None, n_radial=24, n_angular=48, n_theta=96, n_rho=24):
    """u with d-bar u = g d-bar f on the region where the partition of unity sums to one.

    ``kernel`` is any callable K(z, a, tol); it defaults to the unweighted
    kernel. A KernelSeries may be passed to glue with a weighted kernel.
    """
    if f.dbar is None:
        raise PreconditionError(f"symbol {f.name} has no closed-form d-bar")
    if kernel is None:
        kernel = UnweightedKernel()
    centers, radii, nodes, owner, wts = [], [], [], [], []
    for j, a in enumerate(lat.points):
        disc = bergman_disc(a, lat.r)
        rule = rule_for_disc(disc, n_radial, n_angular, refine_above=1.0)
        centers.append(disc.euclidean_center)
        radii.append(disc.euclidean_radius)
        nodes.append(rule.nodes)
        wts.append(rule.weights)
        owner.append(np.full(rule.size, j))
    sol = DbarSolution(f, g, pou, kernel, np.array(centers), np.array(radii),
                       np.concatenate(nodes), np.concatenate(owner), None, n_theta, n_rho)
    B = kernel(sol.nodes, lat.points[sol.owner], 1e-12)
    scale = np.abs(kernel(lat.points, lat.points, 1e-12))[sol.owner]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(scale > 0, np.abs(B) / scale, 0.0)
    ratio = np.nan_to_num(ratio, nan=0.0)
    zeros = _zero_count(kernel, lat.points, sol.centers, sol.radii)
    if np.min(ratio) < 1e-12 or np.any(zeros != 0):
        k = int(np.argmax(zeros != 0)) if np.any(zeros != 0) else int(sol.owner[np.argmin(ratio)])
        raise LatticeError(f"kernel B_{k} vanishes on its patch (patch-singular)")
    sol.min_kernel = float(np.min(ratio))
    sol.coef = np.concatenate(wts) * sol.psi(sol.nodes, sol.owner)
    return sol


def _zero_count(kernel, points, centers, radii, n=512):
    """Zeros of z -> B(z, a_j) inside each patch disc by the argument principle."""
    e = np.exp(2j * np.pi * np.arange(n + 1) / n)
    ring = centers[:, None] + radii[:, None] * e[None, :]
    vals = kernel(ring, points[:, None], 1e-12)
    with np.errstate(divide="ignore", invalid="ignore"):
        steps = np.angle(vals[:, 1:] / vals[:, :-1])
    turns = np.nansum(steps, axis=1) / (2 * np.pi)
    bad = ~np.all(np.isfinite(vals) & (vals != 0), axis=1)
    return np.where(bad, -1, np.rint(turns).astype(int))


def dbar_fd(u, z, h=1e-5):
    z = np.asarray(z, dtype=complex)
    dx = (u(z + h) - u(z - h)) / (2 * h)
    dy = (u(z + 1j * h) - u(z - 1j * h)) / (2 * h)
    return 0.5 * (dx + 1j * dy)


def disc_projection(values, rule, degree):
    """Unweighted Bergman projection onto analytic functions on {|z| < R}, R = rule.radius.

    Returns coefficients of sum c_n (z / R)**n.
    """
    R = rule.radius
    n = np.arange(degree + 1)
    mom = polar_analysis(values, rule, degree) / R ** n
    return AnalyticPoly((n + 1) / R ** 2 * mom, 0j, R)


@dataclass
class DbarCheck:
    residual: float
    reference: float
    relative: float
    n_nodes: int


def consistency_residual(sol, R0, degree=24, n_angular=64, order=8):
    """||(u - P u) - (f g - P(f g))|| / ||f g - P(f g)|| on {|z| < R0}, P the disc projection."""
    if R0 >= sol.lattice.r_max:
        raise PreconditionError("check radius must lie inside the lattice truncation")
    rule = unit_disc_rule(r_max=R0, n_angular=n_angular, order=order, levels=3)
    u = sol(rule.nodes)
    fg = sol.f(rule.nodes) * _g_values(sol.g, rule.nodes)
    hu = u - disc_projection(u, rule, degree)(rule.nodes)
    hf = fg - disc_projection(fg, rule, degree)(rule.nodes)
    w = rule.weights
    res = float(np.sqrt(np.dot(w, np.abs(hu - hf) ** 2)))
    ref = float(np.sqrt(np.dot(w, np.abs(hf) ** 2)))
    return DbarCheck(res, ref, res / ref if ref > 0 else res, rule.size)
