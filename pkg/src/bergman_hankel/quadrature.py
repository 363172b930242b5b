"""Radial and disc quadrature with the normalized area measure dA = dx dy / pi."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, ToleranceError

PANEL_ORDER = 15
# u-range appended after the boundary substitution s = 1 - exp(-u)
BOUNDARY_SPAN = 60.0


@lru_cache(maxsize=64)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n, a, b):
    """Gauss-Legendre nodes and weights mapped to [a, b]."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _panel(f, a, b, order):
    x, w = gauss_legendre(order, a, b)
    vals = np.asarray(f(x))
    return vals @ w


def _adaptive(f, a, b, tol, rtol, order, max_panels):
    """Bisection with fixed-order Gauss panels.

    A panel is accepted when the whole-panel estimate agrees with the sum over
    its two halves to within its share of the error budget. ``f`` may return
    arrays of shape (..., n) for vector-valued integrands.
    """
    length = b - a
    if length == 0:
        return 0.0 * _panel(f, a, a + 1.0, order), 0.0
    stack = [(a, b, _panel(f, a, b, order))]
    total = 0.0
    err_total = 0.0
    n_panels = 0
    while stack:
        lo, hi, whole = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _panel(f, lo, mid, order)
        right = _panel(f, mid, hi, order)
        halves = left + right
        diff = np.abs(halves - whole)
        share = (hi - lo) / length
        # componentwise budget; the floor keeps underflowing integrands from stalling
        budget = np.maximum(max(tol * share, 1e-300), rtol * np.abs(halves))
        err = np.max(diff)
        n_panels += 1
        if np.all(diff <= budget) or hi - lo < 1e-14 * max(1.0, abs(lo)):
            total = total + halves
            err_total += err
            continue
        if n_panels > max_panels:
            best = total + halves + sum(p[2] for p in stack)
            raise ToleranceError(
                f"adaptive quadrature on [{a}, {b}] exceeded {max_panels} panels",
                best=best, bound=err_total + err)
        stack.append((mid, hi, right))
        stack.append((lo, mid, left))
    return total, err_total


def radial_integral(f, a, b, tol=1e-10, *, rtol=0.0, order=PANEL_ORDER,
                    max_panels=20000, boundary=False, of_gap=False):
    """Adaptive integral of ``f`` over [a, b] within [0, 1].

    boundary:
        substitute s = 1 - exp(-u) so nodes cluster at the endpoint s = 1
        (requires b == 1). The u-range is truncated ``BOUNDARY_SPAN`` units
        past its start, which is negligible for any integrable radial weight.
    of_gap:
        ``f`` is a function of the gap 1 - s instead of s; avoids cancellation
        in densities such as (1 - s**2)**alpha near the boundary.
    """
    if not (0.0 <= a <= b <= 1.0):
        raise DomainError(f"radial interval [{a}, {b}] not inside [0, 1]")
    if boundary:
        if b != 1.0:
            raise DomainError("boundary substitution needs b == 1")
        if a == 1.0:
            return 0.0
        u0 = -np.log1p(-a)

        def g(u):
            gap = np.exp(-u)
            val = f(gap) if of_gap else f(1.0 - gap)
            return np.asarray(val) * gap

        value, _ = _adaptive(g, u0, u0 + BOUNDARY_SPAN, tol, rtol, order, max_panels)
        return value

    func = (lambda s: f(1.0 - s)) if of_gap else f
    value, _ = _adaptive(func, a, b, tol, rtol, order, max_panels)
    return value


@dataclass(frozen=True, eq=False)
class DiscRule:
    """Polar product rule on a Euclidean disc.

    Nodes are stored radius-major: ``nodes.reshape(n_radial, n_angular)``
    recovers the polar grid. Weights integrate against the normalized area
    measure, so they sum to ``radius**2``.
    """

    center: complex
    radius: float
    radii: np.ndarray
    n_angular: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n_radial(self):
        return len(self.radii)

    @property
    def size(self):
        return len(self.nodes)

    def grid(self, values):
        return np.asarray(values).reshape(self.n_radial, self.n_angular)


def _polar_rule(center, radii, radial_w, n_angular):
    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    rho = np.asarray(radii, dtype=float)
    nodes = center + (rho[:, None] * np.exp(1j * theta[None, :])).ravel()
    weights = np.repeat(2.0 * rho * radial_w / n_angular, n_angular)
    return DiscRule(complex(center), float(rho[-1] if len(rho) else 0.0),
                    rho, n_angular, nodes, weights)


def disc_rule(center, radius, n_radial=48, n_angular=96):
    """Gauss-Legendre in radius times uniform trapezoid in angle."""
    if radius <= 0:
        raise DomainError("disc radius must be positive")
    rho, w = gauss_legendre(n_radial, 0.0, radius)
    rule = _polar_rule(center, rho, w, n_angular)
    return DiscRule(rule.center, float(radius), rule.radii, n_angular,
                    rule.nodes, rule.weights)


def rule_for_disc(disc, n_radial=48, n_angular=96, refine_above=0.9):
    """Rule on the Euclidean realization of a Bergman disc; doubled near the boundary."""
    if abs(disc.center) > refine_above:
        n_radial, n_angular = 2 * n_radial, 2 * n_angular
    return disc_rule(disc.euclidean_center, disc.euclidean_radius, n_radial, n_angular)


def graded_breaks(r_max=1.0, levels=14):
    """Panel breakpoints 0, 1/2, 3/4, ... accumulating at 1, clipped to r_max."""
    breaks = [0.0] + [1.0 - 2.0 ** (-k) for k in range(1, levels + 1)]
    breaks = [b for b in breaks if b < r_max]
    return np.array(breaks + [r_max])


def unit_disc_rule(r_max=1.0, n_angular=512, order=16, levels=14):
    """Polar rule on {|z| < r_max} centred at 0 with radial panels graded toward 1."""
    breaks = graded_breaks(r_max, levels)
    rho, w = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        x, ww = gauss_legendre(order, lo, hi)
        rho.append(x)
        w.append(ww)
    rule = _polar_rule(0.0, np.concatenate(rho), np.concatenate(w), n_angular)
    return DiscRule(0j, float(r_max), rule.radii, n_angular, rule.nodes, rule.weights)


def disc_integral(F, rule, weight=None):
    """Sum of weights * F(nodes) (optionally times a radial weight in |node|)."""
    vals = F(rule.nodes) if callable(F) else np.asarray(F)
    vals = np.asarray(vals)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        node = rule.nodes[np.argmax(bad)]
        raise ToleranceError(f"integrand not finite at node {node!r}")
    w = rule.weights
    if weight is not None:
        w = w * weight(np.abs(rule.nodes))
    return np.dot(w, vals)


def disc_mass(rule, weight=None):
    if weight is None:
        return float(np.sum(rule.weights))
    return float(np.dot(rule.weights, weight(np.abs(rule.nodes))))


def lq_mean(F, disc, q, weight=None, n_radial=48, n_angular=96):
    """((1/m(D)) * integral over D of |F|**q dm) ** (1/q), m = dA or weight*dA."""
    if q <= 0:
        raise DomainError("q must be positive")
    rule = rule_for_disc(disc, n_radial, n_angular)
    return lq_mean_on_rule(F, rule, q, weight)


def lq_mean_on_rule(F, rule, q, weight=None):
    mass = disc_mass(rule, weight)
    if not mass > 0:
        raise DomainError("disc has zero mass")
    vals = F(rule.nodes) if callable(F) else np.asarray(F)
    return float((disc_integral(np.abs(vals) ** q, rule, weight).real / mass) ** (1.0 / q))
