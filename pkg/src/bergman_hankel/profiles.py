"""Radial profiles with the boundary-trend statistic used for vanishing/compactness flags."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def radial_levels(r_max=0.99, start=0.5, step=0.1):
    """t = 0.5, 0.6, ... below r_max, then r_max itself."""
    ts = list(np.round(np.arange(start, r_max - 1e-9, step), 10))
    return np.array(ts + [r_max])


def circle_points(ts, n_angles):
    """n_angles points on each circle |z| = t, starting on the positive real axis."""
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    return (np.asarray(ts)[:, None] * np.exp(1j * theta)[None, :])


def vanishing_trend(values, drop=0.1, last=4):
    """Decreasing over the last ``last`` entries and final < drop * first entry."""
    v = np.asarray(values, dtype=float)
    if len(v) < last or not np.all(np.isfinite(v)):
        return False
    tail = v[-last:]
    decreasing = bool(np.all(np.diff(tail) < 0)) or bool(np.all(tail == 0))
    return decreasing and bool(v[-1] <= drop * v[0])


@dataclass
class Profile:
    """Per-radius sup of a quantity, plus the overall sup over the sampled points."""

    ts: np.ndarray
    values: np.ndarray
    sup: float
    argmax: complex
    points: np.ndarray = None
    point_values: np.ndarray = None

    @property
    def vanishing(self):
        return vanishing_trend(self.values)

    @property
    def decay_ratio(self):
        return float(self.values[-1] / self.values[0]) if self.values[0] > 0 else 0.0

    def as_dict(self):
        return {
            "t": [float(t) for t in self.ts],
            "profile": [float(v) for v in self.values],
            "sup": float(self.sup),
            "argmax": [float(np.real(self.argmax)), float(np.imag(self.argmax))],
            "vanishing": self.vanishing,
        }


def profile_from_grid(ts, points, values):
    """Collapse values on circle_points(ts, m) to per-radius sups."""
    pts = np.asarray(points).reshape(len(ts), -1)
    vals = np.asarray(values, dtype=float).reshape(len(ts), -1)
    per_t = vals.max(axis=1)
    k = int(np.argmax(vals))
    return Profile(np.asarray(ts), per_t, float(vals.ravel()[k]), complex(pts.ravel()[k]),
                   pts.ravel(), vals.ravel())


def log_slope(abs_z, ratios):
    """Plain least-squares slope of log(ratio) against log(1 - |z|)."""
    x = np.log1p(-np.asarray(abs_z, dtype=float))
    return float(np.polyfit(x, np.log(ratios), 1)[0])


def boundary_exponent(abs_z, ratios, corrections=2):
    """Power-law exponent b in log(ratio) = a + b log(1-|z|) + sum_k c_k (1-|z|)**k.

    The smooth correction terms absorb the O(1 - |z|) drift that every
    disc-average ratio carries away from the boundary, so b isolates a
    genuine power-law trend.
    """
    d = 1.0 - np.asarray(abs_z, dtype=float)
    cols = [np.ones_like(d), np.log(d)] + [d ** k for k in range(1, corrections + 1)]
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), np.log(ratios), rcond=None)
    return float(coef[1])
