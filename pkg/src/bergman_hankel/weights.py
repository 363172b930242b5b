"""Radial weights: densities, tails, moments, class tests and two-weight constants."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, ToleranceError
from .quadrature import BOUNDARY_SPAN, radial_integral

DEFAULT_TAIL_TOL = 1e-10
DEFAULT_RTOL = 1e-12
BAND = (1e-3, 1e3)
TINY = 1e-290


@dataclass(frozen=True, eq=False)
class RadialWeight:
    """A radial weight omega(|z|) on the unit disc.

    ``family`` is one of ``power``, ``powerlog``, ``exp``, ``table`` or
    ``product``; ``params`` holds the family parameters. Densities are
    evaluated through the gap ``1 - r`` so that boundary behaviour keeps full
    relative precision. Tails and moments are cached per argument.
    """

    family: str
    params: tuple = ()
    label: str = ""
    _tails: dict = field(default_factory=dict, repr=False, compare=False)
    _moments: dict = field(default_factory=dict, repr=False, compare=False)

    # --- densities -------------------------------------------------------
    def gap_density(self, gap):
        """omega evaluated at r = 1 - gap."""
        d = np.asarray(gap, dtype=float)
        fam, p = self.family, self.params
        with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
            if fam == "power":
                (alpha,) = p
                return (alpha + 1.0) * (d * (2.0 - d)) ** alpha
            if fam == "powerlog":
                alpha, gamma = p
                return (d * (2.0 - d)) ** alpha * (1.0 - np.log(d)) ** gamma
            if fam == "exp":
                (c,) = p
                return np.exp(-c / d)
            if fam == "table":
                rs, vals = p
                # interpolate in the gap so values near r = 1 keep their precision
                return np.interp(d, 1.0 - rs[::-1], vals[::-1])
            if fam == "product":
                out = np.ones_like(d)
                for w, e in p:
                    out = out * w.gap_density(d) ** e
                return out
        raise DomainError(f"unknown weight family {fam!r}")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.gap_density(1.0 - r)

    # --- integrals -------------------------------------------------------
    def tail(self, r, tol=DEFAULT_TAIL_TOL):
        """omega-hat(r): integral of omega over [r, 1)."""
        r = float(r)
        if not 0.0 <= r < 1.0:
            raise DomainError(f"tail needs 0 <= r < 1, got {r}")
        key = (r, tol)
        if key not in self._tails:
            # tail is computed in the gap variable: int_0^{1-r} omega(1-d) dd
            # purely relative budget: tails near the boundary are far below tol
            val = radial_integral(self.gap_density, r, 1.0, 0.0,
                                  rtol=min(DEFAULT_RTOL, tol), boundary=True, of_gap=True)
            val = float(val) + self._remainder(r)
            if not np.isfinite(val):
                raise ToleranceError(f"tail of {self.label or self.family} diverges at r={r}",
                                     best=val)
            self._tails[key] = val
        return self._tails[key]

    def _remainder(self, r):
        """Mass below the truncated end of the boundary substitution.

        omega is treated as a power of the gap there; a local exponent at or
        below -1 means the tail integral diverges.
        """
        eps = (1.0 - r) * np.exp(-BOUNDARY_SPAN)
        w1, w2 = self.gap_density(np.array([eps, 0.5 * eps]))
        if w1 == 0.0:
            return 0.0
        if not (w1 > 0 and w2 > 0):
            raise ToleranceError(f"{self.label or self.family} is not positive near r = 1")
        a = np.log(w1 / w2) / np.log(2.0)
        if a <= -1.0 + 1e-3:
            raise ToleranceError(f"tail of {self.label or self.family} diverges "
                                 f"(local exponent {a:.3g} at r -> 1)", best=np.inf)
        return float(eps * w1 / (1.0 + a))

    def tails(self, rs, tol=DEFAULT_TAIL_TOL):
        return np.array([self.tail(r, tol) for r in np.atleast_1d(rs)])

    def moment(self, x):
        """Integral of s**x * omega(s) over [0, 1]."""
        x = float(x)
        if x <= -1.0:
            raise DomainError(f"moment exponent must exceed -1, got {x}")
        if x not in self._moments:
            self._moments[x] = float(self.moments([x])[0])
        return self._moments[x]

    def moments(self, xs):
        """Vector of moments; the whole vector shares one adaptive panel tree."""
        xs = np.asarray(xs, dtype=float)
        if np.any(xs <= -1.0):
            raise DomainError("moment exponents must exceed -1")
        missing = np.array([x for x in xs if x not in self._moments])
        if len(missing):
            def inner(s):
                return np.power(s[None, :], missing[:, None]) * self(s)

            def outer(gap):
                return np.exp(np.multiply.outer(missing, np.log1p(-gap))) * self.gap_density(gap)

            lo = radial_integral(inner, 0.0, 0.5, 0.0, rtol=DEFAULT_RTOL)
            hi = radial_integral(outer, 0.5, 1.0, 0.0, rtol=DEFAULT_RTOL,
                                 boundary=True, of_gap=True)
            vals = np.atleast_1d(lo + hi)
            if not np.all(np.isfinite(vals)):
                raise DomainError("moment integral diverges")
            for x, v in zip(missing, vals):
                self._moments[float(x)] = float(v)
        return np.array([self._moments[float(x)] for x in xs])

    def bracket(self, z):
        """[omega](z) = omega-hat(|z|) * (1 - |z|)."""
        r = np.abs(np.asarray(z))
        if r.ndim == 0:
            r = float(r)
            return self.tail(r) * (1.0 - r)
        return (self.tails(r.ravel()) * (1.0 - r.ravel())).reshape(r.shape)

    def __repr__(self):
        return f"RadialWeight({self.label or self.family})"


# --- constructors --------------------------------------------------------
def power(alpha):
    """(alpha + 1) * (1 - r**2)**alpha, normalized so that integral of omega dA is 1."""
    if alpha <= -1:
        raise DomainError("power weight needs alpha > -1")
    return RadialWeight("power", (float(alpha),), f"power:alpha={alpha}")


def powerlog(alpha, gamma):
    return RadialWeight("powerlog", (float(alpha), float(gamma)),
                        f"powerlog:alpha={alpha},gamma={gamma}")


def exponential(c=1.0):
    return RadialWeight("exp", (float(c),), f"exp:c={c}")


def table(rs, values, label="table"):
    rs = np.asarray(rs, dtype=float)
    values = np.asarray(values, dtype=float)
    order = np.argsort(rs)
    if np.any(values < 0):
        raise DomainError("table weight has negative values")
    return RadialWeight("table", (rs[order], values[order]), label)


def load_table(path):
    rs, vals = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                r, v = float(row[0]), float(row[1])
            except ValueError:
                continue  # header
            rs.append(r)
            vals.append(v)
    if len(rs) < 2:
        raise DomainError(f"table weight {path} needs at least two rows")
    return table(rs, vals, label=f"table:path={path}")


def product(*factors, label=None):
    """Pointwise product of powers: product(w1, e1, w2, e2, ...) -> prod w_i**e_i."""
    pairs = tuple(zip(factors[0::2], (float(e) for e in factors[1::2])))
    name = label or "*".join(f"({w.label})^{e:g}" for w, e in pairs)
    return RadialWeight("product", pairs, name)


def parse_weight(text, base_dir="."):
    """Parse ``power:alpha=1``, ``powerlog:alpha=1,gamma=0.5``, ``exp:c=1``, ``table:path=f.csv``."""
    text = text.strip()
    kind, _, rest = text.partition(":")
    args = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise DomainError(f"bad weight parameter {item!r} in {text!r}")
        args[key.strip()] = val.strip()
    try:
        if kind == "power":
            return power(float(args.get("alpha", 0.0)))
        if kind == "powerlog":
            return powerlog(float(args.get("alpha", 0.0)), float(args.get("gamma", 0.0)))
        if kind == "exp":
            return exponential(float(args.get("c", 1.0)))
        if kind == "table":
            path = Path(args["path"])
            if not path.is_absolute():
                path = Path(base_dir) / path
            return load_table(path)
    except KeyError as exc:
        raise DomainError(f"weight {text!r} missing parameter {exc}") from None
    raise DomainError(f"unknown weight family in {text!r}")


# --- classification --------------------------------------------------------
@dataclass
class WeightClassReport:
    in_Dhat: bool
    Dhat_C: float
    in_Dcheck: bool
    Dcheck_C: dict
    in_R: bool
    R_band: tuple
    beta: float
    beta_residual: float
    tail_power_band: float
    grid_depth: int
    reduced_confidence: bool = False

    def as_dict(self):
        return {
            "in_Dhat": self.in_Dhat, "Dhat_C": self.Dhat_C,
            "in_Dcheck": self.in_Dcheck,
            "Dcheck_C": {str(k): v for k, v in self.Dcheck_C.items()},
            "in_R": self.in_R, "R_band": list(self.R_band),
            "beta": self.beta, "beta_residual": self.beta_residual,
            "tail_power_band": self.tail_power_band, "grid_depth": self.grid_depth,
            "reduced_confidence": self.reduced_confidence,
        }


def dyadic_grid(depth):
    k = np.arange(1, depth + 1)
    return 1.0 - 2.0 ** (-k.astype(float))


def classify(w, grid_depth=24, band=BAND, dcheck_margin=1e-3):
    """Ratio tests for doubling/reverse-doubling/regularity on r_k = 1 - 2**-k.

    Membership cannot be decided asymptotically; the report carries the grid
    sup/inf values as evidence.
    """
    if grid_depth < 8:
        raise DomainError("grid_depth must be at least 8")
    lo_band, hi_band = band
    # tails at r_1 .. r_{depth+2}; r_{k+1} = (1 + r_k)/2 and r_{k+2} = 1 - (1 - r_k)/4
    rs = dyadic_grid(grid_depth + 2)
    tails = w.tails(rs)
    valid = tails > TINY
    reduced = not bool(np.all(valid))
    n = int(np.argmin(valid)) if reduced else len(rs)
    # the ratio tests look two steps ahead
    m = max(n - 2, 0)
    if m < 2:
        return WeightClassReport(False, np.inf, False, {2: 0.0, 4: 0.0}, False,
                                 (0.0, np.inf), np.nan, np.nan, np.inf, grid_depth, True)
    t = tails[:m + 2]
    dhat_ratios = t[:m] / t[1:m + 1]
    dhat_C = float(np.max(dhat_ratios))
    in_dhat = dhat_C <= hi_band and not reduced

    dcheck = {2: float(np.min(t[:m] / t[1:m + 1])), 4: float(np.min(t[:m] / t[2:m + 2]))}
    in_dcheck = any(c >= 1.0 + dcheck_margin for c in dcheck.values())

    r_m = rs[:m]
    dens = w(r_m) * (1.0 - r_m)
    with np.errstate(divide="ignore", invalid="ignore"):
        reg = t[:m] / dens
    reg = reg[np.isfinite(reg)]
    if len(reg):
        reg_band = (float(np.min(reg)), float(np.max(reg)))
        reg_ok = (reg_band[0] >= lo_band and reg_band[1] <= hi_band
                  and reg_band[1] / reg_band[0] <= hi_band)
    else:
        reg_band, reg_ok = (0.0, np.inf), False

    x = np.log(1.0 - r_m)
    y = np.log(t[:m])
    beta, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (beta * x + intercept)) ** 2)))

    # band of omega-hat(r) / (((1-r)/(1-t))**beta omega-hat(t)) over grid pairs r <= t
    logs = y[:, None] - y[None, :] - beta * (x[:, None] - x[None, :])
    iu = np.triu_indices(m)
    spread = float(np.exp(np.max(np.abs(logs[iu]))))

    in_r = bool(reg_ok and in_dhat and in_dcheck)
    return WeightClassReport(bool(in_dhat), dhat_C, bool(in_dcheck), dcheck, in_r,
                             reg_band, float(beta), resid, spread, grid_depth, reduced)


# --- two-weight constants --------------------------------------------------
def conjugate(p):
    if p <= 1:
        raise DomainError("exponent must exceed 1")
    return p / (p - 1.0)


@dataclass(frozen=True)
class ExponentConfig:
    p: float
    q: float

    def __post_init__(self):
        if self.p <= 1 or self.q <= 1:
            raise DomainError("exponents must lie in (1, inf)")

    @property
    def p_conj(self):
        return conjugate(self.p)

    @property
    def regime(self):
        return "p<=q" if self.p <= self.q else "q<p"


def sigma_weight(omega, v, p):
    """sigma = (omega / v**(1/p))**p'."""
    pc = conjugate(p)
    if omega is v:
        return omega
    return product(omega, pc, v, -pc / p, label=f"sigma[{omega.label};{v.label};p={p}]")


def ap_constant(omega, v, p, grid_depth=24, diagnostics=None):
    """Grid sup of v-hat(r)**(1/p) sigma-hat(r)**(1/p') / omega-hat(r); inf if sigma diverges."""
    pc = conjugate(p)
    sigma = sigma_weight(omega, v, p)
    rs = np.concatenate([[0.0], dyadic_grid(grid_depth)])
    try:
        s_hat = sigma.tails(rs)
    except (ToleranceError, DomainError, FloatingPointError) as exc:
        if diagnostics is not None:
            diagnostics["sigma"] = f"divergent: {exc}"
        return np.inf
    if not np.all(np.isfinite(s_hat)):
        if diagnostics is not None:
            diagnostics["sigma"] = "divergent: sigma-hat(0) is not finite"
        return np.inf
    v_hat = v.tails(rs)
    w_hat = omega.tails(rs)
    ok = w_hat > TINY
    vals = v_hat[ok] ** (1.0 / p) * s_hat[ok] ** (1.0 / pc) / w_hat[ok]
    if diagnostics is not None:
        diagnostics["grid"] = rs[ok].tolist()
        diagnostics["values"] = vals.tolist()
    return float(np.max(vals))


def weight_W(v, eta, p, q, check_points=257):
    """W = eta**(p/(p-q)) * v**(-q/(p-q)) for 1 < q < p."""
    if not 1 < q < p:
        raise DomainError("weight_W needs 1 < q < p")
    rs = np.linspace(0.0, 1.0, check_points, endpoint=False)
    if np.any(v(rs) <= 0):
        raise DomainError(f"{v.label} vanishes; W is undefined")
    if v is eta:
        return v
    e = p / (p - q)
    return product(eta, e, v, -q / (p - q), label=f"W[{eta.label};{v.label};p={p},q={q}]")
