"""Named symbols f with closed-form d-bar, and the config grammar that selects them."""

from __future__ import annotations

import csv
import os

import numpy as np
from scipy.interpolate import CloughTocher2DInterpolator

from .errors import DomainError
from .kernel import AnalyticPoly, SymbolField, poly_symbol


def zbar():
    return SymbolField(np.conj, lambda z: np.ones_like(z), "zbar")


def re_z():
    return SymbolField(lambda z: z.real + 0j, lambda z: np.full_like(z, 0.5), "re_z")


def conj_log1mz():
    """conj(log(1 - z)): a bounded-oscillation symbol whose Hankel operator is not compact."""
    return SymbolField(lambda z: np.conj(np.log1p(-z)),
                       lambda z: np.conj(-1.0 / (1.0 - z)), "conj_log1mz")


def bloch_lacunary(n):
    """conj(sum_{k<n} z**(2**k)); d-bar is the conjugate of the termwise derivative."""
    if n < 1:
        raise DomainError("bloch_lacunary needs n >= 1")
    exps = 2 ** np.arange(n)

    def f(z):
        return np.conj(sum(z ** int(e) for e in exps))

    def df(z):
        return np.conj(sum(int(e) * z ** int(e - 1) for e in exps))

    return SymbolField(f, df, f"bloch_lacunary:n={n}")


def polynomial(coeffs):
    return poly_symbol(AnalyticPoly(np.asarray(coeffs, dtype=complex)),
                       "poly:" + ",".join(repr(complex(c)) for c in coeffs))


def load_symbol_table(path):
    """Symbol sampled on scattered points: CSV columns re, im, f_re, f_im.

    Values are interpolated with a C1 Clough-Tocher scheme; d-bar falls back
    to finite differences.
    """
    pts, vals = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(line for line in fh if not line.startswith("#")):
            pts.append((float(row["re"]), float(row["im"])))
            vals.append(complex(float(row["f_re"]), float(row.get("f_im", 0.0) or 0.0)))
    if len(pts) < 3:
        raise DomainError(f"symbol table {path} needs at least 3 points")
    interp = CloughTocher2DInterpolator(np.array(pts), np.array(vals))

    def f(z):
        z = np.asarray(z, dtype=complex)
        # nan outside the convex hull of the samples
        return interp(z.real.ravel(), z.imag.ravel()).reshape(z.shape)

    return SymbolField(f, None, f"table:path={path}", smooth=False)


def parse_symbol(text, base_dir="."):
    """zbar | re_z | conj_log1mz | bloch_lacunary:n=K | poly:c0,c1,... | table:path=FILE"""
    text = text.strip()
    head, _, rest = text.partition(":")
    if head == "zbar":
        return zbar()
    if head == "re_z":
        return re_z()
    if head == "conj_log1mz":
        return conj_log1mz()
    if head == "bloch_lacunary":
        key, _, val = rest.partition("=")
        if key.strip() != "n":
            raise DomainError(f"bad symbol string {text!r}")
        return bloch_lacunary(int(val))
    if head == "poly":
        return polynomial([complex(c.strip()) for c in rest.split(",") if c.strip()])
    if head == "table":
        key, _, val = rest.partition("=")
        path = val.strip()
        if key.strip() != "path":
            raise DomainError(f"bad symbol string {text!r}")
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        if not os.path.exists(path):
            raise DomainError(f"symbol table {path} not found")
        return load_symbol_table(path)
    raise DomainError(f"unknown symbol {text!r}")
