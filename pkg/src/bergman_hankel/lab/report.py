"""Experiment reports and their deterministic JSON / CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = "1.0"

CSV_HELP = """profile.csv columns depend on the experiment kind:
  classify-weight  k, r, tail, density, doubling_ratio, regular_ratio
  kernel-check     abs_z, B_zz, norm_sq, reproducing_err, kernel_norm, proxy, norm_ratio, disc_ratio
  carleson-test    param, t, ratio
  bda-profile      abs_z, angle, G, criterion
  decompose        abs_z, angle, G2r, dbar_ratio, f2_ratio
  hankel-verify    abs_z, angle, G, criterion  (p <= q)
                   abs_z, angle, G             (q < p)
"""


def _clean(x):
    """JSON-safe, deterministic representation of numpy scalars/arrays and non-finite floats."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(float(x.real)), _clean(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


@dataclass
class ExperimentReport:
    kind: str
    scenario: dict
    records: list = field(default_factory=list)
    columns: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    status: str = "complete"
    error: str = None
    lattice: object = None

    @property
    def passed(self):
        return self.status == "complete" and all(bool(v) for v in self.checks.values())

    def to_json(self):
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "status": self.status,
            "scenario": self.scenario,
            "summary": self.summary,
            "checks": self.checks,
            "passed": self.passed,
            "provenance": self.provenance,
            "records": [dict(zip(self.columns, row)) for row in self.records],
        }
        if self.error:
            doc["error"] = self.error
        return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(self.columns)
        for row in self.records:
            wr.writerow([repr(v) if isinstance(v, float) else v for v in _clean(list(row))])
        return buf.getvalue()


def emit_report(rep, out_dir, formats=("json", "csv")):
    """Write report.json / profile.csv (and lattice.csv when a lattice was built); returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if "json" in formats:
        path = os.path.join(out_dir, "report.json")
        with open(path, "w") as fh:
            fh.write(rep.to_json())
        paths.append(path)
    if "csv" in formats:
        path = os.path.join(out_dir, "profile.csv")
        with open(path, "w") as fh:
            fh.write(rep.to_csv())
        paths.append(path)
        if rep.lattice is not None:
            path = os.path.join(out_dir, "lattice.csv")
            rep.lattice.to_csv(path)
            paths.append(path)
    return paths
