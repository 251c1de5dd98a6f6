"""Locate and schema-check the trace files of one granuflow run directory.

The plotting layer never recomputes physics: every file is parsed against the
exact header the tracker writes and any mismatch fails loudly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_HEADERS = {
    "interactions.csv": "t,x,fam_in_1,rho_in_1,fam_in_2,rho_in_2,fams_out,"
                        "rho_out_h,rho_out_p,V,Q,G",
    "fronts.csv": "family,kind,t0,x0,t1,x1,speed,gamma,rho",
    "functionals.csv": "t,V,Q,G",
}


class SchemaError(RuntimeError):
    """A trace file does not match the expected schema."""


@dataclass
class TraceBundle:
    root: Path
    config: dict
    snapshot_times: list = field(default_factory=list)

    @classmethod
    def open(cls, run_dir) -> "TraceBundle":
        root = Path(run_dir)
        cfg_path = root / "config.json"
        if not cfg_path.exists():
            raise SchemaError(f"{root}: missing config.json sidecar")
        config = json.loads(cfg_path.read_text())
        if not str(config.get("version", "")).startswith("granuflow-"):
            raise SchemaError(f"{root}: unrecognized version tag {config.get('version')}")
        for name, header in _HEADERS.items():
            path = root / name
            if path.exists():
                first = path.read_text().splitlines()[0]
                if first != header:
                    raise SchemaError(f"{path}: header {first!r} != {header!r}")
        times = []
        snapdir = root / "snapshots"
        if snapdir.is_dir():
            for f in snapdir.glob("snap_t=*.csv"):
                times.append(float(f.stem.split("=", 1)[1]))
        return cls(root, config, sorted(times))

    def _table(self, name):
        path = self.root / name
        if not path.exists():
            raise SchemaError(f"{path}: missing")
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        return rows

    def interactions(self):
        rows = self._table("interactions.csv")
        return dict(
            t=np.array([float(r["t"]) for r in rows]),
            x=np.array([float(r["x"]) for r in rows]),
            G=np.array([float(r["G"]) for r in rows]))

    def fronts(self):
        rows = self._table("fronts.csv")
        out = []
        for r in rows:
            out.append(dict(family=int(r["family"]), kind=r["kind"],
                            t0=float(r["t0"]), x0=float(r["x0"]),
                            t1=float(r["t1"]), x1=float(r["x1"]),
                            rho=float(r["rho"])))
        return out

    def functionals(self):
        rows = self._table("functionals.csv")
        cols = {}
        for key in rows[0]:
            cols[key] = np.array([float(r[key]) for r in rows])
        return cols

    def phi_series(self):
        rows = self._table("phi_series.csv")
        cols = {}
        for key in rows[0]:
            cols[key] = np.array([float(r[key]) for r in rows])
        return cols

    def snapshot(self, t):
        match = [s for s in self.snapshot_times if abs(s - t) < 1e-12]
        if not match:
            raise SchemaError(f"no snapshot at t={t}; have {self.snapshot_times}")
        path = self.root / "snapshots" / f"snap_t={t:.17g}.csv"
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        meta = self.root / "snapshots" / f"meta_t={t:.17g}.json"
        far = json.loads(meta.read_text())["far_left"] if meta.exists() else None
        xs = np.array([float(r["x"]) for r in rows])
        hs = np.array([float(r["h"]) for r in rows])
        ps = np.array([float(r["p"]) for r in rows])
        return xs, hs, ps, far
