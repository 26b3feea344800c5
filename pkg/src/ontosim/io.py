"""File formats and run records.

Every output file begins with a single JSON header line carrying the run
record (seed, theory, constants, grid, Hamiltonian digest), which is enough
to reproduce the file. Formats:

* flash history: JSON Lines, header then one ``{"t":..., "x":..., "label":...}``
  object per flash;
* matter density: header line, then little-endian float64 in time-major
  order;
* trajectory: header line, a CSV column row ``t,q1,...``, then CSV rows;
* complex field: header line (grid spec, endianness), then interleaved
  re/im little-endian float64;
* 1D density: CSV of ``position,value`` rows;
* test reports: plain JSON.

Writers are atomic (write to a sibling temp file, then rename).
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .bohm import Trajectory
from .dynamics import (
    DoubleWellPotential,
    FreePotential,
    HamiltonianSpec,
    HarmonicPotential,
    TabulatedPotential,
)
from .grids import ComplexField, GridSpec, RealField1D
from .grw import Flash, FlashHistory, TheoryParams
from .ontology import MatterDensity

__all__ = [
    "RunRecord",
    "write_flashes",
    "read_flashes",
    "write_matter_density",
    "read_matter_density",
    "write_trajectory",
    "read_trajectory",
    "write_complex_field",
    "read_complex_field",
    "write_real_field_csv",
    "read_real_field_csv",
    "write_report",
    "hamiltonian_to_config",
    "hamiltonian_from_config",
]

THEORIES = ("bm", "grwf", "grwf_linear", "grwm", "sm", "sf", "sf_prime", "grwp", "bmw")


@dataclass(frozen=True)
class RunRecord:
    """Reproducibility envelope: everything that determines a run's output
    (given the software version). Wall-clock timestamps are deliberately not
    serialized so repeated runs are byte-identical."""

    master_seed: int
    theory: str
    grid: dict
    params: dict
    hamiltonian_digest: str
    initial_state: str
    run_index: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.theory not in THEORIES:
            raise ValueError(f"unknown theory {self.theory!r}")

    def to_json(self) -> str:
        return json.dumps(
            {
                "run_record": {
                    "master_seed": self.master_seed,
                    "theory": self.theory,
                    "grid": self.grid,
                    "params": self.params,
                    "hamiltonian_digest": self.hamiltonian_digest,
                    "initial_state": self.initial_state,
                    "run_index": self.run_index,
                    "extra": self.extra,
                }
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        data = json.loads(line)["run_record"]
        return cls(**data)

    @classmethod
    def build(
        cls,
        master_seed: int,
        theory: str,
        grid: GridSpec,
        params: TheoryParams | None,
        h: HamiltonianSpec,
        initial_state: str,
        run_index: int = 0,
        **extra,
    ) -> "RunRecord":
        pdict = {}
        if params is not None:
            pdict = {
                "lambda_rate": params.lambda_rate,
                "sigma": params.sigma,
                "per_label_rates": list(params.per_label_rates) if params.per_label_rates else None,
            }
        gdict = {
            "n_particles": grid.n_particles,
            "cells": grid.cells,
            "length": grid.length,
            "origin": grid.origin,
        }
        return cls(
            master_seed=master_seed,
            theory=theory,
            grid=gdict,
            params=pdict,
            hamiltonian_digest=h.digest(),
            initial_state=initial_state,
            run_index=run_index,
            extra=dict(extra),
        )

    def grid_spec(self) -> GridSpec:
        return GridSpec(**self.grid)


def _atomic_write(path: Path, payload: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_flashes(path: Path, record: RunRecord, flashes: FlashHistory) -> None:
    lines = [record.to_json()]
    for fl in flashes:
        lines.append(json.dumps({"t": fl.t, "x": fl.x, "label": fl.label}))
    _atomic_write(Path(path), ("\n".join(lines) + "\n").encode())


def read_flashes(path: Path) -> tuple[RunRecord, FlashHistory]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        record = RunRecord.from_json(header)
        flashes = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            flashes.append(Flash(d["t"], d["x"], d["label"]))
    return record, FlashHistory(tuple(flashes))


def write_matter_density(path: Path, record: RunRecord, density: MatterDensity) -> None:
    header = json.loads(record.to_json())
    header["matter_density"] = {
        "n_times": int(density.times.size),
        "cells": density.cells,
        "length": density.length,
        "origin": density.origin,
        "total_mass": density.total_mass,
        "dtype": "<f8",
        "layout": "time-major",
    }
    blob = json.dumps(header, sort_keys=True).encode() + b"\n"
    blob += density.times.astype("<f8").tobytes()
    blob += density.values.astype("<f8").tobytes()
    _atomic_write(Path(path), blob)


def read_matter_density(path: Path) -> tuple[RunRecord, MatterDensity]:
    raw = Path(path).read_bytes()
    cut = raw.index(b"\n")
    header = json.loads(raw[:cut].decode())
    record = RunRecord(**header["run_record"])
    meta = header["matter_density"]
    body = np.frombuffer(raw[cut + 1 :], dtype="<f8")
    n_t, cells = meta["n_times"], meta["cells"]
    times = body[:n_t]
    values = body[n_t : n_t + n_t * cells].reshape(n_t, cells)
    density = MatterDensity(
        times=times,
        cells=cells,
        length=meta["length"],
        origin=meta["origin"],
        values=values,
        total_mass=meta["total_mass"],
    )
    return record, density


def write_trajectory(path: Path, record: RunRecord, tr: Trajectory) -> None:
    n = tr.n_particles
    lines = [record.to_json(), "t," + ",".join(f"q{i + 1}" for i in range(n))]
    for t, q in zip(tr.times, tr.configs):
        lines.append(",".join([repr(float(t))] + [repr(float(v)) for v in q]))
    _atomic_write(Path(path), ("\n".join(lines) + "\n").encode())


def read_trajectory(path: Path) -> tuple[RunRecord, Trajectory]:
    with open(path, "r", encoding="utf-8") as fh:
        record = RunRecord.from_json(fh.readline())
        fh.readline()  # column row
        rows = [[float(v) for v in line.strip().split(",")] for line in fh if line.strip()]
    arr = np.asarray(rows)
    return record, Trajectory(arr[:, 0], arr[:, 1:])


def write_complex_field(path: Path, record: RunRecord, psi: ComplexField) -> None:
    header = json.loads(record.to_json())
    header["complex_field"] = {
        "grid": {
            "n_particles": psi.grid.n_particles,
            "cells": psi.grid.cells,
            "length": psi.grid.length,
            "origin": psi.grid.origin,
        },
        "dtype": "<f8",
        "layout": "interleaved re/im, row-major",
    }
    inter = np.empty(psi.grid.size * 2)
    flat = psi.values.reshape(-1)
    inter[0::2] = flat.real
    inter[1::2] = flat.imag
    blob = json.dumps(header, sort_keys=True).encode() + b"\n" + inter.astype("<f8").tobytes()
    _atomic_write(Path(path), blob)


def read_complex_field(path: Path) -> tuple[RunRecord, ComplexField]:
    raw = Path(path).read_bytes()
    cut = raw.index(b"\n")
    header = json.loads(raw[:cut].decode())
    record = RunRecord(**header["run_record"])
    grid = GridSpec(**header["complex_field"]["grid"])
    inter = np.frombuffer(raw[cut + 1 :], dtype="<f8")
    flat = inter[0::2] + 1j * inter[1::2]
    return record, ComplexField(grid, flat.reshape(grid.shape))


def write_real_field_csv(path: Path, f: RealField1D) -> None:
    lines = ["position,value"]
    for x, v in zip(f.axis_coords(), f.values):
        lines.append(f"{float(x)!r},{float(v)!r}")
    _atomic_write(Path(path), ("\n".join(lines) + "\n").encode())


def read_real_field_csv(path: Path, length: float | None = None) -> RealField1D:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        fh.readline()
        for line in fh:
            if line.strip():
                x, v = line.strip().split(",")
                rows.append((float(x), float(v)))
    xs = np.array([r[0] for r in rows])
    vs = np.array([r[1] for r in rows])
    dx = xs[1] - xs[0]
    return RealField1D(len(rows), length if length is not None else dx * len(rows), vs, origin=xs[0])


def write_report(path: Path, reports: Iterable) -> None:
    payload = {
        "reports": [r.to_json_dict() for r in reports],
        "all_passed": all(r.passed for r in reports),
    }
    _atomic_write(Path(path), json.dumps(payload, indent=2, sort_keys=True).encode() + b"\n")


def write_readout(path: Path, record: RunRecord, readout) -> None:
    """Pointer-readout result as JSON: {run_id, theory, region}."""
    payload = {
        "run_id": f"{record.master_seed}/{record.run_index}",
        "theory": record.theory,
        "region": readout.region,
        "fraction": readout.fraction,
    }
    _atomic_write(Path(path), json.dumps(payload, sort_keys=True).encode() + b"\n")


def load_tabulated_potential(path: Path) -> np.ndarray:
    """Real variant of the complex-field binary format: the stored real part
    becomes the potential table (imaginary part must vanish)."""
    _, field_data = read_complex_field(path)
    if float(np.max(np.abs(field_data.values.imag))) > 1e-12:
        raise ValueError("potential file carries a nonzero imaginary part")
    return field_data.values.real.copy()


def hamiltonian_to_config(h: HamiltonianSpec) -> dict:
    pot = h.potential
    pd: dict = {"kind": pot.kind}
    if isinstance(pot, HarmonicPotential):
        pd["omegas"] = list(pot.omegas)
        if pot.centers is not None:
            pd["centers"] = list(pot.centers)
    elif isinstance(pot, DoubleWellPotential):
        pd["height"] = pot.height
        pd["separation"] = pot.separation
    elif isinstance(pot, TabulatedPotential):
        raise ValueError("tabulated potentials are loaded from field files, not config")
    return {
        "masses": list(h.masses),
        "hbar": h.hbar,
        "potential": pd,
        "vector_potential": list(h.vector_potential) if h.vector_potential else None,
        "charges": list(h.charges) if h.charges else None,
    }


def hamiltonian_from_config(cfg: dict, tabulated: np.ndarray | None = None) -> HamiltonianSpec:
    pd = cfg.get("potential", {"kind": "free"})
    kind = pd.get("kind", "free")
    if kind == "free":
        pot = FreePotential()
    elif kind == "harmonic":
        pot = HarmonicPotential(
            omegas=tuple(pd["omegas"]),
            centers=tuple(pd["centers"]) if pd.get("centers") else None,
        )
    elif kind == "double_well":
        pot = DoubleWellPotential(height=pd["height"], separation=pd["separation"])
    elif kind == "tabulated":
        if tabulated is None:
            raise ValueError("tabulated potential requires a field file")
        pot = TabulatedPotential(values=tabulated)
    else:
        raise ValueError(f"unknown potential kind {kind!r}")
    return HamiltonianSpec(
        masses=tuple(cfg["masses"]),
        hbar=cfg.get("hbar", 1.0),
        potential=pot,
        vector_potential=tuple(cfg["vector_potential"]) if cfg.get("vector_potential") else None,
        charges=tuple(cfg["charges"]) if cfg.get("charges") else None,
    )
