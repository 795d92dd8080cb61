"""Run configuration, (delta21 x r) sweeps and CSV/JSON export.

Config files are JSON. Every rate, detuning and Rabi frequency is in units
of gamma; ``density`` is in cm^-3, ``wavelength_um`` in micrometres and
``gamma_abs`` in rad/s. Missing keys take the default operating point.
"""
from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from . import __version__
from .atomsys import (
    DecayNetwork,
    DriveConfig,
    LevelScheme,
    MediumConfig,
    ProbeConfig,
    SystemConfig,
)
from .errors import ConfigError, InvalidInputError, NirgasError
from .index import track_branch
from .response import phase_averaged_response
from .steady import SolverSettings

log = logging.getLogger(__name__)

HEADLINE_PUMP_RATES = (0.0, 0.2512e-2, 1e-2, 1.679e-2, 1.698e-2, 1.799e-2)

CSV_COLUMNS = (
    "delta21", "r",
    "eps_re", "eps_im", "mu_re", "mu_im",
    "xiEH_re", "xiEH_im", "xiHE_re", "xiHE_im",
    "n_re", "n_im",
    "fom", "branch", "r2_e", "r2_m", "converged",
)  # fmt: skip


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    delta_min: float = -100.0
    delta_max: float = 100.0
    delta_count: int = 201
    pump_rates: Tuple[float, ...] = (0.0,)
    solver: SolverSettings = field(default_factory=SolverSettings)
    phases: int = 16
    output: Optional[str] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.delta_count < 1:
            raise ConfigError("detuning count must be at least 1", field="detuning.count")
        if self.delta_count > 1 and not self.delta_min < self.delta_max:
            raise ConfigError("detuning min must be below max", field="detuning.min")
        if self.delta_count == 1 and self.delta_min > self.delta_max:
            raise ConfigError("detuning min must not exceed max", field="detuning.min")
        rates = tuple(float(r) for r in self.pump_rates)
        if not rates:
            raise ConfigError("pump-rate list must not be empty", field="pump_rates")
        if any(r < 0 for r in rates):
            raise ConfigError("pump rates must be non-negative", field="pump_rates")
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ConfigError("pump rates must be strictly ascending", field="pump_rates")
        object.__setattr__(self, "pump_rates", rates)
        if self.phases < 1:
            raise ConfigError("phase-sample count must be at least 1", field="phases")

    def detunings(self):
        if self.delta_count == 1:
            return np.array([self.delta_min])
        return np.linspace(self.delta_min, self.delta_max, self.delta_count)

    def to_dict(self):
        s = self.system
        return {
            "levels": {"gap": s.levels.gap, "transitions": [list(t) for t in s.levels.transitions]},
            "drive": {
                "omega31": _encode_complex(s.drive.omega31),
                "omega42": _encode_complex(s.drive.omega42),
                "effective_gap": s.drive.effective_gap,
                "delta31": s.drive.delta31,
                "delta54": s.drive.delta54,
                "phase": s.drive.phase,
                "polarization": s.drive.polarization,
            },
            "decay": {"rates": [list(r) for r in s.decay.rates], "gamma_c": s.decay.gamma_c},
            "medium": dataclasses.asdict(s.medium),
            "probe": {"w_e": list(s.probe.w_e), "w_b": s.probe.w_b},
            "detuning": {"min": self.delta_min, "max": self.delta_max, "count": self.delta_count},
            "pump_rates": list(self.pump_rates),
            "solver": dataclasses.asdict(self.solver),
            "phases": self.phases,
            "output": self.output,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        data = dict(data)
        _reject_unknown(data, _TOP_KEYS, "")
        try:
            levels = LevelScheme(**_levels_kwargs(data.pop("levels", {})))
            drive_kw = _section(data.pop("drive", {}), "drive", _DRIVE_KEYS)
            for key in ("omega31", "omega42"):
                if key in drive_kw:
                    drive_kw[key] = _decode_complex(drive_kw[key], f"drive.{key}")
            drive = DriveConfig(**drive_kw)
            decay_kw = _section(data.pop("decay", {}), "decay", {"rates", "gamma_c"})
            if decay_kw.get("rates") is None:
                decay_kw.pop("rates", None)
                decay = DecayNetwork.from_levels(levels, **decay_kw)
            else:
                decay = DecayNetwork(**decay_kw)
            medium = MediumConfig(**_section(data.pop("medium", {}), "medium", _MEDIUM_KEYS))
            probe_kw = _section(data.pop("probe", {}), "probe", {"w_e", "w_b"})
            if isinstance(probe_kw.get("w_e"), dict):
                g = _section(probe_kw["w_e"], "probe.w_e", {"min", "max", "count"})
                probe_kw["w_e"] = tuple(np.linspace(g["min"], g["max"], int(g["count"])).tolist())
            probe = ProbeConfig(**probe_kw)
            solver = SolverSettings(**_section(data.pop("solver", {}), "solver", _SOLVER_KEYS))
        except InvalidInputError as exc:
            raise ConfigError(str(exc)) from exc
        except TypeError as exc:
            raise ConfigError(f"bad value: {exc}") from exc
        system = SystemConfig(levels=levels, drive=drive, decay=decay, medium=medium, probe=probe)
        det = _section(data.pop("detuning", {}), "detuning", {"min", "max", "count"})
        kwargs = {"system": system, "solver": solver}
        if "min" in det:
            kwargs["delta_min"] = _number(det["min"], "detuning.min")
        if "max" in det:
            kwargs["delta_max"] = _number(det["max"], "detuning.max")
        if "count" in det:
            kwargs["delta_count"] = int(_number(det["count"], "detuning.count"))
        if "pump_rates" in data:
            rates = data.pop("pump_rates")
            if isinstance(rates, (int, float)):
                rates = [rates]
            kwargs["pump_rates"] = tuple(_number(r, "pump_rates") for r in rates)
        if "phases" in data:
            kwargs["phases"] = int(_number(data.pop("phases"), "phases"))
        for key in ("output", "seed"):
            if key in data:
                kwargs[key] = data.pop(key)
        return cls(**kwargs)


_TOP_KEYS = {
    "levels", "drive", "decay", "medium", "probe", "detuning",
    "pump_rates", "solver", "phases", "output", "seed",
}  # fmt: skip
_DRIVE_KEYS = {"omega31", "omega42", "effective_gap", "delta31", "delta54", "phase", "polarization"}
_MEDIUM_KEYS = {f.name for f in dataclasses.fields(MediumConfig)}
_SOLVER_KEYS = {f.name for f in dataclasses.fields(SolverSettings)}


def _reject_unknown(data, allowed, prefix):
    extra = sorted(set(data) - set(allowed))
    if extra:
        raise ConfigError(f"unknown configuration key(s): {', '.join(prefix + k for k in extra)}", field=prefix + extra[0])


def _section(data, name, allowed):
    if not isinstance(data, dict):
        raise ConfigError(f"section {name!r} must be an object", field=name)
    _reject_unknown(data, allowed, name + ".")
    return dict(data)


def _levels_kwargs(data):
    data = _section(data, "levels", {"gap", "transitions"})
    if "transitions" in data:
        data["transitions"] = tuple(tuple(t) for t in data["transitions"])
    return data


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}", field=name)
    return float(value)


def _encode_complex(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _decode_complex(v, name):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(_number(v[0], name), _number(v[1], name))
    x = _number(v, name)
    return x


def load_config(path):
    """Read a JSON run configuration, filling the default operating point."""
    path = Path(path)
    text = path.read_text()
    if not text.strip():
        return RunConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}", line=exc.lineno) from exc
    return RunConfig.from_dict(data)


def dump_config(cfg, path=None):
    text = json.dumps(cfg.to_dict(), indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepRow:
    delta21: float
    r: float
    eps: Optional[complex] = None
    mu: Optional[complex] = None
    xi_eh: Optional[complex] = None
    xi_he: Optional[complex] = None
    n: Optional[complex] = None
    fom: Optional[float] = None
    branch: Optional[str] = None
    r2_e: Optional[float] = None
    r2_m: Optional[float] = None
    converged: bool = False
    flags: List[str] = field(default_factory=list)


@dataclass
class SweepResult:
    metadata: dict
    rows: List[SweepRow]

    @property
    def flagged(self):
        return [row for row in self.rows if row.flags]

    def column(self, name):
        return np.array([getattr(row, name) for row in self.rows])

    def grid(self, name):
        """Values of ``name`` reshaped to (pump rate, detuning)."""
        rates = sorted({row.r for row in self.rows})
        deltas = sorted({row.delta21 for row in self.rows})
        return np.array(self.column(name), dtype=object).reshape(len(rates), len(deltas))


def _run_column(args):
    cfg, delta = args
    system = cfg.system.replace(delta21=float(delta))
    done = []
    rows = {}
    for r in cfg.pump_rates:
        row = SweepRow(delta21=float(delta), r=float(r))
        rows[r] = row
        try:
            rc = phase_averaged_response(system.replace(pump=float(r)), cfg.phases, cfg.solver)
        except NirgasError as exc:
            row.flags.append(f"failed: {exc}")
            continue
        row.eps, row.mu = complex(rc.eps), complex(rc.mu)
        row.xi_eh, row.xi_he = rc.xi_eh, rc.xi_he
        row.r2_e, row.r2_m = rc.r2_e, rc.r2_m
        row.converged = True
        if rc.nonlinear:
            row.flags.append("nonlinear-regime")
        done.append((r, rc))
    path = track_branch(done, cfg.system.drive.polarization, delta21=float(delta))
    for k, ((r, _), pt) in enumerate(zip(done, path.points)):
        row = rows[r]
        row.n, row.fom, row.branch = pt.n, pt.fom, pt.branch
        if pt.branch_point:
            row.flags.append("branch-point")
        if k in path.flagged:
            row.flags.append("branch-jump")
    return list(rows.values())


def run_sweep(cfg, workers=1):
    """Phase-averaged response and branch-tracked index on the (delta21, r) grid.

    Detuning columns are independent and may run in worker processes; within
    a column the pump rates are processed in ascending order so that the
    square-root branch can be threaded along r.
    """
    tasks = [(cfg, d) for d in cfg.detunings()]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(_run_column, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        columns = [_run_column(t) for t in tasks]
    rows = [row for col in columns for row in col]
    rows.sort(key=lambda row: (row.r, row.delta21))
    meta = {
        "tool": "nirgas",
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "config": cfg.to_dict(),
    }
    return SweepResult(meta, rows)


# ---------------------------------------------------------------------------
# export


def _split(z):
    if z is None:
        return None, None
    return z.real, z.imag


def _row_record(row):
    rec = {"delta21": row.delta21, "r": row.r}
    for name, key in (("eps", "eps"), ("mu", "mu"), ("xiEH", "xi_eh"), ("xiHE", "xi_he"), ("n", "n")):
        rec[f"{name}_re"], rec[f"{name}_im"] = _split(getattr(row, key))
    rec.update(
        fom=row.fom, branch=row.branch, r2_e=row.r2_e, r2_m=row.r2_m, converged=row.converged
    )
    return rec


def _row_from_record(rec):
    def join(name):
        re, im = rec.get(f"{name}_re"), rec.get(f"{name}_im")
        return None if re is None else complex(re, im)

    return SweepRow(
        delta21=rec["delta21"],
        r=rec["r"],
        eps=join("eps"),
        mu=join("mu"),
        xi_eh=join("xiEH"),
        xi_he=join("xiHE"),
        n=join("n"),
        fom=rec.get("fom"),
        branch=rec.get("branch"),
        r2_e=rec.get("r2_e"),
        r2_m=rec.get("r2_m"),
        converged=bool(rec.get("converged")),
        flags=list(rec.get("flags", [])),
    )


def export_csv(res, path):
    """CSV with ``#`` metadata lines and the fixed column layout; missing values are empty."""
    buf = io.StringIO()
    for key, value in res.metadata.items():
        buf.write(f"# {key}: {json.dumps(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in res.rows:
        rec = _row_record(row)
        writer.writerow(["" if rec[c] is None else _fmt(rec[c]) for c in CSV_COLUMNS])
    Path(path).write_text(buf.getvalue())


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def read_csv(path):
    """Inverse of :func:`export_csv`; returns a :class:`SweepResult` (flags are not stored in CSV)."""
    meta, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            meta[key] = json.loads(value)
        else:
            body.append(line)
    reader = csv.DictReader(body)
    rows = []
    for raw in reader:
        rec = {}
        for k, v in raw.items():
            if v == "":
                rec[k] = None
            elif k == "branch":
                rec[k] = v
            elif k == "converged":
                rec[k] = v == "1"
            else:
                rec[k] = float(v)
        rows.append(_row_from_record(rec))
    return SweepResult(meta, rows)


def export_json(res, path):
    rows = []
    for row in res.rows:
        rec = _row_record(row)
        if rec["fom"] is not None and math.isinf(rec["fom"]):
            rec["fom"] = "inf"
        rec["flags"] = list(row.flags)
        rows.append(rec)
    Path(path).write_text(json.dumps({"metadata": res.metadata, "rows": rows}, indent=1) + "\n")


def read_json(path):
    data = json.loads(Path(path).read_text())
    rows = []
    for rec in data["rows"]:
        if rec.get("fom") == "inf":
            rec["fom"] = math.inf
        rows.append(_row_from_record(rec))
    return SweepResult(data["metadata"], rows)
