"""Seeded experiment runners behind the ``zalka`` command.

Every runner is a pure function of its :class:`ExperimentConfig`.
Trajectory ``i`` always draws from ``RandomStream(master_seed, i)`` and
trajectories are processed in fixed-size chunks, so the worker count never
changes a single output bit.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .evolution import EvolutionConfig, build_grid, evolve, predict_fidelity, predict_many_electron
from .fourier_engine import QftConfig, optimal_depth, qft, qft_gates
from .poschl_teller import PtParams, potential, reference_state
from .quantum_core import RandomStream, fidelity, haar_state

__all__ = [
    "EXPERIMENTS",
    "CHUNK",
    "ConfigError",
    "ExperimentConfig",
    "FidelitySeries",
    "RunRecord",
    "run_aqft_sweep",
    "run_trotter_compare",
    "run_fidelity_vs_time",
    "run_many_electron",
    "run_evolve",
    "run_experiment",
    "emit",
]

EXPERIMENTS = ("aqft_sweep", "trotter_compare", "fidelity_vs_time", "many_electron", "evolve")

# trajectories per work item; fixed so results do not depend on --threads
CHUNK = 50

DEFAULT_NOISE_LEVELS = (0.001, 0.002, 0.003, 0.005, 0.01)


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


_COMMON = dict(
    n_qubits=7,
    e=0.0,
    dt=0.05,
    t_final=1.0,
    scheme="strang",
    depth="full",
    n_states=1000,
    n_trajectories=30,
    registers=None,
    lam=4.0,
    a=1.0,
    L=10.0,
    electrons=list(range(0, 101, 5)),
    noise_levels=list(DEFAULT_NOISE_LEVELS),
    coords_per_electron=3,
    qubits_per_coord=8,
    estimate="improved",
    master_seed=0,
    output="results",
    format="csv",
)

_PER_EXPERIMENT = {
    "aqft_sweep": dict(n_qubits=12, e=0.05, n_states=1000),
    "trotter_compare": dict(n_qubits=7, dt=0.1, e=0.0),
    "fidelity_vs_time": dict(n_qubits=7, e=0.01, dt=0.05, n_trajectories=30),
    "many_electron": dict(dt=0.1, e=0.01),
    "evolve": dict(n_qubits=9, e=0.01, dt=0.05, n_trajectories=30),
}


@dataclass
class ExperimentConfig:
    """Flat experiment description.  ``None`` means "use the experiment default"."""

    experiment: str
    n_qubits: int | None = None
    e: float | None = None
    dt: float | None = None
    t_final: float | None = None
    scheme: str | None = None
    depth: int | str | None = None
    n_states: int | None = None
    n_trajectories: int | None = None
    registers: list[int] | None = None
    lam: float | None = None
    a: float | None = None
    L: float | None = None
    electrons: list[int] | None = None
    noise_levels: list[float] | None = None
    coords_per_electron: int | None = None
    qubits_per_coord: int | None = None
    estimate: str | None = None
    master_seed: int | None = None
    output: str | None = None
    format: str | None = None

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" not in data:
            raise ConfigError("config is missing 'experiment'")
        return cls(**data)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def resolved(self) -> "ExperimentConfig":
        """Copy with every default filled in and all values validated."""
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        defaults = {**_COMMON, **_PER_EXPERIMENT[self.experiment]}
        values = {
            k: (defaults[k] if v is None else v)
            for k, v in self.to_dict().items()
            if k != "experiment"
        }
        if values["registers"] is None:
            values["registers"] = [values["n_qubits"]]
        cfg = ExperimentConfig(self.experiment, **values)
        cfg._validate()
        return cfg

    def _validate(self) -> None:
        def need(cond: bool, msg: str) -> None:
            if not cond:
                raise ConfigError(msg)

        try:
            self.n_qubits = int(self.n_qubits)
            self.e = float(self.e)
            self.dt = float(self.dt)
            self.t_final = float(self.t_final)
            self.n_states = int(self.n_states)
            self.n_trajectories = int(self.n_trajectories)
            self.registers = [int(r) for r in self.registers]
            self.lam, self.a, self.L = float(self.lam), float(self.a), float(self.L)
            self.electrons = [int(k) for k in self.electrons]
            self.noise_levels = [float(x) for x in self.noise_levels]
            self.coords_per_electron = int(self.coords_per_electron)
            self.qubits_per_coord = int(self.qubits_per_coord)
            self.master_seed = int(self.master_seed)
            if self.depth != "full":
                self.depth = int(self.depth)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config value: {exc}") from None
        need(self.n_qubits >= 1, "n_qubits must be >= 1")
        need(all(r >= 1 for r in self.registers), "registers must be >= 1")
        need(self.e >= 0, "noise level e must be >= 0")
        need(self.dt > 0, "dt must be positive")
        need(self.t_final >= 0, "t_final must be >= 0")
        steps = self.t_final / self.dt
        need(abs(steps - round(steps)) < 1e-9, "t_final must be an integer multiple of dt")
        need(self.scheme in ("lie", "strang"), "scheme must be 'lie' or 'strang'")
        smallest = min([self.n_qubits, *self.registers])
        need(self.depth == "full" or 1 <= self.depth <= smallest, "depth must be 'full' or in [1, n_qubits]")
        need(self.n_states >= 1, "n_states must be >= 1")
        need(self.n_trajectories >= 1, "n_trajectories must be >= 1")
        need(self.lam > 1 and self.a > 0 and self.L > 0, "need lam > 1, a > 0, L > 0")
        need(all(k >= 0 for k in self.electrons), "electron counts must be >= 0")
        need(all(x >= 0 for x in self.noise_levels), "noise levels must be >= 0")
        need(self.coords_per_electron >= 1 and self.qubits_per_coord >= 1, "coordinate sizes must be >= 1")
        need(self.estimate in ("basic", "improved"), "estimate must be 'basic' or 'improved'")
        need(self.format in ("csv", "json", "both"), "format must be csv, json or both")
        if self.experiment == "aqft_sweep":
            need(self.n_qubits >= 2, "aqft_sweep needs at least 2 qubits")
        if self.experiment == "fidelity_vs_time":
            need(self.n_trajectories >= 2, "fidelity_vs_time needs at least 2 trajectories")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass
class FidelitySeries:
    times: list[float]
    mean_fidelity: list[float]
    sem: list[float]
    n_trajectories: int


@dataclass
class RunRecord:
    config: dict[str, Any]
    columns: list[str]
    rows: list[list[Any]]
    summary: dict[str, Any] = field(default_factory=dict)
    version: str = __version__
    wall_time: float = 0.0

    @property
    def master_seed(self) -> int:
        return self.config["master_seed"]

    def to_json(self) -> str:
        doc = {
            "config": self.config,
            "master_seed": self.master_seed,
            "version": self.version,
            "wall_time": self.wall_time,
            "columns": self.columns,
            "rows": self.rows,
            "summary": self.summary,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        doc = json.loads(text)
        return cls(
            config=doc["config"],
            columns=doc["columns"],
            rows=doc["rows"],
            summary=doc.get("summary", {}),
            version=doc.get("version", ""),
            wall_time=doc.get("wall_time", 0.0),
        )


def _chunks(total: int) -> list[range]:
    return [range(s, min(total, s + CHUNK)) for s in range(0, total, CHUNK)]


def _parallel_map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _mean_sem(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = values.shape[0]
    mean = values.mean(axis=0)
    if m < 2:
        return mean, np.zeros_like(mean)
    return mean, values.std(axis=0, ddof=1) / math.sqrt(m)


# ---------------------------------------------------------------- AQFT sweep


def _aqft_chunk(cfg: ExperimentConfig, ids: range) -> np.ndarray:
    n, e = cfg.n_qubits, cfg.e
    full = qft_gates(n)
    position = {g: i for i, g in enumerate(full)}
    streams = [RandomStream(cfg.master_seed, i) for i in ids]
    psi = np.stack([haar_state(n, s) for s in streams])
    # one deviate per gate of the full circuit; shallower circuits reuse the
    # deviates of the gates they keep
    xi_full = np.stack([s.normal(len(full)) for s in streams])
    ideal = qft(psi, QftConfig(n))
    losses = np.empty((len(ids), n - 1))
    for col, k0 in enumerate(range(2, n + 1)):
        keep = [position[g] for g in qft_gates(n, k0)]
        out = qft(psi, QftConfig(n, depth=k0, e=e), xi=xi_full[:, keep])
        losses[:, col] = 1.0 - fidelity(ideal, out)
    return losses


def aqft_losses(cfg: ExperimentConfig, threads: int = 1) -> np.ndarray:
    """Per-state fidelity loss, shape ``(n_states, n_qubits - 1)`` for ``k0 = 2..n``."""
    parts = _parallel_map(lambda ids: _aqft_chunk(cfg, ids), _chunks(cfg.n_states), threads)
    return np.concatenate(parts, axis=0)


def run_aqft_sweep(cfg: ExperimentConfig, threads: int = 1) -> list[tuple[int, float, float]]:
    """Rows ``(k0, mean fidelity loss, sem)`` against the ideal full-depth QFT output."""
    losses = aqft_losses(cfg, threads)
    mean, sem = _mean_sem(losses)
    return [(k0, float(m), float(s)) for k0, m, s in zip(range(2, cfg.n_qubits + 1), mean, sem)]


# ------------------------------------------------------------ time evolution


def _evolution_setup(cfg: ExperimentConfig, n: int, scheme: str):
    params = PtParams(cfg.lam, cfg.a)
    grid = build_grid(n, cfg.L)
    ecfg = EvolutionConfig(grid, potential(params), cfg.dt, cfg.n_steps, scheme, cfg.e, cfg.depth)
    return params, grid, ecfg


def _trajectory_fidelities(cfg: ExperimentConfig, n: int, scheme: str, n_traj: int, threads: int):
    params, grid, ecfg = _evolution_setup(cfg, n, scheme)
    psi0 = reference_state(grid, 0.0, params)
    times = [i * cfg.dt for i in range(cfg.n_steps + 1)]
    refs = np.stack([reference_state(grid, t, params) for t in times])

    def work(ids: range):
        streams = [RandomStream(cfg.master_seed, i) for i in ids]
        batch = np.broadcast_to(psi0, (len(ids), grid.N)).copy()
        records = evolve(batch, ecfg, streams if cfg.e > 0 else None)
        return np.stack([fidelity(state, refs[j]) for j, (_, state) in enumerate(records)], axis=1)

    fids = np.concatenate(_parallel_map(work, _chunks(n_traj), threads), axis=0)
    return times, fids


def _series(times, fids) -> FidelitySeries:
    mean, sem = _mean_sem(fids)
    return FidelitySeries(list(times), [float(x) for x in mean], [float(x) for x in sem], fids.shape[0])


def run_trotter_compare(cfg: ExperimentConfig, threads: int = 1) -> tuple[FidelitySeries, FidelitySeries]:
    """Fidelity against the exact solution for the Lie and Strang splittings."""
    n_traj = 1 if cfg.e == 0 else cfg.n_trajectories
    out = []
    for scheme in ("lie", "strang"):
        times, fids = _trajectory_fidelities(cfg, cfg.n_qubits, scheme, n_traj, threads)
        out.append(_series(times, fids))
    return out[0], out[1]


def run_fidelity_vs_time(cfg: ExperimentConfig, threads: int = 1) -> dict[int, dict[str, Any]]:
    """Monte Carlo fidelity and both closed-form predictions, per register size."""
    results = {}
    for n in cfg.registers:
        times, fids = _trajectory_fidelities(cfg, n, cfg.scheme, cfg.n_trajectories, threads)
        results[n] = {
            "series": _series(times, fids),
            "basic": [predict_fidelity(n, cfg.e, t, cfg.dt, "basic") for t in times],
            "improved": [predict_fidelity(n, cfg.e, t, cfg.dt, "improved") for t in times],
        }
    return results


def run_many_electron(cfg: ExperimentConfig) -> list[tuple[int, float, float]]:
    rows = []
    for e in cfg.noise_levels:
        for ne in cfg.electrons:
            f = predict_many_electron(
                ne, cfg.coords_per_electron, cfg.qubits_per_coord, e, cfg.t_final, cfg.dt, cfg.estimate
            )
            rows.append((ne, e, f))
    return rows


def run_evolve(cfg: ExperimentConfig, threads: int = 1) -> dict[str, np.ndarray]:
    """Probability densities at ``t = 0`` and ``t_final``: exact and trajectory-averaged."""
    params, grid, ecfg = _evolution_setup(cfg, cfg.n_qubits, cfg.scheme)
    psi0 = reference_state(grid, 0.0, params)

    def work(ids: range):
        streams = [RandomStream(cfg.master_seed, i) for i in ids]
        batch = np.broadcast_to(psi0, (len(ids), grid.N)).copy()
        final = evolve(batch, ecfg, streams if cfg.e > 0 else None)[-1][1]
        return np.abs(final) ** 2

    dens = np.concatenate(_parallel_map(work, _chunks(cfg.n_trajectories), threads), axis=0)
    return {
        "x": grid.x,
        "density_initial": np.abs(psi0) ** 2,
        "density_exact": np.abs(reference_state(grid, cfg.t_final, params)) ** 2,
        "density_simulated": dens.mean(axis=0),
    }


# ------------------------------------------------------------------- records


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> RunRecord:
    cfg = cfg.resolved()
    start = time.perf_counter()
    summary: dict[str, Any] = {}
    if cfg.experiment == "aqft_sweep":
        rows = run_aqft_sweep(cfg, threads)
        columns = ["k0", "mean_fidelity_loss", "sem"]
        summary["argmin_k0"] = min(rows, key=lambda r: r[1])[0]
        summary["optimal_depth"] = optimal_depth(cfg.e) if cfg.e > 0 else None
    elif cfg.experiment == "trotter_compare":
        lie, strang = run_trotter_compare(cfg, threads)
        columns = ["t", "fidelity_lie", "sem_lie", "fidelity_strang", "sem_strang"]
        rows = [list(r) for r in zip(lie.times, lie.mean_fidelity, lie.sem, strang.mean_fidelity, strang.sem)]
        loss_lie, loss_strang = 1 - lie.mean_fidelity[-1], 1 - strang.mean_fidelity[-1]
        summary["loss_ratio_final"] = loss_lie / loss_strang if loss_strang > 0 else None
    elif cfg.experiment == "fidelity_vs_time":
        res = run_fidelity_vs_time(cfg, threads)
        columns = ["n_qubits", "t", "mean_fidelity", "sem", "predicted_basic", "predicted_improved"]
        rows = []
        for n, r in res.items():
            s = r["series"]
            rows += [[n, t, m, se, b, i] for t, m, se, b, i in zip(s.times, s.mean_fidelity, s.sem, r["basic"], r["improved"])]
    elif cfg.experiment == "many_electron":
        rows = run_many_electron(cfg)
        columns = ["n_electrons", "e", "predicted_fidelity"]
    else:
        dens = run_evolve(cfg, threads)
        columns = ["x", "density_initial", "density_exact", "density_simulated"]
        rows = [list(r) for r in zip(*(dens[c] for c in columns))]
    rows = [[_plain(v) for v in row] for row in rows]
    return RunRecord(cfg.to_dict(), columns, rows, summary, wall_time=time.perf_counter() - start)


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


def _format_cell(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def to_csv(record: RunRecord) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(record.columns)
    for row in record.rows:
        writer.writerow([_format_cell(v) for v in row])
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(record: RunRecord, out: str | os.PathLike, fmt: str = "csv") -> list[Path]:
    """Write the record as CSV and/or JSON next to ``out`` (suffix replaced).

    Raises ``OSError`` naming the offending path when it cannot be written.
    """
    if fmt not in ("csv", "json", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    base = Path(out)
    if base.suffix in (".csv", ".json"):
        base = base.with_suffix("")
    written = []
    targets = {"csv": ["csv"], "json": ["json"], "both": ["csv", "json"]}[fmt]
    for kind in targets:
        path = base.with_name(base.name + "." + kind)
        text = to_csv(record) if kind == "csv" else record.to_json() + "\n"
        try:
            _atomic_write(path, text)
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}", str(path)) from exc
        written.append(path)
    return written
