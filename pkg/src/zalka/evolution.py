"""Split-operator time stepping on a qubit register.

One step applies the potential phase in the coordinate basis, moves to the
momentum basis with the (possibly noisy, possibly approximate) QFT, applies
the kinetic phase, and comes back with the inverse QFT.  Natural units,
``hbar = m = 1``.

Two splittings are offered.  ``lie`` is ``T(dt) V(dt)``; ``strang`` is
``V(dt/2) T(dt) V(dt/2)``.  Both use exactly two Fourier transforms per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Literal, Union

import numpy as np

from .fourier_engine import Depth, QftConfig, Streams, fidelity_estimate_basic, fidelity_estimate_improved, iqft, qft
from .quantum_core import n_qubits_of

__all__ = [
    "SpatialGrid",
    "EvolutionConfig",
    "build_grid",
    "momentum_of_index",
    "apply_potential_phase",
    "apply_kinetic_phase",
    "step",
    "evolve",
    "predict_fidelity",
    "predict_many_electron",
]

Potential = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]
Scheme = Literal["lie", "strang"]
Estimate = Literal["basic", "improved"]


@dataclass(frozen=True)
class SpatialGrid:
    """``N = 2**n`` points ``x_j = -L + j*dx`` on the periodic box ``[-L, L)``."""

    n: int
    L: float

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @cached_property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    @cached_property
    def p(self) -> np.ndarray:
        return momentum_of_index(self, np.arange(self.N))


def build_grid(n: int, L: float) -> SpatialGrid:
    if n < 1:
        raise ValueError("need at least one qubit")
    if L <= 0:
        raise ValueError("box half-width must be positive")
    return SpatialGrid(n, float(L))


def momentum_of_index(grid: SpatialGrid, j):
    """Signed-frequency momentum; ``j = N/2`` is the most negative value."""
    j = np.asarray(j)
    if np.any((j < 0) | (j >= grid.N)):
        raise ValueError(f"momentum index out of range [0, {grid.N})")
    s = np.where(j < grid.N // 2, j, j - grid.N)
    p = 2.0 * math.pi / (grid.N * grid.dx) * s
    return float(p) if p.ndim == 0 else p


def _potential_values(grid: SpatialGrid, V: Potential) -> np.ndarray:
    if callable(V):
        return np.asarray(V(grid.x), dtype=float)
    values = np.asarray(V, dtype=float)
    if values.shape != (grid.N,):
        raise ValueError(f"potential array must have {grid.N} entries")
    return values


def apply_potential_phase(state: np.ndarray, grid: SpatialGrid, V: Potential, tau: float) -> np.ndarray:
    if state.shape[-1] != grid.N:
        raise ValueError(f"state length {state.shape[-1]} does not match grid size {grid.N}")
    return state * np.exp(-1j * tau * _potential_values(grid, V))


def apply_kinetic_phase(state: np.ndarray, grid: SpatialGrid, tau: float) -> np.ndarray:
    if state.shape[-1] != grid.N:
        raise ValueError(f"state length {state.shape[-1]} does not match grid size {grid.N}")
    return state * np.exp(-0.5j * tau * grid.p**2)


@dataclass(frozen=True)
class EvolutionConfig:
    grid: SpatialGrid
    potential: Potential
    dt: float
    n_t: int
    scheme: Scheme = "strang"
    e: float = 0.0
    qft_depth: Depth = "full"
    record_every: int = 1

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("time step must be positive")
        if self.n_t < 0:
            raise ValueError("number of steps must be non-negative")
        if self.scheme not in ("lie", "strang"):
            raise ValueError(f"unknown Trotter scheme {self.scheme!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")

    @property
    def t_final(self) -> float:
        return self.n_t * self.dt

    @cached_property
    def qft_config(self) -> QftConfig:
        return QftConfig(self.grid.n, "forward", self.qft_depth, self.e)

    @cached_property
    def _v_values(self) -> np.ndarray:
        return _potential_values(self.grid, self.potential)

    @cached_property
    def _v_phase(self) -> np.ndarray:
        tau = self.dt / 2 if self.scheme == "strang" else self.dt
        return np.exp(-1j * tau * self._v_values)

    @cached_property
    def _t_phase(self) -> np.ndarray:
        return np.exp(-0.5j * self.dt * self.grid.p**2)


def step(state: np.ndarray, cfg: EvolutionConfig, stream: Streams = None) -> np.ndarray:
    if n_qubits_of(state) != cfg.grid.n:
        raise ValueError("state does not match the grid")
    state = state * cfg._v_phase
    state = qft(state, cfg.qft_config, stream)
    state = state * cfg._t_phase
    state = iqft(state, cfg.qft_config, stream)
    if cfg.scheme == "strang":
        state = state * cfg._v_phase
    return state


def evolve(state0: np.ndarray, cfg: EvolutionConfig, stream: Streams = None) -> list[tuple[float, np.ndarray]]:
    """Apply ``cfg.n_t`` steps, recording every ``record_every`` steps and at the end."""
    records = [(0.0, state0)]
    state = state0
    for i in range(1, cfg.n_t + 1):
        state = step(state, cfg, stream)
        if i % cfg.record_every == 0 or i == cfg.n_t:
            records.append((i * cfg.dt, state))
    return records


def _qft_estimate(n: int, e: float, estimate: Estimate) -> float:
    if estimate == "basic":
        return fidelity_estimate_basic(n, e)
    if estimate == "improved":
        return fidelity_estimate_improved(n, e)
    raise ValueError(f"unknown estimate {estimate!r}")


def predict_fidelity(n: int, e: float, t: float, dt: float, estimate: Estimate = "improved") -> float:
    """Expected fidelity after ``t/dt`` steps, two noisy transforms per step."""
    if dt <= 0 or t < 0:
        raise ValueError("need dt > 0 and t >= 0")
    return _qft_estimate(n, e, estimate) ** (2.0 * t / dt)


def predict_many_electron(
    n_electrons: int,
    d: int,
    n0: int,
    e: float,
    t: float,
    dt: float,
    estimate: Estimate = "improved",
) -> float:
    """Fidelity prediction with one ``n0``-qubit transform per coordinate."""
    if dt <= 0 or t < 0:
        raise ValueError("need dt > 0 and t >= 0")
    return _qft_estimate(n0, e, estimate) ** (d * n_electrons * 2.0 * t / dt)
