"""Exact bound states of the Pöschl-Teller well ``V(x) = -V0 / cosh^2(x/a)``.

With ``V0 = lam*(lam-1)/(2 a^2)`` (natural units) the levels are
``E_n = -(lam-1-n)^2 / (2 a^2)`` and the eigenfunctions are
``cosh(x/a)^-(lam-1-n) * C_n^(lam-n-1/2)(tanh(x/a))`` with ``C`` a
Gegenbauer polynomial.  These serve as the reference solution for the
split-operator runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .evolution import SpatialGrid

__all__ = [
    "PtParams",
    "TWO_MODE_COEFFS",
    "potential",
    "energy",
    "bound_count",
    "gegenbauer",
    "eigenfunction_unnormalized",
    "grid_eigenstate",
    "reference_state",
]

# equal-weight superposition of the two lowest modes, relative phase i
TWO_MODE_COEFFS: tuple[tuple[int, complex], ...] = ((0, 1 / math.sqrt(2)), (1, 1j / math.sqrt(2)))


@dataclass(frozen=True)
class PtParams:
    lam: float = 4.0
    a: float = 1.0

    def __post_init__(self) -> None:
        if self.lam <= 1:
            raise ValueError("lam must exceed 1 for a bound state to exist")
        if self.a <= 0:
            raise ValueError("a must be positive")

    @property
    def V0(self) -> float:
        return self.lam * (self.lam - 1) / (2 * self.a**2)


def potential(params: PtParams) -> Callable[[np.ndarray], np.ndarray]:
    V0, a = params.V0, params.a

    def V(x):
        return -V0 / np.cosh(np.asarray(x, dtype=float) / a) ** 2

    return V


def bound_count(params: PtParams) -> int:
    """Number of square-integrable levels, i.e. integers ``n >= 0`` with ``lam - 1 - n > 0``."""
    return math.ceil(params.lam - 1)


def _check_mode(n: int, params: PtParams) -> None:
    if not 0 <= n < bound_count(params):
        raise ValueError(f"mode {n} is not a normalizable bound state for lam={params.lam}")


def energy(n: int, params: PtParams) -> float:
    _check_mode(n, params)
    return -((params.lam - 1 - n) ** 2) / (2 * params.a**2)


def gegenbauer(n: int, alpha: float, z):
    """``C_n^alpha(z)`` by the three-term recurrence."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    z = np.asarray(z, dtype=float)
    prev = np.ones_like(z)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 2 * alpha * z
    for k in range(2, n + 1):
        prev, cur = cur, (2 * z * (k + alpha - 1) * cur - (k + 2 * alpha - 2) * prev) / k
    return cur if cur.ndim else float(cur)


def eigenfunction_unnormalized(n: int, params: PtParams, x):
    _check_mode(n, params)
    u = np.asarray(x, dtype=float) / params.a
    s = params.lam - 1 - n
    return np.cosh(u) ** (-s) * gegenbauer(n, params.lam - n - 0.5, np.tanh(u))


def grid_eigenstate(n: int, params: PtParams, grid: SpatialGrid, edge_tol: float = 1e-6) -> np.ndarray:
    """Mode ``n`` sampled on the grid and normalized in the discrete 2-norm.

    Raises ``ValueError`` when the box is too small, i.e. when the value at
    the box edge exceeds ``edge_tol`` times the peak value.
    """
    psi = eigenfunction_unnormalized(n, params, grid.x)
    peak = np.max(np.abs(psi))
    edge = max(abs(psi[0]), abs(psi[-1]))
    if edge > edge_tol * peak:
        raise ValueError(
            f"box half-width {grid.L} too small for mode {n}: edge/peak = {edge / peak:.2e}"
        )
    return (psi / np.linalg.norm(psi)).astype(complex)


def reference_state(
    grid: SpatialGrid,
    t: float,
    params: PtParams,
    coeffs: Sequence[tuple[int, complex]] = TWO_MODE_COEFFS,
) -> np.ndarray:
    """Exact superposition of grid eigenstates at time ``t``."""
    total = sum(abs(c) ** 2 for _, c in coeffs)
    if abs(total - 1) > 1e-12:
        raise ValueError("mode coefficients must be normalized")
    psi = sum(
        c * np.exp(-1j * energy(n, params) * t) * grid_eigenstate(n, params, grid)
        for n, c in coeffs
    )
    return psi / np.linalg.norm(psi)
