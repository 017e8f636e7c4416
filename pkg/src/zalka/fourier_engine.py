"""Quantum Fourier transform circuits, ideal, noisy and approximate.

The circuit is the textbook one: a Hadamard on each qubit (most significant
first) followed by the controlled phases ``CR_k`` that couple it to the
qubits below, and a final bit reversal.  Noise enters gate by gate, one
fresh normal deviate per gate; the bit reversal is a free relabeling.

Noiseless and at full depth the forward circuit is the unitary DFT with
kernel ``exp(+2*pi*i*j*k/N)/sqrt(N)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence, Union

import numpy as np

from .noise_model import (
    cphase_survival,
    hadamard_survival,
    kraus_cphase_principal,
    kraus_rotation,
    principal_axes_f,
    rotation_matrix,
)
from .quantum_core import (
    HADAMARD,
    KrausSet,
    RandomStream,
    apply_1q,
    apply_channel,
    apply_cphase,
    dm_from_pure,
    haar_state,
    n_qubits_of,
    reverse_qubits,
    truncate_rank,
)

__all__ = [
    "QftConfig",
    "Gate",
    "qft_gates",
    "gate_count",
    "draw_noise",
    "qft",
    "iqft",
    "fourier",
    "dft_matrix",
    "optimal_depth",
    "fidelity_estimate_basic",
    "fidelity_estimate_improved",
    "improved_cphase_survival",
    "unit_rank_survivals",
    "unit_rank_oracle",
]

Depth = Union[int, Literal["full"], None]
Streams = Union[RandomStream, Sequence[RandomStream], None]


@dataclass(frozen=True)
class QftConfig:
    n: int
    direction: Literal["forward", "inverse"] = "forward"
    depth: Depth = "full"
    e: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if self.direction not in ("forward", "inverse"):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.e < 0:
            raise ValueError("noise level must be non-negative")
        if self.depth not in ("full", None) and not 1 <= int(self.depth) <= self.n:
            raise ValueError(f"depth must lie in [1, {self.n}] or be 'full'")

    @property
    def k0(self) -> int:
        return self.n if self.depth in ("full", None) else int(self.depth)


@dataclass(frozen=True)
class Gate:
    """One circuit element: a Hadamard (``k == 1``) or ``CR_k`` on ``(qubit, partner)``."""

    qubit: int
    partner: int = -1
    k: int = 1

    @property
    def is_hadamard(self) -> bool:
        return self.k == 1

    @property
    def angle(self) -> float:
        # apply_cphase multiplies by exp(-i*angle); CR_k needs exp(+2*pi*i/2**k)
        return -2.0 * math.pi / 2**self.k


def qft_gates(n: int, depth: Depth = "full") -> list[Gate]:
    """Forward-circuit gate list, in application order."""
    k0 = n if depth in ("full", None) else int(depth)
    gates = []
    for i in range(n):
        gates.append(Gate(i))
        for k in range(2, min(n - i, k0) + 1):
            gates.append(Gate(i, i + k - 1, k))
    return gates


def gate_count(n: int, depth: Depth = "full") -> int:
    return len(qft_gates(n, depth))


def draw_noise(stream: Streams, count: int, batch_shape: tuple = ()) -> np.ndarray:
    """Normal deviates for ``count`` gates, one row per register in the batch.

    A single register takes a single stream; a batch of registers takes one
    stream each so that each trajectory's draws do not depend on its
    neighbours.
    """
    if stream is None:
        raise ValueError("a noisy circuit needs a random stream")
    if isinstance(stream, RandomStream):
        if batch_shape:
            return stream.normal((*batch_shape, count))
        return stream.normal(count)
    streams = list(stream)
    if (len(streams),) != tuple(batch_shape):
        raise ValueError(f"got {len(streams)} streams for batch shape {batch_shape}")
    return np.stack([s.normal(count) for s in streams])


def _run(state, gates, e, xi, inverse):
    for g_idx, gate in enumerate(gates):
        noise = 0.0 if xi is None else e * xi[..., g_idx]
        if gate.is_hadamard:
            if xi is None:
                state = apply_1q(state, HADAMARD, gate.qubit)
            else:
                state = apply_1q(state, HADAMARD @ rotation_matrix(noise), gate.qubit)
        else:
            angle = -gate.angle if inverse else gate.angle
            state = apply_cphase(state, gate.qubit, gate.partner, angle + noise)
    return state


def fourier(
    state: np.ndarray,
    config: QftConfig,
    stream: Streams = None,
    xi: np.ndarray | None = None,
) -> np.ndarray:
    """Run the forward or inverse circuit described by ``config``.

    ``xi`` overrides the stream with explicit deviates, one per gate in
    application order (shape ``(*batch, gate_count)``).
    """
    n = n_qubits_of(state)
    if n != config.n:
        raise ValueError(f"state has {n} qubits, config expects {config.n}")
    gates = qft_gates(n, config.depth)
    inverse = config.direction == "inverse"
    if inverse:
        gates = gates[::-1]
    if config.e > 0 and xi is None:
        xi = draw_noise(stream, len(gates), state.shape[:-1])
    if config.e == 0:
        xi = None
    if inverse:
        return _run(reverse_qubits(state), gates, config.e, xi, True)
    return reverse_qubits(_run(state, gates, config.e, xi, False))


def qft(state, config: QftConfig, stream: Streams = None, xi=None) -> np.ndarray:
    if config.direction != "forward":
        config = QftConfig(config.n, "forward", config.depth, config.e)
    return fourier(state, config, stream, xi)


def iqft(state, config: QftConfig, stream: Streams = None, xi=None) -> np.ndarray:
    if config.direction != "inverse":
        config = QftConfig(config.n, "inverse", config.depth, config.e)
    return fourier(state, config, stream, xi)


def dft_matrix(n: int) -> np.ndarray:
    """Dense unitary DFT, kernel ``exp(+2 pi i jk/N)/sqrt(N)``; test oracle only."""
    dim = 1 << n
    j = np.arange(dim)
    return np.exp(2j * np.pi * np.outer(j, j) / dim) / np.sqrt(dim)


def optimal_depth(e: float) -> float:
    """Depth at which the smallest kept phase ``2*pi/2**k`` equals the noise level."""
    if e < 0:
        raise ValueError("noise level must be non-negative")
    if e == 0:
        return math.inf
    return math.log2(2.0 * math.pi / e)


def fidelity_estimate_basic(n: int, e: float) -> float:
    return hadamard_survival(e) ** n * cphase_survival(e) ** (n * (n - 1) / 8)


def improved_cphase_survival(e: float, variant: Literal["printed", "rederived"] = "printed") -> float:
    """Per-quarter survival of a controlled phase in the principal-axes basis.

    ``printed`` is ``g**2 / (1 + f**2)**4``; ``rederived`` is
    ``((3 + g**2) / (4 (1 + f**2)))**4``, the Haar-averaged weight of the
    dominant principal-axes operator raised to the same power.  Here
    ``g = sqrt(P) + f sqrt(1 - P)``.  The two agree to first order in ``e**2``.
    """
    p = cphase_survival(e)
    f = principal_axes_f(e)
    g = math.sqrt(p) + f * math.sqrt(-math.expm1(-e * e))
    if variant == "printed":
        return g * g / (1.0 + f * f) ** 4
    if variant == "rederived":
        return ((3.0 + g * g) / (4.0 * (1.0 + f * f))) ** 4
    raise ValueError(f"unknown variant {variant!r}")


def fidelity_estimate_improved(
    n: int, e: float, variant: Literal["printed", "rederived"] = "printed"
) -> float:
    return hadamard_survival(e) ** n * improved_cphase_survival(e, variant) ** (n * (n - 1) / 8)


def _ideal_kraus(gate: Gate) -> tuple[KrausSet, list[int]]:
    if gate.is_hadamard:
        return KrausSet([HADAMARD.astype(complex)], "H"), [gate.qubit]
    phase = np.diag([1, 1, 1, np.exp(-1j * gate.angle)])
    return KrausSet([phase], f"CR{gate.k}"), [gate.qubit, gate.partner]


def unit_rank_survivals(n: int, e: float, n_states: int, stream: RandomStream) -> np.ndarray:
    """Per-state surviving trace of the full QFT under unit-rank truncation.

    Each gate is its noise channel (rotation set for Hadamards, principal-axes
    set for controlled phases) followed by the ideal gate, and the density
    matrix is cut back to rank one after every gate.
    """
    if n > 10:
        raise ValueError("density-matrix oracle is limited to 10 qubits")
    had_noise = kraus_rotation(e)
    cp_noise = kraus_cphase_principal(e)
    gates = qft_gates(n)
    ideal = [_ideal_kraus(g) for g in gates]
    out = np.empty(n_states)
    for s in range(n_states):
        rho = dm_from_pure(haar_state(n, stream))
        for gate, (u, targets) in zip(gates, ideal):
            rho = apply_channel(rho, had_noise if gate.is_hadamard else cp_noise, targets)
            rho = apply_channel(rho, u, targets)
            rho = truncate_rank(rho, 1)
        out[s] = np.trace(rho).real
    return out


def unit_rank_oracle(n: int, e: float, n_states: int, stream: RandomStream) -> float:
    return float(np.mean(unit_rank_survivals(n, e, n_states, stream)))

