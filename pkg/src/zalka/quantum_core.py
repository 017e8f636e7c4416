"""State-vector and density-matrix substrate.

States are plain complex ``numpy`` arrays whose last axis holds the
``2**n`` amplitudes of an ``n``-qubit register.  Any leading axes are
treated as a batch of independent registers, which is how the Monte Carlo
runners push many trajectories through one gate call.

Qubit 0 is the most significant bit of the register index, so the basis
state ``|q0 q1 ... q_{n-1}>`` sits at index ``q0*2**(n-1) + ... + q_{n-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "RandomStream",
    "KrausSet",
    "HADAMARD",
    "n_qubits_of",
    "basis_state",
    "apply_1q",
    "apply_cphase",
    "swap_qubits",
    "reverse_qubits",
    "fidelity",
    "haar_state",
    "dm_from_pure",
    "apply_channel",
    "truncate_rank",
    "embed_operator",
]

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


@dataclass
class RandomStream:
    """Reproducible normal-deviate source for one trajectory.

    The pair ``(master_seed, stream_index)`` feeds a ``SeedSequence`` spawn
    key, so distinct indices give independent PCG64 streams.
    """

    master_seed: int
    stream_index: int = 0
    _rng: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        self._rng = np.random.Generator(np.random.PCG64(seq))

    def normal(self, size=None):
        return self._rng.standard_normal(size)


@dataclass
class KrausSet:
    operators: list[np.ndarray]
    label: str = ""

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def completeness_error(self) -> float:
        total = sum(op.conj().T @ op for op in self.operators)
        return float(np.max(np.abs(total - np.eye(self.dim))))


def n_qubits_of(state: np.ndarray) -> int:
    size = state.shape[-1]
    n = size.bit_length() - 1
    if n < 1 or size != 1 << n:
        raise ValueError(f"register length {size} is not a power of two >= 2")
    return n


def _check_qubit(q: int, n: int) -> None:
    if not 0 <= q < n:
        raise ValueError(f"qubit index {q} out of range for {n} qubits")


def basis_state(n: int, index: int) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one qubit")
    if not 0 <= index < 1 << n:
        raise ValueError(f"basis index {index} out of range for {n} qubits")
    state = np.zeros(1 << n, dtype=complex)
    state[index] = 1.0
    return state


def apply_1q(state: np.ndarray, gate: np.ndarray, target: int, strict: bool = False) -> np.ndarray:
    """Apply a 2x2 gate to qubit ``target``.

    ``gate`` may carry leading batch axes matching those of ``state``, in
    which case every register gets its own gate.  The update is written out
    elementwise so that each output amplitude is computed the same way no
    matter how many registers share the call.
    """
    n = n_qubits_of(state)
    _check_qubit(target, n)
    gate = np.asarray(gate)
    if strict:
        eye = np.eye(2)
        prod = np.swapaxes(gate, -1, -2).conj() @ gate
        if np.max(np.abs(prod - eye)) > 1e-10:
            raise ValueError("gate is not unitary")
    batch = state.shape[:-1]
    view = state.reshape(*batch, 1 << target, 2, 1 << (n - target - 1))
    x0 = view[..., 0, :]
    x1 = view[..., 1, :]
    if gate.ndim == 2:
        g00, g01, g10, g11 = gate[0, 0], gate[0, 1], gate[1, 0], gate[1, 1]
    else:
        g = gate[..., None, None, :, :]
        g00, g01, g10, g11 = g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1]
    out = np.empty(view.shape, dtype=np.result_type(state, gate, complex))
    out[..., 0, :] = g00 * x0 + g01 * x1
    out[..., 1, :] = g10 * x0 + g11 * x1
    return out.reshape(state.shape)


def apply_cphase(state: np.ndarray, control: int, target: int, angle) -> np.ndarray:
    """Multiply amplitudes with both bits set by ``exp(-1j*angle)``.

    ``angle`` is a scalar or an array over the batch axes of ``state``.
    """
    n = n_qubits_of(state)
    _check_qubit(control, n)
    _check_qubit(target, n)
    if control == target:
        raise ValueError("control and target must differ")
    lo, hi = sorted((control, target))
    batch = state.shape[:-1]
    out = np.array(state, dtype=complex)
    view = out.reshape(*batch, 1 << lo, 2, 1 << (hi - lo - 1), 2, 1 << (n - hi - 1))
    phase = np.exp(-1j * np.asarray(angle, dtype=float))
    if phase.ndim:
        phase = phase[..., None, None, None]
    view[..., 1, :, 1, :] *= phase
    return out


def swap_qubits(state: np.ndarray, q1: int, q2: int) -> np.ndarray:
    n = n_qubits_of(state)
    _check_qubit(q1, n)
    _check_qubit(q2, n)
    if q1 == q2:
        raise ValueError("cannot swap a qubit with itself")
    batch = state.shape[:-1]
    nb = len(batch)
    tensor = state.reshape(*batch, *(2,) * n)
    return np.swapaxes(tensor, nb + q1, nb + q2).reshape(state.shape)


def reverse_qubits(state: np.ndarray) -> np.ndarray:
    """Reverse the qubit order (bit-reversal permutation of the index)."""
    n = n_qubits_of(state)
    batch = state.shape[:-1]
    nb = len(batch)
    tensor = state.reshape(*batch, *(2,) * n)
    axes = list(range(nb)) + [nb + q for q in reversed(range(n))]
    return np.transpose(tensor, axes).reshape(state.shape)


def fidelity(a: np.ndarray, b: np.ndarray):
    """``|<a|b>|**2`` along the last axis."""
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    overlap = np.sum(a.conj() * b, axis=-1)
    return np.abs(overlap) ** 2


def haar_state(n: int, stream: RandomStream) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one qubit")
    dim = 1 << n
    z = stream.normal(2 * dim)
    psi = z[:dim] + 1j * z[dim:]
    return psi / np.linalg.norm(psi)


def dm_from_pure(state: np.ndarray) -> np.ndarray:
    return np.outer(state, state.conj())


def _apply_on_axes(op: np.ndarray, tensor: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    k = len(axes)
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def apply_channel(dm: np.ndarray, kraus: KrausSet, targets: Sequence[int]) -> np.ndarray:
    """Operator-sum action of ``kraus`` on the listed qubits of ``dm``.

    The first target is the most significant qubit of the Kraus operators'
    own index.
    """
    n = n_qubits_of(dm)
    if dm.shape != (1 << n, 1 << n):
        raise ValueError(f"density matrix must be square, got {dm.shape}")
    targets = list(targets)
    for q in targets:
        _check_qubit(q, n)
    if len(set(targets)) != len(targets):
        raise ValueError("channel targets must be distinct")
    if kraus.dim != 1 << len(targets):
        raise ValueError(f"Kraus dimension {kraus.dim} does not match {len(targets)} target(s)")
    tensor = dm.reshape((2,) * (2 * n))
    cols = [n + q for q in targets]
    out = np.zeros_like(tensor, dtype=complex)
    for op in kraus.operators:
        left = _apply_on_axes(op, tensor, targets)
        out += _apply_on_axes(op.conj(), left, cols)
    return out.reshape(dm.shape)


def embed_operator(op: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Dense ``2**n`` square matrix acting as ``op`` on ``targets``."""
    dim = 1 << n
    eye = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    return _apply_on_axes(np.asarray(op, dtype=complex), eye, list(targets)).reshape(dim, dim)


def truncate_rank(dm: np.ndarray, r: int) -> np.ndarray:
    """Keep the ``r`` largest eigenvalues of ``dm`` and zero the rest.

    The trace is not restored: the discarded weight is the probability that
    left the dominant paths.
    """
    if r < 1:
        raise ValueError("rank must be at least 1")
    if r >= dm.shape[0]:
        return dm.copy()
    w, v = np.linalg.eigh(dm)
    order = np.argsort(-w, kind="stable")[:r]
    keep = np.clip(w[order], 0.0, None)
    vecs = v[:, order]
    return (vecs * keep) @ vecs.conj().T
