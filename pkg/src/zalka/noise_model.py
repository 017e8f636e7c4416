"""Gate noise: Monte Carlo sampling and the equivalent Kraus channels.

A noisy single-qubit gate is ``U_ideal @ R(e*xi)`` with ``R`` a real
rotation and ``xi ~ N(0, 1)``; a noisy controlled phase shifts its angle
by ``e*xi``.  Averaged over ``xi`` these become the Kraus channels built
below.  Channels are compared through their Choi matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .quantum_core import KrausSet, RandomStream

__all__ = [
    "ChannelAction",
    "rotation_matrix",
    "sample_rotation_noise",
    "noisy_1q_gate",
    "noisy_cphase_angle",
    "hadamard_survival",
    "cphase_survival",
    "principal_axes_f",
    "kraus_rotation",
    "kraus_cphase",
    "kraus_cphase_principal",
    "channel_action",
    "channel_distance",
    "empirical_channel",
]

_FLIP = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass
class ChannelAction:
    """Choi matrix ``sum_ij |i><j| (x) E(|i><j|)`` of a map on ``dim`` levels."""

    dim: int
    choi: np.ndarray

    def partial_trace_output(self) -> np.ndarray:
        d = self.dim
        return np.trace(self.choi.reshape(d, d, d, d), axis1=1, axis2=3)


def _check_level(e: float) -> float:
    e = float(e)
    if e < 0:
        raise ValueError(f"noise level must be non-negative, got {e}")
    return e


def rotation_matrix(angle) -> np.ndarray:
    """``[[cos a, sin a], [-sin a, cos a]]``; batched over the shape of ``angle``."""
    angle = np.asarray(angle, dtype=float)
    c, s = np.cos(angle), np.sin(angle)
    return np.stack([np.stack([c, s], axis=-1), np.stack([-s, c], axis=-1)], axis=-2)


def sample_rotation_noise(e: float, stream: RandomStream) -> np.ndarray:
    e = _check_level(e)
    return rotation_matrix(e * stream.normal())


def noisy_1q_gate(ideal: np.ndarray, e: float, stream: RandomStream) -> np.ndarray:
    return np.asarray(ideal) @ sample_rotation_noise(e, stream)


def noisy_cphase_angle(theta: float, e: float, stream: RandomStream) -> float:
    e = _check_level(e)
    return theta + e * stream.normal()


def hadamard_survival(e: float) -> float:
    """Dominant Kraus weight of the rotation channel, ``(1 + exp(-2e^2))/2``."""
    return 0.5 * (1.0 + np.exp(-2.0 * e * e))


def cphase_survival(e: float) -> float:
    """``P = exp(-e^2)``, the no-error probability of a noisy controlled phase."""
    return float(np.exp(-e * e))


def _one_minus_p(e: float) -> float:
    return float(-np.expm1(-e * e))


def principal_axes_f(e: float) -> float:
    """Mixing coefficient that makes the controlled-phase Kraus diagonals orthogonal.

    Evaluated as ``sqrt(P(1-P)) / (sqrt(1+3P) + 1 + P)``, which is the usual
    ``(sqrt(1+3P) - P - 1) / sqrt(P(1-P))`` with the cancellation removed;
    it is finite and tends to zero at ``e = 0``.
    """
    e = _check_level(e)
    p = cphase_survival(e)
    q = _one_minus_p(e)
    return float(np.sqrt(p * q) / (np.sqrt(1.0 + 3.0 * p) + 1.0 + p))


def kraus_rotation(e: float) -> KrausSet:
    e = _check_level(e)
    lam2 = 0.5 * _one_minus_p(np.sqrt(2.0) * e)
    lam1 = 1.0 - lam2
    return KrausSet(
        [np.sqrt(lam1) * np.eye(2, dtype=complex), np.sqrt(lam2) * _FLIP.astype(complex)],
        label=f"rotation(e={e:g})",
    )


def kraus_cphase(e: float) -> KrausSet:
    e = _check_level(e)
    p = cphase_survival(e)
    q = _one_minus_p(e)
    e1 = np.diag([1.0, 1.0, 1.0, np.sqrt(p)]).astype(complex)
    e2 = np.diag([0.0, 0.0, 0.0, np.sqrt(q)]).astype(complex)
    return KrausSet([e1, e2], label=f"cphase(e={e:g})")


def kraus_cphase_principal(e: float) -> KrausSet:
    """Controlled-phase channel in the basis where the operator diagonals are orthogonal."""
    e = _check_level(e)
    p = cphase_survival(e)
    q = _one_minus_p(e)
    f = principal_axes_f(e)
    norm = 1.0 / np.sqrt(1.0 + f * f)
    sp, sq = np.sqrt(p), np.sqrt(q)
    e1 = norm * np.diag([1.0, 1.0, 1.0, sp + f * sq]).astype(complex)
    e2 = norm * np.diag([-f, -f, -f, -f * sp + sq]).astype(complex)
    return KrausSet([e1, e2], label=f"cphase-principal(e={e:g})")


def _choi_from_operators(ops: np.ndarray) -> np.ndarray:
    # ops has shape (k, d, d); column (i, a) of the Choi vector is K[a, i]
    k, d, _ = ops.shape
    vecs = np.swapaxes(ops, -1, -2).reshape(k, d * d)
    return vecs.T @ vecs.conj()


def channel_action(kraus: KrausSet) -> ChannelAction:
    ops = np.stack([np.asarray(op, dtype=complex) for op in kraus.operators])
    return ChannelAction(kraus.dim, _choi_from_operators(ops))


def channel_distance(a: ChannelAction, b: ChannelAction) -> float:
    if a.dim != b.dim:
        raise ValueError(f"channel dimensions differ: {a.dim} vs {b.dim}")
    return float(np.max(np.abs(a.choi - b.choi)))


def empirical_channel(
    e: float,
    kind: Literal["rotation", "cphase"],
    n_samples: int,
    stream: RandomStream,
) -> ChannelAction:
    """Average of ``V rho V^dagger`` over sampled noise operators ``V``.

    For ``kind="cphase"`` only the noise factor ``diag(1, 1, 1, exp(-i e xi))``
    is sampled; the ideal angle commutes with it and drops out.
    """
    e = _check_level(e)
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    xi = stream.normal(n_samples)
    if kind == "rotation":
        ops = rotation_matrix(e * xi).astype(complex)
    elif kind == "cphase":
        ops = np.zeros((n_samples, 4, 4), dtype=complex)
        ops[:, 0, 0] = ops[:, 1, 1] = ops[:, 2, 2] = 1.0
        ops[:, 3, 3] = np.exp(-1j * e * xi)
    else:
        raise ValueError(f"unknown gate kind {kind!r}")
    choi = _choi_from_operators(ops) / n_samples
    return ChannelAction(ops.shape[-1], choi)
