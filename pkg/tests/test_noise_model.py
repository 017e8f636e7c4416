import numpy as np
import pytest

from zalka.noise_model import (
    channel_action,
    channel_distance,
    empirical_channel,
    kraus_cphase,
    kraus_cphase_principal,
    kraus_rotation,
    noisy_1q_gate,
    noisy_cphase_angle,
    principal_axes_f,
    rotation_matrix,
    sample_rotation_noise,
)
from zalka.quantum_core import HADAMARD, KrausSet, RandomStream

SWEEP = [0.0, 0.001, 0.01, 0.05, 0.1, 0.5, 1.0]


class FixedStream:
    def __init__(self, value):
        self.value = value

    def normal(self, size=None):
        return self.value if size is None else np.full(size, self.value)


def test_rotation_noise_basic_properties():
    np.testing.assert_array_equal(sample_rotation_noise(0.0, RandomStream(1)), np.eye(2))
    stream = RandomStream(2)
    for _ in range(20):
        r = sample_rotation_noise(0.3, stream)
        assert np.linalg.det(r) == pytest.approx(1, abs=1e-14)
        np.testing.assert_allclose(r.T @ r, np.eye(2), atol=1e-14)


def test_rotation_noise_mean_cosine():
    e, n = 0.3, 100_000
    xi = RandomStream(3).normal(n)
    c = rotation_matrix(e * xi)[:, 0, 0]
    # reproduce the same draws through the public sampler
    stream = RandomStream(3)
    assert sample_rotation_noise(e, stream)[0, 0] == pytest.approx(c[0])
    assert abs(c.mean() - np.exp(-(e**2) / 2)) < 5 * c.std(ddof=1) / np.sqrt(n)


def test_noisy_1q_gate():
    np.testing.assert_array_equal(noisy_1q_gate(HADAMARD, 0.0, RandomStream(0)), HADAMARD)
    v = noisy_1q_gate(np.eye(2), 0.2, RandomStream(5))
    np.testing.assert_allclose(v, sample_rotation_noise(0.2, RandomStream(5)), atol=0)
    out = noisy_1q_gate(HADAMARD, 0.1, FixedStream(1.0))
    c, s = np.cos(0.1), np.sin(0.1)
    np.testing.assert_allclose(out, HADAMARD @ np.array([[c, s], [-s, c]]), atol=1e-15)


def test_noisy_cphase_angle_statistics():
    assert noisy_cphase_angle(0.7, 0.0, RandomStream(0)) == 0.7
    e, theta, n = 0.05, 0.4, 100_000
    stream = RandomStream(6)
    samples = np.array([noisy_cphase_angle(theta, e, stream) for _ in range(n)])
    assert abs(samples.mean() - theta) < 5 * e / np.sqrt(n)
    # variance of a sample variance is about 2 sigma^4 / n
    assert abs(samples.var(ddof=1) - e**2) < 5 * np.sqrt(2 / n) * e**2


def test_kraus_rotation_weights():
    k0 = kraus_rotation(0.0)
    np.testing.assert_allclose(k0.operators[0], np.eye(2))
    np.testing.assert_allclose(k0.operators[1], 0)
    k = kraus_rotation(0.05)
    lam1 = abs(k.operators[0][0, 0]) ** 2
    lam2 = abs(k.operators[1][0, 1]) ** 2
    assert lam1 == pytest.approx(0.997506239596, abs=1e-12)
    assert lam2 == pytest.approx(0.002493760404, abs=1e-12)
    assert lam1 + lam2 == pytest.approx(1, abs=1e-15)


def test_kraus_cphase_values():
    k0 = kraus_cphase(0.0)
    np.testing.assert_allclose(k0.operators[0], np.eye(4))
    np.testing.assert_allclose(k0.operators[1], 0)
    k = kraus_cphase(0.01)
    assert abs(k.operators[0][3, 3]) ** 2 == pytest.approx(0.999900005, abs=1e-12)


def test_principal_axes_values():
    assert principal_axes_f(0.5) == pytest.approx(0.115120742979, abs=1e-11)
    assert principal_axes_f(1e-4) < 1e-3
    assert principal_axes_f(0.0) == 0.0
    k = kraus_cphase_principal(0.0)
    np.testing.assert_allclose(k.operators[0], np.eye(4))
    np.testing.assert_allclose(k.operators[1], 0)
    # raw closed form against the cancellation-free evaluation
    for e in [0.05, 0.1, 0.5, 1.0]:
        p = np.exp(-(e**2))
        raw = (np.sqrt(1 + 3 * p) - p - 1) / np.sqrt(p * (1 - p))
        assert principal_axes_f(e) == pytest.approx(raw, rel=1e-10)


@pytest.mark.parametrize("e", SWEEP)
def test_completeness(e):
    sets = [kraus_rotation(e), kraus_cphase(e), kraus_cphase_principal(e)]
    for k in sets:
        assert k.completeness_error() < 1e-12


@pytest.mark.parametrize("e", [x for x in SWEEP if x > 0])
def test_principal_axes_equivalent_and_orthogonal(e):
    a = channel_action(kraus_cphase(e))
    b = channel_action(kraus_cphase_principal(e))
    assert channel_distance(a, b) < 1e-12
    e1, e2 = kraus_cphase_principal(e).operators
    assert abs(np.vdot(np.diag(e1), np.diag(e2))) < 1e-12


def test_principal_axes_matrix_units():
    e = 0.5
    std, pa = kraus_cphase(e), kraus_cphase_principal(e)
    for i in range(4):
        for j in range(4):
            x = np.zeros((4, 4), dtype=complex)
            x[i, j] = 1
            lhs = sum(k @ x @ k.conj().T for k in pa.operators)
            rhs = sum(k @ x @ k.conj().T for k in std.operators)
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_choi_of_identity_and_trace_preservation():
    ident = channel_action(KrausSet([np.eye(3, dtype=complex)]))
    omega = np.eye(3).reshape(-1)
    np.testing.assert_allclose(ident.choi, np.outer(omega, omega), atol=0)
    assert np.trace(ident.choi).real == pytest.approx(3)
    for k in (kraus_rotation(0.3), kraus_cphase(0.3)):
        ch = channel_action(k)
        np.testing.assert_allclose(ch.partial_trace_output(), np.eye(k.dim), atol=1e-12)
        np.testing.assert_allclose(ch.choi, ch.choi.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(ch.choi).min() > -1e-10


def test_choi_applies_channel():
    # reconstruct E(rho) from the Choi matrix and compare with the operator sum
    k = kraus_rotation(0.4)
    choi = channel_action(k).choi.reshape(2, 2, 2, 2)
    rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    via_choi = np.einsum("ij,iajb->ab", rho, choi)
    via_kraus = sum(op @ rho @ op.conj().T for op in k.operators)
    np.testing.assert_allclose(via_choi, via_kraus, atol=1e-14)


def test_empirical_channel_noiseless_is_identity():
    for kind, d in (("rotation", 2), ("cphase", 4)):
        ch = empirical_channel(0.0, kind, 7, RandomStream(1))
        ident = channel_action(KrausSet([np.eye(d, dtype=complex)]))
        assert channel_distance(ch, ident) == 0


@pytest.mark.parametrize("kind,builder", [("rotation", kraus_rotation), ("cphase", kraus_cphase)])
def test_empirical_channel_converges(kind, builder):
    ch = empirical_channel(0.05, kind, 100_000, RandomStream(9))
    assert channel_distance(ch, channel_action(builder(0.05))) <= 5e-3


def test_rotation_channel_matches_monte_carlo_on_state():
    e, n = 0.05, 100_000
    rho = np.array([[0.6, 0.3j], [-0.3j, 0.4]])
    v = rotation_matrix(e * RandomStream(10).normal(n))
    mc = np.einsum("kab,bc,kdc->ad", v, rho, v) / n
    exact = sum(op @ rho @ op.conj().T for op in kraus_rotation(e).operators)
    assert np.max(np.abs(mc - exact)) < 5e-3


def test_cphase_coherence_matches_monte_carlo():
    e, n = 0.05, 100_000
    phases = np.exp(-1j * e * RandomStream(12).normal(n))
    sqrt_p = abs(kraus_cphase(e).operators[0][3, 3])
    assert sqrt_p == pytest.approx(np.exp(-(e**2) / 2), abs=1e-15)
    # the (0, 3) coherence of diag(1,1,1,phase) rho diag(...)^dagger scales by conj(phase)
    assert abs(phases.conj().mean() - sqrt_p) < 5e-3


def test_errors():
    with pytest.raises(ValueError):
        kraus_rotation(-0.1)
    with pytest.raises(ValueError):
        empirical_channel(0.1, "bogus", 10, RandomStream(0))
    with pytest.raises(ValueError):
        empirical_channel(0.1, "rotation", 0, RandomStream(0))
