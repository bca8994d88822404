import math

import numpy as np
import pytest

from lgkit import qop
from lgkit.errors import ValidationError
from lgkit.qop import DichotomicObservable, KrausChannel, QuantumState


def test_state_validation():
    with pytest.raises(ValidationError):
        QuantumState(np.diag([0.7, 0.7]))
    with pytest.raises(ValidationError):
        QuantumState(np.diag([1.2, -0.2]))
    with pytest.raises(ValidationError):
        QuantumState(np.array([[0.5, 0.5], [0.1, 0.5]]))
    rho = QuantumState.maximally_mixed(3)
    assert rho.dim == 3
    assert not rho.matrix.flags.writeable


def test_bloch_round_trip(rng):
    for _ in range(20):
        r = qop.random_unit_vector(rng) * rng.uniform(0, 1)
        assert np.allclose(QuantumState.from_bloch(r).bloch_vector(), r, atol=1e-14)


def test_observable_from_axis_requires_unit_norm():
    with pytest.raises(ValidationError, match="normalise"):
        qop.observable_from_axis((1.0, 1.0, 0.0))
    obs = qop.observable_from_axis((0.0, 0.0, 1.0))
    assert np.allclose(obs.matrix, qop.SZ)
    assert np.allclose(obs.flipped().matrix, -qop.SZ)
    with pytest.raises(ValidationError):
        obs.projector(0)


def test_projector_pair_checked():
    with pytest.raises(ValidationError):
        DichotomicObservable(np.eye(2), np.eye(2))


def test_unitary_rotation():
    u = qop.unitary(0.5 * qop.SX, math.pi)
    # half-angle rotation by pi about x maps |0> to -i|1>
    assert np.allclose(np.abs(u @ np.array([1, 0])), [0, 1])
    with pytest.raises(ValidationError):
        qop.unitary(np.array([[0, 1], [0, 0]]), 1.0)


def test_depolarizing_kraus_contracts_bloch(rng):
    for c in (-1 / 3, 0.0, 0.4, 1.0):
        ch = KrausChannel.depolarizing(c)
        rho = qop.random_state(2, rng)
        out = qop.apply_channel(rho, ch)
        assert np.allclose(out.bloch_vector(), c * rho.bloch_vector(), atol=1e-13)
    with pytest.raises(ValidationError, match="CPTP"):
        KrausChannel.depolarizing(-0.5)
    assert np.allclose(qop.depolarize_bloch([0, 0, 1], -0.9), [0, 0, -0.9])


def test_kraus_completeness_checked():
    with pytest.raises(ValidationError, match="completeness"):
        KrausChannel((0.5 * np.eye(2),))


def test_channel_composition_order():
    a = KrausChannel.unitary(qop.unitary(0.5 * qop.SX, 0.7))
    b = KrausChannel.dephasing(0.2)
    rho = QuantumState.basis(2, 0)
    seq = qop.apply_channel(qop.apply_channel(rho, a), b)
    assert np.allclose(qop.apply_channel(rho, a.then(b)).matrix, seq.matrix)


def test_partial_trace_of_product(rng):
    r1, r2 = qop.random_state(2, rng), qop.random_state(3, rng)
    joint = QuantumState(qop.tensor(r1, r2))
    assert np.allclose(qop.partial_trace(joint, [2, 3], 0).matrix, r1.matrix)
    assert np.allclose(qop.partial_trace(joint, [2, 3], [1]).matrix, r2.matrix)
    with pytest.raises(ValidationError):
        qop.partial_trace(joint, [2, 2], 0)


def test_commutators():
    assert np.allclose(qop.commutator(qop.SX, qop.SY), 2j * qop.SZ)
    assert np.allclose(qop.anticommutator(qop.SX, qop.SX), 2 * np.eye(2))
