import math

import numpy as np
import pytest
from scipy import integrate

from lgkit import measure, qop
from lgkit.errors import EmptyBranchError, ValidationError
from lgkit.qop import QuantumState


def test_projective_branches():
    rho = QuantumState.pure([math.cos(0.4), math.sin(0.4)])
    out = measure.projective_measure(rho, qop.SIGMA_Z)
    assert abs(out.probability(1) - math.cos(0.4) ** 2) < 1e-14
    assert np.allclose(out.post(1).matrix, np.diag([1, 0]))
    with pytest.raises(EmptyBranchError):
        measure.projective_measure(QuantumState.basis(2, 0), qop.SIGMA_Z).post(-1)


def test_gaussian_kraus_is_complete():
    # int K(q)^dag K(q) dq = identity
    meter = measure.GaussianMeter(0.7, qop.SIGMA_Z)
    diag = [integrate.quad(lambda q, k=k: abs(measure.gaussian_kraus(q, meter)[k, k]) ** 2,
                           -np.inf, np.inf)[0] for k in (0, 1)]
    assert np.allclose(diag, 1.0, atol=1e-10)


def test_gaussian_measure_dephases_by_exp_minus_two_lambda():
    rho = QuantumState.pure([1, 1])
    for lam in (0.0, 0.3, 2.0):
        m = measure.gaussian_measure(rho, measure.GaussianMeter(lam, qop.SIGMA_Z))
        assert abs(m.averaged_post_state.matrix[0, 1] - 0.5 * math.exp(-2 * lam)) < 1e-14
        assert abs(m.mean_q) < 1e-14
    proj = measure.gaussian_measure(rho, measure.GaussianMeter(math.inf, qop.SIGMA_Z))
    assert proj.coherence_factor == 0.0


def test_outcome_density_normalised_and_centred():
    meter = measure.GaussianMeter(0.4, qop.SIGMA_Z)
    rho = QuantumState.pure([math.cos(0.3), math.sin(0.3)])
    dens = measure.gaussian_measure(rho, meter).density
    total = integrate.quad(dens.pdf, -np.inf, np.inf)[0]
    mean = integrate.quad(lambda q: q * dens.pdf(q), -np.inf, np.inf)[0]
    assert abs(total - 1) < 1e-10 and abs(mean - math.cos(0.6)) < 1e-10
    assert abs(dens.variance - 1 / 1.6) < 1e-15


def test_overlap_moments_against_quadrature():
    for lam in (0.05, 0.5, 3.0):
        for va, vb in ((1, 1), (1, -1), (-1, -1)):
            got = measure.kraus_overlap_moments(lam, va, vb, (0, 1, 2))
            f = lambda q, v: (2 * lam / math.pi) ** 0.25 * math.exp(-lam * (q - v) ** 2)  # noqa: E731
            ref = [integrate.quad(lambda q: q ** p * f(q, va) * f(q, vb), -np.inf, np.inf,
                                  epsabs=1e-13)[0] for p in (0, 1, 2)]
            assert np.allclose(got, ref, atol=1e-10)


def test_post_state_for_meter_outcome():
    meter = measure.GaussianMeter(1.0, qop.SIGMA_Z)
    p, post = measure.gaussian_post_state(QuantumState.pure([1, 1]), 0.8, meter)
    assert p > 0 and post.matrix[0, 0].real > 0.5


def test_mh_quasiprobability_marginals():
    rho = QuantumState.pure([math.cos(0.5), math.sin(0.5)])
    u = qop.unitary(0.5 * qop.SX, 0.9)
    q = measure.mh_quasiprobability(rho, qop.SIGMA_Z, u, qop.SIGMA_Z)
    assert abs(q.sum() - 1) < 1e-14
    # summing out Q3 gives the Q2 distribution
    assert np.allclose(q.sum(axis=0), [math.cos(0.5) ** 2, math.sin(0.5) ** 2])


def test_deconvolved_matches_moments():
    m = np.array([[0.6, 0.2], [0.4, -0.1]])
    q = measure.deconvolved_quasiprobability(m)
    c = measure.correlators_from_table(q)
    cm = measure.correlators_from_moments(m)
    for key in ("Q2", "Q3", "Q3Q2"):
        assert abs(c[key] - cm[key]) < 1e-15


def test_knowledge_map():
    for k in (0.1598, 0.5445, 1.0):
        g = measure.gamma_from_knowledge(k)
        assert 1 / math.sqrt(2) < g <= 1
        assert abs(measure.AncillaScheme.csign(g).knowledge - k) < 1e-12
    with pytest.raises(ValidationError):
        measure.gamma_from_knowledge(-0.1)


def test_csign_weak_value_strange_on_postselection():
    # close to an eigenstate of the post-selected observable the weak value leaves [-1, 1]
    theta = 2.6
    psi = QuantumState.pure([math.cos(theta / 2), math.sin(theta / 2)])
    m = measure.csign_weak_measure(psi, measure.gamma_from_knowledge(0.1598))
    assert abs(m.weak_expectation - math.cos(theta)) < 1e-12
    assert max(abs(m.weak_value(1)), abs(m.weak_value(-1))) > 1


def test_ancilla_negative_measurement_keeps_null_branch(rng):
    rho = qop.random_state(2, rng)
    neg = measure.ancilla_negative_measure(rho, 0.0, qop.SIGMA_Z)
    kept = sum(neg.kept_probabilities.values())
    assert 0 < kept <= 1 + 1e-12
