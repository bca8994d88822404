"""Invariants checked over generated inputs."""

import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lgkit import dynamics, lgi, macroreal, qop
from lgkit.lgi import JointDistribution

seeds = st.integers(0, 2**63 - 1)
prob_vectors = arrays(float, 8, elements=st.floats(0.0, 1.0)).filter(lambda a: a.sum() > 1e-3)


@given(prob_vectors)
def test_k3_identity_on_any_three_time_joint(w):
    p = JointDistribution((w / w.sum()).reshape(2, 2, 2))
    k3 = lgi.kn(lgi.correlators_from_joint(p), 3).value
    assert abs(k3 - lgi.k3_from_three_time_joint(p)) < 1e-12
    assert k3 <= 1 + 1e-12


@given(prob_vectors)
def test_single_joint_satisfies_whole_family(w):
    p = JointDistribution((w / w.sum()).reshape(2, 2, 2))
    assert not lgi.any_violated(lgi.family_reports(lgi.correlators_from_joint(p), 3))


@given(st.floats(-10, 10), st.floats(-5, 0), st.floats(0, 5), st.floats(0, 1e-3))
def test_report_flag_consistency(value, lo, hi, tol):
    r = lgi.make_report("x", value, lo, hi, tol)
    assert r.violated == (value < lo - tol or value > hi + tol)
    assert r.margin == max(lo - value, value - hi)


@given(arrays(float, 4, elements=st.floats(0.0, 1.0)).filter(lambda a: a.sum() > 0.1),
       arrays(float, 4, elements=st.floats(-1e-7, 1e-7)))
def test_conditional_entropy_continuity_and_range(w, d):
    p = (w / w.sum()).reshape(2, 2)
    q = np.clip(p + d.reshape(2, 2), 0, None)
    q = q / q.sum()
    h = lgi.conditional_entropy(p)
    assert -1e-12 <= h <= 1 + 1e-12
    # entropy is continuous: tiny perturbations move it a little
    assert abs(h - lgi.conditional_entropy(q)) < 1e-4


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0.0, 10.0))
def test_lindblad_preserves_trace_and_positivity(seed, t):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(3, 3))
    jumps = tuple((float(rng.uniform(0, 2)), rng.normal(size=(3, 3))) for _ in range(2))
    lind = dynamics.Lindbladian(h + h.T, jumps)
    rho = lind.propagate(qop.random_state(3, rng), t)
    assert abs(np.trace(rho.matrix) - 1) < 1e-9
    assert rho.eigenvalues()[0] > -1e-9


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(-1 / 3, 1.0))
def test_kraus_channels_preserve_states(seed, c):
    rng = np.random.default_rng(seed)
    ch = qop.KrausChannel.depolarizing(c).then(qop.KrausChannel.dephasing(float(rng.uniform())))
    rho = qop.apply_channel(qop.random_state(2, rng), ch)
    assert abs(np.trace(rho.matrix) - 1) < 1e-12 and rho.eigenvalues()[0] > -1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(-2, 2), st.floats(0, 20))
def test_generating_function_is_one_without_counting_field(c, gl, gr, e, t):
    kern = dynamics.DoubleDot(c, gl, gr, e).counting_kernel(0.0)
    assert abs(dynamics.counting_mgf(kern, t) - 1) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 9), st.data())
def test_relabelled_strings_keep_parity_bounds(n, data):
    order = data.draw(st.permutations(range(1, n + 1)))
    signs = data.draw(st.sampled_from(lgi.odd_sign_patterns(n)))
    got = macroreal.enumerate_bounds(n, signs, order)
    assert (got["min"], got["max"]) == lgi.kn_bounds(n)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 8), st.floats(0.1, 3.0))
def test_nim_models_never_violate(seed, states, alpha):
    model = macroreal.random_model(macroreal.make_rng(seed), 5, states, alpha=alpha)
    out = macroreal.ontic_reports(model)
    assert not lgi.any_violated(out["reports"].values())
    assert out["hardy"].consistent_with_macrorealism
    assert out["witness"] < 1e-12


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 6), st.integers(1, 8))
def test_markov_huelga_deficit_nonnegative(seed, states, k):
    chain = macroreal.random_chain(macroreal.make_rng(seed), states)
    for s in range(states):
        assert macroreal.huelga_oracle(chain, s, k).value >= -1e-12


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 5), st.integers(1, 6), st.integers(1, 6))
def test_classical_parity_fcs_bounded(seed, states, k1, k2):
    chain = macroreal.random_chain(macroreal.make_rng(seed), states, counted=True)
    re, im = macroreal.classical_fcs(chain, math.pi, k1, k2)
    assert not re.violated and not im.violated


@given(st.floats(0, 2 * math.pi), st.floats(0, 5))
def test_weak_k3_interpolates(w, lam):
    k = dynamics.weak_k3_closed_form(w, lam)
    lo = dynamics.weak_k3_closed_form(w, math.inf)
    hi = dynamics.rabi_kn(3, w)
    assume(abs(hi - lo) > 1e-12)
    assert min(lo, hi) - 1e-12 <= k <= max(lo, hi) + 1e-12
