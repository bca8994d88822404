import math
from itertools import product

import numpy as np
import pytest

from lgkit import lgi, macroreal
from lgkit.errors import ValidationError


def _path_sum_joint(model, seq):
    # independent oracle: explicit sum over ontic trajectories
    s = model.n_states
    table = np.zeros((2,) * len(seq))
    for outs in product(range(2), repeat=len(seq)):
        for path in product(range(s), repeat=len(seq)):
            w = model.mu[path[0]]
            for t, m in enumerate(seq):
                w *= model.xi[m, path[t], outs[t]]
                if t + 1 < len(seq):
                    w *= model.gamma[m, outs[t], path[t], path[t + 1]]
            table[outs] += w
    return table


def test_sequence_joint_matches_path_sum():
    rng = macroreal.make_rng(3)
    for nim in (True, False):
        model = macroreal.random_model(rng, 3, 3, nim=nim)
        for seq in ([0, 1], [2, 0, 1], [1, 1, 2]):
            got = macroreal.sequence_joint(model, seq).probs
            assert np.allclose(got, _path_sum_joint(model, seq), atol=1e-14)


def test_model_validation():
    with pytest.raises(ValidationError):
        macroreal.OnticModel([0.5, 0.6], np.full((1, 2, 2), 0.5),
                             macroreal.identity_disturbance(1, 2))
    with pytest.raises(ValidationError):
        macroreal.OnticModel([1.0], np.full((1, 2, 2), 0.5), macroreal.identity_disturbance(1, 1))


def test_rng_streams_are_independent_and_reproducible():
    a = macroreal.make_rng(5, 0).random(4)
    assert np.array_equal(a, macroreal.make_rng(5, 0).random(4))
    assert not np.array_equal(a, macroreal.make_rng(5, 1).random(4))


def test_nim_models_respect_k3():
    rng = macroreal.make_rng(0)
    for _ in range(50):
        model = macroreal.random_model(rng, 3, 4)
        assert model.nim
        assert not macroreal.ontic_kn(model, 3).violated


def test_invasive_model_reaches_algebraic_maximum():
    model = macroreal.invasive_example()
    assert not model.nim
    r = macroreal.ontic_kn(model, 3)
    assert r.value == 3.0 and r.violated and r.metadata["nim"] is False


def test_enumeration_against_brute_force():
    for n in range(3, 9):
        for signs in lgi.odd_sign_patterns(n)[:6]:
            terms = lgi.kn_terms(n, signs)
            vals = [sum(s * q[i - 1] * q[j - 1] for s, i, j in terms) for q in product((1, -1), repeat=n)]
            got = macroreal.enumerate_bounds(n, signs)
            assert (got["min"], got["max"]) == (min(vals), max(vals))


def test_sign_variants_share_parity_bounds():
    for n in (3, 4, 5, 6):
        for signs in lgi.odd_sign_patterns(n):
            got = macroreal.enumerate_bounds(n, signs)
            assert (got["min"], got["max"]) == lgi.kn_bounds(n)


def test_pentagon_enumeration():
    assert macroreal.enumerate_pentagon() == {"min": -2.0, "max": 10.0}


def test_enumeration_limit():
    with pytest.raises(ValidationError):
        macroreal.enumerate_bounds(21)


def test_markov_stationary_and_huelga():
    rng = macroreal.make_rng(1)
    chain = macroreal.random_chain(rng, 4)
    p = chain.stationary()
    assert np.allclose(p @ chain.transition, p, atol=1e-12)
    for k in range(1, 5):
        assert not macroreal.huelga_oracle(chain, 0, k).violated
    with pytest.raises(ValidationError):
        macroreal.MarkovChain([[0.5, 0.6], [0.5, 0.5]])


def test_classical_mgf_binomial():
    # one state, each step counts a charge with probability f
    f = 0.3
    chain = macroreal.MarkovChain([[1.0]], counted=[[f]])
    for chi in (0.0, 1.1, math.pi):
        for k in (1, 4):
            ref = (1 - f + f * np.exp(1j * chi)) ** k
            assert macroreal.classical_counting_mgf(chain, chi, k) == pytest.approx(ref, abs=1e-14)


def test_classical_charge_lgi_holds():
    rng = macroreal.make_rng(2)
    for _ in range(20):
        chain = macroreal.random_chain(rng, 3)
        assert not macroreal.classical_charge_lgi(chain, [0.0, 1.0, 0.5], 2).violated


def test_certification_summaries():
    s = macroreal.certify_ontic(40, seed=9)
    assert s.passed and s.checks == 40 * 10
    rec = s.as_record()
    assert rec["suite"] == "ontic-bounds" and rec["violations"] == 0
    assert macroreal.certify_markov(30, seed=1).passed
    assert macroreal.certify_fcs(30, seed=1).passed
    e = macroreal.certify_enumerate(3, 6)
    assert e.passed and e.extremes["max_n5"] == 3.0


def test_certification_is_seed_deterministic():
    a = macroreal.certify_ontic(20, seed=4).as_record()
    b = macroreal.certify_ontic(20, seed=4).as_record()
    assert a == b
