import math
from itertools import product

import numpy as np
import pytest

from lgkit import lgi
from lgkit.errors import ValidationError
from lgkit.lgi import CorrelatorSet, JointDistribution


def _const(c):
    return CorrelatorSet.from_function(lambda i, j: c, 5)


def test_report_flags_and_margin():
    r = lgi.make_report("x", 1.5, -3, 1)
    assert r.violated and r.margin == 0.5
    r = lgi.make_report("x", 1.0 + 1e-12, -3, 1)
    assert not r.violated
    r = lgi.make_report("x", 0.0, math.nan, math.nan)
    assert not r.violated and math.isnan(r.margin)
    rec = lgi.make_report("x", 2.0, 0, 1, extra=3).as_record()
    assert rec["extra"] == 3 and rec["violated"]


def test_correlator_set_symmetry_and_range():
    c = CorrelatorSet({(2, 1): 0.3})
    assert c[1, 2] == c[2, 1] == 0.3
    assert c[2, 2] == 1.0
    with pytest.raises(ValidationError, match="exceeds 1"):
        CorrelatorSet({(2, 1): 1.2})
    with pytest.raises(ValidationError, match="missing"):
        c[3, 1]


def test_joint_distribution_checks():
    with pytest.raises(ValidationError):
        JointDistribution([[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(ValidationError):
        JointDistribution([[1.1, -0.1], [0, 0]])
    p = JointDistribution([[0.4, 0.1], [0.2, 0.3]])
    assert abs(lgi.correlator_from_joint(p) - 0.4) < 1e-15
    assert abs(p.expectation([0]) - 0.0) < 1e-15
    assert np.allclose(p.marginal([1, 0]).probs, [[0.4, 0.2], [0.1, 0.3]])


def test_correlators_need_dichotomic_alphabet():
    p = JointDistribution([[0.5, 0.0, 0.0], [0.0, 0.25, 0.25]], alphabets=[(0, 1), (0, 1, 2)])
    with pytest.raises(ValidationError, match="entropic"):
        lgi.correlator_from_joint(p)


def test_kn_bounds_table():
    assert lgi.kn_bounds(3) == (-3, 1)
    assert lgi.kn_bounds(4) == (-2, 2)
    assert lgi.kn_bounds(5) == (-5, 3)
    assert lgi.kn_bounds(12) == (-10, 10)
    with pytest.raises(ValidationError):
        lgi.kn_bounds(2)


def test_kn_terms_and_names():
    assert lgi.kn_terms(3) == [(1, 2, 1), (1, 3, 2), (-1, 3, 1)]
    assert lgi.kn(_const(0.0), 3).name == "K_3"
    assert lgi.k3_prime(_const(0.0)).name == "K_3'"
    assert lgi.kn(_const(0.0), 5, (1, 1, -1, -1, -1)).name == "K_5[++---]"
    with pytest.raises(ValidationError):
        lgi.kn(_const(0.0), 3, (1, 1))


def test_k3_prime_of_three_box_values():
    c = CorrelatorSet({(2, 1): -1 / 3, (3, 2): -1 / 3, (3, 1): -7 / 9})
    assert abs(lgi.k3_prime(c).value - 13 / 9) < 1e-15


def test_odd_sign_patterns():
    pats = lgi.odd_sign_patterns(5)
    assert len(pats) == 16
    assert all(sum(s < 0 for s in p) % 2 == 1 for p in pats)


def test_k3_identity_on_three_time_joint(rng):
    p = JointDistribution(rng.dirichlet(np.ones(8)).reshape(2, 2, 2))
    c = lgi.correlators_from_joint(p)
    assert abs(lgi.kn(c, 3).value - lgi.k3_from_three_time_joint(p)) < 1e-14


def test_pentagon_all_pairs():
    assert lgi.pentagon(_const(-0.2)).value == pytest.approx(0.0)
    assert lgi.pentagon(_const(-0.3)).violated


def test_stationary_and_huelga():
    r = lgi.stationary_kn(math.cos(math.pi / 3), math.cos(2 * math.pi / 3), 3)
    assert r.value == pytest.approx(1.5) and r.violated
    assert lgi.huelga(0.5, 0.0).value == -0.25
    with pytest.raises(ValidationError):
        lgi.huelga(1.2, 0.0)


def test_chsh_forms():
    s = 1 / math.sqrt(2)
    assert lgi.temporal_chsh(s, s, s, -s).value == pytest.approx(2 * math.sqrt(2))
    assert not lgi.temporal_chsh(1, 1, 1, 1).violated
    assert lgi.three_term_chsh(1, 1, 1).value == 1


def test_conditional_entropy_bits():
    assert lgi.conditional_entropy([[0.5, 0.0], [0.0, 0.5]]) == 0.0
    assert lgi.conditional_entropy([[0.25, 0.25], [0.25, 0.25]]) == pytest.approx(1.0)
    # zero cells and an empty conditioning row are fine
    assert lgi.conditional_entropy([[0.0, 0.0], [0.5, 0.5]]) == pytest.approx(1.0)


def test_entropic_classical_chain():
    ident = [[0.5, 0.0], [0.0, 0.5]]
    r = lgi.entropic([ident, ident], ident)
    assert r.value == 0.0 and not r.violated and r.name == "entropic N=3"


def test_witness_deficit():
    single = np.array([0.0, 1.0])
    pair = np.array([[0.25, 0.25], [0.25, 0.25]])
    assert lgi.witness(single, pair) == 0.5
    with pytest.raises(ValidationError):
        lgi.witness(np.ones(3) / 3, pair)


def test_hardy_flags():
    assert not lgi.hardy(0, 0, 0, 0.1).consistent_with_macrorealism
    assert lgi.hardy(0.01, 0, 0, 0.1).consistent_with_macrorealism
    with pytest.raises(ValidationError):
        lgi.hardy(-0.2, 0, 0, 0)


def test_venality_bound_has_no_negative_zero():
    r = lgi.venality_f(1.0, 0.0)
    assert str(r.lower_bound) == "0.0"
    assert lgi.venality_f(1.332, 0.056).violated


def test_family_reports_on_deterministic_histories():
    for q in product((1, -1), repeat=5):
        c = CorrelatorSet.from_function(lambda i, j: q[i - 1] * q[j - 1], 5)
        assert not lgi.any_violated(lgi.family_reports(c, 5))
