import math

import numpy as np
import pytest

from lgkit import maxviol
from lgkit.errors import ValidationError


@pytest.mark.parametrize("n", [7, 8, 10, 12])
def test_kn_maximum_beyond_six(n):
    res = maxviol.maximize_kn(n, starts=8)
    assert res.converged
    assert res.value == pytest.approx(n * math.cos(math.pi / n), abs=1e-8)
    assert np.allclose(res.angles, math.pi / n, atol=1e-6)


def test_kn_range_checked():
    with pytest.raises(ValidationError):
        maxviol.maximize_kn(2)
    with pytest.raises(ValidationError):
        maxviol.maximize_kn(13)


def test_kn_objective_matches_rabi():
    from lgkit import dynamics
    w = 0.37
    for n in (3, 4, 5):
        assert maxviol.kn_objective([w] * (n - 1)) == pytest.approx(dynamics.rabi_kn(n, w))


def test_coordinate_ascent_on_quadratic():
    res = maxviol.coordinate_ascent(lambda x: -np.sum((x - 0.3) ** 2), 3, starts=2)
    assert res.converged and np.allclose(res.angles, 0.3, atol=1e-7)


def test_depolarized_ceiling_branches():
    assert maxviol.max_k3_depolarized(1.0) == 1.5
    assert maxviol.max_k3_depolarized(0.5) == 0.25
    assert maxviol.max_k3_depolarized(-0.8) == pytest.approx(1.14)
    with pytest.raises(ValidationError):
        maxviol.max_k3_depolarized(1.1)


def test_depolarized_lower_branch_numeric_optimum():
    # the optimiser finds 2|c| - c^2 below |c| = 1/2, above the piecewise ceiling
    for c in (0.2, 0.3, 0.45):
        res = maxviol.max_k3_depolarized_numeric(c, starts=8)
        assert res.value == pytest.approx(2 * c - c * c, abs=1e-7)
        assert res.value > maxviol.max_k3_depolarized(c)


def test_depolarized_k3_undamped_limit():
    # c = 1 recovers the closed-system value for coplanar axes at pi/3
    p = [0.0, 0.0, math.pi / 3, 0.0, 2 * math.pi / 3, 0.0]
    assert maxviol.depolarized_k3(1.0, p) == pytest.approx(1.5)


def test_commutator_diagnostic():
    d = maxviol.commutator_diagnostic(math.pi / 4)
    assert d["[Q2,Q1]"] == pytest.approx(2 * math.sin(math.pi / 4))
    assert d["[Q3,Q1]"] == pytest.approx(2.0)
    assert maxviol.commutator_argmax() == pytest.approx(math.pi / 3, abs=1e-6)


def test_temporal_chsh_tsirelson():
    res = maxviol.maximize_temporal_chsh(starts=6)
    assert res.converged and res.value == pytest.approx(2 * math.sqrt(2), abs=1e-9)


def test_hardy_search_finds_paradox():
    h = maxviol.hardy_search(starts=6)
    assert max(h.probabilities[:3]) < 1e-10
    assert h.probabilities[3] > 0.01
    assert not h.check.consistent_with_macrorealism
