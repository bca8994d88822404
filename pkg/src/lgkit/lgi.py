"""Leggett-Garg inequalities and their relatives.

Every evaluator returns an :class:`InequalityReport`.  Time slots are
numbered from 1, matching the ``C_21, C_32, ...`` naming; correlators are
symmetric in their two indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ValidationError

REPORT_TOL = 1e-9
CORRELATOR_TOL = 1e-9
JOINT_TOL = 1e-10


@dataclass(frozen=True)
class InequalityReport:
    """Value of an LG quantity against its classical bounds.

    ``margin`` is positive by the amount the value lies outside
    ``[lower_bound, upper_bound]``; ``violated`` is ``margin > tol``.
    """

    name: str
    value: float
    lower_bound: float
    upper_bound: float
    violated: bool
    margin: float
    tol: float = REPORT_TOL
    metadata: Mapping = field(default_factory=dict, compare=False)

    def as_record(self) -> dict:
        rec = {
            "name": self.name,
            "value": self.value,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "violated": self.violated,
            "margin": self.margin,
        }
        rec.update(self.metadata)
        return rec


def make_report(name: str, value: float, lower: float = -math.inf, upper: float = math.inf,
                tol: float = REPORT_TOL, **metadata) -> InequalityReport:
    value = float(value)
    if math.isnan(lower) or math.isnan(upper):
        return InequalityReport(name, value, lower, upper, False, math.nan, tol, metadata)
    margin = max(lower - value, value - upper)
    return InequalityReport(name, value, float(lower), float(upper), margin > tol, margin, tol,
                            metadata)


class CorrelatorSet:
    """Two-time correlators ``C_ij`` keyed by 1-based time-slot pairs."""

    def __init__(self, values: Mapping, times: Sequence[float] | None = None,
                 tol: float = CORRELATOR_TOL):
        self._values = {}
        for (i, j), c in values.items():
            c = float(c)
            if not abs(c) <= 1.0 + tol:
                raise ValidationError(f"|C_{i}{j}| = {abs(c):.6g} exceeds 1")
            self._values[self._key(i, j)] = c
        self.times = None if times is None else tuple(float(t) for t in times)

    @staticmethod
    def _key(i: int, j: int) -> tuple:
        return (max(i, j), min(i, j))

    def __getitem__(self, pair) -> float:
        i, j = pair
        if i == j:
            return 1.0
        try:
            return self._values[self._key(i, j)]
        except KeyError:
            raise ValidationError(f"correlator C_{i}{j} missing") from None

    def __contains__(self, pair) -> bool:
        i, j = pair
        return i == j or self._key(i, j) in self._values

    def items(self):
        return self._values.items()

    @classmethod
    def from_function(cls, corr: Callable[[int, int], float], n: int,
                      times: Sequence[float] | None = None) -> "CorrelatorSet":
        """Evaluate ``corr(i, j)`` for every pair ``1 <= j < i <= n``."""
        return cls({(i, j): corr(i, j) for i in range(2, n + 1) for j in range(1, i)}, times)


class JointDistribution:
    """Probability table over outcome tuples, one axis per time slot."""

    def __init__(self, probs, alphabets: Sequence[Sequence] | None = None,
                 tol: float = JOINT_TOL):
        p = np.array(probs, dtype=float)
        if alphabets is None:
            alphabets = [(1, -1)] * p.ndim
        alphabets = tuple(tuple(a) for a in alphabets)
        if len(alphabets) != p.ndim or any(len(a) != s for a, s in zip(alphabets, p.shape)):
            raise ValidationError("alphabets do not match table shape")
        if np.any(p < -tol):
            raise ValidationError(f"negative probability {p.min():.3e}")
        if abs(p.sum() - 1.0) > tol:
            raise ValidationError(f"probabilities sum to {p.sum():.12g}")
        p = np.clip(p, 0.0, None)
        p.flags.writeable = False
        self.probs = p
        self.alphabets = alphabets

    @property
    def slots(self) -> int:
        return self.probs.ndim

    @property
    def dichotomic(self) -> bool:
        return all(sorted(a) == [-1, 1] for a in self.alphabets)

    def prob(self, outcome: Sequence) -> float:
        idx = tuple(a.index(o) for a, o in zip(self.alphabets, outcome))
        return float(self.probs[idx])

    def marginal(self, keep: Sequence[int]) -> "JointDistribution":
        """Marginal over the 0-based slots in ``keep`` (kept in the given order)."""
        keep = list(keep)
        drop = tuple(k for k in range(self.slots) if k not in keep)
        m = self.probs.sum(axis=drop) if drop else self.probs
        order = sorted(keep)
        m = np.transpose(m, [order.index(k) for k in keep])
        return JointDistribution(m, [self.alphabets[k] for k in keep])

    def expectation(self, slots: Sequence[int]) -> float:
        """``<prod_k Q_k>`` over the given 0-based dichotomic slots."""
        m = self.marginal(slots)
        vals = [np.array(a, dtype=float) for a in m.alphabets]
        out = m.probs
        for v in reversed(vals):
            out = out @ v
        return float(out)


def _require_dichotomic(p: JointDistribution) -> None:
    if not p.dichotomic:
        raise ValidationError(
            "correlators need a +/-1 alphabet; use the entropic inequalities for other alphabets"
        )


def correlator_from_joint(p: JointDistribution) -> float:
    """``sum Q_i Q_j P(Q_i, Q_j)`` over a two-slot dichotomic table."""
    if p.slots != 2:
        raise ValidationError("correlator needs a two-slot table")
    _require_dichotomic(p)
    return p.expectation([0, 1])


def correlators_from_joint(p: JointDistribution) -> CorrelatorSet:
    """All pairwise correlators marginalised from a single multi-time joint."""
    _require_dichotomic(p)
    return CorrelatorSet.from_function(lambda i, j: p.expectation([j - 1, i - 1]), p.slots)


def standard_signs(n: int) -> tuple:
    return (1,) * (n - 1) + (-1,)


def kn_bounds(n: int) -> tuple:
    """Classical bounds on an ``n``-term string with an odd number of minus signs."""
    if n < 3:
        raise ValidationError("LG strings need n >= 3")
    return (-n, n - 2) if n % 2 else (-(n - 2), n - 2)


def _validate_signs(signs: Sequence[int], n: int) -> tuple:
    signs = tuple(int(s) for s in signs)
    if len(signs) != n or any(s not in (1, -1) for s in signs):
        raise ValidationError(f"need {n} signs of +/-1")
    if signs.count(-1) % 2 == 0:
        raise ValidationError("an LG string needs an odd number of minus signs")
    return signs


def kn_terms(n: int, signs: Sequence[int] | None = None,
             order: Sequence[int] | None = None) -> list:
    """Terms ``(s, i, j)`` of the string ``s_1 C_21 + ... + s_{n-1} C_n(n-1) + s_n C_n1``.

    ``order`` relabels the times: slot ``m`` of the string uses time
    ``order[m-1]``.
    """
    signs = _validate_signs(standard_signs(n) if signs is None else signs, n)
    order = tuple(range(1, n + 1)) if order is None else tuple(order)
    if sorted(order) != list(range(1, n + 1)):
        raise ValidationError("order must be a permutation of 1..n")
    pairs = [(m + 1, m) for m in range(1, n)] + [(n, 1)]
    return [(s, order[i - 1], order[j - 1]) for s, (i, j) in zip(signs, pairs)]


def _name_kn(n, signs, order) -> str:
    if signs is None and order is None:
        return f"K_{n}"
    if n == 3 and signs is not None and tuple(signs) == (-1, -1, -1) and order is None:
        return "K_3'"
    s = "".join("+" if x > 0 else "-" for x in (signs or standard_signs(n)))
    name = f"K_{n}[{s}]"
    if order is not None:
        name += "(" + ",".join(str(o) for o in order) + ")"
    return name


def kn(correlators: CorrelatorSet, n: int, signs: Sequence[int] | None = None,
       order: Sequence[int] | None = None, tol: float = REPORT_TOL) -> InequalityReport:
    """Evaluate an ``n``-term LG string with parity bounds."""
    terms = kn_terms(n, signs, order)
    value = sum(s * correlators[i, j] for s, i, j in terms)
    lo, hi = kn_bounds(n)
    return make_report(_name_kn(n, signs, order), value, lo, hi, tol,
                       n=n, signs="".join("+" if s > 0 else "-" for s, _, _ in terms))


def k3_prime(correlators: CorrelatorSet, tol: float = REPORT_TOL) -> InequalityReport:
    return kn(correlators, 3, (-1, -1, -1), tol=tol)


def k4_chsh_form(correlators: CorrelatorSet, tol: float = REPORT_TOL) -> InequalityReport:
    return kn(correlators, 4, tol=tol)


def five_term_sign_patterns() -> list:
    """Distinct five-term patterns up to Q -> -Q relabelling, with the last term negative."""
    return [(1, 1, 1, 1, -1), (1, 1, -1, -1, -1), (-1, -1, -1, -1, -1)]


def odd_sign_patterns(n: int) -> list:
    """Every length-``n`` sign pattern with an odd number of minus signs."""
    out = []
    for k in range(1, n + 1, 2):
        for minus in combinations(range(n), k):
            out.append(tuple(-1 if m in minus else 1 for m in range(n)))
    return out


def k3_from_three_time_joint(p: JointDistribution) -> float:
    """``1 - 4[P(+,-,+) + P(-,+,-)]`` from a three-time joint."""
    if p.slots != 3:
        raise ValidationError("need a three-slot joint")
    _require_dichotomic(p)
    return 1.0 - 4.0 * (p.prob((1, -1, 1)) + p.prob((-1, 1, -1)))


def pentagon(correlators: CorrelatorSet, tol: float = REPORT_TOL) -> InequalityReport:
    """Five-time inequality ``sum_{i<j} C_ji + 2 >= 0`` over all ten pairs."""
    total = 0.0
    for i, j in combinations(range(1, 6), 2):
        if (j, i) not in correlators:
            raise ValidationError(f"pentagon needs C_{j}{i}")
        total += correlators[j, i]
    return make_report("pentagon", total + 2.0, 0.0, math.inf, tol)


def stationary_kn(c_tau: float, c_long: float, n: int, tol: float = REPORT_TOL) -> InequalityReport:
    """``(n-1) C(tau) - C((n-1) tau) <= n - 2``."""
    for c in (c_tau, c_long):
        if abs(c) > 1.0 + CORRELATOR_TOL:
            raise ValidationError("stationary correlators must satisfy |C| <= 1")
    if n < 3:
        raise ValidationError("need n >= 3")
    return make_report(f"stationary K_{n}", (n - 1) * c_tau - c_long, -math.inf, n - 2, tol, n=n)


def huelga(p_t: float, p_2t: float, tol: float = REPORT_TOL) -> InequalityReport:
    """``P(n,2t|n,0) - P(n,t|n,0)^2 >= 0``."""
    for p in (p_t, p_2t):
        if not -JOINT_TOL <= p <= 1.0 + JOINT_TOL:
            raise ValidationError("conditional probabilities must lie in [0, 1]")
    return make_report("huelga", p_2t - p_t ** 2, 0.0, math.inf, tol)


def temporal_chsh(b1a1: float, b1a2: float, b2a1: float, b2a2: float,
                  tol: float = REPORT_TOL) -> InequalityReport:
    """``|<B1A1> + <B1A2> + <B2A1> - <B2A2>| <= 2``."""
    vals = (b1a1, b1a2, b2a1, b2a2)
    if any(abs(v) > 1.0 + CORRELATOR_TOL for v in vals):
        raise ValidationError("CHSH correlators must satisfy |C| <= 1")
    return make_report("temporal CHSH", abs(b1a1 + b1a2 + b2a1 - b2a2), -math.inf, 2.0, tol)


def three_term_chsh(b2a2: float, b1a1: float, b1a2: float,
                    tol: float = REPORT_TOL) -> InequalityReport:
    """``<B2A2> + <B1A1> - <B1A2> <= 1``, valid when ``A1 = B2``."""
    return make_report("three-term CHSH", b2a2 + b1a1 - b1a2, -3.0, 1.0, tol)


def conditional_entropy(table) -> float:
    """``H[later | earlier]`` in bits from ``table[earlier, later]``.

    Zero-probability cells contribute nothing.
    """
    p = np.asarray(table.probs if isinstance(table, JointDistribution) else table, dtype=float)
    if p.ndim != 2:
        raise ValidationError("conditional entropy needs a two-slot table")
    marg = p.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(p > 0, p / np.where(marg > 0, marg, 1.0), 1.0)
        terms = np.where(p > 0, p * np.log2(cond), 0.0)
    return float(-terms.sum())


def entropic(consecutive: Sequence, endpoint, tol: float = REPORT_TOL) -> InequalityReport:
    """``sum_k H[Q_k|Q_{k-1}] - H[Q_N|Q_0] >= 0`` (bits).

    ``consecutive[k]`` is the joint table of times ``k`` and ``k+1``
    (earlier time on axis 0); ``endpoint`` pairs the first and last time.
    """
    if not consecutive:
        raise ValidationError("need at least one consecutive pair")
    value = sum(conditional_entropy(t) for t in consecutive) - conditional_entropy(endpoint)
    return make_report(f"entropic N={len(consecutive) + 1}", value, 0.0, math.inf, tol, bits=True)


def witness(p_single, p_pair, earlier_axis: int = 0) -> float:
    """No-signalling-in-time deficit ``max_Q |P(Q) - sum_Qk P(Qk, Q)|``."""
    single = np.asarray(p_single.probs if isinstance(p_single, JointDistribution) else p_single,
                        dtype=float)
    pair = np.asarray(p_pair.probs if isinstance(p_pair, JointDistribution) else p_pair,
                      dtype=float)
    marg = pair.sum(axis=earlier_axis)
    if marg.shape != single.shape:
        raise ValidationError("alphabets of the two distributions differ")
    return float(np.max(np.abs(single - marg)))


@dataclass(frozen=True)
class HardyCheck:
    probabilities: tuple
    consistent_with_macrorealism: bool


def hardy(p11_pp: float, p12_mp: float, p21_pm: float, p22_pp: float,
          tol: float = REPORT_TOL) -> HardyCheck:
    """Temporal Hardy test on ``P(+,+|1,1), P(-,+|1,2), P(+,-|2,1), P(+,+|2,2)``."""
    probs = (p11_pp, p12_mp, p21_pm, p22_pp)
    if any(not -JOINT_TOL <= p <= 1 + JOINT_TOL for p in probs):
        raise ValidationError("Hardy probabilities must lie in [0, 1]")
    paradox = all(p <= tol for p in probs[:3]) and probs[3] > tol
    return HardyCheck(tuple(float(p) for p in probs), not paradox)


def venality_f(k3p: float, zeta: float, tol: float = REPORT_TOL) -> InequalityReport:
    """``f = 1 - K_3'`` against the loosened bound ``-2 zeta``."""
    if not 0.0 <= zeta <= 1.0:
        raise ValidationError("venality must lie in [0, 1]")
    return make_report("venality f", 1.0 - k3p, 0.0 - 2.0 * zeta, math.inf, tol, zeta=zeta)


def family_reports(correlators: CorrelatorSet, n_times: int,
                   tol: float = REPORT_TOL) -> list:
    """K_3, K_3', K_4, the five-term variants and the pentagon, as far as ``n_times`` allows."""
    out = []
    if n_times >= 3:
        out += [kn(correlators, 3, tol=tol), k3_prime(correlators, tol)]
    if n_times >= 4:
        out.append(kn(correlators, 4, tol=tol))
    if n_times >= 5:
        out += [kn(correlators, 5, s, tol=tol) for s in five_term_sign_patterns()]
        out.append(pentagon(correlators, tol))
    return out


def any_violated(reports: Iterable[InequalityReport]) -> bool:
    return any(r.violated for r in reports)
