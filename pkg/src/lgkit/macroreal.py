"""Classical oracles for certifying Leggett-Garg-type bounds.

Finite ontic-state models are evaluated by exact summation, deterministic
histories are enumerated exhaustively, and Markov chains are handled by
matrix powers.  Nothing here samples, so a reported violation is never
statistical noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import kernels, lgi
from .errors import ValidationError
from .lgi import CorrelatorSet, JointDistribution

MAX_ONTIC_STATES = 64
MAX_ENUMERATION = 20
STOCHASTIC_TOL = 1e-12


def make_rng(seed, *spawn_key) -> np.random.Generator:
    """Counter-based generator; ``spawn_key`` selects an independent stream."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.Generator(np.random.Philox(ss))


# --- ontic models ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OnticModel:
    """Finite hidden-variable model with measurement-dependent disturbance.

    Parameters
    ----------
    mu : (S,) array
        Preparation distribution over ontic states.
    xi : (M, S, 2) array
        ``xi[m, s, o]`` is the probability that measurement ``m`` gives
        outcome ``o`` (0 for +1, 1 for -1) on ontic state ``s``.
    gamma : (M, 2, S, S) array
        ``gamma[m, o, s, s2]`` is the probability that measuring ``m`` with
        result ``o`` moves the ontic state from ``s`` to ``s2``.
    seed : optional
        Provenance of randomly drawn models.
    """

    mu: np.ndarray
    xi: np.ndarray
    gamma: np.ndarray
    seed: tuple | None = None

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        xi = np.array(self.xi, dtype=float)
        gamma = np.array(self.gamma, dtype=float)
        s = mu.shape[0]
        if mu.ndim != 1 or not 1 <= s <= MAX_ONTIC_STATES:
            raise ValidationError(f"need 1..{MAX_ONTIC_STATES} ontic states")
        m = xi.shape[0]
        if xi.shape != (m, s, 2) or gamma.shape != (m, 2, s, s):
            raise ValidationError("kernel shapes inconsistent with the ontic set")
        for name, arr, axis in (("mu", mu, 0), ("xi", xi, 2), ("gamma", gamma, 3)):
            if np.any(arr < -STOCHASTIC_TOL) or np.max(np.abs(arr.sum(axis=axis) - 1.0)) > STOCHASTIC_TOL:
                raise ValidationError(f"{name} is not stochastic")
        for name, arr in (("mu", mu), ("xi", xi), ("gamma", gamma)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_states(self) -> int:
        return self.mu.shape[0]

    @property
    def n_measurements(self) -> int:
        return self.xi.shape[0]

    @property
    def nim(self) -> bool:
        eye = np.eye(self.n_states)
        return bool(np.all(np.abs(self.gamma - eye) <= STOCHASTIC_TOL))

    def as_record(self) -> dict:
        return {"mu": self.mu.tolist(), "xi": self.xi.tolist(), "gamma": self.gamma.tolist(),
                "seed": None if self.seed is None else list(self.seed), "nim": self.nim}


def identity_disturbance(n_measurements: int, n_states: int) -> np.ndarray:
    return np.broadcast_to(np.eye(n_states), (n_measurements, 2, n_states, n_states)).copy()


def random_model(rng: np.random.Generator, n_measurements: int, n_states: int,
                 nim: bool = True, alpha: float = 1.0, deterministic: bool = False,
                 seed: tuple | None = None) -> OnticModel:
    """Dirichlet-distributed ontic model.

    ``deterministic`` makes every outcome kernel a 0/1 assignment; small
    ``alpha`` pushes the random kernels towards the vertices.
    """
    mu = rng.dirichlet(np.full(n_states, alpha))
    if deterministic:
        xi = np.zeros((n_measurements, n_states, 2))
        picks = rng.integers(0, 2, size=(n_measurements, n_states))
        np.put_along_axis(xi, picks[..., None], 1.0, axis=2)
    else:
        xi = rng.dirichlet([alpha, alpha], size=(n_measurements, n_states))
    if nim:
        gamma = identity_disturbance(n_measurements, n_states)
    else:
        gamma = rng.dirichlet(np.full(n_states, alpha), size=(n_measurements, 2, n_states))
    return OnticModel(mu, xi, gamma, seed)


def sequence_joint(model: OnticModel, seq, backend=None) -> JointDistribution:
    """Joint table of measuring the labels in ``seq`` (0-based) in that order."""
    seq = [int(m) for m in seq]
    if not seq or any(m < 0 or m >= model.n_measurements for m in seq):
        raise ValidationError("measurement label out of range")
    flat = kernels.ontic_sequence_joint(model.mu, model.xi, model.gamma, seq, backend=backend)
    table = np.clip(flat.reshape((2,) * len(seq)), 0.0, None)
    return JointDistribution(table / table.sum())


def ontic_two_time(model: OnticModel, i: int, j: int) -> JointDistribution:
    """Joint of measuring only slots ``i`` then ``j`` (1-based labels)."""
    if not i < j:
        raise ValidationError("need i before j")
    return sequence_joint(model, [i - 1, j - 1])


def ontic_correlators(model: OnticModel, n: int) -> CorrelatorSet:
    """Two-point-protocol correlators ``C_ji`` for slots ``1..n``."""
    if n > model.n_measurements:
        raise ValidationError("model has fewer measurement slots than requested")
    return CorrelatorSet.from_function(
        lambda i, j: lgi.correlator_from_joint(ontic_two_time(model, j, i)), n
    )


def ontic_kn(model: OnticModel, n: int, signs=None, tol: float = lgi.REPORT_TOL):
    rep = lgi.kn(ontic_correlators(model, n), n, signs, tol=tol)
    return _tag(rep, model)


def _tag(rep: lgi.InequalityReport, model: OnticModel) -> lgi.InequalityReport:
    meta = dict(rep.metadata, nim=model.nim, seed=model.seed)
    return lgi.InequalityReport(rep.name, rep.value, rep.lower_bound, rep.upper_bound,
                                rep.violated, rep.margin, rep.tol, meta)


def invasive_example() -> OnticModel:
    """Four-state model whose measurements reset the ontic state.

    Measuring slot ``k`` moves the state to ``z_k``, so later outcomes depend
    on which earlier slot was measured.  It reaches ``K_3 = 3``.
    """
    # ontic states z0..z3; outcome table xi[slot][state] in {+1, -1}
    values = np.array([
        [+1, +1, +1, +1],
        [+1, +1, +1, +1],
        [+1, -1, +1, +1],
    ])
    xi = np.stack([(values == 1), (values == -1)], axis=-1).astype(float)
    mu = np.array([1.0, 0.0, 0.0, 0.0])
    gamma = np.zeros((3, 2, 4, 4))
    for k in range(3):
        gamma[k, :, :, k + 1] = 1.0
    return OnticModel(mu, xi, gamma)


# --- exhaustive enumeration ------------------------------------------------

def string_extrema(n: int, terms, offset: float = 0.0, backend=None) -> dict:
    """Extrema of ``offset + sum s Q_i Q_j`` over deterministic histories.

    ``terms`` holds ``(s, i, j)`` with 1-based slots.
    """
    if not 1 <= n <= MAX_ENUMERATION:
        raise ValidationError(f"enumeration is limited to n <= {MAX_ENUMERATION}")
    terms = list(terms)
    ii = [i - 1 for _, i, _ in terms]
    jj = [j - 1 for _, _, j in terms]
    coeff = [float(s) for s, _, _ in terms]
    lo, hi = kernels.lg_string_extrema(n, ii, jj, coeff, offset, backend=backend)
    return {"min": lo, "max": hi}


def enumerate_bounds(n: int, signs=None, order=None, backend=None) -> dict:
    if n > MAX_ENUMERATION:
        raise ValidationError(f"enumeration is limited to n <= {MAX_ENUMERATION}")
    return string_extrema(n, lgi.kn_terms(n, signs, order), backend=backend)


def enumerate_pentagon(backend=None) -> dict:
    """Extrema of the ten-pair sum over five deterministic values."""
    terms = [(1, j, i) for i, j in combinations(range(1, 6), 2)]
    return string_extrema(5, terms, backend=backend)


# --- Markov chains ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MarkovChain:
    """Time-homogeneous chain with ``transition[a, b] = P(b at t+dt | a at t)``.

    ``counted[a, b]`` is the fraction of the ``a -> b`` probability that
    transfers one counted charge.
    """

    transition: np.ndarray
    initial: np.ndarray | None = None
    counted: np.ndarray | None = None
    dt: float = 1.0

    def __post_init__(self):
        t = np.array(self.transition, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValidationError("transition matrix must be square")
        if np.any(t < -STOCHASTIC_TOL) or np.max(np.abs(t.sum(axis=1) - 1.0)) > STOCHASTIC_TOL:
            raise ValidationError("transition matrix must be row-stochastic")
        if not self.dt > 0:
            raise ValidationError("time step must be positive")
        object.__setattr__(self, "transition", t)
        if self.initial is not None:
            p = np.array(self.initial, dtype=float)
            if p.shape != (t.shape[0],) or abs(p.sum() - 1) > STOCHASTIC_TOL or np.any(p < 0):
                raise ValidationError("initial distribution invalid")
            object.__setattr__(self, "initial", p)
        if self.counted is not None:
            c = np.array(self.counted, dtype=float)
            if c.shape != t.shape or np.any(c < 0) or np.any(c > 1):
                raise ValidationError("counted fractions must lie in [0, 1]")
            object.__setattr__(self, "counted", c)

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    def power(self, k: int) -> np.ndarray:
        if k < 0:
            raise ValidationError("step count must be nonnegative")
        return np.linalg.matrix_power(self.transition, int(k))

    def stationary(self) -> np.ndarray:
        n = self.n_states
        a = np.vstack([self.transition.T - np.eye(n), np.ones((1, n))])
        b = np.zeros(n + 1)
        b[-1] = 1.0
        p = np.linalg.lstsq(a, b, rcond=None)[0]
        p = np.clip(p, 0.0, None)
        return p / p.sum()

    def counting_matrix(self, chi: float) -> np.ndarray:
        if self.counted is None:
            return self.transition.astype(complex)
        phase = complex(math.cos(chi), math.sin(chi))
        return self.transition * ((1.0 - self.counted) + self.counted * phase)

    def as_record(self) -> dict:
        return {"transition": self.transition.tolist(),
                "counted": None if self.counted is None else self.counted.tolist()}


def random_chain(rng: np.random.Generator, n_states: int, counted: bool = False,
                 alpha: float = 1.0) -> MarkovChain:
    t = rng.dirichlet(np.full(n_states, alpha), size=n_states)
    c = rng.uniform(size=(n_states, n_states)) if counted else None
    return MarkovChain(t, counted=c)


def markov_conditional(chain: MarkovChain, state: int, k: int) -> float:
    """``P(state at k dt | state at 0)``."""
    return float(chain.power(k)[state, state])


def huelga_oracle(chain: MarkovChain, state: int, k: int, tol: float = lgi.REPORT_TOL):
    return lgi.huelga(markov_conditional(chain, state, k), markov_conditional(chain, state, 2 * k),
                      tol)


def classical_counting_mgf(chain: MarkovChain, chi: float, k: int, p0=None) -> complex:
    """``sum_paths P(path) exp(i chi n)`` after ``k`` steps, stationary start by default."""
    p = chain.stationary() if p0 is None else np.asarray(p0, dtype=float)
    m = np.linalg.matrix_power(chain.counting_matrix(chi), int(k))
    return complex(p @ m @ np.ones(chain.n_states))


def classical_fcs(chain: MarkovChain, chi: float, k1: int, k2: int, tol: float = 1e-12) -> list:
    from .dynamics import fcs_report

    g = lambda k: classical_counting_mgf(chain, chi, k)  # noqa: E731
    return fcs_report(chi, g(k1) + g(k2) - g(k1 + k2), tol)


def classical_charge_lgi(chain: MarkovChain, weights, k: int, tol: float = lgi.REPORT_TOL):
    """``2 <Q'(k) Q'> - <Q'(2k) Q'> <= Q'_max <Q'>`` for a stationary chain."""
    q = np.asarray(weights, dtype=float)
    if q.shape != (chain.n_states,) or np.any(q < 0):
        raise ValidationError("need one nonnegative weight per state")
    p = chain.stationary()
    corr = lambda s: float(p @ (q * (chain.power(s) @ q)))  # noqa: E731
    lhs = 2.0 * corr(k) - corr(2 * k)
    return lgi.make_report("charge LGI", lhs, -math.inf, q.max() * float(p @ q), tol, k=k)


# --- certification suites --------------------------------------------------

@dataclass
class CertificationSummary:
    suite: str
    count: int
    seed: int | None
    checks: int = 0
    violations: list = field(default_factory=list)
    extremes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def note(self, key: str, value: float, kind: str = "max") -> None:
        old = self.extremes.get(key)
        if old is None or (value > old if kind == "max" else value < old):
            self.extremes[key] = float(value)

    def as_record(self) -> dict:
        return {"suite": self.suite, "count": self.count, "seed": self.seed,
                "checks": self.checks, "passed": self.passed,
                "violations": len(self.violations), **self.extremes}


LG_SLOTS = 5
CHSH_A = (0, 1)
CHSH_B = (2, 3)


def _pair_corr(model, a, b) -> float:
    return lgi.correlator_from_joint(sequence_joint(model, [a, b]))


def ontic_reports(model: OnticModel, tol: float = lgi.REPORT_TOL) -> dict:
    """Every implemented classical test on one five-slot model."""
    corr = ontic_correlators(model, LG_SLOTS)
    reps = {r.name: r for r in lgi.family_reports(corr, LG_SLOTS, tol)}
    (a1, a2), (b1, b2) = CHSH_A, CHSH_B
    reps["temporal CHSH"] = lgi.temporal_chsh(
        _pair_corr(model, a1, b1), _pair_corr(model, a2, b1),
        _pair_corr(model, a1, b2), _pair_corr(model, a2, b2), tol)
    h = {kl: sequence_joint(model, [CHSH_A[kl[0]], CHSH_B[kl[1]]]) for kl in
         ((0, 0), (0, 1), (1, 0), (1, 1))}
    hardy = lgi.hardy(h[0, 0].prob((1, 1)), h[0, 1].prob((-1, 1)), h[1, 0].prob((1, -1)),
                      h[1, 1].prob((1, 1)), tol)
    deficit = 0.0
    for i, j in combinations(range(LG_SLOTS), 2):
        single = sequence_joint(model, [j]).probs
        deficit = max(deficit, lgi.witness(single, sequence_joint(model, [i, j]).probs))
    return {"reports": reps, "hardy": hardy, "witness": deficit}


def certify_ontic(count: int = 1000, seed: int = 0, max_states: int = 16,
                  tol: float = lgi.REPORT_TOL) -> CertificationSummary:
    """Random NIM models against every classical inequality.

    Every fourth model has deterministic outcome kernels so that the Hardy
    premises are met exactly in part of the sample.
    """
    summ = CertificationSummary("ontic-bounds", count, seed)
    for k in range(count):
        rng = make_rng(seed, k)
        n_states = int(rng.integers(2, max_states + 1))
        model = random_model(rng, LG_SLOTS, n_states, nim=True, alpha=float(rng.uniform(0.1, 2.0)),
                             deterministic=(k % 4 == 3), seed=(seed, k))
        out = ontic_reports(model, tol)
        bad = [name for name, r in out["reports"].items() if r.violated]
        if not out["hardy"].consistent_with_macrorealism:
            bad.append("hardy")
        if out["witness"] > tol:
            bad.append("witness")
        summ.checks += len(out["reports"]) + 2
        for name, r in out["reports"].items():
            summ.note(name, r.margin)
        summ.note("witness", out["witness"])
        if bad:
            summ.violations.append({"model": model.as_record(), "failed": bad})
    return summ


def certify_markov(count: int = 1000, seed: int = 0, max_states: int = 8,
                   max_steps: int = 6, tol: float = lgi.REPORT_TOL) -> CertificationSummary:
    summ = CertificationSummary("markov-huelga", count, seed)
    for k in range(count):
        rng = make_rng(seed, k)
        chain = random_chain(rng, int(rng.integers(2, max_states + 1)),
                             alpha=float(rng.uniform(0.1, 2.0)))
        state = int(rng.integers(0, chain.n_states))
        for steps in range(1, max_steps + 1):
            rep = huelga_oracle(chain, state, steps, tol)
            summ.checks += 1
            summ.note("min_deficit", rep.value, "min")
            if rep.violated:
                summ.violations.append({"chain": chain.as_record(), "state": state, "steps": steps,
                                        "deficit": rep.value, "seed": [seed, k]})
    return summ


def certify_fcs(count: int = 500, seed: int = 0, max_states: int = 6, max_steps: int = 6,
                tol: float = 1e-12) -> CertificationSummary:
    summ = CertificationSummary("classical-fcs", count, seed)
    for k in range(count):
        rng = make_rng(seed, k)
        chain = random_chain(rng, int(rng.integers(1, max_states + 1)), counted=True,
                             alpha=float(rng.uniform(0.1, 2.0)))
        k1, k2 = (int(x) for x in rng.integers(1, max_steps + 1, size=2))
        re, im = classical_fcs(chain, math.pi, k1, k2, tol)
        summ.checks += 2
        summ.note("max_re_L", re.value)
        summ.note("max_abs_im_L", abs(im.value))
        if re.violated or im.violated:
            summ.violations.append({"chain": chain.as_record(), "k1": k1, "k2": k2,
                                    "L": [re.value, im.value], "seed": [seed, k]})
    return summ


def certify_enumerate(n_min: int = 3, n_max: int = 12, backend=None) -> CertificationSummary:
    """Parity bound formula against exhaustive enumeration, with the pentagon."""
    summ = CertificationSummary("enumerate", n_max - n_min + 1, None)
    for n in range(n_min, n_max + 1):
        got = enumerate_bounds(n, backend=backend)
        lo, hi = lgi.kn_bounds(n)
        summ.checks += 1
        summ.extremes[f"max_n{n}"] = float(got["max"])
        if got["min"] != lo or got["max"] != hi:
            summ.violations.append({"n": n, "enumerated": got, "formula": [lo, hi]})
    pent = enumerate_pentagon(backend)
    summ.checks += 1
    summ.extremes["pentagon_min"] = pent["min"]
    if pent["min"] + 2.0 < 0:
        summ.violations.append({"pentagon": pent})
    return summ


SUITES = {
    "ontic-bounds": certify_ontic,
    "markov-huelga": certify_markov,
    "classical-fcs": certify_fcs,
    "enumerate": certify_enumerate,
}
