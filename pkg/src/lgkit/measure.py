"""Measurement models.

Projective measurement, the Gaussian semi-weak Kraus meter, the symmetrized
(Margenau-Hill) quasi-probability, the ancilla CNOT ideal-negative scheme
with imperfect ancilla preparation, and the C-SIGN scheme of tunable
strength.

Outcome tables use index 0 for the value +1 and index 1 for -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import qop
from .errors import EmptyBranchError, ValidationError
from .qop import DichotomicObservable, KrausChannel, QuantumState

EMPTY_BRANCH = 1e-12
# Gauss-Hermite rules degenerate at zero strength; the weak limit is taken
# at this strength instead.
WEAK_LIMIT_STRENGTH = 1e-12
DEFAULT_NODES = 64

VALUES = (1, -1)


@dataclass(frozen=True, eq=False)
class ProjectiveOutcome:
    p_plus: float
    p_minus: float
    _branches: tuple = field(repr=False)

    def probability(self, value: int) -> float:
        return self.p_plus if value == 1 else self.p_minus

    def post(self, value: int) -> QuantumState:
        """Normalised post-measurement state for outcome ``value``."""
        p = self.probability(value)
        if p < EMPTY_BRANCH:
            raise EmptyBranchError(value, p)
        m = self._branches[0 if value == 1 else 1]
        return QuantumState(qop.symmetrize(m / p, "projective post-state"))

    @property
    def post_plus(self) -> QuantumState:
        return self.post(1)

    @property
    def post_minus(self) -> QuantumState:
        return self.post(-1)

    def mixture(self) -> QuantumState:
        """Non-selective post-measurement state."""
        return QuantumState(qop.symmetrize(self._branches[0] + self._branches[1]))


def projective_measure(rho: QuantumState, obs: DichotomicObservable) -> ProjectiveOutcome:
    if obs.dim != rho.dim:
        raise ValidationError("observable and state dimensions differ")
    branches = tuple(
        obs.projector(v) @ rho.matrix @ obs.projector(v) for v in VALUES
    )
    p = [max(float(np.real(np.trace(b))), 0.0) for b in branches]
    s = p[0] + p[1]
    return ProjectiveOutcome(p[0] / s, p[1] / s, branches)


@dataclass(frozen=True, eq=False)
class GaussianMeter:
    """Gaussian Kraus meter of strength ``lam`` on a dichotomic observable.

    ``lam = math.inf`` is the projective mode.
    """

    strength: float
    target: DichotomicObservable

    def __post_init__(self):
        if not (self.strength >= 0):
            raise ValidationError(f"meter strength must be >= 0, got {self.strength}")

    @property
    def projective(self) -> bool:
        return math.isinf(self.strength)

    @property
    def coherence_factor(self) -> float:
        """Factor multiplying coherences between the +1 and -1 subspaces."""
        return 0.0 if self.projective else math.exp(-2.0 * self.strength)


def gaussian_kraus(q: float, meter: GaussianMeter) -> np.ndarray:
    """Kraus operator ``(2 lam / pi)^(1/4) exp[-lam (q - Q)^2]`` at outcome ``q``."""
    if not math.isfinite(q):
        raise ValidationError("meter outcome must be finite")
    if meter.projective:
        raise ValidationError("projective meter has no Kraus density; use projective_measure")
    lam = meter.strength
    pref = (2.0 * lam / math.pi) ** 0.25
    return sum(
        pref * math.exp(-lam * (q - v) ** 2) * meter.target.projector(v) for v in VALUES
    )


@dataclass(frozen=True)
class OutcomeDensity:
    """Meter response density: a mixture of two Gaussians centred on +1 and -1.

    Each component has variance ``1/(4 lam)``.  In projective mode the
    components are point masses.
    """

    weights: tuple
    strength: float
    centers: tuple = VALUES

    @property
    def variance(self) -> float:
        if math.isinf(self.strength):
            return 0.0
        if self.strength == 0:
            return math.inf
        return 1.0 / (4.0 * self.strength)

    def pdf(self, q):
        if math.isinf(self.strength):
            raise ValidationError("projective mode has a discrete outcome distribution")
        q = np.asarray(q, dtype=float)
        lam = self.strength
        norm = math.sqrt(2.0 * lam / math.pi)
        return sum(
            w * norm * np.exp(-2.0 * lam * (q - c) ** 2) for w, c in zip(self.weights, self.centers)
        )

    def mean(self) -> float:
        return float(sum(w * c for w, c in zip(self.weights, self.centers)))

    @property
    def normalization(self) -> float:
        return float(sum(self.weights))


@dataclass(frozen=True, eq=False)
class GaussianMeasurement:
    density: OutcomeDensity
    mean_q: float
    averaged_post_state: QuantumState
    coherence_factor: float


def gaussian_measure(rho: QuantumState, meter: GaussianMeter) -> GaussianMeasurement:
    """Closed-form statistics of one Gaussian meter readout."""
    obs = meter.target
    if obs.dim != rho.dim:
        raise ValidationError("meter and state dimensions differ")
    pp, pm = obs.projector_plus, obs.projector_minus
    r = rho.matrix
    weights = tuple(max(float(np.real(np.trace(p @ r))), 0.0) for p in (pp, pm))
    cf = meter.coherence_factor
    avg = pp @ r @ pp + pm @ r @ pm + cf * (pp @ r @ pm + pm @ r @ pp)
    return GaussianMeasurement(
        density=OutcomeDensity(weights, meter.strength),
        mean_q=weights[0] - weights[1],
        averaged_post_state=QuantumState(qop.symmetrize(avg, "gaussian_measure")),
        coherence_factor=cf,
    )


def gaussian_post_state(rho: QuantumState, q: float, meter: GaussianMeter):
    """Outcome density ``P(q)`` and the conditional post-measurement state."""
    k = gaussian_kraus(q, meter)
    un = k @ rho.matrix @ k.conj().T
    p = float(np.real(np.trace(un)))
    if p < EMPTY_BRANCH:
        raise EmptyBranchError(0, p)
    return p, QuantumState(qop.symmetrize(un / p))


def kraus_overlap_moments(strength: float, va: float, vb: float, orders=(0, 1),
                          nodes: int = DEFAULT_NODES) -> np.ndarray:
    """Moments ``int q^p f_a(q) f_b(q) dq`` of a pair of Kraus branch amplitudes.

    ``f_v(q) = (2 lam/pi)^(1/4) exp[-lam (q - v)^2]``.  The product is a
    Gaussian in ``q`` centred at the midpoint, so a Gauss-Hermite rule in the
    shifted variable integrates every polynomial moment up to degree
    ``2 nodes - 1`` exactly.
    """
    if math.isinf(strength):
        raise ValidationError("projective meter has no Kraus density")
    lam = max(strength, WEAK_LIMIT_STRENGTH)
    x, w = np.polynomial.hermite.hermgauss(nodes)
    mid = 0.5 * (va + vb)
    amp = math.exp(-0.5 * lam * (va - vb) ** 2) / math.sqrt(math.pi)
    q = mid + x / math.sqrt(2.0 * lam)
    return np.array([amp * np.dot(w, q ** p) for p in orders])


def _as_linear_map(propagate) -> Callable[[np.ndarray], np.ndarray]:
    if propagate is None:
        return lambda x: x
    if isinstance(propagate, KrausChannel):
        return propagate.map_operator
    if callable(propagate):
        return propagate
    u = qop.as_matrix(propagate)
    return lambda x: u @ x @ u.conj().T


def three_point_moments(rho_t2: QuantumState, meter: GaussianMeter, propagate,
                        final: DichotomicObservable, nodes: int = DEFAULT_NODES) -> np.ndarray:
    """Joint statistics of a Gaussian middle readout ``q`` and a final projective ``Q3``.

    Returns a ``(2, 2)`` array ``M`` with ``M[i, p] = int q^p P(Q3 = v_i, q) dq``.
    Projective mode sums over the discrete readout instead.
    """
    lin = _as_linear_map(propagate)
    obs = meter.target
    out = np.zeros((2, 2))
    for ia, va in enumerate(VALUES):
        for ib, vb in enumerate(VALUES):
            block = obs.projector(va) @ rho_t2.matrix @ obs.projector(vb)
            if meter.projective:
                mom = np.array([1.0, va]) if ia == ib else np.zeros(2)
            else:
                mom = kraus_overlap_moments(meter.strength, va, vb, (0, 1), nodes)
            evolved = lin(block)
            for i3, v3 in enumerate(VALUES):
                t = np.real(np.trace(final.projector(v3) @ evolved))
                out[i3] += mom * t
    return out


def mh_quasiprobability(rho_t2: QuantumState, o2: DichotomicObservable, propagate,
                        o3: DichotomicObservable) -> np.ndarray:
    """Symmetrized quasi-probability table ``P[Q3, Q2]``.

    ``P(Q3, Q2) = Tr[Pi_Q3 Phi(1/2 {Pi_Q2, rho})]`` with ``Phi`` the evolution
    from the middle to the final time (unitary matrix, Kraus channel or a
    linear map on operators).  Entries may be negative.
    """
    lin = _as_linear_map(propagate)
    table = np.zeros((2, 2))
    for j, v2 in enumerate(VALUES):
        x = 0.5 * qop.anticommutator(o2.projector(v2), rho_t2.matrix)
        y = lin(x)
        for i, v3 in enumerate(VALUES):
            table[i, j] = np.real(np.trace(o3.projector(v3) @ y))
    return table


def correlators_from_table(table: np.ndarray) -> dict:
    """``<Q3>``, ``<Q2>`` and ``<Q3 Q2>`` from a ``[Q3, Q2]`` (quasi-)table."""
    v = np.array(VALUES, dtype=float)
    return {
        "Q3": float(v @ table.sum(axis=1)),
        "Q2": float(table.sum(axis=0) @ v),
        "Q3Q2": float(v @ table @ v),
    }


def correlators_from_moments(moments: np.ndarray) -> dict:
    """The same three correlators from :func:`three_point_moments` output."""
    v = np.array(VALUES, dtype=float)
    return {
        "Q3": float(v @ moments[:, 0]),
        "Q2": float(moments[:, 1].sum()),
        "Q3Q2": float(v @ moments[:, 1]),
    }


def deconvolved_quasiprobability(moments: np.ndarray) -> np.ndarray:
    """Quasi-probability ``[Q3, Q2]`` left after removing meter noise from readout moments.

    Fixes the zeroth and first ``q`` moments of each ``Q3`` row:
    ``q(Q3, +/-1) = (M[Q3, 0] +/- M[Q3, 1]) / 2``.
    """
    m = np.asarray(moments, dtype=float)
    return np.stack([0.5 * (m[:, 0] + m[:, 1]), 0.5 * (m[:, 0] - m[:, 1])], axis=1)


# --- ancilla schemes -------------------------------------------------------

ANCILLA_KINDS = ("CNOT", "anti-CNOT", "C-SIGN")


def gamma_from_knowledge(k: float) -> float:
    if not 0.0 <= k <= 1.0:
        raise ValidationError("knowledge K must lie in [0, 1]")
    return math.sqrt((1.0 + k) / 2.0)


@dataclass(frozen=True, eq=False)
class AncillaScheme:
    """Single-ancilla measurement gate with its ancilla preparation.

    ``venality`` is the fraction of ancillas prepared in the orthogonal
    (wrong) state; ``gamma`` is the C-SIGN ancilla amplitude.
    """

    kind: str
    ancilla: QuantumState
    venality: float = 0.0
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in ANCILLA_KINDS:
            raise ValidationError(f"unknown ancilla gate {self.kind!r}")
        if not 0.0 <= self.venality <= 1.0:
            raise ValidationError(f"venality must lie in [0, 1], got {self.venality}")
        if self.kind == "C-SIGN":
            if self.gamma is None or not (1 / math.sqrt(2) - 1e-15 <= self.gamma <= 1.0):
                raise ValidationError("C-SIGN gamma must lie in [1/sqrt(2), 1]")

    @property
    def knowledge(self) -> float:
        if self.gamma is None:
            raise ValidationError("knowledge is only defined for the C-SIGN scheme")
        return 2.0 * self.gamma ** 2 - 1.0

    @classmethod
    def cnot(cls, venality: float = 0.0, anti: bool = False) -> "AncillaScheme":
        if not 0.0 <= venality <= 1.0:
            raise ValidationError(f"venality must lie in [0, 1], got {venality}")
        rho_a = QuantumState(np.diag([1.0 - venality, venality]).astype(complex))
        return cls("anti-CNOT" if anti else "CNOT", rho_a, venality)

    @classmethod
    def csign(cls, gamma: float) -> "AncillaScheme":
        if not (1 / math.sqrt(2) - 1e-15 <= gamma <= 1.0):
            raise ValidationError("C-SIGN gamma must lie in [1/sqrt(2), 1]")
        gbar = math.sqrt(max(1.0 - gamma ** 2, 0.0))
        d = np.array([1, 1]) / math.sqrt(2)
        a = np.array([1, -1]) / math.sqrt(2)
        return cls("C-SIGN", QuantumState.pure(gamma * d + gbar * a), 0.0, gamma)


@dataclass(frozen=True, eq=False)
class KeptBranch:
    probability: float
    system_state: QuantumState | None
    unnormalized: np.ndarray = field(repr=False)


def run_cnot_scheme(rho_s: QuantumState, scheme: AncillaScheme,
                    obs: DichotomicObservable = qop.SIGMA_Z) -> KeptBranch:
    """One CNOT-type run keeping only results where the ancilla did not flip.

    The CNOT flips the ancilla when the system is in the +1 subspace; the
    anti-CNOT when it is in the -1 subspace.  A kept CNOT result therefore
    reports -1 and a kept anti-CNOT result reports +1.
    """
    if scheme.kind not in ("CNOT", "anti-CNOT"):
        raise ValidationError("run_cnot_scheme needs a CNOT or anti-CNOT scheme")
    ctrl = obs.projector_plus if scheme.kind == "CNOT" else obs.projector_minus
    d = rho_s.dim
    u = np.kron(ctrl, qop.SX) + np.kron(np.eye(d) - ctrl, qop.I2)
    joint = u @ qop.tensor(rho_s, scheme.ancilla) @ u.conj().T
    ready = np.kron(np.eye(d), np.diag([1.0, 0.0]))
    kept = ready @ joint @ ready
    sys_un = qop.partial_trace(kept, [d, 2], keep=0)
    p = float(np.real(np.trace(sys_un)))
    state = QuantumState(qop.symmetrize(sys_un / p)) if p > EMPTY_BRANCH else None
    return KeptBranch(p, state, sys_un)


@dataclass(frozen=True, eq=False)
class NegativeMeasurement:
    kept_probabilities: dict
    discard_fraction: float
    branches: dict = field(repr=False)


def ancilla_negative_measure(rho_s: QuantumState, venality: float = 0.0,
                             obs: DichotomicObservable = qop.SIGMA_Z) -> NegativeMeasurement:
    """Ideal negative measurement from a CNOT run and an anti-CNOT run.

    Wrongly prepared ancillas start in the flipped state, so a fraction
    ``venality`` of kept results carries the wrong value.
    """
    minus = run_cnot_scheme(rho_s, AncillaScheme.cnot(venality, anti=False), obs)
    plus = run_cnot_scheme(rho_s, AncillaScheme.cnot(venality, anti=True), obs)
    kept = {1: plus.probability, -1: minus.probability}
    # each run is half of the experiment; discards are the flip results
    discard = 0.5 * ((1.0 - plus.probability) + (1.0 - minus.probability))
    return NegativeMeasurement(kept, discard, {1: plus, -1: minus})


@dataclass(frozen=True, eq=False)
class CsignMeasurement:
    """Outcome statistics of the C-SIGN semi-weak measurement.

    ``joint[a, s]`` is the probability of ancilla result ``a`` (0 = D, 1 = A)
    and final system result ``s`` (0 = +1, 1 = -1).
    """

    joint: np.ndarray
    knowledge: float

    @property
    def p_ancilla(self) -> dict:
        m = self.joint.sum(axis=1)
        return {"D": float(m[0]), "A": float(m[1])}

    @property
    def p_system(self) -> dict:
        m = self.joint.sum(axis=0)
        return {1: float(m[0]), -1: float(m[1])}

    def _require_k(self) -> float:
        if abs(self.knowledge) < 1e-15:
            raise ValidationError("knowledge K = 0: weak expectation (P(D) - P(A)) / K undefined")
        return self.knowledge

    @property
    def weak_expectation(self) -> float:
        k = self._require_k()
        pa = self.p_ancilla
        return (pa["D"] - pa["A"]) / k

    def weak_value(self, system_value: int) -> float:
        """Post-selected ``(P(D|s) - P(A|s)) / K``."""
        k = self._require_k()
        col = self.joint[:, 0 if system_value == 1 else 1]
        ps = col.sum()
        if ps < EMPTY_BRANCH:
            raise EmptyBranchError(system_value, float(ps))
        return float((col[0] - col[1]) / ps / k)

    def correlator(self) -> float:
        """Estimated ``<Q2 Q3>`` with the ancilla as the ``Q2`` meter."""
        k = self._require_k()
        a = np.array([1.0, -1.0])
        return float(a @ self.joint @ a / k)

    def final_mean(self) -> float:
        ps = self.p_system
        return ps[1] - ps[-1]


CSIGN = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)


def csign_weak_measure(rho_s: QuantumState, gamma: float,
                       final: DichotomicObservable = qop.SIGMA_X) -> CsignMeasurement:
    """C-SIGN coupling to an ancilla in ``gamma|D> + gbar|A>``.

    The system qubit uses ``|H> = |0>`` (value +1) and ``|V> = |1>``.  The
    gate inverts the phase of ``|VV>``; the ancilla is read in the D/A basis
    and the system is then measured projectively with ``final``.
    """
    if rho_s.dim != 2:
        raise ValidationError("C-SIGN scheme acts on a qubit")
    scheme = AncillaScheme.csign(gamma)
    joint_state = CSIGN @ qop.tensor(rho_s, scheme.ancilla) @ CSIGN.conj().T
    d = np.array([1, 1]) / math.sqrt(2)
    a = np.array([1, -1]) / math.sqrt(2)
    table = np.zeros((2, 2))
    for ia, anc in enumerate((d, a)):
        pa = np.outer(anc, anc.conj())
        for js, v in enumerate(VALUES):
            proj = np.kron(final.projector(v), pa)
            table[ia, js] = max(float(np.real(np.trace(proj @ joint_state))), 0.0)
    return CsignMeasurement(table / table.sum(), scheme.knowledge)
