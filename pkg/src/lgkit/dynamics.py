"""Time evolution and closed forms for temporal correlators.

Covers the Rabi qubit, projective multi-time scheduling under unitary,
channel or Lindblad dynamics, the three-point protocol with a Gaussian
middle meter, Lindblad steady states and regression correlators, the
continuous-weak-measurement correlator, counting statistics and the charge
inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from . import lgi, measure, qop
from .errors import SteadyStateError, ValidationError
from .lgi import JointDistribution
from .qop import DichotomicObservable, KrausChannel, QuantumState

MAX_DIM = 16
NULL_TOL = 1e-9
EIG_COND_MAX = 1e8


# --- Rabi qubit ------------------------------------------------------------

@dataclass(frozen=True)
class RabiQubit:
    """Qubit with ``H = Omega sigma_x / 2`` observed through ``sigma_z``."""

    omega: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValidationError("Rabi frequency must be positive")

    @property
    def hamiltonian(self) -> np.ndarray:
        return 0.5 * self.omega * qop.SX

    def correlator(self, ti: float, tj: float) -> float:
        return rabi_correlator(self.omega, ti, tj)

    def kn(self, n: int, tau: float) -> float:
        return rabi_kn(n, self.omega * tau)


def rabi_correlator(omega: float, ti: float, tj: float) -> float:
    return math.cos(omega * (ti - tj))


def rabi_kn(n: int, omega_tau: float) -> float:
    """``(n-1) cos(w) - cos((n-1) w)`` for equally spaced times."""
    if n < 3:
        raise ValidationError("need n >= 3")
    return (n - 1) * math.cos(omega_tau) - math.cos((n - 1) * omega_tau)


def rabi_correlators(omega: float, times: Sequence[float]) -> lgi.CorrelatorSet:
    times = list(times)
    return lgi.CorrelatorSet.from_function(
        lambda i, j: rabi_correlator(omega, times[i - 1], times[j - 1]), len(times), times
    )


# --- propagation -----------------------------------------------------------

def as_propagator(dynamics) -> Callable[[np.ndarray, float], np.ndarray]:
    """Normalise a dynamics description to ``f(X, dt) -> X(dt)`` on operators.

    Accepts a :class:`RabiQubit`, a Hermitian matrix (Hamiltonian), a
    :class:`Lindbladian`, a :class:`KrausChannel` (applied once per nonzero
    interval), or a callable of that signature.
    """
    if isinstance(dynamics, RabiQubit):
        dynamics = dynamics.hamiltonian
    if isinstance(dynamics, Lindbladian):
        return dynamics.propagate_operator
    if isinstance(dynamics, KrausChannel):
        return lambda x, dt: dynamics.map_operator(x) if dt > 0 else x
    if callable(dynamics):
        return dynamics
    h = qop.as_matrix(dynamics)

    def prop(x, dt):
        if dt == 0:
            return x
        u = qop.unitary(h, dt)
        return u @ x @ u.conj().T

    return prop


def _check_schedule(times: Sequence[float], start: float) -> None:
    prev = start
    for t in times:
        if not math.isfinite(t) or t < prev:
            raise ValidationError("measurement times must be finite and non-decreasing from the start")
        prev = t


def projective_joint(rho0: QuantumState, dynamics, schedule: Sequence, t0: float = 0.0,
                     ) -> JointDistribution:
    """Joint outcome table of sequential projective measurements.

    ``schedule`` is a list of ``(observable, time)`` pairs in time order.
    """
    if not schedule:
        raise ValidationError("empty schedule")
    prop = as_propagator(dynamics)
    _check_schedule([t for _, t in schedule], t0)
    branches = {(): prop(rho0.matrix, schedule[0][1] - t0)}
    for k, (obs, t) in enumerate(schedule):
        nxt = {}
        for hist, x in branches.items():
            for v in measure.VALUES:
                p = obs.projector(v)
                y = p @ x @ p
                if k + 1 < len(schedule):
                    y = prop(y, schedule[k + 1][1] - t)
                nxt[hist + (v,)] = y
        branches = nxt
    table = np.zeros((2,) * len(schedule))
    for hist, x in branches.items():
        idx = tuple(0 if v == 1 else 1 for v in hist)
        table[idx] = max(float(np.real(np.trace(x))), 0.0)
    return JointDistribution(table / table.sum())


def projective_two_point(rho0: QuantumState, dynamics, o_i: DichotomicObservable, t_i: float,
                         o_j: DichotomicObservable, t_j: float, t0: float = 0.0) -> float:
    """``sum Q_i Q_j P(Q_i, Q_j)`` from measuring at ``t_i`` then ``t_j``."""
    if t_j < t_i:
        raise ValidationError("two-point schedule needs t_i <= t_j")
    return lgi.correlator_from_joint(projective_joint(rho0, dynamics, [(o_i, t_i), (o_j, t_j)], t0))


def symmetrized_correlator(rho0: QuantumState, dynamics, o_i: DichotomicObservable, t_i: float,
                           o_j: DichotomicObservable, t_j: float, t0: float = 0.0) -> float:
    """``1/2 <{Q_i, Q_j}>`` in the Heisenberg picture, without collapse."""
    _check_schedule([t_i, t_j], t0)
    prop = as_propagator(dynamics)
    x = prop(rho0.matrix, t_i - t0)
    y = prop(0.5 * qop.anticommutator(o_i.matrix, x), t_j - t_i)
    return qop.expectation(y, o_j.matrix)


def unmeasured_distribution(rho0: QuantumState, dynamics, obs: DichotomicObservable, t: float,
                            t0: float = 0.0) -> np.ndarray:
    """``[P(+1), P(-1)]`` at time ``t`` with no earlier measurement."""
    x = as_propagator(dynamics)(rho0.matrix, t - t0)
    return np.array([max(qop.expectation(x, obs.projector(v)), 0.0) for v in measure.VALUES])


# --- three-point protocol with a Gaussian middle meter ---------------------

def weak_k3_closed_form(omega_tau: float, lam: float) -> float:
    """``2 cos w - cos^2 w + exp(-2 lam) sin^2 w``; ``lam = inf`` is projective."""
    cf = 0.0 if math.isinf(lam) else math.exp(-2.0 * lam)
    c, s = math.cos(omega_tau), math.sin(omega_tau)
    return 2.0 * c - c * c + cf * s * s


@dataclass(frozen=True, eq=False)
class WeakThreePoint:
    k3: float
    correlators: dict
    moments: np.ndarray
    quasi: np.ndarray


def weak_three_point(omega_tau: float, lam: float,
                     nodes: int = measure.DEFAULT_NODES) -> WeakThreePoint:
    """Simulate the protocol: prepare ``Q1=+1``, weak ``Q2`` after ``tau``, projective ``Q3`` after ``2 tau``.

    Returns ``K_3 = C21 + C32 - C31`` from the readout moments, together with
    the Margenau-Hill table of ``(Q3, Q2)`` built on the meter-averaged state
    at the middle time.  The anticommutator with a projector of ``Q2`` only
    sees the diagonal, so this table is what remains of ``P(Q3, q2)`` once the
    meter noise is subtracted.
    """
    if lam < 0:
        raise ValidationError("meter strength must be nonnegative")
    q = RabiQubit(1.0)
    u = qop.unitary(q.hamiltonian, omega_tau)
    rho2 = qop.conjugate(QuantumState.basis(2, 0), u)
    meter = measure.GaussianMeter(lam if lam > 0 else measure.WEAK_LIMIT_STRENGTH, qop.SIGMA_Z)
    mom = measure.three_point_moments(rho2, meter, u, qop.SIGMA_Z, nodes)
    c = measure.correlators_from_moments(mom)
    corr = {"C21": c["Q2"], "C32": c["Q3Q2"], "C31": c["Q3"]}
    rho_avg = measure.gaussian_measure(rho2, meter).averaged_post_state
    quasi = measure.mh_quasiprobability(rho_avg, qop.SIGMA_Z, u, qop.SIGMA_Z)
    return WeakThreePoint(corr["C21"] + corr["C32"] - corr["C31"], corr, mom, quasi)


def weak_three_point_k3(omega_tau: float, lam: float, mode: str = "closed",
                        nodes: int = measure.DEFAULT_NODES) -> float:
    if lam < 0:
        raise ValidationError("meter strength must be nonnegative")
    if mode == "closed":
        return weak_k3_closed_form(omega_tau, lam)
    if mode == "simulate":
        return weak_three_point(omega_tau, lam, nodes).k3
    raise ValidationError(f"unknown mode {mode!r}")


# --- Lindblad dynamics -----------------------------------------------------

def _spre(a):
    return np.kron(a, np.eye(a.shape[0]))


def _spost(a):
    return np.kron(np.eye(a.shape[0]), a.T)


@dataclass(frozen=True, eq=False)
class Lindbladian:
    """``d rho/dt = -i[H, rho] + sum_k r_k (L_k rho L_k^+ - 1/2 {L_k^+ L_k, rho})``.

    ``jumps`` is a sequence of ``(rate, operator)`` pairs.  Superoperators act
    on row-major flattened matrices.
    """

    hamiltonian: np.ndarray
    jumps: tuple = ()

    def __post_init__(self):
        h = qop.as_matrix(self.hamiltonian)
        qop._check_square(h, "Hamiltonian")
        if h.shape[0] > MAX_DIM:
            raise ValidationError(f"Lindblad engine is capped at dimension {MAX_DIM}")
        if not qop.is_hermitian(h):
            raise ValidationError("Hamiltonian must be Hermitian")
        jumps = []
        for rate, op in self.jumps:
            op = qop.as_matrix(op)
            if op.shape != h.shape:
                raise ValidationError("jump operator shape differs from Hamiltonian")
            if not rate >= 0:
                raise ValidationError("jump rates must be nonnegative")
            jumps.append((float(rate), op))
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", tuple(jumps))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def superoperator(self, dressing: dict | None = None) -> np.ndarray:
        """Liouvillian matrix; ``dressing[k]`` multiplies the jump term of channel ``k``."""
        h = self.hamiltonian
        sup = -1j * (_spre(h) - _spost(h))
        for k, (rate, op) in enumerate(self.jumps):
            ld = op.conj().T @ op
            phase = 1.0 if dressing is None else dressing.get(k, 1.0)
            sup = sup + rate * (phase * np.kron(op, op.conj()) - 0.5 * (_spre(ld) + _spost(ld)))
        return sup

    @cached_property
    def _generator(self) -> "_Exponential":
        return _Exponential(self.superoperator())

    def propagate_operator(self, x: np.ndarray, t: float) -> np.ndarray:
        if t < 0:
            raise ValidationError("propagation time must be nonnegative")
        d = self.dim
        return self._generator.apply(np.asarray(x, dtype=complex).reshape(-1), t).reshape(d, d)

    def propagate(self, rho0: QuantumState, t: float) -> QuantumState:
        return QuantumState(qop.symmetrize(self.propagate_operator(rho0.matrix, t), "lindblad"))

    @cached_property
    def _steady(self) -> QuantumState:
        d = self.dim
        sup = self.superoperator()
        _, s, vh = np.linalg.svd(sup)
        scale = max(s[0], 1.0)
        null = np.sum(s < NULL_TOL * scale)
        if null != 1:
            raise SteadyStateError(int(null))
        rho = vh[-1].conj().reshape(d, d)
        rho = rho / np.trace(rho)
        return QuantumState(qop.symmetrize(rho, "steady_state"))

    def steady_state(self) -> QuantumState:
        return self._steady


class _Exponential:
    """``exp(M t)`` by eigendecomposition, with a scaling-and-squaring fallback."""

    def __init__(self, m: np.ndarray):
        self.m = m
        w, v = np.linalg.eig(m)
        self.ok = np.linalg.cond(v) < EIG_COND_MAX
        if self.ok:
            self.w, self.v, self.vinv = w, v, np.linalg.inv(v)

    def apply(self, x: np.ndarray, t: float) -> np.ndarray:
        if t == 0:
            return x.copy()
        if self.ok:
            return self.v @ (np.exp(self.w * t) * (self.vinv @ x))
        return scipy.linalg.expm(self.m * t) @ x


def lindblad_propagate(lind: Lindbladian, rho0: QuantumState, t: float) -> QuantumState:
    return lind.propagate(rho0, t)


def steady_state(lind: Lindbladian) -> QuantumState:
    return lind.steady_state()


def regression_correlator(lind: Lindbladian, a, b, tau: float,
                          rho: QuantumState | None = None) -> float:
    """Stationary ``1/2 <{A(tau), B(0)}>`` by propagating ``1/2 {B, rho_ss}``.

    Pass ``rho`` when the steady state is not unique (no dissipation).
    """
    rho = (lind.steady_state() if rho is None else rho).matrix
    x = 0.5 * qop.anticommutator(qop.as_matrix(b), rho)
    return qop.expectation(lind.propagate_operator(x, tau), a)


def dephased_qubit(omega: float, dephasing: float) -> Lindbladian:
    """Rabi qubit whose coherences decay at total rate ``dephasing``."""
    return Lindbladian(0.5 * omega * qop.SX, ((0.5 * dephasing, qop.SZ),))


# --- continuous weak measurement -------------------------------------------

@dataclass(frozen=True)
class CwmParams:
    """Continuously monitored qubit.

    The total dephasing rate is ``gamma_env + delta_i**2 / (4 s0)``; leave
    ``s0`` infinite to switch the measurement back-action off.
    """

    omega: float
    gamma_env: float = 0.0
    delta_i: float = 1.0
    s0: float = math.inf
    i0: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValidationError("omega must be positive")
        if self.gamma_env < 0 or not self.s0 > 0:
            raise ValidationError("need gamma_env >= 0 and s0 > 0")

    @classmethod
    def with_total_dephasing(cls, omega: float, total: float, delta_i: float = 1.0) -> "CwmParams":
        return cls(omega, gamma_env=total, delta_i=delta_i)

    @property
    def dephasing(self) -> float:
        return self.gamma_env + self.delta_i ** 2 / (4.0 * self.s0)

    @property
    def regime(self) -> str:
        d = self.omega ** 2 - 0.25 * self.dephasing ** 2
        if abs(d) <= 1e-12 * self.omega ** 2:
            return "critical"
        return "underdamped" if d > 0 else "overdamped"

    @property
    def omega_tilde(self) -> float:
        """Damped frequency; imaginary part is returned as a negative number when overdamped."""
        d = self.omega ** 2 - 0.25 * self.dephasing ** 2
        return math.sqrt(d) if d >= 0 else -math.sqrt(-d)


def cwm_normalized(params: CwmParams, tau: float) -> float:
    g = params.dephasing
    env = math.exp(-0.5 * g * tau)
    regime = params.regime
    if regime == "critical":
        return env * (1.0 + 0.5 * g * tau)
    if regime == "underdamped":
        w = params.omega_tilde
        return env * (math.cos(w * tau) + g / (2 * w) * math.sin(w * tau))
    k = -params.omega_tilde
    return env * (math.cosh(k * tau) + g / (2 * k) * math.sinh(k * tau))


def cwm_correlator(params: CwmParams, tau: float) -> float:
    """Symmetrized detector-current correlator (offset removed)."""
    if tau < 0:
        raise ValidationError("tau must be nonnegative")
    return (0.5 * params.delta_i) ** 2 * cwm_normalized(params, tau)


def flg_cwm(params: CwmParams, tau: float, tol: float = lgi.REPORT_TOL) -> lgi.InequalityReport:
    """``2 C_I(tau) - C_I(2 tau) <= (Delta I / 2)^2``."""
    scale = (0.5 * params.delta_i) ** 2
    value = 2.0 * cwm_correlator(params, tau) - cwm_correlator(params, 2.0 * tau)
    return lgi.make_report("f_LG", value, -math.inf, scale, tol,
                           normalized=value / scale, regime=params.regime)


# --- counting statistics ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class CountingKernel:
    """Lindbladian whose counted jump channels carry ``exp(i chi)``."""

    base: Lindbladian
    counted: tuple
    chi: float = 0.0

    def __post_init__(self):
        counted = tuple(int(k) for k in self.counted)
        if any(k < 0 or k >= len(self.base.jumps) for k in counted):
            raise ValidationError("counted channel index out of range")
        object.__setattr__(self, "counted", counted)

    def at(self, chi: float) -> "CountingKernel":
        return CountingKernel(self.base, self.counted, chi)

    def superoperator(self) -> np.ndarray:
        phase = complex(np.exp(1j * self.chi))
        return self.base.superoperator({k: phase for k in self.counted})

    @cached_property
    def _generator(self) -> _Exponential:
        return _Exponential(self.superoperator())


def counting_mgf(kernel: CountingKernel, t: float, rho: QuantumState | None = None) -> complex:
    """``Tr[exp(L(chi) t) rho]`` with ``rho`` the steady state by default."""
    if t < 0:
        raise ValidationError("t must be nonnegative")
    r = kernel.base.steady_state() if rho is None else rho
    d = kernel.base.dim
    y = kernel._generator.apply(r.matrix.reshape(-1), t).reshape(d, d)
    return complex(np.trace(y))


def fcs_L(kernel: CountingKernel, t10: float, t21: float) -> complex:
    """``G(t1 - t0) + G(t2 - t1) - G(t2 - t0)`` in the stationary state."""
    return counting_mgf(kernel, t10) + counting_mgf(kernel, t21) - counting_mgf(kernel, t10 + t21)


PARITY_CHI = math.pi


def fcs_report(chi: float, value: complex, tol: float = 1e-12) -> list:
    """Reports on ``Re L`` and ``Im L``; bounds exist only at ``chi = pi``."""
    value = complex(value)
    if abs(abs(chi) - PARITY_CHI) <= 1e-12:
        return [
            lgi.make_report("Re L", value.real, -3.0, 1.0, tol, chi=chi, bounds_available=True),
            lgi.make_report("Im L", value.imag, 0.0, 0.0, tol, chi=chi, bounds_available=True),
        ]
    return [
        lgi.make_report("Re L", value.real, math.nan, math.nan, tol, chi=chi, bounds_available=False),
        lgi.make_report("Im L", value.imag, math.nan, math.nan, tol, chi=chi, bounds_available=False),
    ]


# --- charge inequality -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChargeObservable:
    """Diagonal nonnegative charge ``Q'`` over the model's basis states."""

    weights: tuple
    qmax: float | None = None

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not w or min(w) < 0:
            raise ValidationError("charge weights must be nonnegative")
        qmax = max(w) if self.qmax is None else float(self.qmax)
        if max(w) > qmax + 1e-12 or abs(max(w) - qmax) > 1e-12:
            raise ValidationError("some state must attain Q'_max and none may exceed it")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "qmax", qmax)

    @property
    def operator(self) -> np.ndarray:
        return np.diag(np.array(self.weights, dtype=complex))


def charge_lgi(lind: Lindbladian, charge: ChargeObservable, t: float,
               tol: float = lgi.REPORT_TOL) -> lgi.InequalityReport:
    """``2 <Q'(t) Q'> - <Q'(2t) Q'> <= Q'_max <Q'>`` in the steady state."""
    q = charge.operator
    if q.shape[0] != lind.dim:
        raise ValidationError("charge observable dimension differs from the model")
    lhs = 2.0 * regression_correlator(lind, q, q, t) - regression_correlator(lind, q, q, 2.0 * t)
    rhs = charge.qmax * lind.steady_state().expect(q)
    return lgi.make_report("charge LGI", lhs, -math.inf, rhs, tol, t=t)


@dataclass(frozen=True)
class DoubleDot:
    """Serial double dot in the large-bias, single-electron regime.

    Basis ``|0>`` (empty), ``|L>``, ``|R>``.  Electrons tunnel in from the left
    lead at ``gamma_l``, out to the right at ``gamma_r``, hop coherently with
    amplitude ``coupling`` and see a level detuning ``detuning``.
    """

    coupling: float = 1.0
    gamma_l: float = 1.0
    gamma_r: float = 1.0
    detuning: float = 0.0
    dephasing: float = 0.0

    def lindbladian(self) -> Lindbladian:
        e0, el, er = np.eye(3)
        h = 0.5 * self.detuning * (np.outer(el, el) - np.outer(er, er))
        h = h + self.coupling * (np.outer(el, er) + np.outer(er, el))
        jumps = [(self.gamma_l, np.outer(el, e0)), (self.gamma_r, np.outer(e0, er))]
        if self.dephasing > 0:
            jumps.append((self.dephasing, np.outer(el, el) - np.outer(er, er)))
        return Lindbladian(h.astype(complex), tuple(jumps))

    def counting_kernel(self, chi: float = 0.0) -> CountingKernel:
        """Counts electrons leaving to the right lead."""
        return CountingKernel(self.lindbladian(), (1,), chi)

    @staticmethod
    def charge(which: str = "L") -> ChargeObservable:
        w = {"L": (0, 1, 0), "R": (0, 0, 1), "N": (0, 1, 1)}[which]
        return ChargeObservable(w)
