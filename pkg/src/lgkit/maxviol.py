"""Maximal quantum violations over measurement settings.

The optimiser is a multistart coordinate ascent: each coordinate is
maximised in turn with a bounded scalar search over one period, and sweeps
repeat until the value stops moving.  A value-based search cannot place a
maximum closer than about the square root of machine precision, so the
best start is then polished with a few Newton steps on finite-difference
derivatives.  The central-difference gradient decides whether the end
point counts as converged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from . import lgi, qop
from .errors import ValidationError
from .macroreal import make_rng

GRAD_TOL = 1e-8
FD_STEP = 1e-5
N_STARTS = 16


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    value: float
    angles: np.ndarray
    iterations: int
    converged: bool
    starts: int
    grad_norm: float


def fd_gradient(f: Callable, x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    g = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _ascend(f, x, max_sweeps, xatol):
    fx = f(x)
    for sweep in range(1, max_sweeps + 1):
        prev = fx
        for k in range(x.size):
            def neg(t, k=k):
                y = x.copy()
                y[k] = t
                return -f(y)
            # one full period centred on the current value
            r = optimize.minimize_scalar(neg, bounds=(x[k] - math.pi, x[k] + math.pi),
                                         method="bounded", options={"xatol": xatol})
            if -r.fun >= fx:
                x[k], fx = r.x, -r.fun
        if fx - prev <= 1e-13 * max(1.0, abs(fx)):
            return x, fx, sweep
    return x, fx, max_sweeps


def fd_hessian(f: Callable, x: np.ndarray, h: float = 1e-4) -> np.ndarray:
    cols = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        cols.append((fd_gradient(f, x + e) - fd_gradient(f, x - e)) / (2 * h))
    hess = np.array(cols)
    return 0.5 * (hess + hess.T)


def _polish(f, x, grad_tol, max_steps=20):
    # Newton steps; the pseudo-inverse ignores flat directions such as
    # global rotations of all measurement axes
    g = fd_gradient(f, x)
    gn = float(np.linalg.norm(g))
    steps = 0
    while gn >= 0.01 * grad_tol and steps < max_steps:
        steps += 1
        step = -np.linalg.pinv(fd_hessian(f, x), rcond=1e-6) @ g
        y = x + step
        if f(y) < f(x) - 1e-14:
            break
        g_new = fd_gradient(f, y)
        if np.linalg.norm(g_new) >= gn:
            break
        x, g, gn = y, g_new, float(np.linalg.norm(g_new))
    return x, gn, steps


def coordinate_ascent(f: Callable, dim: int, starts: int = N_STARTS, seed: int = 0,
                      max_sweeps: int = 2000, xatol: float = 1e-12,
                      grad_tol: float = GRAD_TOL) -> OptimizationResult:
    """Maximise ``f`` over angle vectors of length ``dim`` from random starts."""
    best = None
    total = 0
    for s in range(starts):
        x0 = make_rng(seed, s).uniform(-math.pi, math.pi, size=dim)
        x, fx, it = _ascend(f, x0, max_sweeps, xatol)
        total += it
        if best is None or fx > best[1]:
            best = (x, fx)
    x, gn, it = _polish(f, best[0], grad_tol)
    total += it
    fx = f(x)
    return OptimizationResult(float(fx), np.mod(x + math.pi, 2 * math.pi) - math.pi, total,
                              gn < grad_tol, starts, gn)


# --- K_n over coplanar settings ---------------------------------------------

def kn_objective(angles) -> float:
    """``sum cos(theta_m) - cos(sum theta_m)``: the string for coplanar axes."""
    a = np.asarray(angles, dtype=float)
    return float(np.sum(np.cos(a)) - math.cos(float(np.sum(a))))


def kn_ceiling(n: int) -> float:
    return n * math.cos(math.pi / n)


def maximize_kn(n: int, starts: int = N_STARTS, seed: int = 0) -> OptimizationResult:
    """Largest two-time ``K_n`` of a qubit over successive in-plane rotation angles.

    Only the dot products between measurement axes enter, so the search runs
    over the ``n - 1`` angles between consecutive coplanar axes.  Angles are
    reported with positive mean (the mirror image is equally optimal).
    """
    if not 3 <= n <= 12:
        raise ValidationError("maximize_kn supports 3 <= n <= 12")
    res = coordinate_ascent(kn_objective, n - 1, starts, seed)
    ang = res.angles if np.mean(res.angles) >= 0 else -res.angles
    return OptimizationResult(res.value, ang, res.iterations, res.converged, res.starts,
                              res.grad_norm)


# --- depolarizing channel -------------------------------------------------

def max_k3_depolarized(c: float) -> float:
    """Piecewise ceiling of ``K_3`` when each step contracts the Bloch vector by ``c``."""
    if not -1.0 <= c <= 1.0:
        raise ValidationError("contraction must lie in [-1, 1]")
    a = abs(c)
    return a * (1.0 - a) if a <= 0.5 else 0.5 + c * c


def _unit(polar, azimuth):
    return qop.axis_from_angles(polar, azimuth)


def _bloch(polar, azimuth):
    s = math.sin(polar)
    return np.array([s * math.cos(azimuth), s * math.sin(azimuth), math.cos(polar)])


def depolarized_k3(c: float, params, r0=(0.0, 0.0, 0.0)) -> float:
    """Two-point ``K_3`` for axes given by ``params = (polar, azimuth) * 3``.

    Each correlator is built by collapsing onto an eigenvector of the first
    observable, contracting the post-measurement Bloch vector once per
    elapsed step and reading the second observable.  ``r0`` is the Bloch
    vector at the first measurement time; the initial state itself is left
    untouched by the channel.
    """
    axes = [_bloch(params[2 * k], params[2 * k + 1]) for k in range(3)]
    r0 = np.asarray(r0, dtype=float)

    def corr(i, j):
        r_i = r0
        for _ in range(i):
            r_i = qop.depolarize_bloch(r_i, c)
        total = 0.0
        for v in (1, -1):
            p = 0.5 * (1.0 + v * float(axes[i] @ r_i))
            r = v * axes[i]
            for _ in range(j - i):
                r = qop.depolarize_bloch(r, c)
            total += v * p * float(r @ axes[j])
        return total

    return corr(0, 1) + corr(1, 2) - corr(0, 2)


def max_k3_depolarized_numeric(c: float, starts: int = N_STARTS, seed: int = 0) -> OptimizationResult:
    if not -1.0 <= c <= 1.0:
        raise ValidationError("contraction must lie in [-1, 1]")
    return coordinate_ascent(lambda p: depolarized_k3(c, p), 6, starts, seed, max_sweeps=400)


def depolarizing_threshold(xtol: float = 1e-14) -> float:
    """Smallest ``c`` in the upper branch at which the ceiling reaches 1."""
    return float(optimize.bisect(lambda c: max_k3_depolarized(c) - 1.0, 0.5 + 1e-15, 1.0,
                                 xtol=xtol))


# --- commutators ------------------------------------------------------------

def _in_plane(theta: float) -> np.ndarray:
    return qop.observable_from_axis((math.sin(theta), 0.0, math.cos(theta))).matrix


def commutator_diagnostic(theta: float) -> dict:
    """Operator norms of the pairwise commutators for axes at ``0, theta, 2 theta``."""
    q1, q2, q3 = _in_plane(0.0), _in_plane(theta), _in_plane(2 * theta)
    nrm = lambda a, b: float(np.linalg.norm(qop.commutator(a, b), 2))  # noqa: E731
    out = {"[Q2,Q1]": nrm(q2, q1), "[Q3,Q2]": nrm(q3, q2), "[Q3,Q1]": nrm(q3, q1)}
    out["total"] = sum(out.values())
    return out


def commutator_argmax() -> float:
    r = optimize.minimize_scalar(lambda t: -commutator_diagnostic(t)["total"], bounds=(1e-6, math.pi / 2),
                                 method="bounded", options={"xatol": 1e-12})
    return float(r.x)


# --- temporal CHSH -----------------------------------------------------------

def chsh_objective(angles) -> float:
    a1, a2, b1, b2 = angles
    c = lambda x, y: math.cos(x - y)  # noqa: E731
    return c(b1, a1) + c(b1, a2) + c(b2, a1) - c(b2, a2)


def maximize_temporal_chsh(starts: int = N_STARTS, seed: int = 0) -> OptimizationResult:
    """Largest CHSH combination for projective qubit measurements at two times."""
    return coordinate_ascent(chsh_objective, 4, starts, seed)


# --- temporal Hardy ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HardySettings:
    state: np.ndarray
    first: tuple
    second: tuple
    probabilities: tuple
    check: lgi.HardyCheck


def _hardy_axes(p):
    return _unit(p[0], p[1]), [_unit(p[2], p[3]), _unit(p[4], p[5])], [_unit(p[6], p[7]), _unit(p[8], p[9])]


def _overlap(x, y):
    # |<x|y>|^2 for qubit eigenvectors with Bloch vectors x and y
    return 0.5 * (1.0 + float(x @ y))


def hardy_probabilities(psi, a, b) -> tuple:
    """``P(+,+|1,1), P(-,+|1,2), P(+,-|2,1), P(+,+|2,2)`` for a first measurement of ``a_k`` then ``b_l``."""
    def p(r, s, k, l):
        return _overlap(r * a[k], psi) * _overlap(s * b[l], r * a[k])
    return (p(1, 1, 0, 0), p(-1, 1, 0, 1), p(1, -1, 1, 0), p(1, 1, 1, 1))


def _zero_residuals(psi, a, b):
    """Make each vanishing probability exactly zero through its smaller factor."""
    choices = [((1 * a[0], psi), (1 * b[0], 1 * a[0])),
               ((-1 * a[0], psi), (1 * b[1], -1 * a[0])),
               ((1 * a[1], psi), (-1 * b[0], 1 * a[1]))]
    res = []
    for f1, f2 in choices:
        x, y = min((f1, f2), key=lambda f: _overlap(*f))
        res.extend(x + y)
    return res


def hardy_search(starts: int = N_STARTS, seed: int = 0, penalty: float = 5.0) -> HardySettings:
    """Numerical search for qubit settings that produce the temporal Hardy paradox.

    A penalised ascent locates a basin where the first three probabilities
    nearly vanish; each of them is then driven to zero through whichever
    overlap factor is already small (antiparallel Bloch vectors).
    """
    def f(p):
        probs = hardy_probabilities(*_hardy_axes(p))
        return probs[3] - penalty * sum(probs[:3])

    rough = coordinate_ascent(f, 10, starts, seed, max_sweeps=300)
    polish = optimize.least_squares(lambda p: _zero_residuals(*_hardy_axes(p)), rough.angles,
                                    xtol=1e-15, ftol=1e-15, gtol=1e-15)
    psi, a, b = _hardy_axes(polish.x)
    probs = hardy_probabilities(psi, a, b)
    return HardySettings(psi, tuple(a), tuple(b), probs, lgi.hardy(*probs, tol=1e-10))
