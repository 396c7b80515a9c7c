"""Dual SVM solver (SMO, maximal violating pair), bias recovery and prediction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .dataset import Dataset
from .errors import DomainError
from .kernels import FeatureMask, KernelSpec, QMatrix, build_q, cross_kernel

TAU = 1e-12


@dataclass(frozen=True)
class DualSolution:
    alpha: np.ndarray
    bias: float
    objective: float
    kkt_violation: float
    iterations: int
    converged: bool
    objective_trace: np.ndarray | None = None


@njit(cache=True, nogil=True)
def _select_pair(alpha, grad, y, C):
    # returns (i, j, m_up, m_low); i = -1 when I_up or I_low is empty
    i = -1
    j = -1
    g_max = -np.inf
    g_min = np.inf
    for t in range(alpha.size):
        v = -y[t] * grad[t]
        if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
            if v > g_max:
                g_max = v
                i = t
        if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
            if v < g_min:
                g_min = v
                j = t
    return i, j, g_max, g_min


@njit(cache=True, nogil=True)
def _smo_loop(q, y, C, tol, max_iter, alpha, grad, trace):
    track = trace.size > 0
    obj = 0.0
    it = 0
    while it < max_iter:
        i, j, g_max, g_min = _select_pair(alpha, grad, y, C)
        if i < 0 or j < 0 or g_max - g_min <= tol:
            return it, True
        b = y[i] * grad[i] - y[j] * grad[j]
        a = q[i, i] + q[j, j] - 2.0 * y[i] * y[j] * q[i, j]
        if a <= 0.0:
            a = TAU
        step = -b / a
        # feasible step limits along alpha_i += y_i t, alpha_j -= y_j t
        lim_i = C - alpha[i] if y[i] > 0 else alpha[i]
        lim_j = alpha[j] if y[j] > 0 else C - alpha[j]
        hit_i = False
        hit_j = False
        if lim_i <= step and lim_i <= lim_j:
            step = lim_i
            hit_i = True
        elif lim_j <= step:
            step = lim_j
            hit_j = True
        di = y[i] * step
        dj = -y[j] * step
        if hit_i:
            alpha[i] = C if y[i] > 0 else 0.0
        else:
            alpha[i] = min(max(alpha[i] + di, 0.0), C)
        if hit_j:
            alpha[j] = 0.0 if y[j] > 0 else C
        else:
            alpha[j] = min(max(alpha[j] + dj, 0.0), C)
        for t in range(alpha.size):
            grad[t] += q[t, i] * di + q[t, j] * dj
        if track:
            obj += step * b + 0.5 * step * step * a
            trace[it] = obj
        it += 1
    i, j, g_max, g_min = _select_pair(alpha, grad, y, C)
    return it, (i < 0 or j < 0 or g_max - g_min <= tol)


def kkt_gap(alpha: np.ndarray, grad: np.ndarray, y: np.ndarray, C: float) -> tuple[float, float, float]:
    """(violation, m_up, m_low) for the maximal violating pair."""
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    v = -y * grad
    m_up = float(v[up].max()) if up.any() else -np.inf
    m_low = float(v[low].min()) if low.any() else np.inf
    if not (up.any() and low.any()):
        return 0.0, m_up, m_low
    return max(0.0, m_up - m_low), m_up, m_low


def solve_dual(q: QMatrix | np.ndarray, labels, C: float, tol: float = 1e-6,
               max_iter: int = 1_000_000, track_objective: bool = False) -> DualSolution:
    """Minimize 0.5 a'Qa - 1'a subject to y'a = 0, 0 <= a <= C.

    Hitting ``max_iter`` is not an error: the last iterate comes back with
    ``converged=False``.
    """
    qm = np.ascontiguousarray(q.entries if isinstance(q, QMatrix) else q, dtype=float)
    y = np.ascontiguousarray(labels, dtype=float)
    m = y.size
    if qm.shape != (m, m):
        raise DomainError(f"Q has shape {qm.shape}, expected ({m}, {m})")
    if not np.all(np.isfinite(qm)):
        raise DomainError("Q contains non-finite entries")
    if C < 0:
        raise DomainError(f"C must be nonnegative, got {C}")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    alpha = np.zeros(m)
    grad = -np.ones(m)
    trace = np.empty(max_iter if track_objective else 0)
    iters, converged = _smo_loop(qm, y, float(C), float(tol), int(max_iter), alpha, grad, trace)
    grad = qm @ alpha - 1.0
    gap, _, _ = kkt_gap(alpha, grad, y, C)
    objective = float(0.5 * alpha @ (qm @ alpha) - alpha.sum())
    sol = DualSolution(alpha, 0.0, objective, gap, int(iters), bool(converged),
                       trace[:iters].copy() if track_objective else None)
    return _with_bias(sol, qm, y, C)


def _with_bias(sol: DualSolution, qm, y, C) -> DualSolution:
    b = compute_bias(sol, qm, y, C)
    return DualSolution(sol.alpha, b, sol.objective, sol.kkt_violation, sol.iterations,
                        sol.converged, sol.objective_trace)


def compute_bias(sol: DualSolution, q, labels, C: float) -> float:
    """Average of y_i - sum_h a_h y_h k_hi over free vectors, else the feasible-interval midpoint."""
    qm = q.entries if isinstance(q, QMatrix) else np.asarray(q)
    y = np.asarray(labels, dtype=float)
    a = sol.alpha
    grad = qm @ a - 1.0
    v = -y * grad  # equals y_i - sum_h a_h y_h k(x_h, x_i)
    eps = 1e-12 * max(C, 1.0)
    free = (a > eps) & (a < C - eps)
    if free.any():
        return float(v[free].mean())
    _, m_up, m_low = kkt_gap(a, grad, y, C)
    if np.isfinite(m_up) and np.isfinite(m_low):
        return 0.5 * (m_up + m_low)
    if np.isfinite(m_up):
        return m_up
    if np.isfinite(m_low):
        return m_low
    return 0.0


def kkt_certificate(sol: DualSolution, q, labels, C: float) -> float:
    """Largest KKT residual of (alpha, bias), each scaled by 1 + |g_i|.

    With g = Qa - 1 and r = g + y*b: r_i >= 0 at a_i = 0, r_i <= 0 at a_i = C,
    r_i = 0 in between. A converged solve certifies at its own ``tol``.
    """
    qm = q.entries if isinstance(q, QMatrix) else np.asarray(q)
    y = np.asarray(labels, dtype=float)
    a = sol.alpha
    g = qm @ a - 1.0
    r = g + y * sol.bias  # reduced gradient of the Lagrangian
    scale = 1.0 + np.abs(g)
    at_lo = a <= 0.0
    at_hi = a >= C
    free = ~(at_lo | at_hi)
    worst = 0.0
    if at_lo.any():
        worst = max(worst, float(np.max(-r[at_lo] / scale[at_lo])))
    if at_hi.any():
        worst = max(worst, float(np.max(r[at_hi] / scale[at_hi])))
    if free.any():
        worst = max(worst, float(np.max(np.abs(r[free]) / scale[free])))
    return worst


@dataclass(frozen=True)
class SvmModel:
    support_index: np.ndarray
    support_coef: np.ndarray  # alpha_i * y_i
    bias: float
    mask: FeatureMask
    spec: KernelSpec
    support_rows: np.ndarray

    @classmethod
    def from_solution(cls, d: Dataset, spec: KernelSpec, mask: FeatureMask, sol: DualSolution,
                      C: float) -> "SvmModel":
        keep = np.flatnonzero(sol.alpha > 1e-8 * C)
        return cls(keep, sol.alpha[keep] * d.labels[keep], sol.bias, mask, spec,
                   d.features[keep].copy())

    def decision_function(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.mask.n:
            raise DomainError(f"expected {self.mask.n} features, got {x.shape[1]}")
        if self.support_index.size == 0:
            return np.full(x.shape[0], self.bias)
        k = cross_kernel(x, self.support_rows, self.spec, self.mask.support)
        return k @ self.support_coef + self.bias

    def predict(self, x) -> np.ndarray:
        return np.where(self.decision_function(x) >= 0.0, 1, -1)


def predict(model: SvmModel, x) -> int:
    return int(model.predict(np.asarray(x, dtype=float).reshape(1, -1))[0])


def train(d: Dataset, spec: KernelSpec, mask: FeatureMask, C: float, tol: float = 1e-6,
          max_iter: int = 1_000_000) -> SvmModel:
    q = build_q(d, spec, mask)
    return SvmModel.from_solution(d, spec, mask, solve_dual(q, d.labels, C, tol, max_iter), C)
