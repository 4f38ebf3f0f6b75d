"""Minimize nu^T Sigma nu over the probability simplex, with certificates.

The minimizing measure of the covariance double integral on a grid solves a
convex QP over the simplex. Two routes:

* theta fast path: theta = Sigma^{-1} 1. When theta >= 0 the normalized theta
  is optimal and sigma*^2 = 1 / sum(theta). This covers every full-support
  kernel here (Ornstein-Uhlenbeck, power-exponential, modulated Brownian).
* Frank-Wolfe with away steps, followed by an active-set polish that solves
  the restricted theta system on the detected support.

Optimality is certified through the mean vector m = Sigma nu: feasibility
requires min_j m_j >= sigma*^2 with equality on the support.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .exceptions import NotPositiveSemidefiniteError, OptimizerError
from .grids import MAX_LEVEL, DyadicGrid, Grid, PointGrid
from .kernels import ExplicitGram, Kernel
from .measure import GridMeasure

SUPPORT_TOL = 1e-9          # relative weight below which a point is off-support
FW_BUDGET = 100_000         # iteration cap for the Frank-Wolfe fallback
DEFAULT_SOLVE_TOL = 1e-9    # relative duality-gap target
REFRESH_EVERY = 512         # recompute m, E from scratch to cancel drift


# ---------------------------------------------------------------------------
# result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimalSolution:
    """Optimal grid measure with its certificate.

    Invariants: min_j m_j >= sigma_star_sq * (1 - 1e-8); |m_j - sigma_star_sq|
    <= 1e-8 * sigma_star_sq for j in support; sigma_star_sq = nu^T Sigma nu
    within 1e-12 relative.
    """

    measure: GridMeasure
    sigma_star_sq: float
    certificate: np.ndarray          # m_j = (Sigma nu)_j
    support: np.ndarray              # indices with weight > SUPPORT_TOL (relative)
    theta: np.ndarray | None = None  # Sigma^{-1} 1 when the fast path ran
    method: str = "theta"
    iterations: int = 0
    gap: float = 0.0

    def __post_init__(self):
        for name in ("certificate", "support", "theta"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.asarray(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class RefinementEntry:
    k: int
    sigma_star_sq: float
    measure: GridMeasure
    wall_time: float


@dataclass(frozen=True)
class RefinementTrace:
    """Solutions over increasing dyadic levels; sigma*^2_k is nonincreasing."""

    entries: tuple[RefinementEntry, ...]
    converged: bool
    final_gap: float

    def __post_init__(self):
        vals = self.sigma_values
        if np.any(np.diff(vals) > 1e-10):
            raise OptimizerError(f"refinement values not nonincreasing: {vals}")

    @property
    def sigma_values(self) -> np.ndarray:
        return np.array([e.sigma_star_sq for e in self.entries])

    @property
    def final(self) -> RefinementEntry:
        return self.entries[-1]


# ---------------------------------------------------------------------------
# input checks
# ---------------------------------------------------------------------------


def _check_square_symmetric(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] < 1:
        raise NotPositiveSemidefiniteError(f"need a square matrix, got shape {sigma.shape}")
    scale = max(float(np.abs(sigma).max()), 1.0)
    if np.abs(sigma - sigma.T).max() > 1e-10 * scale:
        raise NotPositiveSemidefiniteError("matrix is not symmetric")
    d = np.diag(sigma)
    if np.any(d < -1e-12 * scale):
        raise NotPositiveSemidefiniteError("negative diagonal entry")
    # Cauchy-Schwarz necessary condition, cheap O(n^2) screen
    bound = np.sqrt(np.outer(np.maximum(d, 0), np.maximum(d, 0)))
    if np.any(np.abs(sigma) > bound + 1e-8 * scale):
        raise NotPositiveSemidefiniteError("off-diagonal entry violates Cauchy-Schwarz")
    return 0.5 * (sigma + sigma.T)


def _psd_by_cholesky(sigma: np.ndarray) -> None:
    n = sigma.shape[0]
    jitter = 1e-10 * max(float(np.diag(sigma).max()), 1.0)
    try:
        np.linalg.cholesky(sigma + jitter * np.eye(n))
    except np.linalg.LinAlgError:
        raise NotPositiveSemidefiniteError(
            "matrix is not positive semidefinite within tolerance") from None


# ---------------------------------------------------------------------------
# theta fast path
# ---------------------------------------------------------------------------


def solve_theta(sigma: np.ndarray) -> tuple[np.ndarray, float] | None:
    """Fast path: theta = Sigma^{-1} 1; valid when theta is nonnegative.

    Returns ``(weights, sigma_star_sq)`` with weights = theta / sum(theta) and
    sigma_star_sq = 1 / sum(theta), or None when theta has a genuinely
    negative component or the factorization fails (caller falls back to the
    general solver). The negativity threshold is relative to max|theta| so the
    outcome is invariant under rescaling Sigma.
    """
    sigma = _check_square_symmetric(sigma)
    try:
        factor = cho_factor(sigma, lower=True, check_finite=False)
    except LinAlgError:
        return None
    theta = cho_solve(factor, np.ones(sigma.shape[0]), check_finite=False)
    floor = -1e-12 * float(np.abs(theta).max())
    if np.any(theta < floor):
        return None
    total = float(theta.sum())
    if total <= 0:
        return None
    weights = np.clip(theta, 0.0, None)
    weights /= weights.sum()
    return weights, 1.0 / total


# ---------------------------------------------------------------------------
# Frank-Wolfe with away steps
# ---------------------------------------------------------------------------


def _frank_wolfe(sigma: np.ndarray, tol: float, budget: int) -> tuple[np.ndarray, int]:
    """Minimize w^T Sigma w on the simplex; returns (weights, iterations)."""
    n = sigma.shape[0]
    start = int(np.argmin(np.diag(sigma)))  # best single vertex
    w = np.zeros(n)
    w[start] = 1.0
    m = sigma[:, start].copy()
    energy = float(sigma[start, start])
    iters = 0
    for iters in range(1, budget + 1):
        if iters % REFRESH_EVERY == 0:
            w /= w.sum()
            m = sigma @ w
            energy = float(w @ m)
        s = int(np.argmin(m))
        gap_fw = energy - m[s]
        if gap_fw <= tol * max(energy, 1e-300):
            break
        onsup = w > 0
        masked = np.where(onsup, m, -np.inf)
        v = int(np.argmax(masked))
        gap_away = m[v] - energy
        if gap_fw >= gap_away:
            # toward vertex s: w' = (1-g) w + g e_s
            curv = sigma[s, s] - 2.0 * m[s] + energy
            g = 1.0 if curv <= 0 else min(1.0, gap_fw / curv)
            energy = (1 - g) ** 2 * energy + 2 * g * (1 - g) * m[s] + g * g * sigma[s, s]
            m = (1 - g) * m + g * sigma[:, s]
            w *= 1 - g
            w[s] += g
        else:
            # away from vertex v: w' = (1+g) w - g e_v
            if w[v] >= 1.0:
                break  # single-vertex iterate cannot move away
            g_max = w[v] / (1.0 - w[v])
            curv = energy - 2.0 * m[v] + sigma[v, v]
            g = g_max if curv <= 0 else min(g_max, gap_away / curv)
            energy = (1 + g) ** 2 * energy - 2 * g * (1 + g) * m[v] + g * g * sigma[v, v]
            m = (1 + g) * m - g * sigma[:, v]
            w *= 1 + g
            if g >= g_max:
                w[v] = 0.0  # drop step removes the vertex exactly
            else:
                w[v] -= g
        np.clip(w, 0.0, None, out=w)
    return w / w.sum(), iters


def _polish(sigma: np.ndarray, support: np.ndarray,
            max_rounds: int = 60) -> tuple[np.ndarray, np.ndarray, float] | None:
    """Active-set refinement: exact restricted theta solve on the support.

    Drops indices whose restricted theta is negative, adds off-support indices
    whose mean value dips below sigma*^2. Returns (weights, m, sigma_sq) with
    machine-precision equality on the support, or None when no consistent
    active set is found.
    """
    n = sigma.shape[0]
    active = sorted(set(int(i) for i in support))
    for _ in range(max_rounds):
        if not active:
            return None
        sub = sigma[np.ix_(active, active)]
        try:
            theta = cho_solve(cho_factor(sub, lower=True, check_finite=False),
                              np.ones(len(active)), check_finite=False)
        except LinAlgError:
            theta, *_ = np.linalg.lstsq(sub, np.ones(len(active)), rcond=None)
        if np.min(theta) < -1e-12 * max(np.abs(theta).max(), 1e-300):
            del active[int(np.argmin(theta))]
            continue
        total = float(theta.sum())
        if total <= 0:
            return None
        w = np.zeros(n)
        w[active] = np.clip(theta, 0.0, None) / np.clip(theta, 0.0, None).sum()
        m = sigma @ w
        sigma_sq = 1.0 / total
        slack = m - sigma_sq
        worst = int(np.argmin(slack))
        if slack[worst] < -1e-11 * sigma_sq and worst not in active:
            active = sorted(active + [worst])
            continue
        return w, m, sigma_sq
    return None


def solve_simplex_qp(sigma: np.ndarray, tol: float = DEFAULT_SOLVE_TOL,
                     grid: Grid | None = None, budget: int = FW_BUDGET) -> OptimalSolution:
    """Solve min w^T Sigma w over the probability simplex with a certificate.

    Attempts the theta fast path first; otherwise runs Frank-Wolfe with away
    steps to a relative duality gap of ``tol``, then polishes the active set.
    ``grid`` labels the result's measure; index positions are used when absent.
    """
    sigma = _check_square_symmetric(sigma)
    n = sigma.shape[0]
    if grid is None:
        grid = PointGrid(np.arange(n, dtype=float))
    elif grid.points.size != n:
        raise OptimizerError(f"grid has {grid.points.size} points for a {n}x{n} matrix")

    fast = solve_theta(sigma)
    if fast is not None:
        w, _ = fast
        theta = None
        try:
            theta = cho_solve(cho_factor(sigma, lower=True, check_finite=False),
                              np.ones(n), check_finite=False)
        except LinAlgError:
            pass
        m = sigma @ w
        sigma_sq = float(w @ m)
        return _finish(grid, w, m, sigma_sq, theta, "theta", 0, tol)

    _psd_by_cholesky(sigma)
    w, iters = _frank_wolfe(sigma, tol, budget)
    support = np.nonzero(w > SUPPORT_TOL * w.max())[0]
    polished = _polish(sigma, support)
    if polished is not None:
        w, m, sigma_sq = polished
        return _finish(grid, w, m, sigma_sq, None, "frank_wolfe", iters, tol)
    m = sigma @ w
    sigma_sq = float(w @ m)
    gap = sigma_sq - float(m.min())
    if gap > tol * sigma_sq:
        raise OptimizerError(
            f"no certificate within budget: best sigma*^2 {sigma_sq:.12g}, "
            f"duality gap {gap:.3e} after {iters} iterations")
    return _finish(grid, w, m, sigma_sq, None, "frank_wolfe", iters, tol)


def _finish(grid: Grid, w: np.ndarray, m: np.ndarray, sigma_sq: float,
            theta: np.ndarray | None, method: str, iters: int, tol: float) -> OptimalSolution:
    measure = GridMeasure(grid, w / w.sum())
    support = np.nonzero(measure.weights > SUPPORT_TOL * measure.weights.max())[0]
    gap = max(sigma_sq - float(m.min()), 0.0)
    support_dev = float(np.abs(m[support] - sigma_sq).max())
    if gap > 1e-8 * sigma_sq or support_dev > 1e-8 * sigma_sq:
        raise OptimizerError(
            f"certificate violated: gap {gap:.3e}, support deviation {support_dev:.3e} "
            f"for sigma*^2 {sigma_sq:.12g}")
    return OptimalSolution(measure=measure, sigma_star_sq=sigma_sq, certificate=m,
                           support=support, theta=theta, method=method,
                           iterations=iters, gap=gap)


# ---------------------------------------------------------------------------
# certification and refinement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CertificateReport:
    """Optimality check of a candidate measure against a Gram matrix."""

    m: np.ndarray
    sigma_sq: float
    min_slack: float               # min_j m_j - sigma_sq (>= 0 at optimum)
    max_support_violation: float   # max |m_j - sigma_sq| over the support
    passed: bool

    def __post_init__(self):
        arr = np.asarray(self.m)
        arr.setflags(write=False)
        object.__setattr__(self, "m", arr)


def certify(sigma: np.ndarray, measure: GridMeasure, tol: float = 1e-8) -> CertificateReport:
    """Report first-order optimality of ``measure`` for ``sigma``.

    Always returns a report; ``passed`` is the verdict at relative tolerance
    ``tol``.
    """
    sigma = _check_square_symmetric(sigma)
    w = measure.weights
    if w.size != sigma.shape[0]:
        raise OptimizerError(f"measure has {w.size} weights for a {sigma.shape[0]}-point Gram")
    m = sigma @ w
    sigma_sq = float(w @ m)
    support = w > SUPPORT_TOL * w.max()
    min_slack = float(m.min() - sigma_sq)
    max_violation = float(np.abs(m[support] - sigma_sq).max())
    passed = bool(min_slack >= -tol * sigma_sq and max_violation <= tol * sigma_sq)
    return CertificateReport(m=m, sigma_sq=sigma_sq, min_slack=min_slack,
                             max_support_violation=max_violation, passed=passed)


def refine(kernel: Kernel, interval: tuple[float, float], k_min: int, k_max: int,
           stop_tol: float = 1e-6, tol: float = DEFAULT_SOLVE_TOL) -> RefinementTrace:
    """Solve on dyadic grids of increasing level until sigma*^2_k stabilizes.

    Stops early when consecutive values differ by less than ``stop_tol``.
    A fixed-grid kernel (ExplicitGram) cannot refine: single-entry trace.
    """
    if not 0 <= k_min <= k_max <= MAX_LEVEL:
        raise OptimizerError(f"need 0 <= k_min <= k_max <= {MAX_LEVEL}")
    a, b = interval
    if isinstance(kernel, ExplicitGram):
        t0 = time.perf_counter()
        sol = solve_simplex_qp(kernel.matrix, tol, grid=kernel.grid())
        entry = RefinementEntry(0, sol.sigma_star_sq, sol.measure, time.perf_counter() - t0)
        return RefinementTrace(entries=(entry,), converged=True, final_gap=0.0)
    entries: list[RefinementEntry] = []
    converged = False
    final_gap = float("inf")
    for k in range(k_min, k_max + 1):
        grid = DyadicGrid(a, b, k)
        t0 = time.perf_counter()
        try:
            sol = solve_simplex_qp(kernel.gram(grid), tol, grid=grid)
        except (OptimizerError, NotPositiveSemidefiniteError) as exc:
            raise OptimizerError(f"refinement failed at level k={k}: {exc}") from exc
        entries.append(RefinementEntry(k, sol.sigma_star_sq, sol.measure,
                                       time.perf_counter() - t0))
        if len(entries) >= 2:
            final_gap = entries[-2].sigma_star_sq - entries[-1].sigma_star_sq
            if final_gap < stop_tol:
                converged = True
                break
    return RefinementTrace(entries=tuple(entries), converged=converged, final_gap=final_gap)
