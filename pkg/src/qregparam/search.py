"""Regularization parameter search: minimum finding, L-curve and GCV pipelines.

The Grover-threshold minimum finder is simulated at the probability level:
marked-set amplitudes after r Grover iterations are computed exactly and
sampled, so query accounting and success statistics match the real loop.

The pipelines build the per-branch solver states (one per grid value), sample
the amplitude-estimation readout for each branch, and then run the minimum
finder on the resulting criterion values.  Per the desk-scale concurrency
model, the p branches are simulated independently and combined
deterministically rather than as one tensor state.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .hhl import (
    HhlConfig,
    _evolution_operator,
    _padded,
    _residual_norm_with_queries,
    _solution_norm_with_queries,
)
from .linalg import (
    RegularizedProblem,
    build_extended,
    compute_svd,
    gcv_lowrank,
    gcv_value,
    tikhonov_solve,
)
from .statevector import (
    StateVector,
    qpe_forward,
    register_distribution,
    twos_complement,
)


@dataclass
class ParameterGrid:
    """Geometric grid mu_j = mu0 * rho^j, j = 1..p (strictly decreasing)."""

    mus: np.ndarray
    rho: float
    p: int

    def __post_init__(self):
        self.mus = np.asarray(self.mus, dtype=float).ravel()
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if self.p < 1 or self.mus.size != self.p:
            raise ValueError("grid length must equal p >= 1")
        if np.any(self.mus <= 0) or np.any(np.diff(self.mus) >= 0):
            raise ValueError("grid must be strictly decreasing and positive")

    @classmethod
    def geometric(cls, mu0: float = 1.0, rho: float = 0.9, p: int = 16) -> "ParameterGrid":
        return cls(mus=mu0 * rho ** np.arange(1, p + 1), rho=rho, p=p)


@dataclass
class LCurvePoint:
    mu: float
    residual_norm: float
    solution_norm: float


@dataclass
class SelectionResult:
    """Chosen grid index plus the per-parameter criterion table and query budget."""

    chosen_index: int
    chosen_mu: float
    criterion_values: np.ndarray
    queries_used: int
    threshold_history: list[int]
    points: list[LCurvePoint] | None = None


def durr_hoyer_budget(p: int) -> float:
    return 22.5 * math.sqrt(p) + 1.4 * math.log2(p) ** 2 if p > 1 else 0.0


def durr_hoyer_min(values: np.ndarray, rng: np.random.Generator,
                   mus: np.ndarray | None = None) -> SelectionResult:
    """Grover-threshold minimum finding within the 22.5 sqrt(p) + 1.4 log^2 p budget."""
    values = np.asarray(values, dtype=float).ravel()
    p = values.size
    if p < 1:
        raise ValueError("need at least one value")
    mu_of = (lambda j: float(mus[j])) if mus is not None else (lambda j: math.nan)
    if p == 1:
        return SelectionResult(0, mu_of(0), values, 0, [0])
    budget = durr_hoyer_budget(p)
    y = int(rng.integers(p))
    history = [y]
    queries = 0
    m = 1.0
    grow = 6.0 / 5.0
    while True:
        r = int(rng.integers(int(m)))
        if queries + r + 1 > budget:
            break
        queries += r + 1
        marked = np.flatnonzero(values < values[y])
        k = marked.size
        if k == 0:
            m = min(grow * m, math.sqrt(p))
            continue
        theta = math.asin(math.sqrt(k / p))
        p_marked = math.sin((2 * r + 1) * theta) ** 2
        if rng.random() < p_marked:
            y_new = int(marked[rng.integers(k)])
        else:
            unmarked = np.flatnonzero(values >= values[y])
            y_new = int(unmarked[rng.integers(unmarked.size)])
        if values[y_new] < values[y]:
            y = y_new
            history.append(y)
            m = 1.0
        else:
            m = min(grow * m, math.sqrt(p))
    return SelectionResult(y, mu_of(y), values, queries, history)


def _branch_norms(problem: RegularizedProblem, mu: float, cfg: HhlConfig,
                  epsilon: float, rng: np.random.Generator,
                  repeats: int) -> tuple[float, float, int]:
    """Quantum-estimated (||x_mu||, ||A x_mu - b||, queries) for one grid value."""
    ext = build_extended(problem.A, mu)
    cfg_mu = HhlConfig.for_extended(ext, n_phase_bits=cfg.n_phase_bits,
                                    snap_spectrum=cfg.snap_spectrum)
    try:
        sol, _, q1 = _solution_norm_with_queries(ext, problem.b, cfg_mu, epsilon,
                                                 rng, repeats)
        res, _, q2 = _residual_norm_with_queries(ext, problem.b, cfg_mu, epsilon,
                                                 rng, repeats)
    except Exception as exc:
        raise type(exc)(f"{exc} (at mu = {mu:g})") from exc
    return sol, res, q1 + q2


def lcurve_pipeline(problem: RegularizedProblem, grid: ParameterGrid, cfg: HhlConfig,
                    epsilon: float, rng: np.random.Generator, repeats: int = 5,
                    translation: tuple[float, float] = (0.0, 0.0)) -> SelectionResult:
    """Parallel norm estimation followed by minimum finding on ||x||^2 + ||r||^2.

    translation shifts the two L-curve axes before the corner criterion is
    evaluated (caller-supplied; default zero).
    """
    points = []
    criterion = np.empty(grid.p)
    queries = 0
    dx, dr = translation
    for j, mu in enumerate(grid.mus):
        sol, res, q = _branch_norms(problem, float(mu), cfg, epsilon, rng, repeats)
        points.append(LCurvePoint(mu=float(mu), residual_norm=res, solution_norm=sol))
        criterion[j] = (sol - dx) ** 2 + (res - dr) ** 2
        queries += q
    result = durr_hoyer_min(criterion, rng, mus=grid.mus)
    result.queries_used += queries
    result.points = points
    return result


def principal_singular_values(ext, r: int, n_bits: int, shots: int,
                              rng: np.random.Generator) -> np.ndarray:
    """Singular values of A recovered by QPE sampling on the vectorized dilation.

    Prepares |A~> proportional to the matrix entries, runs phase estimation
    with e^{-i t A~} on the row register, samples the phase register, merges
    outcomes with equal magnitude, and converts sigma~ -> sqrt(sigma~^2 - mu^2).
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    Hd, k = _padded(ext.dilation)
    fro = np.linalg.norm(Hd)
    if fro == 0:
        raise ValueError("zero matrix has no singular values to sample")
    w = np.linalg.eigvalsh(Hd)
    lam_max = float(np.max(np.abs(w)))
    top = np.sort(np.abs(w))[::-1]
    mass = np.sum(top[: 2 * r] ** 2) / np.sum(top**2)
    if mass < 0.99:
        warnings.warn(
            f"top-{r} modes carry only {mass:.3f} of the Frobenius mass; "
            "the low-rank premise is violated",
            RuntimeWarning,
            stacklevel=2,
        )
    t = math.pi / (2.0 * lam_max)
    U, _ = _evolution_operator(Hd, t, n_bits, snap=True)
    amps = np.zeros(2 ** (n_bits + 2 * k), dtype=complex)
    amps[: 4**k] = (Hd / fro).reshape(-1)
    state = StateVector(n_bits + 2 * k, amps)
    # QPE couples the phase register to the row register (the high k system qubits)
    out = qpe_forward(state, U, list(range(n_bits)), list(range(n_bits, n_bits + k)))
    probs = register_distribution(out, list(range(n_bits)))
    probs = probs / probs.sum()
    outcomes = rng.choice(2**n_bits, size=shots, p=probs)
    counts: dict[float, int] = {}
    for y in outcomes:
        mag = abs(twos_complement(int(y), n_bits))
        if mag == 0:
            continue
        counts[mag] = counts.get(mag, 0) + 1
    if len(counts) < r:
        raise RuntimeError(
            f"only {len(counts)} distinct singular-value clusters found after "
            f"{shots} shots; need {r}"
        )
    top_cells = sorted(counts, key=counts.get, reverse=True)[:r]
    sigma_tilde = np.array([2 * math.pi * c / (2**n_bits * t) for c in top_cells])
    sigma = np.sqrt(np.maximum(sigma_tilde**2 - ext.mu**2, 0.0))
    return np.sort(sigma)[::-1]


def gcv_pipeline(problem: RegularizedProblem, grid: ParameterGrid, r: int,
                 cfg: HhlConfig, epsilon: float, rng: np.random.Generator,
                 repeats: int = 5, shots: int | None = None) -> SelectionResult:
    """Singular-value extraction, parallel residual estimation, min of G(mu_j)."""
    m, n = problem.m, problem.n
    ext0 = build_extended(problem.A, float(grid.mus[0]))
    if shots is None:
        w = np.abs(np.linalg.eigvalsh(_padded(ext0.dilation)[0]))
        nz = np.sort(w[w > 1e-12 * w.max()])
        ratio = (nz[-1] / nz[0]) ** 2 if nz.size else 1.0
        shots = max(10 * r, math.ceil(10 * r * ratio))
    sigma_est = principal_singular_values(ext0, r, cfg.n_phase_bits, shots, rng)
    criterion = np.empty(grid.p)
    queries = shots
    for j, mu in enumerate(grid.mus):
        ext = build_extended(problem.A, float(mu))
        cfg_mu = HhlConfig.for_extended(ext, n_phase_bits=cfg.n_phase_bits,
                                        snap_spectrum=cfg.snap_spectrum)
        try:
            res, _, q = _residual_norm_with_queries(ext, problem.b, cfg_mu, epsilon,
                                                    rng, repeats)
        except Exception as exc:
            raise type(exc)(f"{exc} (at mu = {mu:g})") from exc
        criterion[j] = gcv_lowrank(sigma_est, res**2, m, n, float(mu))
        queries += q
    result = durr_hoyer_min(criterion, rng, mus=grid.mus)
    result.queries_used += queries
    return result


def classical_select(problem: RegularizedProblem, grid: ParameterGrid,
                     criterion: str) -> SelectionResult:
    """Exhaustive oracle: exact per-mu solves, argmin (lowest index on ties)."""
    if criterion not in ("lcurve-sum", "gcv"):
        raise ValueError(f"unknown criterion {criterion!r}")
    svd = compute_svd(problem.A)
    values = np.empty(grid.p)
    points = []
    for j, mu in enumerate(grid.mus):
        sol = tikhonov_solve(svd, problem.b, float(mu))
        points.append(LCurvePoint(mu=float(mu), residual_norm=sol.residual_norm,
                                  solution_norm=sol.solution_norm))
        if criterion == "lcurve-sum":
            values[j] = sol.solution_norm**2 + sol.residual_norm**2
        else:
            values[j] = gcv_value(svd, problem.b, float(mu))
    j0 = int(np.argmin(values))
    return SelectionResult(j0, float(grid.mus[j0]), values, grid.p, [j0], points=points)
