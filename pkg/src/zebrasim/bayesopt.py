"""Gaussian-process Bayesian optimisation for noisy 1D bounded objectives.

Matérn-5/2 kernel with additive noise, hyperparameters by maximising the
log marginal likelihood (L-BFGS-B from a fixed 8-point start grid in log
space), expected-improvement acquisition maximised on a dense grid.
Inputs are normalised to [0, 1] and outputs standardised internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize as _scipy_minimize
from scipy.special import ndtr
from scipy.stats import qmc

from .errors import SingularGram, ValidationError

SQRT5 = math.sqrt(5.0)
LENGTHSCALE_BOUNDS = (0.01, 2.0)
SIGNAL_VAR_BOUNDS = (1e-4, 1e2)
NOISE_VAR_BOUNDS = (1e-8, 1e1)
BASE_JITTER = 1e-10
MAX_JITTER = 1e-4
EI_GRID_SIZE = 512
PENALTY_OBJECTIVE = 1e6

# fixed multi-start grid for the likelihood search (log space), chosen to
# cover short/long length scales and low/high noise floors
_STARTS = [
    (1.0, 0.1, 1e-6), (1.0, 0.5, 1e-6), (1.0, 1.0, 1e-6), (1.0, 0.2, 1e-2),
    (0.3, 0.1, 1e-1), (2.0, 0.6, 1e-1), (1.0, 0.05, 1e-4), (0.5, 1.5, 1e-3),
]


@dataclass(frozen=True)
class OptimizeConfig:
    """Budget and bounds of one minimisation run."""

    bounds: tuple[float, float]
    n_iterations: int = 60
    n_initial: int = 15
    seed: int = 0
    xi: float = 0.01  # EI exploration offset

    def __post_init__(self) -> None:
        if not self.bounds[0] < self.bounds[1]:
            raise ValidationError("bounds must satisfy lo < hi")
        if not self.n_initial < self.n_iterations:
            raise ValidationError("n_initial must be < n_iterations")


@dataclass(frozen=True)
class OptimisationRecord:
    """One iteration of a minimisation run (native units)."""

    iter: int
    candidate: float
    objective: float
    feasible: bool
    best_so_far: float


def _matern52(d: np.ndarray, sf2: float, ls: float) -> np.ndarray:
    a = SQRT5 * d / ls
    return sf2 * (1.0 + a + a * a / 3.0) * np.exp(-a)


@dataclass
class GpModel:
    """Matérn-5/2 GP over normalised inputs with cached Cholesky factor."""

    x: np.ndarray            # (n,) in [0, 1]
    y: np.ndarray            # (n,) standardised outputs
    signal_var: float
    lengthscale: float
    noise_var: float
    jitter: float = BASE_JITTER
    _chol: np.ndarray = field(init=False, repr=False)
    _alpha: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        k = _matern52(np.abs(self.x[:, None] - self.x[None, :]),
                      self.signal_var, self.lengthscale)
        k[np.diag_indices_from(k)] += self.noise_var + self.jitter
        try:
            self._chol = cholesky(k, lower=True)
        except np.linalg.LinAlgError as exc:
            raise SingularGram(str(exc)) from exc
        self._alpha = cho_solve((self._chol, True), self.y)

    def posterior(self, xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance (standardised space) at query points."""
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        ks = _matern52(np.abs(xq[:, None] - self.x[None, :]),
                       self.signal_var, self.lengthscale)
        mean = ks @ self._alpha
        w = solve_triangular(self._chol, ks.T, lower=True)
        var = self.signal_var - np.einsum("ij,ij->j", w, w)
        return mean, np.maximum(var, 0.0)

    def log_marginal_likelihood(self) -> float:
        n = len(self.y)
        return float(-0.5 * self.y @ self._alpha
                     - np.sum(np.log(np.diag(self._chol)))
                     - 0.5 * n * math.log(2.0 * math.pi))


def _mll_and_grad(theta: np.ndarray, x: np.ndarray, y: np.ndarray,
                  jitter: float) -> tuple[float, np.ndarray]:
    """Negative log marginal likelihood and gradient wrt log-params."""
    sf2, ls, sn2 = np.exp(theta)
    d = np.abs(x[:, None] - x[None, :])
    a = SQRT5 * d / ls
    ea = np.exp(-a)
    kf = sf2 * (1.0 + a + a * a / 3.0) * ea
    k = kf.copy()
    k[np.diag_indices_from(k)] += sn2 + jitter
    try:
        c, low = cho_factor(k, lower=True)
    except np.linalg.LinAlgError:
        return 1e12, np.zeros(3)
    alpha = cho_solve((c, low), y)
    n = len(y)
    mll = (-0.5 * y @ alpha - np.sum(np.log(np.diag(c)))
           - 0.5 * n * math.log(2.0 * math.pi))
    kinv = cho_solve((c, low), np.eye(n))
    m = np.outer(alpha, alpha) - kinv
    # dK/dlog(sf2) = kf ; dK/dlog(sn2) = sn2*I
    # dK/dlog(ls) = sf2 * exp(-a) * (a^2/3) * (1 + a)  (since da/dlog ls = -a)
    dk_ls = sf2 * ea * (a * a / 3.0) * (1.0 + a)
    grad = np.array([
        0.5 * np.sum(m * kf),
        0.5 * np.sum(m * dk_ls),
        0.5 * np.trace(m) * sn2,
    ])
    return -mll, -grad


def fit_gp(observations: Sequence[tuple[float, float]]) -> GpModel:
    """Fit hyperparameters by multi-start likelihood maximisation.

    Inputs must already be normalised to [0, 1]; outputs are standardised
    by the caller (minimize does both). Deterministic: the restart grid
    is fixed.
    """
    obs = np.asarray(observations, dtype=float)
    if obs.ndim != 2 or obs.shape[0] < 1:
        raise ValidationError("need at least one (x, y) observation")
    x, y = obs[:, 0], obs[:, 1]
    bounds = [tuple(np.log(SIGNAL_VAR_BOUNDS)),
              tuple(np.log(LENGTHSCALE_BOUNDS)),
              tuple(np.log(NOISE_VAR_BOUNDS))]
    jitter = BASE_JITTER
    while True:
        best = None
        for start in _STARTS:
            theta0 = np.log(np.array(start))
            res = _scipy_minimize(_mll_and_grad, theta0,
                                  args=(x, y, jitter), jac=True,
                                  method="L-BFGS-B", bounds=bounds)
            if best is None or res.fun < best.fun:
                best = res
        sf2, ls, sn2 = np.exp(best.x)
        try:
            return GpModel(x=x, y=y, signal_var=float(sf2),
                           lengthscale=float(ls), noise_var=float(sn2),
                           jitter=jitter)
        except SingularGram:
            jitter *= 10.0
            if jitter > MAX_JITTER:
                raise


def expected_improvement(model: GpModel, xq: np.ndarray, best: float,
                         xi: float = 0.0) -> np.ndarray:
    """EI for minimisation; >= 0 everywhere, 0 where sigma = 0 and no gain."""
    mean, var = model.posterior(xq)
    sigma = np.sqrt(var)
    improve = best - mean - xi
    ei = np.where(improve > 0.0, improve, 0.0)
    pos = sigma > 0.0
    z = np.zeros_like(mean)
    z[pos] = improve[pos] / sigma[pos]
    phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    cdf = 0.5 * (1.0 + np.vectorize(math.erf)(z / math.sqrt(2.0)))
    ei_pos = improve * cdf + sigma * phi
    return np.where(pos, np.maximum(ei_pos, 0.0), ei)


def minimize(objective: Callable[[float], float | tuple[float, bool]],
             cfg: OptimizeConfig) -> tuple[float, float, list[OptimisationRecord]]:
    """Minimise a scalar objective over cfg.bounds.

    n_initial scrambled-Sobol points, then EI-guided candidates from a
    dense grid (ties break to the lowest x). The returned minimiser is
    the empirical best observation, appropriate for penalty-encoded
    feasibility. The objective may return (value, feasible); a bare float
    is treated as feasible.

    Deterministic given (cfg.seed, deterministic objective). Objective
    failures propagate annotated with the iteration index.
    """
    lo, hi = cfg.bounds
    sampler = qmc.Sobol(d=1, scramble=True, seed=cfg.seed)
    n_pow2 = 1 << max(1, math.ceil(math.log2(max(2, cfg.n_initial))))
    init = sampler.random_base2(int(math.log2(n_pow2)))[:cfg.n_initial, 0]

    xs: list[float] = []
    ys: list[float] = []
    records: list[OptimisationRecord] = []
    best_y = math.inf
    best_x = lo

    def evaluate(i: int, u: float) -> None:
        nonlocal best_y, best_x
        native = lo + (hi - lo) * u
        try:
            out = objective(native)
        except Exception as exc:
            raise RuntimeError(f"objective failed at iteration {i} "
                               f"(x={native:.6g})") from exc
        if isinstance(out, tuple):
            value, feasible = float(out[0]), bool(out[1])
        else:
            value, feasible = float(out), True
        if not math.isfinite(value):
            raise RuntimeError(f"objective returned non-finite value at "
                               f"iteration {i} (x={native:.6g})")
        xs.append(u)
        ys.append(value)
        if value < best_y:
            best_y, best_x = value, native
        records.append(OptimisationRecord(iter=i, candidate=native,
                                          objective=value, feasible=feasible,
                                          best_so_far=best_y))

    for i, u in enumerate(init):
        evaluate(i, float(u))

    grid = np.linspace(0.0, 1.0, EI_GRID_SIZE)
    for i in range(cfg.n_initial, cfg.n_iterations):
        ya = np.asarray(ys)
        mu, sd = float(ya.mean()), float(ya.std())
        if sd < 1e-12 or len(ya) < 2:
            sd = 1.0
        model = fit_gp(np.column_stack([np.asarray(xs), (ya - mu) / sd]))
        ei = expected_improvement(model, grid, best=float((ya - mu).min() / sd),
                                  xi=cfg.xi)
        u = float(grid[int(np.argmax(ei))])  # first occurrence = lowest x
        evaluate(i, u)

    return best_x, best_y, records
