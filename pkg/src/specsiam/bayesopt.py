"""Gaussian-process Bayesian optimization with Expected Improvement.

Search dimensions (continuous, log-continuous, discrete) map into the unit
cube where a Matern 5/2 GP with per-dimension lengthscales models the
objective. Candidates maximize EI by multi-start quasi-Newton search and are
snapped back to the raw space; discrete dimensions snap to the nearest listed
value. All objectives are maximized (validation accuracies).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import linalg as sp_linalg
from scipy import optimize as sp_optimize
from scipy.stats import norm as _norm

from .errors import DataError, NumericalError

__all__ = [
    "Continuous",
    "LogContinuous",
    "Discrete",
    "SearchSpace",
    "GpPosterior",
    "BoState",
    "gp_fit",
    "expected_improvement",
    "propose_next",
    "optimize",
    "write_trace_csv",
]

NOISE_FLOOR = 1e-6


@dataclass(frozen=True)
class Continuous:
    name: str
    low: float
    high: float

    def __post_init__(self):
        if not self.low < self.high:
            raise DataError(f"dimension '{self.name}': need low < high")

    def to_unit(self, value: float) -> float:
        return (float(value) - self.low) / (self.high - self.low)

    def from_unit(self, u: float) -> float:
        u = min(max(float(u), 0.0), 1.0)
        return self.low + u * (self.high - self.low)


@dataclass(frozen=True)
class LogContinuous:
    name: str
    low: float
    high: float

    def __post_init__(self):
        if not 0.0 < self.low < self.high:
            raise DataError(f"dimension '{self.name}': need 0 < low < high")

    def to_unit(self, value: float) -> float:
        return (math.log(float(value)) - math.log(self.low)) / (
            math.log(self.high) - math.log(self.low)
        )

    def from_unit(self, u: float) -> float:
        u = min(max(float(u), 0.0), 1.0)
        return math.exp(math.log(self.low) + u * (math.log(self.high) - math.log(self.low)))


@dataclass(frozen=True)
class Discrete:
    name: str
    values: tuple

    def __post_init__(self):
        values = tuple(self.values)
        if not values:
            raise DataError(f"dimension '{self.name}': empty value list")
        if list(values) != sorted(values):
            raise DataError(f"dimension '{self.name}': values must be sorted")
        object.__setattr__(self, "values", values)

    def to_unit(self, value) -> float:
        values = self.values
        if len(values) == 1:
            return 0.5
        if value in values:
            idx = values.index(value)
        else:
            try:
                idx = int(np.argmin([abs(v - value) for v in values]))
            except TypeError:
                raise DataError(
                    f"dimension '{self.name}': {value!r} not in {values}"
                ) from None
        return idx / (len(values) - 1)

    def from_unit(self, u: float):
        values = self.values
        if len(values) == 1:
            return values[0]
        u = min(max(float(u), 0.0), 1.0)
        return values[int(round(u * (len(values) - 1)))]


@dataclass(frozen=True)
class SearchSpace:
    """Ordered mixed-type dimensions; configurations are {name: raw value} dicts."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(self.dims)
        names = [d.name for d in dims]
        if len(set(names)) != len(names):
            raise DataError("duplicate dimension names")
        object.__setattr__(self, "dims", dims)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dims)

    @property
    def n_dims(self) -> int:
        return len(self.dims)

    def to_unit(self, config: dict) -> np.ndarray:
        return np.array([d.to_unit(config[d.name]) for d in self.dims])

    def from_unit(self, u) -> dict:
        u = np.asarray(u, dtype=np.float64)
        if u.shape != (len(self.dims),):
            raise DataError(f"expected {len(self.dims)} coordinates, got {u.shape}")
        return {d.name: d.from_unit(v) for d, v in zip(self.dims, u)}


# ---------------------------------------------------------------------------
# Gaussian process surrogate

def _matern52(xa: np.ndarray, xb: np.ndarray, lengthscales: np.ndarray, signal_var: float):
    sa = xa / lengthscales
    sb = xb / lengthscales
    d2 = (
        (sa * sa).sum(axis=1)[:, None]
        + (sb * sb).sum(axis=1)[None, :]
        - 2.0 * (sa @ sb.T)
    )
    r = np.sqrt(np.maximum(d2, 0.0))
    sq5r = math.sqrt(5.0) * r
    return signal_var * (1.0 + sq5r + 5.0 * d2 / 3.0) * np.exp(-sq5r)


def _chol_with_jitter(k: np.ndarray, noise_var: float):
    n = k.shape[0]
    jitter = 0.0
    for _ in range(8):
        try:
            lower = sp_linalg.cholesky(k + (noise_var + jitter) * np.eye(n), lower=True)
            return lower, jitter
        except sp_linalg.LinAlgError:
            jitter = 1e-10 if jitter == 0.0 else jitter * 10.0
    raise NumericalError(
        f"covariance not positive definite even with jitter {jitter:g}"
    )


@dataclass
class GpPosterior:
    """Fitted GP over unit-cube points; predicts standardized-then-descaled values."""

    x_train: np.ndarray
    lengthscales: np.ndarray
    signal_var: float
    noise_var: float
    y_mean: float
    y_scale: float
    chol_lower: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)

    def predict(self, x_query) -> tuple[np.ndarray, np.ndarray]:
        xq = np.atleast_2d(np.asarray(x_query, dtype=np.float64))
        k_star = _matern52(self.x_train, xq, self.lengthscales, self.signal_var)
        mu = self.y_mean + self.y_scale * (k_star.T @ self.alpha)
        v = sp_linalg.solve_triangular(self.chol_lower, k_star, lower=True)
        var = self.signal_var - (v * v).sum(axis=0)
        var = np.maximum(var, 0.0) * self.y_scale**2
        return mu, var

    @property
    def hyperparams(self) -> dict:
        return {
            "lengthscales": self.lengthscales.tolist(),
            "signal_var": self.signal_var,
            "noise_var": self.noise_var,
        }


def _neg_log_marginal(log_params, x, y_std, fixed_noise):
    d = x.shape[1]
    ls = np.exp(log_params[:d])
    sf = math.exp(log_params[d])
    sn = fixed_noise if fixed_noise is not None else max(math.exp(log_params[d + 1]), NOISE_FLOOR)
    k = _matern52(x, x, ls, sf)
    n = x.shape[0]
    try:
        lower = sp_linalg.cholesky(k + (sn + 1e-12) * np.eye(n), lower=True)
    except sp_linalg.LinAlgError:
        return 1e9
    alpha = sp_linalg.cho_solve((lower, True), y_std)
    lml = (
        -0.5 * float(y_std @ alpha)
        - float(np.log(np.diag(lower)).sum())
        - 0.5 * n * math.log(2.0 * math.pi)
    )
    if not math.isfinite(lml):
        return 1e9
    return -lml


def gp_fit(points, values, noise: float | None = None, n_restarts: int = 3, seed: int = 0) -> GpPosterior:
    """Fit the surrogate on unit-cube points.

    Kernel hyperparameters maximize the log marginal likelihood over multiple
    starts. When noise is None the observation noise is fit jointly (floored
    at NOISE_FLOOR); a given noise value is held fixed, which makes tiny
    noises behave as interpolation.
    """
    x = np.atleast_2d(np.asarray(points, dtype=np.float64))
    y = np.asarray(values, dtype=np.float64).ravel()
    if x.shape[0] != y.size or y.size < 1:
        raise DataError("points and values must align and be non-empty")
    d = x.shape[1]
    y_mean = float(y.mean())
    y_scale = float(y.std())
    if y_scale < 1e-12:
        y_scale = 1.0
    y_std = (y - y_mean) / y_scale

    default = np.concatenate([np.log(np.full(d, 0.3)), [0.0]])
    if noise is None:
        default = np.concatenate([default, [math.log(0.1)]])
    best_params = default
    if x.shape[0] >= 2:
        rng = np.random.default_rng(seed)
        bounds = [(math.log(0.03), math.log(30.0))] * d + [(math.log(0.01), math.log(100.0))]
        if noise is None:
            bounds.append((math.log(NOISE_FLOOR), math.log(1.0)))
        starts = [default]
        for _ in range(n_restarts):
            starts.append(np.array([rng.uniform(lo, hi) for lo, hi in bounds]))
        best_val = math.inf
        for start in starts:
            res = sp_optimize.minimize(
                _neg_log_marginal,
                start,
                args=(x, y_std, noise),
                method="L-BFGS-B",
                bounds=bounds,
            )
            val = res.fun if math.isfinite(res.fun) else 1e9
            if val < best_val:
                best_val = val
                best_params = res.x

    ls = np.exp(best_params[:d])
    sf = math.exp(best_params[d])
    if noise is not None:
        sn = max(float(noise), 0.0)
    else:
        sn = max(math.exp(best_params[d + 1]), NOISE_FLOOR)
    k = _matern52(x, x, ls, sf)
    lower, _ = _chol_with_jitter(k, sn)
    alpha = sp_linalg.cho_solve((lower, True), y_std)
    return GpPosterior(
        x_train=x,
        lengthscales=ls,
        signal_var=sf,
        noise_var=sn,
        y_mean=y_mean,
        y_scale=y_scale,
        chol_lower=lower,
        alpha=alpha,
    )


def expected_improvement(gp: GpPosterior, x_query, best_value: float):
    """EI for maximization; non-negative, zero when no improvement is possible.

    Accepts one point (1-D, returns a float) or a stack of points (2-D,
    returns an array).
    """
    single = np.asarray(x_query).ndim == 1
    mu, var = gp.predict(x_query)
    sigma = np.sqrt(var)
    improve = mu - best_value
    ei = np.maximum(improve, 0.0)
    live = sigma > 1e-12
    if np.any(live):
        z = improve[live] / sigma[live]
        ei = ei.copy()
        ei[live] = improve[live] * _norm.cdf(z) + sigma[live] * _norm.pdf(z)
    ei = np.maximum(ei, 0.0)
    return float(ei[0]) if single else ei


# ---------------------------------------------------------------------------
# acquisition loop

@dataclass
class BoState:
    """Trace of one optimization run: evaluated points, values, surrogate state."""

    space: SearchSpace
    seed: int
    unit_points: list = field(default_factory=list)
    raw_configs: list = field(default_factory=list)
    values: list = field(default_factory=list)
    gp_hyperparams: dict | None = None
    failures: list = field(default_factory=list)

    @property
    def best_index(self) -> int:
        if not self.values:
            raise DataError("no evaluations recorded")
        return int(np.argmax(self.values))

    @property
    def best_value(self) -> float:
        return float(self.values[self.best_index])

    @property
    def best_config(self) -> dict:
        return dict(self.raw_configs[self.best_index])


def _ei_objective(u, gp, best_value):
    return -float(expected_improvement(gp, u[None, :], best_value)[0])


def propose_next(state: BoState, space: SearchSpace, restarts: int = 10) -> dict:
    """Maximize EI over the unit cube and map the winner to a raw configuration.

    Deterministic given the state contents and seed. Discrete dimensions snap
    to their nearest listed value; a proposal that duplicates an evaluated
    configuration is nudged to the nearest unevaluated discrete neighbor.
    """
    if not state.values:
        raise DataError("propose_next requires at least one prior evaluation")
    x = np.array(state.unit_points)
    gp = gp_fit(x, np.array(state.values), seed=state.seed)
    state.gp_hyperparams = gp.hyperparams
    best_value = state.best_value
    d = space.n_dims
    rng = np.random.default_rng(np.random.SeedSequence([state.seed, len(state.values)]))
    starts = list(rng.random((restarts, d)))
    starts.append(np.clip(np.array(state.unit_points[state.best_index]) + 0.05 * rng.standard_normal(d), 0, 1))
    best_u = None
    best_ei = -math.inf
    bounds = [(0.0, 1.0)] * d
    for start in starts:
        res = sp_optimize.minimize(
            _ei_objective, start, args=(gp, best_value), method="L-BFGS-B", bounds=bounds
        )
        u = np.clip(res.x, 0.0, 1.0)
        ei = -_ei_objective(u, gp, best_value)
        if ei > best_ei:
            best_ei = ei
            best_u = u
    assert best_u is not None
    raw = space.from_unit(best_u)
    raw = _dedup_discrete(raw, space, state)
    return raw


def _dedup_discrete(raw: dict, space: SearchSpace, state: BoState) -> dict:
    """Nudge duplicate proposals to the nearest unevaluated discrete neighbor."""

    def snapped(cfg):
        return tuple(space.to_unit(cfg).round(12))

    seen = {tuple(space.to_unit(c).round(12)) for c in state.raw_configs}
    if snapped(raw) not in seen:
        return raw
    discrete = [(i, dim) for i, dim in enumerate(space.dims) if isinstance(dim, Discrete)]
    for radius in range(1, max((len(d.values) for _, d in discrete), default=0) + 1):
        for i, dim in discrete:
            current = dim.values.index(raw[dim.name])
            for step in (-radius, radius):
                j = current + step
                if 0 <= j < len(dim.values):
                    candidate = dict(raw)
                    candidate[dim.name] = dim.values[j]
                    if snapped(candidate) not in seen:
                        return candidate
    return raw


def _initial_design(space: SearchSpace, n_init: int, rng: np.random.Generator) -> np.ndarray:
    """Latin-hypercube style stratified draw in the unit cube."""
    d = space.n_dims
    u = np.empty((n_init, d))
    for j in range(d):
        perm = rng.permutation(n_init)
        u[:, j] = (perm + rng.random(n_init)) / n_init
    return u


def optimize(
    objective: Callable[[dict], float],
    space: SearchSpace,
    n_init: int = 5,
    n_acquisitions: int = 50,
    seed: int = 0,
    noise: float | None = None,
    restarts: int = 10,
) -> tuple[dict, BoState]:
    """Quasi-random exploration followed by EI-driven acquisitions.

    A failing objective scores 0.0 (recorded in state.failures) and the run
    continues. Returns the best raw configuration and the full trace.
    """
    if n_init < 1:
        raise DataError("n_init must be >= 1")
    state = BoState(space=space, seed=seed)
    if space.n_dims == 0:
        value = _evaluate(objective, {}, state)
        state.unit_points.append(np.zeros(0))
        state.raw_configs.append({})
        state.values.append(value)
        return {}, state
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
    for u in _initial_design(space, n_init, rng):
        raw = space.from_unit(u)
        _record(state, space, raw, _evaluate(objective, raw, state))
    for _ in range(n_acquisitions):
        raw = propose_next(state, space, restarts=restarts)
        _record(state, space, raw, _evaluate(objective, raw, state))
    return state.best_config, state


def _evaluate(objective, raw, state: BoState) -> float:
    try:
        return float(objective(dict(raw)))
    except Exception as exc:  # objective failures penalize, never abort the run
        state.failures.append({"config": dict(raw), "error": str(exc)})
        return 0.0


def _record(state: BoState, space: SearchSpace, raw: dict, value: float) -> None:
    state.unit_points.append(space.to_unit(raw))
    state.raw_configs.append(dict(raw))
    state.values.append(value)


def write_trace_csv(state: BoState, path: str | Path) -> None:
    """(iteration, raw values..., objective, cumulative best) per evaluation."""
    names = state.space.names
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", *names, "objective", "cumulative_best"])
        best = -math.inf
        for i, (cfg, value) in enumerate(zip(state.raw_configs, state.values)):
            best = max(best, value)
            writer.writerow([i, *(cfg[n] for n in names), repr(float(value)), repr(best)])
