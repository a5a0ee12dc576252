"""Step-function search for satisfiable MAX NAE-K-SAT.

Under the symmetric-configuration assumption the hardest satisfiable
k-clause has all pairwise biases 1 - 4/k, so the objective for a clause
size set K is

    alpha_K(f) = min_{k in K} p_f(k, 1 - 4/k),

evaluated through the one-dimensional noise-operator integrals of the
moments module.  The ratios this produces are conjectured, not proven;
callers surface that caveat in their outputs.

The optimizer is multi-start Nelder-Mead over an unconstrained
parameterization: a_1 = exp(u_1) and gaps a_{i+1} - a_i = exp(u_{i+1})
keep breakpoints ordered, and free step values are clipped into [-1, 1].
With the +-1 flag only breakpoints move and values alternate
(-1)^(i+1), the shape every best known multi-size optimum takes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .core import StepFunction
from .errors import DomainError
from .moments import sat_prob_symmetric


@dataclass(frozen=True)
class StepSearchConfig:
    clause_sizes: tuple[int, ...]
    steps: int = 2                 # l + 1 values on the positive axis
    pm_one: bool = True
    restarts: int = 64
    seed: int = 0
    xatol: float = 1e-10
    fatol: float = 1e-12
    max_iter: int = 2000

    def __post_init__(self):
        ks = tuple(sorted(set(int(k) for k in self.clause_sizes)))
        if not ks or min(ks) < 3:
            raise DomainError("clause sizes must all be >= 3")
        if self.steps < 1:
            raise DomainError("need at least one step")
        object.__setattr__(self, "clause_sizes", ks)


def objective_alphaK(f: StepFunction, clause_sizes) -> float:
    """min over k in K of the symmetric-configuration satisfaction probability."""
    ks = tuple(clause_sizes)
    if not ks or min(ks) < 3:
        raise DomainError("clause sizes must all be >= 3")
    return min(sat_prob_symmetric(f, k, 1.0 - 4.0 / k) for k in ks)


def per_size_probs(f: StepFunction, clause_sizes) -> dict[int, float]:
    return {k: sat_prob_symmetric(f, k, 1.0 - 4.0 / k) for k in clause_sizes}


# ---------------------------------------------------------------------------
# optimization


def _alternating(l: int) -> tuple[float, ...]:
    return tuple(float((-1) ** (i + 1)) for i in range(l + 1))


def _decode(params: np.ndarray, cfg: StepSearchConfig) -> StepFunction | None:
    l = cfg.steps - 1
    with np.errstate(over="ignore"):
        gaps = np.exp(params[:l])
    if not np.all(np.isfinite(gaps)):
        return None
    a = np.cumsum(gaps)
    if l and (a[-1] > 50.0 or np.any(np.diff(a) <= 0)):
        return None
    if cfg.pm_one:
        b = _alternating(l)
    else:
        b = tuple(np.clip(params[l:], -1.0, 1.0))
    try:
        return StepFunction(tuple(a), b)
    except Exception:
        return None


@dataclass(frozen=True)
class StepSearchResult:
    f: StepFunction
    objective: float
    per_size: dict[int, float]
    restarts_used: int
    converged: bool
    conjectured: bool = True  # ratios assume the symmetric hardest configuration


def optimize_step(cfg: StepSearchConfig) -> StepSearchResult:
    """Multi-start Nelder-Mead maximization of alpha_K; deterministic per seed.

    The objective is a min of smooth curves, so the optimum usually sits
    on a kink; Nelder-Mead handles that where gradient methods stall.
    Non-convergence of individual starts is not fatal, the best point
    found is returned with ``converged`` reporting whether any start met
    the tolerances.
    """
    l = cfg.steps - 1
    nparam = l + (0 if cfg.pm_one else l + 1)
    rng = np.random.default_rng(cfg.seed)

    def loss(params: np.ndarray) -> float:
        f = _decode(params, cfg)
        if f is None:
            return 2.0
        return -objective_alphaK(f, cfg.clause_sizes)

    if nparam == 0:  # single +-1 step: f = sign, nothing to optimize
        f = StepFunction((), (1.0,))
        return StepSearchResult(f, objective_alphaK(f, cfg.clause_sizes),
                                per_size_probs(f, cfg.clause_sizes), 0, True)

    best_val = np.inf
    best_params = None
    any_converged = False
    for _ in range(cfg.restarts):
        start = np.empty(nparam)
        # log-spaced first breakpoint around [0.6, 3.3]; modest gaps after
        start[:l] = np.concatenate([
            rng.uniform(-0.5, 1.2, size=min(1, l)),
            rng.uniform(-2.0, 0.7, size=max(0, l - 1)),
        ])
        if not cfg.pm_one:
            start[l:] = rng.uniform(-1.0, 1.0, size=l + 1)
        res = minimize(loss, start, method="Nelder-Mead",
                       options={"xatol": cfg.xatol, "fatol": cfg.fatol,
                                "maxiter": cfg.max_iter, "maxfev": cfg.max_iter})
        any_converged = any_converged or bool(res.success)
        if res.fun < best_val:
            best_val = res.fun
            best_params = res.x
    f = _decode(best_params, cfg)
    if f is None:
        raise DomainError("optimizer failed to produce a valid step function")
    return StepSearchResult(f, -best_val, per_size_probs(f, cfg.clause_sizes),
                            cfg.restarts, any_converged)


# ---------------------------------------------------------------------------
# breakpoint sweeps (marginal value of an extra step)


def breakpoint_sweep(f: StepFunction, positions, clause_sizes) -> list[dict]:
    """Per-size satisfaction probabilities after appending one breakpoint.

    Each candidate position a > max(existing breakpoints) appends a step
    with the terminal sign flipped; positions inside the existing
    breakpoint range are a domain error.
    """
    ks = tuple(clause_sizes)
    if not ks or min(ks) < 3:
        raise DomainError("clause sizes must all be >= 3")
    last = f.breakpoints[-1] if f.breakpoints else 0.0
    pos = np.asarray(positions, dtype=float)
    if np.any(pos <= last):
        raise DomainError(f"sweep positions must exceed the last breakpoint {last}")
    rows = []
    for a_new in pos:
        g = StepFunction(f.breakpoints + (float(a_new),), f.values + (-f.values[-1],))
        row = {"position": float(a_new)}
        for k in ks:
            row[k] = sat_prob_symmetric(g, k, 1.0 - 4.0 / k)
        rows.append(row)
    return rows
