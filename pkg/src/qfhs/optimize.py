"""Derivative-free minimization with parameter transforms.

Model objectives (quantile loss, negative pseudo-likelihood) are non-smooth
in places, so a single Nelder-Mead engine with adaptive coefficients does all
the work.  Constraints are enforced by bijective transforms to an
unconstrained search space; the simplex is built with fixed absolute steps
there, which makes fits equivariant under data rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize as sp_opt
from scipy.special import expit, logit

from .errors import OptimizationError, ParameterError

__all__ = ["ParamSpace", "OptimResult", "minimize", "multi_start_minimize", "jittered_starts"]

FREE = "free"
POSITIVE = "positive"
UNIT = "unit"
SIMPLEX = "simplex"

_EPS = 1e-14


class ParamSpace:
    """Per-parameter transform layout.

    ``transforms`` is a sequence drawn from ``{"free", "positive", "unit",
    "simplex"}``.  Consecutive ``"simplex"`` entries form one group mapped
    through a stick-breaking (nested logistic) construction, so the group is
    componentwise positive with sum < 1.  A single trailing ``"simplex"``
    entry is rejected: groups need length >= 2.
    """

    def __init__(self, transforms):
        self.transforms = tuple(transforms)
        for t in self.transforms:
            if t not in (FREE, POSITIVE, UNIT, SIMPLEX):
                raise ParameterError(f"unknown transform {t!r}")
        self._groups = []
        i = 0
        while i < len(self.transforms):
            if self.transforms[i] == SIMPLEX:
                j = i
                while j < len(self.transforms) and self.transforms[j] == SIMPLEX:
                    j += 1
                if j - i < 2:
                    raise ParameterError("simplex groups need at least two parameters")
                self._groups.append((SIMPLEX, i, j))
                i = j
            else:
                self._groups.append((self.transforms[i], i, i + 1))
                i += 1

    @property
    def n(self) -> int:
        return len(self.transforms)

    def to_unconstrained(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n,):
            raise ParameterError(f"expected {self.n} parameters, got {theta.shape}")
        u = np.empty_like(theta)
        for kind, i, j in self._groups:
            if kind == FREE:
                u[i] = theta[i]
            elif kind == POSITIVE:
                if theta[i] <= 0:
                    raise ParameterError(f"parameter {i} must be positive")
                u[i] = np.log(theta[i])
            elif kind == UNIT:
                if not 0 < theta[i] < 1:
                    raise ParameterError(f"parameter {i} must lie in (0, 1)")
                u[i] = logit(theta[i])
            else:
                block = theta[i:j]
                if np.any(block <= 0) or block.sum() >= 1:
                    raise ParameterError(
                        f"parameters {i}:{j} must be positive with sum < 1"
                    )
                s = block.sum()
                u[i] = logit(s)
                rest = s
                for k in range(j - i - 1):
                    frac = block[k] / rest
                    u[i + 1 + k] = logit(np.clip(frac, _EPS, 1 - _EPS))
                    rest -= block[k]
        return u

    def to_constrained(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise ParameterError(f"expected {self.n} parameters, got {u.shape}")
        theta = np.empty_like(u)
        for kind, i, j in self._groups:
            if kind == FREE:
                theta[i] = u[i]
            elif kind == POSITIVE:
                theta[i] = np.exp(u[i])
            elif kind == UNIT:
                theta[i] = expit(u[i])
            else:
                s = expit(u[i])
                rest = s
                for k in range(j - i - 1):
                    frac = expit(u[i + 1 + k])
                    theta[i + k] = rest * frac
                    rest *= 1.0 - frac
                theta[j - 1] = rest
        return theta


@dataclass
class OptimResult:
    x: np.ndarray
    fun: float
    converged: bool
    restarts: int
    nfev: int


def _guarded(objective, space):
    def g(u):
        val = objective(space.to_constrained(u))
        return val if np.isfinite(val) else np.inf
    return g


def minimize(objective, start, space: ParamSpace, xatol: float = 1e-8,
             fatol: float = 1e-10, maxfev: int = 20000,
             simplex_step: float = 0.25) -> OptimResult:
    """Nelder-Mead minimization of ``objective`` over the constrained space.

    The initial simplex uses fixed absolute steps of ``simplex_step`` in the
    unconstrained coordinates.  Raises ``OptimizationError`` when the
    objective is non-finite on the whole initial simplex.
    """
    u0 = space.to_unconstrained(np.asarray(start, dtype=float))
    g = _guarded(objective, space)
    n = space.n
    simplex = np.tile(u0, (n + 1, 1))
    for i in range(n):
        simplex[i + 1, i] += simplex_step
    if not any(np.isfinite(g(v)) for v in simplex):
        raise OptimizationError("objective is non-finite on the initial simplex")
    res = sp_opt.minimize(
        g, u0, method="Nelder-Mead",
        options={
            "xatol": xatol, "fatol": fatol, "maxfev": maxfev,
            "adaptive": True, "initial_simplex": simplex,
        },
    )
    return OptimResult(
        x=space.to_constrained(res.x),
        fun=float(res.fun),
        converged=bool(res.success),
        restarts=1,
        nfev=int(res.nfev),
    )


def multi_start_minimize(objective, starts, space: ParamSpace, **opts) -> OptimResult:
    """Best result over independent Nelder-Mead runs from each start."""
    if len(starts) == 0:
        raise OptimizationError("at least one start point required")
    best = None
    failures = []
    total_fev = 0
    for s in starts:
        try:
            r = minimize(objective, s, space, **opts)
        except (OptimizationError, ParameterError) as exc:
            failures.append(str(exc))
            continue
        total_fev += r.nfev
        if best is None or r.fun < best.fun:
            best = r
    if best is None:
        raise OptimizationError(
            f"all {len(starts)} starts failed: {failures[:3]}"
        )
    best.restarts = len(starts)
    best.nfev = total_fev
    return best


def jittered_starts(base, space: ParamSpace, n_extra: int, rng: np.random.Generator,
                    scale: float = 0.5):
    """The base start plus ``n_extra`` log-space (unconstrained) jitters."""
    u0 = space.to_unconstrained(np.asarray(base, dtype=float))
    starts = [np.asarray(base, dtype=float)]
    for _ in range(n_extra):
        starts.append(space.to_constrained(u0 + scale * rng.standard_normal(space.n)))
    return starts
