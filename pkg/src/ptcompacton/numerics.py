"""Quadrature, monotone inversion and derivative-free minimization.

Integrands are called with numpy arrays of abscissae; a callable that only
accepts scalars is evaluated point by point instead.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy import optimize

from .errors import MaxIterations, NotUnimodal, TargetOutOfBracket, ToleranceNotReached

_HALF_PI = 0.5 * math.pi
# keeps cosh(s)**2 finite in the tanh-sinh weights
_S_MAX = 300.0
_T_MAX = math.asinh(_S_MAX / _HALF_PI)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    est_abs_error: float
    evaluations: int


@dataclass(frozen=True)
class MinimizeResult:
    argmin: np.ndarray
    fmin: float
    iterations: int
    converged: bool
    flags: Tuple[str, ...] = field(default=())

    @property
    def x(self) -> float:
        """Scalar argmin of a one-dimensional problem."""
        return float(self.argmin[0])


def _call(f: Callable, *args: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(*args), dtype=float)
        if out.shape == args[0].shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([f(*(a[i] for a in args)) for i in range(args[0].size)], dtype=float)


def _ts_nodes(t: np.ndarray, half: float) -> Tuple[np.ndarray, np.ndarray]:
    # distance of each node from its nearer endpoint, and the weight
    s = _HALF_PI * np.sinh(np.abs(t))
    cs = np.cosh(s)
    dist = half * np.exp(-s) / cs
    w = half * _HALF_PI * np.cosh(t) / (cs * cs)
    return dist, w


def integrate(
    f: Callable,
    a: float,
    b: float,
    tol: float = 1e-12,
    *,
    complement: bool = False,
    max_level: int = 12,
    max_evals: int = 200_000,
) -> QuadratureResult:
    """Tanh-sinh quadrature of ``f`` over the finite interval ``[a, b]``.

    Algebraic endpoint singularities of order above -1 converge at the
    double-exponential rate.  With ``complement=True`` the integrand is called
    as ``f(x, x - a, b - x)`` where the two distances are exact near the ends,
    which is what singular factors such as ``(1 - x)**(-1/4)`` need.

    The absolute error estimate is the change between the last two levels.
    If ``tol`` is not reached a :class:`ToleranceNotReached` warning is
    emitted and the best value is returned.
    """
    a, b = float(a), float(b)
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)
    if a > b:
        if complement:
            raise ValueError("complement mode needs a < b")
        res = integrate(f, b, a, tol, max_level=max_level, max_evals=max_evals)
        return QuadratureResult(-res.value, res.est_abs_error, res.evaluations)
    half = 0.5 * (b - a)
    width = b - a

    def level_sum(t: np.ndarray) -> Tuple[float, int]:
        dist, w = _ts_nodes(t, half)
        keep = w > 0.0
        t, dist, w = t[keep], dist[keep], w[keep]
        right = t > 0.0
        x = np.where(right, b - dist, a + dist)
        if complement:
            da = np.where(right, width - dist, dist)
            db = np.where(right, dist, width - dist)
            vals = _call(f, x, da, db)
        else:
            vals = _call(f, x)
        # nodes that collapse onto an endpoint carry negligible weight
        collapsed = (x == a) | (x == b)
        vals = np.where(collapsed & ~np.isfinite(vals), 0.0, vals)
        return float(np.sum(w * vals)), int(t.size)

    h = 1.0
    k_max = int(_T_MAX / h)
    raw, evals = level_sum(np.arange(-k_max, k_max + 1, dtype=float) * h)
    estimate = h * raw
    err = math.inf
    for level in range(1, max_level + 1):
        h *= 0.5
        k = np.arange(1, 2 * int(_T_MAX / h) + 2, 2, dtype=float)
        k = k[k * h <= _T_MAX]
        t_new = np.concatenate((k * h, -k * h))
        part, n_new = level_sum(t_new)
        evals += n_new
        raw += part
        new_estimate = h * raw
        err = abs(new_estimate - estimate)
        estimate = new_estimate
        if not math.isfinite(estimate):
            break
        if level >= 3 and err <= tol:
            return QuadratureResult(estimate, err, evals)
        if evals >= max_evals:
            break
    warnings.warn(
        f"tanh-sinh stopped with error estimate {err:.3g} > tol {tol:.3g}",
        ToleranceNotReached,
        stacklevel=2,
    )
    return QuadratureResult(estimate, err, evals)


def integrate_semi_infinite(
    f: Callable,
    a: float = 0.0,
    tol: float = 1e-12,
    *,
    max_level: int = 12,
    cutoff: float = 1e-16,
) -> QuadratureResult:
    """Exp-sinh quadrature of ``f`` over ``[a, inf)``.

    The far tail is truncated once the weighted integrand drops below
    ``cutoff`` times its peak.  ``f`` receives the distance ``x - a``, which is
    exact near ``a``.
    """
    t_lo = math.asinh(700.0 / _HALF_PI)
    t_hi = math.asinh(600.0 / _HALF_PI)

    def level_terms(t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        e = np.exp(_HALF_PI * np.sinh(t))
        w = _HALF_PI * np.cosh(t) * e
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            vals = _call(f, e)
        return vals, w

    peak = 0.0
    h = 1.0
    raw = 0.0
    estimate = math.nan
    err = math.inf
    evals = 0
    for level in range(0, max_level + 1):
        if level == 0:
            t = np.arange(-math.floor(t_lo), math.floor(t_hi) + 1, dtype=float)
        else:
            h *= 0.5
            k = np.arange(1, 2 * int(max(t_lo, t_hi) / h) + 2, 2, dtype=float)
            t = np.concatenate((k * h, -k * h))
            t = t[(t >= -t_lo) & (t <= t_hi)]
        vals, w = level_terms(t)
        evals += t.size
        with np.errstate(over="ignore", invalid="ignore"):
            terms = w * vals
        finite = np.isfinite(terms)
        if np.any(finite):
            peak = max(peak, float(np.max(np.abs(terms[finite]))))
        negligible = (np.abs(np.where(finite, terms, 0.0)) <= cutoff * peak) & (t > 0.0)
        terms = np.where(negligible, 0.0, terms)
        raw += float(np.sum(terms))
        new_estimate = h * raw
        if level > 0:
            err = abs(new_estimate - estimate)
        estimate = new_estimate
        if level >= 3 and err <= tol:
            return QuadratureResult(estimate, err, evals)
    warnings.warn(
        f"exp-sinh stopped with error estimate {err:.3g} > tol {tol:.3g}",
        ToleranceNotReached,
        stacklevel=2,
    )
    return QuadratureResult(estimate, err, evals)


def invert_monotone(
    g: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    tol: float = 1e-12,
) -> float:
    """Solve ``g(x) = target`` for increasing ``g`` on ``[lo, hi]``."""
    g_lo, g_hi = g(lo), g(hi)
    if not (g_lo <= target <= g_hi):
        raise TargetOutOfBracket(
            f"target {target!r} outside [{g_lo!r}, {g_hi!r}] on [{lo!r}, {hi!r}]"
        )
    if target == g_lo:
        return float(lo)
    if target == g_hi:
        return float(hi)
    x = optimize.brentq(
        lambda s: g(s) - target, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500
    )
    return float(x)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _count_basins(fs: np.ndarray) -> int:
    # strict local minima of the scan separated by a higher point
    n = fs.size
    minima = []
    for i in range(n):
        left = fs[i - 1] if i > 0 else math.inf
        right = fs[i + 1] if i < n - 1 else math.inf
        if fs[i] < left and fs[i] <= right:
            minima.append(i)
    return len(minima)


def minimize_1d(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-8,
    *,
    n_scan: int = 32,
    max_iter: int = 500,
) -> MinimizeResult:
    """Golden-section minimization on ``[lo, hi]`` after a coarse pre-scan.

    Non-finite objective values count as ``+inf``.  Several separated basins
    in the scan trigger a :class:`NotUnimodal` warning and the best basin is
    refined; the result then carries the ``"not_unimodal"`` flag.
    """

    def safe(x: float) -> float:
        v = float(f(x))
        return v if math.isfinite(v) else math.inf

    xs = np.linspace(lo, hi, n_scan)
    fs = np.array([safe(x) for x in xs])
    if not np.any(np.isfinite(fs)):
        raise ValueError("objective is non-finite over the whole scan")
    flags = []
    if _count_basins(fs) > 1:
        flags.append("not_unimodal")
        warnings.warn("pre-scan found several basins; refining the best one", NotUnimodal, stacklevel=2)
    i = int(np.argmin(fs))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, n_scan - 1)]
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = safe(x1), safe(x2)
    it = 0
    while abs(b - a) > tol and it < max_iter:
        it += 1
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = safe(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = safe(x2)
    x = 0.5 * (a + b)
    fx = safe(x)
    # the scan point itself may beat the refined bracket at a domain edge
    if fs[i] < fx:
        x, fx = float(xs[i]), float(fs[i])
    converged = abs(b - a) <= tol
    return MinimizeResult(np.array([x]), fx, it, converged, tuple(flags))


def minimize_nd(
    f: Callable[[np.ndarray], float],
    x0: Sequence[float],
    tol: float = 1e-10,
    *,
    max_iter: int = 20_000,
) -> MinimizeResult:
    """Nelder-Mead simplex minimization; converged when the simplex is smaller than ``tol``."""
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 1 or x0.size > 3:
        raise ValueError("minimize_nd handles vectors of dimension 1 to 3")

    def safe(x: np.ndarray) -> float:
        v = float(f(x))
        return v if math.isfinite(v) else math.inf

    res = optimize.minimize(
        safe,
        x0,
        method="Nelder-Mead",
        options={"xatol": tol, "fatol": 1e-15, "maxiter": max_iter, "maxfev": 4 * max_iter},
    )
    converged = bool(res.success)
    flags = ()
    if not converged:
        flags = ("max_iterations",)
        warnings.warn(f"Nelder-Mead stopped after {res.nit} iterations", MaxIterations, stacklevel=2)
    x = np.asarray(res.x, dtype=float)
    return MinimizeResult(x, safe(x), int(res.nit), converged, flags)
