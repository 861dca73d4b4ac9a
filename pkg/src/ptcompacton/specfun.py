"""Special-function kernel: log-gamma, incomplete beta, 2F1 on [0, 1], Jacobi cn.

Only real arguments are supported.  The incomplete beta function is the
non-regularized ``B_x(a, b) = int_0^x t**(a-1) (1-t)**(b-1) dt``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .errors import (
    ConvergenceFailure,
    DomainError,
    GammaPole,
    ModulusOutOfRange,
    NonPositiveArgument,
)

ArrayLike = Union[float, np.ndarray]

_EPS = np.finfo(float).eps
_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
# B_2k / (2k (2k-1)) for k = 1..8
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
_STIRLING_MIN = 12.0


@dataclass(frozen=True)
class SpecFunResult:
    value: float
    est_abs_error: float


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``.

    Upward recurrence to ``x >= 12`` followed by the Stirling series.
    """
    x = float(x)
    if not x > 0.0:
        raise NonPositiveArgument(f"ln_gamma needs x > 0, got {x}")
    if x == 1.0 or x == 2.0:
        return 0.0
    shift = 0.0
    if x < _STIRLING_MIN:
        prod = 1.0
        while x < _STIRLING_MIN:
            prod *= x
            x += 1.0
        shift = math.log(prod)
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv
    for coef in _STIRLING:
        series += coef * power
        power *= inv2
    return (x - 0.5) * math.log(x) - x + _LN_SQRT_2PI + series - shift


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def gamma_fn(x: float) -> float:
    """Gamma function on the real line, poles excluded."""
    if _is_nonpositive_integer(x):
        raise GammaPole(f"gamma has a pole at {x}")
    if x > 0.0:
        return math.exp(ln_gamma(x))
    # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return math.pi / (math.sin(math.pi * x) * math.exp(ln_gamma(1.0 - x)))


def rgamma(x: float) -> float:
    """``1 / Gamma(x)``, zero at the poles."""
    if _is_nonpositive_integer(x):
        return 0.0
    return 1.0 / gamma_fn(x)


def beta_fn(a: float, b: float) -> float:
    """Complete beta function for positive arguments."""
    return math.exp(ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))


def _beta_cf(a: float, b: float, x: float, max_iter: int = 5000) -> Tuple[float, float]:
    # modified Lentz evaluation of the continued fraction for B_x(a,b)
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for k in range(1, max_iter + 1):
        k2 = 2 * k
        aa = k * (b - k) * x / ((qam + k2) * (a + k2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + k) * (qab + k) * x / ((a + k2) * (qap + k2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 4.0 * _EPS:
            return h, (abs(delta - 1.0) + k * _EPS) * abs(h)
    raise ConvergenceFailure(f"incomplete beta continued fraction stalled (a={a}, b={b}, x={x})")


def inc_beta_result(x: float, a: float, b: float) -> SpecFunResult:
    x, a, b = float(x), float(a), float(b)
    if not (0.0 <= x <= 1.0) or not (a > 0.0 and b > 0.0):
        raise DomainError(f"inc_beta needs 0<=x<=1, a>0, b>0; got x={x}, a={a}, b={b}")
    if x == 0.0:
        return SpecFunResult(0.0, 0.0)
    complete = beta_fn(a, b)
    if x == 1.0:
        return SpecFunResult(complete, 4.0 * _EPS * complete)
    if x > (a + 1.0) / (a + b + 2.0):
        tail = inc_beta_result(1.0 - x, b, a)
        return SpecFunResult(complete - tail.value, tail.est_abs_error + 4.0 * _EPS * complete)
    front = math.exp(a * math.log(x) + b * math.log1p(-x)) / a
    cf, cf_err = _beta_cf(a, b, x)
    value = front * cf
    return SpecFunResult(value, front * cf_err + 8.0 * _EPS * value)


def inc_beta(x: float, a: float, b: float) -> float:
    """Non-regularized incomplete beta function ``B_x(a, b)``."""
    return inc_beta_result(x, a, b).value


def _hyp_series(a: float, b: float, c: float, z: np.ndarray, max_terms: int) -> Tuple[np.ndarray, np.ndarray]:
    total = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(max_terms):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1.0))) * z
        total = total + term
        if np.all(np.abs(term) <= _EPS * np.abs(total)):
            err = np.abs(term) + (k + 1) * _EPS * np.abs(total)
            return total, err
    raise ConvergenceFailure(f"2F1({a},{b};{c};z) series did not converge in {max_terms} terms")


def gauss_2f1_with_error(
    a: float, b: float, cc: float, z: ArrayLike, max_terms: int = 20000
) -> Tuple[ArrayLike, ArrayLike]:
    """Vectorized ``2F1(a, b; cc; z)`` for ``z`` in [0, 1], with error estimates."""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any((z < 0.0) | (z > 1.0)) or np.any(~np.isfinite(z)):
        raise DomainError("gauss_2f1 is implemented for 0 <= z <= 1 only")
    if _is_nonpositive_integer(cc):
        raise GammaPole(f"2F1 lower parameter {cc} is a non-positive integer")
    out = np.empty_like(z)
    err = np.empty_like(z)
    s = cc - a - b

    at_one = z == 1.0
    if np.any(at_one):
        if not s > 0.0:
            raise DomainError(f"2F1 diverges at z=1 when cc-a-b={s} <= 0")
        val = gamma_fn(cc) * gamma_fn(s) * rgamma(cc - a) * rgamma(cc - b)
        out[at_one] = val
        err[at_one] = 16.0 * _EPS * abs(val)

    near = (z > 0.75) & ~at_one
    if np.any(near) and abs(s - round(s)) < 1e-12:
        # integer cc-a-b needs the logarithmic connection formula; fall back to the series
        near[:] = False
    low = ~at_one & ~near
    if np.any(low):
        out[low], err[low] = _hyp_series(a, b, cc, z[low], max_terms)
    if np.any(near):
        w = 1.0 - z[near]
        g1 = gamma_fn(cc) * gamma_fn(s) * rgamma(cc - a) * rgamma(cc - b)
        g2 = gamma_fn(cc) * gamma_fn(-s) * rgamma(a) * rgamma(b)
        f1, e1 = _hyp_series(a, b, 1.0 - s, w, max_terms)
        f2, e2 = _hyp_series(cc - a, cc - b, 1.0 + s, w, max_terms)
        ws = w ** s
        out[near] = g1 * f1 + g2 * ws * f2
        err[near] = (
            abs(g1) * e1
            + abs(g2) * ws * e2
            + 8.0 * _EPS * (abs(g1 * f1) + abs(g2 * ws * f2))
        )
    if scalar:
        return float(out[0]), float(err[0])
    return out, err


def gauss_2f1(a: float, b: float, cc: float, z: ArrayLike) -> ArrayLike:
    """Gauss hypergeometric ``2F1(a, b; cc; z)`` for real ``z`` in [0, 1].

    Power series for ``z <= 0.75``; the ``z -> 1 - z`` connection formula
    above that; Gauss's summation theorem at ``z = 1``.
    """
    return gauss_2f1_with_error(a, b, cc, z)[0]


def gauss_2f1_result(a: float, b: float, cc: float, z: float) -> SpecFunResult:
    value, err = gauss_2f1_with_error(a, b, cc, float(z))
    return SpecFunResult(value, err)


def _agm_ladder(k: float) -> Tuple[list, list]:
    a, b, c = 1.0, math.sqrt((1.0 - k) * (1.0 + k)), k
    aa, cs = [a], [c]
    while abs(c) > _EPS * a and len(aa) < 64:
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        aa.append(a)
        cs.append(c)
    return aa, cs


def _check_modulus(k: float) -> float:
    k = float(k)
    if not (0.0 <= k * k < 1.0):
        raise ModulusOutOfRange(f"need k**2 < 1, got k={k}")
    return abs(k)


def ellipk(k: float) -> float:
    """Complete elliptic integral of the first kind, modulus ``k``."""
    k = _check_modulus(k)
    aa, _ = _agm_ladder(k)
    return math.pi / (2.0 * aa[-1])


def jacobi_sn_cn_dn(u: ArrayLike, k: float) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """Jacobi ``sn, cn, dn`` with modulus ``k`` via descending Landen / AGM."""
    k = _check_modulus(k)
    u_arr = np.asarray(u, dtype=float)
    aa, cs = _agm_ladder(k)
    n = len(aa) - 1
    phi = (2.0**n) * aa[n] * u_arr
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(cs[j] / aa[j] * np.sin(phi)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = np.sqrt(1.0 - (k * sn) ** 2)
    if np.ndim(u) == 0:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn


def jacobi_cn(u: ArrayLike, k: float) -> ArrayLike:
    """Jacobi elliptic ``cn(u, k)`` (``k`` is the modulus, not the parameter)."""
    return jacobi_sn_cn_dn(u, k)[1]
