"""Exact compacton profiles ``f(y)``, ``y = x - c t``.

Every supported solution is a patched weak solution: a positive hump on
``|y| <= y_half`` with its maximum at ``y = 0`` and zero outside.  Five
constructions are available:

``closed_sin2``
    ``l=3, p=1, m=2``: ``f = 3c cos^2(y / (2 sqrt 6))``.
``closed_cn2``
    ``l=4, p=1, m=2``: ``f = A cn^2(beta y, k^2 = 1/2)``.
``hyperelliptic``
    ``f = A Z(beta s)**a`` with ``(Z')**m = 1 - Z**(2 tau)`` where ``s`` is the
    distance from the edge of the support.
``inc_beta_l3p1``, ``inc_beta_l4p1``
    ``l=3, p=1`` and ``l=4, p=1`` for any even ``m`` through the incomplete-beta
    form of ``y(f)``, inverted numerically.
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, TextIO, Tuple

import numpy as np

from .errors import (
    BeyondSupport,
    DomainError,
    FamilyMismatch,
    InadmissibleParams,
    UnsupportedFamily,
)
from .numerics import invert_monotone
from .params import ModelParams, classify
from .specfun import beta_fn, ellipk, gauss_2f1, inc_beta, jacobi_sn_cn_dn, ln_gamma

_EPS = np.finfo(float).eps
_CN2_MODULUS = math.sqrt(0.5)


class ProfileFamily(str, enum.Enum):
    CLOSED_SIN2 = "closed_sin2"
    CLOSED_CN2 = "closed_cn2"
    HYPERELLIPTIC = "hyperelliptic"
    INC_BETA_L3P1 = "inc_beta_l3p1"
    INC_BETA_L4P1 = "inc_beta_l4p1"


def _is(x: float, value: float) -> bool:
    return abs(x - value) <= 1e-12


def applicable_families(params: ModelParams) -> List[ProfileFamily]:
    l, p, m = params.l, params.p, params.m
    out = []
    if m == 2 and _is(l, 3) and _is(p, 1):
        out.append(ProfileFamily.CLOSED_SIN2)
    if m == 2 and _is(l, 4) and _is(p, 1):
        out.append(ProfileFamily.CLOSED_CN2)
    if classify(params).compacton_admissible and m + p > 2:
        out.append(ProfileFamily.HYPERELLIPTIC)
    if _is(l, 3) and _is(p, 1):
        out.append(ProfileFamily.INC_BETA_L3P1)
    if _is(l, 4) and _is(p, 1):
        out.append(ProfileFamily.INC_BETA_L4P1)
    return out


def default_family(params: ModelParams) -> ProfileFamily:
    """Closed form when one exists, otherwise the hyperelliptic construction."""
    fams = applicable_families(params)
    if not fams:
        raise InadmissibleParams(f"no compacton family for l={params.l}, p={params.p}, m={params.m}")
    return fams[0]


def _check(params: ModelParams, family: ProfileFamily) -> ProfileFamily:
    try:
        family = ProfileFamily(family)
    except ValueError:
        raise UnsupportedFamily(f"unknown profile family {family!r}") from None
    if not params.uses_real_alpha:
        raise InadmissibleParams("profiles assume alpha fixed by -alpha (m-1) i^m = 1")
    if p_too_large(params):
        raise InadmissibleParams(f"p={params.p} > 2 gives an unbounded edge derivative")
    if family not in applicable_families(params):
        raise InadmissibleParams(
            f"family {family.value} does not apply to l={params.l}, p={params.p}, m={params.m}"
        )
    return family


def p_too_large(params: ModelParams) -> bool:
    return params.p > 2.0


def hyperelliptic_params(params: ModelParams) -> Tuple[float, float, float, float]:
    """Return ``(a, tau, A, beta)`` of the ansatz ``f = A Z(beta y)**a``."""
    l, p, m, c = params.l, params.p, params.m, params.c
    if not classify(params).compacton_admissible or not m + p > 2:
        raise InadmissibleParams(
            f"hyperelliptic ansatz needs p <= 2, p <= l and m + p > 2 (l={l}, p={p}, m={m})"
        )
    a = m / (m + p - 2.0)
    tau = m * (l - 2.0) / (2.0 * (m + p - 2.0))
    k = c * l * (l - 1.0) / 2.0
    amp = k ** (1.0 / (l - 2.0))
    beta = k ** ((l - p - m) / (m * (l - 2.0))) / (a * (l * (l - 1.0)) ** (1.0 / m))
    return a, tau, amp, beta


def half_width(tau: float, m: int) -> float:
    """``int_0^1 (1 - x**(2 tau))**(-1/m) dx`` via Gauss's summation theorem."""
    b = 1.0 / (2.0 * tau)
    return math.exp(ln_gamma(1.0 + b) + ln_gamma(1.0 - 1.0 / m) - ln_gamma(1.0 + b - 1.0 / m))


def y_of_z(tau: float, m: int, z):
    """Forward map ``y(Z) = Z 2F1(1/m, 1/(2 tau); 1 + 1/(2 tau); Z**(2 tau))``."""
    z = np.asarray(z, dtype=float)
    b = 1.0 / (2.0 * tau)
    out = z * gauss_2f1(1.0 / m, b, 1.0 + b, np.clip(z, 0.0, 1.0) ** (2.0 * tau))
    return float(out) if out.ndim == 0 else out


def _one_minus_pow(z: np.ndarray, power: float) -> np.ndarray:
    # 1 - z**power without cancellation for z near 1
    with np.errstate(divide="ignore"):
        return -np.expm1(power * np.log(z))


def z_of_y(tau: float, m: int, y, tol: float = 1e-14):
    """Invert ``y(Z)`` on ``0 <= y <= half_width(tau, m)``.

    Safeguarded Newton iteration using ``dy/dZ = (1 - Z**(2 tau))**(-1/m)``.
    """
    scalar = np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    top = half_width(tau, m)
    if np.any(y < 0.0) or np.any(y > top * (1.0 + 8 * _EPS)):
        raise BeyondSupport(f"y must lie in [0, {top}]")
    y = np.minimum(y, top)
    z = y / top
    lo = np.zeros_like(y)
    hi = np.ones_like(y)
    inner = (y > 0.0) & (y < top)
    for _ in range(200):
        if not np.any(inner):
            break
        resid = y_of_z(tau, m, z[inner]) - y[inner]
        zi = z[inner]
        lo_i = np.where(resid <= 0.0, zi, lo[inner])
        hi_i = np.where(resid >= 0.0, zi, hi[inner])
        slope_inv = _one_minus_pow(zi, 2.0 * tau) ** (1.0 / m)
        step = zi - resid * slope_inv
        bad = ~((step > lo_i) & (step < hi_i))
        new = np.where(bad, 0.5 * (lo_i + hi_i), step)
        lo[inner], hi[inner] = lo_i, hi_i
        z[inner] = new
        settled = (np.abs(new - zi) <= 2 * _EPS * np.maximum(new, 1e-300)) | (np.abs(resid) <= tol * _EPS)
        idx = np.flatnonzero(inner)
        inner[idx[settled]] = False
    z[y == 0.0] = 0.0
    z[y == top] = 1.0
    return float(z[0]) if scalar else z


def _inc_beta_setup(params: ModelParams) -> Tuple[float, float, float]:
    m, c = params.m, params.c
    if _is(params.l, 3) and _is(params.p, 1):
        coef = 2.0 ** (1.0 / m) * 3.0 ** ((m - 1.0) / m) * c ** ((m - 2.0) / m)
        return coef, (m - 1.0) / m, (m - 1.0) / m
    if _is(params.l, 4) and _is(params.p, 1):
        coef = 1.5 ** ((m - 1.0) / (2.0 * m)) * c ** ((m - 3.0) / (2.0 * m))
        return coef, (m - 1.0) / (2.0 * m), (m - 1.0) / m
    raise FamilyMismatch(f"incomplete-beta forms exist for (l, p) = (3, 1) and (4, 1), not ({params.l}, {params.p})")


def _inc_beta_arg(params: ModelParams, f):
    # argument of B_x and its first two derivatives in f
    c = params.c
    if _is(params.l, 3):
        return f / (3.0 * c), 1.0 / (3.0 * c) + 0.0 * f, 0.0 * f
    return f * f / (6.0 * c), f / (3.0 * c), 1.0 / (3.0 * c) + 0.0 * f


def _inc_beta_amplitude(params: ModelParams) -> float:
    if _is(params.l, 3):
        return 3.0 * params.c
    return math.sqrt(6.0 * params.c)


def inc_beta_forward(params: ModelParams, f_val: float) -> float:
    """Distance ``x - c t`` from the edge of the support at which ``f = f_val``."""
    coef, a, b = _inc_beta_setup(params)
    amp = _inc_beta_amplitude(params)
    if not (0.0 <= f_val <= amp * (1.0 + 8 * _EPS)):
        raise DomainError(f"f_val must lie in [0, {amp}]")
    g = min(_inc_beta_arg(params, float(f_val))[0], 1.0)
    return coef * inc_beta(g, a, b)


@dataclass(frozen=True, eq=False)
class CompactonProfile:
    """A sampled compacton with the constants of its construction.

    ``family`` is ``None`` for profiles assembled directly from arrays (test
    functions, controls); those are evaluated by interpolating the grid.
    ``beta_w`` is the width parameter native to the family: the argument
    scale of ``cn`` for ``closed_cn2`` and of ``Z`` otherwise.
    """

    params: ModelParams
    family: Optional[ProfileFamily]
    A: float
    beta_w: float
    a_exp: float
    tau: float
    y_half: float
    y: np.ndarray
    f: np.ndarray
    fprime: np.ndarray
    fsecond: Optional[np.ndarray] = None

    def evaluate(self, y) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``f, f', f''`` at arbitrary points, zero outside the support."""
        y = np.asarray(y, dtype=float)
        yabs = np.abs(y)
        inside = yabs <= self.y_half
        f = np.zeros_like(y)
        fp = np.zeros_like(y)
        fpp = np.zeros_like(y)
        if np.any(inside):
            ya = yabs[inside]
            hf, hfp, hfpp = self.half_values(ya, self.y_half - ya)
            sign = np.where(y[inside] < 0.0, -1.0, 1.0)
            f[inside], fp[inside], fpp[inside] = hf, sign * hfp, hfpp
        return f, fp, fpp

    def half_values(self, y_abs: np.ndarray, s: np.ndarray):
        """Values on the right half; ``s = y_half - y_abs`` is passed separately so
        callers can supply it without cancellation near the edge."""
        if self.family is None:
            yy = self.y
            f = np.interp(y_abs, yy, self.f)
            fp = np.interp(y_abs, yy, self.fprime)
            fs = self.fsecond if self.fsecond is not None else np.gradient(self.fprime, yy)
            return f, fp, np.interp(y_abs, yy, fs)
        return _HALF_EVALUATORS[self.family](self, np.asarray(y_abs, float), np.asarray(s, float))

    @property
    def n_half(self) -> int:
        return (self.y.size - 1) // 2

    def header(self) -> str:
        p = self.params
        fam = self.family.value if self.family is not None else "custom"
        return (
            f"# family={fam} l={p.l!r} p={p.p!r} m={p.m} c={p.c!r} A={self.A!r} "
            f"beta_w={self.beta_w!r} y_half={self.y_half!r}"
        )

    def to_csv(self, fh: Optional[TextIO] = None) -> str:
        """CSV with columns ``y, f, fprime``; hyperelliptic profiles add the
        scaled coordinate ``z`` and ``Z`` itself."""
        out = fh if fh is not None else io.StringIO()
        out.write(self.header() + "\n")
        cols = [self.y, self.f, self.fprime]
        names = ["y", "f", "fprime"]
        if self.family is ProfileFamily.HYPERELLIPTIC:
            with np.errstate(divide="ignore"):
                zz = np.where(self.f > 0, (self.f / self.A) ** (1.0 / self.a_exp), 0.0)
            cols += [self.beta_w * self.y, zz]
            names += ["z", "Z"]
        out.write(",".join(names) + "\n")
        for row in zip(*cols):
            out.write(",".join(format(float(v), ".17g") for v in row) + "\n")
        return out.getvalue() if fh is None else ""


def _half_sin2(prof: CompactonProfile, y_abs, s):
    c = prof.params.c
    k = prof.beta_w
    f = 3.0 * c * np.sin(k * s) ** 2
    fp = -3.0 * c * k * np.sin(2.0 * k * s)
    fpp = 6.0 * c * k * k * np.cos(2.0 * k * s)
    return f, fp, fpp


def _half_cn2(prof: CompactonProfile, y_abs, s):
    amp, beta = prof.A, prof.beta_w
    sn, cn, dn = jacobi_sn_cn_dn(beta * y_abs, _CN2_MODULUS)
    f = amp * cn * cn
    fp = -2.0 * amp * beta * cn * sn * dn
    fpp = -2.0 * amp * beta * beta * (dn * dn * (cn * cn - sn * sn) - 0.5 * sn * sn * cn * cn)
    return f, fp, fpp


def _half_hyper(prof: CompactonProfile, y_abs, s):
    m = prof.params.m
    a, tau, amp, beta = prof.a_exp, prof.tau, prof.A, prof.beta_w
    zmax = half_width(tau, m)
    zz = z_of_y(tau, m, np.clip(beta * s, 0.0, zmax))
    w_m = np.clip(_one_minus_pow(np.maximum(zz, 1e-300), 2.0 * tau), 0.0, 1.0)
    w_m = np.where(zz == 0.0, 1.0, w_m)
    w = w_m ** (1.0 / m)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = amp * zz**a
        fp = -amp * a * beta * zz ** (a - 1.0) * w
        fpp = amp * a * beta * beta * (
            (a - 1.0) * zz ** (a - 2.0) * w * w
            - (2.0 * tau / m) * zz ** (a + 2.0 * tau - 2.0) * w ** (2.0 - m)
        )
    return f, fp, fpp


def _half_inc_beta(prof: CompactonProfile, y_abs, s):
    params = prof.params
    coef, ea, eb = _inc_beta_setup(params)
    amp = prof.A
    s = np.atleast_1d(np.clip(s, 0.0, prof.y_half))
    f = np.empty_like(s)
    # leading edge behaviour B_g(a, b) ~ g**a / a, exact to rounding once g < 1e-17
    g_edge = (ea * s / coef) ** (1.0 / ea)
    for i, target in enumerate(s):
        if target >= prof.y_half:
            f[i] = amp
        elif g_edge[i] < 1e-17:
            f[i] = 3.0 * params.c * g_edge[i] if _is(params.l, 3) else math.sqrt(6.0 * params.c * g_edge[i])
        else:
            f[i] = invert_monotone(lambda v: inc_beta_forward(params, v), float(target), 0.0, amp)
    g, g1, g2 = _inc_beta_arg(params, f)
    with np.errstate(divide="ignore", invalid="ignore"):
        dy_df = coef * g1 * g ** (ea - 1.0) * (1.0 - g) ** (eb - 1.0)
        dlog = g2 / g1 + (ea - 1.0) * g1 / g - (eb - 1.0) * g1 / (1.0 - g)
        fp = -1.0 / dy_df
        fpp = -dlog / dy_df**2
    return f, fp, fpp


_HALF_EVALUATORS: Dict[ProfileFamily, Callable] = {
    ProfileFamily.CLOSED_SIN2: _half_sin2,
    ProfileFamily.CLOSED_CN2: _half_cn2,
    ProfileFamily.HYPERELLIPTIC: _half_hyper,
    ProfileFamily.INC_BETA_L3P1: _half_inc_beta,
    ProfileFamily.INC_BETA_L4P1: _half_inc_beta,
}


def profile_constants(params: ModelParams, family) -> Tuple[float, float, float, float, float]:
    """``(A, beta_w, a_exp, tau, y_half)`` of a family without sampling it."""
    family = _check(params, family)
    a, tau, amp, beta = hyperelliptic_params(params)
    if family is ProfileFamily.CLOSED_SIN2:
        k = 1.0 / (2.0 * math.sqrt(6.0))
        return 3.0 * params.c, k, a, tau, math.pi / (2.0 * k)
    if family is ProfileFamily.CLOSED_CN2:
        beta_cn = (params.c / 96.0) ** 0.25
        return math.sqrt(6.0 * params.c), beta_cn, a, tau, ellipk(_CN2_MODULUS) / beta_cn
    if family is ProfileFamily.HYPERELLIPTIC:
        return amp, beta, a, tau, half_width(tau, params.m) / beta
    coef, ea, eb = _inc_beta_setup(params)
    return _inc_beta_amplitude(params), beta, a, tau, coef * beta_fn(ea, eb)


def build_profile(params: ModelParams, family=None, n_grid: int = 256) -> CompactonProfile:
    """Sample a compacton on ``2 n_grid + 1`` uniform points spanning its support."""
    if n_grid < 64:
        raise ValueError("n_grid must be at least 64")
    family = default_family(params) if family is None else ProfileFamily(family)
    amp, beta_w, a, tau, y_half = profile_constants(params, family)
    shell = CompactonProfile(params, family, amp, beta_w, a, tau, y_half,
                             np.empty(0), np.empty(0), np.empty(0))
    y_right = np.linspace(0.0, y_half, n_grid + 1)
    s_right = y_half - y_right
    s_right[-1] = 0.0
    f_r, fp_r, fpp_r = shell.half_values(y_right, s_right)
    f_r = np.asarray(f_r, dtype=float)
    f_r[-1] = 0.0
    # the edge derivative is a one-sided limit; keep it finite
    fp_r = np.where(np.isfinite(fp_r), fp_r, 0.0)
    fp_r[0] = 0.0
    y = np.concatenate((-y_right[:0:-1], y_right))
    f = np.concatenate((f_r[:0:-1], f_r))
    fp = np.concatenate((-fp_r[:0:-1], fp_r))
    fpp = np.concatenate((fpp_r[:0:-1], fpp_r))
    return CompactonProfile(params, family, amp, beta_w, a, tau, y_half, y, f, fp, fpp)


def custom_profile(params: ModelParams, y: np.ndarray, f: np.ndarray, fprime: Optional[np.ndarray] = None) -> CompactonProfile:
    """Wrap arbitrary samples (symmetric grid assumed) as a profile."""
    y = np.asarray(y, dtype=float)
    f = np.asarray(f, dtype=float)
    fp = np.gradient(f, y, edge_order=2) if fprime is None else np.asarray(fprime, dtype=float)
    return CompactonProfile(params, None, float(np.max(f)), math.nan, math.nan, math.nan,
                            float(np.max(np.abs(y))), y, f, fp, np.gradient(fp, y, edge_order=2))


def first_integral_residual(profile: CompactonProfile) -> float:
    """Max of ``|(c/2) f^(2-p) - f^(l-p)/(l(l-1)) - (f')^m|`` on the open support,
    relative to ``(c/2) A^(2-p)``."""
    p = profile.params
    inside = profile.f > 0.0
    if not np.any(inside) or profile.A <= 0.0:
        return 0.0
    f = profile.f[inside]
    fp = profile.fprime[inside]
    resid = 0.5 * p.c * f ** (2.0 - p.p) - f ** (p.l - p.p) / (p.l * (p.l - 1.0)) - fp**p.m
    return float(np.max(np.abs(resid)) / (0.5 * p.c * profile.A ** (2.0 - p.p)))


def weak_solution_check(profile: CompactonProfile, rel_tol: float = 0.05) -> bool:
    """True when ``f`` vanishes continuously at both edges and the flux
    ``(f')^m f^p`` decays towards them."""
    p = profile.params
    scale = max(float(np.max(np.abs(profile.f))), 1e-300)
    if abs(profile.f[0]) > 1e-12 * scale or abs(profile.f[-1]) > 1e-12 * scale:
        return False
    flux = profile.fprime**p.m * np.abs(profile.f) ** p.p
    peak = float(np.max(np.abs(flux)))
    if not math.isfinite(peak):
        return False
    if peak == 0.0:
        return True
    for side in (flux[1:4], flux[-2:-5:-1]):
        # side[0] is the sample next to the edge
        mags = np.abs(side)
        if not (mags[0] <= mags[1] <= mags[2]):
            return False
        if mags[0] > rel_tol * peak:
            return False
    return True
