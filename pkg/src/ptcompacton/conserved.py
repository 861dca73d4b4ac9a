"""Mass, momentum and energy of compactons, analytic and by quadrature.

The energy is evaluated through the integrals

    I_n = int f**n dy,   J = int (f')**m f**p dy,

as ``H = J/(m-1) - I_l/(l(l-1))``.  For an exact profile the first
integrals tie all three to ``c I_2`` and ``H = P c / r``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson

from .errors import DegenerateScaling, GammaPole
from .numerics import integrate, invert_monotone
from .params import ModelParams, scaling_exponents
from .profile import CompactonProfile, ProfileFamily, build_profile, hyperelliptic_params
from .specfun import ln_gamma

QUAD_TOL = 1e-13


@dataclass(frozen=True)
class ConservedSet:
    M: float
    P: float
    E: float
    source: str  # "analytic" or "quadrature"

    def to_dict(self) -> dict:
        return {"M": self.M, "P": self.P, "E": self.E, "source": self.source}


@dataclass(frozen=True)
class IntegralSet:
    I2: float
    Il: float
    Jmp: float
    I1: float = math.nan

    def to_dict(self) -> dict:
        return {"I1": self.I1, "I2": self.I2, "Il": self.Il, "Jmp": self.Jmp}


def energy_factor(params: ModelParams) -> float:
    """``(l - p - 3m) / (l(m-1) + m + p)``, so that ``H = factor * P c``.

    Equal to ``1/r``; unlike ``r`` it stays finite on the marginal line.
    """
    l, p, m = params.l, params.p, params.m
    return (l - p - 3 * m) / (l * (m - 1) + m + p)


def _gamma_ratio(num: Sequence[float], den: Sequence[float]) -> float:
    for x in num:
        if x <= 0 and x == math.floor(x):
            raise GammaPole(f"Gamma argument {x} is a pole")
    return math.exp(sum(ln_gamma(x) for x in num) - sum(ln_gamma(x) for x in den))


def conserved_analytic(params: ModelParams) -> ConservedSet:
    """Closed Gamma-function forms of ``M`` and ``P`` for the hyperelliptic profile."""
    if params.m + params.p == 2:
        raise GammaPole("m + p = 2 sends the Z-power to infinity")
    a, tau, amp, beta = hyperelliptic_params(params)
    m = params.m
    g0 = (m - 1.0) / m
    mass = amp / (beta * tau) * _gamma_ratio(
        (g0, (a + 1.0) / (2.0 * tau)), (1.0 - 1.0 / m + (1.0 + a) / (2.0 * tau),)
    )
    mom = amp * amp / (2.0 * beta * tau) * _gamma_ratio(
        (g0, (2.0 * a + 1.0) / (2.0 * tau)), (1.0 - 1.0 / m + (1.0 + 2.0 * a) / (2.0 * tau),)
    )
    return ConservedSet(mass, mom, energy_factor(params) * params.c * mom, "analytic")


class _EdgeSampler:
    """Memoized half-profile values at quadrature nodes.

    Every integral over the half-support walks the same tanh-sinh nodes, so
    the (possibly expensive) profile evaluation is shared between them.
    """

    def __init__(self, profile: CompactonProfile):
        self.profile = profile
        self._cache: Dict[bytes, Tuple[np.ndarray, np.ndarray]] = {}

    def __call__(self, s: np.ndarray, y_abs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        key = s.tobytes()
        hit = self._cache.get(key)
        if hit is None:
            with np.errstate(all="ignore"):
                f, fp, _ = self.profile.half_values(y_abs, s)
            f = np.where(np.isfinite(f), np.maximum(f, 0.0), 0.0)
            fp = np.where(np.isfinite(fp), np.abs(fp), 0.0)
            hit = (f, fp)
            self._cache[key] = hit
        return hit

    def integral(self, g: Callable[[np.ndarray, np.ndarray], np.ndarray], scale: float) -> float:
        """``2 int_0^{y_half} g(f, |f'|) ds`` to a tolerance relative to ``scale``."""
        prof = self.profile

        def integrand(_x, da, db):
            f, fp = self(np.asarray(da, float), np.asarray(db, float))
            return g(f, fp)

        res = integrate(integrand, 0.0, prof.y_half, QUAD_TOL * max(scale, 1e-300), complement=True)
        return 2.0 * res.value


def _is_zero(profile: CompactonProfile) -> bool:
    return not np.any(profile.f != 0.0)


def _grid_integral(profile: CompactonProfile, vals: np.ndarray) -> float:
    return float(simpson(vals, x=profile.y))


def integral_set(profile: CompactonProfile) -> IntegralSet:
    """``I_1, I_2, I_l`` and ``J`` over the whole support.

    Exact families are integrated by tanh-sinh in the distance from the
    edge (half support, doubled); array-only profiles fall back to Simpson's
    rule on their grid.
    """
    p = profile.params
    if _is_zero(profile):
        return IntegralSet(0.0, 0.0, 0.0, 0.0)
    if profile.family is None:
        f = np.abs(profile.f)
        fp = profile.fprime
        return IntegralSet(
            _grid_integral(profile, f * f),
            _grid_integral(profile, f**p.l),
            _grid_integral(profile, fp**p.m * f**p.p),
            _grid_integral(profile, f),
        )
    amp, width = profile.A, profile.y_half
    slope = amp / width
    sampler = _EdgeSampler(profile)
    i1 = sampler.integral(lambda f, fp: f, amp * width)
    i2 = sampler.integral(lambda f, fp: f * f, amp**2 * width)
    il = sampler.integral(lambda f, fp: f**p.l, amp**p.l * width)
    jmp = sampler.integral(lambda f, fp: fp**p.m * f**p.p, slope**p.m * amp**p.p * width)
    return IntegralSet(i2, il, jmp, i1)


def hamiltonian(params: ModelParams, ints: IntegralSet) -> float:
    return ints.Jmp / (params.m - 1.0) - ints.Il / (params.l * (params.l - 1.0))


def conserved_quadrature(profile: CompactonProfile, ints: Optional[IntegralSet] = None) -> ConservedSet:
    ints = integral_set(profile) if ints is None else ints
    return ConservedSet(ints.I1, 0.5 * ints.I2, hamiltonian(profile.params, ints), "quadrature")


def check_relations(params: ModelParams, ints: IntegralSet) -> Dict[str, float]:
    """Relative residuals of the three integral identities of an exact profile:

    ``first_integral``: J = (c/2) I_2 - I_l/(l(l-1));
    ``gradient_term``: J = (l-2)(m-1) c I_2 / (2 D);
    ``potential_term``: I_l = l(l-1)(p+3m-2) c I_2 / (2 D),
    with ``D = p + m(l+1) - l``.  Each residual is scaled by ``c I_2``.
    """
    l, p, m, c = params.l, params.p, params.m, params.c
    scale = c * ints.I2
    if scale == 0.0:
        return {"first_integral": 0.0, "gradient_term": 0.0, "potential_term": 0.0}
    d = p + m * (l + 1.0) - l
    r_first = ints.Jmp - (0.5 * c * ints.I2 - ints.Il / (l * (l - 1.0)))
    r_grad = ints.Jmp - (l - 2.0) * (m - 1.0) * c * ints.I2 / (2.0 * d)
    r_pot = ints.Il / (l * (l - 1.0)) - (p + 3.0 * m - 2.0) * c * ints.I2 / (2.0 * d)
    return {"first_integral": abs(r_first) / scale, "gradient_term": abs(r_grad) / scale, "potential_term": abs(r_pot) / scale}


def speed_for_momentum(params: ModelParams, momentum: float) -> float:
    """Solve ``P(c) = momentum`` using the analytic momentum."""
    if not momentum > 0.0:
        raise ValueError("momentum must be positive")
    expo = scaling_exponents(params).i2
    if expo == 0.0:
        raise DegenerateScaling("momentum does not depend on c when l = p + 3m")
    sign = 1.0 if expo > 0 else -1.0

    def log_p(log_c: float) -> float:
        return sign * math.log(conserved_analytic(params.with_speed(math.exp(log_c))).P)

    lo, hi = -5.0, 5.0
    target = sign * math.log(momentum)
    while log_p(lo) > target and lo > -700.0:
        lo *= 2.0
    while log_p(hi) < target and hi < 700.0:
        hi *= 2.0
    return math.exp(invert_monotone(log_p, target, lo, hi))


def fit_power_law(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float]:
    """Least-squares ``(slope, intercept)`` of ``log|y|`` against ``log x``."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.abs(np.asarray(y, dtype=float)))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)


def energy_momentum_fit(params: ModelParams, speeds: Sequence[float], family=None, n_grid: int = 128) -> dict:
    """Quadrature energies and momenta across speeds and the fitted ``E ~ P**s``."""
    energies, momenta = [], []
    for c in speeds:
        prof = build_profile(params.with_speed(c), family, n_grid)
        cs = conserved_quadrature(prof)
        energies.append(cs.E)
        momenta.append(cs.P)
    slope, _ = fit_power_law(momenta, energies)
    r = scaling_exponents(params).r
    return {
        "speeds": list(map(float, speeds)),
        "P": momenta,
        "E": energies,
        "slope": slope,
        "expected": None if r is None else -r,
    }


def conserved_report(profile: CompactonProfile) -> dict:
    """JSON-ready report: quadrature values, analytic cross-check, relation residuals."""
    params = profile.params
    ints = integral_set(profile)
    quad = conserved_quadrature(profile, ints)
    out = {
        "params": params.to_dict(),
        "family": profile.family.value if profile.family is not None else None,
        "M": quad.M,
        "P": quad.P,
        "E": quad.E,
        "r": scaling_exponents(params).r,
        "E_over_Pc": quad.E / (quad.P * params.c) if quad.P else None,
        "integrals": ints.to_dict(),
        "residuals": check_relations(params, ints),
    }
    try:
        ana = conserved_analytic(params)
        out["analytic"] = ana.to_dict()
    except (GammaPole, ValueError):
        out["analytic"] = None
    return out


__all__ = [
    "ConservedSet",
    "IntegralSet",
    "ProfileFamily",
    "check_relations",
    "conserved_analytic",
    "conserved_quadrature",
    "conserved_report",
    "energy_factor",
    "energy_momentum_fit",
    "fit_power_law",
    "hamiltonian",
    "integral_set",
    "speed_for_momentum",
]
