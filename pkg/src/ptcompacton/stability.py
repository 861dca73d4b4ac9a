"""Stability criteria for compactons and residual checks of the linearized operator.

Four criteria are evaluated and should agree:

* the sign of ``dP/dc`` from the power law ``P ~ c**((p+3m-l)/(m(l-2)))``;
* the second derivative of ``Phi = H + c P`` under ``f -> lam**(1/2) f(lam y)``
  (momentum-preserving scaling);
* the stability window ``2 < l < p + 3m``;
* the Lyapunov bound ``H >= H_min`` being attained by the solitary wave.

The plain Derrick scaling ``f -> f(lam y)`` is reported as well but does not
change sign with the others.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .conserved import IntegralSet, conserved_quadrature, hamiltonian, integral_set
from .errors import SingularCoefficient
from .params import ModelParams, classify
from .profile import CompactonProfile, build_profile

EDGE_FLOOR = 1e-8
EDGE_TRIM = 0.02
MARGINAL_TOL = 1e-8


def dPdc_criterion(params: ModelParams) -> Tuple[float, bool]:
    """Exponent of ``P ~ c**e`` and whether ``dP/dc > 0``."""
    l, p, m = params.l, params.p, params.m
    expo = (p + 3 * m - l) / (m * (l - 2.0))
    if classify(params).marginal:
        expo = 0.0
    return expo, expo > 0.0


@dataclass(frozen=True)
class Phi2Result:
    """Second derivative at ``lam = 1`` of ``Phi`` under the momentum-preserving scaling.

    ``formula`` evaluates the factorized closed form with its denominator
    read literally as ``4 l (m-1) + m + p``; ``formula_grouped`` reads it as
    ``4 (l (m-1) + m + p)``.  ``numeric`` comes from the integrals and is
    authoritative.
    """

    formula: float
    formula_grouped: float
    numeric: float


def _phi2_numeric(params: ModelParams, ints: IntegralSet) -> float:
    l, p, m = params.l, params.p, params.m
    e1 = (3.0 * m + p - 2.0) / 2.0
    e2 = (l - 2.0) / 2.0
    return e1 * (e1 - 1.0) * ints.Jmp / (m - 1.0) - e2 * (e2 - 1.0) * ints.Il / (l * (l - 1.0))


def phi2_rho_half(
    params: ModelParams,
    P: float,
    profile: Optional[CompactonProfile] = None,
    ints: Optional[IntegralSet] = None,
) -> Phi2Result:
    l, p, m, c = params.l, params.p, params.m, params.c
    num = P * c * (l - 2.0) * (3 * m + p - l) * (3 * m + p - 2.0)
    literal = num / (4.0 * l * (m - 1.0) + m + p)
    grouped = num / (4.0 * (l * (m - 1.0) + m + p))
    if ints is None:
        if profile is None:
            profile = build_profile(params)
        ints = integral_set(profile)
    return Phi2Result(literal, grouped, _phi2_numeric(params, ints))


@dataclass(frozen=True)
class DerrickResult:
    printed: float
    oracle: float
    agrees: bool


def derrick_d2(params: ModelParams, ints: IntegralSet, rel_tol: float = 1e-6) -> DerrickResult:
    """Second derivative of ``Phi`` under ``f -> f(lam y)`` at ``lam = 1``.

    ``printed`` is the commonly quoted factorized polynomial times ``c I_2``;
    ``oracle`` differentiates ``lam**(m-1) J/(m-1) - I_l/(lam l(l-1)) + c I_2/(2 lam)``
    directly.
    """
    l, p, m, c = params.l, params.p, params.m, params.c
    poly = m * m * l * l - m * l * l - (m * m - 7 * m - 2 * p + 4) * l + 6 * m + 2 * p - 4
    printed = c * ints.I2 * (l - 2.0) / (2.0 * l * (l - 1.0) * (l * (m - 1.0) + m + p)) * poly
    oracle = (m - 2.0) * ints.Jmp - 2.0 * ints.Il / (l * (l - 1.0)) + c * ints.I2
    scale = max(abs(oracle), abs(printed), 1e-300)
    return DerrickResult(printed, oracle, abs(printed - oracle) <= rel_tol * scale)


def lyapunov_bound(params: ModelParams, ints: IntegralSet) -> Tuple[float, float]:
    """``(H_min, H - H_min)`` with ``H_min = (l-p-3m) J / ((m-1)(l-2))``."""
    l, p, m = params.l, params.p, params.m
    h_min = (l - p - 3 * m) * ints.Jmp / ((m - 1.0) * (l - 2.0))
    return h_min, hamiltonian(params, ints) - h_min


@dataclass(frozen=True, eq=False)
class LOperatorCoeffs:
    """``L = c0 + c1 d/dy + c2 d^2/dy^2`` sampled on a profile grid.

    Points outside the support carry ``L = c``; points inside the support
    but excluded by the edge floor carry NaN and ``interior`` is False.
    """

    y: np.ndarray
    c0: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    interior: np.ndarray


def _coefficients(params: ModelParams, f, fp, fpp):
    l, p, m, c = params.l, params.p, params.m, params.c
    c0 = c - f ** (l - 2.0) - m * p * f ** (p - 1.0) * fp ** (m - 2) * fpp
    if p not in (0.0, 1.0):
        c0 = c0 - p * (p - 1.0) * f ** (p - 2.0) * fp**m
    c1 = -m * p * f ** (p - 1.0) * fp ** (m - 1)
    if m != 2:
        c1 = c1 - m * (m - 2.0) * f**p * fp ** (m - 3) * fpp
    c2 = -m * f**p * fp ** (m - 2)
    return c0, c1, c2 + 0.0 * f


def interior_mask(profile: CompactonProfile) -> np.ndarray:
    amp = max(profile.A, 1e-300)
    return (profile.f > EDGE_FLOOR * amp) & (np.abs(profile.y) < (1.0 - EDGE_TRIM) * profile.y_half)


def build_L(profile: CompactonProfile) -> LOperatorCoeffs:
    params = profile.params
    y = profile.y
    f = profile.f
    fp = profile.fprime
    fpp = profile.fsecond if profile.fsecond is not None else np.gradient(fp, y, edge_order=2)
    inside = interior_mask(profile)
    c0 = np.full_like(y, math.nan)
    c1 = np.full_like(y, math.nan)
    c2 = np.full_like(y, math.nan)
    outside = f == 0.0
    c0[outside], c1[outside], c2[outside] = params.c, 0.0, 0.0
    if np.any(inside):
        with np.errstate(all="ignore"):
            k0, k1, k2 = _coefficients(params, f[inside], fp[inside], fpp[inside])
        bad = ~(np.isfinite(k0) & np.isfinite(k1) & np.isfinite(k2))
        if np.any(bad):
            where = y[inside][bad]
            raise SingularCoefficient(
                f"L coefficients diverge at {where.size} interior point(s), e.g. y={where[0]:.6g}"
            )
        c0[inside], c1[inside], c2[inside] = k0, k1, k2
    return LOperatorCoeffs(y, c0, c1, c2, inside)


def apply_L(L: LOperatorCoeffs, v: np.ndarray, dv: np.ndarray, d2v: np.ndarray) -> np.ndarray:
    """``L v`` on the interior points, given ``v`` and its derivatives there."""
    m = L.interior
    return L.c0[m] * v + L.c1[m] * dv + L.c2[m] * d2v


def _fd_derivatives(v: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    h = y[1] - y[0]
    d1 = np.gradient(v, h, edge_order=2)
    d2 = np.empty_like(v)
    d2[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    d2[0], d2[-1] = d2[1], d2[-2]
    return d1, d2


def goldstone_residual(profile: CompactonProfile, L: LOperatorCoeffs, v: Optional[np.ndarray] = None) -> float:
    """``||L v|| / ||c v||`` over the interior with ``v = f'`` by default.

    Derivatives of ``v`` are centered differences on the grid.
    """
    v = profile.fprime if v is None else np.asarray(v, dtype=float)
    mask = L.interior
    denom = profile.params.c * np.linalg.norm(v[mask])
    if denom == 0.0:
        return 0.0
    d1, d2 = _fd_derivatives(v, profile.y)
    lv = apply_L(L, v[mask], d1[mask], d2[mask])
    return float(np.linalg.norm(lv) / denom)


def lc_derivative_identity(params: ModelParams, dc: float, family=None, n_grid: int = 256) -> float:
    """Residual ``||L (f+ - f-)/dc + f|| / ||f||`` of ``L df/dc = -f``.

    ``f+-`` are exact profiles at ``c +- dc/2`` evaluated, with their analytic
    derivatives, on the grid of the profile at ``c``.
    """
    if not 0.0 < dc < 2.0 * params.c:
        raise ValueError("dc must lie in (0, 2c)")
    center = build_profile(params, family, n_grid)
    L = build_L(center)
    fam = center.family
    up = build_profile(params.with_speed(params.c + 0.5 * dc), fam, 64)
    down = build_profile(params.with_speed(params.c - 0.5 * dc), fam, 64)
    m = L.interior
    y = center.y[m]
    fu, fpu, fppu = up.evaluate(y)
    fd, fpd, fppd = down.evaluate(y)
    lw = apply_L(L, (fu - fd) / dc, (fpu - fpd) / dc, (fppu - fppd) / dc)
    f = center.f[m]
    return float(np.linalg.norm(lw + f) / np.linalg.norm(f))


@dataclass(frozen=True)
class StabilityReport:
    window_ok: bool
    dPdc_exponent: float
    phi2_formula: float
    phi2_numeric: float
    derrick_d2: float
    lyapunov_gap: float
    goldstone_residual: Optional[float]
    lc_residual: Optional[float]
    phi2_formula_grouped: float = math.nan
    derrick_printed: float = math.nan
    H: float = math.nan
    P: float = math.nan
    c: float = math.nan
    notes: Tuple[str, ...] = field(default=())

    @property
    def consistent(self) -> bool:
        """Window flag, ``dP/dc`` sign and ``Phi''`` sign agree (marginal counts as agreement
        when all three vanish or are false)."""
        # on the marginal line Phi'' vanishes up to quadrature noise
        phi2_pos = self.phi2_numeric > MARGINAL_TOL * abs(self.P * self.c)
        signs = (self.window_ok, self.dPdc_exponent > 0.0, phi2_pos)
        return all(signs) or not any(signs)

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["notes"] = list(self.notes)
        out["consistent"] = self.consistent
        return out


def stability_report(params: ModelParams, family=None, n_grid: int = 256, dc: float = 1e-3) -> StabilityReport:
    profile = build_profile(params, family, n_grid)
    ints = integral_set(profile)
    cons = conserved_quadrature(profile, ints)
    expo, _ = dPdc_criterion(params)
    phi2 = phi2_rho_half(params, cons.P, ints=ints)
    derrick = derrick_d2(params, ints)
    _, gap = lyapunov_bound(params, ints)
    notes = []
    gold = lc = None
    try:
        gold = goldstone_residual(profile, build_L(profile))
        lc = lc_derivative_identity(params, min(dc, params.c), profile.family, n_grid)
    except SingularCoefficient as exc:
        notes.append(f"operator residuals skipped: {exc}")
    regime = classify(params)
    return StabilityReport(
        window_ok=regime.stable_window,
        dPdc_exponent=expo,
        phi2_formula=phi2.formula,
        phi2_numeric=phi2.numeric,
        derrick_d2=derrick.oracle,
        lyapunov_gap=gap,
        goldstone_residual=gold,
        lc_residual=lc,
        phi2_formula_grouped=phi2.formula_grouped,
        derrick_printed=derrick.printed,
        H=cons.E,
        P=cons.P,
        c=params.c,
        notes=tuple(notes),
    )
