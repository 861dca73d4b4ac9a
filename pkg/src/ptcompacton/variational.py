"""Variational approximations at fixed momentum.

A trial function ``f = A Z(beta y)`` turns the Hamiltonian into

    H(A, beta) = -C1 A**l / (beta l (l-1)) + C2 A**(p+m) beta**(m-1) / (m-1),
    P          = C5 A**2 / (2 beta),

with shape moments ``C1 = int Z**l``, ``C2 = int (Z')**m Z**p``, ``C5 = int Z**2``.
Eliminating ``A`` through ``P`` leaves

    H(beta) = -C3 P**(l/2) beta**((l-2)/2) + C4 P**((p+m)/2) beta**((p+3m-2)/2).

Two trial families are provided: post-Gaussian ``Z = exp(-|z|**(2n))`` and
cos-power ``Z = cos(z)**gamma`` on ``|z| <= pi/2``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .errors import DivergentMoment, NoInteriorMinimum, UnsupportedFamily
from .numerics import integrate, integrate_semi_infinite, minimize_1d, minimize_nd
from .params import ModelParams, scaling_exponents
from .profile import CompactonProfile
from .specfun import beta_fn, ln_gamma

POST_GAUSSIAN = "post_gaussian"
COS_POWER = "cos_power"
FAMILIES = (POST_GAUSSIAN, COS_POWER)
AGREE_TOL = 1e-8
_QUAD_TOL = 1e-14


@dataclass(frozen=True)
class CConstants:
    """Shape constants of one trial family.

    The values are the quadrature results.  ``closed`` holds the closed
    Gamma/Beta forms for comparison; a constant whose two values differ by
    more than ``AGREE_TOL`` relative is listed in ``discrepant`` with the ratio
    closed/quadrature in ``ratios``.
    """

    C1: float
    C2: float
    C3: float
    C4: float
    C5: float
    provenance: Dict[str, str] = field(default_factory=dict)
    closed: Dict[str, float] = field(default_factory=dict)
    ratios: Dict[str, float] = field(default_factory=dict)
    discrepant: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "C1": self.C1, "C2": self.C2, "C3": self.C3, "C4": self.C4, "C5": self.C5,
            "provenance": dict(self.provenance), "closed": dict(self.closed),
            "ratios": dict(self.ratios), "discrepant": list(self.discrepant),
        }


def _pg_closed(l: float, p: float, m: int, n: float) -> Dict[str, float]:
    # C1, C5 in their commonly quoted form (no factor 2 for the two half-lines); C2 with exponent m+p
    k = 1.0 / (2.0 * n)
    c1 = l ** (-k) * math.exp(ln_gamma(1.0 + k))
    c5 = 2.0 ** (-k) * math.exp(ln_gamma(1.0 + k))
    g = m - (m - 1.0) * k
    c2 = (2.0 * n) ** m / n * (m + p) ** (-g) * math.exp(ln_gamma(g))
    return {"C1": c1, "C2": c2, "C5": c5}


def _pg_quadrature(l: float, p: float, m: int, n: float) -> Dict[str, float]:
    two_n = 2.0 * n

    def moment(power: float, weight: float, rate: float) -> float:
        # 2 int_0^inf weight * x**power exp(-rate x**(2n)) dx
        def g(x):
            with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
                v = weight * x**power * np.exp(-rate * x**two_n)
            return np.where(np.isfinite(v), v, 0.0)

        return 2.0 * integrate_semi_infinite(g, 0.0, _QUAD_TOL).value

    return {
        "C1": moment(0.0, 1.0, l),
        "C2": moment(m * (two_n - 1.0), two_n**m, m + p),
        "C5": moment(0.0, 1.0, 2.0),
    }


def _cp_closed(l: float, p: float, m: int, g: float) -> Dict[str, float]:
    return {
        "C1": beta_fn(0.5, 0.5 * (g * l + 1.0)),
        "C2": g**m * beta_fn(0.5 * (m + 1.0), 0.5 * (m * (g - 1.0) + g * p + 1.0)),
        "C5": beta_fn(0.5, 0.5 * (2.0 * g + 1.0)),
    }


def _cp_quadrature(l: float, p: float, m: int, g: float) -> Dict[str, float]:
    half_pi = 0.5 * math.pi

    def moment(fn) -> float:
        # 2 int_0^{pi/2}; da = z, db = pi/2 - z so cos(z) = sin(db) stays accurate
        def h(_z, da, db):
            with np.errstate(divide="ignore", invalid="ignore"):
                v = fn(np.sin(db), np.sin(da))
            return np.where(np.isfinite(v), v, 0.0)

        return 2.0 * integrate(h, 0.0, half_pi, _QUAD_TOL, complement=True).value

    return {
        "C1": moment(lambda cz, sz: cz ** (g * l)),
        "C2": moment(lambda cz, sz: (g * cz ** (g - 1.0) * sz) ** m * cz ** (g * p)),
        "C5": moment(lambda cz, sz: cz ** (2.0 * g)),
    }


def _check_convergence(l: float, p: float, m: int, shape: float, family: str) -> None:
    if family == POST_GAUSSIAN:
        if not shape > 0.0:
            raise DivergentMoment("post-Gaussian exponent n must be positive")
        if not m - (m - 1.0) / (2.0 * shape) > 0.0:
            raise DivergentMoment(
                f"derivative moment diverges for n={shape} <= (m-1)/(2m) = {(m - 1.0) / (2.0 * m)}"
            )
    elif family == COS_POWER:
        if not shape > 0.0 or not m * (shape - 1.0) + shape * p + 1.0 > 0.0:
            raise DivergentMoment(f"derivative moment diverges for gamma={shape}")
    else:
        raise UnsupportedFamily(f"unknown trial family {family!r}")


def c_constants(l: float, p: float, m: int, shape: float, family: str, method: str = "both") -> CConstants:
    """Shape constants by quadrature (authoritative) and closed form.

    ``method="closed"`` skips quadrature and trusts the closed forms with the
    post-Gaussian ``C1, C5`` corrected by their factor 2; it is used inside
    optimization loops once the two routes have been cross-checked.
    """
    l, p = float(l), float(p)
    _check_convergence(l, p, m, shape, family)
    closed = _pg_closed(l, p, m, shape) if family == POST_GAUSSIAN else _cp_closed(l, p, m, shape)
    if method == "closed":
        vals = dict(closed)
        if family == POST_GAUSSIAN:
            vals["C1"] *= 2.0
            vals["C5"] *= 2.0
        prov = {k: "closed_form" for k in vals}
        ratios: Dict[str, float] = {}
        discrepant: Tuple[str, ...] = ()
    else:
        vals = _pg_quadrature(l, p, m, shape) if family == POST_GAUSSIAN else _cp_quadrature(l, p, m, shape)
        prov = {k: "quadrature" for k in vals}
        ratios = {k: closed[k] / vals[k] for k in vals}
        discrepant = tuple(k for k in ("C1", "C2", "C5") if abs(ratios[k] - 1.0) > AGREE_TOL)
    c1, c2, c5 = vals["C1"], vals["C2"], vals["C5"]
    c3 = c1 / (l * (l - 1.0)) * (2.0 / c5) ** (0.5 * l)
    c4 = c2 / (m - 1.0) * (2.0 / c5) ** (0.5 * (p + m))
    prov.update({"C3": "derived", "C4": "derived"})
    return CConstants(c1, c2, c3, c4, c5, prov, closed, ratios, discrepant)


def reduced_hamiltonian(beta: float, P: float, consts: CConstants, l: float, p: float, m: int) -> float:
    return (
        -consts.C3 * P ** (0.5 * l) * beta ** (0.5 * (l - 2.0))
        + consts.C4 * P ** (0.5 * (p + m)) * beta ** (0.5 * (p + 3.0 * m - 2.0))
    )


def _require_window(l: float, p: float, m: int) -> None:
    if not l < p + 3 * m - 1e-12:
        raise NoInteriorMinimum(f"H(beta) has no interior minimum for l={l} >= p+3m={p + 3 * m}")


def beta_star(P: float, consts: CConstants, l: float, p: float, m: int) -> float:
    """Minimizer of the reduced Hamiltonian at fixed momentum."""
    _require_window(l, p, m)
    ratio = consts.C4 * (p + 3.0 * m - 2.0) / (consts.C3 * (l - 2.0))
    d = l - p - 3.0 * m
    return P ** ((p + m - l) / d) * ratio ** (2.0 / d)


def f_lpm(consts: CConstants, l: float, p: float, m: int) -> float:
    """Prefactor in ``H(beta*) = f_lpm * P**(-r)``."""
    _require_window(l, p, m)
    d = l - p - 3.0 * m
    ratio = consts.C4 * (p + 3.0 * m - 2.0) / (consts.C3 * (l - 2.0))
    return consts.C3 * d / (p + 3.0 * m - 2.0) * ratio ** ((l - 2.0) / d)


def amplitude(beta: float, P: float, consts: CConstants) -> float:
    return math.sqrt(2.0 * beta * P / consts.C5)


@dataclass(frozen=True)
class TrialFunction:
    family: str
    A: float
    beta: float
    shape: float
    H: float
    P: float
    iterations: int = 0
    r: Optional[float] = None
    flags: Tuple[str, ...] = ()

    @property
    def coefficient(self) -> float:
        """``beta**(2n)`` for post-Gaussian trials (``A exp(-coef |y|**(2n))``), else ``beta``."""
        if self.family == POST_GAUSSIAN:
            return self.beta ** (2.0 * self.shape)
        return self.beta

    @property
    def speed(self) -> Optional[float]:
        """Speed from the reduced dynamics, ``c = r H / P``."""
        return None if self.r is None else self.r * self.H / self.P

    @property
    def half_extent(self) -> float:
        """Half-width outside which the trial is zero (cos-power) or below 1e-17 A."""
        if self.family == COS_POWER:
            return 0.5 * math.pi / self.beta
        return (17.0 * math.log(10.0)) ** (1.0 / (2.0 * self.shape)) / self.beta

    def evaluate(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        z = np.abs(self.beta * y)
        if self.family == POST_GAUSSIAN:
            return self.A * np.exp(-(z ** (2.0 * self.shape)))
        inside = z < 0.5 * math.pi
        return np.where(inside, self.A * np.cos(np.minimum(z, 0.5 * math.pi)) ** self.shape, 0.0)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "A": self.A,
            "beta": self.beta,
            "shape": self.shape,
            "H": self.H,
            "P": self.P,
            "iterations": self.iterations,
            "coefficient": self.coefficient,
            "speed": self.speed,
            "flags": list(self.flags),
        }


def _trial_at(params: ModelParams, P: float, family: str, shape: float, method: str, iterations: int, flags=()) -> TrialFunction:
    l, p, m = params.l, params.p, params.m
    consts = c_constants(l, p, m, shape, family, method)
    b = beta_star(P, consts, l, p, m)
    h = reduced_hamiltonian(b, P, consts, l, p, m)
    return TrialFunction(family, amplitude(b, P, consts), b, shape, h, P, iterations,
                         scaling_exponents(params).r, tuple(flags))


def _shape_objective(params: ModelParams, family: str, method: str):
    l, p, m = params.l, params.p, params.m

    def obj(shape: float) -> float:
        try:
            return f_lpm(c_constants(l, p, m, shape, family, method), l, p, m)
        except DivergentMoment:
            return math.inf

    return obj


def optimize_post_gaussian(params: ModelParams, P: float = 1.0, *, method: str = "quadrature",
                           n_range: Tuple[float, float] = (0.3, 3.0), tol: float = 1e-9) -> TrialFunction:
    """Minimize ``H`` over ``A exp(-|beta y|**(2n))``: ``beta`` analytically, then ``n``."""
    if not P > 0.0:
        raise ValueError("momentum must be positive")
    _require_window(params.l, params.p, params.m)
    res = minimize_1d(_shape_objective(params, POST_GAUSSIAN, method), n_range[0], n_range[1], tol, n_scan=28)
    return _trial_at(params, P, POST_GAUSSIAN, res.x, method, res.iterations, res.flags)


def optimize_cos_power(params: ModelParams, P: float = 1.0, *, method: str = "quadrature",
                       strategy: str = "reduced", gamma_range: Tuple[float, float] = (1.0, 16.0),
                       tol: float = 1e-9) -> TrialFunction:
    """Minimize ``H`` over ``A cos(beta y)**gamma``.

    ``strategy="reduced"`` eliminates ``beta`` analytically and searches
    ``gamma`` alone; ``"joint"`` runs Nelder-Mead over ``(log beta, gamma)``.
    """
    if not P > 0.0:
        raise ValueError("momentum must be positive")
    l, p, m = params.l, params.p, params.m
    _require_window(l, p, m)
    if strategy == "reduced":
        res = minimize_1d(_shape_objective(params, COS_POWER, method), gamma_range[0], gamma_range[1], tol)
        return _trial_at(params, P, COS_POWER, res.x, method, res.iterations, res.flags)
    if strategy != "joint":
        raise ValueError(f"unknown strategy {strategy!r}")
    start = optimize_cos_power(params, P, method="closed", tol=1e-4)

    def obj(x: np.ndarray) -> float:
        b, g = math.exp(x[0]), x[1]
        if g < gamma_range[0]:
            return math.inf
        try:
            consts = c_constants(l, p, m, g, COS_POWER, method)
        except DivergentMoment:
            return math.inf
        return reduced_hamiltonian(b, P, consts, l, p, m)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = minimize_nd(obj, [math.log(start.beta), start.shape], tol)
    for w in caught:
        warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    b, g = math.exp(res.argmin[0]), float(res.argmin[1])
    consts = c_constants(l, p, m, g, COS_POWER, method)
    return TrialFunction(COS_POWER, amplitude(b, P, consts), b, g, res.fmin, P, res.iterations,
                         scaling_exponents(params).r, res.flags)


def compare_profiles(exact: CompactonProfile, trial: TrialFunction, n: int = 4001) -> Tuple[float, float]:
    """L2 and sup distances between an exact profile and a trial function.

    Both are evaluated analytically on the union of the exact grid and a
    uniform grid spanning the larger of the two supports.
    """
    half = max(exact.y_half, trial.half_extent)
    y = np.union1d(exact.y, np.linspace(-half, half, n))
    diff = exact.evaluate(y)[0] - trial.evaluate(y)
    l2 = math.sqrt(float(trapezoid(diff * diff, x=y)))
    return l2, float(np.max(np.abs(diff)))
