"""Model parameters, scaling exponents and regime classification.

One equation instance of the PT-symmetric generalized KdV family is fixed by
the exponents ``(l, p, m)`` and the coefficient ``alpha``; a traveling wave
adds its speed ``c``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Optional

from .errors import DegenerateScaling, InvalidParams, OddM

# equality tolerance for exponent relations such as l == p + m
_EXACT_TOL = 1e-12


def _same(x: float, y: float) -> bool:
    return math.isclose(x, y, rel_tol=0.0, abs_tol=_EXACT_TOL)


def alpha_real(m: int) -> float:
    """Coefficient solving ``-alpha (m-1) i**m = 1`` for even ``m``.

    >>> alpha_real(2), alpha_real(4)
    (1.0, -0.3333333333333333)
    """
    if int(m) != m or m < 2:
        raise InvalidParams(f"m must be an integer >= 2, got {m!r}")
    m = int(m)
    if m % 2:
        raise OddM(f"m={m} is odd; alpha would be complex")
    i_pow_m = -1.0 if (m // 2) % 2 else 1.0
    return -1.0 / ((m - 1) * i_pow_m)


@dataclass(frozen=True)
class ModelParams:
    """Exponents, coefficient and wave speed of one traveling wave."""

    l: float
    p: float
    m: int
    c: float = 1.0
    alpha: Optional[float] = field(default=None)

    def __post_init__(self) -> None:
        if int(self.m) != self.m:
            raise InvalidParams(f"m must be an integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "l", float(self.l))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "c", float(self.c))
        if self.m < 2 or self.m % 2:
            if self.m >= 2:
                raise OddM(f"m={self.m} is odd; only even m gives a real equation")
            raise InvalidParams(f"m must be >= 2, got {self.m}")
        if not self.l > 2.0:
            raise InvalidParams(f"l must exceed 2, got {self.l}")
        if not (math.isfinite(self.c) and self.c > 0.0):
            raise InvalidParams(f"wave speed must be positive, got {self.c}")
        if self.alpha is None:
            object.__setattr__(self, "alpha", alpha_real(self.m))
        else:
            object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def uses_real_alpha(self) -> bool:
        return math.isclose(self.alpha, alpha_real(self.m), rel_tol=1e-12)

    def with_speed(self, c: float) -> "ModelParams":
        return replace(self, c=c)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ModelParams":
        """Build from a JSON-style object ``{"l":.., "p":.., "m":.., "c":..}``."""
        try:
            kwargs = {k: data[k] for k in ("l", "p", "m")}
        except KeyError as exc:
            raise InvalidParams(f"missing parameter {exc.args[0]!r}") from None
        for key in ("c", "alpha"):
            if data.get(key) is not None:
                kwargs[key] = data[key]
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {"l": self.l, "p": self.p, "m": self.m, "c": self.c, "alpha": self.alpha}


@dataclass(frozen=True)
class ScalingExponents:
    """Exponents of the scaling symmetry; ``None`` marks an undefined value.

    ``beta_scale`` is the u-scaling exponent, ``eta`` the t-scaling one,
    ``i1`` and ``i2`` the exponents of width and momentum in the speed, and
    ``r`` the exponent in ``E ~ P**(-r)``.
    """

    beta_scale: Optional[float]
    eta: Optional[float]
    i1: float
    i2: float
    r: Optional[float]
    degenerate: frozenset = frozenset()

    def require(self, name: str) -> float:
        value = getattr(self, name)
        if value is None:
            raise DegenerateScaling(f"{name} is undefined for these exponents")
        return value

    def to_dict(self) -> dict:
        return {
            "beta_scale": self.beta_scale,
            "eta": self.eta,
            "i1": self.i1,
            "i2": self.i2,
            "r": self.r,
            "degenerate": sorted(self.degenerate),
        }


def scaling_exponents(params: ModelParams) -> ScalingExponents:
    l, p, m = params.l, params.p, params.m
    degenerate = set()
    if _same(p + m, l):
        beta_scale = eta = None
        degenerate.update(("beta_scale", "eta"))
    else:
        beta_scale = m / (p + m - l)
        eta = 1.0 - beta_scale * (l - 2.0)
    if _same(p + 3 * m, l):
        r = None
        degenerate.add("r")
    else:
        r = -(l * m + p + m - l) / (p + 3 * m - l)
    i1 = (p + m - l) / (m * (l - 2.0))
    if _same(p + m, l):
        i1 = 0.0
    i2 = (3 * m - l + p) / (m * (l - 2.0))
    if _same(p + 3 * m, l):
        i2 = 0.0
    return ScalingExponents(beta_scale, eta, i1, i2, r, frozenset(degenerate))


@dataclass(frozen=True)
class RegimeReport:
    compacton_admissible: bool
    width_independent: bool
    stable_window: bool
    marginal: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def classify(params: ModelParams) -> RegimeReport:
    l, p, m = params.l, params.p, params.m
    marginal = _same(l, p + 3 * m)
    return RegimeReport(
        compacton_admissible=(p <= 2.0 and p <= l),
        width_independent=_same(l, p + m),
        stable_window=(2.0 < l < p + 3 * m) and not marginal,
        marginal=marginal,
    )
