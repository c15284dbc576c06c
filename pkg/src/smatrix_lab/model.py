"""Domain types: coupling, interaction profiles, models and half-line pairs.

A function ``f`` on the real line is represented on the half-line as the
pair ``(f(x), f(-x))``, ``x > 0``.  Profiles store the interaction ``q`` in
this form together with the inner functions that annihilate it.
"""
from __future__ import annotations

import cmath
import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Optional, Union

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError, InvalidInput, NonConvergent, NotLowerHalfPlane
from .innerfunc import BlaschkePow, InnerFn, One, Shift, inner_from_json, inner_to_json

__all__ = [
    "Coupling", "INF", "Region", "as_cplx", "region_of", "HalfPlanePoint",
    "Profile", "Zero", "EvenBox", "OddBox", "PolyExp", "NumericPair",
    "Model", "PairFn", "y_transform", "boundary_mean", "boundary_jump",
    "model_from_json", "model_to_json", "profile_from_json", "profile_to_json",
    "cplx_from_json", "cplx_to_json", "sqrt_lower",
]


class Coupling(enum.Enum):
    """Distinguished coupling values; only ``INFINITY`` (the operator H_inf) exists."""

    INFINITY = "inf"

    def __repr__(self):
        return "INF"


INF = Coupling.INFINITY


class Region(enum.Enum):
    MINUS_LEFT = "MinusLeft"
    MINUS_AXIS = "MinusAxis"
    MINUS_RIGHT = "MinusRight"

    def __str__(self):
        return self.value


def as_cplx(v, name: str = "value") -> complex:
    """Coerce to ``complex`` and reject NaN or infinite components."""
    try:
        c = complex(v)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{name} is not a complex number: {v!r}") from exc
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise InvalidInput(f"{name} must be finite, got {c}")
    return c


def region_of(z, eps_axis: float = 0.0) -> Region:
    """Part of the lower half-plane containing ``z``, split by the sign of ``Re z``."""
    z = as_cplx(z, "z")
    if not z.imag < 0:
        raise NotLowerHalfPlane(f"expected Im z < 0, got {z}")
    if abs(z.real) <= eps_axis:
        return Region.MINUS_AXIS
    return Region.MINUS_LEFT if z.real < 0 else Region.MINUS_RIGHT


@dataclass(frozen=True)
class HalfPlanePoint:
    z: complex
    region: Region

    @classmethod
    def of(cls, z, eps_axis: float = 0.0) -> "HalfPlanePoint":
        z = as_cplx(z, "z")
        return cls(z, region_of(z, eps_axis))

    @property
    def lam(self) -> complex:
        return self.z * self.z


# -- half-line pairs -------------------------------------------------------

@dataclass(frozen=True)
class PairFn:
    """Two-component function on ``[0, inf)``.

    ``func`` maps a float array of shape ``S`` to a complex array of shape
    ``(2,) + S``.  The metadata steers quadrature: ``decay`` is an exponential
    decay rate of ``|f|`` (0 when only ``support`` bounds it), ``support`` the
    right end of the support, ``breakpoints`` the jump locations.
    """

    func: Callable
    decay: float = 0.0
    support: float = math.inf
    breakpoints: tuple = ()
    exact_at_zero: bool = True
    grid: Optional[np.ndarray] = field(default=None, compare=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(self.func(x), dtype=complex)
        if out.shape != (2,) + x.shape:
            out = np.broadcast_to(out, (2,) + x.shape).copy()
        return out

    def component(self, j: int) -> Callable:
        return lambda x: self(x)[j - 1]

    @property
    def extent(self) -> float:
        """A point beyond which the pair is negligible (tail below 1e-16)."""
        if math.isfinite(self.support):
            return self.support
        if self.decay > 0:
            return math.log(1e16) / self.decay
        raise InvalidInput("pair has neither a finite support nor a decay rate")


def y_transform(f: Callable, decay: float = 0.0, support: float = math.inf,
                breakpoints=()) -> PairFn:
    """Fold a function on the line into the half-line pair ``(f(x), f(-x))``."""

    def g(x):
        x = np.asarray(x, dtype=float)
        return np.stack([np.asarray(f(x), dtype=complex) * np.ones_like(x),
                         np.asarray(f(-x), dtype=complex) * np.ones_like(x)])

    return PairFn(g, decay=decay, support=support, breakpoints=tuple(breakpoints))


def _limit_at_zero(f: PairFn) -> np.ndarray:
    if f.exact_at_zero or f.grid is None:
        return f(np.array([0.0]))[:, 0]
    grid = np.asarray(f.grid, dtype=float)
    h = grid[grid > 0][:3]
    if len(h) < 3:
        raise NonConvergent("need three positive grid nodes to extrapolate the boundary value")
    vals = f(h)
    # quadratic through the three nodes, evaluated at 0
    w = np.array([h[1] * h[2] / ((h[0] - h[1]) * (h[0] - h[2])),
                  h[0] * h[2] / ((h[1] - h[0]) * (h[1] - h[2])),
                  h[0] * h[1] / ((h[2] - h[0]) * (h[2] - h[1]))])
    lim = vals @ w
    direct = f(np.array([0.0]))[:, 0]
    if np.any(np.abs(lim - direct) > 1e-6 * np.maximum(1.0, np.abs(lim))):
        raise NonConvergent(f"extrapolated boundary value {lim} disagrees with sample {direct}")
    return lim


def boundary_mean(f: PairFn) -> complex:
    """``[f]_r = (f1(0+) + f2(0+)) / 2``."""
    v = _limit_at_zero(f)
    return complex(0.5 * (v[0] + v[1]))


def boundary_jump(f: PairFn) -> complex:
    """``[f]_s = f1(0+) - f2(0+)``."""
    v = _limit_at_zero(f)
    return complex(v[0] - v[1])


# -- profiles --------------------------------------------------------------

class Profile:
    """Common interface of the interaction profiles."""

    kind: ClassVar[str] = ""
    closed_form: ClassVar[bool] = True

    def q(self, x) -> np.ndarray:  # pragma: no cover - overridden
        raise NotImplementedError

    @property
    def inner(self) -> tuple:
        raise NotImplementedError

    @property
    def support(self) -> float:
        return math.inf

    @property
    def decay(self) -> float:
        return 0.0

    @property
    def breakpoints(self) -> tuple:
        return ()

    @property
    def is_zero(self) -> bool:
        return False

    def pair(self) -> PairFn:
        return PairFn(self.q, decay=self.decay, support=self.support,
                      breakpoints=self.breakpoints, exact_at_zero=True)


@dataclass(frozen=True)
class Zero(Profile):
    kind: ClassVar[str] = "zero"

    def q(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros((2,) + x.shape, dtype=complex)

    @property
    def inner(self):
        return (One(), One())

    @property
    def support(self):
        return 0.0

    @property
    def is_zero(self):
        return True


@dataclass(frozen=True)
class _Box(Profile):
    M: complex
    rho: float

    sign2: ClassVar[float] = 1.0

    def __post_init__(self):
        object.__setattr__(self, "M", as_cplx(self.M, "M"))
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise InvalidInput(f"rho must be positive, got {self.rho}")
        object.__setattr__(self, "rho", float(self.rho))

    def q(self, x):
        x = np.asarray(x, dtype=float)
        v = np.where(x <= self.rho, self.M, 0j)
        return np.stack([v, self.sign2 * v])

    @property
    def inner(self):
        return (Shift(self.rho), Shift(self.rho))

    @property
    def support(self):
        return self.rho

    @property
    def breakpoints(self):
        return (self.rho,)


@dataclass(frozen=True)
class EvenBox(_Box):
    """``q(x) = M`` on ``[-rho, rho]``."""

    kind: ClassVar[str] = "even_box"


@dataclass(frozen=True)
class OddBox(_Box):
    """``q(x) = M sign(x)`` on ``[-rho, rho]``."""

    kind: ClassVar[str] = "odd_box"
    sign2: ClassVar[float] = -1.0


@dataclass(frozen=True)
class PolyExp(Profile):
    """``q(x) = P(x) exp(-|x|)`` with ``P`` given by ascending coefficients."""

    coeffs: tuple

    kind: ClassVar[str] = "poly_exp"

    def __post_init__(self):
        cs = tuple(as_cplx(c, "coefficient") for c in self.coeffs)
        if not cs:
            raise InvalidInput("poly_exp needs at least one coefficient")
        if len(cs) > 1 and cs[-1] == 0:
            raise InvalidInput("leading coefficient of a poly_exp profile must be nonzero")
        object.__setattr__(self, "coeffs", cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def closed_form(self) -> bool:  # type: ignore[override]
        return self.degree == 0

    @property
    def M(self) -> complex:
        return self.coeffs[0]

    def q(self, x):
        x = np.asarray(x, dtype=float)
        c = np.asarray(self.coeffs, dtype=complex)
        e = np.exp(-x)
        return np.stack([np.polynomial.polynomial.polyval(x, c) * e,
                         np.polynomial.polynomial.polyval(-x, c) * e])

    @property
    def inner(self):
        return (BlaschkePow(self.degree + 1), BlaschkePow(self.degree + 1))

    @property
    def decay(self):
        # |P(x)| exp(-x) <= C exp(-x/2) once P has positive degree
        return 1.0 if self.degree == 0 else 0.5


@dataclass(frozen=True)
class NumericPair(Profile):
    """Sampled pair on the uniform grid ``linspace(0, x_max, n)``, zero beyond ``x_max``.

    The inner functions must be declared; they are not inferred from data.
    """

    x_max: float
    q1: tuple
    q2: tuple
    psi1: InnerFn
    psi2: InnerFn

    kind: ClassVar[str] = "numeric"
    closed_form: ClassVar[bool] = False

    def __post_init__(self):
        if not (math.isfinite(self.x_max) and self.x_max > 0):
            raise InvalidInput(f"x_max must be positive, got {self.x_max}")
        q1 = tuple(as_cplx(v, "q1 sample") for v in self.q1)
        q2 = tuple(as_cplx(v, "q2 sample") for v in self.q2)
        if len(q1) != len(q2) or len(q1) < 4:
            raise InvalidInput("q1 and q2 need the same number (>= 4) of samples")
        for psi in (self.psi1, self.psi2):
            if not isinstance(psi, (One, Shift, BlaschkePow)):
                raise InvalidInput(f"declared inner function is invalid: {psi!r}")
        object.__setattr__(self, "q1", q1)
        object.__setattr__(self, "q2", q2)
        object.__setattr__(self, "x_max", float(self.x_max))
        grid = np.linspace(0.0, self.x_max, len(q1))
        object.__setattr__(self, "_grid", grid)
        object.__setattr__(self, "_spline", CubicSpline(grid, np.array([q1, q2]), axis=1))

    @classmethod
    def from_functions(cls, f1, f2, x_max, n, psi1, psi2) -> "NumericPair":
        grid = np.linspace(0.0, x_max, n)
        return cls(x_max, tuple(np.asarray(f1(grid), dtype=complex) * np.ones(n)),
                   tuple(np.asarray(f2(grid), dtype=complex) * np.ones(n)), psi1, psi2)

    @property
    def grid(self) -> np.ndarray:
        return self._grid

    def q(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= 0) & (x <= self.x_max)
        v = self._spline(np.clip(x, 0.0, self.x_max))
        return np.where(inside, v, 0j)

    @property
    def inner(self):
        return (self.psi1, self.psi2)

    @property
    def support(self):
        return self.x_max

    def pair(self) -> PairFn:
        return PairFn(self.q, support=self.x_max, breakpoints=tuple(self._grid[1:-1]),
                      exact_at_zero=False, grid=self._grid)

    @property
    def breakpoints(self):
        return tuple(self._grid[1:-1])

    def __hash__(self):
        return hash((self.x_max, self.q1, self.q2, self.psi1, self.psi2))

    def __eq__(self, other):
        return (isinstance(other, NumericPair) and self.x_max == other.x_max
                and self.q1 == other.q1 and self.q2 == other.q2
                and self.psi1 == other.psi1 and self.psi2 == other.psi2)


@dataclass(frozen=True)
class Model:
    """Coupling ``a`` (complex or ``INF``) together with a profile."""

    a: Union[complex, Coupling]
    profile: Profile

    def __post_init__(self):
        if self.a is not INF:
            object.__setattr__(self, "a", as_cplx(self.a, "a"))
        if not isinstance(self.profile, Profile):
            raise InvalidInput(f"not a profile: {self.profile!r}")

    @property
    def is_infinite(self) -> bool:
        return self.a is INF

    def conj(self) -> "Model":
        """Model with the conjugate coupling (the adjoint operator)."""
        return self if self.is_infinite else Model(self.a.conjugate(), self.profile)

    def with_a(self, a) -> "Model":
        return Model(a, self.profile)


# -- JSON ------------------------------------------------------------------

def _check_fields(obj, allowed, what):
    if not isinstance(obj, dict):
        raise ConfigError(f"{what} must be a JSON object")
    extra = set(obj) - set(allowed)
    if extra:
        raise ConfigError(f"unknown fields in {what}: {sorted(extra)}")


def cplx_from_json(v, name="value") -> complex:
    if isinstance(v, dict):
        _check_fields(v, {"re", "im"}, name)
        return as_cplx(complex(v.get("re", 0.0), v.get("im", 0.0)), name)
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return as_cplx(v, name)
    raise ConfigError(f"{name} must be {{'re':..,'im':..}} or a number, got {v!r}")


def cplx_to_json(c: complex) -> dict:
    return {"re": c.real, "im": c.imag}


def profile_from_json(obj) -> Profile:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("profile must be an object with a 'kind' field")
    kind = obj["kind"]
    try:
        if kind == "zero":
            _check_fields(obj, {"kind"}, "profile")
            return Zero()
        if kind in ("even_box", "odd_box"):
            _check_fields(obj, {"kind", "M", "rho"}, "profile")
            cls = EvenBox if kind == "even_box" else OddBox
            return cls(cplx_from_json(obj["M"], "M"), float(obj["rho"]))
        if kind == "poly_exp":
            _check_fields(obj, {"kind", "coeffs"}, "profile")
            return PolyExp(tuple(cplx_from_json(c, "coeff") for c in obj["coeffs"]))
        if kind == "numeric":
            _check_fields(obj, {"kind", "x_max", "q1", "q2", "psi1", "psi2"}, "profile")
            return NumericPair(float(obj["x_max"]),
                               tuple(cplx_from_json(c, "q1") for c in obj["q1"]),
                               tuple(cplx_from_json(c, "q2") for c in obj["q2"]),
                               inner_from_json(obj["psi1"]), inner_from_json(obj["psi2"]))
    except KeyError as exc:
        raise ConfigError(f"profile {kind!r} is missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInput):
            raise ConfigError(str(exc)) from exc
        raise ConfigError(f"bad profile parameters: {exc}") from exc
    raise ConfigError(f"unknown profile kind {kind!r}")


def profile_to_json(p: Profile) -> dict:
    if isinstance(p, Zero):
        return {"kind": "zero"}
    if isinstance(p, (EvenBox, OddBox)):
        return {"kind": p.kind, "M": cplx_to_json(p.M), "rho": p.rho}
    if isinstance(p, PolyExp):
        return {"kind": "poly_exp", "coeffs": [cplx_to_json(c) for c in p.coeffs]}
    if isinstance(p, NumericPair):
        return {"kind": "numeric", "x_max": p.x_max,
                "q1": [cplx_to_json(c) for c in p.q1], "q2": [cplx_to_json(c) for c in p.q2],
                "psi1": inner_to_json(p.psi1), "psi2": inner_to_json(p.psi2)}
    raise InvalidInput(f"unknown profile {p!r}")


def model_from_json(obj) -> Model:
    """Parse a model descriptor (dict or JSON text)."""
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from exc
    _check_fields(obj, {"a", "profile"}, "model")
    if "a" not in obj or "profile" not in obj:
        raise ConfigError("model needs both 'a' and 'profile'")
    a = INF if obj["a"] == "inf" else cplx_from_json(obj["a"], "a")
    return Model(a, profile_from_json(obj["profile"]))


def model_to_json(m: Model) -> dict:
    return {"a": "inf" if m.is_infinite else cplx_to_json(m.a), "profile": profile_to_json(m.profile)}


def sqrt_lower(lam) -> complex:
    """Branch of ``sqrt(lam)`` in the closed lower half-plane."""
    r = cmath.sqrt(as_cplx(lam, "lambda"))
    return -r if r.imag > 0 or (r.imag == 0 and r.real < 0) else r
