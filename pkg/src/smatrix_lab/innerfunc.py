"""Inner functions of the upper half-plane and the operators they induce.

Three symbols are supported: the constant one, the shift ``exp(i d rho)`` and
the Blaschke power ``((d - i)/(d + i))**k``.  The operator ``psi(B)`` acts on
``L2(0, inf)``; for the shift it is a right translation by ``rho`` and for the
Blaschke power it is the ``k``-th power of the forward shift

    T g(x) = g(x) - 2 int_0^x exp(-(x - s)) g(s) ds,

which maps the normalised Laguerre function ``e_n`` to ``e_{n+1}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigError, InvalidInput, UnsupportedVariant, WrongHalfPlane
from .quad import DEFAULT_QUAD, QuadConfig, integrate_finite, integrate_halfline

__all__ = [
    "One", "Shift", "BlaschkePow", "InnerFn",
    "eval_inner", "psi_ratio", "psi_star_exp",
    "ExpPoly", "apply_inner_exp", "apply_inner", "apply_inner_adjoint_at",
    "shift_apply", "shift_adjoint", "shift_project", "blaschke_project",
    "laguerre_fn", "laguerre_basis", "laguerre_coeffs", "laguerre_shift",
    "inner_from_json", "inner_to_json",
]


@dataclass(frozen=True)
class One:
    kind = "one"


@dataclass(frozen=True)
class Shift:
    rho: float

    kind = "shift"

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise InvalidInput(f"shift length must be positive, got {self.rho}")


@dataclass(frozen=True)
class BlaschkePow:
    k: int

    kind = "blaschke"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidInput(f"Blaschke power must be a positive integer, got {self.k}")


InnerFn = Union[One, Shift, BlaschkePow]


def _check_upper(w):
    if np.any(np.imag(w) < 0):
        raise WrongHalfPlane("inner functions are evaluated on the closed upper half-plane")


def _check_lower(z):
    if np.any(np.imag(z) >= 0):
        raise WrongHalfPlane("expected a point of the open lower half-plane")


def eval_inner(psi: InnerFn, w):
    """Value of the symbol ``psi`` at ``w`` with ``Im w >= 0``."""
    _check_upper(w)
    w = np.asarray(w, dtype=complex)
    if isinstance(psi, One):
        out = np.ones_like(w)
    elif isinstance(psi, Shift):
        out = np.exp(1j * w * psi.rho)
    elif isinstance(psi, BlaschkePow):
        out = ((w - 1j) / (w + 1j)) ** psi.k
    else:
        raise UnsupportedVariant(f"unknown inner function {psi!r}")
    return out[()] if out.ndim == 0 else out


def psi_ratio(psi: InnerFn, z):
    """Continuation into the lower half-plane of ``psi(-d) / psi(d)``."""
    _check_lower(z)
    z = np.asarray(z, dtype=complex)
    if isinstance(psi, One):
        out = np.ones_like(z)
    elif isinstance(psi, Shift):
        out = np.exp(-2j * z * psi.rho)
    elif isinstance(psi, BlaschkePow):
        out = ((z + 1j) / (z - 1j)) ** (2 * psi.k)
    else:
        raise UnsupportedVariant(f"unknown inner function {psi!r}")
    return out[()] if out.ndim == 0 else out


def psi_star_exp(psi: InnerFn, mu):
    """Scalar ``conj(psi(conj mu))``: the eigenvalue of ``psi(B)^*`` on ``exp(-i mu x)``."""
    _check_lower(mu)
    return np.conj(eval_inner(psi, np.conj(mu)))


# -- action on exponentials ------------------------------------------------

class ExpPoly:
    """Function ``A exp(-i nu x) + exp(-x) P(x)`` on the half-line.

    The class is closed under the forward shift ``T``, which makes
    ``T^k exp(-i nu x)`` exactly representable.
    """

    def __init__(self, amp, nu, poly=()):
        self.amp = complex(amp)
        self.nu = complex(nu)
        self.poly = np.asarray(poly, dtype=complex) if len(poly) else np.zeros(1, dtype=complex)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.exp(-x) * np.polynomial.polynomial.polyval(x, self.poly)
        if self.amp != 0:
            out = out + self.amp * np.exp(-1j * self.nu * x)
        return out

    def forward_shift(self) -> "ExpPoly":
        amp, nu = self.amp, self.nu
        poly = np.zeros(len(self.poly) + 1, dtype=complex)
        poly[:-1] += self.poly
        # T(x^n e^{-x}) = (x^n - 2 x^{n+1}/(n+1)) e^{-x}
        n = np.arange(len(self.poly))
        poly[1:] += -2.0 * self.poly / (n + 1)
        if amp != 0:
            poly[0] += 2.0 * amp / (1.0 - 1j * nu)
            amp = amp * (nu - 1j) / (nu + 1j)
        return ExpPoly(amp, nu, poly)

    @property
    def decay(self) -> float:
        # polynomial factors are absorbed by halving the rate of exp(-x)
        rates = [1.0 if len(self.poly) == 1 else 0.5]
        if self.amp != 0:
            rates.append(-self.nu.imag)
        return min(rates)


def apply_inner_exp(psi: InnerFn, nu):
    """``psi(B) exp(-i nu x)`` for ``Im nu < 0``.

    Returns ``(g, lo, decay)``: a vectorised callable, the left end of its
    support, and an exponential decay rate of ``|g|``.
    """
    nu = complex(nu)
    _check_lower(nu)
    if isinstance(psi, One):
        return (lambda x: np.exp(-1j * nu * np.asarray(x, dtype=float))), 0.0, -nu.imag
    if isinstance(psi, Shift):
        rho = psi.rho

        def g(x):
            x = np.asarray(x, dtype=float)
            return np.where(x >= rho, np.exp(-1j * nu * (x - rho)), 0j)

        return g, rho, -nu.imag
    if isinstance(psi, BlaschkePow):
        if abs(nu + 1j) < 1e-12:
            f = ExpPoly(0.0, nu, [1.0])
        else:
            f = ExpPoly(1.0, nu)
        for _ in range(psi.k):
            f = f.forward_shift()
        return f, 0.0, f.decay
    raise UnsupportedVariant(f"unknown inner function {psi!r}")


# -- action on general functions -------------------------------------------

def _blaschke_kernel(k: int):
    """Kernel ``L`` with ``T^k g = g + int_0^x L(x-s) g(s) ds``."""
    coef = [math.comb(k, n) * (-2.0) ** n / math.factorial(n - 1) for n in range(1, k + 1)]

    def kern(t):
        return np.exp(-t) * np.polynomial.polynomial.polyval(t, coef)

    return kern


def shift_apply(psi: Shift, f):
    """Right translation by ``rho`` with zero fill on ``[0, rho)``."""
    if not isinstance(psi, Shift):
        raise UnsupportedVariant("shift_apply needs a Shift inner function")
    rho = psi.rho

    def g(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= rho, f(np.maximum(x - rho, 0.0)), 0.0)

    return g


def shift_adjoint(psi: Shift, f):
    """Left translation ``f(x + rho)``; the adjoint of :func:`shift_apply`."""
    if not isinstance(psi, Shift):
        raise UnsupportedVariant("shift_adjoint needs a Shift inner function")
    rho = psi.rho
    return lambda x: f(np.asarray(x, dtype=float) + rho)


def shift_project(psi: Shift, f):
    """Orthogonal projection onto ``psi(B) L2``: zero the pair on ``[0, rho)``."""
    from .model import PairFn

    if not isinstance(psi, Shift):
        raise UnsupportedVariant(
            "shift_project needs a Shift inner function; use blaschke_project for Blaschke powers")
    rho = psi.rho

    def g(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= rho, f(x), 0.0)

    return PairFn(g, decay=f.decay, support=f.support,
                  breakpoints=tuple(sorted(set(f.breakpoints) | {rho})), exact_at_zero=True)


def blaschke_project(psi: BlaschkePow, f, cfg: QuadConfig = DEFAULT_QUAD, decay=0.0):
    """Projection onto ``T^k L2``: remove the first ``k`` Laguerre modes of a scalar ``f``.

    ``decay`` is an exponential decay rate of ``f`` (the basis itself decays
    at rate 1, so the default is always valid).
    """
    if not isinstance(psi, BlaschkePow):
        raise UnsupportedVariant("blaschke_project needs a BlaschkePow inner function")
    coeffs = []
    for n in range(psi.k):
        c = integrate_halfline(lambda x, n=n: f(x) * laguerre_basis(n, x), 1.0 + decay, cfg)
        coeffs.append(c)

    def g(x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(f(x), dtype=complex)
        for n, c in enumerate(coeffs):
            out = out - c * laguerre_basis(n, x)
        return out

    return g


def apply_inner(psi: InnerFn, f, cfg: QuadConfig = DEFAULT_QUAD):
    """``psi(B) f`` for a smooth scalar ``f`` on the half-line.

    The Blaschke case evaluates the Volterra form of ``T^k`` by quadrature,
    all requested nodes at once.
    """
    if isinstance(psi, One):
        return f
    if isinstance(psi, Shift):
        return shift_apply(psi, f)
    if isinstance(psi, BlaschkePow):
        kern = _blaschke_kernel(psi.k)

        def g(x):
            x = np.asarray(x, dtype=float)
            flat = x.ravel()

            def integrand(t):
                # t has shape (P, 15); output (P, 15, len(flat))
                s = t[..., None] * flat
                return flat * kern(flat - s) * f(s)

            conv = integrate_finite(integrand, 0.0, 1.0, cfg)
            return (np.asarray(f(flat), dtype=complex) + conv).reshape(x.shape)

        return g
    raise UnsupportedVariant(f"unknown inner function {psi!r}")


def apply_inner_adjoint_at(psi: InnerFn, f, x0: float, decay: float, cfg: QuadConfig = DEFAULT_QUAD):
    """Value at ``x0`` of ``psi(B)^* f`` for a scalar ``f`` decaying at rate ``decay``."""
    if isinstance(psi, One):
        return complex(np.asarray(f(np.array([x0])))[0])
    if isinstance(psi, Shift):
        return complex(np.asarray(f(np.array([x0 + psi.rho])))[0])
    if isinstance(psi, BlaschkePow):
        kern = _blaschke_kernel(psi.k)
        rate = (1.0 if psi.k == 1 else 0.5) + decay
        tail = integrate_halfline(lambda s: kern(s - x0) * f(s), rate, cfg, lo=x0)
        return complex(np.asarray(f(np.array([x0])))[0]) + tail
    raise UnsupportedVariant(f"unknown inner function {psi!r}")


# -- Laguerre machinery ----------------------------------------------------

def laguerre_fn(n: int, x):
    """Laguerre function ``q_n(x) = exp(-x/2) L_n(x)`` via the three-term recurrence."""
    if n < 0:
        raise InvalidInput("Laguerre index must be non-negative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        cur = prev
    else:
        cur = 1.0 - x
        for m in range(1, n):
            prev, cur = cur, ((2 * m + 1 - x) * cur - m * prev) / (m + 1)
    out = np.exp(-0.5 * x) * cur
    return out[()] if out.ndim == 0 else out


def laguerre_basis(n: int, x):
    """Normalised basis function ``sqrt(2) q_n(2x)`` of ``L2(0, inf)``."""
    return math.sqrt(2.0) * laguerre_fn(n, 2.0 * np.asarray(x, dtype=float))


def laguerre_coeffs(profile, component: int, n_max: int):
    """Coefficients of ``q_j`` for a polynomial-exponential profile in the basis ``sqrt(2) q_n(2x)``.

    Gauss-Laguerre quadrature of sufficient order is exact here because the
    integrand is ``exp(-y)`` times a polynomial.
    """
    coeffs = np.asarray(profile.coeffs, dtype=complex)
    m = len(coeffs) - 1
    if n_max < m:
        raise InvalidInput(f"n_max={n_max} is below the polynomial degree {m}")
    if component not in (1, 2):
        raise InvalidInput("component must be 1 or 2")
    if component == 2:
        coeffs = coeffs * (-1.0) ** np.arange(m + 1)
    nodes, weights = np.polynomial.laguerre.laggauss(n_max + m + 2)
    p = np.polynomial.polynomial.polyval(nodes / 2.0, coeffs)
    out = np.empty(n_max + 1, dtype=complex)
    for n in range(n_max + 1):
        ln = laguerre_fn(n, nodes) * np.exp(nodes / 2.0)
        out[n] = math.sqrt(2.0) / 2.0 * np.sum(weights * p * ln)
    return out


def laguerre_shift(coeffs, k: int = 1):
    """Coefficient-space action of ``T^k``: ``e_n -> e_{n+k}``."""
    return np.concatenate([np.zeros(k, dtype=complex), np.asarray(coeffs, dtype=complex)])


# -- JSON ------------------------------------------------------------------

def inner_from_json(obj) -> InnerFn:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError(f"inner function descriptor must be an object with 'kind': {obj!r}")
    kind = obj["kind"]
    allowed = {"one": {"kind"}, "shift": {"kind", "rho"}, "blaschke": {"kind", "k"}}
    if kind not in allowed:
        raise ConfigError(f"unknown inner function kind {kind!r}")
    extra = set(obj) - allowed[kind]
    if extra:
        raise ConfigError(f"unknown fields for inner function {kind!r}: {sorted(extra)}")
    if kind == "one":
        return One()
    try:
        if kind == "shift":
            return Shift(float(obj["rho"]))
        return BlaschkePow(int(obj["k"]))
    except KeyError as exc:
        raise ConfigError(f"inner function {kind!r} is missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad inner function parameters: {exc}") from exc


def inner_to_json(psi: InnerFn) -> dict:
    if isinstance(psi, One):
        return {"kind": "one"}
    if isinstance(psi, Shift):
        return {"kind": "shift", "rho": psi.rho}
    return {"kind": "blaschke", "k": psi.k}
