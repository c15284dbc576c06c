"""Free resolvent, eigenfunction, Weyl-Titchmarsh function, c-coefficients and
the Krein-Naimark resolvent.

All functions work in the variable ``z`` with ``Im z < 0`` and spectral
parameter ``lambda = z**2``.  Each quantity has a closed-form path for the
analytic families and a quadrature path; ``method`` selects between them
(``"auto"`` prefers the closed form).
"""
from __future__ import annotations

import math

import numpy as np

from .errors import AtPole, InvalidInput, NonDecaying, NotLowerHalfPlane, UnsupportedFamily, \
    ZeroSpectralParameter
from .innerfunc import apply_inner_exp, psi_star_exp
from .model import EvenBox, Model, OddBox, PairFn, PolyExp, Profile, Zero
from .quad import DEFAULT_QUAD, QuadConfig, complex_derivative, integrate_finite, \
    integrate_halfline

__all__ = [
    "free_resolvent", "profile_resolvent", "eigenfunction_u", "weyl_titchmarsh",
    "weyl_titchmarsh_deriv", "weyl_titchmarsh_dz", "c_coeff", "krein_resolvent",
    "krein_resolvent_fn", "pole_guard", "has_closed_form", "eigenfunction_pair",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W
_TAIL = math.log(1e17)


def pole_guard(a: complex) -> float:
    return 1e-10 * (1.0 + abs(a))


def _check_z(z) -> complex:
    z = complex(z)
    if z == 0:
        raise ZeroSpectralParameter("z = 0 is the branch point of sqrt(lambda)")
    if not z.imag < 0:
        raise NotLowerHalfPlane(f"expected Im z < 0, got {z}")
    return z


def _check_z_array(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ZeroSpectralParameter("z = 0 is the branch point of sqrt(lambda)")
    if np.any(z.imag >= 0):
        raise NotLowerHalfPlane("expected Im z < 0")
    return z


def _profile(m) -> Profile:
    return m.profile if isinstance(m, Model) else m


def has_closed_form(profile: Profile) -> bool:
    return isinstance(profile, (Zero, EvenBox, OddBox)) or (
        isinstance(profile, PolyExp) and profile.degree == 0)


def _use_closed(profile: Profile, method: str) -> bool:
    if method not in ("auto", "closed", "quad"):
        raise InvalidInput(f"method must be auto, closed or quad, got {method!r}")
    if method == "quad":
        return False
    ok = has_closed_form(profile)
    if method == "closed" and not ok:
        raise UnsupportedFamily(f"no closed form for profile {profile.kind!r}")
    return ok


def _scalar(v):
    v = np.asarray(v)
    return complex(v) if v.ndim == 0 else v


# -- free resolvent --------------------------------------------------------

def _refine(knots: np.ndarray, hmax: float) -> np.ndarray:
    """Subdivide each knot interval into equal panels no longer than ``hmax``."""
    width = np.diff(knots)
    n = np.maximum(1, np.ceil(width / hmax).astype(int))
    first = np.repeat(np.cumsum(n) - n, n)
    pos = np.arange(n.sum()) - first
    return np.concatenate([np.repeat(knots[:-1], n) + pos * np.repeat(width / n, n), knots[-1:]])


def _scan(z: complex, edges: np.ndarray, seg: np.ndarray) -> np.ndarray:
    """Values at every edge of ``I[k] = sum_{j<k} exp(-iz (e_k - e_{j+1})) seg_j``.

    Evaluated by cumulative sums over chunks short enough that the
    exponential weights stay far from overflow.
    """
    n = seg.shape[1]
    out = np.zeros((seg.shape[0], n + 1), dtype=complex)
    span = 300.0 / max(-z.imag, 1e-300)
    start = 0
    while start < n:
        stop = int(np.searchsorted(edges, edges[start] + span, side="right")) - 1
        stop = min(max(stop, start + 1), n)
        rel = edges[start + 1:stop + 1] - edges[start]
        acc = np.cumsum(np.exp(1j * z * rel) * seg[:, start:stop], axis=1)
        out[:, start + 1:stop + 1] = np.exp(-1j * z * rel) * (out[:, start:start + 1] + acc)
        start = stop
    return out


def free_resolvent(f: PairFn, z, x, cfg: QuadConfig = DEFAULT_QUAD) -> np.ndarray:
    """``(H_inf - z^2)^{-1} f`` at the points ``x``; returns shape ``(2,) + x.shape``.

    With ``I1(x) = int_0^x exp(-iz(x-s)) f`` and ``I2(x) = int_x^inf exp(-iz(s-x)) f``
    the value is ``(i/2z) [I2(0) exp(-izx) - I1(x) - I2(x)]``.  Both integrals
    are accumulated panel by panel with a fixed 24-point Gauss rule on panels
    short enough for the rule to be exact to rounding, so one call serves an
    arbitrary batch of points.
    """
    z = _check_z(z)
    x = np.asarray(x, dtype=float)
    shape = x.shape
    xs = x.ravel()
    if np.any(xs < 0):
        raise InvalidInput("resolvent points must satisfy x >= 0")
    compact = math.isfinite(f.support)
    if compact:
        end = f.support
    else:
        if not f.decay > 0:
            raise NonDecaying("free_resolvent needs a compactly supported or decaying pair")
        rate = f.decay
        far = xs.max(initial=0.0)
        end = max(_TAIL / rate, far + _TAIL / (rate - z.imag))
    out = np.zeros((2, xs.size), dtype=complex)
    if end <= 0:
        return out.reshape((2,) + shape)
    inside = xs[xs <= end]
    hmax = min(1.0, 2.0 / (abs(z) + 1.0))
    knots = np.unique(np.concatenate([[0.0, end], [b for b in f.breakpoints if 0 < b < end], inside]))
    edges = _refine(knots, hmax)
    a, b = edges[:-1], edges[1:]
    d = b - a
    s = a[:, None] + d[:, None] * _GL_X[None, :]
    fv = f(s)
    wd = d[:, None] * _GL_W[None, :]
    fwd = np.sum(np.exp(-1j * z * (b[:, None] - s)) * fv * wd, axis=-1)
    bwd = np.sum(np.exp(-1j * z * (s - a[:, None])) * fv * wd, axis=-1)
    i1 = _scan(z, edges, fwd)
    i2 = _scan(z, edges[-1] - edges[::-1], bwd[:, ::-1])[:, ::-1]
    i0 = i2[:, 0]
    pref = 0.5j / z
    mask = xs <= end
    idx = np.searchsorted(edges, xs[mask])
    xm = xs[mask]
    out[:, mask] = pref * (i0[:, None] * np.exp(-1j * z * xm) - i1[:, idx] - i2[:, idx])
    if compact and np.any(~mask):
        xr = xs[~mask]
        # beyond the support only the outgoing wave survives
        out[:, ~mask] = pref * (i0[:, None] * np.exp(-1j * z * xr)
                                - i1[:, -1][:, None] * np.exp(-1j * z * (xr - end)))
    return out.reshape((2,) + shape)


def profile_resolvent(profile: Profile, z, x, method: str = "auto",
                      cfg: QuadConfig = DEFAULT_QUAD) -> np.ndarray:
    """``(H_inf - z^2)^{-1} q`` for the profile pair, shape ``(2,) + x.shape``."""
    z = _check_z(z)
    x = np.asarray(x, dtype=float)
    closed = _use_closed(profile, method)
    if closed and isinstance(profile, PolyExp) and abs(1 + z * z) < 1e-6:
        closed = method == "closed"
    if closed:
        if isinstance(profile, Zero):
            return np.zeros((2,) + x.shape, dtype=complex)
        if isinstance(profile, (EvenBox, OddBox)):
            M, rho = profile.M, profile.rho
            m = np.minimum(x, rho)
            ez = np.exp(-1j * z * rho)
            v = -(M / (2 * z * z)) * ((ez + np.exp(1j * z * m) - 2) * np.exp(-1j * z * x)
                                      + (np.exp(-1j * z * m) - ez) * np.exp(1j * z * x))
            return np.stack([v, profile.sign2 * v])
        v = profile.M * (np.exp(-1j * z * x) - np.exp(-x)) / (1 + z * z)
        return np.stack([v, v])
    return free_resolvent(profile.pair(), z, x, cfg)


def _u_decay(p: Profile, mu: complex) -> float:
    return min(p.decay, -mu.imag) if p.decay > 0 else -mu.imag


def eigenfunction_u(model, mu, x, method: str = "auto", cfg: QuadConfig = DEFAULT_QUAD):
    """``u_mu = exp(-i mu x) (1, 1) - (H_inf - mu^2)^{-1} q`` at ``x``."""
    mu = _check_z(mu)
    x = np.asarray(x, dtype=float)
    e = np.exp(-1j * mu * x)
    return np.stack([e, e]) - profile_resolvent(_profile(model), mu, x, method, cfg)


def eigenfunction_pair(model, mu, method: str = "auto", cfg: QuadConfig = DEFAULT_QUAD) -> PairFn:
    """``u_mu`` as a :class:`PairFn`."""
    mu = _check_z(mu)
    p = _profile(model)
    return PairFn(lambda x: eigenfunction_u(p, mu, x, method, cfg), decay=_u_decay(p, mu),
                  breakpoints=p.breakpoints, exact_at_zero=True)


# -- Weyl-Titchmarsh function ----------------------------------------------

def _box_terms(z, rho):
    e = np.exp(-1j * z * rho)
    g = (e - 2) ** 2 - 2j * z * rho - 1
    gp = -2j * rho * e * (e - 2) - 2j * rho
    return e, g, gp


def _w_closed(p: Profile, z):
    if isinstance(p, Zero):
        return -2j * z
    if isinstance(p, (EvenBox, OddBox)):
        e, g, _ = _box_terms(z, p.rho)
        w = -2j * z + abs(p.M) ** 2 / (1j * z ** 3) * g
        if isinstance(p, EvenBox):
            w = w - 4 * p.M.real / (1j * z) * (1 - e)
        return w
    M = p.M
    return -2j * z - 4 * M.real / (1 + 1j * z) + abs(M) ** 2 / (1 + 1j * z) ** 2


def _dwdz_closed(p: Profile, z):
    if isinstance(p, Zero):
        return -2j * np.ones_like(z)
    if isinstance(p, (EvenBox, OddBox)):
        e, g, gp = _box_terms(z, p.rho)
        d = -2j + abs(p.M) ** 2 / 1j * (gp / z ** 3 - 3 * g / z ** 4)
        if isinstance(p, EvenBox):
            d = d - 4 * p.M.real / 1j * (1j * p.rho * e / z - (1 - e) / z ** 2)
        return d
    M = p.M
    return -2j + 4j * M.real / (1 + 1j * z) ** 2 - 2j * abs(M) ** 2 / (1 + 1j * z) ** 3


def _halfline_or_finite(integrand, profile: Profile, rate: float, cfg: QuadConfig, lo=0.0):
    if math.isfinite(profile.support):
        if profile.support <= lo:
            return 0j
        return integrate_finite(integrand, lo, profile.support, cfg, breakpoints=profile.breakpoints)
    return integrate_halfline(integrand, rate, cfg, lo=lo, breakpoints=profile.breakpoints)


def _w_quad(p: Profile, z: complex, cfg: QuadConfig) -> complex:
    if isinstance(p, Zero):
        return -2j * z
    pair = p.pair()

    def integrand(x):
        qv = pair(x)
        v = free_resolvent(pair, z, x, cfg)
        return np.sum(-2.0 * np.exp(-1j * z * x) * qv.real + v * np.conj(qv), axis=0)

    # the resolvent of q decays only as fast as the slower of q and exp(-izx)
    rate = p.decay + min(p.decay, -z.imag)
    return -2j * z + _halfline_or_finite(integrand, p, rate, cfg)


def weyl_titchmarsh(model, z, method: str = "auto", cfg: QuadConfig = DEFAULT_QUAD):
    """``W(z^2)``; vectorised over ``z`` on the closed-form path."""
    p = _profile(model)
    z = _check_z_array(z)
    if _use_closed(p, method):
        return _scalar(_w_closed(p, z))
    return _scalar(np.vectorize(lambda t: _w_quad(p, complex(t), cfg), otypes=[complex])(z))


def weyl_titchmarsh_dz(model, z, method: str = "auto", cfg: QuadConfig = DEFAULT_QUAD):
    """``d W(z^2) / dz``: closed form, or extrapolated differences of the quadrature ``W``."""
    p = _profile(model)
    z = _check_z_array(z)
    if _use_closed(p, method):
        return _scalar(_dwdz_closed(p, z))

    def one(t):
        t = complex(t)
        # keep the difference stencil inside the lower half-plane
        h = 0.25 * min(1.0, abs(t), -t.imag)
        val, _ = complex_derivative(lambda s: _w_quad(p, s, cfg), t, h=h, tol=1e-6)
        return val

    return _scalar(np.vectorize(one, otypes=[complex])(z))


def weyl_titchmarsh_deriv(model, z, method: str = "auto", cfg: QuadConfig = DEFAULT_QUAD):
    """``W'(lambda) = dW/dlambda`` at ``lambda = z^2``, computed as ``(dW/dz) / (2z)``."""
    z = _check_z_array(z)
    return _scalar(np.asarray(weyl_titchmarsh_dz(model, z, method, cfg)) / (2 * z))


# -- coefficients c(mu, q_j) -----------------------------------------------

def _c_closed(p: Profile, mu, j: int):
    if isinstance(p, Zero):
        return np.ones_like(mu)
    if isinstance(p, (EvenBox, OddBox)):
        kappa = 1 - np.cos(mu * p.rho)
        sgn = -1.0 if (j == 1 or isinstance(p, EvenBox)) else 1.0
        return np.exp(-1j * mu * p.rho) * (1 + sgn * kappa * p.M / mu ** 2)
    M = p.M
    return (mu ** 2 + 1 - M) / (mu - 1j) ** 2


def _c_quad(p: Profile, mu: complex, j: int, cfg: QuadConfig) -> complex:
    psi = p.inner[j - 1]
    base = complex(psi_star_exp(psi, mu))
    if isinstance(p, Zero):
        return base
    g, lo, g_decay = apply_inner_exp(psi, mu)
    pair = p.pair()

    def integrand(x):
        v = free_resolvent(pair, mu, x, cfg)[j - 1]
        return v * np.conj(g(x))

    rate = g_decay + (min(p.decay, -mu.imag) if p.decay > 0 else -mu.imag)
    bps = tuple(b for b in p.breakpoints if b > lo)
    ip = integrate_halfline(integrand, rate, cfg, lo=lo, breakpoints=bps)
    return base + 2.0 * mu.imag * ip


def c_coeff(model, mu, j: int, method: str = "auto", cfg: QuadConfig = DEFAULT_QUAD):
    """Coefficient ``c(mu, q_j)`` of the S-matrix numerator."""
    if j not in (1, 2):
        raise InvalidInput("j must be 1 or 2")
    p = _profile(model)
    mu = _check_z_array(mu)
    if _use_closed(p, method):
        return _scalar(_c_closed(p, mu, j))
    return _scalar(np.vectorize(lambda t: _c_quad(p, complex(t), j, cfg), otypes=[complex])(mu))


# -- Krein-Naimark resolvent -----------------------------------------------

def krein_resolvent_fn(model: Model, f: PairFn, z, method: str = "auto",
                       cfg: QuadConfig = DEFAULT_QUAD) -> PairFn:
    """``(H_aq - z^2)^{-1} f`` as a :class:`PairFn`; the rank-one coefficient is computed once."""
    z = _check_z(z)
    if model.is_infinite:
        coef = 0j
    else:
        p = model.profile
        denom = model.a - complex(weyl_titchmarsh(p, z, method, cfg))
        if abs(denom) < pole_guard(model.a):
            raise AtPole(f"a - W(z^2) = {denom:.3e} at z = {z}")
        zt = -z.conjugate()

        def integrand(s):
            u = eigenfunction_u(p, zt, s, method, cfg)
            return np.sum(f(s) * np.conj(u), axis=0)

        bps = tuple(sorted(set(f.breakpoints) | set(p.breakpoints)))
        if math.isfinite(f.support):
            proj = integrate_finite(integrand, 0.0, f.support, cfg, breakpoints=bps)
        else:
            if not f.decay > 0:
                raise NonDecaying("krein_resolvent needs a compactly supported or decaying pair")
            proj = integrate_halfline(integrand, f.decay + _u_decay(p, z), cfg, breakpoints=bps)
        coef = proj / denom

    def g(x):
        out = free_resolvent(f, z, x, cfg)
        if coef != 0:
            out = out + coef * eigenfunction_u(model.profile, z, x, method, cfg)
        return out

    rate = _u_decay(model.profile, z)
    if f.decay > 0:
        rate = min(rate, f.decay)
    bps = tuple(sorted(set(f.breakpoints) | set(model.profile.breakpoints)))
    return PairFn(g, decay=rate, breakpoints=bps, exact_at_zero=True)


def krein_resolvent(model: Model, f: PairFn, z, x, method: str = "auto",
                    cfg: QuadConfig = DEFAULT_QUAD) -> np.ndarray:
    """``(H_aq - z^2)^{-1} f`` at ``x``: the free resolvent plus a rank-one correction.

    Raises
    ------
    AtPole
        If ``|a - W(z^2)|`` is below :func:`pole_guard`.
    """
    return krein_resolvent_fn(model, f, z, method, cfg)(np.asarray(x, dtype=float))
