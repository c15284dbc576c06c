"""The 2x2 S-matrix: Krein-Naimark route, reflection/transmission route and
closed forms for the analytic families."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AtPole, AxisPoint, ExtractionUnstable, UnsupportedFamily
from .innerfunc import Shift, apply_inner_adjoint_at, apply_inner_exp, eval_inner, psi_ratio
from .model import EvenBox, Model, OddBox, PairFn, PolyExp, Zero, as_cplx
from .quad import DEFAULT_QUAD, QuadConfig
from .spectral import _check_z, c_coeff, krein_resolvent_fn, pole_guard, weyl_titchmarsh

__all__ = [
    "SMat2", "RTCoeffs", "s_matrix", "s_matrix_closed", "rt_coefficients", "s_matrix_rt",
    "singular_values", "RT_SPACING", "RT_TOL",
]

RT_SPACING = 0.37
RT_TOL = 1e-6


@dataclass(frozen=True)
class SMat2:
    s11: complex
    s12: complex
    s21: complex
    s22: complex

    def __post_init__(self):
        for name in ("s11", "s12", "s21", "s22"):
            object.__setattr__(self, name, as_cplx(getattr(self, name), name))

    @classmethod
    def from_array(cls, m) -> "SMat2":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def diag(cls, d1, d2) -> "SMat2":
        return cls(d1, 0j, 0j, d2)

    def array(self) -> np.ndarray:
        return np.array([[self.s11, self.s12], [self.s21, self.s22]], dtype=complex)

    def adjoint(self) -> "SMat2":
        return SMat2(self.s11.conjugate(), self.s21.conjugate(),
                     self.s12.conjugate(), self.s22.conjugate())

    def max_abs_diff(self, other: "SMat2") -> float:
        return float(np.max(np.abs(self.array() - other.array())))

    def max_rel_diff(self, other: "SMat2") -> float:
        """Entrywise difference scaled by the largest entry of ``other``."""
        return self.max_abs_diff(other) / max(1e-300, float(np.max(np.abs(other.array()))))

    def norm(self) -> float:
        return singular_values(self)[0]

    def entries(self) -> tuple:
        return (self.s11, self.s12, self.s21, self.s22)


def singular_values(m: SMat2) -> tuple:
    """``(sigma1, sigma2)`` with ``sigma1 >= sigma2 >= 0`` from the 2x2 closed form."""
    fro2 = sum(abs(e) ** 2 for e in m.entries())
    det = abs(m.s11 * m.s22 - m.s12 * m.s21)
    disc = math.sqrt(max(0.0, fro2 * fro2 - 4.0 * det * det))
    s1 = math.sqrt(0.5 * (fro2 + disc))
    s2 = det / s1 if s1 > 0 else 0.0
    return s1, min(s2, s1)


def _psi_diag(model: Model, z: complex) -> tuple:
    p1, p2 = model.profile.inner
    return complex(psi_ratio(p1, z)), complex(psi_ratio(p2, z))


def s_matrix(model: Model, z, method: str = "auto", cfg: QuadConfig = DEFAULT_QUAD) -> SMat2:
    """S-matrix by the Krein-Naimark route.

    ``S = diag(Psi_1, Psi_2) - (2iz / (a - W)) [c(z, q_i) conj(c(-conj z, q_j))]``.

    Raises
    ------
    AtPole
        If ``a - W(z^2)`` vanishes within :func:`pole_guard`.
    """
    z = _check_z(z)
    d1, d2 = _psi_diag(model, z)
    if model.is_infinite:
        return SMat2.diag(d1, d2)
    p = model.profile
    denom = model.a - complex(weyl_titchmarsh(p, z, method, cfg))
    if abs(denom) < pole_guard(model.a):
        raise AtPole(f"a - W(z^2) = {denom:.3e} at z = {z}")
    zt = -z.conjugate()
    left = np.array([c_coeff(p, z, j, method, cfg) for j in (1, 2)])
    right = np.conj([c_coeff(p, zt, j, method, cfg) for j in (1, 2)])
    m = np.diag([d1, d2]) - (2j * z / denom) * np.outer(left, right)
    return SMat2.from_array(m)


def s_matrix_closed(model: Model, z) -> SMat2:
    """Literal closed-form S-matrix of the Zero, box and degree-0 exponential families."""
    z = _check_z(z)
    p = model.profile
    if model.is_infinite:
        d1, d2 = _psi_diag(model, z)
        return SMat2.diag(d1, d2)
    a = model.a
    if isinstance(p, Zero):
        s = 1.0 / (a + 2j * z)
        return SMat2(a * s, -2j * z * s, -2j * z * s, a * s)
    if isinstance(p, PolyExp) and p.degree == 0:
        M = p.M
        w = -2j * z - 4 * M.real / (1 + 1j * z) + abs(M) ** 2 / (1 + 1j * z) ** 2
        _guard(a, w, z)
        big = (z * z + 1) ** 2
        k = 2j * z * (z * z + 1 - M) * (z * z + 1 - M.conjugate()) / (big * (a - w))
        ph = ((z + 1j) / (z - 1j)) ** 2
        return SMat2(ph * (1 - k), -ph * k, -ph * k, ph * (1 - k))
    if isinstance(p, (EvenBox, OddBox)):
        M, rho = p.M, p.rho
        e = np.exp(-1j * z * rho)
        g = (e - 2) ** 2 - 2j * z * rho - 1
        w = -2j * z + abs(M) ** 2 / (1j * z ** 3) * g
        kap = 1 - np.cos(z * rho)
        ph = np.exp(-2j * z * rho)
        z2, z4 = z * z, z ** 4
        if isinstance(p, EvenBox):
            w = w - 4 * M.real / (1j * z) * (1 - e)
            _guard(a, w, z)
            k = 2j * (z2 - kap * M) * (z2 - kap * M.conjugate()) / (z ** 3 * (a - w))
            return SMat2(ph * (1 - k), -ph * k, -ph * k, ph * (1 - k))
        _guard(a, w, z)
        f = 2j / (z ** 3 * (a - w))
        n11 = z4 - 2 * kap * M.real * z2 + kap ** 2 * abs(M) ** 2
        n22 = z4 + 2 * kap * M.real * z2 + kap ** 2 * abs(M) ** 2
        n12 = z4 - 2j * kap * M.imag * z2 - kap ** 2 * abs(M) ** 2
        n21 = z4 + 2j * kap * M.imag * z2 - kap ** 2 * abs(M) ** 2
        return SMat2(ph * (1 - f * n11), -ph * f * n12,
                     -ph * f * n21, ph * (1 - f * n22))
    raise UnsupportedFamily(f"no closed-form S-matrix for profile {p.kind!r}")


def _guard(a, w, z):
    if abs(a - w) < pole_guard(a):
        raise AtPole(f"a - W(z^2) = {abs(a - w):.3e} at z = {z}")


@dataclass(frozen=True)
class RTCoeffs:
    r1: complex
    t1: complex
    r2: complex
    t2: complex


def _reference_point(model: Model) -> float:
    p = model.profile
    end = p.support if math.isfinite(p.support) else 0.0
    shift = max([psi.rho for psi in p.inner if isinstance(psi, Shift)], default=0.0)
    return end + shift + 1.0


def _outgoing(model: Model, z: complex, col: int, x0s, method, cfg) -> np.ndarray:
    """``(alpha_z, beta_z)`` at each reference point for incidence column ``col``."""
    psi = model.profile.inner
    nu = -z.conjugate()
    amp = [0j, 0j]
    amp[col] = complex(np.conj(eval_inner(psi[col], -z)))
    parts = [apply_inner_exp(psi[j], nu) for j in (0, 1)]

    def h(x):
        x = np.asarray(x, dtype=float)
        return np.stack([amp[j] * parts[j][0](x) for j in (0, 1)])

    g = PairFn(h, decay=min(parts[0][2], parts[1][2]),
               breakpoints=tuple(sorted({parts[0][1], parts[1][1]} - {0.0})))
    r = krein_resolvent_fn(model, g, z, method, cfg)
    lam = nu * nu - z * z
    out = []
    for x0 in x0s:
        vals = []
        for j in (0, 1):
            adj = apply_inner_adjoint_at(psi[j], r.component(j + 1), x0, r.decay, cfg)
            inc = amp[j] * np.exp(-1j * nu * x0)
            vals.append((-inc + lam * adj) * np.exp(1j * z * x0))
        out.append(vals)
    return np.array(out)


def rt_coefficients(model: Model, z, method: str = "auto", cfg: QuadConfig = DEFAULT_QUAD) -> RTCoeffs:
    """Reflection and transmission coefficients for both incidence directions.

    The response to each incident wave is projected back with ``psi(B)^*``
    and read off at two reference points beyond the interaction region.

    Raises
    ------
    AxisPoint
        On the negative imaginary axis, where the extraction degenerates.
    ExtractionUnstable
        If the two reference points disagree by more than ``RT_TOL``.
    """
    z = _check_z(z)
    if abs(z.real) <= 1e-12 * abs(z):
        raise AxisPoint(f"reflection/transmission extraction needs Re z != 0, got {z}")
    x0 = _reference_point(model)
    x0s = (x0, x0 + RT_SPACING)
    psi = model.profile.inner
    den = [complex(np.conj(eval_inner(psi[j], z.conjugate()))) for j in (0, 1)]
    cols = []
    for col in (0, 1):
        ab = _outgoing(model, z, col, x0s, method, cfg)
        spread = np.max(np.abs(ab[0] - ab[1]))
        if spread > RT_TOL * max(1.0, float(np.max(np.abs(ab[0])))):
            raise ExtractionUnstable(
                f"outgoing amplitudes differ by {spread:.3e} between reference points")
        cols.append(ab[0])
    (a1, b1), (a2, b2) = cols
    return RTCoeffs(r1=a1 / den[0], t1=b1 / den[1], r2=b2 / den[1], t2=a2 / den[0])


def s_matrix_rt(model: Model, z, method: str = "auto", cfg: QuadConfig = DEFAULT_QUAD) -> SMat2:
    """S-matrix assembled from reflection and transmission coefficients."""
    z = _check_z(z)
    rt = rt_coefficients(model, z, method, cfg)
    psi = model.profile.inner
    up = [complex(np.conj(eval_inner(p, z.conjugate()))) for p in psi]
    dn = [complex(np.conj(eval_inner(p, -z))) for p in psi]
    th = [[up[n] / dn[m] for m in (0, 1)] for n in (0, 1)]
    d = 1j * z.imag / z
    pre = -z / z.real
    return SMat2(pre * (th[0][0] * rt.r1 + d), pre * th[0][1] * rt.t2,
                 pre * th[1][0] * rt.t1, pre * (th[1][1] * rt.r2 + d))
