"""Zeros of ``a - W(z^2)`` in the lower half-plane: counting, location,
multiplicity, S-matrix residues and classification."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (AtPole, BoundaryZero, BudgetExceeded, InvalidInput, NonConvergent,
                     NonIntegerWinding, NotAPole, PoleOnContour, ToleranceNotMet)
from .model import Model, Region, region_of
from .quad import DEFAULT_QUAD, QuadConfig, complex_derivative, integrate_finite
from .smatrix import SMat2, s_matrix
from .spectral import has_closed_form, weyl_titchmarsh, weyl_titchmarsh_deriv, weyl_titchmarsh_dz

__all__ = [
    "SearchRect", "PoleConfig", "PoleClass", "PoleReport", "ConsistencyReport",
    "count_zeros_rect", "find_poles", "classify_pole", "residue", "region_consistency",
    "pole_function",
]

_MIN_IM = -1e-3


@dataclass(frozen=True)
class SearchRect:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        vals = (self.re_min, self.re_max, self.im_min, self.im_max)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInput("search rectangle bounds must be finite")
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise InvalidInput("search rectangle must have nonzero area")
        if self.im_max > _MIN_IM:
            raise InvalidInput(f"search rectangle needs im_max <= {_MIN_IM}, got {self.im_max}")

    @property
    def diameter(self) -> float:
        return math.hypot(self.re_max - self.re_min, self.im_max - self.im_min)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def contains(self, z: complex, slack: float = 0.0) -> bool:
        return (self.re_min - slack <= z.real <= self.re_max + slack
                and self.im_min - slack <= z.imag <= self.im_max + slack)

    def corners(self) -> list:
        return [complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max)]

    def split(self, fx: float = 0.5, fy: float = 0.5) -> list:
        xm = self.re_min + fx * (self.re_max - self.re_min)
        ym = self.im_min + fy * (self.im_max - self.im_min)
        return [SearchRect(self.re_min, xm, self.im_min, ym), SearchRect(xm, self.re_max, self.im_min, ym),
                SearchRect(self.re_min, xm, ym, self.im_max), SearchRect(xm, self.re_max, ym, self.im_max)]

    def grown(self, d: float) -> "SearchRect":
        return SearchRect(self.re_min - d, self.re_max + d, self.im_min - d,
                          min(self.im_max + d, _MIN_IM))


@dataclass(frozen=True)
class PoleConfig:
    refine_tol: float = 1e-10
    wprime_tol: float = 1e-6
    silent_tol: float = 1e-8
    cluster_tol: float = 1e-6
    n_res: int = 64
    r_res: float = 1e-2
    order_radius: float = 1e-3
    max_cells: int = 4000
    max_retries: int = 6
    newton_iter: int = 80
    quad: QuadConfig = field(default_factory=lambda: DEFAULT_QUAD)

    def __post_init__(self):
        for name in ("refine_tol", "wprime_tol", "silent_tol", "cluster_tol", "r_res", "order_radius"):
            if not getattr(self, name) > 0:
                raise InvalidInput(f"{name} must be positive")
        if self.n_res < 8 or self.max_cells < 1 or self.max_retries < 0:
            raise InvalidInput("n_res >= 8, max_cells >= 1 and max_retries >= 0 are required")


DEFAULT_POLES = PoleConfig()


class PoleClass(enum.Enum):
    SIMPLE = "Simple"
    EXCEPTIONAL = "Exceptional"
    SILENT = "Silent"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class PoleReport:
    z: complex
    lam: complex
    order: int
    residue: SMat2
    classification: PoleClass
    region: Region
    residual: float
    wprime: complex

    def to_json(self) -> dict:
        cj = lambda c: {"re": c.real, "im": c.imag}  # noqa: E731
        return {"z": cj(self.z), "lambda": cj(self.lam), "order": self.order,
                "residue": [[cj(self.residue.s11), cj(self.residue.s12)],
                            [cj(self.residue.s21), cj(self.residue.s22)]],
                "classification": str(self.classification), "region": str(self.region),
                "residual": self.residual, "wprime": cj(self.wprime)}


# -- argument principle ----------------------------------------------------

_WIND_QUAD = QuadConfig(abs_tol=1e-9, rel_tol=1e-9, max_subdivisions=20000)


def _edges(rect: SearchRect):
    c = rect.corners()
    return [(c[k], c[(k + 1) % 4]) for k in range(4)]


def _boundary_clear(f, rect: SearchRect, n: int = 48) -> bool:
    pts = []
    for z0, z1 in _edges(rect):
        t = np.linspace(0.0, 1.0, n, endpoint=False)
        pts.append(z0 + (z1 - z0) * t)
    z = np.concatenate(pts)
    v = np.abs(np.asarray(f(z), dtype=complex))
    if not np.all(np.isfinite(v)):
        return False
    # a zero within roughly one sample spacing of the contour is too close
    return bool(v.min() > 1e-9 * max(1.0, float(np.median(v))))


def _winding_integral(f, fp, rect: SearchRect) -> complex:
    total = 0j
    for z0, z1 in _edges(rect):
        dz = z1 - z0

        def integrand(t, z0=z0, dz=dz):
            z = z0 + dz * t
            return np.asarray(fp(z), dtype=complex) / np.asarray(f(z), dtype=complex) * dz

        total += integrate_finite(integrand, 0.0, 1.0, _WIND_QUAD)
    return total / (2j * math.pi)


def _winding_arg(f, rect: SearchRect) -> complex:
    """Winding number from continuous argument increments (no derivative needed)."""
    total = 0.0
    for z0, z1 in _edges(rect):
        t = np.linspace(0.0, 1.0, 33)
        vals = np.asarray(f(z0 + (z1 - z0) * t), dtype=complex)
        for _ in range(40):
            steps = np.angle(vals[1:] / vals[:-1])
            bad = np.abs(steps) > math.pi / 4
            if not bad.any():
                break
            mids = 0.5 * (t[:-1] + t[1:])[bad]
            t = np.sort(np.concatenate([t, mids]))
            vals = np.asarray(f(z0 + (z1 - z0) * t), dtype=complex)
        else:
            raise NonConvergent("argument tracking did not resolve the boundary")
        total += float(np.sum(np.angle(vals[1:] / vals[:-1])))
    return complex(total / (2 * math.pi))


def _count(f, fp, rect: SearchRect, cfg: PoleConfig):
    """Winding count and the (possibly jittered) rectangle it refers to."""
    for attempt in range(cfg.max_retries + 1):
        if attempt == 0:
            r = rect
        else:
            # alternate small inward and outward moves of the contour
            d = (1e-3 * attempt) * min(rect.re_max - rect.re_min, rect.im_max - rect.im_min)
            r = rect.grown(d if attempt % 2 else -d)
        if not _boundary_clear(f, r):
            continue
        try:
            n = _winding_integral(f, fp, r) if fp is not None else _winding_arg(f, r)
        except (ToleranceNotMet, NonConvergent):
            # a zero between the boundary samples makes the contour integral stiff
            continue
        k = round(n.real)
        resid = abs(n - k)
        if resid >= 0.25:
            raise NonIntegerWinding(f"winding number {n} is not close to an integer")
        return int(k), r
    raise BoundaryZero(f"a zero sits on the boundary of {rect} after {cfg.max_retries} retries")


def count_zeros_rect(f, f_deriv, rect: SearchRect, cfg: PoleConfig = DEFAULT_POLES) -> int:
    """Number of zeros of the analytic ``f`` inside ``rect`` (with multiplicity).

    ``f`` and ``f_deriv`` must accept complex arrays.  With ``f_deriv=None`` the
    winding is accumulated from argument increments instead of ``f'/f``.

    Raises
    ------
    BoundaryZero
        If every jittered contour passes too close to a zero.
    NonIntegerWinding
        If the computed winding number is not within 0.25 of an integer.
    """
    return _count(f, f_deriv, rect, cfg)[0]


# -- the pole function -----------------------------------------------------

def pole_function(model: Model, cfg: PoleConfig = DEFAULT_POLES):
    """``(f, f')`` with ``f(z) = a - W(z^2)`` and ``f'`` its ``z``-derivative.

    ``f'`` is ``None`` for profiles without a closed form.
    """
    if model.is_infinite:
        raise InvalidInput("pole search needs a finite coupling")
    a, p = model.a, model.profile
    if has_closed_form(p):
        return (lambda z: a - weyl_titchmarsh(p, z), lambda z: -weyl_titchmarsh_dz(p, z))

    def f(z):
        return a - np.asarray(weyl_titchmarsh(p, z, "quad", cfg.quad))

    return f, None


def _deriv(f, fp, z: complex) -> complex:
    if fp is not None:
        return complex(fp(z))
    return complex_derivative(lambda s: complex(f(s)), z, h=0.25 * min(1.0, abs(z), -z.imag),
                              tol=1e-6)[0]


def _newton(f, fp, z: complex, mult: int, cfg: PoleConfig) -> complex:
    for _ in range(cfg.newton_iter):
        fz = complex(f(z))
        if fz == 0:
            return z
        d = _deriv(f, fp, z)
        if d == 0:
            break
        step = mult * fz / d
        z = z - step
        if z.imag >= 0:
            raise NonConvergent("Newton iteration left the lower half-plane")
        if abs(step) <= 1e-15 * (1.0 + abs(z)):
            return z
    return z


def _polish_multiple(f, fp, z: complex, cfg: PoleConfig) -> complex:
    """Refine a multiple zero as a simple zero of ``f'``."""
    g = (lambda s: _deriv(f, fp, s))
    for _ in range(cfg.newton_iter):
        gz = g(z)
        d2 = complex_derivative(g, z, h=0.05 * min(1.0, abs(z), -z.imag), tol=1e-4)[0]
        if d2 == 0:
            break
        step = gz / d2
        z = z - step
        if abs(step) <= 1e-15 * (1.0 + abs(z)):
            break
    return z


def _local_order(f, fp, z: complex, radius: float, cfg: PoleConfig) -> int:
    r = min(radius, 0.5 * abs(z.imag))
    n = 64
    t = np.exp(2j * math.pi * np.arange(n) / n)
    for _ in range(4):
        pts = z + r * t
        vals = np.asarray(f(pts), dtype=complex)
        if fp is not None:
            w = np.mean(np.asarray(fp(pts), dtype=complex) / vals * r * t)
        else:
            w = np.sum(np.angle(np.roll(vals, -1) / vals)) / (2 * math.pi)
        k = round(w.real)
        if abs(w - k) < 0.25:
            return int(k)
        r *= 0.1
    raise NonIntegerWinding(f"local winding around {z} is not an integer")


# -- residues and classification -------------------------------------------

def residue(model: Model, z0, cfg: PoleConfig = DEFAULT_POLES, method: str = "auto") -> SMat2:
    """``(1/2 pi i) \\oint S(z) dz`` over a circle of radius ``r_res`` by the trapezoidal rule.

    The radius is shrunk tenfold (up to three times) if the contour meets a pole.
    """
    z0 = complex(z0)
    r = min(cfg.r_res, 0.5 * abs(z0.imag))
    n = cfg.n_res
    t = np.exp(2j * math.pi * np.arange(n) / n)
    for _ in range(4):
        try:
            acc = np.zeros((2, 2), dtype=complex)
            for w in t:
                acc += s_matrix(model, z0 + r * w, method, cfg.quad).array() * (r * w)
            return SMat2.from_array(acc / n)
        except AtPole:
            r *= 0.1
    raise PoleOnContour(f"S has poles on every residue contour around {z0}")


def _residual(model: Model, z: complex, cfg: PoleConfig) -> float:
    method = "auto" if has_closed_form(model.profile) else "quad"
    return abs(model.a - complex(weyl_titchmarsh(model.profile, z, method, cfg.quad)))


def classify_pole(model: Model, z0, cfg: PoleConfig = DEFAULT_POLES, res: SMat2 = None,
                  order: int = None) -> PoleClass:
    """Exceptional when ``W'`` vanishes, Silent when the S-matrix residue vanishes.

    Raises
    ------
    NotAPole
        If ``|a - W(z0^2)|`` exceeds ``refine_tol`` (scaled by ``1 + |a|``).
    """
    z0 = complex(z0)
    if model.is_infinite:
        raise NotAPole("the operator with infinite coupling has no poles")
    if _residual(model, z0, cfg) > cfg.refine_tol * (1.0 + abs(model.a)):
        raise NotAPole(f"|a - W(z0^2)| is not below refine_tol at {z0}")
    method = "auto" if has_closed_form(model.profile) else "quad"
    wp = abs(complex(weyl_titchmarsh_deriv(model.profile, z0, method, cfg.quad)))
    if wp < cfg.wprime_tol or (order is not None and order >= 2):
        return PoleClass.EXCEPTIONAL
    if res is None:
        res = residue(model, z0, cfg)
    if res.norm() < cfg.silent_tol:
        return PoleClass.SILENT
    return PoleClass.SIMPLE


def _report(model: Model, z: complex, order: int, cfg: PoleConfig) -> PoleReport:
    method = "auto" if has_closed_form(model.profile) else "quad"
    res = residue(model, z, cfg)
    cls = classify_pole(model, z, cfg, res=res, order=order)
    wp = complex(weyl_titchmarsh_deriv(model.profile, z, method, cfg.quad))
    return PoleReport(z=z, lam=z * z, order=order, residue=res, classification=cls,
                      region=region_of(z, eps_axis=1e-8 * (1.0 + abs(z))),
                      residual=_residual(model, z, cfg), wprime=wp)


# -- search ----------------------------------------------------------------

def _solve_cell(f, fp, rect: SearchRect, n: int, cfg: PoleConfig):
    """Try to resolve all ``n`` zeros of a cell as one root; ``None`` if that fails."""
    scale = 1.0 + abs(complex(f(rect.center)))
    try:
        if n == 1:
            z = _newton(f, fp, rect.center, 1, cfg)
        else:
            z = _newton(f, fp, rect.center, n, cfg)
            z = _polish_multiple(f, fp, z, cfg)
    except NonConvergent:
        return None
    if not rect.contains(z, slack=1e-12) or z.imag >= 0:
        return None
    if abs(complex(f(z))) > max(cfg.refine_tol, 1e-13 * scale):
        return None
    if n == 1:
        return z
    rad = min(cfg.order_radius, 0.25 * rect.diameter) if rect.diameter > cfg.cluster_tol else cfg.order_radius
    try:
        k = _local_order(f, fp, z, rad, cfg)
    except NonIntegerWinding:
        return None
    return z if k == n else None


def find_poles(model: Model, rect: SearchRect, cfg: PoleConfig = DEFAULT_POLES) -> list:
    """All zeros of ``a - W(z^2)`` inside ``rect`` as :class:`PoleReport` values.

    The rectangle is quadrisected until every cell holds one root (a simple
    zero, or a multiple zero confirmed by a local winding count); the
    multiplicities found must add up to the winding number of ``rect``.

    Raises
    ------
    BudgetExceeded
        If more than ``cfg.max_cells`` cells are examined.
    NonIntegerWinding, BoundaryZero
        From the argument-principle counts.
    """
    f, fp = pole_function(model, cfg)
    total, top = _count(f, fp, rect, cfg)
    roots = []
    stack = [(top, total)]
    cells = 0
    while stack:
        cell, n = stack.pop()
        if n == 0:
            continue
        cells += 1
        if cells > cfg.max_cells:
            raise BudgetExceeded(f"pole search exceeded {cfg.max_cells} cells")
        z = _solve_cell(f, fp, cell, n, cfg)
        if z is not None:
            roots.append((z, n))
            continue
        if cell.diameter < cfg.cluster_tol:
            z = _newton(f, fp, cell.center, n, cfg)
            roots.append((z, n))
            continue
        for k in range(cfg.max_retries + 1):
            frac = 0.5 + 0.0173 * k * (-1) ** k
            try:
                kids = [_count(f, fp, c, cfg) for c in cell.split(frac, frac)]
            except BoundaryZero:
                continue
            counts = [c[0] for c in kids]
            if sum(counts) == n:
                break
        else:
            raise NonIntegerWinding(f"zero count of {cell} is not conserved under subdivision")
        stack.extend((c[1], c[0]) for c in kids)
    if sum(m for _, m in roots) != total:
        raise NonIntegerWinding("multiplicities do not add up to the winding number")
    reports = [_report(model, z, m, cfg) for z, m in roots]
    reports.sort(key=lambda r: (r.z.real, r.z.imag))
    return reports


# -- half-plane consistency -------------------------------------------------

@dataclass(frozen=True)
class ConsistencyReport:
    consistent: bool
    violations: tuple
    regions: tuple

    def to_json(self) -> dict:
        return {"consistent": self.consistent, "violations": list(self.violations),
                "regions": [str(r) for r in self.regions]}


def region_consistency(model: Model, poles, axis_band: float = 1e-8) -> ConsistencyReport:
    """Check where poles may sit given the sign of ``Im a``.

    Poles may not occupy both open quarter-planes; a pole left of the axis
    needs ``Im a > 0``, right of it ``Im a < 0``, and on it ``Im a = 0``
    (within ``axis_band * (1 + |a|)``).
    """
    if model.is_infinite:
        return ConsistencyReport(True, (), ())
    ima = model.a.imag
    band = axis_band * (1.0 + abs(model.a))
    regions = tuple(p.region for p in poles)
    bad = []
    if Region.MINUS_LEFT in regions and Region.MINUS_RIGHT in regions:
        bad.append("poles in both MinusLeft and MinusRight")
    for p in poles:
        if p.region is Region.MINUS_LEFT and not ima > band:
            bad.append(f"pole {p.z} in MinusLeft requires Im a > 0 (Im a = {ima})")
        elif p.region is Region.MINUS_RIGHT and not ima < -band:
            bad.append(f"pole {p.z} in MinusRight requires Im a < 0 (Im a = {ima})")
        elif p.region is Region.MINUS_AXIS and abs(ima) > band:
            bad.append(f"pole {p.z} on the axis requires Im a = 0 (Im a = {ima})")
    return ConsistencyReport(not bad, tuple(bad), regions)
