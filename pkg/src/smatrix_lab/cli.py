"""Command-line front end.

Subcommands ``wt``, ``smat``, ``rt``, ``poles``, ``verify`` and ``sweep``
evaluate quantities over grids, scan for poles and run the invariant suites.
Exit codes: 0 success, 1 invariant failure, 2 invalid input, 3 numerical
failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .errors import AtPole, ConfigError, InvalidInput, NumericalError, SmatrixError, \
    UnsupportedFamily
from .innerfunc import BlaschkePow, Shift, psi_ratio
from .model import EvenBox, Model, OddBox, PolyExp, Zero, boundary_mean, model_from_json
from .poles import PoleConfig, SearchRect, find_poles, region_consistency
from .quad import QuadConfig
from .smatrix import rt_coefficients, s_matrix, s_matrix_closed, s_matrix_rt, singular_values
from .spectral import eigenfunction_pair, has_closed_form, weyl_titchmarsh, weyl_titchmarsh_deriv

SCHEMA = "smatrix-lab/1"
EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


# -- configuration ---------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    re_min: float
    re_max: float
    n_re: int
    im_min: float
    im_max: float
    n_im: int

    def __post_init__(self):
        if self.n_re < 1 or self.n_im < 1:
            raise ConfigError("grid needs at least one point per axis")
        if not (self.im_max < 0 and self.im_min < 0):
            raise ConfigError("grid must lie in the lower half-plane (im < 0)")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        try:
            re_part, im_part = text.split(",")
            r0, r1, nr = re_part.split(":")
            i0, i1, ni = im_part.split(":")
            return cls(float(r0), float(r1), int(nr), float(i0), float(i1), int(ni))
        except ValueError as exc:
            raise ConfigError(f"bad grid {text!r}; expected re_min:re_max:n,im_min:im_max:n") from exc

    def points(self) -> list:
        """Row-major over the grid: imaginary part outer, real part inner."""
        res = np.linspace(self.re_min, self.re_max, self.n_re) if self.n_re > 1 else [self.re_min]
        ims = np.linspace(self.im_min, self.im_max, self.n_im) if self.n_im > 1 else [self.im_min]
        return [complex(r, i) for i in ims for r in res]


def parse_rect(text: str) -> SearchRect:
    try:
        re_part, im_part = text.split(",")
        a, b = (float(v) for v in re_part.split(":"))
        c, d = (float(v) for v in im_part.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad rect {text!r}; expected re_min:re_max,im_min:im_max") from exc
    return SearchRect(a, b, c, d)


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError as exc:
        raise ConfigError(f"not a complex number: {text!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    model: Model
    quad: QuadConfig
    poles: PoleConfig
    format: str = "csv"
    out: str = None


def _dataclass_from(cls, obj, what, **extra):
    if obj is None:
        return cls(**extra)
    if not isinstance(obj, dict):
        raise ConfigError(f"{what} must be an object")
    names = {f.name for f in fields(cls)} - set(extra)
    unknown = set(obj) - names
    if unknown:
        raise ConfigError(f"unknown fields in {what}: {sorted(unknown)}")
    try:
        return cls(**obj, **extra)
    except TypeError as exc:
        raise ConfigError(f"bad {what} settings: {exc}") from exc


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path!r}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    if "model" not in obj:
        # a bare model descriptor
        return RunConfig(model_from_json(obj), QuadConfig(), PoleConfig())
    unknown = set(obj) - {"model", "quad", "poles", "format", "out"}
    if unknown:
        raise ConfigError(f"unknown fields in config: {sorted(unknown)}")
    quad = _dataclass_from(QuadConfig, obj.get("quad"), "quad")
    poles = _dataclass_from(PoleConfig, obj.get("poles"), "poles", quad=quad)
    fmt = obj.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    return RunConfig(model_from_json(obj["model"]), quad, poles, fmt, obj.get("out"))


# -- output ----------------------------------------------------------------

def _num(x) -> str:
    return format(float(x), ".17g")


def _jnum(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _emit_table(header, rows, fmt, out, meta=None):
    if fmt == "csv":
        lines = [f"# schema={SCHEMA}", ",".join(header)]
        for row in rows:
            lines.append(",".join(v if isinstance(v, str) else _num(v) for v in row))
        text = "\n".join(lines) + "\n"
    else:
        recs = [{h: (v if isinstance(v, str) else _jnum(v)) for h, v in zip(header, row)} for row in rows]
        doc = {"schema": SCHEMA, "columns": list(header), "rows": recs}
        if meta:
            doc.update(meta)
        text = json.dumps(doc, indent=1) + "\n"
    _write(text, out)


def _emit_json(doc, out):
    doc = {"schema": SCHEMA, **doc}
    _write(json.dumps(doc, indent=1) + "\n", out)


def _write(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _threads() -> int:
    try:
        n = int(os.environ.get("SMATRIX_THREADS", "1"))
    except ValueError as exc:
        raise ConfigError("SMATRIX_THREADS must be an integer") from exc
    return max(1, n)


def _pmap(fn, items):
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _method(model: Model) -> str:
    return "auto" if has_closed_form(model.profile) else "quad"


# -- subcommands -----------------------------------------------------------

def cmd_wt(cfg: RunConfig, grid: GridSpec, fmt: str, out):
    m = cfg.model
    meth = _method(m)

    def row(z):
        w = complex(weyl_titchmarsh(m.profile, z, meth, cfg.quad))
        wp = complex(weyl_titchmarsh_deriv(m.profile, z, meth, cfg.quad))
        return (z.real, z.imag, w.real, w.imag, wp.real, wp.imag)

    rows = _pmap(row, grid.points())
    _emit_table(["re_z", "im_z", "re_W", "im_W", "re_Wp", "im_Wp"], rows, fmt, out)
    return EXIT_OK


_S_HEADER = ["re_z", "im_z", "re_s11", "im_s11", "re_s12", "im_s12", "re_s21", "im_s21",
             "re_s22", "im_s22", "sigma1", "sigma2", "pole"]


def cmd_smat(cfg: RunConfig, grid: GridSpec, route: str, fmt: str, out):
    m = cfg.model
    meth = _method(m)
    if route == "closed" and not (m.is_infinite or has_closed_form(m.profile)):
        raise UnsupportedFamily(f"no closed-form S-matrix for profile {m.profile.kind!r}")
    compare = route != "closed" and (m.is_infinite or has_closed_form(m.profile))

    def row(z):
        try:
            if route == "kn":
                s = s_matrix(m, z, meth, cfg.quad)
            elif route == "rt":
                s = s_matrix_rt(m, z, meth, cfg.quad)
            else:
                s = s_matrix_closed(m, z)
        except AtPole:
            return (z.real, z.imag) + (math.nan,) * 10 + ("pole",), None
        diff = s.max_abs_diff(s_matrix_closed(m, z)) if compare else None
        vals = []
        for e in s.entries():
            vals += [e.real, e.imag]
        return (z.real, z.imag, *vals, *singular_values(s), ""), diff

    results = _pmap(row, grid.points())
    rows = [r for r, _ in results]
    diffs = [d for _, d in results if d is not None]
    meta = None
    if diffs:
        summary = f"max |S_{route} - S_closed| = {max(diffs):.3e} over {len(diffs)} points"
        print(summary, file=sys.stderr)
        meta = {"max_diff_vs_closed": max(diffs)}
    _emit_table(_S_HEADER, rows, fmt, out, meta)
    return EXIT_OK


def cmd_rt(cfg: RunConfig, grid: GridSpec, fmt: str, out):
    m = cfg.model
    meth = _method(m)

    def row(z):
        try:
            c = rt_coefficients(m, z, meth, cfg.quad)
        except AtPole:
            return (z.real, z.imag) + (math.nan,) * 8 + ("pole",)
        vals = []
        for e in (c.r1, c.t1, c.r2, c.t2):
            vals += [e.real, e.imag]
        return (z.real, z.imag, *vals, "")

    rows = _pmap(row, grid.points())
    _emit_table(["re_z", "im_z", "re_r1", "im_r1", "re_t1", "im_t1", "re_r2", "im_r2",
                 "re_t2", "im_t2", "pole"], rows, fmt, out)
    return EXIT_OK


def _pole_rows(reports):
    rows = []
    for p in reports:
        rows.append((p.z.real, p.z.imag, p.lam.real, p.lam.imag, p.order, str(p.classification),
                     str(p.region), p.residue.norm(), p.residual))
    return rows


_P_HEADER = ["re_z", "im_z", "re_lambda", "im_lambda", "order", "classification", "region",
             "residue_norm", "residual"]


def cmd_poles(cfg: RunConfig, rect: SearchRect, fmt: str, out):
    m = cfg.model
    reports = find_poles(m, rect, cfg.poles)
    verdict = region_consistency(m, reports)
    if fmt == "csv":
        _emit_table(_P_HEADER, _pole_rows(reports), fmt, out)
    else:
        _emit_json({"rect": [rect.re_min, rect.re_max, rect.im_min, rect.im_max],
                    "poles": [p.to_json() for p in reports],
                    "consistency": verdict.to_json()}, out)
    return EXIT_OK


def _sample_points(n: int, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        z = complex(rng.uniform(-3, 3), rng.uniform(-2.5, -0.2))
        if abs(z.real) > 0.05:
            pts.append(z)
    return pts


def cmd_verify(cfg: RunConfig, rect, fmt: str, out, n_points: int = 8):
    m = cfg.model
    p = m.profile
    meth = _method(m)
    q = cfg.quad
    pts = _sample_points(n_points)
    quad_tol = 1e-7
    suites = []

    def add(name, ok, value, hard=True):
        status = ("pass" if ok else "fail") if hard else "info"
        suites.append({"suite": name, "status": status, "value": value})

    def usable(z):
        if m.is_infinite:
            return True
        try:
            s_matrix(m, z, meth, q)
            return True
        except AtPole:
            return False

    zs = [z for z in pts if usable(z)]

    # S-matrix routes
    d = max((s_matrix(m, z, meth, q).max_abs_diff(s_matrix_rt(m, z, meth, q)) for z in zs), default=0.0)
    add("route_equivalence", d < quad_tol, d)
    if not m.is_infinite:
        tol = 1e-10 if meth == "auto" else quad_tol
        dadj = 0.0
        for z in zs:
            try:
                rhs = s_matrix(m.conj(), -z.conjugate(), meth, q)
            except AtPole:
                continue
            dadj = max(dadj, s_matrix(m, z, meth, q).adjoint().max_abs_diff(rhs))
        add("adjoint_relation", dadj < tol, dadj)
        dsym = 0.0
        for z in zs:
            try:
                rhs = s_matrix(m, -z.conjugate(), meth, q)
            except AtPole:
                continue
            dsym = max(dsym, s_matrix(m, z, meth, q).adjoint().max_abs_diff(rhs))
        selfadj = m.a.imag == 0
        add("self_adjoint", (dsym < tol) if selfadj else True,
            {"real_coupling": selfadj, "max_asymmetry": dsym,
             "verdict": "self-adjoint" if dsym < tol else "not self-adjoint"}, hard=selfadj)
    # Weyl-Titchmarsh function
    ws = [complex(weyl_titchmarsh(p, z, meth, q)) for z in pts]
    herg = min((w.imag / (z * z).imag for w, z in zip(ws, pts) if (z * z).imag != 0), default=1.0)
    add("herglotz", herg > 0, herg)
    dconj = max(abs(w.conjugate() - complex(weyl_titchmarsh(p, -z.conjugate(), meth, q)))
                / (1 + abs(w)) for w, z in zip(ws, pts))
    add("wt_conjugation", dconj < (1e-10 if meth == "auto" else 1e-8), dconj)
    # inner functions
    psi_max = max(abs(complex(psi_ratio(psi, z))) for psi in p.inner for z in pts)
    add("psi_contraction", psi_max < 1 or all(not isinstance(s, (Shift, BlaschkePow)) for s in p.inner),
        psi_max)
    # closed forms against quadrature
    if has_closed_form(p):
        dw = max(abs(complex(weyl_titchmarsh(p, z, "closed")) - complex(weyl_titchmarsh(p, z, "quad", q)))
                 / abs(complex(weyl_titchmarsh(p, z, "closed"))) for z in pts)
        add("wt_oracle", dw < 1e-8, dw)
        if not m.is_infinite:
            ds = max((s_matrix(m, z, "quad", q).max_rel_diff(s_matrix_closed(m, z)) for z in zs),
                     default=0.0)
            add("smatrix_oracle", ds < quad_tol, ds)
    # boundary mean of the eigenfunction
    db = max(abs(boundary_mean(eigenfunction_pair(p, z, meth, q)) - 1) for z in pts)
    add("boundary_mean", db < 1e-8, db)
    # contraction: a hard check only for the point interaction with a >= 0
    if not m.is_infinite:
        smax = max((singular_values(s_matrix(m, z, meth, q))[0] for z in zs), default=0.0)
        hard = isinstance(p, Zero) and m.a.imag == 0 and m.a.real >= 0
        add("contraction", smax <= 1 + 1e-12 if hard else True, smax, hard=hard)
    if rect is not None and not m.is_infinite:
        reports = find_poles(m, rect, cfg.poles)
        verdict = region_consistency(m, reports)
        add("region_consistency", verdict.consistent,
            {"poles": len(reports), "violations": list(verdict.violations)})
    passed = all(s["status"] != "fail" for s in suites)
    if fmt == "csv":
        rows = [(s["suite"], s["status"], json.dumps(s["value"]) if not isinstance(s["value"], float)
                 else _num(s["value"])) for s in suites]
        _emit_table(["suite", "status", "value"], rows, fmt, out)
    else:
        _emit_json({"passed": passed, "suites": suites}, out)
    return EXIT_OK if passed else EXIT_FAIL


def _with_param(model: Model, param: str, value: complex) -> Model:
    if param == "a":
        return Model(value, model.profile)
    p = model.profile
    if isinstance(p, (EvenBox, OddBox)):
        return Model(model.a, type(p)(value, p.rho))
    if isinstance(p, PolyExp):
        return Model(model.a, PolyExp((value,) + p.coeffs[1:]))
    raise UnsupportedFamily(f"profile {p.kind!r} has no parameter M")


def cmd_sweep(cfg: RunConfig, param: str, values: list, rect: SearchRect, fmt: str, out):
    if param not in ("a", "M"):
        raise ConfigError("sweep parameter must be 'a' or 'M'")
    if cfg.model.is_infinite and param == "M":
        raise ConfigError("a finite coupling is needed to sweep M")
    steps = [find_poles(_with_param(cfg.model, param, v), rect, cfg.poles) for v in values]
    # link poles across steps by nearest neighbour
    rows = []
    prev = []
    next_track = 0
    for k, (v, reports) in enumerate(zip(values, steps)):
        free = list(prev)
        cur = []
        for r in reports:
            if free:
                j = min(range(len(free)), key=lambda i: abs(free[i][1] - r.z))
                tid = free.pop(j)[0]
            else:
                tid = next_track
                next_track += 1
            cur.append((tid, r.z))
            rows.append((k, v.real, v.imag, tid, r.z.real, r.z.imag, r.order, str(r.classification),
                         str(r.region)))
        prev = cur
    header = ["step", "re_param", "im_param", "track", "re_z", "im_z", "order", "classification",
              "region"]
    _emit_table(header, rows, fmt, out, {"parameter": param})
    return EXIT_OK


# -- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smatrix-lab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="model descriptor or run configuration (JSON)")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), help="output format")

    for name in ("wt", "smat", "rt"):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--grid", required=True, help="re_min:re_max:n,im_min:im_max:n")
        if name == "smat":
            sp.add_argument("--route", choices=("kn", "rt", "closed"), default="kn")
    sp = sub.add_parser("poles")
    common(sp)
    sp.add_argument("--rect", required=True, help="re_min:re_max,im_min:im_max")
    sp = sub.add_parser("verify")
    common(sp)
    sp.add_argument("--rect", help="optional rectangle for the pole-region suite")
    sp = sub.add_parser("sweep")
    common(sp)
    sp.add_argument("--rect", required=True)
    sp.add_argument("--param", choices=("a", "M"), required=True)
    sp.add_argument("--values", default="", help="semicolon-separated complex values, e.g. '2j;2.83j'")
    return ap


_VALUE_FLAGS = ("--grid", "--rect", "--values")


def _glue_values(argv):
    """Attach values such as ``-3:3,-2:-0.1`` to their flag so they are not read as options."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(_glue_values(sys.argv[1:] if argv is None else list(argv)))
    try:
        cfg = load_config(args.config)
        fmt = args.format or cfg.format
        out = args.out or cfg.out
        if args.cmd == "wt":
            return cmd_wt(cfg, GridSpec.parse(args.grid), fmt, out)
        if args.cmd == "smat":
            return cmd_smat(cfg, GridSpec.parse(args.grid), args.route, fmt, out)
        if args.cmd == "rt":
            return cmd_rt(cfg, GridSpec.parse(args.grid), fmt, out)
        if args.cmd == "poles":
            return cmd_poles(cfg, parse_rect(args.rect), args.format or "json", out)
        if args.cmd == "verify":
            rect = parse_rect(args.rect) if args.rect else None
            return cmd_verify(cfg, rect, args.format or "json", out)
        values = [parse_complex(v) for v in args.values.split(";") if v.strip()]
        return cmd_sweep(cfg, args.param, values, parse_rect(args.rect), fmt, out)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SmatrixError as exc:  # pragma: no cover - every library error is one of the above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
