"""Acceptance criteria 1-11.

Each test records one PASS/FAIL line; the lines are printed in the pytest
terminal summary, or directly when this file is run as a script.
"""
import math
import time

import numpy as np
import pytest

from conftest import SQRT3, bump_pair, grid, lower_points
from smatrix_lab import (BlaschkePow, EvenBox, Model, NumericPair, OddBox, PairFn, PoleClass, PolyExp, SearchRect,
                         Shift, Zero, boundary_mean, find_poles, psi_ratio,
                         region_consistency, residue, s_matrix, s_matrix_closed, s_matrix_rt,
                         singular_values, weyl_titchmarsh)
from smatrix_lab.errors import AtPole
from smatrix_lab.innerfunc import apply_inner, laguerre_basis
from smatrix_lab.quad import integrate_halfline
from smatrix_lab.spectral import krein_resolvent_fn, weyl_titchmarsh_dz

import oracles

RESULTS = {}


def record(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def all_profiles():
    return {
        "zero": Zero(),
        "even_box": EvenBox(1 + 1j, 1.0),
        "odd_box": OddBox(2j, 1.0),
        "poly_exp0": PolyExp((8j,)),
        "poly_exp2": PolyExp((0.5 - 0.3j, 1.0, 0.2j)),
        "numeric": bump_pair(),
    }


def test_criterion_01_point_interaction_closed_form():
    t0 = time.perf_counter()
    worst = 0.0
    for a in (0, 1, 5, -2, 1 + 1j):
        m = Model(a, Zero())
        for z in grid((-3, 3), (-3, -0.1), 10, 10):
            want = np.array([[a, -2j * z], [-2j * z, a]]) / (a + 2j * z)
            worst = max(worst, float(np.max(np.abs(s_matrix(m, z).array() - want))))
    dt = time.perf_counter() - t0
    record(1, worst < 1e-12 and dt < 1.0, f"max entry error {worst:.2e} (tol 1e-12), {dt:.2f} s (< 1 s)")


def test_criterion_02_oracle_agreement():
    t0 = time.perf_counter()
    worst = {}
    for name, p in (("EvenBox", EvenBox(1 + 1j, 1.0)), ("OddBox", OddBox(2j, 1.0)),
                    ("PolyExp", PolyExp((8j,)))):
        m = Model(3 - 2j, p)
        err = 0.0
        for z in grid((-2.5, 2.5), (-2.5, -0.3), 5, 5):
            ref = s_matrix_closed(m, z).array()
            got = s_matrix(m, z, method="quad").array()
            err = max(err, float(np.max(np.abs(got - ref) / np.abs(ref))))
        worst[name] = err
    dt = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-7 and dt < 30
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    record(2, ok, f"max entrywise rel. error {detail} (tol 1e-7), {dt:.1f} s (< 30 s)")


def test_criterion_03_route_equivalence():
    worst = {}
    for name, p in all_profiles().items():
        m = Model(1.5 - 0.5j, p)
        rng = np.random.default_rng(303)
        worst[name] = max(s_matrix(m, z).max_abs_diff(s_matrix_rt(m, z))
                          for z in lower_points(rng, 20, avoid_axis=0.05))
    ok = max(worst.values()) < 1e-7
    record(3, ok, "max |S_kn - S_rt| " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
           + " (tol 1e-7)")


def test_criterion_04_weyl_cross_validation():
    worst_w = worst_dw = 0.0
    herglotz = True
    families = {k: v for k, v in all_profiles().items() if k in ("zero", "even_box", "odd_box",
                                                                  "poly_exp0")}
    pts = grid((-2.5, 2.5), (-2.5, -0.3), 5, 5)
    for p in families.values():
        for z in pts:
            wc = weyl_titchmarsh(p, z, method="closed")
            wq = weyl_titchmarsh(p, z, method="quad")
            worst_w = max(worst_w, abs(wc - wq) / abs(wc))
            dc = weyl_titchmarsh_dz(p, z, method="closed")
            dq = weyl_titchmarsh_dz(p, z, method="quad")
            worst_dw = max(worst_dw, abs(dc - dq) / abs(dc))
            lam = z * z
            if lam.imag != 0:
                herglotz &= bool(wc.imag / lam.imag > 0 and wq.imag / lam.imag > 0)
    ok = worst_w < 1e-8 and worst_dw < 1e-8 and herglotz
    record(4, ok, f"rel. W {worst_w:.1e}, rel. W' {worst_dw:.1e} (tol 1e-8), "
                  f"Herglotz sign {'holds' if herglotz else 'violated'} at all points")


def test_criterion_05_adjoint_symmetry():
    worst = 0.0
    rng = np.random.default_rng(505)
    pts = lower_points(rng, 20)
    for p in all_profiles().values():
        m = Model(3 - 2j, p)
        for z in pts:
            lhs = s_matrix(m, z).adjoint()
            rhs = s_matrix(m.conj(), -z.conjugate())
            worst = max(worst, lhs.max_abs_diff(rhs))

    def asym(a):
        out = 0.0
        for p in all_profiles().values():
            m = Model(a, p)
            for z in pts[:10]:
                try:
                    d = s_matrix(m, z).adjoint().max_abs_diff(s_matrix(m, -z.conjugate()))
                except AtPole:
                    continue
                out = max(out, d)
        return out

    sym, viol = asym(2.0), asym(2 + 1j)
    ok = worst < 1e-10 and sym < 1e-10 and viol > 1e-3
    record(5, ok, f"||S_a^* - S_conj(a)(-conj z)|| {worst:.1e} (tol 1e-10); a=2 asymmetry {sym:.1e}, "
                  f"a=2+i asymmetry {viol:.1e} (> 1e-3)")


def _critical_continuation(m_abs):
    """Critical point z1 of the rational W for M = i m and the value of W there."""
    r = m_abs ** (2 / 3)
    z1 = complex(-SQRT3 / 2 * r, 1 - r / 2)
    w = -2j * z1 + m_abs ** 2 / (1 + 1j * z1) ** 2
    return z1, w


def test_criterion_06_exceptional_point():
    t0 = time.perf_counter()
    z1 = -2 * SQRT3 - 1j
    p = PolyExp((8j,))
    zc, wc = _critical_continuation(8.0)
    assert abs(zc - z1) < 1e-14
    m = Model(complex(weyl_titchmarsh(p, z1)), p)
    poles = find_poles(m, SearchRect(-5, -1, -3, -0.2))
    first = (len(poles) == 1 and abs(poles[0].z - z1) < 1e-8 and poles[0].order == 2
             and poles[0].classification is PoleClass.EXCEPTIONAL)
    err = abs(poles[0].z - z1) if poles else float("nan")
    # |M|^2 = 4: the critical point lies in the upper half-plane
    z_up, a_up = _critical_continuation(2.0)
    small = find_poles(Model(a_up, PolyExp((2j,))), SearchRect(-6, 6, -6, -0.01))
    second = z_up.imag > 0 and all(q.order == 1 for q in small)
    dt = time.perf_counter() - t0
    ok = first and second and dt < 60
    record(6, ok, f"M=8i: {len(poles)} pole, |z - z1| {err:.1e}, order "
                  f"{poles[0].order if poles else '-'}, {poles[0].classification if poles else '-'}; "
                  f"M=2i: z1={z_up:.3f} in C+, {len(small)} poles in C-, all simple={second}; {dt:.1f} s")


def test_criterion_07_region_consistency():
    rng = np.random.default_rng(707)
    n_cfg = n_bad = 0
    both = 0
    while n_cfg < 50:
        kind = rng.integers(4)
        M = complex(rng.normal(0, 2), rng.normal(0, 2))
        if kind == 0:
            p = Zero()
        elif kind == 1:
            p = EvenBox(M, float(rng.uniform(0.5, 2)))
        elif kind == 2:
            p = OddBox(M, float(rng.uniform(0.5, 2)))
        else:
            p = PolyExp((M,))
        zp = complex(rng.uniform(-2.5, 2.5), rng.uniform(-2, -0.3))
        a = complex(weyl_titchmarsh(p, zp))
        rect = SearchRect(zp.real - 1, zp.real + 1, zp.imag - 1, min(zp.imag + 1, -0.05))
        poles = find_poles(Model(a, p), rect)
        if not poles:
            continue
        n_cfg += 1
        rep = region_consistency(Model(a, p), poles)
        regions = {str(q.region) for q in poles}
        both += {"MinusLeft", "MinusRight"} <= regions
        n_bad += not rep.consistent
    record(7, n_bad == 0 and both == 0,
           f"{n_cfg} configurations with poles: {both} with poles on both sides, "
           f"{n_bad} sign(Im a) violations")


def test_criterion_08_silent_eigenvalue():
    M, rho = 2 + 1j, math.pi
    p = EvenBox(M, rho)
    roots = [r for r in oracles.silent_roots(M, rho) if abs(r.real) > 1e-3]
    roots = [r for r in roots if abs(weyl_titchmarsh_dz(p, r)) > 1e-3]
    z0 = max(roots, key=lambda r: -r.imag)
    m = Model(complex(weyl_titchmarsh(p, z0)), p)
    gap = abs(m.a - complex(weyl_titchmarsh(p, z0)))
    res = residue(m, z0).norm()
    record(8, res < 1e-8 and gap < 1e-10,
           f"z0 = {z0:.6f}: residue norm {res:.1e} (< 1e-8), |a - W(z0^2)| {gap:.1e} (< 1e-10)")


def test_criterion_09_contraction():
    pts = grid((-4, 4), (-4, -0.05), 10, 10)
    smax = max(singular_values(s_matrix(Model(a, Zero()), z))[0] for a in (0, 1, 5) for z in pts)
    psis = [Shift(0.5), Shift(2.0), BlaschkePow(1), BlaschkePow(4)]
    rng = np.random.default_rng(909)
    zs = rng.uniform(-5, 5, 100) + 1j * rng.uniform(-5, -1e-3, 100)
    pmax = max(float(np.max(np.abs(psi_ratio(psi, zs)))) for psi in psis)
    record(9, smax <= 1 + 1e-12 and pmax < 1,
           f"max sigma1 {smax:.15f} (<= 1 + 1e-12), max |Psi| {pmax:.6f} (< 1)")


def test_criterion_10_laguerre_orthogonality():
    worst = 0.0
    rng = np.random.default_rng(1010)
    for deg in range(4):
        coeffs = tuple(complex(*rng.normal(size=2)) for _ in range(deg)) + (1.0 + 0.5j,)
        p = PolyExp(coeffs)
        psi = BlaschkePow(deg + 1)
        for _ in range(20):
            c = rng.normal(size=6) + 1j * rng.normal(size=6)

            def f(x, c=c):
                return sum(c[n] * laguerre_basis(n, x) for n in range(len(c)))

            pf = apply_inner(psi, f)
            for j in (1, 2):
                ip = integrate_halfline(lambda x: p.q(x)[j - 1] * np.conj(pf(x)), 0.5)
                worst = max(worst, abs(ip))
    record(10, worst < 1e-8, f"max |<q_j, psi(B) f>| {worst:.1e} over degrees 0-3 (tol 1e-8)")


def _fd_residual(model, z):
    f = PairFn(lambda x: np.stack([x * np.exp(-x) + 0j, (1 + 1j) * np.exp(-1.5 * x)]), decay=1.0)
    g = krein_resolvent_fn(model, f, z)
    h = 1e-3
    x = np.linspace(0.2, 4.0, 77)
    if not isinstance(model.profile, NumericPair):
        # the spline knots are C2; only the jumps of the boxes need to be avoided
        for b in model.profile.breakpoints:
            x = x[np.abs(x - b) > 3 * h]
    stencil = np.array([-1, 16, -30, 16, -1]) / (12 * h * h)
    vals = np.stack([g(x + k * h) for k in (-2, -1, 0, 1, 2)])
    d2 = np.tensordot(stencil, vals, axes=(0, 0))
    mean = boundary_mean(g)
    lhs = -d2 + mean * model.profile.q(x) - z * z * vals[2]
    return float(np.max(np.abs(lhs - f(x))) / np.max(np.abs(f(x))))


def test_criterion_11_resolvent_residual():
    worst = {}
    rng = np.random.default_rng(1111)
    pts = lower_points(rng, 5, re=(-2, 2), im=(-2, -0.3))
    for name, p in all_profiles().items():
        m = Model(3 - 2j, p)
        worst[name] = max(_fd_residual(m, z) for z in pts)
    ok = max(worst.values()) < 1e-5
    record(11, ok, "max rel. residual " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
           + " (tol 1e-5)")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
