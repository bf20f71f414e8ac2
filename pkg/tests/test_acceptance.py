"""Acceptance criteria 1-9, each at its stated tolerance.

Every criterion prints one ``[criterion k] PASS|FAIL`` line; the lines are
also collected and repeated in the pytest terminal summary.  Run directly
with ``python tests/test_acceptance.py`` for just the summary lines.
"""

import itertools
import math
import os
import time
from fractions import Fraction

import numpy as np
import pytest

from collision_gap import continuum as cont
from collision_gap.generator import (
    as_dense,
    build_average_generator,
    build_colored_generator,
    build_generator,
    conditional_expectation_operator,
    detailed_balance_residual,
    one_particle_positions,
    p_matrix_three_site,
    pairs,
    rate_detailed_balance_residual,
    row_sum_residual,
)
from collision_gap.models import (
    ModelSpec,
    conditional_law_marginal,
    conditional_law_product,
    enumerate_space,
    stationary_measure,
)
from collision_gap.spectra import admissible_omegas, h0_decomposition, spectral_gap, variational_check
from collision_gap.theorems import (
    clique4_bound,
    color_indicator_rayleigh,
    det_p_formula,
    lambda3_bar,
    reduction_bound,
    small_instances,
)

RESULTS: list[str] = []


def record(k: int, ok: bool, detail: str, started: float) -> None:
    line = f"[criterion {k}] {'PASS' if ok else 'FAIL'}  {detail}  ({time.perf_counter() - started:.1f}s)"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_criterion_1_kac_eigenfunction():
    t0 = time.perf_counter()
    worst_slope = worst_res = 0.0
    f = cont.power_sum(4)
    for n in range(3, 7):
        for omega in (1.0, 4.0):
            pts = cont.random_sphere_points(1000, n, omega, seed=10 * n + int(omega))
            reg = cont.eigenfunction_regression(cont.generator_apply_kac(f, pts), f(pts))
            worst_slope = max(worst_slope, abs(reg.slope + (n + 2) / (4 * n)))
            worst_res = max(worst_res, reg.max_residual)
    ok = worst_slope < 1e-9 and worst_res < 1e-9
    record(1, ok, f"max slope error {worst_slope:.2e}, max residual {worst_res:.2e}", t0)


def test_criterion_2_flat_kac():
    t0 = time.perf_counter()
    f = cont.power_sum(2)
    pts = cont.random_simplex_points(1000, 3, 1.0, seed=2)
    reg = cont.eigenfunction_regression(cont.generator_apply_flat(f, pts), f(pts))
    slope_err = abs(reg.slope + 4 / 9)
    K = cont.k_operator_matrix(8)
    expected = np.array([(-1) ** n / (n + 1) for n in range(9)])
    eig_err = float(np.max(np.abs(np.sort(K.eigenvalues()) - np.sort(expected))))
    bound = cont.gap3_bound_from_mu(Fraction(-1, 2), Fraction(1, 3))
    ok = slope_err < 1e-9 and eig_err < 1e-10 and bound == Fraction(4, 9)
    record(2, ok, f"slope error {slope_err:.2e}, K eigenvalue error {eig_err:.2e}, gap3 bound {bound}", t0)


def test_criterion_3_random_transpositions():
    t0 = time.perf_counter()
    errs = []
    for n, size in ((3, 6), (4, 24), (5, 120)):
        rep = spectral_gap(build_generator(ModelSpec("BiasedPermutations", n)))
        assert rep.size == size
        errs.append(abs(rep.gap - 0.5))
    record(3, max(errs) < 1e-9, f"max |gap - 1/2| {max(errs):.2e}", t0)


def test_criterion_4_three_site_exclusion():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    eps = 0.1
    gap_err = tr_err = det_err = 0.0
    min_gap = math.inf
    for _ in range(100):
        p = tuple(rng.uniform(eps, 1 - eps, 3))
        x, y, z = one_particle_positions(*p)
        P = p_matrix_three_site(x, y, z)
        ev = np.sort(np.linalg.eigvals(P).real)
        l1, l2 = ev[0], ev[1]
        gap = spectral_gap(build_generator(ModelSpec("DisorderedExclusion", 3, p=p, omega=1))).gap
        gap_err = max(gap_err, abs(gap - min(1 - l1, 1 - l2)))
        tr_err = max(tr_err, abs(np.trace(P) - 2))
        det_err = max(det_err, abs(np.linalg.det(P) - float(det_p_formula(x, y, z))))
        min_gap = min(min_gap, gap)
    ok = gap_err < 1e-10 and tr_err < 1e-12 and det_err < 1e-12 and min_gap > 1 / 3
    record(4, ok, f"gap error {gap_err:.2e}, trace error {tr_err:.2e}, det error {det_err:.2e}, min gap {min_gap:.6f}", t0)


def test_criterion_5_reduction_theorem():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    eps = 0.1
    worst = math.inf
    checked = 0
    for _ in range(50):
        p = tuple(rng.uniform(eps, 1 - eps, 6))
        for n in (4, 5, 6):
            spec = ModelSpec("DisorderedExclusion", n, p=p[:n], omega=0)
            bound = reduction_bound(lambda3_bar(spec), n)
            for om in admissible_omegas(spec):
                gap = spectral_gap(build_generator(spec.with_omega(om))).gap
                worst = min(worst, gap - bound)
                checked += 1
    identity = all(reduction_bound(Fraction(5, 12), n) == Fraction(n + 2, 4 * n) for n in range(2, 101))
    ok = worst >= -1e-9 and identity
    record(5, ok, f"{checked} gaps, worst margin {worst:.4f}, exact identity {identity}", t0)


def test_criterion_6_clique4_identity():
    t0 = time.perf_counter()
    ok = all(clique4_bound(Fraction(1, 3), n) == Fraction(1, 6) + Fraction(2, 3 * n) for n in range(4, 101))
    record(6, ok, "exact for N = 4..100" if ok else "identity fails", t0)


def test_criterion_7_colored_exclusion():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    n, m, eps = 8, 2, 0.1
    p = tuple(rng.uniform(eps, 1 - eps, n))
    db = avg_err = split_err = 0.0
    rq_ok = True
    ratios = []
    for k in (1, 2, 3):
        spec = ModelSpec("ColoredExclusion", n, p=p, omega=(k, k), m=m, gamma=1)
        rho = spec.density
        gen1 = build_colored_generator(spec, 1)
        gen0 = build_colored_generator(spec, 0)
        avg = build_average_generator(gen1.space, gen1.measure)
        avg_err = max(avg_err, float(np.max(np.abs(gen1.dense() - avg.dense()))))
        for gen in (gen0, gen1):
            db = max(db, detailed_balance_residual(gen), rate_detailed_balance_residual(gen))
            h = h0_decomposition(gen)
            split_err = max(split_err, abs(h.combined - h.full_gap))
        g0 = spectral_gap(gen0).gap
        rq_ok &= g0 <= color_indicator_rayleigh(gen0) + 1e-12
        ratios.append(g0 / (1 - rho))
    spread = max(ratios) / min(ratios)
    ok = db < 1e-12 and avg_err < 1e-14 and split_err < 1e-8 and rq_ok and spread < 3
    record(7, ok, f"detailed balance {db:.1e}, gamma=1 vs average {avg_err:.1e}, H0 split {split_err:.1e}, "
                  f"indicator bound {rq_ok}, g/(1-rho) spread {spread:.3f}", t0)


def test_criterion_8_monte_carlo():
    t0 = time.perf_counter()
    spec = ModelSpec("KacSphere", 4, omega=1.0)
    dt = 0.25
    threads = min(8, os.cpu_count() or 1)
    trajs = cont.run_chains(spec, 1_000_000, 8, seed=0, threads=threads)
    est = cont.relaxation_rate_estimate([t.on_grid(dt) for t in trajs], dt)
    target = 6 / 16
    rel = abs(est.rate - target) / target
    z = abs(est.rate - target) / est.stderr
    ok = rel < 0.10 and z < 3
    record(8, ok, f"rate {est.rate:.4f} +- {est.stderr:.4f} vs 0.375 ({100 * rel:.2f}%, {z:.2f} stderr)", t0)


def _pair_checks(spec, rng):
    gen = build_generator(spec)
    space, measure = gen.space, gen.measure
    worst = {"rows": row_sum_residual(gen), "idempotent": 0.0, "commute": 0.0, "marginal": 0.0}
    eye = np.eye(len(space))
    ops = {b: as_dense(conditional_expectation_operator(space, measure, b).matrix) for b in pairs(spec.n)}
    for E in ops.values():
        D = E - eye
        worst["idempotent"] = max(worst["idempotent"], float(np.max(np.abs(D @ D + D))))
    for b, c in itertools.combinations(ops, 2):
        if not set(b) & set(c):
            worst["commute"] = max(worst["commute"], float(np.max(np.abs(ops[b] @ ops[c] - ops[c] @ ops[b]))))
    for _ in range(3):
        state = space.states[int(rng.integers(len(space)))]
        sites = sorted(rng.choice(spec.n, min(2, spec.n), replace=False).tolist())
        outside = {i: state[i] for i in range(spec.n) if i not in sites}
        direct = conditional_law_product(spec, sites, outside)
        marg = conditional_law_marginal(space, measure, sites, state)
        if direct.keys() != marg.keys():
            worst["marginal"] = math.inf
        else:
            worst["marginal"] = max([worst["marginal"]] + [abs(direct[k] - marg[k]) for k in direct])
    rep = spectral_gap(gen)
    vr = variational_check(gen, rep.gap, rng.standard_normal((100, gen.size)))
    return worst, vr


def test_criterion_9_property_suites():
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    worst = {"rows": 0.0, "idempotent": 0.0, "commute": 0.0, "marginal": 0.0}
    variational_ok = True
    variants = set()
    for spec in small_instances(seed=9, count=20):
        variants.add(spec.variant.value)
        w, vr = _pair_checks(spec, rng)
        for key in worst:
            worst[key] = max(worst[key], w[key])
        variational_ok &= vr.passed
    ok = (max(worst.values()) < 1e-12 and variational_ok and len(variants) == 3)
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    record(9, ok, f"{detail}, variational {variational_ok}", t0)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
