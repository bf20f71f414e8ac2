"""Closed-form gap bounds and the harness that checks them against exact
eigensolves."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import continuum as cont
from .errors import DomainError, ModelError, ReducibleError, ShapeError, UnsupportedVariantError
from .generator import (
    CollisionGenerator,
    as_dense,
    build_average_generator,
    build_colored_generator,
    build_generator,
    detailed_balance_residual,
    dirichlet_form,
    one_particle_positions,
    p_matrix_three_site,
    pairs,
    rate_detailed_balance_residual,
)
from .models import ModelSpec, Variant, enumerate_space, stationary_measure
from .spectra import admissible_omegas, h0_decomposition, spectral_gap, variational_check

MARGIN = 1e-9


@dataclass
class BoundReport:
    """One checked inequality or identity.

    ``kind`` is "lower" (measured >= bound), "upper" (measured <= bound) or
    "equal" (|measured - bound| <= tol).  Reports with ``asserted=False``
    record an observed margin and always pass.
    """

    name: str
    bound: float
    measured: float
    kind: str = "lower"
    tol: float = MARGIN
    inputs: dict = field(default_factory=dict)
    asserted: bool = True
    detail: str = ""

    @property
    def margin(self) -> float:
        if self.kind == "lower":
            return _sub(self.measured, self.bound)
        if self.kind == "upper":
            return _sub(self.bound, self.measured)
        return 0.0 - abs(_sub(self.measured, self.bound))

    @property
    def passed(self) -> bool:
        if not self.asserted:
            return True
        m = self.margin
        if self.kind == "equal":
            return m >= -self.tol
        return m >= -self.tol

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "inputs": self.inputs,
            "bound": _num(self.bound),
            "measured": _num(self.measured),
            "margin": _num(self.margin),
            "tol": self.tol,
            "asserted": self.asserted,
            "passed": self.passed,
            "detail": self.detail,
        }


def _sub(a, b):
    if math.isinf(a) and math.isinf(b) and (a > 0) == (b > 0):
        return 0.0
    return a - b


def _num(x):
    return float(x) if isinstance(x, Fraction) else x


# --- closed forms ----------------------------------------------------------------------------


def reduction_bound(lambda3, n: int):
    """Lower bound on the N-component gap from the three-component gap.
    Exact when ``lambda3`` is a Fraction."""
    if n < 2:
        raise DomainError("N must be >= 2")
    return (3 * lambda3 - 1) * (1 - Fraction(2, n)) + Fraction(1, n)


def clique4_bound(lambda4, n: int):
    """Lower bound on the N-component gap from the four-component gap."""
    if n < 4:
        raise DomainError("N must be >= 4")
    return (4 * lambda4 - 1) * (Fraction(1, 2) - Fraction(1, n)) + Fraction(1, n)


def det_p_formula(x, y, z):
    """Closed form of det(P) for the one-particle three-site chain."""
    if min(x, y, z) <= 0 or max(x, y, z) >= 1:
        raise DomainError("x, y, z must lie in (0, 1)")
    return Fraction(2, 9) * (1 + x * y * z / ((1 - x) * (1 - y) * (1 - z)))


# --- reduction theorem ---------------------------------------------------------------------------


def lambda3_bar(spec: ModelSpec, method: str = "dense") -> float:
    """Minimal gap over every three-site sub-model and conservation value.

    The conditional law on a triangle is the sub-model on its three sites,
    so this is the quantity entering the reduction bound for ``spec``.
    """
    v = spec.variant
    if v is Variant.COLORED_EXCLUSION and spec.gamma != 1:
        raise UnsupportedVariantError("the reduction applies to averaging dynamics (gamma = 1)")
    best = math.inf
    for tri in itertools.combinations(range(spec.n), 3):
        if v is Variant.BIASED_PERMUTATIONS:
            subs = [spec.restrict(tri, values=vals) for vals in itertools.combinations(range(1, spec.n + 1), 3)]
        else:
            base = spec.restrict(tri, omega=0 if v is Variant.DISORDERED_EXCLUSION else (0,) * spec.m)
            subs = [base.with_omega(om) for om in admissible_omegas(base)]
        for sub in subs:
            best = min(best, spectral_gap(build_generator(sub), method=method).gap)
    return best


def bilinear_pair_forms(gen: CollisionGenerator) -> dict[tuple, np.ndarray]:
    """Matrices ``A_{b,b'} = D_b^T diag(nu) D_b'`` so that
    ``f^T A_{b,b'} f = nu[D_b f D_b' f]``."""
    eye = np.eye(gen.size)
    ds = {op.pair: as_dense(op.matrix) - eye for op in gen.pair_operators()}
    w = gen.measure.weights[:, None]
    return {(b, c): ds[b].T @ (w * ds[c]) for b in ds for c in ds}


def triangle_identity_residual(gen: CollisionGenerator) -> float:
    """Max entry of the difference between the two sides of the triangle
    regrouping of ``sum_{b ~ b'} A_{b,b'}``, as matrices."""
    n = gen.n
    forms = bilinear_pair_forms(gen)
    bs = pairs(n)
    lhs = sum(forms[b, c] for b in bs for c in bs if set(b) & set(c))
    tri_sum = 0
    for tri in itertools.combinations(range(n), 3):
        tb = list(itertools.combinations(tri, 2))
        tri_sum = tri_sum + sum(forms[b, c] for b in tb for c in tb)
    rhs = tri_sum - (n - 3) * sum(forms[b, b] for b in bs)
    return float(np.max(np.abs(lhs - rhs)))


def verify_reduction_theorem(spec: ModelSpec, n_range: Iterable[int], lambda3=None, tol: float = MARGIN,
                             check_identity: bool = True) -> list[BoundReport]:
    """Check ``lambda(N, omega) >= reduction_bound(bar lambda(3), N)`` for the
    family obtained by truncating ``spec`` to its first N sites."""
    if not spec.variant.finite:
        raise UnsupportedVariantError("exact verification needs a finite model")
    n_range = list(n_range)
    if max(n_range) > spec.n:
        raise DomainError(f"family parameters cover {spec.n} sites, asked for N={max(n_range)}")
    reports = []
    for n in n_range:
        sub = spec.restrict(range(n), omega=spec.omega if spec.variant is Variant.BIASED_PERMUTATIONS else None)
        if spec.variant is Variant.DISORDERED_EXCLUSION:
            sub = sub.with_omega(0)
        elif spec.variant is Variant.COLORED_EXCLUSION:
            sub = sub.with_omega((0,) * spec.m)
        l3 = lambda3_bar(sub) if lambda3 is None else lambda3
        bound = reduction_bound(l3, n)
        for om in admissible_omegas(sub):
            gen = build_generator(sub.with_omega(om))
            gap = spectral_gap(gen).gap
            reports.append(BoundReport("reduction", float(bound), gap, "lower", tol,
                                       {"N": n, "omega": om, "lambda3": float(l3)}))
    if check_identity:
        gen = _identity_instance(spec, max(n_range))
        if gen is not None:
            reports.append(BoundReport("triangle-identity", 0.0, triangle_identity_residual(gen), "upper", 1e-10,
                                       {"N": gen.n, "omega": gen.spec.omega}))
    return reports


def _identity_instance(spec, n):
    sub = spec.restrict(range(n), omega=spec.omega if spec.variant is Variant.BIASED_PERMUTATIONS else None)
    if spec.variant is Variant.DISORDERED_EXCLUSION:
        sub = sub.with_omega(n // 2)
    elif spec.variant is Variant.COLORED_EXCLUSION:
        if spec.gamma != 1:
            return None
        sub = sub.with_omega(tuple([1] * min(spec.m, n - 1) + [0] * (spec.m - min(spec.m, n - 1))))
    space = enumerate_space(sub)
    return build_average_generator(space, stationary_measure(sub, space))


# --- three-site exclusion -----------------------------------------------------------------------------


def p_matrix_eigenvalues(P: np.ndarray) -> tuple[float, float, float]:
    """Eigenvalues of P, largest (= 1) first."""
    ev = np.sort(np.linalg.eigvals(P).real)[::-1]
    return float(ev[0]), float(ev[1]), float(ev[2])


def verify_exclusion_three_site(p1: float, p2: float, p3: float) -> list[BoundReport]:
    p = (p1, p2, p3)
    x, y, z = one_particle_positions(*p)
    P = p_matrix_three_site(x, y, z)
    one, l1, l2 = p_matrix_eigenvalues(P)
    spec = ModelSpec(Variant.DISORDERED_EXCLUSION, 3, p=p, omega=1)
    gap = spectral_gap(build_generator(spec)).gap
    hole = spectral_gap(build_generator(ModelSpec(Variant.DISORDERED_EXCLUSION, 3, p=tuple(1 - q for q in p), omega=2))).gap
    det_formula = float(det_p_formula(x, y, z))
    inputs = {"p": list(p)}
    return [
        BoundReport("three-site-gap-vs-P", min(1 - l1, 1 - l2), gap, "equal", 1e-10, inputs),
        BoundReport("three-site-trace", 2.0, float(np.trace(P)), "equal", 1e-12, inputs),
        BoundReport("three-site-det", det_formula, float(np.linalg.det(P)), "equal", 1e-12, inputs),
        BoundReport("three-site-det-lower", 2 / 9, det_formula, "lower", 0.0, inputs),
        BoundReport("three-site-eig-sum", 1.0, l1 + l2, "equal", 1e-12, inputs),
        BoundReport("three-site-eig-window", 1 / 6, max(abs(l1 - 0.5), abs(l2 - 0.5)), "upper", 0.0, inputs),
        BoundReport("three-site-gap-lower", 1 / 3, gap, "lower", 0.0, inputs,
                    detail="strict inequality"),
        BoundReport("three-site-particle-hole", gap, hole, "equal", 1e-10, inputs),
    ]


# --- colored exclusion ----------------------------------------------------------------------------------


def color_indicator_rayleigh(gen: CollisionGenerator, site: int = 0, color: int = 1) -> float:
    """Rayleigh quotient of ``1{eta_site = color}``; an upper bound on the gap."""
    f = np.array([float(s[site] == color) for s in gen.space.states])
    return dirichlet_form(gen, f) / gen.measure.variance(f)


def verify_colored_bounds(p: Sequence[float], n: int, m: int, omega_sweep: Sequence[Sequence[int]],
                          gamma1_spread: float = 2.0, gamma0_spread: float = 3.0) -> tuple[list[BoundReport], list[str]]:
    """Colored exclusion checks across a sweep of color counts.

    Returns the reports and diagnostics for skipped (reducible) instances.
    The constants of the lower bounds are not explicit, so they are reported
    as the empirical extremes of ``gap / (1 - rho)`` over the sweep.
    """
    reports: list[BoundReport] = []
    notes: list[str] = []
    g1s, ratios = [], []
    for om in omega_sweep:
        om = tuple(om)
        spec = ModelSpec(Variant.COLORED_EXCLUSION, n, p=tuple(p[:n]), omega=om, m=m, gamma=1)
        rho = spec.density
        if not 0 < rho < 1:
            notes.append(f"omega={om}: density {rho} outside (0, 1), skipped")
            continue
        inputs = {"N": n, "m": m, "omega": list(om), "rho": rho}
        gen1 = build_colored_generator(spec, 1)
        space = gen1.space
        avg = build_average_generator(space, gen1.measure)
        reports.append(BoundReport("colored-average-match", 0.0, float(np.max(np.abs(gen1.dense() - avg.dense()))),
                                   "upper", 1e-14, inputs))
        h1 = h0_decomposition(gen1)
        g1 = h1.full_gap
        g1s.append(g1)
        reports.append(BoundReport("colored-h0-split", h1.full_gap, h1.combined, "equal", 1e-8, {**inputs, "gamma": 1}))
        try:
            gen0 = build_colored_generator(spec, 0)
        except ReducibleError as exc:
            notes.append(f"omega={om}, gamma=0: {exc}")
            continue
        reports.append(BoundReport("colored-detailed-balance", 0.0, max(rate_detailed_balance_residual(gen0),
                                                                      detailed_balance_residual(gen0)),
                                   "upper", 1e-12, {**inputs, "gamma": 0}))
        h0 = h0_decomposition(gen0)
        g0 = h0.full_gap
        reports.append(BoundReport("colored-h0-split", h0.full_gap, h0.combined, "equal", 1e-8, {**inputs, "gamma": 0}))
        rq = color_indicator_rayleigh(gen0)
        reports.append(BoundReport("colored-indicator-upper", rq, g0, "upper", MARGIN, {**inputs, "gamma": 0}))
        if m == 1:
            reports.append(BoundReport("colored-m1-gamma-free", g1, g0, "equal", MARGIN, inputs))
        ratios.append(g0 / (1 - rho))
    if g1s:
        reports.append(BoundReport("colored-gamma1-spread", gamma1_spread, max(g1s) / min(g1s), "upper", 0.0,
                                   {"N": n, "m": m, "c_eps": min(g1s)}))
    if ratios:
        reports.append(BoundReport("colored-gamma0-spread", gamma0_spread, max(ratios) / min(ratios), "upper", 0.0,
                                   {"N": n, "m": m, "c_eps": min(ratios), "C": max(ratios)}))
    return reports, notes


# --- density-ratio comparison --------------------------------------------------------------------------


def density_ratio_comparison(gen: CollisionGenerator, gen0: CollisionGenerator, f_samples: Iterable,
                             bound_m: float | None = None) -> list[BoundReport]:
    """Variance, Dirichlet-form and gap comparison between two averaging
    generators on the same space whose measures have density ratio in
    ``[1/M, M]``."""
    if gen.size != gen0.size or gen.space.states != gen0.space.states:
        raise ShapeError("measures live on different state spaces")
    ratio = gen.measure.weights / gen0.measure.weights
    m_eff = float(max(ratio.max(), 1 / ratio.min()))
    if bound_m is None:
        bound_m = m_eff
    elif m_eff > bound_m * (1 + 1e-12):
        raise DomainError(f"density ratio {m_eff} exceeds the stated bound {bound_m}")
    worst_var = -math.inf
    worst_dir = -math.inf
    count = 0
    for f in f_samples:
        f = np.asarray(f, dtype=float)
        v, v0 = gen.measure.variance(f), gen0.measure.variance(f)
        e, e0 = dirichlet_form(gen, f), dirichlet_form(gen0, f)
        if v0 > 0:
            worst_var = max(worst_var, v / (bound_m * v0))
        if e0 > 0 and e > 0:
            worst_dir = max(worst_dir, e0 / (bound_m**3 * e), e / (bound_m**3 * e0))
        count += 1
    gap, gap0 = spectral_gap(gen).gap, spectral_gap(gen0).gap
    inputs = {"M": bound_m, "samples": count}
    return [
        BoundReport("density-variance", 1.0, worst_var, "upper", 1e-12, inputs, detail="Var_nu <= M Var_nu0"),
        BoundReport("density-dirichlet", 1.0, worst_dir, "upper", 1e-12, inputs,
                    detail="M^-3 E0 <= E <= M^3 E0"),
        BoundReport("density-gap-lower", gap0 / bound_m**4, gap, "lower", MARGIN, inputs),
        BoundReport("density-gap-upper", gap0 * bound_m**4, gap, "upper", MARGIN, inputs),
    ]


def random_biases(n: int, b_max: float, rng: np.random.Generator) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(row) for row in rng.uniform(-b_max, b_max, (n, n)))


def bias_sweep(n: int = 3, b_values: Sequence[float] = (0.2, 0.1, 0.05, 0.01), seed: int = 0,
               samples: int = 50) -> list[BoundReport]:
    """Biased versus uniform random transpositions for shrinking bias size."""
    rng = np.random.default_rng(seed)
    uniform = build_generator(ModelSpec(Variant.BIASED_PERMUTATIONS, n))
    reports = []
    for b_max in b_values:
        gen = build_generator(ModelSpec(Variant.BIASED_PERMUTATIONS, n, b=random_biases(n, b_max, rng)))
        fs = rng.standard_normal((samples, gen.size))
        reports.extend(density_ratio_comparison(gen, uniform, fs))
        for r in reports[-4:]:
            r.inputs["B"] = b_max
        gap = spectral_gap(gen).gap
        reports.append(BoundReport("bias-gap-deviation", 1 - math.exp(-16 * b_max), abs(gap - 0.5), "upper", 0.0,
                                   {"N": n, "B": b_max}, asserted=False,
                                   detail="observed |gap - 1/2| against 1 - exp(-16B)"))
    return reports


# --- suite ---------------------------------------------------------------------------------------------


def random_p(n: int, eps: float, rng: np.random.Generator) -> tuple[float, ...]:
    return tuple(rng.uniform(eps, 1 - eps, n).tolist())


def check_kac(seed: int = 0, points: int = 1000) -> list[BoundReport]:
    out = []
    f = cont.power_sum(4)
    for n in range(3, 7):
        for omega in (1.0, 4.0):
            x = cont.random_sphere_points(points, n, omega, seed=seed + n)
            reg = cont.eigenfunction_regression(cont.generator_apply_kac(f, x), f(x))
            inputs = {"N": n, "omega": omega}
            out.append(BoundReport("kac-slope", -(n + 2) / (4 * n), reg.slope, "equal", 1e-9, inputs))
            out.append(BoundReport("kac-residual", 0.0, reg.max_residual, "upper", 1e-9, inputs))
    for n in range(2, 101):
        exact = reduction_bound(Fraction(5, 12), n) == Fraction(n + 2, 4 * n)
        out.append(BoundReport("kac-reduction-exact", 1.0, float(exact), "equal", 0.0, {"N": n}))
    return out


def check_flat_kac(seed: int = 0, points: int = 1000) -> list[BoundReport]:
    f = cont.power_sum(2)
    out = []
    for omega in (1.0, 2.5):
        x = cont.random_simplex_points(points, 3, omega, seed=seed)
        reg = cont.eigenfunction_regression(cont.generator_apply_flat(f, x), f(x))
        out.append(BoundReport("flat-slope", -4 / 9, reg.slope, "equal", 1e-9, {"omega": omega}))
        out.append(BoundReport("flat-residual", 0.0, reg.max_residual, "upper", 1e-9, {"omega": omega}))
    k = cont.k_operator_matrix(8)
    ev = k.eigenvalues()
    for n in range(9):
        out.append(BoundReport("k-operator-eigenvalue", (-1) ** n / (n + 1), float(ev[n]), "equal", 1e-10, {"n": n}))
    b = cont.gap3_bound_from_mu(Fraction(-1, 2), Fraction(1, 3))
    out.append(BoundReport("gap3-from-mu-exact", 1.0, float(b == Fraction(4, 9)), "equal", 0.0))
    for n in range(2, 101):
        exact = reduction_bound(Fraction(4, 9), n) == Fraction(n + 1, 3 * n)
        out.append(BoundReport("flat-reduction-exact", 1.0, float(exact), "equal", 0.0, {"N": n}))
    for eta2 in (0.0, 0.25, 0.5, 0.9):
        out.append(BoundReport("flat-conditional-moment", cont.conditional_second_moment_flat(eta2),
                               cont.conditional_second_moment_flat_quadrature(eta2), "equal", 1e-12, {"eta2": eta2}))
    return out


def check_permutations() -> list[BoundReport]:
    out = []
    for n in (3, 4, 5):
        gap = spectral_gap(build_generator(ModelSpec(Variant.BIASED_PERMUTATIONS, n))).gap
        out.append(BoundReport("permutation-gap", 0.5, gap, "equal", 1e-9, {"N": n}))
    fam = ModelSpec(Variant.BIASED_PERMUTATIONS, 5)
    for r in verify_reduction_theorem(fam, [4, 5], lambda3=Fraction(1, 2), check_identity=False):
        r.name = "permutation-reduction-tight"
        r.kind = "equal"
        out.append(r)
    return out


def check_det_p(seed: int = 0, draws: int = 100) -> list[BoundReport]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    lowest = math.inf
    for x, y, z in rng.dirichlet((1, 1, 1), draws):
        formula = float(det_p_formula(x, y, z))
        worst = max(worst, abs(formula - np.linalg.det(p_matrix_three_site(x, y, z))))
        lowest = min(lowest, formula - 2 / 9)
    return [
        BoundReport("det-p-formula", 0.0, worst, "upper", 1e-12, {"draws": draws}),
        BoundReport("det-p-above-2/9", 0.0, lowest, "lower", 0.0, {"draws": draws}, detail="strict"),
        BoundReport("det-p-uniform", 0.25, float(det_p_formula(Fraction(1, 3), Fraction(1, 3), Fraction(1, 3))),
                    "equal", 0.0),
    ]


def check_exclusion_three_site(seed: int = 0, draws: int = 100, eps: float = 0.1) -> list[BoundReport]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(draws):
        out.extend(verify_exclusion_three_site(*random_p(3, eps, rng)))
    return out


def check_reduction(seed: int = 0, draws: int = 50, eps: float = 0.1, n_range=(4, 5, 6), lambda3=None) -> list[BoundReport]:
    rng = np.random.default_rng(seed)
    out = []
    for k in range(draws):
        spec = ModelSpec(Variant.DISORDERED_EXCLUSION, max(n_range), p=random_p(max(n_range), eps, rng), omega=0)
        out.extend(verify_reduction_theorem(spec, n_range, lambda3=lambda3, check_identity=(k == 0)))
    return out


def check_clique4() -> list[BoundReport]:
    out = []
    for n in range(4, 101):
        exact = clique4_bound(Fraction(1, 3), n) == Fraction(1, 6) + Fraction(2, 3 * n)
        out.append(BoundReport("clique4-identity", 1.0, float(exact), "equal", 0.0, {"N": n}))
    for lam in (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)):
        out.append(BoundReport("clique4-self-consistency", float(lam), float(clique4_bound(lam, 4)), "equal", 0.0,
                               {"lambda4": float(lam)}))
    return out


def check_colored(seed: int = 0, eps: float = 0.1, n: int = 8) -> list[BoundReport]:
    rng = np.random.default_rng(seed)
    p = random_p(n, eps, rng)
    reports, _ = verify_colored_bounds(p, n, 2, [(k, k) for k in (1, 2, 3)])
    one, _ = verify_colored_bounds(p[:5], 5, 1, [(k,) for k in (1, 2, 3, 4)])
    return reports + [r for r in one if r.name == "colored-m1-gamma-free"]


def check_density_ratio(seed: int = 0) -> list[BoundReport]:
    return bias_sweep(3, seed=seed)


def small_instances(seed: int = 0, count: int = 20) -> list[ModelSpec]:
    """Random small models across the finite variants."""
    rng = np.random.default_rng(seed)
    specs = []
    for k in range(count):
        kind = k % 3
        if kind == 0:
            n = int(rng.integers(2, 7))
            specs.append(ModelSpec(Variant.DISORDERED_EXCLUSION, n, p=random_p(n, 0.05, rng),
                                   omega=int(rng.integers(1, n))))
        elif kind == 1:
            n = int(rng.integers(3, 6))
            m = int(rng.integers(1, 3))
            counts = [1] * m
            counts[0] += int(rng.integers(0, n - m))
            specs.append(ModelSpec(Variant.COLORED_EXCLUSION, n, p=random_p(n, 0.05, rng), omega=tuple(counts),
                                   m=m, gamma=int(rng.integers(0, 2))))
        else:
            n = int(rng.integers(2, 5))
            specs.append(ModelSpec(Variant.BIASED_PERMUTATIONS, n, b=random_biases(n, 1.0, rng)))
    return specs


def check_variational(seed: int = 0, count: int = 20, samples: int = 100) -> list[BoundReport]:
    rng = np.random.default_rng(seed)
    out = []
    for spec in small_instances(seed, count):
        gen = build_generator(spec)
        rep = spectral_gap(gen)
        fs = rng.standard_normal((samples, gen.size))
        vr = variational_check(gen, rep.gap, fs)
        inputs = {"variant": spec.variant.value, "N": spec.n}
        out.append(BoundReport("variational-square", 0.0, vr.worst_square_margin, "lower", 1e-10, inputs))
        out.append(BoundReport("variational-rayleigh", 0.0, vr.worst_rayleigh_margin, "lower", 1e-10, inputs))
    return out


SUITE: dict[str, Callable[..., list[BoundReport]]] = {
    "kac": check_kac,
    "flat-kac": check_flat_kac,
    "permutations": check_permutations,
    "det-p": check_det_p,
    "exclusion-3": check_exclusion_three_site,
    "reduction": check_reduction,
    "clique4": check_clique4,
    "colored": check_colored,
    "density-ratio": check_density_ratio,
    "variational": check_variational,
}


def run_suite(only: Sequence[str] | None = None, seed: int = 0, lambda3=None, threads: int = 1) -> dict[str, list[BoundReport]]:
    """Run the named verification groups; results keyed and ordered by name."""
    names = list(SUITE) if not only else list(only)
    unknown = [n for n in names if n not in SUITE]
    if unknown:
        raise DomainError(f"unknown verification groups {unknown}; choose from {sorted(SUITE)}")

    def job(name):
        if name == "reduction":
            return check_reduction(seed=seed, lambda3=lambda3)
        if name == "clique4":
            return check_clique4()
        if name == "permutations":
            return check_permutations()
        return SUITE[name](seed=seed)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, names))
    else:
        results = [job(n) for n in names]
    return dict(zip(names, results))
