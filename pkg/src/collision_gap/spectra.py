"""Spectral gaps of ``-L`` in ``L^2(nu)``.

Under detailed balance ``S = D^{1/2} (-L) D^{-1/2}`` with ``D = diag(nu)`` is
symmetric and has the same spectrum as ``-L``; both solvers work on ``S``.
The constant function maps to ``sqrt(nu)``, which the iterative solver
deflates explicitly.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import ConvergenceError, DomainError, ReducibleError, UnsupportedVariantError
from .generator import CollisionGenerator, DENSE_THRESHOLD, as_dense, build_generator, communicating_classes
from .models import ModelSpec, Variant, occupancy_projection

RESIDUAL_TOL = 1e-10
MAX_ITER = 100_000
DEGENERACY_TOL = 1e-8


@dataclass
class SpectrumReport:
    gap: float
    eigenvalues: list[float]
    residuals: list[float]
    method: str
    tolerance: float
    multiplicity: int
    size: int
    iterations: int = 0
    gap_vector: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "gap": self.gap,
            "eigenvalues": list(self.eigenvalues),
            "eigenvector_residuals": list(self.residuals),
            "method": self.method,
            "tolerance": self.tolerance,
            "gap_multiplicity": self.multiplicity,
            "states": self.size,
            "iterations": self.iterations,
        }


def symmetrized_operator(gen: CollisionGenerator):
    """``S = D^{1/2} (-L) D^{-1/2}``, dense or sparse like the generator."""
    s = np.sqrt(gen.measure.weights)
    if sp.issparse(gen.matrix):
        mat = -(sp.diags(s) @ gen.matrix @ sp.diags(1.0 / s))
        return ((mat + mat.T) * 0.5).tocsr()
    mat = -(s[:, None] * gen.dense()) / s[None, :]
    return 0.5 * (mat + mat.T)


def check_irreducible(gen: CollisionGenerator) -> None:
    n_classes = communicating_classes(gen)
    if n_classes > 1:
        raise ReducibleError(f"generator has {n_classes} communicating classes", n_classes)


def lanczos_smallest(matvec, n: int, k: int = 1, deflate: np.ndarray | None = None, tol: float = RESIDUAL_TOL,
                     maxiter: int = MAX_ITER, max_basis: int = 160, seed: int = 0):
    """Smallest ``k`` eigenpairs of a symmetric operator by restarted Lanczos
    with full reorthogonalization.

    ``deflate`` is an orthonormal set of columns removed from the operator.
    Returns ``(values, vectors, residuals, matvecs)``.
    """
    rng = np.random.default_rng(seed)
    q = np.zeros((n, 0)) if deflate is None else np.atleast_2d(deflate.T).T.reshape(n, -1)
    dim = n - q.shape[1]
    k = min(k, dim)
    if dim <= 0:
        return np.zeros(0), np.zeros((n, 0)), np.zeros(0), 0

    def project(v):
        if q.shape[1]:
            v = v - q @ (q.T @ v)
        return v

    def op(v):
        return project(matvec(project(v)))

    start = project(rng.standard_normal(n))
    matvecs = 0
    while True:
        basis_cap = min(max_basis, dim)
        v = start / np.linalg.norm(start)
        V = np.zeros((n, basis_cap))
        alpha = np.zeros(basis_cap)
        beta = np.zeros(basis_cap)
        m = 0
        for m in range(basis_cap):
            V[:, m] = v
            w = op(v)
            matvecs += 1
            alpha[m] = v @ w
            for _ in range(2):
                w = w - V[:, : m + 1] @ (V[:, : m + 1].T @ w)
                w = project(w)
            beta[m] = np.linalg.norm(w)
            if beta[m] < 1e-13 * max(1.0, abs(alpha[m])) or m + 1 == basis_cap:
                break
            v = w / beta[m]
        size = m + 1
        theta, y = scipy.linalg.eigh_tridiagonal(alpha[:size], beta[: size - 1])
        kk = min(k, size)
        vecs = V[:, :size] @ y[:, :kk]
        vals = theta[:kk]
        res = np.array([np.linalg.norm(op(vecs[:, c]) - vals[c] * vecs[:, c]) for c in range(kk)])
        matvecs += kk
        if kk == k and np.all(res < tol):
            return vals, vecs, res, matvecs
        if kk < k and np.all(res < tol):
            # invariant Krylov subspace: lock what we have, search its complement
            more = lanczos_smallest(matvec, n, k - kk, np.column_stack([q, vecs]), tol, maxiter - matvecs, max_basis, seed + 1)
            order = np.argsort(np.concatenate([vals, more[0]]), kind="stable")
            return (np.concatenate([vals, more[0]])[order], np.column_stack([vecs, more[1]])[:, order],
                    np.concatenate([res, more[2]])[order], matvecs + more[3])
        if matvecs >= maxiter:
            raise ConvergenceError(f"Lanczos residual {res.max():.3e} above {tol:.1e}", matvecs)
        # explicit restart from the unconverged Ritz vectors plus a small kick
        start = vecs @ np.where(res < tol, 0.1, 1.0) + 1e-3 * project(rng.standard_normal(n))
        start = project(start)


def spectral_gap(gen: CollisionGenerator, method: str = "auto", k: int = 4, tol: float = RESIDUAL_TOL,
                 maxiter: int = MAX_ITER, dense_threshold: int = DENSE_THRESHOLD) -> SpectrumReport:
    """Smallest non-zero eigenvalue of ``-L`` with residual diagnostics."""
    n = gen.size
    if gen.is_degenerate:
        return SpectrumReport(math.inf, [0.0], [0.0], "trivial", 0.0, 0, n)
    check_irreducible(gen)
    if method == "auto":
        method = "dense" if n <= dense_threshold else "iterative"
    s = np.sqrt(gen.measure.weights)
    S = symmetrized_operator(gen)
    if method == "dense":
        S = as_dense(S)
        evals, evecs = np.linalg.eigh(S)
        kk = min(k, n)
        vals, vecs = evals[:kk], evecs[:, :kk]
        res = np.linalg.norm(S @ vecs - vecs * vals, axis=0)
        gap = float(evals[1])
        mult = int(np.sum(np.abs(evals[1:] - gap) < DEGENERACY_TOL))
        iterations = 0
    elif method == "iterative":
        u0 = s / np.linalg.norm(s)
        kk = min(k, n) - 1
        vals, vecs, res, iterations = lanczos_smallest(lambda v: S @ v, n, kk, deflate=u0, tol=tol, maxiter=maxiter)
        vals = np.concatenate([[float(u0 @ (S @ u0))], vals])
        vecs = np.column_stack([u0, vecs])
        res = np.concatenate([[np.linalg.norm(S @ u0 - vals[0] * u0)], res])
        gap = float(vals[1])
        # Lanczos finds one copy of a repeated eigenvalue
        mult = int(np.sum(np.abs(vals[1:] - gap) < DEGENERACY_TOL))
    else:
        raise DomainError(f"unknown method {method!r}")
    if abs(vals[0]) > 1e-8:
        raise ArithmeticError(f"lowest eigenvalue {vals[0]} of -L is not zero")
    return SpectrumReport(
        gap=gap,
        eigenvalues=[float(x) for x in vals],
        residuals=[float(x) for x in res],
        method=method,
        tolerance=float(np.max(res)),
        multiplicity=mult,
        size=n,
        iterations=iterations,
        gap_vector=vecs[:, 1] / s,
    )


# --- variational checks -------------------------------------------------------------------


@dataclass
class VariationalReport:
    samples: int
    worst_square_margin: float
    worst_rayleigh_margin: float
    passed: bool


def variational_check(gen: CollisionGenerator, gap: float, f_samples: Iterable, tol: float = 1e-10) -> VariationalReport:
    """Check ``nu((Lf)^2) >= gap nu(f(-L)f)`` and ``nu(f(-L)f) / Var(f) >= gap``."""
    w = gen.measure.weights
    sq_margin = math.inf
    rq_margin = math.inf
    count = 0
    for f in f_samples:
        f = np.asarray(f, dtype=float)
        # L kills constants; centering avoids cancellation in the forms
        f = f - gen.measure.expect(f)
        lf = gen.apply(f)
        energy = -float(np.dot(w * f, lf))
        sq = float(np.dot(w, lf * lf))
        scale = max(1.0, sq)
        sq_margin = min(sq_margin, (sq - gap * energy) / scale)
        var = gen.measure.variance(f)
        if var > 1e-300 and math.isfinite(gap):
            rq_margin = min(rq_margin, energy / var - gap)
        count += 1
    passed = sq_margin >= -tol and rq_margin >= -tol
    return VariationalReport(count, sq_margin, rq_margin, passed)


# --- color-blind decomposition ----------------------------------------------------------------


@dataclass
class H0Report:
    gap_h0: float
    gap_perp: float
    combined: float
    full_gap: float
    commutation_residual: float
    dim_h0: int

    @property
    def consistent(self) -> bool:
        return abs(self.combined - self.full_gap) <= 1e-9 * max(1.0, self.full_gap)


def psi_projector(gen: CollisionGenerator) -> np.ndarray:
    """Matrix of ``f -> nu(f | psi)`` on state indices."""
    psi = occupancy_projection(gen.space)
    classes: dict[tuple, list[int]] = {}
    for k, s in enumerate(gen.space.states):
        classes.setdefault(psi[s], []).append(k)
    w = gen.measure.weights
    out = np.zeros((gen.size, gen.size))
    for members in classes.values():
        idx = np.array(members)
        out[np.ix_(idx, idx)] = w[idx] / w[idx].sum()
    return out


def _lowest_nonzero(mat: np.ndarray, skip_zero: bool) -> float:
    if mat.shape[0] == 0:
        return math.inf
    evals = np.linalg.eigvalsh(mat)
    if skip_zero:
        evals = evals[1:]
    return float(evals[0]) if evals.size else math.inf


def h0_decomposition(gen: CollisionGenerator) -> H0Report:
    """Gaps of ``-L`` restricted to color-blind functions and to their
    orthogonal complement."""
    if gen.spec.variant is not Variant.COLORED_EXCLUSION:
        raise UnsupportedVariantError("H0 decomposition needs a colored exclusion generator")
    pi0 = psi_projector(gen)
    L = gen.dense()
    comm = float(np.max(np.abs(L @ pi0 - pi0 @ L)))
    full = spectral_gap(gen, method="dense").gap
    s = np.sqrt(gen.measure.weights)
    S = as_dense(symmetrized_operator(gen))
    # orthonormal basis of the image of H0 under f -> sqrt(nu) f
    cols = []
    for c in np.unique(pi0 > 0, axis=0):
        mask = c.astype(bool)
        v = np.where(mask, s, 0.0)
        cols.append(v / np.linalg.norm(v))
    q0 = np.column_stack(cols)
    qp = scipy.linalg.null_space(q0.T)
    gap_h0 = _lowest_nonzero(q0.T @ S @ q0, skip_zero=True)
    gap_perp = _lowest_nonzero(qp.T @ S @ qp, skip_zero=False) if qp.shape[1] else math.inf
    return H0Report(gap_h0, gap_perp, min(gap_h0, gap_perp), full, comm, q0.shape[1])


# --- sweeps over the conservation value ---------------------------------------------------------


@dataclass
class GapOverOmega:
    omegas: list
    reports: list[SpectrumReport]

    @property
    def gaps(self) -> list[float]:
        return [r.gap for r in self.reports]

    @property
    def minimum(self) -> float:
        return min(self.gaps)

    def rows(self) -> list[tuple]:
        return [(om, r.gap, r.method, r.tolerance) for om, r in zip(self.omegas, self.reports)]

    def to_dict(self) -> dict:
        return {
            "entries": [
                {"omega": list(om) if isinstance(om, tuple) else om, **r.to_dict()}
                for om, r in zip(self.omegas, self.reports)
            ],
            "min_gap": self.minimum,
        }


def admissible_omegas(spec: ModelSpec) -> list:
    """All representable conservation values for a finite model family."""
    v = spec.variant
    if v is Variant.DISORDERED_EXCLUSION:
        return list(range(spec.n + 1))
    if v is Variant.COLORED_EXCLUSION:
        return [c for c in itertools.product(range(spec.n + 1), repeat=spec.m) if sum(c) <= spec.n]
    if v is Variant.BIASED_PERMUTATIONS:
        return [spec.omega]
    raise UnsupportedVariantError(f"{v.value} has a continuum of conservation values")


def min_gap_over_omega(spec: ModelSpec, omegas: Sequence | None = None, method: str = "auto", threads: int = 1) -> GapOverOmega:
    """Gap for each conservation value and their minimum; one-point spaces
    contribute ``inf``."""
    if not spec.variant.finite:
        raise UnsupportedVariantError(f"{spec.variant.value} is not a finite model")
    omegas = admissible_omegas(spec) if omegas is None else list(omegas)
    if not omegas:
        raise DomainError("empty range of conservation values")

    def solve(om):
        return spectral_gap(build_generator(spec.with_omega(om)), method=method)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(solve, omegas))
    else:
        reports = [solve(om) for om in omegas]
    return GapOverOmega(omegas, reports)
