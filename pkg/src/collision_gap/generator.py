"""Collision generators on enumerated state spaces.

Two constructions are provided and cross-checked: the averaging form
``L = (1/N) sum_b (E_b - Id)`` with ``E_b`` the conditional expectation
given the entries off the pair ``b``, and the explicit jump-rate form
``L f(eta) = (1/N) sum_b c_b(eta) (f(eta^b) - f(eta))``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import DomainError, InvalidPairError, ReducibleError, ShapeError, UnsupportedVariantError
from .models import (
    ConfigurationSpace,
    ModelSpec,
    StationaryMeasure,
    Variant,
    enumerate_space,
    stationary_measure,
)

DENSE_THRESHOLD = 4096
TOL = 1e-12
EXACT_TOL = 1e-14


def pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def _store(mat, size: int, dense_threshold: int):
    if size <= dense_threshold:
        return mat.toarray() if sp.issparse(mat) else np.asarray(mat)
    return sp.csr_matrix(mat)


def as_dense(mat) -> np.ndarray:
    return mat.toarray() if sp.issparse(mat) else np.asarray(mat)


@dataclass(frozen=True)
class PairOperator:
    """Conditional expectation ``E_b`` as a (row-stochastic) matrix."""

    pair: tuple[int, int]
    matrix: object

    def apply(self, f) -> np.ndarray:
        return np.asarray(self.matrix @ np.asarray(f, dtype=float)).ravel()


@dataclass(frozen=True)
class Move:
    """Jumps ``eta -> eta^b`` for one pair, with rates ``c_b(eta)``."""

    pair: tuple[int, int]
    rates: np.ndarray
    target: np.ndarray


@dataclass(frozen=True)
class CollisionGenerator:
    matrix: object
    measure: StationaryMeasure
    space: ConfigurationSpace
    kind: str
    gamma: int | None = None
    moves: tuple[Move, ...] = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def spec(self) -> ModelSpec:
        return self.space.spec

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def pair_count(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def size(self) -> int:
        return len(self.space)

    @property
    def is_degenerate(self) -> bool:
        return self.space.is_degenerate

    @property
    def is_averaging(self) -> bool:
        """True when the generator is the conditional-expectation average."""
        return self.kind in ("average", "exclusion") or (self.kind == "colored" and self.gamma == 1)

    def dense(self) -> np.ndarray:
        return as_dense(self.matrix)

    def apply(self, f) -> np.ndarray:
        return np.asarray(self.matrix @ np.asarray(f, dtype=float)).ravel()

    def pair_operators(self) -> list[PairOperator]:
        if "pair_ops" not in self._cache:
            self._cache["pair_ops"] = [
                conditional_expectation_operator(self.space, self.measure, b) for b in pairs(self.n)
            ]
        return self._cache["pair_ops"]


def conditional_expectation_operator(space: ConfigurationSpace, measure: StationaryMeasure, b, dense_threshold: int = DENSE_THRESHOLD) -> PairOperator:
    """``E_b f(eta) = nu(f | entries off b)`` on state indices."""
    i, j = b
    if i == j:
        raise InvalidPairError(f"pair {b} has coinciding vertices")
    if not (0 <= i < space.n and 0 <= j < space.n):
        raise InvalidPairError(f"pair {b} out of range for N={space.n}")
    i, j = min(i, j), max(i, j)
    classes: dict[tuple, list[int]] = {}
    for k, s in enumerate(space.states):
        key = s[:i] + s[i + 1 : j] + s[j + 1 :]
        classes.setdefault(key, []).append(k)
    w = measure.weights
    rows, cols, vals = [], [], []
    for members in classes.values():
        idx = np.array(members)
        cond = w[idx] / w[idx].sum()
        rows.append(np.repeat(idx, len(idx)))
        cols.append(np.tile(idx, len(idx)))
        vals.append(np.tile(cond, len(idx)))
    n = len(space)
    mat = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return PairOperator((i, j), _store(mat, n, dense_threshold))


def build_average_generator(space: ConfigurationSpace, measure: StationaryMeasure, dense_threshold: int = DENSE_THRESHOLD) -> CollisionGenerator:
    """``L = (1/N) sum_b (E_b - Id)`` over all unordered pairs."""
    n = len(space)
    acc = sp.csr_matrix((n, n))
    ops = []
    for b in pairs(space.n):
        op = conditional_expectation_operator(space, measure, b, dense_threshold=0)
        ops.append(op)
        acc = acc + op.matrix
    mat = (acc - len(ops) * sp.identity(n, format="csr")) / space.n
    gen = CollisionGenerator(_store(mat, n, dense_threshold), measure, space, "average")
    if n <= dense_threshold:
        gen._cache["pair_ops"] = [PairOperator(op.pair, op.matrix.toarray()) for op in ops]
    else:
        gen._cache["pair_ops"] = ops
    return gen


def exclusion_rate(p_i: float, p_j: float, eta_i: int, eta_j: int) -> float:
    """Jump rate of the pair ``{i, j}`` in the disordered exclusion process."""
    den = p_i * (1 - p_j) + p_j * (1 - p_i)
    return (p_i * (1 - p_j) * eta_j * (1 - eta_i) + p_j * (1 - p_i) * eta_i * (1 - eta_j)) / den


def _rate_generator(space, measure, moves, kind, gamma, dense_threshold):
    n = len(space)
    rows, cols, vals = [], [], []
    diag = np.zeros(n)
    for mv in moves:
        mask = (mv.target != np.arange(n)) & (mv.rates > 0)
        idx = np.nonzero(mask)[0]
        rows.append(idx)
        cols.append(mv.target[idx])
        vals.append(mv.rates[idx] / space.n)
        diag[idx] -= mv.rates[idx] / space.n
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag)
    mat = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return CollisionGenerator(_store(mat, n, dense_threshold), measure, space, kind, gamma, tuple(moves))


def build_exclusion_generator(spec: ModelSpec, dense_threshold: int = DENSE_THRESHOLD) -> CollisionGenerator:
    if spec.variant is not Variant.DISORDERED_EXCLUSION:
        raise UnsupportedVariantError("exclusion rates need a disordered exclusion model")
    space = enumerate_space(spec)
    measure = stationary_measure(spec, space)
    arr = space.as_array()
    moves = []
    for i, j in pairs(spec.n):
        rates = np.array([exclusion_rate(spec.p[i], spec.p[j], s[i], s[j]) for s in arr])
        moves.append(Move((i, j), rates, space.swap_index(i, j)))
    return _rate_generator(space, measure, moves, "exclusion", None, dense_threshold)


def colored_rate(p_i: float, p_j: float, psi_i: int, psi_j: int, gamma: float) -> float:
    """Exclusion rate on the occupation variables plus stirring ``gamma/2``."""
    return exclusion_rate(p_i, p_j, psi_i, psi_j) + 0.5 * gamma * (psi_i == psi_j)


def build_colored_generator(spec: ModelSpec, gamma: int | None = None, dense_threshold: int = DENSE_THRESHOLD) -> CollisionGenerator:
    """Colored exclusion generator with stirring weight ``gamma``.

    Raises ReducibleError when the chain splits into several classes (only
    possible for ``gamma = 0``, ``m > 1`` and a full or empty lattice).
    """
    if spec.variant is not Variant.COLORED_EXCLUSION:
        raise UnsupportedVariantError("colored rates need a colored exclusion model")
    gamma = spec.gamma if gamma is None else gamma
    if gamma not in (0, 1):
        raise DomainError("gamma must be 0 or 1")
    space = enumerate_space(spec)
    measure = stationary_measure(spec, space)
    psi = (space.as_array() >= 1).astype(int)
    moves = []
    for i, j in pairs(spec.n):
        rates = np.array([colored_rate(spec.p[i], spec.p[j], s[i], s[j], gamma) for s in psi])
        moves.append(Move((i, j), rates, space.swap_index(i, j)))
    gen = _rate_generator(space, measure, moves, "colored", gamma, dense_threshold)
    n_classes = communicating_classes(gen)
    if n_classes > 1:
        raise ReducibleError(
            f"colored chain with gamma={gamma}, omega={spec.omega}, N={spec.n} splits into "
            f"{n_classes} communicating classes; no stirring and no empty site to move through",
            n_classes,
        )
    return gen


def build_generator(spec: ModelSpec, dense_threshold: int = DENSE_THRESHOLD) -> CollisionGenerator:
    """Default construction for a finite model spec."""
    v = spec.variant
    if v is Variant.DISORDERED_EXCLUSION:
        return build_exclusion_generator(spec, dense_threshold)
    if v is Variant.COLORED_EXCLUSION:
        return build_colored_generator(spec, spec.gamma, dense_threshold)
    if v is Variant.BIASED_PERMUTATIONS:
        space = enumerate_space(spec)
        return build_average_generator(space, stationary_measure(spec, space), dense_threshold)
    raise UnsupportedVariantError(f"{v.value} has no finite generator")


def communicating_classes(gen: CollisionGenerator) -> int:
    mat = sp.coo_matrix(gen.matrix)
    off = mat.row != mat.col
    graph = sp.csr_matrix(
        (np.ones(off.sum()), (mat.row[off], mat.col[off])), shape=mat.shape
    )
    n_comp, _ = connected_components(graph, directed=False)
    return int(n_comp)


# --- invariants ------------------------------------------------------------------------


def row_sum_residual(gen: CollisionGenerator) -> float:
    return float(np.max(np.abs(np.asarray(gen.matrix.sum(axis=1)).ravel())))


def min_off_diagonal(gen: CollisionGenerator) -> float:
    dense = gen.dense()
    off = dense[~np.eye(len(dense), dtype=bool)]
    return float(off.min()) if off.size else 0.0


def detailed_balance_residual(gen: CollisionGenerator) -> float:
    """Largest ``|nu(x) L(x,y) - nu(y) L(y,x)|`` relative to the largest flux."""
    flux = sp.diags(gen.measure.weights) @ sp.csr_matrix(gen.matrix)
    flux = flux - sp.diags(flux.diagonal())
    scale = abs(flux).max()
    if scale == 0:
        return 0.0
    return float(abs(flux - flux.T).max() / scale)


def rate_detailed_balance_residual(gen: CollisionGenerator) -> float:
    """Largest relative violation of ``nu(eta) c_b(eta) = nu(eta^b) c_b(eta^b)``."""
    w = gen.measure.weights
    worst = 0.0
    for mv in gen.moves:
        lhs = w * mv.rates
        rhs = w[mv.target] * mv.rates[mv.target]
        scale = np.maximum(np.maximum(lhs, rhs), np.finfo(float).tiny)
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / scale)))
    return worst


def projection_residual(op: PairOperator) -> float:
    """``max |D_b^2 + D_b|`` with ``D_b = E_b - Id``."""
    d = as_dense(op.matrix) - np.eye(op.matrix.shape[0])
    return float(np.max(np.abs(d @ d + d)))


def self_adjoint_residual(op: PairOperator, measure: StationaryMeasure) -> float:
    m = np.diag(measure.weights) @ as_dense(op.matrix)
    return float(np.max(np.abs(m - m.T)))


# --- Dirichlet form ----------------------------------------------------------------------


def dirichlet_form_routes(gen: CollisionGenerator, f) -> dict[str, float]:
    """``nu(f (-L) f)`` computed by every available route."""
    f = np.asarray(f, dtype=float).ravel()
    if f.shape != (gen.size,):
        raise ShapeError(f"function has {f.size} entries, state space has {gen.size}")
    w = gen.measure.weights
    out = {"matrix": float(-np.dot(w * f, gen.apply(f)))}
    if gen.moves:
        total = sum(float(np.dot(w, mv.rates * (f[mv.target] - f) ** 2)) for mv in gen.moves)
        out["rates"] = total / (2 * gen.n)
    if gen.is_averaging:
        total = 0.0
        for op in gen.pair_operators():
            d = op.apply(f) - f
            total += float(np.dot(w, d * d))
        out["projection"] = total / gen.n
    return out


def dirichlet_form(gen: CollisionGenerator, f, rtol: float = TOL) -> float:
    """Dirichlet form ``nu(f (-L) f)``; all available routes must agree."""
    routes = dirichlet_form_routes(gen, f)
    ref = routes["matrix"]
    scale = max(abs(v) for v in routes.values())
    for name, value in routes.items():
        if abs(value - ref) > rtol * max(scale, 1.0):
            raise ArithmeticError(f"Dirichlet form routes disagree: {routes}")
    return ref


# --- three-site matrix ---------------------------------------------------------------------


def p_matrix_three_site(x: float, y: float, z: float, tol: float = TOL) -> np.ndarray:
    """Transition matrix ``P = L + Id`` of the one-particle chain on three sites,
    where ``x, y, z`` are the stationary probabilities of the particle position."""
    if min(x, y, z) <= 0 or abs(x + y + z - 1) > tol:
        raise DomainError(f"({x}, {y}, {z}) is not an interior point of the simplex")
    xy, xz, yz = x + y, x + z, y + z
    return np.array(
        [
            [1 + x / xy + x / xz, y / xy, z / xz],
            [x / xy, 1 + y / xy + y / yz, z / yz],
            [x / xz, y / yz, 1 + z / xz + z / yz],
        ]
    ) / 3.0


def one_particle_positions(p1: float, p2: float, p3: float) -> tuple[float, float, float]:
    """Stationary law of the position of a single particle on three sites."""
    a = p1 * (1 - p2) * (1 - p3)
    b = (1 - p1) * p2 * (1 - p3)
    c = (1 - p1) * (1 - p2) * p3
    s = a + b + c
    return a / s, b / s, c / s


# --- export ----------------------------------------------------------------------------


def export_matrix_market(gen: CollisionGenerator, path) -> tuple[str, str]:
    """Write the generator as a MatrixMarket coordinate file plus a JSON side
    file carrying the stationary weights and state list."""
    path = str(path)
    mtx = path if path.endswith(".mtx") else path + ".mtx"
    scipy.io.mmwrite(mtx, sp.coo_matrix(gen.matrix), precision=17)
    side = mtx[: -len(".mtx")] + ".measure.json"
    with open(side, "w") as fh:
        json.dump(
            {
                "spec": gen.spec.to_dict(),
                "kind": gen.kind,
                "gamma": gen.gamma,
                "states": [list(s) for s in gen.space.states],
                "weights": [float(format(w, ".17g")) for w in gen.measure.weights],
            },
            fh,
        )
    return mtx, side


def load_matrix_market(mtx_path) -> tuple[sp.spmatrix, np.ndarray]:
    mat = scipy.io.mmread(str(mtx_path))
    with open(str(mtx_path)[: -len(".mtx")] + ".measure.json") as fh:
        weights = np.array(json.load(fh)["weights"])
    return sp.csr_matrix(mat), weights


def triangle_count(n: int) -> int:
    return math.comb(n, 3)


def disjoint(b: Sequence[int], c: Sequence[int]) -> bool:
    return not (set(b) & set(c))
