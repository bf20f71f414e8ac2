"""Model descriptions, conditioned state spaces and stationary measures.

A model is a product of single-site laws conditioned on a conservation law
``sum_i xi(eta_i) = omega``.  For the finite variants the conditioned space
is enumerated exactly, in lexicographic order of the entry sequences.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import EmptySpaceError, ModelError, SpecParseError, UnsupportedVariantError

MAX_PERMUTATION_N = 8
PROB_SUM_TOL = 1e-14


class Variant(str, enum.Enum):
    DISORDERED_EXCLUSION = "DisorderedExclusion"
    COLORED_EXCLUSION = "ColoredExclusion"
    BIASED_PERMUTATIONS = "BiasedPermutations"
    KAC_SPHERE = "KacSphere"
    FLAT_KAC = "FlatKac"

    @property
    def finite(self) -> bool:
        return self not in (Variant.KAC_SPHERE, Variant.FLAT_KAC)


@dataclass(frozen=True)
class ModelSpec:
    """One model instance.

    ``omega`` is an int (exclusion), a tuple of color counts (colored), the
    squared radius (Kac sphere) or the total mass (flat Kac).  For biased
    permutations it is fixed to ``(1, ..., 1)`` and ignored.
    """

    variant: Variant
    n: int
    p: tuple[float, ...] | None = None
    omega: int | float | tuple[int, ...] | None = None
    m: int = 1
    gamma: int = 1
    b: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ModelError(f"n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        v = self.variant
        if v in (Variant.DISORDERED_EXCLUSION, Variant.COLORED_EXCLUSION):
            if self.p is None or len(self.p) != self.n:
                raise ModelError(f"{v.value} needs {self.n} site probabilities")
            p = tuple(float(x) for x in self.p)
            if not all(0.0 < x < 1.0 for x in p):
                raise ModelError("site probabilities must lie strictly inside (0, 1)")
            object.__setattr__(self, "p", p)
        if v is Variant.DISORDERED_EXCLUSION:
            if self.omega is None or int(self.omega) != self.omega:
                raise ModelError("exclusion needs an integer particle count omega")
            omega = int(self.omega)
            if not 0 <= omega <= self.n:
                raise ModelError(f"particle count {omega} outside [0, {self.n}]")
            object.__setattr__(self, "omega", omega)
        elif v is Variant.COLORED_EXCLUSION:
            if self.m < 1:
                raise ModelError("number of colors m must be >= 1")
            if self.gamma not in (0, 1):
                raise ModelError("stirring weight gamma must be 0 or 1")
            omega = self.omega
            if omega is None:
                raise ModelError("colored exclusion needs color counts omega")
            if isinstance(omega, (int, np.integer)) and self.m == 1:
                omega = (int(omega),)
            omega = tuple(int(k) for k in omega)
            if len(omega) != self.m or any(k < 0 for k in omega):
                raise ModelError(f"omega must be {self.m} non-negative color counts")
            object.__setattr__(self, "omega", omega)
        elif v is Variant.BIASED_PERMUTATIONS:
            b = self.b
            if b is None:
                b = ((0.0,) * self.n,) * self.n
            b = tuple(tuple(float(x) for x in row) for row in b)
            if len(b) != self.n or any(len(row) != self.n for row in b):
                raise ModelError(f"bias matrix b must be {self.n}x{self.n}")
            if not all(math.isfinite(x) for row in b for x in row):
                raise ModelError("bias values must be finite")
            object.__setattr__(self, "b", b)
            object.__setattr__(self, "omega", (1,) * self.n)
        else:
            if self.omega is None or not float(self.omega) > 0:
                raise ModelError(f"{v.value} needs a positive conservation value")
            object.__setattr__(self, "omega", float(self.omega))

    @property
    def density(self) -> float:
        """Global density of occupied sites (exclusion variants)."""
        if self.variant is Variant.DISORDERED_EXCLUSION:
            return self.omega / self.n
        if self.variant is Variant.COLORED_EXCLUSION:
            return sum(self.omega) / self.n
        raise UnsupportedVariantError(f"density undefined for {self.variant.value}")

    def with_omega(self, omega) -> "ModelSpec":
        return replace(self, omega=omega)

    def restrict(self, sites: Sequence[int], omega=None, values: Sequence[int] | None = None) -> "ModelSpec":
        """Sub-model on ``sites`` with conservation value ``omega``.

        For permutations, ``values`` selects the letters left to the sites; the
        sub-model relabels them ``1..len(values)``.
        """
        sites = list(sites)
        k = len(sites)
        v = self.variant
        if v is Variant.BIASED_PERMUTATIONS:
            values = list(values) if values is not None else list(range(1, k + 1))
            if len(values) != k:
                raise ModelError("need as many letters as sites")
            b = tuple(tuple(self.b[i][j - 1] for j in values) for i in sites)
            return ModelSpec(v, k, b=b)
        if v in (Variant.DISORDERED_EXCLUSION, Variant.COLORED_EXCLUSION):
            p = tuple(self.p[i] for i in sites)
            return replace(self, n=k, p=p, omega=self.omega if omega is None else omega)
        return replace(self, n=k, omega=self.omega if omega is None else omega)

    def to_dict(self) -> dict:
        d: dict = {"variant": self.variant.value, "n": self.n}
        v = self.variant
        if v is Variant.DISORDERED_EXCLUSION:
            d.update(p=list(self.p), omega=self.omega)
        elif v is Variant.COLORED_EXCLUSION:
            d.update(p=list(self.p), omega=list(self.omega), m=self.m, gamma=self.gamma)
        elif v is Variant.BIASED_PERMUTATIONS:
            d.update(b=[list(row) for row in self.b])
        elif v is Variant.KAC_SPHERE:
            d.update(radius_sq=self.omega)
        else:
            d.update(mass=self.omega)
        return d


_SPEC_FIELDS = {"variant", "n", "p", "omega", "m", "gamma", "b", "radius_sq", "mass"}


def spec_from_dict(d: Mapping) -> ModelSpec:
    unknown = set(d) - _SPEC_FIELDS
    if unknown:
        raise ModelError(f"unknown model-spec fields: {sorted(unknown)}")
    for key in ("variant", "n"):
        if key not in d:
            raise ModelError(f"model spec is missing required field {key!r}")
    try:
        variant = Variant(d["variant"])
    except ValueError:
        raise ModelError(f"unknown variant {d['variant']!r}") from None
    omega = d.get("omega")
    if variant is Variant.KAC_SPHERE:
        omega = d.get("radius_sq", omega)
    elif variant is Variant.FLAT_KAC:
        omega = d.get("mass", omega)
    elif isinstance(omega, list):
        omega = tuple(omega)
    b = d.get("b")
    return ModelSpec(
        variant=variant,
        n=d["n"],
        p=tuple(d["p"]) if d.get("p") is not None else None,
        omega=omega,
        m=d.get("m", len(omega) if isinstance(omega, tuple) else 1),
        gamma=d.get("gamma", 1),
        b=tuple(tuple(row) for row in b) if b is not None else None,
    )


def load_spec(path) -> ModelSpec:
    """Read a model-spec JSON file; syntax errors carry the line number."""
    with open(path) as fh:
        text = fh.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(d, dict):
        raise SpecParseError("model spec must be a JSON object", line=1)
    return spec_from_dict(d)


# --- single-site laws and conservation -------------------------------------------------


def site_values(spec: ModelSpec) -> tuple[int, ...]:
    v = spec.variant
    if v is Variant.DISORDERED_EXCLUSION:
        return (0, 1)
    if v is Variant.COLORED_EXCLUSION:
        return tuple(range(spec.m + 1))
    if v is Variant.BIASED_PERMUTATIONS:
        return tuple(range(1, spec.n + 1))
    raise UnsupportedVariantError(f"{v.value} has a continuous single-site space")


def site_log_weight(spec: ModelSpec, i: int, value: int) -> float:
    """Unnormalized log of the single-site law at site ``i``."""
    v = spec.variant
    if v is Variant.DISORDERED_EXCLUSION:
        return math.log(spec.p[i] if value == 1 else 1.0 - spec.p[i])
    if v is Variant.COLORED_EXCLUSION:
        return math.log(spec.p[i] if value >= 1 else 1.0 - spec.p[i])
    if v is Variant.BIASED_PERMUTATIONS:
        return -spec.b[i][value - 1]
    raise UnsupportedVariantError(f"{v.value} has no discrete single-site law")


def single_site_law(spec: ModelSpec, i: int) -> dict[int, float]:
    """Normalized single-site law ``mu_i`` (before conditioning)."""
    vals = site_values(spec)
    w = np.exp([site_log_weight(spec, i, x) for x in vals])
    w /= w.sum()
    return dict(zip(vals, w.tolist()))


def conserved_quantity(spec: ModelSpec, entries: Sequence[int]) -> tuple[int, ...]:
    """Value of ``sum_i xi(eta_i)`` as a tuple of counts."""
    v = spec.variant
    if v is Variant.DISORDERED_EXCLUSION:
        return (sum(entries),)
    if v is Variant.COLORED_EXCLUSION:
        return tuple(sum(1 for x in entries if x == k) for k in range(1, spec.m + 1))
    if v is Variant.BIASED_PERMUTATIONS:
        return tuple(sum(1 for x in entries if x == j) for j in range(1, spec.n + 1))
    raise UnsupportedVariantError(v.value)


def target_quantity(spec: ModelSpec) -> tuple[int, ...]:
    if spec.variant is Variant.DISORDERED_EXCLUSION:
        return (spec.omega,)
    return tuple(spec.omega)


# --- enumeration -----------------------------------------------------------------------


def _multiset_permutations(counts: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Distinct arrangements of a multiset, lexicographic; counts[v] copies of v."""
    total = sum(counts)
    counts = list(counts)
    prefix: list[int] = []

    def rec():
        if len(prefix) == total:
            yield tuple(prefix)
            return
        for v, c in enumerate(counts):
            if c:
                counts[v] -= 1
                prefix.append(v)
                yield from rec()
                prefix.pop()
                counts[v] += 1

    yield from rec()


@dataclass(frozen=True)
class ConfigurationSpace:
    spec: ModelSpec
    states: tuple[tuple[int, ...], ...]
    index: Mapping[tuple[int, ...], int] = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def is_degenerate(self) -> bool:
        """One-point space: the measure is a Dirac mass."""
        return len(self.states) == 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.states, dtype=np.int64).reshape(len(self.states), self.n)

    def swap_index(self, i: int, j: int) -> np.ndarray:
        """Index of ``eta^b`` (entries i and j exchanged) for every state."""
        out = np.empty(len(self.states), dtype=np.int64)
        for k, s in enumerate(self.states):
            if s[i] == s[j]:
                out[k] = k
            else:
                t = list(s)
                t[i], t[j] = t[j], t[i]
                out[k] = self.index[tuple(t)]
        return out


def expected_cardinality(spec: ModelSpec) -> int:
    v = spec.variant
    if v is Variant.DISORDERED_EXCLUSION:
        return math.comb(spec.n, spec.omega)
    if v is Variant.COLORED_EXCLUSION:
        rest = spec.n - sum(spec.omega)
        if rest < 0:
            return 0
        out = math.factorial(spec.n) // math.factorial(rest)
        for k in spec.omega:
            out //= math.factorial(k)
        return out
    if v is Variant.BIASED_PERMUTATIONS:
        return math.factorial(spec.n)
    raise UnsupportedVariantError(v.value)


def enumerate_space(spec: ModelSpec, max_permutation_n: int = MAX_PERMUTATION_N) -> ConfigurationSpace:
    """Enumerate the conditioned state space in lexicographic order."""
    v = spec.variant
    if not v.finite:
        raise UnsupportedVariantError(f"{v.value} is a continuous model; use the quadrature routines")
    if v is Variant.DISORDERED_EXCLUSION:
        states = list(_multiset_permutations([spec.n - spec.omega, spec.omega]))
    elif v is Variant.COLORED_EXCLUSION:
        rest = spec.n - sum(spec.omega)
        if rest < 0:
            raise EmptySpaceError(f"color counts {spec.omega} exceed {spec.n} sites")
        states = list(_multiset_permutations([rest, *spec.omega]))
    else:
        if spec.n > max_permutation_n:
            raise ModelError(
                f"permutation space of size {spec.n}! exceeds the cap N <= {max_permutation_n}"
            )
        states = list(itertools.permutations(range(1, spec.n + 1)))
    if not states:
        raise EmptySpaceError(f"empty configuration space for {spec}")
    return ConfigurationSpace(spec, tuple(states), {s: k for k, s in enumerate(states)})


def occupancy_projection(space: ConfigurationSpace) -> dict[tuple[int, ...], tuple[int, ...]]:
    """Map each colored configuration to its occupation pattern ``psi``."""
    if space.spec.variant is not Variant.COLORED_EXCLUSION:
        raise UnsupportedVariantError("occupancy projection needs a colored exclusion model")
    return {s: tuple(int(x >= 1) for x in s) for s in space.states}


# --- stationary measure ------------------------------------------------------------------


@dataclass(frozen=True)
class StationaryMeasure:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.weights)

    def expect(self, f) -> float:
        return float(np.dot(self.weights, f))

    def variance(self, f) -> float:
        f = np.asarray(f, dtype=float)
        mean = self.expect(f)
        return float(np.dot(self.weights, (f - mean) ** 2))

    def inner(self, f, g) -> float:
        return float(np.dot(self.weights, np.asarray(f) * np.asarray(g)))


def log_weights(spec: ModelSpec, space: ConfigurationSpace) -> np.ndarray:
    table = {(i, x): site_log_weight(spec, i, x) for i in range(spec.n) for x in site_values(spec)}
    return np.array([sum(table[i, x] for i, x in enumerate(s)) for s in space.states])


def stationary_measure(spec: ModelSpec, space: ConfigurationSpace, scale: float = 1.0) -> StationaryMeasure:
    """Product of single-site laws restricted to ``space`` and normalized.

    ``scale`` multiplies all unnormalized weights; it cancels in the
    normalization and exists to exercise that invariance.
    """
    logw = log_weights(spec, space) + math.log(scale)
    w = np.exp(logw - logw.max())
    total = w.sum()
    if not total > 0:
        raise ModelError("stationary measure has zero total mass")
    w /= total
    return StationaryMeasure(w)


def conditional_law_product(spec: ModelSpec, sites: Sequence[int], outside: Mapping[int, int]) -> dict[tuple[int, ...], float]:
    """Product law over ``sites`` conditioned on the conservation law, given
    the entries ``outside`` at every other site; built directly from the
    single-site laws by brute force over all single-site values."""
    sites = list(sites)
    target = np.array(target_quantity(spec))
    fixed = np.array(conserved_quantity(spec, list(outside.values())))
    need = target - fixed
    vals = site_values(spec)
    laws = [single_site_law(spec, i) for i in sites]
    out: dict[tuple[int, ...], float] = {}
    for combo in itertools.product(vals, repeat=len(sites)):
        if np.array_equal(np.array(conserved_quantity(spec, combo)), need):
            out[combo] = math.prod(law[x] for law, x in zip(laws, combo))
    total = sum(out.values())
    return {k: w / total for k, w in out.items()}


def conditional_law_marginal(space: ConfigurationSpace, measure: StationaryMeasure, sites: Sequence[int], state: Sequence[int]) -> dict[tuple[int, ...], float]:
    """Law of the entries on ``sites`` under ``measure`` conditioned on the
    entries of ``state`` off ``sites``."""
    sites = list(sites)
    others = [i for i in range(space.n) if i not in sites]
    key = tuple(state[i] for i in others)
    out: dict[tuple[int, ...], float] = {}
    for s, w in zip(space.states, measure.weights):
        if tuple(s[i] for i in others) == key:
            sub = tuple(s[i] for i in sites)
            out[sub] = out.get(sub, 0.0) + w
    total = sum(out.values())
    return {k: w / total for k, w in out.items()}


def particle_hole(spec: ModelSpec) -> ModelSpec:
    """Exchange occupied and empty sites: p -> 1-p and omega -> N-omega."""
    if spec.variant is not Variant.DISORDERED_EXCLUSION:
        raise UnsupportedVariantError("particle-hole map needs a disordered exclusion model")
    return replace(spec, p=tuple(1.0 - x for x in spec.p), omega=spec.n - spec.omega)
