"""Continuous collision models: the Kac walk on a sphere and the flat Kac
model on a simplex.

Pair averages are evaluated by quadrature.  Test functions are vectorized:
``f`` receives an array of shape ``(..., N)`` and reduces the last axis.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, FitWindowError, InvalidPairError, UnsupportedVariantError
from .generator import pairs
from .models import ModelSpec, Variant

DEFAULT_ANGLE_NODES = 64
DEFAULT_GAUSS_ORDER = 16
CONSTRAINT_TOL = 1e-10


@dataclass(frozen=True)
class QuadratureRule:
    kind: str
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.nodes)


def uniform_angle_rule(m: int = DEFAULT_ANGLE_NODES) -> QuadratureRule:
    """Equispaced angles on the circle; exact for trigonometric polynomials
    of degree < m."""
    if m < 2:
        raise DomainError("need at least 2 angle nodes")
    return QuadratureRule("uniform-angle", 2 * np.pi * np.arange(m) / m, np.full(m, 1.0 / m))


def interval_gauss_rule(q: int = DEFAULT_GAUSS_ORDER) -> QuadratureRule:
    """Gauss-Legendre rule on [0, 1] with weights summing to 1."""
    if q < 2:
        raise DomainError("need at least 2 Gauss nodes")
    x, w = np.polynomial.legendre.leggauss(q)
    return QuadratureRule("interval-gauss", 0.5 * (x + 1), 0.5 * w)


@dataclass(frozen=True)
class SpherePoint:
    eta: np.ndarray
    omega: float

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        if abs(float(eta @ eta) - self.omega) >= CONSTRAINT_TOL:
            raise DomainError(f"point is not on the sphere of squared radius {self.omega}")
        object.__setattr__(self, "eta", eta)


@dataclass(frozen=True)
class SimplexPoint:
    eta: np.ndarray
    omega: float

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        if np.any(eta < 0) or abs(float(eta.sum()) - self.omega) >= CONSTRAINT_TOL:
            raise DomainError(f"point is not on the simplex of mass {self.omega}")
        object.__setattr__(self, "eta", eta)


def _coords(eta):
    return eta.eta if isinstance(eta, (SpherePoint, SimplexPoint)) else np.asarray(eta, dtype=float)


def random_sphere_points(count: int, n: int, omega: float = 1.0, seed: int = 0) -> np.ndarray:
    """Uniform points on the sphere ``sum eta_i^2 = omega``, shape (count, n)."""
    g = np.random.default_rng(seed).standard_normal((count, n))
    return g * np.sqrt(omega / np.sum(g * g, axis=1, keepdims=True))


def random_simplex_points(count: int, n: int, omega: float = 1.0, seed: int = 0) -> np.ndarray:
    """Uniform points on the simplex ``sum eta_i = omega``, shape (count, n)."""
    e = np.random.default_rng(seed).standard_exponential((count, n))
    return e * (omega / e.sum(axis=1, keepdims=True))


def _check_pair(b, n):
    i, j = b
    if i == j:
        raise InvalidPairError(f"pair {b} has coinciding vertices")
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidPairError(f"pair {b} out of range for N={n}")
    return i, j


def pair_average_kac(f: Callable, b, eta, rule: QuadratureRule | None = None) -> np.ndarray | float:
    """Average of ``f`` over rotations in the plane of coordinates ``b``."""
    rule = rule or uniform_angle_rule()
    if rule.kind != "uniform-angle":
        raise DomainError("Kac pair averages need a uniform-angle rule")
    x = _coords(eta)
    i, j = _check_pair(b, x.shape[-1])
    c, s = np.cos(rule.nodes), np.sin(rule.nodes)
    pts = np.repeat(x[..., None, :], rule.size, axis=-2)
    xi, xj = x[..., i, None], x[..., j, None]
    pts[..., i] = c * xi + s * xj
    pts[..., j] = -s * xi + c * xj
    return np.asarray(f(pts)) @ rule.weights


def pair_average_flat(f: Callable, b, eta, rule: QuadratureRule | None = None) -> np.ndarray | float:
    """Average of ``f`` over uniform redistributions of ``eta_i + eta_j``."""
    rule = rule or interval_gauss_rule()
    if rule.kind != "interval-gauss":
        raise DomainError("flat pair averages need an interval-gauss rule")
    x = _coords(eta)
    i, j = _check_pair(b, x.shape[-1])
    total = x[..., i, None] + x[..., j, None]
    pts = np.repeat(x[..., None, :], rule.size, axis=-2)
    pts[..., i] = total * rule.nodes
    pts[..., j] = total * (1 - rule.nodes)
    return np.asarray(f(pts)) @ rule.weights


def _generator_apply(avg, f, eta, rule):
    x = _coords(eta)
    n = x.shape[-1]
    base = np.asarray(f(x))
    return sum(avg(f, b, x, rule) - base for b in pairs(n)) / n


def generator_apply_kac(f: Callable, eta, rule: QuadratureRule | None = None):
    """``L f(eta) = (1/N) sum_b (E_b f(eta) - f(eta))`` for the Kac walk."""
    return _generator_apply(pair_average_kac, f, eta, rule or uniform_angle_rule())


def generator_apply_flat(f: Callable, eta, rule: QuadratureRule | None = None):
    return _generator_apply(pair_average_flat, f, eta, rule or interval_gauss_rule())


def power_sum(k: int) -> Callable:
    def f(x):
        return np.sum(np.asarray(x) ** k, axis=-1)

    f.__name__ = f"power_sum_{k}"
    return f


@dataclass(frozen=True)
class Regression:
    slope: float
    intercept: float
    max_residual: float


def eigenfunction_regression(lf, f) -> Regression:
    """Least-squares fit ``Lf = slope * f + intercept``."""
    lf, f = np.asarray(lf, dtype=float), np.asarray(f, dtype=float)
    A = np.column_stack([f, np.ones_like(f)])
    (slope, intercept), *_ = np.linalg.lstsq(A, lf, rcond=None)
    return Regression(float(slope), float(intercept), float(np.max(np.abs(A @ [slope, intercept] - lf))))


def conditional_second_moment_flat(eta2: float) -> float:
    """``nu[eta_1^2 | eta_2]`` for the flat model with N=3 and unit mass."""
    if not 0 <= eta2 <= 1:
        raise DomainError("eta_2 must lie in [0, 1]")
    return (eta2 * eta2 - 2 * eta2 + 1) / 3


def conditional_second_moment_flat_quadrature(eta2: float, rule: QuadratureRule | None = None) -> float:
    """Same quantity by integrating ``u^2`` against the section of the uniform
    simplex density at fixed ``eta_2``."""
    rule = rule or interval_gauss_rule()
    width = 1.0 - eta2
    if width <= 0:
        return 0.0
    u = width * rule.nodes
    density = np.ones_like(u)  # uniform density restricted to the section
    return float((rule.weights * u * u * density).sum() / (rule.weights * density).sum())


# --- one-dimensional K operator ---------------------------------------------------------------


@dataclass(frozen=True)
class KOperatorMatrix:
    """``K phi(a) = (1/(1-a)) int_0^{1-a} phi``; column k is the image of
    ``a^k`` in the monomial basis."""

    n_max: int
    exact: tuple[tuple[Fraction, ...], ...]

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.exact])

    def apply(self, coeffs: Sequence[float]) -> np.ndarray:
        return self.matrix @ np.asarray(coeffs, dtype=float)

    def eigenvalues(self) -> np.ndarray:
        """Numerical eigenvalues ordered by decreasing magnitude."""
        ev = np.linalg.eigvals(self.matrix).real
        return ev[np.argsort(-np.abs(ev))]

    def exact_eigenvalues(self) -> list[Fraction]:
        return [self.exact[k][k] for k in range(self.n_max + 1)]


def k_operator_matrix(n_max: int) -> KOperatorMatrix:
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    size = n_max + 1
    rows = [[Fraction(0)] * size for _ in range(size)]
    for k in range(size):
        # (1 - a)^k / (k + 1)
        for j in range(k + 1):
            rows[j][k] = Fraction((-1) ** j * math.comb(k, j), k + 1)
    return KOperatorMatrix(n_max, tuple(tuple(r) for r in rows))


def k_operator_quadrature(phi: Callable, a, rule: QuadratureRule | None = None):
    """Apply K to a pointwise function by Gauss quadrature."""
    rule = rule or interval_gauss_rule()
    a = np.asarray(a, dtype=float)
    width = (1.0 - a)[..., None]
    return phi(width * rule.nodes) @ rule.weights


def gap3_bound_from_mu(mu1, mu2):
    """Lower bound on the three-component gap from the extreme non-trivial
    eigenvalues of K."""
    if mu1 > mu2 or not (-1 <= mu1 <= 1 and -1 <= mu2 <= 1):
        raise DomainError("need -1 <= mu1 <= mu2 <= 1")
    third = Fraction(1, 3) if isinstance(mu1, (int, Fraction)) and isinstance(mu2, (int, Fraction)) else 1 / 3
    return third * min(2 + mu1, 2 - 2 * mu2)


# --- Monte Carlo ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Event chain: ``times[k]`` is the time of event k and ``values[k + 1]``
    the observable just after it (``values[0]`` is the initial value)."""

    initial: np.ndarray
    final: np.ndarray
    times: np.ndarray
    values: np.ndarray
    max_drift: float
    seed: int | None = None
    noops: int = 0

    @property
    def duration(self) -> float:
        return float(self.times[-1]) if len(self.times) else 0.0

    def on_grid(self, dt: float) -> np.ndarray:
        """Observable sampled at times 0, dt, 2dt, ... up to the last event."""
        grid = np.arange(0.0, self.duration, dt)
        idx = np.searchsorted(self.times, grid, side="right")
        return self.values[idx]


def _observable_power(spec: ModelSpec, power: int | None) -> int:
    if power is not None:
        return power
    return 4 if spec.variant is Variant.KAC_SPHERE else 2


def mc_trajectory(spec: ModelSpec, steps: int, seed: int = 0, power: int | None = None,
                  initial: np.ndarray | None = None, renormalize_every: int = 1000, chunk: int = 1 << 16) -> Trajectory:
    """Simulate ``steps`` collision events of the continuous-time process.

    Events arrive at total rate N/2; each picks an ordered pair (i, j)
    uniformly with replacement and does nothing when i == j.  The tracked
    observable is ``sum eta_i^power`` (default 4 on the sphere, 2 on the
    simplex).
    """
    v = spec.variant
    if v not in (Variant.KAC_SPHERE, Variant.FLAT_KAC):
        raise UnsupportedVariantError("Monte Carlo needs a Kac sphere or flat Kac model")
    if steps < 0:
        raise DomainError("steps must be non-negative")
    n, omega = spec.n, spec.omega
    power = _observable_power(spec, power)
    rng = np.random.default_rng(seed)
    sphere = v is Variant.KAC_SPHERE
    if initial is None:
        draw = random_sphere_points if sphere else random_simplex_points
        initial = draw(1, n, omega, seed=int(rng.integers(2**63)))[0]
    eta = [float(x) for x in initial]
    start = np.array(eta)
    times = np.empty(steps)
    values = np.empty(steps + 1)
    obs = sum(x**power for x in eta)
    values[0] = obs
    t = 0.0
    rate = n / 2.0
    max_drift = 0.0
    noops = 0
    two_pi = 2 * math.pi
    cos, sin = math.cos, math.sin
    done = 0
    while done < steps:
        size = min(chunk, steps - done)
        waits = rng.standard_exponential(size) / rate
        ii = rng.integers(0, n, size).tolist()
        jj = rng.integers(0, n, size).tolist()
        uu = rng.random(size).tolist()
        arrival = (t + np.cumsum(waits)).tolist()
        for k in range(size):
            i, j = ii[k], jj[k]
            if i == j:
                noops += 1
            else:
                a, b = eta[i], eta[j]
                old = a**power + b**power
                if sphere:
                    th = two_pi * uu[k]
                    c, s = cos(th), sin(th)
                    a, b = c * a + s * b, -s * a + c * b
                else:
                    tot = a + b
                    a = tot * uu[k]
                    b = tot - a
                eta[i], eta[j] = a, b
                obs += a**power + b**power - old
            step = done + k
            if (step + 1) % renormalize_every == 0:
                norm = sum(x * x for x in eta) if sphere else sum(eta)
                max_drift = max(max_drift, abs(norm - omega))
                scale = math.sqrt(omega / norm) if sphere else omega / norm
                eta = [x * scale for x in eta]
                obs = sum(x**power for x in eta)
            values[step + 1] = obs
        times[done : done + size] = arrival
        t = arrival[-1]
        done += size
    final = np.array(eta)
    norm = float(final @ final) if sphere else float(final.sum())
    max_drift = max(max_drift, abs(norm - omega))
    return Trajectory(start, final, times, values, max_drift, seed, noops)


def chain_seeds(master_seed: int, count: int) -> list[int]:
    """Per-chain seeds split deterministically from a master seed."""
    return [int(s.generate_state(1, dtype=np.uint64)[0]) for s in np.random.SeedSequence(master_seed).spawn(count)]


def _run_one(args):
    spec, steps, seed, power = args
    return mc_trajectory(spec, steps, seed=seed, power=power)


def run_chains(spec: ModelSpec, steps: int, chains: int, seed: int = 0, power: int | None = None, threads: int = 1) -> list[Trajectory]:
    jobs = [(spec, steps, s, power) for s in chain_seeds(seed, chains)]
    if threads > 1 and chains > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_run_one, jobs))
    return [_run_one(j) for j in jobs]


@dataclass
class RateEstimate:
    rate: float
    stderr: float
    batches: int
    lags: np.ndarray = field(repr=False)
    autocorrelation: np.ndarray = field(repr=False)
    batch_rates: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "stderr": self.stderr,
            "batches": self.batches,
            "lags": self.lags.tolist(),
            "autocorrelation": self.autocorrelation.tolist(),
        }


def autocorrelation(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Normalized autocorrelation at lags 0..max_lag (FFT, unbiased counts)."""
    x = np.asarray(x, dtype=float) - np.mean(x)
    n = len(x)
    var = float(x @ x) / n
    if var <= 1e-300 * max(1.0, float(np.max(np.abs(x)) if n else 0.0)):
        raise FitWindowError("observable has zero variance; autocorrelation undefined")
    size = 1 << int(math.ceil(math.log2(2 * n)))
    spec = np.fft.rfft(x, size)
    acov = np.fft.irfft(spec * np.conj(spec), size)[: max_lag + 1]
    acov /= n - np.arange(max_lag + 1)
    return acov / acov[0]


def relaxation_rate_estimate(series: Sequence[np.ndarray] | np.ndarray, dt: float, window: tuple[float, float] | None = None,
                             batches_per_series: int = 10, cutoff: float = 0.25) -> RateEstimate:
    """Exponential decay rate of the autocorrelation of a sampled observable.

    Each series (sampled every ``dt``) is cut into batches; on each batch
    ``log rho(tau)`` is fitted by least squares over the lag window.  The
    estimate is the batch mean and the error the batch-means standard error.
    Without an explicit window the fit runs from ``dt`` to the lag where the
    pooled autocorrelation first falls below ``cutoff``.
    """
    if isinstance(series, np.ndarray) and series.ndim == 1:
        series = [series]
    pieces = [p for s in series for p in np.array_split(np.asarray(s, dtype=float), batches_per_series)]
    if len(pieces) < 2:
        raise FitWindowError("need at least two batches for an error estimate")
    shortest = min(len(p) for p in pieces)
    if window is None:
        pooled = np.mean([autocorrelation(p, shortest // 4) for p in pieces], axis=0)
        below = np.nonzero(pooled < cutoff)[0]
        if len(below) == 0 or below[0] < 3:
            raise FitWindowError("autocorrelation does not decay inside the batch length")
        lo, hi = 1, int(below[0])
    else:
        lo, hi = max(1, int(round(window[0] / dt))), int(round(window[1] / dt))
    if hi <= lo or hi >= shortest:
        raise FitWindowError(f"invalid lag window [{lo}, {hi}] for batches of length {shortest}")
    lags = np.arange(lo, hi + 1)
    rates, curves = [], []
    for p in pieces:
        rho = autocorrelation(p, hi)[lo:]
        if np.any(rho <= 0):
            raise FitWindowError("non-positive autocorrelation inside the fit window")
        slope, _ = np.polyfit(lags * dt, np.log(rho), 1)
        rates.append(-slope)
        curves.append(rho)
    rates = np.array(rates)
    stderr = float(np.std(rates, ddof=1) / math.sqrt(len(rates)))
    return RateEstimate(float(rates.mean()), stderr, len(rates), lags * dt, np.mean(curves, axis=0), rates)
