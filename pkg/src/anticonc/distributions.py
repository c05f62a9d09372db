"""Finite discrete distributions and the tail functionals that drive the bounds.

Everything here is a finitely supported measure on R^d.  The module covers
construction and (de)serialization, two-fold symmetrization, the tail mass
p(delta), the truncated second moment, the floor-smoothed tail functional,
characteristic functions, and compound Poisson laws e(alpha * W) together with
a deterministic sampler.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from ._common import (
    DEDUP_TOL,
    as_points,
    as_vector,
    dedupe_points,
    make_rng,
    mirror_pair_symmetrize,
)
from .errors import DomainError, InputError

WEIGHT_SUM_TOL = 1e-12

# Means above this are split into equal sub-Poisson chunks; below it the CDF of
# the Poisson law starts at exp(-mean) > 9e-14, safely inside double range.
_INVERSION_MAX_MEAN = 30.0


@dataclass(frozen=True)
class RngSeed:
    """A 64-bit seed value; the only admissible source of randomness."""

    seed: int

    def __post_init__(self):
        if not isinstance(self.seed, int) or not (0 <= self.seed < 2**64):
            raise DomainError("seed must be an integer in [0, 2^64)")


def as_seed_int(seed) -> int:
    if isinstance(seed, RngSeed):
        return seed.seed
    return RngSeed(int(seed)).seed


class DiscreteDistribution:
    """Finitely supported measure on R^d.

    ``normalized=True`` marks a probability distribution (weights sum to one
    within 1e-12); ``normalized=False`` marks a plain nonnegative measure whose
    total mass stands as given.  Atoms closer than 1e-12 in max norm are merged
    at construction and their weights added.
    """

    __slots__ = ("_atoms", "_weights", "_normalized")

    def __init__(self, atoms, weights, normalized: bool = True):
        pts = as_points(atoms)
        w = np.asarray(weights, dtype=float).reshape(-1)
        if pts.shape[0] != w.shape[0]:
            raise DomainError(
                f"{pts.shape[0]} atoms but {w.shape[0]} weights"
            )
        if pts.shape[0] == 0:
            raise DomainError("a distribution needs at least one atom")
        if not np.all(np.isfinite(pts)):
            raise DomainError("atoms must be finite")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise DomainError("weights must be finite and nonnegative")
        pts, w = dedupe_points(pts, w, DEDUP_TOL)
        if normalized and abs(float(w.sum()) - 1.0) > WEIGHT_SUM_TOL:
            raise DomainError(
                f"weights sum to {float(w.sum())!r}; "
                "pass normalized=False for a plain measure"
            )
        pts.flags.writeable = False
        w.flags.writeable = False
        self._atoms = pts
        self._weights = w
        self._normalized = bool(normalized)

    @property
    def atoms(self) -> np.ndarray:
        return self._atoms

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def normalized(self) -> bool:
        return self._normalized

    @property
    def dim(self) -> int:
        return self._atoms.shape[1]

    @property
    def n_atoms(self) -> int:
        return self._atoms.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self._weights.sum())

    def support_radius(self) -> float:
        """Largest max-norm of any atom."""
        return float(np.max(np.abs(self._atoms)))

    def is_symmetric(self, tol: float = 0.0) -> bool:
        """Whether the measure is invariant under z -> -z within ``tol``."""
        order = np.lexsort(self._atoms.T[::-1])
        p = self._atoms[order]
        w = self._weights[order]
        return bool(
            np.all(np.abs(p + p[::-1]) <= tol)
            and np.all(np.abs(w - w[::-1]) <= tol)
        )

    def char_fn(self, t) -> complex:
        """Characteristic function sum_z w(z) exp(i <t, z>) at one point."""
        v = as_vector(t, self.dim)
        return complex(np.sum(self._weights * np.exp(1j * (self._atoms @ v))))

    def char_fn_grid(self, ts) -> np.ndarray:
        """Vectorized characteristic function on a (m, d) grid of points."""
        grid = as_points(ts, self.dim)
        phases = grid @ self._atoms.T
        return np.exp(1j * phases) @ self._weights.astype(complex)

    def marginal(self, j: int) -> "DiscreteDistribution":
        """Pushforward under the j-th coordinate projection."""
        if not (0 <= j < self.dim):
            raise DomainError(f"coordinate {j} out of range for R^{self.dim}")
        return DiscreteDistribution(
            self._atoms[:, j], self._weights, normalized=self._normalized
        )

    def negated(self) -> "DiscreteDistribution":
        return DiscreteDistribution(
            -self._atoms, self._weights, normalized=self._normalized
        )

    def to_json_obj(self) -> dict:
        return {
            "atoms": self._atoms.tolist(),
            "weights": self._weights.tolist(),
            "normalized": self._normalized,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "DiscreteDistribution":
        if not isinstance(obj, dict):
            raise InputError("distribution: expected an object")
        for key in ("atoms", "weights"):
            if key not in obj:
                raise InputError(f"distribution: missing field '{key}'")
        try:
            return cls(
                obj["atoms"], obj["weights"], bool(obj.get("normalized", True))
            )
        except DomainError as exc:
            raise InputError(f"distribution: {exc}") from exc

    @classmethod
    def from_shorthand(cls, name: str) -> "DiscreteDistribution":
        """Parse a named shorthand: rademacher, uniform{...}, bernoulli(p)."""
        s = name.strip()
        if s == "rademacher":
            return cls.rademacher()
        m = re.fullmatch(r"uniform\{([^{}]*)\}", s)
        if m:
            try:
                vals = [float(v) for v in m.group(1).split(",")]
            except ValueError as exc:
                raise InputError(f"distribution: bad uniform atom list in {s!r}") from exc
            if not vals:
                raise InputError("distribution: uniform{} needs atoms")
            return cls(vals, [1.0 / len(vals)] * len(vals))
        m = re.fullmatch(r"bernoulli\(([^()]*)\)", s)
        if m:
            try:
                p = float(m.group(1))
            except ValueError as exc:
                raise InputError(f"distribution: bad bernoulli parameter in {s!r}") from exc
            if not 0.0 <= p <= 1.0:
                raise InputError("distribution: bernoulli parameter must lie in [0, 1]")
            return cls([0.0, 1.0], [1.0 - p, p])
        raise InputError(f"distribution: unknown shorthand {s!r}")

    @classmethod
    def from_spec(cls, obj) -> "DiscreteDistribution":
        """Loader accepting either a shorthand string or a JSON object."""
        if isinstance(obj, str):
            return cls.from_shorthand(obj)
        return cls.from_json_obj(obj)

    @classmethod
    def point_mass(cls, y, dim: int | None = None) -> "DiscreteDistribution":
        pt = np.asarray(y, dtype=float).reshape(1, -1)
        if dim is not None and pt.shape[1] != dim:
            raise DomainError(f"point mass expected in R^{dim}")
        return cls(pt, [1.0])

    @classmethod
    def rademacher(cls) -> "DiscreteDistribution":
        return cls([-1.0, 1.0], [0.5, 0.5])

    def __repr__(self):
        kind = "distribution" if self._normalized else "measure"
        return (
            f"DiscreteDistribution({self.n_atoms} atoms in R^{self.dim}, "
            f"{kind}, mass={self.total_mass:.6g})"
        )


def symmetrize(f: DiscreteDistribution) -> DiscreteDistribution:
    """Law of X1 - X2 for X1, X2 independent with law ``f``.

    The returned support is exactly negation-invariant: after merging, atoms
    are paired with their mirrors and averaged, so z and -z carry identical
    weights bit for bit.
    """
    if not f.normalized:
        raise DomainError("symmetrize needs a probability distribution")
    x = f.atoms
    w = f.weights
    diffs = (x[:, None, :] - x[None, :, :]).reshape(-1, f.dim)
    ww = np.multiply.outer(w, w).reshape(-1)
    pts, mw = dedupe_points(diffs, ww, DEDUP_TOL)
    pts, mw = mirror_pair_symmetrize(pts, mw)
    return DiscreteDistribution(pts, mw)


def tail_mass(g: DiscreteDistribution, delta: float) -> float:
    """Mass of {z : |z| > delta} in max norm; the tail functional p(delta)."""
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    zn = np.max(np.abs(g.atoms), axis=1)
    # Correctly rounded sum: the orderings against lambda_d and the
    # truncated second moment then hold in floating point, not just in
    # exact arithmetic, because their tail terms coincide exactly.
    return math.fsum(g.weights[zn > delta])


def truncated_second_moment(g: DiscreteDistribution, tau: float) -> float:
    """Expectation of min(z^2 / tau^2, 1) under a one-dimensional measure."""
    if tau <= 0:
        raise DomainError("tau must be positive")
    if g.dim != 1:
        raise DomainError("truncated second moment is defined on the line")
    z = g.atoms[:, 0]
    return math.fsum(g.weights * np.minimum(z * z / (tau * tau), 1.0))


def lambda_d(g: DiscreteDistribution, ratio: float, d: int = 1) -> float:
    """Floor-smoothed tail functional sum_z w(z) (1 + floor(ratio/|z|))^-d.

    The atom at the origin contributes zero.  Nonincreasing in both ``ratio``
    and ``d``; always at least the plain tail mass at ``delta = ratio``.
    """
    if ratio <= 0:
        raise DomainError("ratio must be positive")
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise DomainError("d must be a positive integer")
    zn = np.max(np.abs(g.atoms), axis=1)
    nz = zn > 0.0
    if not nz.any():
        return 0.0
    terms = (1.0 + np.floor(ratio / zn[nz])) ** (-float(d))
    return math.fsum(g.weights[nz] * terms)


def char_fn(f: DiscreteDistribution, t) -> complex:
    return f.char_fn(t)


class CompoundPoisson:
    """Law with characteristic function exp(intensity * (base_char(t) - 1)).

    ``base`` must be a probability distribution.  Raising to a power
    multiplies the intensity: ``cp.power(lam)`` is the law whose characteristic
    function is the lam-th power of ``cp``'s.
    """

    __slots__ = ("_intensity", "_base")

    def __init__(self, intensity: float, base: DiscreteDistribution):
        intensity = float(intensity)
        if not math.isfinite(intensity) or intensity < 0:
            raise DomainError("intensity must be finite and nonnegative")
        if not base.normalized:
            raise DomainError("compound Poisson base must be a probability distribution")
        self._intensity = intensity
        self._base = base

    @property
    def intensity(self) -> float:
        return self._intensity

    @property
    def base(self) -> DiscreteDistribution:
        return self._base

    @property
    def dim(self) -> int:
        return self._base.dim

    def power(self, lam: float) -> "CompoundPoisson":
        lam = float(lam)
        if not math.isfinite(lam) or lam < 0:
            raise DomainError("power must be finite and nonnegative")
        return CompoundPoisson(self._intensity * lam, self._base)

    def char_fn(self, t) -> complex:
        return complex(np.exp(self._intensity * (self._base.char_fn(t) - 1.0)))

    def char_fn_grid(self, ts) -> np.ndarray:
        return np.exp(self._intensity * (self._base.char_fn_grid(ts) - 1.0))

    def __repr__(self):
        return f"CompoundPoisson(intensity={self._intensity:.6g}, base={self._base!r})"


def cp_char_fn(d: CompoundPoisson, t) -> complex:
    return d.char_fn(t)


def _poisson_inversion(rng: np.random.Generator, lam: float, size: int) -> np.ndarray:
    """Poisson draws via CDF inversion: N = min{k : U <= CDF(k)}.

    One uniform per draw; monotone in the uniform and in ``lam``, which makes
    shared-seed couplings across intensities meaningful.
    """
    u = rng.random(size)
    if size == 0:
        return np.zeros(0, dtype=np.int64)
    umax = float(u.max())
    term = math.exp(-lam)
    total = term
    cdf = [total]
    k = 0
    while total <= umax and term > 0.0 and k < 4000:
        k += 1
        term *= lam / k
        total += term
        cdf.append(total)
    return np.searchsorted(np.asarray(cdf), u, side="left").astype(np.int64)


def _poisson_counts(rng: np.random.Generator, lam: float, size: int) -> np.ndarray:
    """Poisson(lam) draws, splitting large means into <= 30 chunks.

    Splitting keeps every chunk in the plain-inversion regime, so the sampler
    stays exact and bit-reproducible without any normal approximation.
    """
    if lam < 0 or not math.isfinite(lam):
        raise DomainError("Poisson mean must be finite and nonnegative")
    counts = np.zeros(size, dtype=np.int64)
    if lam == 0.0:
        return counts
    chunks = max(1, int(math.ceil(lam / _INVERSION_MAX_MEAN)))
    per = lam / chunks
    for _ in range(chunks):
        counts += _poisson_inversion(rng, per, size)
    return counts


def cp_sample_rng(
    d: CompoundPoisson, n_samples: int, rng: np.random.Generator
) -> np.ndarray:
    """Sample using an existing generator; see ``cp_sample``."""
    if n_samples < 1:
        raise DomainError("n_samples must be positive")
    counts = _poisson_counts(rng, d.intensity, n_samples)
    out = np.zeros((n_samples, d.dim))
    total = int(counts.sum())
    if total == 0:
        return out
    cum = np.cumsum(d.base.weights)
    cum[-1] = max(cum[-1], 1.0)  # guard float shortfall at the top
    idx = np.searchsorted(cum, rng.random(total), side="right")
    idx = np.minimum(idx, d.base.n_atoms - 1)
    contrib = d.base.atoms[idx]
    sample_ids = np.repeat(np.arange(n_samples), counts)
    for j in range(d.dim):
        out[:, j] = np.bincount(
            sample_ids, weights=contrib[:, j], minlength=n_samples
        )
    return out


def cp_sample(d: CompoundPoisson, n_samples: int, seed) -> np.ndarray:
    """Draw ``n_samples`` i.i.d. points: a Poisson count of base-atom summands.

    Deterministic for a fixed seed; counts come from sequential CDF inversion
    (split into sub-chunks for means above 30), atoms from inverse-CDF lookups.
    """
    return cp_sample_rng(d, n_samples, make_rng(as_seed_int(seed)))


def spectral_measure(a) -> DiscreteDistribution:
    """Symmetrized empirical measure of the rows: mean of (E_{a_k} + E_{-a_k})/2.

    Accepts a WeightVector or a raw row array.  Duplicated rows merge and the
    result is an exactly symmetric probability distribution.
    """
    rows = as_points(getattr(a, "rows", a))
    n = rows.shape[0]
    if n == 0:
        raise DomainError("empty weight vector")
    pts = np.vstack([rows, -rows])
    w = np.full(2 * n, 1.0 / (2 * n))
    pts, w = dedupe_points(pts, w, DEDUP_TOL)
    pts, w = mirror_pair_symmetrize(pts, w)
    return DiscreteDistribution(pts, w)


def half_empirical_measure(a) -> DiscreteDistribution:
    """Unnormalized measure putting mass 1/(2n) on each row (total mass 1/2)."""
    rows = as_points(getattr(a, "rows", a))
    n = rows.shape[0]
    if n == 0:
        raise DomainError("empty weight vector")
    return DiscreteDistribution(
        rows, np.full(n, 1.0 / (2 * n)), normalized=False
    )


__all__ = [
    "CompoundPoisson",
    "DiscreteDistribution",
    "RngSeed",
    "as_seed_int",
    "char_fn",
    "cp_char_fn",
    "cp_sample",
    "cp_sample_rng",
    "half_empirical_measure",
    "lambda_d",
    "spectral_measure",
    "symmetrize",
    "tail_mass",
    "truncated_second_moment",
]
