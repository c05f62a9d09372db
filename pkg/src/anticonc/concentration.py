"""Concentration functions Q(F, tau) = sup_x F{x + tau*B}, B the ball of radius 1/2.

On the line the window is a closed interval of length tau; in higher dimension
a closed Euclidean ball of radius tau/2.  Three routes are provided: exact
computation for finitely supported laws (sequential convolution plus a sweep
over a complete candidate-center family), seeded Monte Carlo, and the
Esseen-type upper bound c * tau^d * integral of |char fn| over the dual ball.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ._common import (
    CONVOLUTION_MERGE_TOL,
    GEOM_TOL,
    WINDOW_TOL,
    as_points,
    dedupe_points,
    make_rng,
)
from .distributions import (
    CompoundPoisson,
    DiscreteDistribution,
    as_seed_int,
    cp_sample_rng,
)
from .errors import CapacityError, DomainError, NumericsError

DEFAULT_EXACT_BUDGET = 20_000_000
# Cap on candidate pairs in the multidimensional exact sweep.
DEFAULT_PAIR_BUDGET = 5_000_000
_MC_MIN_SAMPLES = 1000
_MC_CHUNK = 65536


class WeightVector:
    """Coefficient rows a_1, ..., a_n in R^d; at least one row must be nonzero."""

    __slots__ = ("_rows",)

    def __init__(self, rows):
        r = as_points(rows)
        if r.shape[0] == 0:
            raise DomainError("weight vector needs at least one row")
        if not np.all(np.isfinite(r)):
            raise DomainError("weight vector entries must be finite")
        if not np.any(r):
            raise DomainError("weight vector must have a nonzero row")
        r.flags.writeable = False
        self._rows = r

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    @property
    def n(self) -> int:
        return self._rows.shape[0]

    @property
    def dim(self) -> int:
        return self._rows.shape[1]

    def norm(self) -> float:
        """Frobenius norm: sqrt(sum_k |a_k|^2)."""
        return float(np.linalg.norm(self._rows))

    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self._rows, 2))

    def gram(self):
        """Gram matrix sum_k a_k a_k^T and its determinant (clamped at 0)."""
        mat = self._rows.T @ self._rows
        det = float(np.linalg.det(mat))
        if det < 0.0:
            # the matrix is positive semidefinite; a negative det is roundoff
            det = 0.0
        return mat, det

    def coordinate(self, j: int) -> "WeightVector":
        """The j-th coordinate column as a one-dimensional weight vector."""
        if not (0 <= j < self.dim):
            raise DomainError(f"coordinate {j} out of range for R^{self.dim}")
        return WeightVector(self._rows[:, j])

    def to_json_obj(self) -> list:
        if self.dim == 1:
            return self._rows[:, 0].tolist()
        return self._rows.tolist()

    @classmethod
    def from_json_obj(cls, obj) -> "WeightVector":
        return cls(obj)

    def __repr__(self):
        return f"WeightVector(n={self.n}, dim={self.dim})"


_METHODS = ("exact", "monte_carlo", "esseen_upper")


@dataclass(frozen=True)
class ConcentrationEstimate:
    """A concentration value at radius ``tau`` with its provenance.

    ``exact`` and ``monte_carlo`` values are probabilities in [0, 1];
    ``esseen_upper`` is a bound shape and may exceed 1 (vacuous bound).
    """

    value: float
    method: str
    stderr: float
    tau: float

    def __post_init__(self):
        if self.method not in _METHODS:
            raise DomainError(f"method must be one of {_METHODS}")
        if not math.isfinite(self.value) or self.value < 0:
            raise DomainError("value must be finite and nonnegative")
        if self.stderr < 0:
            raise DomainError("stderr must be nonnegative")
        if self.tau < 0:
            raise DomainError("tau must be nonnegative")
        if self.method in ("exact", "monte_carlo"):
            if self.value > 1.0 + 1e-9:
                raise DomainError("probability estimate exceeds 1")
            object.__setattr__(self, "value", min(self.value, 1.0))

    def to_json_obj(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "stderr": self.stderr,
            "tau": self.tau,
        }


def weighted_sum_distribution(
    x: DiscreteDistribution, a: WeightVector, budget: int = DEFAULT_EXACT_BUDGET
) -> DiscreteDistribution:
    """Exact law of sum_k X_k a_k by sequential convolution with atom merging.

    Atoms closer than 1e-9 in max norm merge after every step.  Raises
    CapacityError when an intermediate support would exceed ``budget``.
    """
    if x.dim != 1:
        raise DomainError("summand distribution must live on the line")
    if not x.normalized:
        raise DomainError("summand must be a probability distribution")
    xv = x.atoms[:, 0]
    xw = x.weights
    pts = np.zeros((1, a.dim))
    w = np.ones(1)
    for k in range(a.n):
        if pts.shape[0] * xv.size > budget:
            raise CapacityError(
                f"convolution support would exceed budget {budget} at step {k}"
            )
        shift = np.multiply.outer(xv, a.rows[k])  # (s, d)
        pts = (shift[:, None, :] + pts[None, :, :]).reshape(-1, a.dim)
        w = (xw[:, None] * w[None, :]).reshape(-1)
        pts, w = dedupe_points(pts, w, CONVOLUTION_MERGE_TOL)
    return DiscreteDistribution(pts, w)


def _max_window_mass_1d(z: np.ndarray, w: np.ndarray, tau: float) -> float:
    """Largest mass of a closed length-``tau`` window, left edge at an atom."""
    order = np.argsort(z, kind="stable")
    zs = z[order]
    ws = w[order]
    cw = np.concatenate([[0.0], np.cumsum(ws)])
    hi = np.searchsorted(
        zs, zs + tau + WINDOW_TOL * np.maximum(1.0, np.abs(zs)), side="right"
    )
    best = float(np.max(cw[hi] - cw[: len(zs)]))
    return min(best, float(cw[-1]))


def _ball_masses(pts, w, centers, radius, tol):
    """Weighted point counts of closed balls around each candidate center."""
    best = 0.0
    limit = (radius + tol) ** 2
    step = max(1, int(4_000_000 // max(len(pts), 1)))
    for i in range(0, len(centers), step):
        c = centers[i : i + step]
        d2 = ((c[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        masses = (d2 <= limit) @ w
        m = float(masses.max())
        if m > best:
            best = m
    return best


def _max_ball_mass_2d(pts, w, rho, pair_budget):
    """Exact planar sweep: any optimal closed disk can be rotated about the
    pair of support points it pins down, so disks through two atoms at the
    fixed radius (plus single-atom disks) form a complete candidate family."""
    k = len(pts)
    scale = max(1.0, float(np.max(np.abs(pts))), rho)
    tol = GEOM_TOL * scale
    if k * (k - 1) // 2 > pair_budget:
        raise CapacityError(
            f"candidate pairs exceed budget {pair_budget} (support {k})"
        )
    cand = [pts]
    if k >= 2 and rho > 0:
        ii, jj = np.triu_indices(k, 1)
        diff = pts[jj] - pts[ii]
        d2 = (diff**2).sum(axis=1)
        near = d2 <= (2 * rho + 2 * tol) ** 2
        if near.any():
            ii, jj, diff, d2 = ii[near], jj[near], diff[near], d2[near]
            dist = np.sqrt(d2)
            mid = (pts[ii] + pts[jj]) / 2.0
            half = np.sqrt(np.maximum(rho * rho - d2 / 4.0, 0.0))
            unit = diff / dist[:, None]
            perp = np.stack([-unit[:, 1], unit[:, 0]], axis=1)
            cand.append(mid + half[:, None] * perp)
            cand.append(mid - half[:, None] * perp)
    centers = np.vstack(cand)
    return _ball_masses(pts, w, centers, rho, tol)


def _circumcenter(q: np.ndarray) -> np.ndarray:
    """Equidistant point of minimal radius in the affine hull of ``q``."""
    if q.shape[0] == 1:
        return q[0]
    rel = q[1:] - q[0]
    rhs = 0.5 * (rel**2).sum(axis=1)
    y, *_ = np.linalg.lstsq(rel, rhs, rcond=None)
    return q[0] + y


def _minimal_enclosing_center(q: np.ndarray):
    """Center and radius of the smallest ball enclosing up to d+2 points."""
    best_c = q[0]
    best_r = math.inf
    idx = range(q.shape[0])
    for size in range(1, q.shape[0] + 1):
        for sub in itertools.combinations(idx, size):
            c = _circumcenter(q[list(sub)])
            r = float(np.sqrt(((q - c) ** 2).sum(axis=1).max()))
            if r < best_r:
                best_r = r
                best_c = c
    return best_c, best_r


def _max_ball_mass_meb(pts, w, rho, budget):
    """d >= 3 sweep: the optimal ball is pinned by at most d+1 support points,
    so centers of minimal enclosing balls of small subsets are complete."""
    k, d = pts.shape
    scale = max(1.0, float(np.max(np.abs(pts))), rho)
    tol = GEOM_TOL * scale
    n_subsets = sum(math.comb(k, j) for j in range(1, min(d + 1, k) + 1))
    if n_subsets > budget:
        raise CapacityError(
            f"subset enumeration {n_subsets} exceeds budget {budget}"
        )
    # pre-filter: subsets with a pair further apart than the diameter are void
    far = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2) > (
        2 * rho + 2 * tol
    ) ** 2
    centers = [pts]
    for size in range(2, min(d + 1, k) + 1):
        for sub in itertools.combinations(range(k), size):
            s = list(sub)
            if far[np.ix_(s, s)].any():
                continue
            c, r = _minimal_enclosing_center(pts[s])
            if r <= rho + tol:
                centers.append(c.reshape(1, -1))
    return _ball_masses(pts, w, np.vstack(centers), rho, tol)


def exact_q_of_distribution(
    f: DiscreteDistribution, tau: float, budget: int = DEFAULT_EXACT_BUDGET
) -> float:
    """Exact Q(F, tau) for a finitely supported probability distribution."""
    if tau < 0:
        raise DomainError("tau must be nonnegative")
    if not f.normalized:
        raise DomainError("Q is defined for probability distributions")
    if f.dim == 1:
        return min(_max_window_mass_1d(f.atoms[:, 0], f.weights, tau), 1.0)
    rho = tau / 2.0
    if f.dim == 2:
        value = _max_ball_mass_2d(
            f.atoms, f.weights, rho, min(budget, DEFAULT_PAIR_BUDGET)
        )
    else:
        value = _max_ball_mass_meb(
            f.atoms, f.weights, rho, min(budget, DEFAULT_PAIR_BUDGET)
        )
    return min(value, 1.0)


def exact_q_1d(
    x: DiscreteDistribution,
    a: WeightVector,
    tau: float,
    budget: int = DEFAULT_EXACT_BUDGET,
) -> ConcentrationEstimate:
    """Exact concentration of the weighted sum on the line."""
    if a.dim != 1:
        raise DomainError("exact_q_1d needs one-dimensional weights")
    dist = weighted_sum_distribution(x, a, budget)
    value = exact_q_of_distribution(dist, tau, budget)
    return ConcentrationEstimate(value, "exact", 0.0, tau)


def exact_q_multid(
    x: DiscreteDistribution,
    a: WeightVector,
    tau: float,
    budget: int = DEFAULT_EXACT_BUDGET,
) -> ConcentrationEstimate:
    """Exact concentration of the weighted sum in dimension >= 2."""
    if a.dim < 2:
        raise DomainError("exact_q_multid needs dimension >= 2")
    dist = weighted_sum_distribution(x, a, budget)
    value = exact_q_of_distribution(dist, tau, budget)
    return ConcentrationEstimate(value, "exact", 0.0, tau)


@dataclass(frozen=True)
class WeightedSum:
    """Sampler for sum_k X_k a_k with i.i.d. scalar X_k."""

    x: DiscreteDistribution
    a: WeightVector

    def __post_init__(self):
        if self.x.dim != 1:
            raise DomainError("summand distribution must live on the line")
        if not self.x.normalized:
            raise DomainError("summand must be a probability distribution")

    @property
    def dim(self) -> int:
        return self.a.dim

    def sample(self, n_samples: int, rng: np.random.Generator) -> np.ndarray:
        cum = np.cumsum(self.x.weights)
        cum[-1] = max(cum[-1], 1.0)
        xv = self.x.atoms[:, 0]
        out = np.empty((n_samples, self.a.dim))
        for i in range(0, n_samples, _MC_CHUNK):
            m = min(_MC_CHUNK, n_samples - i)
            u = rng.random((m, self.a.n))
            idx = np.searchsorted(cum, u, side="right")
            idx = np.minimum(idx, self.x.n_atoms - 1)
            out[i : i + m] = xv[idx] @ self.a.rows
        return out


def _sample_from(sampler, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(sampler, CompoundPoisson):
        return cp_sample_rng(sampler, n_samples, rng)
    if isinstance(sampler, WeightedSum):
        return sampler.sample(n_samples, rng)
    raise DomainError("sampler must be a WeightedSum or a CompoundPoisson")


def mc_q(
    sampler, tau: float, n_samples: int, seed
) -> ConcentrationEstimate:
    """Monte Carlo estimate of Q(F, tau) from ``n_samples`` seeded draws.

    On the line the sweep over sample-anchored windows is exact for the
    empirical measure.  In dimension >= 2 candidate centers are the samples
    plus pairwise midpoints of a seeded subsample, which makes the estimate a
    documented lower-bound heuristic for the empirical optimum.
    """
    if tau < 0:
        raise DomainError("tau must be nonnegative")
    if n_samples < _MC_MIN_SAMPLES:
        raise DomainError(f"Monte Carlo needs at least {_MC_MIN_SAMPLES} samples")
    rng = make_rng(as_seed_int(seed))
    samples = _sample_from(sampler, n_samples, rng)
    if samples.shape[1] == 1:
        z = samples[:, 0]
        zs = np.sort(z)
        hi = np.searchsorted(
            zs, zs + tau + WINDOW_TOL * np.maximum(1.0, np.abs(zs)), side="right"
        )
        count = int(np.max(hi - np.arange(len(zs))))
    else:
        rho = tau / 2.0
        scale = max(1.0, float(np.max(np.abs(samples))), rho)
        tree = cKDTree(samples)
        counts = tree.query_ball_point(
            samples, rho + GEOM_TOL * scale, return_length=True
        )
        count = int(np.max(counts))
        sub_n = min(n_samples, 256)
        sub_idx = rng.choice(n_samples, size=sub_n, replace=False)
        sub = samples[sub_idx]
        ii, jj = np.triu_indices(sub_n, 1)
        d2 = ((sub[ii] - sub[jj]) ** 2).sum(axis=1)
        near = d2 <= (2 * rho) ** 2
        if near.any():
            mids = (sub[ii[near]] + sub[jj[near]]) / 2.0
            counts = tree.query_ball_point(
                mids, rho + GEOM_TOL * scale, return_length=True
            )
            count = max(count, int(np.max(counts)))
    value = count / n_samples
    stderr = math.sqrt(max(value * (1.0 - value), 0.0) / n_samples)
    return ConcentrationEstimate(value, "monte_carlo", stderr, tau)


def _adaptive_simpson_abs(
    f,
    a: float,
    b: float,
    rel_tol: float,
    max_passes: int = 40,
    max_intervals: int = 400_000,
) -> float:
    """Adaptive composite Simpson rule for |f| with Richardson acceptance.

    ``f`` must map a float array to a complex (or float) array.  Intervals are
    accepted when the two-level Simpson discrepancy is below a share of the
    running total proportional to interval width; accepted intervals get the
    standard (S2 - S1)/15 correction.
    """
    n0 = 16
    edges = np.linspace(a, b, n0 + 1)
    lo = edges[:-1].copy()
    hi = edges[1:].copy()
    flo = np.abs(f(lo))
    fhi = np.abs(f(hi))
    fmid = np.abs(f((lo + hi) / 2.0))
    total = 0.0
    span = b - a
    for _ in range(max_passes):
        h = hi - lo
        mid = (lo + hi) / 2.0
        s1 = h / 6.0 * (flo + 4.0 * fmid + fhi)
        q1 = (lo + mid) / 2.0
        q2 = (mid + hi) / 2.0
        fq1 = np.abs(f(q1))
        fq2 = np.abs(f(q2))
        sl = h / 12.0 * (flo + 4.0 * fq1 + fmid)
        sr = h / 12.0 * (fmid + 4.0 * fq2 + fhi)
        s2 = sl + sr
        err = np.abs(s2 - s1)
        scale = max(abs(total + float(s2.sum())), 1e-300)
        ok = err <= 15.0 * rel_tol * scale * (h / span)
        total += float((s2[ok] + (s2[ok] - s1[ok]) / 15.0).sum())
        if bool(ok.all()):
            return total
        keep = ~ok
        if 2 * int(keep.sum()) > max_intervals:
            raise NumericsError("adaptive Simpson exceeded its interval budget")
        lo_k, hi_k, mid_k = lo[keep], hi[keep], mid[keep]
        lo = np.concatenate([lo_k, mid_k])
        hi = np.concatenate([mid_k, hi_k])
        flo = np.concatenate([flo[keep], fmid[keep]])
        fhi = np.concatenate([fmid[keep], fhi[keep]])
        fmid = np.concatenate([fq1[keep], fq2[keep]])
    raise NumericsError("adaptive Simpson did not converge")


def _polar_integral_2d(f, radius: float, rel_tol: float) -> float:
    """Integral of |f| over the disk via Gauss-Legendre in r, trapezoid in angle."""
    prev = None
    m = 16
    while m <= 1024:
        nodes, wts = np.polynomial.legendre.leggauss(m)
        r = (nodes + 1.0) * (radius / 2.0)
        rw = wts * (radius / 2.0)
        n_th = 2 * m
        th = 2.0 * np.pi * np.arange(n_th) / n_th
        w_th = 2.0 * np.pi / n_th
        ct, st = np.cos(th), np.sin(th)
        ts = np.empty((m * n_th, 2))
        ts[:, 0] = np.repeat(r, n_th) * np.tile(ct, m)
        ts[:, 1] = np.repeat(r, n_th) * np.tile(st, m)
        vals = np.abs(f(ts)).reshape(m, n_th)
        integral = float(np.sum(rw * r * vals.sum(axis=1) * w_th))
        if prev is not None and abs(integral - prev) <= rel_tol * max(
            abs(integral), 1e-300
        ):
            return integral
        prev = integral
        m *= 2
    raise NumericsError("planar quadrature did not converge")


def _spherical_integral_3d(f, radius: float, rel_tol: float) -> float:
    """Integral of |f| over the 3-ball in spherical coordinates."""
    prev = None
    m = 8
    while m <= 128:
        nodes, wts = np.polynomial.legendre.leggauss(m)
        r = (nodes + 1.0) * (radius / 2.0)
        rw = wts * (radius / 2.0)
        phi = (nodes + 1.0) * (np.pi / 2.0)
        pw = wts * (np.pi / 2.0)
        n_th = 2 * m
        th = 2.0 * np.pi * np.arange(n_th) / n_th
        w_th = 2.0 * np.pi / n_th
        sp, cp_ = np.sin(phi), np.cos(phi)
        ct, st = np.cos(th), np.sin(th)
        # grid (r_i, phi_j, theta_l)
        rr = r[:, None, None]
        xs = rr * sp[None, :, None] * ct[None, None, :]
        ys = rr * sp[None, :, None] * st[None, None, :]
        zs = np.broadcast_to(rr * cp_[None, :, None], xs.shape)
        ts = np.stack(
            [xs.reshape(-1), ys.reshape(-1), zs.reshape(-1)], axis=1
        )
        vals = np.abs(f(ts)).reshape(m, m, n_th)
        inner = vals.sum(axis=2) * w_th  # over theta
        mid = inner @ (pw * sp)  # over phi with jacobian sin(phi)
        integral = float(np.sum(rw * r * r * mid))
        if prev is not None and abs(integral - prev) <= rel_tol * max(
            abs(integral), 1e-300
        ):
            return integral
        prev = integral
        m *= 2
    raise NumericsError("spherical quadrature did not converge")


def esseen_upper_q(
    f_hat,
    tau: float,
    dim: int,
    c_esseen: float = 1.0,
    rel_tol: float | None = None,
) -> ConcentrationEstimate:
    """Bound shape c * tau^d * integral_{|t| <= 1/tau} |f_hat(t)| dt.

    ``f_hat`` must be vectorized: for dim 1 it maps a float array to complex
    values, otherwise a (m, dim) array.  A genuine upper bound for Q(F, tau)
    only once ``c_esseen`` dominates the dimension constant of the underlying
    smoothing inequality; the default 1.0 is audited empirically elsewhere.
    The value may exceed 1, in which case the bound is vacuous.
    """
    if tau <= 0:
        raise DomainError("tau must be positive for the dual-ball integral")
    if c_esseen <= 0:
        raise DomainError("c_esseen must be positive")
    radius = 1.0 / tau
    if dim == 1:
        integral = _adaptive_simpson_abs(
            f_hat, -radius, radius, rel_tol if rel_tol is not None else 1e-8
        )
    elif dim == 2:
        integral = _polar_integral_2d(
            f_hat, radius, rel_tol if rel_tol is not None else 1e-5
        )
    elif dim == 3:
        integral = _spherical_integral_3d(
            f_hat, radius, rel_tol if rel_tol is not None else 1e-5
        )
    else:
        raise DomainError("the dual-ball quadrature supports dimensions 1 to 3")
    value = c_esseen * tau**dim * integral
    return ConcentrationEstimate(value, "esseen_upper", 0.0, tau)


def weighted_sum_char_fn(x: DiscreteDistribution, a: WeightVector):
    """Vectorized characteristic function of sum_k X_k a_k.

    Returns a callable suitable for ``esseen_upper_q``: product over rows of
    the scalar characteristic function of X at <t, a_k>.
    """
    if x.dim != 1:
        raise DomainError("summand distribution must live on the line")
    xv = x.atoms[:, 0].astype(complex)
    xw = x.weights.astype(complex)
    rows = a.rows

    def f_hat(ts):
        arr = np.asarray(ts, dtype=float)
        if a.dim == 1:
            u = np.atleast_1d(arr).reshape(-1, 1) @ rows.T  # (m, n)
        else:
            u = as_points(arr, a.dim) @ rows.T
        phi = np.exp(1j * u[:, :, None] * xv[None, None, :]) @ xw
        return np.prod(phi, axis=1)

    return f_hat


@dataclass(frozen=True)
class RegularityCheck:
    """Outcome of the window-doubling comparison at radii mu and lambda."""

    q_mu: float
    q_lambda: float
    factor: float
    holds: bool


def regularity_check(
    f: DiscreteDistribution, mu: float, lam: float, budget: int = DEFAULT_EXACT_BUDGET
) -> RegularityCheck:
    """Check Q(F, mu) <= (1 + floor(mu/lambda))^d * Q(F, lambda) exactly."""
    if mu <= 0 or lam <= 0:
        raise DomainError("both radii must be positive")
    q_mu = exact_q_of_distribution(f, mu, budget)
    q_lam = exact_q_of_distribution(f, lam, budget)
    factor = (1.0 + math.floor(mu / lam)) ** f.dim
    holds = q_mu <= factor * q_lam + 1e-12
    return RegularityCheck(q_mu, q_lam, factor, holds)


__all__ = [
    "ConcentrationEstimate",
    "DEFAULT_EXACT_BUDGET",
    "RegularityCheck",
    "WeightVector",
    "WeightedSum",
    "esseen_upper_q",
    "exact_q_1d",
    "exact_q_multid",
    "exact_q_of_distribution",
    "mc_q",
    "regularity_check",
    "weighted_sum_char_fn",
    "weighted_sum_distribution",
]
