"""Symmetric progressions, convex-body lattice images, and coverage search.

A Gap is a symmetric generalized arithmetic progression: image
{sum_j m_j g_j : m_j integer, |m_j| <= L_j}.  A Cgap is its convex-body
counterpart: {<nu, h> : nu in Z^r intersect V} for a symmetric convex V whose
lattice-point count is capped.  The two approximation functionals search for a
small progression whose tau-neighborhood (max norm) covers as much of a given
measure as possible; values are certified upper bounds with an explicit
witness, exact only at rank zero where the class collapses to {0}.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from ._common import CONVOLUTION_MERGE_TOL, as_points, dedupe_points
from .distributions import DiscreteDistribution
from .errors import CapacityError, ClassCapError, DomainError, InputError

GAP_ENUM_BUDGET = 10_000_000
DEFAULT_SEARCH_BUDGET = 20_000
# Runtime guard on the point count of any single searched progression.
_MAX_SEARCH_POINTS = 20_000
_KEY_SCALE = 1e9  # rounding grid for set-membership keys


class Gap:
    """Symmetric progression with real box radii ``dims`` and generators ``gens``.

    ``dims`` is a tuple of positive floats (the L_j), ``gens`` a (rank, d)
    array.  Rank zero is allowed; pass ``ambient_dim`` to fix d in that case.
    """

    __slots__ = ("_dims", "_gens")

    def __init__(self, dims, gens, ambient_dim: int | None = None):
        dims = tuple(float(v) for v in np.asarray(dims, dtype=float).reshape(-1))
        if any(not math.isfinite(v) or v <= 0 for v in dims):
            raise DomainError("progression radii must be positive and finite")
        if len(dims) == 0:
            gens_arr = np.zeros((0, ambient_dim if ambient_dim else 1))
        else:
            gens_arr = as_points(gens)
            if ambient_dim is not None and gens_arr.shape[1] != ambient_dim:
                raise DomainError("generator dimension mismatch")
        if gens_arr.shape[0] != len(dims):
            raise DomainError(
                f"{len(dims)} radii but {gens_arr.shape[0]} generators"
            )
        if not np.all(np.isfinite(gens_arr)):
            raise DomainError("generators must be finite")
        gens_arr.flags.writeable = False
        self._dims = dims
        self._gens = gens_arr

    @property
    def rank(self) -> int:
        return len(self._dims)

    @property
    def ambient_dim(self) -> int:
        return self._gens.shape[1]

    @property
    def dims(self) -> tuple:
        return self._dims

    @property
    def gens(self) -> np.ndarray:
        return self._gens

    def box_counts(self):
        return tuple(2 * int(math.floor(L)) + 1 for L in self._dims)

    def box_total(self) -> int:
        total = 1
        for c in self.box_counts():
            total *= c
        return total

    def image(self, budget: int = GAP_ENUM_BUDGET) -> np.ndarray:
        """All distinct progression points, lexicographically sorted.

        Generator relations within 1e-9 count as collisions.  Raises
        CapacityError when the coefficient box exceeds ``budget``.
        """
        if self.rank == 0:
            return np.zeros((1, self.ambient_dim))
        if self.box_total() > budget:
            raise CapacityError(
                f"coefficient box {self.box_total()} exceeds budget {budget}"
            )
        ranges = [
            np.arange(-int(math.floor(L)), int(math.floor(L)) + 1)
            for L in self._dims
        ]
        mesh = np.meshgrid(*ranges, indexing="ij")
        coeffs = np.stack([m.reshape(-1) for m in mesh], axis=1).astype(float)
        pts = coeffs @ self._gens
        pts, _ = dedupe_points(pts, np.ones(len(pts)), CONVOLUTION_MERGE_TOL)
        return pts

    def size(self, budget: int = GAP_ENUM_BUDGET) -> int:
        return int(self.image(budget).shape[0])

    def is_proper(self, budget: int = GAP_ENUM_BUDGET) -> bool:
        """Whether all coefficient boxes map to distinct points."""
        return self.size(budget) == self.box_total()

    def dilate(self, t: float) -> "Gap":
        t = float(t)
        if not math.isfinite(t) or t <= 0:
            raise DomainError("dilation factor must be positive")
        return Gap(
            tuple(t * L for L in self._dims), self._gens, self.ambient_dim
        )

    def to_json_obj(self) -> dict:
        return {
            "L": list(self._dims),
            "g": self._gens.tolist(),
            "dim": self.ambient_dim,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Gap":
        if not isinstance(obj, dict) or "L" not in obj or "g" not in obj:
            raise InputError("gap: expected an object with fields 'L' and 'g'")
        try:
            return cls(obj["L"], obj["g"], obj.get("dim"))
        except DomainError as exc:
            raise InputError(f"gap: {exc}") from exc

    def __repr__(self):
        return f"Gap(rank={self.rank}, dims={self._dims}, ambient_dim={self.ambient_dim})"


def gap_image(p: Gap, budget: int = GAP_ENUM_BUDGET) -> np.ndarray:
    return p.image(budget)


def gap_is_proper(p: Gap, budget: int = GAP_ENUM_BUDGET) -> bool:
    return p.is_proper(budget)


def gap_dilate(p: Gap, t: float) -> Gap:
    return p.dilate(t)


class ConvexBody:
    """Origin-symmetric convex polytope in R^r.

    Either an axis box {|nu_j| <= b_j} or an intersection of symmetric slabs
    {|<u_i, nu>| <= b_i}.  Rank zero is the trivial body containing only the
    empty tuple.
    """

    __slots__ = ("_kind", "_bounds", "_normals", "_dim")

    def __init__(self, kind: str, bounds, normals=None):
        if kind == "box":
            b = np.asarray(bounds, dtype=float).reshape(-1)
            if np.any(b < 0) or not np.all(np.isfinite(b)):
                raise DomainError("box bounds must be finite and nonnegative")
            self._kind = "box"
            self._bounds = b
            self._normals = None
            self._dim = b.size
        elif kind == "halfspaces":
            normals_arr = np.asarray(normals, dtype=float)
            b = np.asarray(bounds, dtype=float).reshape(-1)
            if normals_arr.ndim != 2 or normals_arr.shape[0] != b.size:
                raise DomainError("each halfspace needs a normal and a bound")
            if np.any(b < 0) or not np.all(np.isfinite(b)):
                raise DomainError("halfspace bounds must be finite and nonnegative")
            if not np.all(np.isfinite(normals_arr)) or not np.all(
                np.any(normals_arr != 0, axis=1)
            ):
                raise DomainError("halfspace normals must be finite and nonzero")
            self._kind = "halfspaces"
            self._bounds = b
            self._normals = normals_arr
            self._dim = normals_arr.shape[1]
        else:
            raise DomainError(f"unknown body kind {kind!r}")

    @classmethod
    def box(cls, bounds) -> "ConvexBody":
        return cls("box", bounds)

    @classmethod
    def halfspaces(cls, normals, bounds) -> "ConvexBody":
        return cls("halfspaces", bounds, normals)

    @property
    def kind(self) -> str:
        return self._kind

    @property
    def dim(self) -> int:
        return self._dim

    def contains(self, pts) -> np.ndarray:
        """Closed membership mask for a (N, r) array of points."""
        arr = np.asarray(pts, dtype=float)
        if self._dim == 0:
            return np.ones(arr.shape[0], dtype=bool)
        arr = as_points(arr, self._dim)
        tol = 1e-12 * max(1.0, float(np.max(self._bounds, initial=0.0)))
        if self._kind == "box":
            return np.all(np.abs(arr) <= self._bounds + tol, axis=1)
        proj = np.abs(arr @ self._normals.T)
        return np.all(proj <= self._bounds + tol, axis=1)

    def bounding_box(self) -> np.ndarray:
        """Per-coordinate extent; raises DomainError for an unbounded body."""
        if self._kind == "box":
            return self._bounds.copy()
        r = self._dim
        out = np.empty(r)
        a_ub = np.vstack([self._normals, -self._normals])
        b_ub = np.concatenate([self._bounds, self._bounds])
        for j in range(r):
            c = np.zeros(r)
            c[j] = -1.0
            res = linprog(
                c, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * r, method="highs"
            )
            if res.status == 3:
                raise DomainError("halfspace body is unbounded")
            if not res.success:
                raise DomainError(f"bounding-box LP failed: {res.message}")
            out[j] = -res.fun
        return out

    def to_json_obj(self) -> dict:
        if self._kind == "box":
            return {"box": self._bounds.tolist()}
        return {
            "halfspaces": [
                [self._normals[i].tolist(), float(self._bounds[i])]
                for i in range(self._bounds.size)
            ]
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ConvexBody":
        if not isinstance(obj, dict):
            raise InputError("V: expected an object")
        if "box" in obj:
            return cls.box(obj["box"])
        if "halfspaces" in obj:
            entries = obj["halfspaces"]
            try:
                normals = [e[0] for e in entries]
                bounds = [e[1] for e in entries]
            except (TypeError, IndexError) as exc:
                raise InputError("V: halfspaces must be [normal, bound] pairs") from exc
            return cls.halfspaces(normals, bounds)
        raise InputError("V: expected a 'box' or 'halfspaces' field")

    def __repr__(self):
        return f"ConvexBody({self._kind}, dim={self._dim})"


def _lattice_points_in_body(body: ConvexBody, budget: int) -> np.ndarray:
    """Integer points of Z^r inside a closed symmetric convex body."""
    r = body.dim
    if r == 0:
        return np.zeros((1, 0), dtype=np.int64)
    bbox = body.bounding_box()
    counts = [2 * int(math.floor(b + 1e-12)) + 1 for b in bbox]
    total = 1
    for c in counts:
        total *= c
    if total > budget:
        raise CapacityError(
            f"bounding-box lattice enumeration {total} exceeds budget {budget}"
        )
    ranges = [
        np.arange(-int(math.floor(b + 1e-12)), int(math.floor(b + 1e-12)) + 1)
        for b in bbox
    ]
    mesh = np.meshgrid(*ranges, indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=1).astype(np.int64)
    mask = body.contains(pts.astype(float))
    return pts[mask]


class Cgap:
    """Convex-body progression: K = {<nu, h> : nu in Z^r intersect V}.

    ``cap`` bounds the admissible lattice-point count; enumeration raises
    ClassCapError beyond it.  Rank zero degenerates to K = {0}.
    """

    __slots__ = ("_h", "_body", "_cap")

    def __init__(self, h, body: ConvexBody, cap: int):
        hv = np.asarray(h, dtype=float).reshape(-1)
        if not np.all(np.isfinite(hv)):
            raise DomainError("step vector must be finite")
        if body.dim != hv.size:
            raise DomainError(
                f"step vector has {hv.size} entries but body lives in R^{body.dim}"
            )
        if not isinstance(cap, (int, np.integer)) or cap < 1:
            raise DomainError("lattice cap must be a positive integer")
        hv.flags.writeable = False
        self._h = hv
        self._body = body
        self._cap = int(cap)

    @property
    def h(self) -> np.ndarray:
        return self._h

    @property
    def body(self) -> ConvexBody:
        return self._body

    @property
    def cap(self) -> int:
        return self._cap

    @property
    def rank(self) -> int:
        return self._h.size

    def lattice_points(self, budget: int = GAP_ENUM_BUDGET) -> np.ndarray:
        pts = _lattice_points_in_body(self._body, budget)
        if pts.shape[0] > self._cap:
            raise ClassCapError(
                f"body holds {pts.shape[0]} lattice points, cap is {self._cap}"
            )
        return pts

    def points(self, budget: int = GAP_ENUM_BUDGET) -> np.ndarray:
        """Distinct progression values as a (s, 1) array, sorted."""
        lattice = self.lattice_points(budget)
        if self.rank == 0:
            return np.zeros((1, 1))
        vals = lattice.astype(float) @ self._h
        pts, _ = dedupe_points(vals.reshape(-1, 1), np.ones(len(vals)), 1e-12)
        return pts

    def to_json_obj(self) -> dict:
        return {
            "h": self._h.tolist(),
            "V": self._body.to_json_obj(),
            "m": self._cap,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Cgap":
        if not isinstance(obj, dict):
            raise InputError("cgap: expected an object")
        for key in ("h", "V", "m"):
            if key not in obj:
                raise InputError(f"cgap: missing field '{key}'")
        try:
            return cls(obj["h"], ConvexBody.from_json_obj(obj["V"]), int(obj["m"]))
        except DomainError as exc:
            raise InputError(f"cgap: {exc}") from exc

    def __repr__(self):
        return f"Cgap(rank={self.rank}, cap={self._cap}, body={self._body!r})"


def cgap_image(k: Cgap, budget: int = GAP_ENUM_BUDGET) -> np.ndarray:
    return k.points(budget)


@dataclass(frozen=True)
class GapImageProgression:
    """Member of the GAP-image class: K = {<nu, h> : nu in Image(P)}, P integral."""

    gap: Gap
    h: tuple

    def __post_init__(self):
        hv = tuple(float(v) for v in self.h)
        if len(hv) != self.gap.ambient_dim:
            raise DomainError("step vector must match the progression's ambient dim")
        object.__setattr__(self, "h", hv)

    @property
    def rank(self) -> int:
        return self.gap.rank

    def size(self, budget: int = GAP_ENUM_BUDGET) -> int:
        return self.gap.size(budget)

    def points(self, budget: int = GAP_ENUM_BUDGET) -> np.ndarray:
        img = self.gap.image(budget)
        vals = img @ np.asarray(self.h)
        pts, _ = dedupe_points(vals.reshape(-1, 1), np.ones(len(vals)), 1e-12)
        return pts

    def to_json_obj(self) -> dict:
        return {"gap": self.gap.to_json_obj(), "h": list(self.h)}


def neighborhood_coverage(points, k_points, delta: float):
    """How many of ``points`` lie within max-norm ``delta`` of the set ``k_points``.

    Returns (covered_count, uncovered_indices); membership is a plain closed
    comparison with no slack.
    """
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    pts = as_points(points)
    kp = as_points(k_points, pts.shape[1])
    mind = _min_maxnorm_dist(pts, kp)
    covered = mind <= delta
    return int(covered.sum()), [int(i) for i in np.nonzero(~covered)[0]]


def _min_maxnorm_dist(pts: np.ndarray, kp: np.ndarray) -> np.ndarray:
    mind = np.full(pts.shape[0], np.inf)
    for i in range(0, kp.shape[0], 1024):
        block = kp[i : i + 1024]
        d = np.max(np.abs(pts[:, None, :] - block[None, :, :]), axis=2)
        mind = np.minimum(mind, d.min(axis=1))
    return mind


def uncovered_mass(w: DiscreteDistribution, k_points, tau: float) -> float:
    """Mass of ``w`` strictly outside the closed max-norm tau-neighborhood of K.

    This is the single evaluation path used both inside the searches and when
    re-checking a reported witness, so witness values reproduce exactly.
    """
    if tau < 0:
        raise DomainError("tau must be nonnegative")
    kp = as_points(k_points, w.dim)
    mind = _min_maxnorm_dist(w.atoms, kp)
    # fsum keeps the value correctly rounded, so subset relations between
    # masses survive in floating point (matching tail_mass).
    return math.fsum(w.weights[mind > tau])


@dataclass(frozen=True)
class ApproxResult:
    """Outcome of a coverage search: a certified upper bound with its witness.

    ``exact`` is True only at rank zero, where the class has a single member.
    """

    value: float
    witness: object
    exact: bool
    evaluations: int


def _convergents(x: float, depth: int = 12):
    """Continued-fraction convergents (p, q) of a positive real."""
    out = []
    h0, k0 = 1, 0
    a = int(math.floor(x))
    h1, k1 = a, 1
    out.append((h1, k1))
    frac = x - a
    for _ in range(depth - 1):
        if frac < 1e-12:
            break
        x = 1.0 / frac
        a = int(math.floor(x))
        h0, k0, h1, k1 = h1, k1, a * h1 + h0, a * k1 + k0
        if k1 > 1_000_000 or h1 > 1_000_000:
            break
        out.append((h1, k1))
        frac = x - a
    return out


def _candidate_steps(w: DiscreteDistribution, cap: int = 96) -> np.ndarray:
    """Deterministic pool of step candidates built from the atom values alone.

    Uses |atoms|, pairwise differences, and continued-fraction convergents of
    pairwise ratios (so near-commensurable atoms suggest a common step).  The
    pool depends only on the measure, never on (tau, rank, cap): searches over
    different parameters therefore range over nested candidate families.
    """
    zn = np.max(np.abs(w.atoms), axis=1)
    zs = np.unique(zn[zn > 0])
    pool = set(float(z) for z in zs)
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            zi, zj = float(zs[i]), float(zs[j])
            d = zj - zi
            if d > 1e-12:
                pool.add(d)
            for p, q in _convergents(zj / zi):
                if p > 0 and zj / p > 1e-12:
                    pool.add(zj / p)
                if q > 0 and zi / q > 1e-12:
                    pool.add(zi / q)
    vals = np.sort(np.asarray(sorted(pool)))
    # drop near-duplicates (relative 1e-12)
    if len(vals) > 1:
        keep = np.concatenate([[True], np.diff(vals) > 1e-12 * np.maximum(1.0, vals[1:])])
        vals = vals[keep]
    if len(vals) > cap:
        idx = np.unique(np.round(np.linspace(0, len(vals) - 1, cap)).astype(int))
        vals = vals[idx]
    return vals


def _stride(pool: np.ndarray, cap: int) -> np.ndarray:
    if len(pool) <= cap:
        return pool
    idx = np.unique(np.round(np.linspace(0, len(pool) - 1, cap)).astype(int))
    return pool[idx]


def _box_allocations(rank: int, cap_count: int):
    """Pareto-maximal integer box radii with prod(2 b_i + 1) <= cap_count."""
    if rank == 1:
        return [((cap_count - 1) // 2,)]
    allocs = []
    b1_max = (cap_count - 1) // 2
    if rank == 2:
        for b1 in range(0, b1_max + 1):
            rest = cap_count // (2 * b1 + 1)
            if rest < 1:
                break
            b2 = (rest - 1) // 2
            allocs.append((b1, b2))
        # keep only Pareto-maximal pairs
        out = []
        for cand in allocs:
            if not any(
                o != cand and o[0] >= cand[0] and o[1] >= cand[1] for o in allocs
            ):
                out.append(cand)
        return out
    # rank 3: coarse Pareto family
    out = []
    for b1 in range(0, b1_max + 1):
        r1 = cap_count // (2 * b1 + 1)
        if r1 < 1:
            break
        for b2 in range(b1, (r1 - 1) // 2 + 1):
            r2 = r1 // (2 * b2 + 1)
            if r2 < 1:
                break
            b3 = (r2 - 1) // 2
            out.append((b1, b2, b3))
    return out


def _witness_key(steps, radii):
    return (
        len(steps),
        tuple(round(float(s), 12) for s in steps),
        tuple(int(b) for b in radii),
    )


def _coverage_search(
    w: DiscreteDistribution,
    tau: float,
    rank_budget: int,
    cap_count: int,
    make_witness,
    search_budget: int,
) -> ApproxResult:
    """Shared search core for both progression classes.

    Minimizes the uncovered mass over a candidate family that is nested in
    rank, cap, and (pointwise) tau, so reported values are antitone in all
    three.  Budget exhaustion returns the best candidate found so far.
    """
    pool = _candidate_steps(w)
    best_w = make_witness((), ())
    best_v = uncovered_mass(w, best_w.points(), tau)
    best_key = _witness_key((), ())
    evals = 1
    for rho in range(1, min(rank_budget, 3) + 1):
        if best_v == 0.0 or evals >= search_budget:
            break
        if rho == 1:
            step_sets = [(float(h),) for h in pool]
        elif rho == 2:
            sub = _stride(pool, 24)
            step_sets = [
                (float(sub[i]), float(sub[j]))
                for i in range(len(sub))
                for j in range(i + 1, len(sub))
            ]
        else:
            sub = _stride(pool, 10)
            step_sets = [
                tuple(float(v) for v in c) for c in itertools.combinations(sub, 3)
            ]
        allocs = _box_allocations(rho, cap_count)
        for steps in step_sets:
            for radii in allocs:
                if evals >= search_budget:
                    break
                count = 1
                for b in radii:
                    count *= 2 * b + 1
                if count > _MAX_SEARCH_POINTS:
                    continue
                wit = make_witness(steps, radii)
                val = uncovered_mass(w, wit.points(), tau)
                evals += 1
                key = _witness_key(steps, radii)
                if val < best_v or (val == best_v and key < best_key):
                    best_v, best_w, best_key = val, wit, key
            if best_v == 0.0 or evals >= search_budget:
                break
        if best_v == 0.0:
            break
    return ApproxResult(best_v, best_w, False, evals)


def _check_search_args(w: DiscreteDistribution, tau: float, rank: int, count: int):
    if w.dim != 1:
        raise DomainError("coverage search operates on measures on the line")
    if tau < 0:
        raise DomainError("tau must be nonnegative")
    if not isinstance(rank, (int, np.integer)) or rank < 0:
        raise DomainError("rank must be a nonnegative integer")
    if not isinstance(count, (int, np.integer)) or count < 1:
        raise DomainError("the size cap must be a positive integer")


def beta_rm(
    w: DiscreteDistribution,
    tau: float,
    r: int,
    m: int,
    search_budget: int = DEFAULT_SEARCH_BUDGET,
) -> ApproxResult:
    """Least uncovered mass over searched convex-body progressions of rank <= r.

    The witness is a Cgap with at most ``m`` lattice points; re-evaluating
    ``uncovered_mass`` on its points reproduces ``value`` exactly.  Rank zero
    is exact (the class contains only K = {0}).
    """
    _check_search_args(w, tau, r, m)
    if r == 0:
        wit = Cgap(np.zeros(0), ConvexBody.box([]), int(m))
        val = uncovered_mass(w, wit.points(), tau)
        return ApproxResult(val, wit, True, 1)

    def make_witness(steps, radii) -> Cgap:
        h = np.ones(r)
        bounds = np.full(r, 0.4)  # trivial axes admit only nu_j = 0
        h[: len(steps)] = steps
        bounds[: len(radii)] = [float(b) for b in radii]
        return Cgap(h, ConvexBody.box(bounds), int(m))

    return _coverage_search(w, tau, int(r), int(m), make_witness, search_budget)


def gamma_rs(
    w: DiscreteDistribution,
    tau: float,
    r: int,
    s: int,
    search_budget: int = DEFAULT_SEARCH_BUDGET,
) -> ApproxResult:
    """Least uncovered mass over searched GAP-image progressions of rank <= r.

    The witness applies a real step vector to an integral progression of size
    at most ``s`` (axis boxes, hence proper).  Values are upper bounds; they
    are never compared against ``beta_rm`` because the classes differ.
    """
    _check_search_args(w, tau, r, s)
    if r == 0:
        wit = _ZeroProgression()
        val = uncovered_mass(w, wit.points(), tau)
        return ApproxResult(val, wit, True, 1)

    def make_witness(steps, radii) -> GapImageProgression:
        dims = np.full(r, 0.4)
        dims[: len(radii)] = [max(float(b), 0.4) for b in radii]
        h = np.ones(r)
        h[: len(steps)] = steps
        return GapImageProgression(Gap(tuple(dims), np.eye(r)), tuple(h))

    return _coverage_search(w, tau, int(r), int(s), make_witness, search_budget)


class _ZeroProgression:
    """Rank-zero progression: the single point 0."""

    rank = 0

    def points(self, budget: int = GAP_ENUM_BUDGET) -> np.ndarray:
        return np.zeros((1, 1))

    def size(self, budget: int = GAP_ENUM_BUDGET) -> int:
        return 1

    def to_json_obj(self) -> dict:
        return {"gap": {"L": [], "g": [], "dim": 1}, "h": []}


def _point_keys(pts: np.ndarray) -> set:
    scaled = np.round(np.asarray(pts, dtype=float) * _KEY_SCALE).astype(np.int64)
    return {tuple(int(v) for v in row) for row in scaled}


@dataclass(frozen=True)
class TvCoverReport:
    """Outcome of the two-sided covering comparison between a Gap and a body."""

    image_in_lattice_body: bool
    lattice_in_dilated_image: bool
    size_bound_holds: bool
    dilation: float
    image_size: int
    dilated_image_size: int
    lattice_size: int
    size_bound: float

    @property
    def all_hold(self) -> bool:
        return (
            self.image_in_lattice_body
            and self.lattice_in_dilated_image
            and self.size_bound_holds
        )


def tv_cover_check(
    p: Gap, body: ConvexBody, c1: float = 1.0, budget: int = GAP_ENUM_BUDGET
) -> TvCoverReport:
    """Check the two inclusions and the size inequality of the covering step.

    With r = rank(P) and t = (c1 * r)^(3r/2) (t = 1 at rank zero), verifies
    Image(P) inside V intersect Z^D, the integer points of V inside
    Image(P^t), and size(P^t) <= (2t + 1)^r * |V intersect Z^D|.
    """
    if c1 <= 0:
        raise DomainError("c1 must be positive")
    if body.dim != p.ambient_dim:
        raise DomainError("body dimension must match the progression's ambient dim")
    r = p.rank
    img = p.image(budget)
    lattice = _lattice_points_in_body(body, budget).astype(float)
    lattice_keys = _point_keys(lattice)
    int_valued = bool(np.all(np.abs(img - np.rint(img)) <= 1e-9))
    incl1 = int_valued and _point_keys(img) <= lattice_keys
    t = (c1 * r) ** (1.5 * r) if r > 0 else 1.0
    img_t = p.dilate(t).image(budget)
    incl2 = lattice_keys <= _point_keys(img_t)
    size_bound = (2.0 * t + 1.0) ** r * lattice.shape[0]
    size_ok = img_t.shape[0] <= size_bound + 1e-9
    return TvCoverReport(
        image_in_lattice_body=incl1,
        lattice_in_dilated_image=incl2,
        size_bound_holds=size_ok,
        dilation=float(t),
        image_size=int(img.shape[0]),
        dilated_image_size=int(img_t.shape[0]),
        lattice_size=int(lattice.shape[0]),
        size_bound=float(size_bound),
    )


__all__ = [
    "ApproxResult",
    "Cgap",
    "ConvexBody",
    "DEFAULT_SEARCH_BUDGET",
    "GAP_ENUM_BUDGET",
    "Gap",
    "GapImageProgression",
    "TvCoverReport",
    "beta_rm",
    "cgap_image",
    "gamma_rs",
    "gap_dilate",
    "gap_image",
    "gap_is_proper",
    "neighborhood_coverage",
    "tv_cover_check",
    "uncovered_mass",
]
