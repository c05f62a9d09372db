"""Independent oracles used to freeze expected values.

Everything here is brute force on purpose: sign enumeration, interval sweeps,
subset enclosing balls, grid scans.  Nothing imports the package under test.
"""

import itertools
import math
from fractions import Fraction

import numpy as np

KEY_DECIMALS = 9


def _key(values) -> tuple:
    return tuple(round(float(v), KEY_DECIMALS) for v in values)


def enumerate_weighted_sum(support, probs, rows):
    """All outcomes of sum_k X_k * rows[k] with X iid on (support, probs).

    Returns (points, weights) with exact Fraction weights aggregated over
    coinciding outcomes.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[:, None]
    n, d = rows.shape
    probs = [Fraction(p).limit_denominator(10**9) for p in probs]
    acc = {}
    for combo in itertools.product(range(len(support)), repeat=n):
        pt = np.zeros(d)
        pr = Fraction(1)
        for k, idx in enumerate(combo):
            pt += float(support[idx]) * rows[k]
            pr *= probs[idx]
        acc[_key(pt)] = acc.get(_key(pt), Fraction(0)) + pr
    points = np.array(sorted(acc), dtype=float).reshape(len(acc), d)
    weights = [acc[_key(p)] for p in points]
    return points, weights


def oracle_q_1d(support, probs, weights, tau):
    """Largest probability of a closed interval of length tau, exactly."""
    pts, wts = enumerate_weighted_sum(support, probs, weights)
    xs = pts[:, 0]
    best = Fraction(0)
    for anchor in xs:
        for lo in (anchor, anchor - tau):
            hi = lo + tau
            total = sum(
                w
                for x, w in zip(xs, wts)
                if lo - 1e-12 <= x <= hi + 1e-12
            )
            best = max(best, total)
    return best


def _circumcenter(pts):
    """Center equidistant from all rows of pts, or None when degenerate."""
    pts = np.asarray(pts, dtype=float)
    base = pts[0]
    diffs = pts[1:] - base
    rhs = 0.5 * np.einsum("ij,ij->i", diffs, diffs)
    sol, residual, rank, _ = np.linalg.lstsq(diffs, rhs, rcond=None)
    if rank < len(diffs):
        return None
    center = base + sol
    dists = np.linalg.norm(pts - center, axis=1)
    if np.ptp(dists) > 1e-8 * (1.0 + dists.max()):
        return None
    return center


def oracle_q_ball(support, probs, rows, tau):
    """Largest probability of a closed Euclidean ball of diameter tau.

    Exact for finite atom sets: the optimal covered set has an enclosing
    ball determined by at most d+1 atoms, so centers of subsets of that
    size exhaust the candidates.
    """
    pts, wts = enumerate_weighted_sum(support, probs, rows)
    d = pts.shape[1]
    radius = tau / 2.0
    wts_f = np.array([float(w) for w in wts])
    centers = [p for p in pts]
    idx = range(len(pts))
    for size in range(2, min(d + 1, len(pts)) + 1):
        for combo in itertools.combinations(idx, size):
            sub = pts[list(combo)]
            if size == 2:
                centers.append(0.5 * (sub[0] + sub[1]))
                continue
            c = _circumcenter(sub)
            if c is not None:
                centers.append(c)
    best = 0.0
    for c in centers:
        dist = np.linalg.norm(pts - np.asarray(c), axis=1)
        best = max(best, float(wts_f[dist <= radius + 1e-12].sum()))
    return best


def oracle_symmetrize(support, probs):
    """Distribution of X1 - X2 as a dict value -> Fraction."""
    probs = [Fraction(p).limit_denominator(10**9) for p in probs]
    out = {}
    for (x1, p1), (x2, p2) in itertools.product(zip(support, probs), repeat=2):
        z = round(float(x1) - float(x2), KEY_DECIMALS)
        out[z] = out.get(z, Fraction(0)) + p1 * p2
    return out


def oracle_tail(sym, delta):
    return sum((p for z, p in sym.items() if abs(z) > delta), Fraction(0))


def oracle_lambda_d(sym, ratio, d):
    total = Fraction(0)
    for z, p in sym.items():
        if z == 0:
            continue
        total += p * Fraction(1, (1 + math.floor(ratio / abs(z))) ** d)
    return total


def oracle_m2(sym, ratio):
    total = 0.0
    for z, p in sym.items():
        total += float(p) * min(z * z / (ratio * ratio), 1.0)
    return total


def lcd_violates(t, a, gamma, alpha):
    x = t * np.asarray(a, dtype=float)
    dist = float(np.linalg.norm(x - np.round(x)))
    return dist < min(gamma * float(np.linalg.norm(x)), alpha)


def oracle_lcd_scan_1d(a, gamma, alpha, t_max, coarse=1e-4):
    """First scalar t with a lattice violation, refined by bisection."""
    t = coarse
    hit = None
    while t <= t_max:
        if lcd_violates(t, a, gamma, alpha):
            hit = t
            break
        t += coarse
    if hit is None:
        return None
    lo, hi = max(hit - coarse, 0.0), hit
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if lcd_violates(mid, a, gamma, alpha):
            hi = mid
        else:
            lo = mid
    return hi


def oracle_lcd_ones(n, gamma, alpha):
    """Closed form for n equal unit weights."""
    return max(1.0 / (1.0 + gamma), 1.0 - alpha / math.sqrt(n))


def oracle_poisson_pmf(mean, k):
    return math.exp(-mean) * mean**k / math.factorial(k)


RADEMACHER = ((-1.0, 1.0), (Fraction(1, 2), Fraction(1, 2)))
UNIFORM3 = ((-1.0, 0.0, 1.0), (Fraction(1, 3), Fraction(1, 3), Fraction(1, 3)))


def bernoulli(p):
    frac = Fraction(p).limit_denominator(10**9)
    return ((0.0, 1.0), (1 - frac, frac))
