"""Plug-in evaluators for the concentration upper bounds.

Every evaluator computes the literal value of one right-hand side from the
mass functionals produced elsewhere (tail mass, window-count sums, coverage
deficits, least-denominator brackets).  The unknown absolute constants are
exposed in :class:`ConstantsConfig` and default to 1.0; nothing in this
module asserts that the defaults make any inequality true.  Values are
audited empirically by the report layer: a bound whose mass functional
vanishes comes back as ``inf``, and anything above 1 is flagged vacuous
since a concentration value never exceeds 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from ._common import derive_seed
from .concentration import (
    DEFAULT_EXACT_BUDGET,
    ConcentrationEstimate,
    WeightVector,
    WeightedSum,
    esseen_upper_q,
    exact_q_1d,
    exact_q_multid,
    mc_q,
)
from .distributions import (
    CompoundPoisson,
    DiscreteDistribution,
    half_empirical_measure,
    lambda_d,
    spectral_measure,
    symmetrize,
    tail_mass,
    truncated_second_moment,
)
from .errors import CapacityError, ChainViolationError, DomainError, InputError
from .lcd import LcdParams, compute_lcd
from .progressions import DEFAULT_SEARCH_BUDGET, beta_rm, gamma_rs, uncovered_mass

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ConstantsConfig:
    """Positive tuning constants shared by all bound evaluators.

    The inequalities only assert that admissible values exist, so the
    defaults are a reporting convention, not a claim.  Fields:

    c2          compound-Poisson bound over capped convex-body progressions
    c3          weighted-sum bound, tail-mass form, same progression class
    c4          weighted-sum bound, tail-free form (guarded)
    c5, c6      compound-Poisson bound over capped symmetric progressions
    c7, c8      weighted-sum bound over capped symmetric progressions (guarded)
    c9          structure-report cap budget
    c10, c11, c12  structure-report size inflation factors
    c_esseen    smoothing-integral upper bound
    c_d         dimension-dependent factor of the transfer inequalities and
                of every budget whose constant is implicit
    c_exp_m2    exponent coefficient in the second-moment denominator bound;
                the default 4.0 matches the tail-mass form so the dominance
                comparison between the two is meaningful
    """

    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0
    c5: float = 1.0
    c6: float = 1.0
    c7: float = 1.0
    c8: float = 1.0
    c9: float = 1.0
    c10: float = 1.0
    c11: float = 1.0
    c12: float = 1.0
    c_esseen: float = 1.0
    c_d: float = 1.0
    c_exp_m2: float = 4.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise DomainError(f"constant {f.name} must be a number")
            v = float(v)
            if not math.isfinite(v) or v <= 0.0:
                raise DomainError(f"constant {f.name} must be positive and finite")
            object.__setattr__(self, f.name, v)

    def to_json_obj(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_json_obj(cls, obj) -> "ConstantsConfig":
        if not isinstance(obj, dict):
            raise InputError("constants: expected a JSON object")
        known = {f.name for f in fields(cls)}
        for key in obj:
            if key not in known:
                raise InputError(f"constants: unknown field {key!r}")
        return cls(**obj)


DEFAULT_CONSTANTS = ConstantsConfig()


def _constants(constants) -> ConstantsConfig:
    return DEFAULT_CONSTANTS if constants is None else constants


def _check_rank_count(r: int, count: int, count_name: str):
    if not isinstance(r, (int, np.integer)) or r < 0:
        raise DomainError("rank r must be a nonnegative integer")
    if not isinstance(count, (int, np.integer)) or count < 1:
        raise DomainError(f"{count_name} must be a positive integer")


def _check_unit_mass(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0 + 1e-12:
        raise DomainError(f"{name} must lie in [0, 1]")
    return min(value, 1.0)


def _two_term(lead: float, first_num: float, count: int, mass: float, r: int) -> float:
    """lead * (first_num / (count * sqrt(mass)) + (r+1)^(5r/2) / mass^((r+1)/2))."""
    if mass <= 0.0:
        return math.inf
    first = first_num / (count * math.sqrt(mass))
    second = (r + 1) ** (2.5 * r) / mass ** (0.5 * (r + 1))
    return lead * (first + second)


def compound_poisson_bound_cgap(
    alpha: float, beta: float, r: int, m: int, constants: ConstantsConfig | None = None
) -> float:
    """Concentration bound for a compound Poisson law with intensity ``alpha``.

    ``beta`` is the least mass of the driving measure left uncovered by a
    convex-body progression of rank <= r holding at most m points.  Zero
    ``beta`` means the driving measure is essentially supported on such a
    progression and the bound degenerates to ``inf``.
    """
    c = _constants(constants)
    if not alpha > 0:
        raise DomainError("intensity alpha must be positive")
    _check_rank_count(r, m, "cap m")
    beta = _check_unit_mass(beta, "beta")
    return _two_term(c.c2 ** (r + 1), 1.0, m, alpha * beta, r)


def weighted_sum_bound_cgap(
    kappa: float,
    delta: float,
    n: int,
    p_val: float,
    beta_star: float,
    r: int,
    m: int,
    constants: ConstantsConfig | None = None,
) -> float:
    """Weighted-sum bound routed through the symmetrized tail mass.

    The mass slot is n * p_val * beta_star where p_val is the symmetrized
    step tail at ratio tau/kappa and beta_star the coverage deficit of the
    spectral weight measure at window delta.
    """
    c = _constants(constants)
    if not (kappa > 0 and delta > 0):
        raise DomainError("kappa and delta must be positive")
    if n < 1:
        raise DomainError("n must be a positive integer")
    _check_rank_count(r, m, "cap m")
    p_val = _check_unit_mass(p_val, "p_val")
    beta_star = _check_unit_mass(beta_star, "beta_star")
    window = 1 + math.floor(kappa / delta)
    return window * _two_term(c.c3 ** (r + 1), 1.0, m, n * p_val * beta_star, r)


def weighted_sum_bound_cgap_tail_free(
    kappa: float,
    delta: float,
    n: int,
    beta_star: float,
    r: int,
    m: int,
    constants: ConstantsConfig | None = None,
) -> float:
    """Tail-free variant of :func:`weighted_sum_bound_cgap`.

    Valid only when the window-count sum at ratio tau/kappa is large; the
    caller records that guard.  The tail factor is dropped from the mass
    slot, which is why no p argument appears.
    """
    c = _constants(constants)
    if not (kappa > 0 and delta > 0):
        raise DomainError("kappa and delta must be positive")
    if n < 1:
        raise DomainError("n must be a positive integer")
    _check_rank_count(r, m, "cap m")
    beta_star = _check_unit_mass(beta_star, "beta_star")
    window = 1 + math.floor(kappa / delta)
    return window * _two_term(c.c4 ** (r + 1), 1.0, m, n * beta_star, r)


def compound_poisson_bound_gap(
    alpha: float, gamma_val: float, r: int, s: int, constants: ConstantsConfig | None = None
) -> float:
    """Compound-Poisson bound over capped symmetric progression images.

    Same two-term shape as the convex-body variant but the class is richer,
    which costs the (c6 r + 1)^(3 r^2 / 2) inflation in the first term.
    """
    c = _constants(constants)
    if not alpha > 0:
        raise DomainError("intensity alpha must be positive")
    _check_rank_count(r, s, "cap s")
    gamma_val = _check_unit_mass(gamma_val, "gamma_val")
    first_num = (c.c6 * r + 1.0) ** (1.5 * r * r)
    return _two_term(c.c5 ** (r + 1), first_num, s, alpha * gamma_val, r)


def weighted_sum_bound_gap_tail_free(
    kappa: float,
    delta: float,
    n: int,
    gamma_star: float,
    r: int,
    s: int,
    constants: ConstantsConfig | None = None,
) -> float:
    """Tail-free weighted-sum bound over capped symmetric progression images."""
    c = _constants(constants)
    if not (kappa > 0 and delta > 0):
        raise DomainError("kappa and delta must be positive")
    if n < 1:
        raise DomainError("n must be a positive integer")
    _check_rank_count(r, s, "cap s")
    gamma_star = _check_unit_mass(gamma_star, "gamma_star")
    window = 1 + math.floor(kappa / delta)
    first_num = (c.c8 * r + 1.0) ** (1.5 * r * r)
    return window * _two_term(c.c7 ** (r + 1), first_num, s, n * gamma_star, r)


def transfer_bound_plain(q_smoothed: float, constants: ConstantsConfig | None = None) -> float:
    """Transfer from the smoothing law at the coarse window: c_d * Q(H^p, kappa)."""
    c = _constants(constants)
    if q_smoothed < 0:
        raise DomainError("q_smoothed must be nonnegative")
    return c.c_d * q_smoothed


def transfer_bound_window(
    q_smoothed: float,
    kappa: float,
    delta: float,
    d: int,
    constants: ConstantsConfig | None = None,
) -> float:
    """Window-refined transfer: c_d * (1 + floor(kappa/delta))^d * Q(H^p, delta)."""
    c = _constants(constants)
    if not (kappa > 0 and delta > 0):
        raise DomainError("kappa and delta must be positive")
    if d < 1:
        raise DomainError("dimension must be a positive integer")
    if q_smoothed < 0:
        raise DomainError("q_smoothed must be nonnegative")
    return c.c_d * (1 + math.floor(kappa / delta)) ** d * q_smoothed


def transfer_bound_refined(
    q_smoothed: float, lam: float, constants: ConstantsConfig | None = None
) -> float:
    """Window-count transfer: c_d * Q(H^lambda, kappa) / lambda.

    Sharper than the plain transfer once lambda is large, because raising
    the smoothing power can only spread the law out.
    """
    c = _constants(constants)
    if q_smoothed < 0:
        raise DomainError("q_smoothed must be nonnegative")
    if lam < 0:
        raise DomainError("lambda must be nonnegative")
    if lam == 0.0:
        return math.inf
    return c.c_d * q_smoothed / lam


def _lcd_core(
    b: float,
    gamma: float,
    big_d: float,
    alpha: float,
    det_gram: float,
    d: int,
    c_d: float,
    exp_coeff: float,
) -> float:
    if b <= 0.0:
        return math.inf
    if det_gram <= 0.0:
        return math.inf
    first = (1.0 / (gamma * big_d * math.sqrt(b))) ** d / math.sqrt(det_gram)
    return c_d * (first + math.exp(-exp_coeff * b * alpha * alpha))


def _check_lcd_args(gamma: float, big_d: float, alpha: float, d: int):
    if not 0.0 < gamma < 1.0:
        raise DomainError("gamma must lie strictly between 0 and 1")
    if not big_d > 0:
        raise DomainError("denominator bracket D must be positive")
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if d < 1:
        raise DomainError("dimension must be a positive integer")


def lcd_compound_poisson_bound(
    b: float,
    gamma: float,
    big_d: float,
    alpha: float,
    det_gram: float,
    d: int,
    constants: ConstantsConfig | None = None,
) -> float:
    """Bound for Q(H^b, 1/D) under the least-denominator condition at level D.

    c_d * ((1/(gamma D sqrt(b)))^d / sqrt(det A) + exp(-4 b alpha^2)) where
    A is the Gram matrix of the weight rows.
    """
    c = _constants(constants)
    _check_lcd_args(gamma, big_d, alpha, d)
    return _lcd_core(b, gamma, big_d, alpha, det_gram, d, c.c_d, 4.0)


def lcd_weighted_sum_bounds(
    lambda_val: float,
    p_val: float,
    m2_val: float,
    gamma: float,
    big_d: float,
    alpha: float,
    det_gram: float,
    d: int,
    constants: ConstantsConfig | None = None,
) -> tuple[float, float, float]:
    """The three least-denominator bounds on Q(F_a, tau).

    Returned in order: window-count form (extra 1/lambda prefactor),
    tail-mass form, truncated-second-moment form.  All three share the
    smoothing power slot, filled with lambda_d(tau D), p(tau D) and
    M(tau D) respectively; the last uses the configurable exponent
    coefficient because its admissible value is not pinned down.
    """
    c = _constants(constants)
    _check_lcd_args(gamma, big_d, alpha, d)
    if lambda_val == 0.0:
        via_lambda = math.inf
    else:
        via_lambda = (
            _lcd_core(lambda_val, gamma, big_d, alpha, det_gram, d, c.c_d, 4.0)
            / lambda_val
        )
    via_p = _lcd_core(p_val, gamma, big_d, alpha, det_gram, d, c.c_d, 4.0)
    via_m2 = _lcd_core(m2_val, gamma, big_d, alpha, det_gram, d, c.c_d, c.c_exp_m2)
    return via_lambda, via_p, via_m2


def h_char_fn(a: WeightVector):
    """Characteristic function of the spectral smoothing law of ``a``.

    hat H(t) = exp(-(1/2) sum_k (1 - cos<t, a_k>)), real with values in
    (0, 1].  The returned callable is vectorized: a float array for
    dimension one, an (m, d) array otherwise.
    """
    rows = a.rows

    def f_hat(ts):
        ts = np.asarray(ts, dtype=float)
        if a.dim == 1 and ts.ndim <= 1:
            ph = np.multiply.outer(np.atleast_1d(ts), rows[:, 0])
        else:
            ph = np.atleast_2d(ts) @ rows.T
        return np.exp(-0.5 * np.sum(1.0 - np.cos(ph), axis=-1))

    return f_hat


def smoothing_law(a: WeightVector, power: float = 1.0) -> CompoundPoisson:
    """Compound Poisson law whose characteristic function is h_char_fn(a)**power."""
    if not power >= 0:
        raise DomainError("smoothing power must be nonnegative")
    return CompoundPoisson(0.5 * a.n * float(power), spectral_measure(a.rows))


@dataclass(frozen=True)
class PointwiseChainReport:
    """Outcome of the constant-free characteristic-function chain check.

    All checks either passed (this object) or raised ChainViolationError.
    ``premise_failures`` counts grid points inside the stated radius where
    the denominator condition itself failed; those points are excluded from
    the final comparison because the envelope is only claimed under the
    condition.  A nonzero count means the supplied D exceeds the true
    denominator bracket.
    """

    n_points: int
    cosine_checks: int
    envelope_checks: int
    lcd_checks: int
    premise_failures: int
    slack: float

    def to_json_obj(self) -> dict:
        return {
            "n_points": self.n_points,
            "cosine_checks": self.cosine_checks,
            "envelope_checks": self.envelope_checks,
            "lcd_checks": self.lcd_checks,
            "premise_failures": self.premise_failures,
            "slack": self.slack,
        }


def _first_violation(mask: np.ndarray):
    idx = np.flatnonzero(mask)
    return int(idx[0]) if idx.size else None


def verify_pointwise_chain(
    a: WeightVector,
    t_grid,
    gamma: float | None = None,
    alpha: float | None = None,
    big_d: float | None = None,
    slack: float = 1e-12,
) -> PointwiseChainReport:
    """Check the exact pointwise inequalities behind the smoothing bounds.

    For every grid point t:

    1. 1 - cos x >= 2 x^2 / pi^2 at each phase x = <t, a_k> reduced to
       [-pi, pi];
    2. hat H(t) <= exp(-4 dist(t/2pi . a, Z^n)^2);
    3. with gamma, alpha, big_d supplied and ||t|| <= 2 pi big_d, whenever
       the denominator condition holds at t/2pi:
       hat H(t) <= exp(-4 min(gamma ||t/2pi . a||, alpha)^2).

    These are constant-free facts; any failure beyond ``slack`` raises
    ChainViolationError carrying the offending t.
    """
    if slack < 0:
        raise DomainError("slack must be nonnegative")
    lcd_given = [v is not None for v in (gamma, alpha, big_d)]
    if any(lcd_given) and not all(lcd_given):
        raise InputError("gamma, alpha and big_d must be supplied together")
    check_lcd = all(lcd_given)
    if check_lcd:
        _check_lcd_args(gamma, big_d, alpha, a.dim)

    ts = np.asarray(t_grid, dtype=float)
    if a.dim == 1 and ts.ndim == 1:
        ts = ts[:, None]
    if ts.ndim != 2 or ts.shape[1] != a.dim:
        raise InputError(f"t_grid must be (m, {a.dim}) or flat for dimension 1")

    rows = a.rows
    ph = ts @ rows.T  # (m, n) phases <t, a_k>
    reduced = ph - _TWO_PI * np.rint(ph / _TWO_PI)
    lhs_cos = 1.0 - np.cos(ph)
    rhs_cos = 2.0 * reduced * reduced / (math.pi * math.pi)
    bad = lhs_cos < rhs_cos - slack
    if bad.any():
        i, k = np.argwhere(bad)[0]
        raise ChainViolationError(
            "cosine_quadratic", ts[i], lhs_cos[i, k], rhs_cos[i, k]
        )

    h_vals = np.exp(-0.5 * np.sum(lhs_cos, axis=1))
    frac = ph / _TWO_PI
    frac -= np.rint(frac)
    dist_sq = np.sum(frac * frac, axis=1)
    envelope = np.exp(-4.0 * dist_sq)
    bad = h_vals > envelope + slack
    i = _first_violation(bad)
    if i is not None:
        raise ChainViolationError("lattice_envelope", ts[i], h_vals[i], envelope[i])

    lcd_checks = 0
    premise_failures = 0
    if check_lcd:
        radius_ok = np.linalg.norm(ts, axis=1) <= _TWO_PI * big_d * (1.0 + 1e-12)
        scaled_norm = np.linalg.norm(ph, axis=1) / _TWO_PI  # ||t/2pi . a||
        threshold = np.minimum(gamma * scaled_norm, alpha)
        premise = np.sqrt(dist_sq) >= threshold - slack
        premise_failures = int(np.count_nonzero(radius_ok & ~premise))
        active = radius_ok & premise
        lcd_checks = int(np.count_nonzero(active))
        lcd_envelope = np.exp(-4.0 * threshold * threshold)
        bad = active & (h_vals > lcd_envelope + slack)
        i = _first_violation(bad)
        if i is not None:
            raise ChainViolationError(
                "denominator_envelope", ts[i], h_vals[i], lcd_envelope[i]
            )

    return PointwiseChainReport(
        n_points=ts.shape[0],
        cosine_checks=int(ph.size),
        envelope_checks=ts.shape[0],
        lcd_checks=lcd_checks,
        premise_failures=premise_failures,
        slack=slack,
    )


_TAG_ORDER = (
    "cp_cgap",
    "cp_gap",
    "ws_cgap_p",
    "ws_cgap_lambda",
    "ws_gap_lambda",
    "transfer_plain",
    "transfer_window",
    "transfer_refined",
    "lcd_cp",
    "lcd_lambda",
    "lcd_p",
    "lcd_m2",
)

# Which estimate each tag is an upper bound for.
_TAG_TARGET = {
    "cp_cgap": "q_h_p_kappa",
    "cp_gap": "q_h_p_kappa",
    "ws_cgap_p": "q",
    "ws_cgap_lambda": "q",
    "ws_gap_lambda": "q",
    "transfer_plain": "q",
    "transfer_window": "q",
    "transfer_refined": "q",
    "lcd_cp": "q_h_b_invd",
    "lcd_lambda": "q",
    "lcd_p": "q",
    "lcd_m2": "q",
}

_CSV_COLUMNS = (
    "instance",
    "tag",
    "value",
    "vacuous",
    "target",
    "target_value",
    "target_method",
    "target_stderr",
)


def _json_bound_value(v: float) -> dict:
    if math.isinf(v):
        return {"value": None, "vacuous": True}
    return {"value": v, "vacuous": bool(v > 1.0)}


@dataclass(frozen=True)
class BoundReport:
    """Evaluated bounds for one instance, next to their reference estimates.

    ``bounds`` maps tag -> value (``inf`` when the mass functional wiped
    out); ``references`` holds the exact or Monte Carlo estimates the tags
    are compared against, keyed by the names in ``_TAG_TARGET``.  Guards
    carry the validity flags (window-count size, denominator bracket) that
    the inequalities attach.
    """

    instance: str
    q_estimate: ConcentrationEstimate
    bounds: dict
    references: dict
    guards: dict
    parameters: dict
    constants: ConstantsConfig

    def vacuous(self, tag: str) -> bool:
        v = self.bounds[tag]
        return math.isinf(v) or v > 1.0

    def to_json_obj(self) -> dict:
        out_bounds = {}
        for tag in sorted(self.bounds):
            entry = _json_bound_value(self.bounds[tag])
            entry["target"] = _TAG_TARGET.get(tag, "q")
            out_bounds[tag] = entry
        return {
            "instance": self.instance,
            "q": self.q_estimate.to_json_obj(),
            "bounds": out_bounds,
            "references": {k: dict(v) for k, v in sorted(self.references.items())},
            "guards": dict(sorted(self.guards.items())),
            "parameters": dict(sorted(self.parameters.items())),
            "constants": self.constants.to_json_obj(),
        }

    def csv_rows(self) -> list:
        rows = []
        for tag in _TAG_ORDER:
            if tag not in self.bounds:
                continue
            v = self.bounds[tag]
            target = _TAG_TARGET.get(tag, "q")
            ref = self.references.get(target, {})
            rows.append(
                {
                    "instance": self.instance,
                    "tag": tag,
                    "value": "" if math.isinf(v) else repr(float(v)),
                    "vacuous": str(self.vacuous(tag)).lower(),
                    "target": target,
                    "target_value": repr(float(ref["value"])) if "value" in ref else "",
                    "target_method": ref.get("method", ""),
                    "target_stderr": repr(float(ref["stderr"]))
                    if "stderr" in ref
                    else "",
                }
            )
        return rows


def bound_report_csv(reports) -> str:
    """Render reports as one flat CSV string, rows sorted by (instance, tag)."""
    all_rows = []
    for rep in reports:
        all_rows.extend(rep.csv_rows())
    all_rows.sort(key=lambda row: (row["instance"], _TAG_ORDER.index(row["tag"])))
    lines = [",".join(_CSV_COLUMNS)]
    for row in all_rows:
        lines.append(",".join(row[col] for col in _CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def _estimate_q(
    x: DiscreteDistribution,
    a: WeightVector,
    tau: float,
    method: str,
    mc_samples: int,
    seed: int,
    exact_budget: int,
) -> ConcentrationEstimate:
    if method not in ("auto", "exact", "mc"):
        raise InputError(f"unknown concentration method {method!r}")
    if method in ("auto", "exact"):
        exact = exact_q_1d if a.dim == 1 else exact_q_multid
        try:
            return exact(x, a, tau, budget=exact_budget)
        except CapacityError:
            if method == "exact":
                raise
    return mc_q(WeightedSum(x, a), tau, mc_samples, seed)


def _reference_entry(est: ConcentrationEstimate, esseen: float | None) -> dict:
    entry = {"value": est.value, "method": est.method, "stderr": est.stderr}
    if esseen is not None:
        entry["esseen_upper"] = esseen
    return entry


def _smoothed_reference(
    a: WeightVector,
    power: float,
    window: float,
    mc_samples: int,
    seed: int,
    constants: ConstantsConfig,
) -> dict:
    """Monte Carlo estimate of Q(H^power, window) with a smoothing-integral cross-check."""
    law = smoothing_law(a, power)
    est = mc_q(law, window, mc_samples, seed)
    f_hat = h_char_fn(a)
    try:
        cross = esseen_upper_q(
            lambda ts: f_hat(ts) ** power, window, a.dim, constants.c_esseen
        )
        esseen_val = cross.value
    except (DomainError, CapacityError):
        esseen_val = None
    return _reference_entry(est, esseen_val)


def build_bound_report(
    x: DiscreteDistribution,
    a: WeightVector,
    tau: float,
    kappa: float,
    delta: float,
    r: int = 1,
    m: int = 1,
    s: int = 1,
    gamma: float | None = None,
    alpha: float | None = None,
    smoothing_power: float = 1.0,
    constants: ConstantsConfig | None = None,
    instance: str = "instance",
    seed=0,
    q_method: str = "auto",
    mc_samples: int = 500_000,
    search_budget: int = DEFAULT_SEARCH_BUDGET,
    exact_budget: int = DEFAULT_EXACT_BUDGET,
    theta_max: float | None = None,
) -> BoundReport:
    """Evaluate every applicable bound for one instance.

    The progression-class tags (cp_*, ws_*) are one-dimensional statements
    and are emitted only when the weights live on the line; the transfer
    tags work in any dimension, and the lcd_* tags additionally need gamma
    and alpha.  Randomness is derived from ``seed`` per reference estimate,
    so equal seeds give identical reports.
    """
    if x.dim != 1:
        raise DomainError("step distribution must live on the line")
    if not (tau > 0 and kappa > 0 and delta > 0):
        raise DomainError("tau, kappa and delta must be positive")
    c = _constants(constants)
    seed_int = int(seed) if not hasattr(seed, "value") else seed.value
    d = a.dim
    n = a.n

    g = symmetrize(x)
    ratio = tau / kappa
    p_val = tail_mass(g, ratio)
    lam_transfer = lambda_d(g, ratio, d)
    lam_guard = lambda_d(g, ratio, 1)

    bounds = {}
    references = {}
    guards = {
        "p_tau_over_kappa": p_val,
        "lambda_tau_over_kappa": lam_transfer,
        "lambda_guard_value": lam_guard,
        "lambda_guard_ok": bool(lam_guard >= 1.0),
    }
    parameters = {
        "tau": tau,
        "kappa": kappa,
        "delta": delta,
        "r": int(r),
        "m": int(m),
        "s": int(s),
        "n": n,
        "d": d,
        "b": float(smoothing_power),
        "seed": seed_int,
        "mc_samples": int(mc_samples),
    }

    q_est = _estimate_q(
        x, a, tau, q_method, mc_samples, derive_seed(seed_int, 1), exact_budget
    )
    references["q"] = _reference_entry(q_est, None)

    # Smoothed references.  The kappa-window pair for the plain and refined
    # transfers shares one derived seed so their comparison is coupled.
    q_h_p_kappa = _smoothed_reference(
        a, p_val, kappa, mc_samples, derive_seed(seed_int, 2), c
    )
    q_h_lambda_kappa = _smoothed_reference(
        a, lam_transfer, kappa, mc_samples, derive_seed(seed_int, 2), c
    )
    q_h_p_delta = _smoothed_reference(
        a, p_val, delta, mc_samples, derive_seed(seed_int, 3), c
    )
    references["q_h_p_kappa"] = q_h_p_kappa
    references["q_h_lambda_kappa"] = q_h_lambda_kappa
    references["q_h_p_delta"] = q_h_p_delta

    bounds["transfer_plain"] = transfer_bound_plain(q_h_p_kappa["value"], c)
    bounds["transfer_window"] = transfer_bound_window(
        q_h_p_delta["value"], kappa, delta, d, c
    )
    bounds["transfer_refined"] = transfer_bound_refined(
        q_h_lambda_kappa["value"], lam_transfer, c
    )

    if d == 1:
        m_star = spectral_measure(a.rows)
        beta_delta = beta_rm(m_star, delta, r, m, search_budget)
        gamma_delta = gamma_rs(m_star, delta, r, s, search_budget)
        beta_kappa = beta_rm(m_star, kappa, r, m, search_budget)
        gamma_kappa = gamma_rs(m_star, kappa, r, s, search_budget)
        guards["beta_star_delta"] = beta_delta.value
        guards["gamma_star_delta"] = gamma_delta.value
        guards["beta_star_kappa"] = beta_kappa.value
        guards["gamma_star_kappa"] = gamma_kappa.value

        cp_intensity = 0.5 * n * p_val
        if cp_intensity > 0:
            bounds["cp_cgap"] = compound_poisson_bound_cgap(
                cp_intensity, beta_kappa.value, r, m, c
            )
            bounds["cp_gap"] = compound_poisson_bound_gap(
                cp_intensity, gamma_kappa.value, r, s, c
            )
        else:
            bounds["cp_cgap"] = math.inf
            bounds["cp_gap"] = math.inf
        bounds["ws_cgap_p"] = weighted_sum_bound_cgap(
            kappa, delta, n, p_val, beta_delta.value, r, m, c
        )
        bounds["ws_cgap_lambda"] = weighted_sum_bound_cgap_tail_free(
            kappa, delta, n, beta_delta.value, r, m, c
        )
        bounds["ws_gap_lambda"] = weighted_sum_bound_gap_tail_free(
            kappa, delta, n, gamma_delta.value, r, s, c
        )

    if gamma is not None or alpha is not None:
        if gamma is None or alpha is None:
            raise InputError("gamma and alpha must be supplied together")
        lcd_params = LcdParams(gamma=gamma, alpha=alpha, theta_max=theta_max)
        lcd = compute_lcd(a, lcd_params, seed=derive_seed(seed_int, 4))
        big_d = lcd.d_lower
        guards["lcd_d_lower"] = big_d
        guards["lcd_certified"] = bool(lcd.certified)
        guards["lcd_converged"] = bool(lcd.converged)
        parameters["gamma"] = gamma
        parameters["alpha"] = alpha
        parameters["D"] = big_d
        if big_d > 0:
            _, det_gram = a.gram()
            p_td = tail_mass(g, tau * big_d)
            lam_td = lambda_d(g, tau * big_d, d)
            m2_td = truncated_second_moment(g, tau * big_d)
            guards["p_tau_d"] = p_td
            guards["lambda_tau_d"] = lam_td
            guards["m2_tau_d"] = m2_td
            via_lambda, via_p, via_m2 = lcd_weighted_sum_bounds(
                lam_td, p_td, m2_td, gamma, big_d, alpha, det_gram, d, c
            )
            bounds["lcd_lambda"] = via_lambda
            bounds["lcd_p"] = via_p
            bounds["lcd_m2"] = via_m2
            bounds["lcd_cp"] = lcd_compound_poisson_bound(
                smoothing_power, gamma, big_d, alpha, det_gram, d, c
            )
            references["q_h_b_invd"] = _smoothed_reference(
                a,
                smoothing_power,
                1.0 / big_d,
                mc_samples,
                derive_seed(seed_int, 5),
                c,
            )
        else:
            for tag in ("lcd_cp", "lcd_lambda", "lcd_p", "lcd_m2"):
                bounds[tag] = math.inf

    return BoundReport(
        instance=instance,
        q_estimate=q_est,
        bounds=bounds,
        references=references,
        guards=guards,
        parameters=parameters,
        constants=c,
    )


def _log_capacity(q: float, kappa: float, delta: float) -> float:
    return abs(math.log(q)) + math.log(kappa / delta) + 1.0


def _structure_budgets(
    q_coords: list,
    f_val: float,
    n: int,
    n_prime: int,
    kappa: float,
    delta: float,
    r: int,
    norm_a: float,
    d: int,
    a_exp: float,
    b_exp: float,
    b_n: float,
    c: ConstantsConfig,
) -> dict:
    """Budgets that involve the step functional ``f_val`` (tail mass or its
    window-count replacement).  Per-coordinate entries are lists of length d.
    """
    rho = delta / kappa
    lead = 2.0 * c.c9 ** (r + 1)
    rank_term = (r + 1) ** (2.5 * r)
    if f_val > 0.0:
        n_prime_min = [
            (lead * rank_term * kappa / (q * delta)) ** (2.0 / (r + 1)) / f_val
            for q in q_coords
        ]
        cap_points = [
            lead * kappa / (q * delta * math.sqrt(f_val * n_prime)) + 1.0
            for q in q_coords
        ]
        size_product = float(
            np.prod(
                [
                    max(c.c_d / (q * rho * math.sqrt(n_prime * f_val)), 1.0)
                    for q in q_coords
                ]
            )
        )
        uncovered_log = [
            c.c_d * _log_capacity(q, kappa, delta) ** 3 / f_val for q in q_coords
        ]
        uncovered_parametric = (
            c.c_d * d * ((a_exp + b_exp) * math.log(b_n) + 1.0) ** 3 / f_val
        )
    else:
        n_prime_min = [math.inf] * d
        cap_points = [math.inf] * d
        size_product = math.inf
        uncovered_log = [math.inf] * d
        uncovered_parametric = math.inf
    feasible = all(v < n_prime for v in n_prime_min) and n_prime <= n
    inflate_sym = (c.c10 * r) ** (1.5 * r * r)
    inflate_proper = (c.c11 * r) ** (7.5 * r * r)
    inflate_small_gens = (c.c12 * r) ** (10.5 * r * r)
    return {
        "feasible": feasible,
        "n_prime_min": n_prime_min,
        "cap_points": cap_points,
        "size_capped": [c.c_d * v for v in cap_points],
        "size_symmetric": [inflate_sym * v for v in cap_points],
        "size_proper": [inflate_proper * v for v in cap_points],
        "size_proper_small_gens": [inflate_small_gens * v for v in cap_points],
        "generator_scale": 2.0 * r * norm_a / math.sqrt(n_prime),
        "size_product": size_product,
        "uncovered_log": uncovered_log,
        "uncovered_log_total": float(sum(uncovered_log)),
        "uncovered_parametric": uncovered_parametric,
    }


@dataclass(frozen=True)
class InversePrincipleReport:
    """Structure budgets implied by a large concentration value, next to what
    a heuristic witness progression actually achieves.

    ``budgets["shared"]`` holds the entries free of the step functional;
    ``budgets["tail_mass"]`` and ``budgets["tail_free"]`` hold the two
    parallel families, the second valid only under the recorded window-count
    guard.  Implicit multiplicative constants are set to the c_d entry of
    the constants table; explicitly named constants use their own entries.
    """

    instance: str
    n: int
    dim: int
    n_prime: int
    q: dict
    q_coords: list
    p_value: float
    lambda1_value: float
    lambda_guard_ok: bool
    budgets: dict
    witness: dict | None
    parameters: dict
    constants: ConstantsConfig

    def to_json_obj(self) -> dict:
        def clean(v):
            if isinstance(v, float) and math.isinf(v):
                return None
            if isinstance(v, list):
                return [clean(u) for u in v]
            if isinstance(v, dict):
                return {k: clean(u) for k, u in sorted(v.items())}
            return v

        return {
            "instance": self.instance,
            "n": self.n,
            "dim": self.dim,
            "n_prime": self.n_prime,
            "q": dict(self.q),
            "q_coords": [dict(e) for e in self.q_coords],
            "p_value": self.p_value,
            "lambda1_value": self.lambda1_value,
            "lambda_guard_ok": self.lambda_guard_ok,
            "budgets": clean(self.budgets),
            "witness": clean(self.witness) if self.witness is not None else None,
            "parameters": dict(sorted(self.parameters.items())),
            "constants": self.constants.to_json_obj(),
        }


def inverse_principle_report(
    x: DiscreteDistribution,
    a: WeightVector,
    tau: float,
    kappa: float,
    delta: float,
    rank: int,
    witness=None,
    n_prime: int | None = None,
    a_exp: float = 1.0,
    b_exp: float = 0.0,
    b_n: float | None = None,
    witness_cap: int | None = None,
    constants: ConstantsConfig | None = None,
    instance: str = "instance",
    seed=0,
    q_method: str = "auto",
    mc_samples: int = 200_000,
    search_budget: int = DEFAULT_SEARCH_BUDGET,
    exact_budget: int = DEFAULT_EXACT_BUDGET,
) -> InversePrincipleReport:
    """Compare the structure budgets against an actual covering progression.

    A large concentration value forces most weights into a small-rank,
    small-size progression neighborhood; this report evaluates every size,
    rank and uncovered-count budget at the instance's concentration value
    and, on the line, searches for a witness progression to put its actual
    rank, size and uncovered count side by side.  ``witness`` may be a
    precomputed search result; otherwise one is searched with cap
    ``witness_cap`` (derived from the cap budget when omitted).
    """
    if x.dim != 1:
        raise DomainError("step distribution must live on the line")
    if not (tau > 0 and kappa > 0 and delta > 0):
        raise DomainError("tau, kappa and delta must be positive")
    if delta > min(kappa, tau):
        raise DomainError("delta must not exceed min(kappa, tau)")
    if not isinstance(rank, (int, np.integer)) or rank < 0:
        raise DomainError("rank must be a nonnegative integer")
    c = _constants(constants)
    seed_int = int(seed) if not hasattr(seed, "value") else seed.value
    d = a.dim
    n = a.n
    if n_prime is None:
        n_prime = n
    n_prime = int(n_prime)
    if not 1 <= n_prime <= n:
        raise DomainError("n_prime must lie in [1, n]")
    if b_n is None:
        b_n = float(n)
    if not b_n > 1.0:
        raise DomainError("b_n must exceed 1")

    g = symmetrize(x)
    ratio = tau / kappa
    p_val = tail_mass(g, ratio)
    lam1 = lambda_d(g, ratio, 1)

    q_all = _estimate_q(
        x, a, tau, q_method, mc_samples, derive_seed(seed_int, 9), exact_budget
    )
    q_entries = []
    if d == 1:
        q_entries.append(_reference_entry(q_all, None))
    else:
        for j in range(d):
            est = _estimate_q(
                x,
                a.coordinate(j),
                tau,
                q_method,
                mc_samples,
                derive_seed(seed_int, 10 + j),
                exact_budget,
            )
            q_entries.append(_reference_entry(est, None))
    q_coords = [e["value"] for e in q_entries]

    shared = {
        "rank_log": [c.c_d * _log_capacity(q, kappa, delta) for q in q_coords],
        "rank_parametric": c.c_d * d * ((a_exp + b_exp) * math.log(b_n) + 1.0),
        "size_single": max(c.c_d / (q_all.value * math.sqrt(n_prime)), 1.0),
        "uncovered_pair_count": 2 * n_prime,
    }
    shared["rank_log_total"] = float(sum(shared["rank_log"]))
    budgets = {
        "shared": shared,
        "tail_mass": _structure_budgets(
            q_coords, p_val, n, n_prime, kappa, delta, rank,
            a.norm(), d, a_exp, b_exp, b_n, c,
        ),
        "tail_free": _structure_budgets(
            q_coords, lam1, n, n_prime, kappa, delta, rank,
            a.norm(), d, a_exp, b_exp, b_n, c,
        ),
    }
    budgets["tail_free"]["guard_value"] = lam1
    budgets["tail_free"]["guard_ok"] = bool(lam1 >= 1.0)

    witness_block = None
    if d == 1:
        half = half_empirical_measure(a.rows)
        if witness is None:
            if witness_cap is None:
                cap_candidates = [
                    budgets["tail_mass"]["cap_points"][0],
                    budgets["tail_free"]["cap_points"][0],
                ]
                finite = [v for v in cap_candidates if math.isfinite(v)]
                if finite:
                    witness_cap = int(max(1, min(min(finite), 4096.0)))
                else:
                    witness_cap = 3 ** min(rank, 6)
            witness = beta_rm(half, delta, int(rank), int(witness_cap), search_budget)
        wit_obj = witness.witness if hasattr(witness, "witness") else witness
        points = wit_obj.points()
        unc = uncovered_mass(half, points, delta)
        count = unc * 2.0 * n
        witness_block = {
            "rank": int(getattr(wit_obj, "rank", 0)),
            "size": int(points.shape[0]),
            "uncovered_mass": unc,
            "uncovered_count": count,
            "within_pair_budget": bool(count <= shared["uncovered_pair_count"] + 1e-9),
            "delta": delta,
        }

    return InversePrincipleReport(
        instance=instance,
        n=n,
        dim=d,
        n_prime=n_prime,
        q=_reference_entry(q_all, None),
        q_coords=q_entries,
        p_value=p_val,
        lambda1_value=lam1,
        lambda_guard_ok=bool(lam1 >= 1.0),
        budgets=budgets,
        witness=witness_block,
        parameters={
            "tau": tau,
            "kappa": kappa,
            "delta": delta,
            "rank": int(rank),
            "a_exp": a_exp,
            "b_exp": b_exp,
            "b_n": b_n,
            "seed": seed_int,
            "mc_samples": int(mc_samples),
        },
        constants=c,
    )


__all__ = [
    "ConstantsConfig",
    "DEFAULT_CONSTANTS",
    "BoundReport",
    "InversePrincipleReport",
    "PointwiseChainReport",
    "bound_report_csv",
    "build_bound_report",
    "compound_poisson_bound_cgap",
    "compound_poisson_bound_gap",
    "h_char_fn",
    "inverse_principle_report",
    "lcd_compound_poisson_bound",
    "lcd_weighted_sum_bounds",
    "smoothing_law",
    "transfer_bound_plain",
    "transfer_bound_refined",
    "transfer_bound_window",
    "verify_pointwise_chain",
    "weighted_sum_bound_cgap",
    "weighted_sum_bound_cgap_tail_free",
    "weighted_sum_bound_gap_tail_free",
]
