"""Self-verification suite: exact, constant-free facts checked over a corpus.

Each check either holds to stated tolerance on every applicable instance or
the report carries a serialized counterexample.  Monte Carlo enters nowhere;
all quantities here are exact enumerations, so the verdict cannot depend on
the seed (the seed only varies the sampling of chain grid points, and the
chain facts hold at every point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._common import derive_seed, make_rng
from .bounds import verify_pointwise_chain
from .concentration import (
    exact_q_1d,
    exact_q_multid,
    regularity_check,
    weighted_sum_distribution,
)
from .distributions import (
    lambda_d,
    spectral_measure,
    symmetrize,
    tail_mass,
    truncated_second_moment,
)
from .errors import CapacityError, ChainViolationError, InputError
from .instances import load_corpus
from .lcd import LcdParams, compute_lcd, violation_condition
from .progressions import beta_rm, gamma_rs, uncovered_mass

CHECK_NAMES = (
    "expected",
    "regularity",
    "chain",
    "lambda_ge_p",
    "m2_ge_p",
    "projection",
    "witness",
    "lcd_agreement",
)

_SLACK = 1e-12


@dataclass(frozen=True)
class CheckResult:
    instance: str
    check: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "instance": self.instance,
            "check": self.check,
            "passed": self.passed,
            "detail": dict(sorted(self.detail.items())),
        }


@dataclass
class VerificationReport:
    results: list
    n_instances: int
    seed: int

    @property
    def failures(self) -> list:
        return [r for r in self.results if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def counts(self) -> dict:
        out = {name: [0, 0] for name in CHECK_NAMES}
        for r in self.results:
            bucket = out.setdefault(r.check, [0, 0])
            bucket[0 if r.passed else 1] += 1
        return out

    def summary_lines(self) -> list:
        lines = [f"instances: {self.n_instances}"]
        for name, (ok, bad) in sorted(self.counts().items()):
            if ok == bad == 0:
                continue
            verdict = "PASS" if bad == 0 else "FAIL"
            lines.append(f"{verdict} {name}: {ok} ok, {bad} failed")
        lines.append("result: " + ("PASS" if self.passed else "FAIL"))
        return lines

    def to_json_obj(self) -> dict:
        return {
            "n_instances": self.n_instances,
            "seed": self.seed,
            "passed": self.passed,
            "results": [r.to_json_obj() for r in self.results],
        }


def _fail(instance, check, **detail) -> CheckResult:
    return CheckResult(instance, check, False, detail)


def _ok(instance, check, **detail) -> CheckResult:
    return CheckResult(instance, check, True, detail)


def _functional_ratios(g) -> list:
    """Deterministic probe ratios spanning the support scale of ``g``."""
    mags = np.abs(g.atoms).max(axis=1)
    mags = np.unique(mags[mags > 0])
    if mags.size == 0:
        return [1.0]
    lo, hi = float(mags[0]), float(mags[-1])
    probes = {0.5 * lo, lo, 0.5 * (lo + hi), hi, 2.0 * hi}
    return sorted(p for p in probes if p > 0)


def _exact_estimate(spec, tau, budget):
    fn = exact_q_1d if spec.a.dim == 1 else exact_q_multid
    return fn(spec.x, spec.a, tau, budget=budget)


def _check_expected(spec, budget) -> list:
    results = []
    g = symmetrize(spec.x)
    for key, entries in sorted(spec.expected.items()):
        if isinstance(entries, dict):
            entries = [entries]
        if not isinstance(entries, list):
            results.append(_fail(spec.id, "expected", field=key, reason="not an object or list"))
            continue
        for entry in entries:
            try:
                results.append(_check_expected_entry(spec, g, key, entry, budget))
            except CapacityError:
                continue
    return results


def _check_expected_entry(spec, g, key, entry, budget) -> CheckResult:
    tol = float(entry.get("tol", 1e-9))
    if key == "q":
        est = _exact_estimate(spec, float(entry["tau"]), budget)
        got = est.value
    elif key == "p":
        got = tail_mass(g, float(entry["ratio"]))
    elif key == "lambda1":
        got = lambda_d(g, float(entry["ratio"]), 1)
    elif key == "m2":
        got = truncated_second_moment(g, float(entry["ratio"]))
    elif key == "lcd":
        params = LcdParams(
            gamma=float(entry["gamma"]),
            alpha=float(entry["alpha"]),
            theta_max=entry.get("theta_max"),
        )
        res = compute_lcd(spec.a, params)
        value = float(entry["value"])
        tol = float(entry.get("tol", 1e-5))
        inside = res.d_lower - tol <= value and (
            math.isinf(res.d_upper) or value <= res.d_upper + tol
        )
        if inside and res.converged:
            return _ok(spec.id, "expected", field="lcd", value=value)
        return _fail(
            spec.id,
            "expected",
            field="lcd",
            value=value,
            d_lower=res.d_lower,
            d_upper=res.d_upper,
            converged=res.converged,
        )
    elif key == "beta":
        w = spectral_measure(spec.a.rows)
        got = beta_rm(w, float(entry["tau"]), int(entry["r"]), int(entry["m"])).value
        tol = float(entry.get("tol", 1e-12))
    elif key == "gamma_fit":
        w = spectral_measure(spec.a.rows)
        got = gamma_rs(w, float(entry["tau"]), int(entry["r"]), int(entry["s"])).value
        tol = float(entry.get("tol", 1e-12))
    else:
        return _fail(spec.id, "expected", field=key, reason="unknown expected field")
    want = float(entry["value"])
    if abs(got - want) <= tol:
        return _ok(spec.id, "expected", field=key, value=want)
    return _fail(spec.id, "expected", field=key, want=want, got=got, tol=tol)


def _check_regularity(spec, budget) -> list:
    tau = spec.param("tau")
    if tau is None:
        return []
    try:
        fa = weighted_sum_distribution(spec.x, spec.a, budget=budget)
    except CapacityError:
        return []
    results = []
    for mu_f, lam_f in ((2.0, 1.0), (3.7, 1.45)):
        rc = regularity_check(fa, mu_f * tau, lam_f * tau)
        if rc.holds:
            results.append(_ok(spec.id, "regularity", mu=mu_f * tau, lam=lam_f * tau))
        else:
            results.append(
                _fail(
                    spec.id,
                    "regularity",
                    mu=mu_f * tau,
                    lam=lam_f * tau,
                    q_mu=rc.q_mu,
                    q_lambda=rc.q_lambda,
                    factor=rc.factor,
                )
            )
    return results


def _chain_grid(spec, rng, lcd_radius) -> np.ndarray:
    d = spec.a.dim
    scale = float(np.abs(spec.a.rows).max())
    span = max(8.0, 4.0 * math.pi / max(scale, 1e-9))
    if lcd_radius is not None:
        span = max(span, 2.2 * math.pi * lcd_radius)
    if d == 1:
        base = np.linspace(-span, span, 401)
        extra = rng.uniform(-span, span, size=1600)
        return np.concatenate([base, extra])[:, None]
    base = np.zeros((8 * d + 1, d))
    for j in range(d):
        vals = np.linspace(-span, span, 9)[1:]
        base[1 + 8 * j : 1 + 8 * (j + 1), j] = vals
    extra = rng.uniform(-span, span, size=(1200, d))
    return np.vstack([base, extra])


def _check_chain(spec, seed) -> list:
    rng = make_rng(derive_seed(seed, 17))
    gamma = spec.param("gamma")
    alpha = spec.param("alpha")
    lcd = None
    if gamma is not None and alpha is not None and spec.a.dim <= 3:
        lcd = compute_lcd(
            spec.a, LcdParams(gamma=gamma, alpha=alpha, theta_max=spec.param("theta_max"))
        )
    grid = _chain_grid(spec, rng, None if lcd is None else lcd.d_lower)
    try:
        if lcd is not None and lcd.d_lower > 0:
            rep = verify_pointwise_chain(
                spec.a, grid, gamma=gamma, alpha=alpha, big_d=lcd.d_lower
            )
            if lcd.certified and rep.premise_failures:
                return [
                    _fail(
                        spec.id,
                        "chain",
                        reason="denominator premise failed below certified level",
                        premise_failures=rep.premise_failures,
                        d_lower=lcd.d_lower,
                    )
                ]
        else:
            rep = verify_pointwise_chain(spec.a, grid)
    except ChainViolationError as exc:
        return [
            _fail(
                spec.id,
                "chain",
                label=exc.label,
                t=np.asarray(exc.t).tolist(),
                lhs=exc.lhs,
                rhs=exc.rhs,
            )
        ]
    return [_ok(spec.id, "chain", n_points=rep.n_points, lcd_checks=rep.lcd_checks)]


def _check_functionals(spec) -> list:
    g = symmetrize(spec.x)
    results = []
    for ratio in _functional_ratios(g):
        p = tail_mass(g, ratio)
        lam1 = lambda_d(g, ratio, 1)
        lam_d = lambda_d(g, ratio, spec.a.dim)
        m2 = truncated_second_moment(g, ratio)
        if lam1 >= p - _SLACK and lam_d >= p - _SLACK:
            results.append(_ok(spec.id, "lambda_ge_p", ratio=ratio))
        else:
            results.append(
                _fail(spec.id, "lambda_ge_p", ratio=ratio, p=p, lambda1=lam1, lambda_d=lam_d)
            )
        if m2 >= p - _SLACK:
            results.append(_ok(spec.id, "m2_ge_p", ratio=ratio))
        else:
            results.append(_fail(spec.id, "m2_ge_p", ratio=ratio, p=p, m2=m2))
    return results


def _check_projection(spec, budget) -> list:
    if spec.a.dim < 2:
        return []
    tau = spec.param("tau")
    if tau is None:
        return []
    try:
        full = exact_q_multid(spec.x, spec.a, tau, budget=budget).value
        coords = [
            exact_q_1d(spec.x, spec.a.coordinate(j), tau, budget=budget).value
            for j in range(spec.a.dim)
        ]
    except CapacityError:
        return []
    bound = min(coords)
    if full <= bound + _SLACK:
        return [_ok(spec.id, "projection", q=full, coordinate_min=bound)]
    return [_fail(spec.id, "projection", q=full, coordinate_min=bound)]


def _check_witness(spec) -> list:
    if spec.a.dim != 1:
        return []
    w = spectral_measure(spec.a.rows)
    window = spec.param("delta", spec.param("tau", 1.0))
    r = int(spec.param("r", 1))
    m = int(spec.param("m", 3))
    results = []

    res = beta_rm(w, window, r, m)
    again = uncovered_mass(w, res.witness.points(), window)
    if again == res.value:
        results.append(_ok(spec.id, "witness", kind="replay", value=res.value))
    else:
        results.append(
            _fail(spec.id, "witness", kind="replay", value=res.value, replayed=again)
        )

    base = beta_rm(w, window, 0, 1)
    tail = tail_mass(w, window)
    if base.value == tail and base.exact:
        results.append(_ok(spec.id, "witness", kind="rank_zero", value=tail))
    else:
        results.append(
            _fail(spec.id, "witness", kind="rank_zero", value=base.value, tail=tail)
        )
    return results


def _scan_first_violation(a, params, theta, step) -> float | None:
    """Coarse one-dimensional scan for a violating scalar t, refined by bisection."""
    ts = np.arange(step, theta + step, step)
    hit = None
    for t in ts:
        if violation_condition(np.array([t]), a, params):
            hit = float(t)
            break
    if hit is None:
        return None
    lo, hi = max(hit - step, 0.0), hit
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if violation_condition(np.array([mid]), a, params):
            hi = mid
        else:
            lo = mid
    return hi


def _check_lcd_agreement(spec) -> list:
    gamma = spec.param("gamma")
    alpha = spec.param("alpha")
    if gamma is None or alpha is None:
        return []
    params = LcdParams(gamma=gamma, alpha=alpha, theta_max=spec.param("theta_max"))
    res = compute_lcd(spec.a, params)
    results = []
    if res.d_lower > res.d_upper + 1e-12:
        results.append(
            _fail(spec.id, "lcd_agreement", reason="inverted bracket",
                  d_lower=res.d_lower, d_upper=res.d_upper)
        )
        return results
    if res.witness_t is not None:
        if violation_condition(res.witness_t, spec.a, params):
            results.append(_ok(spec.id, "lcd_agreement", kind="witness"))
        else:
            results.append(
                _fail(spec.id, "lcd_agreement", kind="witness",
                      reason="witness does not violate",
                      t=np.asarray(res.witness_t).tolist())
            )
    if spec.a.dim == 1 and res.certified:
        theta = res.d_upper if math.isfinite(res.d_upper) else res.d_lower
        scan = _scan_first_violation(spec.a, params, theta * 1.001 + 1e-9, 1e-4)
        if scan is not None and scan < res.d_lower - 1e-6:
            results.append(
                _fail(spec.id, "lcd_agreement", kind="scan",
                      reason="scan found violation below certified floor",
                      scan=scan, d_lower=res.d_lower)
            )
        else:
            results.append(_ok(spec.id, "lcd_agreement", kind="scan", scan=scan))
    return results


def run_verification(
    corpus_dir=None, seed: int = 0, exact_budget: int = 2_000_000
) -> VerificationReport:
    """Run every check over the corpus; the verdict is seed-independent."""
    specs = load_corpus(corpus_dir)
    ids = [s.id for s in specs]
    if len(set(ids)) != len(ids):
        raise InputError("corpus has duplicate instance ids")
    results = []
    for idx, spec in enumerate(sorted(specs, key=lambda s: s.id)):
        inst_seed = derive_seed(int(seed), idx)
        results.extend(_check_expected(spec, exact_budget))
        results.extend(_check_regularity(spec, exact_budget))
        results.extend(_check_chain(spec, inst_seed))
        results.extend(_check_functionals(spec))
        results.extend(_check_projection(spec, exact_budget))
        results.extend(_check_witness(spec))
        results.extend(_check_lcd_agreement(spec))
    return VerificationReport(results=results, n_instances=len(specs), seed=int(seed))


__all__ = [
    "CHECK_NAMES",
    "CheckResult",
    "VerificationReport",
    "run_verification",
]
