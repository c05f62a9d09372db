"""Batch front end: load instance files, dispatch computations, emit reports.

Exit codes: 0 success, 1 verification failure, 2 malformed input or domain
error, 3 enumeration budget exceeded.  All randomness flows from --seed;
equal invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from ._common import derive_seed
from .bounds import ConstantsConfig, bound_report_csv, build_bound_report
from .concentration import (
    WeightedSum,
    esseen_upper_q,
    exact_q_1d,
    exact_q_multid,
    mc_q,
    weighted_sum_char_fn,
)
from .distributions import half_empirical_measure
from .errors import (
    AnticoncError,
    CapacityError,
    ChainViolationError,
    DomainError,
    InputError,
)
from .instances import load_instances
from .lcd import LcdParams, compute_lcd
from .progressions import beta_rm, gamma_rs
from .verify import run_verification

SCHEMA_VERSION = "1"


def _thread_count() -> int:
    raw = os.environ.get("ANTICONC_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"ANTICONC_THREADS must be an integer, got {raw!r}")
    if n < 1:
        raise InputError("ANTICONC_THREADS must be at least 1")
    return n


def _emit(text: str, out_path) -> None:
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _render_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _load_constants(args, spec=None) -> ConstantsConfig:
    table = {}
    if args.constants:
        path = Path(args.constants)
        try:
            table.update(json.loads(path.read_text()))
        except OSError as exc:
            raise InputError(f"cannot read constants file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: malformed JSON: {exc}") from exc
    if spec is not None:
        table.update(spec.param("constants", {}))
    return ConstantsConfig.from_json_obj(table)


def _single_instance(path):
    specs = load_instances(path)
    if len(specs) != 1:
        raise InputError("this command expects a single instance file")
    return specs[0]


def cmd_q(args) -> int:
    spec = _single_instance(args.instance)
    tau = spec.require("tau")
    constants = _load_constants(args, spec)
    if args.method == "exact":
        fn = exact_q_1d if spec.a.dim == 1 else exact_q_multid
        budget = args.budget if args.budget else 20_000_000
        est = fn(spec.x, spec.a, tau, budget=budget)
    elif args.method == "mc":
        samples = args.budget if args.budget else 200_000
        est = mc_q(WeightedSum(spec.x, spec.a), tau, samples, derive_seed(args.seed, 0))
    else:
        f_hat = weighted_sum_char_fn(spec.x, spec.a)
        est = esseen_upper_q(f_hat, tau, spec.a.dim, constants.c_esseen)
    obj = {"spec_version": SCHEMA_VERSION, "instance": spec.id}
    obj.update(est.to_json_obj())
    _emit(_render_json(obj), args.out)
    return 0


def cmd_lcd(args) -> int:
    spec = _single_instance(args.instance)
    gamma, alpha = spec.require("gamma", "alpha")
    params = LcdParams(gamma=gamma, alpha=alpha, theta_max=spec.param("theta_max"))
    res = compute_lcd(spec.a, params, seed=derive_seed(args.seed, 0))
    obj = {
        "spec_version": SCHEMA_VERSION,
        "instance": spec.id,
        "lcd": res.to_json_obj(),
    }
    _emit(_render_json(obj), args.out)
    return 0


def _one_bound_report(args, spec, idx):
    tau, kappa, delta = spec.require("tau", "kappa", "delta")
    constants = _load_constants(args, spec)
    return build_bound_report(
        spec.x,
        spec.a,
        tau,
        kappa,
        delta,
        r=int(spec.param("r", 1)),
        m=int(spec.param("m", 1)),
        s=int(spec.param("s", 1)),
        gamma=spec.param("gamma"),
        alpha=spec.param("alpha"),
        smoothing_power=spec.param("smoothing_power", 1.0),
        constants=constants,
        instance=spec.id,
        seed=derive_seed(args.seed, idx),
        mc_samples=args.budget if args.budget else 100_000,
        theta_max=spec.param("theta_max"),
    )


def cmd_bounds(args) -> int:
    specs = sorted(load_instances(args.instance), key=lambda s: s.id)
    threads = _thread_count()
    if threads > 1 and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(
                pool.map(lambda pair: _one_bound_report(args, *pair[::-1]),
                         enumerate(specs))
            )
    else:
        reports = [_one_bound_report(args, spec, idx) for idx, spec in enumerate(specs)]
    if args.format == "csv":
        _emit(bound_report_csv(reports), args.out)
    else:
        obj = {
            "spec_version": SCHEMA_VERSION,
            "reports": [rep.to_json_obj() for rep in reports],
        }
        _emit(_render_json(obj), args.out)
    return 0


def cmd_gapfit(args) -> int:
    spec = _single_instance(args.instance)
    if spec.a.dim != 1:
        raise DomainError("gapfit operates on one-dimensional weight vectors")
    window = spec.param("delta", spec.param("tau"))
    if window is None:
        raise InputError(f"instance {spec.id!r}: needs parameter delta (or tau)")
    r = int(spec.param("r", 1))
    m = int(spec.param("m", 3))
    s = int(spec.param("s", 3))
    w = half_empirical_measure(spec.a.rows)
    n = spec.a.n
    beta = beta_rm(w, window, r, m)
    gfit = gamma_rs(w, window, r, s)
    obj = {
        "spec_version": SCHEMA_VERSION,
        "instance": spec.id,
        "window": window,
        "beta": {
            "value": beta.value,
            "uncovered_count": beta.value * 2.0 * n,
            "exact": beta.exact,
            "witness": beta.witness.to_json_obj(),
        },
        "gamma_fit": {
            "value": gfit.value,
            "uncovered_count": gfit.value * 2.0 * n,
            "exact": gfit.exact,
            "witness": gfit.witness.to_json_obj(),
        },
    }
    _emit(_render_json(obj), args.out)
    return 0


def cmd_verify(args) -> int:
    budget = args.budget if args.budget else 2_000_000
    report = run_verification(args.corpus, seed=args.seed, exact_budget=budget)
    if args.format == "json":
        text = _render_json(
            {"spec_version": SCHEMA_VERSION, **report.to_json_obj()}
        )
    else:
        lines = report.summary_lines()
        if not report.passed:
            first = report.failures[0]
            lines.append("first counterexample:")
            lines.append(json.dumps(first.to_json_obj(), sort_keys=True))
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anticonc",
        description="Concentration functions, progression coverage, "
        "least common denominators, and bound reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, instance=True):
        if instance:
            p.add_argument("instance", help="instance file (or directory of files)")
        p.add_argument("--seed", type=int, default=0, help="master random seed")
        p.add_argument("--constants", help="JSON file overriding bound constants")
        p.add_argument("--out", help="write output to this path instead of stdout")
        p.add_argument(
            "--format", choices=("json", "csv"), default="json", help="output format"
        )
        p.add_argument(
            "--budget",
            type=int,
            default=None,
            help="enumeration budget or Monte Carlo sample count",
        )

    p_q = sub.add_parser("q", help="concentration value of one instance")
    p_q.add_argument(
        "--method", choices=("exact", "mc", "esseen"), default="exact"
    )
    common(p_q)
    p_q.set_defaults(fn=cmd_q)

    p_lcd = sub.add_parser("lcd", help="least common denominator bracket")
    common(p_lcd)
    p_lcd.set_defaults(fn=cmd_lcd)

    p_b = sub.add_parser("bounds", help="bound report for an instance or grid")
    common(p_b)
    p_b.set_defaults(fn=cmd_bounds)

    p_g = sub.add_parser("gapfit", help="fit a covering progression to the weights")
    common(p_g)
    p_g.set_defaults(fn=cmd_gapfit)

    p_v = sub.add_parser("verify", help="run the self-verification suite")
    p_v.add_argument(
        "corpus",
        nargs="?",
        default=None,
        help="corpus directory (bundled corpus when omitted)",
    )
    p_v.add_argument("--seed", type=int, default=0, help="master random seed")
    p_v.add_argument("--out", help="write output to this path instead of stdout")
    p_v.add_argument(
        "--format", choices=("text", "json"), default="text", help="output format"
    )
    p_v.add_argument(
        "--budget", type=int, default=None, help="exact enumeration budget"
    )
    p_v.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return 3
    except ChainViolationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1
    except AnticoncError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
