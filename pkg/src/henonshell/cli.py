"""Command-line entry point.

Commands: constants, solve-radial, solve-ball, sweep, sobolev, moving-shell,
continuity, verify.  Configuration comes from a flat INI file ([problem],
[sweep], [grid], [solver], [output] sections); a handful of flags (--seed,
--out, --format, --threads) override the file.  Environment variables are
never consulted.  With a fixed config and seed, the emitted files are
byte-identical across runs.
"""

import argparse
import configparser
import math
import sys

import numpy as np

from . import experiments, io
from ._minimize import SolveOptions
from .ball import BallGroundstateSolver, minimize_full_quotient, trial_upper_bound
from .grids import build_axisym_grid, build_radial_grid
from .params import ProblemParams
from .radial import RadialGroundstateSolver, first_weighted_eigenvalue, minimize_radial_quotient
from .special import beta_fn, gamma_ratio, power_log_sup
from .weight import (
    breaking_radius,
    growth_constants,
    inner_shell_moment,
    shell_weight,
    shell_weight_integral,
    sobolev_constant_lower_bound,
    sphere_area,
)


class ConfigError(ValueError):
    pass


def _load_config(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    except configparser.Error as err:
        raise ConfigError(f"malformed config file {path}: {err}") from err
    return {section: dict(parser.items(section)) for section in parser.sections()}


def _get(cfg, section, key, cast, default=None, required=False):
    raw = cfg.get(section, {}).get(key)
    if raw is None:
        if required:
            raise ConfigError(f"missing required config key [{section}] {key}")
        return default
    try:
        if cast is bool:
            if raw.strip().lower() in ("1", "true", "yes", "on"):
                return True
            if raw.strip().lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return cast(raw)
    except ValueError as err:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from err


def _get_float_list(cfg, section, key, required=False):
    raw = cfg.get(section, {}).get(key)
    if raw is None:
        if required:
            raise ConfigError(f"missing required config key [{section}] {key}")
        return None
    try:
        return [float(item) for item in raw.replace(",", " ").split()]
    except ValueError as err:
        raise ConfigError(f"bad list for [{section}] {key}: {raw!r}") from err


def _problem_from_config(cfg):
    try:
        return ProblemParams(
            N=_get(cfg, "problem", "n", int, required=True),
            p=_get(cfg, "problem", "p", float, required=True),
            R=_get(cfg, "problem", "r", float, required=True),
            alpha=_get(cfg, "problem", "alpha", float, required=True),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _radial_kwargs(cfg, seed):
    return {
        "n": _get(cfg, "grid", "n", int, 1025),
        "grading_strength": _get(cfg, "grid", "grading_strength", float, 1.0),
        "max_iter": _get(cfg, "solver", "max_iter", int, 200_000),
        "quotient_tol": _get(cfg, "solver", "quotient_tol", float, 1e-10),
        "grad_tol": _get(cfg, "solver", "grad_tol", float, 1e-9),
        "patience": _get(cfg, "solver", "patience", int, 10),
        "seed": seed,
    }


def _ball_kwargs(cfg, seed):
    return {
        "n_r": _get(cfg, "grid", "n_r", int, 128),
        "n_theta": _get(cfg, "grid", "n_theta", int, 48),
        "grading_strength": _get(cfg, "grid", "grading_strength", float, 1.0),
        "angular_grading": _get(cfg, "grid", "angular_grading", bool, True),
        "extra_random_starts": _get(cfg, "solver", "extra_random_starts", int, 0),
        "max_iter": _get(cfg, "solver", "max_iter", int, 200_000),
        "quotient_tol": _get(cfg, "solver", "quotient_tol", float, 1e-10),
        "grad_tol": _get(cfg, "solver", "grad_tol", float, 1e-9),
        "patience": _get(cfg, "solver", "patience", int, 10),
        "seed": seed,
    }


def _seed(cfg, args):
    if args.seed is not None:
        return int(args.seed)
    return _get(cfg, "solver", "seed", int, 0)


def _out_format(cfg, args):
    if args.format is not None:
        return args.format
    return _get(cfg, "output", "format", str, "csv")


# ---------------------------------------------------------------------------
# commands


def cmd_constants(args):
    N, p = args.N, args.p
    lines = []
    area = sphere_area(N)
    lines.append(f"sphere_area = {io.fmt_cell(area)}")
    try:
        consts = growth_constants(N, p)
        lines.append(f"beta_exp = {io.fmt_cell(consts.beta_exp)}")
        lines.append(f"flux_upper = {io.fmt_cell(consts.flux_upper)}")
        if consts.kappa is None:
            lines.append(f"kappa: undefined for N = {N} (needs N >= 3)")
            lines.append(f"flux_lower: undefined for N = {N} (needs N >= 3)")
        else:
            lines.append(f"kappa = {io.fmt_cell(consts.kappa)}")
            lines.append(f"flux_lower = {io.fmt_cell(consts.flux_lower)}")
            lines.append(
                f"sobolev_lower_bound = {io.fmt_cell(sobolev_constant_lower_bound(N, p))}"
            )
            if args.sobolev_constant is not None:
                lines.append(
                    f"R0 = {io.fmt_cell(breaking_radius(N, p, args.sobolev_constant))}"
                )
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print("\n".join(lines))
    return 0


def _run_solve(args, kind):
    cfg = _load_config(args.config) if args.config else {}
    if not cfg and args.config is None:
        raise ConfigError(f"solve-{kind} requires --config")
    params = _problem_from_config(cfg)
    seed = _seed(cfg, args)
    out = args.out or _get(cfg, "output", "path", str, f"solve_{kind}")
    try:
        if kind == "radial":
            solver = RadialGroundstateSolver(**_radial_kwargs(cfg, seed)).fit(params)
            result = solver.result_
            if result is None:  # p = 1 eigenpath
                payload = {
                    "config": cfg, "status": "ok", "kind": "eigenvalue",
                    "result": {"eigenvalue": solver.eigenvalue_},
                }
                io.atomic_write_text(f"{out}.json", io.payload_json_text(payload))
                print(f"wrote {out}.json")
                return 0
        else:
            solver = BallGroundstateSolver(**_ball_kwargs(cfg, seed)).fit(params)
            result = solver.result_
    except Exception as err:
        payload = io.result_payload(None, cfg, status="error", error=err)
        io.atomic_write_text(f"{out}.json", io.payload_json_text(payload))
        print(f"solver failed: {err}", file=sys.stderr)
        return 1
    payload = io.result_payload(result, cfg)
    io.atomic_write_text(f"{out}.json", io.payload_json_text(payload))
    io.atomic_write_text(f"{out}.profile.csv", io.profile_csv_text(result))
    print(f"wrote {out}.json and {out}.profile.csv")
    return 0


def cmd_solve_radial(args):
    return _run_solve(args, "radial")


def cmd_solve_ball(args):
    return _run_solve(args, "ball")


def _write_records(records, out, fmt, extra_payload=None):
    if fmt == "json":
        rows = []
        for line in io.sweep_csv_text(records).strip().split("\n")[1:]:
            rows.append(line)
        payload = {"columns": io.SWEEP_COLUMNS, "rows": rows}
        if extra_payload:
            payload.update(extra_payload)
        io.atomic_write_text(out, io.payload_json_text(payload))
    else:
        io.atomic_write_text(out, io.sweep_csv_text(records))


def cmd_sweep(args):
    cfg = _load_config(args.config)
    template = _problem_from_config(cfg)
    alphas = sorted(_get_float_list(cfg, "sweep", "alphas", required=True))
    seed = _seed(cfg, args)
    rel_tol = _get(cfg, "sweep", "rel_tol", float, 1e-4)
    records = experiments.sweep_alpha(
        template, alphas,
        radial_solver=RadialGroundstateSolver(**_radial_kwargs(cfg, seed)),
        ball_solver=BallGroundstateSolver(**_ball_kwargs(cfg, seed)),
        rel_tol=rel_tol, workers=args.threads,
    )
    out = args.out or _get(cfg, "output", "path", str, "sweep.csv")
    _write_records(records, out, _out_format(cfg, args))
    print(f"wrote {out}")
    return 0 if all(r.status == "ok" for r in records) else 1


def cmd_sobolev(args):
    value = experiments.sobolev_constant(args.N, args.p, n=args.n)
    print(io.fmt_cell(value))
    return 0


def cmd_moving_shell(args):
    cfg = _load_config(args.config)
    alphas = sorted(_get_float_list(cfg, "sweep", "alphas", required=True))
    delta = _get(cfg, "sweep", "delta", float, required=True)
    N = _get(cfg, "problem", "n", int, 2)
    p = _get(cfg, "problem", "p", float, 3.0)
    seed = _seed(cfg, args)
    records, first_broken = experiments.moving_shell(
        delta, alphas, N=N, p=p,
        radial_solver=RadialGroundstateSolver(**_radial_kwargs(cfg, seed)),
        ball_solver=BallGroundstateSolver(**_ball_kwargs(cfg, seed)),
        workers=args.threads,
    )
    out = args.out or _get(cfg, "output", "path", str, "moving_shell.csv")
    _write_records(records, out, _out_format(cfg, args))
    label = io.fmt_cell(first_broken) if first_broken is not None else "none"
    print(f"wrote {out}; first broken alpha: {label}")
    return 0 if all(r.status == "ok" for r in records) else 1


def cmd_continuity(args):
    cfg = _load_config(args.config)
    alpha = _get(cfg, "problem", "alpha", float, required=True)
    N = _get(cfg, "problem", "n", int, 3)
    p = _get(cfg, "problem", "p", float, 2.0)
    R_list = _get_float_list(cfg, "sweep", "r_list", required=True)
    endpoint = _get(cfg, "sweep", "endpoint", float, required=True)
    seed = _seed(cfg, args)
    table = experiments.continuity_in_R(
        alpha, R_list, endpoint, N=N, p=p,
        ball_solver=BallGroundstateSolver(**_ball_kwargs(cfg, seed)),
    )
    lines = ["R,S_full,deviation"]
    for R, S, dev in zip(table.R_values, table.S_values, table.deviations):
        lines.append(f"{io.fmt_cell(R)},{io.fmt_cell(S)},{io.fmt_cell(dev)}")
    lines.append(f"{io.fmt_cell(table.endpoint)},{io.fmt_cell(table.endpoint_value)},0")
    out = args.out or _get(cfg, "output", "path", str, "continuity.csv")
    io.atomic_write_text(out, "\n".join(lines) + "\n")
    print(f"wrote {out}")
    return 0


# ---------------------------------------------------------------------------
# verify


def _verify_checks(quick):
    from scipy.integrate import quad

    rng = np.random.default_rng(12345)
    checks = []

    def check(name, fn):
        checks.append((name, fn))

    def beta_symmetry():
        worst = 0.0
        for _ in range(100):
            a, b = rng.uniform(0.1, 50.0, size=2)
            worst = max(worst, abs(beta_fn(a, b) - beta_fn(b, a)) / beta_fn(a, b))
        return worst < 1e-13, f"max rel asymmetry {worst:.2e}"

    check("beta function symmetry", beta_symmetry)

    def gamma_recurrence():
        worst = 0.0
        for _ in range(100):
            x = rng.uniform(0.1, 50.0)
            lhs = math.exp(math.lgamma(x + 1.0))
            rhs = x * math.exp(math.lgamma(x))
            worst = max(worst, abs(lhs - rhs) / abs(lhs))
        return worst < 1e-12, f"max rel deviation {worst:.2e}"

    check("gamma recurrence", gamma_recurrence)

    def weight_integral():
        worst = 0.0
        for _ in range(20):
            N = int(rng.integers(1, 6))
            params = ProblemParams(N=N, p=1.5, R=float(rng.uniform(0, 1)),
                                   alpha=float(rng.uniform(0, 200)))
            exact = shell_weight_integral(params)
            num, _ = quad(lambda r: shell_weight(params, r) * r ** (N - 1), 0.0, 1.0,
                          points=[params.R], limit=200)
            num *= sphere_area(N)
            worst = max(worst, abs(exact - num) / abs(exact))
        return worst < 1e-10, f"max rel deviation {worst:.2e}"

    check("weight integral closed form vs quadrature", weight_integral)

    def constants_identity():
        worst = 0.0
        for _ in range(50):
            N = int(rng.integers(3, 6))
            p = float(rng.uniform(1.05, 0.999 * ((N + 2) / (N - 2))))
            c = growth_constants(N, p)
            recon = (p + 1) / 2 * ((p - 1) / (2 * (p + 1))) ** ((p + 1) / 2) * c.flux_lower
            worst = max(worst, abs(recon - c.kappa) / c.kappa)
        return worst < 1e-12, f"max rel deviation {worst:.2e}"

    check("breaking-constant consistency identity", constants_identity)

    def sup_closed_form():
        r = np.linspace(1e-9, 1.0 - 1e-9, 1_000_001)
        worst = 0.0
        for eps in (0.05, 0.1, 0.25, 0.5, 1.0):
            brute = float(np.max(r**eps * np.sqrt(np.abs(np.log(r)))))
            worst = max(worst, abs(brute - power_log_sup(eps)))
        return worst < 1e-6, f"max abs deviation {worst:.2e}"

    check("power-log supremum closed form", sup_closed_form)

    def moment_quadrature():
        params = ProblemParams(N=3, p=2.0, R=0.7, alpha=37.5)
        exact = inner_shell_moment(params, 0.5)
        num, _ = quad(lambda r: (1 - r / params.R) ** (params.alpha - 1) * r**0.5,
                      0.0, params.R, limit=200)
        return abs(exact - num) / exact < 1e-9, f"rel deviation {abs(exact - num) / exact:.2e}"

    check("inner shell moment vs quadrature", moment_quadrature)

    if not quick:
        def radial_small():
            params = ProblemParams(N=3, p=2.0, R=0.0, alpha=0.0)
            grid = build_radial_grid(params, 513)
            res = minimize_radial_quotient(params, grid)
            from .shooting import shooting_best_constant
            oracle = shooting_best_constant(3, 2.0)
            rel = abs(res.S_rad - oracle) / oracle
            return rel < 2e-3, f"S_rad {res.S_rad:.6f} vs shooting {oracle:.6f} (rel {rel:.1e})"

        check("radial solver vs shooting oracle", radial_small)

        def eigen_small():
            params = ProblemParams(N=3, p=1.0, R=1.0, alpha=0.0)
            grid = build_radial_grid(params, 513)
            lam = first_weighted_eigenvalue(params, grid)
            rel = abs(lam - math.pi**2) / math.pi**2
            return rel < 1e-3, f"lambda_1 {lam:.6f} vs pi^2 (rel {rel:.1e})"

        check("weighted eigenvalue at alpha = 0", eigen_small)

        def ordering_small():
            params = ProblemParams(N=2, p=3.0, R=0.3, alpha=12.0)
            rad = minimize_radial_quotient(params, build_radial_grid(params, 385))
            full = minimize_full_quotient(params, build_axisym_grid(params, 96, 32))
            ok = full.S_full <= rad.S_rad * (1 + 1e-6)
            bound = trial_upper_bound(params)
            ok = ok and bound >= full.S_full * (1 - 1e-6)
            return ok, (f"S_full {full.S_full:.6f} <= S_rad {rad.S_rad:.6f}, "
                        f"trial bound {bound:.6f}")

        check("full vs radial ordering and trial bound", ordering_small)

        def symmetric_small():
            params = ProblemParams(N=3, p=2.0, R=1.0, alpha=10.0)
            rad = minimize_radial_quotient(params, build_radial_grid(params, 385))
            full = minimize_full_quotient(params, build_axisym_grid(params, 96, 32))
            gap = rad.S_rad - full.S_full
            ok = abs(gap) <= 1e-4 * rad.S_rad and full.asym_index <= 1e-5
            return ok, f"gap {gap:.2e}, asym {full.asym_index:.2e}"

        check("radial symmetry at R = 1", symmetric_small)

    return checks


def cmd_verify(args):
    failures = 0
    for name, fn in _verify_checks(args.quick):
        try:
            ok, detail = fn()
        except Exception as err:  # a crashed check is a failed check
            ok, detail = False, f"raised {err!r}"
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        failures += 0 if ok else 1
    print(f"{failures} failure(s)")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="henonshell",
        description="Groundstates and best constants for shell-weighted "
                    "Emden-Fowler problems on the unit ball",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None, help="INI config file")
        sp.add_argument("--out", default=None, help="output path")
        sp.add_argument("--format", choices=("csv", "json"), default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("constants", help="print the closed-form constants for (N, p)")
    sp.add_argument("N", type=int)
    sp.add_argument("p", type=float)
    sp.add_argument("--sobolev-constant", type=float, default=None,
                    help="Sobolev best constant used to evaluate the breaking radius")
    sp.set_defaults(fn=cmd_constants)

    for name, fn in (("solve-radial", cmd_solve_radial), ("solve-ball", cmd_solve_ball),
                     ("sweep", cmd_sweep), ("moving-shell", cmd_moving_shell),
                     ("continuity", cmd_continuity)):
        sp = sub.add_parser(name)
        common(sp)
        if name in ("sweep", "moving-shell", "continuity"):
            sp.set_defaults(fn=fn)
        else:
            sp.set_defaults(fn=fn)

    sp = sub.add_parser("sobolev", help="compute the subcritical Sobolev best constant")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--n", type=int, default=2049)
    sp.set_defaults(fn=cmd_sobolev)

    sp = sub.add_parser("verify", help="run the built-in invariant checks")
    sp.add_argument("--quick", action="store_true", help="closed-form checks only")
    sp.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.fn(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        code = 2
    return code


if __name__ == "__main__":
    sys.exit(main())
