"""Command-line front end: ``stable-rough <command> [flags]``.

Every artifact embeds the resolved configuration and the schema tag ``rlv1``.
CSV files carry it on a leading ``#`` line. Failures print a JSON error object
on stderr and exit with 2 (bad configuration), 3 (regime violation) or
4 (convergence failure).
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import ConvergenceError, MarginError, RegimeError, YoungConditionError

SCHEMA = "rlv1"
EXIT_SCHEMA, EXIT_REGIME, EXIT_CONVERGENCE = 2, 3, 4


class SchemaError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise SchemaError(message)


# -- test functions selectable by name -------------------------------------------

def _gauss(x):
    return np.exp(-x * x)


def _gauss_d(x):
    return -2.0 * x * np.exp(-x * x)


def _sign(x):
    return np.where(x > 0, 1.0, -1.0)


def _bump(x):
    out = np.zeros_like(np.asarray(x, dtype=float))
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def _bump_d(x):
    out = np.zeros_like(np.asarray(x, dtype=float))
    inside = np.abs(x) < 1
    xi = x[inside]
    out[inside] = -2.0 * xi / (1.0 - xi ** 2) ** 2 * np.exp(-1.0 / (1.0 - xi ** 2))
    return out


def _neg_sin(x):
    return -np.sin(x)


FUNCTIONS = {
    # name: (f, f', support, closed-form gradient)
    "gauss": (_gauss, _gauss_d, None, None),
    "cos": (np.cos, _neg_sin, None, _neg_sin),
    "abs": (np.abs, _sign, None, None),
    "bump": (_bump, _bump_d, (-1.0, 1.0), None),
}


def _grid_function(name: str, lo: float, hi: float, n: int):
    from .frac_calc import GridFunction

    if name not in FUNCTIONS:
        raise SchemaError(f"unknown function {name!r}; choose from {sorted(FUNCTIONS)}")
    if n < 2 or not hi > lo:
        raise SchemaError("grid needs grid-n >= 2 and grid-hi > grid-lo")
    f, d, support, _ = FUNCTIONS[name]
    return GridFunction.from_callable(f, np.linspace(lo, hi, n), deriv=d, support=support, name=name)


# -- artifact writers ---------------------------------------------------------------

def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _write_csv(target, header: list[str], columns, config: dict) -> None:
    buf = io.StringIO()
    buf.write("# " + json.dumps({"schema": SCHEMA, "config": config}, sort_keys=True,
                                default=_json_default) + "\n")
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    Path(target).write_text(buf.getvalue())


def _write_json(target, payload: dict, config: dict) -> None:
    body = {"schema": SCHEMA, "config": config}
    body.update(payload)
    Path(target).write_text(_dump_json(body))


def _read_columns(path, ncols: int) -> list[np.ndarray]:
    """Numeric CSV columns; ``#`` lines and a non-numeric header row are skipped."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    rows = []
    for line in lines:
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            if rows:
                raise SchemaError(f"{path}: non-numeric row {line!r}") from None
    if not rows:
        raise SchemaError(f"{path} holds no data rows")
    if len({len(r) for r in rows}) != 1 or len(rows[0]) < ncols:
        raise SchemaError(f"{path} needs {ncols} columns in every row")
    arr = np.array(rows)
    return [arr[:, i] for i in range(ncols)]


def _summary(text: str) -> None:
    print(text)


# -- subcommands ---------------------------------------------------------------

def cmd_simulate(a, cfg):
    from .stable_process import simulate_path, write_path_binary

    path = simulate_path(a.alpha, a.t, a.steps, a.threshold, a.seed)
    out = a.out or "path.csv"
    _write_csv(out, ["time", "value"], [path.times, path.values], cfg)
    if a.binary:
        write_path_binary(path, a.binary)
    _summary(f"simulate: {path.n_steps} steps, {len(path.jump_index)} jumps >= {a.threshold}, "
             f"X_t = {path.values[-1]:.6g} -> {out}")


def cmd_localtime(a, cfg):
    from .local_time import estimate_local_time
    from .stable_process import simulate_path

    path = simulate_path(a.alpha, a.t, a.steps, a.threshold, a.seed)
    grid = None
    if a.grid_lo is not None or a.grid_hi is not None or a.grid_n is not None:
        if None in (a.grid_lo, a.grid_hi, a.grid_n):
            raise SchemaError("grid-lo, grid-hi and grid-n go together")
        grid = np.linspace(a.grid_lo, a.grid_hi, a.grid_n)
    field = estimate_local_time(path, grid, a.bandwidth)
    out = a.out or "localtime.csv"
    _write_csv(out, ["x", "L"], [field.grid, field.values], cfg)
    _summary(f"localtime: {len(field.grid)} points, bandwidth {field.bandwidth:.4g}, "
             f"mass {field.mass:.6g} -> {out}")


def cmd_pvar(a, cfg):
    from .variation import dyadic_variation_bound, p_variation_exact

    x, v = _read_columns(a.input, 2)
    exact = p_variation_exact(v, a.p)
    payload = {"p": a.p, "n_points": len(v), "p_variation": exact, "dyadic_bound": None}
    n = len(v) - 1
    if n >= 4 and n & (n - 1) == 0 and a.p > 1:
        db = dyadic_variation_bound(v, a.p, a.gamma)
        payload["dyadic_bound"] = {"bound": db.bound, "raw_sum": db.raw_sum,
                                   "constant": db.constant,
                                   "tail": db.tail if math.isfinite(db.tail) else None}
    out = a.out or "pvar.json"
    _write_json(out, payload, cfg)
    _summary(f"pvar: p={a.p} variation {exact:.6g} -> {out}")


def cmd_fraccalc(a, cfg):
    from . import frac_calc as fc

    g = _grid_function(a.function, a.grid_lo, a.grid_hi, a.grid_n)
    op, order = a.op, a.order
    if op == "rl":
        vals = fc.rl_integral(g, order, g.grid, lower=g.lo)
    elif op in ("left", "right"):
        vals = fc.frac_derivative(g.sampled(), order, op, base="grid").values
    elif op == "riesz":
        vals = fc.riesz_derivative(g.sampled(), order, base="grid").values
    elif op == "gradient":
        vals = fc.frac_gradient(g, order).values
    elif op == "laplacian":
        vals = fc.frac_laplacian(g, order).values
    elif op == "mollify":
        vals = fc.mollify(g, max(1, int(order))).values
    else:
        raise SchemaError(f"unknown operator {op!r}")
    out = a.out or "fraccalc.csv"
    _write_csv(out, ["x", "value"], [g.grid, np.asarray(vals, dtype=float)], cfg)
    _summary(f"fraccalc: {op} of order {order} on {a.function}, {len(g.grid)} points -> {out}")


def cmd_young(a, cfg):
    from .frac_calc import GridFunction
    from .young import young_integral

    xf, f = _read_columns(a.f, 2)
    xg, g = _read_columns(a.g, 2)
    if len(xf) != len(xg) or not np.allclose(xf, xg, rtol=0, atol=1e-12):
        raise SchemaError("f and g must be sampled on the same grid")
    try:
        F, G = GridFunction(xf, f), GridFunction(xg, g)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    res = young_integral(F, G, a.p, a.q)
    out = a.out or "young.json"
    _write_json(out, {"value": res.value, "gap": res.gap, "richardson": res.richardson,
                      "levels": res.levels}, cfg)
    _summary(f"young: int f dg = {res.value:.12g} (gap {res.gap:.2g}) -> {out}")


def cmd_roughlift(a, cfg):
    import warnings

    from .errors import NonCauchyWarning
    from .rough_path import (TwoPath, build_geometric_rough_path, default_theta, lift_to_json,
                             rough_integral_gdL)
    from .variation import total_variation_control

    x, L, g = _read_columns(a.input, 3)
    Z = TwoPath(x, L, g)
    theta, levels = a.theta, a.levels
    if theta is None:
        theta, lv = default_theta(a.alpha, a.q)
        levels = levels or lv
    levels = levels or min(3, int(math.floor(theta)))

    class _G:
        grid, values = x, g

    w1 = total_variation_control(_G, a.q, augmented=True)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonCauchyWarning)
        RP, gaps = build_geometric_rough_path(Z, w1, theta, m_max=a.mmax, tol=a.tol, levels=levels)
    reached = bool(len(gaps)) and gaps[-1] < a.tol
    if a.strict and not reached:
        raise ConvergenceError(f"theta-variation gap {gaps[-1]:.3g} above tol {a.tol} at m_max")
    value = rough_integral_gdL(None, None, RP)
    lift = json.loads(lift_to_json(RP, a.max_level))
    out = a.out or "roughlift.json"
    _write_json(out, {"theta": theta, "levels": levels, "gaps": list(map(float, gaps)),
                      "tolerance_reached": reached, "integral_g_dL": value,
                      "warnings": [str(w.message) for w in caught], "lift": lift}, cfg)
    _summary(f"roughlift: depth {RP.depth}, last gap {gaps[-1] if len(gaps) else float('nan'):.3g}, "
             f"int g dL = {value:.10g} -> {out}")


def cmd_ito(a, cfg):
    from .frac_calc import laplacian_constant
    from .ito_verify import verify_rough, verify_smooth, verify_young
    from .stable_process import ensemble_seeds

    seeds = ensemble_seeds(a.base_seed, a.seeds)
    name = a.function or ("gauss" if a.regime != "young" else "abs")
    f = _grid_function(name, -a.half_width, a.half_width, int(round(2 * a.half_width / a.spacing)) + 1)
    C = a.levy_constant
    kw = dict(threshold=a.threshold, C=C, bandwidth=a.bandwidth, workers=a.workers)
    if a.regime == "smooth":
        rep = verify_smooth(f, a.alpha, a.t, a.steps, seeds, gradient=FUNCTIONS[name][3], **kw)
    elif a.regime == "young":
        rep = verify_young(f, a.q, a.alpha, a.t, a.steps, seeds, **kw)
    else:
        rep = verify_rough(f, a.q, a.alpha, a.t, a.steps, seeds, m_max=a.mmax,
                           gradient=FUNCTIONS[name][3], **kw)
    body = rep.to_dict()
    body.pop("config")
    body["run_config"] = rep.config
    se = rep.residual_se
    body["residual_within_3se"] = bool(abs(rep.residual) <= 3 * se) if se == se else None
    body["laplacian_constant"] = laplacian_constant(a.alpha)
    out = a.out or "report.json"
    _write_json(out, body, cfg)
    _summary(f"ito[{a.regime}]: mean residual {rep.residual:.4g} +- {se:.2g} over {a.seeds} paths -> {out}")


# -- parser --------------------------------------------------------------------

def _common(p, out_default: str):
    p.add_argument("--config", help="JSON file with default values for these flags")
    p.add_argument("--out", help=f"output file (default {out_default})")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="stable-rough", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate a stable path to CSV")
    _common(s, "path.csv")
    s.add_argument("--alpha", type=float, default=1.5)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=2 ** 16)
    s.add_argument("--threshold", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--binary", help="also write the RLSP binary dump here")
    s.set_defaults(run=cmd_simulate)

    s = sub.add_parser("localtime", help="local-time field of a simulated path")
    _common(s, "localtime.csv")
    s.add_argument("--alpha", type=float, default=1.5)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=2 ** 16)
    s.add_argument("--threshold", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--bandwidth", type=float)
    s.add_argument("--grid-lo", type=float)
    s.add_argument("--grid-hi", type=float)
    s.add_argument("--grid-n", type=int)
    s.set_defaults(run=cmd_localtime)

    s = sub.add_parser("pvar", help="exact p-variation and dyadic bound of a CSV (x, value)")
    _common(s, "pvar.json")
    s.add_argument("--input")
    s.add_argument("--p", type=float)
    s.add_argument("--gamma", type=float)
    s.set_defaults(run=cmd_pvar)

    s = sub.add_parser("fraccalc", help="tabulate a fractional operator on a grid")
    _common(s, "fraccalc.csv")
    s.add_argument("--function", default="gauss", choices=sorted(FUNCTIONS))
    s.add_argument("--op", default="laplacian",
                   choices=["rl", "left", "right", "riesz", "gradient", "laplacian", "mollify"])
    s.add_argument("--order", type=float, default=1.5)
    s.add_argument("--grid-lo", type=float, default=-8.0)
    s.add_argument("--grid-hi", type=float, default=8.0)
    s.add_argument("--grid-n", type=int, default=1601)
    s.set_defaults(run=cmd_fraccalc)

    s = sub.add_parser("young", help="Young integral of two CSVs sharing a grid")
    _common(s, "young.json")
    s.add_argument("--f")
    s.add_argument("--g")
    s.add_argument("--p", type=float)
    s.add_argument("--q", type=float)
    s.set_defaults(run=cmd_young)

    s = sub.add_parser("roughlift", help="geometric lift of a CSV (x, L, g) and int g dL")
    _common(s, "roughlift.json")
    s.add_argument("--input")
    s.add_argument("--alpha", type=float, default=1.8, help="fixes the default theta")
    s.add_argument("--q", type=float, default=1.0)
    s.add_argument("--theta", type=float)
    s.add_argument("--levels", type=int, choices=[2, 3])
    s.add_argument("--mmax", type=int, default=14)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--max-level", type=int, default=3, help="deepest dyadic level written out")
    s.add_argument("--strict", action="store_true", help="exit 4 if tol is not reached")
    s.set_defaults(run=cmd_roughlift)

    s = sub.add_parser("ito", help="Monte-Carlo Ito residual report")
    _common(s, "report.json")
    s.add_argument("--regime", choices=["smooth", "young", "rough"], default="smooth")
    s.add_argument("--function", choices=sorted(FUNCTIONS))
    s.add_argument("--alpha", type=float, default=1.8)
    s.add_argument("--q", type=float, default=1.0)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=2 ** 16)
    s.add_argument("--seeds", type=int, default=256, help="number of paths")
    s.add_argument("--base-seed", type=int, default=0)
    s.add_argument("--threshold", type=float, default=0.1)
    s.add_argument("--bandwidth", type=float)
    s.add_argument("--levy-constant", type=float)
    s.add_argument("--half-width", type=float, default=8.0, help="test-function grid is [-w, w]")
    s.add_argument("--spacing", type=float, default=0.01)
    s.add_argument("--mmax", type=int, default=18)
    s.add_argument("--workers", type=int, help="worker processes (default RL_THREADS or 1)")
    s.set_defaults(run=cmd_ito)
    return ap


REQUIRED = {"pvar": ("input", "p"), "young": ("f", "g", "p", "q"), "roughlift": ("input",)}


def _scan_config(argv: list[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config":
            if i + 1 >= len(argv):
                raise SchemaError("--config needs a file name")
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
        raw = json.loads(text) if text.strip() else None
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict) or not raw:
        raise SchemaError("config must be a non-empty JSON object")
    return raw


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    cfg_path = _scan_config(argv)
    commands = parser._subparsers._group_actions[0].choices
    command = next((t for t in argv if t in commands), None)
    if cfg_path is not None:
        raw = _load_config(cfg_path)
        cmd = raw.get("command", command)
        if command is not None and cmd != command:
            raise SchemaError(f"config is for {cmd!r}, not {command!r}")
        if cmd not in commands:
            raise SchemaError(f"config names no valid command (got {cmd!r})")
        if command is None:
            # a bare --config: move it behind the command taken from the file
            rest = [t for t in argv if t != "--config" and t != cfg_path and not t.startswith("--config=")]
            argv = [cmd, "--config", cfg_path] + rest
            command = cmd
        params = {k.replace("-", "_"): v for k, v in raw.items() if k not in ("command", "schema")}
        sub = commands[command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(params) - known - {"config", "out"})
        if unknown:
            raise SchemaError(f"unknown config keys: {unknown}")
        sub.set_defaults(**params)
    args = parser.parse_args(argv)
    if args.command is None:
        raise SchemaError("no command given")
    missing = [k for k in REQUIRED.get(args.command, ()) if getattr(args, k) is None]
    if missing:
        raise SchemaError(f"missing required values: {', '.join('--' + m for m in missing)}")
    return args


def _resolved(args: argparse.Namespace) -> dict:
    # output location and worker count do not change results
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("run", "config", "out", "workers")}
    cfg["schema"] = SCHEMA
    return cfg


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"schema": SCHEMA, "error": {"kind": kind, "message": message},
                                 "exit_code": code}, sort_keys=True) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        args.run(args, _resolved(args))
    except SchemaError as exc:
        return _fail(EXIT_SCHEMA, "schema", str(exc))
    except (RegimeError, YoungConditionError) as exc:
        return _fail(EXIT_REGIME, "regime", str(exc))
    except (ConvergenceError, MarginError) as exc:
        return _fail(EXIT_CONVERGENCE, type(exc).__name__, str(exc))
    except ValueError as exc:
        return _fail(EXIT_SCHEMA, "value", str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
