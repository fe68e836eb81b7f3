"""Command-line front end: evaluation, operators, transforms, solvers, verify.

Jobs are described by a flat ``key=value`` config file (one pair per
line, ``#`` comments allowed).  Parsing is strict: an unknown key is a
fatal error naming the key and its line, since a silently ignored typo
in a parameter name is worse than a refusal.  Numeric tables go to CSV
(header row, shortest round-trip decimals, LF line endings), structured
reports to JSON, so reruns diff cleanly.

Exit status: 0 on success, 1 on a domain/convergence/config error,
2 when the verification suite ran but some identity failed.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, KPrabhakarError
from .grids import Grid1D, SampledFunction
from .params import DEFAULT_CONTROL, HilferParams, PrabhakarParams, SeriesControl
from .special import ml_k
from . import operators, solvers, transforms, verify

COMMANDS = (
    "eval",
    "apply",
    "transform",
    "solve-relaxation",
    "solve-diffusion",
    "verify",
)

_PARAM_KEYS = ("k", "alpha", "mu", "gamma", "omega")
_COMMON_KEYS = ("command", "rel_tol", "max_terms")

#: Keys accepted in a config file, per command (strict mode).
_ALLOWED_KEYS: Dict[str, Tuple[str, ...]] = {
    "eval": _COMMON_KEYS + _PARAM_KEYS + ("z",),
    "apply": _COMMON_KEYS
    + _PARAM_KEYS
    + ("nu", "operator", "input", "function", "t_max", "grid_n"),
    "transform": _COMMON_KEYS
    + _PARAM_KEYS
    + ("nu", "kind", "operator", "u", "function", "initial_values", "frozen_terms"),
    "solve-relaxation": _COMMON_KEYS
    + _PARAM_KEYS
    + ("nu", "delta", "lam", "initial", "t_max", "grid_n"),
    "solve-diffusion": _COMMON_KEYS
    + _PARAM_KEYS
    + ("nu", "diffusivity", "input", "times", "p_max"),
    "verify": _COMMON_KEYS + ("ids", "grid_n"),
}

#: Built-in operand functions (value, derivative), usable wherever a
#: config accepts ``function=<id>`` instead of an input CSV.
_FUNCTIONS: Dict[str, Tuple[Callable, Callable]] = {
    "one": (lambda t: np.ones_like(t), lambda t: np.zeros_like(t)),
    "t": (lambda t: t, lambda t: np.ones_like(t)),
    "t_squared": (lambda t: t**2, lambda t: 2.0 * t),
    "poly": (lambda t: 1.0 + t + t**2, lambda t: 1.0 + 2.0 * t),
    "exp_neg": (lambda t: np.exp(-t), lambda t: -np.exp(-t)),
    "sin": (np.sin, np.cos),
    "t_exp_neg": (
        lambda t: t * np.exp(-t),
        lambda t: (1.0 - t) * np.exp(-t),
    ),
}


def parse_config(source: str) -> Dict[str, str]:
    """Parse flat ``key=value`` text into a dict; strict and positional.

    Raises ConfigError with the line number on malformed lines, repeated
    keys, a missing/unknown ``command``, or any key the command does not
    accept.
    """
    pairs: Dict[str, str] = {}
    lines: Dict[str, int] = {}
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {line!r}")
        if key in pairs:
            raise ConfigError(
                f"line {lineno}: duplicate key {key!r} "
                f"(first set on line {lines[key]})"
            )
        pairs[key] = value
        lines[key] = lineno
    command = pairs.get("command")
    if command is None:
        raise ConfigError("config must set command=<" + "|".join(COMMANDS) + ">")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r} (line {lines['command']})")
    allowed = _ALLOWED_KEYS[command]
    for key in pairs:
        if key not in allowed:
            raise ConfigError(
                f"line {lines[key]}: unknown key {key!r} for command "
                f"{command!r}; accepted keys: {', '.join(sorted(allowed))}"
            )
    return pairs


def _get_float(cfg: Dict[str, str], key: str, default: Optional[float] = None) -> float:
    if key not in cfg:
        if default is not None:
            return default
        raise ConfigError(f"missing required key {key!r}")
    try:
        return float(cfg[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: not a number: {cfg[key]!r}")


def _get_int(cfg: Dict[str, str], key: str, default: Optional[int] = None) -> int:
    if key not in cfg:
        if default is not None:
            return default
        raise ConfigError(f"missing required key {key!r}")
    try:
        return int(cfg[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: not an integer: {cfg[key]!r}")


def _get_floats(cfg: Dict[str, str], key: str) -> List[float]:
    if key not in cfg:
        raise ConfigError(f"missing required key {key!r}")
    try:
        return [float(tok) for tok in cfg[key].split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"key {key!r}: not a comma-separated number list")


def _params(cfg: Dict[str, str]) -> PrabhakarParams:
    return PrabhakarParams(
        k=_get_float(cfg, "k"),
        alpha=_get_float(cfg, "alpha"),
        mu=_get_float(cfg, "mu"),
        gamma=_get_float(cfg, "gamma"),
        omega=_get_float(cfg, "omega"),
    )


def _hilfer(cfg: Dict[str, str]) -> HilferParams:
    return HilferParams(base=_params(cfg), nu=_get_float(cfg, "nu"))


def _control(cfg: Dict[str, str], tol_override: Optional[float]) -> SeriesControl:
    rel_tol = tol_override if tol_override is not None else _get_float(
        cfg, "rel_tol", DEFAULT_CONTROL.rel_tol
    )
    return SeriesControl(
        rel_tol=rel_tol,
        max_terms=_get_int(cfg, "max_terms", DEFAULT_CONTROL.max_terms),
    )


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[float]]):
    """Write a numeric table: UTF-8, LF, shortest round-trip decimals."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def read_sampled_csv(path: str) -> SampledFunction:
    """Read an ``x,value`` CSV back into a SampledFunction.

    The abscissae must be uniformly spaced (relative deviation below
    1e-9); values written by write_csv round-trip exactly.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            next(reader)  # header
        except StopIteration:
            raise ConfigError(f"{path}: empty CSV")
        try:
            rows = [(float(r[0]), float(r[1])) for r in reader if r]
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"{path}: malformed numeric row ({exc})")
    if len(rows) < 2:
        raise ConfigError(f"{path}: need at least two samples")
    x = np.array([r[0] for r in rows])
    vals = np.array([r[1] for r in rows])
    steps = np.diff(x)
    h = steps[0]
    if h <= 0 or np.max(np.abs(steps - h)) > 1e-9 * max(abs(h), 1.0):
        raise ConfigError(f"{path}: abscissae are not a uniform ascending grid")
    grid = Grid1D(origin=x[0], step=h, count=len(rows))
    return SampledFunction(grid=grid, values=vals)


def _operand(cfg: Dict[str, str], ctrl: SeriesControl) -> SampledFunction:
    if "input" in cfg:
        return read_sampled_csv(cfg["input"])
    if "function" not in cfg:
        raise ConfigError("need either input=<csv path> or function=<id>")
    fid = cfg["function"]
    if fid not in _FUNCTIONS:
        raise ConfigError(
            f"unknown function {fid!r}; available: {', '.join(sorted(_FUNCTIONS))}"
        )
    f, df = _FUNCTIONS[fid]
    grid = Grid1D.from_span(0.0, _get_float(cfg, "t_max", 2.0), _get_int(cfg, "grid_n", 1024) + 1)
    t = grid.nodes
    return SampledFunction(grid=grid, values=f(t), derivative_values=df(t))


def _run_eval(cfg, out_dir, ctrl) -> int:
    p = _params(cfg)
    zs = _get_floats(cfg, "z")
    rows = [(z, ml_k(z, p, ctrl)) for z in zs]
    path = os.path.join(out_dir, "eval.csv")
    write_csv(path, ("x", "value"), rows)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


_OPERATORS = {
    "integral": lambda f, cfg, ctrl: operators.prabhakar_integral(f, _params(cfg), ctrl),
    "derivative": lambda f, cfg, ctrl: operators.prabhakar_derivative(
        f, _params(cfg), ctrl
    ),
    "regularized-derivative": lambda f, cfg, ctrl: (
        operators.regularized_prabhakar_derivative(f, _params(cfg), ctrl)
    ),
    "hilfer": lambda f, cfg, ctrl: operators.hilfer_prabhakar_derivative(
        f, _hilfer(cfg), ctrl
    ),
    "regularized-hilfer": lambda f, cfg, ctrl: (
        operators.regularized_hilfer_prabhakar_derivative(f, _hilfer(cfg), ctrl)
    ),
}


def _run_apply(cfg, out_dir, ctrl) -> int:
    op = cfg.get("operator")
    if op not in _OPERATORS:
        raise ConfigError(
            f"operator must be one of {', '.join(sorted(_OPERATORS))}; got {op!r}"
        )
    f = _operand(cfg, ctrl)
    result = _OPERATORS[op](f, cfg, ctrl)
    path = os.path.join(out_dir, "apply.csv")
    write_csv(path, ("x", "value"), list(zip(result.grid.nodes, result.values)))
    print(f"wrote {path} ({result.grid.count} rows)")
    return 0


def _run_transform(cfg, out_dir, ctrl) -> int:
    kind = cfg.get("kind", "laplace")
    try:
        tkind = transforms.TransformKind(kind)
    except ValueError:
        raise ConfigError(f"kind must be laplace or sumudu; got {kind!r}")
    op = cfg.get("operator", "kernel")
    us = _get_floats(cfg, "u")
    rows = []
    if op == "kernel":
        p = _params(cfg)
        closed = (
            transforms.laplace_kernel_closed
            if tkind is transforms.TransformKind.LAPLACE
            else transforms.sumudu_kernel_closed
        )
        for u in us:
            rows.append((u, closed(transforms.TransformQuery(u, tkind), p)))
    else:
        try:
            op_kind = transforms.OperatorKind(op)
        except ValueError:
            raise ConfigError(
                f"operator must be kernel or one of "
                f"{', '.join(e.value for e in transforms.OperatorKind)}; got {op!r}"
            )
        hilfer = op_kind in (
            transforms.OperatorKind.HILFER,
            transforms.OperatorKind.REG_HILFER,
        )
        params = _hilfer(cfg) if hilfer else _params(cfg)
        fid = cfg.get("function")
        if fid not in _FUNCTIONS:
            raise ConfigError(
                "operator transforms need function=<id> "
                f"(available: {', '.join(sorted(_FUNCTIONS))})"
            )
        f = _FUNCTIONS[fid][0]
        bd = None
        if "initial_values" in cfg or "frozen_terms" in cfg:
            bd = transforms.BoundaryData(
                initial_values=tuple(_get_floats(cfg, "initial_values"))
                if "initial_values" in cfg
                else (),
                frozen_integral_terms=tuple(_get_floats(cfg, "frozen_terms"))
                if "frozen_terms" in cfg
                else (),
            )
        closed_op = (
            transforms.laplace_operator_closed
            if tkind is transforms.TransformKind.LAPLACE
            else transforms.sumudu_operator_closed
        )
        for u in us:
            if tkind is transforms.TransformKind.LAPLACE:
                F = transforms.numerical_laplace(lambda t: float(f(t)), u)
            else:
                F = transforms.numerical_sumudu(lambda t: float(f(t)), u)
            q = transforms.TransformQuery(u, tkind)
            rows.append((u, closed_op(op_kind, q, params, F, bd)))
    path = os.path.join(out_dir, "transform.csv")
    write_csv(path, ("x", "value"), rows)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def _run_relaxation(cfg, out_dir, ctrl) -> int:
    prob = solvers.RelaxationProblem(
        hp=_hilfer(cfg),
        lam=_get_float(cfg, "lam"),
        delta=_get_float(cfg, "delta"),
        K_init=_get_float(cfg, "initial"),
    )
    grid = Grid1D.from_span(
        0.0, _get_float(cfg, "t_max", 2.0), _get_int(cfg, "grid_n", 1024) + 1
    )
    sol = solvers.solve_relaxation(prob, grid, ctrl)
    path = os.path.join(out_dir, "relaxation.csv")
    write_csv(path, ("x", "value"), list(zip(grid.nodes, sol.values.values)))
    print(
        f"wrote {path} ({grid.count} rows, {sol.terms_used} series terms, "
        f"tail {sol.tail_estimate:.3e})"
    )
    return 0


def _run_diffusion(cfg, out_dir, ctrl) -> int:
    if "input" not in cfg:
        raise ConfigError("solve-diffusion needs input=<csv of the initial profile>")
    profile = read_sampled_csv(cfg["input"])
    times = _get_floats(cfg, "times")
    prob = solvers.DiffusionProblem(
        hp=_hilfer(cfg),
        K_diff=_get_float(cfg, "diffusivity"),
        initial_profile=profile,
        time_points=tuple(times),
    )
    p_grid = solvers.default_mode_grid(prob, p_max=_get_float(cfg, "p_max", 3.5))
    sols = solvers.solve_diffusion(prob, p_grid, ctrl)
    x = profile.grid.nodes
    for t, sol in zip(times, sols):
        path = os.path.join(out_dir, f"u_t{t:g}.csv")
        write_csv(path, ("x", "u"), list(zip(x, sol.values.values)))
        print(f"wrote {path} ({len(x)} rows)")
    return 0


def _run_verify(cfg, out_dir, ctrl, grid_n: Optional[int], threads: Optional[int]) -> int:
    cases = verify.default_cases()
    if "ids" in cfg:
        wanted = [tok.strip() for tok in cfg["ids"].split(",") if tok.strip()]
        unknown = sorted(set(wanted) - set(verify.IDENTITY_IDS))
        if unknown:
            raise ConfigError(f"unknown identity ids: {', '.join(unknown)}")
        cases = [c for c in cases if c.identity_id in wanted]
    n = grid_n if grid_n is not None else (
        _get_int(cfg, "grid_n") if "grid_n" in cfg else None
    )
    grid = Grid1D.from_span(0.0, 2.0, n + 1) if n is not None else None
    reports = verify.run_suite(cases, grid, ctrl, threads=threads)
    path = os.path.join(out_dir, "report.json")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(verify.reports_to_json(reports))
    n_pass = sum(r.passed for r in reports)
    for r in reports:
        mark = "pass" if r.passed else "FAIL"
        print(f"{mark}  {r.case.identity_id:28s} max_rel_err={r.max_rel_err:.3e}")
    print(f"wrote {path}: {n_pass}/{len(reports)} identities passed")
    return 0 if n_pass == len(reports) else 2


def _resolve_threads(arg: Optional[str]) -> Optional[int]:
    raw = arg if arg is not None else os.environ.get("KPRAB_THREADS")
    if raw is None or raw == "auto":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f'--threads expects an integer or "auto", got {raw!r}')
    if n < 1:
        raise ConfigError("--threads must be >= 1")
    return n


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kprab",
        description="k-deformed Prabhakar fractional calculus toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="key=value job config file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--grid-n", type=int, default=None, help="grid cell count override")
        sp.add_argument("--tol", type=float, default=None, help="series rel_tol override")
        sp.add_argument("--threads", default=None, help='worker count or "auto"')
    args = parser.parse_args(argv)

    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        if cfg["command"] != args.command:
            raise ConfigError(
                f"config says command={cfg['command']!r} but the "
                f"{args.command!r} subcommand was invoked"
            )
        threads = _resolve_threads(args.threads)
        ctrl = _control(cfg, args.tol)
        if args.grid_n is not None:
            cfg = dict(cfg, grid_n=str(args.grid_n))
        os.makedirs(args.out, exist_ok=True)
        if args.command == "eval":
            return _run_eval(cfg, args.out, ctrl)
        if args.command == "apply":
            return _run_apply(cfg, args.out, ctrl)
        if args.command == "transform":
            return _run_transform(cfg, args.out, ctrl)
        if args.command == "solve-relaxation":
            return _run_relaxation(cfg, args.out, ctrl)
        if args.command == "solve-diffusion":
            return _run_diffusion(cfg, args.out, ctrl)
        return _run_verify(cfg, args.out, ctrl, args.grid_n, threads)
    except KPrabhakarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
