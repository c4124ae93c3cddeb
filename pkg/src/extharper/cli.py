"""Command-line interface: parameter-plane maps, boundary location,
finite-size scaling, and the verification suite.

Every flag can also be supplied through a UTF-8 config file of
"key = value" lines (keys match the long flag names); explicit flags
override the file.
"""

from __future__ import annotations

import argparse
import sys

from .fidelity import Direction
from .scaling import BracketError, scaling_csv_lines, scaling_report
from .scan import (
    BoundaryNotFound,
    GridSpec,
    boundary_sweep,
    locate_from_sweep,
    records_to_csv,
    run_scan,
)
from .spectrum import ComputationError
from .verify import reports_to_csv, run_all_checks

_DEFAULT_GRID = "101x51"
_DEFAULT_RANGE = "0,4,0,2"


def _load_config(path: str) -> dict:
    config = {}
    with open(path, encoding="utf-8") as fp:
        for raw in fp:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line is not 'key = value': {raw!r}")
            key, _, value = line.partition("=")
            config[key.strip()] = value.strip()
    return config


class _Options:
    """Flag values with config-file fallback; flags win."""

    def __init__(self, args):
        self.args = args
        path = getattr(args, "config", None)
        self.config = _load_config(path) if path else {}

    def get(self, key: str, cast, default=None):
        value = getattr(self.args, key.replace("-", "_"), None)
        if value is None:
            value = self.config.get(key)
        if value is None:
            return default
        return cast(value)


def _parse_grid(text: str):
    lam_steps, _, mu_steps = text.lower().partition("x")
    return int(lam_steps), int(mu_steps)


def _parse_floats(text: str, count: int):
    parts = [float(v) for v in text.split(",")]
    if len(parts) != count:
        raise ValueError(f"expected {count} comma-separated values, got {text!r}")
    return parts


def _parse_direction(text: str) -> Direction:
    n_lam, n_mu = _parse_floats(text, 2)
    return Direction.of(n_lam, n_mu)


def _parse_fix(text: str):
    key, _, value = text.partition("=")
    key = key.strip()
    if key not in ("lambda", "mu") or not value:
        raise ValueError(f"--fix must look like lambda=2.0 or mu=0.5, got {text!r}")
    return key, float(value)


def _parse_sizes(text: str):
    return [int(v) for v in text.split(",")]


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)


def _grid_spec(opts: _Options, reference=None, direction=None) -> GridSpec:
    lam_steps, mu_steps = opts.get("grid", _parse_grid, _parse_grid(_DEFAULT_GRID))
    lam_lo, lam_hi, mu_lo, mu_hi = opts.get(
        "range", lambda t: _parse_floats(t, 4), _parse_floats(_DEFAULT_RANGE, 4)
    )
    return GridSpec(
        lam_range=(lam_lo, lam_hi, lam_steps),
        mu_range=(mu_lo, mu_hi, mu_steps),
        m=opts.get("m", int, 15),
        ky=opts.get("ky", float, 0.0),
        reference=reference,
        direction=direction,
    )


def _run_map(opts: _Options, quantities, reference=None, direction=None) -> int:
    spec = _grid_spec(opts, reference=reference, direction=direction)
    records = run_scan(spec, quantities, threads=opts.get("threads", int, 1))
    _emit(records_to_csv(records, quantities), opts.get("out", str))
    return 0


def _cmd_fidelity_map(opts: _Options) -> int:
    ref = opts.get("ref", lambda t: tuple(_parse_floats(t, 2)))
    if ref is None:
        raise ValueError("fidelity-map needs --ref lam0,mu0")
    return _run_map(opts, ("fidelity", "gap", "entropy"), reference=ref)


def _cmd_fs_map(opts: _Options) -> int:
    direction = opts.get("dir", _parse_direction)
    if direction is None:
        raise ValueError("fs-map needs --dir nlam,nmu")
    return _run_map(opts, ("fs", "gap", "entropy"), direction=direction)


def _cmd_gap_map(opts: _Options) -> int:
    return _run_map(opts, ("gap", "entropy"))


def _cmd_entropy_map(opts: _Options) -> int:
    return _run_map(opts, ("entropy", "gap"))


def _cmd_boundary(opts: _Options) -> int:
    fix = opts.get("fix", _parse_fix)
    window = opts.get("window", lambda t: tuple(_parse_floats(t, 2)))
    if fix is None or window is None:
        raise ValueError("boundary needs --fix and --window")
    qs, ev, deriv = boundary_sweep(
        fix[0],
        fix[1],
        window,
        step=opts.get("step", float, 0.01),
        m=opts.get("m", int, 15),
        ky=opts.get("ky", float, 0.0),
        threads=opts.get("threads", int, 1),
    )
    located = locate_from_sweep(qs, ev, deriv)
    sweep_name = "mu" if fix[0] == "lambda" else "lambda"
    out = opts.get("out", str)
    if out:
        lines = [f"{sweep_name},spectrum_entropy,d_entropy_dq"]
        for q, e, d in zip(qs, ev, deriv):
            lines.append(
                f"{format(q, '.17g')},{format(e, '.17g')},{format(d, '.17g')}"
            )
        _emit("\n".join(lines) + "\n", out)
    print(f"boundary {sweep_name} = {located:.10g}")
    return 0


def _cmd_fs_scaling(opts: _Options) -> int:
    transition = opts.get("transition", str)
    sizes = opts.get("sizes", _parse_sizes)
    if transition is None or sizes is None:
        raise ValueError("fs-scaling needs --transition and --sizes")
    results = scaling_report(
        transition,
        sizes,
        resolution=opts.get("resolution", float, 1e-9),
        ky=opts.get("ky", float, 0.0),
        threads=opts.get("threads", int, 1),
    )
    _emit("\n".join(scaling_csv_lines(results)) + "\n", opts.get("out", str))
    for res in results:
        print(
            f"{res.group}: alpha={res.alpha:.4f} beta={res.beta:.4f} "
            f"nu={res.nu:.4f} alpha/nu={res.alpha_over_nu:.4f} "
            f"(r2_alpha={res.r_squared_alpha:.4f}, r2_beta={res.r_squared_beta:.4f})"
        )
    return 0


def _cmd_verify(opts: _Options) -> int:
    reports = run_all_checks(seed=opts.get("seed", int, 0))
    out = opts.get("out", str)
    if out:
        _emit(reports_to_csv(reports), out)
    width = max(len(r.name) for r in reports)
    for r in reports:
        print(
            f"{r.name:<{width}}  {r.status:<4}  measured={r.measured:.3e}  "
            f"tolerance={r.tolerance:.3e}  {r.detail}"
        )
    return 0 if all(r.passed for r in reports) else 1


def _add_common(parser: argparse.ArgumentParser, grid: bool = False) -> None:
    parser.add_argument("--m", help="Fibonacci index fixing the chain size N")
    parser.add_argument("--ky", help="transverse momentum (default 0)")
    parser.add_argument("--out", help="output CSV path (default: stdout)")
    parser.add_argument("--threads", help="worker threads (default 1)")
    parser.add_argument("--config", help="key = value config file; flags override")
    if grid:
        parser.add_argument("--grid", help="LxM lambda/mu grid counts (default 101x51)")
        parser.add_argument("--range", help="lam_lo,lam_hi,mu_lo,mu_hi (default 0,4,0,2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extharper",
        description="Phase-diagram diagnostics for the extended Harper chain",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fidelity-map", help="ground-state fidelity against a reference point")
    p.add_argument("--ref", help="reference point lam0,mu0")
    _add_common(p, grid=True)
    p.set_defaults(handler=_cmd_fidelity_map)

    p = sub.add_parser("fs-map", help="fidelity susceptibility along a direction")
    p.add_argument("--dir", help="path direction nlam,nmu (normalized)")
    _add_common(p, grid=True)
    p.set_defaults(handler=_cmd_fs_map)

    p = sub.add_parser("gap-map", help="spectral gap over the parameter plane")
    _add_common(p, grid=True)
    p.set_defaults(handler=_cmd_gap_map)

    p = sub.add_parser("entropy-map", help="entropy diagnostics over the parameter plane")
    _add_common(p, grid=True)
    p.set_defaults(handler=_cmd_entropy_map)

    p = sub.add_parser("boundary", help="locate a phase boundary along a 1-D sweep")
    p.add_argument("--fix", help="held parameter, e.g. mu=0 or lambda=1.0")
    p.add_argument("--window", help="sweep window lo,hi for the other parameter")
    p.add_argument("--step", help="sweep grid step (default 0.01)")
    _add_common(p)
    p.set_defaults(handler=_cmd_boundary)

    p = sub.add_parser("fs-scaling", help="finite-size scaling of the chi_F peak")
    p.add_argument("--transition", help="mmt | mit-i-ii | mit-iii-ii")
    p.add_argument("--sizes", help="comma-separated Fibonacci indices, e.g. 9,12,15")
    p.add_argument("--resolution", help="peak refinement width (default 1e-9)")
    _add_common(p)
    p.set_defaults(handler=_cmd_fs_scaling)

    p = sub.add_parser("verify", help="run the cross-check suite")
    p.add_argument("--seed", help="seed for the randomized checks (default 0)")
    p.add_argument("--out", help="write the report as CSV")
    p.add_argument("--config", help="key = value config file; flags override")
    p.set_defaults(handler=_cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(_Options(args))
    except (ValueError, OSError, BoundaryNotFound, BracketError, ComputationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
