"""Command line front end.

Matrices and vectors are headerless CSV. Channel and row indices on the
command line are 1-based, comma-separated. Exit codes: 0 success, 2 bad
usage or configuration, 3 numerical failure inside a solver.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .attack import alpha_bound, design_attack, sigma1_detail
from .bench import (ConfigError, ExperimentConfig, run_scurve, run_sweep,
                    write_scurve_csv, write_sweep_csv)
from .certify import (bound_csp_error, bound_rip_error, bound_weighted_error,
                      check_uniqueness, csp_beta, rip_delta, weight_surface)
from .decode import l1_decode, make_weights, weighted_l1_decode
from .lp import LpNumericalError
from .model import ObservationWindow
from .prior import OMEGA_TRUSTED


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _fmt_vec(values) -> str:
    return ",".join(f"{float(v):.12g}" for v in np.asarray(values).ravel())


def _fmt_support(support) -> str:
    if not support:
        return "-"
    return ",".join(str(i) for i in sorted(support))


def _load_matrix(path: str) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)


def _load_vector(path: str) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", dtype=float).ravel()


def _parse_indices(text: str) -> frozenset[int]:
    try:
        return frozenset(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"bad index list {text!r}: {exc}") from exc


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"bad float list {text!r}: {exc}") from exc


def _cmd_certify(args) -> int:
    h = _load_matrix(args.matrix)
    cert = csp_beta(h, args.order)
    print(f"csp order={cert.order} beta={_fmt(cert.beta)} exact={_fmt(cert.exact)} "
          f"witness={_fmt_support(cert.witness_support)}")
    if args.rip is not None:
        rip = rip_delta(h, args.rip, mode=args.rip_mode)
        print(f"rip order={rip.order} delta={_fmt(rip.delta)} mode={rip.mode} "
              f"exact={_fmt(rip.exact)} witness={_fmt_support(rip.witness_support)}")
    if args.uniqueness is not None:
        uniq = check_uniqueness(h, args.uniqueness[0], args.uniqueness[1])
        print(f"uniqueness k={uniq.order} horizon={uniq.horizon} "
              f"deletion={uniq.deletion_size} unique={_fmt(uniq.unique)} "
              f"exhaustive={_fmt(uniq.exhaustive)} witness={_fmt_support(uniq.witness)}")
    return 0


def _cmd_decode(args) -> int:
    h = _load_matrix(args.matrix)
    y = _load_vector(args.y)
    window = ObservationWindow(horizon=args.horizon, h=h, y=y)
    if args.prior is not None:
        idx = frozenset(int(i) for i in np.atleast_1d(np.loadtxt(args.prior, delimiter=",", dtype=int)))
        weights = make_weights(idx, args.omega, window.width)
        est = weighted_l1_decode(window, weights)
    else:
        est = l1_decode(window)
    print(f"objective={_fmt(est.objective)}")
    print(f"residual_l2={_fmt(float(np.linalg.norm(est.residual)))}")
    print(f"x_hat={_fmt_vec(est.x_hat)}")
    return 0


def _cmd_attack(args) -> int:
    h = _load_matrix(args.matrix)
    support = _parse_indices(args.support)
    detail = sigma1_detail(h, support)
    print(f"sigma1={_fmt(detail.value)}")
    design = design_attack(h, support, args.eps)
    alpha = alpha_bound(h, support, args.eps, sigma1_value=design.sigma1)
    print(f"alpha_max={_fmt(alpha)}")
    print(f"x_e={_fmt_vec(design.x_e)}")
    print(f"e={_fmt_vec(design.e)}")
    return 0


def _require(args, names) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise ConfigError(f"bounds --kind {args.kind} needs --" + ", --".join(missing))


def _cmd_bounds(args) -> int:
    if args.kind == "csp":
        _require(args, ["beta", "sigma-min", "eps"])
        rep = bound_csp_error(args.beta, args.sigma_min, args.eps)
    elif args.kind == "rip":
        _require(args, ["sigma-min", "delta", "a", "horizon", "k", "eps"])
        rep = bound_rip_error(args.sigma_min, args.delta, args.a, args.horizon,
                              args.k, args.eps, mu1=args.mu1)
    else:
        _require(args, ["mu1", "omega", "ppv", "rho", "a", "delta", "horizon", "k", "eps"])
        rep = bound_weighted_error(args.mu1, args.omega, args.ppv, args.rho,
                                   args.a, args.delta, args.horizon, args.k, args.eps)
    print(f"kind={rep.kind}")
    print(f"value={_fmt(rep.value)}")
    print(f"condition_ok={_fmt(rep.condition_ok)}")
    for key in sorted(rep.inputs):
        print(f"{key}={_fmt(rep.inputs[key])}")
    return 0


def _cmd_surface(args) -> int:
    omega_grid = _parse_floats(args.omega_grid)
    ppv_grid = _parse_floats(args.ppv_grid)
    cells = weight_surface(omega_grid, ppv_grid, rho=args.rho,
                           sigma_min=args.sigma_min, a=args.a, tk=args.tk,
                           eps=args.eps, delta=args.delta)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# version={__version__} sigma_min={_fmt(args.sigma_min)} "
                 f"a={_fmt(args.a)} rho={_fmt(args.rho)} tk={args.tk} "
                 f"eps={_fmt(args.eps)} delta={_fmt(args.delta)}\n")
        fh.write("omega,ppv,kappa,mu2,bound,delta_upper\n")
        for c in cells:
            fh.write(",".join([f"{c.omega:.6g}", f"{c.ppv:.6g}", f"{c.kappa:.9g}",
                               _fmt(c.mu2), _fmt(c.bound), _fmt(c.delta_upper)]) + "\n")
    print(f"wrote {len(cells)} cells to {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    result = run_sweep(cfg, jobs=args.jobs, partial_path=args.out)
    write_sweep_csv(result, args.out)
    print(f"wrote {len(result.rows)} cells to {args.out}")
    return 0


def _cmd_scurve(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    rows = run_scurve(cfg, jobs=args.jobs)
    write_scurve_csv(rows, cfg.seed, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rr", description=__doc__)
    parser.add_argument("--version", action="version", version=f"rr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="support ratio / isometry / uniqueness certificates")
    p.add_argument("--matrix", required=True, help="stacked map H as headerless CSV")
    p.add_argument("--order", type=int, required=True, help="attacked-row budget for the support ratio")
    p.add_argument("--rip", type=int, default=None, metavar="K", help="also certify row isometry at order K")
    p.add_argument("--rip-mode", choices=["effective", "strict"], default="effective")
    p.add_argument("--uniqueness", type=int, nargs=2, default=None, metavar=("K", "T"),
                   help="also check unique recovery against K attacked channels per step over horizon T")
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("decode", help="recover the window-start state from measurements")
    p.add_argument("--matrix", required=True)
    p.add_argument("--y", required=True, help="stacked measurements as headerless CSV")
    p.add_argument("--horizon", type=int, default=1)
    p.add_argument("--prior", default=None, help="CSV of 1-based suspected stacked rows")
    p.add_argument("--omega", type=float, default=OMEGA_TRUSTED,
                   help="weight on suspected rows (default %(default)s)")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("attack", help="design a worst-case corruption on a channel set")
    p.add_argument("--matrix", required=True)
    p.add_argument("--support", required=True, help="1-based stacked rows, comma separated")
    p.add_argument("--eps", type=float, required=True, help="off-support 1-norm budget")
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("bounds", help="closed-form estimation error bounds")
    p.add_argument("--kind", choices=["csp", "rip", "weighted"], required=True)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--sigma-min", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--mu1", type=float, default=None)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--ppv", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("surface", help="weighted-bound landscape over (omega, ppv)")
    p.add_argument("--out", required=True)
    p.add_argument("--omega-grid", default="0.01,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    p.add_argument("--ppv-grid", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--sigma-min", type=float, default=2.0)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--tk", type=int, default=50)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.set_defaults(func=_cmd_surface)

    p = sub.add_parser("sweep", help="Monte Carlo success ratio over an (m, n) grid")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("scurve", help="success against attacked fraction at one cell")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_scurve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LpNumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
