"""Command-line entry point.

Exit status: 0 on success, 1 on usage errors, 2 on runtime failures.
"""

import argparse
import logging
import sys
from pathlib import Path

from .config import load_config, parse_number, parse_scheme, scheme_token
from .correction import spectral_factor
from .errors import ConfigurationError, EstimationError
from .experiment import STANDARD_ALPHAS, ExperimentConfig, estimate_order, l2_error, run_ensemble, select
from .integrators import run
from .noise import NoiseSpec, autocorrelation, e_folding_time, increment_variance, sample_ensemble
from .oracle import exact_solution
from .output import emit_csv, emit_plot_script, read_csv
from .rng import mix_seed
from .spectral import ModelConfig, build_operators, choose_truncation

log = logging.getLogger("colored_ito")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _number_list(text):
    try:
        return [parse_number(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _number(text):
    try:
        return parse_number(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_common(p, *, dt_list=True, scheme=True, realizations=True):
    p.add_argument("--config", type=Path, help="experiment configuration file")
    p.add_argument("--seed", type=lambda s: int(s, 0), help="base seed")
    p.add_argument("--out", type=Path, help="output path")
    p.add_argument("--alpha", type=_number_list, help="color parameter(s), comma separated")
    if dt_list:
        p.add_argument("--dt-list", type=_number_list, help="step sizes, e.g. 1/94,1/190")
    if scheme:
        p.add_argument("--scheme", choices=("euler", "decentered", "midpoint"))
        p.add_argument("--lambda", dest="lam", type=_number, help="decentering parameter")
        p.add_argument("--corrected", action=argparse.BooleanOptionalAction, default=None,
                       help="add the generalized Ito correction")
    if realizations:
        p.add_argument("--realizations", type=int, help="ensemble size")


def build_parser():
    parser = _Parser(prog="colored-ito", description="Generalized Ito correction experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("noise-stats", help="autocorrelation, e-folding time and variance checks")
    _add_common(p, dt_list=False, scheme=False)
    p.add_argument("--dt", type=_number, default=1.0 / 766, help="noise bin width (default 1/766)")
    p.add_argument("--max-lag", type=float, default=0.1, help="largest lag (default 0.1)")

    p = sub.add_parser("simulate", help="one trajectory; print the final mode table")
    _add_common(p, realizations=False)
    p.add_argument("--realization", type=int, default=0, help="ensemble member index")

    p = sub.add_parser("converge", help="ensemble sweep over alpha and dt; writes CSV")
    _add_common(p)
    p.add_argument("--workers", type=int, help="process pool size")

    p = sub.add_parser("plot-script", help="gnuplot script from an aggregate CSV")
    p.add_argument("csv", type=Path, help="aggregate CSV written by converge")
    p.add_argument("--out", type=Path, help="script path (default: CSV name with .gp)")
    p.add_argument("--image", default=None, help="image the script renders")

    p = sub.add_parser("truncation", help="empirical choice of the truncation wavenumber")
    _add_common(p, dt_list=False, scheme=False, realizations=False)
    p.add_argument("--threshold", type=float, default=1e-4)
    p.add_argument("--dt", type=_number, default=1.0 / 766)
    p.add_argument("--probe-nx", type=int, default=16)
    return parser


def _experiment(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    if getattr(args, "alpha", None):
        changes["alphas"] = args.alpha
    if getattr(args, "dt_list", None):
        changes["dts"] = args.dt_list
    if getattr(args, "realizations", None) is not None:
        changes["realizations"] = args.realizations
    if args.seed is not None:
        changes["base_seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        changes["workers"] = args.workers
    scheme = _scheme_override(args)
    if scheme is not None:
        changes["schemes"] = scheme
    if changes:
        cfg = ExperimentConfig(**{**cfg.__dict__, **changes})
    return cfg


def _scheme_override(args):
    name = getattr(args, "scheme", None)
    lam = getattr(args, "lam", None)
    corrected = getattr(args, "corrected", None)
    if name is None and lam is None and corrected is None:
        return None
    name = name or ("decentered" if lam is not None else "euler")
    if lam is not None and name != "decentered":
        raise UsageError("--lambda applies to --scheme decentered only")
    if corrected is None:
        variants = [False, True]
    else:
        variants = [corrected]
    token = name + (f"@{lam}" if lam is not None else "")
    return [parse_scheme(token + ("+ito" if c else "")) for c in variants]


def cmd_noise_stats(args):
    alphas = args.alpha or list(STANDARD_ALPHAS)
    size = args.realizations or 1000
    seed = 12345 if args.seed is None else args.seed
    rows = []
    print(f"{'alpha':>8} {'S':>12} {'Var n':>12} {'S/dt':>12} {'E[db^2]':>12} {'dt*S':>12} {'e-fold':>12}")
    for alpha in alphas:
        spec = NoiseSpec.for_step(alpha, args.dt)
        lags = [j * spec.dt for j in range(int(round(args.max_lag / spec.dt)) + 1)]
        corr = autocorrelation(spec, lags, size, seed)
        tau = e_folding_time(corr)
        members = sample_ensemble(spec, seed, size)
        var_n = sum(m.evaluate(0.25) ** 2 for m in members) / size
        t0 = 0.25
        incr = sum(m.integrate(t0, t0 + spec.dt) ** 2 for m in members) / size
        s = spectral_factor(spec).value
        tau_txt = "not reached" if tau is None else f"{tau:.5e}"
        print(f"{alpha:8.0e} {s:12.5e} {var_n:12.5e} {s / spec.dt:12.5e} {incr:12.5e} "
              f"{increment_variance(spec):12.5e} {tau_txt:>12}")
        rows.extend((alpha, lag, c) for lag, c in corr)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w") as fh:
            fh.write("alpha,lag,correlation\n")
            for alpha, lag, c in rows:
                fh.write(f"{alpha:.16e},{lag:.16e},{c:.16e}\n")
    return 0


def cmd_simulate(args):
    cfg = _experiment(args)
    alpha = cfg.alphas[0]
    dt = (args.dt_list or cfg.dts)[0]
    scheme = cfg.schemes[-1]
    model = cfg.model
    spec = NoiseSpec.for_step(alpha, dt)
    noise = sample_ensemble(spec, cfg.base_seed, 1, start=args.realization)[0]
    ops = build_operators(model)
    step = spec.dt / 64 if scheme.kind == "midpoint_reference" else spec.dt
    result = run(model, scheme.with_dt(step), noise, ops, spectral_factor(spec))
    exact = exact_solution(model, ops, noise, result.final_state.t)
    print(f"# scheme={scheme_token(scheme)} alpha={alpha:g} dt={spec.dt:.6e} "
          f"seed={mix_seed(cfg.base_seed, args.realization)} t={result.final_state.t:.12g}")
    print(f"{'k':>4} {'Re F':>15} {'Im F':>15} {'|F|':>13} {'|F exact|':>13}")
    for k, f, e in zip(result.final_state.wavenumbers, result.final_state.F, exact.F):
        print(f"{k:4d} {f.real:15.8e} {f.imag:15.8e} {abs(f):13.6e} {abs(e):13.6e}")
    print(f"# L2 error vs analytic solution: {l2_error(result.final_state, exact):.8e}")
    return 0


def cmd_converge(args):
    cfg = _experiment(args)
    out = args.out or (Path(cfg.output_path) if cfg.output_path else Path("convergence.csv"))
    result = run_ensemble(cfg)
    emit_csv(result.members, out)
    agg_path = out.with_name(out.stem + ".agg.csv")
    emit_csv(result.aggregates, agg_path, aggregate=True)
    print(f"# wrote {len(result.members)} member rows to {out} and "
          f"{len(result.aggregates)} aggregates to {agg_path}")
    print(f"{'alpha':>8} {'scheme':>18} {'order (finest 4 dt)':>20}")
    for alpha in cfg.alphas:
        for scheme in cfg.schemes:
            recs = select(result.aggregates, alpha=alpha, scheme=scheme.kind, lam=scheme.lam,
                          corrected=scheme.corrected)
            try:
                slope = f"{estimate_order(recs):.3f}"
            except EstimationError as exc:
                slope = f"n/a ({exc})"
            print(f"{alpha:8.0e} {scheme_token(scheme):>18} {slope:>20}")
    if result.diagnostics:
        gaps = {}
        for d in result.diagnostics:
            gaps.setdefault(d["alpha"], []).append(d["oracle_split_gap"])
        print("# closed-form oracle commutator gap (mean L2 over the ensemble, max over dt):")
        for alpha, values in sorted(gaps.items()):
            print(f"#   alpha={alpha:g}: {max(values):.3e}")
    for f in result.failures:
        print(f"# FAILED alpha={f['alpha']:g} dt={f['dt']:.6e}: {f['error']}", file=sys.stderr)
    return 2 if result.failures else 0


def cmd_plot_script(args):
    records = read_csv(args.csv)
    if records and not hasattr(records[0], "mean_error"):
        raise ConfigurationError("csv", "plot-script needs the aggregate CSV (*.agg.csv)")
    out = args.out or args.csv.with_suffix(".gp")
    image = args.image or out.with_suffix(".png").name
    emit_plot_script(records, out, image=image)
    print(f"# wrote {out}")
    return 0


def cmd_truncation(args):
    cfg = load_config(args.config).model if args.config else ModelConfig(epsilon=1e-3, n_x=5)
    alpha = args.alpha[0] if args.alpha else 0.0
    seed = 0 if args.seed is None else args.seed
    nx = choose_truncation(cfg, args.threshold, probe_nx=args.probe_nx, dt=args.dt, alpha=alpha, seed=seed)
    print(f"epsilon={cfg.epsilon:g} threshold={args.threshold:g} -> N_x = {nx}")
    return 0


COMMANDS = {
    "noise-stats": cmd_noise_stats,
    "simulate": cmd_simulate,
    "converge": cmd_converge,
    "plot-script": cmd_plot_script,
    "truncation": cmd_truncation,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"colored-ito {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"colored-ito {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
