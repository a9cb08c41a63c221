"""Command-line front end.

Every subcommand reads a JSON model file.  Summaries go to standard output
and diagnostics to standard error.  Exit codes: 0 success, 1 invalid input,
2 a physics check failed, 3 an I/O error.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import causality, files, kk, passivity
from .errors import GridError, ResponseError, SumRuleError
from .model import (
    FrequencyGrid,
    default_grid,
    evaluate_spectrum,
    inverse_permeability,
    permittivity,
    static_chi,
)

EXIT_OK, EXIT_INPUT, EXIT_PHYSICS, EXIT_IO = 0, 1, 2, 3


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags, which would collide with
    # "physics check failed".
    def error(self, message):
        raise _Usage(f"{self.prog}: error: {message}")


def _positive_int(text):
    value = int(text)
    if value < 8:
        raise argparse.ArgumentTypeError("must be at least 8")
    return value


def _add_model(p):
    p.add_argument("--model", required=True, help="model JSON file")


def _add_scale(p):
    p.add_argument("--unit-scale", type=float, default=1.0,
                   help="frequencies on the command line are multiplied by this factor; "
                        "frequency columns in the output are divided by it")


def _add_grid(p, points=4096):
    p.add_argument("--wmin", type=float)
    p.add_argument("--wmax", type=float)
    p.add_argument("--points", type=_positive_int, default=points)
    p.add_argument("--grid", choices=("log", "linear"), default="log")
    _add_scale(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multipole-response", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="emit the eps, mu, chi spectrum as CSV")
    _add_model(p)
    _add_grid(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("kk", help="Kramers-Kronig round trip and static limit")
    _add_model(p)
    _add_grid(p)
    p.add_argument("--method", choices=kk.SINGULARITY_METHODS, default="subtraction")
    p.add_argument("--tol", type=float, default=0.02)
    p.add_argument("--out")

    p = sub.add_parser("poles", help="poles and residues of chi")
    _add_model(p)
    _add_scale(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("kernel", help="time-domain response kernel g(t)")
    _add_model(p)
    p.add_argument("--method", choices=("poles", "fft"), default="poles")
    p.add_argument("--time-step", type=float)
    p.add_argument("--duration", type=float)
    p.add_argument("--out", required=True)

    p = sub.add_parser("passivity", help="negative Im chi bands and the sign of Im[eps mu]")
    _add_model(p)
    p.add_argument("--wmin", type=float)
    p.add_argument("--wmax", type=float)
    p.add_argument("--points", type=_positive_int, default=4096)
    _add_scale(p)

    p = sub.add_parser("sumrule", help="high-frequency sum-rule residual")
    _add_model(p)

    p = sub.add_parser("complete", help="enforce the sum rule and write the new model")
    _add_model(p)
    p.add_argument("--strategy", choices=("adjust-octopole", "adjust-diamagnetic"),
                   default="adjust-octopole")
    p.add_argument("--out", required=True)
    return parser


def _scaled(value, scale):
    return None if value is None else value * scale


def _grid(model, args) -> FrequencyGrid:
    if args.unit_scale <= 0 or not np.isfinite(args.unit_scale):
        raise ValueError("--unit-scale must be positive")
    base = default_grid(model, args.points)
    wmin = _scaled(args.wmin, args.unit_scale)
    wmax = _scaled(args.wmax, args.unit_scale)
    wmin = base.samples[0] if wmin is None else wmin
    wmax = base.samples[-1] if wmax is None else wmax
    if not 0 < wmin < wmax:
        raise ValueError("need 0 < wmin < wmax")
    make = FrequencyGrid.log if args.grid == "log" else FrequencyGrid.linear
    return make(wmin, wmax, args.points)


def _fmt(x):
    return f"{x:.10g}"


def cmd_eval(model, args):
    grid = _grid(model, args)
    w = grid.samples
    eps = np.asarray(permittivity(model, w))
    mu = 1.0 / np.asarray(inverse_permeability(model, w))
    chi = 1.0 - 1.0 / mu
    epsmu = eps * mu
    files.write_csv(args.out, files.SPECTRUM_HEADER,
                    [w / args.unit_scale, eps.real, eps.imag, mu.real, mu.imag,
                     chi.real, chi.imag, epsmu.imag])
    report = passivity.sum_rule(model)
    print(f"static chi(0) = {_fmt(static_chi(model))}")
    print(f"sum-rule residual = {_fmt(report.residual)} "
          f"({'complete' if report.complete else 'incomplete'})")
    print(f"wrote {len(w)} rows to {args.out}")
    return EXIT_OK


def cmd_kk(model, args):
    grid = _grid(model, args)
    scheme = kk.KKScheme(args.method)
    spectrum = evaluate_spectrum(model, grid, "chi")
    result = kk.kk_round_trip(spectrum, scheme)
    try:
        chi0_kk = kk.kk_static(spectrum, scheme)
    except GridError as exc:
        chi0_kk = None
        print(f"KK chi(0) unavailable: {exc}", file=sys.stderr)
    print(f"residual_norm = {_fmt(result.residual_norm)} "
          f"(real {_fmt(result.real_residual)}, imag {_fmt(result.imag_residual)})")
    if chi0_kk is not None:
        print(f"KK chi(0) = {_fmt(chi0_kk)}")
    print(f"analytic chi(0) = {_fmt(static_chi(model))}")
    if args.out:
        sl = result.interior
        files.write_csv(args.out, ("omega", "re_chi", "im_chi", "re_chi_kk", "im_chi_kk"),
                        [grid.samples[sl] / args.unit_scale, spectrum.real[sl], spectrum.imag[sl],
                         result.reconstructed.real[sl], result.reconstructed.imag[sl]])
    if not result.residual_norm <= args.tol:
        print(f"residual_norm exceeds tolerance {args.tol:g}", file=sys.stderr)
        return EXIT_PHYSICS
    return EXIT_OK


def cmd_poles(model, args):
    rows = []
    for pair in causality.find_poles(model):
        for loc, res in zip(pair.locations, pair.residues):
            rows.append((loc.real / args.unit_scale, loc.imag / args.unit_scale, res.real, res.imag))
    cols = np.array(rows, dtype=float).reshape(-1, 4).T
    files.write_csv(args.out, files.POLES_HEADER, cols)
    upper = sum(1 for r in rows if r[1] >= 0)
    print(f"{len(rows)} poles, {upper} outside the lower half plane")
    return EXIT_OK if upper == 0 else EXIT_PHYSICS


def cmd_kernel(model, args):
    if model.is_vacuum:
        w_max = g_min = 1.0
    else:
        w_max = max(t.omega_eg for t in model.transitions)
        g_min = min(t.gamma_e for t in model.transitions)
    dt = args.time_step if args.time_step is not None else 1.0 / (20.0 * w_max)
    duration = args.duration if args.duration is not None else 20.0 / g_min
    if not (dt > 0 and duration > dt):
        raise ValueError("need 0 < time-step < duration")
    if args.method == "poles":
        kernel = causality.kernel_from_poles(model).sample(dt, duration)
    else:
        kernel = causality.kernel_from_fft(model, dt, duration)
    files.write_csv(args.out, files.KERNEL_HEADER, [kernel.times, kernel.values])
    print(f"kernel integral = {_fmt(kernel.dc_content())}")
    print(f"analytic chi(0) = {_fmt(static_chi(model))}")
    print(f"wrote {kernel.times.size} samples to {args.out}")
    return EXIT_OK


def cmd_passivity(model, args):
    s = args.unit_scale
    if s <= 0 or not np.isfinite(s):
        raise ValueError("--unit-scale must be positive")
    w = passivity.passivity_scan_grid(model, points=args.points,
                                      wmin=_scaled(args.wmin, s), wmax=_scaled(args.wmax, s))
    report = passivity.scan_bands(model, w)
    lo, hi = report.scan_range
    print(f"scan range = [{_fmt(lo / s)}, {_fmt(hi / s)}], omega_valid = {_fmt(report.omega_valid / s)}")
    print(f"negative Im chi bands: {len(report.negative_imchi_bands)}")
    for band in report.negative_imchi_bands:
        print(f"  [{_fmt(band.lo / s)}, {_fmt(band.hi / s)}]")
    w_star, f_star = report.min_im_epsmu
    print(f"min Im[eps mu] = {_fmt(f_star)} at omega = {_fmt(w_star / s)}")
    if report.lossless:
        print("passivity: ok (lossless)")
    elif report.passivity_ok:
        print("passivity: ok")
    else:
        print("passivity: VIOLATED")
        return EXIT_PHYSICS
    return EXIT_OK


def cmd_sumrule(model, args):
    report = passivity.sum_rule(model)
    for i, term in enumerate(report.per_transition_terms):
        print(f"transition {i}: {_fmt(term)}")
    print(f"sum-rule residual = {_fmt(report.residual)}")
    if not report.complete:
        print("sum rule: incomplete", file=sys.stderr)
        return EXIT_PHYSICS
    print("sum rule: complete")
    return EXIT_OK


def cmd_complete(model, args):
    completed = passivity.complete_model(model, args.strategy)
    files.dump_model(completed, args.out)
    print(f"sum-rule residual = {_fmt(passivity.sum_rule(completed).residual)}")
    print(f"wrote {args.out}")
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "kk": cmd_kk,
    "poles": cmd_poles,
    "kernel": cmd_kernel,
    "passivity": cmd_passivity,
    "sumrule": cmd_sumrule,
    "complete": cmd_complete,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _Usage as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_INPUT
    try:
        model = files.load_model(args.model)
        return COMMANDS[args.command](model, args)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SumRuleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except (ResponseError, ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
