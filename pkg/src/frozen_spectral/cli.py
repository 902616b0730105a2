"""Command-line entry point.

Exit codes: 0 success, 1 uniqueness check failed, 2 bad configuration or
unknown experiment, 3 root count mismatch, 4 every mode ill-posed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import reference
from .charfn import CharacteristicFunction, SingularAuxiliarySystem
from .core import PI, FrozenArguments, Potential, SineCoefficients, Spectrum, sine_coefficients, write_csv
from .expr import ExpressionError, parse_frozen, parse_potential
from .inverse import DEFAULT_TAU, AllModesIllPosed, check_uniqueness, reconstruct
from .oracle import cross_validate, shoot_delta
from .spectrum import CountMismatch, RootSearchConfig, compute_spectrum

log = logging.getLogger("frozen_spectral")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_COUNT_MISMATCH, EXIT_ILL_POSED = 0, 1, 2, 3, 4
EXPERIMENTS = ("example1", "example2", "roundtrip")
RANDOM_MODES = 5


class ConfigError(ValueError):
    pass


def _potential(args) -> Potential:
    text = args.q
    if text.lower() == "random":
        rng = np.random.default_rng(args.seed)
        return SineCoefficients(rng.uniform(-1.0, 1.0, RANDOM_MODES)).to_potential(args.grid)
    path = Path(text)
    if path.suffix == ".csv" and path.exists():
        return Potential.from_csv(path)
    return Potential.from_form(parse_potential(text), args.grid)


def _frozen(args) -> FrozenArguments:
    return parse_frozen(args.frozen)


def _config(args) -> RootSearchConfig:
    return RootSearchConfig(m_max=args.m_max, newton_tol=args.tol, im_height=args.im_height)


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _rho_table(spec: Spectrum) -> str:
    lines = [f"{'m':>3} {'Re sqrt(lambda)':>18} {'Im sqrt(lambda)':>18} {'Re lambda':>18} {'Im lambda':>14}"]
    for m, p in enumerate(spec, start=1):
        lines.append(f"{m:>3} {p.rho.real:18.10f} {p.rho.imag:18.10f} {p.lam.real:18.10f} {p.lam.imag:14.6e}")
    return "\n".join(lines)


def _mode_rows(result):
    return [(r.m, r.delta, r.G, r.d, r.imag_residue, float(r.ill_posed)) for r in result.per_mode]


def _write_reconstruction(result, out: Path) -> None:
    result.coefficients.to_json(out / "coefficients.json")
    result.q_hat.to_csv(out / "q_hat.csv", "q_hat")
    write_csv(out / "modes.csv", ("m", "delta", "G", "d", "imag_residue", "ill_posed"), _mode_rows(result))
    (out / "reconstruction.json").write_text(json.dumps(result.to_dict(), indent=2) + "\n")


def _mode_table(result) -> str:
    lines = [f"{'m':>3} {'Delta(m^2)':>14} {'G(m)':>10} {'d_m':>14}  note"]
    for r in result.per_mode:
        note = "ill-posed, skipped" if r.ill_posed else ("complex residue" if r.conditioning_warning else "")
        lines.append(f"{r.m:>3} {r.delta:14.6e} {r.G:10.5f} {r.d:14.8f}  {note}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_forward(args) -> int:
    q, F, cfg = _potential(args), _frozen(args), _config(args)
    try:
        spec = compute_spectrum(q, F, cfg)
    except CountMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COUNT_MISMATCH
    spec.to_json(_out(args) / "spectrum.json")
    print(_rho_table(spec))
    return EXIT_OK


def cmd_inverse(args) -> int:
    spec = Spectrum.from_json(args.spectrum)
    F = _frozen(args)
    try:
        result = reconstruct(spec, F, args.grid, args.tau)
    except AllModesIllPosed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ILL_POSED
    for m in result.ill_posed:
        print(f"warning: mode {m} is ill-posed and was skipped", file=sys.stderr)
    _write_reconstruction(result, _out(args))
    print(_mode_table(result))
    return EXIT_OK


def roundtrip(q: Potential, F: FrozenArguments, cfg: RootSearchConfig, grid: int = 513, tau: float = DEFAULT_TAU):
    """Forward solve, reconstruct, and compare against the ``N``-mode sine projection of ``q``."""
    spec = compute_spectrum(q, F, cfg)
    result = reconstruct(spec, F, grid, tau)
    exact = sine_coefficients(q, result.N_used)
    projection = exact.to_potential(grid)
    mode_err = np.abs(result.coefficients.d - exact.d)
    sup = float(np.max(np.abs(result.q_hat.values - projection.values)))
    return spec, result, exact, mode_err, sup


def cmd_roundtrip(args) -> int:
    q, F, cfg = _potential(args), _frozen(args), _config(args)
    try:
        spec, result, exact, mode_err, sup = roundtrip(q, F, cfg, args.grid, args.tau)
    except CountMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COUNT_MISMATCH
    except AllModesIllPosed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ILL_POSED
    print(f"{'m':>3} {'d_m(q)':>14} {'recovered':>14} {'|error|':>10}")
    for m, (a, b, e) in enumerate(zip(exact.d, result.coefficients.d, mode_err), start=1):
        print(f"{m:>3} {a:14.8f} {b:14.8f} {e:10.2e}")
    print(f"max mode error {mode_err.max():.3e}; sup-norm error vs {result.N_used}-mode projection {sup:.3e}")
    report = {
        "N": result.N_used,
        "exact": exact.to_dict(),
        "recovered": result.coefficients.to_dict(),
        "mode_error": mode_err.tolist(),
        "sup_error": sup,
        "spectrum": spec.to_dict(),
    }
    (_out(args) / "roundtrip.json").write_text(json.dumps(report, indent=2) + "\n")
    return EXIT_OK


def cmd_check(args) -> int:
    report = check_uniqueness(_frozen(args), args.modes, args.tau)
    print(f"{'m':>3} {'G(m)':>12}")
    for m, g in report.values:
        flag = "  <= tau" if abs(g) <= report.tau else ""
        print(f"{m:>3} {g:12.8f}{flag}")
    summary = f"min |G(m)| = {report.min_abs_G:.10g} at m = {report.worst_m} (tau = {report.tau:g})"
    if report.passed:
        print(f"pass: {summary}")
        return EXIT_OK
    print(f"fail at m = {report.failing_modes[0]}: {summary}")
    return EXIT_CHECK_FAILED


def cmd_eval_delta(args) -> int:
    q, F = _potential(args), _frozen(args)
    lam = complex(args.lam.replace(" ", "").replace("i", "j"))
    cf = CharacteristicFunction(q, F)
    ev = cf.evaluate(lam)
    rows = {"lambda": lam, "rho": ev.rho, "delta_closed": ev.delta, "delta_det": cf.det(lam)}
    try:
        rows["delta_shooting"] = shoot_delta(q, F, lam).delta
    except SingularAuxiliarySystem as exc:
        log.warning("shooting route unavailable: %s", exc)
    for key, val in rows.items():
        print(f"{key:>15} {val.real:+.17g} {val.imag:+.17g}i")
    return EXIT_OK


def cmd_cross_validate(args) -> int:
    q, F = _potential(args), _frozen(args)
    report = cross_validate(q, F, args.m_max, config=_config(args))
    print(report.table())
    (_out(args) / "cross_validation.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK


def _plot_bundle(out: Path, q_true: Potential, q_hat: Potential) -> None:
    write_csv(out / "q_true.csv", ("t", "q"), zip(q_true.t, q_true.values))
    write_csv(out / "q_hat.csv", ("t", "q_hat"), zip(q_hat.t, q_hat.values))
    write_csv(out / "residual.csv", ("t", "residual"), zip(q_hat.t, q_hat.values - q_true.values))


def cmd_plot_data(args) -> int:
    name = args.experiment
    if name not in EXPERIMENTS:
        print(f"error: unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}", file=sys.stderr)
        return EXIT_CONFIG
    F = reference.FROZEN
    if name == "example1":
        spec, truth = reference.cosine_spectrum(), reference.COSINE_FORM
    elif name == "example2":
        spec, truth = reference.linear_spectrum(), reference.LINEAR_FORM
    else:
        F = _frozen(args)
        q = _potential(args)
        try:
            spec = compute_spectrum(q, F, _config(args))
        except CountMismatch as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_COUNT_MISMATCH
        truth = q
    try:
        result = reconstruct(spec, F, args.grid, args.tau)
    except AllModesIllPosed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ILL_POSED
    q_true = Potential.from_form(truth, args.grid) if not isinstance(truth, Potential) else truth.resample(args.grid)
    out = _out(args)
    _plot_bundle(out, q_true, result.q_hat)
    resid = result.q_hat.values - q_true.values
    print(f"{name}: N = {result.N_used}, sup |q_hat - q| = {np.max(np.abs(resid)):.4g}; files in {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", default="zero", help='potential: "zero", "t", "1-cos(2t)", "random", or a t,q CSV path')
    common.add_argument("--frozen", default="1,sqrt(2)", help='frozen points, e.g. "1,sqrt(2)" or "pi/3,2pi/3"')
    common.add_argument("--m-max", type=int, default=20, help="search covers Re sqrt(lambda) <= m_max + 1/2")
    common.add_argument("--grid", type=int, default=513, help="number of uniform grid points for potentials")
    common.add_argument("--tol", type=float, default=1e-11, help="Newton tolerance on |Delta|")
    common.add_argument("--im-height", type=float, default=2.0, help="|Im sqrt(lambda)| search ceiling")
    common.add_argument("--tau", type=float, default=DEFAULT_TAU, help="threshold on |G(m)|")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=0, help="seed for --q random")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="frozen-spectral", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("forward", parents=[common], help="eigenvalues of a given potential").set_defaults(func=cmd_forward)
    inv = sub.add_parser("inverse", parents=[common], help="potential from a spectrum JSON file")
    inv.add_argument("spectrum")
    inv.set_defaults(func=cmd_inverse)
    sub.add_parser("roundtrip", parents=[common], help="forward then inverse").set_defaults(func=cmd_roundtrip)
    chk = sub.add_parser("check", parents=[common], help="uniqueness condition on sum_i sin(m a_i)")
    chk.add_argument("--modes", type=int, default=50)
    chk.set_defaults(func=cmd_check)
    ev = sub.add_parser("eval-delta", parents=[common], help="characteristic function at one lambda")
    ev.add_argument("--lambda", dest="lam", required=True)
    ev.set_defaults(func=cmd_eval_delta)
    sub.add_parser("cross-validate", parents=[common], help="root finder vs FD vs shooting").set_defaults(
        func=cmd_cross_validate)
    pd = sub.add_parser("plot-data", parents=[common], help="CSV curves for example1, example2 or roundtrip")
    pd.add_argument("experiment")
    pd.set_defaults(func=cmd_plot_data)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ExpressionError, ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
