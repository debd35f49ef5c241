"""Command-line front end.

Every subcommand writes a table of records as CSV (header row, 17
significant digits) or as a JSON list of objects with the same keys.

Exit status: 0 on success, 2 for malformed input, 3 when a truncation or
quadrature cannot be certified.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from athermal import athermality, baths, optical
from athermal.errors import AthermalError, CertificationError, ConvergenceError
from athermal.optical import PhotonDistribution

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


# -- parsing helpers ---------------------------------------------------------


def float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def grid(text):
    """Either a comma list or start:stop:count (inclusive, linear)."""
    if ":" in text:
        try:
            start, stop, count = text.split(":")
            return np.linspace(float(start), float(stop), int(count)).tolist()
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}")
    return float_list(text)


def read_state_file(path):
    """Energies and probabilities from 'energy probability' lines; '#' starts a comment."""
    energies, probs = [], []
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise UsageError(f"{path}:{lineno}: expected 'energy probability'")
                energies.append(float(parts[0]))
                probs.append(float(parts[1]))
    except OSError as exc:
        raise UsageError(f"cannot read state file: {exc}")
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}")
    if not energies:
        raise UsageError(f"{path}: no levels found")
    return energies, probs


# -- output ------------------------------------------------------------------


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _jsonable(value):
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    return value


def render(columns, records, fmt):
    if fmt == "json":
        data = [{c: _jsonable(rec.get(c)) for c in columns} for rec in records]
        return json.dumps(data, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_fmt(rec.get(c)) for c in columns])
    return buf.getvalue()


# -- subcommands ---------------------------------------------------------------


def _system(args):
    if args.state_file:
        if args.probs or args.energies:
            raise UsageError("give either --state-file or --probs/--energies, not both")
        energies, probs = read_state_file(args.state_file)
    else:
        if args.probs is None or args.energies is None:
            raise UsageError("need --probs and --energies (or --state-file)")
        energies, probs = args.energies, args.probs
    if len(energies) != len(probs):
        raise UsageError("--probs and --energies differ in length")
    order = np.argsort(energies, kind="stable")
    return [energies[i] for i in order], [probs[i] for i in order]


def cmd_qfi_max(args):
    energies, probs = _system(args)
    beta = args.beta
    value = athermality.max_qfi_thermal(probs, energies, beta)
    records = [
        {"record": "segment", "x_left": a, "x_right": b, "q_down": qd, "q_up": qu,
         "e_down": ed, "e_up": eu, "contribution": c}
        for a, b, qd, qu, ed, eu, c in athermality.step_segments(probs, energies, beta)
    ]
    summary = {"record": "summary", "value": value,
               "interaction_speed": athermality.interaction_speed(probs, energies, beta)}
    if args.high_low_limits:
        summary["low_limit"], summary["high_limit"] = athermality.qfi_temperature_limits(probs, energies)
    records.append(summary)
    columns = ["record", "x_left", "x_right", "q_down", "q_up", "e_down", "e_up",
               "contribution", "value", "interaction_speed", "low_limit", "high_limit"]
    return columns, records


def _temperature_label(t):
    return "inf" if math.isinf(t) else _fmt(t)


def cmd_qubit_sweep(args):
    eps = args.eps
    if not eps > 0:
        raise UsageError("--eps must be positive")
    records = []
    for t in args.temperatures:
        if t < 0:
            raise UsageError("temperatures must be nonnegative")
        for p1 in args.p1:
            if not 0 <= p1 <= 1:
                raise UsageError("p1 values must lie in [0, 1]")
            if t == 0:
                val = athermality.qfi_temperature_limits([1 - p1, p1], [0, eps])[0]
            else:
                beta = 0.0 if math.isinf(t) else 1.0 / t
                val = athermality.max_qfi_qubit(1 - p1, p1, eps, beta)
            records.append({"p1": p1, "T_label": _temperature_label(t), "qfi_over_eps2": val / eps**2})
    return ["p1", "T_label", "qfi_over_eps2"], records


def _family(args):
    fam = args.family
    if fam == "custom":
        if args.probs is None:
            raise UsageError("custom family needs --probs")
        return [("custom", PhotonDistribution(args.probs, args.tail_bound))]
    if not args.params:
        raise UsageError(f"{fam} family needs --params")
    out = []
    for x in args.params:
        if fam == "fock":
            if x != int(x):
                raise UsageError("Fock parameters must be integers")
            out.append((x, PhotonDistribution.fock(int(x))))
        elif fam == "thermal":
            out.append((x, PhotonDistribution.thermal(x)))
        else:
            out.append((x, PhotonDistribution.poisson(x)))
    return out


COHERENCE_COLUMNS = ["param", "r", "C_r", "I_r", "bound_classical", "bound_all", "witness_fired"]


def _coherence_records(args):
    records = []
    for param, dist in _family(args):
        for r in args.r:
            mean = dist.mean
            c = optical.latent_coherence(dist, r)
            wit = optical.witness(dist, r)
            rec = {
                "param": param, "r": r, "C_r": c, "I_r": optical.illuminance(dist, r),
                "bound_classical": optical.classical_witness_bound(mean, r),
                "bound_all": optical.all_states_bound(mean, r),
                "witness_fired": wit.fired, "mean_n": mean, "margin": wit.margin,
                "residual": optical.tradeoff_check(dist, r),
            }
            if args.hbar_omega is not None:
                rec["phase_qfi"] = optical.optical_phase_qfi(dist, r, args.hbar_omega) if r < 1 else None
            records.append(rec)
    return records


def _with_scale(columns, args):
    return columns + ["phase_qfi"] if args.hbar_omega is not None else columns


def cmd_coherence(args):
    return _with_scale(COHERENCE_COLUMNS, args), _coherence_records(args)


def cmd_tradeoff(args):
    return _with_scale(COHERENCE_COLUMNS + ["mean_n", "residual"], args), _coherence_records(args)


def cmd_witness(args):
    return _with_scale(COHERENCE_COLUMNS + ["mean_n", "margin"], args), _coherence_records(args)


def cmd_bath_converge(args):
    if not 0 <= args.p1 <= 1:
        raise UsageError("--p1 must lie in [0, 1]")
    if any(k < 0 for k in args.K):
        raise UsageError("K values must be nonnegative")
    rows = baths.ladder_convergence(args.p1, args.beta_eps, args.K, args.eps)
    columns = ["K", "finite_value", "analytic", "abs_error"]
    return columns, [dict(zip(columns, row)) for row in rows]


def cmd_spectrum_scan(args):
    if args.points < 1:
        raise UsageError("--points must be positive")
    wl = np.linspace(args.wl_min, args.wl_max, args.points)
    res = optical.thermal_beam_scan(args.t_background, args.t_source, wl)
    records = [
        {"record": "scan", "wavelength_m": w, "coherence": c, "mean_n": n}
        for w, c, n in zip(res.wavelengths, res.coherence, res.mean_n)
    ]
    records.append({"record": "summary", "wavelength_m": res.best_wavelength,
                    "coherence": res.best_coherence, "mean_n": res.best_mean_n})
    return ["record", "wavelength_m", "coherence", "mean_n"], records


# -- parser ------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="athermal",
        description="Phase-sensing and interaction-speed limits out of thermal equilibrium.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("-o", "--output", default="-", help="output path ('-' for stdout)")
    common.add_argument("--seed", type=int, default=0, help="recorded for reproducibility")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qfi-max", parents=[common], help="maximal QFI of a finite system")
    p.add_argument("--probs", type=float_list)
    p.add_argument("--energies", type=float_list)
    p.add_argument("--state-file")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--high-low-limits", action="store_true", help="add the T -> 0 and T -> inf values")
    p.set_defaults(func=cmd_qfi_max)

    p = sub.add_parser("qubit-sweep", parents=[common], help="qubit QFI versus excitation probability")
    p.add_argument("--temperatures", type=float_list, required=True,
                   help="k_B T in units of the gap; 0 and inf allowed")
    p.add_argument("--p1", type=grid, default=np.linspace(0, 1, 101).tolist())
    p.add_argument("--eps", type=float, default=1.0)
    p.set_defaults(func=cmd_qubit_sweep)

    for name, func, text in [
        ("coherence", cmd_coherence, "latent coherence and illuminance"),
        ("tradeoff", cmd_tradeoff, "coherence/illuminance trade-off residual"),
        ("witness", cmd_witness, "nonclassicality witness margin"),
    ]:
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--family", choices=["fock", "thermal", "poisson", "custom"], required=True)
        p.add_argument("--params", type=float_list, help="n, thermal ratio, or Poisson mean")
        p.add_argument("--probs", type=float_list, help="number distribution for --family custom")
        p.add_argument("--tail-bound", type=float, default=0.0)
        p.add_argument("--r", type=float_list, required=True, help="background Boltzmann ratios")
        p.add_argument("--hbar-omega", type=float, help="energy quantum; adds a phase_qfi column")
        p.set_defaults(func=func)

    p = sub.add_parser("bath-converge", parents=[common], help="qubit with growing ladder bath")
    p.add_argument("--K", type=int_list, required=True)
    p.add_argument("--p1", type=float, default=0.3)
    p.add_argument("--beta-eps", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=1.0)
    p.set_defaults(func=cmd_bath_converge)

    p = sub.add_parser("spectrum-scan", parents=[common], help="thermal beam against a cooler background")
    p.add_argument("--t-background", type=float, default=300.0)
    p.add_argument("--t-source", type=float, default=3000.0)
    p.add_argument("--wl-min", type=float, default=1e-6, help="metres")
    p.add_argument("--wl-max", type=float, default=100e-6, help="metres")
    p.add_argument("--points", type=int, default=991)
    p.set_defaults(func=cmd_spectrum_scan)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags and 0 after --help
        return int(exc.code or 0)
    try:
        columns, records = args.func(args)
    except (CertificationError, ConvergenceError) as exc:
        print(f"athermal: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, AthermalError, ValueError) as exc:
        print(f"athermal: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(columns, records, args.format)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        try:
            with open(args.output, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"athermal: {exc}", file=sys.stderr)
            return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
