"""Command-line entry point: ``expstep <solve|table|burgers|lienard|order> ...``.

Exit codes: 0 success, 1 usage error, 2 divergence in a run marked required.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiments as ex
from .integrator import DivergenceError
from .metrics import observed_order, sup_node_error

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> tuple:
    try:
        return tuple(float(p) for p in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> tuple:
    return tuple(p for p in text.replace(",", " ").split())


def _param(text: str) -> tuple:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k.strip(), float(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter {k!r} needs a number") from None


def _add_run_flags(p, *, multi: bool):
    p.add_argument("--model", help="model name")
    p.add_argument("--param", type=_param, action="append", default=[], metavar="NAME=VALUE",
                   help="model parameter (repeatable)")
    p.add_argument("--method", type=_names if multi else str,
                   help="method name" + ("s, comma separated" if multi else ""))
    p.add_argument("--h", type=_floats, help="step size" + ("s" if multi else ""))
    p.add_argument("--T", type=float, help="horizon")
    p.add_argument("--initial", type=_floats, help="initial state, comma separated")
    p.add_argument("--flavor", choices=ex.FLAVORS, help="Taylor truncation convention")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=ex.FORMATS, help="output format")
    p.add_argument("--required", action="store_true",
                   help="exit with status 2 if any run diverges")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="expstep", description="Matrix-exponential one-step integration experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="integrate one model and dump the trajectory or one metric")
    _add_run_flags(p, multi=False)
    p.add_argument("--metric", choices=ex.TABLE_METRICS, help="report this metric instead of the trajectory")

    p = sub.add_parser("table", help="run a preset or configured error table")
    p.add_argument("preset", nargs="?", choices=sorted(ex.PRESETS), help="table preset")
    p.add_argument("--config", help="flat key = value config file")
    _add_run_flags(p, multi=True)
    p.add_argument("--metric", choices=ex.TABLE_METRICS)

    p = sub.add_parser("burgers", help="Burgers method-of-lines experiment")
    p.add_argument("--n", type=int, default=5, help="spatial intervals")
    p.add_argument("--m", type=int, default=10, help="time steps on [0, 1]")
    p.add_argument("--profile", default="sin_pi",
                   help="built-in profile name or a file of interior node values")
    p.add_argument("--out", help="report output path (default: stdout)")
    p.add_argument("--format", choices=ex.FORMATS, default="csv")
    p.add_argument("--field", help="write the space-time samples u(x_k, t_j) to this CSV file")
    p.add_argument("--required", action="store_true")

    p = sub.add_parser("lienard", help="boundedness experiment for a Lienard equation")
    p.add_argument("spec", nargs="*", help="inline spec, e.g. 'constant f=1 g=0.5' or 'vdp mu=0.5'; "
                   "without one the three-case preset battery runs")
    p.add_argument("--spec-file", help="spec as a key = value file")
    p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("order", help="observed convergence order over a step sequence")
    _add_run_flags(p, multi=True)
    return parser


def _config_from_args(args) -> ex.ExperimentConfig:
    base = None
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ex.UsageError(f"cannot read config: {exc}") from None
        cfg = ex.config_from_text(text, ex.PRESETS.get(args.preset) if args.preset else None)
        base = cfg
    elif getattr(args, "preset", None):
        base = ex.PRESETS[args.preset]
    fields = {}
    if args.model:
        fields["model"] = args.model
        if base is not None and args.model != base.model:
            fields["params"] = {}
    if args.param:
        fields["params"] = {**(fields.get("params", base.params if base else {})), **dict(args.param)}
    if args.method:
        fields["methods"] = args.method if isinstance(args.method, tuple) else (args.method,)
    if args.h:
        fields["h_list"] = args.h
    if args.T is not None:
        fields["T"] = args.T
    if args.initial:
        fields["initial"] = args.initial
    if getattr(args, "metric", None):
        fields["metric"] = args.metric
    if args.flavor:
        fields["taylor_flavor"] = args.flavor
    if args.out:
        fields["output"] = args.out
    if args.format:
        fields["format"] = args.format
    if args.required:
        fields["required"] = True
    if base is None:
        if "model" not in fields:
            raise ex.UsageError("--model is required (or a preset / --config)")
        if "initial" not in fields and fields["model"] in ex.DEFAULT_INITIAL:
            fields["initial"] = ex.DEFAULT_INITIAL[fields["model"]]
        return ex.ExperimentConfig(**fields)
    return replace(base, **fields)


def _emit_reports(cfg: ex.ExperimentConfig, reports, out) -> None:
    if cfg.format == "json":
        meta = {"preset": cfg.name, "model": cfg.model, "params": cfg.params, "T": cfg.T,
                "initial": list(cfg.initial), "reference": ex.REFERENCE_NOTE,
                "taylor_flavor": cfg.taylor_flavor}
        text = ex.reports_to_json(reports, meta)
    else:
        text = ex.reports_to_csv(reports, ex.table_notes(cfg))
    ex.write_text(cfg.output, text, out)


def cmd_table(args, out) -> int:
    if not args.preset and not args.config and not args.model:
        raise ex.UsageError(f"give a preset ({', '.join(ex.PRESETS)}), --config or --model")
    cfg = _config_from_args(args)
    reports = ex.run_table(cfg)
    _emit_reports(cfg, reports, out)
    if cfg.required and any(r.status != "ok" for r in reports):
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_solve(args, out) -> int:
    cfg = _config_from_args(args)
    if len(cfg.methods) != 1 or len(cfg.h_list) != 1:
        raise ex.UsageError("solve takes a single method and a single step size")
    if args.metric:
        reports = ex.run_table(cfg)
        _emit_reports(cfg, reports, out)
        diverged = reports[0].status != "ok"
        return EXIT_DIVERGED if diverged and cfg.required else EXIT_OK
    sys_ = cfg.system()
    grid = ex.make_grid(cfg.T, cfg.h_list[0])
    try:
        traj = ex.run_method(sys_, cfg.methods[0], np.array(cfg.initial, dtype=float), grid,
                             cfg.taylor_flavor)
    except DivergenceError as exc:
        print(f"expstep: {exc}", file=sys.stderr)
        return EXIT_DIVERGED if cfg.required else EXIT_OK
    if cfg.format == "json":
        text = json.dumps({"model": cfg.model, "method": cfg.methods[0], "h": grid.h,
                           "t": traj.times.tolist(), "states": traj.states.tolist()}) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"y{i}" for i in range(sys_.dim)])
        for t, y in zip(traj.times.tolist(), traj.states.tolist()):
            w.writerow([repr(t)] + [repr(v) for v in y])
        text = buf.getvalue()
    ex.write_text(cfg.output, text, out)
    return EXIT_OK


def cmd_order(args, out) -> int:
    if not args.h:
        args.h = (0.1, 0.05, 0.025)
    cfg = _config_from_args(args)
    if len(cfg.methods) != 1:
        raise ex.UsageError("order takes a single method")
    hs = sorted(cfg.h_list, reverse=True)
    if len(hs) < 2:
        raise ex.UsageError("order needs at least two step sizes")
    sys_ = cfg.system()
    y0 = np.array(cfg.initial, dtype=float)
    pairs = []
    for h in hs:
        grid = ex.make_grid(cfg.T, h)
        try:
            traj = ex.run_method(sys_, cfg.methods[0], y0, grid, cfg.taylor_flavor)
        except DivergenceError as exc:
            print(f"expstep: h={h!r}: {exc}", file=sys.stderr)
            return EXIT_DIVERGED if cfg.required else EXIT_OK
        pairs.append((grid.h, sup_node_error(traj, ex.reference_trajectory(sys_, y0, grid))))
    p = observed_order(pairs)
    if cfg.format == "json":
        text = json.dumps({"model": cfg.model, "method": cfg.methods[0], "metric": "sup_error",
                           "errors": [{"h": h, "error": e} for h, e in pairs], "order": p}) + "\n"
    else:
        lines = ["h,error"] + [f"{h!r},{e!r}" for h, e in pairs] + [f"# observed order: {p!r}"]
        text = "\n".join(lines) + "\n"
    ex.write_text(cfg.output, text, out)
    return EXIT_OK


def _read_profile(text: str):
    if text in ex.PROFILE_NAMES:
        return text
    try:
        raw = Path(text).read_text()
    except OSError:
        raise ex.UsageError(f"profile {text!r} is neither a built-in ({', '.join(ex.PROFILE_NAMES)}) "
                            f"nor a readable file") from None
    vals = []
    for n, line in enumerate(raw.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if line:
            try:
                vals.extend(float(p) for p in line.replace(",", " ").split())
            except ValueError:
                raise ex.UsageError(f"profile line {n}: expected numbers") from None
    return vals


def cmd_burgers(args, out) -> int:
    profile = _read_profile(args.profile)
    try:
        result = ex.run_burgers(args.n, args.m, profile)
    except DivergenceError as exc:
        print(f"expstep: {exc}", file=sys.stderr)
        return EXIT_DIVERGED if args.required else EXIT_OK
    notes = [f"profile: {result.profile}", f"n_space: {args.n}", f"m_time: {args.m}",
             f"max |u| at t=1: {result.final_max!r}"]
    if args.format == "json":
        text = ex.reports_to_json([result.report], {"profile": result.profile, "n_space": args.n,
                                                    "m_time": args.m, "final_max": result.final_max})
    else:
        text = ex.reports_to_csv([result.report], notes)
    ex.write_text(args.out, text, out)
    if args.field:
        with open(args.field, "w", newline="") as fh:
            ex.write_field_csv(result, fh)
    return EXIT_OK


def cmd_lienard(args, out) -> int:
    if args.spec_file and args.spec:
        raise ex.UsageError("give either an inline spec or --spec-file, not both")
    if args.spec_file:
        try:
            text = Path(args.spec_file).read_text()
        except OSError as exc:
            raise ex.UsageError(f"cannot read spec: {exc}") from None
        spec, run = ex.parse_lienard_file(text)
    elif args.spec:
        tokens = [t for arg in args.spec for t in arg.split()]
        spec, run = ex.parse_lienard_tokens(tokens)
    else:
        payload = {}
        for case, line in ex.LIENARD_PRESET.items():
            spec, run = ex.parse_lienard_tokens(line.split())
            payload[case] = {"spec": line, **ex.run_lienard(spec, **run).to_dict()}
        ex.write_text(args.out, json.dumps(payload, indent=2) + "\n", out)
        return EXIT_OK
    verdict = ex.run_lienard(spec, **run)
    payload = {"spec": spec.label, **verdict.to_dict()}
    ex.write_text(args.out, json.dumps(payload, indent=2) + "\n", out)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "table": cmd_table, "burgers": cmd_burgers,
            "lienard": cmd_lienard, "order": cmd_order}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except ValueError as exc:
        # UsageError and validation errors from the library
        print(f"expstep: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
