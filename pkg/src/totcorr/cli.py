"""Command-line front end: ``totcorr {sweep,ordering,axioms,inspect,render}``.

Exit status is 0 on success, 2 on invalid input, 1 on any other failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import axioms, experiments, plotting
from .errors import ConfigError, TotcorrError
from .measures.kinds import parse_measures
from .optimize import OptimizerConfig
from .states import load_state

log = logging.getLogger("totcorr")

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID = 0, 1, 2

# defaults applied after the config file, so flags > config file > these
DEFAULTS = {
    "n": 10_000,
    "dims": "2,2",
    "rank": None,
    "measures": None,
    "seed": 42,
    "normalize": "by_reference_state",
    "out": None,
    "opt_restarts": 8,
    "opt_iters": 400,
    "opt_seed": 0,
    "workers": 1,
    "csv": None,
    "x": "qmi",
    "margin": 1e-4,
    "limit": 100,
    "append_reference": False,
    "figures": False,
    "scale": 1.0,
    "as_json": False,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(_fail(EXIT_INVALID, f"{self.prog}: error: {message}"))


def _fail(code: int, message: str) -> int:
    print(message, file=sys.stderr)
    return code


def _common(p: argparse.ArgumentParser, *flags: str) -> None:
    add = {
        "n": lambda: p.add_argument("--n", type=int, default=None, help="number of random states"),
        "dims": lambda: p.add_argument("--dims", default=None, help="local dimensions, e.g. 2,2"),
        "rank": lambda: p.add_argument("--rank", type=int, default=None, help="ensemble rank (default full)"),
        "measures": lambda: p.add_argument("--measures", default=None, help="comma-separated measure list"),
        "seed": lambda: p.add_argument("--seed", type=int, default=None, help="64-bit seed"),
        "normalize": lambda: p.add_argument("--normalize", default=None, choices=experiments.NORMALIZATIONS),
        "out": lambda: p.add_argument("--out", default=None, help="output path (default stdout)"),
        "workers": lambda: p.add_argument("--workers", type=int, default=None, help="worker processes"),
    }
    for f in flags:
        add[f]()
    p.add_argument("--opt-restarts", type=int, default=None, help="optimizer restarts per state")
    p.add_argument("--opt-iters", type=int, default=None, help="optimizer iteration cap")
    p.add_argument("--opt-seed", type=int, default=None, help="seed for random restarts")
    p.add_argument("--config", default=None, help="JSON file of option values")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="totcorr", description="Total-correlation measures, axiom checks and random-state sweeps.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sweep", help="evaluate measures on random states, write CSV")
    _common(p, "n", "dims", "rank", "measures", "seed", "normalize", "out", "workers")
    p.add_argument("--append-reference", action="store_true", default=None,
                   help="append the reference state and 10 product states")
    p.add_argument("--figures", action="store_true", default=None,
                   help="also render SVG scatters next to --out")

    p = sub.add_parser("ordering", help="find state pairs ranked oppositely by two measures")
    _common(p, "n", "dims", "rank", "measures", "seed", "normalize", "out", "workers")
    p.add_argument("--csv", default=None, help="sweep CSV to scan (otherwise run a sweep)")
    p.add_argument("--x", default=None, help="measure compared against each of --measures (default qmi)")
    p.add_argument("--margin", type=float, default=None)
    p.add_argument("--limit", type=int, default=None, help="witnesses kept per pair")

    p = sub.add_parser("axioms", help="run the axiom checks and print the compliance matrix")
    _common(p, "measures", "seed", "out")
    p.add_argument("--scale", type=float, default=None, help="multiply every trial count")

    p = sub.add_parser("inspect", help="evaluate measures on one state file")
    _common(p, "measures")
    p.add_argument("state", help="JSON state file")
    p.add_argument("--json", dest="as_json", action="store_true", default=None)

    p = sub.add_parser("render", help="SVG scatter(s) from a sweep CSV")
    _common(p, "measures", "out")
    p.add_argument("--csv", default=None, required=False, help="sweep CSV")
    p.add_argument("--x", default=None, help="x-axis measure (default qmi)")
    return parser


def _load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    out = {}
    for key, value in data.items():
        k = key.replace("-", "_")
        if k not in DEFAULTS:
            raise ConfigError(f"{path}: unknown option {key!r}")
        if k in ("dims", "measures") and isinstance(value, list):
            value = ",".join(str(v) for v in value)
        out[k] = value
    return out


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over the defaults."""
    opts = dict(DEFAULTS)
    if args.config:
        opts.update(_load_config(args.config))
    for k, v in vars(args).items():
        if v is not None and k in DEFAULTS:
            opts[k] = v
    return opts


def _dims(text) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"bad --dims {text!r}; expected e.g. 2,2") from None


def _opt(o: dict) -> OptimizerConfig:
    return OptimizerConfig(restarts=int(o["opt_restarts"]), max_iters=int(o["opt_iters"]), seed=int(o["opt_seed"]))


def _sweep_config(o: dict) -> experiments.SweepConfig:
    measures = parse_measures(o["measures"]) if o["measures"] else experiments.DEFAULT_MEASURES
    return experiments.SweepConfig(
        n_states=int(o["n"]), dims=_dims(o["dims"]), rank=o["rank"], measures=tuple(measures),
        seed=int(o["seed"]), normalization=o["normalize"], opt=_opt(o), workers=int(o["workers"]),
    )


def _run_sweep(o: dict) -> tuple[experiments.SweepConfig, list[experiments.SweepRecord]]:
    cfg = _sweep_config(o)
    extra = experiments.reference_extras(cfg) if o["append_reference"] else ()
    return cfg, experiments.sweep(cfg, extra)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_sweep(o: dict) -> int:
    cfg, records = _run_sweep(o)
    names = [m.name for m in cfg.measures]
    _emit(experiments.records_to_csv(records, names), o["out"])
    if o["figures"]:
        if not o["out"]:
            raise ConfigError("--figures needs --out so the figures have a place to go")
        stem = Path(o["out"]).with_suffix("")
        others = [n for n in names if n != "qmi"]
        if "qmi" in names and others:
            plotting.render_panels(records, "qmi", others, f"{stem}_panels.svg")
            for n in others:
                plotting.render_scatter(records, "qmi", n, f"{stem}_qmi_vs_{n.replace(':', '')}.svg")
        log.info("figures written next to %s", o["out"])
    return EXIT_OK


def cmd_ordering(o: dict) -> int:
    records = experiments.read_csv(o["csv"]) if o["csv"] else _run_sweep(o)[1]
    if not records:
        raise ConfigError("no records to scan")
    x = o["x"]
    others = [m.name for m in parse_measures(o["measures"])] if o["measures"] else [
        n for n in records[0].raw if n != x]
    rows = []
    for b in others:
        found = experiments.ordering_scan(records, x, b, float(o["margin"]), int(o["limit"]))
        print(f"{x} vs {b}: {len(found)} witness pair(s) at margin {o['margin']:g}"
              + (" (limit reached)" if len(found) >= int(o["limit"]) else ""), file=sys.stderr)
        rows += found
    lines = [["measure_a", "measure_b", "rho_id", "sigma_id", "a_rho", "a_sigma", "b_rho", "b_sigma", "margin"]]
    lines += [[w.measure_a, w.measure_b, w.rho_id, w.sigma_id, repr(float(w.a_rho)), repr(float(w.a_sigma)),
               repr(float(w.b_rho)), repr(float(w.b_sigma)), repr(float(w.margin))] for w in rows]
    _emit("".join(",".join(map(str, r)) + "\n" for r in lines), o["out"])
    return EXIT_OK


def cmd_axioms(o: dict) -> int:
    names = [m.name for m in parse_measures(o["measures"])] if o["measures"] else list(axioms.DEFAULT_SUITE)
    scale = float(o["scale"])
    if not scale > 0:
        raise ConfigError("--scale must be positive")
    base = axioms.SuiteConfig()

    def n(x):
        return max(1, round(x * scale))

    cfg = axioms.SuiteConfig(
        seed=int(o["seed"]), opt=_opt(o),
        nonnegativity_trials=n(base.nonnegativity_trials), unitary_trials=n(base.unitary_trials),
        monotonicity_trials=n(base.monotonicity_trials), partial_trace_trials=n(base.partial_trace_trials),
        qudit_trials=n(base.qudit_trials), continuity_trials=n(base.continuity_trials),
        additivity_trials=n(base.additivity_trials),
    )
    reports = axioms.run_suite(names, cfg)
    matrix = axioms.compliance_matrix(reports)
    print(axioms.render_table(matrix))
    if set(axioms.FAMILIES) <= set(matrix):
        diffs = axioms.compare_with_table_i(matrix)
        print("\nreference table: " + ("all cells match" if not diffs else f"{len(diffs)} cell(s) differ"))
        for fam, ax, exp, obs in diffs:
            print(f"  {axioms.FAMILY_TITLES[fam]} / {axioms.AXIOM_TITLES[ax]}: expected {exp!r}, observed {obs!r}")
    if o["out"]:
        Path(o["out"]).write_text(axioms.reports_to_json(reports, matrix) + "\n")
    return EXIT_OK


def cmd_inspect(o: dict, state_path: str) -> int:
    rho = load_state(state_path)
    measures = parse_measures(o["measures"]) if o["measures"] else None
    report = experiments.inspect(rho, measures, _opt(o))
    if o["as_json"]:
        print(json.dumps(report, indent=1))
    else:
        print(experiments.format_inspect(report))
    return EXIT_OK


def cmd_render(o: dict) -> int:
    if not o["csv"]:
        raise ConfigError("render needs --csv")
    if not o["out"]:
        raise ConfigError("render needs --out")
    records = experiments.read_csv(o["csv"])
    names = list(records[0].raw) if records else []
    ys = [m.name for m in parse_measures(o["measures"])] if o["measures"] else [n for n in names if n != o["x"]]
    if len(ys) == 1:
        plotting.render_scatter(records, o["x"], ys[0], o["out"])
    else:
        plotting.render_panels(records, o["x"], ys, o["out"])
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        o = resolve(args)
        if args.command == "sweep":
            return cmd_sweep(o)
        if args.command == "ordering":
            return cmd_ordering(o)
        if args.command == "axioms":
            return cmd_axioms(o)
        if args.command == "inspect":
            return cmd_inspect(o, args.state)
        return cmd_render(o)
    except TotcorrError as exc:
        return _fail(EXIT_INVALID, f"error: {exc}")
    except (OSError, csv.Error) as exc:
        return _fail(EXIT_RUNTIME, f"error: {exc}")
    except Exception as exc:  # anything unexpected is a runtime failure, not bad input
        log.debug("unhandled", exc_info=True)
        return _fail(EXIT_RUNTIME, f"internal error: {type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
