"""Command-line front-end.

Every command produces a list of flat records plus a summary dict.  CSV
output starts with ``#`` lines echoing the effective configuration and seed;
JSON output carries the same content and follows ``schema/output.schema.json``.

Exit codes: 0 success, 1 usage error, 2 certification failure, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import lgi, macroreal, maxviol, measure, scenarios
from .dynamics import CwmParams
from .errors import ConvergenceError, LGKitError

EXIT_OK, EXIT_USAGE, EXIT_CERT, EXIT_CONVERGENCE = 0, 1, 2, 3
SIG_DIGITS = 12
SEED_MAX = 2**64


class UsageError(Exception):
    pass


@dataclass
class Result:
    records: list
    summary: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    status: int = EXIT_OK


# --- argument parsing ---------------------------------------------------------

_NAMES = {"pi": math.pi, "e": math.e, "inf": math.inf}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and type(node.value) in (int, float):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    raise ValueError("unsupported expression")


def parse_number(text: str) -> float:
    """Arithmetic on numbers and ``pi``, e.g. ``2*pi/3``."""
    try:
        return _eval_node(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot read number {text!r}") from exc


def parse_grid(text: str) -> tuple:
    """``start:stop:steps`` (inclusive, evenly spaced) or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return (parse_number(parts[0]),)
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:steps, got {text!r}")
    start, stop = parse_number(parts[0]), parse_number(parts[1])
    try:
        steps = int(parts[2])
    except ValueError as exc:
        raise UsageError(f"grid steps must be an integer, got {parts[2]!r}") from exc
    if steps < 1:
        raise UsageError("grid needs at least one point")
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise UsageError("grid ends must be finite")
    if steps == 1:
        return (start,)
    return tuple(float(x) for x in np.linspace(start, stop, steps))


def parse_signs(text: str) -> tuple:
    chars = text.replace(",", "").replace(" ", "")
    if not chars or any(c not in "+-" for c in chars):
        raise UsageError(f"signs must be a string of + and -, got {text!r}")
    return tuple(1 if c == "+" else -1 for c in chars)


def parse_seed(text: str) -> int:
    try:
        seed = int(text, 0)
    except ValueError as exc:
        raise UsageError(f"seed must be an integer, got {text!r}") from exc
    if not 0 <= seed < SEED_MAX:
        raise UsageError("seed must be a 64-bit unsigned integer")
    return seed


def _wrap(fn):
    # argparse turns ValueError/TypeError into its own message; keep ours
    def conv(text):
        try:
            return fn(text)
        except UsageError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
    conv.__name__ = fn.__name__
    return conv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--grid", type=_wrap(parse_grid), help="start:stop:steps, ends may use pi")
    p.add_argument("--seed", type=_wrap(parse_seed), default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--tol", type=float, default=lgi.REPORT_TOL, help="violation tolerance")
    p.add_argument("--workers", type=int, default=1, help="processes for grid points")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="scenario or target parameter; repeatable")
    p.add_argument("--config", help="flat key = value file; flags given here win")
    return p


SCENARIOS = ("three-box", "goggin", "knee", "palacios", "weak-k3", "fcs", "charge-lgi",
             "witness", "entropic")
TARGETS = ("kn", "chsh", "depolarized", "hardy")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="lgkit", description="Leggett-Garg tests on small quantum systems.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sweep-kn", parents=[common], help="K_n of the Rabi qubit over Omega tau")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--signs", type=_wrap(parse_signs))

    p = sub.add_parser("certify", parents=[common], help="classical oracle suites")
    p.add_argument("suite", choices=tuple(macroreal.SUITES))
    p.add_argument("--count", type=int, help="models or chains to draw")
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=12)

    p = sub.add_parser("scenario", parents=[common], help="named experiment reproductions")
    p.add_argument("name", choices=SCENARIOS)

    p = sub.add_parser("maximize", parents=[common], help="largest quantum violation")
    p.add_argument("target", choices=TARGETS)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--starts", type=int, default=maxviol.N_STARTS)
    return parser


def _flag_names(parser: argparse.ArgumentParser, command: str) -> set:
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    return {opt for a in sub.choices[command]._actions for opt in a.option_strings}


def read_config(path: str) -> list:
    """``key = value`` lines as ``(key, value)`` pairs; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from exc
    pairs = []
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        pairs.append((key, value))
    return pairs


def _expand_config(parser, argv: list) -> list:
    # config entries become flags placed before the command-line ones, so
    # that explicit flags override them
    argv = list(argv)
    path = None
    for k, tok in enumerate(argv):
        if tok == "--config" and k + 1 < len(argv):
            path = argv[k + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None or not argv:
        return argv
    command = argv[0]
    if command not in {"sweep-kn", "certify", "scenario", "maximize"}:
        return argv
    flags = _flag_names(parser, command)
    extra = []
    for key, value in read_config(path):
        flag = "--" + key.replace("_", "-")
        if key in ("config", "out"):
            if key == "out":
                extra.append(f"--out={value}")
            continue
        if flag in flags:
            extra.append(f"{flag}={value}")
        elif command in ("scenario", "maximize"):
            extra.append(f"--set={key}={value}")
        else:
            raise UsageError(f"{path}: unknown key {key!r} for {command}")
    return argv[:1] + extra + argv[1:]


# --- scenario parameters --------------------------------------------------

def _params(pairs: list, allowed: dict) -> dict:
    """``--set`` pairs read through ``allowed`` (name -> converter, default)."""
    out = {k: d for k, (_, d) in allowed.items()}
    for item in pairs:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        if key not in allowed:
            names = ", ".join(sorted(allowed)) or "none"
            raise UsageError(f"unknown parameter {key!r} (accepted: {names})")
        try:
            out[key] = allowed[key][0](value)
        except (ValueError, UsageError) as exc:
            raise UsageError(f"bad value for {key}: {value!r}") from exc
    return out


def _text(value: str) -> str:
    return value


# --- grid evaluation -------------------------------------------------------

def _map(fn, points, workers: int) -> list:
    # results come back in grid order whatever the completion order
    if workers <= 1 or len(points) < 2:
        return [fn(p) for p in points]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, points, chunksize=max(1, len(points) // (4 * workers))))


def _sweep_point(n, signs, tol, w):
    row = scenarios.sweep_kn(n, w, signs, tol)
    if n == 3 and signs is None:
        prime = scenarios.sweep_kn(3, w, (-1, -1, -1), tol)
        row.update(K3_prime=prime["value"], K3_prime_violated=prime["violated"])
    return row


def cmd_sweep_kn(args) -> Result:
    if args.n < 3:
        raise UsageError("--n must be at least 3")
    if args.signs is not None and len(args.signs) != args.n:
        raise UsageError(f"--signs needs {args.n} entries")
    grid = args.grid or parse_grid("0:pi:181")
    rows = _map(partial(_sweep_point, args.n, args.signs, args.tol), grid, args.workers)
    lo, hi = lgi.kn_bounds(args.n)
    summary = {"n": args.n, "points": len(rows), "violated_points": sum(r["violated"] for r in rows),
               "max_value": max(r["value"] for r in rows), "quantum_ceiling": maxviol.kn_ceiling(args.n),
               "lower_bound": lo, "upper_bound": hi}
    return Result(rows, summary)


def cmd_certify(args) -> Result:
    if args.suite == "enumerate":
        if not 3 <= args.n_min <= args.n_max <= macroreal.MAX_ENUMERATION:
            raise UsageError(f"need 3 <= n-min <= n-max <= {macroreal.MAX_ENUMERATION}")
        summ = macroreal.certify_enumerate(args.n_min, args.n_max)
        rows = []
        for n in range(args.n_min, args.n_max + 1):
            got = macroreal.enumerate_bounds(n)
            lo, hi = lgi.kn_bounds(n)
            rows.append({"n": n, "enumerated_min": got["min"], "enumerated_max": got["max"],
                         "formula_min": lo, "formula_max": hi,
                         "match": got["min"] == lo and got["max"] == hi})
    else:
        fn = macroreal.SUITES[args.suite]
        kwargs = {"seed": args.seed, "tol": args.tol}
        if args.count is not None:
            if args.count < 1:
                raise UsageError("--count must be positive")
            kwargs["count"] = args.count
        summ = fn(**kwargs)
        rows = []
    summary = summ.as_record()
    if not rows:
        rows = [summary]
    status = EXIT_OK if summ.passed else EXIT_CERT
    return Result(rows, summary, list(summ.violations), status)


# each scenario: (allowed --set parameters, default grid or None, runner)

def _sc_three_box(params, grid, tol, workers):
    rec = scenarios.three_box(scenarios.ThreeBoxSpec(params["p1"], params["p2"], params["completion"]))
    return [rec], {"golden_K3_prime": 13 / 9, "golden_C31": -7 / 9,
                   "golden_alice_win_given_find3": 1.0}


def _goggin_point(knowledge, tol, theta):
    return scenarios.goggin(theta, knowledge, tol=tol)


def _sc_goggin(params, grid, tol, workers):
    rows = _map(partial(_goggin_point, params["knowledge"], tol), grid, workers)
    agree = sum(r["family_violated"] == r["strange"] for r in rows)
    return rows, {"points": len(rows), "violated_points": sum(r["violated"] for r in rows),
                  "family_violated_points": sum(r["family_violated"] for r in rows),
                  "strange_points": sum(r["strange"] for r in rows),
                  "biconditional_points": agree}


def _knee_point(zeta, tol, theta):
    return scenarios.knee(theta, zeta, tol=tol)


def _sc_knee(params, grid, tol, workers):
    zeta = params["zeta"]
    rows = _map(partial(_knee_point, zeta, tol), grid, workers)
    best = scenarios.knee_minimum(zeta)
    ideal = scenarios.knee_minimum(0.0)
    meas = scenarios.knee(best["theta"], zeta, params["measured_f"], tol)
    return rows, {"zeta": zeta, "bound": meas["bound"], "measured_f": params["measured_f"],
                  "measured_violated": meas["measured_violated"], "f_min": best["f_min"],
                  "theta_min": best["theta"], "ideal_f_min": ideal["f_min"],
                  "golden_ideal_f_min": -0.5, "golden_bound": -2 * scenarios.PUBLISHED_KNEE["zeta"]}


def _sc_palacios(params, grid, tol, workers):
    cwm = CwmParams.with_total_dephasing(params["omega"], params["dephasing"])
    out = scenarios.palacios(cwm, grid)
    rows = out.pop("curve")
    out["regime"] = str(out["regime"])
    out["golden_undamped_peak"] = 1.5
    return rows, out


def _weak_point(lam, nodes, w):
    return scenarios.weak_k3(w, lam, nodes)


def _sc_weak_k3(params, grid, tol, workers):
    rows = _map(partial(_weak_point, params["lambda"], params["nodes"]), grid, workers)
    return rows, {"lambda": params["lambda"], "max_K3": max(r["K3"] for r in rows),
                  "max_closed_error": max(abs(r["K3"] - r["K3_closed"]) for r in rows),
                  "negative_entry_points": sum(r["mh_relevant_entry"] < 0 for r in rows),
                  "K3_above_1_points": sum(r["K3"] > 1 for r in rows),
                  "golden_undamped_max": 1.5}


def _sc_fcs(params, grid, tol, workers):
    rec = scenarios.fcs_search()
    return [rec], {"classical_bound": 1.0, "exceeds_bound": rec["exceeds_bound"]}


def _sc_charge(params, grid, tol, workers):
    rec = scenarios.charge_search(which=params["which"])
    return [rec], {"violated": rec["violated"]}


def _witness_point(lam, w):
    return scenarios.witness(w, lam)


def _sc_witness(params, grid, tol, workers):
    rows = _map(partial(_witness_point, params["lambda"]), grid, workers)
    return rows, {"lambda": params["lambda"], "max_deficit": max(r["deficit"] for r in rows),
                  "golden_projective_deficit_half_pi": 0.5}


def _entropic_point(n_times, w):
    return scenarios.entropic_rabi(w, n_times)


def _sc_entropic(params, grid, tol, workers):
    rows = _map(partial(_entropic_point, params["n_times"]), grid, workers)
    return rows, {"n_times": params["n_times"], "min_value": min(r["value"] for r in rows),
                  "violated_points": sum(r["violated"] for r in rows)}


_NUM = parse_number

SCENARIO_TABLE = {
    "three-box": ({"p1": (_NUM, 0.5), "p2": (_NUM, 0.5), "completion": (_text, "gram-schmidt")},
                  None, _sc_three_box),
    "goggin": ({"knowledge": (_NUM, scenarios.GOGGIN_KNOWLEDGE[0])}, "-pi:pi:181", _sc_goggin),
    "knee": ({"zeta": (_NUM, scenarios.PUBLISHED_KNEE["zeta"]),
              "measured_f": (_NUM, scenarios.PUBLISHED_KNEE["f"])}, "0:pi:181", _sc_knee),
    "palacios": ({"omega": (_NUM, 1.0), "dephasing": (_NUM, 0.0)}, "0.01:pi:100", _sc_palacios),
    "weak-k3": ({"lambda": (_NUM, 0.0), "nodes": (int, measure.DEFAULT_NODES)}, "0:pi:181",
                _sc_weak_k3),
    "fcs": ({}, None, _sc_fcs),
    "charge-lgi": ({"which": (_text, "L")}, None, _sc_charge),
    "witness": ({"lambda": (_NUM, math.inf)}, "0:pi:181", _sc_witness),
    "entropic": ({"n_times": (int, 3)}, "0:pi/2:91", _sc_entropic),
}


def cmd_scenario(args) -> Result:
    allowed, default_grid, run = SCENARIO_TABLE[args.name]
    params = _params(args.set, allowed)
    if default_grid is None and args.grid is not None:
        raise UsageError(f"scenario {args.name} takes no grid")
    grid = args.grid or (parse_grid(default_grid) if default_grid else None)
    rows, summary = run(params, grid, args.tol, args.workers)
    return Result(rows, {"scenario": args.name, **params, **summary})


def cmd_maximize(args) -> Result:
    if args.starts < 1:
        raise UsageError("--starts must be positive")
    if args.target == "kn":
        _params(args.set, {})
        res = maxviol.maximize_kn(args.n, args.starts, args.seed)
        extra = {"n": args.n, "ceiling": maxviol.kn_ceiling(args.n), "ideal_angle": math.pi / args.n}
    elif args.target == "chsh":
        _params(args.set, {})
        res = maxviol.maximize_temporal_chsh(args.starts, args.seed)
        extra = {"ceiling": 2 * math.sqrt(2)}
    elif args.target == "depolarized":
        c = _params(args.set, {"c": (_NUM, 0.8)})["c"]
        res = maxviol.max_k3_depolarized_numeric(c, args.starts, args.seed)
        extra = {"c": c, "ceiling": maxviol.max_k3_depolarized(c)}
    else:
        _params(args.set, {})
        h = maxviol.hardy_search(args.starts, args.seed)
        rec = {"P_11_pp": h.probabilities[0], "P_12_mp": h.probabilities[1],
               "P_21_pm": h.probabilities[2], "P_22_pp": h.probabilities[3],
               "paradox": not h.check.consistent_with_macrorealism}
        return Result([rec], {"target": "hardy", "paradox": rec["paradox"]})
    rec = {"value": res.value, **extra, "converged": res.converged, "grad_norm": res.grad_norm,
           "iterations": res.iterations, "starts": res.starts}
    rec.update({f"angle_{k + 1}": float(a) for k, a in enumerate(res.angles)})
    status = EXIT_OK if res.converged else EXIT_CONVERGENCE
    return Result([rec], {"target": args.target, "converged": res.converged}, status=status)


COMMANDS = {"sweep-kn": cmd_sweep_kn, "certify": cmd_certify, "scenario": cmd_scenario,
            "maximize": cmd_maximize}


# --- output -------------------------------------------------------------------

def _scalar(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.{SIG_DIGITS}g}") + 0.0
    if value is None or isinstance(value, str):
        return value
    return str(value)


def _cell(value) -> str:
    v = _scalar(value)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    return str(v)


def _plain(obj):
    # nested structures, e.g. serialised offending models
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    return _scalar(obj)


def config_echo(args) -> dict:
    echo = {"command": args.command}
    for key in ("suite", "name", "target", "n", "signs", "count", "n_min", "n_max", "starts"):
        if hasattr(args, key):
            echo[key] = getattr(args, key)
    if echo.get("signs") is not None:
        echo["signs"] = "".join("+" if s > 0 else "-" for s in echo["signs"])
    echo["grid_points"] = len(args.grid) if args.grid else None
    if args.grid:
        echo["grid_start"], echo["grid_stop"] = args.grid[0], args.grid[-1]
    echo["tol"] = args.tol
    echo["set"] = ";".join(args.set) if args.set else None
    return {k: _scalar(v) for k, v in echo.items() if v is not None}


def _columns(records: list) -> list:
    cols = []
    for rec in records:
        for k in rec:
            if k not in cols:
                cols.append(k)
    return cols


def render_csv(args, result: Result) -> str:
    buf = io.StringIO()
    buf.write(f"# lgkit {args.command}\n")
    for k, v in config_echo(args).items():
        buf.write(f"# config {k}={_cell(v)}\n")
    buf.write(f"# seed={args.seed}\n")
    for k, v in result.summary.items():
        buf.write(f"# summary {k}={_cell(v)}\n")
    for item in result.violations:
        buf.write("# violation " + json.dumps(_plain(item), sort_keys=True) + "\n")
    cols = _columns(result.records)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for rec in result.records:
        w.writerow([_cell(rec.get(c)) for c in cols])
    return buf.getvalue()


def render_json(args, result: Result) -> str:
    doc = {
        "command": args.command,
        "config": config_echo(args),
        "seed": args.seed,
        "summary": {k: _scalar(v) for k, v in result.summary.items()},
        "records": [{k: _scalar(v) for k, v in rec.items()} for rec in result.records],
        "violations": [_plain(v) for v in result.violations],
    }
    return json.dumps(doc, indent=2) + "\n"


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_expand_config(parser, argv))
        result = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except LGKitError as exc:
        # ValidationError and friends: the inputs broke a precondition
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render_json(args, result) if args.format == "json" else render_csv(args, result)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if result.violations:
        for item in result.violations:
            print("offending: " + json.dumps(_plain(item), sort_keys=True), file=sys.stderr)
    if result.status == EXIT_CONVERGENCE:
        print("error: optimisation did not converge", file=sys.stderr)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
