"""Command-line front end: construct, density-table, verify, embed, bounds, simulate."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from fractions import Fraction

from . import __version__
from .bounds import DEFAULT_A, DEFAULT_EPS, assemble_grid
from .density import (
    ZetaSchedule,
    closed_edge_counts,
    gamma_max,
    gamma_monotone_audit,
)
from .embeddings import DEFAULT_CAP, embedding_count, enumeration_gamma_audit, maximality_audit
from .graph_core import (
    Graph,
    HamiltonPowerParams,
    ParameterError,
    build_hamilton_power,
    build_path_power,
    build_prefix,
)
from .simulate import DEFAULT_BUDGET, SweepConfig, sweep

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "construct": {"n": None, "k": None, "prefix": None},
    "density-table": {"k": None, "n": None, "s_min": 3, "s_max": None},
    "verify": {"suite": None, "k": None, "n": None, "s_max": 8},
    "embed": {"pattern": None, "host": None, "cap": DEFAULT_CAP},
    "bounds": {"k": 4, "eps": DEFAULT_EPS, "zeta": "default", "ln_n_grid": None, "a": DEFAULT_A},
    "simulate": {"n": None, "k": None, "model": "gnp", "grid": None, "trials": 100,
                 "budget": DEFAULT_BUDGET, "planted": False},
}
REQUIRED = {
    "construct": ("n", "k"),
    "density-table": ("k", "n"),
    "verify": ("suite", "k", "n"),
    "embed": ("pattern", "host"),
    "bounds": ("ln_n_grid",),
    "simulate": ("n", "k", "grid"),
}
SUITES = ("densest", "gamma-monotone", "closed-forms", "connected-gamma")


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """12 significant digits for floats, num/den for rationals."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return "%.12g" % x
    return str(x)


def parse_list(text, kind=float) -> list:
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [t for t in str(text).split(",") if t.strip()]
    if not items:
        raise UsageError("empty grid")
    try:
        return [kind(t) for t in items]
    except ValueError as exc:
        raise UsageError(f"malformed grid {text!r}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hampow", description=__doc__)
    parser.add_argument("--version", action="version", version=f"hampow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat JSON file of flag values; flags override it")
        p.add_argument("--output", "-o", help="write here instead of stdout")
        p.add_argument("--seed", type=int, default=None)
        return p

    p = common(sub.add_parser("construct", help="emit C_n^k or its prefix H_s as graph JSON"))
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--prefix", type=int, help="emit H_s = C_n^k[1..s] instead")

    p = common(sub.add_parser("density-table", help="closed-form edge counts and gamma(s) as CSV"))
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--s-min", dest="s_min", type=int)
    p.add_argument("--s-max", dest="s_max", type=int)

    p = common(sub.add_parser("verify", help="run an exhaustive audit; exit 1 on any violation"))
    p.add_argument("--suite", choices=SUITES)
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--s-max", dest="s_max", type=int, help="largest order for connected-gamma")

    p = common(sub.add_parser("embed", help="count embeddings of a pattern graph into a host"))
    p.add_argument("--pattern", help="graph JSON file")
    p.add_argument("--host", help="graph JSON file")
    p.add_argument("--cap", type=int)

    p = common(sub.add_parser("bounds", help="log-space second-moment bound pipeline as CSV"))
    p.add_argument("--k", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--zeta", help="default | const:<v>")
    p.add_argument("--ln-n-grid", dest="ln_n_grid", help="comma-separated ln n values")
    p.add_argument("--a", type=float)

    p = common(sub.add_parser("simulate", help="threshold sweep with exact search"))
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--model", choices=("gnp", "gnm"))
    p.add_argument("--grid", help="comma-separated p (gnp) or M (gnm) values")
    p.add_argument("--trials", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--planted", action="store_true", default=None)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cmd = args.command
    cfg = dict(DEFAULTS[cmd])
    cfg["seed"] = 0
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config must be a flat JSON object")
        for key, value in data.items():
            key = key.replace("-", "_")
            if key not in cfg:
                raise UsageError(f"unknown config key {key!r} for {cmd}")
            cfg[key] = value
    for key in list(cfg):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    missing = [key for key in REQUIRED[cmd] if cfg.get(key) is None]
    if missing:
        raise UsageError(f"{cmd}: missing " + ", ".join("--" + m.replace("_", "-") for m in missing))
    return cfg


def config_hash(cmd: str, cfg: dict) -> str:
    canon = json.dumps({"command": cmd, **cfg}, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def header(cmd: str, cfg: dict) -> dict:
    return {"version": __version__, "command": cmd, "config_hash": config_hash(cmd, cfg), "seed": cfg["seed"]}


def render_csv(head: dict, columns, rows) -> str:
    buf = io.StringIO()
    for key, value in head.items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def render_json(head: dict, body: dict) -> str:
    return json.dumps({**head, **body}, indent=2, sort_keys=False, default=fmt) + "\n"


def _params(cfg) -> HamiltonPowerParams:
    return HamiltonPowerParams(int(cfg["n"]), int(cfg["k"]))


def cmd_construct(cfg, head):
    params = _params(cfg)
    if cfg["prefix"] is not None:
        s = int(cfg["prefix"])
        if not 1 <= s <= params.n:
            raise UsageError(f"prefix must lie in [1, {params.n}]")
        g = build_prefix(params, s)
    else:
        g = build_hamilton_power(params)
    return EXIT_OK, render_json(head, {"k": params.k, **g.to_json()})


def cmd_density_table(cfg, head):
    k, n = int(cfg["k"]), int(cfg["n"])
    HamiltonPowerParams(n, k)
    s_min = max(3, int(cfg["s_min"]))
    s_max = n if cfg["s_max"] is None else int(cfg["s_max"])
    if s_max > n:
        raise UsageError("s-max exceeds n")
    rows = []
    for s in range(s_min, s_max + 1):
        e_path, e_prefix = closed_edge_counts(n, k, s)
        g = gamma_max(n, k, s).value
        rows.append((k, n, s, e_path, e_prefix, g.numerator, g.denominator))
    cols = ("k", "n", "s", "e_path", "e_prefix", "gamma_num", "gamma_den")
    return EXIT_OK, render_csv(head, cols, rows)


def _closed_forms_report(n: int, k: int) -> dict:
    params = HamiltonPowerParams(n, k)
    violations = []
    for s in range(1, n + 1):
        e_path, e_prefix = closed_edge_counts(n, k, s)
        built_path = build_path_power(s, k).edge_count
        built_prefix = build_prefix(params, s).edge_count
        if (e_path, e_prefix) != (built_path, built_prefix):
            violations.append({"s": s, "closed": [e_path, e_prefix], "built": [built_path, built_prefix]})
    return {"violations": violations}


def cmd_verify(cfg, head):
    suite, k, n = cfg["suite"], int(cfg["k"]), int(cfg["n"])
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}")
    HamiltonPowerParams(n, k)
    if suite == "densest":
        if n > 20:
            raise UsageError(f"densest enumerates 2^n subsets; n={n} > 20 is infeasible")
        report = maximality_audit(n, k)
        ok = not report["violations"]
    elif suite == "gamma-monotone":
        report = gamma_monotone_audit(n, k)
        ok = report["base_ok"] and not report["violations"]
    elif suite == "closed-forms":
        report = _closed_forms_report(n, k)
        ok = not report["violations"]
    else:
        s_max = int(cfg["s_max"])
        if s_max > n:
            raise UsageError("s-max exceeds n")
        bad = enumeration_gamma_audit(HamiltonPowerParams(n, k), s_max)
        report = {"violations": bad}
        ok = not bad
    body = {"suite": suite, "passed": ok, "report": report}
    return (EXIT_OK if ok else EXIT_VIOLATION), render_json(head, body)


def _load_graph(path: str) -> Graph:
    try:
        with open(path) as fh:
            return Graph.from_json(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read graph {path}: {exc}") from None


def cmd_embed(cfg, head):
    pattern, host = _load_graph(cfg["pattern"]), _load_graph(cfg["host"])
    cap = None if cfg["cap"] in (None, 0) else int(cfg["cap"])
    result = embedding_count(pattern, host, cap)
    return EXIT_OK, render_json(head, result.to_json())


def cmd_bounds(cfg, head):
    grid = parse_list(cfg["ln_n_grid"])
    if any(x <= 1 for x in grid):
        raise UsageError("ln n values must exceed 1")
    zeta = ZetaSchedule.parse(str(cfg["zeta"]))
    reports = assemble_grid(grid, int(cfg["k"]), float(cfg["eps"]), zeta, float(cfg["a"]))
    cols = ("ln_n", "nu", "x_sparse", "T_dd", "T_s", "T_d", "f_minus_one", "flags")
    rows = [(r.ln_n, r.nu, r.x_sparse, r.T_doubleprime, r.T_s, r.T_d, r.f_minus_one_bound, "; ".join(r.flags))
            for r in reports]
    return EXIT_OK, render_csv(head, cols, rows)


def cmd_simulate(cfg, head):
    model = cfg["model"]
    kind = float if model == "gnp" else int
    grid = tuple(parse_list(cfg["grid"], kind))
    sc = SweepConfig(
        n=int(cfg["n"]), k=int(cfg["k"]), grid=grid, trials=int(cfg["trials"]), seed=int(cfg["seed"]),
        model=model, budget=int(cfg["budget"]), planted=bool(cfg["planted"]),
    )
    if sc.n < 3 or sc.k < 1 or sc.trials < 0:
        raise UsageError("need n >= 3, k >= 1, trials >= 0")
    rows = sweep(sc)
    cols = ("grid_value", "trials", "found", "absent", "timeout", "mean_nodes", "p_star_reference")
    data = [(kind(r.grid_value), r.trials, r.found, r.absent, r.timeout, float(r.mean_nodes), r.p_star_reference)
            for r in rows]
    return EXIT_OK, render_csv(head, cols, data)


HANDLERS = {
    "construct": cmd_construct,
    "density-table": cmd_density_table,
    "verify": cmd_verify,
    "embed": cmd_embed,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve(args)
        code, text = HANDLERS[args.command](cfg, header(args.command, cfg))
    except (UsageError, ParameterError) as exc:
        print(f"hampow {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main(argv=None) -> None:
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
