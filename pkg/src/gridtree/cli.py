"""Command-line front end and benchmark harness.

Verbs: parse, flows, coherency, solve, steiner, bench, export-dot.
Option precedence is flags > config file (flat key=value lines) >
defaults.  Exit codes distinguish parse errors (2), validation errors
(3), infeasibility (4), budget exhaustion (5), bridge failures (6) and
model/configuration problems (7).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import bnb, coherency, dcflow, milp, oracle, render, steiner, twostage
from .errors import (
    BridgeError,
    BudgetError,
    CaseParseError,
    GridTreeError,
    InfeasibleError,
    ModelBuildError,
    NetworkValidationError,
    UnsupportedOperation,
)
from .network import Network, network_to_json, parse_case
from .solution import (
    METHOD_MILP,
    METHOD_SSR,
    solution_from_json,
    solution_to_json,
)

BRIDGE_ENV = "GRIDTREE_BRIDGE_CMD"
METHODS = ("two-stage", "milp", "ssr", "oracle")

_EXIT_CODES = (
    (CaseParseError, 2),
    (NetworkValidationError, 3),
    (InfeasibleError, 4),
    (BudgetError, 5),
    (BridgeError, 6),
    (UnsupportedOperation, 7),
    (ModelBuildError, 7),
    (GridTreeError, 1),
)


@dataclass
class RunConfig:
    case: Optional[str] = None
    k: int = 2
    method: str = "milp"
    groups: Optional[str] = None
    slack: Optional[int] = None  # external bus id
    bridge_cmd: Optional[str] = None
    bridge_timeout: float = 600.0
    seed: int = 0
    out: Optional[str] = None
    no_timing: bool = False
    limit: int = oracle.DEFAULT_LIMIT
    time_limit: Optional[float] = None


def _load_config_file(path: str) -> dict:
    values = {}
    for line_no, raw in enumerate(_read_text(path, "config file").splitlines(), start=1):
        line = raw.split("#")[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CaseParseError(f"config line is not key=value: {raw!r}", line_no=line_no)
        key, val = line.split("=", 1)
        values[key.strip().replace("-", "_")] = val.strip()
    return values


def _merged_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    file_values = _load_config_file(args.config) if getattr(args, "config", None) else {}
    for f in dataclasses.fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None and flag is not False:
            setattr(cfg, f.name, flag)
        elif f.name in file_values:
            raw = file_values[f.name]
            if f.type in ("int", "Optional[int]"):
                setattr(cfg, f.name, int(raw))
            elif f.type in ("float", "Optional[float]"):
                setattr(cfg, f.name, float(raw))
            elif f.type == "bool":
                setattr(cfg, f.name, raw.lower() in ("1", "true", "yes"))
            else:
                setattr(cfg, f.name, raw)
    return cfg


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CaseParseError(f"cannot read {what} {path!r}: {exc.strerror or exc}")


def _load_network(case_path) -> Network:
    if not case_path:
        raise ModelBuildError("no case file given (use --case or a config entry)")
    return parse_case(_read_text(case_path, "case file"))


def _flowed_network(cfg: RunConfig):
    net = _load_network(cfg.case)
    slack = net.index_of(cfg.slack) if cfg.slack is not None else 0
    flows = dcflow.solve_dc(net, slack, dcflow.balanced_injections(net))
    return dcflow.with_flows(net, flows), flows


def _load_groups(net, cfg: RunConfig):
    if cfg.groups:
        return coherency.groups_from_json(net, _read_text(cfg.groups, "groups file"))
    return coherency.slow_coherency(net, cfg.k)


def _bridge(cfg: RunConfig) -> Optional[milp.SolverBridge]:
    cmd = cfg.bridge_cmd or os.environ.get(BRIDGE_ENV)
    if not cmd:
        return None
    return milp.SolverBridge(command=cmd, timeout_s=cfg.bridge_timeout)


def _solve_with_config(cfg: RunConfig):
    net, _ = _flowed_network(cfg)
    groups = _load_groups(net, cfg)
    bridge = _bridge(cfg)

    if cfg.method == "two-stage":
        return net, groups, twostage.two_stage(net, groups)
    if cfg.method == "oracle":
        return net, groups, oracle.enumerate_optimal(net, groups, limit=cfg.limit)

    fixings = None
    method_tag = METHOD_MILP
    started = time.perf_counter()
    if cfg.method == "ssr":
        trees = [steiner.steiner_tree(net, g) for g in groups.groups]
        fixings = steiner.build_fixings(net, trees)
        method_tag = METHOD_SSR
    if bridge is not None:
        sol = milp.solve_via_bridge(net, groups, bridge, ssr=fixings, method=method_tag)
    else:
        sol, _stats = bnb.solve_builtin(
            net, groups, ssr=fixings, time_limit_s=cfg.time_limit, method=method_tag
        )
    # SSR runtime includes the Steiner precomputation
    sol = dataclasses.replace(sol, runtime_s=time.perf_counter() - started)
    return net, groups, sol


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

def cmd_parse(args) -> int:
    cfg = _merged_config(args)
    net = _load_network(cfg.case)
    _emit(network_to_json(net), cfg.out)
    return 0


def cmd_flows(args) -> int:
    cfg = _merged_config(args)
    net = _load_network(cfg.case)
    slack = net.index_of(cfg.slack) if cfg.slack is not None else 0
    flows = dcflow.solve_dc(net, slack, dcflow.balanced_injections(net))
    _emit(flows.to_json(), cfg.out)
    return 0


def cmd_coherency(args) -> int:
    cfg = _merged_config(args)
    net = _load_network(cfg.case)
    groups = coherency.slow_coherency(net, cfg.k)
    _emit(coherency.groups_to_json(net, groups), cfg.out)
    return 0


def cmd_solve(args) -> int:
    cfg = _merged_config(args)
    if cfg.method not in METHODS:
        raise ModelBuildError(f"unknown method {cfg.method!r}; choose from {METHODS}")
    net, _groups, sol = _solve_with_config(cfg)
    _emit(solution_to_json(net, sol, include_runtime=not cfg.no_timing), cfg.out)
    return 0


def cmd_steiner(args) -> int:
    cfg = _merged_config(args)
    net, _ = _flowed_network(cfg)
    groups = _load_groups(net, cfg)
    trees = [steiner.steiner_tree(net, g) for g in groups.groups]
    doc = {
        "k": groups.k,
        "trees": [
            {
                "terminals": sorted(net.buses[i].id for i in t.terminals),
                "nodes": sorted(net.buses[i].id for i in t.nodes),
                "edges": sorted(
                    [
                        min(
                            net.buses[net.line_by_id[e].from_bus].id,
                            net.buses[net.line_by_id[e].to_bus].id,
                        ),
                        max(
                            net.buses[net.line_by_id[e].from_bus].id,
                            net.buses[net.line_by_id[e].to_bus].id,
                        ),
                    ]
                    for e in t.edges
                ),
            }
            for t in trees
        ],
    }
    _emit(json.dumps(doc, indent=2) + "\n", cfg.out)
    return 0


def cmd_bench(args) -> int:
    cfg = _merged_config(args)
    cases = [c for c in args.cases.split(",") if c]
    ks = [int(x) for x in args.k_values.split(",") if x]
    methods = [m for m in args.methods.split(",") if m]
    for m in methods:
        if m not in METHODS:
            raise ModelBuildError(f"unknown method {m!r}; choose from {METHODS}")

    rows = []
    objective: dict[tuple[str, int, str], float] = {}
    for case in cases:
        for k in ks:
            for method in methods:
                cell = dataclasses.replace(cfg, case=case, k=k, method=method)
                name = Path(case).stem
                try:
                    _net, _groups, sol = _solve_with_config(cell)
                    objective[(name, k, method)] = sol.disruption_mw
                    rows.append(
                        [name, k, method, sol.disruption_mw, sol.runtime_s, None, "ok"]
                    )
                except GridTreeError as exc:
                    rows.append([name, k, method, None, None, None, type(exc).__name__])

    lines = ["case,k,method,objective_mw,runtime_s,pct_vs_milp,status"]
    for name, k, method, obj, runtime, _pct, status in rows:
        base = objective.get((name, k, "milp"))
        if obj is None:
            pct_txt, obj_txt, rt_txt = "", "", ""
        else:
            obj_txt = f"{obj:.2f}"
            rt_txt = "0.00" if cfg.no_timing else f"{runtime:.2f}"
            pct_txt = (
                f"{100.0 * (obj - base) / base:+.2f}"
                if base not in (None, 0.0)
                else ("+0.00" if method == "milp" else "")
            )
        lines.append(f"{name},{k},{method},{obj_txt},{rt_txt},{pct_txt},{status}")
    _emit("\n".join(lines) + "\n", cfg.out)
    return 0


def cmd_export_dot(args) -> int:
    cfg = _merged_config(args)
    sol_path = args.solution
    if sol_path:
        net, _ = _flowed_network(cfg)
        sol = solution_from_json(net, _read_text(sol_path, "solution file"))
        text = render.to_dot(net, sol)
    else:
        net = _load_network(cfg.case)
        text = render.to_dot(net)
    _emit(text, cfg.out)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--case", help="MATPOWER-subset case file (flag or config key)")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--slack", type=int, help="slack bus external id (default: first bus)")
    p.add_argument("--seed", type=int, help="seed recorded for reproducibility")
    p.add_argument("--no-timing", action="store_true", help="zero runtime fields in outputs")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gridtree",
        description="Tree partitioning of power networks with minimal flow disruption.",
    )
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("parse", help="parse a case file and dump network JSON")
    _add_common(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("flows", help="solve the DC power flow")
    _add_common(p)
    p.set_defaults(func=cmd_flows)

    p = sub.add_parser("coherency", help="compute slow-coherency generator groups")
    _add_common(p)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_coherency)

    p = sub.add_parser("solve", help="compute a tree partition")
    _add_common(p)
    p.add_argument("--k", type=int)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--groups", help="groups JSON file (skips slow coherency)")
    p.add_argument("--bridge-cmd", dest="bridge_cmd", help="external solver command template")
    p.add_argument("--bridge-timeout", dest="bridge_timeout", type=float)
    p.add_argument("--limit", type=int, help="oracle enumeration limit")
    p.add_argument("--time-limit", dest="time_limit", type=float, help="built-in solver budget (s)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("steiner", help="Steiner trees connecting each coherent group")
    _add_common(p)
    p.add_argument("--k", type=int)
    p.add_argument("--groups", help="groups JSON file")
    p.set_defaults(func=cmd_steiner)

    p = sub.add_parser("bench", help="benchmark methods across cases (CSV)")
    p.add_argument("--cases", required=True, help="comma-separated case files")
    p.add_argument("--k-values", dest="k_values", required=True, help="comma-separated k values")
    p.add_argument("--methods", required=True, help="comma-separated methods")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--slack", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-timing", action="store_true")
    p.add_argument("--bridge-cmd", dest="bridge_cmd")
    p.add_argument("--bridge-timeout", dest="bridge_timeout", type=float)
    p.add_argument("--time-limit", dest="time_limit", type=float)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export-dot", help="render a network or solution as DOT")
    _add_common(p)
    p.add_argument("--solution", help="solution JSON produced by solve")
    p.set_defaults(func=cmd_export_dot)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GridTreeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        for cls, code in _EXIT_CODES:
            if isinstance(exc, cls):
                return code
        return 1


if __name__ == "__main__":
    sys.exit(main())
