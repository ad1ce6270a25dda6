"""Command line front end: ``hdg-pos-lab <subcommand> ...``.

Every subcommand writes a CSV document whose first line is ``# hdg-pos-lab v1``.
Exit codes: 0 success, 2 input error, 3 solver error.
"""
from __future__ import annotations

import argparse
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import scenarios as sc
from .config import ExperimentConfig, NodeProbe, load_config
from .errors import (BracketError, IllPosedComboError, InputError, MisuseError, ShapeError,
                     SolverError)
from .mesh import Hypergraph, apply_shear_map, shear_points
from .meshio import read_mesh
from .positivity import edge_conditions, positivity_report
from .solve import Solution, conservation_residual, solve

HEADER = "# hdg-pos-lab v1"
INPUT_ERRORS = (InputError, MisuseError, ShapeError)
SOLVER_ERRORS = (SolverError, IllPosedComboError, BracketError)


def _fmt(x) -> str:
    if x is None:
        return "na"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _row(*vals) -> str:
    return ",".join(_fmt(v) if not isinstance(v, str) else v for v in vals)


def worker_count() -> int:
    raw = os.environ.get("HDG_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"HDG_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InputError(f"HDG_THREADS must be a positive integer, got {raw!r}")
    return n


# ---------------------------------------------------------------------------
# scenario construction and probes
# ---------------------------------------------------------------------------

def build_scenario(cfg: ExperimentConfig, tau=None, theta=None) -> tuple[Hypergraph, object]:
    """Mesh for ``cfg`` at the given tau / theta, plus its default probe.

    The default probe is a node id, ``"neumann_mean"`` or ``"global_min"``.
    """
    tau = cfg.tau if tau is None else tau
    theta = cfg.theta if theta is None else theta
    s = cfg.scenario
    if s == "unit_hypercube":
        mesh, probe = sc.unit_hypercube(cfg.dim, 1.0 if tau is None else tau), "neumann_mean"
    elif s == "sheared_simplex":
        ref = sc.sheared_simplex_reference(cfg.dim)
        probe = ref.find_node(sc.SIMPLEX_PROBE[cfg.dim])
        mesh = apply_shear_map(ref, 0.0 if theta is None else theta)
        if tau is not None:
            mesh = mesh.with_edge_params(tau=tau)
        return mesh, probe
    elif s == "sheared_quads":
        return sc.sheared_quads(1.5 if theta is None else theta, cfg.n, 1.0 if tau is None else tau)
    elif s in ("two_squares", "three_squares"):
        n = 2 if s == "two_squares" else 3
        mesh, probe = sc.squares_bilinear_data(n, 1.0 if tau is None else tau), "global_min"
    else:
        try:
            mesh = read_mesh(cfg.mesh_file)
        except OSError as exc:
            raise InputError(f"cannot read mesh {cfg.mesh_file}: {exc}") from None
        if s == "graph_file" and mesh.dim != 1:
            raise InputError("graph_file needs a one-dimensional mesh")
        if tau is not None:
            mesh = mesh.with_edge_params(tau=tau)
        probe = "global_min"
    if theta is not None and s != "sheared_quads":
        mesh = apply_shear_map(mesh, theta)
    return mesh, probe


def resolve_probe(cfg: ExperimentConfig, mesh: Hypergraph, default, theta=None):
    """Node id, ``"neumann_mean"`` or ``"global_min"`` for the configured probe."""
    p = cfg.probe
    if p == "default":
        return default
    if isinstance(p, NodeProbe):
        if p.node_id is not None:
            if not 0 <= p.node_id < len(mesh.nodes):
                raise InputError(f"probe node {p.node_id} does not exist")
            return p.node_id
        point = np.asarray(p.point, dtype=float)
        theta = cfg.theta if theta is None else theta
        if cfg.scenario == "sheared_quads" and theta is None:
            theta = 1.5
        if theta:
            point = shear_points(point, theta)
        return mesh.find_node(point)
    return p


def probe_value(sol: Solution, probe, report=None) -> float:
    if probe == "neumann_mean":
        return sc.neumann_mean(sol)
    if probe == "global_min":
        report = report or positivity_report(sol)
        return report.min_lambda
    return sol.lam_mean(int(probe))


def evaluate(cfg: ExperimentConfig, tau=None, theta=None) -> dict:
    """One solve; failures of the local or global solver become a status."""
    mesh, default = build_scenario(cfg, tau, theta)
    probe = resolve_probe(cfg, mesh, default, theta)
    conds = [edge_conditions(E) for E in mesh.edges]
    out = {
        "angle_ok": all(c.angle_ok for c in conds),
        "tau_ok_p0": all(c.tau_ok_p0 for c in conds),
        "tau_ok_rect": (all(c.tau_ok_rect for c in conds if c.tau_rect is not None)
                        if any(c.tau_rect is not None for c in conds) else None),
        "probe_value": None, "min_lambda": None, "min_u": None, "residual": None,
    }
    try:
        sol = solve(mesh, cfg.space_combo)
    except IllPosedComboError:
        out["status"] = "ill-posed"
        return out
    except SolverError:
        out["status"] = "solver-error"
        return out
    rep = positivity_report(sol)
    res = conservation_residual(sol)
    out.update(probe_value=probe_value(sol, probe, rep), min_lambda=rep.min_lambda,
               min_u=rep.min_u, residual=res,
               status="ok" if res <= 1e-9 * sol.scale else "residual-exceeded")
    return out


def _parallel(fn, items) -> list:
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_sweep_tau(cfg: ExperimentConfig) -> str:
    if cfg.sweep.parameter != "tau":
        raise InputError("sweep-tau needs sweep.parameter = tau")
    taus = cfg.sweep.samples()
    rows = _parallel(lambda t: evaluate(cfg, tau=float(t)), taus)
    lines = [HEADER, "tau,probe_value,min_lambda,min_u,angle_ok,tau_ok_p0,tau_ok_rect,residual,status"]
    for t, r in zip(taus, rows):
        lines.append(_row(float(t), r["probe_value"], r["min_lambda"], r["min_u"], r["angle_ok"],
                          r["tau_ok_p0"], r["tau_ok_rect"], r["residual"], r["status"]))
    return "\n".join(lines) + "\n"


def cmd_sweep_theta(cfg: ExperimentConfig) -> str:
    if cfg.sweep.parameter != "theta":
        raise InputError("sweep-theta needs sweep.parameter = theta")
    thetas = cfg.sweep.samples()
    rows = _parallel(lambda th: evaluate(cfg, theta=float(th)), thetas)
    lines = [HEADER, "theta,lambda_at_N,angle_ok,residual,status"]
    for th, r in zip(thetas, rows):
        lines.append(_row(float(th), r["probe_value"], r["angle_ok"], r["residual"], r["status"]))
    return "\n".join(lines) + "\n"


def cmd_solve(cfg: ExperimentConfig) -> str:
    mesh, default = build_scenario(cfg)
    probe = resolve_probe(cfg, mesh, default)
    sol = solve(mesh, cfg.space_combo)
    rep = positivity_report(sol)
    buf = io.StringIO()
    sol.write_csv(buf)
    lines = ["report", "key,value",
             f"combo,{cfg.space_combo}",
             _row("probe_value", probe_value(sol, probe, rep)),
             _row("min_lambda", rep.min_lambda),
             f"argmin_lambda,{rep.argmin_lambda[0]}:{rep.argmin_lambda[1]}",
             _row("min_u", rep.min_u),
             f"argmin_u,{rep.argmin_u[0]}:{rep.argmin_u[1]}",
             _row("lambda_nonneg", rep.lambda_nonneg),
             _row("u_nonneg", rep.u_nonneg),
             _row("conservation_residual", conservation_residual(sol)),
             _row("scale", sol.scale)]
    return buf.getvalue() + "\n".join(lines) + "\n"


def cmd_counterexample(cid: str, tau=None, params=None) -> str:
    res = sc.run_counterexample(cid, tau, params)
    lines = [HEADER, f"# counterexample {res.cid} "
             + " ".join(f"{k}={v}" for k, v in sorted(res.params.items())),
             "quantity,computed,expected,deviation"]
    for k, v in res.computed.items():
        e = res.expected.get(k)
        lines.append(_row(k.replace(",", ";"), v, e, None if e is None else abs(v - e)))
    lines.append(_row("max_deviation", None, None, res.deviation if res.expected else None))
    return "\n".join(lines) + "\n"


def cmd_check_conditions(path) -> str:
    try:
        mesh = read_mesh(path)
    except OSError as exc:
        raise InputError(f"cannot read mesh {path}: {exc}") from None
    lines = [HEADER, "edge_id,shape,angle_ok,tau,tau_min_p0,tau_ok_p0,tau_rect,tau_ok_rect"]
    for E in mesh.edges:
        c = edge_conditions(E)
        lines.append(_row(E.id, E.shape, c.angle_ok, E.tau, c.tau_min_p0, c.tau_ok_p0,
                          c.tau_rect, c.tau_ok_rect))
    return "\n".join(lines) + "\n"


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"parameter {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        low = v.strip().lower()
        if low in ("true", "false"):
            out[k] = low == "true"
            continue
        try:
            out[k] = int(v)
        except ValueError:
            try:
                out[k] = float(v)
            except ValueError:
                raise InputError(f"parameter {k} needs a number, got {v!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hdg-pos-lab",
                                description="Positivity experiments for HDG diffusion on hypergraphs.")
    p.add_argument("--out", help="output path (default: stdout)")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in [("solve", "solve one configured problem"),
                           ("sweep-tau", "sweep the stabilization parameter"),
                           ("sweep-theta", "sweep the shear parameter")]:
        s = sub.add_parser(name, help=helptext)
        s.add_argument("config", help="experiment config (JSON)")
        s.add_argument("--out", dest="out_sub", help="output path (default: stdout)")
    s = sub.add_parser("counterexample", help="reproduce a counterexample")
    s.add_argument("id", help="one of " + ", ".join(sc.COUNTEREXAMPLE_IDS))
    s.add_argument("--tau", type=float)
    s.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE")
    s.add_argument("--out", dest="out_sub", help="output path (default: stdout)")
    s = sub.add_parser("check-conditions", help="per-edge sufficient conditions of a mesh file")
    s.add_argument("mesh", help="mesh file")
    s.add_argument("--out", dest="out_sub", help="output path (default: stdout)")
    return p


def run(args) -> str:
    cmd = args.command
    if cmd in ("solve", "sweep-tau", "sweep-theta"):
        cfg = load_config(args.config)
        args.cfg_out = cfg.out
        return {"solve": cmd_solve, "sweep-tau": cmd_sweep_tau,
                "sweep-theta": cmd_sweep_theta}[cmd](cfg)
    if cmd == "counterexample":
        return cmd_counterexample(args.id, args.tau, _parse_params(args.params))
    return cmd_check_conditions(args.mesh)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = run(args)
        out = args.out_sub or args.out or getattr(args, "cfg_out", None)
        if out:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
