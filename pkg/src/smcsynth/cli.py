"""Command-line front end.

Subcommands: synth (design + JSON), simulate (trace CSV + reach JSON +
figure), sweep (CSV + figure), verify (independent margin report).  Exit
codes: 0 success, 1 usage or malformed input, 2 infeasible or uncertified.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .errors import InvalidInput, NumericalFailure, SmcSynthError, SynthesisInfeasible
from .lmi import STRICTNESS_MARGIN
from .polytope import PolytopicSystem, SimplexPoint, combine, rov_polytope, \
    visual_servo_polytope
from .sdp import SolverOptions
from .sim import SimConfig, simulate
from .synthesis import (Law, certify_fixed_gain_uvc, certify_fixed_gain_vsc,
                        design_from_dict, design_to_json, reaching_bound,
                        sweep, synth_uvc, synth_vsc, verify_uvc, verify_vsc)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2


def build_system(spec: dict) -> PolytopicSystem:
    if "builder" in spec:
        b = spec["builder"]
        if b == "visual_servo":
            return visual_servo_polytope(float(spec["phi_bar"]),
                                         float(spec["delta_bar"]))
        if b == "rov":
            return rov_polytope(float(spec["m0"]), float(spec["Iz"]),
                                float(spec["psi1"]), float(spec["psi2"]),
                                float(spec["g_lo"]), float(spec["g_hi"]))
        raise InvalidInput(f"unknown system builder {b!r}")
    if "vertices" in spec:
        return PolytopicSystem.from_dict(spec)
    raise InvalidInput("system must give either a builder or explicit vertices")


def load_config(path: str) -> dict:
    try:
        with open(path) as f:
            cfg = json.load(f)
    except FileNotFoundError:
        raise InvalidInput(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise InvalidInput(f"config {path} is not valid JSON: {e}")
    for key in ("system", "law"):
        if key not in cfg:
            raise InvalidInput(f"config {path} is missing {key!r}")
    if cfg["law"] not in (Law.VSC.value, Law.UVC.value):
        raise InvalidInput(f"law must be 'vsc' or 'uvc', got {cfg['law']!r}")
    return cfg


def sim_config_from(cfg: dict, args) -> SimConfig:
    sim = dict(cfg.get("sim", {}))
    sc = SimConfig(
        dt=float(sim.get("dt", SimConfig.dt)),
        horizon=sim.get("horizon"),
        reg_eps=float(sim.get("reg_eps", SimConfig.reg_eps)),
        reach_tol=float(sim.get("reach_tol", SimConfig.reach_tol)),
        seed=int(sim.get("seed", 0)),
    )
    if getattr(args, "dt", None) is not None:
        sc.dt = args.dt
    if getattr(args, "horizon", None) is not None:
        sc.horizon = args.horizon
    if getattr(args, "reg_eps", None) is not None:
        sc.reg_eps = args.reg_eps
    if getattr(args, "reach_tol", None) is not None:
        sc.reach_tol = args.reach_tol
    if getattr(args, "seed", None) is not None:
        sc.seed = args.seed
    return sc


def solver_options_from(args) -> SolverOptions:
    opts = SolverOptions()
    if getattr(args, "sdp_tol", None) is not None:
        opts.tol = args.sdp_tol
    if getattr(args, "sdp_max_iter", None) is not None:
        opts.max_iter = args.sdp_max_iter
    return opts


def _synthesize(cfg: dict, options: SolverOptions,
                eps_strict: float = STRICTNESS_MARGIN):
    system = build_system(cfg["system"])
    law = Law(cfg["law"])
    param = cfg.get("xi_or_mu")
    if param is None:
        raise InvalidInput("config is missing 'xi_or_mu'")
    param = float(param)
    if param <= 0:
        name = "xi" if law is Law.VSC else "mu"
        raise InvalidInput(f"{name} must be positive")
    phi = cfg.get("phi")
    phi = float(phi) if phi is not None else None
    rho_fixed = cfg.get("rho_fixed")
    rho_fixed = float(rho_fixed) if rho_fixed is not None else None
    optimize = rho_fixed is None
    if law is Law.VSC:
        design = synth_vsc(system, param, phi, optimize=optimize,
                           rho_fixed=rho_fixed, options=options,
                           eps_strict=eps_strict)
    else:
        design = synth_uvc(system, param, phi, optimize=optimize,
                           rho_fixed=rho_fixed, options=options,
                           eps_strict=eps_strict)
    return system, design


def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    try:
        _, design = _synthesize(cfg, solver_options_from(args),
                                eps_strict=args.sdp_margin)
    except SynthesisInfeasible as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    text = design_to_json(design)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    system = build_system(cfg["system"])
    with open(args.design) as f:
        design = design_from_dict(json.load(f))
    law = design.law
    if (args.vertex is None) == (args.alpha is None):
        raise InvalidInput("give exactly one of --vertex or --alpha")
    if args.vertex is not None:
        if not (1 <= args.vertex <= system.num_vertices):
            raise InvalidInput(
                f"vertex {args.vertex} out of range 1..{system.num_vertices}")
        B = system.vertices[args.vertex - 1]
    else:
        weights = [float(w) for w in args.alpha.split(",")]
        if len(weights) != system.num_vertices:
            raise InvalidInput(
                f"{len(weights)} weights given for {system.num_vertices} vertices")
        B = combine(system, SimplexPoint(np.array(weights)))
    sigma0 = np.array(cfg.get("sigma0"), dtype=float) if cfg.get("sigma0") is not None \
        else None
    if sigma0 is None:
        raise InvalidInput("config is missing 'sigma0'")
    sc = sim_config_from(cfg, args)
    if sc.horizon is None:
        if design.T_bound is None:
            raise InvalidInput("no horizon given and the design carries no T bound")
        sc.horizon = 4.0 * design.T_bound

    trace = simulate(law, B, design.K, sigma0, sc, P=design.P)
    prefix = args.out
    trace.to_csv(prefix + ".csv")
    trace.save_reach_json(prefix + ".reach.json")
    if not args.no_plot:
        from .figures import plot_trace
        plot_trace(trace, prefix + ".png", title=f"{law.value} closed loop")
    try:
        bound = reaching_bound(design, sigma0)
    except InvalidInput:
        bound = None
    msg = f"reach_time={trace.reach_time}"
    if bound is not None:
        msg += f" bound={bound:.6g}"
    if design.T_bound is not None:
        msg += f" T_bound={design.T_bound:.6g}"
    print(msg)
    return EXIT_OK


def parse_grid(text: str):
    """start:stop:steps with optional ',log' suffix."""
    log = text.endswith(",log")
    core = text[:-4] if log else text
    parts = core.split(":")
    if len(parts) != 3:
        raise InvalidInput("grid must be start:stop:steps[,log]")
    start, stop = float(parts[0]), float(parts[1])
    steps = int(parts[2])
    if steps < 1:
        raise InvalidInput("grid must contain at least one point")
    if start <= 0 or stop <= 0:
        raise InvalidInput("grid endpoints must be positive")
    if steps == 1:
        return [start], log
    if log:
        return list(np.geomspace(start, stop, steps)), log
    return list(np.linspace(start, stop, steps)), log


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    system = build_system(cfg["system"])
    law = Law(cfg["law"])
    phi = cfg.get("phi")
    if phi is None:
        raise InvalidInput("config is missing 'phi' (needed for the sweep)")
    grid, log = parse_grid(args.grid)
    points = sweep(system, law, grid, float(phi),
                   options=solver_options_from(args), jobs=args.jobs)
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["param", "T_bound", "status"])
        for pt in points:
            w.writerow([f"{pt.param:.12g}",
                        "" if pt.T_bound is None else f"{pt.T_bound:.12g}",
                        pt.status])
    if not args.no_plot:
        from .figures import plot_sweep
        stem = args.out[:-4] if args.out.endswith(".csv") else args.out
        plot_sweep([p.param for p in points], [p.T_bound for p in points],
                   [p.status for p in points], stem + ".png", log_x=log)
    n_ok = sum(1 for p in points if p.status == "ok")
    print(f"{len(points)} grid points, {n_ok} feasible, written to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    system = build_system(cfg["system"])
    with open(args.design) as f:
        doc = json.load(f)
    options = solver_options_from(args)

    if "P" not in doc or "Q" not in doc:
        # gain-only document: recover certificates by the fixed-gain re-solve
        law = Law(doc.get("law", cfg["law"]))
        K = np.array(doc["K"], dtype=float)
        param = float(doc.get("xi_or_mu", cfg.get("xi_or_mu")))
        try:
            if law is Law.VSC:
                design = certify_fixed_gain_vsc(system, K, param, options,
                                                eps_strict=args.sdp_margin)
            else:
                design = certify_fixed_gain_uvc(system, K, param, options,
                                                eps_strict=args.sdp_margin)
        except (SynthesisInfeasible, NumericalFailure) as e:
            print(f"not certified: {e}", file=sys.stderr)
            return EXIT_INFEASIBLE
    else:
        design = design_from_dict(doc)

    if design.law is Law.VSC:
        margin = verify_vsc(design, system)
    else:
        margin = verify_uvc(design, system)
    lam_q = design.lambda_min_Q
    report = {"margin": margin, "lambda_min_Q": lam_q, "rho": design.rho,
              "T_bound": design.T_bound, "certified": bool(margin < 0.0)}
    if design.rho is not None:
        report["rho_consistency"] = lam_q >= 1.0 / design.rho - 1e-6
    print(json.dumps(report, indent=2))
    return EXIT_OK if margin < 0.0 else EXIT_INFEASIBLE


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="smcsynth",
        description="Robust sliding-mode controller synthesis, certification "
                    "and simulation for polytopic uncertain systems.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_solver_flags(p):
        p.add_argument("--sdp-tol", type=float, default=None,
                       help="solver duality-gap tolerance")
        p.add_argument("--sdp-max-iter", type=int, default=None,
                       help="solver Newton iteration cap")
        p.add_argument("--sdp-margin", type=float, default=STRICTNESS_MARGIN,
                       help="strictness margin used when assembling "
                            "strict inequalities")

    ps = sub.add_parser("synth", help="design a controller from a scenario config")
    ps.add_argument("--config", required=True)
    ps.add_argument("--out", default=None, help="write design JSON here "
                                                "(default: stdout)")
    add_solver_flags(ps)
    ps.set_defaults(func=cmd_synth)

    pm = sub.add_parser("simulate", help="integrate the closed loop for a design")
    pm.add_argument("--design", required=True)
    pm.add_argument("--config", required=True)
    pm.add_argument("--vertex", type=int, default=None,
                    help="simulate at this vertex (1-based)")
    pm.add_argument("--alpha", default=None,
                    help="comma-separated simplex weights")
    pm.add_argument("--out", required=True, help="output prefix")
    pm.add_argument("--dt", type=float, default=None)
    pm.add_argument("--reg-eps", dest="reg_eps", type=float, default=None)
    pm.add_argument("--reach-tol", dest="reach_tol", type=float, default=None)
    pm.add_argument("--horizon", type=float, default=None)
    pm.add_argument("--seed", type=int, default=None)
    pm.add_argument("--no-plot", action="store_true")
    pm.set_defaults(func=cmd_simulate)

    pw = sub.add_parser("sweep", help="minimize the T bound over a parameter grid")
    pw.add_argument("--config", required=True)
    pw.add_argument("--grid", required=True, help="start:stop:steps[,log]")
    pw.add_argument("--out", required=True, help="output CSV path")
    pw.add_argument("--jobs", type=int, default=1)
    pw.add_argument("--seed", type=int, default=None)
    pw.add_argument("--no-plot", action="store_true")
    add_solver_flags(pw)
    pw.set_defaults(func=cmd_sweep)

    pv = sub.add_parser("verify", help="independent certification of a design")
    pv.add_argument("--design", required=True)
    pv.add_argument("--config", required=True)
    add_solver_flags(pv)
    pv.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (InvalidInput, OSError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SynthesisInfeasible as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SmcSynthError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE


def main_entry():
    sys.exit(main())
