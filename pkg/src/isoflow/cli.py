"""Command-line entry point: ``isoflow <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError, IsoflowError
from .output import json_doc, rows_csv, trajectory_csv, write_all
from .weyl import RootSystem, canonical_chamber_center, chamber_point, parse_spec

USAGE_EXIT = 1
RUNTIME_EXIT = 2


@dataclass
class RunConfig:
    spec: dict
    variant: str = "euclidean"
    initial: str | list = "center"   # "center", "minimal", "theta" or coordinates
    theta: float | None = None
    tol: float = 1e-10
    t_end: float | None = None
    seed: int = 0
    samples: int | None = None
    out_dir: str = "."
    rs: RootSystem = field(default=None, repr=False)

    def echo(self) -> dict:
        """Canonical config echo embedded in every output file."""
        return {
            "spec": self.rs.spec,
            "variant": self.variant,
            "initial": self.initial,
            "theta": self.theta,
            "tol": self.tol,
            "t_end": self.t_end,
            "seed": self.seed,
            "samples": self.samples,
        }

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)


def _spec_from_args(args) -> dict:
    if args.spec is not None:
        text = args.spec
        if os.path.exists(text):
            with open(text) as fh:
                text = fh.read()
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"--spec is not valid JSON: {e}") from None
    if args.family is None:
        raise ConfigError("give --family (with --k/--g and --m or --m1/--m2) or --spec")
    doc = {"family": args.family}
    if args.family == "I2":
        if args.g is None:
            raise ConfigError("I2 needs --g")
        doc["g"] = args.g
    else:
        if args.k is None:
            raise ConfigError(f"{args.family} needs --k")
        doc["k"] = args.k
    if args.m is not None and (args.m1 is not None or args.m2 is not None):
        raise ConfigError("use either --m or --m1/--m2")
    if args.m1 is not None or args.m2 is not None:
        if args.m1 is None or args.m2 is None:
            raise ConfigError("--m1 and --m2 go together")
        doc["m1"], doc["m2"] = args.m1, args.m2
    else:
        doc["m"] = 1 if args.m is None else args.m
    return doc


def _initial(value: str):
    if value in ("center", "minimal"):
        return value
    try:
        coords = json.loads(value) if value.strip().startswith("[") else \
            [float(v) for v in value.split(",")]
    except ValueError as e:
        raise ConfigError(f"cannot parse --initial {value!r}: {e}") from None
    return [float(v) for v in coords]


def build_config(args) -> RunConfig:
    rs = parse_spec(_spec_from_args(args))
    if args.tol <= 0:
        raise ConfigError("--tol must be positive")
    if args.t_end is not None and args.t_end <= 0:
        raise ConfigError("--t-end must be positive")
    if args.theta is not None and rs.family != "I2":
        raise ConfigError("--theta only applies to I2")
    initial = _initial(args.initial)
    if isinstance(initial, list):
        if len(initial) != rs.dim:
            raise ConfigError(f"--initial needs {rs.dim} coordinates")
        chamber_point(rs, initial)      # raises OutsideChamber
    if args.theta is not None:
        if not 0.0 < args.theta < math.pi / rs.param:
            raise ConfigError(f"--theta must lie in (0, pi/{rs.param})")
        initial = "theta"
    return RunConfig(spec=rs.spec, variant=args.variant, initial=initial,
                     theta=args.theta, tol=args.tol, t_end=args.t_end,
                     seed=args.seed, samples=getattr(args, "samples", None),
                     out_dir=args.out_dir, rs=rs)


def start_point(cfg: RunConfig) -> np.ndarray:
    rs = cfg.rs
    if cfg.theta is not None:
        return np.array([math.cos(cfg.theta), math.sin(cfg.theta)])
    if cfg.initial == "center":
        return np.array(canonical_chamber_center(rs).coords)
    if cfg.initial == "minimal":
        from .analysis import find_minimal_point
        return find_minimal_point(rs).p0
    return np.array(cfg.initial, dtype=float)


# ------------------------------------------------------------------ commands

def cmd_flow(cfg: RunConfig) -> int:
    from .analysis import classify_singularity
    from .flow import integrate
    rs = cfg.rs
    x0 = start_point(cfg)
    stratum = chamber_point(rs, x0).stratum if cfg.variant == "focal" else None
    traj = integrate(rs, x0, cfg.variant, t_end=cfg.t_end, tol=cfg.tol, stratum=stratum)
    report = traj.collapse.to_dict() if traj.collapse else None
    payload = {"stop_reason": traj.stop_reason, "n_effective": traj.n_effective,
               "report": report}
    if traj.collapse:
        payload["classification"] = classify_singularity(traj.collapse, rs)
    write_all({
        cfg.path("trajectory.csv"): trajectory_csv(traj, cfg.echo()),
        cfg.path("report.json"): json_doc(payload, cfg.echo()),
    })
    return 0


def cmd_exact(cfg: RunConfig) -> int:
    from .invariants import exact_collapse_time, exact_trajectory, recover_point
    from .errors import NotInImage
    rs = cfg.rs
    x0 = start_point(cfg)
    spherical = cfg.variant == "spherical"
    et = exact_trajectory(rs, x0, spherical=spherical)
    payload = {"invariants": et.to_dict()}
    files = {}
    if not spherical:
        T, x_lim = exact_collapse_time(rs, x0)
        payload["T"] = float(T)
        payload["x_limit"] = [float(v) for v in x_lim.coords]
        payload["limit_stratum"] = sorted(x_lim.stratum)
        if cfg.samples:
            rows = []
            for t in np.linspace(0.0, float(T), cfg.samples, endpoint=False):
                try:
                    x = recover_point(rs, et(t)).coords
                except NotInImage:
                    break
                rows.append([float(t)] + [float(v) for v in x])
            cols = ["t"] + [f"x{i + 1}" for i in range(rs.dim)]
            files[cfg.path("recovered.csv")] = rows_csv(cols, rows, cfg.echo())
    files[cfg.path("invariants.json")] = json_doc(payload, cfg.echo())
    write_all(files)
    return 0


def cmd_collapse(cfg: RunConfig) -> int:
    from .analysis import classify_singularity
    from .errors import NotCollapsed, UnsupportedFamily
    from .flow import integrate
    rs = cfg.rs
    x0 = start_point(cfg)
    traj = integrate(rs, x0, cfg.variant, t_end=cfg.t_end, tol=cfg.tol)
    if traj.collapse is None:
        raise NotCollapsed(f"no collapse before t={traj.t[-1]:.6g}")
    c = traj.collapse
    cls = classify_singularity(c, rs)
    out = {"T": c.T, "x_limit": [float(v) for v in c.x_limit.coords],
           "stratum": sorted(c.x_limit.stratum), "m": c.fiber_dim,
           "typeI": cls["typeI"], "fiber_type": cls.get("fiber_type"),
           "report": c.to_dict()}
    if cfg.variant == "euclidean":
        try:
            from .invariants import exact_collapse_time
            out["T_exact"] = float(exact_collapse_time(rs, x0)[0])
        except UnsupportedFamily:
            pass
    sys.stdout.write(json_doc(out, cfg.echo()))
    return 0


def cmd_minimal(cfg: RunConfig) -> int:
    from .analysis import find_minimal_point
    mp = find_minimal_point(cfg.rs)
    sys.stdout.write(json_doc({"minimal_point": mp.to_dict()}, cfg.echo()))
    return 0


def cmd_portrait(cfg: RunConfig) -> int:
    from .svg import a3_svg, rank2_svg
    rs = cfg.rs
    if rs.family == "I2":
        from .flow import integrate
        from .rank2 import minimal_angle, rank2_solution, spherical_phase_portrait
        m1, m2 = rs.multiplicities[0], rs.multiplicities[1]
        g = rs.param
        portrait = spherical_phase_portrait(g, m1, m2, tol=cfg.tol)
        tg = minimal_angle(g, m1, m2)
        rng = np.random.default_rng(cfg.seed)
        count = cfg.samples or 24
        thetas = np.sort(rng.uniform(0.0, math.pi / g, count))
        rows, lines = [], []
        for th in thetas:
            x0 = np.array([math.cos(th), math.sin(th)])
            tr = integrate(rs, x0, tol=cfg.tol)
            sol = rank2_solution(g, m1, m2, float(th))
            c = tr.collapse
            rows.append([float(th), sol.branch, ",".join(map(str, c.active_walls)) or "origin",
                         float(c.T), float(sol.T)])
            lines.append({"x": tr.x.tolist(), "branch": sol.branch})
        cols = ["theta0", "region", "limit_wall", "T", "T_closed_form"]
        svg = rank2_svg(portrait, lines, title=f"{rs.label()} theta_g={tg:.6f}")
        payload = {k: v for k, v in portrait.items() if k != "flow_lines"}
    elif rs.family == "A" and rs.param == 3 and len(set(rs.multiplicities)) == 1:
        from .analysis import a3_portrait
        from .flow import integrate
        pt = a3_portrait(rs.multiplicities[0], n_samples=cfg.samples or 300,
                         seed=cfg.seed, tol=cfg.tol)
        rows = []
        for x, (u, v), lab, obs, T in pt.csv_rows():
            rows.append([float(u), float(v)] + [float(c) for c in x]
                        + [lab, ",".join(map(str, obs)), float(T)])
        cols = ["u", "v"] + [f"x{i + 1}" for i in range(rs.dim)] + ["region", "limit_wall", "T"]
        flow_lines = [integrate(rs, x, "spherical", tol=cfg.tol).x for x in pt.starts[:12]]
        svg = a3_svg(pt, flow_lines, title=f"A3 m={rs.multiplicities[0]}")
        payload = {"p0": pt.p0, "vertices": pt.vertices, "angles": list(pt.angles),
                   "fiber_types": pt.fiber_types, "region_walls": pt.region_walls,
                   "separatrix_ok": pt.separatrix_ok, "match_fraction": pt.match_fraction()}
    else:
        raise ConfigError("portraits exist for I2(3|4|6) and A3 with uniform multiplicity")
    write_all({
        cfg.path("portrait.csv"): rows_csv(cols, rows, cfg.echo()),
        cfg.path("portrait.svg"): svg,
        cfg.path("portrait.json"): json_doc(payload, cfg.echo()),
    })
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    from .verify import run_suites
    checks = run_suites(cfg.rs, seed=cfg.seed, n_starts=cfg.samples or 5, tol=cfg.tol)
    print(f"# isoflow {__version__} verify {cfg.rs.label()} seed={cfg.seed}")
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} passed")
    return 0 if failed == 0 else RUNTIME_EXIT


COMMANDS = {"flow": cmd_flow, "exact": cmd_exact, "collapse": cmd_collapse,
            "minimal": cmd_minimal, "portrait": cmd_portrait, "verify": cmd_verify}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def make_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--spec", help="root-system JSON document or a path to one")
    common.add_argument("--family", choices=["A", "B", "D", "I2"])
    common.add_argument("--k", type=int)
    common.add_argument("--g", type=int)
    common.add_argument("--m", type=int)
    common.add_argument("--m1", type=int)
    common.add_argument("--m2", type=int)
    common.add_argument("--variant", default="euclidean",
                        choices=["euclidean", "spherical", "focal"])
    common.add_argument("--theta", type=float, help="polar start angle (I2)")
    common.add_argument("--initial", default="center",
                        help='"center", "minimal" or comma-separated coordinates')
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--t-end", dest="t_end", type=float)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, help="sample count (portrait, exact, verify)")
    common.add_argument("--out-dir", dest="out_dir", default=".")

    p = _Parser(prog="isoflow", description="Mean curvature flow in a Weyl chamber.")
    p.add_argument("--version", action="version", version=f"isoflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
    except (IsoflowError, ValueError) as e:
        print(f"isoflow: config error: {e}", file=sys.stderr)
        return USAGE_EXIT
    try:
        return COMMANDS[args.command](cfg)
    except ConfigError as e:
        print(f"isoflow: config error: {e}", file=sys.stderr)
        return USAGE_EXIT
    except (IsoflowError, ValueError, ArithmeticError) as e:
        print(f"isoflow: {type(e).__name__}: {e}", file=sys.stderr)
        return RUNTIME_EXIT


if __name__ == "__main__":
    sys.exit(main())
