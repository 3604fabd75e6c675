"""Command-line front end: optimize, sweep, calibrate, run, replay, serve.

Artifacts land in --out-dir (or $IMPACTNEEDLE_OUT_DIR, default ./out).
File formats are documented in docs/FORMATS.md.  Exit codes: 0 success,
1 model error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .characterization import (CalibrationReport, SweepGrid, calibrate,
                               dc_pull_test, run_sweep, sweep_argmax)
from .config import build_default, load_config, save_config
from .design import ObjectiveConstant, objective_grid, optimal_magnet_length
from .scenarios import scenario_names
from .session import CommandError, Session, replay as replay_log


def _out_dir(args) -> str:
    d = args.out_dir or os.environ.get("IMPACTNEEDLE_OUT_DIR", "out")
    os.makedirs(d, exist_ok=True)
    return d


def _load_cfg(args):
    return load_config(args.config)


def _emit(args, out_dir, stem, rows, header):
    """Write rows as CSV (gnuplot-friendly, '#' header) or JSON."""
    if args.format == "json":
        path = os.path.join(out_dir, stem + ".json")
        with open(path, "w") as f:
            json.dump([dict(zip(header, r)) for r in rows], f, indent=2)
            f.write("\n")
    else:
        path = os.path.join(out_dir, stem + ".csv")
        with open(path, "w", newline="") as f:
            f.write("# " + ",".join(header) + "\n")
            w = csv.writer(f)
            w.writerows(rows)
    return path


def cmd_optimize(args) -> int:
    if args.l_tube <= 0.0:
        print("error: --l-tube must be positive", file=sys.stderr)
        return 2
    const = ObjectiveConstant(field_gradient=1.0, magnetization=1.05e6,
                              density=7500.0, bore_radius=0.795e-3)
    analytic = optimal_magnet_length(args.l_tube, const)
    ls, js = objective_grid(args.l_tube, const, n=args.grid)
    grid_opt = float(ls[js.argmax()])
    out = _out_dir(args)
    path = _emit(args, out, "objective_curve",
                 list(zip(ls.tolist(), js.tolist())),
                 ["magnet_length_m", "objective"])
    print(f"analytic optimum: {analytic:.6g} m")
    print(f"grid optimum ({args.grid} points): {grid_opt:.6g} m")
    print(f"curve written to {path}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_cfg(args)
    cells = run_sweep(cfg, SweepGrid(dwell=args.dwell))
    best = sweep_argmax(cells)
    out = _out_dir(args)
    rows = [(c.duty, c.period, c.mean_peak, c.max_peak, c.force_density,
             c.cycles) for c in cells]
    path = _emit(args, out, "sweep", rows,
                 ["D", "T", "mean_peak_N", "max_peak_N", "force_density",
                  "cycles"])
    print(f"{len(cells)} cells written to {path}")
    print(f"argmax: D={best.duty} T={best.period} "
          f"mean_peak={best.mean_peak * 1e3:.1f} mN "
          f"max_peak={best.max_peak * 1e3:.1f} mN")
    return 0


def cmd_calibrate(args) -> int:
    cfg = _load_cfg(args)
    cfg, rep = calibrate(cfg)
    out = _out_dir(args)
    path = os.path.join(out, "calibration.json")
    with open(path, "w") as f:
        json.dump({k: getattr(rep, k) for k in
                   CalibrationReport.__dataclass_fields__}, f, indent=2)
        f.write("\n")
    cfg_path = os.path.join(out, "calibrated_config.json")
    save_config(cfg, cfg_path)
    print(f"core_gain={rep.core_gain:.6g} dt_impact={rep.dt_impact:.6g}")
    print(f"dc_center={rep.dc_center * 1e3:.2f} mN "
          f"peak_center={rep.peak_center * 1e3:.1f} mN")
    print(f"dc_far={rep.dc_far * 1e3:.2f} mN "
          f"peak_far={rep.peak_far * 1e3:.1f} mN")
    print(f"report: {path}\nconfig: {cfg_path}")
    return 0


def _write_trajectory(args, out_dir, session: Session):
    """Frame CSV plus the command log with the trajectory hash."""
    log = session.log_dict()
    log["trajectory_hash"] = session.trajectory_hash()
    log_path = os.path.join(out_dir, f"{session.scenario_name}_log.json")
    with open(log_path, "w") as f:
        json.dump(log, f, indent=2)
        f.write("\n")
    return log_path


def cmd_run(args) -> int:
    cfg = _load_cfg(args)
    if args.scenario not in scenario_names():
        print(f"error: unknown scenario {args.scenario!r}; "
              f"choose from {', '.join(scenario_names())}", file=sys.stderr)
        return 2
    if args.scenario == "dc_pull" and args.position == "far_end":
        from .characterization import _toward_center
        f = dc_pull_test(cfg, cfg.far_end, _toward_center(cfg.far_end))
        print(f"dc force (far end): {f * 1e3:.2f} mN")
        return 0
    if args.scenario == "dc_pull":
        f = dc_pull_test(cfg)
        print(f"dc force (center): {f * 1e3:.2f} mN")
        return 0
    session = Session(args.scenario, seed=args.seed, cfg=cfg)
    session.run_to_end()
    out = _out_dir(args)
    log_path = _write_trajectory(args, out, session)
    sim = session.sim
    print(f"scenario {args.scenario}: simulated {sim.state.time:.2f} s "
          f"({sim.step_index} steps)")
    if session.scn.tissue is not None:
        t = session.scn.tissue
        print(f"penetration depth: {t.max_depth * 1e3:.2f} mm; "
              f"crossings: {len(t.crossings)}")
    print(f"impacts: {len(sim.events)}")
    print(f"trajectory hash: {session.trajectory_hash()}")
    print(f"log: {log_path}")
    if args.scenario == "bacon_penetration" and \
            session.scn.tissue.max_depth < 5e-3:
        print("error: penetration below 5 mm", file=sys.stderr)
        return 1
    return 0


def cmd_replay(args) -> int:
    try:
        with open(args.log) as f:
            log = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read log: {exc}", file=sys.stderr)
        return 2
    cfg = _load_cfg(args)
    try:
        session = replay_log(log, cfg=cfg)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    h = session.trajectory_hash()
    print(f"replayed {log['scenario']} for {session.sim.state.time:.2f} s")
    print(f"trajectory hash: {h}")
    stored = log.get("trajectory_hash")
    if stored is not None:
        if stored == h:
            print("hash matches recorded run")
        else:
            print(f"error: hash mismatch (recorded {stored})",
                  file=sys.stderr)
            return 1
    return 0


def cmd_serve(args) -> int:
    from .service import serve
    serve(host=args.host, port=args.port, config_path=args.config,
          tick_rate=args.tick_rate, real_time_factor=args.real_time_factor,
          static_dir=args.static_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="rig config JSON (default: built-in)")
    common.add_argument("--out-dir", help="artifact directory "
                        "(default $IMPACTNEEDLE_OUT_DIR or ./out)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--real-time-factor", type=float, default=1.0)
    p = argparse.ArgumentParser(prog="impactneedle",
                                description=__doc__.strip().splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    def sub_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    q = sub_parser("optimize", help="magnet length optimization")
    q.add_argument("--l-tube", type=float, required=True)
    q.add_argument("--grid", type=int, default=10000)
    q.set_defaults(fn=cmd_optimize)

    q = sub_parser("sweep", help="duty/period impact-force sweep")
    q.add_argument("--dwell", type=float, default=5.0)
    q.set_defaults(fn=cmd_sweep)

    q = sub_parser("calibrate", help="two-step force calibration")
    q.set_defaults(fn=cmd_calibrate)

    q = sub_parser("run", help="run a scripted scenario")
    q.add_argument("scenario")
    q.add_argument("--position", choices=("center", "far_end"),
                   default="center")
    q.set_defaults(fn=cmd_run)

    q = sub_parser("replay", help="replay a recorded command log")
    q.add_argument("log")
    q.set_defaults(fn=cmd_replay)

    q = sub_parser("serve", help="start the teleop service")
    q.add_argument("--host", default="127.0.0.1")
    q.add_argument("--port", type=int, default=8321)
    q.add_argument("--tick-rate", type=float, default=60.0)
    q.add_argument("--static-dir", default=None)
    q.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
