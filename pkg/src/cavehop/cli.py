"""Command line front end.

Subcommands:
    explore      run one trial, write coverage CSV, snapshot JSONL, frames
    sweep-hops   hop-count budgets across bodies and hop distances
    comms        link budget printout plus relay-chain transfer time sweep
    monte-carlo  repeated trials, mean/std coverage per swarm size
    render       re-render frames from a previous run's snapshot log

Exit codes: 0 on success, 1 for configuration or argument problems, 2
for runtime failures (I/O, disconnected relay chains).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import comms as comms_mod
from . import render as render_mod
from .ballistics import FuelBudget, hop_budget, hop_cost
from .comms import CommParams, DisconnectedError, LinkBudgetError
from .config import Config, ConfigError, default_config, load_config, render_config
from .engine import monte_carlo, replace_run, run


def _load(args) -> Config:
    if getattr(args, "config", None):
        return load_config(args.config)
    return default_config()


def _apply_overrides(config: Config, args) -> Config:
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "frames", None) is not None:
        changes["frames"] = tuple(args.frames)
    if not changes:
        return config
    import dataclasses

    return dataclasses.replace(config, run=replace_run(config.run, **changes))


def _int_list(text: str) -> list[int]:
    """Parse '2,5,9' or '2-9' (inclusive) into a list of ints."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo_s, hi_s = part.split("-", 1)
            lo, hi = int(lo_s), int(hi_s)
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return out


def _float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}")


def _body_list(text: str) -> list[tuple[str, float]]:
    """Parse 'moon=1.62,mars=3.71' into (name, gravity) pairs."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise argparse.ArgumentTypeError(
                f"bodies must be name=gravity pairs, got {part!r}"
            )
        name, g = part.split("=", 1)
        try:
            out.append((name.strip(), float(g)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad gravity in {part!r}")
    if not out:
        raise argparse.ArgumentTypeError("expected at least one body")
    return out


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_jsonl(path: Path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def cmd_explore(args) -> int:
    config = _apply_overrides(_load(args), args)
    out = _out_dir(args)
    result = run(config)

    _write_csv(
        out / "coverage.csv",
        ["timestep", "coverage"],
        [[t, c] for t, c in result.coverage_series],
    )
    _write_jsonl(out / "snapshots.jsonl", result.snapshots)
    (out / "summary.json").write_text(
        json.dumps(result.summary_dict(), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    (out / "config.yaml").write_text(render_config(config), encoding="utf-8")
    render_mod.plot_coverage_series(result.coverage_series, out / "coverage.svg")
    written = render_mod.render_frames(
        config, result.snapshots, list(config.run.frames), out
    )

    print(
        f"coverage {100.0 * result.final_coverage:.1f}% after "
        f"{config.run.timesteps} timesteps (seed {result.seed})"
    )
    print(
        f"hops {result.hop_count}  stalls {result.stall_count}  "
        f"return steps {result.return_steps}  "
        f"delta-v {result.total_delta_v:.1f} m/s"
    )
    print(f"wrote {out}/coverage.csv, snapshots.jsonl, summary.json, "
          f"config.yaml, coverage.svg and {len(written)} frame(s)")
    return 0


def cmd_sweep_hops(args) -> int:
    config = _load(args)
    out = _out_dir(args)
    fuel: FuelBudget = config.flight.fuel_budget()
    rows = []
    for body, gravity in args.bodies:
        if gravity <= 0.0:
            raise ValueError(f"gravity for {body!r} must be positive, got {gravity}")
        for d in args.distances:
            hops, total = hop_budget(fuel, gravity, d)
            rows.append(
                {
                    "body": body,
                    "gravity_ms2": gravity,
                    "hop_distance_m": d,
                    "delta_v_per_hop_ms": hop_cost(d, gravity),
                    "hops": hops,
                    "total_delta_v_ms": total,
                    "range_m": hops * d,
                }
            )

    _write_csv(
        out / "sweep_hops.csv",
        [
            "body", "gravity_ms2", "hop_distance_m", "delta_v_per_hop_ms",
            "hops", "total_delta_v_ms", "range_m",
        ],
        [
            [
                r["body"], r["gravity_ms2"], r["hop_distance_m"],
                r["delta_v_per_hop_ms"], r["hops"], r["total_delta_v_ms"],
                r["range_m"],
            ]
            for r in rows
        ],
    )
    render_mod.plot_hop_budget(rows, out / "sweep_hops.svg")

    for r in rows:
        print(
            f"{r['body']:>8}  d={r['hop_distance_m']:>7g} m  "
            f"{r['hops']:>6d} hops  range {r['range_m']:>9.6g} m"
        )
    print(f"wrote {out}/sweep_hops.csv and sweep_hops.svg")
    return 0


def cmd_comms(args) -> int:
    config = _load(args)
    out = _out_dir(args)
    params: CommParams = config.comms

    print(f"link budget at {args.distance:g} m:")
    for label, value, unit in comms_mod.link_budget_report(params, args.distance):
        print(f"  {label:<22} {value:>12.2f} {unit}")
    print(f"  {'max range':<22} {comms_mod.max_range_m(params):>12.2f} m")

    rows = comms_mod.chain_times_s(params, args.span, args.hops)
    _write_csv(
        out / "chain_times.csv",
        ["relays", "link_distance_m", "transfer_time_s"],
        [[n, args.span / n, t] for n, t in rows],
    )
    render_mod.plot_chain_times(rows, out / "chain_times.svg")
    print(f"relay sweep over {args.span:g} m:")
    for n, t in rows:
        print(f"  {n:>3d} relays  link {args.span / n:>7.1f} m  {t:>9.2f} s")
    print(f"wrote {out}/chain_times.csv and chain_times.svg")
    return 0


def cmd_monte_carlo(args) -> int:
    config = _apply_overrides(_load(args), args)
    out = _out_dir(args)
    stats = monte_carlo(
        config, args.robots, args.trials, base_seed=config.run.seed
    )

    rows = []
    for st in stats:
        for t, m, s in zip(st.timesteps, st.mean, st.std):
            rows.append([st.robot_count, t, m, s])
    _write_csv(
        out / "monte_carlo.csv",
        ["robots", "timestep", "mean_coverage", "std_coverage"],
        rows,
    )
    render_mod.plot_coverage_stats(stats, out / "monte_carlo.svg")

    for st in stats:
        print(
            f"{st.robot_count:>3d} robots, {st.n_trials} trials: final coverage "
            f"{100.0 * st.mean[-1]:.1f}% (std {100.0 * st.std[-1]:.2f} pp)"
        )
    print(f"wrote {out}/monte_carlo.csv and monte_carlo.svg")
    return 0


def cmd_render(args) -> int:
    config = _load(args)
    out = _out_dir(args)
    snapshots = []
    with open(args.snapshots, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                snapshots.append(json.loads(line))
    if not snapshots:
        raise ValueError(f"snapshot log {args.snapshots} is empty")

    if args.frames is not None:
        have = {row["timestep"] for row in snapshots}
        missing = [t for t in args.frames if t not in have]
        if missing:
            raise ValueError(
                f"snapshot log has no timestep(s) {missing}; "
                f"available: {sorted(have)}"
            )
        frames = args.frames
    else:
        frames = list(config.run.frames)

    written = render_mod.render_frames(config, snapshots, frames, out)
    print(f"wrote {len(written)} frame(s) to {out}")
    return 0


class _Parser(argparse.ArgumentParser):
    """argparse with the package's exit-code convention (1 for bad usage)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="cavehop",
        description="Multi-robot lava-tube exploration with hopping rovers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="YAML config file")
        p.add_argument("--out", metavar="DIR", help="output directory (default: out)")

    p = sub.add_parser("explore", help="run one exploration trial")
    common(p)
    p.add_argument("--seed", type=int, metavar="U64", help="override the run seed")
    p.add_argument(
        "--frames", type=_int_list, metavar="LIST",
        help="timesteps to render, e.g. 0,5,10 (default: from config)",
    )
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("sweep-hops", help="hop budgets over bodies and distances")
    common(p)
    p.add_argument(
        "--bodies", type=_body_list, default=[("moon", 1.62), ("mars", 3.71)],
        metavar="LIST", help="name=gravity pairs (default moon=1.62,mars=3.71)",
    )
    p.add_argument(
        "--distances", type=_float_list,
        default=[1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
        metavar="LIST", help="hop distances in meters",
    )
    p.set_defaults(func=cmd_sweep_hops)

    p = sub.add_parser("comms", help="link budget and relay chain timing")
    common(p)
    p.add_argument(
        "--distance", type=float, default=500.0, metavar="M",
        help="link distance for the budget printout (default 500)",
    )
    p.add_argument(
        "--span", type=float, default=900.0, metavar="M",
        help="end-to-end chain span in meters (default 900)",
    )
    p.add_argument(
        "--hops", type=_int_list, default=list(range(2, 21)), metavar="LIST",
        help="relay counts to sweep, e.g. 2-20 (default)",
    )
    p.set_defaults(func=cmd_comms)

    p = sub.add_parser("monte-carlo", help="coverage statistics over many trials")
    common(p)
    p.add_argument("--seed", type=int, metavar="U64", help="base seed for trial 0")
    p.add_argument(
        "--trials", type=int, default=10, metavar="N",
        help="trials per swarm size (default 10)",
    )
    p.add_argument(
        "--robots", type=_int_list, default=[6, 15], metavar="LIST",
        help="swarm sizes, e.g. 6,15 (default)",
    )
    p.set_defaults(func=cmd_monte_carlo)

    p = sub.add_parser("render", help="re-render frames from a snapshot log")
    common(p)
    p.add_argument(
        "--snapshots", required=True, metavar="PATH",
        help="snapshots.jsonl written by explore",
    )
    p.add_argument(
        "--frames", type=_int_list, metavar="LIST",
        help="timesteps to render (default: frames from config)",
    )
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits on usage errors and on --help; surface the code.
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, LinkBudgetError) as exc:
        print(f"cavehop: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"cavehop: error: {exc}", file=sys.stderr)
        return 1
    except DisconnectedError as exc:
        print(f"cavehop: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cavehop: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
