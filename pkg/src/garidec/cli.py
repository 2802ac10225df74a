"""Command-line front end.

Exit status: 0 on success, 1 on invalid input or usage errors, 2 when a
mapping or check ordering is infeasible.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .archsim import ArchConfig, CrossbarNetwork, cycle_model, random_batch
from .errors import GariError, InfeasibleMappingError, StaleHazardError
from .gf2model import Syndrome, derive_uv, load_dem
from .harness import ExperimentConfig, run_shots
from .msdecoder import BASES, FixedPointSpec, decode, read_syndromes
from .placement import TileMap, map_serial_variables, map_uv_checks, order_checks
from .synthetic import GROSS_UV_TILE_DEGREES

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _load_doc(path) -> dict:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # python < 3.11
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def _spec(args) -> FixedPointSpec:
    return FixedPointSpec.from_dict(_load_doc(args.spec)) if args.spec else FixedPointSpec()


def _arch(args) -> ArchConfig:
    cfg = ArchConfig.load(args.config) if getattr(args, "config", None) else ArchConfig()
    if getattr(args, "clock_ns", None) is not None:
        d = cfg.to_dict()
        d["clock_ns"] = args.clock_ns
        cfg = ArchConfig.from_dict(d)
    return cfg


def _csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


# subcommands ------------------------------------------------------------------


def cmd_transform(args) -> int:
    g = derive_uv(load_dem(args.dem))
    doc = g.to_dict()
    if args.format == "csv":
        sizes = g.group_sizes._asdict()
        _emit(args, _csv([{"group": k, "size": v} for k, v in sizes.items()]))
    else:
        _emit(args, json.dumps(doc, sort_keys=True))
    return EXIT_OK


def cmd_map(args) -> int:
    g = derive_uv(load_dem(args.dem))
    degrees = [int(x) for x in args.tile_degrees.split(",")] if args.tile_degrees else list(GROSS_UV_TILE_DEGREES)
    serial = map_serial_variables(g, target_tiles=args.target_tiles, restarts=args.restarts, seed=args.seed)
    tm = serial.merged(map_uv_checks(g, degrees, args.capacity))
    if args.format == "csv":
        _emit(args, _csv([tm.stats()]))
    else:
        _emit(args, tm.to_json())
    return EXIT_OK


def cmd_order(args) -> int:
    g = derive_uv(load_dem(args.dem))
    out = []
    for which in (["DX", "DZ"] if args.which == "both" else [args.which]):
        o = order_checks(g, which, args.depth, restarts=args.restarts, seed=args.seed, allow_stalls=args.allow_stalls)
        out.append(o.to_dict())
    if args.format == "csv":
        _emit(args, _csv([{k: v for k, v in d.items() if k != "order"} for d in out]))
    else:
        _emit(args, _dump(out if len(out) > 1 else out[0]))
    return EXIT_OK


def cmd_decode(args) -> int:
    g = derive_uv(load_dem(args.dem))
    spec = _spec(args)
    syndromes = read_syndromes(args.syndrome) if args.syndrome else [Syndrome.zeros(g)]
    results = [decode(g, s, spec, args.max_iters, args.basis).to_dict(g) for s in syndromes]
    if not args.trace:
        for r in results:
            r.pop("trace")
    if args.format == "csv":
        rows = [
            {"shot": k, "converged": r["converged"], "iterations": r["iterations"],
             "correction": "".join(map(str, r["correction"]))}
            for k, r in enumerate(results)
        ]
        _emit(args, _csv(rows))
    else:
        _emit(args, _dump(results[0] if len(results) == 1 else results))
    return EXIT_OK


def cmd_simulate(args) -> int:
    g = derive_uv(load_dem(args.dem))
    cfg = _arch(args)
    tm = TileMap.load(args.tilemap) if args.tilemap else None
    if tm is not None:
        tm.validate(g)
    orderings = []
    if args.order:
        orderings = [order_checks(g, w, cfg.serial_depth, allow_stalls=True) for w in ("DX", "DZ")]
    report = cycle_model(g, tm, cfg, orderings)
    iters = [float(x) if "." in x else int(x) for x in args.iters.split(",")]
    if args.format == "csv":
        _emit(args, _csv(report.phase_rows(max(1, int(max(iters))))))
    elif args.table:
        _emit(args, report.phase_table(max(1, int(max(iters)))))
    else:
        _emit(args, _dump(report.to_dict(iters)))
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = ExperimentConfig(
        dem_path=args.dem,
        spec=_spec(args),
        shots=args.shots,
        seed=args.seed,
        physical_error_scale=args.scale,
        max_iters=args.max_iters,
        ensemble_size=args.ensemble,
        basis=args.basis,
        rounds=args.rounds,
        arch=_arch(args),
    )
    report = run_shots(cfg)
    _emit(args, report.histogram_csv() if args.format == "csv" else report.to_json())
    return EXIT_OK


def cmd_route_test(args) -> int:
    j_in = args.j_in or args.ports
    j_out = args.j_out or args.ports
    net = CrossbarNetwork(j_in, j_out, fifo_depth=args.fifo_depth, dual_port=not args.single_port)
    rows = []
    for k in range(args.seeds):
        seed = args.seed + k
        batch = random_batch(np.random.default_rng(seed), j_in, j_out, args.messages)
        r = net.route(batch)
        sent = sorted(m for q in batch for m in q)
        got = sorted(m for o in r.outputs for m in o)
        ok = sent == got and all(m.tag == p for p, o in enumerate(r.outputs) for m in o)
        rows.append({"seed": seed, "cycles": r.cycles, "collisions": r.collisions,
                     "overhead": round(r.overhead, 6), "delivered_ok": ok})
    if args.format == "csv":
        _emit(args, _csv(rows))
    else:
        ov = np.array([r["overhead"] for r in rows])
        _emit(args, _dump({
            "j_in": j_in, "j_out": j_out, "stages": net.K, "messages_per_port": args.messages,
            "all_delivered": all(r["delivered_ok"] for r in rows),
            "overhead_mean": float(ov.mean()), "overhead_min": float(ov.min()), "overhead_max": float(ov.max()),
            "runs": rows,
        }))
    return EXIT_OK if all(r["delivered_ok"] for r in rows) else EXIT_INVALID


# parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="garidec", description="GARI min-sum decoder model, timing simulator and benchmark harness.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, dem=True):
        if dem:
            sp.add_argument("--dem", required=True, help="detector error model JSON")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        return sp

    sp = common(sub.add_parser("transform", help="derive the GARI model from a DEM"))
    sp.set_defaults(func=cmd_transform)

    sp = common(sub.add_parser("map", help="assign variables and U/V rows to tiles"))
    sp.add_argument("--tile-degrees", help="comma-separated U/V tile check degrees")
    sp.add_argument("--capacity", type=int, default=500, help="U/V rows per tile and matrix")
    sp.add_argument("--target-tiles", type=int, default=0)
    sp.add_argument("--restarts", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_map)

    sp = common(sub.add_parser("order", help="order serial checks for the pipeline"))
    sp.add_argument("--which", choices=("DX", "DZ", "both"), default="both")
    sp.add_argument("--depth", type=int, default=8, help="serial pipeline depth")
    sp.add_argument("--restarts", type=int, default=32)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--allow-stalls", action="store_true", help="accept orderings that need bubble cycles")
    sp.set_defaults(func=cmd_order)

    sp = common(sub.add_parser("decode", help="decode syndromes"))
    sp.add_argument("--syndrome", help="syndrome file (JSON or packed binary); zero syndrome if omitted")
    sp.add_argument("--spec", help="fixed-point spec JSON/TOML")
    sp.add_argument("--max-iters", type=int, default=64)
    sp.add_argument("--basis", choices=BASES, default="Z")
    sp.add_argument("--trace", action="store_true", help="include the per-step trace")
    sp.set_defaults(func=cmd_decode)

    sp = common(sub.add_parser("simulate", help="timing report"))
    sp.add_argument("--tilemap", help="tile map JSON (replayed as given)")
    sp.add_argument("--config", help="architecture config TOML/JSON")
    sp.add_argument("--clock-ns", type=float)
    sp.add_argument("--iters", default="1", help="comma-separated iteration counts to report")
    sp.add_argument("--order", action="store_true", help="order checks and add hazard stalls")
    sp.add_argument("--table", action="store_true", help="print the phase table instead of JSON")
    sp.set_defaults(func=cmd_simulate)

    sp = common(sub.add_parser("bench", help="Monte Carlo benchmark"))
    sp.add_argument("--shots", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--ensemble", type=int, default=1)
    sp.add_argument("--max-iters", type=int, default=64)
    sp.add_argument("--basis", choices=BASES, default="Z")
    sp.add_argument("--scale", type=float, default=1.0, help="multiplier on every prior")
    sp.add_argument("--rounds", type=int, default=1, help="syndrome rounds per window, for per-round latency")
    sp.add_argument("--spec", help="fixed-point spec JSON/TOML")
    sp.add_argument("--config", help="architecture config TOML/JSON")
    sp.add_argument("--clock-ns", type=float)
    sp.set_defaults(func=cmd_bench)

    sp = common(sub.add_parser("route-test", help="crossbar delivery and overhead run"), dem=False)
    sp.add_argument("--ports", type=int, default=16)
    sp.add_argument("--j-in", type=int)
    sp.add_argument("--j-out", type=int)
    sp.add_argument("--messages", type=int, default=500, help="messages per input port")
    sp.add_argument("--seeds", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--fifo-depth", type=int)
    sp.add_argument("--single-port", action="store_true")
    sp.set_defaults(func=cmd_route_test)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (InfeasibleMappingError, StaleHazardError) as exc:
        print(f"garidec: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (GariError, OSError, ValueError, KeyError) as exc:
        print(f"garidec: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
