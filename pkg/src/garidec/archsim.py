"""Cycle-level model of the decoder architecture.

Two pieces live here.

* :class:`CrossbarNetwork` simulates the tag-routed multistage fabric that
  moves messages between tiles: ``K`` stages of 2x2 distribution modules,
  each routing on one tag bit (most significant first), with input FIFOs,
  ping-pong buffers between stages and output FIFOs.
* :func:`cycle_model` turns check counts, a tile map and routing overheads
  into per-phase cycle budgets and nanosecond latencies.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import BackPressureOverflowError, InvalidInputError
from .gf2model import GariModel
from .placement import DEFAULT_UV_CAPACITY, CheckOrdering, TileMap, hazard_stalls

SERIAL_PIPELINE_DEPTH = 8
UV_PIPELINE_DEPTH = 10
DEFAULT_CLOCK_NS = 3.647


def n_stages(j: int) -> int:
    if j < 1:
        raise InvalidInputError("port count must be >= 1")
    return max(1, math.ceil(math.log2(j))) if j > 1 else 1


def _literal_index_map(j: int, i: int, J: int, K: int) -> int:
    m = 1 << (K - 1 - i)
    return (j % m) * 2 + (J // m) % 2 + (J // (2 * m)) * (2 * m)


def _shuffle_index_map(j: int, i: int, K: int) -> int:
    m = 1 << (K - 1 - i)
    return (j % m) * 2 + (j // m) % 2 + (j // (2 * m)) * (2 * m)


def _is_permutation(values: Sequence[int], n: int) -> bool:
    return sorted(values) == list(range(n))


def stage_index_map(j: int, i: int, J: int) -> int:
    """Input-crossbar position of port ``j`` at stage ``i`` of a ``J``-port fabric.

    The published wiring formula is tried first on the padded port range
    and used only if it yields a permutation.  Its floor terms depend on
    ``J`` alone, so it never does, and the shuffle
    ``j -> 2 (j mod m) + floor(j/m) mod 2 + floor(j/2m) 2m`` with
    ``m = 2^(K-1-i)`` applies.  It pairs ports ``j`` and ``j+m`` on one
    distribution module, which then splits them on tag bit ``K-1-i``.
    """
    K = n_stages(J)
    P = 1 << K
    if not 0 <= j < P:
        raise InvalidInputError(f"port {j} outside 0..{P - 1}")
    if not 0 <= i < K:
        raise InvalidInputError(f"stage {i} outside 0..{K - 1}")
    if _literal_is_valid(J, i):
        return _literal_index_map(j, i, J, K)
    return _shuffle_index_map(j, i, K)


def _literal_is_valid(J: int, i: int) -> bool:
    K = n_stages(J)
    P = 1 << K
    return _is_permutation([_literal_index_map(j, i, J, K) for j in range(P)], P)


class TaggedMessage(NamedTuple):
    payload: float
    tag: int
    src: int = -1
    seq: int = -1


@dataclass
class RouteResult:
    outputs: list[list[TaggedMessage]]
    cycles: int
    collisions: int
    blocked: int
    max_occupancy: list[int]
    messages_per_port: float

    @property
    def overhead(self) -> float:
        """Cycles beyond one per message per port, as a fraction.

        The per-port count is the mean load on the busier side (inputs or
        outputs), which is the rate-limiting one.
        """
        if self.messages_per_port == 0:
            return 0.0
        return self.cycles / self.messages_per_port - 1.0

    def to_dict(self) -> dict:
        return {
            "cycles": self.cycles,
            "collisions": self.collisions,
            "blocked": self.blocked,
            "messages_per_port": self.messages_per_port,
            "overhead": self.overhead,
            "max_stage_occupancy": self.max_occupancy,
            "delivered": [len(o) for o in self.outputs],
        }


@dataclass(frozen=True)
class CrossbarNetwork:
    """``j_in`` to ``j_out`` tag-routed fabric.

    Per cycle each source pushes at most one message into its input FIFO,
    each distribution module moves up to ``port_width`` messages over each
    of its two output links (2 when ``dual_port``), and each sink drains
    one message from its output FIFO.  Intermediate ping-pong buffers hold
    ``2 * port_width`` messages and stall their upstream module when full.
    Input FIFOs cannot stall the producing tile: a push into a full input
    FIFO raises :class:`BackPressureOverflowError`.  ``fifo_depth=None``
    sizes both FIFO kinds to twice the longest input batch.
    """

    j_in: int
    j_out: int
    fifo_depth: int | None = None
    output_fifo_depth: int | None = None
    dual_port: bool = True

    def __post_init__(self):
        if self.j_in < 1 or self.j_out < 1:
            raise InvalidInputError("crossbar needs at least one input and one output")
        for d in (self.fifo_depth, self.output_fifo_depth):
            if d is not None and d < 1:
                raise InvalidInputError("FIFO depths must be >= 1")

    @property
    def J(self) -> int:
        return max(self.j_in, self.j_out)

    @property
    def K(self) -> int:
        return n_stages(self.J)

    @property
    def ports(self) -> int:
        return 1 << self.K

    @property
    def port_width(self) -> int:
        return 2 if self.dual_port else 1

    def wiring(self, i: int) -> list[int]:
        return [stage_index_map(j, i, self.J) for j in range(self.ports)]

    def route(self, batch: Sequence[Sequence[TaggedMessage]], max_cycles: int | None = None) -> RouteResult:
        if len(batch) > self.j_in:
            raise InvalidInputError(f"{len(batch)} input batches for {self.j_in} ports")
        pending = [deque(b) for b in batch] + [deque() for _ in range(self.ports - len(batch))]
        for q in pending:
            for msg in q:
                if not 0 <= msg.tag < self.j_out:
                    raise InvalidInputError(f"tag {msg.tag} outside 0..{self.j_out - 1}")
        total = sum(len(q) for q in pending)
        longest = max((len(q) for q in pending), default=0)
        in_depth = self.fifo_depth or max(1, 2 * longest)
        out_depth = self.output_fifo_depth or self.fifo_depth or max(1, 2 * longest)
        K, P, w = self.K, self.ports, self.port_width
        wiring = [self.wiring(i) for i in range(K)]
        inv = []
        for perm in wiring:
            back = [0] * P
            for j, pos in enumerate(perm):
                back[pos] = j
            inv.append(back)
        # buf[0]: input FIFOs, buf[1..K-1]: ping-pong buffers, buf[K]: output FIFOs
        buf = [[deque() for _ in range(P)] for _ in range(K + 1)]
        cap = [in_depth] + [2 * w] * (K - 1) + [out_depth]
        outputs: list[list[TaggedMessage]] = [[] for _ in range(self.j_out)]
        peak = [0] * (K + 1)
        delivered = collisions = blocked = 0
        cycle = 0
        limit = max_cycles or 4 * (total + K + 4) + 16
        while delivered < total:
            if cycle >= limit:
                raise RuntimeError("crossbar simulation did not drain")
            for p in range(self.j_out):
                q = buf[K][p]
                if q:
                    outputs[p].append(q.popleft())
                    delivered += 1
            for i in range(K - 1, -1, -1):
                src, dst, bit = buf[i], buf[i + 1], K - 1 - i
                back = inv[i]
                for mod in range(P // 2):
                    a, b = back[2 * mod], back[2 * mod + 1]
                    qa, qb = src[a], src[b]
                    if not qa and not qb:
                        continue
                    # output crossbar is the inverse wiring: bit 0 -> port a, bit 1 -> port b
                    outs = (dst[a], dst[b])
                    budget = [min(w, cap[i + 1] - len(outs[0])), min(w, cap[i + 1] - len(outs[1]))]
                    link = [0, 0]
                    first, second = (qa, qb) if (cycle + mod) % 2 == 0 else (qb, qa)
                    moved = [0, 0]
                    stalled = [False, False]
                    for _ in range(w):
                        for k, q in enumerate((first, second)):
                            if stalled[k] or not q or moved[k] >= w:
                                continue
                            side = (q[0].tag >> bit) & 1
                            if budget[side] > 0:
                                outs[side].append(q.popleft())
                                budget[side] -= 1
                                link[side] += 1
                                moved[k] += 1
                            else:
                                stalled[k] = True
                                if link[side] >= w:
                                    collisions += 1
                                else:
                                    blocked += 1
                for p in range(P):
                    peak[i + 1] = max(peak[i + 1], len(dst[p]))
            for p, q in enumerate(pending):
                if q:
                    if len(buf[0][p]) >= cap[0]:
                        raise BackPressureOverflowError(f"input FIFO {p} full (depth {cap[0]}) at cycle {cycle}")
                    buf[0][p].append(q.popleft())
                    peak[0] = max(peak[0], len(buf[0][p]))
            cycle += 1
        mpp = total / min(self.j_in, self.j_out) if total else 0.0
        return RouteResult(outputs, cycle, collisions, blocked, peak, mpp)


def make_batch(tags_per_port: Sequence[Sequence[int]], payloads=None) -> list[list[TaggedMessage]]:
    out = []
    for src, tags in enumerate(tags_per_port):
        row = []
        for seq, t in enumerate(tags):
            pay = float(payloads[src][seq]) if payloads is not None else float(src * 100003 + seq)
            row.append(TaggedMessage(pay, int(t), src, seq))
        out.append(row)
    return out


def random_batch(rng: np.random.Generator, j_in: int, j_out: int, per_port: int) -> list[list[TaggedMessage]]:
    tags = rng.integers(0, j_out, size=(j_in, per_port))
    return make_batch(tags.tolist())


def measure_overhead(j_in: int, j_out: int, per_port: int, seeds: Sequence[int] = (0, 1, 2)) -> float:
    """Mean routing overhead for uniform random tags."""
    net = CrossbarNetwork(j_in, j_out)
    vals = [net.route(random_batch(np.random.default_rng(s), j_in, j_out, per_port)).overhead for s in seeds]
    return float(np.mean(vals))


# timing model -------------------------------------------------------------------


@dataclass(frozen=True)
class RoutingOverheads:
    uv_uv: float = 0.20
    down: float = 0.15
    up: float = 0.10

    @property
    def worst(self) -> float:
        return max(self.uv_uv, self.down, self.up)


@dataclass(frozen=True)
class ArchConfig:
    serial_depth: int = SERIAL_PIPELINE_DEPTH
    uv_depth: int = UV_PIPELINE_DEPTH
    clock_ns: float = DEFAULT_CLOCK_NS
    fifo_depth: int | None = None
    overheads: RoutingOverheads = field(default_factory=RoutingOverheads)

    def __post_init__(self):
        if self.serial_depth < 1 or self.uv_depth < 0:
            raise InvalidInputError("pipeline depths must be positive")
        if not self.clock_ns > 0:
            raise InvalidInputError("clock period must be > 0")

    @classmethod
    def from_dict(cls, d: dict) -> "ArchConfig":
        extra = set(d) - {"pipeline", "clock_ns", "fifo_depth", "overheads"}
        extra |= {f"pipeline.{k}" for k in set(d.get("pipeline") or {}) - {"serial", "uv"}}
        if extra:
            raise InvalidInputError(f"unknown architecture config keys {sorted(extra)}")
        try:
            pipe = d.get("pipeline", {})
            ov = d.get("overheads", {})
            return cls(
                serial_depth=int(pipe.get("serial", SERIAL_PIPELINE_DEPTH)),
                uv_depth=int(pipe.get("uv", UV_PIPELINE_DEPTH)),
                clock_ns=float(d.get("clock_ns", DEFAULT_CLOCK_NS)),
                fifo_depth=d.get("fifo_depth"),
                overheads=RoutingOverheads(**{k: float(v) for k, v in ov.items()}),
            )
        except (TypeError, ValueError, AttributeError) as exc:
            raise InvalidInputError(f"bad architecture config: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ArchConfig":
        path = Path(path)
        raw = path.read_bytes()
        try:
            if path.suffix.lower() == ".toml":
                try:
                    import tomllib
                except ModuleNotFoundError:  # python < 3.11
                    import tomli as tomllib
                doc = tomllib.loads(raw.decode())
            else:
                doc = json.loads(raw)
        except ValueError as exc:
            raise InvalidInputError(f"{path}: {exc}") from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return {
            "pipeline": {"serial": self.serial_depth, "uv": self.uv_depth},
            "clock_ns": self.clock_ns,
            "fifo_depth": self.fifo_depth,
            "overheads": asdict(self.overheads),
        }


@dataclass(frozen=True)
class PhaseBudget:
    """U/V chains against the serial phases they hide under.

    The U chain runs while ``dz`` is processed, the V chain while ``dx`` is.
    """

    chain_u: int
    chain_v: int
    window_u: int
    window_v: int

    @property
    def overlap_ok(self) -> bool:
        return self.chain_u <= self.window_u and self.chain_v <= self.window_v

    @property
    def slack(self) -> tuple[int, int]:
        return self.window_u - self.chain_u, self.window_v - self.chain_v

    def to_dict(self) -> dict:
        return {**asdict(self), "overlap_ok": self.overlap_ok, "slack": list(self.slack)}


def uv_chain(n_max: int, overheads: RoutingOverheads, k_down: int, uv_depth: int, k_up: int) -> int:
    """Cycles from the first routed message to the last returned one.

    Messages stream into the busiest tile at the worst leg overhead, with
    the two crossbar transits and the tile pipeline on top.  No traffic
    means no chain.
    """
    if n_max == 0:
        return 0
    return math.ceil(n_max * (1 + overheads.worst) - 1e-9) + k_down + uv_depth + k_up


@dataclass(frozen=True)
class TimingReport:
    cycles_load: int
    cycles_dx: int
    cycles_dz: int
    cycles_route_down: int
    cycles_uv: int
    cycles_route_up: int
    cycles_fill: int
    clock_period_ns: float
    budget: PhaseBudget
    stalls_dx: int = 0
    stalls_dz: int = 0

    @property
    def overlap_ok(self) -> bool:
        return self.budget.overlap_ok

    @property
    def cycles_per_iteration(self) -> int:
        return self.cycles_dx + self.cycles_dz

    def total_cycles(self, i: float) -> float:
        """Cycles for ``i`` iterations; ``i`` may be an average."""
        if i < 0:
            raise InvalidInputError("iterations must be >= 0")
        if self.overlap_ok or i == 0:
            return self.cycles_fill + self.cycles_per_iteration * i
        b = self.budget
        dz_step = max(self.cycles_dz, b.chain_u)
        dx_step = max(self.cycles_dx, b.chain_v)
        return self.cycles_fill + self.cycles_dx + dz_step + (i - 1) * (dx_step + dz_step)

    def latency_ns(self, i: float, clock_period_ns: float | None = None) -> float:
        return latency_ns(self, self.clock_period_ns if clock_period_ns is None else clock_period_ns, i)

    def to_dict(self, iterations: Sequence[float] = (1,)) -> dict:
        return {
            "cycles_load": self.cycles_load,
            "cycles_dx": self.cycles_dx,
            "cycles_dz": self.cycles_dz,
            "stalls_dx": self.stalls_dx,
            "stalls_dz": self.stalls_dz,
            "cycles_route_down": self.cycles_route_down,
            "cycles_uv": self.cycles_uv,
            "cycles_route_up": self.cycles_route_up,
            "cycles_fill": self.cycles_fill,
            "cycles_per_iteration": self.cycles_per_iteration,
            "clock_period_ns": self.clock_period_ns,
            "overlap_ok": self.overlap_ok,
            "budget": self.budget.to_dict(),
            "total_cycles": {str(i): self.total_cycles(i) for i in iterations},
            "latency_ns": {str(i): self.latency_ns(i) for i in iterations},
        }

    def to_json(self, iterations: Sequence[float] = (1,)) -> str:
        return json.dumps(self.to_dict(iterations), sort_keys=True)

    def phase_rows(self, iterations: int = 2) -> list[dict]:
        """Per-step lanes: serial unit and its cycles, U/V unit and its chain."""
        b = self.budget
        rows = []
        t = self.cycles_fill
        for k in range(2 * iterations):
            if k == 0:
                serial, n, uv, chain = "DX", self.cycles_dx, "-", 0
            elif k % 2:
                serial, n, uv, chain = "DZ", self.cycles_dz, "U", b.chain_u
            else:
                serial, n, uv, chain = "DX", self.cycles_dx, "V", b.chain_v
            span = n if self.overlap_ok else max(n, chain)
            rows.append({
                "step": f"{k // 2 + 1}{chr(39) if k % 2 else ''}",
                "serial": serial,
                "cycles": n,
                "uv": uv,
                "chain": chain,
                "start": t,
                "end": t + span,
            })
            t += span
        return rows

    def phase_table(self, iterations: int = 2) -> str:
        rows = self.phase_rows(iterations)
        head = list(rows[0])
        cells = [head] + [[str(r[h]) if r[h] != 0 or h != "chain" else "-" for h in head] for r in rows]
        widths = [max(len(c[i]) for c in cells) for i in range(len(head))]
        lines = ["  ".join(c.rjust(wd) for c, wd in zip(r, widths)) for r in cells]
        lines.insert(1, "  ".join("-" * wd for wd in widths))
        lines.append(f"fill {self.cycles_fill} cycles, overlap {'ok' if self.overlap_ok else 'VIOLATED'}, "
                     f"clock {self.clock_period_ns} ns")
        return "\n".join(lines)


def latency_ns(report: TimingReport, clock_period_ns: float, i: float) -> float:
    if not clock_period_ns > 0:
        raise InvalidInputError("clock period must be > 0")
    return report.total_cycles(i) * clock_period_ns


def phase_timing(
    n_dx: int,
    n_dz: int,
    u_max: int,
    v_max: int,
    n_serial_tiles: int,
    uv_ports: int,
    n_uv_tiles: int,
    cfg: ArchConfig = ArchConfig(),
    cycles_load: int = 0,
    stalls: tuple[int, int] = (0, 0),
) -> TimingReport:
    """Timing from raw counts.

    ``u_max``/``v_max`` are the largest number of U/V rows hosted by one
    tile; ``uv_ports`` the e_y port count of the U/V feedback fabric.
    """
    k_down = n_stages(max(n_serial_tiles, n_uv_tiles, 1))
    k_uv = n_stages(max(uv_ports, 1))
    k_up = max(k_down, k_uv)
    ov = cfg.overheads
    dx = n_dx + stalls[0]
    dz = n_dz + stalls[1]
    budget = PhaseBudget(
        chain_u=uv_chain(u_max, ov, k_down, cfg.uv_depth, k_up),
        chain_v=uv_chain(v_max, ov, k_down, cfg.uv_depth, k_up),
        window_u=dz,
        window_v=dx,
    )
    n_max = max(u_max, v_max)
    return TimingReport(
        cycles_load=cycles_load,
        cycles_dx=dx,
        cycles_dz=dz,
        cycles_route_down=math.ceil(n_max * (1 + ov.down)) + k_down if n_max else 0,
        cycles_uv=cfg.uv_depth,
        cycles_route_up=math.ceil(n_max * (1 + max(ov.up, ov.uv_uv))) + k_up if n_max else 0,
        cycles_fill=cfg.uv_depth,
        clock_period_ns=cfg.clock_ns,
        budget=budget,
        stalls_dx=stalls[0],
        stalls_dz=stalls[1],
    )


def cycle_model(
    g: GariModel,
    tm: TileMap | None = None,
    cfg: ArchConfig = ArchConfig(),
    orderings: Sequence[CheckOrdering] = (),
) -> TimingReport:
    """Timing report for a model and its tile map.

    Without a U/V assignment the rows are spread evenly over tiles of
    ``DEFAULT_UV_CAPACITY``.  Orderings for DX/DZ whose separation does not
    exceed the serial pipeline depth add bubble cycles to their pass.
    """
    if tm is not None and tm.has_uv:
        lu, lv = tm.uv_loads()
        u_max, v_max = int(lu.max(initial=0)), int(lv.max(initial=0))
        n_uv = tm.n_uv_tiles
        uv_ports = sum(d - 2 for d in tm.uv_degrees) if tm.uv_degrees else n_uv
    else:
        rows = max(g.u.n_rows, g.v.n_rows)
        n_uv = max(1, math.ceil(rows / DEFAULT_UV_CAPACITY))
        u_max = math.ceil(g.u.n_rows / n_uv)
        v_max = math.ceil(g.v.n_rows / n_uv)
        uv_ports = n_uv
    if tm is not None and tm.has_serial:
        ldx, ldz = tm.serial_loads()
        n_serial, load = tm.n_serial_tiles, int(ldx.max(initial=0)) + int(ldz.max(initial=0))
    else:
        n_serial, load = 1, 0
    stalls = [0, 0]
    for o in orderings:
        m = g.dx if o.which == "DX" else g.dz
        stalls[o.which == "DZ"] = hazard_stalls(m, o.order, cfg.serial_depth)
    if g.u.nnz == 0 and g.v.nnz == 0:
        u_max = v_max = 0
    return phase_timing(
        g.dx.n_rows, g.dz.n_rows, u_max, v_max, n_serial, uv_ports, n_uv, cfg, load, (stalls[0], stalls[1])
    )


def verify_overlap(g: GariModel, tm: TileMap | None, report: TimingReport | None = None, cfg: ArchConfig = ArchConfig()) -> PhaseBudget:
    return (report or cycle_model(g, tm, cfg)).budget


__all__ = [
    "ArchConfig",
    "CrossbarNetwork",
    "DEFAULT_CLOCK_NS",
    "PhaseBudget",
    "RouteResult",
    "RoutingOverheads",
    "SERIAL_PIPELINE_DEPTH",
    "TaggedMessage",
    "TimingReport",
    "UV_PIPELINE_DEPTH",
    "cycle_model",
    "latency_ns",
    "make_batch",
    "measure_overhead",
    "n_stages",
    "phase_timing",
    "random_batch",
    "stage_index_map",
    "uv_chain",
    "verify_overlap",
]
