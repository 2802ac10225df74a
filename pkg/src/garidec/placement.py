"""Variable-to-tile and check-to-tile assignment, plus serial check ordering.

Serial tiles hold the auxiliary variables touched by the ``dx`` and ``dz``
passes.  Two variables of the same check may never share a tile, because a
tile serves one variable per cycle.  U/V tiles host whole U or V rows and
bound both the row degree and the number of rows per matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InfeasibleMappingError, InvalidInputError, StaleHazardError
from .gf2model import GariModel, SparseBitMatrix

DEFAULT_UV_CAPACITY = 500


def _matrix(g: GariModel, which: str) -> SparseBitMatrix:
    if which == "DX":
        return g.dx
    if which == "DZ":
        return g.dz
    raise InvalidInputError(f"which must be DX or DZ, got {which!r}")


@dataclass
class TileMap:
    """Tile assignment for both units.  ``-1`` marks an unassigned entry."""

    n_serial_tiles: int = 0
    serial_dx: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    serial_dz: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    n_uv_tiles: int = 0
    uv_capacity: int = DEFAULT_UV_CAPACITY
    uv_degrees: tuple[int, ...] = ()
    uv_u: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    uv_v: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))

    def __post_init__(self):
        for name in ("serial_dx", "serial_dz", "uv_u", "uv_v"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.int64).reshape(-1))
        self.uv_degrees = tuple(int(d) for d in self.uv_degrees)
        if self.uv_degrees and len(self.uv_degrees) != self.n_uv_tiles:
            raise InvalidInputError("uv_degrees must list one degree per U/V tile")
        for name, n in (("serial_dx", self.n_serial_tiles), ("serial_dz", self.n_serial_tiles),
                        ("uv_u", self.n_uv_tiles), ("uv_v", self.n_uv_tiles)):
            a = getattr(self, name)
            if a.size and (a.min() < 0 or a.max() >= n):
                raise InvalidInputError(f"{name} refers to a tile outside 0..{n - 1}")

    # loads ------------------------------------------------------------------

    @staticmethod
    def _counts(a: np.ndarray, n: int) -> np.ndarray:
        return np.bincount(a, minlength=n) if a.size else np.zeros(n, np.int64)

    def serial_loads(self) -> tuple[np.ndarray, np.ndarray]:
        return self._counts(self.serial_dx, self.n_serial_tiles), self._counts(self.serial_dz, self.n_serial_tiles)

    def uv_loads(self) -> tuple[np.ndarray, np.ndarray]:
        return self._counts(self.uv_u, self.n_uv_tiles), self._counts(self.uv_v, self.n_uv_tiles)

    @property
    def has_serial(self) -> bool:
        return self.n_serial_tiles > 0

    @property
    def has_uv(self) -> bool:
        return self.n_uv_tiles > 0

    def stats(self) -> dict:
        ldx, ldz = self.serial_loads()
        lu, lv = self.uv_loads()
        return {
            "serial_tiles": self.n_serial_tiles,
            "dx_max_load": int(ldx.max(initial=0)),
            "dz_max_load": int(ldz.max(initial=0)),
            "uv_tiles": self.n_uv_tiles,
            "u_max_load": int(lu.max(initial=0)),
            "v_max_load": int(lv.max(initial=0)),
        }

    # checks -----------------------------------------------------------------

    def conflicts(self, g: GariModel) -> list[tuple[str, int]]:
        """Checks whose variables collide on a serial tile, as ``(matrix, row)``."""
        bad = []
        for which, a in (("DX", self.serial_dx), ("DZ", self.serial_dz)):
            if a.size == 0:
                continue
            for r, vs in enumerate(_matrix(g, which).row_supports):
                if len(set(a[vs].tolist())) != len(vs):
                    bad.append((which, r))
        return bad

    def validate(self, g: GariModel) -> None:
        if self.has_serial:
            if self.serial_dx.size != g.dx.n_cols or self.serial_dz.size != g.dz.n_cols:
                raise InvalidInputError("serial assignment does not match the model's variable counts")
            bad = self.conflicts(g)
            if bad:
                raise InvalidInputError(f"{len(bad)} checks place two variables on one tile, first {bad[0]}")
        if self.has_uv:
            if self.uv_u.size != g.u.n_rows or self.uv_v.size != g.v.n_rows:
                raise InvalidInputError("U/V assignment does not match the model's row counts")
            lu, lv = self.uv_loads()
            if max(lu.max(initial=0), lv.max(initial=0)) > self.uv_capacity:
                raise InvalidInputError("a U/V tile exceeds its capacity")
            if self.uv_degrees:
                degs = np.asarray(self.uv_degrees)
                for rows, deg in ((self.uv_u, uv_row_degrees(g.u)), (self.uv_v, uv_row_degrees(g.v))):
                    if np.any(deg > degs[rows]):
                        raise InvalidInputError("a U/V row exceeds its tile's check degree")

    # serialization ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n_serial_tiles": self.n_serial_tiles,
            "serial_dx": self.serial_dx.tolist(),
            "serial_dz": self.serial_dz.tolist(),
            "n_uv_tiles": self.n_uv_tiles,
            "uv_capacity": self.uv_capacity,
            "uv_degrees": list(self.uv_degrees),
            "uv_u": self.uv_u.tolist(),
            "uv_v": self.uv_v.tolist(),
            "stats": self.stats(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TileMap":
        try:
            return cls(
                n_serial_tiles=int(d.get("n_serial_tiles", 0)),
                serial_dx=d.get("serial_dx", []),
                serial_dz=d.get("serial_dz", []),
                n_uv_tiles=int(d.get("n_uv_tiles", 0)),
                uv_capacity=int(d.get("uv_capacity", DEFAULT_UV_CAPACITY)),
                uv_degrees=d.get("uv_degrees", ()),
                uv_u=d.get("uv_u", []),
                uv_v=d.get("uv_v", []),
            )
        except (TypeError, ValueError, AttributeError) as exc:
            raise InvalidInputError(f"malformed tile map: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "TileMap":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"{path}: not JSON") from exc

    def merged(self, other: "TileMap") -> "TileMap":
        """Serial part from ``self``, U/V part from ``other``."""
        return TileMap(
            self.n_serial_tiles, self.serial_dx, self.serial_dz,
            other.n_uv_tiles, other.uv_capacity, other.uv_degrees, other.uv_u, other.uv_v,
        )


# serial tiles -----------------------------------------------------------------


def _neighbours(m: SparseBitMatrix) -> list[np.ndarray]:
    """Variables sharing at least one check, per variable."""
    adj = (m.csc.T @ m.csc).tocsr()
    adj.setdiag(0)
    adj.eliminate_zeros()
    return [adj.indices[adj.indptr[v]:adj.indptr[v + 1]] for v in range(m.n_cols)]


def _color(m: SparseBitMatrix, n_open: int, order_key=None) -> tuple[np.ndarray, int]:
    nbrs = _neighbours(m)
    deg = np.array([len(n) for n in nbrs], dtype=np.int64)
    key = np.arange(m.n_cols) if order_key is None else order_key
    order = np.lexsort((key, -deg))
    tile = np.full(m.n_cols, -1, np.int64)
    loads = [0] * n_open
    for v in order:
        taken = set(tile[nbrs[v]].tolist())
        best = -1
        for t, load in enumerate(loads):
            if t not in taken and (best < 0 or load < loads[best]):
                best = t
        if best < 0:
            best = len(loads)
            loads.append(0)
        tile[v] = best
        loads[best] += 1
    return tile, len(loads)


def map_serial_variables(
    g: GariModel,
    target_tiles: int = 0,
    restarts: int = 0,
    seed: int = 0,
) -> TileMap:
    """Conflict-free tile coloring of the ``dx`` and ``dz`` variables.

    Variables are visited by conflict degree (descending, lowest index on
    ties) and placed on the least-loaded tile that holds none of their
    neighbours.  ``target_tiles`` tiles exist from the start; more are opened
    when no tile fits.  Both matrices share the same tiles.  ``restarts``
    extra runs with seeded tie-breaks keep the result with the fewest tiles,
    then the smallest load.
    """

    def attempt(keys):
        cdx, ndx = _color(g.dx, target_tiles, keys[0])
        cdz, ndz = _color(g.dz, target_tiles, keys[1])
        tm = TileMap(n_serial_tiles=max(ndx, ndz, target_tiles), serial_dx=cdx, serial_dz=cdz)
        ldx, ldz = tm.serial_loads()
        return (tm.n_serial_tiles, int(ldx.max(initial=0)) + int(ldz.max(initial=0))), tm

    best = attempt((None, None))
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        cand = attempt((rng.permutation(g.dx.n_cols), rng.permutation(g.dz.n_cols)))
        if cand[0] < best[0]:
            best = cand
    return best[1]


def load_cycles(tm: TileMap) -> tuple[int, int]:
    """Cycles to load each serial pass: the largest per-tile variable count."""
    if not tm.has_serial:
        raise InvalidInputError("tile map has no serial assignment")
    ldx, ldz = tm.serial_loads()
    return int(ldx.max(initial=0)), int(ldz.max(initial=0))


# U/V tiles --------------------------------------------------------------------


def uv_row_degrees(m: SparseBitMatrix) -> np.ndarray:
    """Check degree of each U (or V) row: the fixed e_z/e_x, its e_y, and ebar."""
    return np.bincount(m.entries[:, 0], minlength=m.n_rows) + 2 if m.nnz else np.full(m.n_rows, 2, np.int64)


def _assign_rows(deg: np.ndarray, tile_degrees: np.ndarray, capacity: int, name: str) -> np.ndarray:
    n_tiles = tile_degrees.size
    if deg.size and deg.max() > tile_degrees.max(initial=0):
        raise InfeasibleMappingError(f"{name} row of degree {int(deg.max())} exceeds every tile degree")
    if deg.size > n_tiles * capacity:
        raise InfeasibleMappingError(f"{deg.size} {name} rows exceed {n_tiles} tiles x {capacity}")
    # groups of equal-degree tiles, in tile order
    groups: list[list[int]] = []
    for t in range(n_tiles):
        if groups and tile_degrees[groups[-1][0]] == tile_degrees[t]:
            groups[-1].append(t)
        else:
            groups.append([t])
    loads = np.zeros(n_tiles, np.int64)
    out = np.full(deg.size, -1, np.int64)
    for r in np.argsort(-deg, kind="stable"):
        for grp in groups:
            if tile_degrees[grp[0]] < deg[r]:
                continue
            open_ = [t for t in grp if loads[t] < capacity]
            if open_:
                t = min(open_, key=lambda t: (loads[t], t))
                out[r] = t
                loads[t] += 1
                break
        else:
            raise InfeasibleMappingError(f"no tile left for {name} row {int(r)} of degree {int(deg[r])}")
    return out


def map_uv_checks(g: GariModel, tile_degrees: Sequence[int], capacity: int = DEFAULT_UV_CAPACITY) -> TileMap:
    """Greedy largest-row-first placement of U and V rows onto U/V tiles.

    Each tile holds at most ``capacity`` U rows and ``capacity`` V rows.
    A row goes to the first group of equal-degree tiles (in list order)
    whose degree suffices and that still has room, and within the group to
    its least-loaded tile.
    """
    degs = np.asarray(list(tile_degrees), dtype=np.int64)
    if degs.size == 0 or capacity < 1:
        raise InvalidInputError("need at least one tile and capacity >= 1")
    uv_u = _assign_rows(uv_row_degrees(g.u), degs, capacity, "U")
    uv_v = _assign_rows(uv_row_degrees(g.v), degs, capacity, "V")
    return TileMap(n_uv_tiles=degs.size, uv_capacity=capacity, uv_degrees=tuple(degs.tolist()), uv_u=uv_u, uv_v=uv_v)


# serial check ordering --------------------------------------------------------


@dataclass(frozen=True)
class CheckOrdering:
    which: str
    order: tuple[int, ...]
    min_separation: int
    pipeline_depth: int

    @property
    def accepted(self) -> bool:
        return self.min_separation > self.pipeline_depth

    def to_dict(self) -> dict:
        return {
            "which": self.which,
            "order": list(self.order),
            "min_separation": self.min_separation,
            "pipeline_depth": self.pipeline_depth,
            "accepted": self.accepted,
        }


def min_separation(m: SparseBitMatrix, order: Sequence[int]) -> int:
    """Smallest position gap between two checks that share a variable.

    Equals ``len(order)`` when no two checks share a variable.
    """
    n = len(order)
    pos = np.empty(m.n_rows, np.int64)
    pos[np.asarray(order, dtype=np.int64)] = np.arange(n)
    best = n
    for col in m.col_supports:
        if len(col) > 1:
            p = np.sort(pos[list(col)])
            best = min(best, int(np.diff(p).min()))
    return best


def _check_neighbours(m: SparseBitMatrix) -> list[np.ndarray]:
    adj = (m.csr @ m.csr.T).tocsr()
    adj.setdiag(0)
    adj.eliminate_zeros()
    return [adj.indices[adj.indptr[c]:adj.indptr[c + 1]] for c in range(m.n_rows)]


def _greedy_order(m: SparseBitMatrix, tie: np.ndarray, target: int | None = None) -> list[int]:
    """Least-recently-used greedy.

    key[c] is the last slot at which any variable of c was used.  With a
    ``target`` separation, checks already clear of that window are taken
    first, the one with the most unscheduled neighbours winning, so the
    hard checks do not pile up at the tail.
    """
    nbrs = _check_neighbours(m)
    live = m.row_degrees() > 0
    n = int(live.sum())
    never = -(m.n_rows + 1)
    key = np.full(m.n_rows, never, np.int64)
    pending = np.array([len(x) for x in nbrs], dtype=np.int64)
    rank = np.empty(m.n_rows, np.int64)
    rank[np.argsort(tie, kind="stable")] = np.arange(m.n_rows)
    big = m.n_rows + 1
    worst = np.iinfo(np.int64).max
    order = []
    for step in range(n):
        clear = live & (step - key >= target) if target else None
        if clear is not None and clear.any():
            score = np.where(clear, -pending * big + rank, worst)
        else:
            score = np.where(live, (key - never) * big + rank, worst)
        pick = int(np.argmin(score))
        live[pick] = False
        order.append(pick)
        key[nbrs[pick]] = step
        pending[nbrs[pick]] -= 1
    return order


def _insert_spacers(m: SparseBitMatrix, order: list[int], empty: list[int]) -> list[int]:
    """Place variable-free checks where they widen the separation most."""
    for c in empty:
        best = None
        for k in range(len(order) + 1):
            cand = order[:k] + [c] + order[k:]
            score = _gaps(m, cand)
            if best is None or score > best[0]:
                best = (score, cand)
        order = best[1]
    return order


def _gaps(m: SparseBitMatrix, order: Sequence[int]) -> tuple[int, int]:
    # separation first, then how many pairs sit at that separation (fewer is better)
    pos = np.full(m.n_rows, -1, np.int64)
    pos[np.asarray(order, dtype=np.int64)] = np.arange(len(order))
    diffs = [np.diff(np.sort(pos[list(col)])) for col in m.col_supports if len(col) > 1]
    if not diffs:
        return len(order), 0
    d = np.concatenate(diffs)
    lo = int(d.min())
    return lo, -int((d == lo).sum())


def _order(m: SparseBitMatrix, tie, target: int | None = None) -> list[int]:
    order = _greedy_order(m, np.asarray(tie), target)
    empty = np.nonzero(m.row_degrees() == 0)[0].tolist()
    return _insert_spacers(m, order, empty) if empty else order


def order_checks(
    g: GariModel,
    which: str,
    pipeline_depth: int,
    restarts: int = 32,
    seed: int = 0,
    allow_stalls: bool = False,
) -> CheckOrdering:
    """Order the checks of one serial pass to spread out shared variables.

    The greedy picks, at each slot, the check whose most recently used
    variable was used longest ago (lowest index on ties).  A targeted pass
    then raises the separation goal one step at a time for as long as it is
    met.  Checks without variables are slotted in as spacers where they
    help most.  If the depth is still not cleared, ``restarts`` reruns the
    plain greedy with seeded tie-breaks and keeps the widest separation.  An
    ordering whose separation does not exceed ``pipeline_depth`` raises
    :class:`StaleHazardError` unless ``allow_stalls`` is set.
    """
    if pipeline_depth < 1:
        raise InvalidInputError("pipeline_depth must be >= 1")
    m = _matrix(g, which)
    natural = np.arange(m.n_rows)
    order = _order(m, natural)
    sep = min_separation(m, order)
    target = max(sep, pipeline_depth) + 1
    while target <= m.n_rows:
        cand = _order(m, natural, target)
        s = min_separation(m, cand)
        if s > sep:
            order, sep = cand, s
        if s < target:
            break
        target = s + 1
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        if sep > pipeline_depth:
            break
        cand = _order(m, rng.permutation(m.n_rows))
        s = min_separation(m, cand)
        if s > sep:
            order, sep = cand, s
    result = CheckOrdering(which, tuple(order), sep, pipeline_depth)
    if not result.accepted and not allow_stalls:
        raise StaleHazardError(
            f"{which}: best separation {sep} does not exceed pipeline depth {pipeline_depth}", ordering=result
        )
    return result


def hazard_stalls(m: SparseBitMatrix, order: Sequence[int], pipeline_depth: int) -> int:
    """Bubble cycles needed so a check never reads a variable still in flight.

    A check may issue once every earlier check touching one of its
    variables issued more than ``pipeline_depth`` cycles before.
    """
    last = np.full(m.n_cols, -(10**9), np.int64)
    rows = m.row_supports
    t = -1
    for c in order:
        vs = rows[c]
        t = max(t + 1, int(last[vs].max(initial=-(10**9))) + pipeline_depth + 1)
        last[vs] = t
    return max(0, t + 1 - len(order))


__all__ = [
    "CheckOrdering",
    "DEFAULT_UV_CAPACITY",
    "TileMap",
    "hazard_stalls",
    "load_cycles",
    "map_serial_variables",
    "map_uv_checks",
    "min_separation",
    "order_checks",
    "uv_row_degrees",
]
