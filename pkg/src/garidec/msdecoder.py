"""Fixed-point normalized min-sum decoding over the GARI model.

The serial unit runs layered passes over ``dx`` (acting on ``ebar_z``) and
``dz`` (acting on ``ebar_x``).  The parallel unit updates the independent
rows of the ``U`` and ``V`` blocks.  Steps interleave as

    step    1    1'   2    2'   3  ...
    serial  DX   DZ   DX   DZ   DX
    uv      -    U    V    U    V

Quantized values are held in float64 arrays whose entries are integers,
so one code path serves both the quantized and real-valued modes.
"""

from __future__ import annotations

import json
import struct
import weakref
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateCheckError,
    InvalidInputError,
    SchedulingViolationError,
)
from .gf2model import GariModel, RecoveredError, Syndrome, recover_physical_error, resolve_physical_error

QUANTIZED = "quantized"
REAL = "real"
BASES = ("X", "Z", "XZ")


def saturation(width: int) -> int:
    """Largest magnitude representable in a symmetric ``width``-bit word."""
    return (1 << (width - 1)) - 1


def quantize(x, width: int):
    """Round half away from zero onto the integer grid, then saturate."""
    if width < 2:
        raise InvalidInputError(f"width must be >= 2, got {width}")
    s = saturation(width)
    a = np.asarray(x, dtype=np.float64)
    q = np.clip(np.sign(a) * np.floor(np.abs(a) + 0.5), -s, s)
    if q.ndim == 0:
        return int(q)
    return q


@dataclass(frozen=True)
class FixedPointSpec:
    """Bit widths and normalization factor for the decoder datapath.

    In ``real`` mode nothing is rounded or saturated; the widths are kept
    only so one FixedPointSpec can be flipped between modes.
    """

    bits_llr: int = 6
    bits_cn: int = 8
    bits_vn: int = 10
    alpha: Fraction = Fraction(3, 4)
    mode: str = QUANTIZED

    def __post_init__(self):
        for name in ("bits_llr", "bits_cn", "bits_vn"):
            if int(getattr(self, name)) < 2:
                raise InvalidInputError(f"{name} must be >= 2")
        if self.mode not in (QUANTIZED, REAL):
            raise InvalidInputError(f"mode must be {QUANTIZED!r} or {REAL!r}")
        try:
            alpha = Fraction(self.alpha)
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"bad alpha {self.alpha!r}") from exc
        if not 0 < alpha <= 1:
            raise InvalidInputError("alpha must satisfy 0 < alpha <= 1")
        if self.mode == QUANTIZED and alpha.denominator & (alpha.denominator - 1):
            raise InvalidInputError("alpha must be a dyadic rational in quantized mode")
        object.__setattr__(self, "alpha", alpha)

    @property
    def quantized(self) -> bool:
        return self.mode == QUANTIZED

    @property
    def max_cn(self) -> float:
        return float(saturation(self.bits_cn)) if self.quantized else np.inf

    @property
    def max_vn(self) -> float:
        return float(saturation(self.bits_vn)) if self.quantized else np.inf

    def q_llr(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return quantize(x, self.bits_llr) if self.quantized else x.copy()

    def sat_cn(self, x) -> np.ndarray:
        return np.clip(x, -self.max_cn, self.max_cn) if self.quantized else x

    def sat_vn(self, x) -> np.ndarray:
        return np.clip(x, -self.max_vn, self.max_vn) if self.quantized else x

    def normalize(self, x) -> np.ndarray:
        y = float(self.alpha) * np.asarray(x, dtype=np.float64)
        return quantize(y, self.bits_cn) if self.quantized else y

    def with_mode(self, mode: str) -> "FixedPointSpec":
        return FixedPointSpec(self.bits_llr, self.bits_cn, self.bits_vn, self.alpha, mode)

    def to_dict(self) -> dict:
        return {
            "bits_llr": self.bits_llr,
            "bits_cn": self.bits_cn,
            "bits_vn": self.bits_vn,
            "alpha": str(self.alpha),
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FixedPointSpec":
        known = {"bits_llr", "bits_cn", "bits_vn", "alpha", "mode"}
        extra = set(d) - known
        if extra:
            raise InvalidInputError(f"unknown FixedPointSpec fields {sorted(extra)}")
        kw = dict(d)
        if "alpha" in kw:
            kw["alpha"] = Fraction(str(kw["alpha"]))
        return cls(**kw)


def _cnu(x: np.ndarray, syndrome_bit: int, spec: FixedPointSpec) -> np.ndarray:
    neg = x < 0
    mag = np.abs(x)
    i1 = int(np.argmin(mag))
    m1 = mag[i1]
    mag[i1] = np.inf
    minex = np.full(x.shape, m1)
    minex[i1] = mag.min()
    flip = (int(neg.sum()) + syndrome_bit) & 1
    sign = np.where(neg ^ bool(flip), -1.0, 1.0)
    return spec.normalize(sign * minex)


def check_update_minsum(inputs, syndrome_bit: int, mask=None, spec: FixedPointSpec | None = None) -> np.ndarray:
    """One normalized min-sum check update.

    Masked slots are fed the saturation maximum (so they never win the min
    and carry a + sign) and their outputs are returned as 0.
    """
    spec = spec or FixedPointSpec()
    x = np.asarray(inputs, dtype=np.float64).copy()
    active = np.ones(x.shape, bool) if mask is None else np.asarray(mask, dtype=bool)
    if active.shape != x.shape:
        raise InvalidInputError("mask and inputs differ in length")
    if active.sum() < 2:
        raise DegenerateCheckError("check update needs at least two active inputs")
    x[~active] = spec.max_cn
    out = _cnu(x, int(syndrome_bit) & 1, spec)
    out[~active] = 0.0
    return out


def _segment_minsum(x: np.ndarray, starts: np.ndarray, seg_id: np.ndarray, syndrome, spec: FixedPointSpec) -> np.ndarray:
    """Min-sum over many independent checks laid out contiguously in ``x``."""
    if x.size == 0:
        return x.copy()
    n = x.size
    neg = x < 0
    mag = np.abs(x)
    m1 = np.minimum.reduceat(mag, starts)
    pos = np.where(mag == m1[seg_id], np.arange(n), n)
    i1 = np.minimum.reduceat(pos, starts)
    mag2 = mag.copy()
    mag2[i1] = np.inf
    m2 = np.minimum.reduceat(mag2, starts)
    minex = m1[seg_id]
    minex[i1] = m2
    parity = (np.add.reduceat(neg.astype(np.int64), starts) + syndrome) & 1
    sign = np.where((parity[seg_id] + neg) & 1, -1.0, 1.0)
    return spec.normalize(sign * minex)


class _Layout:
    """Edge layout of one GARI model, shared by every decode on it."""

    def __init__(self, g: GariModel):
        sl = g.slices
        self.dx = self._serial(g.dx, sl["ebar_z"].start)
        self.dz = self._serial(g.dz, sl["ebar_x"].start)
        self.u = self._parallel(g.group_sizes.e_z, g.u_row_of, sl["e_z"].start, sl["e_y"].start, sl["ebar_z"].start)
        self.v = self._parallel(g.group_sizes.e_x, g.v_row_of, sl["e_x"].start, sl["e_y"].start, sl["ebar_x"].start)

    @staticmethod
    def _serial(m, offset: int):
        csr = m.csr.copy()
        csr.sort_indices()
        deg = np.diff(csr.indptr)
        if np.any(deg == 1):
            raise DegenerateCheckError(f"checks {np.nonzero(deg == 1)[0].tolist()} have degree 1")
        return csr.indptr.astype(np.int64), csr.indices.astype(np.int64) + offset

    @staticmethod
    def _parallel(n_rows: int, row_of: np.ndarray, fixed_off: int, ey_off: int, ebar_off: int):
        # row r lays out as [fixed r, e_y..., ebar r]
        counts = np.bincount(row_of, minlength=n_rows) if row_of.size else np.zeros(n_rows, np.int64)
        lengths = counts + 2
        starts = np.concatenate([[0], np.cumsum(lengths)[:-1]]).astype(np.int64)
        total = int(lengths.sum())
        var = np.empty(total, np.int64)
        rows = np.arange(n_rows)
        fixed_pos = starts
        ebar_pos = starts + lengths - 1
        var[fixed_pos] = fixed_off + rows
        var[ebar_pos] = ebar_off + rows
        ey_pos = np.empty(row_of.size, np.int64)
        fill = starts + 1
        for j, r in enumerate(row_of.tolist()):
            ey_pos[j] = fill[r]
            fill[r] += 1
        var[ey_pos] = ey_off + np.arange(row_of.size)
        seg_id = np.repeat(np.arange(n_rows), lengths)
        return {
            "starts": starts,
            "seg_id": seg_id,
            "var": var,
            "fixed_pos": fixed_pos,
            "ey_pos": ey_pos,
            "ebar_pos": ebar_pos,
            "n_edges": total,
        }


_LAYOUTS: "weakref.WeakKeyDictionary[GariModel, _Layout]" = weakref.WeakKeyDictionary()


def _layout(g: GariModel) -> _Layout:
    lay = _LAYOUTS.get(g)
    if lay is None:
        lay = _LAYOUTS[g] = _Layout(g)
    return lay


@dataclass(frozen=True)
class Schedule:
    """Check visiting orders for the two serial passes."""

    dx_order: tuple[int, ...]
    dz_order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dx_order", tuple(int(c) for c in self.dx_order))
        object.__setattr__(self, "dz_order", tuple(int(c) for c in self.dz_order))

    @classmethod
    def natural(cls, g: GariModel) -> "Schedule":
        return cls(tuple(range(g.dx.n_rows)), tuple(range(g.dz.n_rows)))

    @classmethod
    def permuted(cls, g: GariModel, rng: np.random.Generator) -> "Schedule":
        return cls(tuple(rng.permutation(g.dx.n_rows).tolist()), tuple(rng.permutation(g.dz.n_rows).tolist()))

    def validate(self, g: GariModel) -> None:
        if sorted(self.dx_order) != list(range(g.dx.n_rows)):
            raise InvalidInputError("dx_order is not a permutation of the dx checks")
        if sorted(self.dz_order) != list(range(g.dz.n_rows)):
            raise InvalidInputError("dz_order is not a permutation of the dz checks")

    def order(self, which: str) -> tuple[int, ...]:
        return self.dx_order if which == "DX" else self.dz_order

    @staticmethod
    def phase(k: int) -> tuple[str, str | None]:
        """Units active at 0-based step ``k`` (k=0 is step 1, k=1 is step 1')."""
        if k == 0:
            return "DX", None
        return ("DZ", "U") if k % 2 else ("DX", "V")

    @staticmethod
    def label(k: int) -> str:
        return f"{k // 2 + 1}{chr(39) if k % 2 else ''}"

    def to_dict(self) -> dict:
        return {"dx_order": list(self.dx_order), "dz_order": list(self.dz_order)}


@dataclass
class DecoderState:
    posterior: np.ndarray
    cn_dx: np.ndarray
    cn_dz: np.ndarray
    cn_u: np.ndarray
    cn_v: np.ndarray
    llr_q: np.ndarray
    hard: np.ndarray
    ext_ebar_z: np.ndarray | None = None
    ext_ebar_x: np.ndarray | None = None
    step: int = 0
    converged: bool = False
    serial_passes: dict = field(default_factory=lambda: {"DX": 0, "DZ": 0})

    @classmethod
    def initial(cls, g: GariModel, spec: FixedPointSpec) -> "DecoderState":
        lay = _layout(g)
        llr_q = spec.q_llr(g.llr0)
        llr_q.setflags(write=False)
        return cls(
            posterior=llr_q.copy(),
            cn_dx=np.zeros(g.dx.nnz),
            cn_dz=np.zeros(g.dz.nnz),
            cn_u=np.zeros(lay.u["n_edges"]),
            cn_v=np.zeros(lay.v["n_edges"]),
            llr_q=llr_q,
            hard=(llr_q < 0).astype(np.uint8),
        )

    def digest(self) -> int:
        crc = 0
        for a in (self.posterior, self.cn_dx, self.cn_dz, self.cn_u, self.cn_v):
            crc = zlib.crc32(np.ascontiguousarray(a).tobytes(), crc)
        return crc


def within_saturation(state: DecoderState, spec: FixedPointSpec) -> bool:
    if not spec.quantized:
        return True
    msgs = (state.cn_dx, state.cn_dz, state.cn_u, state.cn_v)
    return bool(np.all(np.abs(state.posterior) <= spec.max_vn) and all(np.all(np.abs(m) <= spec.max_cn) for m in msgs))


def _refresh_hard(state: DecoderState, idx) -> None:
    state.hard[idx] = state.posterior[idx] < 0


def process_serial_layer(
    state: DecoderState,
    g: GariModel,
    which: str,
    syndrome: Syndrome,
    schedule: Schedule | None = None,
    spec: FixedPointSpec | None = None,
) -> DecoderState:
    """One layered pass over ``dx`` or ``dz`` in schedule order.

    At the end of the pass the auxiliary variables' extrinsic values
    (posterior minus the last message from their U/V check) are latched
    for the parallel unit.
    """
    spec = spec or FixedPointSpec()
    schedule = schedule or Schedule.natural(g)
    lay = _layout(g)
    if which == "DX":
        (ptr, var), msgs, syn = lay.dx, state.cn_dx, _bits(syndrome.s_x)
        group, uv, cn_uv = g.slices["ebar_z"], lay.u, state.cn_u
    elif which == "DZ":
        (ptr, var), msgs, syn = lay.dz, state.cn_dz, _bits(syndrome.s_z)
        group, uv, cn_uv = g.slices["ebar_x"], lay.v, state.cn_v
    else:
        raise InvalidInputError(f"serial pass must be DX or DZ, got {which!r}")
    P = state.posterior
    if state.serial_passes[which] == 0:
        P[group] = state.llr_q[group]
    for c in schedule.order(which):
        a, b = ptr[c], ptr[c + 1]
        if a == b:
            continue
        vs = var[a:b]
        x = spec.sat_cn(P[vs] - msgs[a:b])
        r = _cnu(x, syn[c], spec)
        msgs[a:b] = r
        P[vs] = spec.sat_vn(x + r)
    ext = spec.sat_cn(P[group] - cn_uv[uv["ebar_pos"]])
    if which == "DX":
        state.ext_ebar_z = ext
    else:
        state.ext_ebar_x = ext
    state.serial_passes[which] += 1
    _refresh_hard(state, group)
    return state


def _bits(bits) -> list[int]:
    return [int(b) for b in bits]


def process_uv(state: DecoderState, g: GariModel, which: str, spec: FixedPointSpec | None = None) -> DecoderState:
    """Update every row of the U (or V) block in parallel.

    Row inputs: the fixed e_z/e_x LLR, each e_y LLR plus the message it last
    received from the opposite block, and the latched ebar extrinsic.
    """
    spec = spec or FixedPointSpec()
    lay = _layout(g)
    sl = g.slices
    if which == "U":
        mine, other = lay.u, lay.v
        ext, fixed, ebar = state.ext_ebar_z, sl["e_z"], sl["ebar_z"]
        own, opp = state.cn_u, state.cn_v
    elif which == "V":
        mine, other = lay.v, lay.u
        ext, fixed, ebar = state.ext_ebar_x, sl["e_x"], sl["ebar_x"]
        own, opp = state.cn_v, state.cn_u
    else:
        raise InvalidInputError(f"parallel pass must be U or V, got {which!r}")
    if ext is None:
        raise SchedulingViolationError(f"{which} pass has no fresh ebar messages from the serial unit")
    ey = sl["e_y"]
    llr = state.llr_q
    x = np.empty(mine["n_edges"])
    x[mine["fixed_pos"]] = llr[fixed]
    x[mine["ey_pos"]] = spec.sat_cn(llr[ey] + opp[other["ey_pos"]])
    x[mine["ebar_pos"]] = ext
    out = _segment_minsum(x, mine["starts"], mine["seg_id"], 0, spec)
    own[:] = out
    P = state.posterior
    P[ebar] = spec.sat_vn(ext + out[mine["ebar_pos"]])
    P[fixed] = spec.sat_vn(llr[fixed] + out[mine["fixed_pos"]])
    P[ey] = spec.sat_vn(llr[ey] + state.cn_u[lay.u["ey_pos"]] + state.cn_v[lay.v["ey_pos"]])
    if which == "U":
        state.ext_ebar_z = None
    else:
        state.ext_ebar_x = None
    for s in (ebar, fixed, ey):
        _refresh_hard(state, s)
    return state


def parity_check(state: DecoderState, g: GariModel, basis: str, syndrome: Syndrome) -> bool:
    """True when the auxiliary hard decisions reproduce the syndrome in ``basis``."""
    if basis not in BASES:
        raise InvalidInputError(f"basis must be one of {BASES}")
    ok = True
    if "Z" in basis:
        ok &= np.array_equal(g.dz.matvec(state.hard[g.slices["ebar_x"]]), syndrome.s_z)
    if "X" in basis:
        ok &= np.array_equal(g.dx.matvec(state.hard[g.slices["ebar_z"]]), syndrome.s_x)
    return bool(ok)


@dataclass
class DecodeResult:
    hard: np.ndarray
    iterations: int
    converged: bool
    trace: list[dict]
    sizes: tuple[int, ...]

    @property
    def groups(self) -> dict[str, np.ndarray]:
        out, start = {}, 0
        for name, n in zip(("e_z", "e_x", "e_y", "ebar_z", "ebar_x"), self.sizes):
            out[name] = self.hard[start:start + n]
            start += n
        return out

    def physical(self, g: GariModel) -> RecoveredError:
        return recover_physical_error(g, self.hard)

    def correction(self, g: GariModel) -> np.ndarray:
        return resolve_physical_error(g, self.hard)

    def to_dict(self, g: GariModel | None = None) -> dict:
        d = {
            "converged": self.converged,
            "iterations": self.iterations,
            "hard": {k: v.astype(int).tolist() for k, v in self.groups.items()},
            "trace": self.trace,
        }
        if g is not None:
            d["correction"] = self.correction(g).astype(int).tolist()
            d["consistent"] = self.physical(g).consistent
        return d

    def to_json(self, g: GariModel | None = None) -> str:
        return json.dumps(self.to_dict(g), sort_keys=True)


def decode(
    g: GariModel,
    syndrome: Syndrome,
    spec: FixedPointSpec | None = None,
    max_iters: int = 64,
    basis: str = "Z",
    schedule: Schedule | None = None,
) -> DecodeResult:
    """Run the interleaved schedule until the parity check in ``basis`` passes.

    The check runs after DZ steps for the Z and XZ bases and after DX steps
    for the X basis.  ``iterations`` counts serial DX passes.
    """
    if max_iters < 1:
        raise InvalidInputError("max_iters must be >= 1")
    if basis not in BASES:
        raise InvalidInputError(f"basis must be one of {BASES}")
    spec = spec or FixedPointSpec()
    syndrome.check_against(g)
    schedule = schedule or Schedule.natural(g)
    schedule.validate(g)
    state = DecoderState.initial(g, spec)
    check_after = "DX" if basis == "X" else "DZ"
    trace: list[dict] = []
    iterations = max_iters
    for k in range(2 * max_iters):
        serial, parallel = Schedule.phase(k)
        process_serial_layer(state, g, serial, syndrome, schedule, spec)
        if parallel is not None:
            process_uv(state, g, parallel, spec)
        assert within_saturation(state, spec)
        state.step = k + 1
        ok = parity_check(state, g, basis, syndrome) if serial == check_after else None
        trace.append({
            "step": Schedule.label(k),
            "serial": serial,
            "parallel": parallel,
            "parity_ok": ok,
            "hard_weight": int(state.hard.sum()),
            "digest": state.digest(),
        })
        if ok:
            state.converged = True
            iterations = k // 2 + 1
            break
    return DecodeResult(state.hard.copy(), iterations, state.converged, trace, tuple(g.group_sizes))


# syndrome files ---------------------------------------------------------------

_SYN_MAGIC = b"GSYN"
_SYN_HEADER = struct.Struct("<4sIII")


def write_syndromes(path, syndromes: Sequence[Syndrome]) -> None:
    """Packed binary: header ``<4sIII`` (magic, n_x, n_z, count), then one
    record per syndrome of ``s_x`` followed by ``s_z`` packed LSB-first,
    padded to whole bytes."""
    if not syndromes:
        raise InvalidInputError("no syndromes to write")
    n_x, n_z = len(syndromes[0].s_x), len(syndromes[0].s_z)
    blob = [_SYN_HEADER.pack(_SYN_MAGIC, n_x, n_z, len(syndromes))]
    for s in syndromes:
        if len(s.s_x) != n_x or len(s.s_z) != n_z:
            raise InvalidInputError("syndromes differ in length")
        blob.append(np.packbits(np.concatenate([s.s_x, s.s_z]), bitorder="little").tobytes())
    Path(path).write_bytes(b"".join(blob))


def read_syndromes(path) -> list[Syndrome]:
    """Read a JSON syndrome (``{"s_x": [...], "s_z": [...]}``, or a list of
    them) or the packed binary format."""
    raw = Path(path).read_bytes()
    if raw[:4] == _SYN_MAGIC:
        _, n_x, n_z, count = _SYN_HEADER.unpack_from(raw)
        width = (n_x + n_z + 7) // 8
        body = np.frombuffer(raw, dtype=np.uint8, offset=_SYN_HEADER.size)
        if body.size != width * count:
            raise InvalidInputError(f"{path}: truncated syndrome file")
        bits = np.unpackbits(body.reshape(count, width), axis=1, bitorder="little")[:, : n_x + n_z]
        return [Syndrome(b[:n_x], b[n_x:]) for b in bits]
    try:
        doc = json.loads(raw)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"{path}: neither JSON nor packed syndrome file") from exc
    docs = doc if isinstance(doc, list) else [doc]
    try:
        return [Syndrome(d["s_x"], d["s_z"]) for d in docs]
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"{path}: bad syndrome record") from exc
