"""GF(2) detector error models and the GARI change of variables.

A detector error model (DEM) splits its mechanisms into three groups:
Z-type errors (columns of ``dx``), X-type errors (columns of ``dz``) and
Y-type errors, whose X- and Z-detector footprints are the columns of
``dxp`` and ``dzp``.  Each ``dxp`` column repeats some ``dx`` column and each
``dzp`` column repeats some ``dz`` column; the selection matrices ``u`` and
``v`` record which.  The augmented model adds two groups of auxiliary
variables, ``ebar_z = e_z ^ u @ e_y`` and ``ebar_x = e_x ^ v @ e_y``, so
that ``dx`` and ``dz`` only ever see the auxiliaries.

Variable order in every GARI-indexed vector is
``(e_z, e_x, e_y, ebar_z, ebar_x)``; mechanism order in every DEM-indexed
vector is ``(e_z, e_x, e_y)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InvalidInputError, ModelInconsistencyError

DEFAULT_LLR_CEILING = 31.0  # 6-bit saturation value


class SparseBitMatrix:
    """Immutable sparse matrix over GF(2) in coordinate form.

    ``entries`` is an ``(nnz, 2)`` array of ``(row, col)`` pairs sorted
    lexicographically without duplicates.
    """

    def __init__(self, n_rows: int, n_cols: int, entries=()):
        n_rows, n_cols = int(n_rows), int(n_cols)
        if n_rows < 0 or n_cols < 0:
            raise InvalidInputError(f"negative shape {(n_rows, n_cols)}")
        arr = np.asarray(entries, dtype=np.int64).reshape(-1, 2)
        if arr.size:
            if arr.min() < 0 or arr[:, 0].max() >= n_rows or arr[:, 1].max() >= n_cols:
                raise InvalidInputError(f"entry out of bounds for shape {(n_rows, n_cols)}")
            order = np.lexsort((arr[:, 1], arr[:, 0]))
            arr = arr[order]
            if np.any(np.all(arr[1:] == arr[:-1], axis=1)):
                raise InvalidInputError("duplicate entries in sparse bit matrix")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.entries = arr

    # construction ---------------------------------------------------------

    @classmethod
    def from_dense(cls, dense) -> "SparseBitMatrix":
        a = np.asarray(dense) & 1
        if a.ndim != 2:
            raise InvalidInputError("dense matrix must be 2-D")
        r, c = np.nonzero(a)
        return cls(a.shape[0], a.shape[1], np.stack([r, c], axis=1))

    @classmethod
    def from_columns(cls, n_rows: int, columns: Sequence[Iterable[int]]) -> "SparseBitMatrix":
        coords = [(r, c) for c, rows in enumerate(columns) for r in rows]
        return cls(n_rows, len(columns), coords)

    @classmethod
    def from_scipy(cls, m) -> "SparseBitMatrix":
        coo = sp.coo_matrix(m)
        keep = (coo.data.astype(np.int64) % 2) == 1
        return cls(coo.shape[0], coo.shape[1], np.stack([coo.row[keep], coo.col[keep]], axis=1))

    @classmethod
    def identity(cls, n: int) -> "SparseBitMatrix":
        idx = np.arange(n)
        return cls(n, n, np.stack([idx, idx], axis=1))

    # views ------------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    @cached_property
    def csr(self) -> sp.csr_matrix:
        data = np.ones(self.nnz, dtype=np.int64)
        return sp.csr_matrix((data, (self.entries[:, 0], self.entries[:, 1])), shape=self.shape)

    @cached_property
    def csc(self) -> sp.csc_matrix:
        return self.csr.tocsc()

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.uint8)
        out[self.entries[:, 0], self.entries[:, 1]] = 1
        return out

    @cached_property
    def row_supports(self) -> list[np.ndarray]:
        """Column indices of each row, ascending."""
        ptr = self.csr.indptr
        idx = self.csr.indices
        return [np.sort(idx[ptr[r]:ptr[r + 1]]) for r in range(self.n_rows)]

    @cached_property
    def col_supports(self) -> list[tuple[int, ...]]:
        """Row indices of each column as sorted tuples (canonical column keys)."""
        ptr = self.csc.indptr
        idx = self.csc.indices
        return [tuple(sorted(int(r) for r in idx[ptr[c]:ptr[c + 1]])) for c in range(self.n_cols)]

    def row_degrees(self) -> np.ndarray:
        return np.bincount(self.entries[:, 0], minlength=self.n_rows)

    def col_degrees(self) -> np.ndarray:
        return np.bincount(self.entries[:, 1], minlength=self.n_cols)

    # arithmetic -------------------------------------------------------------

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        if x.shape[0] != self.n_cols:
            raise InvalidInputError(f"vector length {x.shape[0]} != {self.n_cols} columns")
        return (self.csr @ x % 2).astype(np.uint8)

    def matmul(self, other: "SparseBitMatrix") -> "SparseBitMatrix":
        if self.n_cols != other.n_rows:
            raise InvalidInputError(f"shape mismatch {self.shape} @ {other.shape}")
        return SparseBitMatrix.from_scipy(self.csr @ other.csr)

    def transpose(self) -> "SparseBitMatrix":
        return SparseBitMatrix(self.n_cols, self.n_rows, self.entries[:, ::-1])

    def select_columns(self, cols: Sequence[int]) -> "SparseBitMatrix":
        return SparseBitMatrix.from_scipy(self.csc[:, np.asarray(cols, dtype=np.int64)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseBitMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.shape, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"SparseBitMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz})"

    # serialization ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {"rows": self.n_rows, "cols": self.n_cols, "entries": self.entries.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SparseBitMatrix":
        try:
            return cls(d["rows"], d["cols"], d.get("entries", []))
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"bad matrix record: {exc}") from exc

    def write_mtx(self, path) -> None:
        """Write a Matrix Market coordinate file (field ``integer``, values 1)."""
        lines = [
            "%%MatrixMarket matrix coordinate integer general",
            f"{self.n_rows} {self.n_cols} {self.nnz}",
        ]
        lines += [f"{r + 1} {c + 1} 1" for r, c in self.entries.tolist()]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def read_mtx(cls, path) -> "SparseBitMatrix":
        """Read a Matrix Market coordinate file; ``pattern`` and ``integer`` fields accepted."""
        with open(path) as fh:
            header = fh.readline().split()
            if len(header) < 4 or header[0] != "%%MatrixMarket" or header[2] != "coordinate":
                raise InvalidInputError(f"{path}: not a Matrix Market coordinate file")
            fld = header[3]
            if fld not in ("pattern", "integer"):
                raise InvalidInputError(f"{path}: unsupported field {fld!r}")
            line = fh.readline()
            while line.startswith("%"):
                line = fh.readline()
            n_rows, n_cols, nnz = (int(t) for t in line.split())
            coords = []
            for _ in range(nnz):
                tok = fh.readline().split()
                value = 1 if fld == "pattern" else int(tok[2])
                if value % 2:
                    coords.append((int(tok[0]) - 1, int(tok[1]) - 1))
        return cls(n_rows, n_cols, coords)


def _check_priors(priors, n: int, name: str) -> np.ndarray:
    p = np.asarray(priors, dtype=np.float64).reshape(-1)
    if p.shape[0] != n:
        raise InvalidInputError(f"{name}: {p.shape[0]} priors for {n} columns")
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise InvalidInputError(f"{name}: priors must lie in [0, 1]")
    p.setflags(write=False)
    return p


def merge_duplicate_columns(m: SparseBitMatrix, priors) -> tuple[SparseBitMatrix, np.ndarray]:
    """Merge identical columns, combining priors as the XOR of independent Bernoullis.

    Columns keep first-occurrence order.  For a duplicate group the merged
    probability folds left with ``p1*(1-p2) + p2*(1-p1)``.
    """
    p = _check_priors(priors, m.n_cols, "merge_duplicate_columns")
    first: dict[tuple[int, ...], int] = {}
    keep: list[int] = []
    merged: list[float] = []
    for c, key in enumerate(m.col_supports):
        slot = first.get(key)
        if slot is None:
            first[key] = len(keep)
            keep.append(c)
            merged.append(float(p[c]))
        else:
            q = merged[slot]
            merged[slot] = q * (1.0 - p[c]) + p[c] * (1.0 - q)
    return m.select_columns(keep), np.asarray(merged, dtype=np.float64)


def prior_to_llr(p, ceiling: float = DEFAULT_LLR_CEILING) -> np.ndarray:
    """``ln((1-p)/p)``; probabilities 0 and 1 map to ``+ceiling`` and ``-ceiling``."""
    p = np.asarray(p, dtype=np.float64)
    out = np.empty_like(p)
    zero, one = p <= 0.0, p >= 1.0
    mid = ~(zero | one)
    out[mid] = np.log((1.0 - p[mid]) / p[mid])
    out[zero] = ceiling
    out[one] = -ceiling
    return out


@dataclass(frozen=True, eq=False)
class DetectorErrorModel:
    """Correlated detector error model with separate X/Z/Y mechanism groups.

    ``observables`` has one column per mechanism in ``(e_z, e_x, e_y)``
    order.  It is only used to score logical errors.
    """

    dx: SparseBitMatrix
    dz: SparseBitMatrix
    dxp: SparseBitMatrix
    dzp: SparseBitMatrix
    priors_z: np.ndarray
    priors_x: np.ndarray
    priors_y: np.ndarray
    observables: SparseBitMatrix | None = None

    def __post_init__(self):
        if self.dxp.n_rows != self.dx.n_rows:
            raise InvalidInputError("dxp must have as many rows as dx")
        if self.dzp.n_rows != self.dz.n_rows:
            raise InvalidInputError("dzp must have as many rows as dz")
        if self.dxp.n_cols != self.dzp.n_cols:
            raise InvalidInputError("dxp and dzp must have equal column counts")
        object.__setattr__(self, "priors_z", _check_priors(self.priors_z, self.dx.n_cols, "priors_z"))
        object.__setattr__(self, "priors_x", _check_priors(self.priors_x, self.dz.n_cols, "priors_x"))
        object.__setattr__(self, "priors_y", _check_priors(self.priors_y, self.dxp.n_cols, "priors_y"))
        obs = self.observables
        if obs is None:
            obs = SparseBitMatrix(0, self.n_mechanisms)
            object.__setattr__(self, "observables", obs)
        if obs.n_cols != self.n_mechanisms:
            raise InvalidInputError(
                f"observables has {obs.n_cols} columns, model has {self.n_mechanisms} mechanisms"
            )

    @property
    def n_z(self) -> int:
        return self.dx.n_cols

    @property
    def n_x(self) -> int:
        return self.dz.n_cols

    @property
    def n_y(self) -> int:
        return self.dxp.n_cols

    @property
    def n_mechanisms(self) -> int:
        return self.n_z + self.n_x + self.n_y

    @property
    def priors(self) -> np.ndarray:
        return np.concatenate([self.priors_z, self.priors_x, self.priors_y])

    @cached_property
    def check_matrix(self) -> SparseBitMatrix:
        """The un-augmented ``[[dx, 0, dxp], [0, dz, dzp]]`` matrix."""
        nz, nx = self.n_z, self.n_x
        mx = self.dx.n_rows
        blocks = [
            self.dx.entries,
            self.dxp.entries + [0, nz + nx],
            self.dz.entries + [mx, nz],
            self.dzp.entries + [mx, nz + nx],
        ]
        return SparseBitMatrix(mx + self.dz.n_rows, self.n_mechanisms, np.concatenate(blocks))

    def syndrome(self, error) -> "Syndrome":
        s = self.check_matrix.matvec(error)
        mx = self.dx.n_rows
        return Syndrome(s[:mx], s[mx:])

    def logical_flips(self, error) -> np.ndarray:
        return self.observables.matvec(error)

    def to_dict(self) -> dict:
        return {
            "dx": self.dx.to_dict(),
            "dz": self.dz.to_dict(),
            "dxp": self.dxp.to_dict(),
            "dzp": self.dzp.to_dict(),
            "observables": self.observables.to_dict(),
            "priors_z": self.priors_z.tolist(),
            "priors_x": self.priors_x.tolist(),
            "priors_y": self.priors_y.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorErrorModel":
        try:
            obs = d.get("observables")
            return cls(
                dx=SparseBitMatrix.from_dict(d["dx"]),
                dz=SparseBitMatrix.from_dict(d["dz"]),
                dxp=SparseBitMatrix.from_dict(d["dxp"]),
                dzp=SparseBitMatrix.from_dict(d["dzp"]),
                priors_z=d["priors_z"],
                priors_x=d["priors_x"],
                priors_y=d["priors_y"],
                observables=SparseBitMatrix.from_dict(obs) if obs is not None else None,
            )
        except KeyError as exc:
            raise InvalidInputError(f"DEM record missing field {exc}") from exc


def load_dem(path) -> DetectorErrorModel:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read DEM {path}: {exc}") from exc
    return DetectorErrorModel.from_dict(doc)


def save_dem(dem: DetectorErrorModel, path) -> None:
    Path(path).write_text(json.dumps(dem.to_dict()))


@dataclass(frozen=True, eq=False)
class Syndrome:
    s_x: np.ndarray
    s_z: np.ndarray

    def __post_init__(self):
        for name in ("s_x", "s_z"):
            a = np.asarray(getattr(self, name)).astype(np.uint8).reshape(-1)
            if np.any(a > 1):
                raise InvalidInputError(f"{name} must contain bits")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def check_against(self, g: "GariModel") -> None:
        if len(self.s_x) != g.dx.n_rows or len(self.s_z) != g.dz.n_rows:
            raise InvalidInputError(
                f"syndrome lengths ({len(self.s_x)}, {len(self.s_z)}) do not match "
                f"model rows ({g.dx.n_rows}, {g.dz.n_rows})"
            )

    @classmethod
    def zeros(cls, g: "GariModel") -> "Syndrome":
        return cls(np.zeros(g.dx.n_rows, np.uint8), np.zeros(g.dz.n_rows, np.uint8))

    def to_dict(self) -> dict:
        return {"s_x": self.s_x.tolist(), "s_z": self.s_z.tolist()}


class GroupSizes(NamedTuple):
    e_z: int
    e_x: int
    e_y: int
    ebar_z: int
    ebar_x: int

    @property
    def total(self) -> int:
        return sum(self)

    def offsets(self) -> dict[str, slice]:
        out, start = {}, 0
        for name, size in zip(self._fields, self):
            out[name] = slice(start, start + size)
            start += size
        return out


@dataclass(frozen=True, eq=False)
class GariModel:
    """The five-group augmented model produced by :func:`derive_uv`."""

    dx: SparseBitMatrix
    dz: SparseBitMatrix
    u: SparseBitMatrix
    v: SparseBitMatrix
    llr0: np.ndarray
    group_sizes: GroupSizes = field(init=False)

    def __post_init__(self):
        nz, nx, ny = self.dx.n_cols, self.dz.n_cols, self.u.n_cols
        if self.u.shape != (nz, ny) or self.v.shape != (nx, ny):
            raise InvalidInputError(
                f"u {self.u.shape} / v {self.v.shape} inconsistent with dx/dz columns ({nz}, {nx})"
            )
        for name, m in (("u", self.u), ("v", self.v)):
            if ny and not np.all(m.col_degrees() == 1):
                raise ModelInconsistencyError(f"every column of {name} must be a unit vector")
        sizes = GroupSizes(nz, nx, ny, nz, nx)
        llr = np.asarray(self.llr0, dtype=np.float64).reshape(-1)
        if llr.shape[0] != sizes.total:
            raise InvalidInputError(f"llr0 has {llr.shape[0]} entries, expected {sizes.total}")
        llr.setflags(write=False)
        object.__setattr__(self, "llr0", llr)
        object.__setattr__(self, "group_sizes", sizes)

    @property
    def n_vars(self) -> int:
        return self.group_sizes.total

    @cached_property
    def slices(self) -> dict[str, slice]:
        return self.group_sizes.offsets()

    @cached_property
    def u_row_of(self) -> np.ndarray:
        """Row of the single nonzero in each column of ``u`` (e_y -> e_z/ebar_z index)."""
        return _unit_rows(self.u)

    @cached_property
    def v_row_of(self) -> np.ndarray:
        return _unit_rows(self.v)

    def ebar(self, e_z, e_x, e_y) -> tuple[np.ndarray, np.ndarray]:
        """Apply the change of variables to a physical error."""
        e_z, e_x, e_y = (np.asarray(a, dtype=np.uint8) for a in (e_z, e_x, e_y))
        return e_z ^ self.u.matvec(e_y), e_x ^ self.v.matvec(e_y)

    def lift(self, error) -> np.ndarray:
        """Map a DEM-ordered physical error to the full GARI variable vector."""
        error = np.asarray(error, dtype=np.uint8)
        nz, nx, ny = self.group_sizes[:3]
        if error.shape[0] != nz + nx + ny:
            raise InvalidInputError(f"error length {error.shape[0]} != {nz + nx + ny}")
        e_z, e_x, e_y = error[:nz], error[nz:nz + nx], error[nz + nx:]
        bz, bx = self.ebar(e_z, e_x, e_y)
        return np.concatenate([error, bz, bx])

    def to_dict(self) -> dict:
        return {
            "dx": self.dx.to_dict(),
            "dz": self.dz.to_dict(),
            "u": self.u.to_dict(),
            "v": self.v.to_dict(),
            "group_sizes": list(self.group_sizes),
            "llr0": self.llr0.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GariModel":
        try:
            g = cls(
                dx=SparseBitMatrix.from_dict(d["dx"]),
                dz=SparseBitMatrix.from_dict(d["dz"]),
                u=SparseBitMatrix.from_dict(d["u"]),
                v=SparseBitMatrix.from_dict(d["v"]),
                llr0=d["llr0"],
            )
        except KeyError as exc:
            raise InvalidInputError(f"GARI record missing field {exc}") from exc
        if "group_sizes" in d and tuple(d["group_sizes"]) != tuple(g.group_sizes):
            raise InvalidInputError("group_sizes field disagrees with matrix shapes")
        return g


def _unit_rows(m: SparseBitMatrix) -> np.ndarray:
    rows = np.full(m.n_cols, -1, dtype=np.int64)
    rows[m.entries[:, 1]] = m.entries[:, 0]
    rows.setflags(write=False)
    return rows


def _match_columns(base: SparseBitMatrix, rep: SparseBitMatrix, name: str) -> SparseBitMatrix:
    index: dict[tuple[int, ...], int] = {}
    for c, key in enumerate(base.col_supports):
        if key in index:
            raise ModelInconsistencyError(
                f"{name}: base matrix has repeated columns {index[key]} and {c}; merge them first"
            )
        index[key] = c
    coords = np.empty((rep.n_cols, 2), dtype=np.int64)
    for j, key in enumerate(rep.col_supports):
        hit = index.get(key)
        if hit is None:
            raise ModelInconsistencyError(f"{name}: column {j} matches no base column")
        coords[j] = (hit, j)
    return SparseBitMatrix(base.n_cols, rep.n_cols, coords)


def derive_uv(dem: DetectorErrorModel, llr_ceiling: float = DEFAULT_LLR_CEILING) -> GariModel:
    """Build the GARI model: selection matrices ``u``, ``v`` and initial LLRs.

    The auxiliary groups start from the LLRs of their namesake groups
    (``ebar_z`` from ``e_z``, ``ebar_x`` from ``e_x``).
    """
    u = _match_columns(dem.dx, dem.dxp, "dxp")
    v = _match_columns(dem.dz, dem.dzp, "dzp")
    lz = prior_to_llr(dem.priors_z, llr_ceiling)
    lx = prior_to_llr(dem.priors_x, llr_ceiling)
    ly = prior_to_llr(dem.priors_y, llr_ceiling)
    return GariModel(dx=dem.dx, dz=dem.dz, u=u, v=v, llr0=np.concatenate([lz, lx, ly, lz, lx]))


def assemble_augmented(g: GariModel) -> SparseBitMatrix:
    """Block matrix ``[[0,0,0,Dx,0],[0,0,0,0,Dz],[I,0,U,I,0],[0,I,V,0,I]]``."""
    sl = g.slices
    nz, nx = g.group_sizes.e_z, g.group_sizes.e_x
    mx, mz = g.dx.n_rows, g.dz.n_rows
    eye_z = np.arange(nz)
    eye_x = np.arange(nx)
    blocks = [
        g.dx.entries + [0, sl["ebar_z"].start],
        g.dz.entries + [mx, sl["ebar_x"].start],
        np.stack([mx + mz + eye_z, sl["e_z"].start + eye_z], axis=1),
        g.u.entries + [mx + mz, sl["e_y"].start],
        np.stack([mx + mz + eye_z, sl["ebar_z"].start + eye_z], axis=1),
        np.stack([mx + mz + nz + eye_x, sl["e_x"].start + eye_x], axis=1),
        g.v.entries + [mx + mz + nz, sl["e_y"].start],
        np.stack([mx + mz + nz + eye_x, sl["ebar_x"].start + eye_x], axis=1),
    ]
    return SparseBitMatrix(mx + mz + nz + nx, g.n_vars, np.concatenate(blocks))


def augmented_syndrome(g: GariModel, syndrome: Syndrome) -> np.ndarray:
    nz, nx = g.group_sizes.e_z, g.group_sizes.e_x
    return np.concatenate([syndrome.s_x, syndrome.s_z, np.zeros(nz + nx, np.uint8)])


class RecoveredError(NamedTuple):
    error: np.ndarray
    consistent: bool


def recover_physical_error(g: GariModel, hard) -> RecoveredError:
    """Slice ``(e_z, e_x, e_y)`` out of a GARI hard decision.

    ``consistent`` is False when the auxiliary bits disagree with the
    change of variables applied to the physical bits.
    """
    hard = np.asarray(hard, dtype=np.uint8).reshape(-1)
    if hard.shape[0] != g.n_vars:
        raise InvalidInputError(f"hard decision length {hard.shape[0]} != {g.n_vars}")
    sl = g.slices
    bz, bx = g.ebar(hard[sl["e_z"]], hard[sl["e_x"]], hard[sl["e_y"]])
    consistent = bool(np.array_equal(bz, hard[sl["ebar_z"]]) and np.array_equal(bx, hard[sl["ebar_x"]]))
    return RecoveredError(hard[: sl["e_y"].stop].copy(), consistent)


def resolve_physical_error(g: GariModel, hard) -> np.ndarray:
    """Physical error implied by the auxiliary and e_y bits of a hard decision.

    Returns ``(ebar_z ^ U e_y, ebar_x ^ V e_y, e_y)``.  Its syndrome equals
    ``(dx ebar_z, dz ebar_x)``, so it satisfies every parity the decoder
    checked even when the e_z/e_x registers lag behind.
    """
    hard = np.asarray(hard, dtype=np.uint8).reshape(-1)
    if hard.shape[0] != g.n_vars:
        raise InvalidInputError(f"hard decision length {hard.shape[0]} != {g.n_vars}")
    sl = g.slices
    ey = hard[sl["e_y"]]
    return np.concatenate([hard[sl["ebar_z"]] ^ g.u.matvec(ey), hard[sl["ebar_x"]] ^ g.v.matvec(ey), ey])


__all__ = [
    "DEFAULT_LLR_CEILING",
    "DetectorErrorModel",
    "GariModel",
    "GroupSizes",
    "RecoveredError",
    "SparseBitMatrix",
    "Syndrome",
    "assemble_augmented",
    "augmented_syndrome",
    "derive_uv",
    "load_dem",
    "merge_duplicate_columns",
    "prior_to_llr",
    "recover_physical_error",
    "resolve_physical_error",
    "save_dem",
]

