"""Synthetic detector error models for tests, benchmarks and timing runs."""

from __future__ import annotations

import numpy as np

from .gf2model import DetectorErrorModel, SparseBitMatrix

GROSS_SHAPE = {"dx": (792, 7920), "dz": (936, 8784), "n_y": 51048}
GROSS_UV_TILE_DEGREES = (23, 17, 13, 11, 11, 11, 7, 7, 7, 7, 7, 7, 7, 7, 5, 5, 3, 3)


def hamming_matrix(r: int = 3) -> np.ndarray:
    """Parity-check matrix of the ``[2^r-1, 2^r-1-r]`` Hamming code."""
    n = (1 << r) - 1
    return np.array([[(q + 1) >> i & 1 for q in range(n)] for i in range(r)], dtype=np.uint8)


def steane_dem(
    p: float = 0.05,
    y_qubits=(0, 1),
    p_y: float | None = None,
    observables: str = "both",
) -> DetectorErrorModel:
    """Code-capacity DEM of the [[7,1,3]] Steane code with Y errors on a few qubits.

    Mechanisms: 7 Z errors, 7 X errors and one Y error per entry of
    ``y_qubits``.  ``observables`` picks the logical rows: ``"both"`` gives
    (X-logical parity of the Z part, Z-logical parity of the X part),
    ``"z_memory"`` keeps only the second row.
    """
    h = hamming_matrix(3)
    n = h.shape[1]
    y_qubits = list(y_qubits)
    dx = SparseBitMatrix.from_dense(h)
    dz = SparseBitMatrix.from_dense(h)
    dxp = SparseBitMatrix.from_dense(h[:, y_qubits].reshape(3, -1))
    dzp = SparseBitMatrix.from_dense(h[:, y_qubits].reshape(3, -1))
    ny = len(y_qubits)
    z_part = np.concatenate([np.ones(n), np.zeros(n), np.ones(ny)])
    x_part = np.concatenate([np.zeros(n), np.ones(n), np.ones(ny)])
    rows = {"both": [z_part, x_part], "z_memory": [x_part]}[observables]
    p_y = p if p_y is None else p_y
    return DetectorErrorModel(
        dx=dx,
        dz=dz,
        dxp=dxp,
        dzp=dzp,
        priors_z=np.full(n, p),
        priors_x=np.full(n, p),
        priors_y=np.full(ny, p_y),
        observables=SparseBitMatrix.from_dense(np.array(rows, dtype=np.uint8)),
    )


def _distinct_columns(rng, n_rows: int, n_cols: int, max_weight: int) -> np.ndarray:
    if n_cols > (1 << n_rows) - 1:
        raise ValueError("not enough distinct nonzero columns")
    seen: set[bytes] = set()
    cols = []
    while len(cols) < n_cols:
        w = int(rng.integers(1, min(max_weight, n_rows) + 1))
        col = np.zeros(n_rows, np.uint8)
        col[rng.choice(n_rows, size=w, replace=False)] = 1
        key = col.tobytes()
        if key not in seen:
            seen.add(key)
            cols.append(col)
    return np.stack(cols, axis=1)


def random_toy_dem(
    rng: np.random.Generator,
    max_mechanisms: int = 30,
    n_checks: tuple[int, int] = (3, 5),
    p_range: tuple[float, float] = (0.01, 0.2),
) -> DetectorErrorModel:
    """Random small DEM: distinct dx/dz columns, Y columns resampled from them.

    ``dx``/``dz`` rows always have degree 0 or at least 2.
    """
    while True:
        mx = int(rng.integers(n_checks[0], n_checks[1] + 1))
        mz = int(rng.integers(n_checks[0], n_checks[1] + 1))
        nz = int(rng.integers(2, min(10, (1 << mx) - 1) + 1))
        nx = int(rng.integers(2, min(10, (1 << mz) - 1) + 1))
        ny = int(rng.integers(0, max(1, max_mechanisms - nz - nx) + 1))
        if nz + nx + ny > max_mechanisms:
            continue
        hx = _distinct_columns(rng, mx, nz, 3)
        hz = _distinct_columns(rng, mz, nx, 3)
        if np.any(hx.sum(axis=1) == 1) or np.any(hz.sum(axis=1) == 1):
            continue
        break
    pick_x = rng.integers(0, nz, size=ny)
    pick_z = rng.integers(0, nx, size=ny)
    n_mech = nz + nx + ny
    obs = rng.integers(0, 2, size=(2, n_mech), dtype=np.uint8)
    return DetectorErrorModel(
        dx=SparseBitMatrix.from_dense(hx),
        dz=SparseBitMatrix.from_dense(hz),
        dxp=SparseBitMatrix.from_dense(hx[:, pick_x].reshape(mx, ny)),
        dzp=SparseBitMatrix.from_dense(hz[:, pick_z].reshape(mz, ny)),
        priors_z=rng.uniform(*p_range, size=nz),
        priors_x=rng.uniform(*p_range, size=nx),
        priors_y=rng.uniform(*p_range, size=ny),
        observables=SparseBitMatrix.from_dense(obs),
    )


def _balanced_columns(rng, n_rows: int, n_cols: int, weight: int) -> SparseBitMatrix:
    """Distinct weight-``weight`` columns with near-equal row degrees."""
    chunks_per_perm = n_rows // weight
    seen: set[tuple[int, ...]] = set()
    cols: list[tuple[int, ...]] = []
    while len(cols) < n_cols:
        perm = rng.permutation(n_rows)
        for k in range(chunks_per_perm):
            key = tuple(sorted(perm[k * weight:(k + 1) * weight].tolist()))
            if key in seen:
                continue
            seen.add(key)
            cols.append(key)
            if len(cols) == n_cols:
                break
    return SparseBitMatrix.from_columns(n_rows, cols)


def _fit_counts(rng, caps: list[int], total: int) -> np.ndarray:
    """Per-row Y counts bounded by the hosting tile's e_y ports, summing to ``total``."""
    counts = np.array(caps, dtype=np.int64)
    excess = int(counts.sum()) - total
    if excess < 0:
        raise ValueError("tile capacities cannot host the requested Y columns")
    while excess > 0:
        live = np.nonzero(counts > 1)[0]
        take = rng.choice(live, size=min(excess, live.size), replace=False)
        counts[take] -= 1
        excess -= take.size
    return counts


def gross_like_dem(
    seed: int = 0,
    p: float = 0.001,
    tile_degrees=GROSS_UV_TILE_DEGREES,
    tile_capacity: int = 500,
) -> DetectorErrorModel:
    """Random DEM with the gross-code GARI dimensions.

    ``dx`` is 792x7920, ``dz`` 936x8784 and there are 51048 Y columns.  The
    column-repetition profile is sized so that every U and V row fits the
    given U,V tile degree list at ``tile_capacity`` rows per tile.  The
    observable matrix is empty.
    """
    rng = np.random.default_rng(seed)
    (mx, nz), (mz, nx), ny = GROSS_SHAPE["dx"], GROSS_SHAPE["dz"], GROSS_SHAPE["n_y"]
    dx = _balanced_columns(rng, mx, nz, 4)
    dz = _balanced_columns(rng, mz, nx, 4)
    picks = []
    for n_rows in (nz, nx):
        caps: list[int] = []
        for deg in tile_degrees:
            caps += [deg - 2] * tile_capacity
        caps = caps[:n_rows]
        counts = _fit_counts(rng, caps, ny)
        rows = rng.permutation(n_rows)
        pick = np.repeat(rows, counts[: n_rows])
        picks.append(rng.permutation(pick))
    dxp = dx.select_columns(picks[0])
    dzp = dz.select_columns(picks[1])
    return DetectorErrorModel(
        dx=dx,
        dz=dz,
        dxp=dxp,
        dzp=dzp,
        priors_z=np.full(nz, p),
        priors_x=np.full(nx, p),
        priors_y=np.full(ny, p),
    )


# rotated distance-3 surface code on a 3x3 grid, qubit q = 3*row + col
SURFACE3_X_CHECKS = ((0, 1, 3, 4), (4, 5, 7, 8), (1, 2), (6, 7))
SURFACE3_Z_CHECKS = ((1, 2, 4, 5), (3, 4, 6, 7), (0, 3), (5, 8))
SURFACE3_Z_LOGICAL = (0, 1, 2)
SURFACE3_X_LOGICAL = (0, 3, 6)


def _support_matrix(checks, n: int) -> np.ndarray:
    h = np.zeros((len(checks), n), np.uint8)
    for r, qs in enumerate(checks):
        h[r, list(qs)] = 1
    return h


def surface3_dem(
    p: float = 0.05,
    y_qubits=(4, 1),
    p_y: float | None = None,
    observables: str = "both",
) -> DetectorErrorModel:
    """Code-capacity DEM of the rotated d=3 surface code with Y errors on ``y_qubits``.

    Single-qubit Z (X) errors that share an X (Z) syndrome are merged, which
    leaves 7 Z-type and 7 X-type mechanisms; both Tanner graphs are trees.
    ``observables="both"`` yields rows (X-logical flips, Z-logical flips);
    ``"z_memory"`` keeps only the Z-logical row, flipped by X components.
    """
    from .gf2model import merge_duplicate_columns

    n = 9
    hx = _support_matrix(SURFACE3_X_CHECKS, n)
    hz = _support_matrix(SURFACE3_Z_CHECKS, n)
    groups = []
    for h in (hx, hz):
        keys: dict[bytes, int] = {}
        rep = []
        for q in range(n):
            k = h[:, q].tobytes()
            if k not in keys:
                keys[k] = len(keys)
                rep.append([])
            rep[keys[k]].append(q)
        groups.append(rep)
    dx, pz = merge_duplicate_columns(SparseBitMatrix.from_dense(hx), np.full(n, p))
    dz, px = merge_duplicate_columns(SparseBitMatrix.from_dense(hz), np.full(n, p))
    y_qubits = list(y_qubits)
    ny = len(y_qubits)
    dxp = SparseBitMatrix.from_dense(hx[:, y_qubits].reshape(hx.shape[0], ny))
    dzp = SparseBitMatrix.from_dense(hz[:, y_qubits].reshape(hz.shape[0], ny))

    def flips(qs, members):
        return [int(members[0] in qs) for members in members]

    x_logical_row = flips(SURFACE3_X_LOGICAL, groups[0]) + [0] * dz.n_cols + [int(q in SURFACE3_X_LOGICAL) for q in y_qubits]
    z_logical_row = [0] * dx.n_cols + flips(SURFACE3_Z_LOGICAL, groups[1]) + [int(q in SURFACE3_Z_LOGICAL) for q in y_qubits]
    rows = {"both": [x_logical_row, z_logical_row], "z_memory": [z_logical_row]}[observables]
    return DetectorErrorModel(
        dx=dx,
        dz=dz,
        dxp=dxp,
        dzp=dzp,
        priors_z=pz,
        priors_x=px,
        priors_y=np.full(ny, p if p_y is None else p_y),
        observables=SparseBitMatrix.from_dense(np.array(rows, dtype=np.uint8)),
    )
