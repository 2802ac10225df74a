"""Independent reference implementations used as test oracles.

Everything here works on dense numpy arrays or plain Python lists and
shares no code with the package besides the data it is handed.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict

import numpy as np


# GF(2) --------------------------------------------------------------------------


def gf2_matvec(h: np.ndarray, x: np.ndarray) -> np.ndarray:
    return (np.asarray(h, dtype=np.int64) @ np.asarray(x, dtype=np.int64)) % 2


def gf2_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64)) % 2


def match_columns(base: np.ndarray, rep: np.ndarray) -> np.ndarray:
    """Selection matrix S with rep = base @ S, by brute-force column comparison."""
    s = np.zeros((base.shape[1], rep.shape[1]), dtype=np.uint8)
    for j in range(rep.shape[1]):
        hits = [i for i in range(base.shape[1]) if np.array_equal(base[:, i], rep[:, j])]
        assert len(hits) == 1
        s[hits[0], j] = 1
    return s


def merged_prior_by_enumeration(ps) -> float:
    """P(odd number of the independent mechanisms fire)."""
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(ps)):
        if sum(bits) % 2:
            total += math.prod(p if b else 1 - p for p, b in zip(ps, bits))
    return total


def augmented_dense(dx, dz, u, v) -> np.ndarray:
    """Block matrix [[0 0 0 Dx 0], [0 0 0 0 Dz], [I 0 U I 0], [0 I V 0 I]]."""
    mx, nz = dx.shape
    mz, nx = dz.shape
    ny = u.shape[1]
    rows = []
    rows.append(np.hstack([np.zeros((mx, nz + nx + ny)), dx, np.zeros((mx, nx))]))
    rows.append(np.hstack([np.zeros((mz, nz + nx + ny + nz)), dz]))
    rows.append(np.hstack([np.eye(nz), np.zeros((nz, nx)), u, np.eye(nz), np.zeros((nz, nx))]))
    rows.append(np.hstack([np.zeros((nx, nz)), np.eye(nx), v, np.zeros((nx, nz)), np.eye(nx)]))
    return np.vstack(rows).astype(np.uint8)


# min-sum ------------------------------------------------------------------------


def _sgn(x: float) -> int:
    return -1 if x < 0 else 1


def textbook_layered_minsum(h: np.ndarray, prior: list[float], syndrome: list[int], alpha: float,
                            passes: int = 1, order=None):
    """Layered normalized min-sum in plain Python floats.

    Returns (posteriors, messages) where messages[(c, v)] is the last
    check-to-variable message.
    """
    m, n = h.shape
    post = [float(p) for p in prior]
    msg = {(c, v): 0.0 for c in range(m) for v in range(n) if h[c, v]}
    order = list(range(m)) if order is None else list(order)
    for _ in range(passes):
        for c in order:
            vs = [v for v in range(n) if h[c, v]]
            ext = {v: post[v] - msg[(c, v)] for v in vs}
            for v in vs:
                others = [ext[w] for w in vs if w != v]
                sign = (-1) ** syndrome[c]
                for w in others:
                    sign *= _sgn(w)
                new = alpha * sign * min(abs(w) for w in others)
                msg[(c, v)] = new
                post[v] = ext[v] + new
    return post, msg


def flooding_check_update(h: np.ndarray, rows, var_to_check: dict, syndrome: list[int], alpha: float) -> dict:
    """One flooding check-node update restricted to ``rows`` of ``h``.

    ``var_to_check[(c, v)]`` is the incoming variable message on that edge.
    """
    out = {}
    for c in rows:
        vs = [v for v in range(h.shape[1]) if h[c, v]]
        for v in vs:
            others = [var_to_check[(c, w)] for w in vs if w != v]
            sign = (-1) ** syndrome[c]
            for w in others:
                sign *= _sgn(w)
            out[(c, v)] = alpha * sign * min(abs(w) for w in others)
    return out


# maximum likelihood -------------------------------------------------------------


class MLOracle:
    """Exhaustive enumeration of every error vector of a small DEM."""

    def __init__(self, h: np.ndarray, obs: np.ndarray, priors: np.ndarray):
        n = h.shape[1]
        assert n <= 20
        self.E = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.uint8)
        p = np.asarray(priors, dtype=float)
        with np.errstate(divide="ignore"):
            self.logw = (self.E * np.log(p) + (1 - self.E) * np.log1p(-p)).sum(axis=1)
        S = self.E.astype(np.int64) @ h.T.astype(np.int64) % 2
        L = self.E.astype(np.int64) @ obs.T.astype(np.int64) % 2
        self.by_syn = defaultdict(list)
        for i, s in enumerate(S):
            self.by_syn[s.astype(np.uint8).tobytes()].append(i)
        self.L = L.astype(np.uint8)

    def query(self, syndrome: np.ndarray):
        """(most likely error, unique?, most likely logical class, unique?)."""
        idx = self.by_syn[np.asarray(syndrome, dtype=np.uint8).tobytes()]
        w = self.logw[idx]
        order = np.argsort(-w, kind="stable")
        rep_unique = len(idx) == 1 or w[order[0]] > w[order[1]] + 1e-12
        classes = defaultdict(float)
        for i in idx:
            classes[self.L[i].tobytes()] += math.exp(self.logw[i])
        ranked = sorted(classes.items(), key=lambda kv: -kv[1])
        cls_unique = len(ranked) == 1 or ranked[0][1] > ranked[1][1] * (1 + 1e-12)
        best_cls = np.frombuffer(ranked[0][0], dtype=np.uint8)
        return self.E[idx[order[0]]], rep_unique, best_cls, cls_unique


# placement ----------------------------------------------------------------------


def chromatic_number(h: np.ndarray) -> int:
    """Fewest colours such that no row has two equal colours among its columns."""
    n = h.shape[1]
    rows = [np.nonzero(r)[0].tolist() for r in h]
    if n == 0:
        return 0
    for k in range(1, n + 1):
        for col in itertools.product(range(k), repeat=n - 1):
            colour = (0,) + col
            if all(len({colour[v] for v in r}) == len(r) for r in rows):
                return k
    return n


def separation(h: np.ndarray, order) -> int:
    pos = {c: i for i, c in enumerate(order)}
    best = len(order)
    for v in range(h.shape[1]):
        cs = sorted(pos[c] for c in range(h.shape[0]) if h[c, v])
        for a, b in zip(cs, cs[1:]):
            best = min(best, b - a)
    return best


def best_separation(h: np.ndarray) -> int:
    return max(separation(h, p) for p in itertools.permutations(range(h.shape[0])))


def uv_feasible(degrees: list[int], tile_degrees: list[int], capacity: int) -> bool:
    """Can every check go to a tile of sufficient degree within capacity?"""
    n_t = len(tile_degrees)
    for assign in itertools.product(range(n_t), repeat=len(degrees)):
        load = [0] * n_t
        ok = True
        for d, t in zip(degrees, assign):
            if tile_degrees[t] < d:
                ok = False
                break
            load[t] += 1
            if load[t] > capacity:
                ok = False
                break
        if ok:
            return True
    return False


# routing ------------------------------------------------------------------------


def radix_sort_destinations(batch) -> list[list]:
    """Expected output contents: a stable sort of every message by its tag."""
    n_out = max((m.tag for q in batch for m in q), default=-1) + 1
    out = [[] for _ in range(n_out)]
    for q in batch:
        for msg in q:
            out[msg.tag].append(msg)
    return out
