"""Brute-force references: materialise every site, then search the whole graph."""

from __future__ import annotations

from collections import deque

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

from perclab.models import ModelSpec, edges_from_states, states_from_draws
from perclab.montecarlo.prng import Arc4


def arc4_states(spec: ModelSpec, key: bytes, N: int, drop: int) -> np.ndarray:
    """Labels of the 2N x N rectangle, drawn column by column."""
    stream = Arc4(key, 16, drop)
    draws = np.array([stream.next_draw() for _ in range(2 * N * N)], dtype=np.uint64)
    return states_from_draws(spec, draws.reshape(2 * N, N))


def chacha_states(spec: ModelSpec, key: bytes, W: int, H: int) -> np.ndarray:
    """Labels from the keyed block function, via an independent ChaCha20."""
    draws = np.zeros((W, H), dtype=np.uint64)
    for band in range((H + 15) // 16):
        nonce = (0).to_bytes(4, "little") + band.to_bytes(4, "little") + bytes(8)
        enc = Cipher(algorithms.ChaCha20(key, nonce), mode=None).encryptor()
        words = np.frombuffer(enc.update(bytes(64 * W)), dtype="<u4").reshape(W, 16)
        lo = band * 16
        hi = min(H, lo + 16)
        draws[:, lo:hi] = words[:, : hi - lo]
    return states_from_draws(spec, draws)


def _components(nodes, neighbours):
    comp = {}
    for s in nodes:
        if s in comp:
            continue
        comp[s] = s
        stack = [s]
        while stack:
            u = stack.pop()
            for v in neighbours(u):
                if v not in comp:
                    comp[v] = s
                    stack.append(v)
    return comp


def dual_event(spec: ModelSpec, states: np.ndarray) -> bool:
    w, N = states.shape
    e = edges_from_states(spec, states)
    hor, ver = e.horizontal, e.vertical

    def bonds(lo, hi):
        def nb(f):
            a, b = f
            out = []
            if a + 1 <= hi and not ver[a + 1, b]:
                out.append((a + 1, b))
            if a - 1 >= lo and not ver[a, b]:
                out.append((a - 1, b))
            if b + 1 <= N - 2 and not hor[a, b + 1]:
                out.append((a, b + 1))
            if b - 1 >= 0 and not hor[a, b]:
                out.append((a, b - 1))
            return out

        faces = [(a, b) for a in range(lo, hi + 1) for b in range(N - 1)]
        return _components(faces, nb)

    def unique_largest(comp):
        sizes = {}
        for root in comp.values():
            sizes[root] = sizes.get(root, 0) + 1
        top = max(sizes.values())
        winners = [r for r, s in sizes.items() if s == top]
        return winners[0] if len(winners) == 1 else None

    cu = unique_largest(bonds(0, N - 2))
    cv = unique_largest(bonds(N, 2 * N - 2))
    if cu is None or cv is None:
        return False
    rect = bonds(0, 2 * N - 2)
    return rect[cu] == rect[cv]


def _crosses(open_sites_from, targets, neighbours) -> bool:
    seen = set(open_sites_from)
    q = deque(seen)
    while q:
        u = q.popleft()
        if u in targets:
            return True
        for v in neighbours(u):
            if v not in seen:
                seen.add(v)
                q.append(v)
    return False


def crossing_event(spec: ModelSpec, states: np.ndarray) -> bool:
    """No bottom-top crossing of the rectangle and no left-right one of the left square."""
    w, N = states.shape
    e = edges_from_states(spec, states)
    hor, ver = e.horizontal, e.vertical

    def nb(width):
        def f(s):
            x, y = s
            out = []
            if x + 1 < width and hor[x, y]:
                out.append((x + 1, y))
            if x > 0 and hor[x - 1, y]:
                out.append((x - 1, y))
            if y + 1 < N and ver[x, y]:
                out.append((x, y + 1))
            if y > 0 and ver[x, y - 1]:
                out.append((x, y - 1))
            return out

        return f

    bottom = [(x, 0) for x in range(w)]
    top = {(x, N - 1) for x in range(w)}
    if _crosses(bottom, top, nb(w)):
        return False
    left = [(0, y) for y in range(N)]
    right = {(N - 1, y) for y in range(N)}
    return not _crosses(left, right, nb(N))


def explicit_y_optimum(g, probs, objective) -> float:
    """Relaxation optimum with the y variables kept, built from the definitions.

    Variables are ``x_0..x_{n-1}`` then ``y_0..y_{n-1}`` with ``n = 2^|E|``:
    ``y_S = sum_{T >= S} x_T``, ``y_empty = 1`` and ``y_{S+e} = p_e y_S``
    whenever ``e`` shares no vertex with an edge of ``S``.
    """
    import scipy.sparse as sp
    from scipy.optimize import linprog

    m = g.n_edges
    n = 1 << m
    ends = [set(e) for e in g.edges]
    rows, cols, vals, rhs = [], [], [], []
    r = 0
    for s in range(n):
        rows.append(r), cols.append(n + s), vals.append(1.0)
        for t in range(n):
            if t & s == s:
                rows.append(r), cols.append(t), vals.append(-1.0)
        rhs.append(0.0)
        r += 1
    rows.append(r), cols.append(n), vals.append(1.0)
    rhs.append(1.0)
    r += 1
    for s in range(n):
        touched = set().union(*(ends[i] for i in range(m) if s >> i & 1))
        for e in range(m):
            if s >> e & 1 or ends[e] & touched:
                continue
            rows += [r, r]
            cols += [n + (s | 1 << e), n + s]
            vals += [1.0, -float(probs[e])]
            rhs.append(0.0)
            r += 1
    a = sp.csr_matrix((vals, (rows, cols)), shape=(r, 2 * n))
    c = np.concatenate([np.asarray(objective, dtype=float), np.zeros(n)])
    res = linprog(c, A_eq=a, b_eq=rhs, bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return float(res.fun)
