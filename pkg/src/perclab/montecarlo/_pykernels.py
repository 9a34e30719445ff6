"""Pure-Python trial kernels; the compiled module mirrors these exactly.

Conventions shared by both backends
-----------------------------------
Sites of the ``2N x N`` rectangle are ``(x, y)`` with ``0 <= x < 2N`` and
``0 <= y < N``.  Label codes and edge rules follow :mod:`perclab.models`;
``kind`` is 0 (signs), 1 (direction) or 2 (udlra).

Dual faces are ``(a, b)``: the unit square with lower-left corner ``(a, b)``.
A dual bond is open iff the primal edge it crosses is closed.
"""

from __future__ import annotations

from .prng import Arc4, KeyedSiteOracle

SIGNS, DIRECTION, UDLRA = 0, 1, 2
INCOMPLETE = -1


def site_code(thresholds, draw: int) -> int:
    c = 0
    for t in thresholds:
        if draw >= t:
            c += 1
    return c


def edge_open(kind: int, a: int, b: int, horizontal: bool, a_even: bool) -> bool:
    """``a`` is the left (horizontal) or lower (vertical) endpoint's label."""
    if kind == SIGNS:
        return a == b
    if kind == DIRECTION:
        if horizontal:
            return a == b or a == 1 or b == 3
        return a == b or a == 0 or b == 2
    if horizontal:
        return (a == 0 or a == 4) if a_even else (b == 0 or b == 3)
    return (a == 0 or a == 1) if a_even else (b == 0 or b == 2)


# ---------------------------------------------------------------------------
# Dual-component experiment: column sweep with compacted union-find.


class _Forest:
    """Union-find over the faces of one column plus the live components
    carried over from earlier columns, with mergeable attributes."""

    __slots__ = ("parent", "size", "mark", "pin")

    def __init__(self, size, mark, pin):
        self.parent = list(range(len(size)))
        self.size, self.mark, self.pin = size, mark, pin

    def find(self, v: int) -> int:
        p = self.parent
        while p[v] != v:
            p[v] = p[p[v]]
            v = p[v]
        return v

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.mark[ra] |= self.mark[rb]
        if self.pin[rb] > self.pin[ra]:
            self.pin[ra] = self.pin[rb]


def _column_bonds(kind, left, right, x):
    """Open dual bonds touching face column ``x``.

    Returns ``(up, across)``: ``up[b]`` joins faces (x, b) and (x, b+1);
    ``across[b]`` joins (x-1, b) and (x, b).
    """
    n = len(left)
    up = [
        not edge_open(kind, left[y], right[y], True, (x + y) % 2 == 0)
        for y in range(1, n - 1)
    ]
    across = [
        not edge_open(kind, left[y], left[y + 1], False, (x + y) % 2 == 0)
        for y in range(n - 1)
    ]
    return up, across


def dual_sweep(N: int, kind: int, column, columns: int | None = None) -> int:
    """Evaluate the dual-component event; ``column(x)`` yields site labels.

    Returns 1 (event holds), 0 (fails) or ``INCOMPLETE`` when stopped
    after ``columns`` face columns.
    """
    H = N - 1
    last = 2 * N - 2
    # Rectangle forest; up to column N-2 it is exactly block u's forest.
    r_size: list[int] = []
    r_mark: list[int] = []
    r_pin: list[int] = []
    r_prev: list[int] = []
    # Block v forest, with one rectangle id per live component.
    v_size: list[int] = []
    v_rep: list[int] = []
    v_prev: list[int] = []
    best_u = cnt_u = 0
    best_v = cnt_v = 0
    champ_gen = 0
    champ_marked = None  # mark of the pinned rectangle component once frozen

    right = column(0)
    for x in range(last + 1):
        if columns is not None and x >= columns:
            return INCOMPLETE
        left, right = right, column(x + 1)
        up, across = _column_bonds(kind, left, right, x)
        k = len(r_size)
        rf = _Forest(r_size + [1] * H, r_mark + [0] * H, r_pin + [0] * H)
        for b in range(H - 1):
            if up[b]:
                rf.union(k + b, k + b + 1)
        if x > 0:
            for b in range(H):
                if across[b]:
                    rf.union(r_prev[b], k + b)
        cur = [rf.find(k + b) for b in range(H)]
        live = set(cur)
        r_frozen = {rf.find(i) for i in range(k)} - live

        if x <= N - 2:
            for r in r_frozen:
                s = rf.size[r]
                if s > best_u:
                    best_u, cnt_u = s, 1
                elif s == best_u:
                    cnt_u += 1
            if x == N - 2:
                top = max(rf.size[r] for r in live)
                if top < best_u:
                    return 0
                n_top = sum(1 for r in live if rf.size[r] == top) + (cnt_u if top == best_u else 0)
                if n_top != 1:
                    return 0
                rf.mark[next(r for r in live if rf.size[r] == top)] = 1

        if x >= N:
            k2 = len(v_size)
            vf = _Forest(v_size + [1] * H, [0] * (k2 + H), [0] * (k2 + H))
            for b in range(H - 1):
                if up[b]:
                    vf.union(k2 + b, k2 + b + 1)
            if x > N:
                for b in range(H):
                    if across[b]:
                        vf.union(v_prev[b], k2 + b)
            vcur = [vf.find(k2 + b) for b in range(H)]
            vlive = set(vcur)
            frozen_v = {}
            for i in range(k2):
                root = vf.find(i)
                if root not in vlive:
                    frozen_v.setdefault(root, i)
            for root, i in frozen_v.items():
                s = vf.size[root]
                if s > best_v:
                    best_v, cnt_v = s, 1
                    champ_gen += 1
                    champ_marked = None
                    rf.pin[rf.find(v_rep[i])] = champ_gen
                elif s == best_v:
                    cnt_v += 1

        for r in r_frozen:
            if champ_gen and rf.pin[r] == champ_gen:
                champ_marked = rf.mark[r]
            if rf.mark[r] and not (cnt_v == 1 and champ_marked):
                # C_u's component is closed off and holds no unique champion.
                return 0

        # Compact the rectangle forest to the components seen in column x.
        order = {}
        for r in cur:
            if r not in order:
                order[r] = len(order)
        r_size = [rf.size[r] for r in order]
        r_mark = [rf.mark[r] for r in order]
        r_pin = [rf.pin[r] for r in order]
        r_prev = [order[r] for r in cur]

        if x >= N:
            vorder = {}
            rep = {}
            for b, r in enumerate(vcur):
                if r not in vorder:
                    vorder[r] = len(vorder)
                    rep[r] = order[cur[b]]
            v_size = [vf.size[r] for r in vorder]
            v_rep = [rep[r] for r in vorder]
            v_prev = [vorder[r] for r in vcur]

    # Column 2N-2 done: weigh live block-v components against frozen ones.
    top = max(v_size)
    if top > best_v:
        idx = [i for i, s in enumerate(v_size) if s == top]
        if len(idx) != 1:
            return 0
        return int(bool(r_mark[v_rep[idx[0]]]))
    if top == best_v or cnt_v != 1:
        return 0
    if champ_marked is None:
        for i, p in enumerate(r_pin):
            if p == champ_gen:
                champ_marked = r_mark[i]
                break
    return int(bool(champ_marked))


def dual_trial_key(key: bytes, N: int, kind: int, thresholds, drop: int, columns: int | None = None) -> int:
    """Dual trial with labels from the 16-bit arc4 stream, column by column."""
    stream = Arc4(key, 16, drop)
    thr = [int(t) for t in thresholds]

    def column(_x):
        return [site_code(thr, stream.next_draw()) for _ in range(N)]

    return dual_sweep(N, kind, column, columns)


def dual_trial_states(states, kind: int) -> int:
    """Dual trial on an explicit ``(2N, N)`` label array."""
    N = len(states[0])
    return dual_sweep(N, kind, lambda x: [int(v) for v in states[x]])


# ---------------------------------------------------------------------------
# Crossing experiment: right-hand boundary following on dual faces.

_DX = (1, 0, -1, 0)  # E, N, W, S
_DY = (0, 1, 0, -1)


def primal_crossed(W: int, H: int, h_open, v_open) -> bool:
    """Whether open edges join the bottom row to the top row of a ``W x H`` box.

    ``h_open(x, y)`` is the edge (x, y)-(x+1, y); ``v_open(x, y)`` the edge
    (x, y)-(x, y+1).  The walker explores the dual component of the left
    boundary column (faces a = -1) with its right hand on the wall; it stops
    on entering the right boundary column (a dual crossing) or on touching
    the top wall (the walls it has touched then chain bottom to top).
    """
    if H == 1:
        return True
    top = H - 2
    a, b, d = -1, 0, 0
    limit = 4 * (W + 2) * H + 16
    for _ in range(limit):
        for turn in (3, 0, 1, 2):
            nd = (d + turn) & 3
            if nd == 0:
                ok = not v_open(a + 1, b)
            elif nd == 2:
                ok = a > -1 and not v_open(a, b)
            elif nd == 1:
                if b == top:
                    return True
                ok = a == -1 or not h_open(a, b + 1)
            else:
                ok = b > 0 and (a == -1 or not h_open(a, b))
            if ok:
                break
        else:
            return True  # boxed in at the start face
        a += _DX[nd]
        b += _DY[nd]
        d = nd
        if a == W - 1:
            return False
    raise RuntimeError("boundary walk did not terminate")


def crossing_event(N: int, kind: int, state) -> int:
    """1 iff neither the rectangle's bottom-top nor the left square's
    left-right crossing exists; ``state(x, y)`` gives site labels."""

    def h_open(x, y):
        return edge_open(kind, state(x, y), state(x + 1, y), True, (x + y) % 2 == 0)

    def v_open(x, y):
        return edge_open(kind, state(x, y), state(x, y + 1), False, (x + y) % 2 == 0)

    if primal_crossed(2 * N, N, h_open, v_open):
        return 0
    # Left-right in the square is bottom-top after swapping coordinates.
    if primal_crossed(N, N, lambda x, y: v_open(y, x), lambda x, y: h_open(y, x)):
        return 0
    return 1


def crossing_trial_key(key: bytes, N: int, kind: int, thresholds) -> int:
    oracle = KeyedSiteOracle(key)
    thr = [int(t) for t in thresholds]
    cache: dict[tuple[int, int], int] = {}

    def state(x, y):
        s = cache.get((x, y))
        if s is None:
            s = cache[(x, y)] = site_code(thr, oracle.draw(x, y))
        return s

    return crossing_event(N, kind, state)


def crossing_trial_states(states, kind: int) -> int:
    N = len(states[0])
    return crossing_event(N, kind, lambda x, y: int(states[x][y]))
