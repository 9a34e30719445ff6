# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trial kernels; semantics match ``_pykernels`` line for line."""

import numpy as np

from libc.stdint cimport int32_t, int64_t, uint8_t, uint16_t, uint32_t, uint64_t

cdef enum:
    SIGNS = 0
    DIRECTION = 1
    CACHE_BITS = 18

INCOMPLETE = -1


# ---------------------------------------------------------------------------
# Generators


cdef class _Arc4:
    cdef object _buf
    cdef uint16_t *s
    cdef uint32_t i, j, mask

    def __init__(self, bytes key, int word_bits=16, long long drop=0):
        if word_bits != 8 and word_bits != 16:
            raise ValueError("word_bits must be 8 or 16")
        if not key:
            raise ValueError("key must be non-empty")
        cdef int step = word_bits // 8
        if len(key) % step:
            key = key + b"\0" * (step - len(key) % step)
        kw = [int.from_bytes(key[t:t + step], "little") for t in range(0, len(key), step)]
        cdef uint32_t[::1] kv = np.array(kw, dtype=np.uint32)
        cdef Py_ssize_t nk = kv.shape[0]
        cdef uint32_t size = 1u << word_bits
        buf = np.arange(size, dtype=np.uint16)
        cdef uint16_t[::1] view = buf
        self._buf = buf
        self.s = &view[0]
        self.mask = size - 1
        cdef uint32_t i, j = 0
        cdef uint16_t tmp
        for i in range(size):
            j = (j + self.s[i] + kv[i % nk]) & self.mask
            tmp = self.s[i]
            self.s[i] = self.s[j]
            self.s[j] = tmp
        self.i = 0
        self.j = 0
        cdef long long n
        for n in range(drop):
            self.next_word()

    cdef inline uint32_t next_word(self) noexcept:
        cdef uint16_t *s = self.s
        cdef uint32_t i = (self.i + 1) & self.mask
        cdef uint16_t si = s[i]
        cdef uint32_t j = (self.j + si) & self.mask
        cdef uint16_t sj = s[j]
        s[i] = sj
        s[j] = si
        self.i = i
        self.j = j
        return s[(<uint32_t>si + sj) & self.mask]

    cdef inline uint32_t next_draw(self) noexcept:
        cdef uint32_t hi = self.next_word()
        return (hi << 16) | self.next_word()

    def words(self, Py_ssize_t n):
        return [self.next_word() for _ in range(n)]

    def draws(self, Py_ssize_t n):
        return [self.next_draw() for _ in range(n)]


def arc4_words(bytes key, int word_bits, long long drop, Py_ssize_t n):
    return _Arc4(key, word_bits, drop).words(n)


cdef inline uint32_t rotl(uint32_t v, int c) noexcept nogil:
    return (v << c) | (v >> (32 - c))


cdef inline void qr(uint32_t *x, int a, int b, int c, int d) noexcept nogil:
    x[a] += x[b]; x[d] = rotl(x[d] ^ x[a], 16)
    x[c] += x[d]; x[b] = rotl(x[b] ^ x[c], 12)
    x[a] += x[b]; x[d] = rotl(x[d] ^ x[a], 8)
    x[c] += x[d]; x[b] = rotl(x[b] ^ x[c], 7)


cdef void chacha_block(const uint32_t *key, uint32_t counter, uint32_t n0,
                       uint32_t n1, uint32_t n2, uint32_t *out) noexcept nogil:
    cdef uint32_t st[16]
    cdef int r
    st[0] = 0x61707865u; st[1] = 0x3320646eu; st[2] = 0x79622d32u; st[3] = 0x6b206574u
    for r in range(8):
        st[4 + r] = key[r]
    st[12] = counter; st[13] = n0; st[14] = n1; st[15] = n2
    for r in range(16):
        out[r] = st[r]
    for r in range(10):
        qr(out, 0, 4, 8, 12); qr(out, 1, 5, 9, 13); qr(out, 2, 6, 10, 14); qr(out, 3, 7, 11, 15)
        qr(out, 0, 5, 10, 15); qr(out, 1, 6, 11, 12); qr(out, 2, 7, 8, 13); qr(out, 3, 4, 9, 14)
    for r in range(16):
        out[r] += st[r]


def chacha20_block(bytes key, uint32_t counter, bytes nonce):
    if len(key) != 32 or len(nonce) != 12:
        raise ValueError("ChaCha20 needs a 32-byte key and a 12-byte nonce")
    cdef uint32_t[::1] kw = np.frombuffer(key, dtype="<u4").astype(np.uint32)
    cdef uint32_t[::1] nw = np.frombuffer(nonce, dtype="<u4").astype(np.uint32)
    cdef uint32_t[::1] out = np.zeros(16, dtype=np.uint32)
    chacha_block(&kw[0], counter, nw[0], nw[1], nw[2], &out[0])
    return np.asarray(out).astype("<u4").tobytes()


# ---------------------------------------------------------------------------
# Labels and edge rule


cdef inline int site_code(const uint64_t *thr, Py_ssize_t nthr, uint64_t draw) noexcept nogil:
    cdef int c = 0
    cdef Py_ssize_t t
    for t in range(nthr):
        if draw >= thr[t]:
            c += 1
    return c


cdef inline bint edge_open(int kind, int a, int b, bint horizontal, bint a_even) noexcept nogil:
    if kind == SIGNS:
        return a == b
    if kind == DIRECTION:
        if horizontal:
            return a == b or a == 1 or b == 3
        return a == b or a == 0 or b == 2
    if horizontal:
        if a_even:
            return a == 0 or a == 4
        return b == 0 or b == 3
    if a_even:
        return a == 0 or a == 1
    return b == 0 or b == 2


# ---------------------------------------------------------------------------
# Dual-component sweep


cdef struct Forest:
    int32_t *parent
    int64_t *size
    uint8_t *mark
    int64_t *pin


cdef inline int32_t ffind(Forest *f, int32_t v) noexcept nogil:
    cdef int32_t *p = f.parent
    while p[v] != v:
        p[v] = p[p[v]]
        v = p[v]
    return v


cdef inline void funion(Forest *f, int32_t a, int32_t b) noexcept nogil:
    cdef int32_t ra = ffind(f, a), rb = ffind(f, b), t
    if ra == rb:
        return
    if f.size[ra] < f.size[rb]:
        t = ra; ra = rb; rb = t
    f.parent[rb] = ra
    f.size[ra] += f.size[rb]
    f.mark[ra] |= f.mark[rb]
    if f.pin[rb] > f.pin[ra]:
        f.pin[ra] = f.pin[rb]


cdef class _DualSweep:
    """Working storage for one sweep; every array is O(N)."""

    cdef int N, H, kind
    cdef uint8_t[::1] left, right, up, across
    cdef int32_t[::1] r_parent, v_parent, r_prev, v_prev, cur, vcur, order, vorder, frozen, v_rep, v_rep_c
    cdef int64_t[::1] r_size, r_pin, v_size, r_size_c, r_pin_c, v_size_c, v_pin
    cdef uint8_t[::1] r_mark, r_mark_c, v_mark, live, seen, vlive, vseen
    cdef int32_t[::1] frozen_v, frozen_vi

    def __init__(self, int N, int kind):
        self.N = N
        self.H = N - 1
        self.kind = kind
        cdef Py_ssize_t H = self.H, H2 = 2 * self.H
        self.left = np.zeros(N, np.uint8)
        self.right = np.zeros(N, np.uint8)
        self.up = np.zeros(H, np.uint8)
        self.across = np.zeros(H, np.uint8)
        self.r_parent = np.zeros(H2, np.int32)
        self.v_parent = np.zeros(H2, np.int32)
        self.r_size = np.zeros(H2, np.int64)
        self.r_pin = np.zeros(H2, np.int64)
        self.r_mark = np.zeros(H2, np.uint8)
        self.v_size = np.zeros(H2, np.int64)
        self.v_pin = np.zeros(H2, np.int64)
        self.v_mark = np.zeros(H2, np.uint8)
        self.r_size_c = np.zeros(H, np.int64)
        self.r_pin_c = np.zeros(H, np.int64)
        self.r_mark_c = np.zeros(H, np.uint8)
        self.v_size_c = np.zeros(H, np.int64)
        self.v_rep = np.zeros(H, np.int32)
        self.v_rep_c = np.zeros(H, np.int32)
        self.r_prev = np.zeros(H, np.int32)
        self.v_prev = np.zeros(H, np.int32)
        self.cur = np.zeros(H, np.int32)
        self.vcur = np.zeros(H, np.int32)
        self.order = np.zeros(H2, np.int32)
        self.vorder = np.zeros(H2, np.int32)
        self.frozen = np.zeros(H2, np.int32)
        self.frozen_v = np.zeros(H2, np.int32)
        self.frozen_vi = np.zeros(H2, np.int32)
        self.live = np.zeros(H2, np.uint8)
        self.seen = np.zeros(H2, np.uint8)
        self.vlive = np.zeros(H2, np.uint8)
        self.vseen = np.zeros(H2, np.uint8)

    cdef void bonds(self, long x) noexcept:
        cdef int y, H = self.H
        for y in range(1, H):
            self.up[y - 1] = not edge_open(self.kind, self.left[y], self.right[y], True, (x + y) % 2 == 0)
        for y in range(H):
            self.across[y] = not edge_open(self.kind, self.left[y], self.left[y + 1], False, (x + y) % 2 == 0)

    cdef int run(self, _Arc4 stream, const uint8_t[:, ::1] states, const uint64_t[::1] thr, long long columns):
        cdef int N = self.N, H = self.H
        cdef long last = 2 * N - 2, x
        cdef int y, b, i, k = 0, k2 = 0, nf, nfv, cnt, r, root, n_top
        cdef int64_t best_u = 0, cnt_u = 0, best_v = 0, cnt_v = 0, champ_gen = 0, s, top
        cdef int champ_marked = -1  # -1 unknown, else 0/1
        cdef Forest rf, vf
        rf.parent = &self.r_parent[0]; rf.size = &self.r_size[0]; rf.mark = &self.r_mark[0]; rf.pin = &self.r_pin[0]
        vf.parent = &self.v_parent[0]; vf.size = &self.v_size[0]; vf.mark = &self.v_mark[0]; vf.pin = &self.v_pin[0]

        self.load(stream, states, thr, 0, self.right)
        for x in range(last + 1):
            if columns >= 0 and x >= columns:
                return INCOMPLETE
            self.left, self.right = self.right, self.left
            self.load(stream, states, thr, x + 1, self.right)
            self.bonds(x)

            for i in range(k + H):
                self.r_parent[i] = i
                self.live[i] = 0
                self.seen[i] = 0
                self.order[i] = -1
                if i < k:
                    self.r_size[i] = self.r_size_c[i]
                    self.r_mark[i] = self.r_mark_c[i]
                    self.r_pin[i] = self.r_pin_c[i]
                else:
                    self.r_size[i] = 1
                    self.r_mark[i] = 0
                    self.r_pin[i] = 0
            for b in range(H - 1):
                if self.up[b]:
                    funion(&rf, k + b, k + b + 1)
            if x > 0:
                for b in range(H):
                    if self.across[b]:
                        funion(&rf, self.r_prev[b], k + b)
            for b in range(H):
                r = ffind(&rf, k + b)
                self.cur[b] = r
                self.live[r] = 1
            nf = 0
            for i in range(k):
                r = ffind(&rf, i)
                if not self.live[r] and not self.seen[r]:
                    self.seen[r] = 1
                    self.frozen[nf] = r
                    nf += 1

            if x <= N - 2:
                for i in range(nf):
                    s = self.r_size[self.frozen[i]]
                    if s > best_u:
                        best_u = s; cnt_u = 1
                    elif s == best_u:
                        cnt_u += 1
                if x == N - 2:
                    top = 0
                    for b in range(H):
                        if self.r_size[self.cur[b]] > top:
                            top = self.r_size[self.cur[b]]
                    if top < best_u:
                        return 0
                    n_top = cnt_u if top == best_u else 0
                    root = -1
                    for b in range(H):
                        r = self.cur[b]
                        if self.r_size[r] == top and not self.seen[r]:
                            self.seen[r] = 1  # count each live root once
                            n_top += 1
                            root = r
                    for b in range(H):
                        self.seen[self.cur[b]] = 0
                    if n_top != 1:
                        return 0
                    self.r_mark[root] = 1

            if x >= N:
                for i in range(k2 + H):
                    self.v_parent[i] = i
                    self.vlive[i] = 0
                    self.vseen[i] = 0
                    self.vorder[i] = -1
                    self.v_mark[i] = 0
                    self.v_pin[i] = 0
                    self.v_size[i] = self.v_size_c[i] if i < k2 else 1
                for b in range(H - 1):
                    if self.up[b]:
                        funion(&vf, k2 + b, k2 + b + 1)
                if x > N:
                    for b in range(H):
                        if self.across[b]:
                            funion(&vf, self.v_prev[b], k2 + b)
                for b in range(H):
                    r = ffind(&vf, k2 + b)
                    self.vcur[b] = r
                    self.vlive[r] = 1
                nfv = 0
                for i in range(k2):
                    r = ffind(&vf, i)
                    if not self.vlive[r] and not self.vseen[r]:
                        self.vseen[r] = 1
                        self.frozen_v[nfv] = r
                        self.frozen_vi[nfv] = i
                        nfv += 1
                for i in range(nfv):
                    s = self.v_size[self.frozen_v[i]]
                    if s > best_v:
                        best_v = s; cnt_v = 1
                        champ_gen += 1
                        champ_marked = -1
                        self.r_pin[ffind(&rf, self.v_rep[self.frozen_vi[i]])] = champ_gen
                    elif s == best_v:
                        cnt_v += 1

            for i in range(nf):
                r = self.frozen[i]
                if champ_gen and self.r_pin[r] == champ_gen:
                    champ_marked = self.r_mark[r]
                if self.r_mark[r] and not (cnt_v == 1 and champ_marked == 1):
                    return 0

            cnt = 0
            for b in range(H):
                r = self.cur[b]
                if self.order[r] < 0:
                    self.order[r] = cnt
                    self.r_size_c[cnt] = self.r_size[r]
                    self.r_mark_c[cnt] = self.r_mark[r]
                    self.r_pin_c[cnt] = self.r_pin[r]
                    cnt += 1
                self.r_prev[b] = self.order[r]
            k = cnt

            if x >= N:
                cnt = 0
                for b in range(H):
                    r = self.vcur[b]
                    if self.vorder[r] < 0:
                        self.vorder[r] = cnt
                        self.v_size_c[cnt] = self.v_size[r]
                        self.v_rep_c[cnt] = self.order[self.cur[b]]
                        cnt += 1
                    self.v_prev[b] = self.vorder[r]
                k2 = cnt
                self.v_rep, self.v_rep_c = self.v_rep_c, self.v_rep

        top = 0
        for i in range(k2):
            if self.v_size_c[i] > top:
                top = self.v_size_c[i]
        if top > best_v:
            n_top = 0
            for i in range(k2):
                if self.v_size_c[i] == top:
                    n_top += 1
                    root = i
            if n_top != 1:
                return 0
            return 1 if self.r_mark_c[self.v_rep[root]] else 0
        if top == best_v or cnt_v != 1:
            return 0
        if champ_marked < 0:
            for i in range(k):
                if self.r_pin_c[i] == champ_gen:
                    champ_marked = self.r_mark_c[i]
                    break
        return 1 if champ_marked == 1 else 0

    cdef void load(self, _Arc4 stream, const uint8_t[:, ::1] states, const uint64_t[::1] thr,
                   long x, uint8_t[::1] out):
        cdef int y
        if x > 2 * self.N - 1:
            return
        if stream is not None:
            for y in range(self.N):
                out[y] = site_code(&thr[0], thr.shape[0], stream.next_draw())
        else:
            for y in range(self.N):
                out[y] = states[x, y]


def dual_trial_key(bytes key, int N, int kind, thresholds, long long drop, columns=None):
    cdef uint64_t[::1] thr = np.ascontiguousarray(thresholds, dtype=np.uint64)
    cdef uint8_t[:, ::1] dummy = np.zeros((1, 1), np.uint8)
    sweep = _DualSweep(N, kind)
    return (<_DualSweep>sweep).run(_Arc4(key, 16, drop), dummy, thr, -1 if columns is None else columns)


def dual_trial_states(states, int kind):
    cdef uint8_t[:, ::1] st = np.ascontiguousarray(states, dtype=np.uint8)
    cdef uint64_t[::1] thr = np.zeros(0, np.uint64)
    sweep = _DualSweep(st.shape[1], kind)
    return (<_DualSweep>sweep).run(None, st, thr, -1)


# ---------------------------------------------------------------------------
# Boundary-following crossing test


cdef class _Sites:
    """Lazily evaluated site labels: keyed ChaCha20 blocks behind a
    direct-mapped cache of label codes, or an explicit label array."""

    cdef int kind
    cdef bint explicit
    cdef object _keep
    cdef const uint8_t *states
    cdef Py_ssize_t stride
    cdef uint64_t thr[8]
    cdef Py_ssize_t nthr
    cdef uint32_t key[8]
    cdef int64_t *tags
    cdef uint8_t *codes

    def __init__(self, int kind, bytes key=None, thresholds=None, states=None):
        self.kind = kind
        cdef int t
        cdef const uint8_t[:, ::1] st
        cdef int64_t[::1] tags
        cdef uint8_t[::1] codes
        if states is not None:
            self.explicit = True
            arr = np.ascontiguousarray(states, dtype=np.uint8)
            st = arr
            self._keep = arr
            self.states = &st[0, 0]
            self.stride = st.shape[1]
            return
        self.explicit = False
        if key is None or len(key) != 32:
            raise ValueError("oracle key must be 32 bytes")
        kw = np.frombuffer(key, dtype="<u4")
        for t in range(8):
            self.key[t] = kw[t]
        thr = [int(v) for v in thresholds]
        if len(thr) > 8:
            raise ValueError("at most 8 thresholds")
        self.nthr = len(thr)
        for t in range(self.nthr):
            self.thr[t] = thr[t]
        tag_arr = np.full(1 << CACHE_BITS, -1, dtype=np.int64)
        code_arr = np.zeros((1 << CACHE_BITS) * 16, dtype=np.uint8)
        self._keep = (tag_arr, code_arr)
        tags = tag_arr
        codes = code_arr
        self.tags = &tags[0]
        self.codes = &codes[0]

    cdef inline int state(self, long x, long y) noexcept:
        if self.explicit:
            return self.states[x * self.stride + y]
        cdef long band = y >> 4
        cdef int64_t tag = (<int64_t>x << 28) | band
        cdef Py_ssize_t slot = <Py_ssize_t>((<uint64_t>x * 40503u + <uint64_t>band * 2654435761u) & ((1 << CACHE_BITS) - 1))
        cdef uint32_t blk[16]
        cdef int t
        cdef uint8_t *c = self.codes + 16 * slot
        if self.tags[slot] != tag:
            chacha_block(self.key, <uint32_t>x, <uint32_t>band, 0, 0, blk)
            for t in range(16):
                c[t] = site_code(self.thr, self.nthr, blk[t])
            self.tags[slot] = tag
        return c[y & 15]

    cdef inline bint h_open(self, long x, long y, bint transposed) noexcept:
        if transposed:
            return self.v_open(y, x, False)
        return edge_open(self.kind, self.state(x, y), self.state(x + 1, y), True, (x + y) % 2 == 0)

    cdef inline bint v_open(self, long x, long y, bint transposed) noexcept:
        if transposed:
            return self.h_open(y, x, False)
        return edge_open(self.kind, self.state(x, y), self.state(x, y + 1), False, (x + y) % 2 == 0)


cdef int primal_crossed(_Sites s, long W, long H, bint tr) except -2:
    if H == 1:
        return 1
    cdef long top = H - 2, a = -1, b = 0, step
    cdef long limit = 4 * (W + 2) * H + 16
    cdef int d = 0, nd, turn
    cdef bint ok
    for step in range(limit):
        ok = False
        for turn in range(4):
            nd = (d + 3 + turn) & 3
            if nd == 0:
                ok = not s.v_open(a + 1, b, tr)
            elif nd == 2:
                ok = a > -1 and not s.v_open(a, b, tr)
            elif nd == 1:
                if b == top:
                    return 1
                ok = a == -1 or not s.h_open(a, b + 1, tr)
            else:
                ok = b > 0 and (a == -1 or not s.h_open(a, b, tr))
            if ok:
                break
        if not ok:
            return 1
        if nd == 0:
            a += 1
        elif nd == 1:
            b += 1
        elif nd == 2:
            a -= 1
        else:
            b -= 1
        d = nd
        if a == W - 1:
            return 0
    raise RuntimeError("boundary walk did not terminate")


cdef int crossing_event(_Sites s, long N) except -2:
    if primal_crossed(s, 2 * N, N, False):
        return 0
    if primal_crossed(s, N, N, True):
        return 0
    return 1


def crossing_trial_key(bytes key, long N, int kind, thresholds):
    return crossing_event(_Sites(kind, key, thresholds), N)


def crossing_trial_states(states, int kind):
    arr = np.ascontiguousarray(states, dtype=np.uint8)
    return crossing_event(_Sites(kind, states=arr), arr.shape[1])
