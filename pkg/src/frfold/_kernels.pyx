# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; a line-for-line port of ``_pykernels``.

Same table layouts, counter slots and tie-breaking as the Python code, so
both backends produce identical tables, counters and structures.
"""
from libc.stdint cimport int8_t, int32_t, int64_t, uint64_t
from libc.stdlib cimport malloc, free, calloc
from libcpp.unordered_map cimport unordered_map
from cython.operator cimport dereference as deref

from .model import TableFault

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

DEF CENTRAL = 0
DEF UPDATION = 1
DEF INNER = 2
DEF PRECOMPUTE = 4
DEF TB_NODES = 5
DEF TB_STEPS = 6


cdef inline int popc(uint64_t x) noexcept nogil:
    return __builtin_popcountll(x)


cdef inline uint64_t lowmask(int bits) noexcept nogil:
    if bits <= 0:
        return 0
    if bits >= 64:
        return <uint64_t>0xFFFFFFFFFFFFFFFF
    return ((<uint64_t>1) << bits) - 1


# -- central table -----------------------------------------------------------

def central_table(int w, int8_t[::1] rep, int8_t[::1] dev, int64_t[::1] counters):
    cdef uint64_t size = (<uint64_t>1) << w
    cdef uint64_t u, v, idx
    cdef int t, run, best, best_t, first
    with nogil:
        for u in range(size):
            for v in range(size):
                run = 0
                best = -1000
                best_t = 1
                for t in range(1, w + 1):
                    run += <int>((u >> (t - 1)) & 1) - <int>((v >> (t - 1)) & 1)
                    if run > best:
                        best = run
                        best_t = t
                first = <int>(u & 1) - <int>(v & 1)
                idx = (u << w) | v
                rep[idx] = best_t
                dev[idx] = best - first
    counters[PRECOMPUTE] += <int64_t>(size * size) * w


# -- memory-efficient solver -------------------------------------------------

cdef struct FrView:
    int n
    int w
    int k
    int32_t* D
    int32_t* F
    int64_t* R
    int* blk


cdef inline int mval(FrView* c, int i, int col) noexcept nogil:
    if i >= col:
        return 0
    cdef int m = c.blk[i]
    if m == c.blk[col]:
        return c.D[i * (c.w + 1) + col - i + 1]
    cdef int q = i - m * c.w
    cdef uint64_t v = <uint64_t>c.R[col * c.k + m]
    cdef int anchor = c.F[m * (c.n + 2) + col]
    if q == 1:
        return anchor + <int>(v & 1)
    return anchor - popc((v >> 1) & lowmask(q - 2))


cdef int* _blocks(int n, int w) noexcept nogil:
    cdef int* blk = <int*>malloc((n + 2) * sizeof(int))
    cdef int x
    blk[0] = 0
    for x in range(1, n + 2):
        blk[x] = (x - 1) // w
    return blk


def fr_fill(const int8_t[::1] codes, const int8_t[:, ::1] pm, int h, int w,
            int32_t[:, ::1] D, int32_t[:, ::1] E, int32_t[:, ::1] F, int32_t[:, ::1] G,
            int64_t[:, ::1] L, int64_t[:, ::1] R, cdev_obj, int64_t[::1] counters):
    cdef int n = codes.shape[0] - 2
    cdef int k = n // w + 1
    cdef int NP = n + 2
    cdef int W1 = w + 1
    cdef const int8_t[::1] cdev_mv
    cdef const int8_t* cd = NULL
    if cdev_obj is not None:
        cdev_mv = cdev_obj
        cd = &cdev_mv[0]
    cdef int32_t* Dp = &D[0, 0]
    cdef int32_t* Ep = &E[0, 0]
    cdef int32_t* Fp = &F[0, 0]
    cdef int32_t* Gp = &G[0, 0]
    cdef int64_t* Lp = &L[0, 0]
    cdef int64_t* Rp = &R[0, 0]
    cdef int* N = <int*>calloc(NP, sizeof(int))
    cdef int* blk = _blocks(n, w)
    cdef FrView view
    view.n = n
    view.w = w
    view.k = k
    view.D = Dp
    view.F = Fp
    view.R = Rp
    view.blk = blk
    cdef long long central = 0, inner = 0
    cdef int i, j, e, ebase, m, best, t, p, top, f, q, base, cj
    cdef uint64_t code
    with nogil:
        for j in range(1, n + 1):
            e = blk[j]
            ebase = e * w
            if j == ebase + 1:
                for i in range(1, j):
                    Gp[i * W1] = Gp[i * W1 + w]
            N[j] = 0
            N[j + 1] = 0
            Gp[j * W1 + j - ebase] = 0
            Dp[j * W1 + 1] = 0
            cj = codes[j]
            i = j - 1
            while i >= 1:
                m = blk[i]
                best = N[i + 1]
                t = mval(&view, i, j - 1)
                if t > best:
                    best = t
                if j - i > h and pm[codes[i], cj]:
                    t = mval(&view, i + 1, j - 1) + 1
                    if t > best:
                        best = t
                if m == e:
                    for p in range(i, j):
                        t = Dp[i * W1 + p - i + 1] + N[p + 1]
                        if t > best:
                            best = t
                    inner += j - i
                else:
                    top = (m + 1) * w
                    for p in range(i, top + 1):
                        t = Dp[i * W1 + p - i + 1] + N[p + 1]
                        if t > best:
                            best = t
                    inner += top - i + 1
                    for f in range(m + 1, e):
                        t = (cd[(Lp[i * k + f] << w) | Rp[j * k + f]]
                             + Ep[i * k + f] + Fp[f * NP + j])
                        if t > best:
                            best = t
                    central += e - m - 1
                    inner += e - m - 1
                    for p in range(ebase + 1, j):
                        t = mval(&view, i, p) + N[p + 1]
                        if t > best:
                            best = t
                    inner += j - ebase - 1
                N[i] = best
                if m == e:
                    Dp[i * W1 + j - i + 1] = best
                Gp[i * W1 + j - ebase] = best
                if j == ebase + 1:
                    Ep[i * k + e] = best
                if i >= 2 and (i - 2) % w == 0:
                    Fp[((i - 2) // w) * NP + j] = best
                if (i - 1) % w == 0 and (m + 1) * w < j:
                    base = m * w
                    code = 0
                    for q in range(1, w + 1):
                        code |= (<uint64_t>(N[base + q] - N[base + q + 1])) << (q - 1)
                    Rp[j * k + m] = <int64_t>code
                i -= 1
            if j % w == 0:
                for i in range(1, ebase + 1):
                    code = 0
                    for q in range(1, w + 1):
                        code |= (<uint64_t>(Gp[i * W1 + q] - Gp[i * W1 + q - 1])) << (q - 1)
                    Lp[i * k + e] = <int64_t>code
    free(N)
    free(blk)
    counters[CENTRAL] += central
    counters[INNER] += inner


def fr_traceback(const int8_t[::1] codes, const int8_t[:, ::1] pm, int h, int w,
                 int32_t[:, ::1] D, int32_t[:, ::1] F, int64_t[:, ::1] R,
                 int i0, int j0, int64_t[::1] counters):
    cdef int n = codes.shape[0] - 2
    cdef FrView view
    view.n = n
    view.w = w
    view.k = n // w + 1
    view.D = &D[0, 0]
    view.F = &F[0, 0]
    view.R = &R[0, 0]
    view.blk = _blocks(n, w)
    cdef int* O = <int*>calloc(n + 2, sizeof(int))
    cdef int* Q = <int*>calloc(n + 2, sizeof(int))
    cdef int* stack = <int*>malloc(2 * (n + 4) * sizeof(int))
    cdef int top = 0
    cdef int a, b, c, c1, c2, c3, p, found
    cdef long long nodes = 0, steps = 0
    pairs = []
    stack[0] = i0
    stack[1] = j0
    top = 1
    try:
        while top > 0:
            top -= 1
            a = stack[2 * top]
            b = stack[2 * top + 1]
            nodes += 1
            if a >= b:
                continue
            c = mval(&view, a, b)
            c1 = mval(&view, a, b - 1)
            c2 = mval(&view, a + 1, b)
            c3 = mval(&view, a + 1, b - 1)
            for p in range(a, b):
                O[p] = mval(&view, a, p)
                Q[p + 1] = mval(&view, p + 1, b)
            steps += 4 + 2 * (b - a)
            if b - a > h and pm[codes[a], codes[b]] and c == c3 + 1:
                pairs.append((a, b))
                stack[2 * top] = a + 1
                stack[2 * top + 1] = b - 1
                top += 1
            elif c == c2:
                stack[2 * top] = a + 1
                stack[2 * top + 1] = b
                top += 1
            elif c == c1:
                stack[2 * top] = a
                stack[2 * top + 1] = b - 1
                top += 1
            else:
                found = 0
                for p in range(a, b):
                    if O[p] + Q[p + 1] == c:
                        stack[2 * top] = p + 1
                        stack[2 * top + 1] = b
                        stack[2 * top + 2] = a
                        stack[2 * top + 3] = p
                        top += 2
                        found = 1
                        break
                if not found:
                    raise TableFault(f"no traceback case matches M[{a},{b}]={c}")
    finally:
        free(O)
        free(Q)
        free(stack)
        free(view.blk)
    counters[TB_NODES] += nodes
    counters[TB_STEPS] += steps
    return pairs


# -- two-log solver ----------------------------------------------------------

cdef inline void up_entry(int64_t d1, int64_t d2, uint64_t u1, uint64_t u2, int w, int n,
                          uint64_t* code_out, int64_t* dev_out) noexcept nogil:
    cdef int64_t off = d2 - n
    cdef int64_t a1, a2, b, prev = 0, dev = 0
    cdef uint64_t code = 0, mask
    cdef int q
    for q in range(w, 0, -1):
        mask = lowmask(w - q)
        a1 = d1 + popc((u1 >> (q - 1)) & mask)
        a2 = off + popc((u2 >> (q - 1)) & mask)
        b = a1 if a1 > a2 else a2
        if q == w:
            dev = b
        else:
            code |= (<uint64_t>(b - prev)) << (q - 1)
        prev = b
    code_out[0] = code
    dev_out[0] = dev


def updation_entry(int64_t d1, int64_t d2, uint64_t u1, uint64_t u2, int w, int n):
    cdef uint64_t code
    cdef int64_t dev
    up_entry(d1, d2, u1, u2, w, n, &code, &dev)
    return int(code), int(dev)


def updation_dense(int n, int w, int64_t[::1] out, int64_t[::1] counters):
    cdef uint64_t size = (<uint64_t>1) << w
    cdef int64_t span = 2 * n + 1
    cdef int64_t d1, d2
    cdef uint64_t u1, u2, head, code
    cdef int64_t dev
    with nogil:
        for d1 in range(n + 1):
            for d2 in range(span):
                head = (<uint64_t>(d1 * span + d2)) << (2 * w)
                for u1 in range(size):
                    for u2 in range(size):
                        up_entry(d1, d2, u1, u2, w, n, &code, &dev)
                        out[head | (u1 << w) | u2] = (dev << w) | <int64_t>code
    counters[PRECOMPUTE] += (n + 1) * span * <int64_t>(size * size) * w


cdef inline void pc_entry(uint64_t x, const int64_t* vs, uint64_t u, int w, int* best,
                          uint64_t* code_out, int64_t* dev_out) noexcept nogil:
    cdef int sb, sc, val, top
    cdef uint64_t mask, code = 0
    for sb in range(1, w + 1):
        mask = lowmask(w - sb)
        top = -1000000
        for sc in range(1, w + 1):
            val = (popc(u >> sc) - popc(x >> sc)
                   + popc(((<uint64_t>vs[sc - 1]) >> (sb - 1)) & mask))
            if val > top:
                top = val
        best[sb] = top
    for sb in range(1, w):
        code |= (<uint64_t>(best[sb] - best[sb + 1])) << (sb - 1)
    code_out[0] = code
    dev_out[0] = best[w]


def partial_central(uint64_t x, vs, uint64_t u, int w):
    cdef int64_t* buf = <int64_t*>malloc(w * sizeof(int64_t))
    cdef int* best = <int*>malloc((w + 2) * sizeof(int))
    cdef uint64_t code
    cdef int64_t dev
    cdef int c
    for c in range(w):
        buf[c] = vs[c]
    pc_entry(x, buf, u, w, best, &code, &dev)
    free(buf)
    free(best)
    return int(code), int(dev)


def fr2_fill(const int8_t[::1] codes, const int8_t[:, ::1] pm, int h, int w,
             int32_t[:, ::1] M, int64_t[:, ::1] L, int64_t[:, ::1] R,
             int64_t[:, ::1] Rpc, int64_t[:, ::1] Rpd, int64_t[::1] Cpc, int64_t[::1] Cpd,
             up_dense, dict up_cache, int64_t[::1] counters):
    cdef int n = codes.shape[0] - 2
    cdef int k = n // w + 1
    cdef int NP = n + 2
    cdef int64_t span = 2 * n + 1
    cdef int32_t* Mp = &M[0, 0]
    cdef int64_t* Lp = &L[0, 0]
    cdef int64_t* Rp = &R[0, 0]
    cdef int64_t* Pc = &Rpc[0, 0]
    cdef int64_t* Pd = &Rpd[0, 0]
    cdef int64_t* Cc = &Cpc[0] if Cpc.shape[0] > 0 else NULL
    cdef int64_t* Cd = &Cpd[0] if Cpd.shape[0] > 0 else NULL
    cdef int64_t[::1] dense_mv
    cdef int64_t* Up = NULL
    if up_dense is not None:
        dense_mv = up_dense
        Up = &dense_mv[0]
    cdef int64_t* vs = <int64_t*>malloc((w + 1) * sizeof(int64_t))
    cdef int* best_buf = <int*>malloc((w + 2) * sizeof(int))
    cdef int* vals = <int*>malloc((w + 2) * sizeof(int))
    cdef long long central = 0, updation = 0, inner = 0, pre = 0
    cdef int i, j, s, base, cj, best, t, p, lo, g, a, q, y, ybase, ga, c, l, top
    cdef int64_t d1, d2, nd, da, basev, packed
    cdef uint64_t code, u, nc, vc, x, idx, uu
    cdef uint64_t wmask = lowmask(w)
    # cached mode: C-level memo when keys fit in 63 bits, synced into up_cache at the end
    cdef unordered_map[int64_t, int64_t] memo
    cdef unordered_map[int64_t, int64_t].iterator hit_it
    cdef bint native = Up == NULL and (n + 1) * span < ((<int64_t>1) << (62 - 2 * w))
    cdef int64_t ckey
    if native:
        for key, hit in up_cache.items():
            memo[<int64_t>key] = (<int64_t>hit[1] << w) | <int64_t>hit[0]
    try:
        for j in range(1, n + 1):
            s = (j - 1) // w
            base = s * w
            cj = codes[j]
            i = j - 1
            while i > base:
                best = Mp[(i + 1) * NP + j]
                if Mp[i * NP + j - 1] > best:
                    best = Mp[i * NP + j - 1]
                if j - i > h and pm[codes[i], cj]:
                    t = Mp[(i + 1) * NP + j - 1] + 1
                    if t > best:
                        best = t
                for p in range(i, j):
                    t = Mp[i * NP + p] + Mp[(p + 1) * NP + j]
                    if t > best:
                        best = t
                inner += j - i
                Mp[i * NP + j] = best
                i -= 1
            if s > 0:
                lo = base + 1 if base + 1 <= j - 1 else j - 1
                for g in range(s):
                    a = (g + 1) * w
                    for q in range(1, w + 1):
                        i = g * w + q
                        top = -1
                        for l in range(lo, j):
                            t = Mp[i * NP + l] + Mp[(l + 1) * NP + j]
                            if t > top:
                                top = t
                        vals[q] = top
                    inner += w * (j - lo)
                    code = 0
                    for q in range(1, w):
                        code |= (<uint64_t>(vals[q] - vals[q + 1])) << (q - 1)
                    Pc[j * k + g] = <int64_t>code
                    Pd[j * k + g] = vals[w] - Mp[a * NP + j - 1]
                y = s - 1
                while y >= 0:
                    a = (y + 1) * w
                    ybase = y * w
                    code = <uint64_t>Pc[j * k + y]
                    basev = Mp[a * NP + j - 1] + Pd[j * k + y]
                    i = a
                    while i > ybase:
                        q = i - ybase
                        best = <int>(basev + popc((code >> (q - 1)) & lowmask(w - q)))
                        for p in range(i, a + 1):
                            t = Mp[i * NP + p] + Mp[(p + 1) * NP + j]
                            if t > best:
                                best = t
                        inner += a - i + 1
                        if Mp[(i + 1) * NP + j] > best:
                            best = Mp[(i + 1) * NP + j]
                        if Mp[i * NP + j - 1] > best:
                            best = Mp[i * NP + j - 1]
                        if j - i > h and pm[codes[i], cj]:
                            t = Mp[(i + 1) * NP + j - 1] + 1
                            if t > best:
                                best = t
                        Mp[i * NP + j] = best
                        i -= 1
                    u = 0
                    for q in range(1, w + 1):
                        u |= (<uint64_t>(Mp[(ybase + q) * NP + j]
                                         - Mp[(ybase + q + 1) * NP + j])) << (q - 1)
                    Rp[j * k + y] = <int64_t>u
                    g = y - 1
                    while g >= 0:
                        idx = ((<uint64_t>(g * k + y)) << w) | u
                        vc = <uint64_t>Cc[idx]
                        da = Cd[idx]
                        central += 1
                        ga = (g + 1) * w
                        d1 = Pd[j * k + g]
                        d2 = (Mp[ga * NP + a] + Mp[(a + 1) * NP + j]
                              - Mp[ga * NP + j - 1] + da + n)
                        uu = <uint64_t>Pc[j * k + g]
                        if Up != NULL:
                            packed = Up[((<uint64_t>(d1 * span + d2)) << (2 * w))
                                        | (uu << w) | vc]
                            nc = (<uint64_t>packed) & wmask
                            nd = packed >> w
                        elif native:
                            ckey = <int64_t>((((<uint64_t>(d1 * span + d2)) << (2 * w))
                                              | (uu << w) | vc))
                            hit_it = memo.find(ckey)
                            if hit_it == memo.end():
                                up_entry(d1, d2, uu, vc, w, n, &nc, &nd)
                                memo[ckey] = (nd << w) | <int64_t>nc
                                pre += w
                            else:
                                packed = deref(hit_it).second
                                nc = (<uint64_t>packed) & wmask
                                nd = packed >> w
                        else:
                            key = (((<object>(d1 * span + d2)) << (2 * w))
                                   | (<object>uu << w) | <object>vc)
                            hit = up_cache.get(key)
                            if hit is None:
                                up_entry(d1, d2, uu, vc, w, n, &nc, &nd)
                                up_cache[key] = (int(nc), int(nd))
                                pre += w
                            else:
                                nc = hit[0]
                                nd = hit[1]
                        updation += 1
                        Pc[j * k + g] = <int64_t>nc
                        Pd[j * k + g] = nd
                        g -= 1
                    y -= 1
            if j % w == 0:
                for i in range(1, base + 1):
                    code = 0
                    for q in range(1, w + 1):
                        code |= (<uint64_t>(Mp[i * NP + base + q]
                                            - Mp[i * NP + base + q - 1])) << (q - 1)
                    Lp[i * k + s] = <int64_t>code
                for g in range(s):
                    x = <uint64_t>Lp[((g + 1) * w) * k + s]
                    for c in range(1, w + 1):
                        vs[c - 1] = Rp[(base + c) * k + g]
                    idx = (<uint64_t>(g * k + s)) << w
                    for uu in range(1 << w):
                        pc_entry(x, vs, uu, w, best_buf, &nc, &nd)
                        Cc[idx | uu] = <int64_t>nc
                        Cd[idx | uu] = nd
                    pre += (1 << w) * w * w
    finally:
        free(vs)
        free(best_buf)
        free(vals)
    if native:
        for kv in memo:
            up_cache[kv.first] = (int((<uint64_t>kv.second) & wmask), int(kv.second >> w))
    counters[CENTRAL] += central
    counters[UPDATION] += updation
    counters[INNER] += inner
    counters[PRECOMPUTE] += pre


def full_traceback(int32_t[:, ::1] M, const int8_t[::1] codes, const int8_t[:, ::1] pm,
                   int h, int i0, int j0, int64_t[::1] counters):
    cdef int n = codes.shape[0] - 2
    cdef int NP = n + 2
    cdef int32_t* Mp = &M[0, 0]
    cdef int* stack = <int*>malloc(2 * (n + 4) * sizeof(int))
    cdef int top = 1, a, b, c, p, inner_val, found
    cdef long long nodes = 0
    pairs = []
    stack[0] = i0
    stack[1] = j0
    try:
        while top > 0:
            top -= 1
            a = stack[2 * top]
            b = stack[2 * top + 1]
            nodes += 1
            if a >= b:
                continue
            c = Mp[a * NP + b]
            inner_val = Mp[(a + 1) * NP + b - 1] if a + 1 <= b - 1 else 0
            if b - a > h and pm[codes[a], codes[b]] and c == inner_val + 1:
                pairs.append((a, b))
                stack[2 * top] = a + 1
                stack[2 * top + 1] = b - 1
                top += 1
            elif c == Mp[(a + 1) * NP + b]:
                stack[2 * top] = a + 1
                stack[2 * top + 1] = b
                top += 1
            elif c == Mp[a * NP + b - 1]:
                stack[2 * top] = a
                stack[2 * top + 1] = b - 1
                top += 1
            else:
                found = 0
                for p in range(a, b):
                    if Mp[a * NP + p] + Mp[(p + 1) * NP + b] == c:
                        stack[2 * top] = p + 1
                        stack[2 * top + 1] = b
                        stack[2 * top + 2] = a
                        stack[2 * top + 3] = p
                        top += 2
                        found = 1
                        break
                if not found:
                    raise TableFault(f"no traceback case matches M[{a},{b}]={c}")
    finally:
        free(stack)
    counters[TB_NODES] += nodes
    return pairs


# -- packed CNF recognition --------------------------------------------------

def cyk_packed(const uint64_t[::1] units, const int64_t[:, ::1] rules, int n, int g, int w,
               uint64_t[:, :, ::1] RT, uint64_t[:, :, ::1] CT, int64_t[::1] counters):
    cdef int nw = RT.shape[2]
    cdef int nrules = rules.shape[0]
    cdef uint64_t* RTp = &RT[0, 0, 0]
    cdef uint64_t* CTp = &CT[0, 0, 0]
    cdef uint64_t full = lowmask(w)
    cdef uint64_t mask, word, bits, whole = 0
    cdef uint64_t* rb
    cdef uint64_t* cc
    cdef long long ops = 0
    cdef int i, j, r, ra, rbi, rc, lo_word, hi_word, wd, a
    with nogil:
        for j in range(n):
            i = j
            while i >= 0:
                if i == j:
                    mask = units[i]
                else:
                    mask = 0
                    lo_word = i // w
                    hi_word = (j - 1) // w
                    for r in range(nrules):
                        ra = <int>rules[r, 0]
                        if (mask >> ra) & 1:
                            continue
                        rbi = <int>rules[r, 1]
                        rc = <int>rules[r, 2]
                        rb = RTp + (<long long>rbi * (n + 1) + i) * nw
                        cc = CTp + (<long long>rc * (n + 1) + j) * nw
                        for wd in range(lo_word, hi_word + 1):
                            word = rb[wd] & cc[wd]
                            if wd == lo_word:
                                word &= full ^ lowmask(i % w)
                            if wd == hi_word:
                                word &= lowmask((j - 1) % w + 1)
                            ops += 1
                            if word:
                                mask |= (<uint64_t>1) << ra
                                break
                bits = mask
                while bits:
                    a = popc((bits & (~bits + 1)) - 1)
                    bits &= bits - 1
                    RTp[(<long long>a * (n + 1) + i) * nw + j // w] |= (<uint64_t>1) << (j % w)
                    if i >= 1:
                        CTp[(<long long>a * (n + 1) + j) * nw + (i - 1) // w] |= (
                            (<uint64_t>1) << ((i - 1) % w))
                if i == 0:
                    whole = mask
                i -= 1
    counters[INNER] += ops
    return int(whole)
