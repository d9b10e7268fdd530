"""Pure-Python hot loops. ``_kernels.pyx`` mirrors these function by function.

All position indices are 1-based; tables carry one padding row/column so
position ``i`` is index ``i``. Counter slots follow ``CounterSet`` field order.
Difference vectors are LSB-first: component q lives in bit q-1.
"""
from __future__ import annotations

from .model import TableFault

CENTRAL, UPDATION, INNER, PEAK, PRECOMPUTE, TB_NODES, TB_STEPS = range(7)


def _popcount(x: int) -> int:
    return x.bit_count()


# -- central table -----------------------------------------------------------

def central_table(w, rep, dev, counters):
    """Fill ``rep``/``dev`` (flat, index ``u << w | v``) for all vector pairs."""
    size = 1 << w
    steps = 0
    for u in range(size):
        for v in range(size):
            run = 0
            best = None
            best_t = 1
            for t in range(1, w + 1):
                run += ((u >> (t - 1)) & 1) - ((v >> (t - 1)) & 1)
                if best is None or run > best:
                    best = run
                    best_t = t
            steps += w
            first = (u & 1) - (v & 1)
            idx = (u << w) | v
            rep[idx] = best_t
            dev[idx] = best - first
    counters[PRECOMPUTE] += steps


# -- memory-efficient solver -------------------------------------------------

def _m_reader(w, blk, D, F, R):
    def mval(i, c):
        if i >= c:
            return 0
        m = blk[i]
        if m == blk[c]:
            return D[i][c - i + 1]
        q = i - m * w
        v = R[c][m]
        if q == 1:
            return F[m][c] + (v & 1)
        return F[m][c] - _popcount((v >> 1) & ((1 << (q - 2)) - 1))
    return mval


def fr_fill(codes, pm, h, w, D, E, F, G, L, R, cdev, counters):
    n = len(codes) - 2
    blk = [0] + [(x - 1) // w for x in range(1, n + 2)]
    codes = codes.tolist()
    pm = pm.tolist()
    cdev = cdev.tolist() if cdev is not None else None
    Dl, El, Fl, Gl, Ll, Rl = (t.tolist() for t in (D, E, F, G, L, R))
    N = [0] * (n + 2)
    mval = _m_reader(w, blk, Dl, Fl, Rl)
    central = inner = 0

    for j in range(1, n + 1):
        e = blk[j]
        ebase = e * w
        if j == ebase + 1:
            for i in range(1, j):
                Gl[i][0] = Gl[i][w]
        N[j] = 0
        N[j + 1] = 0
        Gl[j][j - ebase] = 0
        Dl[j][1] = 0
        cj = codes[j]
        Rj = Rl[j]
        for i in range(j - 1, 0, -1):
            m = blk[i]
            best = N[i + 1]
            t = mval(i, j - 1)
            if t > best:
                best = t
            if j - i > h and pm[codes[i]][cj]:
                t = mval(i + 1, j - 1) + 1
                if t > best:
                    best = t
            Di = Dl[i]
            if m == e:
                for p in range(i, j):
                    t = Di[p - i + 1] + N[p + 1]
                    if t > best:
                        best = t
                inner += j - i
            else:
                top = (m + 1) * w
                for p in range(i, top + 1):
                    t = Di[p - i + 1] + N[p + 1]
                    if t > best:
                        best = t
                inner += top - i + 1
                Li = Ll[i]
                Ei = El[i]
                for f in range(m + 1, e):
                    t = cdev[(Li[f] << w) | Rj[f]] + Ei[f] + Fl[f][j]
                    if t > best:
                        best = t
                central += e - m - 1
                inner += e - m - 1
                for p in range(ebase + 1, j):
                    t = mval(i, p) + N[p + 1]
                    if t > best:
                        best = t
                inner += j - ebase - 1
            N[i] = best
            if m == e:
                Di[j - i + 1] = best
            Gl[i][j - ebase] = best
            if j == ebase + 1:
                El[i][e] = best
            if i >= 2 and (i - 2) % w == 0:
                Fl[(i - 2) // w][j] = best
            if (i - 1) % w == 0 and (m + 1) * w < j:
                base = m * w
                code = 0
                for q in range(1, w + 1):
                    code |= (N[base + q] - N[base + q + 1]) << (q - 1)
                Rj[m] = code
        if j % w == 0:
            for i in range(1, ebase + 1):
                Gi = Gl[i]
                code = 0
                for q in range(1, w + 1):
                    code |= (Gi[q] - Gi[q - 1]) << (q - 1)
                Ll[i][e] = code

    for arr, rows in ((D, Dl), (E, El), (F, Fl), (G, Gl), (L, Ll), (R, Rl)):
        arr[...] = rows
    counters[CENTRAL] += central
    counters[INNER] += inner


def fr_traceback(codes, pm, h, w, D, F, R, i, j, counters):
    """Optimal pairs on S[i..j] from compressed tables; O and Q are reused per node."""
    n = len(codes) - 2
    blk = [0] + [(x - 1) // w for x in range(1, n + 2)]
    codes = codes.tolist()
    pm = pm.tolist()
    mval = _m_reader(w, blk, D.tolist(), F.tolist(), R.tolist())
    O = [0] * (n + 2)
    Q = [0] * (n + 2)
    pairs = []
    stack = [(i, j)]
    nodes = steps = 0
    while stack:
        a, b = stack.pop()
        nodes += 1
        if a >= b:
            continue
        c = mval(a, b)
        c1 = mval(a, b - 1)
        c2 = mval(a + 1, b)
        c3 = mval(a + 1, b - 1)
        for p in range(a, b):
            O[p] = mval(a, p)
            Q[p + 1] = mval(p + 1, b)
        steps += 4 + 2 * (b - a)
        if b - a > h and pm[codes[a]][codes[b]] and c == c3 + 1:
            pairs.append((a, b))
            stack.append((a + 1, b - 1))
        elif c == c2:
            stack.append((a + 1, b))
        elif c == c1:
            stack.append((a, b - 1))
        else:
            for p in range(a, b):
                if O[p] + Q[p + 1] == c:
                    stack.append((p + 1, b))
                    stack.append((a, p))
                    break
            else:
                raise TableFault(f"no traceback case matches M[{a},{b}]={c}")
    counters[TB_NODES] += nodes
    counters[TB_STEPS] += steps
    return pairs


# -- two-log solver ----------------------------------------------------------

def updation_entry(d1, d2, u1, u2, w, n):
    """Combine two partial staircases; returns (vector code, deviation)."""
    off = d2 - n
    prev = None
    code = 0
    for q in range(w, 0, -1):
        mask = (1 << (w - q)) - 1
        a1 = d1 + _popcount((u1 >> (q - 1)) & mask)
        a2 = off + _popcount((u2 >> (q - 1)) & mask)
        b = a1 if a1 > a2 else a2
        if prev is None:
            dev = b
        else:
            code |= (b - prev) << (q - 1)
        prev = b
    return code, dev


def updation_dense(n, w, out, counters):
    """Fill every U_p key; ``out`` is flat with index ``((d1*(2n+1)+d2) << 2w) | u1 << w | u2``."""
    size = 1 << w
    span = 2 * n + 1
    for d1 in range(n + 1):
        for d2 in range(span):
            head = (d1 * span + d2) << (2 * w)
            for u1 in range(size):
                for u2 in range(size):
                    code, dev = updation_entry(d1, d2, u1, u2, w, n)
                    out[head | (u1 << w) | u2] = (dev << w) | code
    counters[PRECOMPUTE] += (n + 1) * span * size * size * w


def partial_central(x, vs, u, w):
    """Best split inside one block for every row of a lower block.

    ``x`` is the left vector of the lower block's last row over the block,
    ``vs[c-1]`` the right vector of the lower block at column (block start + c),
    ``u`` the right vector of the current column over the block. Returns the
    row staircase (code) and its value at the last row relative to the
    split at the block's last position.
    """
    best = [0] * (w + 2)
    for sb in range(1, w + 1):
        top = None
        mask = (1 << (w - sb)) - 1
        for sc in range(1, w + 1):
            val = (_popcount(u >> sc) - _popcount(x >> sc)
                   + _popcount((vs[sc - 1] >> (sb - 1)) & mask))
            if top is None or val > top:
                top = val
        best[sb] = top
    code = 0
    for sb in range(1, w):
        code |= (best[sb] - best[sb + 1]) << (sb - 1)
    return code, best[w]


def fr2_fill(codes, pm, h, w, M, L, R, Rpc, Rpd, Cpc, Cpd, up_dense, up_cache,
             counters, check=None):
    n = len(codes) - 2
    k = n // w + 1
    span = 2 * n + 1
    codes = codes.tolist()
    pm = pm.tolist()
    Ml = M.tolist()
    Ll, Rl, Pc, Pd = (t.tolist() for t in (L, R, Rpc, Rpd))
    central = updation = inner = pre = 0
    dense = up_dense is not None

    def updation_lookup(d1, d2, u1, u2):
        nonlocal pre
        key = ((d1 * span + d2) << (2 * w)) | (u1 << w) | u2
        if dense:
            packed = int(up_dense[key])
            return packed & ((1 << w) - 1), packed >> w
        hit = up_cache.get(key)
        if hit is None:
            hit = updation_entry(d1, d2, u1, u2, w, n)
            up_cache[key] = hit
            pre += w
        return hit

    for j in range(1, n + 1):
        s = (j - 1) // w
        base = s * w
        cj = codes[j]
        for i in range(j - 1, base, -1):
            Mi = Ml[i]
            best = max(Ml[i + 1][j], Mi[j - 1])
            if j - i > h and pm[codes[i]][cj]:
                best = max(best, Ml[i + 1][j - 1] + 1)
            for p in range(i, j):
                t = Mi[p] + Ml[p + 1][j]
                if t > best:
                    best = t
            inner += j - i
            Mi[j] = best
        if s > 0:
            lo = base + 1 if base + 1 <= j - 1 else j - 1
            for g in range(s):
                a = (g + 1) * w
                vals = [0] * (w + 1)
                for q in range(1, w + 1):
                    Mi = Ml[g * w + q]
                    top = -1
                    for l in range(lo, j):
                        t = Mi[l] + Ml[l + 1][j]
                        if t > top:
                            top = t
                    vals[q] = top
                inner += w * (j - lo)
                code = 0
                for q in range(1, w):
                    code |= (vals[q] - vals[q + 1]) << (q - 1)
                Pc[j][g] = code
                Pd[j][g] = vals[w] - Ml[a][j - 1]
            for y in range(s - 1, -1, -1):
                a = (y + 1) * w
                ybase = y * w
                code = Pc[j][y]
                basev = Ml[a][j - 1] + Pd[j][y]
                if check is not None:
                    check.frontier(j, y, min(a + 1, j - 1), code, Pd[j][y])
                for i in range(a, ybase, -1):
                    q = i - ybase
                    Mi = Ml[i]
                    best = basev + _popcount((code >> (q - 1)) & ((1 << (w - q)) - 1))
                    for p in range(i, a + 1):
                        t = Mi[p] + Ml[p + 1][j]
                        if t > best:
                            best = t
                    inner += a - i + 1
                    t = max(Ml[i + 1][j], Mi[j - 1])
                    if t > best:
                        best = t
                    if j - i > h and pm[codes[i]][cj]:
                        t = Ml[i + 1][j - 1] + 1
                        if t > best:
                            best = t
                    Mi[j] = best
                u = 0
                for q in range(1, w + 1):
                    u |= (Ml[ybase + q][j] - Ml[ybase + q + 1][j]) << (q - 1)
                Rl[j][y] = u
                for g in range(y - 1, -1, -1):
                    idx = ((g * k + y) << w) | u
                    vc = int(Cpc[idx])
                    da = int(Cpd[idx])
                    central += 1
                    ga = (g + 1) * w
                    if check is not None:
                        check.central(j, g, y, vc, da)
                    d1 = Pd[j][g]
                    d2 = Ml[ga][a] + Ml[a + 1][j] - Ml[ga][j - 1] + da + n
                    nc, nd = updation_lookup(d1, d2, Pc[j][g], vc)
                    updation += 1
                    Pc[j][g] = nc
                    Pd[j][g] = nd
                    if check is not None:
                        check.frontier(j, g, ybase + 1, nc, nd)
        if j % w == 0:
            for i in range(1, base + 1):
                Mi = Ml[i]
                code = 0
                for q in range(1, w + 1):
                    code |= (Mi[base + q] - Mi[base + q - 1]) << (q - 1)
                Ll[i][s] = code
            for g in range(s):
                x = Ll[(g + 1) * w][s]
                vs = [Rl[base + c][g] for c in range(1, w + 1)]
                head = (g * k + s) << w
                for u in range(1 << w):
                    vc, da = partial_central(x, vs, u, w)
                    Cpc[head | u] = vc
                    Cpd[head | u] = da
                pre += (1 << w) * w * w

    for arr, rows in ((M, Ml), (L, Ll), (R, Rl), (Rpc, Pc), (Rpd, Pd)):
        arr[...] = rows
    counters[CENTRAL] += central
    counters[UPDATION] += updation
    counters[INNER] += inner
    counters[PRECOMPUTE] += pre


def full_traceback(M, codes, pm, h, i, j, counters):
    """Tie order matches the oracle: pair, M[i+1,j], M[i,j-1], leftmost split."""
    rows = M.tolist()
    codes = codes.tolist()
    pm = pm.tolist()
    pairs = []
    stack = [(i, j)]
    nodes = 0
    while stack:
        a, b = stack.pop()
        nodes += 1
        if a >= b:
            continue
        c = rows[a][b]
        if b - a > h and pm[codes[a]][codes[b]] and c == (rows[a + 1][b - 1] if a + 1 <= b - 1 else 0) + 1:
            pairs.append((a, b))
            stack.append((a + 1, b - 1))
        elif c == rows[a + 1][b]:
            stack.append((a + 1, b))
        elif c == rows[a][b - 1]:
            stack.append((a, b - 1))
        else:
            for p in range(a, b):
                if rows[a][p] + rows[p + 1][b] == c:
                    stack.append((p + 1, b))
                    stack.append((a, p))
                    break
            else:
                raise TableFault(f"no traceback case matches M[{a},{b}]={c}")
    counters[TB_NODES] += nodes
    return pairs


# -- packed CNF recognition --------------------------------------------------

def cyk_packed(units, rules, n, g, w, RT, CT, counters):
    """Fill row/column packed tables; returns the set of nonterminals deriving the whole input.

    ``units[i]`` is a bitmask of nonterminals deriving input character i
    (0-based). ``RT[A, i]`` holds bits p (word p // w) for A =>* s[i..p];
    ``CT[A, j]`` holds bit p for A =>* s[p+1..j].
    """
    RTl = RT.tolist()
    CTl = CT.tolist()
    rules = [tuple(r) for r in rules.tolist()]
    ops = 0
    full = (1 << w) - 1
    whole = 0
    for j in range(n):
        col = [0] * n
        for i in range(j, -1, -1):
            if i == j:
                mask = int(units[i])
            else:
                mask = 0
                lo_word = i // w
                hi_word = (j - 1) // w
                for a, b, c in rules:
                    if (mask >> a) & 1:
                        continue
                    rb = RTl[b][i]
                    cc = CTl[c][j]
                    for wd in range(lo_word, hi_word + 1):
                        word = rb[wd] & cc[wd]
                        if wd == lo_word:
                            word &= full ^ ((1 << (i % w)) - 1)
                        if wd == hi_word:
                            word &= (1 << ((j - 1) % w + 1)) - 1
                        ops += 1
                        if word:
                            mask |= 1 << a
                            break
            col[i] = mask
            bits = mask
            while bits:
                a = (bits & -bits).bit_length() - 1
                bits &= bits - 1
                RTl[a][i][j // w] |= 1 << (j % w)
                if i >= 1:
                    CTl[a][j][(i - 1) // w] |= 1 << ((i - 1) % w)
        whole = col[0]
    RT[...] = RTl
    CT[...] = CTl
    counters[INNER] += ops
    return whole
