"""Numba kernels for polar encoding and successive-cancellation list decoding.

The decoder is an LLR-based list decoder over the natural-order (lower
triangular) polar transform. Per-level LLR/partial-sum arrays are pooled and
lazily copied on write, so a decode costs O(L N log N) regardless of how the
list forks. The kernel body is deliberately monolithic: factoring the
copy-on-write helpers out of the hot per-bit loop costs an order of magnitude
in throughput under the JIT.
"""

import numpy as np
from numba import njit

# Stands in for +inf on shortened positions; finite so that g-steps can never
# produce NaN through inf - inf.
LARGE_LLR = 1e30


@njit(cache=True)
def polar_transform_bits(u):
    """x = u F^{(x)n} over GF(2), natural bit order. Involutive."""
    n = u.shape[0]
    x = u.copy()
    h = 1
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                x[j] ^= x[j + h]
        h <<= 1
    return x


@njit(cache=True)
def crc_remainder(bits, poly_bits):
    """Remainder of bits * x^width divided by the generator polynomial.

    poly_bits holds the generator MSB-first including the leading 1, so the
    CRC width is len(poly_bits) - 1. Zero initialization, no reflection.
    """
    width = poly_bits.shape[0] - 1
    work = np.zeros(bits.shape[0] + width, np.uint8)
    work[: bits.shape[0]] = bits
    for i in range(bits.shape[0]):
        if work[i]:
            for j in range(width + 1):
                work[i + j] ^= poly_bits[j]
    return work[bits.shape[0]:]


@njit(cache=True, fastmath=True)
def scl_decode_kernel(llr, frozen, L):  # noqa: C901 - one hot loop on purpose
    """List decode. Returns (codewords, metrics, count): the surviving paths'
    codewords (row per path) ordered by increasing path metric."""
    N = llr.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    n_lv = n + 1

    # Pool layout: level lam holds L arrays of psz[lam] LLRs (P) and
    # 2*psz[lam] partial-sum bits (C, phase-interleaved).
    psz = np.empty(n_lv, np.int64)
    pbase = np.empty(n_lv, np.int64)
    cbase = np.empty(n_lv, np.int64)
    off_p = 0
    off_c = 0
    for lam in range(n_lv):
        psz[lam] = N >> lam
        pbase[lam] = off_p
        cbase[lam] = off_c
        off_p += L * psz[lam]
        off_c += L * 2 * psz[lam]
    P = np.zeros(off_p, np.float64)
    C = np.zeros(off_c, np.uint8)

    p2a = np.zeros((n_lv, L), np.int64)      # path -> array slot per level
    ref = np.zeros((n_lv, L), np.int64)      # slot reference counts
    fa = np.empty((n_lv, L), np.int64)       # free slot stacks
    ft = np.empty(n_lv, np.int64)
    for lam in range(n_lv):
        for s in range(L):
            fa[lam, s] = L - 1 - s
        ft[lam] = L
    active = np.zeros(L, np.uint8)
    fp = np.empty(L, np.int64)               # free path stack
    for l in range(L):
        fp[l] = L - 1 - l
    fpt = L
    PM = np.full(L, np.inf, np.float64)

    # activate path 0 and load channel LLRs into its root slot
    fpt -= 1
    l0 = fp[fpt]
    active[l0] = 1
    PM[l0] = 0.0
    for lam in range(n_lv):
        ft[lam] -= 1
        s = fa[lam, ft[lam]]
        p2a[lam, l0] = s
        ref[lam, s] = 1
    s0 = p2a[0, l0]
    P[pbase[0] + s0 * N: pbase[0] + (s0 + 1) * N] = llr

    pm2 = np.empty(2 * L, np.float64)
    sel = np.empty(2 * L, np.uint8)
    was = np.empty(L, np.uint8)

    for phi in range(N):
        # ---- recompute LLRs down to the leaf for every active path --------
        lam_top = n
        while lam_top > 1 and ((phi >> (n - lam_top)) & 1) == 0:
            lam_top -= 1
        for l in range(L):
            if active[l] == 0:
                continue
            for lam in range(lam_top, n + 1):
                m = psz[lam]
                # copy-on-write for the (P, C) pair written at this level
                s = p2a[lam, l]
                if ref[lam, s] > 1:
                    ft[lam] -= 1
                    s2 = fa[lam, ft[lam]]
                    po0 = pbase[lam]
                    co0 = cbase[lam]
                    P[po0 + s2 * m: po0 + (s2 + 1) * m] = P[po0 + s * m: po0 + (s + 1) * m]
                    C[co0 + s2 * 2 * m: co0 + (s2 + 1) * 2 * m] = \
                        C[co0 + s * 2 * m: co0 + (s + 1) * 2 * m]
                    ref[lam, s] -= 1
                    ref[lam, s2] = 1
                    p2a[lam, l] = s2
                    s = s2
                po = pbase[lam] + s * m
                ppo = pbase[lam - 1] + p2a[lam - 1, l] * 2 * m
                if ((phi >> (n - lam)) & 1) == 0:
                    for i in range(m):
                        a = P[ppo + i]
                        b = P[ppo + i + m]
                        aa = a if a >= 0.0 else -a
                        ab = b if b >= 0.0 else -b
                        mn = aa if aa < ab else ab
                        P[po + i] = mn if (a >= 0.0) == (b >= 0.0) else -mn
                else:
                    co = cbase[lam] + s * 2 * m
                    for i in range(m):
                        a = P[ppo + i]
                        b = P[ppo + i + m]
                        P[po + i] = b - a if C[co + 2 * i] == 1 else b + a

        # ---- decide / fork at the leaf -------------------------------------
        if frozen[phi]:
            for l in range(L):
                if active[l] == 0:
                    continue
                s = p2a[n, l]
                if ref[n, s] > 1:
                    ft[n] -= 1
                    s2 = fa[n, ft[n]]
                    po0 = pbase[n]
                    co0 = cbase[n]
                    P[po0 + s2] = P[po0 + s]
                    C[co0 + s2 * 2] = C[co0 + s * 2]
                    C[co0 + s2 * 2 + 1] = C[co0 + s * 2 + 1]
                    ref[n, s] -= 1
                    ref[n, s2] = 1
                    p2a[n, l] = s2
                    s = s2
                v = P[pbase[n] + s]
                if v < 0.0:
                    PM[l] -= v
                C[cbase[n] + s * 2 + (phi & 1)] = 0
        else:
            n_act = 0
            for l in range(L):
                pm2[2 * l] = np.inf
                pm2[2 * l + 1] = np.inf
                if active[l]:
                    n_act += 1
                    v = P[pbase[n] + p2a[n, l]]
                    pen = v if v >= 0.0 else -v
                    if v >= 0.0:
                        pm2[2 * l] = PM[l]
                        pm2[2 * l + 1] = PM[l] + pen
                    else:
                        pm2[2 * l] = PM[l] + pen
                        pm2[2 * l + 1] = PM[l]
            keep = 2 * n_act
            if keep > L:
                keep = L
            for j in range(2 * L):
                sel[j] = 0
            for _k in range(keep):
                best = -1
                bv = np.inf
                for j in range(2 * L):
                    if sel[j] == 0 and pm2[j] < bv:
                        bv = pm2[j]
                        best = j
                if best < 0:
                    break
                sel[best] = 1
            # drop paths with no surviving continuation
            for l in range(L):
                if active[l] and sel[2 * l] == 0 and sel[2 * l + 1] == 0:
                    active[l] = 0
                    PM[l] = np.inf
                    fp[fpt] = l
                    fpt += 1
                    for lam in range(n_lv):
                        s = p2a[lam, l]
                        ref[lam, s] -= 1
                        if ref[lam, s] == 0:
                            fa[lam, ft[lam]] = s
                            ft[lam] += 1
            for l in range(L):
                was[l] = active[l]
            for l in range(L):
                if was[l] == 0:
                    continue
                keep0 = sel[2 * l]
                keep1 = sel[2 * l + 1]
                l_one = l
                if keep0 and keep1:
                    # clone: the copy itself is lazy, only refcounts move
                    fpt -= 1
                    l2 = fp[fpt]
                    active[l2] = 1
                    for lam in range(n_lv):
                        s = p2a[lam, l]
                        p2a[lam, l2] = s
                        ref[lam, s] += 1
                    # bit 0 continues on l
                    s = p2a[n, l]
                    if ref[n, s] > 1:
                        ft[n] -= 1
                        s2 = fa[n, ft[n]]
                        po0 = pbase[n]
                        co0 = cbase[n]
                        P[po0 + s2] = P[po0 + s]
                        C[co0 + s2 * 2] = C[co0 + s * 2]
                        C[co0 + s2 * 2 + 1] = C[co0 + s * 2 + 1]
                        ref[n, s] -= 1
                        ref[n, s2] = 1
                        p2a[n, l] = s2
                        s = s2
                    C[cbase[n] + s * 2 + (phi & 1)] = 0
                    PM[l] = pm2[2 * l]
                    l_one = l2
                    PM[l2] = pm2[2 * l + 1]
                elif keep0:
                    s = p2a[n, l]
                    if ref[n, s] > 1:
                        ft[n] -= 1
                        s2 = fa[n, ft[n]]
                        po0 = pbase[n]
                        co0 = cbase[n]
                        P[po0 + s2] = P[po0 + s]
                        C[co0 + s2 * 2] = C[co0 + s * 2]
                        C[co0 + s2 * 2 + 1] = C[co0 + s * 2 + 1]
                        ref[n, s] -= 1
                        ref[n, s2] = 1
                        p2a[n, l] = s2
                        s = s2
                    C[cbase[n] + s * 2 + (phi & 1)] = 0
                    PM[l] = pm2[2 * l]
                    l_one = -1
                else:
                    PM[l_one] = pm2[2 * l + 1]
                if l_one >= 0:
                    s = p2a[n, l_one]
                    if ref[n, s] > 1:
                        ft[n] -= 1
                        s2 = fa[n, ft[n]]
                        po0 = pbase[n]
                        co0 = cbase[n]
                        P[po0 + s2] = P[po0 + s]
                        C[co0 + s2 * 2] = C[co0 + s * 2]
                        C[co0 + s2 * 2 + 1] = C[co0 + s * 2 + 1]
                        ref[n, s] -= 1
                        ref[n, s2] = 1
                        p2a[n, l_one] = s2
                        s = s2
                    C[cbase[n] + s * 2 + (phi & 1)] = 1

        # ---- propagate partial sums ----------------------------------------
        if phi & 1:
            for l in range(L):
                if active[l] == 0:
                    continue
                lam = n
                ph = phi
                while (ph & 1) == 1 and lam >= 1:
                    psi = ph >> 1
                    m = psz[lam]
                    sc = p2a[lam, l]
                    s = p2a[lam - 1, l]
                    if ref[lam - 1, s] > 1:
                        ft[lam - 1] -= 1
                        s2 = fa[lam - 1, ft[lam - 1]]
                        m2 = psz[lam - 1]
                        po0 = pbase[lam - 1]
                        co0 = cbase[lam - 1]
                        P[po0 + s2 * m2: po0 + (s2 + 1) * m2] = \
                            P[po0 + s * m2: po0 + (s + 1) * m2]
                        C[co0 + s2 * 2 * m2: co0 + (s2 + 1) * 2 * m2] = \
                            C[co0 + s * 2 * m2: co0 + (s + 1) * 2 * m2]
                        ref[lam - 1, s] -= 1
                        ref[lam - 1, s2] = 1
                        p2a[lam - 1, l] = s2
                        s = s2
                    co = cbase[lam] + sc * 2 * m
                    cpo = cbase[lam - 1] + s * 4 * m
                    ps = psi & 1
                    for i in range(m):
                        ul = C[co + 2 * i]
                        ur = C[co + 2 * i + 1]
                        C[cpo + 2 * i + ps] = ul ^ ur
                        C[cpo + 2 * (i + m) + ps] = ur
                    ph = psi
                    lam -= 1

    # ---- emit surviving paths ordered by metric ----------------------------
    count = 0
    for l in range(L):
        if active[l]:
            count += 1
    out_x = np.zeros((count, N), np.uint8)
    out_pm = np.empty(count, np.float64)
    taken = np.zeros(L, np.uint8)
    for r in range(count):
        best = -1
        bv = np.inf
        for l in range(L):
            if active[l] and taken[l] == 0 and PM[l] < bv:
                bv = PM[l]
                best = l
        taken[best] = 1
        out_pm[r] = PM[best]
        sarr = p2a[0, best]
        co = cbase[0] + sarr * 2 * N
        for b in range(N):
            out_x[r, b] = C[co + 2 * b]
    return out_x, out_pm, count
