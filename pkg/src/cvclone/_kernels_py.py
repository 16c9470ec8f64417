"""Pure-Python kernels; used when the compiled extension is unavailable.

Must stay bit-for-bit equivalent to ``_ckernels.pyx``.
"""

from __future__ import annotations

import numpy as np


def tree_width(k: int) -> int:
    """Heap slots needed for the bisection tree of a block of length k."""
    w = 2
    while w < 2 * k:
        w *= 2
    return 2 * w


def cascade_run(alice, bob, perms, block_sizes) -> int:
    """Cascade passes over ``bob`` in place; returns parities disclosed.

    ``perms[j]`` is the bit order of pass j and ``block_sizes[j]`` its block
    length.  Every block parity of a pass is disclosed when the pass starts;
    each bisection step of BINARY discloses the parity of the left half unless
    that sub-block's parity was already disclosed (or follows from disclosed
    ones), in which case it is reused.
    """
    a = [int(v) for v in alice]
    b = [int(v) for v in bob]
    n = len(a)
    passes = len(block_sizes)
    perm = [[int(v) for v in row] for row in perms]
    ks = [int(v) for v in block_sizes]
    pos = []
    for j in range(passes):
        inv = [0] * n
        for idx, bit in enumerate(perm[j]):
            inv[bit] = idx
        pos.append(inv)

    # known[j][blk * width + node]: Alice's parity of a bisection node, -1 if unknown.
    known: list[list[int]] = []
    widths: list[int] = []
    bob_par: list[list[int]] = []
    leak = 0

    def binary(j: int, blk: int) -> int:
        nonlocal leak
        order = perm[j]
        kn = known[j]
        base = blk * widths[j]
        lo = blk * ks[j]
        hi = min(n, lo + ks[j])
        node = 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            left, right = 2 * node, 2 * node + 1
            pb = 0
            for t in range(lo, mid):
                pb ^= b[order[t]]
            pa = kn[base + left]
            if pa < 0:
                if kn[base + right] >= 0:
                    pa = kn[base + node] ^ kn[base + right]
                else:
                    leak += 1
                    pa = 0
                    for t in range(lo, mid):
                        pa ^= a[order[t]]
                kn[base + left] = pa
            if kn[base + right] < 0:
                kn[base + right] = kn[base + node] ^ pa
            if pa != pb:
                hi, node = mid, left
            else:
                lo, node = mid, right
        return order[lo]

    for i in range(passes):
        k = ks[i]
        nb = (n + k - 1) // k
        w = tree_width(k)
        kn = [-1] * (nb * w)
        bp = [0] * nb
        order = perm[i]
        ap = [0] * nb
        for t in range(n):
            q = order[t]
            ap[t // k] ^= a[q]
            bp[t // k] ^= b[q]
        for blk in range(nb):
            kn[blk * w + 1] = ap[blk]
        known.append(kn)
        widths.append(w)
        bob_par.append(bp)
        leak += nb

        for blk in range(nb):
            if kn[blk * w + 1] == bp[blk]:
                continue
            stack = [(i, blk)]
            while stack:
                j, bj = stack.pop()
                if known[j][bj * widths[j] + 1] == bob_par[j][bj]:
                    continue
                e = binary(j, bj)
                b[e] ^= 1
                for jj in range(i + 1):
                    bb = pos[jj][e] // ks[jj]
                    bob_par[jj][bb] ^= 1
                    if jj != j and known[jj][bb * widths[jj] + 1] != bob_par[jj][bb]:
                        stack.append((jj, bb))

    bob[:] = np.asarray(b, dtype=bob.dtype)
    return leak
