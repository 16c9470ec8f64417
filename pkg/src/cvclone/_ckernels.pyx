# cython: boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled Cascade kernel; mirrors ``_kernels_py.cascade_run`` exactly."""

import numpy as np

cimport numpy as cnp
from libcpp.vector cimport vector

cnp.import_array()


cdef Py_ssize_t _tree_width(Py_ssize_t k):
    cdef Py_ssize_t w = 2
    while w < 2 * k:
        w *= 2
    return 2 * w


cdef struct PassInfo:
    Py_ssize_t k
    Py_ssize_t width
    Py_ssize_t known_off
    Py_ssize_t par_off


cdef Py_ssize_t _binary(
    const unsigned char[::1] a,
    unsigned char[::1] b,
    const long long[:, ::1] perm,
    signed char[::1] known,
    PassInfo info,
    Py_ssize_t j,
    Py_ssize_t blk,
    Py_ssize_t n,
    long long* leak,
) noexcept nogil:
    cdef Py_ssize_t base = info.known_off + blk * info.width
    cdef Py_ssize_t lo = blk * info.k
    cdef Py_ssize_t hi = lo + info.k
    cdef Py_ssize_t node = 1, mid, left, right, t
    cdef int pa, pb
    if hi > n:
        hi = n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        left = 2 * node
        right = left + 1
        pb = 0
        for t in range(lo, mid):
            pb ^= b[perm[j, t]]
        pa = known[base + left]
        if pa < 0:
            if known[base + right] >= 0:
                pa = known[base + node] ^ known[base + right]
            else:
                leak[0] += 1
                pa = 0
                for t in range(lo, mid):
                    pa ^= a[perm[j, t]]
            known[base + left] = pa
        if known[base + right] < 0:
            known[base + right] = known[base + node] ^ pa
        if pa != pb:
            hi = mid
            node = left
        else:
            lo = mid
            node = right
    return perm[j, lo]


def cascade_run(alice, bob, perms, block_sizes):
    """Cascade passes over ``bob`` (uint8, modified in place); returns parities disclosed."""
    cdef const unsigned char[::1] a = np.ascontiguousarray(alice, dtype=np.uint8)
    cdef unsigned char[::1] b = bob
    cdef const long long[:, ::1] perm = np.ascontiguousarray(perms, dtype=np.int64)
    cdef long long[::1] ks = np.ascontiguousarray(block_sizes, dtype=np.int64)
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t passes = ks.shape[0]
    cdef Py_ssize_t i, j, jj, t, blk, bb, k, nb, e, total_known = 0, total_par = 0
    cdef long long leak = 0
    cdef vector[PassInfo] info
    cdef PassInfo pi
    cdef vector[Py_ssize_t] stack

    if b.shape[0] != n or perm.shape[0] != passes or (passes and perm.shape[1] != n):
        raise ValueError("inconsistent shapes")

    for i in range(passes):
        pi.k = ks[i]
        pi.width = _tree_width(pi.k)
        nb = (n + pi.k - 1) // pi.k
        pi.known_off = total_known
        pi.par_off = total_par
        total_known += nb * pi.width
        total_par += nb
        info.push_back(pi)

    pos_arr = np.empty((passes, n), dtype=np.int64)
    cdef long long[:, ::1] pos = pos_arr
    known_arr = np.full(total_known, -1, dtype=np.int8)
    cdef signed char[::1] known = known_arr
    par_arr = np.zeros(total_par, dtype=np.uint8)
    cdef unsigned char[::1] bob_par = par_arr
    ap_arr = np.zeros(total_par, dtype=np.uint8)
    cdef unsigned char[::1] ap = ap_arr

    with nogil:
        for j in range(passes):
            for t in range(n):
                pos[j, perm[j, t]] = t

        for i in range(passes):
            pi = info[i]
            k = pi.k
            nb = (n + k - 1) // k
            for t in range(n):
                e = perm[i, t]
                ap[pi.par_off + t // k] ^= a[e]
                bob_par[pi.par_off + t // k] ^= b[e]
            for blk in range(nb):
                known[pi.known_off + blk * pi.width + 1] = ap[pi.par_off + blk]
            leak += nb

            for blk in range(nb):
                if known[pi.known_off + blk * pi.width + 1] == bob_par[pi.par_off + blk]:
                    continue
                stack.clear()
                stack.push_back(i)
                stack.push_back(blk)
                while stack.size():
                    bb = stack.back()
                    stack.pop_back()
                    j = stack.back()
                    stack.pop_back()
                    if known[info[j].known_off + bb * info[j].width + 1] == bob_par[info[j].par_off + bb]:
                        continue
                    e = _binary(a, b, perm, known, info[j], j, bb, n, &leak)
                    b[e] ^= 1
                    for jj in range(i + 1):
                        t = pos[jj, e] // info[jj].k
                        bob_par[info[jj].par_off + t] ^= 1
                        if jj != j and known[info[jj].known_off + t * info[jj].width + 1] != bob_par[info[jj].par_off + t]:
                            stack.push_back(jj)
                            stack.push_back(t)
    return int(leak)
