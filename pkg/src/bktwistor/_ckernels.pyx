# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: multi-index sign normalization and Plücker relations."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


def normalize_positions(seq):
    """Return ``(sign, reduced)`` for a sequence of integer positions.

    Adjacent equal symbols contract with sign -1, adjacent out-of-order
    symbols swap with sign -1.
    """
    cdef Py_ssize_t n = len(seq)
    cdef long *buf = <long *> malloc((n + 1) * sizeof(long))
    cdef Py_ssize_t i, j, length = n
    cdef int sign = 1
    cdef bint changed = True
    cdef long tmp
    if buf == NULL:
        raise MemoryError()
    try:
        for i in range(n):
            buf[i] = seq[i]
        while changed:
            changed = False
            i = 0
            while i < length - 1:
                if buf[i] == buf[i + 1]:
                    for j in range(i, length - 2):
                        buf[j] = buf[j + 2]
                    length -= 2
                    sign = -sign
                    changed = True
                elif buf[i] > buf[i + 1]:
                    tmp = buf[i]
                    buf[i] = buf[i + 1]
                    buf[i + 1] = tmp
                    sign = -sign
                    changed = True
                    i += 1
                else:
                    i += 1
        return sign, tuple([buf[i] for i in range(length)])
    finally:
        free(buf)


cdef inline int _popcount(long long x):
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


def plucker_max_residual(cnp.complex128_t[::1] z,
                         cnp.int64_t[::1] mask_index,
                         cnp.int64_t[::1] lo_masks,
                         cnp.int64_t[::1] hi_masks,
                         int n_pos):
    """Max modulus over all quadratic Plücker relations of a degree-k tensor.

    ``lo_masks`` enumerate the (k-1)-subsets, ``hi_masks`` the (k+1)-subsets,
    ``mask_index`` maps a k-subset bitmask to its slot in ``z``.
    """
    cdef Py_ssize_t a, b
    cdef int r, p, sgn
    cdef long long lo, hi, bit
    cdef double complex acc
    cdef double best = 0.0, mod
    for a in range(lo_masks.shape[0]):
        lo = lo_masks[a]
        for b in range(hi_masks.shape[0]):
            hi = hi_masks[b]
            acc = 0
            r = 0
            for p in range(n_pos):
                bit = (<long long> 1) << p
                if not (hi & bit):
                    continue
                if not (lo & bit):
                    # e_lo ^ e_p: move e_p left past members of lo above p
                    sgn = -1 if (_popcount(lo >> (p + 1)) & 1) else 1
                    if r & 1:
                        sgn = -sgn
                    acc = acc + sgn * z[mask_index[lo | bit]] * z[mask_index[hi & ~bit]]
                r += 1
            mod = abs(acc)
            if mod > best:
                best = mod
    return best
