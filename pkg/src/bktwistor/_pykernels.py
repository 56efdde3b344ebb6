"""Pure-Python versions of the compiled kernels (used when the extension is absent)."""
import numpy as np


def normalize_positions(seq):
    s = list(seq)
    sign = 1
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(s) - 1:
            if s[i] == s[i + 1]:
                del s[i:i + 2]
                sign = -sign
                changed = True
            elif s[i] > s[i + 1]:
                s[i], s[i + 1] = s[i + 1], s[i]
                sign = -sign
                changed = True
                i += 1
            else:
                i += 1
    return sign, tuple(s)


def _popcount(arr):
    arr = arr.copy()
    count = np.zeros_like(arr)
    while np.any(arr):
        count += arr & 1
        arr >>= 1
    return count


def plucker_max_residual(z, mask_index, lo_masks, hi_masks, n_pos):
    z = np.asarray(z)
    if len(lo_masks) == 0 or len(hi_masks) == 0:
        return 0.0
    lo = np.asarray(lo_masks, dtype=np.int64)[:, None]
    best = 0.0
    # chunk over the (k+1)-subsets to bound memory
    step = max(1, 200000 // max(1, len(lo_masks)))
    for start in range(0, len(hi_masks), step):
        hi = np.asarray(hi_masks[start:start + step], dtype=np.int64)[None, :]
        acc = np.zeros((lo.shape[0], hi.shape[1]), dtype=complex)
        rank = np.zeros_like(hi)
        for p in range(n_pos):
            bit = np.int64(1) << p
            in_hi = (hi & bit) != 0
            usable = in_hi & ((lo & bit) == 0)
            above = _popcount(lo >> (p + 1)) & 1
            sgn = np.where(above == 1, -1, 1) * np.where(rank & 1, -1, 1)
            idx_a = np.where(usable, mask_index[lo | bit], 0)
            idx_b = np.where(usable, mask_index[hi & ~bit], 0)
            acc += np.where(usable, sgn * z[idx_a] * z[idx_b], 0)
            rank = rank + in_hi
        best = max(best, float(np.max(np.abs(acc))))
    return best
