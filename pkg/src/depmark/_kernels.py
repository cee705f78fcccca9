"""Compiled inner loops."""
import numpy as np
from numba import njit


@njit(cache=True)
def count_inversions(values):
    """Number of pairs i < j with values[i] > values[j] (bottom-up merge sort)."""
    n = values.shape[0]
    a = values.copy()
    buf = np.empty_like(a)
    swaps = 0
    width = 1
    while width < n:
        lo = 0
        while lo < n - width:
            mid = lo + width
            hi = min(lo + 2 * width, n)
            i = lo
            j = mid
            k = lo
            while i < mid and j < hi:
                if a[j] < a[i]:
                    buf[k] = a[j]
                    swaps += mid - i
                    j += 1
                else:
                    buf[k] = a[i]
                    i += 1
                k += 1
            while i < mid:
                buf[k] = a[i]
                i += 1
                k += 1
            while j < hi:
                buf[k] = a[j]
                j += 1
                k += 1
            for t in range(lo, hi):
                a[t] = buf[t]
            lo += 2 * width
        width *= 2
    return swaps
