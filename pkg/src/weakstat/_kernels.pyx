# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling loops.

Must stay bit-identical to ``_kernels_py``: each shot ``i`` draws its
uniforms from counters ``2*i`` (first stage) and ``2*i + 1`` (second stage)
of a SplitMix64 stream keyed by the seed.
"""

from libc.stdint cimport uint64_t, int64_t

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t key, uint64_t counter) nogil:
    return <double>(_mix(key + (counter + 1) * GAMMA) >> 11) * TWO_M53


cdef inline Py_ssize_t _pick(const double[::1] cdf, double u) nogil:
    cdef Py_ssize_t k = 0
    cdef Py_ssize_t last = cdf.shape[0] - 1
    while k < last and not (u < cdf[k]):
        k += 1
    return k


def stream_key(uint64_t seed):
    return _mix(seed + GAMMA)


def uniforms(uint64_t key, uint64_t start, uint64_t stop, uint64_t word):
    import numpy as np
    out = np.empty(stop - start, dtype=np.float64)
    cdef double[::1] o = out
    cdef uint64_t i
    for i in range(start, stop):
        o[i - start] = _uniform(key, 2 * i + word)
    return out


def count_categorical(uint64_t key, uint64_t start, uint64_t stop,
                      const double[::1] cdf, int64_t[::1] counts):
    """Add the outcomes of shots ``start..stop-1`` into ``counts``."""
    cdef uint64_t i
    with nogil:
        for i in range(start, stop):
            counts[_pick(cdf, _uniform(key, 2 * i))] += 1


def count_two_stage(uint64_t key, uint64_t start, uint64_t stop,
                    const double[::1] cdf_first, const double[:, ::1] cdf_second,
                    int64_t[:, ::1] counts):
    """Two-stage draw: first outcome from ``cdf_first``, second from row ``m``."""
    cdef uint64_t i
    cdef Py_ssize_t m, f, k
    cdef Py_ssize_t last = cdf_second.shape[1] - 1
    cdef double u
    with nogil:
        for i in range(start, stop):
            m = _pick(cdf_first, _uniform(key, 2 * i))
            u = _uniform(key, 2 * i + 1)
            f = 0
            while f < last and not (u < cdf_second[m, f]):
                f += 1
            counts[m, f] += 1
