"""Pure-numpy sampling loops, bit-identical to the compiled ``_kernels``.

Shots are processed in blocks; within a block every counter is hashed at
once with wrapping ``uint64`` arithmetic.
"""

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
TWO_M53 = 1.0 / 9007199254740992.0
BLOCK = 1 << 20

_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * MIX1
    z = (z ^ (z >> _S27)) * MIX2
    return z ^ (z >> _S31)


def stream_key(seed: int) -> int:
    with np.errstate(over="ignore"):
        z = np.array([seed], dtype=np.uint64) + np.array([GAMMA], dtype=np.uint64)
        return int(_mix(z)[0])


def uniforms(key: int, start: int, stop: int, word: int) -> np.ndarray:
    counters = 2 * np.arange(start, stop, dtype=np.uint64) + np.uint64(word)
    with np.errstate(over="ignore"):
        z = np.uint64(key) + (counters + np.uint64(1)) * GAMMA
        return (_mix(z) >> _S11).astype(np.float64) * TWO_M53


def _pick(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    # first k with u < cdf[k], clamped to the last outcome
    return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)


def count_categorical(key, start, stop, cdf, counts):
    for lo in range(start, stop, BLOCK):
        hi = min(lo + BLOCK, stop)
        idx = _pick(cdf, uniforms(key, lo, hi, 0))
        counts += np.bincount(idx, minlength=counts.size).astype(counts.dtype)


def count_two_stage(key, start, stop, cdf_first, cdf_second, counts):
    n_m, n_f = cdf_second.shape
    for lo in range(start, stop, BLOCK):
        hi = min(lo + BLOCK, stop)
        m = _pick(cdf_first, uniforms(key, lo, hi, 0))
        u = uniforms(key, lo, hi, 1)
        # per-row inverse CDF: count entries of row m that are <= u
        f = np.sum(cdf_second[m] <= u[:, None], axis=1)
        f = np.minimum(f, n_f - 1)
        flat = np.bincount(m * n_f + f, minlength=n_m * n_f)
        counts += flat.reshape(n_m, n_f).astype(counts.dtype)
