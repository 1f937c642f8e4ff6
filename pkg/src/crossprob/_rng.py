"""Counter-based random streams and deterministic parallel reduction.

Every stochastic operation draws from Philox streams keyed by
(seed, operation id, chunk index, block index, kind).  Chunks are fixed-size
groups of paths and blocks fixed-size groups of steps, so the stream layout
is a pure function of the seed and the workload shape: results are
bitwise-identical for any thread count, and partial results are merged in
chunk order with exact (fsum) reduction.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

PHILOX_NAME = "philox4x64-10"
CHUNK_PATHS = 1 << 14  # paths per stream chunk
BLOCK_STEPS = 1 << 10  # steps per noise block

OP_SURVIVAL = 0
OP_GAMMA = 1
OP_BRIDGE = 2
OP_RADIAL = 3
OP_PWL = 4
OP_QUICK_EXIT = 5
OP_CONE_AVOID = 6

_MASK64 = (1 << 64) - 1


def stream(seed, op, chunk=0, block=0, kind=0):
    """Philox generator for one (operation, chunk, block, kind) lane."""
    lane = ((op & 0xFF) << 56) | ((chunk & 0xFFFFFFFF) << 24) | ((block & 0x7FFFF) << 5) | (kind & 0xF)
    return np.random.Generator(np.random.Philox(key=[int(seed) & _MASK64, lane & _MASK64]))


def rng_identity():
    """Identity string recorded in every report for reproducibility."""
    return f"{PHILOX_NAME};chunk={CHUNK_PATHS};block={BLOCK_STEPS}"


def resolve_threads(threads=None):
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("CROSSPROB_THREADS", "")
    return max(1, int(env)) if env.isdigit() and env else 1


def chunk_sizes(n_paths, chunk_paths=CHUNK_PATHS):
    """Sizes of the per-stream path chunks, fixed regardless of threading."""
    full, rem = divmod(int(n_paths), chunk_paths)
    sizes = [chunk_paths] * full
    if rem:
        sizes.append(rem)
    return sizes


def thread_map(fn, n_jobs, threads):
    """Run fn(0..n_jobs-1), returning results in job order."""
    if threads <= 1 or n_jobs <= 1:
        return [fn(i) for i in range(n_jobs)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_jobs)))


def merge_mean_stderr(sums, sq_sums, n):
    """Exact-order-independent mean and stderr from per-chunk partials."""
    total = math.fsum(sums)
    total_sq = math.fsum(sq_sums)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    stderr = math.sqrt(var / n)
    return mean, stderr
