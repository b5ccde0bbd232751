"""Deterministic chunked Monte Carlo with median-of-means error bars.

Work is cut into fixed-size chunks inside fixed blocks. Every chunk draws its
uniforms from its own counter-based stream (Philox keyed by the seed, counter
offset by the chunk index) or, for quasi Monte Carlo, from a scrambled Sobol
sequence owned by its block. Chunk results are reduced in chunk order, so the
estimate does not depend on how many threads ran the chunks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.stats import qmc

from .errors import InputError

CHUNK = 1 << 14
METHODS = ("monte_carlo", "quasi_mc", "quadrature")


@dataclass(frozen=True)
class SamplerConfig:
    method: str = "monte_carlo"
    samples: int = 1_000_000
    seed: int = 0
    blocks: int = 15
    reject_delta: float = 1e-9
    workers: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}")
        if int(self.samples) < 1:
            raise InputError("samples must be positive")
        if int(self.blocks) < 2:
            raise InputError("at least two blocks are needed for an error bar")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InputError("seed must fit in 64 bits")
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "blocks", int(self.blocks))
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("workers")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SamplerConfig:
        known = {"method", "samples", "seed", "blocks", "reject_delta"}
        extra = set(d) - known
        if extra:
            raise InputError(f"unknown sampler-config keys: {sorted(extra)}")
        return cls(**d)

    def with_(self, **kw) -> SamplerConfig:
        return replace(self, **kw)


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    std_error: float
    samples: int
    seed: int
    method: str

    def __post_init__(self):
        if self.std_error < 0 or self.samples < 1:
            raise ValueError("std_error must be nonnegative and samples positive")

    def to_dict(self) -> dict:
        return asdict(self)


def worker_count(cfg: SamplerConfig) -> int:
    if cfg.workers is not None:
        return max(1, cfg.workers)
    env = os.environ.get("CSINT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError("CSINT_THREADS must be an integer") from None
    return os.cpu_count() or 1


def stream(seed: int, index: int, lane: int = 0) -> np.random.Generator:
    """Independent generator for chunk ``index``; ``lane`` separates uses."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, lane, index]))


def _tasks(samples: int, blocks: int):
    tasks = []
    for b in range(blocks):
        lo = samples * b // blocks
        hi = samples * (b + 1) // blocks
        for start in range(lo, hi, CHUNK):
            tasks.append((b, start - lo, min(CHUNK, hi - start)))
    return tasks


def median_of_means(block_means) -> tuple[float, float]:
    m = np.asarray(block_means, dtype=float)
    value = float(np.median(m))
    err = float(math.sqrt(math.pi / 2) * m.std(ddof=1) / math.sqrt(len(m)))
    return value, err


def estimate(integrand, dim: int, cfg: SamplerConfig) -> IntegralEstimate:
    """Median-of-means estimate of the mean of ``integrand`` over [0, 1)^dim.

    ``integrand`` maps an (n, dim) array of uniforms to n weights.
    """
    if cfg.method == "quadrature":
        raise InputError("quadrature is not a sampling method")
    tasks = _tasks(cfg.samples, cfg.blocks)
    qmc_seeds = [int(stream(cfg.seed, b, lane=1).integers(2 ** 63)) for b in range(cfg.blocks)]

    def run(k):
        block, offset, n = tasks[k]
        if cfg.method == "monte_carlo":
            u = stream(cfg.seed, k).random((n, dim))
        else:
            eng = qmc.Sobol(dim, scramble=True, seed=qmc_seeds[block])
            if offset:
                eng.fast_forward(offset)
            # draw a power of two to keep scipy's balance check quiet, then trim
            u = eng.random(1 << (n - 1).bit_length())[:n]
        w = np.asarray(integrand(u), dtype=float)
        return block, float(w.sum()), n

    sums = np.zeros(cfg.blocks)
    counts = np.zeros(cfg.blocks)
    workers = worker_count(cfg)
    if workers == 1 or len(tasks) == 1:
        results = map(run, range(len(tasks)))
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        results = pool.map(run, range(len(tasks)))
    try:
        for block, s, n in results:
            sums[block] += s
            counts[block] += n
    finally:
        if workers != 1 and len(tasks) != 1:
            pool.shutdown()
    value, err = median_of_means(sums / counts)
    return IntegralEstimate(value, err, cfg.samples, cfg.seed, cfg.method)


def combine(terms, const: float = 0.0, *, samples: int, seed: int, method: str) -> IntegralEstimate:
    """Linear combination sum c_i E_i + const with root-sum-square error."""
    value = const + sum(c * e.value for c, e in terms)
    err = math.sqrt(sum((c * e.std_error) ** 2 for c, e in terms))
    return IntegralEstimate(float(value), float(err), samples, seed, method)
