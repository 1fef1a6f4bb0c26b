"""Covariance algebra, Gaussian sampling and entropy in bits.

Everything here is pure: matrices are immutable once built and randomness
flows through explicit :class:`RngStream` values, so any computation can be
repeated (or farmed out to another process) with bit-identical results.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

LOG2_2PIE = math.log2(2.0 * math.pi * math.e)

# Temperatures at or below this are treated as the greedy limit.
GREEDY_TEMPERATURE = 1e-8


class FactorizationError(ValueError):
    """A covariance matrix could not be Cholesky-factorized."""


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int = 1

    def __post_init__(self):
        if int(self.width) < 1 or int(self.height) < 1:
            raise ValueError(f"grid dimensions must be >= 1, got {self.width}x{self.height}")

    @property
    def n(self) -> int:
        return self.width * self.height

    def index(self, x: int, y: int) -> int:
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise IndexError(f"tile ({x}, {y}) outside {self.width}x{self.height} grid")
        return y * self.width + x

    def coords(self, tile: int) -> tuple[int, int]:
        self.check_tile(tile)
        return tile % self.width, tile // self.width

    def check_tile(self, tile: int) -> None:
        if not 0 <= tile < self.n:
            raise IndexError(f"tile {tile} outside grid with {self.n} tiles")

    def tile_coords(self) -> np.ndarray:
        """(n, 2) array of tile-centre (x, y) coordinates in index order."""
        idx = np.arange(self.n)
        return np.stack([idx % self.width, idx // self.width], axis=1).astype(float)

    def l1_distances(self) -> np.ndarray:
        xy = self.tile_coords()
        return np.abs(xy[:, None, :] - xy[None, :, :]).sum(axis=-1)


@dataclass(frozen=True)
class KernelConfig:
    length_scale: float = 1.0
    signal_variance: float = 1.0
    jitter: float = 1e-6

    def __post_init__(self):
        if not self.length_scale > 0:
            raise ValueError(f"length_scale must be > 0, got {self.length_scale}")
        if not self.signal_variance > 0:
            raise ValueError(f"signal_variance must be > 0, got {self.signal_variance}")
        if not self.jitter >= 0:
            raise ValueError(f"jitter must be >= 0, got {self.jitter}")


@dataclass(frozen=True, eq=False)
class CovMatrix:
    """Symmetric positive-definite matrix with a lazily cached Cholesky factor."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"covariance must be square, got shape {a.shape}")
        scale = max(np.abs(a).max(), 1.0) if a.size else 1.0
        if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * scale):
            raise ValueError("covariance is not symmetric")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def chol(self) -> np.ndarray:
        try:
            lower = np.linalg.cholesky(self.entries)
        except np.linalg.LinAlgError as exc:
            raise FactorizationError(
                f"{self.n}x{self.n} covariance is not positive definite; "
                "increase the kernel jitter (diagonal nugget) to restore definiteness"
            ) from exc
        lower.setflags(write=False)
        return lower

    @cached_property
    def log_det_base2(self) -> float:
        return float(2.0 * np.log2(np.diag(self.chol)).sum())

    def scaled(self, factor: float) -> CovMatrix:
        if not factor > 0:
            raise ValueError(f"scale factor must be > 0, got {factor}")
        return CovMatrix(self.entries * factor)


@dataclass(frozen=True)
class RngStream:
    """A keyed random stream: equal ``(master_seed, stream_id)`` means equal draws.

    Streams are cheap values. ``generator()`` always starts from the beginning
    of the stream, and ``child(*keys)`` derives an independent sub-stream, so
    work units can be evaluated in any order or process.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.master_seed < 0 or self.stream_id < 0:
            raise ValueError("master_seed and stream_id must be non-negative")
        if self.master_seed >= 2**64 or self.stream_id >= 2**64:
            raise ValueError("master_seed and stream_id must fit in 64 bits")

    def _seed_sequence(self, *keys: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_id, *keys))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self._seed_sequence()))

    def child(self, *keys: int) -> RngStream:
        lo, hi = self._seed_sequence(*keys).generate_state(2, np.uint32)
        return RngStream(self.master_seed, int(lo) | (int(hi) << 32))


def as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    """Accept either a stream (fresh generator) or an already-running generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def softmax(values, temperature: float) -> np.ndarray:
    """Softmax over the last axis at the given temperature.

    Max-subtracted for overflow safety. At or below ``GREEDY_TEMPERATURE``
    the result is a one-hot on the argmax, ties going to the lowest index.
    """
    v = np.asarray(values, dtype=float)
    if not temperature > 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    if temperature <= GREEDY_TEMPERATURE:
        out = np.zeros_like(v)
        np.put_along_axis(out, np.argmax(v, axis=-1)[..., None], 1.0, axis=-1)
        return out
    z = (v - v.max(axis=-1, keepdims=True)) / temperature
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def sample_categorical(probs: np.ndarray, uniforms) -> np.ndarray | int:
    """Inverse-CDF draw from each row of ``probs`` using supplied uniforms."""
    p = np.asarray(probs, dtype=float)
    cdf = np.cumsum(p, axis=-1)
    u = np.asarray(uniforms, dtype=float)
    idx = (cdf <= u[..., None] * cdf[..., -1:]).sum(axis=-1)
    idx = np.minimum(idx, p.shape[-1] - 1)
    return int(idx) if idx.ndim == 0 else idx


def rbf_covariance(grid: GridSpec, cfg: KernelConfig) -> CovMatrix:
    """Squared-exponential Gram matrix over tile centres (Euclidean distance)."""
    xy = grid.tile_coords()
    d2 = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=-1)
    k = cfg.signal_variance * np.exp(-d2 / (2.0 * cfg.length_scale**2))
    k[np.diag_indices_from(k)] += cfg.jitter
    cov = CovMatrix(k)
    cov.chol  # fail fast
    return cov


def sample_mvn(mean, cov: CovMatrix, rng: RngStream | np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw ``mean + L z``; with ``size`` returns a ``(size, n)`` array."""
    mean = np.asarray(mean, dtype=float)
    if mean.shape != (cov.n,):
        raise ValueError(f"mean has shape {mean.shape}, covariance is {cov.n}x{cov.n}")
    gen = as_generator(rng)
    if size is None:
        return mean + cov.chol @ gen.standard_normal(cov.n)
    return mean + gen.standard_normal((size, cov.n)) @ cov.chol.T


def gaussian_entropy_bits(cov: CovMatrix) -> float:
    """Differential entropy of N(., cov) in bits. May be negative."""
    return 0.5 * cov.log_det_base2 + 0.5 * cov.n * LOG2_2PIE


def discrete_uniform_entropy_bits(k: int) -> float:
    if k < 1:
        raise ValueError(f"need at least one outcome, got k={k}")
    return math.log2(k)
