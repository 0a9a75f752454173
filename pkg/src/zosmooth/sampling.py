"""Seedable uniform samplers on the l1/l2 unit spheres and balls.

All samplers accept ``size=None`` (one vector of shape ``(d,)``) or an
integer ``size`` (a ``(size, d)`` array of independent draws).

Random streams are PCG64 generators keyed by
``SeedSequence(entropy=seed, spawn_key=(stream_id, *path))``.  Bit streams
are therefore pinned to numpy's PCG64/SeedSequence definitions (stable
since numpy 1.17).
"""

from __future__ import annotations

import threading

import numpy as np

from .errors import ConfigError

NORMS = ("L1", "L2")

# child-stream tags
DIRECTION = 0
XI = 1
NOISE = 2


class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    ``child(tag)`` returns a persistent sub-stream: calling it twice with the
    same tag hands back the same (stateful) object, so independent consumers
    (directions, noise, ξ) never share bits.
    """

    def __init__(self, seed: int, stream_id: int = 0, _path: tuple = ()):
        if seed < 0 or stream_id < 0:
            raise ConfigError("seed", "seed and stream_id must be non-negative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.path = tuple(_path)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, *self.path))
        self.generator = np.random.Generator(np.random.PCG64(ss))
        self._children: dict[int, RngStream] = {}
        self._lock = threading.Lock()

    def child(self, tag: int) -> "RngStream":
        with self._lock:
            if tag not in self._children:
                self._children[tag] = RngStream(self.seed, self.stream_id, self.path + (int(tag),))
            return self._children[tag]

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, path={self.path})"


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def _check_dim(d):
    if int(d) != d or d < 1:
        raise ConfigError("d", f"dimension must be a positive integer, got {d!r}")
    return int(d)


def _shape(d, size):
    return (d,) if size is None else (int(size), d)


def sample_sphere_l1(d: int, rng, size=None) -> np.ndarray:
    """Uniform draw(s) from the unit l1 sphere.

    Standard-exponential magnitudes normalized to sum one, with independent
    Rademacher signs; this is exactly the uniform law on the l1 sphere.
    """
    d = _check_dim(d)
    gen = as_generator(rng)
    shape = _shape(d, size)
    mag = gen.standard_exponential(shape)
    signs = 2.0 * gen.integers(0, 2, size=shape) - 1.0
    return signs * mag / mag.sum(axis=-1, keepdims=True)


def sample_sphere_l2(d: int, rng, size=None) -> np.ndarray:
    """Uniform draw(s) from the unit l2 sphere (normalized Gaussian)."""
    d = _check_dim(d)
    gen = as_generator(rng)
    g = gen.standard_normal(_shape(d, size))
    nrm = np.linalg.norm(g, axis=-1, keepdims=True)
    return g / nrm


def sample_sphere(norm: str, d: int, rng, size=None) -> np.ndarray:
    if norm == "L1":
        return sample_sphere_l1(d, rng, size)
    if norm == "L2":
        return sample_sphere_l2(d, rng, size)
    raise ConfigError("norm", f"unsupported norm {norm!r}; expected one of {NORMS}")


def sample_ball(norm: str, d: int, rng, size=None) -> np.ndarray:
    """Uniform draw(s) from the unit l1 or l2 ball: sphere sample times U^(1/d)."""
    d = _check_dim(d)
    v = sample_sphere(norm, d, rng, size)
    gen = as_generator(rng)
    u = gen.random(None if size is None else (int(size), 1))
    return v * u ** (1.0 / d)
