import zlib
import numpy as np

from typing import Optional, Union

from ..errors import DomainError

RNG_ALGORITHM = "numpy.Philox4x64-10/SeedSequence"

SeedKey = Union[int, str]

_UINT64_MASK = (1 << 64) - 1


def _key_to_int(key: SeedKey) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    if key < 0:
        raise DomainError(f"Seed keys must be nonnegative, got {key}")
    return int(key)


def derive_seed(master_seed: int, *keys: SeedKey) -> int:
    """
    Mix a 64-bit master seed with a path of keys into a child seed.

    Strings are hashed with CRC32 so that experiment tags map to stable integers.
    The mixing is numpy's SeedSequence spawn-key hashing, which is platform independent.
    """
    seq = np.random.SeedSequence(entropy=int(master_seed) & _UINT64_MASK, spawn_key=tuple(_key_to_int(k) for k in keys))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator for `seed`; see RNG_ALGORITHM."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed) & _UINT64_MASK)))


def sample_uniform_ball(
    dim: int, s: float, rng: np.random.Generator, size: Optional[int] = None
) -> np.ndarray:
    """
    Draw points uniformly from the dim-dimensional Euclidean ball of radius s.

    Direction is a normalized standard-normal vector; the radius is s·U^{1/dim}
    with U uniform on [0, 1).

    Parameters:
    - dim: int
        Ambient dimension, at least 1.
    - s: float
        Ball radius, positive.
    - rng: np.random.Generator
        Explicit generator state.
    - size: Optional[int]
        Number of draws. None returns a single (dim,) vector, otherwise (size, dim).
    """
    if dim < 1:
        raise DomainError(f"dim must be at least 1, got {dim}")
    if not s > 0.0:
        raise DomainError(f"Radius must be positive, got {s}")

    count = 1 if size is None else int(size)
    directions = rng.standard_normal((count, dim))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    # a zero normal draw has probability 0; redraw rather than divide by zero
    while np.any(norms == 0.0):
        bad = np.flatnonzero(norms[:, 0] == 0.0)
        directions[bad] = rng.standard_normal((bad.size, dim))
        norms = np.linalg.norm(directions, axis=1, keepdims=True)
    radii = s * rng.random((count, 1)) ** (1.0 / dim)
    points = directions / norms * radii

    if size is None:
        return points[0]
    return points
