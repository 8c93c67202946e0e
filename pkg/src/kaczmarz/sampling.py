"""Seeded sampling: a pinned 64-bit generator and Walker/Vose alias tables.

The generator is SplitMix64 driven in counter mode: draw number k (1-based)
from seed s is mix64(s + k*GOLDEN) with the usual xorshift-multiply finalizer.
Because the state is an affine function of the draw index, the scalar path and
the vectorized block path provably emit the same sequence, and the stream is
bit-for-bit reproducible on any platform; no libc rand state is involved.

Uniform doubles are (u64 >> 11) * 2^-53, i.e. dyadic rationals in [0, 1).

Alias tables give O(1) draws from a fixed discrete distribution: one uniform
picks the cell, one uniform flips the accept/alias coin. Zero-weight indices
keep their cell but carry acceptance probability 0 and are never returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWeightsError

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB

# Fixed salts: one REK run derives its two independent streams (row picks,
# column picks) from the single user seed.
ROW_STREAM_SALT = 0x8BADF00D5EEDFACE
COL_STREAM_SALT = 0x0DDBA11CAFEBABE5


def mix64(z):
    """SplitMix64 output finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & MASK64
    return z ^ (z >> 31)


class RngStream:
    """A SplitMix64 stream identified by (seed, draws consumed so far)."""

    __slots__ = ("seed", "counter")

    def __init__(self, seed, counter=0):
        self.seed = int(seed) & MASK64
        self.counter = int(counter)

    @classmethod
    def derived(cls, seed, salt):
        """Independent stream obtained from a user seed by a fixed salt."""
        return cls(mix64((int(seed) ^ int(salt)) & MASK64))

    def next_uint64(self):
        self.counter += 1
        return mix64((self.seed + self.counter * GOLDEN) & MASK64)

    def next_uniform(self):
        return (self.next_uint64() >> 11) * 2.0**-53

    def uniform_block(self, count):
        """The next `count` uniforms at once; same values the scalar path gives."""
        ks = np.arange(self.counter + 1, self.counter + count + 1, dtype=np.uint64)
        self.counter += int(count)
        z = np.uint64(self.seed) + ks * np.uint64(GOLDEN)  # wraps mod 2^64
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_A)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_B)
        z ^= z >> np.uint64(31)
        return (z >> np.uint64(11)) * 2.0**-53

    def __repr__(self):
        return "RngStream(seed=%d, counter=%d)" % (self.seed, self.counter)


@dataclass(frozen=True)
class AliasTable:
    """Walker alias table over indices 0..size-1."""

    size: int
    prob: np.ndarray  # acceptance probability of each cell
    alias: np.ndarray  # fallback index of each cell


def build_alias_table(weights):
    """Vose's O(size) construction from nonnegative weights.

    Indices with zero weight are kept in the table with acceptance
    probability 0, so they are never sampled but index arithmetic stays
    aligned with the caller's numbering.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise DegenerateWeightsError("weights must be a nonempty 1-D array")
    if not np.isfinite(w).all():
        raise DegenerateWeightsError("weights must be finite")
    if (w < 0).any():
        raise DegenerateWeightsError("weights must be nonnegative")
    total = float(w.sum())
    if total <= 0.0:
        raise DegenerateWeightsError("weights must not all be zero")

    size = w.size
    scaled = w * (size / total)
    prob = np.ones(size)
    alias = np.arange(size, dtype=np.int64)

    small = [k for k in range(size) if scaled[k] < 1.0]
    large = [k for k in range(size) if scaled[k] >= 1.0]
    while small and large:
        lo = small.pop()
        hi = large.pop()
        prob[lo] = scaled[lo]
        alias[lo] = hi
        scaled[hi] = (scaled[hi] + scaled[lo]) - 1.0
        (small if scaled[hi] < 1.0 else large).append(hi)

    # Leftovers hold ~1 unit of mass up to roundoff and accept outright.
    # A zero-weight cell can only be left over if roundoff starved it of a
    # donor; keep it unreachable rather than giving it spurious mass.
    heaviest = int(np.argmax(w))
    for k in small:
        if w[k] == 0.0:
            prob[k] = 0.0
            alias[k] = heaviest
        else:
            prob[k] = 1.0
    prob.setflags(write=False)
    alias.setflags(write=False)
    return AliasTable(size=size, prob=prob, alias=alias)


def sample(table, rng):
    """One draw: one uniform for the cell, one for the coin."""
    u_cell = rng.next_uniform()
    u_coin = rng.next_uniform()
    k = int(u_cell * table.size)
    if k >= table.size:  # guard the top rounding edge
        k = table.size - 1
    return k if u_coin < table.prob[k] else int(table.alias[k])


def sample_block(table, rng, count):
    """`count` draws at once; identical sequence to repeated sample()."""
    u = rng.uniform_block(2 * count)
    cells = (u[0::2] * table.size).astype(np.int64)
    np.minimum(cells, table.size - 1, out=cells)
    return np.where(u[1::2] < table.prob[cells], cells, table.alias[cells])


def reconstructed_mass(table):
    """Probability actually assigned to each index by the table.

    Index k is returned when its own cell accepts, or when any cell aliased
    to k rejects: (prob[k] + sum over l with alias[l]==k of (1-prob[l])) / size.
    """
    mass = table.prob.copy()
    np.add.at(mass, table.alias, 1.0 - table.prob)
    return mass / table.size


def row_sampler(a):
    """Alias table over rows of a DualSparseMatrix, weighted by squared norms."""
    return build_alias_table(a.row_sq_norms)


def col_sampler(a):
    """Alias table over columns, weighted by squared norms."""
    return build_alias_table(a.col_sq_norms)
