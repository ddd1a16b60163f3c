"""Bit-mask Pauli frames, symplectic Clifford actions and MC estimate records.

A Pauli pattern over n pair slots is stored as two n-bit masks (x and z
components; a Y contributes to both).  Signs are never tracked: every
predicate evaluated on frames (syndrome bits, identity checks) is blind to
global phase.  A Clifford acts on frames as a 2n x 2n binary symplectic
matrix; internally rows are kept bit-packed with x/z bits interleaved
(bit 2i = x_i, bit 2i+1 = z_i), which is the layout the group sampler and
the Monte Carlo kernels operate on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["PauliFrame", "SymplecticClifford", "MCEstimate", "MAX_MC_PAIRS"]

# interleaved packing lives in a uint64, so 2n <= 64
MAX_MC_PAIRS = 32


@dataclass(frozen=True)
class PauliFrame:
    """Pauli pattern on n pair slots as (x_mask, z_mask) bit masks; slot i is
    bit i, the identity is (0, 0)."""

    n: int
    x_mask: int
    z_mask: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one slot, got n={self.n}")
        full = (1 << self.n) - 1
        if not (0 <= self.x_mask <= full and 0 <= self.z_mask <= full):
            raise ValueError("mask has bits outside the n slots")

    @classmethod
    def identity(cls, n: int) -> "PauliFrame":
        return cls(n=n, x_mask=0, z_mask=0)

    @classmethod
    def from_string(cls, letters: str) -> "PauliFrame":
        """Build from a letter string like 'XIZ' (slot 0 first)."""
        x_mask = 0
        z_mask = 0
        for slot, letter in enumerate(letters):
            if letter in "XY":
                x_mask |= 1 << slot
            if letter in "ZY":
                z_mask |= 1 << slot
            if letter not in "IXYZ":
                raise ValueError(f"unknown Pauli letter {letter!r}")
        return cls(n=len(letters), x_mask=x_mask, z_mask=z_mask)

    def to_string(self) -> str:
        out = []
        for slot in range(self.n):
            x = (self.x_mask >> slot) & 1
            z = (self.z_mask >> slot) & 1
            out.append("IXZY"[x + 2 * z])
        return "".join(out)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def weight(self) -> int:
        return bin(self.x_mask | self.z_mask).count("1")

    def mul(self, other: "PauliFrame") -> "PauliFrame":
        """Product up to phase: componentwise XOR of the masks."""
        if other.n != self.n:
            raise ValueError("frame sizes differ")
        return PauliFrame(self.n, self.x_mask ^ other.x_mask, self.z_mask ^ other.z_mask)

    def commutes_with(self, other: "PauliFrame") -> bool:
        if other.n != self.n:
            raise ValueError("frame sizes differ")
        overlap = (self.x_mask & other.z_mask) ^ (self.z_mask & other.x_mask)
        return bin(overlap).count("1") % 2 == 0

    def packed(self) -> int:
        """Interleave to the (x0, z0, x1, z1, ...) bit layout."""
        packed = 0
        for slot in range(self.n):
            packed |= ((self.x_mask >> slot) & 1) << (2 * slot)
            packed |= ((self.z_mask >> slot) & 1) << (2 * slot + 1)
        return packed

    @classmethod
    def from_packed(cls, n: int, packed: int) -> "PauliFrame":
        x_mask = 0
        z_mask = 0
        for slot in range(n):
            x_mask |= ((packed >> (2 * slot)) & 1) << slot
            z_mask |= ((packed >> (2 * slot + 1)) & 1) << slot
        return cls(n=n, x_mask=x_mask, z_mask=z_mask)


@dataclass(frozen=True)
class SymplecticClifford:
    """A Clifford's sign-free action on Pauli frames: an element of the binary
    symplectic group.  ``rows`` are the images of the basis Paulis
    (X_0, Z_0, X_1, Z_1, ...) in the interleaved packing."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != 2 * self.n:
            raise ValueError("need one row per basis Pauli")

    def apply_packed(self, packed: int) -> int:
        out = 0
        vec = packed
        index = 0
        while vec:
            if vec & 1:
                out ^= self.rows[index]
            vec >>= 1
            index += 1
        return out

    @property
    def matrix(self) -> np.ndarray:
        """The action as a 2n x 2n binary matrix in block (x | z) convention:
        component p < n is x_p, component p >= n is z_(p-n), and frames map as
        v -> S v on the stacked vector (x_mask bits, z_mask bits)."""
        nn = 2 * self.n

        def interleaved(p: int) -> int:
            return 2 * p if p < self.n else 2 * (p - self.n) + 1

        mat = np.zeros((nn, nn), dtype=np.uint8)
        for col in range(nn):
            image = self.rows[interleaved(col)]
            for row in range(nn):
                mat[row, col] = (image >> interleaved(row)) & 1
        return mat

    def conjugate(self, frame: PauliFrame) -> PauliFrame:
        if frame.n != self.n:
            raise ValueError(f"frame has {frame.n} slots, Clifford acts on {self.n}")
        return PauliFrame.from_packed(self.n, self.apply_packed(frame.packed()))


def symplectic_form(n: int) -> np.ndarray:
    """The standard block form J = [[0, I], [I, 0]] over GF(2)."""
    nn = 2 * n
    form = np.zeros((nn, nn), dtype=np.uint8)
    form[:n, n:] = np.eye(n, dtype=np.uint8)
    form[n:, :n] = np.eye(n, dtype=np.uint8)
    return form


def symplectic_group_order(n: int) -> int:
    """|Sp(2n, 2)| = 2^(n^2) * prod_j (4^j - 1)."""
    order = 1 << (n * n)
    for j in range(1, n + 1):
        order *= 4**j - 1
    return order


@dataclass(frozen=True)
class MCEstimate:
    """A binomial proportion estimate with its standard error."""

    trials: int
    p_hat: float
    stderr: float

    @classmethod
    def from_count(cls, successes: int, trials: int) -> "MCEstimate":
        if trials < 1:
            raise ValueError("need at least one trial")
        p_hat = successes / trials
        return cls(trials=trials, p_hat=p_hat, stderr=math.sqrt(p_hat * (1.0 - p_hat) / trials))
