"""Exact probability tables over all 2^n assignments.

The table index encodes the assignment with variable 1 in the least
significant bit: ``x_v = (index >> (v - 1)) & 1``. Tables are numpy float64
arrays in the common case; object-dtype arrays of :class:`fractions.Fraction`
are supported wherever exact rational checks are required (counterexample
families, gadget invariants).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

NORMALIZATION_TOL = 1e-9


def assignment_to_index(assignment: Mapping[int, int], num_vars: int) -> int:
    idx = 0
    for v, x in assignment.items():
        if not (1 <= v <= num_vars):
            raise ValueError(f"variable {v} outside 1..{num_vars}")
        if x:
            idx |= 1 << (v - 1)
    return idx


def index_to_assignment(index: int, num_vars: int) -> dict[int, int]:
    return {v: (index >> (v - 1)) & 1 for v in range(1, num_vars + 1)}


def index_to_tuple(index: int, num_vars: int) -> tuple[int, ...]:
    """Assignment as (x_1, ..., x_n); tuple comparison is lexicographic order."""
    return tuple((index >> (v - 1)) & 1 for v in range(1, num_vars + 1))


def exact_sum(values: Iterable) -> float | Fraction:
    vals = list(values)
    if any(isinstance(v, Fraction) for v in vals):
        return sum(vals, start=Fraction(0))
    return math.fsum(vals)


@dataclass
class DenseDistribution:
    """A mass table over all assignments; ``normalized`` records the exact-sum check."""

    num_vars: int
    mass: np.ndarray
    normalized: bool

    @classmethod
    def from_masses(cls, num_vars: int, masses) -> "DenseDistribution":
        arr = np.asarray(masses)
        if arr.shape != (1 << num_vars,):
            raise ValueError(f"expected {1 << num_vars} masses, got shape {arr.shape}")
        if arr.dtype != object:
            arr = arr.astype(np.float64)
            if np.any(arr < 0):
                raise ValueError("negative mass")
            normalized = abs(math.fsum(arr.tolist()) - 1.0) <= NORMALIZATION_TOL
        else:
            if any(m < 0 for m in arr):
                raise ValueError("negative mass")
            normalized = sum(arr.tolist(), start=Fraction(0)) == 1
        return cls(num_vars, arr, normalized)

    @property
    def is_exact(self) -> bool:
        return self.mass.dtype == object

    def to_float(self) -> "DenseDistribution":
        if not self.is_exact:
            return self
        return DenseDistribution.from_masses(
            self.num_vars, [float(m) for m in self.mass]
        )

    def total(self):
        return exact_sum(self.mass.tolist())

    def prob(self, assignment: Mapping[int, int]):
        """Mass of a partial assignment (sum over completions)."""
        mask = np.ones(self.mass.shape[0], dtype=bool)
        idx = np.arange(self.mass.shape[0])
        for v, x in assignment.items():
            mask &= ((idx >> (v - 1)) & 1) == int(bool(x))
        return exact_sum(self.mass[mask].tolist())

    def max_completion(self, evidence: Mapping[int, int]) -> tuple:
        """(max mass, argmax index) over completions of the evidence.

        Ties resolve to the lexicographically smallest assignment.
        """
        n = self.num_vars
        idx = np.arange(self.mass.shape[0])
        mask = np.ones(self.mass.shape[0], dtype=bool)
        for v, x in evidence.items():
            mask &= ((idx >> (v - 1)) & 1) == int(bool(x))
        if not mask.any():
            raise ValueError("evidence matches no assignment")
        candidates = idx[mask]
        masses = self.mass[mask]
        best_val = masses.max()
        ties = candidates[masses == best_val]
        best_idx = min(ties, key=lambda i: index_to_tuple(int(i), n))
        return best_val, int(best_idx)

    def support(self) -> np.ndarray:
        if self.is_exact:
            return np.array([m > 0 for m in self.mass], dtype=bool)
        return self.mass > 0

    def marginalize(self, keep: Iterable[int]) -> "DenseDistribution":
        """Distribution over a variable subset, reindexed to 1..len(keep)."""
        keep = sorted(keep)
        if any(not (1 <= v <= self.num_vars) for v in keep):
            raise ValueError("keep set outside variable range")
        k = len(keep)
        zero = Fraction(0) if self.is_exact else 0.0
        out = [zero] * (1 << k)
        for i in range(self.mass.shape[0]):
            j = 0
            for pos, v in enumerate(keep):
                if (i >> (v - 1)) & 1:
                    j |= 1 << pos
            out[j] = out[j] + self.mass[i]
        dtype = object if self.is_exact else np.float64
        return DenseDistribution.from_masses(k, np.array(out, dtype=dtype))


def uniform_over_indices(num_vars: int, indices) -> DenseDistribution:
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        raise ValueError("cannot build a uniform distribution over an empty support")
    mass = np.zeros(1 << num_vars, dtype=np.float64)
    mass[indices] = 1.0 / indices.size
    return DenseDistribution.from_masses(num_vars, mass)


# --- partial-assignment tables -------------------------------------------
#
# A partial assignment is encoded in base 3 with the digit at position
# (v - 1) giving the state of x_v: 0, 1, or 2 for "unassigned". The tables
# below hold, for every one of the 3^n partial assignments, the summed mass
# (marginal) or the max mass over completions, built by one add/max sweep
# per variable axis.


def trit_index(assignment: Mapping[int, int], num_vars: int) -> int:
    t = 0
    for v in range(1, num_vars + 1):
        state = assignment.get(v, 2)
        t += int(state) * 3**(v - 1)
    return t


def trit_to_assignment(t: int, num_vars: int) -> dict[int, int]:
    out = {}
    for v in range(1, num_vars + 1):
        d = (t // 3**(v - 1)) % 3
        if d != 2:
            out[v] = d
    return out


def _table(dist: DenseDistribution, combine) -> np.ndarray:
    n = dist.num_vars
    t = dist.mass.reshape((2,) * n) if n else dist.mass
    # reshape puts x_n on axis 0; per-axis sweeps keep that orientation and
    # the final C-order flatten therefore yields digit (v-1) = state of x_v
    for axis in range(n):
        a0 = np.take(t, 0, axis=axis)
        a1 = np.take(t, 1, axis=axis)
        t = np.stack([a0, a1, combine(a0, a1)], axis=axis)
    return t.reshape(-1)


def marginal_table(dist: DenseDistribution) -> np.ndarray:
    """Mass of every partial assignment, indexed by :func:`trit_index`."""
    return _table(dist, lambda a, b: a + b)


def max_table(dist: DenseDistribution) -> np.ndarray:
    """Max completion mass of every partial assignment (evidence-MAP table)."""
    return _table(dist, np.maximum)
