"""Fermionic occupation-number basis with mirror (level-reversal) ordering.

States of ``n`` spinless fermions in ``l`` single-particle levels are stored
as integer bit patterns: bit ``i`` (counting from the least significant bit)
is the occupation of level ``i``, so levels are 0-based in code.  A pattern
like ``|1,0,1,0,0,0⟩`` (levels 0 and 2 occupied, l=6) is the integer 0b000101.

Operator convention: a collective creation operator for the level set
``{j1 < j2 < ... < jk}`` is the product ``a†_{j1} a†_{j2} ... a†_{jk}``, and
the matching annihilation operator is its adjoint ``a_{jk} ... a_{j2} a_{j1}``.
Operators act on kets right to left, so creation fills levels from the highest
down and annihilation empties them from the lowest up.  Each elementary
operator picks up the Jordan-Wigner phase (-1)**(number of occupied levels
below its own).

The basis is ordered so that the level-reversal partner of the state at
index ``i`` sits at index ``N-1-i`` whenever the reversal has no fixed
points; self-conjugate patterns, when they exist, are placed contiguously
at the center.  The permutation matrix of this pairing is the exchange
matrix used to express centrosymmetry.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from math import comb

import numpy as np

MAX_LEVELS = 63
DEFAULT_MAX_STATES = 20000


@dataclass(frozen=True)
class BasisSpec:
    """Number of single-particle levels ``l`` and particles ``n``."""

    l: int
    n: int

    def __post_init__(self):
        if not isinstance(self.l, int) or not isinstance(self.n, int):
            raise TypeError("l and n must be integers")
        if self.l < 1 or self.l > MAX_LEVELS:
            raise ValueError(f"l must be in [1, {MAX_LEVELS}], got {self.l}")
        if not 1 <= self.n <= self.l:
            raise ValueError(f"need 1 <= n <= l, got n={self.n}, l={self.l}")

    @property
    def dim(self) -> int:
        return comb(self.l, self.n)


def level_reverse(pattern: int, l: int) -> int:
    """Reverse the occupation pattern, mapping level ``j`` to ``l-1-j``."""
    out = 0
    for j in range(l):
        if pattern >> j & 1:
            out |= 1 << (l - 1 - j)
    return out


def pattern_of_levels(levels) -> int:
    """Bit pattern with the given (0-based) levels occupied."""
    out = 0
    for j in levels:
        out |= 1 << j
    return out


def occupations(pattern: int, l: int) -> tuple:
    """Occupation tuple (n_0, ..., n_{l-1}) of a bit pattern."""
    return tuple(pattern >> j & 1 for j in range(l))


@lru_cache(maxsize=128)
def k_configurations(l: int, k: int) -> tuple:
    """All k-level configurations as bit patterns, ordered lexicographically
    by their occupied-level tuples."""
    return tuple(pattern_of_levels(c) for c in combinations(range(l), k))


@dataclass(frozen=True)
class Basis:
    """Mirror-ordered occupation basis of an (l, n) sector.

    ``states[i]`` is the bit pattern at index ``i`` and ``mirror[i]`` is the
    index of its level-reversed partner; ``mirror`` is an involution.
    """

    spec: BasisSpec
    states: tuple
    mirror: tuple

    @cached_property
    def index(self) -> dict:
        return {p: i for i, p in enumerate(self.states)}

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def n_self_conjugate(self) -> int:
        return sum(1 for i, m in enumerate(self.mirror) if i == m)

    @property
    def tag(self) -> str:
        return f"l{self.spec.l}n{self.spec.n}"

    def index_of(self, pattern: int) -> int:
        return self.index[pattern]

    @property
    def source_index(self) -> int:
        """Index of the state with all particles shifted to the lowest levels."""
        return self.index[(1 << self.spec.n) - 1]

    @property
    def drain_index(self) -> int:
        """Index of the state with all particles shifted to the highest levels.

        This is the mirror partner of :attr:`source_index`.
        """
        lo = (1 << self.spec.n) - 1
        return self.index[level_reverse(lo, self.spec.l)]


def enumerate_basis(spec: BasisSpec, max_states: int = DEFAULT_MAX_STATES) -> Basis:
    """Enumerate the (l, n) occupation basis in mirror order.

    Patterns are first generated lexicographically, then rearranged so that
    reversal partners sit at indices ``i`` and ``N-1-i``; self-conjugate
    patterns go to the center.  Raises if the dimension exceeds
    ``max_states`` (dense storage elsewhere scales as N^2).
    """
    n_states = spec.dim
    if n_states > max_states:
        raise ValueError(
            f"basis dimension {n_states} exceeds the cap {max_states}"
        )
    l = spec.l
    first = []
    center = []
    seen = set()
    for pattern in k_configurations(l, spec.n):
        if pattern in seen:
            continue
        partner = level_reverse(pattern, l)
        if partner == pattern:
            center.append(pattern)
        else:
            first.append(pattern)
            seen.add(partner)
        seen.add(pattern)
    states = first + center + [level_reverse(p, l) for p in reversed(first)]
    index = {p: i for i, p in enumerate(states)}
    mirror = tuple(index[level_reverse(p, l)] for p in states)
    return Basis(spec=spec, states=tuple(states), mirror=mirror)


def apply_k_body(pattern: int, annihilate: int, create: int):
    """Apply a collective annihilation then creation operator pair.

    ``annihilate`` and ``create`` are bit patterns of the level sets acted
    on.  Returns ``(new_pattern, sign)`` with the accumulated fermionic sign,
    or ``None`` if an empty level is annihilated or an occupied one created
    (the operator kills the state).
    """
    p = pattern
    sign = 1
    m = annihilate
    while m:  # adjoint order: lowest level first
        bit = m & -m
        if not p & bit:
            return None
        if (p & (bit - 1)).bit_count() & 1:
            sign = -sign
        p ^= bit
        m ^= bit
    m = create
    while m:  # highest level first
        bit = 1 << (m.bit_length() - 1)
        if p & bit:
            return None
        if (p & (bit - 1)).bit_count() & 1:
            sign = -sign
        p |= bit
        m ^= bit
    return p, sign


def exchange_matrix(basis: Basis) -> np.ndarray:
    """Permutation matrix of the mirror involution.

    With a fixed-point-free mirror this is exactly the anti-diagonal exchange
    matrix; it is symmetric, orthogonal and involutive in every case.
    """
    n = basis.dim
    j = np.zeros((n, n))
    j[np.arange(n), np.asarray(basis.mirror)] = 1.0
    return j


def parity_rotation(basis: Basis) -> np.ndarray:
    """Orthogonal matrix O whose rows are the mirror-parity combinations.

    Skew rows (e_i - e_{σ(i)})/√2 come first, one per mirror pair, followed
    by the symmetric rows (e_i + e_{σ(i)})/√2 and finally a plain unit row
    for every self-conjugate state (those are symmetric under the mirror).
    Conjugating a matrix that commutes with the exchange matrix by O makes
    it block diagonal, with the skew block of size (N - c)/2 in the upper
    left (c = number of self-conjugate states).
    """
    n = basis.dim
    pairs = [(i, m) for i, m in enumerate(basis.mirror) if i < m]
    centers = [i for i, m in enumerate(basis.mirror) if i == m]
    r = 1.0 / np.sqrt(2.0)
    o = np.zeros((n, n))
    row = 0
    for i, m in pairs:
        o[row, i] = r
        o[row, m] = -r
        row += 1
    for i, m in pairs:
        o[row, i] = r
        o[row, m] = r
        row += 1
    for i in centers:
        o[row, i] = 1.0
        row += 1
    return o
