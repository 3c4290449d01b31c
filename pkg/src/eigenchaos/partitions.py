"""Block structures on the positions of an n x n symmetric matrix.

Positions are 1-based pairs ``(i, j)``.  A block is a symmetric set of
positions; its size parameter counts diagonal positions twice::

    nu(B) = |B| + #{i : (i, i) in B}

so every block is a union of "units" (an off-diagonal pair or a single
diagonal position), each worth 2.  An admissible partition splits all n^2
positions into disjoint symmetric blocks of one common size parameter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .io import atomic_write_text
from .seeding import as_generator

__all__ = [
    "Block",
    "AdmissiblePartition",
    "UnionSet",
    "PartitionViolation",
    "InfeasibleTilingError",
    "nu",
    "entries_partition",
    "band_partition",
    "validate_partition",
    "sample_union",
    "format_partition",
    "parse_partition",
    "read_partition",
    "write_partition",
]

Block = frozenset  # frozenset of (i, j) tuples, 1-based


class InfeasibleTilingError(ValueError):
    """No equal-size symmetric tiling exists for the requested shape."""


def _as_block(positions: Iterable) -> frozenset:
    return frozenset((int(i), int(j)) for i, j in positions)


def nu(B) -> int:
    """Size parameter |B| + number of diagonal positions of a symmetric block."""
    B = _as_block(B)
    for i, j in B:
        if (j, i) not in B:
            raise ValueError(f"block is not symmetric: ({i},{j}) present without ({j},{i})")
    return len(B) + sum(1 for i, j in B if i == j)


@dataclass(frozen=True)
class PartitionViolation:
    """First failed admissibility condition and a witness."""

    condition: str  # symmetry | range | coverage | disjointness | equal-nu
    witness: tuple
    message: str

    def __str__(self):
        return f"{self.condition} violation: {self.message}"


@dataclass(frozen=True, eq=False)
class AdmissiblePartition:
    """Disjoint symmetric blocks of equal size parameter covering [n] x [n].

    Construction validates the blocks and raises ``ValueError`` with the
    violation report if they are not admissible.  Arrays ``block_of``
    (0-based block id of each position) and ``masks`` (one boolean n x n
    mask per block) support vectorised use.
    """

    n: int
    blocks: tuple
    nu: int = field(init=False)
    block_of: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        blocks = tuple(_as_block(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        report = _violations(self.n, blocks)
        if report is not None:
            raise ValueError(str(report))
        owner = np.empty((self.n, self.n), dtype=np.int64)
        for a, b in enumerate(blocks):
            for i, j in b:
                owner[i - 1, j - 1] = a
        owner.setflags(write=False)
        object.__setattr__(self, "block_of", owner)
        object.__setattr__(self, "nu", nu(blocks[0]))

    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def masks(self) -> np.ndarray:
        """Boolean array of shape (m, n, n); ``masks[a]`` marks block a."""
        return self.block_of[None, :, :] == np.arange(self.m)[:, None, None]

    def mask_of(self, block_ids) -> np.ndarray:
        """Boolean n x n mask of the union of the given 0-based blocks."""
        sel = np.zeros(self.m, dtype=bool)
        sel[np.asarray(list(block_ids), dtype=np.int64)] = True
        return sel[self.block_of]

    def index_of(self, i: int, j: int) -> int:
        """0-based id of the block holding 1-based position (i, j)."""
        return int(self.block_of[i - 1, j - 1])


@dataclass(frozen=True, eq=False)
class UnionSet:
    """Union of ``k`` distinct blocks of a partition."""

    partition: AdmissiblePartition
    block_ids: tuple

    @property
    def k(self) -> int:
        return len(self.block_ids)

    @property
    def mask(self) -> np.ndarray:
        return self.partition.mask_of(self.block_ids)

    @property
    def indices(self) -> frozenset:
        out = set()
        for a in self.block_ids:
            out |= self.partition.blocks[a]
        return frozenset(out)


def _violations(n: int, blocks) -> PartitionViolation | None:
    if n < 1:
        return PartitionViolation("range", (n,), f"dimension must be positive, got {n}")
    if not blocks:
        return PartitionViolation("coverage", (1, 1), "no blocks given")
    for a, b in enumerate(blocks):
        for i, j in sorted(b):
            if not (1 <= i <= n and 1 <= j <= n):
                return PartitionViolation("range", (a + 1, i, j), f"block {a + 1} has ({i},{j}) outside [1,{n}]")
            if (j, i) not in b:
                return PartitionViolation("symmetry", (a + 1, i, j), f"block {a + 1} has ({i},{j}) but not ({j},{i})")
    seen = {}
    clash = None
    for a, b in enumerate(blocks):
        if not b:
            return PartitionViolation("equal-nu", (a + 1,), f"block {a + 1} is empty")
        for pos in sorted(b):
            if pos in seen and clash is None:
                clash = PartitionViolation(
                    "disjointness", (seen[pos] + 1, a + 1) + pos,
                    f"position {pos} lies in blocks {seen[pos] + 1} and {a + 1}")
            seen.setdefault(pos, a)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if (i, j) not in seen:
                return PartitionViolation("coverage", (i, j), f"position ({i},{j}) is not covered")
    if clash is not None:
        return clash
    sizes = [len(b) + sum(1 for i, j in b if i == j) for b in blocks]
    for a, s in enumerate(sizes):
        if s != sizes[0]:
            return PartitionViolation("equal-nu", (1, a + 1, sizes[0], s),
                                      f"block 1 has nu={sizes[0]} but block {a + 1} has nu={s}")
    return None


def validate_partition(p) -> PartitionViolation | None:
    """Return ``None`` when admissible, else the first violation found.

    Accepts an :class:`AdmissiblePartition` or a pair ``(n, blocks)`` so that
    candidate block lists can be checked before construction.  Conditions
    are checked in the order symmetry, coverage, disjointness, equal size.
    """
    if isinstance(p, AdmissiblePartition):
        n, blocks = p.n, p.blocks
    else:
        n, blocks = p
    return _violations(int(n), tuple(_as_block(b) for b in blocks))


def _unit(i: int, j: int) -> frozenset:
    return frozenset({(i, j), (j, i)})


def entries_partition(n: int) -> AdmissiblePartition:
    """One block per off-diagonal pair and per diagonal position (nu = 2).

    Blocks are listed row by row over the upper triangle, so the diagonal
    block (i, i) comes before the pairs (i, j), j > i.
    """
    if n < 1:
        raise ValueError("n must be positive")
    blocks = [_unit(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]
    return AdmissiblePartition(n, tuple(blocks))


def band_partition(n: int, width: int) -> AdmissiblePartition:
    """Equal-size symmetric tiling with ``nu = 2 * width**2``.

    Each block holds ``width**2`` units.  Off-diagonal ``width x width``
    squares (paired with their mirror image) are used wherever they fit in
    the strict upper triangle; the remaining units (the diagonal triangles
    and any ragged margin) are taken in row-major order and merged into
    groups of ``width**2``.  The construction exists exactly when
    ``width**2`` divides the unit count n(n+1)/2, which is also necessary
    because the size parameters of all blocks sum to n^2 + n.
    """
    if n < 1 or width < 1:
        raise ValueError("n and width must be positive")
    units = n * (n + 1) // 2
    per = width * width
    if units % per:
        raise InfeasibleTilingError(
            f"infeasible tiling: n={n}, width={width} needs width^2={per} to divide n(n+1)/2={units}")
    if width == 1:
        return entries_partition(n)
    used = set()
    blocks = []
    q = n // width
    for I in range(q):
        for J in range(I + 1, q):
            b = set()
            for i in range(I * width + 1, (I + 1) * width + 1):
                for j in range(J * width + 1, (J + 1) * width + 1):
                    b |= _unit(i, j)
                    used.add((i, j))
            blocks.append(frozenset(b))
    rest = [(i, j) for i in range(1, n + 1) for j in range(i, n + 1) if (i, j) not in used]
    for s in range(0, len(rest), per):
        b = set()
        for i, j in rest[s:s + per]:
            b |= _unit(i, j)
        blocks.append(frozenset(b))
    return AdmissiblePartition(n, tuple(blocks))


def sample_union(p: AdmissiblePartition, k: int, rng) -> UnionSet:
    """Union of ``k`` blocks chosen uniformly without replacement."""
    if not (0 <= k <= p.m):
        raise ValueError(f"k={k} outside [0, m={p.m}]")
    gen = as_generator(rng)
    ids = gen.permutation(p.m)[:k]
    return UnionSet(p, tuple(sorted(int(a) for a in ids)))


# ---------------------------------------------------------------------------
# file format: "n m nu" then one line of space-separated "i,j" per block


def format_partition(p: AdmissiblePartition) -> str:
    lines = [f"{p.n} {p.m} {p.nu}"]
    for b in p.blocks:
        lines.append(" ".join(f"{i},{j}" for i, j in sorted(b)))
    return "\n".join(lines) + "\n"


def parse_partition(text: str, validate: bool = True):
    """Parse the text format.

    Returns an :class:`AdmissiblePartition`; with ``validate=False`` returns
    the raw ``(n, blocks)`` pair instead, which may then be passed to
    :func:`validate_partition` for a report.
    """
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty partition file")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError("header must be 'n m nu'")
    n, m, nu_decl = (int(v) for v in head)
    blocks = []
    for ln in lines[1:]:
        pos = []
        for tok in ln.split():
            i, j = tok.split(",")
            pos.append((int(i), int(j)))
        blocks.append(frozenset(pos))
    if len(blocks) != m:
        raise ValueError(f"header declares m={m} blocks, file has {len(blocks)}")
    if not validate:
        return n, tuple(blocks)
    p = AdmissiblePartition(n, tuple(blocks))
    if p.nu != nu_decl:
        raise ValueError(f"header declares nu={nu_decl}, blocks have nu={p.nu}")
    return p


def read_partition(path, validate: bool = True):
    return parse_partition(Path(path).read_text(encoding="utf-8"), validate)


def write_partition(path, p: AdmissiblePartition) -> None:
    atomic_write_text(path, format_partition(p))


def union_count(m: int, k: int) -> int:
    """Number of k-block unions, C(m, k)."""
    return math.comb(m, k)
