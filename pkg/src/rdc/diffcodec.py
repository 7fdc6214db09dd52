"""Op-code difference streams between an aligned target and the reference.

Every alignment column maps to an op-code 0..8:

====  ==========================================
0     same base
1     swap A<->T or G<->C
2     swap A<->G or C<->T
3     swap A<->C or G<->T
4     reference base deleted in the target
5-8   G, A, C, T inserted into the target
====  ==========================================

Only non-zero op-codes are kept, each paired with a 1-based location in the
ungapped reference. An insertion at location ``p`` is emitted before reference
base ``p`` is consumed and does not advance ``p``; insertions past the last
base use ``len(reference) + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence as Seq

from .alignment import GAP, AlignedPair
from .errors import (
    BothGapsError,
    CorruptStreamError,
    InvalidGapError,
    InvalidReplacementError,
    LengthMismatchError,
    LocationOutOfRangeError,
    NotSortedError,
)
from .sequence_io import Sequence

SAME = 0
DELETION = 4
INSERT_BASES = "GACT"  # op 5..8
INSERTIONS = frozenset(range(5, 9))
REPLACEMENTS = frozenset((1, 2, 3))

# replacement class -> base involution
REPLACE = {
    1: {"A": "T", "T": "A", "G": "C", "C": "G"},
    2: {"A": "G", "G": "A", "C": "T", "T": "C"},
    3: {"A": "C", "C": "A", "G": "T", "T": "G"},
}

_OPCODE = {}
for _op, _mapping in REPLACE.items():
    for _x, _y in _mapping.items():
        _OPCODE[(_x, _y)] = _op
for _b in "ACGT":
    _OPCODE[(_b, _b)] = SAME
    _OPCODE[(_b, GAP)] = DELETION
for _i, _b in enumerate(INSERT_BASES):
    _OPCODE[(GAP, _b)] = 5 + _i


def opcode(ref_symbol: str, tgt_symbol: str) -> int:
    try:
        return _OPCODE[(ref_symbol, tgt_symbol)]
    except KeyError:
        if ref_symbol == GAP and tgt_symbol == GAP:
            raise BothGapsError("column has a gap in both rows") from None
        raise ValueError(f"not a nucleotide column: {ref_symbol!r}/{tgt_symbol!r}") from None


def inserted_base(op: int) -> str:
    return INSERT_BASES[op - 5]


@dataclass(frozen=True)
class DiffRecord:
    ops: list = field(default_factory=list)
    locations: list = field(default_factory=list)
    target_id: str = ""
    target_length: int = 0

    def __post_init__(self):
        if len(self.ops) != len(self.locations):
            raise ValueError("ops and locations differ in length")

    def __len__(self):
        return len(self.ops)


def record_diffs(pair: AlignedPair, target_id: str = "") -> DiffRecord:
    ops = []
    locations = []
    p = 1
    target_length = 0
    for a, b in pair.columns():
        op = opcode(a, b)
        if b != GAP:
            target_length += 1
        if op:
            ops.append(op)
            locations.append(p)
        if a != GAP:
            p += 1
    return DiffRecord(ops, locations, target_id, target_length)


def reconstruct(reference, diff: DiffRecord) -> Sequence:
    """Replay ``diff`` against ``reference`` and return the target."""
    ref = reference.bases if isinstance(reference, Sequence) else reference
    n = len(ref)
    out = []
    p = 1  # next unconsumed reference base, 1-based
    for op, loc in zip(diff.ops, diff.locations):
        if loc < p or loc > n + 1:
            raise LocationOutOfRangeError(
                f"record {diff.target_id!r}: location {loc} invalid at reference position {p}"
            )
        if loc > p:
            out.append(ref[p - 1:loc - 1])
            p = loc
        if op in INSERTIONS:
            out.append(INSERT_BASES[op - 5])
            continue
        if loc == n + 1:
            raise LocationOutOfRangeError(
                f"record {diff.target_id!r}: op {op} past the end of the reference"
            )
        if op == DELETION:
            pass
        elif op in REPLACEMENTS:
            base = ref[loc - 1]
            try:
                out.append(REPLACE[op][base])
            except KeyError:
                raise InvalidReplacementError(
                    f"record {diff.target_id!r}: op {op} undefined for base {base!r}"
                ) from None
        else:
            raise CorruptStreamError(f"record {diff.target_id!r}: invalid op-code {op}")
        p = loc + 1
    out.append(ref[p - 1:])
    bases = "".join(out)
    if len(bases) != diff.target_length:
        raise LengthMismatchError(diff.target_id, diff.target_length, len(bases))
    return Sequence(diff.target_id, bases)


def delta_encode(locations: Seq[int]) -> list[int]:
    gaps = []
    prev = None
    for loc in locations:
        if prev is None:
            if loc < 1:
                raise NotSortedError(f"first location {loc} is below 1")
            gaps.append(loc)
        else:
            if loc < prev:
                raise NotSortedError(f"location {loc} follows {prev}")
            gaps.append(loc - prev)
        prev = loc
    return gaps


def delta_decode(gaps: Seq[int]) -> list[int]:
    locations = []
    total = 0
    for i, gap in enumerate(gaps):
        if gap < (1 if i == 0 else 0):
            raise InvalidGapError(f"gap {gap} at index {i}")
        total += gap
        locations.append(total)
    return locations
