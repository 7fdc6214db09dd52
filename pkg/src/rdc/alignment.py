"""Pairwise alignment of a target against the reference.

Full dynamic-programming alignment with a linear gap penalty, in global
(Needleman-Wunsch) or semi-global (free end gaps) mode. The inner loops are
compiled with numba; the compiled kernels release the GIL so several targets
can be aligned against one reference from a thread pool.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numba
import numpy as np

from .errors import SizeLimitExceededError
from .sequence_io import Sequence

GAP = "-"
GLOBAL = "global"
SEMI_GLOBAL = "semi_global"
MODES = (GLOBAL, SEMI_GLOBAL)
DEFAULT_CELL_BUDGET = 400_000_000

# traceback moves
_DIAG, _UP, _LEFT = 0, 1, 2

_CODES = np.full(256, 255, dtype=np.uint8)
for _i, _b in enumerate("ACGT"):
    _CODES[ord(_b)] = _i
_SYMBOLS = np.frombuffer(b"ACGT-", dtype=np.uint8)
_GAP_CODE = 4


@dataclass(frozen=True)
class AlignParams:
    match_score: int = 2
    mismatch_score: int = -1
    gap_score: int = -2
    mode: str = SEMI_GLOBAL
    cell_budget: int = DEFAULT_CELL_BUDGET

    def __post_init__(self):
        if self.match_score <= 0:
            raise ValueError("match_score must be positive")
        if self.mismatch_score >= self.match_score:
            raise ValueError("mismatch_score must be below match_score")
        if self.gap_score >= 0:
            raise ValueError("gap_score must be negative")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class AlignedPair:
    """Two equal-length gapped rows; column k pairs ref_aligned[k] with tgt_aligned[k]."""

    ref_aligned: str
    tgt_aligned: str

    def __post_init__(self):
        if len(self.ref_aligned) != len(self.tgt_aligned):
            raise ValueError("aligned rows differ in length")
        r = np.frombuffer(self.ref_aligned.encode("ascii"), dtype=np.uint8)
        t = np.frombuffer(self.tgt_aligned.encode("ascii"), dtype=np.uint8)
        if np.any((r == ord(GAP)) & (t == ord(GAP))):
            raise ValueError("column with a gap in both rows")

    def __len__(self):
        return len(self.ref_aligned)

    def columns(self):
        return zip(self.ref_aligned, self.tgt_aligned)


@numba.njit(cache=True, nogil=True)
def _fill(r, t, match, mismatch, gap, semi, prev, cur, lastcol):
    n, m = r.shape[0], t.shape[0]
    tb = np.empty((n + 1, m + 1), dtype=np.uint8)

    tb[0, 0] = _DIAG
    prev[0] = 0
    for j in range(1, m + 1):
        prev[j] = 0 if semi else j * gap
        tb[0, j] = _LEFT
    lastcol[0] = prev[m]

    for i in range(1, n + 1):
        ri = r[i - 1]
        row = tb[i]
        # diagonal vs. up only depends on the previous row; resolve it first
        for j in range(1, m + 1):
            d = prev[j - 1] + (match if ri == t[j - 1] else mismatch)
            u = prev[j] + gap
            up = u > d
            cur[j] = u if up else d
            row[j] = np.uint8(up)
        cur[0] = 0 if semi else i * gap
        row[0] = _UP
        left = cur[0]
        # left only wins on a strict improvement: diag > up > left on ties
        for j in range(1, m + 1):
            lv = left + gap
            v = cur[j]
            wins = lv > v
            left = lv if wins else v
            cur[j] = left
            row[j] = _LEFT if wins else row[j]
        lastcol[i] = cur[m]
        prev, cur = cur, prev
    return tb, prev, lastcol


@numba.njit(cache=True, nogil=True)
def _traceback(tb, r, t, end_i, end_j):
    n, m = r.shape[0], t.shape[0]
    size = n + m
    ra = np.empty(size, dtype=np.uint8)
    ta = np.empty(size, dtype=np.uint8)
    k = size
    # free trailing gaps beyond the chosen end cell
    for j in range(m - 1, end_j - 1, -1):
        k -= 1
        ra[k] = _GAP_CODE
        ta[k] = t[j]
    for i in range(n - 1, end_i - 1, -1):
        k -= 1
        ra[k] = r[i]
        ta[k] = _GAP_CODE
    i, j = end_i, end_j
    while i > 0 or j > 0:
        k -= 1
        move = tb[i, j]
        if move == _DIAG:
            i -= 1
            j -= 1
            ra[k] = r[i]
            ta[k] = t[j]
        elif move == _UP:
            i -= 1
            ra[k] = r[i]
            ta[k] = _GAP_CODE
        else:
            j -= 1
            ra[k] = _GAP_CODE
            ta[k] = t[j]
    return ra[k:], ta[k:]


def _semi_global_end(last_row, last_col):
    """Pick the end cell for free trailing gaps: (n, m) first, then the last
    row right-to-left, then the last column bottom-to-top."""
    n = last_col.shape[0] - 1
    m = last_row.shape[0] - 1
    best, end = last_row[m], (n, m)
    for j in range(m - 1, -1, -1):
        if last_row[j] > best:
            best, end = last_row[j], (n, j)
    for i in range(n - 1, -1, -1):
        if last_col[i] > best:
            best, end = last_col[i], (i, m)
    return int(best), end


def _as_codes(seq: Union[Sequence, str]) -> np.ndarray:
    bases = seq.bases if isinstance(seq, Sequence) else seq
    return _CODES[np.frombuffer(bases.encode("ascii"), dtype=np.uint8)]


def align_with_score(reference, target, params: AlignParams = AlignParams()):
    r = _as_codes(reference)
    t = _as_codes(target)
    if r.size * t.size > params.cell_budget:
        raise SizeLimitExceededError(r.size * t.size, params.cell_budget)
    semi = params.mode == SEMI_GLOBAL
    bound = (r.size + t.size + 2) * max(
        abs(params.match_score), abs(params.mismatch_score), abs(params.gap_score)
    )
    dtype = np.int32 if bound < 2**31 - 1 else np.int64
    tb, last_row, last_col = _fill(
        r, t, dtype(params.match_score), dtype(params.mismatch_score), dtype(params.gap_score),
        semi, np.empty(t.size + 1, dtype), np.empty(t.size + 1, dtype), np.empty(r.size + 1, dtype),
    )
    if semi:
        score, (ei, ej) = _semi_global_end(last_row, last_col)
    else:
        score, (ei, ej) = int(last_row[-1]), (r.size, t.size)
    ra, ta = _traceback(tb, r, t, ei, ej)
    pair = AlignedPair(
        _SYMBOLS[ra].tobytes().decode("ascii"),
        _SYMBOLS[ta].tobytes().decode("ascii"),
    )
    return pair, score


def align(reference, target, params: AlignParams = AlignParams()) -> AlignedPair:
    """Optimal alignment of ``target`` against ``reference``.

    Raises :class:`SizeLimitExceededError` when ``len(reference) * len(target)``
    exceeds ``params.cell_budget``.
    """
    return align_with_score(reference, target, params)[0]


def alignment_score(pair: AlignedPair, params: AlignParams = AlignParams()) -> int:
    """Score an existing alignment column by column.

    In semi-global mode a gap costs nothing when its row holds no base
    before it or no base after it.
    """
    ref, tgt = pair.ref_aligned, pair.tgt_aligned
    semi = params.mode == SEMI_GLOBAL
    if semi:
        ref_first, ref_last = _base_span(ref)
        tgt_first, tgt_last = _base_span(tgt)
    score = 0
    for k, (a, b) in enumerate(zip(ref, tgt)):
        if a == GAP:
            if semi and (k < ref_first or k > ref_last):
                continue
            score += params.gap_score
        elif b == GAP:
            if semi and (k < tgt_first or k > tgt_last):
                continue
            score += params.gap_score
        else:
            score += params.match_score if a == b else params.mismatch_score
    return score


def _base_span(row: str):
    bases = [k for k, c in enumerate(row) if c != GAP]
    if not bases:
        return len(row), -1
    return bases[0], bases[-1]


def identity_fraction(pair: AlignedPair) -> float:
    if not len(pair):
        return 0.0
    same = sum(1 for a, b in pair.columns() if a == b and a != GAP)
    return same / len(pair)


def strip_gaps(row: str) -> str:
    return row.replace(GAP, "")
