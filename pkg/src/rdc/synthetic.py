"""Synthetic homologous sequence sets for desk-scale experiments."""

from __future__ import annotations

import numpy as np

from .errors import InvalidRateError
from .sequence_io import Sequence, SequenceSet

_BASES = np.frombuffer(b"ACGT", dtype=np.uint8)
_NONE = 255


def _mutate(rng, ref, snp_rate, ins_rate, del_rate):
    n = ref.size
    inserted = np.where(rng.random(n) < ins_rate, rng.integers(0, 4, n), _NONE)
    deleted = rng.random(n) < del_rate
    substituted = rng.random(n) < snp_rate
    # shift by 1..3 gives a uniform choice among the three other bases
    kept = np.where(substituted, (ref + rng.integers(1, 4, n)) % 4, ref)
    kept = np.where(deleted, _NONE, kept)
    # each reference position emits [inserted base][kept base]
    out = np.stack([inserted, kept], axis=1).reshape(-1)
    return out[out != _NONE].astype(np.uint8)


def generate_synthetic_set(reference_length: int, n_targets: int, snp_rate: float = 0.0,
                           ins_rate: float = 0.0, del_rate: float = 0.0,
                           seed: int = 0) -> SequenceSet:
    """Random reference plus ``n_targets`` independently mutated copies.

    Per reference base, independently: an inserted base before it with
    probability ``ins_rate``, deletion with ``del_rate``, otherwise
    substitution with ``snp_rate``. The reference is record 0 (id ``ref``),
    targets are ``t1..tN``. A target that ends up empty is redrawn.
    """
    for name, rate in (("snp_rate", snp_rate), ("ins_rate", ins_rate), ("del_rate", del_rate)):
        if not 0.0 <= rate < 0.5:
            raise InvalidRateError(f"{name}={rate} outside [0, 0.5)")
    if reference_length < 1:
        raise ValueError("reference_length must be >= 1")
    if n_targets < 0:
        raise ValueError("n_targets must be >= 0")

    rng = np.random.default_rng(seed)
    ref = rng.integers(0, 4, reference_length).astype(np.uint8)
    seqs = [Sequence("ref", _BASES[ref].tobytes().decode("ascii"))]
    for k in range(1, n_targets + 1):
        codes = _mutate(rng, ref, snp_rate, ins_rate, del_rate)
        while codes.size == 0:
            codes = _mutate(rng, ref, snp_rate, ins_rate, del_rate)
        seqs.append(Sequence(f"t{k}", _BASES[codes].tobytes().decode("ascii")))
    return SequenceSet(seqs, 0)
