"""FASTA reading/writing and 2-bit packing of nucleotide sequences."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import BinaryIO, Union

import numpy as np

from .errors import (
    DuplicateIdError,
    EmptyInputError,
    EmptyRecordError,
    InvalidSymbolError,
    TruncatedStreamError,
)

ALPHABET = "ACGT"

# A=00, C=01, G=10, T=11
_ENCODE = np.full(256, 255, dtype=np.uint8)
for _code, _base in enumerate(ALPHABET):
    _ENCODE[ord(_base)] = _code
_DECODE = np.frombuffer(ALPHABET.encode("ascii"), dtype=np.uint8)

_VALID_BYTES = b"ACGTacgt"
_STRIP_VALID = str.maketrans("", "", ALPHABET)


@dataclass(frozen=True)
class Sequence:
    id: str
    bases: str

    def __post_init__(self):
        if not self.bases:
            raise EmptyRecordError(self.id)
        bad = self.bases.translate(_STRIP_VALID)
        if bad:
            pos = next(i for i, b in enumerate(self.bases) if b not in ALPHABET)
            raise InvalidSymbolError(self.id, pos + 1, self.bases[pos])

    def __len__(self):
        return len(self.bases)



@dataclass
class SequenceSet:
    sequences: list[Sequence] = field(default_factory=list)
    reference_index: int = 0

    def __post_init__(self):
        if not self.sequences:
            raise EmptyInputError("sequence set is empty")
        if not 0 <= self.reference_index < len(self.sequences):
            raise IndexError(
                f"reference_index {self.reference_index} out of range "
                f"for {len(self.sequences)} sequences"
            )
        seen = set()
        for seq in self.sequences:
            if seq.id in seen:
                raise DuplicateIdError(seq.id)
            seen.add(seq.id)

    @property
    def reference(self) -> Sequence:
        return self.sequences[self.reference_index]

    def index_of(self, seq_id: str) -> int:
        for i, seq in enumerate(self.sequences):
            if seq.id == seq_id:
                return i
        raise KeyError(seq_id)

    def __len__(self):
        return len(self.sequences)

    def __iter__(self):
        return iter(self.sequences)


def _finish_record(record_id, chunks, records, seen):
    raw = b"".join(chunks)
    if not raw:
        raise EmptyRecordError(record_id)
    leftover = raw.translate(None, _VALID_BYTES)
    if leftover:
        for i, byte in enumerate(raw):
            if byte not in _VALID_BYTES:
                raise InvalidSymbolError(record_id, i + 1, chr(byte))
    if record_id in seen:
        raise DuplicateIdError(record_id)
    seen.add(record_id)
    records.append(Sequence(record_id, raw.upper().decode("ascii")))


def parse_fasta(source: Union[bytes, BinaryIO]) -> SequenceSet:
    """Parse FASTA records into a :class:`SequenceSet`.

    ``source`` is either raw bytes or a binary file object. The header text
    after ``>`` is kept verbatim as the id. Lowercase ``acgt`` are folded to
    uppercase; any other residue (``N``, IUPAC codes, ...) is rejected.
    The reference defaults to the first record.
    """
    if isinstance(source, (bytes, bytearray, memoryview)):
        source = io.BytesIO(bytes(source))

    records: list[Sequence] = []
    seen: set[str] = set()
    record_id = None
    chunks: list[bytes] = []
    for lineno, line in enumerate(source, start=1):
        if line.startswith(b">"):
            if record_id is not None:
                _finish_record(record_id, chunks, records, seen)
            record_id = line[1:].rstrip(b"\r\n").decode("utf-8")
            chunks = []
            continue
        stripped = line.strip()
        if not stripped:
            continue
        if record_id is None:
            raise InvalidSymbolError("<before first header>", 1, chr(stripped[0]))
        chunks.append(stripped)
    if record_id is not None:
        _finish_record(record_id, chunks, records, seen)

    if not records:
        raise EmptyInputError("no FASTA records found")
    return SequenceSet(records, 0)


def write_fasta(seqs: SequenceSet, line_width: int = 60) -> bytes:
    if line_width < 1:
        raise ValueError("line_width must be >= 1")
    out = []
    for seq in seqs:
        out.append(f">{seq.id}\n")
        bases = seq.bases
        for start in range(0, len(bases), line_width):
            out.append(bases[start:start + line_width])
            out.append("\n")
    return "".join(out).encode("utf-8")


def pack_2bit(seq: Union[Sequence, str]) -> bytes:
    """Pack bases four to a byte, first base in the two most significant bits.

    The final byte is zero-padded; the caller must keep the base count.
    """
    bases = seq.bases if isinstance(seq, Sequence) else seq
    codes = _ENCODE[np.frombuffer(bases.encode("ascii"), dtype=np.uint8)]
    if codes.size and codes.max() > 3:
        pos = int(np.argmax(codes > 3))
        raise InvalidSymbolError(getattr(seq, "id", "<bases>"), pos + 1, bases[pos])
    pad = (-codes.size) % 4
    if pad:
        codes = np.concatenate([codes, np.zeros(pad, dtype=np.uint8)])
    quads = codes.reshape(-1, 4)
    packed = (quads[:, 0] << 6) | (quads[:, 1] << 4) | (quads[:, 2] << 2) | quads[:, 3]
    return packed.astype(np.uint8).tobytes()


def packed_size(n_bases: int) -> int:
    return (n_bases + 3) // 4


def unpack_2bit(packed: bytes, n_bases: int) -> str:
    need = packed_size(n_bases)
    if len(packed) < need:
        raise TruncatedStreamError(
            f"{n_bases} bases need {need} packed bytes, got {len(packed)}"
        )
    arr = np.frombuffer(packed, dtype=np.uint8, count=need)
    codes = np.empty((need, 4), dtype=np.uint8)
    codes[:, 0] = arr >> 6
    codes[:, 1] = (arr >> 4) & 3
    codes[:, 2] = (arr >> 2) & 3
    codes[:, 3] = arr & 3
    return _DECODE[codes.reshape(-1)[:n_bases]].tobytes().decode("ascii")
