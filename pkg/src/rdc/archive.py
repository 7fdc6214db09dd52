"""Reference-plus-differences archive: container format and pipeline.

Binary layout (little-endian)::

    magic "RDCA" | version u8 | backend u8 (0 huffman, 1 deflate) | reserved u16
    ref_id_len u16 | ref_id | ref_base_count u64 | ref_packed (ceil(n/4) bytes)
    huffman_lengths 8 x u8 (zeros for deflate)
    record_count u32 | ref_index u32
    directory: record_count x (offset u64, byte_len u64)     offsets are absolute
    records:   id_len u16 | id | target_length u64 | n_ops u64
               | ops_len u64 | ops_payload | loc_len u64 | loc_payload | crc32 u32
    header crc32 u32  (covers every byte before the first record)

Each record carries its own CRC and can be decoded without touching any other
record's bytes beyond its id prefix.
"""

from __future__ import annotations

import io
import logging
import os
import struct
import zlib
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import BinaryIO, Optional, Union

from .alignment import AlignParams, align
from .diffcodec import DiffRecord, delta_decode, delta_encode, reconstruct, record_diffs
from .entropy import (
    SYMBOLS,
    HuffmanModel,
    build_huffman,
    decode_locations,
    deflate_compress,
    deflate_decompress,
    encode_locations,
    huffman_decode,
    huffman_encode,
)
from .errors import CorruptStreamError, DataError, LengthMismatchError, UnknownIdError
from .sequence_io import Sequence, SequenceSet, pack_2bit, packed_size, unpack_2bit

log = logging.getLogger(__name__)

MAGIC = b"RDCA"
FORMAT_VERSION = 1
HUFFMAN = "huffman"
DEFLATE = "deflate"
BACKENDS = (HUFFMAN, DEFLATE)
_BACKEND_CODES = {HUFFMAN: 0, DEFLATE: 1}

_PREAMBLE = struct.Struct("<4sBBHH")  # magic, version, backend, reserved, ref_id_len
_U64 = struct.Struct("<Q")
_U32 = struct.Struct("<I")
_U16 = struct.Struct("<H")
_COUNTS = struct.Struct("<II")  # record_count, ref_index
_DIR_ENTRY = struct.Struct("<QQ")
_RECORD_MIN = 2 + 8 + 8 + 8 + 8 + 4


@dataclass
class CompressedRecord:
    target_id: str
    target_length: int
    n_ops: int
    ops_payload: bytes
    locations_payload: bytes

    def to_bytes(self) -> bytes:
        rid = self.target_id.encode("utf-8")
        body = b"".join([
            _U16.pack(len(rid)), rid,
            _U64.pack(self.target_length), _U64.pack(self.n_ops),
            _U64.pack(len(self.ops_payload)), self.ops_payload,
            _U64.pack(len(self.locations_payload)), self.locations_payload,
        ])
        return body + _U32.pack(zlib.crc32(body))

    @classmethod
    def from_bytes(cls, data: bytes) -> "CompressedRecord":
        if len(data) < _RECORD_MIN:
            raise CorruptStreamError(f"record of {len(data)} bytes is too short")
        body, (crc,) = data[:-4], _U32.unpack(data[-4:])
        if zlib.crc32(body) != crc:
            raise CorruptStreamError("record checksum mismatch")
        try:
            view = _Cursor(body)
            rid = view.take(view.u16()).decode("utf-8")
            target_length = view.u64()
            n_ops = view.u64()
            ops = view.take(view.u64())
            locs = view.take(view.u64())
        except (struct.error, UnicodeDecodeError) as exc:
            raise CorruptStreamError(f"malformed record: {exc}") from None
        if view.remaining():
            raise CorruptStreamError("trailing bytes inside record")
        return cls(rid, target_length, n_ops, ops, locs)


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CorruptStreamError("unexpected end of data")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u16(self):
        return _U16.unpack(self.take(2))[0]

    def u64(self):
        return _U64.unpack(self.take(8))[0]

    def remaining(self):
        return len(self.data) - self.pos


@dataclass
class Archive:
    backend: str
    reference_id: str
    reference_length: int
    reference_packed: bytes
    huffman_lengths: list = field(default_factory=lambda: [0] * 8)
    records: list = field(default_factory=list)
    reference_index: int = 0
    format_version: int = FORMAT_VERSION

    @property
    def reference(self) -> Sequence:
        return Sequence(self.reference_id, unpack_2bit(self.reference_packed, self.reference_length))

    def huffman_model(self) -> Optional[HuffmanModel]:
        if self.backend != HUFFMAN:
            return None
        return _model_from_lengths(self.huffman_lengths)

    def ids(self) -> list[str]:
        ids = [r.target_id for r in self.records]
        ids.insert(self.reference_index, self.reference_id)
        return ids

    def _header_bytes(self, record_blobs) -> bytes:
        rid = self.reference_id.encode("utf-8")
        head = b"".join([
            _PREAMBLE.pack(MAGIC, self.format_version, _BACKEND_CODES[self.backend], 0, len(rid)),
            rid,
            _U64.pack(self.reference_length),
            self.reference_packed,
            bytes(self.huffman_lengths),
            _COUNTS.pack(len(record_blobs), self.reference_index),
        ])
        offset = len(head) + _DIR_ENTRY.size * len(record_blobs)
        directory = []
        for blob in record_blobs:
            directory.append(_DIR_ENTRY.pack(offset, len(blob)))
            offset += len(blob)
        return head + b"".join(directory)

    def to_bytes(self) -> bytes:
        blobs = [r.to_bytes() for r in self.records]
        header = self._header_bytes(blobs)
        return header + b"".join(blobs) + _U32.pack(zlib.crc32(header))

    @classmethod
    def from_bytes(cls, data: bytes) -> "Archive":
        reader = ArchiveReader(io.BytesIO(data))
        records = [reader.read_record(i) for i in range(reader.record_count)]
        return reader.to_archive(records)


def _model_from_lengths(lengths) -> HuffmanModel:
    table = {s: l for s, l in zip(SYMBOLS, lengths) if l}
    if table:
        kraft = sum(2.0 ** -l for l in table.values())
        if kraft > 1.0 or max(table.values()) > 32:
            raise CorruptStreamError(f"Huffman lengths {list(lengths)} do not form a prefix code")
    return HuffmanModel.from_lengths(table)


class ArchiveReader:
    """Random-access view of a serialized archive on a seekable binary file.

    Only the header and directory are read up front; :meth:`fetch` reads the
    id prefix of records until it finds the requested one, then that one
    record in full.
    """

    def __init__(self, fp: BinaryIO):
        self.fp = fp
        fp.seek(0, os.SEEK_END)
        self.size = fp.tell()
        fp.seek(0)
        self._parse_header()
        self._ids: list[Optional[str]] = [None] * self.record_count

    def _read(self, n: int) -> bytes:
        data = self.fp.read(n)
        if len(data) != n:
            raise CorruptStreamError("archive is truncated")
        return data

    def _parse_header(self):
        raw = bytearray()

        def take(n):
            chunk = self._read(n)
            raw.extend(chunk)
            return chunk

        try:
            magic, version, backend, _reserved, id_len = _PREAMBLE.unpack(take(_PREAMBLE.size))
        except CorruptStreamError:
            raise CorruptStreamError("not an RDCA archive (too short)") from None
        if magic != MAGIC:
            raise CorruptStreamError(f"bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise CorruptStreamError(f"unsupported format version {version}")
        if backend not in (0, 1):
            raise CorruptStreamError(f"unknown backend code {backend}")
        self.format_version = version
        self.backend = BACKENDS[backend]
        try:
            self.reference_id = take(id_len).decode("utf-8")
        except UnicodeDecodeError:
            raise CorruptStreamError("reference id is not UTF-8") from None
        (self.reference_length,) = _U64.unpack(take(8))
        if packed_size(self.reference_length) > self.size:
            raise CorruptStreamError("reference length exceeds archive size")
        self.reference_packed = take(packed_size(self.reference_length))
        self.huffman_lengths = list(take(8))
        self.record_count, self.reference_index = _COUNTS.unpack(take(_COUNTS.size))
        if _DIR_ENTRY.size * self.record_count > self.size:
            raise CorruptStreamError("record count exceeds archive size")
        directory = take(_DIR_ENTRY.size * self.record_count)
        self.directory = list(_DIR_ENTRY.iter_unpack(directory))
        self.header_size = len(raw)

        self.fp.seek(self.size - 4)
        (crc,) = _U32.unpack(self._read(4))
        if zlib.crc32(bytes(raw)) != crc:
            raise CorruptStreamError("header checksum mismatch")
        self._check_directory()
        if self.backend == HUFFMAN:
            self.model = _model_from_lengths(self.huffman_lengths)
        else:
            if any(self.huffman_lengths):
                raise CorruptStreamError("Huffman lengths set on a deflate archive")
            self.model = None
        if self.reference_index > self.record_count:
            raise CorruptStreamError(f"reference index {self.reference_index} out of range")

    def _check_directory(self):
        expected = self.header_size
        for offset, length in self.directory:
            if offset != expected or length < _RECORD_MIN:
                raise CorruptStreamError("record directory is inconsistent")
            expected += length
        if expected != self.size - 4:
            raise CorruptStreamError("record directory does not match archive size")

    @property
    def reference(self) -> Sequence:
        return Sequence(self.reference_id, unpack_2bit(self.reference_packed, self.reference_length))

    def record_id(self, index: int) -> str:
        if self._ids[index] is None:
            offset, length = self.directory[index]
            self.fp.seek(offset)
            (id_len,) = _U16.unpack(self._read(2))
            if 2 + id_len > length:
                raise CorruptStreamError("record id overruns record")
            try:
                self._ids[index] = self._read(id_len).decode("utf-8")
            except UnicodeDecodeError:
                raise CorruptStreamError("record id is not UTF-8") from None
        return self._ids[index]

    def read_record(self, index: int) -> CompressedRecord:
        offset, length = self.directory[index]
        self.fp.seek(offset)
        record = CompressedRecord.from_bytes(self._read(length))
        self._ids[index] = record.target_id
        return record

    def fetch(self, target_id: str) -> Sequence:
        if target_id == self.reference_id:
            return self.reference
        for index in range(self.record_count):
            if self.record_id(index) == target_id:
                record = self.read_record(index)
                return decode_record(self.reference, record, self.backend, self.model)
        raise UnknownIdError(target_id)

    def to_archive(self, records) -> Archive:
        return Archive(
            backend=self.backend,
            reference_id=self.reference_id,
            reference_length=self.reference_length,
            reference_packed=self.reference_packed,
            huffman_lengths=self.huffman_lengths,
            records=list(records),
            reference_index=self.reference_index,
            format_version=self.format_version,
        )


def _diff_one(reference: Sequence, target: Sequence, params: AlignParams) -> DiffRecord:
    return record_diffs(align(reference, target, params), target.id)


def diff_set(seqs: SequenceSet, params: AlignParams = AlignParams(), workers: int = 1) -> list[DiffRecord]:
    """Align and diff every non-reference sequence, in input order."""
    reference = seqs.reference
    targets = [s for i, s in enumerate(seqs) if i != seqs.reference_index]
    if workers > 1 and len(targets) > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda t: _diff_one(reference, t, params), targets))
    return [_diff_one(reference, t, params) for t in targets]


def pooled_frequencies(diffs) -> dict[int, int]:
    counts = Counter()
    for d in diffs:
        counts.update(d.ops)
    return {s: counts.get(s, 0) for s in SYMBOLS}


def encode_ops(ops, backend: str, model: Optional[HuffmanModel]) -> bytes:
    if backend == HUFFMAN:
        if not ops:
            return b""
        return huffman_encode(ops, model).bits
    return deflate_compress(bytes(ops))


def decode_ops(payload: bytes, n_ops: int, backend: str, model: Optional[HuffmanModel]) -> list[int]:
    if backend == HUFFMAN:
        return huffman_decode(payload, model, n_ops)
    ops = list(deflate_decompress(payload))
    if len(ops) != n_ops:
        raise CorruptStreamError(f"expected {n_ops} op-codes, decoded {len(ops)}")
    return ops


def encode_record(diff: DiffRecord, backend: str, model: Optional[HuffmanModel]) -> CompressedRecord:
    return CompressedRecord(
        target_id=diff.target_id,
        target_length=diff.target_length,
        n_ops=len(diff.ops),
        ops_payload=encode_ops(diff.ops, backend, model),
        locations_payload=encode_locations(delta_encode(diff.locations)),
    )


def decode_record(reference: Sequence, record: CompressedRecord, backend: str,
                  model: Optional[HuffmanModel]) -> Sequence:
    try:
        ops = decode_ops(record.ops_payload, record.n_ops, backend, model)
        gaps = decode_locations(record.locations_payload)
        if len(gaps) != record.n_ops:
            raise CorruptStreamError(f"expected {record.n_ops} locations, decoded {len(gaps)}")
        diff = DiffRecord(ops, delta_decode(gaps), record.target_id, record.target_length)
        return reconstruct(reference, diff)
    except (LengthMismatchError, CorruptStreamError):
        raise
    except DataError as exc:
        raise CorruptStreamError(f"record {record.target_id!r}: {exc}") from exc


def compress_set(seqs: SequenceSet, params: AlignParams = AlignParams(),
                 backend: str = HUFFMAN, workers: int = 1) -> Archive:
    """Compress a sequence set against its reference.

    Targets are aligned and diffed first, then (for the Huffman backend) one
    code is built from op-code counts pooled over all targets and applied to
    every record.
    """
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}")
    diffs = diff_set(seqs, params, workers)
    return archive_from_diffs(seqs, diffs, backend)


def archive_from_diffs(seqs: SequenceSet, diffs, backend: str) -> Archive:
    reference = seqs.reference
    model = None
    lengths = [0] * 8
    if backend == HUFFMAN:
        freqs = pooled_frequencies(diffs)
        if any(freqs.values()):
            model = build_huffman(freqs)
            lengths = model.lengths_vector()
    records = [encode_record(d, backend, model) for d in diffs]
    log.debug("compressed %d records with %s backend", len(records), backend)
    return Archive(
        backend=backend,
        reference_id=reference.id,
        reference_length=len(reference),
        reference_packed=pack_2bit(reference),
        huffman_lengths=lengths,
        records=records,
        reference_index=seqs.reference_index,
    )


def decompress_set(archive: Archive) -> SequenceSet:
    reference = archive.reference
    model = archive.huffman_model()
    seqs = [decode_record(reference, r, archive.backend, model) for r in archive.records]
    seqs.insert(archive.reference_index, reference)
    return SequenceSet(seqs, archive.reference_index)


def decompress_one(archive: Union[Archive, ArchiveReader], target_id: str) -> Sequence:
    """Decode a single sequence without decoding any other record."""
    if isinstance(archive, ArchiveReader):
        return archive.fetch(target_id)
    if target_id == archive.reference_id:
        return archive.reference
    for record in archive.records:
        if record.target_id == target_id:
            return decode_record(archive.reference, record, archive.backend, archive.huffman_model())
    raise UnknownIdError(target_id)


def load_archive(source: Union[bytes, str, os.PathLike, BinaryIO]) -> Archive:
    if isinstance(source, (bytes, bytearray)):
        return Archive.from_bytes(bytes(source))
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return Archive.from_bytes(fh.read())
    return Archive.from_bytes(source.read())


@dataclass(frozen=True)
class CompressionReport:
    """Size accounting for one compressed set.

    ``compressed_bytes`` counts the compressed differences plus compressed
    locations; ``archive_bytes`` is the full container including the packed
    reference, directory and checksums.
    """

    uncompressed_bytes: int
    compressed_bytes: int
    differences_bytes: int = 0
    locations_bytes: int = 0
    archive_bytes: Optional[int] = None
    n_records: int = 0
    n_ops: int = 0

    @property
    def compression_ratio(self) -> float:
        return self.compressed_bytes / self.uncompressed_bytes

    @property
    def space_saving(self) -> float:
        return 1.0 - self.compression_ratio

    @property
    def fold(self) -> float:
        return self.uncompressed_bytes / self.compressed_bytes if self.compressed_bytes else float("inf")

    @property
    def uncompressed_2bit_bytes(self) -> int:
        return packed_size(self.uncompressed_bytes)

    @property
    def archive_ratio(self) -> Optional[float]:
        if self.archive_bytes is None:
            return None
        return self.archive_bytes / self.uncompressed_bytes

    @property
    def archive_fold(self) -> Optional[float]:
        if not self.archive_bytes:
            return None
        return self.uncompressed_bytes / self.archive_bytes

    def as_dict(self) -> dict:
        out = {
            "uncompressed_bytes": self.uncompressed_bytes,
            "uncompressed_2bit_bytes": self.uncompressed_2bit_bytes,
            "compressed_bytes": self.compressed_bytes,
            "differences_bytes": self.differences_bytes,
            "locations_bytes": self.locations_bytes,
            "compression_ratio": self.compression_ratio,
            "space_saving": self.space_saving,
            "fold": self.fold,
        }
        if self.archive_bytes is not None:
            out["archive_bytes"] = self.archive_bytes
            out["archive_ratio"] = self.archive_ratio
            out["archive_fold"] = self.archive_fold
            out["archive_fold_2bit"] = self.uncompressed_2bit_bytes / self.archive_bytes
        out["records"] = self.n_records
        out["ops"] = self.n_ops
        return out


def metrics(uncompressed_bytes: int, compressed_bytes: int, differences_bytes: int = 0,
            locations_bytes: int = 0, archive_bytes: Optional[int] = None) -> CompressionReport:
    if uncompressed_bytes <= 0:
        raise ValueError("uncompressed size must be positive")
    return CompressionReport(uncompressed_bytes, compressed_bytes, differences_bytes,
                             locations_bytes, archive_bytes)


def report(seqs: Optional[SequenceSet], archive: Archive) -> CompressionReport:
    if seqs is not None:
        uncompressed = sum(len(s) for s in seqs)
    else:
        uncompressed = archive.reference_length + sum(r.target_length for r in archive.records)
    differences = sum(len(r.ops_payload) for r in archive.records)
    if archive.backend == HUFFMAN and any(archive.huffman_lengths):
        differences += len(archive.huffman_lengths)
    locations = sum(len(r.locations_payload) for r in archive.records)
    return CompressionReport(
        uncompressed_bytes=uncompressed,
        compressed_bytes=differences + locations,
        differences_bytes=differences,
        locations_bytes=locations,
        archive_bytes=len(archive.to_bytes()),
        n_records=len(archive.records),
        n_ops=sum(r.n_ops for r in archive.records),
    )


def format_report(rep: CompressionReport) -> str:
    """Human-readable table followed by ``key=value`` lines."""
    lines = [
        f"{'uncompressed':<24}{rep.uncompressed_bytes:>14,d} B",
        f"{'differences':<24}{rep.differences_bytes:>14,d} B",
        f"{'locations':<24}{rep.locations_bytes:>14,d} B",
        f"{'compressed':<24}{rep.compressed_bytes:>14,d} B",
        f"{'compression ratio':<24}{rep.compression_ratio:>14.4f}",
        f"{'space saving':<24}{rep.space_saving * 100:>13.1f}%",
        f"{'fold':<24}{rep.fold:>14.1f}x",
    ]
    if rep.archive_bytes is not None:
        lines += [
            f"{'archive (self-contained)':<24}{rep.archive_bytes:>14,d} B",
            f"{'archive fold':<24}{rep.archive_fold:>14.1f}x",
        ]
    lines.append("")
    for key, value in rep.as_dict().items():
        lines.append(f"{key}={value:.6g}" if isinstance(value, float) else f"{key}={value}")
    return "\n".join(lines) + "\n"
