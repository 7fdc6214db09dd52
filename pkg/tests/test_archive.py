import io
import random
import struct
import zlib

import pytest

from conftest import mutate, random_dna
from oracles import zlib_inflate
from rdc.alignment import GLOBAL, SEMI_GLOBAL, AlignParams
from rdc.archive import (
    DEFLATE,
    HUFFMAN,
    MAGIC,
    Archive,
    ArchiveReader,
    compress_set,
    decompress_one,
    decompress_set,
    load_archive,
    metrics,
    report,
)
from rdc.entropy import varint_decode
from rdc.errors import (
    CorruptStreamError,
    DataError,
    InvalidSymbolError,
    LengthMismatchError,
    SizeLimitExceededError,
    UnknownIdError,
)
from rdc.sequence_io import Sequence, SequenceSet, parse_fasta
from rdc.synthetic import generate_synthetic_set

BACKENDS = pytest.mark.parametrize("backend", [HUFFMAN, DEFLATE])


def as_tuples(seqs):
    return [(s.id, s.bases) for s in seqs]


def round_trip(seqs, **kwargs):
    archive = compress_set(seqs, **kwargs)
    blob = archive.to_bytes()
    restored = decompress_set(load_archive(blob))
    return archive, blob, restored


@pytest.fixture(scope="module")
def synthetic50():
    return generate_synthetic_set(2000, 49, snp_rate=0.01, ins_rate=0.001, del_rate=0.001, seed=42)


@BACKENDS
def test_single_sequence(backend):
    seqs = SequenceSet([Sequence("only", "GATTACA")])
    archive, _, restored = round_trip(seqs, backend=backend)
    assert archive.records == []
    assert as_tuples(restored) == [("only", "GATTACA")]


@BACKENDS
def test_identical_copies_have_no_ops(backend):
    seqs = SequenceSet([Sequence(f"c{i}", "ACGTTGCA" * 20) for i in range(4)])
    archive, _, restored = round_trip(seqs, backend=backend)
    assert [r.n_ops for r in archive.records] == [0, 0, 0]
    assert as_tuples(restored) == as_tuples(seqs)


@BACKENDS
@pytest.mark.parametrize("mode", [GLOBAL, SEMI_GLOBAL])
def test_synthetic_round_trip(synthetic50, backend, mode):
    assert len(synthetic50) == 50
    _, _, restored = round_trip(synthetic50, backend=backend, params=AlignParams(mode=mode))
    assert as_tuples(restored) == as_tuples(synthetic50)


def test_reference_index_restored():
    rng = random.Random(1)
    base = random_dna(rng, 300)
    seqs = SequenceSet([Sequence(f"s{i}", mutate(rng, base, 0.02, 0.01, 0.01)) for i in range(5)], 3)
    archive, _, restored = round_trip(seqs)
    assert archive.reference_id == "s3"
    assert restored.reference_index == 3
    assert as_tuples(restored) == as_tuples(seqs)


def test_parallel_compression_is_deterministic(synthetic50):
    serial = compress_set(synthetic50).to_bytes()
    threaded = compress_set(synthetic50, workers=4).to_bytes()
    assert serial == threaded


def test_huffman_model_is_pooled(synthetic50):
    archive = compress_set(synthetic50, backend=HUFFMAN)
    assert sum(1 for l in archive.huffman_lengths if l) >= 2
    assert compress_set(synthetic50, backend=DEFLATE).huffman_lengths == [0] * 8


def test_header_layout(synthetic50):
    blob = compress_set(synthetic50).to_bytes()
    magic, version, backend, reserved, id_len = struct.unpack_from("<4sBBHH", blob)
    assert (magic, version, backend, reserved) == (MAGIC, 1, 0, 0)
    assert blob[10:10 + id_len] == b"ref"
    (n_bases,) = struct.unpack_from("<Q", blob, 10 + id_len)
    assert n_bases == 2000
    pos = 10 + id_len + 8 + 500 + 8
    count, ref_index = struct.unpack_from("<II", blob, pos)
    assert (count, ref_index) == (49, 0)
    directory = [struct.unpack_from("<QQ", blob, pos + 8 + 16 * i) for i in range(count)]
    records_start = pos + 8 + 16 * count
    assert directory[0][0] == records_start
    (crc,) = struct.unpack_from("<I", blob, len(blob) - 4)
    assert crc == zlib.crc32(blob[:records_start])
    for offset, length in directory:
        body = blob[offset:offset + length - 4]
        assert struct.unpack_from("<I", blob, offset + length - 4)[0] == zlib.crc32(body)


def test_locations_payload_is_rfc1950(synthetic50):
    archive = compress_set(synthetic50)
    for record in archive.records:
        gaps = varint_decode(zlib_inflate(record.locations_payload))
        assert len(gaps) == record.n_ops


def test_deflate_ops_payload_is_rfc1950(synthetic50):
    archive = compress_set(synthetic50, backend=DEFLATE)
    for record in archive.records[:5]:
        ops = zlib_inflate(record.ops_payload)
        assert len(ops) == record.n_ops and set(ops) <= set(range(1, 9))


@BACKENDS
def test_flipped_bytes_are_detected(synthetic50, backend):
    blob = compress_set(generate_synthetic_set(300, 5, 0.03, 0.01, 0.01, seed=3), backend=backend).to_bytes()
    rng = random.Random(99)
    for _ in range(200):
        damaged = bytearray(blob)
        damaged[rng.randrange(len(blob))] ^= 1 << rng.randrange(8)
        with pytest.raises((CorruptStreamError, LengthMismatchError)):
            decompress_set(load_archive(bytes(damaged)))


def test_truncated_archive():
    blob = compress_set(generate_synthetic_set(100, 3, 0.05, seed=1)).to_bytes()
    for cut in (0, 3, 20, len(blob) // 2, len(blob) - 1):
        with pytest.raises(CorruptStreamError):
            load_archive(blob[:cut])


def test_corrupt_record_names_target():
    seqs = generate_synthetic_set(200, 2, 0.05, seed=2)
    archive = compress_set(seqs, backend=DEFLATE)
    record = archive.records[1]
    record.target_length += 1
    with pytest.raises(LengthMismatchError) as info:
        decompress_set(load_archive(archive.to_bytes()))
    assert info.value.target_id == "t2"


def test_decompress_one_in_memory(synthetic50):
    archive = compress_set(synthetic50)
    full = {s.id: s.bases for s in decompress_set(archive)}
    assert decompress_one(archive, "ref").bases == synthetic50.reference.bases
    for seq_id in ("t1", "t17", "t49"):
        assert decompress_one(archive, seq_id).bases == full[seq_id]
    with pytest.raises(UnknownIdError):
        decompress_one(archive, "nope")


def test_reader_fetch(synthetic50):
    blob = compress_set(synthetic50).to_bytes()
    reader = ArchiveReader(io.BytesIO(blob))
    expected = {s.id: s.bases for s in synthetic50}
    for seq_id in ("ref", "t5", "t49"):
        assert decompress_one(reader, seq_id).bases == expected[seq_id]
    with pytest.raises(UnknownIdError):
        reader.fetch("missing")


def test_invalid_input_propagates():
    with pytest.raises(InvalidSymbolError):
        compress_set(parse_fasta(b">a\nACGT\n>b\nACGX\n"))


def test_size_limit_propagates():
    seqs = SequenceSet([Sequence("a", "A" * 100), Sequence("b", "A" * 100)])
    with pytest.raises(SizeLimitExceededError):
        compress_set(seqs, params=AlignParams(cell_budget=1000))


def test_metrics_formulas():
    rep = metrics(1000, 250, 100, 150)
    assert rep.compression_ratio == 0.25
    assert rep.space_saving == 0.75
    assert rep.fold == 4.0
    same = metrics(500, 500)
    assert (same.compression_ratio, same.space_saving) == (1.0, 0.0)


def test_report_of_archive(synthetic50):
    archive = compress_set(synthetic50)
    rep = report(synthetic50, archive)
    assert rep.uncompressed_bytes == sum(len(s) for s in synthetic50)
    assert rep.compressed_bytes == rep.differences_bytes + rep.locations_bytes
    assert rep.locations_bytes == sum(len(r.locations_payload) for r in archive.records)
    assert rep.archive_bytes == len(archive.to_bytes())
    assert rep.space_saving == 1 - rep.compression_ratio
    assert rep.fold == rep.uncompressed_bytes / rep.compressed_bytes
    # the archive alone knows every length, so the set is optional
    assert report(None, archive) == rep


def test_load_archive_sources(tmp_path, synthetic50):
    blob = compress_set(synthetic50).to_bytes()
    path = tmp_path / "x.rdca"
    path.write_bytes(blob)
    assert load_archive(str(path)).to_bytes() == blob
    assert load_archive(path).to_bytes() == blob
    assert load_archive(io.BytesIO(blob)).to_bytes() == blob
    assert Archive.from_bytes(blob).to_bytes() == blob
