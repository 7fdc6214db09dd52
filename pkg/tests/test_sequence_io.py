import io
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdc.errors import (
    DuplicateIdError,
    EmptyInputError,
    EmptyRecordError,
    InvalidSymbolError,
    TruncatedStreamError,
)
from rdc.sequence_io import (
    Sequence,
    SequenceSet,
    pack_2bit,
    parse_fasta,
    unpack_2bit,
    write_fasta,
)

dna = st.text(alphabet="ACGT", min_size=1, max_size=10_000)


def test_parse_concatenates_lines():
    s = parse_fasta(b">r\nGATT\nACA\n")
    assert [(q.id, q.bases) for q in s] == [("r", "GATTACA")]
    assert s.reference_index == 0


def test_parse_normalizes_case():
    assert parse_fasta(b">a\nacgt\n").sequences[0].bases == "ACGT"


def test_parse_rejects_ambiguity_code():
    with pytest.raises(InvalidSymbolError) as info:
        parse_fasta(b">a\nACGN\n")
    assert info.value.record_id == "a"
    assert info.value.position == 4


def test_invalid_symbol_position_spans_lines():
    with pytest.raises(InvalidSymbolError) as info:
        parse_fasta(b">x\nACGT\nAcRT\n")
    assert (info.value.record_id, info.value.position, info.value.symbol) == ("x", 7, "R")


def test_parse_keeps_header_verbatim_and_strips_whitespace():
    s = parse_fasta(b">chrM  Homo sapiens mito\r\n  ACG  \r\n\nTT\n>b\nA")
    assert s.sequences[0].id == "chrM  Homo sapiens mito"
    assert s.sequences[0].bases == "ACGTT"
    assert s.sequences[1].bases == "A"


def test_parse_accepts_file_object():
    assert len(parse_fasta(io.BytesIO(b">a\nA\n>b\nC\n"))) == 2


@pytest.mark.parametrize("data", [b"", b"\n\n", b"   \n"])
def test_parse_empty(data):
    with pytest.raises(EmptyInputError):
        parse_fasta(data)


def test_parse_duplicate_id():
    with pytest.raises(DuplicateIdError):
        parse_fasta(b">a\nA\n>a\nC\n")


def test_parse_record_without_bases():
    with pytest.raises(EmptyRecordError):
        parse_fasta(b">a\n>b\nC\n")


def test_write_wraps():
    s = SequenceSet([Sequence("r", "GATTACA")])
    assert write_fasta(s, 4) == b">r\nGATT\nACA\n"
    assert write_fasta(SequenceSet([Sequence("x", "A")]), 60) == b">x\nA\n"


def test_write_rejects_zero_width():
    with pytest.raises(ValueError):
        write_fasta(SequenceSet([Sequence("x", "A")]), 0)


@settings(max_examples=50, deadline=None)
@given(st.lists(dna, min_size=1, max_size=5), st.integers(1, 100))
def test_fasta_round_trip(bases, width):
    s = SequenceSet([Sequence(f"s{i} desc", b) for i, b in enumerate(bases)])
    back = parse_fasta(write_fasta(s, width))
    assert [(q.id, q.bases) for q in back] == [(q.id, q.bases) for q in s]


def test_pack_examples():
    assert pack_2bit(Sequence("s", "ACGT")) == bytes([0x1B])
    assert pack_2bit("A") == b"\x00"
    assert unpack_2bit(b"\x1b", 4) == "ACGT"
    assert unpack_2bit(b"\x00", 1) == "A"


def test_unpack_truncated():
    with pytest.raises(TruncatedStreamError):
        unpack_2bit(b"\x1b", 5)


@settings(max_examples=200, deadline=None)
@given(dna)
def test_pack_round_trip(bases):
    packed = pack_2bit(bases)
    assert len(packed) == math.ceil(len(bases) / 4)
    assert unpack_2bit(packed, len(bases)) == bases


def test_sequence_rejects_bad_symbols():
    with pytest.raises(InvalidSymbolError):
        Sequence("s", "ACGu")
    with pytest.raises(EmptyRecordError):
        Sequence("s", "")


def test_sequence_set_invariants():
    with pytest.raises(IndexError):
        SequenceSet([Sequence("a", "A")], 1)
    with pytest.raises(DuplicateIdError):
        SequenceSet([Sequence("a", "A"), Sequence("a", "C")])
