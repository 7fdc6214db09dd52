"""Reference-based differential compression of homologous DNA sequence sets."""

from .alignment import AlignedPair, AlignParams, align, alignment_score, identity_fraction
from .archive import (
    Archive,
    ArchiveReader,
    CompressedRecord,
    CompressionReport,
    compress_set,
    decompress_one,
    decompress_set,
    format_report,
    load_archive,
    metrics,
    report,
)
from .diffcodec import DiffRecord, delta_decode, delta_encode, opcode, reconstruct, record_diffs
from .entropy import (
    BitStream,
    HuffmanModel,
    build_huffman,
    deflate_compress,
    deflate_decompress,
    huffman_decode,
    huffman_encode,
)
from .errors import RDCError
from .sequence_io import Sequence, SequenceSet, pack_2bit, parse_fasta, unpack_2bit, write_fasta
from .synthetic import generate_synthetic_set

__version__ = "0.1.0"
