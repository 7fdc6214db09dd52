"""Entropy coding of op-code streams and location gaps.

Two backends: a canonical Huffman coder over the op-code alphabet 1..8,
and zlib/DEFLATE for op bytes and for LEB128-serialized location gaps.
"""

from __future__ import annotations

import heapq
import zlib
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    CorruptStreamError,
    DanglingBitsError,
    EmptyDistributionError,
    SymbolNotInModelError,
    TruncatedBitsError,
)

SYMBOLS = tuple(range(1, 9))
DEFLATE_LEVEL = 9


@dataclass(frozen=True)
class BitStream:
    bits: bytes = b""
    bit_count: int = 0

    def __post_init__(self):
        if len(self.bits) != (self.bit_count + 7) // 8:
            raise ValueError(
                f"{self.bit_count} bits need {(self.bit_count + 7) // 8} bytes, got {len(self.bits)}"
            )


@dataclass
class HuffmanModel:
    frequencies: dict = field(default_factory=dict)
    code_lengths: dict = field(default_factory=dict)
    codewords: dict = field(default_factory=dict)

    @classmethod
    def from_lengths(cls, lengths: Mapping[int, int], frequencies=None) -> "HuffmanModel":
        lengths = {s: l for s, l in lengths.items() if l}
        return cls(
            frequencies=dict(frequencies or {}),
            code_lengths=lengths,
            codewords=canonical_codewords(lengths),
        )

    def lengths_vector(self) -> list[int]:
        """Code length per symbol 1..8, zero for unused symbols."""
        return [self.code_lengths.get(s, 0) for s in SYMBOLS]

    def kraft_sum(self):
        from fractions import Fraction

        return sum(Fraction(1, 2 ** l) for l in self.code_lengths.values())

    def expected_length(self) -> float:
        total = sum(self.frequencies.values())
        return sum(f * self.code_lengths[s] for s, f in self.frequencies.items() if f) / total


def huffman_code_lengths(frequencies: Mapping[int, float]) -> dict[int, int]:
    """Huffman code lengths; equal weights merge the lower-symbol subtree first."""
    live = {s: w for s, w in frequencies.items() if w > 0}
    if not live:
        raise EmptyDistributionError("no symbol has a nonzero frequency")
    if len(live) == 1:
        return {next(iter(live)): 1}

    lengths = dict.fromkeys(live, 0)
    # (weight, lowest symbol in subtree, symbols in subtree)
    heap = [(w, s, (s,)) for s, w in live.items()]
    heapq.heapify(heap)
    while len(heap) > 1:
        w1, k1, syms1 = heapq.heappop(heap)
        w2, k2, syms2 = heapq.heappop(heap)
        for s in syms1 + syms2:
            lengths[s] += 1
        heapq.heappush(heap, (w1 + w2, min(k1, k2), syms1 + syms2))
    return lengths


def canonical_codewords(lengths: Mapping[int, int]) -> dict[int, tuple[int, int]]:
    """Assign canonical codes in (length, symbol) order: symbol -> (code, length)."""
    codewords = {}
    code = 0
    prev_len = 0
    for sym, length in sorted(lengths.items(), key=lambda kv: (kv[1], kv[0])):
        code <<= length - prev_len
        codewords[sym] = (code, length)
        code += 1
        prev_len = length
    return codewords


def build_huffman(frequencies: Mapping[int, float]) -> HuffmanModel:
    lengths = huffman_code_lengths(frequencies)
    return HuffmanModel.from_lengths(lengths, frequencies)


def huffman_encode(ops: Iterable[int], model: HuffmanModel) -> BitStream:
    table = {s: format(code, f"0{length}b") for s, (code, length) in model.codewords.items()}
    try:
        bits = "".join([table[op] for op in ops])
    except KeyError as exc:
        raise SymbolNotInModelError(f"op-code {exc.args[0]} has no codeword") from None
    n = len(bits)
    if not n:
        return BitStream(b"", 0)
    pad = -n % 8
    value = int(bits, 2) << pad
    return BitStream(value.to_bytes((n + pad) // 8, "big"), n)


def _decode_table(model: HuffmanModel):
    """Lookup keyed by the next ``max_len`` bits -> (symbol, length)."""
    max_len = max(l for _, l in model.codewords.values())
    table = [None] * (1 << max_len)
    for sym, (code, length) in model.codewords.items():
        shift = max_len - length
        start = code << shift
        for k in range(start, start + (1 << shift)):
            table[k] = (sym, length)
    return table, max_len


def huffman_decode(bits, model: HuffmanModel, n_symbols: int) -> list[int]:
    """Decode ``n_symbols`` op-codes.

    ``bits`` is a :class:`BitStream` or raw bytes (then every bit counts as
    valid and up to 7 trailing pad bits are tolerated).
    """
    if isinstance(bits, BitStream):
        data, bit_count = bits.bits, bits.bit_count
    else:
        data, bit_count = bytes(bits), 8 * len(bits)
    if n_symbols == 0:
        if bit_count > 7:
            raise DanglingBitsError(f"{bit_count} unused bits after 0 symbols")
        return []
    if not model.codewords:
        raise SymbolNotInModelError("empty Huffman model cannot decode symbols")

    table, max_len = _decode_table(model)
    stream = format(int.from_bytes(data, "big"), f"0{8 * len(data)}b")[:bit_count]
    stream += "0" * max_len  # lookahead padding, never counted as consumed
    out = []
    pos = 0
    for _ in range(n_symbols):
        entry = table[int(stream[pos:pos + max_len], 2)]
        if entry is None:
            if pos >= bit_count:
                raise TruncatedBitsError(f"stream ended after {len(out)} of {n_symbols} symbols")
            raise CorruptStreamError(f"invalid codeword at bit {pos}")
        sym, length = entry
        if pos + length > bit_count:
            raise TruncatedBitsError(f"stream ended after {len(out)} of {n_symbols} symbols")
        out.append(sym)
        pos += length
    if bit_count - pos > 7:
        raise DanglingBitsError(f"{bit_count - pos} unused bits after {n_symbols} symbols")
    return out


def deflate_compress(payload: bytes) -> bytes:
    return zlib.compress(bytes(payload), DEFLATE_LEVEL)


def deflate_decompress(compressed: bytes) -> bytes:
    d = zlib.decompressobj()
    try:
        out = d.decompress(bytes(compressed))
    except zlib.error as exc:
        raise CorruptStreamError(f"zlib: {exc}") from None
    if not d.eof:
        raise CorruptStreamError("zlib stream is truncated")
    if d.unused_data:
        raise CorruptStreamError(f"{len(d.unused_data)} bytes after end of zlib stream")
    return out


def varint_encode(values: Iterable[int]) -> bytes:
    """Unsigned LEB128: low 7 bits first, high bit set on all but the last byte."""
    out = bytearray()
    for value in values:
        if value < 0:
            raise ValueError(f"cannot varint-encode negative value {value}")
        while value > 0x7F:
            out.append((value & 0x7F) | 0x80)
            value >>= 7
        out.append(value)
    return bytes(out)


def varint_decode(data: bytes) -> list[int]:
    values = []
    value = shift = 0
    pending = False
    for byte in data:
        value |= (byte & 0x7F) << shift
        if byte & 0x80:
            shift += 7
            pending = True
            if shift > 63:
                raise CorruptStreamError("varint longer than 64 bits")
        else:
            values.append(value)
            value = shift = 0
            pending = False
    if pending:
        raise CorruptStreamError("truncated varint")
    return values


def encode_locations(gaps: Iterable[int]) -> bytes:
    return deflate_compress(varint_encode(gaps))


def decode_locations(payload: bytes) -> list[int]:
    return varint_decode(deflate_decompress(payload))
