"""Command-line front end: ``rdc compress|decompress|fetch|stats|inspect|gen``."""

from __future__ import annotations

import argparse
import io
import logging
import os
import sys
import tempfile
from contextlib import contextmanager

from . import __version__
from .alignment import GLOBAL, SEMI_GLOBAL, AlignParams
from .archive import (
    BACKENDS,
    DEFLATE,
    HUFFMAN,
    ArchiveReader,
    archive_from_diffs,
    decompress_set,
    diff_set,
    format_report,
    load_archive,
    report,
)
from .errors import InvalidRateError, RDCError
from .sequence_io import SequenceSet, parse_fasta, write_fasta
from .synthetic import generate_synthetic_set

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

log = logging.getLogger("rdc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rdc", description="Reference-based differential compression of DNA sequence sets.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress a FASTA file into an archive")
    p.add_argument("input", help="FASTA file, or - for stdin")
    p.add_argument("output", help="archive path, or - for stdout")
    p.add_argument("--ref-id", help="id of the reference record (default: first record)")
    p.add_argument("--backend", choices=BACKENDS, default=HUFFMAN)
    p.add_argument("--compare", action="store_true",
                   help="also report the compressed differences size under every backend")
    p.add_argument("--align", choices=("global", "semi-global"), default="semi-global")
    p.add_argument("--match", type=int, default=2)
    p.add_argument("--mismatch", type=int, default=-1)
    p.add_argument("--gap", type=int, default=-2)
    p.add_argument("--jobs", type=int, default=1, help="alignment threads")

    p = sub.add_parser("decompress", help="restore the FASTA file from an archive")
    p.add_argument("archive")
    p.add_argument("output", nargs="?", default="-")
    p.add_argument("--width", type=int, default=60, help="FASTA line width")

    p = sub.add_parser("fetch", help="decode a single sequence")
    p.add_argument("archive")
    p.add_argument("output", nargs="?", default="-")
    p.add_argument("--id", required=True, dest="target_id")
    p.add_argument("--width", type=int, default=60)

    p = sub.add_parser("stats", help="print the compression report of an archive")
    p.add_argument("archive")

    p = sub.add_parser("inspect", help="dump the archive header and record directory")
    p.add_argument("archive")

    p = sub.add_parser("gen", help="write a synthetic FASTA data set")
    p.add_argument("output", nargs="?", default="-")
    p.add_argument("--len", type=int, default=10_000, dest="length")
    p.add_argument("--n", type=int, default=10, dest="n_targets")
    p.add_argument("--snp", type=float, default=0.01)
    p.add_argument("--ins", type=float, default=0.0)
    p.add_argument("--del", type=float, default=0.0, dest="deletion")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=60)
    return parser


class _Streams:
    def __init__(self, stdin, stdout, stderr):
        self.stdin = stdin
        self.stdout = stdout
        self.stderr = stderr

    def err(self, text: str):
        self.stderr.write(text if text.endswith("\n") else text + "\n")


def _read_input(path: str, streams: _Streams) -> bytes:
    if path == "-":
        return streams.stdin.read()
    with open(path, "rb") as fh:
        return fh.read()


@contextmanager
def _atomic_output(path: str, streams: _Streams):
    """Yield a binary buffer; it reaches ``path`` only if the block succeeds."""
    buf = io.BytesIO()
    yield buf
    if path == "-":
        streams.stdout.write(buf.getvalue())
        streams.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".rdc-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(buf.getvalue())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _text_out(path: str, streams: _Streams):
    # reports go to stderr when stdout carries binary payload
    return streams.err if path == "-" else (lambda t: streams.stdout.write(t.encode("utf-8")))


def cmd_compress(args, streams: _Streams) -> int:
    seqs = parse_fasta(_read_input(args.input, streams))
    if args.ref_id is not None:
        try:
            index = seqs.index_of(args.ref_id)
        except KeyError:
            raise RDCError(f"reference id {args.ref_id!r} not found") from None
        seqs = SequenceSet(seqs.sequences, index)
    try:
        params = AlignParams(args.match, args.mismatch, args.gap,
                             GLOBAL if args.align == "global" else SEMI_GLOBAL)
    except ValueError as exc:
        raise UsageError(f"rdc compress: error: {exc}") from None

    diffs = diff_set(seqs, params, max(1, args.jobs))
    archive = archive_from_diffs(seqs, diffs, args.backend)
    with _atomic_output(args.output, streams) as out:
        out.write(archive.to_bytes())

    emit = _text_out(args.output, streams)
    emit(format_report(report(seqs, archive)))
    if args.compare:
        raw_ops = sum(len(d.ops) for d in diffs)
        lines = ["", f"{'backend':<12}{'differences':>14}", f"{'raw ops':<12}{raw_ops:>14,d}"]
        keyvals = [f"compare.raw_bytes={raw_ops}"]
        for backend in (HUFFMAN, DEFLATE):
            rep = report(seqs, archive if backend == args.backend else archive_from_diffs(seqs, diffs, backend))
            lines.append(f"{backend:<12}{rep.differences_bytes:>14,d}")
            keyvals.append(f"compare.{backend}.differences_bytes={rep.differences_bytes}")
            keyvals.append(f"compare.{backend}.compressed_bytes={rep.compressed_bytes}")
        emit("\n".join(lines + [""] + keyvals) + "\n")
    return EXIT_OK


def cmd_decompress(args, streams: _Streams) -> int:
    seqs = decompress_set(load_archive(_read_input(args.archive, streams)))
    with _atomic_output(args.output, streams) as out:
        out.write(write_fasta(seqs, args.width))
    return EXIT_OK


def cmd_fetch(args, streams: _Streams) -> int:
    if args.archive == "-":
        reader = ArchiveReader(io.BytesIO(streams.stdin.read()))
        seq = reader.fetch(args.target_id)
    else:
        with open(args.archive, "rb") as fh:
            seq = ArchiveReader(fh).fetch(args.target_id)
    with _atomic_output(args.output, streams) as out:
        out.write(write_fasta(SequenceSet([seq]), args.width))
    return EXIT_OK


def cmd_stats(args, streams: _Streams) -> int:
    archive = load_archive(_read_input(args.archive, streams))
    streams.stdout.write(format_report(report(None, archive)).encode("utf-8"))
    return EXIT_OK


def cmd_inspect(args, streams: _Streams) -> int:
    data = _read_input(args.archive, streams)
    reader = ArchiveReader(io.BytesIO(data))
    lines = [
        f"format_version={reader.format_version}",
        f"backend={reader.backend}",
        f"reference_id={reader.reference_id}",
        f"reference_length={reader.reference_length}",
        f"reference_index={reader.reference_index}",
        f"huffman_lengths={','.join(map(str, reader.huffman_lengths))}",
        f"record_count={reader.record_count}",
        f"header_bytes={reader.header_size}",
        f"archive_bytes={reader.size}",
        "",
        f"{'#':>6}  {'offset':>10}  {'bytes':>8}  {'length':>10}  {'ops':>8}  id",
    ]
    for i, (offset, length) in enumerate(reader.directory):
        rec = reader.read_record(i)
        lines.append(f"{i:>6}  {offset:>10}  {length:>8}  {rec.target_length:>10}  {rec.n_ops:>8}  {rec.target_id}")
    streams.stdout.write(("\n".join(lines) + "\n").encode("utf-8"))
    return EXIT_OK


def cmd_gen(args, streams: _Streams) -> int:
    try:
        seqs = generate_synthetic_set(args.length, args.n_targets, args.snp, args.ins,
                                      args.deletion, args.seed)
    except (ValueError, InvalidRateError) as exc:
        raise UsageError(f"rdc gen: error: {exc}") from None
    with _atomic_output(args.output, streams) as out:
        out.write(write_fasta(seqs, args.width))
    return EXIT_OK


COMMANDS = {
    "compress": cmd_compress,
    "decompress": cmd_decompress,
    "fetch": cmd_fetch,
    "stats": cmd_stats,
    "inspect": cmd_inspect,
    "gen": cmd_gen,
}


def _source_of(args) -> str:
    for name in ("input", "archive"):
        path = getattr(args, name, None)
        if path:
            return "<stdin>" if path == "-" else path
    return "rdc"


def run(argv, stdin=None, stdout=None, stderr=None) -> int:
    """Run one CLI invocation; returns the exit code instead of exiting."""
    streams = _Streams(
        stdin if stdin is not None else sys.stdin.buffer,
        stdout if stdout is not None else sys.stdout.buffer,
        stderr if stderr is not None else sys.stderr,
    )
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        streams.err(str(exc))
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, streams)
    except UsageError as exc:
        streams.err(str(exc))
        return EXIT_USAGE
    except (RDCError, ValueError) as exc:
        streams.err(f"rdc {args.command}: {_source_of(args)}: {exc}")
        return EXIT_DATA
    except OSError as exc:
        streams.err(f"rdc {args.command}: {exc}")
        return EXIT_DATA


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
