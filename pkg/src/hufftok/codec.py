"""Render codes as Unicode symbols and encode/decode text line by line.

Encoded files hold one sentence per line.  Every unit (a code symbol, the
word separator, or the unknown marker) is a single character and units
are separated by single ASCII spaces.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
import unicodedata
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Union

from hufftok._parallel import map_chunks
from hufftok.corpus import Preprocessor
from hufftok.errors import HufftokError, MappingError, SymbolRangeError
from hufftok.hufftree import Code, CodeMapping

DEFAULT_BASE = 0x4E00
DEFAULT_SEPARATOR = 0x2420
DEFAULT_UNKNOWN = 0xFFFD
MAX_SYMBOLS = 100_000

_BAD_CATEGORIES = {"Cc", "Cf", "Cs", "Zs", "Zl", "Zp"}


def _usable(cp: int) -> bool:
    ch = chr(cp)
    return unicodedata.category(ch) not in _BAD_CATEGORIES and not ch.isspace()


@lru_cache(maxsize=32)
def _first_unusable(start: int, stop: int) -> int | None:
    for cp in range(start, stop):
        if not _usable(cp):
            return cp
    return None


@dataclass(frozen=True)
class SymbolAlphabet:
    """Symbol index ``i`` is written as the character ``chr(base + i)``."""

    n: int
    base: int = DEFAULT_BASE
    separator: int = DEFAULT_SEPARATOR
    unknown: int = DEFAULT_UNKNOWN

    def __post_init__(self):
        if self.n < 1:
            raise SymbolRangeError(f"alphabet needs at least one symbol, got n={self.n}")
        if self.n > MAX_SYMBOLS:
            raise SymbolRangeError(f"at most {MAX_SYMBOLS} symbols are supported, got {self.n}")
        stop = self.base + self.n
        if self.base < 0 or stop > 0x110000:
            raise SymbolRangeError(f"symbol range {self.base:#x}..{stop - 1:#x} leaves Unicode")
        bad = _first_unusable(self.base, stop)
        if bad is not None:
            raise SymbolRangeError(
                f"symbol range {self.base:#x}..{stop - 1:#x} contains U+{bad:04X}, "
                "which is whitespace, a control/format character or a surrogate; "
                "use fewer symbols or another base codepoint"
            )
        for name in ("separator", "unknown"):
            cp = getattr(self, name)
            if self.base <= cp < stop:
                raise SymbolRangeError(f"{name} U+{cp:04X} lies inside the symbol range")
            if not 0 <= cp < 0x110000 or not _usable(cp):
                raise SymbolRangeError(f"{name} U+{cp:04X} is not a printable character")
        if self.separator == self.unknown:
            raise SymbolRangeError("separator and unknown marker must differ")

    @property
    def sep_char(self) -> str:
        return chr(self.separator)

    @property
    def unk_char(self) -> str:
        return chr(self.unknown)

    def symbol(self, index: int) -> str:
        if not 0 <= index < self.n:
            raise SymbolRangeError(f"symbol index {index} outside [0, {self.n})")
        return chr(self.base + index)

    def index(self, ch: str) -> int | None:
        """Symbol index of ``ch``, or None if it is not a code symbol."""
        if len(ch) != 1:
            return None
        i = ord(ch) - self.base
        return i if 0 <= i < self.n else None


def render_code(code: Sequence[int], alphabet: SymbolAlphabet) -> str:
    """Code -> string of symbol characters, one character per index."""
    return "".join(alphabet.symbol(i) for i in code)


def parse_code(text: str, alphabet: SymbolAlphabet) -> Code:
    code = []
    for ch in text:
        i = alphabet.index(ch)
        if i is None:
            raise SymbolRangeError(f"U+{ord(ch):04X} is not a symbol of this alphabet")
        code.append(i)
    return tuple(code)


# ---------------------------------------------------------------------------
# line-level reference functions

def encode_line(tokens: Sequence[str], mapping: CodeMapping, alphabet: SymbolAlphabet) -> list[str]:
    """Encode one tokenized sentence into a list of single-character units."""
    units: list[str] = []
    for pos, tok in enumerate(tokens):
        if pos:
            units.append(alphabet.sep_char)
        code = mapping.get(tok)
        if code is None:
            units.append(alphabet.unk_char)
        else:
            units.extend(render_code(code, alphabet))
    return units


def _runs(units: Iterable[str], sep: str) -> list[list[str]]:
    runs: list[list[str]] = []
    current: list[str] = []
    for unit in units:
        if unit == sep:
            if current:
                runs.append(current)
            current = []
        else:
            current.append(unit)
    if current:
        runs.append(current)
    return runs


def decode_line(
    units: Iterable[str], mapping: CodeMapping, alphabet: SymbolAlphabet
) -> tuple[list[str], int]:
    """Decode units back to tokens.

    Returns ``(tokens, skipped)`` where ``skipped`` counts runs between
    separators that do not spell a word of the mapping.  Empty runs (from
    doubled separators) are ignored altogether.
    """
    tokens: list[str] = []
    skipped = 0
    for run in _runs(units, alphabet.sep_char):
        code = [alphabet.index(u) for u in run]
        word = None if None in code else mapping.word(tuple(code))
        if word is None:
            skipped += 1
        else:
            tokens.append(word)
    return tokens, skipped


# ---------------------------------------------------------------------------
# stats

@dataclass(frozen=True)
class EncodeStats:
    lines: int = 0
    tokens: int = 0
    oov_tokens: int = 0

    @property
    def oov_rate(self) -> float:
        return self.oov_tokens / self.tokens if self.tokens else 0.0

    def __add__(self, other: EncodeStats) -> EncodeStats:
        return EncodeStats(
            self.lines + other.lines, self.tokens + other.tokens, self.oov_tokens + other.oov_tokens
        )

    def to_dict(self) -> dict:
        return {"lines": self.lines, "tokens": self.tokens,
                "oov_tokens": self.oov_tokens, "oov_rate": self.oov_rate}


@dataclass(frozen=True)
class DecodeStats:
    lines: int = 0
    runs: int = 0
    skipped_runs: int = 0

    @property
    def skipped_rate(self) -> float:
        return self.skipped_runs / self.runs if self.runs else 0.0

    def __add__(self, other: DecodeStats) -> DecodeStats:
        return DecodeStats(
            self.lines + other.lines, self.runs + other.runs, self.skipped_runs + other.skipped_runs
        )

    def to_dict(self) -> dict:
        return {"lines": self.lines, "runs": self.runs,
                "skipped_runs": self.skipped_runs, "skipped_rate": self.skipped_rate}


CodecStats = Union[EncodeStats, DecodeStats]


# ---------------------------------------------------------------------------
# fast path

class Codec:
    """Mapping + alphabet with precomputed string tables.

    Gives the same results as :func:`encode_line` / :func:`decode_line`
    but works on whole strings, which is what corpus-scale jobs need.
    """

    def __init__(self, mapping: CodeMapping, alphabet: SymbolAlphabet):
        if mapping.n != alphabet.n:
            raise SymbolRangeError(f"mapping has n={mapping.n} but alphabet has n={alphabet.n}")
        self.mapping = mapping
        self.alphabet = alphabet
        self._sep = alphabet.sep_char
        self._unk = alphabet.unk_char
        self._joiner = f" {self._sep} "
        rendered = {w: render_code(c, alphabet) for w, c in mapping.word_to_code.items()}
        self._enc = {w: " ".join(s) for w, s in rendered.items()}
        self._dec = {s: w for w, s in rendered.items()}

    def encode(self, tokens: Sequence[str]) -> tuple[str, int]:
        """Return the encoded line and its number of OOV tokens."""
        enc = self._enc
        parts = [enc.get(t) for t in tokens]
        oov = parts.count(None)
        if oov:
            parts = [self._unk if p is None else p for p in parts]
        return self._joiner.join(parts), oov

    def decode(self, line: str) -> tuple[list[str], int, int]:
        """Return ``(tokens, runs, skipped)`` for one encoded line."""
        units = line.split()
        dec = self._dec
        tokens: list[str] = []
        runs = skipped = 0
        packed = "".join(units)
        if len(packed) == len(units):
            groups = packed.split(self._sep)
        else:
            # a unit longer than one character can never match; poison its run
            groups = ["".join(u if len(u) == 1 else "\0" for u in run)
                      for run in _runs(units, self._sep)]
        for g in groups:
            if not g:
                continue
            runs += 1
            word = dec.get(g)
            if word is None:
                skipped += 1
            else:
                tokens.append(word)
        return tokens, runs, skipped


# ---------------------------------------------------------------------------
# mapping files

MAPPING_MAGIC = "#hufftok-mapping"


def _mapping_body(mapping: CodeMapping, alphabet: SymbolAlphabet) -> str:
    return "".join(
        f"{word}\t{render_code(code, alphabet)}\n" for word, code in mapping.word_to_code.items()
    )


def mapping_digest(mapping: CodeMapping, alphabet: SymbolAlphabet) -> str:
    return hashlib.sha256(_mapping_body(mapping, alphabet).encode("utf-8")).hexdigest()


def save_mapping(mapping: CodeMapping, path: str | Path, alphabet: SymbolAlphabet | None = None) -> str:
    """Write a mapping TSV and return its content hash."""
    alphabet = alphabet or SymbolAlphabet(mapping.n)
    body = _mapping_body(mapping, alphabet)
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    header = "\t".join([
        MAPPING_MAGIC,
        f"n={mapping.n}",
        f"types={len(mapping)}",
        f"total={mapping.total_tokens}",
        f"base={alphabet.base:x}",
        f"sep={alphabet.separator:x}",
        f"unk={alphabet.unknown:x}",
        f"sha256={digest}",
    ])
    atomic_write_text(path, header + "\n" + body)
    return digest


def load_mapping(path: str | Path) -> tuple[CodeMapping, SymbolAlphabet]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise MappingError(f"{path}: mapping file not found") from None
    except UnicodeDecodeError as exc:
        raise MappingError(f"{path}: not valid UTF-8 ({exc})") from None

    header, _, body = text.partition("\n")
    fields = header.split("\t")
    if fields[0] != MAPPING_MAGIC:
        raise MappingError(f"{path}: missing '{MAPPING_MAGIC}' header")
    try:
        meta = dict(f.split("=", 1) for f in fields[1:])
        n, types, total = int(meta["n"]), int(meta["types"]), int(meta["total"])
        alphabet = SymbolAlphabet(n, int(meta["base"], 16), int(meta["sep"], 16), int(meta["unk"], 16))
        expected = meta["sha256"]
    except (KeyError, ValueError) as exc:
        raise MappingError(f"{path}: malformed header ({exc})") from None

    actual = hashlib.sha256(body.encode("utf-8")).hexdigest()
    if actual != expected:
        raise MappingError(
            f"{path}: content hash mismatch (header sha256={expected}, body sha256={actual}); "
            "the file was modified or truncated"
        )

    entries = {}
    for lineno, line in enumerate(body.splitlines(), 2):
        word, sep, code_str = line.partition("\t")
        if not sep or not word or not code_str:
            raise MappingError(f"{path}:{lineno}: expected 'word<TAB>code'")
        try:
            entries[word] = parse_code(code_str, alphabet)
        except SymbolRangeError as exc:
            raise MappingError(f"{path}:{lineno}: {exc}") from None
    if len(entries) != types:
        raise MappingError(f"{path}: header says {types} types, found {len(entries)}")
    return CodeMapping(n, entries, total), alphabet


# ---------------------------------------------------------------------------
# corpus-level streaming

def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def read_lines(path: str | Path) -> Iterable[str]:
    """Yield lines without their terminators; decoding errors name the line."""
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, 1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise HufftokError(f"{path}:{lineno}: invalid UTF-8 ({exc.reason})") from None
            if lineno == 1:
                line = line.removeprefix("\ufeff")
            yield line.rstrip("\n").rstrip("\r")


def _stream_to(dst: str | Path, chunks: Iterable[tuple[list[str], object]]):
    """Write text chunks to ``dst`` atomically; yield each chunk's stats."""
    dst = Path(dst)
    fd, tmp = tempfile.mkstemp(dir=dst.parent, prefix=f".{dst.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for lines, stats in chunks:
                fh.writelines(line + "\n" for line in lines)
                yield stats
        os.replace(tmp, dst)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _make_encoder(mapping, alphabet, preprocess):
    return Codec(mapping, alphabet), preprocess


def _encode_chunk(state, lines):
    codec, preprocess = state
    out = []
    tokens_total = oov_total = 0
    for line in lines:
        tokens = preprocess(line)
        text, oov = codec.encode(tokens)
        out.append(text)
        tokens_total += len(tokens)
        oov_total += oov
    return out, EncodeStats(len(lines), tokens_total, oov_total)


def _make_decoder(mapping, alphabet):
    return Codec(mapping, alphabet)


def _decode_chunk(codec, lines):
    out = []
    runs_total = skipped_total = 0
    for line in lines:
        tokens, runs, skipped = codec.decode(line)
        out.append(" ".join(tokens))
        runs_total += runs
        skipped_total += skipped
    return out, DecodeStats(len(lines), runs_total, skipped_total)


def encode_corpus(
    src: str | Path,
    dst: str | Path,
    mapping: CodeMapping,
    alphabet: SymbolAlphabet,
    preprocess: Callable[[str], list[str]] | None = None,
    workers: int = 1,
    chunk_size: int = 10_000,
) -> EncodeStats:
    """Encode ``src`` line by line into ``dst``.

    ``preprocess`` turns a raw line into tokens (default: whitespace split,
    i.e. the input is already tokenized).  The output file only appears
    once every line has been written.
    """
    preprocess = preprocess or Preprocessor(tokenize=False)
    chunks = map_chunks(_encode_chunk, read_lines(src), _make_encoder,
                        (mapping, alphabet, preprocess), workers, chunk_size)
    total = EncodeStats()
    for stats in _stream_to(dst, chunks):
        total += stats
    return total


def decode_corpus(
    src: str | Path,
    dst: str | Path,
    mapping: CodeMapping,
    alphabet: SymbolAlphabet,
    workers: int = 1,
    chunk_size: int = 10_000,
) -> DecodeStats:
    """Decode ``src`` into space-joined tokens, one sentence per line."""
    chunks = map_chunks(_decode_chunk, read_lines(src), _make_decoder,
                        (mapping, alphabet), workers, chunk_size)
    total = DecodeStats()
    for stats in _stream_to(dst, chunks):
        total += stats
    return total
