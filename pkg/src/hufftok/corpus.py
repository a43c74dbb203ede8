"""Corpus ingestion: word tokenization, truecasing, counting and splitting."""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from hufftok.errors import AlignmentError, HufftokError


# ---------------------------------------------------------------------------
# tokenization

def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch)[0] in "PS"


def tokenize_words(line: str) -> list[str]:
    """Split a sentence into word tokens.

    Whitespace separates chunks; punctuation and symbol characters at the
    edges of a chunk are peeled off one character at a time.  Anything
    inside a word (hyphens, apostrophes, digits) stays attached.

    >>> tokenize_words("low-cost, yes")
    ['low-cost', ',', 'yes']
    """
    tokens: list[str] = []
    for chunk in line.split():
        start, end = 0, len(chunk)
        while start < end and _is_punct(chunk[start]):
            start += 1
        while end > start and _is_punct(chunk[end - 1]):
            end -= 1
        tokens.extend(chunk[:start])
        if start < end:
            tokens.append(chunk[start:end])
        tokens.extend(chunk[end:])
    return tokens


# ---------------------------------------------------------------------------
# truecasing

@dataclass(frozen=True)
class TruecaseModel:
    canonical: Mapping[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.canonical)

    def get(self, word: str) -> str | None:
        return self.canonical.get(word.lower())

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for key in sorted(self.canonical):
                fh.write(f"{key}\t{self.canonical[key]}\n")

    @classmethod
    def load(cls, path: str | Path) -> TruecaseModel:
        canonical = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    key, surface = line.split("\t")
                except ValueError:
                    raise HufftokError(f"{path}:{lineno}: expected 'key<TAB>form'") from None
                canonical[key] = surface
        return cls(canonical)


def _most_frequent(forms: Counter) -> str:
    # highest count first, then codepoint order
    return min(forms.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def train_truecaser(lines: Iterable[Sequence[str]]) -> TruecaseModel:
    """Learn the preferred casing of each word.

    Sentence-initial positions are uninformative about casing, so they
    only count for words that never appear anywhere else.
    """
    inner: Counter = Counter()
    initial: Counter = Counter()
    for tokens in lines:
        if tokens:
            initial[tokens[0]] += 1
            inner.update(tokens[1:])
    return truecaser_from_counts(inner, initial)


def truecaser_from_counts(inner: Mapping[str, int], initial: Mapping[str, int]) -> TruecaseModel:
    """Truecaser from surface-form counts at non-initial and initial positions."""
    def group(counts):
        by_key: dict[str, Counter] = {}
        for tok, c in counts.items():
            by_key.setdefault(tok.lower(), Counter())[tok] += c
        return by_key

    canonical = {key: _most_frequent(forms) for key, forms in group(inner).items()}
    for key, forms in group(initial).items():
        if key not in canonical:
            canonical[key] = _most_frequent(forms)
    return TruecaseModel(canonical)


def truecase(tokens: Sequence[str], model: TruecaseModel) -> list[str]:
    out = list(tokens)
    if out:
        surface = model.get(out[0])
        if surface is not None:
            out[0] = surface
    return out


# ---------------------------------------------------------------------------
# frequency tables

class FrequencyTable(Mapping[str, int]):
    """Word counts for one language side.

    Iterates by decreasing count, ties in codepoint order.  That order is
    the insertion order used when building the Huffman tree.
    """

    __slots__ = ("_counts", "_order", "total_tokens")

    def __init__(self, counts: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = counts.items() if isinstance(counts, Mapping) else counts
        merged: dict[str, int] = {}
        for word, count in items:
            if not word:
                raise ValueError("empty word in frequency table")
            if count < 1:
                raise ValueError(f"count for {word!r} must be >= 1, got {count}")
            if word in merged:
                raise ValueError(f"duplicate word {word!r}")
            merged[word] = int(count)
        self._order = tuple(sorted(merged, key=lambda w: (-merged[w], w)))
        self._counts = merged
        self.total_tokens = sum(merged.values())

    def __getitem__(self, word: str) -> int:
        return self._counts[word]

    def __iter__(self) -> Iterator[str]:
        return iter(self._order)

    def __len__(self) -> int:
        return len(self._order)

    def __contains__(self, word: object) -> bool:
        return word in self._counts

    def __repr__(self) -> str:
        head = ", ".join(f"{w!r}: {self._counts[w]}" for w in self._order[:5])
        more = ", ..." if len(self) > 5 else ""
        return f"FrequencyTable({{{head}{more}}}, total_tokens={self.total_tokens})"

    def __add__(self, other: FrequencyTable) -> FrequencyTable:
        joint = Counter(self._counts)
        joint.update(other._counts)
        return FrequencyTable(joint)

    def most_common(self, k: int | None = None) -> list[tuple[str, int]]:
        words = self._order if k is None else self._order[:k]
        return [(w, self._counts[w]) for w in words]

    def to_tsv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for word in self._order:
                fh.write(f"{word}\t{self._counts[word]}\n")

    @classmethod
    def from_tsv(cls, path: str | Path) -> FrequencyTable:
        pairs = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                word, sep, count = line.rpartition("\t")
                if not sep:
                    raise HufftokError(f"{path}:{lineno}: expected 'word<TAB>count'")
                pairs.append((word, int(count)))
        return cls(pairs)


def count_frequencies(lines: Iterable[Sequence[str]]) -> FrequencyTable:
    counts: Counter = Counter()
    for tokens in lines:
        counts.update(tokens)
    return FrequencyTable(counts)


# ---------------------------------------------------------------------------
# train/test split

@dataclass(frozen=True)
class SplitSpec:
    rate: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.rate < 1.0:
            raise ValueError(f"split rate must lie in (0, 1), got {self.rate}")

    def test_size(self, total: int) -> int:
        # round half up, not to even
        return min(total, math.floor(self.rate * total + 0.5))


class ParallelLines(NamedTuple):
    source: list[str]
    target: list[str]


def split_corpus(
    source: Sequence[str], target: Sequence[str], spec: SplitSpec
) -> tuple[ParallelLines, ParallelLines, list[int]]:
    """Hold out a seeded random subset of line pairs as test data.

    Returns ``(train, test, test_indices)``; both halves keep the original
    line order.
    """
    if len(source) != len(target):
        raise AlignmentError(
            f"source has {len(source)} lines but target has {len(target)}"
        )
    total = len(source)
    k = spec.test_size(total)
    perm = np.random.default_rng(spec.seed).permutation(total)
    test_idx = sorted(int(i) for i in perm[:k])
    is_test = np.zeros(total, dtype=bool)
    is_test[test_idx] = True

    train = ParallelLines(
        [source[i] for i in range(total) if not is_test[i]],
        [target[i] for i in range(total) if not is_test[i]],
    )
    test = ParallelLines([source[i] for i in test_idx], [target[i] for i in test_idx])
    return train, test, test_idx


@dataclass(frozen=True)
class Preprocessor:
    """Raw line -> tokens, as applied before counting and encoding.

    Picklable so it can be shipped to worker processes.
    """

    tokenize: bool = True
    truecaser: TruecaseModel | None = None

    def __call__(self, line: str) -> list[str]:
        tokens = tokenize_words(line) if self.tokenize else line.split()
        if self.truecaser is not None:
            tokens = truecase(tokens, self.truecaser)
        return tokens
