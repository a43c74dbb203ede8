"""Comparison tokenizers: most-frequent-words vocabulary and plain BPE."""

from __future__ import annotations

import heapq
from bisect import bisect_right
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from hufftok.codec import SymbolAlphabet, atomic_write_text
from hufftok.corpus import FrequencyTable
from hufftok.errors import HufftokError, SymbolRangeError

MARKER = "▁"

Pair = tuple[str, str]


# ---------------------------------------------------------------------------
# top-k words

@dataclass(frozen=True)
class TopKVocab:
    """The ``k`` most frequent words; a word's rank is its symbol index."""

    words: tuple[str, ...]
    k: int
    _rank: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        object.__setattr__(self, "_rank", {w: i for i, w in enumerate(self.words)})

    def __contains__(self, word: object) -> bool:
        return word in self._rank

    def __len__(self) -> int:
        return len(self.words)

    def rank(self, word: str) -> int | None:
        return self._rank.get(word)

    def save(self, path: str | Path) -> None:
        atomic_write_text(path, "".join(f"{w}\t{i}\n" for i, w in enumerate(self.words)))

    @classmethod
    def load(cls, path: str | Path, k: int | None = None) -> TopKVocab:
        ranked = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                word, sep, rank = line.rstrip("\n").rpartition("\t")
                if not sep:
                    raise HufftokError(f"{path}:{lineno}: expected 'word<TAB>rank'")
                ranked.append((int(rank), word))
        ranked.sort()
        if [r for r, _ in ranked] != list(range(len(ranked))):
            raise HufftokError(f"{path}: ranks must be 0..{len(ranked) - 1} without gaps")
        return cls(tuple(w for _, w in ranked), k if k is not None else max(len(ranked), 1))


def build_topk(freqs: FrequencyTable, k: int) -> TopKVocab:
    """Keep the ``k`` most frequent types.

    For a joint source+target vocabulary pass ``src_table + tgt_table``.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return TopKVocab(tuple(w for w, _ in freqs.most_common(k)), k)


def topk_encode(tokens: Sequence[str], vocab: TopKVocab, alphabet: SymbolAlphabet) -> list[str]:
    if alphabet.n < len(vocab):
        raise SymbolRangeError(f"alphabet has {alphabet.n} symbols but vocabulary has {len(vocab)} words")
    units: list[str] = []
    for pos, tok in enumerate(tokens):
        if pos:
            units.append(alphabet.sep_char)
        rank = vocab.rank(tok)
        units.append(alphabet.unk_char if rank is None else alphabet.symbol(rank))
    return units


def topk_decode(units: Iterable[str], vocab: TopKVocab, alphabet: SymbolAlphabet) -> tuple[list[str], int]:
    tokens: list[str] = []
    skipped = 0
    for unit in units:
        if unit == alphabet.sep_char:
            continue
        i = alphabet.index(unit)
        if i is None or i >= len(vocab):
            skipped += 1
        else:
            tokens.append(vocab.words[i])
    return tokens, skipped


# ---------------------------------------------------------------------------
# BPE

@dataclass(frozen=True)
class MergeList:
    merges: tuple[Pair, ...] = ()
    marker: str = MARKER

    def __len__(self) -> int:
        return len(self.merges)

    def ranks(self) -> dict[Pair, list[int]]:
        """Positions of each pair in the merge list, ascending."""
        ranks: dict[Pair, list[int]] = {}
        for i, pair in enumerate(self.merges):
            ranks.setdefault(pair, []).append(i)
        return ranks

    def symbols(self, initial: Iterable[str]) -> set[str]:
        """Every symbol reachable from ``initial`` through the merges."""
        vocab = set(initial)
        vocab.update(left + right for left, right in self.merges)
        return vocab

    def save(self, path: str | Path) -> None:
        lines = [f"#version: 0.2 marker={self.marker}\n"]
        lines += [f"{left} {right}\n" for left, right in self.merges]
        atomic_write_text(path, "".join(lines))

    @classmethod
    def load(cls, path: str | Path) -> MergeList:
        marker = MARKER
        merges = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if lineno == 1 and line.startswith("#version:"):
                    for part in line.split()[1:]:
                        if part.startswith("marker="):
                            marker = part[len("marker="):]
                    continue
                parts = line.split(" ")
                if len(parts) != 2 or not all(parts):
                    raise HufftokError(f"{path}:{lineno}: expected 'left right'")
                merges.append((parts[0], parts[1]))
        return cls(tuple(merges), marker)


def _initial_symbols(word: str, marker: str) -> list[str]:
    return [marker, *word]


def _merge_pair(symbols: list[str], pair: Pair) -> list[str]:
    left, right = pair
    out: list[str] = []
    i, end = 0, len(symbols) - 1
    while i < len(symbols):
        if i < end and symbols[i] == left and symbols[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def _pair_counts(symbols: Sequence[str]) -> Counter:
    """Adjacent pairs, counted the way a left-to-right merge would consume them.

    Runs of one repeated symbol such as ``a a a`` hold only one mergeable
    ``(a, a)`` pair, not two.
    """
    counts: Counter = Counter()
    skip_at = -1
    for i in range(len(symbols) - 1):
        pair = (symbols[i], symbols[i + 1])
        if pair[0] == pair[1]:
            if i == skip_at:
                continue
            skip_at = i + 1
        counts[pair] += 1
    return counts


def bpe_learn(freqs: FrequencyTable, num_merges: int, marker: str = MARKER) -> MergeList:
    """Learn up to ``num_merges`` merges from word frequencies.

    Each step merges the pair with the highest frequency-weighted count,
    ties going to the smallest ``(left, right)``.  Only words containing
    the merged pair are re-counted, so the cost per step is proportional
    to the number of affected words.
    """
    if num_merges < 0:
        raise ValueError(f"num_merges must be >= 0, got {num_merges}")

    words = [_initial_symbols(w, marker) for w in freqs]
    weights = [freqs[w] for w in freqs]
    pair_count: Counter = Counter()
    where: dict[Pair, set[int]] = {}
    for idx, symbols in enumerate(words):
        for pair, c in _pair_counts(symbols).items():
            pair_count[pair] += c * weights[idx]
            where.setdefault(pair, set()).add(idx)

    heap = [(-c, pair) for pair, c in pair_count.items()]
    heapq.heapify(heap)

    merges: list[Pair] = []
    while len(merges) < num_merges:
        while heap:
            neg, pair = heap[0]
            if pair_count.get(pair, 0) == -neg and neg < 0:
                break
            heapq.heappop(heap)
        if not heap:
            break
        heapq.heappop(heap)
        merges.append(pair)

        touched: set[Pair] = set()
        for idx in sorted(where.pop(pair, ())):
            old = words[idx]
            new = _merge_pair(old, pair)
            before, after = _pair_counts(old), _pair_counts(new)
            w = weights[idx]
            for p, c in before.items():
                pair_count[p] -= c * w
                touched.add(p)
                if p not in after and p != pair:
                    where[p].discard(idx)
            for p, c in after.items():
                pair_count[p] += c * w
                touched.add(p)
                where.setdefault(p, set()).add(idx)
            words[idx] = new
        for p in touched:
            c = pair_count[p]
            if c > 0:
                heapq.heappush(heap, (-c, p))
            else:
                del pair_count[p]
                where.pop(p, None)

    return MergeList(tuple(merges), marker)


class BPESegmenter:
    """Applies a merge list to words, caching results per word type."""

    def __init__(self, merges: MergeList):
        self.merges = merges
        self._ranks = merges.ranks()
        self._cache: dict[str, tuple[str, ...]] = {}

    def __call__(self, word: str) -> tuple[str, ...]:
        cached = self._cache.get(word)
        if cached is None:
            cached = self._cache[word] = self._segment(word)
        return cached

    def _segment(self, word: str) -> tuple[str, ...]:
        ranks = self._ranks
        symbols = _initial_symbols(word, self.merges.marker)
        last = -1
        # equivalent to walking the merge list in order: pick the earliest
        # merge after the last one applied that occurs in the word
        while len(symbols) > 1:
            best = None
            for i in range(len(symbols) - 1):
                positions = ranks.get((symbols[i], symbols[i + 1]))
                if positions is None or positions[-1] <= last:
                    continue
                r = positions[bisect_right(positions, last)]
                if best is None or r < best:
                    best = r
            if best is None:
                break
            symbols = _merge_pair(symbols, self.merges.merges[best])
            last = best
        return tuple(symbols)


def bpe_segment(word: str, merges: MergeList) -> list[str]:
    return list(BPESegmenter(merges)(word))
