"""Synthetic Zipf-distributed corpora for tests, benchmarks and demos."""

from __future__ import annotations

import math
import string

import numpy as np

from hufftok.corpus import FrequencyTable


def zipf_counts(num_types: int, total_tokens: int, s: float = 1.0) -> list[int]:
    """Integer counts proportional to ``rank**-s`` that sum to ``total_tokens``.

    Every type gets at least one occurrence; leftovers go to the largest
    fractional parts (lower rank wins ties).
    """
    if num_types < 1:
        raise ValueError("num_types must be >= 1")
    if total_tokens < num_types:
        raise ValueError(f"{total_tokens} tokens cannot cover {num_types} types")
    weights = np.arange(1, num_types + 1, dtype=np.float64) ** -s
    raw = total_tokens * weights / weights.sum()
    counts = np.maximum(np.floor(raw).astype(np.int64), 1)
    diff = total_tokens - int(counts.sum())
    if diff > 0:
        order = np.lexsort((np.arange(num_types), -(raw - np.floor(raw))))
        counts[order[:diff]] += 1
    i = 0
    while diff < 0:
        # only reachable when the floor-at-one lifted many tail types
        if counts[i] > 1:
            counts[i] -= 1
            diff += 1
        i = (i + 1) % num_types
    return counts.tolist()


def make_words(num_types: int, seed: int = 0, letters: str = string.ascii_lowercase) -> list[str]:
    """Distinct pseudo-words; lower ranks tend to be shorter, as in real text."""
    rng = np.random.default_rng(seed)
    alphabet = np.array(list(letters))
    words: list[str] = []
    seen: set[str] = set()
    while len(words) < num_types:
        rank = len(words) + 1
        mean = 2.0 + 1.1 * math.log(rank)
        length = int(np.clip(rng.normal(mean, 1.5), 1, 18))
        word = "".join(rng.choice(alphabet, size=length))
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def zipf_table(num_types: int, total_tokens: int, s: float = 1.0, seed: int = 0) -> FrequencyTable:
    words = make_words(num_types, seed)
    return FrequencyTable(zip(words, zipf_counts(num_types, total_tokens, s)))


def corpus_lines(freqs: FrequencyTable, seed: int = 0, mean_length: int = 20) -> list[str]:
    """Shuffle every token occurrence of ``freqs`` into space-joined lines."""
    words = list(freqs)
    tokens = np.repeat(np.arange(len(words)), [freqs[w] for w in words])
    rng = np.random.default_rng(seed)
    rng.shuffle(tokens)
    lines = []
    pos = 0
    while pos < len(tokens):
        length = max(1, int(rng.poisson(mean_length)))
        lines.append(" ".join(words[i] for i in tokens[pos:pos + length]))
        pos += length
    return lines


def sample_zipf_table(
    num_types: int, total_tokens: int, s: float = 1.0, seed: int = 0
) -> FrequencyTable:
    """Draw ``total_tokens`` i.i.d. tokens from a Zipf law over ``num_types`` words.

    Unlike :func:`zipf_table` the result has a realistic hapax tail and some
    rare types never occur.
    """
    words = make_words(num_types, seed)
    p = np.arange(1, num_types + 1, dtype=np.float64) ** -s
    p /= p.sum()
    rng = np.random.default_rng(seed)
    counts = np.bincount(rng.choice(num_types, size=total_tokens, p=p), minlength=num_types)
    return FrequencyTable({words[i]: int(c) for i, c in enumerate(counts) if c})
