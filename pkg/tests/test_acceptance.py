"""End-to-end acceptance checks, one verdict line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
happen; they are also repeated in the terminal summary.
"""

import hashlib
import json
import os
import subprocess
import sys
import time
from collections import Counter

import numpy as np
import pytest
from conftest import TOY_CODES, TOY_COUNTS
from oracles import (
    exhaustive_optimal_cost,
    is_prefix_free,
    kraft_holds,
    monotonicity_violations,
    textbook_huffman_cost,
)

from hufftok import FrequencyTable
from hufftok.analysis import histogram_for_bpe, histogram_for_mapping
from hufftok.baselines import MARKER, BPESegmenter, bpe_learn
from hufftok.codec import Codec, SymbolAlphabet, encode_corpus, save_mapping
from hufftok.hufftree import build_mapping, code_length_stats
from hufftok.synth import corpus_lines, make_words, sample_zipf_table

ARITIES = (2, 3, 16, 256, 1024)
SIZES = (1000, 2000, 4000, 8000, 16000, 32000)
EXTRA_CHARS = list("ÄäßéøžЖж中文…–!?.,'")


def _random_corpus(rng, index):
    """A Zipf-like corpus of at most 5,000 types, as lines of tokens."""
    types = int(np.exp(rng.uniform(0, np.log(5000))))
    words = make_words(types, seed=index)
    # sprinkle in non-ASCII word forms so the codec sees more than [a-z]
    for j in range(0, types, 7):
        words[j] = words[j] + EXTRA_CHARS[(index + j) % len(EXTRA_CHARS)]
    p = np.arange(1, types + 1, dtype=np.float64) ** -rng.uniform(0.8, 1.3)
    p /= p.sum()
    lines = []
    for _ in range(int(rng.integers(5, 60))):
        length = int(rng.integers(0, 40))
        lines.append([words[i] for i in rng.choice(types, size=length, p=p)])
    # every type occurs at least once so the vocabulary really reaches `types`
    lines.append(words[:])
    return lines


@pytest.fixture(scope="module")
def random_corpora():
    """Build, encode and decode the 1,000 random corpora once."""
    rng = np.random.default_rng(2024)
    results = []
    start = time.perf_counter()
    for index in range(1000):
        n = ARITIES[index % len(ARITIES)]
        lines = _random_corpus(rng, index)
        freqs = FrequencyTable(Counter(t for tokens in lines for t in tokens))
        mapping = build_mapping(freqs, n)
        codec = Codec(mapping, SymbolAlphabet(n))
        mismatches = 0
        for tokens in lines:
            text, oov = codec.encode(tokens)
            decoded, _, skipped = codec.decode(text)
            if oov or skipped or decoded != tokens:
                mismatches += 1
        results.append((n, freqs, mapping, mismatches))
    return results, time.perf_counter() - start


@pytest.fixture(scope="module")
def zipf_corpora():
    """The 50k-type / 1M-token Zipf(1.0) corpora, with mappings at every size."""
    out = []
    for seed in range(5):
        start = time.perf_counter()
        freqs = sample_zipf_table(50_000, 1_000_000, 1.0, seed)
        reports = {n: histogram_for_mapping(build_mapping(freqs, n), freqs) for n in SIZES}
        out.append((seed, freqs, reports, time.perf_counter() - start))
    return out


def test_criterion_1_round_trip(random_corpora, verdict):
    results, elapsed = random_corpora
    bad = sum(1 for *_, mismatches in results if mismatches)
    lines = sum(m for *_, m in results)
    verdict(1, bad == 0 and elapsed < 120,
            f"round trip over {len(results)} corpora: {lines} mismatched lines, {elapsed:.1f}s (< 120s)")


def test_criterion_2_prefix_free_and_kraft(random_corpora, verdict):
    results, _ = random_corpora
    not_prefix = sum(1 for _, _, m, _ in results if not is_prefix_free(m.values()))
    not_kraft = sum(1 for n, _, m, _ in results if not kraft_holds(m.values(), n))
    verdict(2, not_prefix == 0 and not_kraft == 0,
            f"{len(results)} mappings: {not_prefix} not prefix-free, {not_kraft} violate Kraft (exact integers)")


def test_criterion_3_monotonicity(random_corpora, verdict):
    results, _ = random_corpora
    violations = sum(
        monotonicity_violations(freqs, {w: len(c) for w, c in mapping.items()})
        for _, freqs, mapping, _ in results
    )
    verdict(3, violations == 0, f"{violations} frequency-monotonicity violations over {len(results)} mappings")


def test_criterion_4_binary_oracle(verdict):
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    small_bad = large_bad = 0
    small_runs = 400
    for i in range(small_runs):
        k = 1 + i % 12
        counts = rng.integers(1, 60, size=k).tolist()
        freqs = FrequencyTable({f"w{j}": c for j, c in enumerate(counts)})
        _, wpl = code_length_stats(build_mapping(freqs, 2), freqs)
        small_bad += wpl != exhaustive_optimal_cost(counts)
    sizes = [int(x) for x in rng.integers(13, 10_000, size=60)] + [10_000]
    for k in sizes:
        counts = (rng.zipf(1.3, size=k) % 100_000 + 1).tolist()
        freqs = FrequencyTable({f"w{j}": c for j, c in enumerate(counts)})
        _, wpl = code_length_stats(build_mapping(freqs, 2), freqs)
        large_bad += wpl != textbook_huffman_cost(counts)
    elapsed = time.perf_counter() - start
    verdict(4, small_bad == 0 and large_bad == 0 and elapsed < 300,
            f"n=2: {small_bad}/{small_runs} differ from exhaustive optimum (<=12 types), "
            f"{large_bad}/{len(sizes)} differ from textbook Huffman (<=10,000 types), {elapsed:.1f}s (< 300s)")


def test_criterion_5_hand_trace(tmp_path, verdict):
    freqs = FrequencyTable(TOY_COUNTS)
    mapping = build_mapping(freqs, 3)
    same_codes = dict(mapping.word_to_code) == TOY_CODES

    # serialize the hand trace independently and compare file bytes
    order = sorted(TOY_COUNTS, key=lambda w: (-TOY_COUNTS[w], w))
    body = "".join(f"{w}\t{''.join(chr(0x4E00 + d) for d in TOY_CODES[w])}\n" for w in order)
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    header = "\t".join(["#hufftok-mapping", "n=3", "types=8", "total=15",
                        "base=4e00", "sep=2420", "unk=fffd", f"sha256={digest}"])
    path = tmp_path / "toy.map.tsv"
    save_mapping(mapping, path)
    same_bytes = path.read_bytes() == (header + "\n" + body).encode("utf-8")
    verdict(5, same_codes and same_bytes,
            f"toy table n=3: codes {'match' if same_codes else 'differ'}, "
            f"file bytes {'match' if same_bytes else 'differ'} the hand trace")


def test_criterion_6_single_symbol_fraction(zipf_corpora, verdict):
    rows = []
    ok = True
    for seed, _, reports, elapsed in zipf_corpora:
        fractions = [reports[n].single_symbol_fraction for n in SIZES]
        monotone = all(a <= b for a, b in zip(fractions, fractions[1:]))
        ok &= fractions[-1] >= 0.70 and monotone and elapsed < 60
        rows.append(f"seed {seed}: " + " ".join(f"{f:.3f}" for f in fractions) + f" ({elapsed:.1f}s)")
    verdict(6, ok, "single-symbol fraction at n=1k..32k, >= 0.70 at 32k, non-decreasing, < 60s; "
            + "; ".join(rows))


def test_criterion_7_max_code_length(zipf_corpora, verdict):
    worst = max(r.max_code_length for _, _, reports, _ in zipf_corpora for r in reports.values())
    verdict(7, worst <= 4, f"max symbols per token over n=1k..32k and 5 corpora: {worst} (<= 4)")


def test_criterion_8_determinism(tmp_path, verdict):
    corpus = tmp_path / "corpus.txt"
    subprocess.run([sys.executable, "-m", "hufftok.cli", "synth", str(corpus), "--types", "20000",
                    "--tokens", "600000", "--seed", "11"], check=True, capture_output=True)
    digests, files = [], []
    for run, threads in enumerate(("1", "3", "3")):
        out = tmp_path / f"run{run}"
        env = {**os.environ, "HUFFTOK_THREADS": threads}
        proc = subprocess.run([sys.executable, "-m", "hufftok.cli", "build", str(corpus), "--symbols", "1000",
                               "--output", str(out)], check=True, capture_output=True, text=True, env=env)
        digests.append(json.loads(proc.stdout)["sha256"])
        data = (out / "corpus.txt.map.tsv").read_bytes() + (out / "corpus.txt.tc.tsv").read_bytes()
        files.append(hashlib.sha256(data).hexdigest())
    ok = len(set(digests)) == 1 and len(set(files)) == 1
    verdict(8, ok, f"build with HUFFTOK_THREADS=1,3,3: {len(set(files))} distinct output hash(es)")


def test_criterion_9_bpe_sanity(zipf_corpora, verdict):
    _, freqs, reports, _ = zipf_corpora[0]
    merges = bpe_learn(freqs, 32_000)
    initial = {MARKER} | {ch for w in freqs for ch in w}
    grown = len(merges.symbols(initial)) - len(initial)
    segment = BPESegmenter(merges)
    broken = sum(1 for w in freqs if "".join(segment(w)) != MARKER + w)
    bpe = histogram_for_bpe(merges, freqs)
    huff = reports[32000]
    ok = len(merges) == grown == 32_000 and broken == 0 and bpe.max_code_length >= huff.max_code_length
    verdict(9, ok, f"{len(merges)} merges, vocabulary grew by {grown}; {broken} words fail concatenation; "
            f"max bucket BPE {bpe.max_code_length} vs Huffman {huff.max_code_length}")


def test_criterion_10_throughput(zipf_corpora, tmp_path, verdict):
    _, freqs, _, _ = zipf_corpora[0]
    mapping = build_mapping(freqs, 32000)
    lines = corpus_lines(freqs, seed=1) + corpus_lines(freqs, seed=2) + corpus_lines(freqs, seed=3)
    src = tmp_path / "in.txt"
    src.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    start = time.perf_counter()
    stats = encode_corpus(src, tmp_path / "out.enc", mapping, SymbolAlphabet(32000), workers=1)
    elapsed = time.perf_counter() - start
    rate = stats.lines / elapsed * 60
    verdict(10, stats.lines == len(lines) and rate >= 100_000,
            f"encoded {stats.lines} lines in {elapsed:.2f}s single process: {rate:,.0f} lines/min (>= 100,000)")
