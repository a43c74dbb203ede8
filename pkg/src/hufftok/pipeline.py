"""File-level steps shared by the CLI: counting, building and writing artifacts."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from hufftok._parallel import map_chunks, resolve_workers
from hufftok.codec import SymbolAlphabet, read_lines, atomic_write_text, save_mapping
from hufftok.corpus import (
    FrequencyTable,
    Preprocessor,
    SplitSpec,
    TruecaseModel,
    split_corpus,
    tokenize_words,
    truecase,
    truecaser_from_counts,
)
from hufftok.errors import HufftokError
from hufftok.hufftree import CodeMapping, build_mapping, code_length_stats


def _position_counts(tokenize, lines):
    initial: Counter = Counter()
    inner: Counter = Counter()
    for line in lines:
        tokens = tokenize_words(line) if tokenize else line.split()
        if tokens:
            initial[tokens[0]] += 1
            inner.update(tokens[1:])
    return initial, inner


def _identity(x):
    return x


def count_corpus(
    path: str | Path, tokenize: bool = True, truecased: bool = True, workers: int | None = None
) -> tuple[FrequencyTable, TruecaseModel | None]:
    """Count word frequencies of a raw corpus file in one pass.

    Sentence-initial and inner tokens are tallied separately, which is all
    the truecaser needs; initial tokens are then folded into the inner
    counts under their canonical casing.
    """
    workers = resolve_workers(workers)
    initial: Counter = Counter()
    inner: Counter = Counter()
    for ini, inn in map_chunks(_position_counts, read_lines(path), _identity, (tokenize,), workers):
        initial.update(ini)
        inner.update(inn)

    model = truecaser_from_counts(inner, initial) if truecased else None
    counts = inner
    for tok, c in initial.items():
        counts[truecase([tok], model)[0] if model else tok] += c
    return FrequencyTable(counts), model


@dataclass
class BuildResult:
    corpus: str
    mapping_path: Path
    truecase_path: Path | None
    types: int
    total_tokens: int
    max_code_length: int
    weighted_path_length: int
    sha256: str

    def to_dict(self) -> dict:
        return {
            "corpus": self.corpus,
            "mapping": str(self.mapping_path),
            "truecase": str(self.truecase_path) if self.truecase_path else None,
            "types": self.types,
            "total_tokens": self.total_tokens,
            "max_code_length": self.max_code_length,
            "weighted_path_length": self.weighted_path_length,
            "sha256": self.sha256,
        }


def build_corpus_mapping(
    corpus: str | Path,
    n: int,
    out_dir: str | Path,
    alphabet: SymbolAlphabet,
    tokenize: bool = True,
    truecased: bool = True,
    workers: int | None = None,
) -> tuple[BuildResult, CodeMapping, FrequencyTable]:
    corpus = Path(corpus)
    out_dir = Path(out_dir)
    freqs, model = count_corpus(corpus, tokenize, truecased, workers)
    if not freqs:
        raise HufftokError(f"{corpus}: corpus contains no tokens")
    mapping = build_mapping(freqs, n)
    max_len, wpl = code_length_stats(mapping, freqs)

    out_dir.mkdir(parents=True, exist_ok=True)
    mapping_path = out_dir / f"{corpus.name}.map.tsv"
    digest = save_mapping(mapping, mapping_path, alphabet)
    tc_path = None
    if model is not None:
        tc_path = out_dir / f"{corpus.name}.tc.tsv"
        model.save(tc_path)
    result = BuildResult(str(corpus), mapping_path, tc_path, len(freqs), freqs.total_tokens,
                         max_len, wpl, digest)
    return result, mapping, freqs


def preprocessor_for(tokenize: bool = True, truecase_path: str | Path | None = None) -> Preprocessor:
    model = TruecaseModel.load(truecase_path) if truecase_path else None
    return Preprocessor(tokenize=tokenize, truecaser=model)


def write_split(
    source: str | Path, target: str | Path, spec: SplitSpec, out_dir: str | Path
) -> dict:
    """Split a parallel corpus into train/test files plus ``manifest.json``."""
    src_lines = list(read_lines(source))
    tgt_lines = list(read_lines(target))
    train, test, test_idx = split_corpus(src_lines, tgt_lines, spec)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, lines in [("train.src", train.source), ("train.tgt", train.target),
                        ("test.src", test.source), ("test.tgt", test.target)]:
        atomic_write_text(out_dir / name, "".join(line + "\n" for line in lines))
    manifest = {
        "source": Path(source).name,
        "target": Path(target).name,
        "seed": spec.seed,
        "rate": spec.rate,
        "total_lines": len(src_lines),
        "train_lines": len(train.source),
        "test_lines": len(test.source),
        "test_indices": test_idx,
    }
    atomic_write_text(out_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    return manifest


def read_tokenized(path: str | Path, preprocess: Preprocessor) -> list[list[str]]:
    return [preprocess(line) for line in read_lines(path)]


def count_preprocessed(path: str | Path, preprocess: Preprocessor) -> FrequencyTable:
    counts: Counter = Counter()
    for line in read_lines(path):
        counts.update(preprocess(line))
    return FrequencyTable(counts)
