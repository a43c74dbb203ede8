"""Symbols-per-token histograms, OOV rates and cross-tokenizer comparisons."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from collections.abc import Collection, Iterable, Sequence
from dataclasses import asdict, dataclass, field
from html import escape
from pathlib import Path

from hufftok.baselines import BPESegmenter, MergeList, TopKVocab
from hufftok.codec import atomic_write_text
from hufftok.corpus import FrequencyTable
from hufftok.hufftree import CodeMapping

BPE_FOLD_NOTE = "a bare word-boundary marker is folded into the following subword"


@dataclass
class TokenizationReport:
    tokenizer: str
    family: str
    vocab_size: int
    histogram: dict[int, int]
    total_tokens: int
    oov_tokens: int = 0
    corpus_slice: str = "unspecified"
    notes: list[str] = field(default_factory=list)

    @property
    def oov_rate(self) -> float:
        return self.oov_tokens / self.total_tokens if self.total_tokens else 0.0

    @property
    def weighted_path_length(self) -> int:
        return sum(length * count for length, count in self.histogram.items())

    @property
    def max_code_length(self) -> int:
        return max((k for k, v in self.histogram.items() if v), default=0)

    @property
    def single_symbol_fraction(self) -> float:
        return self.histogram.get(1, 0) / self.total_tokens if self.total_tokens else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["histogram"] = {str(k): v for k, v in sorted(self.histogram.items())}
        d.update(
            oov_rate=self.oov_rate,
            weighted_path_length=self.weighted_path_length,
            max_code_length=self.max_code_length,
            single_symbol_fraction=self.single_symbol_fraction,
        )
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> TokenizationReport:
        return cls(
            tokenizer=d["tokenizer"],
            family=d["family"],
            vocab_size=int(d["vocab_size"]),
            histogram={int(k): int(v) for k, v in d["histogram"].items()},
            total_tokens=int(d["total_tokens"]),
            oov_tokens=int(d.get("oov_tokens", 0)),
            corpus_slice=d.get("corpus_slice", "unspecified"),
            notes=list(d.get("notes", [])),
        )


def _report(family, tokenizer, vocab_size, lengths, freqs, corpus_slice, notes=()):
    hist: Counter = Counter()
    oov = 0
    for word in freqs:
        length = lengths(word)
        if length is None:
            oov += freqs[word]
        else:
            hist[length] += freqs[word]
    return TokenizationReport(
        tokenizer=tokenizer or f"{family}-{vocab_size}",
        family=family,
        vocab_size=vocab_size,
        histogram=dict(sorted(hist.items())),
        total_tokens=freqs.total_tokens,
        oov_tokens=oov,
        corpus_slice=corpus_slice,
        notes=list(notes),
    )


def histogram_for_mapping(
    mapping: CodeMapping,
    freqs: FrequencyTable,
    tokenizer: str | None = None,
    corpus_slice: str = "unspecified",
) -> TokenizationReport:
    """Token-weighted histogram of code lengths; unmapped words count as OOV."""
    def length(word):
        code = mapping.get(word)
        return None if code is None else len(code)

    return _report("huffman", tokenizer, mapping.n, length, freqs, corpus_slice)


def histogram_for_bpe(
    merges: MergeList,
    freqs: FrequencyTable,
    tokenizer: str | None = None,
    corpus_slice: str = "unspecified",
) -> TokenizationReport:
    """Token-weighted histogram of subwords per word.

    ``vocab_size`` is the number of merges.
    """
    segment = BPESegmenter(merges)
    marker = merges.marker

    def length(word):
        pieces = segment(word)
        return len(pieces) - 1 if len(pieces) > 1 and pieces[0] == marker else len(pieces)

    return _report("bpe", tokenizer, len(merges), length, freqs, corpus_slice, [BPE_FOLD_NOTE])


def histogram_for_topk(
    vocab: TopKVocab,
    freqs: FrequencyTable,
    tokenizer: str | None = None,
    corpus_slice: str = "unspecified",
) -> TokenizationReport:
    return _report("topk", tokenizer, vocab.k, lambda w: 1 if w in vocab else None, freqs, corpus_slice)


def oov_report(vocab: Collection[str], test: FrequencyTable | Iterable[Sequence[str]]) -> float:
    """Fraction of test tokens not covered by ``vocab``.

    ``vocab`` is anything supporting ``in`` (a CodeMapping, TopKVocab, set);
    ``test`` is a frequency table or an iterable of tokenized lines.
    """
    if isinstance(test, FrequencyTable):
        total = test.total_tokens
        missing = sum(test[w] for w in test if w not in vocab)
    else:
        total = missing = 0
        for tokens in test:
            total += len(tokens)
            missing += sum(1 for t in tokens if t not in vocab)
    return missing / total if total else 0.0


# ---------------------------------------------------------------------------
# comparison artifacts

@dataclass
class Comparison:
    csv: str
    svg: str
    table: str

    def write(self, out_dir: str | Path, stem: str = "compare") -> dict[str, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = {ext: out_dir / f"{stem}.{ext}" for ext in ("csv", "svg", "txt")}
        atomic_write_text(paths["csv"], self.csv)
        atomic_write_text(paths["svg"], self.svg)
        atomic_write_text(paths["txt"], self.table)
        return paths


_SUMMARY_COLUMNS = [
    "tokenizer", "family", "vocab_size", "corpus_slice", "total_tokens", "oov_tokens",
    "oov_rate", "max_code_length", "weighted_path_length", "single_symbol_fraction",
]

# bar colours, cycled per report within a panel
PALETTE = ["#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3", "#8c8c8c"]


def _ordered(reports: Iterable[TokenizationReport]) -> list[TokenizationReport]:
    family_rank = {"huffman": 0, "bpe": 1, "topk": 2}
    return sorted(reports, key=lambda r: (family_rank.get(r.family, 9), r.family, r.vocab_size, r.tokenizer))


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def render_csv(reports: Sequence[TokenizationReport]) -> str:
    max_bucket = max((r.max_code_length for r in reports), default=0)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_SUMMARY_COLUMNS + [f"len_{i}" for i in range(1, max_bucket + 1)])
    for r in reports:
        row = [r.tokenizer, r.family, r.vocab_size, r.corpus_slice, r.total_tokens, r.oov_tokens,
               _fmt(r.oov_rate), r.max_code_length, r.weighted_path_length, _fmt(r.single_symbol_fraction)]
        writer.writerow(row + [r.histogram.get(i, 0) for i in range(1, max_bucket + 1)])
    return buf.getvalue()


def render_table(reports: Sequence[TokenizationReport]) -> str:
    """Fixed-width text version of the comparison, one row per tokenizer."""
    max_bucket = max((r.max_code_length for r in reports), default=0)
    head = ["tokenizer", "vocab", "oov%", "1-sym%"] + [str(i) for i in range(1, max_bucket + 1)]
    rows = [head]
    for r in reports:
        tot = r.total_tokens or 1
        rows.append([r.tokenizer, str(r.vocab_size), f"{100 * r.oov_rate:.2f}",
                     f"{100 * r.single_symbol_fraction:.1f}"]
                    + [f"{100 * r.histogram.get(i, 0) / tot:.1f}" for i in range(1, max_bucket + 1)])
    widths = [max(len(row[c]) for row in rows) for c in range(len(head))]
    lines = ["  ".join(cell.rjust(w) if c else cell.ljust(w) for c, (cell, w) in enumerate(zip(row, widths)))
             for row in rows]
    return "\n".join(lines) + "\n"


def render_svg(reports: Sequence[TokenizationReport], panel_width: int = 420, height: int = 300) -> str:
    """Grouped bar chart, one panel per tokenizer family.

    Within a panel the x axis is symbols per token and each report gets one
    bar per bucket; bar height is the share of corpus tokens in that bucket.
    """
    families: dict[str, list[TokenizationReport]] = {}
    for r in reports:
        families.setdefault(r.family, []).append(r)

    margin_l, margin_r, margin_t, margin_b = 48, 12, 28, 64
    width = panel_width * len(families)
    plot_w = panel_width - margin_l - margin_r
    plot_h = height - margin_t - margin_b
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for p, (family, group) in enumerate(families.items()):
        x0 = p * panel_width + margin_l
        y0 = margin_t + plot_h
        buckets = max((r.max_code_length for r in group), default=0) or 1
        top = max((r.histogram.get(b, 0) / r.total_tokens
                   for r in group if r.total_tokens for b in range(1, buckets + 1)), default=0) or 1.0
        slot = plot_w / buckets
        bar_w = slot * 0.8 / len(group)

        out.append(f'<g class="panel" data-family="{escape(family)}">')
        out.append(f'<text x="{x0 + plot_w / 2:.1f}" y="{margin_t - 10}" text-anchor="middle" '
                   f'font-size="12">{escape(family)}</text>')
        out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" stroke="black"/>')
        out.append(f'<line x1="{x0}" y1="{margin_t}" x2="{x0}" y2="{y0}" stroke="black"/>')
        for tick in range(5):
            frac = top * tick / 4
            ty = y0 - plot_h * tick / 4
            out.append(f'<text x="{x0 - 4}" y="{ty + 3:.1f}" text-anchor="end">{100 * frac:.0f}%</text>')
        for b in range(1, buckets + 1):
            cx = x0 + slot * (b - 0.5)
            out.append(f'<text x="{cx:.1f}" y="{y0 + 12}" text-anchor="middle">{b}</text>')
            for i, r in enumerate(group):
                share = r.histogram.get(b, 0) / r.total_tokens if r.total_tokens else 0.0
                h = plot_h * share / top
                bx = x0 + slot * (b - 1) + slot * 0.1 + i * bar_w
                out.append(f'<rect x="{bx:.2f}" y="{y0 - h:.2f}" width="{bar_w:.2f}" height="{h:.2f}" '
                           f'fill="{PALETTE[i % len(PALETTE)]}"><title>{escape(r.tokenizer)} '
                           f'len={b}: {r.histogram.get(b, 0)}</title></rect>')
        out.append(f'<text x="{x0 + plot_w / 2:.1f}" y="{y0 + 26}" text-anchor="middle">symbols per token</text>')
        for i, r in enumerate(group):
            lx = x0 + (i % 4) * (plot_w / 4)
            ly = y0 + 40 + (i // 4) * 12
            out.append(f'<rect x="{lx:.1f}" y="{ly - 8}" width="8" height="8" fill="{PALETTE[i % len(PALETTE)]}"/>')
            out.append(f'<text x="{lx + 11:.1f}" y="{ly}">{escape(r.tokenizer)}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def compare_report(reports: Iterable[TokenizationReport]) -> Comparison:
    """Bundle reports into a CSV table, an SVG figure and a text table."""
    ordered = _ordered(reports)
    if not ordered:
        raise ValueError("compare_report needs at least one report")
    return Comparison(render_csv(ordered), render_svg(ordered), render_table(ordered))
