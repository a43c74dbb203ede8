"""hufftok command line.

    hufftok split   --rate 0.002 --seed 42 src.txt tgt.txt --output data/
    hufftok build   --symbols 32000 train.cs train.de --output models/
    hufftok encode  --mapping models/train.cs.map.tsv test.cs --output enc/
    hufftok decode  --mapping models/train.de.map.tsv hyp.enc --output dec/
    hufftok compare --huffman 1k,2k,4k --bpe 2k,4k train.cs --output figs/
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from hufftok import pipeline
from hufftok._parallel import resolve_workers
from hufftok.analysis import (
    TokenizationReport,
    compare_report,
    histogram_for_bpe,
    histogram_for_mapping,
    histogram_for_topk,
)
from hufftok.baselines import BPESegmenter, MergeList, TopKVocab, bpe_learn, build_topk, topk_encode
from hufftok.codec import (
    DEFAULT_BASE,
    DEFAULT_SEPARATOR,
    DEFAULT_UNKNOWN,
    SymbolAlphabet,
    atomic_write_text,
    decode_corpus,
    encode_corpus,
    load_mapping,
    read_lines,
)
from hufftok.corpus import SplitSpec
from hufftok.errors import HufftokError
from hufftok.hufftree import build_mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


def _hex(text: str) -> int:
    try:
        return int(text.lower().removeprefix("u+").removeprefix("0x"), 16)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a hex codepoint: {text!r}") from None


def _size(text: str) -> int:
    """'32k' -> 32000, '1000' -> 1000."""
    t = text.strip().lower()
    scale = 1
    if t.endswith("k"):
        t, scale = t[:-1], 1000
    try:
        value = int(float(t) * scale)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a size: {text!r}") from None
    return value


def _symbols(text: str) -> int:
    n = _size(text)
    if n < 2:
        raise argparse.ArgumentTypeError(f"--symbols must be >= 2, got {n}")
    return n


def _positive(text: str) -> int:
    k = _size(text)
    if k < 1:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return k


def _non_negative(text: str) -> int:
    k = _size(text)
    if k < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text!r}")
    return k


def _rate(text: str) -> float:
    try:
        r = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < r < 1:
        raise argparse.ArgumentTypeError(f"--rate must lie in (0, 1), got {r}")
    return r


def _size_list(text: str) -> list[int]:
    return [_positive(part) for part in text.split(",") if part.strip()]


def _emit(obj, out_path: Path | None = None) -> None:
    text = json.dumps(obj, ensure_ascii=False, indent=2) + "\n"
    if out_path is not None:
        atomic_write_text(out_path, text)
    sys.stdout.write(text)


def _alphabet_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--base-codepoint", type=_hex, default=None, metavar="HEX",
                   help=f"codepoint of symbol 0 (default {DEFAULT_BASE:X})")
    p.add_argument("--separator", type=_hex, default=None, metavar="HEX",
                   help=f"word separator codepoint (default {DEFAULT_SEPARATOR:X})")
    p.add_argument("--unknown", type=_hex, default=None, metavar="HEX",
                   help=f"unknown-word codepoint (default {DEFAULT_UNKNOWN:X})")


def _alphabet(args, n: int, saved: SymbolAlphabet | None = None) -> SymbolAlphabet:
    """Alphabet from flags, falling back to ``saved`` (a mapping header) then defaults."""
    def pick(flag, attr, default):
        if flag is not None:
            return flag
        return getattr(saved, attr) if saved is not None else default

    return SymbolAlphabet(
        n,
        pick(args.base_codepoint, "base", DEFAULT_BASE),
        pick(args.separator, "separator", DEFAULT_SEPARATOR),
        pick(args.unknown, "unknown", DEFAULT_UNKNOWN),
    )


def _preprocess_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pretokenized", action="store_true",
                   help="input is already tokenized; split on whitespace only")


def _out_dir(args) -> Path:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands

def cmd_split(args) -> int:
    spec = SplitSpec(args.rate, args.seed)
    manifest = pipeline.write_split(args.source, args.target, spec, _out_dir(args))
    summary = {k: v for k, v in manifest.items() if k != "test_indices"}
    _emit(summary)
    return 0


def cmd_build(args) -> int:
    out = _out_dir(args)
    results = []
    for corpus in args.corpus:
        alphabet = _alphabet(args, args.symbols)
        result, _, _ = pipeline.build_corpus_mapping(
            corpus, args.symbols, out, alphabet,
            tokenize=not args.pretokenized, truecased=not args.no_truecase,
        )
        results.append(result.to_dict())
    _emit(results if len(results) > 1 else results[0])
    return 0


def _truecase_for(args, mapping_path: Path) -> Path | None:
    if args.no_truecase:
        return None
    if args.truecase:
        return Path(args.truecase)
    sibling = mapping_path.with_name(mapping_path.name.replace(".map.tsv", ".tc.tsv"))
    return sibling if sibling != mapping_path and sibling.exists() else None


def cmd_encode(args) -> int:
    mapping_path = Path(args.mapping)
    mapping, file_alphabet = load_mapping(mapping_path)
    alphabet = _alphabet(args, mapping.n, file_alphabet)
    preprocess = pipeline.preprocessor_for(not args.pretokenized, _truecase_for(args, mapping_path))
    out = _out_dir(args)
    results = []
    for src in args.input:
        dst = out / f"{Path(src).name}.enc"
        stats = encode_corpus(src, dst, mapping, alphabet, preprocess, workers=resolve_workers())
        result = {"input": str(src), "output": str(dst), **stats.to_dict()}
        atomic_write_text(dst.with_name(dst.name + ".stats.json"), json.dumps(result, indent=2) + "\n")
        results.append(result)
    _emit(results if len(results) > 1 else results[0])
    return 0


def cmd_decode(args) -> int:
    mapping, file_alphabet = load_mapping(args.mapping)
    alphabet = _alphabet(args, mapping.n, file_alphabet)
    out = _out_dir(args)
    results = []
    for src in args.input:
        name = Path(src).name
        dst = out / (name[:-4] + ".dec" if name.endswith(".enc") else name + ".dec")
        stats = decode_corpus(src, dst, mapping, alphabet, workers=resolve_workers())
        result = {"input": str(src), "output": str(dst), **stats.to_dict()}
        atomic_write_text(dst.with_name(dst.name + ".stats.json"), json.dumps(result, indent=2) + "\n")
        results.append(result)
    _emit(results if len(results) > 1 else results[0])
    return 0


def _joint_table(args):
    table = None
    for corpus in args.corpus:
        freqs, _ = pipeline.count_corpus(corpus, not args.pretokenized, not args.no_truecase)
        table = freqs if table is None else table + freqs
    return table


def cmd_bpe_learn(args) -> int:
    table = _joint_table(args)
    merges = bpe_learn(table, args.merges)
    path = _out_dir(args) / f"bpe.{args.merges}.merges"
    merges.save(path)
    _emit({"merges_file": str(path), "requested": args.merges, "learned": len(merges),
           "types": len(table), "total_tokens": table.total_tokens})
    return 0


def cmd_bpe_encode(args) -> int:
    merges = MergeList.load(args.codes)
    segment = BPESegmenter(merges)
    preprocess = pipeline.preprocessor_for(not args.pretokenized, args.truecase)
    out = _out_dir(args)
    results = []
    for src in args.input:
        dst = out / f"{Path(src).name}.bpe"
        lines = []
        tokens = pieces = 0
        for line in read_lines(src):
            toks = preprocess(line)
            segs = [p for t in toks for p in segment(t)]
            tokens += len(toks)
            pieces += len(segs)
            lines.append(" ".join(segs) + "\n")
        atomic_write_text(dst, "".join(lines))
        results.append({"input": str(src), "output": str(dst), "tokens": tokens, "subwords": pieces})
    _emit(results if len(results) > 1 else results[0])
    return 0


def cmd_topk(args) -> int:
    table = _joint_table(args)
    vocab = build_topk(table, args.topk)
    out = _out_dir(args)
    path = out / f"topk.{args.topk}.tsv"
    vocab.save(path)
    result = {"vocab_file": str(path), "k": args.topk, "size": len(vocab), "encoded": []}
    if args.encode:
        alphabet = _alphabet(args, max(args.topk, 1))
        preprocess = pipeline.preprocessor_for(not args.pretokenized, None)
        for src in args.encode:
            dst = out / f"{Path(src).name}.topk{args.topk}.enc"
            lines = []
            tokens = oov = 0
            for line in read_lines(src):
                toks = preprocess(line)
                tokens += len(toks)
                oov += sum(1 for t in toks if t not in vocab)
                lines.append(" ".join(topk_encode(toks, vocab, alphabet)) + "\n")
            atomic_write_text(dst, "".join(lines))
            result["encoded"].append({"input": str(src), "output": str(dst), "tokens": tokens,
                                      "oov_tokens": oov, "oov_rate": oov / tokens if tokens else 0.0})
    _emit(result)
    return 0


def cmd_stats(args) -> int:
    if not (args.mapping or args.codes or args.topk_vocab):
        raise _UsageError("stats needs at least one of --mapping, --codes, --topk-vocab")
    reports: list[TokenizationReport] = []
    for path in args.mapping or ():
        path = Path(path)
        mapping, _ = load_mapping(path)
        preprocess = pipeline.preprocessor_for(not args.pretokenized, _truecase_for(args, path))
        freqs = pipeline.count_preprocessed(args.corpus, preprocess)
        reports.append(histogram_for_mapping(mapping, freqs, f"huffman-{mapping.n}", args.slice))
    plain = pipeline.preprocessor_for(not args.pretokenized, args.truecase)
    if args.codes or args.topk_vocab:
        freqs = pipeline.count_preprocessed(args.corpus, plain)
        for path in args.codes or ():
            merges = MergeList.load(path)
            reports.append(histogram_for_bpe(merges, freqs, f"bpe-{len(merges)}", args.slice))
        for path in args.topk_vocab or ():
            vocab = TopKVocab.load(path)
            reports.append(histogram_for_topk(vocab, freqs, f"topk-{vocab.k}", args.slice))
    out = Path(args.output) / "stats.json" if args.output else None
    if out:
        out.parent.mkdir(parents=True, exist_ok=True)
    _emit([r.to_dict() for r in reports], out)
    return 0


def cmd_compare(args) -> int:
    reports: list[TokenizationReport] = []
    for path in args.reports or ():
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        for d in data if isinstance(data, list) else [data]:
            reports.append(TokenizationReport.from_dict(d))

    if args.huffman or args.bpe or args.topk:
        if not args.corpus:
            raise _UsageError("--huffman/--bpe/--topk need a corpus argument")
        freqs, _ = pipeline.count_corpus(args.corpus, not args.pretokenized, not args.no_truecase)
        for n in args.huffman or ():
            reports.append(histogram_for_mapping(build_mapping(freqs, n), freqs, f"huffman-{n}", args.slice))
        if args.bpe:
            # merge lists are prefixes of one another, so learn once
            longest = bpe_learn(freqs, max(args.bpe))
            for m in args.bpe:
                merges = MergeList(longest.merges[:m], longest.marker)
                reports.append(histogram_for_bpe(merges, freqs, f"bpe-{m}", args.slice))
        for k in args.topk or ():
            reports.append(histogram_for_topk(build_topk(freqs, k), freqs, f"topk-{k}", args.slice))

    if not reports:
        raise _UsageError("compare needs --reports or at least one of --huffman/--bpe/--topk")
    comparison = compare_report(reports)
    out = _out_dir(args)
    paths = comparison.write(out)
    atomic_write_text(out / "reports.json",
                      json.dumps([r.to_dict() for r in reports], ensure_ascii=False, indent=2) + "\n")
    sys.stdout.write(comparison.table)
    _emit({k: str(v) for k, v in paths.items()})
    return 0


def cmd_synth(args) -> int:
    from hufftok.synth import corpus_lines, sample_zipf_table

    table = sample_zipf_table(args.types, args.tokens, args.exponent, args.seed)
    lines = corpus_lines(table, args.seed)
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(args.output, "".join(line + "\n" for line in lines))
    _emit({"output": str(args.output), "lines": len(lines), "types": len(table),
           "tokens": table.total_tokens})
    return 0


# ---------------------------------------------------------------------------
# parser

class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hufftok", description="Huffman-coding word tokenizer for MT corpora.")
    parser.add_argument("--config", metavar="TOML", help="defaults for any flag; command-line flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="hold out a seeded random test set from a parallel corpus")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--rate", type=_rate, default=0.002)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--output", default=".", metavar="DIR")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("build", help="build a word<->code mapping per corpus file")
    p.add_argument("corpus", nargs="+")
    p.add_argument("--symbols", type=_symbols, required=True, metavar="N")
    p.add_argument("--no-truecase", action="store_true")
    p.add_argument("--output", default=".", metavar="DIR")
    _preprocess_args(p)
    _alphabet_args(p)
    p.set_defaults(func=cmd_build)

    for name, func, help_ in [("encode", cmd_encode, "encode text with a mapping"),
                              ("decode", cmd_decode, "decode symbol streams back to words")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("input", nargs="+")
        p.add_argument("--mapping", required=True)
        p.add_argument("--output", default=".", metavar="DIR")
        if name == "encode":
            p.add_argument("--truecase", help="truecaser file (default: the one saved next to the mapping)")
            p.add_argument("--no-truecase", action="store_true")
            _preprocess_args(p)
        _alphabet_args(p)
        p.set_defaults(func=func)

    p = sub.add_parser("bpe-learn", help="learn joint BPE merges over one or more corpora")
    p.add_argument("corpus", nargs="+")
    p.add_argument("--merges", type=_non_negative, required=True, metavar="M")
    p.add_argument("--no-truecase", action="store_true")
    p.add_argument("--output", default=".", metavar="DIR")
    _preprocess_args(p)
    p.set_defaults(func=cmd_bpe_learn)

    p = sub.add_parser("bpe-encode", help="segment text with a learned merge list")
    p.add_argument("input", nargs="+")
    p.add_argument("--codes", required=True, help="merge list file")
    p.add_argument("--truecase")
    p.add_argument("--output", default=".", metavar="DIR")
    _preprocess_args(p)
    p.set_defaults(func=cmd_bpe_encode)

    p = sub.add_parser("topk", help="most-frequent-words baseline vocabulary")
    p.add_argument("corpus", nargs="+")
    p.add_argument("--topk", type=_positive, required=True, metavar="K")
    p.add_argument("--encode", nargs="*", metavar="FILE", help="also encode these files")
    p.add_argument("--no-truecase", action="store_true")
    p.add_argument("--output", default=".", metavar="DIR")
    _preprocess_args(p)
    _alphabet_args(p)
    p.set_defaults(func=cmd_topk)

    p = sub.add_parser("stats", help="symbols-per-token histograms and OOV rates")
    p.add_argument("corpus")
    p.add_argument("--mapping", nargs="*")
    p.add_argument("--codes", nargs="*", help="BPE merge list files")
    p.add_argument("--topk-vocab", nargs="*")
    p.add_argument("--truecase")
    p.add_argument("--no-truecase", action="store_true")
    p.add_argument("--slice", default="unspecified", help="label recorded in reports, e.g. train or test")
    p.add_argument("--output", default=None, metavar="DIR")
    _preprocess_args(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("compare", help="side-by-side histograms across tokenizers and sizes")
    p.add_argument("corpus", nargs="?")
    p.add_argument("--huffman", type=_size_list, metavar="SIZES", help="e.g. 1k,2k,4k")
    p.add_argument("--bpe", type=_size_list, metavar="SIZES", help="merge counts, e.g. 2k,4k")
    p.add_argument("--topk", type=_size_list, metavar="SIZES")
    p.add_argument("--reports", nargs="*", help="existing report JSON files")
    p.add_argument("--no-truecase", action="store_true")
    p.add_argument("--slice", default="unspecified")
    p.add_argument("--output", default=".", metavar="DIR")
    _preprocess_args(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="write a synthetic Zipf corpus")
    p.add_argument("output")
    p.add_argument("--types", type=_positive, default=50_000)
    p.add_argument("--tokens", type=_positive, default=1_000_000)
    p.add_argument("--exponent", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    return parser


def _config_defaults(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    with open(known.config, "rb") as fh:
        config = tomllib.load(fh)
    top = {k.replace("-", "_"): v for k, v in config.items() if not isinstance(v, dict)}
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, sp in subparsers.choices.items():
        section = {k.replace("-", "_"): v for k, v in config.get(name, {}).items()}
        dests = {a.dest for a in sp._actions}
        defaults = {k: v for k, v in {**top, **section}.items() if k in dests}
        for action in sp._actions:
            if action.dest in defaults:
                action.required = False
        sp.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _config_defaults(parser, argv)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        parser.error(f"cannot read config: {exc}")
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        parser.error(str(exc))
    except (HufftokError, ValueError, OSError) as exc:
        print(f"hufftok {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
