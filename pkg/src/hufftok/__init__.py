"""Frequency-only subword tokenization with n-ary Huffman codes."""

from hufftok.errors import (
    AlignmentError,
    HufftokError,
    MappingError,
    SymbolRangeError,
)
from hufftok.corpus import (
    FrequencyTable,
    SplitSpec,
    TruecaseModel,
    count_frequencies,
    split_corpus,
    tokenize_words,
    train_truecaser,
    truecase,
)
from hufftok.hufftree import (
    CodeMapping,
    HuffmanNode,
    HuffmanTree,
    assign_codes,
    build_mapping,
    build_tree,
    code_length_stats,
)
from hufftok.codec import (
    Codec,
    CodecStats,
    DecodeStats,
    EncodeStats,
    SymbolAlphabet,
    decode_line,
    encode_line,
    render_code,
)
from hufftok.baselines import (
    MergeList,
    TopKVocab,
    bpe_learn,
    bpe_segment,
    build_topk,
    topk_encode,
)
from hufftok.analysis import (
    TokenizationReport,
    compare_report,
    histogram_for_bpe,
    histogram_for_mapping,
    oov_report,
)

__version__ = "0.1.0"
