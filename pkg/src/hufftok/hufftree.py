"""n-ary Huffman tree construction and word <-> code mapping."""

from __future__ import annotations

import heapq
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

from hufftok.corpus import FrequencyTable
from hufftok.errors import HufftokError, MappingError

Code = tuple[int, ...]


@dataclass(slots=True, eq=False)
class HuffmanNode:
    label: str | None
    score: int
    seq: int
    children: list[HuffmanNode] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class HuffmanTree:
    root: HuffmanNode
    n: int

    def leaves(self) -> Iterator[HuffmanNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield node
            else:
                stack.extend(reversed(node.children))

    def internal_nodes(self) -> Iterator[HuffmanNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if not node.is_leaf:
                yield node
                stack.extend(reversed(node.children))


def build_tree(freqs: FrequencyTable, n: int) -> HuffmanTree:
    """Build an n-ary Huffman tree by repeatedly merging the n lightest nodes.

    The queue is ordered by (score, seq).  Leaves get seq numbers in the
    table's iteration order and each merged node takes the next free seq,
    so equal scores resolve the same way on every run.  The last merge
    takes whatever is left, which may be fewer than n nodes; no padding
    with dummy leaves is done.
    """
    if n < 2:
        raise HufftokError(f"branching factor must be >= 2, got {n}")
    if not freqs:
        raise HufftokError("cannot build a tree from an empty frequency table")

    heap = []
    for seq, word in enumerate(freqs):
        node = HuffmanNode(word, freqs[word], seq)
        heap.append((node.score, seq, node))
    heapq.heapify(heap)
    next_seq = len(heap)

    while len(heap) > 1:
        children = [heapq.heappop(heap)[2] for _ in range(min(n, len(heap)))]
        parent = HuffmanNode(None, sum(c.score for c in children), next_seq, children)
        next_seq += 1
        heapq.heappush(heap, (parent.score, parent.seq, parent))

    return HuffmanTree(heap[0][2], n)


class CodeMapping(Mapping[str, Code]):
    """Bidirectional word <-> code table over ``n`` symbols.

    Behaves as a read-only mapping from word to code (a tuple of symbol
    indices); ``code_to_word`` is the inverse.
    """

    __slots__ = ("n", "word_to_code", "code_to_word", "total_tokens")

    def __init__(self, n: int, word_to_code: Mapping[str, Code], total_tokens: int = 0):
        self.n = n
        self.word_to_code = dict(word_to_code)
        self.code_to_word = {code: word for word, code in self.word_to_code.items()}
        if len(self.code_to_word) != len(self.word_to_code):
            raise MappingError("two words share a code")
        self.total_tokens = total_tokens

    def __getitem__(self, word: str) -> Code:
        return self.word_to_code[word]

    def __iter__(self) -> Iterator[str]:
        return iter(self.word_to_code)

    def __len__(self) -> int:
        return len(self.word_to_code)

    def __contains__(self, word: object) -> bool:
        return word in self.word_to_code

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CodeMapping):
            return NotImplemented
        return self.n == other.n and list(self.word_to_code.items()) == list(other.word_to_code.items())

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"CodeMapping(n={self.n}, types={len(self)})"

    def word(self, code: Code) -> str | None:
        return self.code_to_word.get(tuple(code))

    def max_code_length(self) -> int:
        return max(map(len, self.word_to_code.values()), default=0)


def assign_codes(tree: HuffmanTree) -> CodeMapping:
    """Label branches 0, 1, ... in pop order and read codes off root-to-leaf paths.

    Words are listed in leaf seq order, i.e. the frequency-table order.
    A tree with a single leaf gets the one-symbol code ``(0,)``.
    """
    root = tree.root
    if root.is_leaf:
        return CodeMapping(tree.n, {root.label: (0,)}, root.score)

    found: list[tuple[int, str, Code]] = []
    stack: list[tuple[HuffmanNode, Code]] = [(root, ())]
    while stack:
        node, prefix = stack.pop()
        for i, child in enumerate(node.children):
            code = prefix + (i,)
            if child.is_leaf:
                found.append((child.seq, child.label, code))
            else:
                stack.append((child, code))
    found.sort()
    return CodeMapping(tree.n, {word: code for _, word, code in found}, root.score)


def build_mapping(freqs: FrequencyTable, n: int) -> CodeMapping:
    return assign_codes(build_tree(freqs, n))


def code_length_stats(mapping: CodeMapping, freqs: FrequencyTable) -> tuple[int, int]:
    """Return ``(max code length, weighted path length)`` of ``freqs`` under ``mapping``."""
    longest = weighted = 0
    for word in freqs:
        try:
            length = len(mapping[word])
        except KeyError:
            raise MappingError(f"word {word!r} is not in the mapping") from None
        weighted += freqs[word] * length
        longest = max(longest, length)
    return longest, weighted
