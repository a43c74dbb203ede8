import csv
import io
import json
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, strategies as st

from hufftok import (
    FrequencyTable,
    MergeList,
    TokenizationReport,
    bpe_learn,
    build_mapping,
    build_topk,
    code_length_stats,
    compare_report,
    histogram_for_bpe,
    histogram_for_mapping,
    oov_report,
)
from hufftok.analysis import histogram_for_topk

from conftest import TOY_COUNTS, TOY_TOKENS


def test_toy_histogram(toy_table):
    report = histogram_for_mapping(build_mapping(toy_table, 3), toy_table)
    assert report.histogram == {2: 12, 3: 3}
    assert report.single_symbol_fraction == 0
    assert report.weighted_path_length == 33
    assert report.max_code_length == 3
    assert report.oov_rate == 0 and report.vocab_size == 3


def test_all_single_symbols(toy_table):
    report = histogram_for_mapping(build_mapping(toy_table, 16), toy_table)
    assert report.histogram == {1: 15}
    assert report.single_symbol_fraction == 1.0


def test_empty_table(toy_table):
    report = histogram_for_mapping(build_mapping(toy_table, 3), FrequencyTable())
    assert report.histogram == {} and report.single_symbol_fraction == 0.0


def test_mapping_histogram_counts_oov(toy_table):
    test = FrequencyTable({"the": 5, "zebra": 2})
    report = histogram_for_mapping(build_mapping(toy_table, 3), test, corpus_slice="test")
    assert report.histogram == {2: 5} and report.oov_tokens == 2
    assert report.oov_rate == pytest.approx(2 / 7)
    assert report.corpus_slice == "test"


def test_bpe_histogram():
    assert histogram_for_bpe(MergeList((("a", "b"),)), FrequencyTable({"ab": 3})).histogram == {1: 3}
    assert histogram_for_bpe(MergeList(), FrequencyTable({"abcd": 2})).histogram == {4: 2}
    mixed = FrequencyTable({"hello": 5, "help": 3, "yellow": 2, "a": 1})
    report = histogram_for_bpe(bpe_learn(mixed, 6), mixed)
    assert sum(report.histogram.values()) == mixed.total_tokens
    assert report.notes


def test_topk_histogram(toy_table):
    report = histogram_for_topk(build_topk(toy_table, 3), toy_table)
    assert report.histogram == {1: 9} and report.oov_tokens == 6


def test_oov_report(toy_table):
    mapping = build_mapping(toy_table, 3)
    assert oov_report(mapping, toy_table) == 0.0
    assert oov_report(mapping, [TOY_TOKENS]) == 0.0
    lines = [["the"] * 199 + ["unseen"]]
    assert oov_report(mapping, lines) == pytest.approx(0.005)
    assert oov_report(build_topk(toy_table, 1), toy_table) == pytest.approx(11 / 15)
    assert oov_report(set(), []) == 0.0


tables = st.dictionaries(st.text(alphabet="abcdefg", min_size=1, max_size=6), st.integers(1, 40),
                         min_size=1, max_size=80).map(FrequencyTable)


@given(tables, st.sampled_from([2, 3, 5, 16]))
def test_report_invariants(table, n):
    mapping = build_mapping(table, n)
    report = histogram_for_mapping(mapping, table)
    assert sum(report.histogram.values()) + report.oov_tokens == table.total_tokens
    assert report.single_symbol_fraction == report.histogram.get(1, 0) / table.total_tokens
    assert (report.max_code_length, report.weighted_path_length) == code_length_stats(mapping, table)


@given(tables, st.sampled_from([2, 3, 5, 16]))
def test_enough_symbols_means_all_single(table, n):
    wide = histogram_for_mapping(build_mapping(table, len(table) + n), table)
    assert wide.single_symbol_fraction == 1.0
    narrow = histogram_for_mapping(build_mapping(table, n), table)
    assert narrow.single_symbol_fraction <= wide.single_symbol_fraction


def test_single_symbol_fraction_can_drop_when_n_grows():
    # With the final under-full merge, more symbols can leave the root with
    # fewer word leaves.  n=4: root = (d, a, (f, e, c, (i, h, g, b)))
    # n=8: the first merge takes the 8 lightest words, root = (a, rest)
    table = FrequencyTable({"a": 20, "b": 17, "c": 16, "d": 14, "e": 9, "f": 8, "g": 4, "h": 3, "i": 1})
    four = histogram_for_mapping(build_mapping(table, 4), table)
    eight = histogram_for_mapping(build_mapping(table, 8), table)
    assert four.histogram[1] == 37 and eight.histogram[1] == 20
    assert eight.single_symbol_fraction < four.single_symbol_fraction


@given(tables, st.integers(0, 30))
def test_bpe_report_conservation(table, merges):
    report = histogram_for_bpe(bpe_learn(table, merges), table)
    assert sum(report.histogram.values()) == table.total_tokens
    assert report.oov_tokens == 0


def test_report_json_round_trip(toy_table):
    report = histogram_for_mapping(build_mapping(toy_table, 3), toy_table, corpus_slice="train")
    d = json.loads(report.to_json())
    assert d["histogram"] == {"2": 12, "3": 3}
    assert d["weighted_path_length"] == 33 and d["single_symbol_fraction"] == 0
    assert TokenizationReport.from_dict(d) == report


def test_compare_two_families(toy_table):
    reports = [histogram_for_mapping(build_mapping(toy_table, n), toy_table) for n in (2, 3, 4)]
    reports += [histogram_for_bpe(bpe_learn(toy_table, m), toy_table) for m in (2, 8)]
    comparison = compare_report(reversed(reports))
    rows = list(csv.DictReader(io.StringIO(comparison.csv)))
    assert [r["tokenizer"] for r in rows] == ["huffman-2", "huffman-3", "huffman-4", "bpe-2", "bpe-8"]
    assert rows[1]["len_2"] == "12" and rows[1]["len_3"] == "3"
    root = ET.fromstring(comparison.svg)
    panels = [g for g in root.iter("{http://www.w3.org/2000/svg}g") if g.get("class") == "panel"]
    assert [p.get("data-family") for p in panels] == ["huffman", "bpe"]
    assert "huffman-3" in comparison.table
    assert compare_report(reports).svg == comparison.svg


def test_compare_single_and_empty(toy_table, tmp_path):
    one = compare_report([histogram_for_mapping(build_mapping(toy_table, 3), toy_table)])
    root = ET.fromstring(one.svg)
    assert len([g for g in root.iter("{http://www.w3.org/2000/svg}g") if g.get("class") == "panel"]) == 1
    paths = one.write(tmp_path)
    assert sorted(p.name for p in paths.values()) == ["compare.csv", "compare.svg", "compare.txt"]
    with pytest.raises(ValueError):
        compare_report([])
