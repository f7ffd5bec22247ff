"""Corpus and score-matrix ingestion: formats, ordering, and error wording."""

from __future__ import annotations

import io
import json
import time

import pytest

from ruqeval.corpus import TRUTH_SUFFIX, CorpusRecord, load_corpus, load_score_matrix
from ruqeval.errors import InputError


def corpus_line(record_id: str, generated: str = "g", reference: str = "r", **meta):
    obj = {"id": record_id, "generated": generated, "reference": reference}
    if meta:
        obj["meta"] = meta
    return json.dumps(obj)


class TestLoadCorpus:
    def test_three_valid_lines(self):
        text = "\n".join(corpus_line(f"c{i}") for i in range(3))
        records = load_corpus(io.StringIO(text))
        assert [r.id for r in records] == ["c0", "c1", "c2"]
        assert all(isinstance(r, CorpusRecord) for r in records)

    def test_file_order_preserved(self):
        text = "\n".join(corpus_line(i) for i in ("zebra", "apple", "mango"))
        records = load_corpus(io.StringIO(text))
        assert [r.id for r in records] == ["zebra", "apple", "mango"]

    def test_meta_round_trip(self):
        records = load_corpus(io.StringIO(corpus_line("a", cohort="x", run=2)))
        assert records[0].meta == {"cohort": "x", "run": 2}

    def test_meta_defaults_empty(self):
        records = load_corpus(io.StringIO(corpus_line("a")))
        assert records[0].meta == {}

    def test_malformed_line_cites_line_number(self):
        text = corpus_line("a") + "\n{not json}\n" + corpus_line("b")
        with pytest.raises(InputError, match="line 2"):
            load_corpus(io.StringIO(text))

    def test_duplicate_id_names_the_id(self):
        text = corpus_line("dup") + "\n" + corpus_line("dup")
        with pytest.raises(InputError, match="'dup'"):
            load_corpus(io.StringIO(text))

    def test_missing_field(self):
        with pytest.raises(InputError, match="line 1.*reference"):
            load_corpus(io.StringIO('{"id": "a", "generated": "g"}'))

    def test_non_string_text(self):
        line = '{"id": "a", "generated": 3, "reference": "r"}'
        with pytest.raises(InputError, match="generated"):
            load_corpus(io.StringIO(line))

    def test_unknown_field_rejected(self):
        line = '{"id": "a", "generated": "g", "reference": "r", "generted": "typo"}'
        with pytest.raises(InputError, match="generted"):
            load_corpus(io.StringIO(line))

    def test_empty_id_rejected(self):
        with pytest.raises(InputError, match="nonempty"):
            load_corpus(io.StringIO(corpus_line("")))

    def test_meta_must_be_object(self):
        line = '{"id": "a", "generated": "g", "reference": "r", "meta": [1]}'
        with pytest.raises(InputError, match="meta"):
            load_corpus(io.StringIO(line))

    def test_record_must_be_object(self):
        with pytest.raises(InputError, match="line 1"):
            load_corpus(io.StringIO('["not", "an", "object"]'))

    def test_blank_lines_skipped(self):
        text = "\n" + corpus_line("a") + "\n\n  \n" + corpus_line("b") + "\n\n"
        records = load_corpus(io.StringIO(text))
        assert [r.id for r in records] == ["a", "b"]

    def test_empty_file_gives_empty_corpus(self):
        assert load_corpus(io.StringIO("")) == []

    def test_missing_file_is_input_error(self, tmp_path):
        with pytest.raises(InputError, match="cannot read corpus"):
            load_corpus(tmp_path / "nope.jsonl")

    def test_path_round_trip(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(corpus_line("a") + "\n", encoding="utf-8")
        assert load_corpus(path)[0].id == "a"
        assert load_corpus(str(path))[0].id == "a"

    def test_ten_thousand_records_under_two_seconds(self, tmp_path):
        path = tmp_path / "big.jsonl"
        with open(path, "w", encoding="utf-8") as handle:
            for i in range(10_000):
                handle.write(
                    corpus_line(f"case-{i}", "some generated text", "a reference")
                    + "\n"
                )
        start = time.perf_counter()
        records = load_corpus(path)
        elapsed = time.perf_counter() - start
        assert len(records) == 10_000
        assert elapsed < 2.0


def matrix_csv(rows: list[str]) -> io.StringIO:
    header = f"case_id,ascites,cholelithiasis,ascites{TRUTH_SUFFIX},cholelithiasis{TRUTH_SUFFIX}"
    return io.StringIO("\n".join([header, *rows]) + "\n")


class TestLoadScoreMatrix:
    def test_basic_round_trip(self):
        m = load_score_matrix(matrix_csv(["p1,0.9,0.1,1,0", "p2,0.3,0.8,0,1"]))
        assert m.case_ids == ("p1", "p2")
        assert m.label_ids == ("ascites", "cholelithiasis")
        assert m.scores[0, 0] == 0.9
        assert m.truth[1, 1] == 1.0
        assert m.mask is None

    def test_truth_columns_any_order(self):
        header = (
            f"id,a{TRUTH_SUFFIX},a,b,b{TRUTH_SUFFIX}"
        )
        m = load_score_matrix(io.StringIO(header + "\np,1,0.7,0.2,0\n"))
        assert m.label_ids == ("a", "b")
        assert m.scores[0, 0] == 0.7
        assert m.truth[0, 0] == 1.0

    def test_blank_pair_is_masked(self):
        m = load_score_matrix(matrix_csv(["p1,0.9,,1,", "p2,0.3,0.8,0,1"]))
        assert m.mask is not None
        assert not m.mask[0, 1]
        assert m.mask.sum() == 3
        scores, truth = m.column("cholelithiasis")
        assert list(scores) == [0.8]

    def test_blank_on_one_side_rejected(self):
        with pytest.raises(InputError, match="line 2.*blank"):
            load_score_matrix(matrix_csv(["p1,0.9,0.5,1,"]))

    def test_unpaired_columns_rejected(self):
        bad = io.StringIO(f"id,a,b{TRUTH_SUFFIX}\np,0.5,1\n")
        with pytest.raises(InputError, match="pair up"):
            load_score_matrix(bad)

    def test_duplicate_case_id(self):
        with pytest.raises(InputError, match="'p1'"):
            load_score_matrix(matrix_csv(["p1,0.9,0.1,1,0", "p1,0.3,0.8,0,1"]))

    def test_truth_must_be_binary(self):
        with pytest.raises(InputError, match="0 or 1"):
            load_score_matrix(matrix_csv(["p1,0.9,0.1,1,0.5"]))

    def test_non_numeric_cell(self):
        with pytest.raises(InputError, match="line 2.*ascites"):
            load_score_matrix(matrix_csv(["p1,high,0.1,1,0"]))

    def test_score_out_of_range_rejected(self):
        with pytest.raises(InputError, match=r"\[0, 1\]"):
            load_score_matrix(matrix_csv(["p1,1.5,0.1,1,0"]))

    def test_row_width_mismatch(self):
        with pytest.raises(InputError, match="line 2.*cells"):
            load_score_matrix(matrix_csv(["p1,0.9,0.1,1"]))

    def test_empty_file(self):
        with pytest.raises(InputError, match="empty"):
            load_score_matrix(io.StringIO(""))

    def test_header_only(self):
        with pytest.raises(InputError, match="no data rows"):
            load_score_matrix(matrix_csv([]))

    def test_duplicate_header_columns(self):
        bad = io.StringIO(
            f"id,a,a,a{TRUTH_SUFFIX},a{TRUTH_SUFFIX}\np,0.5,0.5,1,1\n"
        )
        with pytest.raises(InputError, match="duplicate column"):
            load_score_matrix(bad)

    def test_empty_case_id(self):
        with pytest.raises(InputError, match="empty case id"):
            load_score_matrix(matrix_csv([",0.9,0.1,1,0"]))

    def test_missing_file_is_input_error(self, tmp_path):
        with pytest.raises(InputError, match="cannot read score matrix"):
            load_score_matrix(tmp_path / "nope.csv")

    def test_metrics_computable_from_loaded_matrix(self):
        from ruqeval.stats import macro_micro

        rows = [
            "p1,0.9,0.8,1,1",
            "p2,0.7,0.6,1,0",
            "p3,0.2,0.4,0,1",
            "p4,0.1,0.3,0,0",
        ]
        result = macro_micro(load_score_matrix(matrix_csv(rows)))
        assert result["per_label"]["ascites"]["auroc"] == 1.0
        assert 0.0 <= result["per_label"]["cholelithiasis"]["auroc"] <= 1.0

    def test_blank_data_line_skipped(self):
        m = load_score_matrix(matrix_csv(["p1,0.9,0.1,1,0", ",,,,", "p2,0.3,0.8,0,1"]))
        assert m.case_ids == ("p1", "p2")
