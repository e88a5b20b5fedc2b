import re

import pytest
from hypothesis import given, strategies as st

from cosminer import load_outcomes, load_taxonomy, normalize_text
from cosminer.corpus import CORE5_LABELS, SMITH15_LABELS, TaxonomyDef
from cosminer.errors import EmptyOutcomeError, SchemaError, TaxonomyError

NORMAL_FORM = re.compile(r"^[a-z0-9]+( [a-z0-9]+)*$")


class TestNormalizeText:
    def test_strips_case_and_punctuation(self):
        assert normalize_text("Mortality Rate.") == "mortality rate"

    def test_idempotent_on_normal_input(self):
        assert normalize_text("mortality rate") == "mortality rate"

    def test_parenthesized_form(self):
        assert normalize_text("Adverse Events (Percentage)") == "adverse events percentage"

    def test_empty_after_normalization_raises(self):
        with pytest.raises(EmptyOutcomeError):
            normalize_text("---")

    def test_collapses_interior_runs(self):
        assert normalize_text("  a -- b\t\tc  ") == "a b c"

    @given(st.text(max_size=80))
    def test_idempotence_and_shape(self, raw):
        try:
            out = normalize_text(raw)
        except EmptyOutcomeError:
            return
        assert NORMAL_FORM.match(out)
        assert normalize_text(out) == out


class TestLoadOutcomes:
    def test_basic_csv(self, tmp_path):
        p = tmp_path / "o.csv"
        p.write_text('id,outcome_text\n1,Mortality Rate\n2,Adverse Events Percentage\n')
        records, rejects = load_outcomes(p)
        assert [r.normalized_text for r in records] == [
            "mortality rate",
            "adverse events percentage",
        ]
        assert rejects == []

    def test_header_only(self, tmp_path):
        p = tmp_path / "o.csv"
        p.write_text("id,outcome_text\n")
        records, rejects = load_outcomes(p)
        assert records == [] and rejects == []

    def test_reject_empty_text_with_line(self, tmp_path):
        p = tmp_path / "o.csv"
        p.write_text("id,outcome_text\n1,---\n")
        records, rejects = load_outcomes(p)
        assert records == []
        assert len(rejects) == 1
        assert rejects[0].line == 2
        assert rejects[0].id == "1"

    def test_missing_column_is_schema_error(self, tmp_path):
        p = tmp_path / "o.csv"
        p.write_text("id,text\n1,x\n")
        with pytest.raises(SchemaError):
            load_outcomes(p)

    def test_missing_file_is_os_error(self, tmp_path):
        with pytest.raises(OSError):
            load_outcomes(tmp_path / "nope.csv")

    def test_duplicate_id_rejected(self, tmp_path):
        p = tmp_path / "o.csv"
        p.write_text("id,outcome_text\n1,alpha\n1,beta\n")
        records, rejects = load_outcomes(p)
        assert len(records) == 1
        assert rejects[0].reason == "duplicate id"

    def test_missing_id_rejected(self, tmp_path):
        p = tmp_path / "o.csv"
        p.write_text("id,outcome_text\n,alpha\n")
        records, rejects = load_outcomes(p)
        assert records == []
        assert rejects[0].reason == "missing id"

    def test_rows_accounted_for(self, tmp_path):
        p = tmp_path / "o.csv"
        rows = ["id,outcome_text"] + [f"{i},text {i}" for i in range(5)] + ["99,---", ",x"]
        p.write_text("\n".join(rows) + "\n")
        records, rejects = load_outcomes(p)
        assert len(records) + len(rejects) == 7

    def test_order_preserved_and_deterministic(self, tmp_path):
        p = tmp_path / "o.csv"
        p.write_text("id,outcome_text\nb,second text\na,first text\n")
        first, _ = load_outcomes(p)
        second, _ = load_outcomes(p)
        assert [r.id for r in first] == ["b", "a"]
        assert first == second

    def test_study_id_column(self, tmp_path):
        p = tmp_path / "o.csv"
        p.write_text("id,outcome_text,study_id\n1,alpha,NCT001\n2,beta,\n")
        records, _ = load_outcomes(p)
        assert records[0].study_id == "NCT001"
        assert records[1].study_id is None

    def test_aact_pipe_with_custom_columns(self, tmp_path):
        p = tmp_path / "o.txt"
        p.write_text(
            "id|nct_id|outcome_type|title\n"
            "10|NCT777|primary|Mortality Rate\n"
            "11|NCT778|secondary|ICU stay\n"
        )
        records, rejects = load_outcomes(p, fmt="aact-pipe", id_col="id", text_col="title")
        assert [r.normalized_text for r in records] == ["mortality rate", "icu stay"]
        assert records[0].study_id == "NCT777"
        assert rejects == []

    def test_quoted_fields_with_commas(self, tmp_path):
        p = tmp_path / "o.csv"
        p.write_text('id,outcome_text\n1,"Death, all causes"\n')
        records, _ = load_outcomes(p)
        assert records[0].normalized_text == "death all causes"

    def test_unknown_format(self, tmp_path):
        p = tmp_path / "o.csv"
        p.write_text("id,outcome_text\n")
        with pytest.raises(ValueError):
            load_outcomes(p, fmt="tsv")


class TestLoadTaxonomy:
    def test_smith15_exact(self):
        tax = load_taxonomy("smith15")
        assert tax.labels == SMITH15_LABELS
        assert len(tax.labels) == 15
        assert tax.labels[0] == "withdrawal treatment study"

    def test_core5_exact(self):
        tax = load_taxonomy("core5")
        assert tax.labels == CORE5_LABELS
        assert len(tax.labels) == 5
        assert "death" in tax.labels

    def test_custom_file(self, tmp_path):
        p = tmp_path / "tax.txt"
        p.write_text("Alpha One\nbeta two\n")
        tax = load_taxonomy(p)
        assert tax.labels == ("alpha one", "beta two")
        assert tax.name == "tax"

    def test_duplicate_labels(self, tmp_path):
        p = tmp_path / "tax.txt"
        p.write_text("a\na\n")
        with pytest.raises(TaxonomyError):
            load_taxonomy(p)

    def test_duplicate_after_normalization(self, tmp_path):
        p = tmp_path / "tax.txt"
        p.write_text("Quality Life\nquality life!\n")
        with pytest.raises(TaxonomyError):
            load_taxonomy(p)

    def test_too_few_labels(self, tmp_path):
        p = tmp_path / "tax.txt"
        p.write_text("only one\n")
        with pytest.raises(TaxonomyError):
            load_taxonomy(p)

    def test_unknown_name(self):
        with pytest.raises(TaxonomyError):
            load_taxonomy("smith16")

    def test_taxonomydef_validates(self):
        with pytest.raises(TaxonomyError):
            TaxonomyDef(name="x", labels=("a",))
        with pytest.raises(TaxonomyError):
            TaxonomyDef(name="x", labels=("a", "a"))
