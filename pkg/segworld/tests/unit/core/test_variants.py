import pytest

from segworld.core.benchkit.validator import load_lexicon
from segworld.core.benchkit.variants import (
    agentive,
    expand_variants,
    gerund,
    inflectional_variants,
    lexical_variants,
    past,
    plural,
    synonyms,
    term_variants,
)

LEXICON = {"cut": ("slice", "chop"), "handle": ("grip",), "hold": ("grip", "grasp")}


class TestInflections:
    """Test suite for the regular and irregular inflection rules."""

    @pytest.mark.parametrize(
        "func,word,expected",
        [
            (plural, "mug", "mugs"),
            (plural, "bench", "benches"),
            (plural, "box", "boxes"),
            (plural, "body", "bodies"),
            (gerund, "cut", "cutting"),
            (gerund, "carry", "carrying"),
            (gerund, "handle", "handling"),
            (gerund, "tie", "tying"),
            (gerund, "open", "opening"),
            (past, "carry", "carried"),
            (past, "pour", "poured"),
            (past, "handle", "handled"),
            (agentive, "cut", "cutter"),
            (agentive, "carry", "carrier"),
            (agentive, "open", "opener"),
        ],
    )
    def test_regular_forms(self, func, word, expected):
        assert func(word) == expected

    def test_irregular_forms(self):
        assert {"sat", "sitting", "sits"} <= inflectional_variants("sit")
        assert "knives" in inflectional_variants("knife")
        assert {"drank", "drunk"} <= inflectional_variants("drink")

    def test_multi_word_terms_inflect_last_word(self):
        variants = inflectional_variants("Paper Towel")

        assert {"paper towel", "paper towels"} <= variants
        assert all(v.startswith("paper ") for v in variants)

    def test_empty_term(self):
        with pytest.raises(ValueError):
            inflectional_variants("   ")


class TestLexicon:
    """Test suite for lexicon-derived near-synonyms."""

    def test_synonyms_both_directions(self):
        assert synonyms("cut", LEXICON) == {"slice", "chop"}
        assert synonyms("slice", LEXICON) == {"cut"}
        assert synonyms("grip", LEXICON) == {"handle", "hold"}
        assert synonyms("cut", None) == set()

    def test_lexical_variants_exclude_own_inflections(self):
        variants = lexical_variants("cut", LEXICON)

        assert {"slice", "slicing", "chopped", "chops"} <= variants
        assert "cutting" not in variants

    def test_term_variants(self):
        assert {"cut", "cutter", "slice"} <= term_variants("cut", LEXICON)


class TestExpandVariants:
    """Test suite for variant-set expansion."""

    TERMS = ["handle", "cut", "carry", "sit", "pour", "mug", "knife", "paper towel"]

    def test_expected_forms(self):
        expanded = expand_variants(self.TERMS)

        for form in ("cutting", "cutter", "carrying", "carried", "carrier", "sat"):
            assert form in expanded
        assert {"knives", "paper towels"} <= expanded

    @pytest.mark.parametrize("lexicon", [None, LEXICON])
    def test_idempotent(self, lexicon):
        once = expand_variants(self.TERMS, lexicon)

        assert expand_variants(once, lexicon) == once

    def test_idempotent_with_packaged_lexicon(self):
        lexicon = load_lexicon()
        once = expand_variants(["hold", "handle", "drink", "rim", "mug"], lexicon)

        assert expand_variants(once, lexicon) == once

    def test_members_kept(self):
        assert {"mug", "cup"} <= expand_variants(["mug", "cup", ""])
