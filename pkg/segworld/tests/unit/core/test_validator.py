import json
from pathlib import Path

import pytest

from segworld.core.benchkit.toy import INTENTS, SHARED_POUR_INTENT, toy_vocabularies
from segworld.core.benchkit.validator import (
    RULE_BANNED_TERM,
    RULE_FIRST_PERSON,
    RULE_LENGTH,
    RULE_NEAR_SYNONYM,
    IntentValidator,
    default_rules,
    load_lexicon,
    load_patterns,
    parse_lexicon,
    validate_intent_instruction,
)
from segworld.core.exceptions import ConfigError, UnreadableFile
from segworld.core.models import ReasoningChain, ValidatorRuleSet

GOLDEN = Path(__file__).parents[2] / "fixtures" / "intent_golden.jsonl"

DRINK_HANDLE = ReasoningChain(object="mug", action="drink", part="handle", affordance="graspable")
HOLD_HANDLE = ReasoningChain(object="mug", action="hold", part="handle", affordance="graspable")


def golden_items():
    with open(GOLDEN, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


@pytest.fixture(scope="module")
def validator():
    return IntentValidator(default_rules())


class TestReferenceExamples:
    """Test suite for the canonical accept/reject examples."""

    def test_near_synonym_rejected(self, validator):
        verdict = validator.validate(
            "I'd really like something refreshing to sip on right now.", DRINK_HANDLE
        )

        assert not verdict.accepted
        assert verdict.rules == [RULE_NEAR_SYNONYM]
        assert verdict.violations[0].span == "sip"
        assert verdict.violations[0].field == "action"

    def test_short_leaking_intent_rejected(self, validator):
        verdict = validator.validate("I want to drink water.", DRINK_HANDLE)

        assert verdict.rules == [RULE_BANNED_TERM, RULE_LENGTH]

    def test_imperative_rejected(self, validator):
        verdict = validator.validate("Grab the mug by its handle.", HOLD_HANDLE)

        assert verdict.rules == [RULE_BANNED_TERM, RULE_FIRST_PERSON]
        leaked = {(v.field, v.span) for v in verdict.violations if v.rule == RULE_BANNED_TERM}
        assert leaked == {("object", "mug"), ("part", "handle")}


class TestGoldenCorpus:
    """Test suite for the hand-labeled intent corpus."""

    def test_corpus_size(self):
        items = golden_items()

        assert len(items) >= 60
        assert any(item["accepted"] for item in items)
        assert {RULE_FIRST_PERSON, RULE_LENGTH, RULE_BANNED_TERM, RULE_NEAR_SYNONYM} <= {
            rule for item in items for rule in item["rules"]
        }

    @pytest.mark.parametrize("item", golden_items(), ids=lambda item: item["text"][:40])
    def test_verdict_matches_label(self, validator, item):
        verdict = validator.validate(item["text"], ReasoningChain(**item["chain"]))

        assert verdict.accepted == item["accepted"]
        assert verdict.rules == item["rules"]


class TestRules:
    """Test suite for individual rule behavior."""

    def test_length_bounds_are_inclusive(self, validator):
        chain = ReasoningChain(object="chair", action="sit", part="seat", affordance="sittable")

        assert validator.validate("I need to rest my legs", chain).accepted
        assert validator.validate(
            "I need to rest " + " ".join(["very"] * 20) + " tired legs", chain
        ).rules == [RULE_LENGTH]

    def test_multi_word_terms(self, validator):
        chain = ReasoningChain(
            object="paper towel", action="wipe", part="sheet", affordance="absorbent"
        )

        verdict = validator.validate("I need two paper towels for this mess on my desk", chain)

        assert verdict.rules == [RULE_BANNED_TERM]
        assert verdict.violations[0].span == "paper towels"

    def test_without_variant_expansion(self):
        rules = ValidatorRuleSet(
            expand_variants=False, first_person_patterns=load_patterns(), lexicon=load_lexicon()
        )
        chain = ReasoningChain(object="knife", action="cut", part="blade", affordance="sharp")
        text = "I need to slice some bread for the kids"

        verdict = validate_intent_instruction(text, chain, rules)

        assert verdict.accepted

    def test_toy_intents_pass(self, validator):
        """Test that every toy-world intent hides its chain."""
        vocabularies = toy_vocabularies()
        for (obj, action), text in INTENTS.items():
            entry = next(e for e in vocabularies.object_actions[obj] if e.action == action)
            chain = ReasoningChain(
                object=obj, action=action, part=entry.part, affordance=entry.affordance
            )
            assert validator.validate(text, chain).accepted, text

    @pytest.mark.parametrize("obj,part", [("kettle", "spout"), ("bottle", "neck")])
    def test_shared_intent_passes(self, validator, obj, part):
        chain = ReasoningChain(object=obj, action="pour", part=part, affordance="pourable")

        assert validator.validate(SHARED_POUR_INTENT, chain).accepted


class TestResources:
    """Test suite for pattern and lexicon loading."""

    def test_packaged_resources(self):
        patterns = load_patterns()
        lexicon = load_lexicon()

        assert len(patterns) == 8
        assert "sip" in lexicon["drink"]

    def test_pattern_file(self, tmp_path):
        path = tmp_path / "patterns.txt"
        path.write_text("# comment\n\n^we want\\b\n")

        assert load_patterns(path) == ("^we want\\b",)

    def test_missing_files(self, tmp_path):
        with pytest.raises(UnreadableFile):
            load_patterns(tmp_path / "missing.txt")
        with pytest.raises(UnreadableFile):
            load_lexicon(tmp_path / "missing.json")

    @pytest.mark.parametrize("text", ["{not json", '["cup"]', '{"mug": "cup"}'])
    def test_malformed_lexicon(self, text):
        with pytest.raises(ConfigError):
            parse_lexicon(text)

    def test_lexicon_lowercased(self):
        assert parse_lexicon('{"Mug": ["Cup"]}') == {"mug": ("cup",)}
