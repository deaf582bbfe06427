"""Rule-based validation of intent-level instructions.

An intent instruction must read as a first-person goal, be 6 to 25 words long
and never mention the chain it is meant to hide: not the object, action, part
or affordance, nor any of their inflections or lexicon near-synonyms.
"""

import json
import logging
import re
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..exceptions import ConfigError, UnreadableFile
from ..models import ReasoningChain, ValidationVerdict, ValidatorRuleSet, Violation
from ..tokenizer import normalize_words
from .variants import inflectional_variants, lexical_variants

logger = logging.getLogger(__name__)

RULE_FIRST_PERSON = "first_person"
RULE_LENGTH = "length"
RULE_BANNED_TERM = "banned_term"
RULE_NEAR_SYNONYM = "near_synonym"

PATTERNS_RESOURCE = "first_person_patterns.txt"
LEXICON_RESOURCE = "near_synonyms.json"


def _read_resource(name: str) -> str:
    return resources.files("segworld.data").joinpath(name).read_text(encoding="utf-8")


def parse_patterns(text: str) -> Tuple[str, ...]:
    lines = (line.strip() for line in text.splitlines())
    return tuple(line for line in lines if line and not line.startswith("#"))


def load_patterns(path: Optional[Union[str, Path]] = None) -> Tuple[str, ...]:
    """First-person patterns from a file, or the packaged list."""
    if path is None:
        return parse_patterns(_read_resource(PATTERNS_RESOURCE))
    try:
        return parse_patterns(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise UnreadableFile(f"cannot read pattern list {path}: {e}") from e


def parse_lexicon(text: str, source: str = "lexicon") -> Dict[str, Tuple[str, ...]]:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source} is not valid JSON: {e}") from e
    if not isinstance(raw, dict) or not all(isinstance(v, list) for v in raw.values()):
        raise ConfigError(f"{source} must map each term to a list of synonyms")
    return {key.lower(): tuple(str(v).lower() for v in values) for key, values in raw.items()}


def load_lexicon(path: Optional[Union[str, Path]] = None) -> Dict[str, Tuple[str, ...]]:
    """Near-synonym lexicon from a JSON file, or the packaged one."""
    if path is None:
        return parse_lexicon(_read_resource(LEXICON_RESOURCE), LEXICON_RESOURCE)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UnreadableFile(f"cannot read lexicon {path}: {e}") from e
    return parse_lexicon(text, str(path))


def default_rules(
    lexicon_path: Optional[Union[str, Path]] = None,
    patterns_path: Optional[Union[str, Path]] = None,
) -> ValidatorRuleSet:
    return ValidatorRuleSet(
        first_person_patterns=load_patterns(patterns_path),
        lexicon=load_lexicon(lexicon_path),
    )


def _words(text: str) -> List[str]:
    words = []
    for word in normalize_words(text):
        if word.endswith("'s"):
            word = word[:-2]
        if word:
            words.append(word)
    return words


def _contains(words: Sequence[str], phrase: str) -> bool:
    parts = phrase.split()
    n = len(parts)
    return any(list(words[i : i + n]) == parts for i in range(len(words) - n + 1))


class IntentValidator:
    """Applies a ValidatorRuleSet; every violation is reported."""

    def __init__(self, rules: ValidatorRuleSet):
        self.rules = rules
        self._patterns = [re.compile(p, re.IGNORECASE) for p in rules.first_person_patterns]

    def _first_person(self, text: str) -> List[Violation]:
        normalized = " ".join(text.replace("’", "'").lower().split())
        if any(p.search(normalized) for p in self._patterns):
            return []
        span = " ".join(normalized.split()[:3])
        return [Violation(rule=RULE_FIRST_PERSON, span=span)]

    def _length(self, words: Sequence[str]) -> List[Violation]:
        n = len(words)
        if self.rules.min_words <= n <= self.rules.max_words:
            return []
        return [Violation(rule=RULE_LENGTH, span=f"{n} words")]

    def _leaks(self, words: Sequence[str], chain: ReasoningChain) -> List[Violation]:
        violations: List[Violation] = []
        terms = chain.terms()
        for field in self.rules.banned_fields:
            term = terms.get(field, "")
            if not term:
                continue
            if self.rules.expand_variants:
                inflected = inflectional_variants(term)
                lexical = lexical_variants(term, self.rules.lexicon)
            else:
                inflected, lexical = {term.lower()}, set()
            for rule, variants in ((RULE_BANNED_TERM, inflected), (RULE_NEAR_SYNONYM, lexical)):
                for variant in sorted(variants):
                    if _contains(words, variant):
                        violations.append(Violation(rule=rule, span=variant, field=field))
        return violations

    def validate(self, text: str, chain: ReasoningChain) -> ValidationVerdict:
        words = _words(text)
        violations = self._first_person(text) + self._length(words) + self._leaks(words, chain)
        if violations:
            logger.debug(f"Rejected {text!r}: {[v.rule for v in violations]}")
        return ValidationVerdict(accepted=not violations, violations=tuple(violations))


def validate_intent_instruction(
    text: str, chain: ReasoningChain, rules: ValidatorRuleSet
) -> ValidationVerdict:
    return IntentValidator(rules).validate(text, chain)
