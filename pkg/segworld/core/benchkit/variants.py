"""Morphological and lexicon variants of chain terms."""

import logging
from typing import Dict, Iterable, Mapping, Optional, Sequence, Set

logger = logging.getLogger(__name__)

VOWELS = set("aeiou")

IRREGULAR: Dict[str, Sequence[str]] = {
    "bring": ("brought",),
    "buy": ("bought",),
    "drink": ("drank", "drunk"),
    "eat": ("ate", "eaten"),
    "hold": ("held",),
    "sit": ("sat",),
    "swing": ("swung",),
    "throw": ("threw", "thrown"),
    "wear": ("wore", "worn"),
    "write": ("wrote", "written"),
    "knife": ("knives",),
}

Lexicon = Mapping[str, Sequence[str]]


def _is_consonant(ch: str) -> bool:
    return ch.isalpha() and ch not in VOWELS


def _syllables(word: str) -> int:
    groups, previous = 0, False
    for ch in word:
        vowel = ch in VOWELS or ch == "y"
        if vowel and not previous:
            groups += 1
        previous = vowel
    return groups


def _doubles_final(word: str) -> bool:
    """Monosyllabic consonant-vowel-consonant endings double (cut, cutting)."""
    return (
        len(word) >= 3
        and _is_consonant(word[-1])
        and word[-1] not in "wxy"
        and word[-2] in VOWELS
        and _is_consonant(word[-3])
        and _syllables(word) == 1
    )


def _consonant_y(word: str) -> bool:
    return len(word) >= 2 and word.endswith("y") and _is_consonant(word[-2])


def plural(word: str) -> str:
    if word.endswith(("s", "x", "z", "ch", "sh")):
        return word + "es"
    if _consonant_y(word):
        return word[:-1] + "ies"
    return word + "s"


def gerund(word: str) -> str:
    if word.endswith("ie"):
        return word[:-2] + "ying"
    if word.endswith("e") and not word.endswith(("ee", "ye", "oe")) and len(word) > 2:
        return word[:-1] + "ing"
    if _doubles_final(word):
        return word + word[-1] + "ing"
    return word + "ing"


def _suffix(word: str, suffix: str) -> str:
    """Shared rule for -ed and -er."""
    if word.endswith("e"):
        return word + suffix[1:]
    if _consonant_y(word):
        return word[:-1] + "i" + suffix
    if _doubles_final(word):
        return word + word[-1] + suffix
    return word + suffix


def past(word: str) -> str:
    return _suffix(word, "ed")


def agentive(word: str) -> str:
    return _suffix(word, "er")


def _inflect_word(word: str) -> Set[str]:
    forms = {word, plural(word), gerund(word), past(word), agentive(word)}
    forms.update(IRREGULAR.get(word, ()))
    return forms


def inflectional_variants(term: str) -> Set[str]:
    """The term plus its plural, gerund, past and agentive forms.

    Multi-word terms inflect their last word.
    """
    term = term.strip().lower()
    if not term:
        raise ValueError("term must be non-empty")
    *head, last = term.split()
    prefix = " ".join(head)
    return {f"{prefix} {form}".strip() for form in _inflect_word(last)}


def synonyms(term: str, lexicon: Optional[Lexicon]) -> Set[str]:
    """Lexicon neighbours of a term, looked up in both directions."""
    if not lexicon:
        return set()
    term = term.strip().lower()
    found = {s.lower() for s in lexicon.get(term, ())}
    found.update(key.lower() for key, values in lexicon.items() if term in values)
    found.discard(term)
    return found


def lexical_variants(term: str, lexicon: Optional[Lexicon]) -> Set[str]:
    """Near-synonyms and their inflections, minus the term's own inflections."""
    variants: Set[str] = set()
    for synonym in synonyms(term, lexicon):
        variants |= inflectional_variants(synonym)
    return variants - inflectional_variants(term)


def term_variants(term: str, lexicon: Optional[Lexicon] = None) -> Set[str]:
    return inflectional_variants(term) | lexical_variants(term, lexicon)


def expand_variants(terms: Iterable[str], lexicon: Optional[Lexicon] = None) -> Set[str]:
    """Union of the terms with the variants of every term that is not itself a variant of another.

    Applying it to its own output adds nothing.
    """
    members = {t.strip().lower() for t in terms if t.strip()}
    variants = {member: term_variants(member, lexicon) for member in members}
    roots = [
        member
        for member in members
        if not any(other != member and member in variants[other] for other in members)
    ]
    expanded = set(members)
    for root in roots:
        expanded |= variants[root]
    return expanded
