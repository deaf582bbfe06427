import pytest

from segworld.tests.factories import TOKENIZER, VOCABULARIES


@pytest.fixture
def vocabularies():
    return VOCABULARIES


@pytest.fixture
def tokenizer():
    return TOKENIZER
