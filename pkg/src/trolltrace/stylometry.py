"""Per-text stylometric statistics: word counts, stopwords, punctuation,
sentence length and Flesch reading ease.

All functions are pure. The stopword and function-word lists are English and
live in ``data/`` as plain text, one lowercase term per line. Non-English text
simply produces near-zero stopword counts.
"""
from __future__ import annotations

import hashlib
import math
import re
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

_MENTION = re.compile(r"(?<!\w)@\w+")
_PURE_MENTION = re.compile(r"^@\w+$")
_SENTENCE_BREAK = re.compile(r"[.!?؟。]+")
_VOWEL_GROUP = re.compile(r"[aeiouy]+")
_LATIN_VOWELS = frozenset("aeiouy")


def _load_words(name: str) -> frozenset[str]:
    text = (resources.files("trolltrace") / "data" / name).read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


FUNCTION_WORDS = _load_words("function_words.txt")
STOPWORDS = _load_words("stopwords.txt")


def wordlist_hash() -> str:
    """SHA-256 over both shipped word lists, recorded in model manifests."""
    h = hashlib.sha256()
    for name in ("function_words.txt", "stopwords.txt"):
        h.update((resources.files("trolltrace") / "data" / name).read_bytes())
    return h.hexdigest()


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_punct(token: str) -> str:
    i, j = 0, len(token)
    while i < j and _is_punct(token[i]):
        i += 1
    while j > i and _is_punct(token[j - 1]):
        j -= 1
    return token[i:j]


def _rstrip_punct(token: str) -> str:
    j = len(token)
    while j > 0 and _is_punct(token[j - 1]):
        j -= 1
    return token[:j]


def _is_url(token: str) -> bool:
    return token.startswith("http://") or token.startswith("https://")


def _content_tokens(text: str) -> list[str]:
    """Whitespace tokens minus URLs and bare @-mentions."""
    out = []
    for raw in text.split():
        if _is_url(raw) or _PURE_MENTION.match(_rstrip_punct(raw)):
            continue
        out.append(raw)
    return out


def tokenize(text: str) -> list[str]:
    """Word tokens of ``text``: whitespace split, edge punctuation removed,
    URLs and @-mentions dropped. Case is preserved."""
    words = []
    for raw in _content_tokens(text):
        core = _strip_punct(raw)
        if core:
            words.append(core)
    return words


def count_punctuation(text: str) -> int:
    return sum(_is_punct(ch) for raw in _content_tokens(text) for ch in raw)


def count_mentions(text: str) -> int:
    return len(_MENTION.findall(text))


def split_sentences(text: str) -> list[str]:
    return [s for s in _SENTENCE_BREAK.split(text) if s.strip()]


def estimate_syllables(word: str) -> int:
    """Vowel-group syllable estimate, floor of 1.

    Words with no Latin letters get one syllable per two characters.
    """
    lower = word.lower()
    if not any("a" <= ch <= "z" for ch in lower):
        return max(1, math.ceil(len(word) / 2))
    n = len(_VOWEL_GROUP.findall(lower))
    if (
        len(lower) >= 2
        and lower.endswith("e")
        and "a" <= lower[-2] <= "z"
        and lower[-2] not in _LATIN_VOWELS
    ):
        n -= 1
    return max(1, n)


def _flesch(n_words: int, n_sentences: int, n_syllables: int) -> float:
    if n_words == 0:
        return 0.0
    raw = 206.835 - 1.015 * (n_words / max(n_sentences, 1)) - 84.6 * (n_syllables / n_words)
    return min(100.0, max(0.0, raw))


def _sentence_source(text: str) -> str:
    # URLs contain dots; they must not create sentence breaks
    return " ".join(t for t in text.split() if not _is_url(t))


def flesch_reading_ease(text: str) -> float:
    """Flesch reading ease clamped to [0, 100]; 0 for text without words."""
    words = tokenize(text)
    sentences = split_sentences(_sentence_source(text))
    return _flesch(len(words), len(sentences), sum(estimate_syllables(w) for w in words))


@dataclass(frozen=True)
class TextStats:
    word_count: int = 0
    unique_word_count: int = 0
    stopword_count: int = 0
    punctuation_count: int = 0
    mean_word_length: float = 0.0
    sentence_count: int = 0
    mean_sentence_length: float = 0.0
    flesch_score: float = 0.0
    function_word_count: int = 0
    non_function_word_count: int = 0


@lru_cache(maxsize=65536)
def analyze_text(text: str) -> TextStats:
    words = tokenize(text)
    sentences = split_sentences(_sentence_source(text))
    punct = count_punctuation(text)
    if not words:
        return TextStats(punctuation_count=punct, sentence_count=len(sentences))
    lowered = [w.lower() for w in words]
    n = len(words)
    n_sent = len(sentences)
    return TextStats(
        word_count=n,
        unique_word_count=len(set(lowered)),
        stopword_count=sum(w in STOPWORDS for w in lowered),
        punctuation_count=punct,
        mean_word_length=sum(len(w) for w in words) / n,
        sentence_count=n_sent,
        mean_sentence_length=n / n_sent if n_sent else 0.0,
        flesch_score=_flesch(n, n_sent, sum(estimate_syllables(w) for w in words)),
        function_word_count=sum(w in FUNCTION_WORDS for w in lowered),
        non_function_word_count=sum(w not in STOPWORDS for w in lowered),
    )
