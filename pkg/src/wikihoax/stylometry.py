"""Surface statistics of article text: lengths, syllables, readability.

All tokenization here is rule-based and deterministic so that numbers
are reproducible across machines. The sentence segmenter is shared with
the corpus module (first-sentence extraction must agree with sentence
counting, or the two views of an article drift apart).
"""

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

_TERMINATOR_RE = re.compile(r"[.!?]")
_WORDISH_RE = re.compile(r"[\w'’]+")

# Trailing tokens that end in "." without ending a sentence. Matched
# against the lowercased run of token characters before the period, so
# "e.g" covers the second period of "e.g.".
_ABBREVIATIONS = frozenset({"dr", "mr", "mrs", "st", "no", "vs", "etc", "e.g", "i.e"})

# Characters that may belong to the token preceding a candidate ".".
_TOKEN_CHARS = frozenset("'’.")


def _is_abbreviation(text: str, dot: int) -> bool:
    # Walk back over the token before text[dot]. Every stoplist entry is
    # at most 3 characters, so 4 collected characters already disqualify.
    chars = []
    i = dot - 1
    while i >= 0 and (text[i].isalnum() or text[i] in _TOKEN_CHARS):
        chars.append(text[i])
        i -= 1
        if len(chars) > 3:
            return False
    return "".join(reversed(chars)).lower() in _ABBREVIATIONS


def _has_alnum(text: str, start: int, end: int) -> bool:
    return any(text[i].isalnum() for i in range(start, end))


def sentence_spans(text: str) -> list[tuple[int, int]]:
    """Character spans of sentences, in order.

    A sentence ends at {. ! ?} followed by whitespace and a capital, or
    by end of text; abbreviation periods and terminator runs that would
    close a span containing no alphanumeric character do not split.
    Spans are stripped of surrounding whitespace, so text[a:b] is the
    exact sentence string and spans never overlap.
    """
    n = len(text)
    spans: list[tuple[int, int]] = []
    cursor = 0
    for m in _TERMINATOR_RE.finditer(text):
        i = m.start()
        j = i + 1
        while j < n and text[j].isspace():
            j += 1
        if j < n and (j == i + 1 or not text[j].isupper()):
            continue
        if text[i] == "." and _is_abbreviation(text, i):
            continue
        if not _has_alnum(text, cursor, i + 1):
            continue
        start = cursor
        while text[start].isspace():
            start += 1
        spans.append((start, i + 1))
        cursor = i + 1
    if _has_alnum(text, cursor, n):
        start = cursor
        while text[start].isspace():
            start += 1
        end = n
        while text[end - 1].isspace():
            end -= 1
        spans.append((start, end))
    return spans


def words_of(text: str) -> list[str]:
    """Maximal alphanumeric-plus-apostrophe runs containing a letter or digit.

    Underscores and all other punctuation separate words.
    """
    out = []
    for run in _WORDISH_RE.findall(text):
        for part in run.split("_"):
            if any(c.isalnum() for c in part):
                out.append(part)
    return out


def segment(text: str) -> tuple[list[str], list[str]]:
    """Split text into (sentences, words). Empty text gives ([], [])."""
    sentences = [text[a:b] for a, b in sentence_spans(text)]
    return sentences, words_of(text)


_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")


def count_syllables(word: str) -> int:
    """Vowel-group count with a silent-e adjustment, floored at 1.

    A terminal "e" is dropped unless the word ends in "le" after a
    consonant ("table" keeps both groups, "make" loses one). Words with
    no vowel group at all (digits, initialisms) count as one syllable.
    """
    if not word:
        raise ValueError("cannot count syllables of an empty word")
    w = word.lower()
    groups = len(_VOWEL_GROUP_RE.findall(w))
    if w.endswith("e"):
        le_kept = len(w) >= 3 and w.endswith("le") and w[-3] not in "aeiouy"
        if not le_kept:
            groups -= 1
    return max(groups, 1)


def fk_grade(text: str) -> float:
    """Flesch-Kincaid grade level of a text.

    Raises ValueError when the text yields no sentence or no word.
    """
    sentences, words = segment(text)
    return fk_grade_from_counts(
        len(words), len(sentences), sum(count_syllables(w) for w in words)
    )


def fk_grade_from_counts(word_count: int, sentence_count: int, syllable_count: int) -> float:
    if sentence_count < 1 or word_count < 1:
        raise ValueError("readability grade requires at least one sentence and one word")
    return (
        0.39 * (word_count / sentence_count)
        + 11.8 * (syllable_count / word_count)
        - 15.59
    )


@dataclass
class StyleStats:
    article_id: str
    word_count: int
    sentence_count: int
    avg_sentence_len: float
    avg_word_len: float
    syllable_count: int
    fk_grade: float


def style_stats(article) -> StyleStats:
    """Per-article surface statistics.

    `article` needs `id` and `text` attributes. Text without any word
    is a domain error: every downstream ratio would divide by zero.
    """
    sentences, words = segment(article.text)
    if not words:
        raise ValueError(f"article '{article.id}': text has no words")
    syllables = sum(count_syllables(w) for w in words)
    alnum_chars = sum(1 for w in words for c in w if c.isalnum())
    return StyleStats(
        article_id=article.id,
        word_count=len(words),
        sentence_count=len(sentences),
        avg_sentence_len=len(words) / len(sentences),
        avg_word_len=alnum_chars / len(words),
        syllable_count=syllables,
        fk_grade=fk_grade_from_counts(len(words), len(sentences), syllables),
    )


def batch_style_stats(articles, workers: int = 1) -> list[StyleStats]:
    """style_stats over many articles, input order preserved."""
    if workers <= 1:
        return [style_stats(a) for a in articles]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(style_stats, articles))


METRICS = ("word_count", "avg_sentence_len", "avg_word_len", "fk_grade")


@dataclass
class StyleReport:
    group: str
    medians: dict = field(default_factory=dict)
    histograms: dict = field(default_factory=dict)


def _lower_median(values: list[float]) -> float:
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def _shared_edges(values_a, values_b, bins: int) -> list[float]:
    lo = min(min(values_a), min(values_b))
    hi = max(max(values_a), max(values_b))
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    step = (hi - lo) / bins
    return [lo + i * step for i in range(bins + 1)]


def _bin_counts(values, edges) -> list[int]:
    counts = [0] * (len(edges) - 1)
    lo, hi = edges[0], edges[-1]
    width = hi - lo
    last = len(counts) - 1
    for v in values:
        idx = int((v - lo) / width * len(counts))
        counts[min(max(idx, 0), last)] += 1
    return counts


def compare_groups(
    hoax_stats: list[StyleStats],
    legit_stats: list[StyleStats],
    bins: int = 20,
) -> tuple[StyleReport, StyleReport]:
    """Median and histogram comparison between the two groups.

    Medians use the lower-median convention for even counts. Histogram
    bin edges are computed over the union of both groups so the two
    reports are directly overlayable.
    """
    if not hoax_stats or not legit_stats:
        raise ValueError("both groups must contain at least one article")
    hoax = StyleReport(group="Hoax")
    legit = StyleReport(group="Legitimate")
    for metric in METRICS:
        hv = [getattr(s, metric) for s in hoax_stats]
        lv = [getattr(s, metric) for s in legit_stats]
        hoax.medians[metric] = _lower_median(hv)
        legit.medians[metric] = _lower_median(lv)
        edges = _shared_edges(hv, lv, bins)
        hoax.histograms[metric] = {"bin_edges": edges, "counts": _bin_counts(hv, edges)}
        legit.histograms[metric] = {"bin_edges": edges, "counts": _bin_counts(lv, edges)}
    return hoax, legit
