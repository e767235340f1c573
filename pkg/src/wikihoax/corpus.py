"""Labeled article corpus: loading, text views, and stratified splits.

The on-disk corpus is line-delimited JSON, one article per line, with
fields {id, title, text, label, source?}. Splits are pure functions of
(corpus contents, negatives, ratio, view, seed, test_fraction) so any
manifest can be rebuilt byte-for-byte from its echoed config.
"""

import json
import logging
from dataclasses import dataclass

import numpy as np

from wikihoax import stylometry

log = logging.getLogger(__name__)

FORMAT_VERSION = 1

HOAX, LEGITIMATE = 1, 0

SOURCES = ("WikipediaLive", "ArchiveImport", "Unknown")

# Text views of one article.
DEFINITION = "Definition"
FULL_TEXT = "FullText"
FULL_TEXT_NO_DEFINITION = "FullTextNoDefinition"
VIEWS = (DEFINITION, FULL_TEXT, FULL_TEXT_NO_DEFINITION)


@dataclass
class Article:
    id: str
    title: str
    text: str
    label: int
    source: str = "Unknown"


@dataclass
class RatioSetting:
    name: str
    negatives_per_hoax: int

    @property
    def tag(self) -> str:
        """Conventional short label, e.g. "1H2R" for OneToTwo."""
        return f"1H{self.negatives_per_hoax}R"


RATIOS = {
    "1h2r": RatioSetting("OneToTwo", 2),
    "1h10r": RatioSetting("OneToTen", 10),
    "1h100r": RatioSetting("OneToHundred", 100),
}


def parse_ratio(value: str) -> RatioSetting:
    key = value.strip().lower()
    if key not in RATIOS:
        raise ValueError(f"unknown ratio '{value}' (expected one of {', '.join(RATIOS)})")
    return RATIOS[key]


@dataclass
class DatasetSplit:
    train: list
    test: list
    ratio: RatioSetting
    view: str
    seed: int
    test_fraction: float


_REQUIRED_FIELDS = ("id", "title", "text", "label")


def load_corpus(path) -> list[Article]:
    """Read a line-delimited JSON corpus, validating every record.

    Errors carry 1-based line numbers. Duplicate ids are rejected with
    both offending lines named.
    """
    articles = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"line {lineno}: invalid JSON ({e.msg})") from None
            if not isinstance(rec, dict):
                raise ValueError(f"line {lineno}: expected an object")
            for field in _REQUIRED_FIELDS:
                if field not in rec:
                    raise ValueError(f"line {lineno}: missing {field}")
            art_id = str(rec["id"])
            if not art_id:
                raise ValueError(f"line {lineno}: empty id")
            if art_id in seen:
                raise ValueError(
                    f"duplicate id '{art_id}' on lines {seen[art_id]} and {lineno}"
                )
            if rec["label"] not in (0, 1):
                raise ValueError(f"line {lineno}: label must be 0 or 1")
            text = str(rec["text"])
            if not text.strip():
                raise ValueError(f"line {lineno}: empty text")
            source = rec.get("source", "Unknown")
            if source not in SOURCES:
                raise ValueError(f"line {lineno}: unknown source '{source}'")
            seen[art_id] = lineno
            articles.append(
                Article(
                    id=art_id,
                    title=str(rec["title"]),
                    text=text,
                    label=int(rec["label"]),
                    source=source,
                )
            )
    return articles


def extract_definition(article: Article) -> str:
    """First sentence of the article text (the 'definition' view).

    Text without a sentence boundary comes back whole, stripped.
    """
    spans = stylometry.sentence_spans(article.text)
    if not spans:
        return article.text.strip()
    a, b = spans[0]
    return article.text[a:b]


def strip_definition(article: Article) -> str:
    """Article text with the first sentence removed, left-trimmed.

    Single-sentence articles yield the empty string; callers decide how
    to treat those (the split builder drops them from the
    FullTextNoDefinition view).
    """
    spans = stylometry.sentence_spans(article.text)
    if len(spans) <= 1:
        return ""
    return article.text[spans[1][0]:].rstrip()


def view_text(article: Article, view: str) -> str:
    if view == DEFINITION:
        return extract_definition(article)
    if view == FULL_TEXT:
        return article.text
    if view == FULL_TEXT_NO_DEFINITION:
        return strip_definition(article)
    raise ValueError(f"unknown view '{view}'")


def split_ids(
    hoax_ids: list,
    negative_ids: list,
    seed: int,
    test_fraction: float,
) -> tuple[list, list]:
    """Label-stratified train/test partition of the given ids.

    Within each label the ids are sorted, permuted by a generator seeded
    with `seed`, and the first round(n * test_fraction) go to test,
    clamped so both partitions keep at least one member per label.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if not hoax_ids:
        raise ValueError("cannot split: no hoax articles")
    if not negative_ids:
        raise ValueError("cannot split: no negative articles")
    rng = np.random.default_rng(seed)
    train: list = []
    test: list = []
    for ids in (hoax_ids, negative_ids):
        ordered = sorted(set(ids))
        n = len(ordered)
        if n < 2:
            raise ValueError("each label needs at least 2 articles to split")
        n_test = min(max(round(n * test_fraction), 1), n - 1)
        perm = rng.permutation(n)
        test.extend(ordered[i] for i in perm[:n_test])
        train.extend(ordered[i] for i in perm[n_test:])
    return sorted(train), sorted(test)


def make_split(
    corpus: list[Article],
    negatives: list,
    ratio: RatioSetting,
    view: str,
    seed: int,
    test_fraction: float = 0.3,
) -> DatasetSplit:
    """Build a stratified split over the hoaxes and the chosen negatives.

    `negatives` must be ids of legitimate articles in the corpus; the
    sampler sized them at about ratio.negatives_per_hoax per hoax before
    dedup, so no exact multiple is enforced here. Articles reduced to
    nothing by the FullTextNoDefinition view are dropped up front.
    """
    if view not in VIEWS:
        raise ValueError(f"unknown view '{view}'")
    by_id = {a.id: a for a in corpus}
    unknown = [i for i in negatives if i not in by_id]
    if unknown:
        raise ValueError(f"negative ids not in corpus: {unknown[:5]}")
    mislabeled = [i for i in negatives if by_id[i].label != LEGITIMATE]
    if mislabeled:
        raise ValueError(f"negative ids are not legitimate articles: {mislabeled[:5]}")

    usable = set(by_id)
    if view == FULL_TEXT_NO_DEFINITION:
        dropped = [a.id for a in corpus if not strip_definition(a)]
        if dropped:
            log.warning(
                "view %s drops %d single-sentence article(s)", view, len(dropped)
            )
            usable -= set(dropped)

    hoax_ids = [a.id for a in corpus if a.label == HOAX and a.id in usable]
    negative_ids = [i for i in negatives if i in usable]
    train, test = split_ids(hoax_ids, negative_ids, seed, test_fraction)
    return DatasetSplit(
        train=train,
        test=test,
        ratio=ratio,
        view=view,
        seed=seed,
        test_fraction=test_fraction,
    )


def write_split_manifest(split: DatasetSplit, path, config: dict | None = None) -> None:
    """Line-delimited JSON manifest: one header record, then one row per id."""
    header = {
        "format_version": FORMAT_VERSION,
        "kind": "split",
        "ratio": split.ratio.tag,
        "negatives_per_hoax": split.ratio.negatives_per_hoax,
        "view": split.view,
        "seed": split.seed,
        "test_fraction": split.test_fraction,
    }
    if config is not None:
        header["config"] = config
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for partition, ids in (("train", split.train), ("test", split.test)):
            for art_id in ids:
                row = {"id": art_id, "partition": partition, "view": split.view}
                fh.write(json.dumps(row, sort_keys=True) + "\n")
