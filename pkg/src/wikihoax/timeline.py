"""Revision-timeline forensics: month series, changepoints, dense regions.

A timeline is the sorted list of an article's revision instants (UTC).
Three complementary signals are derived from it:

* monthly revision counts and online changepoint detection over them,
* a Gaussian kernel density over the raw instants with thresholded
  dense regions,
* the distribution of those regions over the four quarters of the
  article's lifespan.

The density threshold is the operative dense-region rule; changepoints
are computed and exported alongside for inspection.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from wikihoax import accel
from wikihoax.corpus import FORMAT_VERSION

log = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400.0


@dataclass
class RevisionTimeline:
    article_id: str
    label: int
    timestamps: list  # timezone-aware datetimes, sorted ascending


@dataclass
class MonthSeries:
    start_month: tuple  # (year, month)
    counts: list


@dataclass
class ChangepointSet:
    positions: list  # month indices where a new segment begins
    run_length_map: list  # modal run length after each observation; entry 0 is the prior


@dataclass
class DensityGrid:
    article_id: str
    origin: datetime  # instant of the first revision
    grid_days: np.ndarray  # offsets from origin, fractional days
    density: np.ndarray
    bandwidth_days: float
    events_days: np.ndarray


@dataclass
class DenseRegion:
    start: datetime
    end: datetime
    normalized_density: float
    revision_count: int


@dataclass
class QuartileDistribution:
    q: list = field(default_factory=lambda: [0.0, 0.0, 0.0, 0.0])


def parse_instant(value: str) -> datetime:
    """ISO-8601 instant; a trailing Z means UTC. Naive values are rejected."""
    raw = value.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError:
        raise ValueError(f"bad timestamp '{value}'") from None
    if dt.tzinfo is None:
        raise ValueError(f"timestamp '{value}' has no timezone")
    return dt.astimezone(timezone.utc)


def format_instant(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def load_timelines(path) -> list[RevisionTimeline]:
    """Read line-delimited JSON {article_id, label, timestamps: [...]}."""
    timelines = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"line {lineno}: invalid JSON ({e.msg})") from None
            for key in ("article_id", "label", "timestamps"):
                if key not in rec:
                    raise ValueError(f"line {lineno}: missing {key}")
            art_id = str(rec["article_id"])
            if art_id in seen:
                raise ValueError(
                    f"duplicate article_id '{art_id}' on lines {seen[art_id]} and {lineno}"
                )
            if rec["label"] not in (0, 1):
                raise ValueError(f"line {lineno}: label must be 0 or 1")
            if not rec["timestamps"]:
                raise ValueError(f"line {lineno}: empty timestamps")
            try:
                stamps = sorted(parse_instant(t) for t in rec["timestamps"])
            except ValueError as e:
                raise ValueError(f"line {lineno}: {e}") from None
            seen[art_id] = lineno
            timelines.append(
                RevisionTimeline(article_id=art_id, label=int(rec["label"]),
                                 timestamps=stamps)
            )
    return timelines


# ---------------------------------------------------------------------------
# Month binning and changepoints
# ---------------------------------------------------------------------------

def bin_by_month(timeline: RevisionTimeline) -> MonthSeries:
    """Revision counts per calendar month, interior gaps included as 0."""
    first = timeline.timestamps[0]
    last = timeline.timestamps[-1]
    start = (first.year, first.month)
    n_months = (last.year - first.year) * 12 + (last.month - first.month) + 1
    counts = [0] * n_months
    for ts in timeline.timestamps:
        counts[(ts.year - first.year) * 12 + (ts.month - first.month)] += 1
    return MonthSeries(start_month=start, counts=counts)


def bocpd(
    series: MonthSeries,
    hazard_lambda: float = 100.0,
    prior_shape: float = 1.0,
    prior_rate: float = 1.0,
) -> ChangepointSet:
    """Changepoints in a monthly count series.

    Runs the online run-length recursion with a constant hazard of
    1/hazard_lambda and a Gamma-Poisson observation model. A changepoint
    is reported when the modal run length resets (drops below 2) after
    having exceeded 3; the position is the month index where the new
    segment begins. The arming rule suppresses re-fires while a fresh
    run is still establishing itself.
    """
    counts = np.asarray(series.counts, dtype=np.float64)
    if counts.shape[0] < 2:
        raise ValueError("changepoint detection needs a series of length >= 2")
    if not (hazard_lambda > 1.0 and math.isfinite(hazard_lambda)):
        raise ValueError(f"hazard_lambda must be finite and > 1, got {hazard_lambda}")
    for name, value in (("prior_shape", prior_shape), ("prior_rate", prior_rate)):
        if not (math.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be finite and > 0, got {value}")
    modes = accel.bocpd_modes(counts, 1.0 / hazard_lambda, float(prior_shape),
                              float(prior_rate))
    positions = []
    armed = False
    for t in range(1, modes.shape[0]):
        if modes[t] > 3:
            armed = True
        elif modes[t] < 2 and armed:
            # Run length r months after observation t (1-based) puts the
            # segment's first observation at month t - 1 - r (0-based).
            positions.append(int(t - 1 - modes[t]))
            armed = False
    return ChangepointSet(positions=positions, run_length_map=[int(m) for m in modes])


# ---------------------------------------------------------------------------
# Kernel density and dense regions
# ---------------------------------------------------------------------------

GRID_POINTS = 512
FALLBACK_BANDWIDTH_DAYS = 1.0


def _events_days(timeline: RevisionTimeline) -> tuple[datetime, np.ndarray]:
    origin = timeline.timestamps[0]
    days = np.array(
        [(ts - origin).total_seconds() / SECONDS_PER_DAY for ts in timeline.timestamps],
        dtype=np.float64,
    )
    return origin, days


def silverman_bandwidth(events_days: np.ndarray) -> float:
    """1.06 * min(std, IQR/1.34) * n^(-1/5), in days.

    Degenerate spreads (all events in one instant, or a collapsed IQR)
    fall back to a fixed one-day bandwidth.
    """
    n = events_days.shape[0]
    if n < 2 or np.unique(events_days).shape[0] < 2:
        return FALLBACK_BANDWIDTH_DAYS
    std = float(np.std(events_days, ddof=1))
    q75, q25 = np.percentile(events_days, [75.0, 25.0])
    sigma = min(std, (q75 - q25) / 1.34)
    h = 1.06 * sigma * n ** (-0.2)
    if h <= 0.0 or not math.isfinite(h):
        return FALLBACK_BANDWIDTH_DAYS
    return h


def kde_density(timeline: RevisionTimeline, bandwidth="auto") -> DensityGrid:
    """Gaussian kernel density over the revision instants.

    The 512-point grid spans [first - 3h, last + 3h] so nearly all
    kernel mass is inside it and the trapezoidal integral stays within
    1e-2 of 1.
    """
    origin, events = _events_days(timeline)
    if bandwidth == "auto":
        h = silverman_bandwidth(events)
    else:
        h = float(bandwidth)
        if h <= 0 or not math.isfinite(h):
            raise ValueError(f"bandwidth must be finite and > 0, got {bandwidth}")
    grid = np.linspace(events[0] - 3.0 * h, events[-1] + 3.0 * h, GRID_POINTS)
    density = accel.kde_gaussian(events, grid, h)
    return DensityGrid(
        article_id=timeline.article_id,
        origin=origin,
        grid_days=grid,
        density=density,
        bandwidth_days=h,
        events_days=events,
    )


def dense_regions(grid: DensityGrid, threshold_ratio: float = 0.5) -> list[DenseRegion]:
    """Maximal grid intervals where density >= threshold_ratio * max.

    Region boundaries extend half a grid cell beyond the qualifying
    points, so even a single-cell region has positive width and
    neighboring regions stay disjoint.
    """
    if not 0.0 < threshold_ratio < 1.0:
        raise ValueError(f"threshold_ratio must be in (0, 1), got {threshold_ratio}")
    peak = float(np.max(grid.density))
    mask = grid.density >= threshold_ratio * peak
    half_cell = float(grid.grid_days[1] - grid.grid_days[0]) / 2.0
    regions = []
    i = 0
    n = mask.shape[0]
    while i < n:
        if not mask[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and mask[j + 1]:
            j += 1
        lo = float(grid.grid_days[i]) - half_cell
        hi = float(grid.grid_days[j]) + half_cell
        inside = int(np.sum((grid.events_days >= lo) & (grid.events_days <= hi)))
        regions.append(
            DenseRegion(
                start=grid.origin + timedelta(days=lo),
                end=grid.origin + timedelta(days=hi),
                normalized_density=float(np.max(grid.density[i:j + 1])) / peak,
                revision_count=inside,
            )
        )
        i = j + 1
    return regions


def quartile_distribution(
    regions: list[DenseRegion], timeline: RevisionTimeline
) -> QuartileDistribution:
    """Fraction of regions overlapping each quarter of the lifespan.

    A region straddling a boundary counts in every quarter it touches,
    so the four entries may sum past 1.
    """
    first = timeline.timestamps[0]
    last = timeline.timestamps[-1]
    span = (last - first).total_seconds()
    if span <= 0:
        raise ValueError(
            f"article '{timeline.article_id}': zero-span timeline has no quartiles"
        )
    if not regions:
        return QuartileDistribution()
    edges = [first + timedelta(seconds=span * i / 4.0) for i in range(5)]
    q = [0.0] * 4
    for region in regions:
        for i in range(4):
            if region.start < edges[i + 1] and region.end > edges[i]:
                q[i] += 1.0
    total = float(len(regions))
    return QuartileDistribution(q=[c / total for c in q])


def aggregate_quartiles(per_article: list[tuple[int, QuartileDistribution]]) -> dict:
    """Mean q-vector per label over (label, distribution) pairs."""
    sums = {0: [0.0] * 4, 1: [0.0] * 4}
    counts = {0: 0, 1: 0}
    for label, dist in per_article:
        counts[label] += 1
        for i in range(4):
            sums[label][i] += dist.q[i]
    return {
        label: [s / counts[label] for s in sums[label]]
        for label in (0, 1)
        if counts[label]
    }


def density_histogram(
    timelines: list[RevisionTimeline],
    bins: int = 10,
    threshold_ratio: float = 0.5,
    bandwidth="auto",
) -> dict:
    """Per-label histogram of the fraction of revisions inside dense regions.

    Each label's histogram is normalized to sum to 1. Labels absent from
    the input are absent from the result.
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    if not timelines:
        raise ValueError("no timelines to histogram")
    fractions: dict[int, list[float]] = {}
    for tl in timelines:
        grid = kde_density(tl, bandwidth=bandwidth)
        regions = dense_regions(grid, threshold_ratio=threshold_ratio)
        inside = sum(r.revision_count for r in regions)
        fractions.setdefault(tl.label, []).append(inside / len(tl.timestamps))
    result = {}
    edges = np.linspace(0.0, 1.0, bins + 1)
    for label, values in sorted(fractions.items()):
        counts, _ = np.histogram(np.clip(values, 0.0, 1.0), bins=edges)
        result[label] = {
            "bin_edges": edges.tolist(),
            "normalized_counts": (counts / counts.sum()).tolist(),
        }
    return result


# ---------------------------------------------------------------------------
# Artifact writers
# ---------------------------------------------------------------------------

def write_regions_csv(rows: list[tuple[str, list[DenseRegion]]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("article_id,start,end,normalized_density,revision_count\n")
        for article_id, regions in rows:
            for r in regions:
                fh.write(
                    f"{article_id},{format_instant(r.start)},{format_instant(r.end)},"
                    f"{r.normalized_density:.6f},{r.revision_count}\n"
                )


def write_quartiles_csv(
    rows: list[tuple[str, int, QuartileDistribution]], aggregated: dict, path
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("article_id,label,q1,q2,q3,q4\n")
        for article_id, label, dist in rows:
            q = ",".join(f"{v:.6f}" for v in dist.q)
            fh.write(f"{article_id},{label},{q}\n")
        for label in sorted(aggregated):
            q = ",".join(f"{v:.6f}" for v in aggregated[label])
            fh.write(f"mean_label_{label},{label},{q}\n")


def write_histogram_csv(histograms: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("label,bin_start,bin_end,normalized_count\n")
        for label in sorted(histograms):
            data = histograms[label]
            edges = data["bin_edges"]
            for i, c in enumerate(data["normalized_counts"]):
                fh.write(f"{label},{edges[i]:.6f},{edges[i + 1]:.6f},{c:.6f}\n")


def write_changepoints_json(
    rows: list[tuple[str, ChangepointSet]], path, config: dict | None = None
) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "changepoints",
        "articles": {
            article_id: {
                "positions": cps.positions,
                "run_length_map": cps.run_length_map,
            }
            for article_id, cps in rows
        },
    }
    if config is not None:
        doc["config"] = config
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
