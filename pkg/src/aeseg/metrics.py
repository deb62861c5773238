"""Figure/ground benchmark over a common segmentation.

Predicted and ground-truth rank maps are transferred onto the same
segmentation by region median; adjacent region pairs whose ground-truth
ranks differ are then scored on whether the prediction orders them the
same way. Four accuracies are reported: plain pairwise (R-ACC), boundary-
length weighted (B-ACC), and the latter restricted to boundaries touching
the foreground-most 50% / 25% of regions (B-ACC-50, B-ACC-25).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .decoder import RankMap, SegmentationMap, transfer_fg


@dataclass
class BenchmarkReport:
    """Accuracies in [0, 1], or None where no pair qualified.

    counts holds the raw tallies behind each ratio so reports can be
    pooled across images without recomputing.
    """

    r_acc: float | None
    b_acc: float | None
    b_acc_50: float | None
    b_acc_25: float | None
    counts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "r_acc": self.r_acc,
            "b_acc": self.b_acc,
            "b_acc_50": self.b_acc_50,
            "b_acc_25": self.b_acc_25,
            "counts": dict(self.counts),
        }

    def to_text(self) -> str:
        def fmt(name, value, num, den):
            shown = "undefined" if value is None else f"{value:.4f}"
            return f"{name:<9} {shown:>9}   ({num}/{den})"

        c = self.counts
        lines = [
            fmt("R-ACC", self.r_acc, c.get("pairs_correct", 0), c.get("pairs_evaluated", 0)),
            fmt("B-ACC", self.b_acc, c.get("b_pixels_correct", 0), c.get("b_pixels", 0)),
            fmt("B-ACC-50", self.b_acc_50, c.get("b50_pixels_correct", 0), c.get("b50_pixels", 0)),
            fmt("B-ACC-25", self.b_acc_25, c.get("b25_pixels_correct", 0), c.get("b25_pixels", 0)),
        ]
        return "\n".join(lines)


def adjacent_region_pairs(seg: SegmentationMap):
    """All 4-adjacent region pairs with their shared boundary pixels.

    The boundary pixel set of a pair contains the pixels of either region
    that have a 4-neighbor in the other, so both sides of the interface
    count toward its length. Returns (a, b, pixel index array) tuples
    with a < b, sorted by (a, b).
    """
    labels = seg.labels
    h, w = labels.shape
    pix = np.arange(h * w).reshape(h, w)

    la, lb, pa, pb = [], [], [], []
    if w > 1:
        diff = labels[:, :-1] != labels[:, 1:]
        la.append(labels[:, :-1][diff])
        lb.append(labels[:, 1:][diff])
        pa.append(pix[:, :-1][diff])
        pb.append(pix[:, 1:][diff])
    if h > 1:
        diff = labels[:-1, :] != labels[1:, :]
        la.append(labels[:-1, :][diff])
        lb.append(labels[1:, :][diff])
        pa.append(pix[:-1, :][diff])
        pb.append(pix[1:, :][diff])
    if not la:
        return []

    la = np.concatenate(la).astype(np.int64)
    lb = np.concatenate(lb).astype(np.int64)
    pa = np.concatenate(pa)
    pb = np.concatenate(pb)
    lo = np.minimum(la, lb)
    hi = np.maximum(la, lb)

    groups: dict[tuple[int, int], list] = {}
    for a, b, p, q in zip(lo, hi, pa, pb):
        groups.setdefault((int(a), int(b)), []).append((int(p), int(q)))
    out = []
    for (a, b) in sorted(groups):
        pts = np.unique(np.array(groups[(a, b)]).ravel())
        out.append((a, b, pts))
    return out


def _foreground_set(gt_rank: np.ndarray, fraction: float) -> set:
    """Region ids of the foreground-most ceil(fraction * count) regions.

    Ranked by descending ground-truth region rank; rank ties broken by
    region id so the selection is deterministic.
    """
    count = len(gt_rank)
    take = math.ceil(fraction * count)
    order = np.lexsort((np.arange(count), -gt_rank))
    return set(int(r) for r in order[:take])


def evaluate(pred: RankMap, gt: RankMap, seg: SegmentationMap) -> BenchmarkReport:
    """Score a predicted ordering against ground truth on a segmentation.

    Pairs whose ground-truth region ranks tie are excluded from every
    metric; a predicted tie on an evaluated pair counts as incorrect,
    since it fails to say which region is in front. Only the order of
    predicted ranks matters. A boundary qualifies for B-ACC-50/25 when at
    least one of its two regions is in the foreground set.
    """
    if pred.theta.shape != seg.labels.shape or gt.theta.shape != seg.labels.shape:
        raise ValueError("rank maps and segmentation must share a domain")
    pred_rank = transfer_fg(pred, seg)
    gt_rank = transfer_fg(gt, seg)
    pairs = adjacent_region_pairs(seg)

    fg50 = _foreground_set(gt_rank, 0.50)
    fg25 = _foreground_set(gt_rank, 0.25)

    tallies = {
        "pairs_evaluated": 0,
        "pairs_correct": 0,
        "b_pixels": 0,
        "b_pixels_correct": 0,
        "b50_pixels": 0,
        "b50_pixels_correct": 0,
        "b25_pixels": 0,
        "b25_pixels_correct": 0,
        "pairs_total": len(pairs),
        "region_count": seg.region_count,
    }
    for a, b, pixels in pairs:
        if gt_rank[a] == gt_rank[b]:
            continue
        gt_front_is_a = gt_rank[a] > gt_rank[b]
        if pred_rank[a] == pred_rank[b]:
            correct = False
        else:
            correct = bool((pred_rank[a] > pred_rank[b]) == gt_front_is_a)
        weight = int(len(pixels))
        tallies["pairs_evaluated"] += 1
        tallies["pairs_correct"] += correct
        tallies["b_pixels"] += weight
        tallies["b_pixels_correct"] += weight * correct
        if a in fg50 or b in fg50:
            tallies["b50_pixels"] += weight
            tallies["b50_pixels_correct"] += weight * correct
        if a in fg25 or b in fg25:
            tallies["b25_pixels"] += weight
            tallies["b25_pixels_correct"] += weight * correct

    def ratio(num_key, den_key):
        den = tallies[den_key]
        return tallies[num_key] / den if den > 0 else None

    return BenchmarkReport(
        r_acc=ratio("pairs_correct", "pairs_evaluated"),
        b_acc=ratio("b_pixels_correct", "b_pixels"),
        b_acc_50=ratio("b50_pixels_correct", "b50_pixels"),
        b_acc_25=ratio("b25_pixels_correct", "b25_pixels"),
        counts=tallies,
    )


def aggregate_reports(reports) -> dict:
    """Dataset-level summary, both pooled-count and mean-over-images.

    The two aggregations answer different questions (pooled weights
    images by their pair counts; the mean weights images equally), so
    both are reported, explicitly labeled. Undefined per-image metrics
    are skipped by the mean.
    """
    reports = list(reports)
    keys = [
        ("r_acc", "pairs_correct", "pairs_evaluated"),
        ("b_acc", "b_pixels_correct", "b_pixels"),
        ("b_acc_50", "b50_pixels_correct", "b50_pixels"),
        ("b_acc_25", "b25_pixels_correct", "b25_pixels"),
    ]
    pooled = {}
    mean = {}
    for name, num_key, den_key in keys:
        num = sum(r.counts.get(num_key, 0) for r in reports)
        den = sum(r.counts.get(den_key, 0) for r in reports)
        pooled[name] = num / den if den > 0 else None
        defined = [getattr(r, name) for r in reports if getattr(r, name) is not None]
        mean[name] = sum(defined) / len(defined) if defined else None
    return {"pooled": pooled, "mean_over_images": mean, "images": len(reports)}
