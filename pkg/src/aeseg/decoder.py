"""Decode an embedding into ordering, boundaries and segmentation.

The leading eigenvector's angle gives each pixel a figure/ground rank
(larger angle = more figural). Spatial gradients of the remaining
eigenvectors give a soft boundary strength map, whose watershed basins
form the finest segmentation; merging basins by ascending mean arc
strength yields an ultrametric region hierarchy that can be cut at any
level.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

from .eigensolver import EmbeddingResult
from .stencil import GridDomain

LAMBDA_FLOOR = 1e-6


@dataclass(frozen=True)
class RankMap:
    """Real-valued figure/ground rank per pixel; larger = more figural."""

    theta: np.ndarray

    def __post_init__(self):
        if self.theta.ndim != 2:
            raise ValueError("rank map must be 2-D")


@dataclass(frozen=True)
class BoundaryMap:
    """Nonnegative soft boundary strength per pixel."""

    strength: np.ndarray

    def __post_init__(self):
        if self.strength.ndim != 2:
            raise ValueError("boundary map must be 2-D")
        if np.any(self.strength < 0) or not np.all(np.isfinite(self.strength)):
            raise ValueError("boundary strength must be finite and nonnegative")


@dataclass(frozen=True)
class SegmentationMap:
    """Dense integer region labels over the pixel grid."""

    labels: np.ndarray
    region_count: int

    def __post_init__(self):
        if self.labels.ndim != 2:
            raise ValueError("label map must be 2-D")
        counts = np.bincount(self.labels.ravel(), minlength=self.region_count)
        if len(counts) != self.region_count or np.any(counts == 0):
            raise ValueError(
                f"labels must be dense in [0, {self.region_count})"
            )

    @property
    def domain(self) -> GridDomain:
        return GridDomain(*self.labels.shape)


@dataclass(frozen=True)
class SegmentationHierarchy:
    """Ultrametric merge tree over the base watershed regions.

    Nodes 0..B-1 are the base regions; merge t joins nodes merges[t, 0]
    and merges[t, 1] into node B + t at strength levels[t]. Levels are
    nondecreasing along any root path.
    """

    base: SegmentationMap
    merges: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        if len(self.merges) != len(self.levels):
            raise ValueError("merge list and level list lengths differ")


def first_occurrence_relabel(flat: np.ndarray) -> tuple[np.ndarray, int]:
    """Relabel values to dense ids ordered by first appearance."""
    uniq, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    remap = np.empty(len(uniq), dtype=np.int64)
    remap[order] = np.arange(len(uniq))
    return remap[inverse], len(uniq)


def connected_components(values: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected components of equal values; dense scan-order labels."""
    h, w = values.shape
    n = h * w
    idx = np.arange(n).reshape(h, w)
    rows, cols = [], []
    if w > 1:
        eq = values[:, :-1] == values[:, 1:]
        rows.append(idx[:, :-1][eq])
        cols.append(idx[:, 1:][eq])
    if h > 1:
        eq = values[:-1, :] == values[1:, :]
        rows.append(idx[:-1, :][eq])
        cols.append(idx[1:, :][eq])
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
    else:
        r = c = np.empty(0, dtype=np.int64)
    graph = sp.csr_array((np.ones(len(r), dtype=np.int8), (r, c)), shape=(n, n))
    _, raw = _cc(graph, directed=False)
    labels, count = first_occurrence_relabel(raw)
    return labels.reshape(h, w), count


def fg_order(emb: EmbeddingResult, domain: GridDomain | None = None) -> RankMap:
    """Figure/ground rank from the leading eigenvector's angle.

    The solver's gauge fix pins the global rotation, so angles are
    reproducible; only pairwise differences carry meaning.
    """
    dom = domain if domain is not None else emb.domain
    if dom is None:
        raise ValueError("embedding carries no grid domain; pass one explicitly")
    if emb.m < 1:
        raise ValueError("embedding has no eigenvectors")
    return RankMap(np.angle(emb.eigenvectors[0]).reshape(dom.shape))


def _grad_mag(z: np.ndarray) -> np.ndarray:
    """Gradient magnitude over (x, y) x (re, im); central diff interior."""
    gy = np.zeros_like(z)
    gx = np.zeros_like(z)
    if z.shape[0] > 1:
        gy[1:-1] = (z[2:] - z[:-2]) * 0.5
        gy[0] = z[1] - z[0]
        gy[-1] = z[-1] - z[-2]
    if z.shape[1] > 1:
        gx[:, 1:-1] = (z[:, 2:] - z[:, :-2]) * 0.5
        gx[:, 0] = z[:, 1] - z[:, 0]
        gx[:, -1] = z[:, -1] - z[:, -2]
    return np.sqrt(
        gx.real**2 + gx.imag**2 + gy.real**2 + gy.imag**2
    )


def spectral_boundaries(
    emb: EmbeddingResult,
    domain: GridDomain | None = None,
    lambda_floor: float = LAMBDA_FLOOR,
) -> BoundaryMap:
    """Soft boundaries as eigenvalue-weighted eigenvector gradients.

    Sums ||grad z_k|| over eigenvectors 1..m-1 with weights
    1/sqrt(max(lambda_k, lambda_floor)); the leading eigenvector encodes
    ordering rather than grouping and is excluded.
    """
    dom = domain if domain is not None else emb.domain
    if dom is None:
        raise ValueError("embedding carries no grid domain; pass one explicitly")
    if emb.m < 2:
        raise ValueError("boundary decoding needs at least 2 eigenvectors")
    strength = np.zeros(dom.shape)
    for k in range(1, emb.m):
        weight = 1.0 / np.sqrt(max(emb.eigenvalues[k], lambda_floor))
        strength += weight * _grad_mag(emb.eigenvectors[k].reshape(dom.shape))
    return BoundaryMap(strength)


def _meyer_flood(strength: np.ndarray) -> tuple[np.ndarray, int]:
    """Catchment basins of a height map; Meyer flooding, 4-connectivity.

    Seeds are the regional minima (equal-value plateaus with no lower
    neighbor). Flooding pops pixels by (strength, pixel index), so plateau
    pixels go to the first-reaching basin and the result is deterministic.
    """
    h, w = strength.shape
    plat, _ = connected_components(strength)

    lower = np.zeros((h, w), dtype=bool)
    if w > 1:
        lower[:, :-1] |= strength[:, 1:] < strength[:, :-1]
        lower[:, 1:] |= strength[:, :-1] < strength[:, 1:]
    if h > 1:
        lower[:-1, :] |= strength[1:, :] < strength[:-1, :]
        lower[1:, :] |= strength[:-1, :] < strength[1:, :]
    has_lower = np.bincount(plat.ravel(), weights=lower.ravel()) > 0

    basin_of_plateau = np.full(has_lower.shape, -1, dtype=np.int64)
    minima = np.flatnonzero(~has_lower)  # plateau ids are scan-ordered already
    basin_of_plateau[minima] = np.arange(len(minima))
    labels = basin_of_plateau[plat.ravel()]

    flat = strength.ravel()
    heap: list[tuple[float, int, int]] = []
    seeded = np.flatnonzero(labels >= 0)
    for p in seeded:
        b = labels[p]
        r, c = divmod(int(p), w)
        for nr, nc in ((r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)):
            if 0 <= nr < h and 0 <= nc < w:
                q = nr * w + nc
                if labels[q] < 0:
                    heapq.heappush(heap, (flat[q], q, int(b)))
    while heap:
        _, p, b = heapq.heappop(heap)
        if labels[p] >= 0:
            continue
        labels[p] = b
        r, c = divmod(p, w)
        for nr, nc in ((r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)):
            if 0 <= nr < h and 0 <= nc < w:
                q = nr * w + nc
                if labels[q] < 0:
                    heapq.heappush(heap, (flat[q], q, b))
    return labels.reshape(h, w), len(minima)


def _basin_arcs(labels: np.ndarray, strength: np.ndarray, count: int):
    """Mean pass height between adjacent basins.

    A straddling 4-adjacent pair contributes the higher of its two
    strengths (the ridge height crossed); arc strength is the mean over
    all pairs shared by the two basins.
    """
    pa, pb, alt = [], [], []
    a, b = labels[:, :-1], labels[:, 1:]
    diff = a != b
    if np.any(diff):
        pa.append(np.minimum(a, b)[diff])
        pb.append(np.maximum(a, b)[diff])
        alt.append(np.maximum(strength[:, :-1], strength[:, 1:])[diff])
    a, b = labels[:-1, :], labels[1:, :]
    diff = a != b
    if np.any(diff):
        pa.append(np.minimum(a, b)[diff])
        pb.append(np.maximum(a, b)[diff])
        alt.append(np.maximum(strength[:-1, :], strength[1:, :])[diff])
    if not pa:
        return {}
    key = np.concatenate(pa).astype(np.int64) * count + np.concatenate(pb)
    alts = np.concatenate(alt)
    uniq, inverse = np.unique(key, return_inverse=True)
    sums = np.bincount(inverse, weights=alts)
    cnts = np.bincount(inverse)
    arcs = {}
    for k, s, c in zip(uniq, sums, cnts):
        arcs[(int(k) // count, int(k) % count)] = [float(s), int(c)]
    return arcs


def watershed_hierarchy(bmap: BoundaryMap) -> SegmentationHierarchy:
    """Finest watershed partition plus ultrametric agglomeration.

    Merges proceed by ascending arc strength; when regions merge, their
    arcs to a common neighbor combine by pair-count-weighted mean. The
    combined strength is a mean of arcs at or above the current minimum,
    so recorded merge levels never decrease.
    """
    labels, count = _meyer_flood(bmap.strength)
    base = SegmentationMap(labels.astype(np.int32), count)
    arcs = _basin_arcs(labels, bmap.strength, count)

    nbrs: dict[int, set[int]] = {i: set() for i in range(count)}
    heap: list[tuple[float, int, int]] = []
    for (u, v), (s, c) in arcs.items():
        nbrs[u].add(v)
        nbrs[v].add(u)
        heapq.heappush(heap, (s / c, u, v))

    active = set(range(count))
    merges, levels = [], []
    next_id = count
    while len(active) > 1 and heap:
        mean, u, v = heapq.heappop(heap)
        if (u, v) not in arcs:
            continue  # stale entry from a previous merge
        s_uv, c_uv = arcs.pop((u, v))
        merges.append((u, v))
        levels.append(mean)
        new = next_id
        next_id += 1
        merged_nbrs = (nbrs.pop(u) | nbrs.pop(v)) - {u, v}
        nbrs[new] = merged_nbrs
        for t in merged_nbrs:
            s_tot, c_tot = 0.0, 0
            for old in ((min(u, t), max(u, t)), (min(v, t), max(v, t))):
                if old in arcs:
                    s, c = arcs.pop(old)
                    s_tot += s
                    c_tot += c
            arcs[(t, new)] = [s_tot, c_tot]
            nbrs[t].discard(u)
            nbrs[t].discard(v)
            nbrs[t].add(new)
            heapq.heappush(heap, (s_tot / c_tot, t, new))
        active.discard(u)
        active.discard(v)
        active.add(new)

    return SegmentationHierarchy(
        base,
        np.array(merges, dtype=np.int64).reshape(-1, 2),
        np.array(levels, dtype=np.float64),
    )


def cut_hierarchy(h: SegmentationHierarchy, level: float) -> SegmentationMap:
    """Partition obtained by applying every merge below the given level."""
    if level < 0:
        raise ValueError("cut level must be >= 0")
    count = h.base.region_count
    parent = np.arange(count + len(h.levels), dtype=np.int64)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t, (uv, lev) in enumerate(zip(h.merges, h.levels)):
        if lev < level:
            new = count + t
            parent[find(int(uv[0]))] = new
            parent[find(int(uv[1]))] = new

    root_of_leaf = np.array([find(i) for i in range(count)])
    merged = root_of_leaf[h.base.labels.ravel()]
    dense, k = first_occurrence_relabel(merged)
    return SegmentationMap(dense.reshape(h.base.labels.shape).astype(np.int32), k)


def transfer_fg(rank: RankMap, seg: SegmentationMap) -> np.ndarray:
    """Per-region rank: the median of theta over each region's pixels.

    The median makes the transfer robust to misalignment between the rank
    map and region boundaries. Even-sized regions take the lower middle
    value, keeping the result deterministic and order-stable.
    """
    if rank.theta.shape != seg.labels.shape:
        raise ValueError("rank map and segmentation shapes differ")
    theta = rank.theta.ravel()
    lab = seg.labels.ravel()
    order = np.lexsort((theta, lab))
    counts = np.bincount(lab, minlength=seg.region_count)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    mid = starts + (counts - 1) // 2
    return theta[order][mid]
