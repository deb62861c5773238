"""Shared builders for randomized tests. Everything is seed-deterministic."""

from __future__ import annotations

from collections import deque

import numpy as np
import scipy.sparse as sp

from aeseg.affinity import degree_vector
from aeseg.decoder import SegmentationMap
from aeseg.stencil import GridDomain, RelationMap, Stencil


def random_relation_map(domain: GridDomain, stencil: Stencil, rng) -> RelationMap:
    k = len(stencil)
    b = rng.uniform(size=(k, domain.height, domain.width))
    f = rng.uniform(size=(k, domain.height, domain.width))
    return RelationMap(domain, stencil, b, f)


def random_hermitian(n: int, rng, density: float = 0.25, complex_vals: bool = True):
    """Random sparse Hermitian matrix with strictly positive degrees.

    A ring of entries guarantees no empty row; a random upper triangle is
    mirrored with conjugation. Returns (W, d)."""
    rows = [np.arange(n - 1)]
    cols = [np.arange(1, n)]
    extra = max(1, int(density * n * (n - 1) / 2))
    rows.append(rng.integers(0, n, size=extra))
    cols.append(rng.integers(0, n, size=extra))
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    keep = r < c
    r, c = r[keep], c[keep]
    if complex_vals:
        v = rng.standard_normal(len(r)) + 1j * rng.standard_normal(len(r))
    else:
        v = rng.standard_normal(len(r)) + 0j
    upper = sp.csr_array((v, (r, c)), shape=(n, n))
    w = (upper + upper.conj().T).tocsr()
    w.sort_indices()
    return w, degree_vector(w)


def random_segmentation(height: int, width: int, regions: int, rng) -> SegmentationMap:
    """Connected random partition by multi-source BFS growth from seeds."""
    n = height * width
    regions = min(regions, n)
    seeds = rng.choice(n, size=regions, replace=False)
    labels = np.full(n, -1, dtype=np.int64)
    queue = deque()
    for i, s in enumerate(seeds):
        labels[s] = i
        queue.append(int(s))
    while queue:
        p = queue.popleft()
        r, c = divmod(p, width)
        for nr, nc in ((r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)):
            if 0 <= nr < height and 0 <= nc < width:
                q = nr * width + nc
                if labels[q] < 0:
                    labels[q] = labels[p]
                    queue.append(q)
    return SegmentationMap(labels.reshape(height, width).astype(np.int32), regions)


def assert_partition_equal(a: SegmentationMap, b: SegmentationMap):
    """Same grouping of pixels, label numbering ignored."""
    assert a.labels.shape == b.labels.shape
    assert a.region_count == b.region_count
    pairs = set(zip(a.labels.ravel().tolist(), b.labels.ravel().tolist()))
    assert len(pairs) == a.region_count


def region_is_connected(labels: np.ndarray, region: int) -> bool:
    """Flood-fill check that one region forms a single 4-connected blob."""
    mask = labels == region
    total = int(mask.sum())
    if total == 0:
        return False
    h, w = labels.shape
    start = np.argwhere(mask)[0]
    seen = np.zeros_like(mask)
    queue = deque([(int(start[0]), int(start[1]))])
    seen[start[0], start[1]] = True
    reached = 0
    while queue:
        r, c = queue.popleft()
        reached += 1
        for nr, nc in ((r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)):
            if 0 <= nr < h and 0 <= nc < w and mask[nr, nc] and not seen[nr, nc]:
                seen[nr, nc] = True
                queue.append((nr, nc))
    return reached == total
