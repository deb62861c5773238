"""Synthetic layered scenes with exactly known ground truth.

Rectangles and disks are stacked at distinct integer depths over a
background at depth 0 and rasterized with the painter's algorithm. The
visible-shape map, split into connected fragments, gives the
segmentation; depth gives the true rank; and every boundary pair is owned
by its deeper (more figural) side. Edges are hard (no anti-aliasing) so
ownership is unambiguous everywhere, which makes these scenes an exact
oracle for the full pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decoder import RankMap, SegmentationMap, connected_components
from .groundtruth import OwnershipLabels
from .stencil import GridDomain

RECTANGLE = "rectangle"
DISK = "disk"


class RenderError(ValueError):
    """Degenerate scene: some shape is completely hidden."""


@dataclass(frozen=True)
class ShapeSpec:
    """One primitive at a depth layer.

    Rectangle params are (top, left, height, width); disk params are
    (center_row, center_col, radius). Depth must be >= 1; larger depth
    means nearer to the viewer.
    """

    kind: str
    params: tuple
    depth: int

    def __post_init__(self):
        if self.kind not in (RECTANGLE, DISK):
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if self.depth < 1:
            raise ValueError("shape depth must be >= 1 (0 is the background)")


@dataclass(frozen=True)
class SceneSpec:
    """Layered scene: ordered shapes over a background at depth 0."""

    domain: GridDomain
    shapes: tuple[ShapeSpec, ...]
    seed: int = 0

    def __post_init__(self):
        depths = [s.depth for s in self.shapes]
        if len(set(depths)) != len(depths):
            raise ValueError("layer depths must be distinct")
        h, w = self.domain.shape
        for s in self.shapes:
            if s.kind == RECTANGLE:
                top, left, sh, sw = s.params
                ok = 0 <= top and 0 <= left and sh >= 1 and sw >= 1
                ok = ok and top + sh <= h and left + sw <= w
            else:
                cy, cx, r = s.params
                ok = r >= 1 and r <= cy < h - r and r <= cx < w - r
            if not ok:
                raise ValueError(f"shape {s} does not fit inside {h}x{w}")


def _rasterize(shape: ShapeSpec, domain: GridDomain) -> np.ndarray:
    h, w = domain.shape
    if shape.kind == RECTANGLE:
        top, left, sh, sw = shape.params
        mask = np.zeros((h, w), dtype=bool)
        mask[top : top + sh, left : left + sw] = True
        return mask
    cy, cx, r = shape.params
    yy, xx = np.ogrid[:h, :w]
    return (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r


def _paint(spec: SceneSpec):
    """Depth buffer and visible-shape-id map (-1 for background)."""
    h, w = spec.domain.shape
    depth = np.zeros((h, w), dtype=np.int64)
    sid = np.full((h, w), -1, dtype=np.int64)
    for i, shape in enumerate(spec.shapes):
        mask = _rasterize(shape, spec.domain) & (depth < shape.depth)
        depth[mask] = shape.depth
        sid[mask] = i
    return depth, sid


def render(spec: SceneSpec):
    """Rasterize to (SegmentationMap, true RankMap, OwnershipLabels).

    Occlusion-fragmented shapes yield one region per connected fragment.
    Raises RenderError if any shape ends up fully occluded.
    """
    depth, sid = _paint(spec)
    visible = np.unique(sid)
    for i, shape in enumerate(spec.shapes):
        if i not in visible:
            raise RenderError(f"shape {i} ({shape.kind}, depth {shape.depth}) fully occluded")

    labels, count = connected_components(sid)
    seg = SegmentationMap(labels.astype(np.int32), count)
    rank = RankMap(depth.astype(np.float64))

    # deeper side owns every straddling pair; depths differ across regions
    # by construction (fragments of one shape are never adjacent)
    horiz = np.zeros((labels.shape[0], labels.shape[1] - 1), dtype=np.int8)
    if labels.shape[1] > 1:
        diff = labels[:, :-1] != labels[:, 1:]
        horiz[diff] = np.where(depth[:, :-1] > depth[:, 1:], 1, -1)[diff]
    vert = np.zeros((labels.shape[0] - 1, labels.shape[1]), dtype=np.int8)
    if labels.shape[0] > 1:
        diff = labels[:-1, :] != labels[1:, :]
        vert[diff] = np.where(depth[:-1, :] > depth[1:, :], 1, -1)[diff]
    return seg, rank, OwnershipLabels(horiz, vert)


def random_scene(domain: GridDomain, n_shapes: int, seed: int) -> SceneSpec:
    """Deterministic random scene with every shape partly visible.

    Shape extents are drawn within [10%, 60%] of the smaller image
    dimension. Proposals that fully occlude an earlier shape are redrawn,
    so rendering the result never fails.
    """
    if n_shapes < 0:
        raise ValueError("n_shapes must be >= 0")
    rng = np.random.default_rng(seed)
    h, w = domain.shape
    dmin = min(h, w)
    lo = max(2, round(0.1 * dmin))
    hi = max(lo, round(0.6 * dmin))

    for _ in range(100):
        shapes = []
        for i in range(n_shapes):
            if rng.integers(2) == 0:
                sh = int(rng.integers(lo, hi + 1))
                sw = int(rng.integers(lo, hi + 1))
                top = int(rng.integers(0, h - sh + 1))
                left = int(rng.integers(0, w - sw + 1))
                shapes.append(ShapeSpec(RECTANGLE, (top, left, sh, sw), i + 1))
            else:
                r = max(1, int(rng.integers(lo, hi + 1)) // 2)
                cy = int(rng.integers(r, h - r))
                cx = int(rng.integers(r, w - r))
                shapes.append(ShapeSpec(DISK, (cy, cx, r), i + 1))
        spec = SceneSpec(domain, tuple(shapes), seed)
        _, sid = _paint(spec)
        if len(np.unique(sid)) == n_shapes + 1 or n_shapes == 0:
            return spec
    raise RuntimeError(f"no visible arrangement of {n_shapes} shapes found in 100 tries")
