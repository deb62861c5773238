"""Perfect short-range relations from annotations, and training targets.

A segmentation plus boundary-ownership labels on 4-adjacent pixel pairs
define perfect short-range affinities: full-confidence binding inside
regions, full-confidence rotation by +/-phi across owned boundaries, and
nothing across unlabeled boundaries. Globalizing these through the
embedding yields a dense figure/ground rank map, from which binary
training targets for the pairwise predictors are derived.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .affinity import AffinityParams, finalize_affinity
from .decoder import RankMap, SegmentationMap, fg_order, transfer_fg
from .eigensolver import SolverConfig, solve
from .stencil import Stencil, pair_slices


class GroundTruthError(ValueError):
    """Ownership labels inconsistent with the segmentation."""


@dataclass(frozen=True)
class OwnershipLabels:
    """Boundary ownership for 4-adjacent pixel pairs.

    horiz[r, c] relates (r, c) to (r, c + 1); vert[r, c] relates (r, c)
    to (r + 1, c). Value +1 means the first pixel owns the boundary (is
    figural), -1 the second, 0 unlabeled. Labels are only meaningful on
    pairs that straddle a region boundary.
    """

    horiz: np.ndarray
    vert: np.ndarray

    def __post_init__(self):
        for name, arr in (("horiz", self.horiz), ("vert", self.vert)):
            if not np.isin(arr, (-1, 0, 1)).all():
                raise GroundTruthError(f"{name} labels must be -1, 0 or +1")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.vert.shape[0] + 1, self.horiz.shape[1] + 1)


@dataclass(frozen=True)
class TargetTensors:
    """Binary training targets over [offsets x grid].

    b marks pairs straddling a region boundary. f is the figural
    direction (1 if the neighbor is in front, 0 if behind) and is valid
    only where f_mask holds: pairs with b = 1 and untied region ranks.
    Rank ties are stored as 0.5 but masked out, since a binary target
    cannot encode them.
    """

    b: np.ndarray
    f: np.ndarray
    f_mask: np.ndarray

    def __post_init__(self):
        if not (self.b.shape == self.f.shape == self.f_mask.shape):
            raise ValueError("target tensors must share a shape")
        if np.any(self.f_mask & (self.b == 0)):
            raise ValueError("f may only be valid where b = 1")


def _check_labels(diff: np.ndarray, own: np.ndarray, kind: str):
    if np.any((own != 0) & ~diff):
        raise GroundTruthError(f"{kind} ownership label on a non-boundary pair")


def gt_affinity(seg: SegmentationMap, own: OwnershipLabels, params: AffinityParams):
    """Full-confidence short-range affinities from perfect annotations.

    Same-region 4-adjacent pairs bind with unit confidence and zero
    angle. Boundary pairs with an ownership label rotate by phi, oriented
    so the owning side comes out more figural; unlabeled boundary pairs
    contribute nothing (zero confidence). No exponential reweighting is
    applied: ground-truth relations are exact, not estimates. The result
    goes through the same wedge rescaling and symmetrization as learned
    affinities.
    """
    labels = seg.labels
    h, w = labels.shape
    if own.shape != (h, w):
        raise GroundTruthError(
            f"ownership labels for grid {own.shape} but segmentation is {(h, w)}"
        )
    n = h * w
    pix = np.arange(n).reshape(h, w)

    rows, cols, vals = [], [], []

    def emit(p, q, val):
        rows.append(p)
        cols.append(q)
        vals.append(val)
        rows.append(q)
        cols.append(p)
        vals.append(np.conj(val))

    if w > 1:
        diff = labels[:, :-1] != labels[:, 1:]
        _check_labels(diff, own.horiz, "horizontal")
        p, q = pix[:, :-1], pix[:, 1:]
        same = ~diff
        emit(p[same], q[same], np.ones(int(same.sum()), dtype=np.complex128))
        lab = diff & (own.horiz != 0)
        emit(p[lab], q[lab], np.exp(1j * params.phi * own.horiz[lab]))
    if h > 1:
        diff = labels[:-1, :] != labels[1:, :]
        _check_labels(diff, own.vert, "vertical")
        p, q = pix[:-1, :], pix[1:, :]
        same = ~diff
        emit(p[same], q[same], np.ones(int(same.sum()), dtype=np.complex128))
        lab = diff & (own.vert != 0)
        emit(p[lab], q[lab], np.exp(1j * params.phi * own.vert[lab]))

    directed = sp.csr_array(
        (
            np.concatenate([np.asarray(v, dtype=np.complex128).ravel() for v in vals]),
            (
                np.concatenate([np.asarray(r).ravel() for r in rows]),
                np.concatenate([np.asarray(c).ravel() for c in cols]),
            ),
        ),
        shape=(n, n),
    )
    return finalize_affinity(directed, params.wedge_rescale)


def globalize(
    seg: SegmentationMap,
    own: OwnershipLabels,
    params: AffinityParams,
    cfg: SolverConfig,
) -> RankMap:
    """Dense figure/ground rank by embedding the perfect short-range relations."""
    w, d = gt_affinity(seg, own, params)
    emb = solve(w, d, cfg, domain=seg.domain)
    return fg_order(emb)


def make_targets(seg: SegmentationMap, rank: RankMap, stencil: Stencil) -> TargetTensors:
    """Pairwise training targets over all in-grid stencil pairs.

    b is 1 exactly when the pair crosses a region boundary. f compares
    region-median ranks (rather than raw per-pixel values, which are
    noisy near boundaries): 1 when the neighbor's region is in front, 0
    when behind, masked out on ties and wherever b = 0 or the neighbor is
    off-grid.
    """
    if rank.theta.shape != seg.labels.shape:
        raise ValueError("rank map and segmentation shapes differ")
    region_rank = transfer_fg(rank, seg)
    pixel_rank = region_rank[seg.labels]

    k = len(stencil)
    h, w = seg.labels.shape
    b = np.zeros((k, h, w), dtype=np.uint8)
    f = np.zeros((k, h, w), dtype=np.float32)
    mask = np.zeros((k, h, w), dtype=bool)
    for i, off in enumerate(stencil.offsets):
        p_sl, q_sl = pair_slices(seg.domain, off)
        diff = seg.labels[p_sl] != seg.labels[q_sl]
        b[i][p_sl] = diff
        sign = np.sign(pixel_rank[q_sl] - pixel_rank[p_sl])
        f[i][p_sl] = np.where(diff, (sign + 1.0) / 2.0, 0.0)
        mask[i][p_sl] = diff & (sign != 0)
    return TargetTensors(b, f, mask)
