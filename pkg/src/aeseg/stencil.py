"""Pixel grid, multiscale neighbor stencil, and pairwise relation maps.

Every other module consumes these containers: a rectangular pixel grid,
an ordered set of (dy, dx) neighbor displacements, and per-offset maps of
boundary probability b and figural probability f.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_RADII = (1, 4, 16)


class StencilError(ValueError):
    """A stencil or relation map violates a structural requirement."""


@dataclass(frozen=True)
class GridDomain:
    """Rectangular pixel grid. Pixel index p = row * width + col."""

    height: int
    width: int

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError(
                f"grid must be at least 1x1, got {self.height}x{self.width}"
            )

    @property
    def n(self) -> int:
        return self.height * self.width

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def index(self, row: int, col: int) -> int:
        return row * self.width + col

    def coords(self, p: int) -> tuple[int, int]:
        return divmod(p, self.width)


@dataclass(frozen=True)
class Stencil:
    """Ordered set of distinct, non-zero (dy, dx) displacements.

    Must be closed under negation so that every directed pair (p, q) has
    its reverse (q, p) sampled as well.
    """

    offsets: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set(self.offsets)
        if len(seen) != len(self.offsets):
            raise StencilError("stencil offsets must be distinct")
        if (0, 0) in seen:
            raise StencilError("stencil offsets must be non-zero")
        for dy, dx in self.offsets:
            if (-dy, -dx) not in seen:
                raise StencilError(
                    f"stencil not closed under negation: missing {(-dy, -dx)}"
                )

    def __len__(self) -> int:
        return len(self.offsets)

    def position(self, offset: tuple[int, int]) -> int:
        return self.offsets.index(offset)


def ring_offsets(radius: int) -> list[tuple[int, int]]:
    """The 8-neighborhood at a given radius, lexicographic by (dy, dx)."""
    r = radius
    return [
        (-r, -r), (-r, 0), (-r, r),
        (0, -r), (0, r),
        (r, -r), (r, 0), (r, r),
    ]


def default_stencil(radii=DEFAULT_RADII) -> Stencil:
    """8 directions at each radius; the default radii are 1, 4 and 16.

    Offsets are ordered by (radius, dy, dx) so serialized relation tensors
    are stable across runs and platforms.
    """
    offsets: list[tuple[int, int]] = []
    for r in radii:
        if r < 1:
            raise StencilError(f"radius must be >= 1, got {r}")
        offsets.extend(ring_offsets(r))
    return Stencil(tuple(offsets))


def neighbor_of(domain: GridDomain, p: int, offset: tuple[int, int]):
    """Pixel index of p displaced by offset, or None if off-grid."""
    if not 0 <= p < domain.n:
        raise ValueError(f"pixel index {p} outside domain of size {domain.n}")
    row, col = domain.coords(p)
    r, c = row + offset[0], col + offset[1]
    if 0 <= r < domain.height and 0 <= c < domain.width:
        return domain.index(r, c)
    return None


def pair_slices(domain: GridDomain, offset: tuple[int, int]):
    """Slices selecting all in-grid pairs (p, q = p + offset).

    Returns ((p_rows, p_cols), (q_rows, q_cols)); indexing a (H, W) map
    with the first pair gives the values at p, with the second the values
    at q, in matching order. Slices are empty when the offset exceeds the
    grid extent.
    """
    dy, dx = offset
    h, w = domain.height, domain.width
    rows = max(0, h - abs(dy))
    cols = max(0, w - abs(dx))
    p_r, p_c = max(0, -dy), max(0, -dx)
    q_r, q_c = max(0, dy), max(0, dx)
    return (
        (slice(p_r, p_r + rows), slice(p_c, p_c + cols)),
        (slice(q_r, q_r + rows), slice(q_c, q_c + cols)),
    )


@dataclass(frozen=True)
class RelationMap:
    """Per-offset boundary (b) and figural (f) probabilities on a grid.

    b[k, y, x] estimates the probability that pixel (y, x) and its
    neighbor at stencil offset k lie in different regions; f[k, y, x] the
    conditional probability of the figural direction for that pair.
    Values at positions whose neighbor falls off-grid are never read.
    """

    domain: GridDomain
    stencil: Stencil
    b: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        expect = (len(self.stencil), self.domain.height, self.domain.width)
        for name, arr in (("b", self.b), ("f", self.f)):
            if arr.shape != expect:
                raise StencilError(
                    f"{name} tensor shape {arr.shape} != expected {expect}"
                )
            if np.any(arr < 0) or np.any(arr > 1):
                raise StencilError(f"{name} values must lie in [0, 1]")


def boundary_prob(rel: RelationMap) -> np.ndarray:
    """Per-pixel boundary probability: the local average of b.

    Averages b over the radius-1 ring of the stencil. The average runs
    over the in-grid neighbors only, renormalized by their count, so that
    border pixels are not artificially pulled toward zero; stencils
    carrying only part of the ring are averaged over that part the same
    way.
    """
    present = [
        (k, off)
        for k, off in enumerate(rel.stencil.offsets)
        if max(abs(off[0]), abs(off[1])) == 1
    ]
    if not present:
        raise StencilError(
            "boundary probability needs the radius-1 ring in the stencil"
        )

    h, w = rel.domain.shape
    acc = np.zeros((h, w))
    cnt = np.zeros((h, w))
    for k, off in present:
        p_sl, _ = pair_slices(rel.domain, off)
        acc[p_sl] += rel.b[k][p_sl]
        cnt[p_sl] += 1.0
    if np.any(cnt == 0):
        raise StencilError("some pixel has no in-grid radius-1 neighbor")
    return acc / cnt
