import numpy as np
import pytest

from aeseg.stencil import (
    GridDomain,
    RelationMap,
    Stencil,
    StencilError,
    boundary_prob,
    default_stencil,
    neighbor_of,
    pair_slices,
    ring_offsets,
)


def test_default_stencil_members():
    st = default_stencil()
    assert len(st) == 24
    assert (0, 1) in st.offsets
    assert (0, -1) in st.offsets
    assert (16, 16) in st.offsets


def test_default_stencil_ordering():
    st = default_stencil()
    assert list(st.offsets[0:8]) == ring_offsets(1)
    assert list(st.offsets[8:16]) == ring_offsets(4)
    assert list(st.offsets[16:24]) == ring_offsets(16)
    for chunk in (st.offsets[0:8], st.offsets[8:16], st.offsets[16:24]):
        assert list(chunk) == sorted(chunk)


def test_negation_closure():
    st = default_stencil()
    for dy, dx in st.offsets:
        assert (-dy, -dx) in st.offsets


def test_stencil_validation():
    with pytest.raises(StencilError):
        Stencil(((0, 1), (0, 1), (0, -1)))
    with pytest.raises(StencilError):
        Stencil(((0, 0), (0, 1), (0, -1)))
    with pytest.raises(StencilError):
        Stencil(((0, 1), (1, 0)))  # not closed under negation
    with pytest.raises(StencilError):
        default_stencil((1, 0))


def test_grid_domain_bijection():
    d = GridDomain(3, 4)
    assert d.n == 12
    seen = set()
    for r in range(3):
        for c in range(4):
            p = d.index(r, c)
            assert d.coords(p) == (r, c)
            seen.add(p)
    assert seen == set(range(12))


def test_grid_domain_validation():
    with pytest.raises(ValueError):
        GridDomain(0, 5)
    with pytest.raises(ValueError):
        GridDomain(5, 0)


def test_neighbor_of_examples():
    d = GridDomain(3, 3)
    assert neighbor_of(d, d.index(1, 1), (0, 1)) == d.index(1, 2)
    assert neighbor_of(d, d.index(0, 0), (-1, 0)) is None
    d20 = GridDomain(20, 20)
    assert neighbor_of(d20, d20.index(2, 2), (16, 0)) == d20.index(18, 2)


def test_neighbor_of_bad_pixel():
    d = GridDomain(3, 3)
    with pytest.raises(ValueError):
        neighbor_of(d, 9, (0, 1))
    with pytest.raises(ValueError):
        neighbor_of(d, -1, (0, 1))


def test_neighbor_round_trip():
    rng = np.random.default_rng(0)
    d = GridDomain(7, 5)
    st = default_stencil((1, 2, 4))
    for _ in range(300):
        p = int(rng.integers(d.n))
        dy, dx = st.offsets[int(rng.integers(len(st)))]
        q = neighbor_of(d, p, (dy, dx))
        if q is not None:
            assert neighbor_of(d, q, (-dy, -dx)) == p


def test_pair_slices_match_and_empty_when_oversized():
    d = GridDomain(3, 3)
    arr = np.arange(9.0).reshape(3, 3)
    for off in ((4, 4), (-4, 0), (0, 4), (16, -16), (1, 1), (-1, 0)):
        p_sl, q_sl = pair_slices(d, off)
        assert arr[p_sl].shape == arr[q_sl].shape
        if max(abs(off[0]), abs(off[1])) >= 3:
            assert arr[p_sl].size == 0


def test_pair_slices_agree_with_neighbor_of():
    d = GridDomain(4, 5)
    pix = np.arange(d.n).reshape(d.shape)
    for off in default_stencil((1, 2)).offsets:
        p_sl, q_sl = pair_slices(d, off)
        for p, q in zip(pix[p_sl].ravel(), pix[q_sl].ravel()):
            assert neighbor_of(d, int(p), off) == int(q)


def test_relation_map_validation():
    d = GridDomain(2, 2)
    st = default_stencil((1,))
    good = np.zeros((8, 2, 2))
    with pytest.raises(StencilError):
        RelationMap(d, st, np.zeros((7, 2, 2)), good)
    with pytest.raises(StencilError):
        RelationMap(d, st, good, good - 0.5)
    with pytest.raises(StencilError):
        RelationMap(d, st, good + 1.5, good)


def test_boundary_prob_constants():
    d = GridDomain(4, 4)
    st = default_stencil((1,))
    zeros = np.zeros((8, 4, 4))
    ones = np.ones((8, 4, 4))
    assert np.all(boundary_prob(RelationMap(d, st, zeros, zeros)) == 0)
    assert np.all(boundary_prob(RelationMap(d, st, ones, ones * 0)) == 1)


def test_boundary_prob_interior_mean():
    # interior pixel whose ring b values are {1, 1, 0, 0, 0, 0, 0, 0}
    d = GridDomain(5, 5)
    st = default_stencil((1,))
    b = np.zeros((8, 5, 5))
    b[0, 2, 2] = 1.0
    b[3, 2, 2] = 1.0
    e = boundary_prob(RelationMap(d, st, b, np.zeros_like(b)))
    assert e[2, 2] == pytest.approx(0.25)


def test_boundary_prob_border_renormalizes():
    # corner pixel has only 3 in-grid ring neighbors; average uses those 3
    d = GridDomain(4, 4)
    st = default_stencil((1,))
    b = np.ones((8, 4, 4))
    e = boundary_prob(RelationMap(d, st, b, np.zeros_like(b)))
    assert e[0, 0] == pytest.approx(1.0)


def test_boundary_prob_within_ring_range():
    rng = np.random.default_rng(1)
    d = GridDomain(6, 7)
    st = default_stencil((1, 4))
    b = rng.uniform(size=(16, 6, 7))
    e = boundary_prob(RelationMap(d, st, b, np.zeros_like(b)))
    ring = [st.position(off) for off in default_stencil((1,)).offsets]
    for p in range(d.n):
        r, c = d.coords(p)
        vals = []
        for k, off in zip(ring, default_stencil((1,)).offsets):
            if neighbor_of(d, p, off) is not None:
                vals.append(b[k, r, c])
        assert min(vals) - 1e-12 <= e[r, c] <= max(vals) + 1e-12


def test_boundary_prob_needs_radius_one_ring():
    d = GridDomain(4, 4)
    st = default_stencil((4,))
    rel = RelationMap(d, st, np.zeros((8, 4, 4)), np.zeros((8, 4, 4)))
    with pytest.raises(StencilError):
        boundary_prob(rel)
