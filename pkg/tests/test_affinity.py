import cmath
import math

import numpy as np
import pytest

from aeseg.affinity import (
    AffinityParams,
    assemble,
    pair_affinity,
    pair_energies,
    rescale_theta,
)
from aeseg.eigensolver import dense_oracle
from aeseg.stencil import GridDomain, RelationMap, Stencil, default_stencil

from conftest import random_hermitian, random_relation_map

PARAMS = AffinityParams()


def test_params_validation():
    with pytest.raises(ValueError):
        AffinityParams(sigma_b=0.0)
    with pytest.raises(ValueError):
        AffinityParams(sigma_fg=-1.0)
    with pytest.raises(ValueError):
        AffinityParams(phi=0.0)
    with pytest.raises(ValueError):
        AffinityParams(phi=math.pi)


def test_pair_energies_examples():
    assert pair_energies(0.0, 0.5, 0.0, 0.0) == (0.0, 1.0, 1.0)
    assert pair_energies(1.0, 1.0, 0.0, 0.0) == (1.0, 0.0, 1.0)
    assert pair_energies(1.0, 0.5, 0.5, 0.0) == (1.0, 0.75, 0.75)


def test_pair_energies_sum_identity():
    rng = np.random.default_rng(0)
    b, f, ep, eq = rng.uniform(size=(4, 1000))
    e_bind, e_fig, e_gnd = pair_energies(b, f, ep, eq)
    np.testing.assert_allclose(e_fig + e_gnd, 2.0 - (1 - ep) * b * (1 - eq), rtol=1e-15)
    for arr in (e_bind, e_fig, e_gnd):
        assert np.all((0 <= arr) & (arr <= 1))


def test_pair_affinity_pure_binding():
    w = complex(pair_affinity(0.0, 0.3, 0.0, 0.0, PARAMS))
    expected = 1.0 + 2.0 * math.exp(-20.0) * math.cos(PARAMS.phi)
    assert w == pytest.approx(expected, rel=1e-15)
    assert w.imag == 0.0
    assert np.angle(w) == 0.0


def test_pair_affinity_figure_corner():
    w = complex(pair_affinity(1.0, 1.0, 0.0, 0.0, PARAMS))
    expected = (
        math.exp(-10.0)
        + cmath.exp(1j * PARAMS.phi)
        + math.exp(-20.0) * cmath.exp(-1j * PARAMS.phi)
    )
    assert w == pytest.approx(expected, rel=1e-15)
    assert abs(np.angle(w) - PARAMS.phi) < 1e-3


def test_pair_affinity_arg_approaches_phi():
    # binding and ground confidences vanish; only the figure rotation stays
    sharp = AffinityParams(sigma_b=1e-3, sigma_fg=0.02)
    w = complex(pair_affinity(1.0, 1.0, 0.0, 0.0, sharp))
    assert abs(np.angle(w) - sharp.phi) < 1e-12


def test_pair_affinity_ambiguous_boundary_real():
    w = complex(pair_affinity(1.0, 0.5, 0.0, 0.0, PARAMS))
    assert w.imag == 0.0


def test_conjugation_symmetry():
    rng = np.random.default_rng(2)
    b, f, ep, eq = rng.uniform(size=(4, 2000))
    w1 = pair_affinity(b, f, ep, eq, PARAMS)
    w2 = pair_affinity(b, 1.0 - f, ep, eq, PARAMS)
    np.testing.assert_allclose(w1, np.conj(w2), atol=1e-13)


def test_imaginary_part_formula():
    rng = np.random.default_rng(3)
    b, f, ep, eq = rng.uniform(size=(4, 500))
    w = pair_affinity(b, f, ep, eq, PARAMS)
    _, e_fig, e_gnd = pair_energies(b, f, ep, eq)
    c_fig = np.exp(-e_fig / PARAMS.sigma_fg)
    c_gnd = np.exp(-e_gnd / PARAMS.sigma_fg)
    np.testing.assert_allclose(w.imag, (c_fig - c_gnd) * math.sin(PARAMS.phi), rtol=1e-12)


def test_im_monotone_in_b():
    b = np.linspace(0, 1, 200)
    w = pair_affinity(b, 1.0, 0.0, 0.0, PARAMS)
    assert np.all(np.diff(w.imag) >= 0)


def test_magnitude_bound():
    rng = np.random.default_rng(4)
    b, f, ep, eq = rng.uniform(size=(4, 1000))
    assert np.all(np.abs(pair_affinity(b, f, ep, eq, PARAMS)) <= 3.0)


def _two_pixel_rel(b_val, f_val):
    d = GridDomain(1, 2)
    st = Stencil(((0, -1), (0, 1)))
    b = np.full((2, 1, 2), float(b_val))
    f = np.full((2, 1, 2), float(f_val))
    return RelationMap(d, st, b, f)


def test_assemble_two_pixel_binding():
    w, deg = assemble(_two_pixel_rel(0.0, 0.5), PARAMS)
    dense = w.toarray()
    expected = 1.0 + 2.0 * math.exp(-20.0) * math.cos(PARAMS.phi)
    assert dense[0, 1] == pytest.approx(expected, rel=1e-14)
    assert dense[1, 0] == pytest.approx(expected, rel=1e-14)
    assert dense[0, 0] == 0 and dense[1, 1] == 0
    np.testing.assert_allclose(deg, [abs(dense[0, 1])] * 2, rtol=1e-14)


def test_assemble_hermitian_bitwise():
    rng = np.random.default_rng(5)
    rel = random_relation_map(GridDomain(6, 7), default_stencil((1, 2)), rng)
    w, _ = assemble(rel, PARAMS)
    wh = w.conj().T.tocsr()
    wh.sort_indices()
    assert np.array_equal(w.indptr, wh.indptr)
    assert np.array_equal(w.indices, wh.indices)
    assert np.array_equal(w.data, wh.data)


def test_assemble_all_binding_constant_leading_eigenvector():
    d = GridDomain(3, 3)
    st = default_stencil((1,))
    rel = RelationMap(d, st, np.zeros((8, 3, 3)), np.full((8, 3, 3), 0.5))
    w, deg = assemble(rel, PARAMS)
    emb = dense_oracle(w.toarray(), deg, domain=d)
    z0 = emb.eigenvectors[0]
    assert np.abs(z0 - z0.mean()).max() < 1e-10


def test_assemble_degree_matches_row_sums():
    rng = np.random.default_rng(6)
    rel = random_relation_map(GridDomain(5, 4), default_stencil((1, 2)), rng)
    w, deg = assemble(rel, PARAMS)
    np.testing.assert_allclose(deg, np.abs(w.toarray()).sum(axis=1), rtol=1e-13)
    assert np.all(deg >= 0)


def test_assemble_entry_count():
    # one entry per ordered in-grid stencil pair
    d = GridDomain(4, 4)
    st = default_stencil((1,))
    rel = RelationMap(d, st, np.full((8, 4, 4), 0.5), np.full((8, 4, 4), 0.5))
    w, _ = assemble(rel, PARAMS)
    horiz = 4 * 3 * 2
    vert = 4 * 3 * 2
    diag = 3 * 3 * 2 * 2
    assert w.nnz == horiz + vert + diag


def test_rescale_theta_conjugate_pair():
    phi = PARAMS.phi
    w = np.zeros((2, 2), dtype=complex)
    w[0, 1] = cmath.exp(1j * phi)
    w[1, 0] = cmath.exp(-1j * phi)
    import scipy.sparse as sp

    out = rescale_theta(sp.csr_array(w))
    args = np.sort(np.angle(out.toarray()[np.nonzero(out.toarray())]))
    np.testing.assert_allclose(args, [-math.pi / 4, math.pi / 4], atol=1e-12)


def test_rescale_theta_real_unchanged():
    import scipy.sparse as sp

    w = sp.csr_array(np.array([[0.0, 2.0], [2.0, 0.0]]).astype(complex))
    assert rescale_theta(w) is w


def test_rescale_theta_mass_and_preservation():
    rng = np.random.default_rng(7)
    for trial in range(5):
        w, _ = random_hermitian(20, rng)
        out = rescale_theta(w)
        assert abs(np.abs(np.angle(out.data)).sum() - math.pi / 2) < 1e-9
        np.testing.assert_allclose(np.abs(out.data), np.abs(w.data), rtol=1e-13)
        assert np.all(np.sign(np.angle(out.data)) == np.sign(np.angle(w.data)))


def test_wedge_rescale_runs_before_symmetrization():
    # symmetric inputs: both directed entries carry the same angle alpha,
    # so rescaling sends each to pi/4 and symmetrization cancels them to
    # the real part. Without rescaling the cosine uses alpha instead.
    rel = _two_pixel_rel(0.8, 1.0)
    raw, _ = assemble(rel, AffinityParams(wedge_rescale=False))
    scaled, _ = assemble(rel, AffinityParams(wedge_rescale=True))
    # e(p) = e(q) = 0.8: the only ring neighbor carries b = 0.8
    directed = complex(pair_affinity(0.8, 1.0, 0.8, 0.8, PARAMS))
    alpha = np.angle(directed)
    mag = abs(directed)
    assert raw.toarray()[0, 1] == pytest.approx(mag * math.cos(alpha), rel=1e-13)
    assert scaled.toarray()[0, 1] == pytest.approx(mag * math.cos(math.pi / 4), rel=1e-13)
    assert scaled.toarray()[0, 1].imag == 0.0
