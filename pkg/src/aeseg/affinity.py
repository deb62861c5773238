"""Complex-valued pairwise affinities from relation maps.

Each pixel pair feels three forces: a binding force along the positive
real axis and figure/ground displacement forces at angles +/-phi. The
probability of each force being *wrong* is converted to a confidence by
exponential reweighting, and the three complex components sum to a single
generalized affinity whose magnitude is confidence and whose angle is the
estimated relative figure/ground rotation.

The assembled matrix is Hermitian by construction and comes paired with
the diagonal degree vector d(p) = sum_q |W(p, q)|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .stencil import RelationMap, boundary_prob, pair_slices


@dataclass(frozen=True)
class AffinityParams:
    """Scales of the three forces and the rotation angle.

    sigma_b and sigma_fg control how fast confidence decays with error for
    the binding and figure/ground terms. phi is the angular displacement
    of a confident figure/ground transition. With the defaults the three
    affinity modes (bind, figure, ground) are well separated: confidence
    drops below 1e-4 once the matching error exceeds ~sigma * ln(1e4).
    """

    sigma_b: float = 0.1
    sigma_fg: float = 0.05
    phi: float = math.pi / 4
    wedge_rescale: bool = True

    def __post_init__(self):
        if self.sigma_b <= 0 or self.sigma_fg <= 0:
            raise ValueError("sigma_b and sigma_fg must be positive")
        if not 0 < self.phi <= math.pi / 2:
            raise ValueError("phi must lie in (0, pi/2]")


def pair_energies(b, f, e_p, e_q):
    """Error probabilities (E_B, E_F, E_G) of binding / figure / ground.

    b is the probability that a boundary separates the pair, f the
    conditional figural probability, e_p and e_q the per-pixel boundary
    probabilities. The chance that the pair straddles a clean boundary
    (neither endpoint on it) is (1 - e_p) * b * (1 - e_q); figure and
    ground transitions are erroneous exactly when that event fails in
    their direction.
    """
    clean = (1.0 - e_p) * b * (1.0 - e_q)
    e_bind = b
    e_fig = 1.0 - clean * f
    e_gnd = 1.0 - clean * (1.0 - f)
    return e_bind, e_fig, e_gnd


def pair_affinity(b, f, e_p, e_q, params: AffinityParams):
    """Generalized affinity W(p, q) = C_B + C_F e^{i phi} + C_G e^{-i phi}.

    Confidences are C_X = exp(-E_X / sigma_X). Accepts scalars or
    broadcastable arrays. Swapping f for 1 - f conjugates the result.
    """
    e_bind, e_fig, e_gnd = pair_energies(b, f, e_p, e_q)
    c_bind = np.exp(-np.asarray(e_bind) / params.sigma_b)
    c_fig = np.exp(-np.asarray(e_fig) / params.sigma_fg)
    c_gnd = np.exp(-np.asarray(e_gnd) / params.sigma_fg)
    rot = complex(math.cos(params.phi), math.sin(params.phi))
    return c_bind + c_fig * rot + c_gnd * np.conj(rot)


def rescale_theta(w: sp.csr_array) -> sp.csr_array:
    """Rescale all entry angles so the total angular mass is pi/2.

    Decomposes each entry into magnitude and angle, multiplies every angle
    by (pi/2) / sum(|angles|) and recomposes. Keeps the solution of the
    downstream embedding inside a half-circle wedge, preventing circular
    wrap-around. Magnitudes and angle signs are preserved. A matrix with
    no angular mass (all-real) is returned unchanged.
    """
    theta = np.angle(w.data)
    total = np.abs(theta).sum()
    if total == 0.0:
        return w
    scale = (math.pi / 2) / total
    out = w.copy()
    out.data = np.abs(w.data) * np.exp(1j * theta * scale)
    return out


def degree_vector(w: sp.csr_array) -> np.ndarray:
    """d(p) = sum_q |W(p, q)|, the confidence mass incident on each pixel."""
    return np.asarray(abs(w).sum(axis=1)).ravel()


def finalize_affinity(directed: sp.csr_array, wedge_rescale: bool = True):
    """Shared tail of affinity assembly: rescale, symmetrize, degrees.

    Applies the angular wedge rescaling (before symmetrization, so the
    total angular budget is measured on the raw directed estimates), then
    enforces W <- (W + W*) / 2. Entry sums commute exactly in floating
    point, so the result is Hermitian to the last bit.
    """
    if wedge_rescale:
        directed = rescale_theta(directed)
    w = ((directed + directed.conj().T) * 0.5).tocsr()
    w.sort_indices()
    return w, degree_vector(w)


def assemble(rel: RelationMap, params: AffinityParams):
    """Build the sparse affinity matrix W and degree vector d from relations.

    Emits one complex entry per ordered in-grid stencil pair, applies the
    angular wedge rescaling when enabled, then enforces Hermitian symmetry
    via W <- (W + W*) / 2. The degree vector is computed from the final
    symmetrized matrix.

    Returns (W, d) with W in CSR form.
    """
    domain = rel.domain
    n = domain.n
    if n < 1:
        raise ValueError("empty domain")

    e = boundary_prob(rel)
    pix = np.arange(n).reshape(domain.shape)

    rows, cols, vals = [], [], []
    for k, off in enumerate(rel.stencil.offsets):
        p_sl, q_sl = pair_slices(domain, off)
        w = pair_affinity(rel.b[k][p_sl], rel.f[k][p_sl], e[p_sl], e[q_sl], params)
        rows.append(pix[p_sl].ravel())
        cols.append(pix[q_sl].ravel())
        vals.append(np.asarray(w, dtype=np.complex128).ravel())

    directed = sp.csr_array(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    return finalize_affinity(directed, params.wedge_rescale)
