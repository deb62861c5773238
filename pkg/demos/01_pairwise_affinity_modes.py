"""The generalized pairwise affinity and its three modes.

Each pixel pair gets a single complex number: magnitude = confidence,
angle = estimated relative figure/ground rotation. Sweeping the boundary
probability b and the figural probability f shows the three regimes:
binding (real axis), figure transition (+phi), ground transition (-phi),
with a low-confidence zone in between.
"""

import numpy as np

from aeseg import AffinityParams, pair_affinity, pair_energies

params = AffinityParams()
print(f"sigma_b={params.sigma_b}  sigma_fg={params.sigma_fg}  phi={params.phi:.4f}\n")

print("corner cases (e_p = e_q = 0):")
for b, f, label in [
    (0.0, 0.5, "same region        -> binding, angle 0"),
    (1.0, 1.0, "boundary, q front  -> figure,  angle +phi"),
    (1.0, 0.0, "boundary, q behind -> ground,  angle -phi"),
    (1.0, 0.5, "ambiguous boundary -> all forces weak"),
]:
    w = complex(pair_affinity(b, f, 0.0, 0.0, params))
    print(f"  b={b:.0f} f={f:.1f}  |W|={abs(w):7.4f}  arg(W)={np.angle(w):+.4f}   {label}")

print("\nerror probabilities behind the corners:")
for b, f in [(0.0, 0.5), (1.0, 1.0), (1.0, 0.0)]:
    eb, ef, eg = pair_energies(b, f, 0.0, 0.0)
    print(f"  b={b:.0f} f={f:.1f}  E_bind={eb:.2f}  E_fig={ef:.2f}  E_gnd={eg:.2f}")

# the configuration space varies smoothly; sample a coarse grid
print("\narg(W) over the (b, f) grid (rows: b = 0..1, cols: f = 0..1):")
bs = np.linspace(0, 1, 6)
fs = np.linspace(0, 1, 7)
for b in bs:
    row = [f"{np.angle(complex(pair_affinity(b, f, 0.0, 0.0, params))):+.2f}" for f in fs]
    print("  " + "  ".join(row))

# exchanging figure and ground conjugates the affinity
rng = np.random.default_rng(0)
b, f, ep, eq = rng.uniform(size=(4, 5))
w_fwd = pair_affinity(b, f, ep, eq, params)
w_rev = pair_affinity(b, 1 - f, ep, eq, params)
print("\nfigure/ground exchange conjugates W:")
print("  max |W(b,f) - conj(W(b,1-f))| =", float(np.abs(w_fwd - np.conj(w_rev)).max()))
