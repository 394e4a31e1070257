"""
Directional Hilbert transforms as Fourier multipliers
=====================================================

A plane wave is an eigenfunction of every directional Hilbert transform: the
eigenvalue is ``+i`` when the wave's frequency lies in the closed half-plane of
the direction and ``-i`` otherwise.  We check that, then compare the multiplier
with an independent principal-value quadrature on a band-limited field.
"""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from sector_hilbert import Direction, directional_hilbert, lp_norm, make_grid, pv_quadrature_hilbert
from sector_hilbert.selftest import band_limited_field

grid = make_grid(128)
X, Y = grid.mesh

###############################################################################
# Eigenrelation on a few plane waves.

for (p, q), theta in [((3, 1), 0.3), ((-2, 5), 1.0), ((4, -4), math.pi / 4)]:
    u = Direction(theta)
    wave = grid.field(np.exp(1j * (p * X + q * Y)))
    ratio = directional_hilbert(wave, u).values[0, 0] / wave.values[0, 0]
    print(f"frequency ({p:+d}, {q:+d}), direction {theta:.3f}: eigenvalue {ratio:.3f}")

###############################################################################
# Quadrature oracle.  The truncated principal-value integral converges like
# ``1 / (|<k, u>| T)``, so the comparison field keeps its spectrum away from
# the critical line of ``u``.

rng = np.random.default_rng(0)
u = Direction(0.7)
f = band_limited_field(rng, grid, u, band=16)
multiplier = directional_hilbert(f, u)
for T in (16 * math.pi, 64 * math.pi, 256 * math.pi):
    oracle = pv_quadrature_hilbert(f, u, T, math.pi / 64)
    err = lp_norm(multiplier - oracle, 2) / lp_norm(multiplier, 2)
    print(f"truncation {T / math.pi:5.0f} pi: relative L2 difference {err:.2e}")

fig, axes = plt.subplots(1, 2, figsize=(9, 4))
for ax, field, title in zip(axes, (f.real, multiplier.real), ("Re f", "Re H_u f")):
    im = ax.imshow(field.values.T, origin="lower", extent=(-math.pi, math.pi) * 2)
    ax.set_title(title)
    fig.colorbar(im, ax=ax)
fig.tight_layout()
fig.savefig("multipliers.png")
print("wrote multipliers.png")
