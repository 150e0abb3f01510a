"""Check the norm baselines on the triangular kernel, whose operator norm is 2/pi."""
import numpy as np

from schurnorm import KernelParams, l2_kbar_closed, matrix_norm, nystrom_norm, truncation_kbar_analytic
from schurnorm.kernel import kernel_kbar_abs, sample_sides
from schurnorm.quadrature import make_grid

tri = KernelParams(0.0, 0.0)
print(f"2/pi                  {2 / np.pi:.6f}")
for m in (51, 101, 251):
    g = make_grid(1.0, m)
    kabs = sample_sides(kernel_kbar_abs, tri, g, g).modulus
    print(f"Nystrom m={m:<4}       {nystrom_norm(kabs, g, g):.6f}")
for n in (10, 50, 200):
    print(f"Galerkin N={n:<4}      {matrix_norm(truncation_kbar_analytic(tri, n)):.6f}")
print(f"L2 norm (closed form) {l2_kbar_closed(tri):.6f}")
