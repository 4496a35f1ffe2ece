"""Polarization operators for a spin-1 qudit, and how they transform.

Run: python3 demos/01_polarization_operators.py
"""
import numpy as np

from spintomo.polarization import (
    basis_indices,
    expand_in_basis,
    gamma_table,
    polarization_operator,
    reconstruct_from_coeffs,
    rotate_polarization,
    rotation_operator,
)

np.set_printoptions(precision=4, suppress=True)
d = 3

# %% The basis: d^2 operators T_lm, orthonormal under the trace inner product.
for ell, m in basis_indices(d):
    T = polarization_operator(d, (ell, m))
    print(f"T_{ell},{m:+d} nonzero entries: {np.count_nonzero(np.abs(T) > 1e-14)}")

ops = np.array([polarization_operator(d, idx) for idx in basis_indices(d)])
gram = np.einsum("aij,bij->ab", ops.conj(), ops)
print("Gram matrix is identity:", np.allclose(gram, np.eye(d * d)))

# %% A rotation only mixes orders within a degree.
omega = (0.4, 1.1, -0.7)
coeffs = rotate_polarization(d, (2, 1), omega)
print("rotated T_2,+1 in the unrotated degree-2 basis:", coeffs.blocks[2])
R = rotation_operator(d, *omega)
direct = R @ polarization_operator(d, (2, 1)) @ R.conj().T
print("matches direct conjugation:", np.allclose(reconstruct_from_coeffs(coeffs), direct))

# %% Any state expands in the basis; the degree-0 part is fixed by the trace.
rho = np.diag([0.5, 0.3, 0.2]).astype(complex)
c = expand_in_basis(rho)
print("rho_00 =", c[(0, 0)].real, "= 1/sqrt(d):", np.isclose(c[(0, 0)], 1 / np.sqrt(d)))

# %% Half spectral ranges Gamma_l of T_l0 set the worst-case shot noise per degree.
print("Gamma_l:", gamma_table(d).gamma)
