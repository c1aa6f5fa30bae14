"""Pure-Python kernel backend, delegating the dense linear algebra to numpy.

Mirrors the call surface of the compiled extension (`_ckernels`): symmetric
eigendecomposition, symmetric positive-definite solves and the flattened
class-averaging projection used by the splitting solver.
"""

import numpy as np

NAME = "python"


def eigh_sym(a):
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns)."""
    return np.linalg.eigh(a)


def chol_solve(a, b):
    """Solve a x = b for symmetric positive definite a.

    The Cholesky factorization doubles as the definiteness check; the
    actual solve goes through LAPACK's general driver.
    """
    np.linalg.cholesky(a)  # raises LinAlgError when not positive definite
    return np.linalg.solve(a, b)


def class_project(flat, ids, counts, pins):
    """Replace each entry by its class mean, or by the pinned class value.

    ``flat`` is a flattened symmetric matrix, ``ids`` the class id per
    entry, ``counts`` the entry count per class and ``pins`` the per-class
    pinned value with NaN marking free classes.
    """
    sums = np.bincount(ids, weights=flat, minlength=counts.size)
    means = sums / np.maximum(counts, 1.0)
    pinned = ~np.isnan(pins)
    means[pinned] = pins[pinned]
    return means[ids]
