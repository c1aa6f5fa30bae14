"""Dense symmetric linear algebra behind both SDP backends.

Two interchangeable kernel backends provide the primitives: a compiled
Cython extension (Householder tridiagonalization with implicit-shift QL
iteration, dense Cholesky) and a pure-Python fallback on numpy.  The
compiled backend is selected at import when available; set the environment
variable ``TEMPORA_KERNELS`` to ``python`` or ``compiled`` to override, or
call :func:`set_backend` at runtime (tests parametrize over both).
"""

from __future__ import annotations

import os
from contextlib import contextmanager

import numpy as np

from . import _pykernels

_BACKENDS = {"python": _pykernels}
try:
    from . import _ckernels  # type: ignore[attr-defined]

    _BACKENDS["compiled"] = _ckernels
except ImportError:
    _ckernels = None

_requested = os.environ.get("TEMPORA_KERNELS")
if _requested:
    if _requested not in _BACKENDS:
        raise ImportError(
            f"TEMPORA_KERNELS={_requested!r} but available backends are "
            f"{sorted(_BACKENDS)}"
        )
    _active = _requested
else:
    _active = "compiled" if "compiled" in _BACKENDS else "python"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; have {sorted(_BACKENDS)}")
    _active = name


@contextmanager
def use_backend(name: str):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def _kern():
    return _BACKENDS[_active]


def _check_sym(m) -> np.ndarray:
    a = np.ascontiguousarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix contains non-finite entries")
    scale = max(1.0, float(np.abs(a).max()) if a.size else 0.0)
    asym = float(np.abs(a - a.T).max()) if a.size else 0.0
    if asym > 1e-12 * scale:
        raise ValueError(f"matrix is not symmetric (asymmetry {asym:.3e})")
    return (a + a.T) / 2.0


def sym_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a symmetric matrix.

    Returns eigenvalues in ascending order and the matching orthonormal
    eigenvectors as columns.
    """
    a = _check_sym(m)
    w, v = _kern().eigh_sym(a)
    return np.asarray(w, dtype=float), np.asarray(v, dtype=float)


def psd_project(m) -> np.ndarray:
    """Nearest (Frobenius) positive semidefinite matrix: clip eigenvalues."""
    a = _check_sym(m)
    w, v = _kern().eigh_sym(a)
    w = np.maximum(w, 0.0)
    out = (v * w) @ v.T
    return (out + out.T) / 2.0


def sqrt_psd(m, rank_tol: float = 1e-12) -> np.ndarray:
    """Factor F with F^T F = m, shaped (rank, n).

    Eigenvalues above ``rank_tol`` times the largest one count towards the
    numerical rank; small negatives are clipped, but an eigenvalue below
    ``-1e-6`` times the largest signals a genuinely indefinite input and
    raises.
    """
    a = _check_sym(m)
    w, v = _kern().eigh_sym(a)
    top = float(w[-1]) if w.size else 0.0
    if top <= 0.0:
        return np.zeros((0, a.shape[0]))
    if float(w[0]) < -1e-6 * top:
        raise ValueError(f"matrix is not PSD (min eigenvalue {w[0]:.3e})")
    keep = w > rank_tol * top
    return (np.sqrt(w[keep])[:, None]) * v[:, keep].T


def solve_linear(a, b) -> np.ndarray:
    """Solve a x = b for symmetric positive definite a.

    Raises ``ValueError`` when the matrix is singular or indefinite.
    """
    a = _check_sym(a)
    rhs = np.ascontiguousarray(b, dtype=float)
    if rhs.shape[0] != a.shape[0]:
        raise ValueError("right-hand side length does not match the matrix")
    try:
        return np.asarray(_kern().chol_solve(a, rhs), dtype=float)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"linear solve failed: {exc}") from exc


def class_project(flat, ids, counts, pins) -> np.ndarray:
    """Class-averaging projection used by the splitting solver."""
    return np.asarray(
        _kern().class_project(
            np.ascontiguousarray(flat, dtype=float),
            np.ascontiguousarray(ids, dtype=np.int32),
            np.ascontiguousarray(counts, dtype=float),
            np.ascontiguousarray(pins, dtype=float),
        ),
        dtype=float,
    )
