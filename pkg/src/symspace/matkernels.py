"""Dense symmetric-matrix kernels.

Everything here works on single ``(m, m)`` float64 arrays. Inputs are
symmetrized as ``(s + s.T) / 2`` before any decomposition so that small
asymmetries accumulated upstream (products like ``g @ x @ g.T``) are tolerated.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import DomainError, EigenSolverError, InvalidPointError, NotPositiveDefiniteError

SPD_EIG_FLOOR = 1e-12
CHOLESKY_PIVOT_FLOOR = 1e-14
ORTHOGONAL_TOL = 1e-10


def symmetrize(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    return 0.5 * (s + s.T)


def _check_square(s: np.ndarray) -> None:
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise InvalidPointError(f"expected a square matrix, got shape {s.shape}")


def as_sym(s) -> np.ndarray:
    """Return ``s`` as a float64 symmetric matrix."""
    s = np.asarray(s, dtype=np.float64)
    _check_square(s)
    return symmetrize(s)


def as_spd(x, jitter: bool = False) -> np.ndarray:
    """Validate an SPD matrix.

    Parameters
    ----------
    x : array_like, shape (m, m)
    jitter : bool
        Add ``1e-12 * I`` before the eigenvalue test. Meant for synthetic
        data generators only; library code never jitters silently.

    Raises
    ------
    NotPositiveDefiniteError
        If the smallest eigenvalue is not above ``1e-12``.
    """
    x = as_sym(x)
    if jitter:
        x = x + SPD_EIG_FLOOR * np.eye(x.shape[0])
    lam_min = np.linalg.eigvalsh(x)[0]
    if not lam_min > SPD_EIG_FLOOR:
        raise NotPositiveDefiniteError(
            f"smallest eigenvalue {lam_min:.3e} is not above {SPD_EIG_FLOOR:g}"
        )
    return x


def check_orthogonal(q, tol: float = ORTHOGONAL_TOL) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    _check_square(q)
    err = np.linalg.norm(q.T @ q - np.eye(q.shape[0]))
    if err > tol:
        raise InvalidPointError(f"matrix is not orthogonal: ||Q^T Q - I||_F = {err:.3e}")
    return q


def sym_eig(s) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns ``(u, lam)`` with ``u @ diag(lam) @ u.T == s`` and ``lam`` sorted
    non-increasing. Ties keep the solver's order, so diagonal inputs with
    repeated entries (the identity in particular) come back with ``u = I``.
    """
    s = as_sym(s)
    m = s.shape[0]
    if not np.all(np.isfinite(s)):
        raise EigenSolverError(f"non-finite entries in {m}x{m} matrix")
    if np.count_nonzero(s - np.diag(np.diagonal(s))) == 0:
        lam = np.diagonal(s).copy()
        u = np.eye(m)
    else:
        try:
            lam, u = np.linalg.eigh(s)
        except np.linalg.LinAlgError as exc:
            raise EigenSolverError(
                f"eigensolver did not converge (dimension {m}, Frobenius norm "
                f"{np.linalg.norm(s):.3e})"
            ) from exc
    order = np.argsort(-lam, kind="stable")
    return u[:, order], lam[order]


def spectral_apply(f: Callable[[np.ndarray], np.ndarray], s) -> np.ndarray:
    """Apply a scalar function to the spectrum: ``u @ diag(f(lam)) @ u.T``.

    ``f`` receives the whole eigenvalue vector. Any non-finite output is
    treated as ``f`` being undefined there.
    """
    u, lam = sym_eig(s)
    with np.errstate(all="ignore"):
        flam = np.asarray(f(lam), dtype=np.float64)
    bad = ~np.isfinite(flam)
    if bad.any():
        raise DomainError(
            f"{getattr(f, '__name__', 'function')} is undefined at eigenvalue {lam[bad][0]!r}"
        )
    return symmetrize((u * flam) @ u.T)


def _log_positive(lam):
    return np.where(lam > 0, np.log(np.where(lam > 0, lam, 1.0)), np.nan)


def sym_exp(s) -> np.ndarray:
    return spectral_apply(np.exp, s)


def spd_log(x) -> np.ndarray:
    return spectral_apply(_log_positive, x)


def spd_sqrt(x) -> np.ndarray:
    return spectral_apply(lambda lam: np.where(lam >= 0, np.sqrt(np.abs(lam)), np.nan), x)


def spd_invsqrt(x) -> np.ndarray:
    return spectral_apply(lambda lam: np.where(lam > 0, 1.0 / np.sqrt(np.abs(lam)), np.nan), x)


def spd_power(x, theta: float) -> np.ndarray:
    return spectral_apply(lambda lam: np.where(lam > 0, np.abs(lam) ** theta, np.nan), x)


def cholesky_lower(s) -> np.ndarray:
    """Lower Cholesky factor ``c`` with ``c @ c.T == s`` and positive diagonal.

    Raises
    ------
    NotPositiveDefiniteError
        If the factorization breaks down or a pivot ``c_ii**2`` is not above
        ``1e-14``.
    """
    s = as_sym(s)
    try:
        c = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("Cholesky factorization failed: matrix is not positive definite") from exc
    pivots = np.diagonal(c) ** 2
    if not np.all(pivots > CHOLESKY_PIVOT_FLOOR):
        i = int(np.argmin(pivots))
        raise NotPositiveDefiniteError(f"Cholesky pivot {i} is {pivots[i]:.3e} (<= {CHOLESKY_PIVOT_FLOOR:g})")
    return c


def frobenius_inner(a, b) -> float:
    return float(np.sum(np.asarray(a) * np.asarray(b)))
