"""SPD matrices under pullback-Euclidean metrics.

A metric is fixed by a diffeomorphism ``phi`` from SPD matrices onto (a
subset of) symmetric matrices; distances, the group law and Busemann
functions are all Euclidean in ``phi``-coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, InvalidPointError
from .matkernels import (
    as_spd,
    as_sym,
    frobenius_inner,
    spd_log,
    spd_power,
    spectral_apply,
    sym_eig,
    sym_exp,
    symmetrize,
)


@dataclass(frozen=True)
class PhiMap:
    phi: Callable[[np.ndarray], np.ndarray]
    phi_inv: Callable[[np.ndarray], np.ndarray]
    label: str


LOG_EUCLIDEAN = PhiMap(spd_log, sym_exp, "log_euclidean")


def power_phi(theta: float) -> PhiMap:
    """Power deformation ``phi(x) = (x^theta - I) / theta``, ``theta`` in (0, 1].

    Its image is ``{s : I + theta s > 0}``, so ``phi_inv`` (and with it the
    group law) raises :class:`~symspace.errors.DomainError` outside that set.
    Tends to the matrix logarithm as ``theta -> 0``.
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0, 1], got {theta}")

    def phi(x):
        return (spd_power(x, theta) - np.eye(len(x))) / theta

    def inv_power(lam):
        base = 1.0 + theta * lam
        return np.where(base > 0, np.abs(base) ** (1.0 / theta), np.nan)

    def phi_inv(s):
        return spectral_apply(inv_power, s)

    return PhiMap(phi, phi_inv, f"power({theta:g})")


def pem_oplus(phi: PhiMap, x, y) -> np.ndarray:
    return phi.phi_inv(phi.phi(x) + phi.phi(y))


def pem_ominus(phi: PhiMap, x) -> np.ndarray:
    return phi.phi_inv(-phi.phi(x))


def pem_inner(phi: PhiMap, x, y) -> float:
    return frobenius_inner(phi.phi(x), phi.phi(y))


def pem_norm(phi: PhiMap, x) -> float:
    return float(np.linalg.norm(phi.phi(x)))


def pem_dist(phi: PhiMap, x, y) -> float:
    return float(np.linalg.norm(phi.phi(x) - phi.phi(y)))


def _unit_sym(a) -> np.ndarray:
    a = as_sym(a)
    norm = np.linalg.norm(a)
    if not norm > 0:
        raise InvalidPointError("direction must be a nonzero symmetric matrix")
    return a / norm


def busemann_pem(phi: PhiMap, a, x) -> float:
    """Busemann function ``-<a, phi(x)>`` of the line ``phi_inv(t a)``; ``|a|_F = 1``."""
    a = as_sym(a)
    if abs(np.linalg.norm(a) - 1.0) > 1e-12:
        raise InvalidPointError(f"direction must have unit Frobenius norm, got {np.linalg.norm(a)!r}")
    return -frobenius_inner(a, phi.phi(x))


@dataclass(frozen=True)
class PemHyperplane:
    """Hyperplane through ``p`` normal to the boundary point of ``phi_inv(t a)``.

    ``a`` is normalized to unit Frobenius norm on construction.
    """

    a: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _unit_sym(self.a))
        object.__setattr__(self, "p", as_spd(self.p))


def b_distance_pem(phi: PhiMap, hp: PemHyperplane, x) -> float:
    """Signed point-to-hyperplane distance ``<a, phi(p) - phi(x)>``."""
    diff = phi.phi(hp.p) - phi.phi(x)
    if not np.any(diff):
        return 0.0
    return frobenius_inner(hp.a, diff)


def b_distance_pem_definition(phi: PhiMap, hp: PemHyperplane, x) -> float:
    """``d(x,p) B(⊖p ⊕ x) / |⊖p ⊕ x|``, each factor through its own operation."""
    y = pem_oplus(phi, pem_ominus(phi, hp.p), x)
    norm = pem_norm(phi, y)
    if norm == 0.0:
        return 0.0
    return pem_dist(phi, x, hp.p) * busemann_pem(phi, hp.a, y) / norm


# ---------------------------------------------------------------------------
# Log-Euclidean Riemannian operations


def _divided_differences(lam: np.ndarray, kind: str) -> np.ndarray:
    li = lam[:, None]
    lj = lam[None, :]
    diff = li - lj
    close = np.abs(diff) <= 1e-12 * np.maximum(np.abs(li), np.abs(lj))
    safe = np.where(close, 1.0, diff)
    if kind == "exp":
        dd = np.exp(lj) * np.expm1(diff) / safe
        return np.where(close, np.exp(0.5 * (li + lj)), dd)
    dd = np.log1p(diff / lj) / safe
    return np.where(close, 2.0 / (li + lj), dd)


def _frechet(s, e, kind: str) -> np.ndarray:
    u, lam = sym_eig(s)
    inner = u.T @ as_sym(e) @ u
    return symmetrize(u @ (_divided_differences(lam, kind) * inner) @ u.T)


def dlog(x, u) -> np.ndarray:
    """Differential of the matrix logarithm at ``x`` applied to ``u``."""
    return _frechet(x, u, "log")


def dexp(s, e) -> np.ndarray:
    """Differential of the matrix exponential at symmetric ``s`` applied to ``e``."""
    return _frechet(s, e, "exp")


def le_metric(x, u, v) -> float:
    return frobenius_inner(dlog(x, u), dlog(x, v))


def le_exp(x, u) -> np.ndarray:
    return sym_exp(spd_log(x) + dlog(x, u))


def le_log(x, y) -> np.ndarray:
    lx = spd_log(x)
    return dexp(lx, spd_log(y) - lx)


def le_transport(x, y, u) -> np.ndarray:
    return dexp(spd_log(y), dlog(x, u))


# ---------------------------------------------------------------------------
# Log-Euclidean FC layer and weighted Frechet mean


def upper_pairs(m: int) -> list[tuple[int, int]]:
    """Index pairs ``(l, j)`` with ``l <= j``, row-major."""
    rows, cols = np.triu_indices(m)
    return list(zip(rows.tolist(), cols.tolist()))


@dataclass(frozen=True)
class FcLayerLe:
    """Log-Euclidean FC layer ``Sym+_{m_in} -> Sym+_{m_out}``.

    ``p`` and ``a`` hold one SPD matrix per output pair ``(l, j)``, ``l <= j``,
    in :func:`upper_pairs` order: shape ``(m_out (m_out + 1) / 2, m_in, m_in)``.
    """

    p: np.ndarray
    a: np.ndarray
    m_out: int
    log_p: np.ndarray = field(init=False, repr=False)
    log_a: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        a = np.asarray(self.a, dtype=np.float64)
        n_pairs = self.m_out * (self.m_out + 1) // 2
        if p.shape != a.shape or p.ndim != 3 or p.shape[0] != n_pairs or p.shape[1] != p.shape[2]:
            raise DimensionError(
                f"expected p and a of shape ({n_pairs}, m_in, m_in), got {p.shape} and {a.shape}"
            )
        object.__setattr__(self, "p", np.stack([as_spd(q) for q in p]))
        object.__setattr__(self, "a", np.stack([as_spd(q) for q in a]))
        object.__setattr__(self, "log_p", np.stack([spd_log(q) for q in self.p]))
        object.__setattr__(self, "log_a", np.stack([spd_log(q) for q in self.a]))

    @property
    def m_in(self) -> int:
        return self.p.shape[1]

    @classmethod
    def from_logs(cls, log_p, log_a, m_out: int) -> "FcLayerLe":
        """Build from symmetric log-parameters (the unconstrained parameterization)."""
        return cls(np.stack([sym_exp(s) for s in log_p]), np.stack([sym_exp(s) for s in log_a]), m_out)


def fc_le_responses(layer: FcLayerLe, x) -> np.ndarray:
    """``v_(l,j) = <⊖p ⊕ x, a>^le = <log x - log p, log a>`` for every pair."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (layer.m_in, layer.m_in):
        raise DimensionError(f"layer expects {layer.m_in}x{layer.m_in} input, got {x.shape}")
    diff = spd_log(x)[None] - layer.log_p
    return np.einsum("kij,kij->k", diff, layer.log_a)


def assemble_sym(v, m: int) -> np.ndarray:
    """Symmetric matrix with diagonal ``v_(l,l)`` and off-diagonal ``v_(l,j) / sqrt 2``."""
    z = np.zeros((m, m))
    for (l, j), val in zip(upper_pairs(m), v):
        if l == j:
            z[l, l] = val
        else:
            z[l, j] = z[j, l] = val / np.sqrt(2.0)
    return z


def sym_basis(m: int) -> list[np.ndarray]:
    """Orthonormal basis of symmetric matrices matching :func:`assemble_sym`."""
    out = []
    for l, j in upper_pairs(m):
        e = np.zeros((m, m))
        if l == j:
            e[l, l] = 1.0
        else:
            e[l, j] = e[j, l] = 1.0 / np.sqrt(2.0)
        out.append(e)
    return out


def fc_layer_le_forward(layer: FcLayerLe, x) -> np.ndarray:
    return sym_exp(assemble_sym(fc_le_responses(layer, x), layer.m_out))


def wfm_le(points: Sequence[np.ndarray], weights) -> np.ndarray:
    """Log-Euclidean weighted Frechet mean ``exp(sum_j w_j log x_j)``."""
    w = np.asarray(weights, dtype=np.float64)
    if len(points) == 0 or len(points) != len(w):
        raise ValueError("need one positive weight per point and at least one point")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    if abs(w.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights must sum to 1 (got {w.sum()!r})")
    acc = sum(wj * spd_log(xj) for wj, xj in zip(w, points))
    return sym_exp(acc)
