"""SPD matrices as the symmetric space GL_m / O_m with a G-invariant metric.

A point ``x`` is the coset ``gK`` with ``x = g g^T``. The canonical
representative is ``g = u s^{1/2}`` from the sorted eigendecomposition of
``x``; every quantity exported here is independent of that choice.

Distances use ``d(x, y) = |mu(g^{-1} h)|`` where ``mu`` is the vector of log
singular values. Because ``gK -> g g^T`` doubles exponents, this is half the
usual affine-invariant distance ``|log(x^{-1/2} y x^{-1/2})|_F``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np
from scipy.linalg import expm, solve_triangular

from .errors import DimensionError, InvalidPointError, SingularMatrixError
from .matkernels import (
    ORTHOGONAL_TOL,
    as_spd,
    check_orthogonal,
    cholesky_lower,
    sym_eig,
    symmetrize,
)

DET_FLOOR = 1e-12
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class CosetRep:
    """Invertible matrix ``g`` standing for the SPD point ``g g^T``."""

    g: np.ndarray
    g_inv: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        g = np.asarray(self.g, dtype=np.float64)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimensionError(f"coset representative must be square, got shape {g.shape}")
        det = np.linalg.det(g)
        if not abs(det) > DET_FLOOR:
            raise SingularMatrixError(f"|det g| = {abs(det):.3e} is not above {DET_FLOOR:g}")
        object.__setattr__(self, "g", g)
        if self.g_inv is None:
            object.__setattr__(self, "g_inv", np.linalg.inv(g))

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    def inverse(self) -> "CosetRep":
        return CosetRep(self.g_inv, self.g)

    def __matmul__(self, other: "CosetRep") -> "CosetRep":
        return CosetRep(self.g @ other.g, other.g_inv @ self.g_inv)


PointLike = Union[np.ndarray, CosetRep]


def coset_rep(x) -> CosetRep:
    """Canonical representative ``u diag(sqrt(lam))`` of an SPD matrix."""
    x = as_spd(x)
    u, lam = sym_eig(x)
    root = np.sqrt(lam)
    return CosetRep(u * root, (u / root).T)


def _rep(x: PointLike) -> CosetRep:
    return x if isinstance(x, CosetRep) else coset_rep(x)


def spd_point(g: PointLike) -> np.ndarray:
    if not isinstance(g, CosetRep):
        g = CosetRep(g)
    return symmetrize(g.g @ g.g.T)


def act(g: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Group action ``g[x] = g x g^T``."""
    return symmetrize(g @ x @ g.T)


def gi_oplus(x: PointLike, y: PointLike) -> np.ndarray:
    """``x ⊕ y = spd_point(g h) = g y g^T`` with ``g``, ``h`` representatives of ``x``, ``y``.

    Either argument may be given as a :class:`CosetRep`, in which case that
    representative is used instead of the canonical one.
    """
    g = _rep(x)
    if isinstance(y, CosetRep):
        return spd_point(g @ y)
    return act(g.g, as_spd(y))


def gi_ominus(x: PointLike, rep: bool = False):
    """``⊖x = spd_point(g^{-1})``.

    With ``rep=True`` the representative ``g^{-1}`` itself is returned. The
    group law is only associative at the level of representatives, so
    ``gi_oplus(gi_ominus(x, rep=True), x)`` is the identity while the
    SPD-level composition in general is not.
    """
    inv = _rep(x).inverse()
    return inv if rep else spd_point(inv)


def gi_ominus_oplus(p: PointLike, x: PointLike) -> np.ndarray:
    """``⊖p ⊕ x`` computed as ``spd_point(h^{-1} g)``."""
    return spd_point(_rep(p).inverse() @ _rep(x))


class CartanDecomposition(NamedTuple):
    k_left: np.ndarray
    mu: np.ndarray
    k_right: np.ndarray


def cartan_decompose(g: PointLike) -> CartanDecomposition:
    """``g = k_left @ diag(exp(mu)) @ k_right`` with ``mu`` non-increasing."""
    g = g if isinstance(g, CosetRep) else CosetRep(g)
    u, sv, vt = np.linalg.svd(g.g)
    return CartanDecomposition(u, np.log(sv), vt)


def cartan_mu(g: PointLike) -> np.ndarray:
    """Sorted (non-increasing) log singular values of ``g``."""
    g = g if isinstance(g, CosetRep) else CosetRep(g)
    return np.log(np.linalg.svd(g.g, compute_uv=False))


def gi_inner(x, y) -> float:
    return float(cartan_mu(coset_rep(x).g) @ cartan_mu(coset_rep(y).g))


def gi_norm(x) -> float:
    """Distance to the identity: ``|mu(coset_rep(x))|``, i.e. ``|log x|_F / 2``."""
    _, lam = sym_eig(as_spd(x))
    return float(0.5 * np.linalg.norm(np.log(lam)))


def gi_dist(x: PointLike, y: PointLike) -> float:
    g = _rep(x)
    h = _rep(y)
    return float(np.linalg.norm(cartan_mu(g.g_inv @ h.g)))


def affine_invariant_dist(x, y) -> float:
    """``|log(x^{-1/2} y x^{-1/2})|_F`` (trace-metric normalization)."""
    g = coset_rep(x)
    w = act(g.g_inv, as_spd(y))
    _, lam = sym_eig(w)
    return float(np.linalg.norm(np.log(lam)))


# ---------------------------------------------------------------------------
# Iwasawa decomposition g = k exp(diag H) n


class Iwasawa(NamedTuple):
    H: np.ndarray
    n: np.ndarray
    k: np.ndarray


def _refined_cholesky(g: np.ndarray) -> np.ndarray:
    # Cholesky of g^T g, refined once (CholeskyQR2) so the factor is as
    # accurate as a QR of g rather than squaring its condition number.
    c1 = cholesky_lower(g.T @ g)
    q1 = solve_triangular(c1, g.T, lower=True).T
    c2 = cholesky_lower(q1.T @ q1)
    return c1 @ c2


def iwasawa_H(g: PointLike) -> Iwasawa:
    """Iwasawa decomposition ``g = k @ diag(exp(H)) @ n``.

    ``n`` is unit upper triangular and ``k`` orthogonal. The factors come from
    the lower Cholesky factor ``c`` of ``g^T g``: ``exp(H) = diag(c)`` and
    ``n = (c / diag(c))^T``.
    """
    g = g if isinstance(g, CosetRep) else CosetRep(g)
    c = _refined_cholesky(g.g)
    diag = np.diagonal(c).copy()
    n = (c / diag[None, :]).T
    n_inv = solve_triangular(n, np.eye(len(diag)), lower=False, unit_diagonal=True)
    k = (g.g @ n_inv) / diag[None, :]
    return Iwasawa(np.log(diag), n, k)


# ---------------------------------------------------------------------------
# Busemann functions and hyperplanes


def _unit_vector(a, name: str = "a") -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1:
        raise DimensionError(f"{name} must be a vector, got shape {a.shape}")
    if abs(np.linalg.norm(a) - 1.0) > UNIT_TOL:
        raise InvalidPointError(f"{name} must have unit norm, got {np.linalg.norm(a)!r}")
    return a


@dataclass(frozen=True)
class WeylDirection:
    """Unit vector ``a``; the ray ``exp(t diag a) K`` is the SPD curve ``exp(2t diag a)``."""

    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _unit_vector(self.a))

    @classmethod
    def normalized(cls, a) -> "WeylDirection":
        a = np.asarray(a, dtype=np.float64)
        norm = np.linalg.norm(a)
        if not norm > 0:
            raise InvalidPointError("direction must be nonzero")
        return cls(a / norm)


def _direction(a) -> np.ndarray:
    return a.a if isinstance(a, WeylDirection) else _unit_vector(a)


def chamber_form(k, a) -> tuple[np.ndarray, np.ndarray]:
    """Rewrite the ray ``k exp(t diag a) K`` with ``a`` sorted non-increasing.

    Permuting coordinates of ``a`` and the columns of ``k`` together leaves
    the ray unchanged. The Busemann closed form :func:`busemann_gi` describes
    the ray's Busemann function when ``a`` is in this chamber form; for
    other orderings it is a different (still well-defined) functional.
    """
    a = _direction(a)
    order = np.argsort(-a, kind="stable")
    k = np.eye(len(a)) if k is None else np.asarray(k, dtype=np.float64)
    return k[:, order], a[order]


def ray_point(k, a, t: float) -> np.ndarray:
    """SPD point of the ray ``k exp(t diag a) K`` at parameter ``t``."""
    a = _direction(a)
    k = np.eye(len(a)) if k is None else np.asarray(k, dtype=np.float64)
    return act(k, np.diag(np.exp(2.0 * t * a)))


def busemann_gi(k, a, x) -> float:
    """``<a, H(g^{-1})>`` where ``g`` represents ``k^T x k``.

    ``k`` may be ``None`` for the identity.
    """
    a = _direction(a)
    x = as_spd(x)
    if k is not None:
        k = check_orthogonal(k, ORTHOGONAL_TOL)
        x = act(k.T, x)
    if x.shape[0] != len(a):
        raise DimensionError(f"direction has dimension {len(a)}, point is {x.shape[0]}x{x.shape[0]}")
    return float(a @ iwasawa_H(coset_rep(x).g_inv).H)


@dataclass(frozen=True)
class GiHyperplane:
    a: np.ndarray
    p: np.ndarray
    k: np.ndarray = None

    def __post_init__(self):
        a = _direction(self.a)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "p", as_spd(self.p))
        k = np.eye(len(a)) if self.k is None else check_orthogonal(self.k, ORTHOGONAL_TOL)
        object.__setattr__(self, "k", k)
        if self.p.shape[0] != len(a) or k.shape[0] != len(a):
            raise DimensionError("a, p and k must share the dimension m")


def b_distance_gi(hp: GiHyperplane, x) -> float:
    """Signed distance ``<a, H(g^{-1} h k)>`` from ``x`` to the hyperplane."""
    x = as_spd(x)
    if np.array_equal(x, hp.p):
        return 0.0
    g = coset_rep(x)
    h = coset_rep(hp.p)
    return float(hp.a @ iwasawa_H(g.g_inv @ h.g @ hp.k).H)


def b_distance_gi_definition(hp: GiHyperplane, x) -> float:
    """``d(x,p) B(⊖p ⊕ x) / |⊖p ⊕ x|`` evaluated factor by factor."""
    x = as_spd(x)
    y = gi_ominus_oplus(hp.p, x)
    norm = gi_norm(y)
    if norm == 0.0:
        return 0.0
    return gi_dist(x, hp.p) * busemann_gi(hp.k, hp.a, y) / norm


# ---------------------------------------------------------------------------
# FC layer


def orthogonal_from_skew(w) -> np.ndarray:
    """Orthogonal matrix ``expm(w - w^T)``."""
    w = np.asarray(w, dtype=np.float64)
    return expm(w - w.T)


def _check_unit_upper(n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=np.float64)
    if n.ndim != 2 or n.shape[0] != n.shape[1]:
        raise DimensionError(f"n must be square, got shape {n.shape}")
    if np.any(np.tril(n, -1)) or np.any(np.diagonal(n) != 1.0):
        raise InvalidPointError("n must be unit upper triangular")
    return n


@dataclass(frozen=True)
class FcLayerGi:
    """FC layer ``Sym+_{m_in} -> Sym+_{m_out}`` built from one hyperplane per output axis.

    Shapes: ``k`` ``(m_out, m_in, m_in)``, ``a`` ``(m_out, m_in)``,
    ``p`` ``(m_out, m_in, m_in)``, ``n`` ``(m_out, m_out)``.
    """

    a: np.ndarray
    p: np.ndarray
    n: np.ndarray
    k: np.ndarray = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        p = np.asarray(self.p, dtype=np.float64)
        if a.ndim != 2 or p.shape != (a.shape[0], a.shape[1], a.shape[1]):
            raise DimensionError(f"inconsistent shapes a {a.shape}, p {p.shape}")
        m_out, m_in = a.shape
        for row in a:
            _unit_vector(row)
        n = _check_unit_upper(self.n)
        if n.shape[0] != m_out:
            raise DimensionError(f"n must be {m_out}x{m_out}, got {n.shape}")
        if self.k is None:
            k = np.broadcast_to(np.eye(m_in), (m_out, m_in, m_in)).copy()
        else:
            k = np.asarray(self.k, dtype=np.float64)
            if k.shape != (m_out, m_in, m_in):
                raise DimensionError(f"k must have shape {(m_out, m_in, m_in)}, got {k.shape}")
            for kj in k:
                check_orthogonal(kj, ORTHOGONAL_TOL)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "p", np.stack([as_spd(q) for q in p]))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)

    @property
    def m_in(self) -> int:
        return self.a.shape[1]

    @property
    def m_out(self) -> int:
        return self.a.shape[0]

    @classmethod
    def random(cls, m_in: int, m_out: int, rng: np.random.Generator, learn_k: bool = False,
               scale: float = 0.5) -> "FcLayerGi":
        a = rng.standard_normal((m_out, m_in))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        p = []
        for _ in range(m_out):
            s = scale * rng.standard_normal((m_in, m_in))
            p.append(expm(s + s.T))
        n = np.eye(m_out) + np.triu(scale * rng.standard_normal((m_out, m_out)), 1)
        k = None
        if learn_k:
            k = np.stack([orthogonal_from_skew(rng.standard_normal((m_in, m_in))) for _ in range(m_out)])
        return cls(a, np.stack(p), n, k)


def fc_gi_responses(layer: FcLayerGi, x) -> np.ndarray:
    """Per-axis responses ``v_j = B_j(⊖p_j ⊕ x) = <a_j, H(g^{-1} h_j k_j)>``."""
    x = as_spd(x)
    if x.shape[0] != layer.m_in:
        raise DimensionError(f"layer expects {layer.m_in}x{layer.m_in} input, got {x.shape}")
    g_inv = coset_rep(x).g_inv
    v = np.empty(layer.m_out)
    for j in range(layer.m_out):
        h = coset_rep(layer.p[j]).g
        v[j] = layer.a[j] @ iwasawa_H(g_inv @ h @ layer.k[j]).H
    return v


def fc_gi_output(n, v) -> np.ndarray:
    """SPD point ``n exp(-2 diag v) n^T``."""
    return act(np.asarray(n, dtype=np.float64), np.diag(np.exp(-2.0 * np.asarray(v, dtype=np.float64))))


def fc_layer_gi_forward(layer: FcLayerGi, x) -> np.ndarray:
    return fc_gi_output(layer.n, fc_gi_responses(layer, x))

