"""Independent numerical oracles used to cross-check the closed forms.

Each oracle recomputes a quantity along a route that shares as little code as
possible with the function it checks: Busemann functions from their defining
limit, the Iwasawa factors from a Householder QR, the g-distance by direct
minimization along the hyperplane.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import RepresentationOverflowError
from .gi import WeylDirection, coset_rep
from .matkernels import as_spd, check_orthogonal, cholesky_lower, frobenius_inner
from .poincare import GHyperplaneBall, as_ball_point, as_boundary, dist_ball, exp_map_ball
from .spd_pem import PhiMap

# clusters of the graded GI spectrum are split where scales differ by more than this
_CLUSTER_GAP = 40.0


# ---------------------------------------------------------------------------
# Busemann limit d(x, ray(t)) - t


def _limit_ball(xi, x, t: float) -> float:
    xi = as_boundary(xi)
    x = as_ball_point(x, clamp=False)
    ray = math.tanh(t / 2.0) * xi
    q = 2.0 * float(np.sum((x - ray) ** 2)) / (1.0 - float(np.sum(x * x)))
    # d = acosh(1 + e) with e = q cosh(t/2)^2; the point's 1 - |ray|^2 = sech^2(t/2)
    # is used analytically instead of from the rounded point
    e = q * math.cosh(t / 2.0) ** 2 if t < 600.0 else math.inf
    if e < 1e100:
        return math.log1p(e + math.sqrt(e * (e + 2.0))) - t
    # log e - t, then d - t = log e - t + log(1 + 1/e + sqrt(1 + 2/e)); nothing overflows
    log_e_minus_t = math.log(q) - 2.0 * math.log(2.0) + 2.0 * math.log1p(math.exp(-t))
    inv_e = math.exp(-(log_e_minus_t + t))
    return log_e_minus_t + math.log1p(inv_e + math.sqrt(1.0 + 2.0 * inv_e))


def _limit_pem(phi: PhiMap, a, x, t: float) -> float:
    a = np.asarray(a, dtype=np.float64)
    fx = phi.phi(as_spd(x))
    # |fx - t a| - t with the t^2 terms cancelled analytically (|a| = 1)
    num = frobenius_inner(fx, fx) - 2.0 * t * frobenius_inner(a, fx)
    return num / (float(np.linalg.norm(fx - t * a)) + t)


def one_sided_jacobi_sv(g: np.ndarray, tol: float = 1e-15, max_sweeps: int = 60) -> np.ndarray:
    """Singular values of ``g`` by one-sided (Hestenes) Jacobi.

    Column scaling does not hurt the relative accuracy of the result, which is
    what the graded matrices below need. Returned in non-increasing order.
    """
    g = np.array(g, dtype=np.float64)
    n = g.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = g[:, i] @ g[:, i]
                beta = g[:, j] @ g[:, j]
                gamma = g[:, i] @ g[:, j]
                if abs(gamma) <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                tan = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                cos = 1.0 / math.sqrt(1.0 + tan * tan)
                sin = cos * tan
                gi_col = g[:, i].copy()
                g[:, i] = cos * gi_col - sin * g[:, j]
                g[:, j] = sin * gi_col + cos * g[:, j]
        if not rotated:
            break
    return np.sort(np.linalg.norm(g, axis=0))[::-1]


def graded_log_eigs(y: np.ndarray, scales: np.ndarray) -> np.ndarray:
    """Log-eigenvalues of ``E y E`` with ``E = diag(exp(scales))``, ``y`` SPD.

    ``E`` is never formed. Indices are ordered by scale and split into
    clusters wherever consecutive scales differ by more than ``_CLUSTER_GAP``;
    each cluster's eigenvalues are those of its block Schur complement (the
    coupling to other clusters is below double precision). Inside a cluster
    the singular values of ``chol(S)^T diag(exp(s - s_max))`` are found by
    one-sided Jacobi. Returned in non-increasing order.
    """
    order = np.argsort(-scales, kind="stable")
    s = scales[order]
    y = y[np.ix_(order, order)]
    breaks = [0] + [i + 1 for i in range(len(s) - 1) if s[i] - s[i + 1] > _CLUSTER_GAP] + [len(s)]
    out = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        block = y[lo:hi, lo:hi]
        if lo > 0:
            lead = y[:lo, :lo]
            cross = y[:lo, lo:hi]
            block = block - cross.T @ np.linalg.solve(lead, cross)
        smax = s[lo]
        chol = cholesky_lower(block)
        sv = one_sided_jacobi_sv(chol.T * np.exp(s[lo:hi] - smax)[None, :])
        out.append(2.0 * np.log(sv) + 2.0 * smax)
    return np.sort(np.concatenate(out))[::-1]


def _limit_gi(k, a, x, t: float) -> float:
    a = a.a if isinstance(a, WeylDirection) else np.asarray(a, dtype=np.float64)
    x = as_spd(x)
    if k is not None:
        k = check_orthogonal(k)
        x = k.T @ x @ k
        x = 0.5 * (x + x.T)
    # d(x, ray(t)) = |mu(exp(-t a) g)| = |ell| / 2 where ell are the
    # log-eigenvalues of exp(-t a) x exp(-t a)
    ell = graded_log_eigs(x, -t * a)
    # pair the largest ell with the largest -2 t a so that r stays O(1)
    target = np.sort(-2.0 * t * a)[::-1]
    r = ell - target
    a_paired = -target / (2.0 * t)
    d = 0.5 * float(np.linalg.norm(ell))
    # d^2 - t^2 = -t sum(a r) + sum(r^2) / 4 since |a| = 1
    return (-t * float(a_paired @ r) + 0.25 * float(r @ r)) / (d + t)


def busemann_limit_oracle(space: str, ray, x, t: float) -> float:
    """``d(x, ray(t)) - t`` for the unit-speed ray described by ``ray``.

    ``space="ball"``: ``ray = xi`` (unit vector), ray ``tanh(t/2) xi``.
    ``space="pem"``: ``ray = (phi, a)`` with unit symmetric ``a``, ray ``phi_inv(t a)``.
    ``space="gi"``: ``ray = (k, a)`` with ``k`` orthogonal or ``None`` and unit
    vector ``a``, ray ``k exp(t diag a) K`` (SPD point ``k exp(2t diag a) k^T``).

    The ray point is kept in its own coordinates throughout, so large ``t``
    never forms an overflowing matrix.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if not math.isfinite(t):
        raise RepresentationOverflowError(f"t={t!r} has no finite ray point; pass a finite t such as 1e6")
    if space == "ball":
        return _limit_ball(ray, x, t)
    if space == "pem":
        phi, a = ray
        return _limit_pem(phi, a, x, t)
    if space == "gi":
        k, a = ray
        return _limit_gi(k, a, x, t)
    raise ValueError(f"unknown space {space!r}; expected 'ball', 'pem' or 'gi'")


# ---------------------------------------------------------------------------
# Iwasawa via QR


def iwasawa_qr_oracle(g) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(H, n, k)`` with ``g = k diag(exp H) n`` from a Householder QR of ``g``."""
    g = np.asarray(g, dtype=np.float64)
    q, r = np.linalg.qr(g)
    signs = np.where(np.diagonal(r) < 0, -1.0, 1.0)
    q = q * signs[None, :]
    r = r * signs[:, None]
    diag = np.diagonal(r).copy()
    if np.any(diag <= np.finfo(float).eps * np.max(np.abs(diag)) * len(diag)):
        raise np.linalg.LinAlgError("matrix is rank deficient")
    return np.log(diag), r / diag[:, None], q


# ---------------------------------------------------------------------------
# g-distance by minimization along the hyperplane


def _hyperplane_point(hp: GHyperplaneBall, direction: np.ndarray, s: float) -> np.ndarray:
    # unit-speed geodesic through p: tangent of Euclidean length (1 - |p|^2) / 2 per unit s
    conformal = 0.5 * (1.0 - float(hp.p @ hp.p))
    return exp_map_ball(hp.p, s * conformal * direction)


def projection_min_distance_oracle(hp: GHyperplaneBall, x, resolution: float = 1e-4) -> float:
    """``min_y d(x, y)`` over the hyperplane, for hyperplanes in the 2-D ball.

    The hyperplane is the geodesic through ``p`` orthogonal to ``a``. A grid
    over its arc length brackets the minimum and a golden-section search
    refines the parameter to ``resolution``.
    """
    x = as_ball_point(x, clamp=False)
    if hp.p.shape != (2,) or x.shape != (2,):
        raise ValueError("projection oracle is implemented for the 2-D ball only")
    normal = hp.a / np.linalg.norm(hp.a)
    direction = np.array([-normal[1], normal[0]])
    # the foot of the perpendicular is no farther from p than x is
    reach = float(dist_ball(x, hp.p)) + 1.0
    grid = np.linspace(-reach, reach, 401)
    vals = np.array([float(dist_ball(x, _hyperplane_point(hp, direction, s))) for s in grid])
    i = int(np.clip(np.argmin(vals), 1, len(grid) - 2))
    f = lambda s: float(dist_ball(x, _hyperplane_point(hp, direction, s)))
    res = minimize_scalar(
        f, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden",
        options={"xtol": resolution / max(reach, 1.0)},
    )
    return float(min(res.fun, vals.min()))


# ---------------------------------------------------------------------------
# Angular metric


def angular_metric_estimate(a, a_prime, t: float) -> float:
    """``d(ray_a(t), ray_a'(t)) / t`` for the rays ``exp(t diag a) K`` through the identity.

    Both rays lie in the flat of diagonal matrices, where the distance is
    ``|mu(exp(-t a) exp(t a'))|``; that product is diagonal, so its log
    singular values are the exponents ``t (a' - a)`` and no matrix is formed.
    """
    a = WeylDirection(a).a
    a_prime = WeylDirection(a_prime).a
    if not t > 0:
        raise ValueError("t must be positive")
    mu = np.sort(t * a_prime - t * a)[::-1]
    return float(np.linalg.norm(mu)) / t


def angular_metric_dense(a, a_prime, t: float) -> float:
    """Same estimate through :func:`symspace.gi.gi_dist` on explicit SPD matrices (small ``t`` only)."""
    from .gi import gi_dist

    a = WeylDirection(a).a
    a_prime = WeylDirection(a_prime).a
    x = np.diag(np.exp(2.0 * t * a))
    y = np.diag(np.exp(2.0 * t * a_prime))
    return gi_dist(coset_rep(x), coset_rep(y)) / t
