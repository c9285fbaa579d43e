"""Poincare-ball geometry at curvature -1.

Points are arrays whose last axis holds the coordinates; every function
broadcasts over leading axes. Metric factor is ``4 / (1 - |x|^2)^2``.

Results that would leave the ball are pulled back to radius ``1 - 1e-5``;
each such event bumps a process-wide counter (see :func:`clamp_events`).
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.special import log_softmax, softmax

from .errors import InvalidPointError

MAX_NORM = 1.0 - 1e-5
SQNORM_FLOOR = 1e-30
ZERO_NORM = 1e-9
LORENTZ_TOL = 1e-9

_clamp_lock = threading.Lock()
_clamp_count = 0


def clamp_events() -> int:
    """Number of ball clamps since the last reset."""
    return _clamp_count


def reset_clamp_events() -> None:
    global _clamp_count
    with _clamp_lock:
        _clamp_count = 0


def _record_clamps(n: int) -> None:
    global _clamp_count
    if n:
        with _clamp_lock:
            _clamp_count += n


def _sqnorm(x):
    return np.sum(x * x, axis=-1)


def _dot(x, y):
    return np.sum(x * y, axis=-1)


def project(x) -> np.ndarray:
    """Pull points with norm above ``MAX_NORM`` back onto that radius."""
    x = np.asarray(x, dtype=np.float64)
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    over = norm > MAX_NORM
    n_over = int(np.count_nonzero(over))
    if n_over == 0:
        return x
    _record_clamps(n_over)
    return np.where(over, x * (MAX_NORM / np.where(over, norm, 1.0)), x)


def as_ball_point(x, clamp: bool = True) -> np.ndarray:
    """Validate ball coordinates, clamping or rejecting points near the boundary."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise InvalidPointError("ball point has non-finite coordinates")
    if clamp:
        return project(x)
    norm = np.linalg.norm(x, axis=-1)
    if np.any(norm > MAX_NORM):
        raise InvalidPointError(f"ball point norm {np.max(norm):.12g} exceeds {MAX_NORM}")
    return x


def as_boundary(direction) -> np.ndarray:
    """Normalize an ideal direction to unit length."""
    d = np.asarray(direction, dtype=np.float64)
    norm = np.linalg.norm(d, axis=-1, keepdims=True)
    if np.any(norm == 0) or not np.all(np.isfinite(norm)):
        raise InvalidPointError("boundary direction must be a finite nonzero vector")
    return d / norm


# ---------------------------------------------------------------------------
# Mobius gyrovector operations


def mobius_add(x, y) -> np.ndarray:
    """Mobius addition ``x (+) y``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xy = _dot(x, y)[..., None]
    x2 = _sqnorm(x)[..., None]
    y2 = _sqnorm(y)[..., None]
    num = (1.0 + 2.0 * xy + y2) * x + (1.0 - x2) * y
    den = 1.0 + 2.0 * xy + x2 * y2
    return project(num / den)


def mobius_neg(x) -> np.ndarray:
    return -np.asarray(x, dtype=np.float64)


def dist_ball(x, y) -> np.ndarray:
    """Geodesic distance ``arccosh(1 + 2|x-y|^2 / ((1-|x|^2)(1-|y|^2)))``.

    Evaluated as ``log1p(e + sqrt(e (e + 2)))`` so that nearby points keep
    full relative accuracy.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    e = 2.0 * _sqnorm(x - y) / ((1.0 - _sqnorm(x)) * (1.0 - _sqnorm(y)))
    return np.log1p(e + np.sqrt(e * (e + 2.0)))


def dist_ball_gyro(x, y) -> np.ndarray:
    """Distance through the gyro form ``2 artanh |(-x) (+) y|``."""
    return 2.0 * np.arctanh(np.linalg.norm(mobius_add(mobius_neg(x), y), axis=-1))


def exp_map_ball(h, u) -> np.ndarray:
    """Exponential map at ``h``: ``h (+) tanh(|u| / (1-|h|^2)) u/|u|``."""
    h = np.asarray(h, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    unorm = np.linalg.norm(u, axis=-1, keepdims=True)
    safe = np.where(unorm > 0, unorm, 1.0)
    step = np.where(unorm > 0, np.tanh(unorm / (1.0 - _sqnorm(h)[..., None])) * u / safe, 0.0)
    return mobius_add(h, step)


def exp0_ball(v) -> np.ndarray:
    return exp_map_ball(np.zeros_like(np.asarray(v, dtype=np.float64)), v)


def log0_ball(x) -> np.ndarray:
    """``artanh(|x|) x/|x|``; zero at the origin."""
    x = np.asarray(x, dtype=np.float64)
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    safe = np.where(norm > 0, norm, 1.0)
    return np.where(norm > 0, np.arctanh(norm) * x / safe, 0.0)


# ---------------------------------------------------------------------------
# Busemann function and point-to-hyperplane distances


def busemann_ball(xi, x) -> np.ndarray:
    """Busemann function of the unit-speed ray ``tanh(t/2) xi`` from the origin.

    ``B(x) = log(|x - xi|^2 / (1 - |x|^2))``, normalized so that ``B(0) = 0``.
    """
    xi = np.asarray(xi, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    gap = np.maximum(_sqnorm(x - xi), SQNORM_FLOOR)
    return np.log(gap) - np.log1p(-_sqnorm(x))


@dataclass(frozen=True)
class GHyperplaneBall:
    """Poincare hyperplane through ``p`` with normal ``a`` (tangent at ``p``)."""

    p: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", as_ball_point(self.p))
        a = np.asarray(self.a, dtype=np.float64)
        if not np.linalg.norm(a) > 0:
            raise InvalidPointError("hyperplane normal must be nonzero")
        object.__setattr__(self, "a", a)


@dataclass(frozen=True)
class HHoroplaneBall:
    """Horocycle ``{x : a * (-B_xi(x)) = b}``."""

    xi: np.ndarray
    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "xi", as_boundary(self.xi))
        if not self.a > 0:
            raise InvalidPointError(f"horocycle scale a must be positive, got {self.a}")


@dataclass(frozen=True)
class BHyperplaneBall:
    """Hyperplane ``{x : B_xi((-p) (+) x) = 0}``."""

    xi: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi", as_boundary(self.xi))
        object.__setattr__(self, "p", as_ball_point(self.p))


def g_distance(hp: GHyperplaneBall, x) -> np.ndarray:
    """Signed geodesic-projection distance to a Poincare hyperplane."""
    w = mobius_add(mobius_neg(hp.p), x)
    z = 2.0 * _dot(w, hp.a) / ((1.0 - _sqnorm(w)) * np.linalg.norm(hp.a))
    return np.arcsinh(z)


def h_distance(hp: HHoroplaneBall, x) -> np.ndarray:
    """Signed, unnormalized horospherical value ``a log((1-|x|^2)/|x-xi|^2) - b``."""
    return -hp.a * busemann_ball(hp.xi, x) - hp.b


def h_distance_metric(hp: HHoroplaneBall, x) -> np.ndarray:
    """The horospherical distance proper: ``|h_distance| / a``."""
    return np.abs(h_distance(hp, x)) / hp.a


def b_distance_ball(hp: BHyperplaneBall, x) -> np.ndarray:
    """Signed Busemann-based distance to ``H_{xi,p}``.

    ``-(d(x, p) / |w|) log((1 - |w|^2) / |w - xi|^2)`` with ``w = (-p) (+) x``;
    exactly zero when ``|w| <= 1e-9``.
    """
    x = np.asarray(x, dtype=np.float64)
    w = mobius_add(mobius_neg(hp.p), x)
    wnorm = np.linalg.norm(w, axis=-1)
    gap = np.maximum(_sqnorm(w - hp.xi), SQNORM_FLOOR)
    log_ratio = np.log1p(-_sqnorm(w)) - np.log(gap)
    d = dist_ball(x, hp.p)
    on_plane = wnorm <= ZERO_NORM
    out = -d / np.where(on_plane, 1.0, wnorm) * log_ratio
    return np.where(on_plane, 0.0, out)


def b_distance_ball_definition(hp: BHyperplaneBall, x) -> np.ndarray:
    """Same quantity assembled from its ingredients: ``d(x,p) B_xi(w) / |w|``."""
    w = mobius_add(mobius_neg(hp.p), x)
    wnorm = np.linalg.norm(w, axis=-1)
    on_plane = wnorm <= ZERO_NORM
    val = dist_ball(x, hp.p) * busemann_ball(hp.xi, w) / np.where(on_plane, 1.0, wnorm)
    return np.where(on_plane, 0.0, val)


# ---------------------------------------------------------------------------
# MLR heads


@dataclass(frozen=True)
class MlrHeadBall:
    """Per-class parameters of a Poincare MLR head, stacked along axis 0.

    kind ``"g"`` uses ``p`` (C, m) and ``a`` (C, m); kind ``"h"`` uses ``xi``
    (C, m), ``a`` (C,), ``b`` (C,) and ``s`` (C,); kind ``"b"`` uses ``xi``,
    ``p`` and ``s``. The real scale ``s`` multiplies the signed distance to
    form the logit.
    """

    kind: str
    p: np.ndarray | None = None
    a: np.ndarray | None = None
    xi: np.ndarray | None = None
    b: np.ndarray | None = None
    s: np.ndarray | None = None
    n_classes: int = field(init=False)

    def __post_init__(self):
        def arr(v):
            return None if v is None else np.asarray(v, dtype=np.float64)

        for name in ("p", "a", "xi", "b", "s"):
            object.__setattr__(self, name, arr(getattr(self, name)))
        if self.kind == "g":
            required = ("p", "a")
        elif self.kind == "h":
            required = ("xi", "a", "b", "s")
        elif self.kind == "b":
            required = ("xi", "p", "s")
        else:
            raise ValueError(f"unknown MLR head kind {self.kind!r}")
        missing = [n for n in required if getattr(self, n) is None]
        if missing:
            raise ValueError(f"kind {self.kind!r} head is missing {missing}")
        n = len(getattr(self, required[0]))
        if any(len(getattr(self, r)) != n for r in required):
            raise ValueError("per-class parameter arrays disagree on the class count")
        if n < 2:
            raise ValueError("an MLR head needs at least two classes")
        object.__setattr__(self, "n_classes", n)
        if self.xi is not None:
            object.__setattr__(self, "xi", as_boundary(self.xi))
        if self.p is not None:
            object.__setattr__(self, "p", as_ball_point(self.p))
        if self.kind == "g" and np.any(np.linalg.norm(self.a, axis=-1) == 0):
            raise InvalidPointError("g-head normals must be nonzero")
        if self.kind == "h" and np.any(self.a <= 0):
            raise InvalidPointError("h-head scales a must be positive")


def mlr_logits(head: MlrHeadBall, x) -> np.ndarray:
    """Class logits, shape ``x.shape[:-1] + (C,)``."""
    x = np.asarray(x, dtype=np.float64)
    cols = []
    for c in range(head.n_classes):
        if head.kind == "g":
            hp = GHyperplaneBall(head.p[c], head.a[c])
            lam = 2.0 / (1.0 - _sqnorm(hp.p))
            cols.append(lam * np.linalg.norm(hp.a) * g_distance(hp, x))
        elif head.kind == "h":
            hp = HHoroplaneBall(head.xi[c], float(head.a[c]), float(head.b[c]))
            cols.append(head.s[c] * h_distance(hp, x))
        else:
            hp = BHyperplaneBall(head.xi[c], head.p[c])
            cols.append(head.s[c] * b_distance_ball(hp, x))
    return np.stack(cols, axis=-1)


def mlr_ball(head: MlrHeadBall, x) -> np.ndarray:
    """Class probabilities (softmax of :func:`mlr_logits`)."""
    return softmax(mlr_logits(head, x), axis=-1)


def mlr_log_proba(head: MlrHeadBall, x) -> np.ndarray:
    return log_softmax(mlr_logits(head, x), axis=-1)


# ---------------------------------------------------------------------------
# Sampling and the Lorentz model


def wrapped_normal_from_noise(h, noise) -> np.ndarray:
    """Push a Euclidean draw ``noise ~ N(0, Sigma)`` to the ball around ``h``.

    Halve it, transport from the origin to ``h`` (factor ``1 - |h|^2``), then
    apply the exponential map at ``h``.
    """
    h = np.asarray(h, dtype=np.float64)
    v = 0.5 * np.asarray(noise, dtype=np.float64)
    u = (1.0 - _sqnorm(h))[..., None] * v
    return exp_map_ball(h, u)


def wrapped_normal_sample(h, sigma, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Wrapped-normal sample(s) with per-axis standard deviation ``sigma``.

    Returns one point of shape ``(m,)`` or, with ``size``, an array ``(size, m)``.
    """
    h = np.asarray(h, dtype=np.float64)
    sigma = np.broadcast_to(np.asarray(sigma, dtype=np.float64), h.shape[-1:])
    if np.any(sigma < 0):
        raise ValueError("sigma must be componentwise nonnegative")
    shape = h.shape if size is None else (size,) + h.shape
    noise = rng.standard_normal(shape) * sigma
    return wrapped_normal_from_noise(h, noise)


def as_lorentz_point(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    minkowski = -x[..., 0] ** 2 + _sqnorm(x[..., 1:])
    # relative tolerance: rounding in <x,x>_L grows like x_0^2 near the ideal boundary
    resid = np.abs(minkowski + 1.0) / np.maximum(1.0, x[..., 0] ** 2)
    if np.any(x[..., 0] <= 0) or np.any(resid > LORENTZ_TOL):
        raise InvalidPointError(f"not on the hyperboloid: relative residual {np.max(resid):.3e}")
    return x


def ball_from_lorentz(x) -> np.ndarray:
    """``(x_1, ..., x_m) / (x_0 + 1)``."""
    x = as_lorentz_point(x)
    return x[..., 1:] / (x[..., :1] + 1.0)


def lorentz_from_ball(x) -> np.ndarray:
    """``(1 + |x|^2, 2 x) / (1 - |x|^2)``."""
    x = np.asarray(x, dtype=np.float64)
    x2 = _sqnorm(x)[..., None]
    return np.concatenate([1.0 + x2, 2.0 * x], axis=-1) / (1.0 - x2)


def lorentz_distance(x, y) -> np.ndarray:
    x = as_lorentz_point(x)
    y = as_lorentz_point(y)
    inner = x[..., 0] * y[..., 0] - _dot(x[..., 1:], y[..., 1:])
    return np.arccosh(np.maximum(inner, 1.0))
