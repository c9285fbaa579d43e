"""Constrained parameters, finite-difference gradients and SGD for the ball MLR heads."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .data import prototype_directions
from .errors import NonFiniteLossError
from .poincare import MAX_NORM, MlrHeadBall, mlr_log_proba, mlr_logits, project

KINDS = ("euclidean", "ball", "unit_sphere", "spd_via_sym_exp", "unit_upper_triangular")


def _rownorm(x: np.ndarray) -> np.ndarray:
    return np.linalg.norm(x, axis=-1, keepdims=True)


@dataclass(frozen=True)
class ParamSpace:
    """A parameter array together with the constraint it must satisfy.

    ``ball`` and ``unit_sphere`` constrain each row (last axis) separately.
    ``spd_via_sym_exp`` stores the symmetric matrix whose matrix exponential
    is the SPD parameter. ``unit_upper_triangular`` stores the matrix itself.
    """

    kind: str
    value: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown parameter kind {self.kind!r}; expected one of {KINDS}")
        value = np.array(self.value, dtype=np.float64)
        if self.kind == "ball":
            value = project(value)
        elif self.kind == "unit_sphere":
            norm = _rownorm(value)
            if np.any(norm == 0):
                raise ValueError("unit_sphere parameter has a zero row")
            value = value / norm
        elif self.kind == "spd_via_sym_exp":
            if value.ndim != 2 or value.shape[0] != value.shape[1]:
                raise ValueError("spd_via_sym_exp parameter must be a square matrix")
            value = 0.5 * (value + value.T)
        elif self.kind == "unit_upper_triangular":
            if value.ndim != 2 or value.shape[0] != value.shape[1]:
                raise ValueError("unit_upper_triangular parameter must be a square matrix")
            value = np.triu(value, 1) + np.eye(len(value))
        value.setflags(write=False)
        object.__setattr__(self, "value", value)

    def with_value(self, value) -> "ParamSpace":
        return ParamSpace(self.kind, value)


def _probe_directions(param: ParamSpace):
    """Yield ``(index, direction, scale)`` for each free coordinate.

    The finite difference along ``direction`` divided by ``scale`` gives the
    gradient entry at ``index``.
    """
    x = param.value
    if param.kind == "spd_via_sym_exp":
        m = len(x)
        for i in range(m):
            for j in range(i, m):
                d = np.zeros_like(x)
                d[i, j] = d[j, i] = 1.0
                yield (i, j), d, (1.0 if i == j else 2.0)
        return
    if param.kind == "unit_upper_triangular":
        m = len(x)
        for i in range(m):
            for j in range(i + 1, m):
                d = np.zeros_like(x)
                d[i, j] = 1.0
                yield (i, j), d, 1.0
        return
    for idx in np.ndindex(x.shape):
        d = np.zeros_like(x)
        d[idx] = 1.0
        if param.kind == "unit_sphere":
            row = idx[:-1]
            d[row] -= x[row] * x[idx]
        yield idx, d, 1.0


def _perturb(param: ParamSpace, direction: np.ndarray, h: float) -> ParamSpace:
    x = param.value + h * direction
    if param.kind == "ball":
        # stay inside the ball without bumping the clamp counter
        norm = _rownorm(x)
        x = np.where(norm > MAX_NORM, x * (MAX_NORM / np.maximum(norm, MAX_NORM)), x)
    return param.with_value(x)


Loss = Callable[[Sequence[ParamSpace]], float]


def fd_gradient(loss: Loss, params: Sequence[ParamSpace], step: float = 1e-6) -> list[np.ndarray]:
    """Central finite-difference gradient of ``loss`` with respect to each parameter.

    Constrained kinds are probed in their own parameterization: sphere rows
    along the tangent projection of each coordinate axis (then renormalized),
    SPD parameters through symmetric perturbations of the log-parameter, unit
    upper triangular parameters on strictly upper entries only.

    Raises
    ------
    NonFiniteLossError
        If the loss is not finite at the current point or at any probe.
    """
    params = list(params)
    base = loss(params)
    if not math.isfinite(base):
        raise NonFiniteLossError(f"loss is not finite at the current parameters ({base!r})")
    grads = []
    for k, param in enumerate(params):
        g = np.zeros_like(param.value)
        for idx, direction, scale in _probe_directions(param):
            vals = []
            for sign in (1.0, -1.0):
                probe = list(params)
                probe[k] = _perturb(param, direction, sign * step)
                val = loss(probe)
                if not math.isfinite(val):
                    raise NonFiniteLossError(
                        f"loss is not finite when probing parameter {k} ({param.kind}) at index {idx}"
                    )
                vals.append(val)
            deriv = (vals[0] - vals[1]) / (2.0 * step) / scale
            g[idx] = deriv
            if param.kind == "spd_via_sym_exp":
                g[idx[::-1]] = deriv
        grads.append(g)
    return grads


def sgd_step(param: ParamSpace, grad, lr: float) -> ParamSpace:
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != param.value.shape:
        raise ValueError(f"gradient shape {grad.shape} does not match parameter {param.value.shape}")
    x = param.value
    if param.kind == "ball":
        conformal = (1.0 - np.sum(x * x, axis=-1, keepdims=True)) ** 2 / 4.0
        return param.with_value(x - lr * conformal * grad)
    if param.kind == "unit_sphere":
        tangent = grad - x * np.sum(grad * x, axis=-1, keepdims=True)
        return param.with_value(x - lr * tangent)
    if param.kind == "unit_upper_triangular":
        return param.with_value(x - lr * np.triu(grad, 1))
    return param.with_value(x - lr * grad)


# ---------------------------------------------------------------------------
# MLR training


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.05
    epochs: int = 200
    batch_size: int = 1024
    fd_step: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if not self.lr >= 0:
            raise ValueError(f"learning rate must be nonnegative, got {self.lr}")
        if not (isinstance(self.epochs, int) and self.epochs > 0):
            raise ValueError(f"epochs must be a positive integer, got {self.epochs}")
        if not (isinstance(self.batch_size, int) and self.batch_size > 0):
            raise ValueError(f"batch size must be a positive integer, got {self.batch_size}")
        if not self.fd_step > 0:
            raise ValueError(f"fd step must be positive, got {self.fd_step}")


@dataclass(frozen=True)
class TrainResult:
    kind: str
    losses: list[float]
    accuracies: list[float]
    initial_loss: float
    initial_accuracy: float
    head: MlrHeadBall = field(repr=False)

    @property
    def final_accuracy(self) -> float:
        return self.accuracies[-1]

    @property
    def final_loss(self) -> float:
        return self.losses[-1]


def _softplus(x):
    return np.logaddexp(0.0, x)


def _spread_directions(dim: int, n_classes: int, rng: np.random.Generator) -> np.ndarray:
    try:
        base = prototype_directions(dim, n_classes)
    except ValueError:
        return rng.standard_normal((n_classes, dim))
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return base @ (q * np.sign(np.diagonal(r)))


def init_params(kind: str, dim: int, n_classes: int, rng: np.random.Generator) -> list[ParamSpace]:
    """Initial trainable parameters of a ``kind`` head.

    Points ``p`` start near the origin. Boundary points ``xi`` start evenly
    spread over the sphere under a random rotation, so no two classes begin
    by competing for the same direction. The h-head's positive scale is ``softplus`` of a free real. The
    logit scale starts at ``+1`` (h) or ``-1`` (b) so that the class whose
    boundary point is nearest gets the largest logit.
    """
    if kind == "g":
        return [
            ParamSpace("ball", 0.01 * rng.standard_normal((n_classes, dim))),
            ParamSpace("euclidean", rng.standard_normal((n_classes, dim))),
        ]
    xi = ParamSpace("unit_sphere", _spread_directions(dim, n_classes, rng))
    if kind == "h":
        return [
            xi,
            ParamSpace("euclidean", np.zeros(n_classes)),
            ParamSpace("euclidean", np.zeros(n_classes)),
            ParamSpace("euclidean", np.ones(n_classes)),
        ]
    if kind == "b":
        return [
            xi,
            ParamSpace("ball", 0.01 * rng.standard_normal((n_classes, dim))),
            ParamSpace("euclidean", -np.ones(n_classes)),
        ]
    raise ValueError(f"unknown MLR head kind {kind!r}; expected 'g', 'h' or 'b'")


def head_from_params(kind: str, params: Sequence[ParamSpace]) -> MlrHeadBall:
    v = [p.value for p in params]
    if kind == "g":
        return MlrHeadBall("g", p=v[0], a=v[1])
    if kind == "h":
        return MlrHeadBall("h", xi=v[0], a=_softplus(v[1]), b=v[2], s=v[3])
    return MlrHeadBall("b", xi=v[0], p=v[1], s=v[2])


def cross_entropy(head: MlrHeadBall, x: np.ndarray, y: np.ndarray) -> float:
    logp = mlr_log_proba(head, x)
    return float(-np.mean(logp[np.arange(len(y)), y]))


def accuracy(head: MlrHeadBall, x: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(np.argmax(mlr_logits(head, x), axis=-1) == y))


def train_mlr(x, y, kind: str, config: TrainConfig, n_classes: int | None = None) -> TrainResult:
    """Fit an MLR head on ball points ``x`` (N, m) with integer labels ``y``.

    Plain (Riemannian) SGD on finite-difference gradients of the mean
    cross-entropy. Full batch whenever ``batch_size >= N``; otherwise batches
    are drawn from a seeded shuffle each epoch. Deterministic given the seed.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or len(x) == 0 or len(x) != len(y):
        raise ValueError("need a nonempty (N, m) feature array and N labels")
    if not np.issubdtype(y.dtype, np.integer):
        raise ValueError("labels must be integers")
    n_classes = int(y.max()) + 1 if n_classes is None else n_classes
    if y.min() < 0 or y.max() >= n_classes:
        raise ValueError(f"labels must lie in [0, {n_classes})")
    if len(np.unique(y)) < 2:
        raise ValueError("training data contains a single class; an MLR head needs at least two")
    n_classes = max(n_classes, 2)

    rng = np.random.default_rng(config.seed)
    params = init_params(kind, x.shape[1], n_classes, rng)

    def loss_on(xb, yb):
        return lambda ps: cross_entropy(head_from_params(kind, ps), xb, yb)

    head = head_from_params(kind, params)
    initial_loss = cross_entropy(head, x, y)
    initial_acc = accuracy(head, x, y)
    losses, accs = [], []
    n = len(x)
    for _ in range(config.epochs):
        if config.batch_size >= n:
            batches = [np.arange(n)]
        else:
            order = rng.permutation(n)
            batches = [order[i:i + config.batch_size] for i in range(0, n, config.batch_size)]
        for idx in batches:
            grads = fd_gradient(loss_on(x[idx], y[idx]), params, config.fd_step)
            params = [sgd_step(p, g, config.lr) for p, g in zip(params, grads)]
        head = head_from_params(kind, params)
        losses.append(cross_entropy(head, x, y))
        accs.append(accuracy(head, x, y))
    return TrainResult(kind, losses, accs, initial_loss, initial_acc, head)

