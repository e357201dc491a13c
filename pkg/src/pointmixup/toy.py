"""A tiny PointNet-style classifier with hand-written gradients.

Architecture: two shared per-point affine+ReLU layers (3 -> H1 -> H2), a
channel-wise max pool over points, and an affine classifier (H2 -> C).
Mixup can be applied at layer 0 (input coordinates) or layer 1 (the output of
the first shared layer), always along an assignment computed from the 3D
coordinates.

The max pool routes its gradient to the first point attaining the maximum,
which keeps backprop deterministic when replicated points tie.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .alignment import AlignmentConfig, estimate_heading
from .cloud import _points, as_rng, rotation_matrix
from .emd import emd
from .errors import InvalidArgumentError, TrainingError
from .interpolation import BetaParams, sample_lambda

LAYERS = (0, 1)
PARAM_NAMES = ("W1", "b1", "W2", "b2", "W3", "b3")
STRATEGIES = (
    "none",
    "input_mixup",
    "manifold_mixup",
    "input_only",
    "fixed_layer",
    "label_smoothing",
)


@dataclass
class ToyNet:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray

    def params(self) -> dict:
        return {k: getattr(self, k) for k in PARAM_NAMES}

    def copy(self) -> "ToyNet":
        return ToyNet(**{k: v.copy() for k, v in self.params().items()})

    @property
    def num_classes(self) -> int:
        return self.W3.shape[1]


def init_net(num_classes: int, h1: int = 32, h2: int = 64, rng=None) -> ToyNet:
    """He-initialised weights, zero biases."""
    rng = as_rng(rng)

    def he(fan_in, fan_out):
        return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))

    return ToyNet(
        he(3, h1), np.zeros(h1),
        he(h1, h2), np.zeros(h2),
        he(h2, num_classes) * 0.5, np.zeros(num_classes),
    )


def zeros_like_net(net: ToyNet) -> ToyNet:
    return ToyNet(**{k: np.zeros_like(v) for k, v in net.params().items()})


@dataclass
class LatentMix:
    """How to mix a batch inside the network.

    Row ``b`` of the batch is mixed with ``partner[b]`` along ``perm[b]``
    (point ``i`` of the batch cloud is matched with point ``perm[b, i]`` of
    the partner) at ratio ``lam[b]``, at layer ``layer``.
    """

    layer: int
    partner: np.ndarray  # (B, N, 3)
    perm: np.ndarray  # (B, N)
    lam: np.ndarray  # (B,)


def _relu(a):
    return np.maximum(a, 0.0)


def _gather(h, perm):
    return np.take_along_axis(h, perm[:, :, None], axis=1)


def _forward(net: ToyNet, X: np.ndarray, mix: LatentMix | None = None):
    cache = {}
    lam = None
    if mix is not None:
        if mix.layer not in LAYERS:
            raise InvalidArgumentError(f"mixing layer must be one of {LAYERS}")
        lam = np.asarray(mix.lam, dtype=np.float64)[:, None, None]
        cache["lam"] = lam
    x0 = X
    if mix is not None and mix.layer == 0:
        x0 = (1 - lam) * X + lam * _gather(mix.partner, mix.perm)
    cache["x0"] = x0
    a1 = x0 @ net.W1 + net.b1
    h1 = _relu(a1)
    cache["a1"] = a1
    if mix is not None and mix.layer == 1:
        a1b = mix.partner @ net.W1 + net.b1
        cache["a1b"] = a1b
        h1 = (1 - lam) * h1 + lam * _gather(_relu(a1b), mix.perm)
    cache["h1"] = h1
    a2 = h1 @ net.W2 + net.b2
    h2 = _relu(a2)
    cache["a2"] = a2
    arg = np.argmax(h2, axis=1)  # first maximum -> lowest point index
    g = np.take_along_axis(h2, arg[:, None, :], axis=1)[:, 0, :]
    cache["arg"] = arg
    cache["g"] = g
    logits = g @ net.W3 + net.b3
    return logits, cache


def forward(net: ToyNet, cloud):
    """Logits for one cloud plus per-layer activations (``{0: points, 1: layer-1 features}``)."""
    X = _points(cloud)[None]
    logits, cache = _forward(net, X)
    return logits[0], {0: cache["x0"][0], 1: cache["h1"][0]}


def logits_batch(net: ToyNet, points: np.ndarray) -> np.ndarray:
    """Logits for a stack of clouds ``(B, N, 3)``, without caching activations."""
    h1 = _relu(np.asarray(points, dtype=np.float64) @ net.W1 + net.b1)
    g = _relu(h1 @ net.W2 + net.b2).max(axis=1)
    return g @ net.W3 + net.b3


def predict(net: ToyNet, points: np.ndarray, chunk: int = 100) -> np.ndarray:
    out = [logits_batch(net, points[i : i + chunk]) for i in range(0, len(points), chunk)]
    return np.concatenate(out).argmax(axis=1)


def log_softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def loss_and_grad(net: ToyNet, X, targets, mix: LatentMix | None = None):
    """Mean soft-target cross-entropy over a batch and its gradient.

    ``X`` is ``(B, N, 3)``; ``targets`` is ``(B, C)`` rows of probabilities.
    Returns ``(loss, grads)`` where ``grads`` is a :class:`ToyNet` holding
    the gradient of each weight.
    """
    X = np.asarray(X, dtype=np.float64)
    T = np.asarray(targets, dtype=np.float64)
    if X.ndim == 2:
        X = X[None]
        T = T.reshape(1, -1)
    B = X.shape[0]
    logits, c = _forward(net, X, mix)
    logp = log_softmax(logits)
    loss = float(-(T * logp).sum() / B)

    dlogits = (np.exp(logp) * T.sum(axis=1, keepdims=True) - T) / B
    dW3 = c["g"].T @ dlogits
    db3 = dlogits.sum(axis=0)
    dg = dlogits @ net.W3.T

    da2 = np.zeros_like(c["a2"])
    np.put_along_axis(da2, c["arg"][:, None, :], dg[:, None, :], axis=1)
    da2 *= c["a2"] > 0
    dW2 = np.einsum("bnh,bnk->hk", c["h1"], da2)
    db2 = da2.sum(axis=(0, 1))
    dh1 = da2 @ net.W2.T

    if mix is not None and mix.layer == 1:
        lam = c["lam"]
        da1 = (1 - lam) * dh1 * (c["a1"] > 0)
        dh1b = np.zeros_like(dh1)
        np.put_along_axis(dh1b, mix.perm[:, :, None], lam * dh1, axis=1)
        da1b = dh1b * (c["a1b"] > 0)
        dW1 = np.einsum("bnd,bnh->dh", c["x0"], da1) + np.einsum(
            "bnd,bnh->dh", mix.partner, da1b
        )
        db1 = da1.sum(axis=(0, 1)) + da1b.sum(axis=(0, 1))
    else:
        da1 = dh1 * (c["a1"] > 0)
        dW1 = np.einsum("bnd,bnh->dh", c["x0"], da1)
        db1 = da1.sum(axis=(0, 1))

    if not np.isfinite(loss):
        raise TrainingError(
            f"non-finite loss {loss}; max |logit| = {np.abs(logits).max():.3g}"
        )
    return loss, ToyNet(dW1, db1, dW2, db2, dW3, db3)


def check_gradients(net: ToyNet, X, targets, mix: LatentMix | None = None,
                    step: float = 1e-5) -> dict:
    """Largest relative error of the analytic gradient against central differences.

    Every weight is perturbed by ``+-step``.  The relative error of one entry
    is ``|a - n| / max(|a|, |n|, 1e-8)``, the floor keeping entries whose
    true gradient is zero from dividing by rounding noise.  Returns the worst
    error per parameter array.
    """
    _, grads = loss_and_grad(net, X, targets, mix)
    net = net.copy()
    worst = {}
    for k in PARAM_NAMES:
        W, G = getattr(net, k), getattr(grads, k)
        err = 0.0
        for idx in np.ndindex(W.shape):
            old = W[idx]
            W[idx] = old + step
            up = loss_and_grad(net, X, targets, mix)[0]
            W[idx] = old - step
            down = loss_and_grad(net, X, targets, mix)[0]
            W[idx] = old
            num = (up - down) / (2 * step)
            err = max(err, abs(G[idx] - num) / max(abs(G[idx]), abs(num), 1e-8))
        worst[k] = err
    return worst


def smooth_labels(labels, num_classes: int, eps: float) -> np.ndarray:
    """True class gets ``1 - eps + eps/C``, every other class ``eps/C``."""
    if not 0 <= eps < 1:
        raise InvalidArgumentError("label smoothing eps must lie in [0, 1)")
    T = np.full((len(labels), num_classes), eps / num_classes)
    T[np.arange(len(labels)), labels] += 1.0 - eps
    return T


# --------------------------------------------------------------------------
# training


@dataclass(frozen=True)
class TrainConfig:
    """Training options.

    ``strategy`` is one of ``none``, ``input_mixup`` (mix at layer 0),
    ``manifold_mixup`` (layer drawn per batch from :data:`LAYERS`),
    ``input_only`` (mix inputs but keep the first source's label),
    ``fixed_layer`` (always mix at ``mix_layer``) and ``label_smoothing``
    (no mixing, targets smoothed by ``smoothing``).
    """

    strategy: str = "none"
    gamma: float = 1.0
    epochs: int = 200
    batch_size: int = 16
    lr: float = 0.05
    momentum: float = 0.9
    seed: int = 0
    hidden: tuple = (32, 64)
    mix_layer: int = 1
    smoothing: float = 0.1
    jitter: float = 0.0
    align: bool = False
    up_axis: str = "z"
    schedule: str = "cosine"
    eval_every: int = 1

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InvalidArgumentError(
                f"unknown strategy {self.strategy!r}; choose from {', '.join(STRATEGIES)}"
            )
        BetaParams(self.gamma)
        if self.mix_layer not in LAYERS:
            raise InvalidArgumentError(f"mix_layer must be one of {LAYERS}")
        if self.epochs < 0 or self.batch_size < 1 or self.eval_every < 1:
            raise InvalidArgumentError("epochs must be >= 0, batch_size and eval_every >= 1")
        if self.schedule not in ("constant", "cosine"):
            raise InvalidArgumentError(f"unknown lr schedule {self.schedule!r}")

    def lr_at(self, epoch: int) -> float:
        """Learning rate for a 1-based epoch."""
        if self.schedule == "cosine":
            return 0.5 * self.lr * (1 + np.cos(np.pi * (epoch - 1) / self.epochs))
        return self.lr

    @property
    def mixes(self) -> bool:
        return self.strategy in ("input_mixup", "manifold_mixup", "input_only", "fixed_layer")


class PairCache:
    """Memoised optimal assignments between training clouds.

    With ``align`` set, the partner cloud is first rotated about the up axis
    into the heading frame of the anchor cloud (equivalent to canonicalising
    both, mixing, and restoring the anchor's heading).
    """

    def __init__(self, points: np.ndarray, align: AlignmentConfig | None = None, solver=emd):
        self.points = points
        self.solver = solver
        self.align = align
        self._perm = {}
        if align is not None:
            self.heading = np.array([estimate_heading(p, align)[0] for p in points])
            self.confident = np.array([estimate_heading(p, align)[1] for p in points])

    def partner(self, i: int, j: int) -> np.ndarray:
        y = self.points[j]
        if self.align is None or not (self.confident[i] and self.confident[j]):
            return y
        # rotate j into its canonical frame, then out into i's frame
        angle = self.heading[j] - self.heading[i]
        return y @ rotation_matrix(self.align.up_axis, angle).T

    def perm(self, i: int, j: int) -> np.ndarray:
        if (i, j) not in self._perm:
            if (j, i) in self._perm:
                # matching is rotation invariant, so the reverse pair is the inverse
                back = self._perm[(j, i)]
                fwd = np.empty_like(back)
                fwd[back] = np.arange(back.size)
                self._perm[(i, j)] = fwd
            else:
                self._perm[(i, j)] = self.solver(self.points[i], self.partner(i, j)).perm
        return self._perm[(i, j)]


@dataclass
class History:
    epochs: list = field(default_factory=list)
    loss: list = field(default_factory=list)
    test_acc: list = field(default_factory=list)

    def table(self) -> str:
        lines = ["epoch loss test_acc"]
        for e, l, a in zip(self.epochs, self.loss, self.test_acc):
            lines.append(f"{e} {l:.10g} {a:.10g}")
        return "\n".join(lines) + "\n"


def accuracy(net: ToyNet, data) -> float:
    return float(np.mean(predict(net, data.points) == data.labels))


def train(dataset, cfg: TrainConfig, test=None, cache: PairCache | None = None):
    """Minibatch SGD with momentum; returns ``(net, history)``.

    Jitter (if enabled) perturbs each source cloud; assignments are computed
    once per ordered pair on the clean clouds and reused.  ``test`` (a
    dataset) is evaluated every ``cfg.eval_every`` epochs and after the last;
    other epochs record NaN accuracy.
    """
    rng = np.random.default_rng(cfg.seed)
    C = dataset.num_classes
    net = init_net(C, *cfg.hidden, rng=rng)
    history = History()
    if cfg.epochs == 0:
        return net, history
    if cfg.mixes and cache is None:
        align = AlignmentConfig(up_axis=cfg.up_axis) if cfg.align else None
        cache = PairCache(dataset.points, align)
    eye = np.eye(C)
    velocity = zeros_like_net(net)
    M = len(dataset)
    beta = BetaParams(cfg.gamma)

    for epoch in range(1, cfg.epochs + 1):
        lr = cfg.lr_at(epoch)
        order = rng.permutation(M)
        losses = []
        for start in range(0, M, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            X = dataset.points[idx]
            labels = dataset.labels[idx]
            if cfg.strategy == "label_smoothing":
                T = smooth_labels(labels, C, cfg.smoothing)
            else:
                T = eye[labels]
            mix = None
            if cfg.mixes:
                mate = idx[rng.permutation(len(idx))]
                lam = np.array([sample_lambda(beta, rng) for _ in idx])
                if cfg.strategy == "manifold_mixup":
                    layer = int(rng.choice(LAYERS))
                elif cfg.strategy == "fixed_layer":
                    layer = cfg.mix_layer
                else:
                    layer = 0
                partner = np.stack([cache.partner(i, j) for i, j in zip(idx, mate)])
                perm = np.stack([cache.perm(i, j) for i, j in zip(idx, mate)])
                mix = LatentMix(layer, partner, perm, lam)
                if cfg.strategy != "input_only":
                    T = (1 - lam)[:, None] * T + lam[:, None] * eye[dataset.labels[mate]]
            if cfg.jitter > 0:
                X = X + rng.normal(0.0, cfg.jitter, size=X.shape)
                if mix is not None:
                    mix = replace(mix, partner=mix.partner + rng.normal(0.0, cfg.jitter,
                                                                        size=X.shape))
            loss, grads = loss_and_grad(net, X, T, mix)
            losses.append(loss * len(idx))
            for k in PARAM_NAMES:
                v = getattr(velocity, k)
                v *= cfg.momentum
                v -= lr * getattr(grads, k)
                getattr(net, k)[...] += v
        history.epochs.append(epoch)
        history.loss.append(float(np.sum(losses) / M))
        evaluate = test is not None and (epoch % cfg.eval_every == 0 or epoch == cfg.epochs)
        history.test_acc.append(accuracy(net, test) if evaluate else float("nan"))
    return net, history


# --------------------------------------------------------------------------
# weight files
#
# little-endian: b"PMXW", uint32 version (1), uint32 array count, then per
# array uint32 ndim, ndim x uint32 dims, and float64 values in row-major order.
# Arrays appear in PARAM_NAMES order.

_MAGIC = b"PMXW"


def dumps_weights(net: ToyNet) -> bytes:
    parts = [_MAGIC, struct.pack("<II", 1, len(PARAM_NAMES))]
    for k in PARAM_NAMES:
        arr = np.ascontiguousarray(getattr(net, k), dtype="<f8")
        parts.append(struct.pack(f"<I{arr.ndim}I", arr.ndim, *arr.shape))
        parts.append(arr.tobytes(order="C"))
    return b"".join(parts)


def loads_weights(data: bytes) -> ToyNet:
    if data[:4] != _MAGIC:
        raise InvalidArgumentError("not a weight file (bad magic)")
    version, count = struct.unpack_from("<II", data, 4)
    if version != 1 or count != len(PARAM_NAMES):
        raise InvalidArgumentError(f"unsupported weight file version {version}")
    off = 12
    arrays = {}
    for k in PARAM_NAMES:
        (ndim,) = struct.unpack_from("<I", data, off)
        shape = struct.unpack_from(f"<{ndim}I", data, off + 4)
        off += 4 + 4 * ndim
        size = int(np.prod(shape)) if shape else 1
        arrays[k] = np.frombuffer(data, dtype="<f8", count=size, offset=off).reshape(shape).copy()
        off += 8 * size
    return ToyNet(**arrays)


def save_weights(net: ToyNet, path) -> None:
    with open(path, "wb") as f:
        f.write(dumps_weights(net))


def load_weights(path) -> ToyNet:
    with open(path, "rb") as f:
        return loads_weights(f.read())
