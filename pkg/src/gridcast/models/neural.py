"""Feed-forward and convolutional nets with hand-written backprop.

Everything runs in float64 so analytic gradients can be checked against
central finite differences tightly. Training is mini-batch gradient
descent with momentum and a plateau-based early stop.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteLoss


def _activation(name: str):
    """Returns (forward, derivative-from-output) for the named nonlinearity."""
    if name == "tanh":
        return np.tanh, lambda a: 1.0 - a * a
    if name == "relu":
        return lambda z: np.maximum(z, 0.0), lambda a: (a > 0).astype(np.float64)
    if name == "identity":
        return lambda z: z, lambda a: np.ones_like(a)
    raise ValueError(f"unknown activation {name!r}")


def _standardize_fit(X: np.ndarray, axis) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=axis, keepdims=True)
    std = X.std(axis=axis, keepdims=True)
    return mean, np.maximum(std, 1e-12)


class _Trainer:
    """Shared minibatch-momentum loop over a flat parameter dict."""

    def __init__(self, lr, momentum, batch_size, n_epochs, patience, rng):
        self.lr, self.momentum = lr, momentum
        self.batch_size, self.n_epochs = batch_size, n_epochs
        self.patience, self.rng = patience, rng

    def run(self, params: dict[str, np.ndarray], n: int, batch_loss_grads,
            full_loss) -> list[float]:
        velocity = {k: np.zeros_like(v) for k, v in params.items()}
        curve: list[float] = []
        best = np.inf
        stall = 0
        for epoch in range(self.n_epochs):
            order = self.rng.permutation(n)
            # overflow here is the divergence signal caught below, not a bug
            with np.errstate(over="ignore", invalid="ignore"):
                for lo in range(0, n, self.batch_size):
                    batch = order[lo:lo + self.batch_size]
                    _, grads = batch_loss_grads(params, batch)
                    for k in params:
                        velocity[k] = self.momentum * velocity[k] - self.lr * grads[k]
                        params[k] += velocity[k]
                loss = full_loss(params)
            if not np.isfinite(loss):
                raise NonFiniteLoss(
                    f"loss diverged at epoch {epoch}; lr={self.lr} is too high")
            curve.append(float(loss))
            if loss < best * (1.0 - 1e-7):
                best, stall = loss, 0
            else:
                stall += 1
                if stall >= self.patience:
                    break
        return curve


# ---------------------------------------------------------------------------
# multilayer perceptron
# ---------------------------------------------------------------------------

def mlp_init(sizes: list[int], rng: np.random.Generator) -> dict[str, np.ndarray]:
    params = {}
    for layer, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        params[f"W{layer}"] = rng.normal(0.0, 1.0 / np.sqrt(fan_in), (fan_in, fan_out))
        params[f"b{layer}"] = np.zeros(fan_out)
    return params


def _mlp_layers(params: dict[str, np.ndarray]) -> int:
    return sum(1 for k in params if k.startswith("W"))


def mlp_forward(params: dict[str, np.ndarray], X: np.ndarray,
                activation: str = "tanh") -> np.ndarray:
    """Raw network output; hidden layers use `activation`, output is linear."""
    act, _ = _activation(activation)
    n_layers = _mlp_layers(params)
    h = np.asarray(X, dtype=np.float64)
    for layer in range(n_layers):
        h = h @ params[f"W{layer}"] + params[f"b{layer}"]
        if layer < n_layers - 1:
            h = act(h)
    return h[:, 0]


def mlp_loss_grads(params: dict[str, np.ndarray], X: np.ndarray, y: np.ndarray,
                   activation: str = "tanh") -> tuple[float, dict[str, np.ndarray]]:
    act, dact = _activation(activation)
    n_layers = _mlp_layers(params)
    n = len(X)
    hs = [np.asarray(X, dtype=np.float64)]
    for layer in range(n_layers):
        z = hs[-1] @ params[f"W{layer}"] + params[f"b{layer}"]
        hs.append(act(z) if layer < n_layers - 1 else z)
    out = hs[-1][:, 0]
    loss = float(np.mean((out - y) ** 2))
    grads = {}
    delta = (2.0 / n) * (out - y)[:, None]
    for layer in range(n_layers - 1, -1, -1):
        grads[f"W{layer}"] = hs[layer].T @ delta
        grads[f"b{layer}"] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ params[f"W{layer}"].T) * dact(hs[layer])
    return loss, grads


@dataclass
class MLPModel:
    params: dict[str, np.ndarray]
    activation: str
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float
    y_std: float
    loss_curve: list[float]

    def predict(self, X: np.ndarray) -> np.ndarray:
        Xs = (np.asarray(X, dtype=np.float64) - self.x_mean) / self.x_std
        return mlp_forward(self.params, Xs, self.activation) * self.y_std + self.y_mean


def fit_mlp(X: np.ndarray, y: np.ndarray, hidden_sizes=(32,),
            activation: str = "tanh", lr: float = 0.05, momentum: float = 0.9,
            batch_size: int = 32, n_epochs: int = 200, patience: int = 20,
            seed: int = 0) -> MLPModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    x_mean, x_std = _standardize_fit(X, axis=0)
    y_mean, y_std = float(y.mean()), float(max(y.std(), 1e-12))
    Xs = (X - x_mean) / x_std
    ys = (y - y_mean) / y_std
    rng = np.random.default_rng(seed)
    sizes = [X.shape[1], *[int(h) for h in hidden_sizes], 1]
    params = mlp_init(sizes, rng)
    trainer = _Trainer(lr, momentum, min(batch_size, len(X)), n_epochs,
                       patience, rng)
    curve = trainer.run(
        params, len(X),
        lambda p, rows: mlp_loss_grads(p, Xs[rows], ys[rows], activation),
        lambda p: mlp_loss_grads(p, Xs, ys, activation)[0])
    return MLPModel(params=params, activation=activation, x_mean=x_mean,
                    x_std=x_std, y_mean=y_mean, y_std=y_std, loss_curve=curve)


# ---------------------------------------------------------------------------
# convolutional net: conv3x3 -> pool -> conv3x3 -> pool -> GAP -> dense
# ---------------------------------------------------------------------------

def _conv_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray):
    n, _, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    out = np.zeros((n, W.shape[0], h, w))
    for di in range(3):
        for dj in range(3):
            patch = xp[:, :, di:di + h, dj:dj + w]
            out += np.tensordot(patch, W[:, :, di, dj],
                                axes=([1], [1])).transpose(0, 3, 1, 2)
    return out + b[None, :, None, None], xp


def _conv_backward(dout: np.ndarray, xp: np.ndarray, W: np.ndarray):
    n, _, h, w = dout.shape
    dW = np.zeros_like(W)
    db = dout.sum(axis=(0, 2, 3))
    dxp = np.zeros_like(xp)
    for di in range(3):
        for dj in range(3):
            patch = xp[:, :, di:di + h, dj:dj + w]
            dW[:, :, di, dj] = np.tensordot(dout, patch, axes=([0, 2, 3], [0, 2, 3]))
            dxp[:, :, di:di + h, dj:dj + w] += np.tensordot(
                dout, W[:, :, di, dj], axes=([1], [0])).transpose(0, 3, 1, 2)
    return dW, db, dxp[:, :, 1:-1, 1:-1]


def _pool_forward(x: np.ndarray):
    n, c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    xr = x[:, :, :2 * h2, :2 * w2].reshape(n, c, h2, 2, w2, 2)
    xr = xr.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h2, w2, 4)
    idx = xr.argmax(axis=-1)
    out = np.take_along_axis(xr, idx[..., None], axis=-1)[..., 0]
    return out, (idx, x.shape)


def _pool_backward(dout: np.ndarray, cache):
    idx, shape = cache
    n, c, h, w = shape
    h2, w2 = h // 2, w // 2
    dxr = np.zeros((n, c, h2, w2, 4))
    np.put_along_axis(dxr, idx[..., None], dout[..., None], axis=-1)
    dxc = dxr.reshape(n, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
    dx = np.zeros(shape)
    dx[:, :, :2 * h2, :2 * w2] = dxc.reshape(n, c, 2 * h2, 2 * w2)
    return dx


def cnn_init(in_channels: int, n_scalars: int, conv_channels=(8, 16),
             dense_size: int = 32,
             rng: np.random.Generator | None = None) -> dict[str, np.ndarray]:
    rng = rng or np.random.default_rng(0)
    c1, c2 = conv_channels
    d_in = c2 + n_scalars
    return {
        "Wc1": rng.normal(0, 1 / np.sqrt(9 * in_channels), (c1, in_channels, 3, 3)),
        "bc1": np.zeros(c1),
        "Wc2": rng.normal(0, 1 / np.sqrt(9 * c1), (c2, c1, 3, 3)),
        "bc2": np.zeros(c2),
        "Wd1": rng.normal(0, 1 / np.sqrt(d_in), (d_in, dense_size)),
        "bd1": np.zeros(dense_size),
        "Wd2": rng.normal(0, 1 / np.sqrt(dense_size), (dense_size, 1)),
        "bd2": np.zeros(1),
    }


def cnn_forward(params: dict[str, np.ndarray], X_img: np.ndarray,
                X_scalar: np.ndarray, activation: str = "tanh") -> np.ndarray:
    act, _ = _activation(activation)
    z1, _ = _conv_forward(np.asarray(X_img, dtype=np.float64),
                          params["Wc1"], params["bc1"])
    p1, _ = _pool_forward(act(z1))
    z2, _ = _conv_forward(p1, params["Wc2"], params["bc2"])
    p2, _ = _pool_forward(act(z2))
    pooled = p2.mean(axis=(2, 3))
    h = np.hstack([pooled, np.asarray(X_scalar, dtype=np.float64)])
    a = act(h @ params["Wd1"] + params["bd1"])
    return (a @ params["Wd2"] + params["bd2"])[:, 0]


def cnn_loss_grads(params: dict[str, np.ndarray], X_img: np.ndarray,
                   X_scalar: np.ndarray, y: np.ndarray,
                   activation: str = "tanh") -> tuple[float, dict[str, np.ndarray]]:
    act, dact = _activation(activation)
    X_img = np.asarray(X_img, dtype=np.float64)
    X_scalar = np.asarray(X_scalar, dtype=np.float64)
    n = len(X_img)

    z1, xp1 = _conv_forward(X_img, params["Wc1"], params["bc1"])
    a1 = act(z1)
    p1, m1 = _pool_forward(a1)
    z2, xp2 = _conv_forward(p1, params["Wc2"], params["bc2"])
    a2 = act(z2)
    p2, m2 = _pool_forward(a2)
    pooled = p2.mean(axis=(2, 3))
    h = np.hstack([pooled, X_scalar])
    ad = act(h @ params["Wd1"] + params["bd1"])
    out = (ad @ params["Wd2"] + params["bd2"])[:, 0]
    loss = float(np.mean((out - y) ** 2))

    grads = {}
    delta = (2.0 / n) * (out - y)[:, None]
    grads["Wd2"] = ad.T @ delta
    grads["bd2"] = delta.sum(axis=0)
    dad = (delta @ params["Wd2"].T) * dact(ad)
    grads["Wd1"] = h.T @ dad
    grads["bd1"] = dad.sum(axis=0)
    dh = dad @ params["Wd1"].T
    c2 = pooled.shape[1]
    hw = p2.shape[2] * p2.shape[3]
    dp2 = np.broadcast_to((dh[:, :c2] / hw)[:, :, None, None], p2.shape)
    da2 = _pool_backward(dp2, m2) * dact(a2)
    grads["Wc2"], grads["bc2"], dp1 = _conv_backward(da2, xp2, params["Wc2"])
    da1 = _pool_backward(dp1, m1) * dact(a1)
    grads["Wc1"], grads["bc1"], _ = _conv_backward(da1, xp1, params["Wc1"])
    return loss, grads


@dataclass
class CNNModel:
    params: dict[str, np.ndarray]
    activation: str
    img_mean: np.ndarray    # (1, c, 1, 1)
    img_std: np.ndarray
    scalar_mean: np.ndarray  # (1, s)
    scalar_std: np.ndarray
    y_mean: float
    y_std: float
    loss_curve: list[float]

    def predict(self, X_img: np.ndarray, X_scalar: np.ndarray) -> np.ndarray:
        imgs = (np.asarray(X_img, dtype=np.float64) - self.img_mean) / self.img_std
        scalars = (np.asarray(X_scalar, dtype=np.float64) - self.scalar_mean) / self.scalar_std
        out = cnn_forward(self.params, imgs, scalars, self.activation)
        return out * self.y_std + self.y_mean


def fit_cnn(X_img: np.ndarray, X_scalar: np.ndarray, y: np.ndarray,
            conv_channels=(8, 16), dense_size: int = 32,
            activation: str = "tanh", lr: float = 0.01, momentum: float = 0.9,
            batch_size: int = 16, n_epochs: int = 60, patience: int = 10,
            seed: int = 0) -> CNNModel:
    X_img = np.asarray(X_img, dtype=np.float64)
    X_scalar = np.asarray(X_scalar, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X_img.shape[2] < 4 or X_img.shape[3] < 4:
        raise ValueError(f"images {X_img.shape[2:]} too small for two 2x2 pools")
    img_mean, img_std = _standardize_fit(X_img, axis=(0, 2, 3))
    scalar_mean, scalar_std = _standardize_fit(X_scalar, axis=0)
    y_mean, y_std = float(y.mean()), float(max(y.std(), 1e-12))
    imgs = (X_img - img_mean) / img_std
    scalars = (X_scalar - scalar_mean) / scalar_std
    ys = (y - y_mean) / y_std
    rng = np.random.default_rng(seed)
    params = cnn_init(X_img.shape[1], X_scalar.shape[1],
                      conv_channels=tuple(int(c) for c in conv_channels),
                      dense_size=int(dense_size), rng=rng)
    trainer = _Trainer(lr, momentum, min(batch_size, len(y)), n_epochs,
                       patience, rng)
    curve = trainer.run(
        params, len(y),
        lambda p, rows: cnn_loss_grads(p, imgs[rows], scalars[rows], ys[rows],
                                       activation),
        lambda p: float(np.mean((cnn_forward(p, imgs, scalars, activation) - ys) ** 2)))
    return CNNModel(params=params, activation=activation, img_mean=img_mean,
                    img_std=img_std, scalar_mean=scalar_mean,
                    scalar_std=scalar_std, y_mean=y_mean, y_std=y_std,
                    loss_curve=curve)


def gradient_check(loss_and_grads, params: dict[str, np.ndarray],
                   n_samples: int = 5, step: float = 1e-5,
                   rng: np.random.Generator | None = None) -> float:
    """Worst relative error between analytic and central-difference gradients."""
    rng = rng or np.random.default_rng(0)
    _, grads = loss_and_grads(params)
    worst = 0.0
    for key in sorted(params):
        flat = params[key].reshape(-1)
        gflat = grads[key].reshape(-1)
        for i in rng.choice(flat.size, min(n_samples, flat.size), replace=False):
            orig = flat[i]
            flat[i] = orig + step
            up, _ = loss_and_grads(params)
            flat[i] = orig - step
            down, _ = loss_and_grads(params)
            flat[i] = orig
            fd = (up - down) / (2 * step)
            worst = max(worst, abs(gflat[i] - fd) / max(abs(gflat[i]), abs(fd), 1e-8))
    return worst
