"""Pure-Python (numpy) kernels for the sigmoid MLP.

Parameters live in one flat float64 buffer. Layer ``l`` occupies a
``(sizes[l] + 1) x sizes[l + 1]`` row-major block whose last row is the bias.
Every function here has a twin in ``_ckernels.pyx`` with the same signature.
"""
import numpy as np

NAME = "python"


def _layers(params, sizes):
    views = []
    offset = 0
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        n = (fan_in + 1) * fan_out
        views.append(params[offset:offset + n].reshape(fan_in + 1, fan_out))
        offset += n
    return views


def _sigmoid(z):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


def _forward_one(layers, x):
    acts = [x]
    a = x
    for w in layers:
        a = _sigmoid(a @ w[:-1] + w[-1])
        acts.append(a)
    return acts


def _gradients(layers, x, t):
    acts = _forward_one(layers, x)
    o = acts[-1]
    delta = (o - t) * o * (1.0 - o)
    grads = [None] * len(layers)
    for l in range(len(layers) - 1, -1, -1):
        a_prev = acts[l]
        g = np.empty_like(layers[l])
        g[:-1] = np.outer(a_prev, delta)
        g[-1] = delta
        grads[l] = g
        if l > 0:
            delta = (layers[l][:-1] @ delta) * a_prev * (1.0 - a_prev)
    return grads


def gradient(params, sizes, x, t):
    """Gradient of ``0.5 * sum((t - o)**2)`` for one example, flat layout."""
    grads = _gradients(_layers(params, sizes), x, t)
    return np.concatenate([g.ravel() for g in grads])


def forward_batch(params, sizes, X):
    a = X
    for w in _layers(params, sizes):
        a = _sigmoid(a @ w[:-1] + w[-1])
    return a


def total_error(params, sizes, X, T):
    out = forward_batch(params, sizes, X)
    return 0.5 * float(np.sum((T - out) ** 2))


def train_epoch(params, velocity, sizes, X, T, order, lr, momentum):
    """One online pass over ``order``; updates ``params`` and ``velocity`` in place."""
    layers = _layers(params, sizes)
    vlayers = _layers(velocity, sizes)
    for i in order:
        grads = _gradients(layers, X[i], T[i])
        for w, v, g in zip(layers, vlayers, grads):
            step = momentum * v - lr * g
            w += step
            v[...] = step
