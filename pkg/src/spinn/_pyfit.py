"""Pure-numpy twin of the compiled ``_core`` kernels (same signatures)."""
from __future__ import annotations

import numpy as np

from . import network
from .losses import bce_loss, mse_loss
from .penalties import FAMILIES, PenaltySpec, prox_columns, total_penalty

MSE, BCE, COX = 0, 1, 2
ADAM, SGD = 0, 1


def _views(theta: np.ndarray, dims) -> network.NetworkParams:
    """Parameter arrays that alias ``theta`` (writes go through)."""
    weights, biases = [], []
    pos = 0
    for i in range(len(dims) - 1):
        size = dims[i + 1] * dims[i]
        weights.append(theta[pos:pos + size].reshape(dims[i + 1], dims[i]))
        pos += size
        biases.append(theta[pos:pos + dims[i + 1]])
        pos += dims[i + 1]
    if pos != theta.size:
        raise ValueError("theta does not match dims")
    return network.NetworkParams(weights, biases)


def _cox(pred, event, order, start, end):
    n = pred.size
    s = pred[order]
    delta = event[order]
    e = np.exp(s - s.max())
    denom = np.cumsum(e)[end]
    value = -np.sum(delta * (s - s.max() - np.log(denom))) / n
    suffix = np.cumsum((delta / denom)[::-1])[::-1]
    up = np.empty(n)
    up[order] = -(delta - e * suffix[start]) / n
    return float(value), up


def _loss(kind, pred, y, event, order, start, end):
    if kind == MSE:
        return mse_loss(pred, y)
    if kind == BCE:
        return bce_loss(pred, y)
    return _cox(pred, event, order, start, end)


def _forward_cache(params, X):
    # BLAS matmul, like the compiled kernel; training does not need the
    # bit-exact row consistency of network.forward_batch
    acts, pre = [X], []
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = acts[-1] @ w.T + b
        pre.append(z)
        acts.append(z if i == last else np.maximum(z, 0.0))
    return pre, acts


def _value_and_flat_grad(theta, dims, X, loss_kind, y, event, order, start, end):
    params = _views(theta, dims)
    pre, acts = _forward_cache(params, X)
    pred = acts[-1][:, 0]
    value, up = _loss(loss_kind, pred, y, event, order, start, end)
    grad = network._backward(params, pre, acts, up)
    return value, grad.flatten(), pred


def loss_and_grad(theta, dims, Xt, loss_kind, y, event, order, start, end):
    return _value_and_flat_grad(np.asarray(theta), np.asarray(dims), np.asarray(Xt).T,
                                loss_kind, y, event, order, start, end)


def forward_flat(theta, dims, Xt):
    return network.forward_batch(_views(np.asarray(theta), np.asarray(dims)), np.asarray(Xt).T)


def fit_loop(theta, dims, Xt, loss_kind, y, event, order, start, end,
             family, lam, a, alpha, use_prox, opt_kind, lr, beta1, beta2, eps,
             epochs, tol, window, trace):
    dims = np.asarray(dims)
    X = np.asarray(Xt).T
    params = _views(theta, dims)
    d, rows = int(dims[0]), int(dims[1])
    spec = PenaltySpec(FAMILIES[family], lam, a if family else None)
    do_prox = use_prox and lam > 0.0
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    # m/v entries of the first weight matrix, viewed column-wise
    m0 = m[:rows * d].reshape(rows, d)
    v0 = v[:rows * d].reshape(rows, d)
    steps = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(epochs):
            loss, g, _ = _value_and_flat_grad(theta, dims, X, loss_kind, y, event, order, start, end)
            pen = total_penalty(spec, params.weights[0]) if use_prox else 0.0
            F = loss + pen + alpha * float(np.sum(theta * theta))
            trace[t] = F
            if not np.isfinite(F):
                return steps, t
            if tol > 0.0 and t >= window and abs(F - trace[t - window]) < tol:
                break
            g += 2.0 * alpha * theta
            steps += 1
            if opt_kind == ADAM:
                c1 = 1.0 - beta1 ** steps
                c2 = 1.0 - beta2 ** steps
                m *= beta1
                m += (1.0 - beta1) * g
                v *= beta2
                v += (1.0 - beta2) * g * g
                theta -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
            else:
                theta -= lr * g
            if do_prox:
                w0, s = prox_columns(spec, params.weights[0])
                params.weights[0][...] = w0
                dead = s == 0.0
                m0[:, dead] = 0.0
                v0[:, dead] = 0.0
    if not np.all(np.isfinite(theta)):
        return steps, steps
    return steps, -1
