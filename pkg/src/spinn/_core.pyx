# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled training kernels.

Parameters travel as one flat float64 vector laid out ``W0, b0, W1, b1, ...``
with row-major weights, which is the column-major ``(in, out)`` matrix BLAS
expects. Activations are stored feature-major: a layer of width ``m`` on
``n`` rows occupies ``m * n`` doubles, column-major ``(n, m)``.

Must stay step-for-step in sync with ``_pyfit``.
"""
import numpy as np

from libc.math cimport exp, log, log1p, sqrt, fabs, pow, isfinite
from libc.string cimport memset, memcpy
from scipy.linalg.cython_blas cimport dgemm

cdef enum:
    MSE = 0
    BCE = 1
    COX = 2

cdef enum:
    LASSO = 0
    MCP = 1
    SCAD = 2

cdef enum:
    ADAM = 0
    SGD = 1


cdef struct Layout:
    int L
    int n
    Py_ssize_t* dims
    Py_ssize_t* woff
    Py_ssize_t* boff
    Py_ssize_t* zoff


cdef class _Workspace:
    cdef Layout lay
    cdef Py_ssize_t[::1] dims, woff, boff, zoff
    cdef double[::1] Z, A, D1, D2, up, work
    cdef Py_ssize_t size

    def __init__(self, Py_ssize_t[::1] dims, int n):
        cdef int L = dims.shape[0] - 1
        cdef int l
        cdef Py_ssize_t pos = 0, zpos = 0, widest = 1
        self.dims = dims
        self.woff = np.zeros(L, dtype=np.intp)
        self.boff = np.zeros(L, dtype=np.intp)
        self.zoff = np.zeros(L, dtype=np.intp)
        for l in range(L):
            self.woff[l] = pos
            pos += dims[l] * dims[l + 1]
            self.boff[l] = pos
            pos += dims[l + 1]
            self.zoff[l] = zpos
            zpos += n * dims[l + 1]
            if dims[l + 1] > widest:
                widest = dims[l + 1]
            if l > 0 and dims[l] > widest:
                widest = dims[l]
        self.size = pos
        self.Z = np.zeros(zpos)
        self.A = np.zeros(zpos)
        self.D1 = np.zeros(n * widest)
        self.D2 = np.zeros(n * widest)
        self.up = np.zeros(n)
        self.work = np.zeros(3 * n)
        self.lay.L = L
        self.lay.n = n
        self.lay.dims = &self.dims[0]
        self.lay.woff = &self.woff[0] if L else NULL
        self.lay.boff = &self.boff[0] if L else NULL
        self.lay.zoff = &self.zoff[0] if L else NULL


cdef void _forward(Layout* lay, const double* theta, const double* Xt,
                   double* Z, double* A) noexcept nogil:
    cdef char N = b'N'
    cdef double one = 1.0, zero = 0.0
    cdef int n = lay.n, nin, nout, l
    cdef Py_ssize_t i, j, idx
    cdef const double* inp
    cdef double* z
    cdef double* a
    cdef double bj
    for l in range(lay.L):
        nin = <int>lay.dims[l]
        nout = <int>lay.dims[l + 1]
        inp = Xt if l == 0 else A + lay.zoff[l - 1]
        z = Z + lay.zoff[l]
        if nin > 0:
            dgemm(&N, &N, &n, &nout, &nin, &one, <double*>inp, &n,
                  <double*>(theta + lay.woff[l]), &nin, &zero, z, &n)
        else:
            memset(z, 0, n * nout * sizeof(double))
        for j in range(nout):
            bj = theta[lay.boff[l] + j]
            for i in range(n):
                z[j * n + i] += bj
        if l < lay.L - 1:
            a = A + lay.zoff[l]
            for idx in range(n * nout):
                a[idx] = z[idx] if z[idx] > 0.0 else 0.0


cdef void _backward(Layout* lay, const double* theta, const double* Xt,
                    const double* Z, const double* A, const double* up,
                    double* D1, double* D2, double* grad) noexcept nogil:
    cdef char N = b'N', T = b'T'
    cdef double one = 1.0, zero = 0.0
    cdef int n = lay.n, nin, nout, l
    cdef Py_ssize_t i, j, idx
    cdef const double* inp
    cdef const double* zprev
    cdef double* cur = D1
    cdef double* prev = D2
    cdef double* tmp
    cdef double s
    memcpy(cur, up, n * sizeof(double))
    for l in range(lay.L - 1, -1, -1):
        nin = <int>lay.dims[l]
        nout = <int>lay.dims[l + 1]
        inp = Xt if l == 0 else A + lay.zoff[l - 1]
        if nin > 0:
            dgemm(&T, &N, &nin, &nout, &n, &one, <double*>inp, &n, cur, &n,
                  &zero, grad + lay.woff[l], &nin)
        for j in range(nout):
            s = 0.0
            for i in range(n):
                s += cur[j * n + i]
            grad[lay.boff[l] + j] = s
        if l > 0:
            dgemm(&N, &T, &n, &nin, &nout, &one, cur, &n,
                  <double*>(theta + lay.woff[l]), &nin, &zero, prev, &n)
            zprev = Z + lay.zoff[l - 1]
            for idx in range(n * nin):
                if zprev[idx] <= 0.0:
                    prev[idx] = 0.0
            tmp = cur
            cur = prev
            prev = tmp


cdef double _loss(int kind, int n, const double* pred, const double* y,
                  const double* event, const Py_ssize_t* order,
                  const Py_ssize_t* start, const Py_ssize_t* end,
                  double* up, double* work) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double v = 0.0, r, s, e, shift, acc
    cdef double* ex
    cdef double* cum
    cdef double* suffix
    if kind == MSE:
        for i in range(n):
            r = pred[i] - y[i]
            v += r * r
            up[i] = 2.0 * r / n
        return v / n
    if kind == BCE:
        for i in range(n):
            s = pred[i]
            v += (s if s > 0.0 else 0.0) + log1p(exp(-fabs(s))) - y[i] * s
            if s >= 0.0:
                e = 1.0 / (1.0 + exp(-s))
            else:
                e = exp(s)
                e = e / (1.0 + e)
            up[i] = (e - y[i]) / n
        return v / n
    # Cox partial likelihood over rows sorted by decreasing time
    ex = work
    cum = work + n
    suffix = work + 2 * n
    shift = pred[order[0]]
    for k in range(1, n):
        if pred[order[k]] > shift:
            shift = pred[order[k]]
    acc = 0.0
    for k in range(n):
        ex[k] = exp(pred[order[k]] - shift)
        acc += ex[k]
        cum[k] = acc
    acc = 0.0
    for k in range(n - 1, -1, -1):
        if event[order[k]] != 0.0:
            v += event[order[k]] * (pred[order[k]] - shift - log(cum[end[k]]))
            acc += event[order[k]] / cum[end[k]]
        suffix[k] = acc
    for k in range(n):
        up[order[k]] = -(event[order[k]] - ex[k] * suffix[start[k]]) / n
    return -v / n


cdef inline double _shrink(int family, double r, double lam, double a) noexcept nogil:
    cdef double soft, lam2
    if r == 0.0:
        return 0.0
    soft = 1.0 - lam / r if r > lam else 0.0
    if family == LASSO:
        return soft
    if family == MCP:
        return a / (a - 1.0) * soft if r <= a * lam else 1.0
    if r <= 2.0 * lam:
        return soft
    if r <= a * lam:
        lam2 = a * lam / (a - 1.0)
        return (a - 1.0) / (a - 2.0) * (1.0 - lam2 / r if r > lam2 else 0.0)
    return 1.0


cdef inline double _rho(int family, double t, double lam, double a) noexcept nogil:
    if family == LASSO:
        return lam * t
    if family == MCP:
        return lam * t - t * t / (2.0 * a) if t <= a * lam else 0.5 * a * lam * lam
    if t <= lam:
        return lam * t
    if t <= a * lam:
        return -(t * t - 2.0 * a * lam * t + lam * lam) / (2.0 * (a - 1.0))
    return 0.5 * (a + 1.0) * lam * lam


cdef inline double _colnorm(const double* W0, Py_ssize_t rows, Py_ssize_t d, Py_ssize_t j) noexcept nogil:
    cdef double s = 0.0, w
    cdef Py_ssize_t r
    for r in range(rows):
        w = W0[r * d + j]
        s += w * w
    return sqrt(s)


def loss_and_grad(double[::1] theta, Py_ssize_t[::1] dims, double[:, ::1] Xt,
                  int loss_kind, double[::1] y, double[::1] event,
                  Py_ssize_t[::1] order, Py_ssize_t[::1] start, Py_ssize_t[::1] end):
    """Loss value, flat gradient and predictions at ``theta``."""
    cdef int n = Xt.shape[1]
    cdef _Workspace ws = _Workspace(dims, n)
    if theta.shape[0] != ws.size:
        raise ValueError("theta does not match dims")
    grad = np.zeros(ws.size)
    cdef double[::1] g = grad
    cdef double value
    cdef const double* xp = &Xt[0, 0] if Xt.shape[0] > 0 else NULL
    with nogil:
        _forward(&ws.lay, &theta[0], xp, &ws.Z[0], &ws.A[0])
        value = _loss(loss_kind, n, &ws.Z[ws.zoff[ws.lay.L - 1]], &y[0], &event[0],
                      &order[0], &start[0], &end[0], &ws.up[0], &ws.work[0])
        _backward(&ws.lay, &theta[0], xp, &ws.Z[0], &ws.A[0], &ws.up[0],
                  &ws.D1[0], &ws.D2[0], &g[0])
    pred = np.asarray(ws.Z[ws.zoff[ws.lay.L - 1]:ws.zoff[ws.lay.L - 1] + n]).copy()
    return value, grad, pred


def fit_loop(double[::1] theta, Py_ssize_t[::1] dims, double[:, ::1] Xt,
             int loss_kind, double[::1] y, double[::1] event,
             Py_ssize_t[::1] order, Py_ssize_t[::1] start, Py_ssize_t[::1] end,
             int family, double lam, double a, double alpha, bint use_prox,
             int opt_kind, double lr, double beta1, double beta2, double eps,
             int epochs, double tol, int window, double[::1] trace):
    """Run composite gradient epochs in place on ``theta``.

    Returns ``(epochs_run, diverged_at)`` with ``diverged_at == -1`` on success.
    ``trace[t]`` receives the objective at the start of epoch ``t``.
    """
    cdef int n = Xt.shape[1]
    cdef _Workspace ws = _Workspace(dims, n)
    cdef Py_ssize_t P = ws.size
    if theta.shape[0] != P:
        raise ValueError("theta does not match dims")
    grad_arr = np.zeros(P)
    m_arr = np.zeros(P)
    v_arr = np.zeros(P)
    cdef double[::1] g = grad_arr
    cdef double[::1] m = m_arr
    cdef double[::1] v = v_arr
    cdef Py_ssize_t d = dims[0], rows = dims[1]
    cdef Py_ssize_t i, j, r, idx
    cdef int t, steps = 0, diverged = -1
    cdef double loss, pen, reg, F, c1, c2, mhat, vhat, s
    cdef double* W0 = &theta[0]
    cdef const double* xp = &Xt[0, 0] if Xt.shape[0] > 0 else NULL
    cdef double* pred = &ws.Z[ws.zoff[ws.lay.L - 1]]
    cdef bint do_prox = use_prox and lam > 0.0

    with nogil:
        for t in range(epochs):
            _forward(&ws.lay, &theta[0], xp, &ws.Z[0], &ws.A[0])
            loss = _loss(loss_kind, n, pred, &y[0], &event[0], &order[0],
                         &start[0], &end[0], &ws.up[0], &ws.work[0])
            _backward(&ws.lay, &theta[0], xp, &ws.Z[0], &ws.A[0], &ws.up[0],
                      &ws.D1[0], &ws.D2[0], &g[0])
            reg = 0.0
            for i in range(P):
                reg += theta[i] * theta[i]
            pen = 0.0
            if use_prox:
                for j in range(d):
                    pen += _rho(family, _colnorm(W0, rows, d, j), lam, a)
            F = loss + pen + alpha * reg
            trace[t] = F
            if not isfinite(F):
                diverged = t
                break
            if tol > 0.0 and t >= window and fabs(F - trace[t - window]) < tol:
                break
            for i in range(P):
                g[i] += 2.0 * alpha * theta[i]
            steps += 1
            if opt_kind == ADAM:
                c1 = 1.0 - pow(beta1, steps)
                c2 = 1.0 - pow(beta2, steps)
                for i in range(P):
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
                    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i]
                    mhat = m[i] / c1
                    vhat = v[i] / c2
                    theta[i] -= lr * mhat / (sqrt(vhat) + eps)
            else:
                for i in range(P):
                    theta[i] -= lr * g[i]
            if do_prox:
                for j in range(d):
                    s = _shrink(family, _colnorm(W0, rows, d, j), lam, a)
                    if s != 1.0:
                        for r in range(rows):
                            idx = r * d + j
                            W0[idx] = s * W0[idx]
                    if s == 0.0:
                        for r in range(rows):
                            idx = r * d + j
                            m[idx] = 0.0
                            v[idx] = 0.0
        if diverged < 0:
            for i in range(P):
                if not isfinite(theta[i]):
                    diverged = steps
                    break
    return steps, diverged


def forward_flat(double[::1] theta, Py_ssize_t[::1] dims, double[:, ::1] Xt):
    cdef int n = Xt.shape[1]
    cdef _Workspace ws = _Workspace(dims, n)
    cdef const double* xp = &Xt[0, 0] if Xt.shape[0] > 0 else NULL
    with nogil:
        _forward(&ws.lay, &theta[0], xp, &ws.Z[0], &ws.A[0])
    return np.asarray(ws.Z[ws.zoff[ws.lay.L - 1]:ws.zoff[ws.lay.L - 1] + n]).copy()
