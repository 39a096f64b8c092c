# cython: language_level=3
"""Compiled kernels for the sigmoid MLP; same contracts as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

NAME = "cython"


cdef inline double _sigmoid(double z) noexcept nogil:
    return 1.0 / (1.0 + exp(-z))


cdef void _forward(const double* p, const Py_ssize_t* sizes, Py_ssize_t nlayers,
                   const Py_ssize_t* p_off, const Py_ssize_t* a_off,
                   double* acts) noexcept nogil:
    cdef Py_ssize_t l, j, k, fan_in, fan_out
    cdef const double* w
    cdef double z
    for l in range(nlayers):
        fan_in = sizes[l]
        fan_out = sizes[l + 1]
        w = p + p_off[l]
        for j in range(fan_out):
            z = 0.0
            for k in range(fan_in):
                z = z + acts[a_off[l] + k] * w[k * fan_out + j]
            z = z + w[fan_in * fan_out + j]
            acts[a_off[l + 1] + j] = _sigmoid(z)


cdef class _Layout:
    cdef Py_ssize_t nlayers
    cdef Py_ssize_t[::1] sizes
    cdef Py_ssize_t[::1] p_off
    cdef Py_ssize_t[::1] a_off
    cdef Py_ssize_t n_acts

    def __init__(self, sizes):
        cdef Py_ssize_t l
        s = np.ascontiguousarray(sizes, dtype=np.intp)
        self.nlayers = s.shape[0] - 1
        self.sizes = s
        self.p_off = np.zeros(self.nlayers + 1, dtype=np.intp)
        self.a_off = np.zeros(self.nlayers + 2, dtype=np.intp)
        for l in range(self.nlayers):
            self.p_off[l + 1] = self.p_off[l] + (s[l] + 1) * s[l + 1]
        for l in range(self.nlayers + 1):
            self.a_off[l + 1] = self.a_off[l] + s[l]
        self.n_acts = self.a_off[self.nlayers + 1]


def forward_batch(double[::1] params, sizes, const double[:, ::1] X):
    cdef _Layout lay = _Layout(sizes)
    cdef Py_ssize_t n = X.shape[0], i, k
    cdef Py_ssize_t n_in = lay.sizes[0], n_out = lay.sizes[lay.nlayers]
    cdef Py_ssize_t out_off = lay.a_off[lay.nlayers]
    out = np.empty((n, n_out), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[::1] acts = np.empty(lay.n_acts, dtype=np.float64)
    with nogil:
        for i in range(n):
            for k in range(n_in):
                acts[k] = X[i, k]
            _forward(&params[0], &lay.sizes[0], lay.nlayers, &lay.p_off[0],
                     &lay.a_off[0], &acts[0])
            for k in range(n_out):
                o[i, k] = acts[out_off + k]
    return out


# Whole-set error is a batched matrix product; numpy's BLAS path beats a scalar loop.
from ._pykernels import total_error


def train_epoch(double[::1] params, double[::1] velocity, sizes,
                const double[:, ::1] X, const double[:, ::1] T,
                const Py_ssize_t[::1] order, double lr, double momentum):
    cdef _Layout lay = _Layout(sizes)
    cdef Py_ssize_t L = lay.nlayers
    cdef Py_ssize_t n_in = lay.sizes[0]
    cdef double[::1] acts = np.empty(lay.n_acts, dtype=np.float64)
    cdef double[::1] delta = np.empty(lay.n_acts, dtype=np.float64)
    cdef Py_ssize_t idx, i, l, j, k, fan_in, fan_out, po, ao_in, ao_out
    cdef double o, a, s, g, step
    with nogil:
        for idx in range(order.shape[0]):
            i = order[idx]
            for k in range(n_in):
                acts[k] = X[i, k]
            _forward(&params[0], &lay.sizes[0], L, &lay.p_off[0],
                     &lay.a_off[0], &acts[0])
            # output deltas
            ao_out = lay.a_off[L]
            for j in range(lay.sizes[L]):
                o = acts[ao_out + j]
                delta[ao_out + j] = (o - T[i, j]) * o * (1.0 - o)
            # hidden deltas, all from pre-update weights
            for l in range(L - 1, 0, -1):
                fan_in = lay.sizes[l]
                fan_out = lay.sizes[l + 1]
                po = lay.p_off[l]
                ao_in = lay.a_off[l]
                ao_out = lay.a_off[l + 1]
                for k in range(fan_in):
                    s = 0.0
                    for j in range(fan_out):
                        s = s + params[po + k * fan_out + j] * delta[ao_out + j]
                    a = acts[ao_in + k]
                    delta[ao_in + k] = s * a * (1.0 - a)
            for l in range(L):
                fan_in = lay.sizes[l]
                fan_out = lay.sizes[l + 1]
                po = lay.p_off[l]
                ao_in = lay.a_off[l]
                ao_out = lay.a_off[l + 1]
                for k in range(fan_in + 1):
                    for j in range(fan_out):
                        if k < fan_in:
                            g = acts[ao_in + k] * delta[ao_out + j]
                        else:
                            g = delta[ao_out + j]
                        step = momentum * velocity[po + k * fan_out + j] - lr * g
                        params[po + k * fan_out + j] += step
                        velocity[po + k * fan_out + j] = step
