# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-step kernels. See ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def sos_power(double[:, ::1] re, double[:, ::1] im):
    cdef Py_ssize_t n_links = re.shape[0], n = re.shape[1], l, k
    cdef double sr, si
    out = np.empty(n_links)
    cdef double[::1] o = out
    for l in range(n_links):
        sr = 0.0
        si = 0.0
        for k in range(n):
            sr += re[l, k]
            si += im[l, k]
        o[l] = (sr * sr + si * si) / n
    return out


def sos_rotate(double[:, ::1] re, double[:, ::1] im,
               double[:, ::1] rot_re, double[:, ::1] rot_im):
    cdef Py_ssize_t n_links = re.shape[0], n = re.shape[1], l, k
    cdef double a, b
    for l in range(n_links):
        for k in range(n):
            a = re[l, k]
            b = im[l, k]
            re[l, k] = a * rot_re[l, k] - b * rot_im[l, k]
            im[l, k] = b * rot_re[l, k] + a * rot_im[l, k]


def sinr_all(double[:, :, ::1] p_lin, serving, double kb_frac, double noise_lin):
    cdef Py_ssize_t U = p_lin.shape[0], C = p_lin.shape[1], B = p_lin.shape[2]
    cdef Py_ssize_t u, c, b
    cdef double total, denom
    out = np.empty((U, C, B))
    cdef double[:, :, ::1] o = out
    cell = np.empty(C)
    cdef double[::1] pc = cell
    for u in range(U):
        total = 0.0
        for c in range(C):
            pc[c] = 0.0
            for b in range(B):
                pc[c] += p_lin[u, c, b]
            pc[c] *= kb_frac
            total += pc[c]
        for c in range(C):
            denom = noise_lin + (total - pc[c])
            for b in range(B):
                o[u, c, b] = p_lin[u, c, b] / denom
    return out


def serving_sinr(double[:, :, ::1] p_lin, long[::1] serving, long[::1] beam,
                 double kb_frac, double noise_lin):
    cdef Py_ssize_t U = p_lin.shape[0], C = p_lin.shape[1], B = p_lin.shape[2]
    cdef Py_ssize_t u, c, b, s
    cdef double total, own, acc
    out = np.empty(U)
    cdef double[::1] o = out
    for u in range(U):
        s = serving[u]
        total = 0.0
        own = 0.0
        for c in range(C):
            acc = 0.0
            for b in range(B):
                acc += p_lin[u, c, b]
            acc *= kb_frac
            total += acc
            if c == s:
                own = acc
        o[u] = p_lin[u, s, beam[u]] / (noise_lin + (total - own))
    return out


def streak_update(cnp.int32_t[:, ::1] streak, const unsigned char[:, ::1] cond):
    cdef Py_ssize_t n = streak.shape[0], m = streak.shape[1], i, j
    for i in range(n):
        for j in range(m):
            if cond[i, j]:
                streak[i, j] += 1
            else:
                streak[i, j] = 0
