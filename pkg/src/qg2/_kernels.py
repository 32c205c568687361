"""Compiled inner kernels for the iterative solvers.

The 5-diagonal matvec and the full CG/BiCGStab iteration loops are jitted
with numba when it is available; pure-numpy fallbacks in linsolve keep the
package functional without it. All reductions run in a fixed sequential
order, so results are deterministic run to run (the two backends may differ
from each other at roundoff, but each is self-consistent).

Kernels return a status code instead of raising:
  0  converged, reported norm is the true residual norm
  1  iteration cap reached (reported norm is recursive)
  2  breakdown: vanishing inner product before convergence
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is normally present
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def matvec(diag, east, west, north, south, v, out):
    ny, nx = v.shape
    for j in range(ny):
        for i in range(nx):
            s = diag[j, i] * v[j, i]
            if i + 1 < nx:
                s += east[j, i] * v[j, i + 1]
            if i > 0:
                s += west[j, i] * v[j, i - 1]
            if j + 1 < ny:
                s += north[j, i] * v[j + 1, i]
            if j > 0:
                s += south[j, i] * v[j - 1, i]
            out[j, i] = s


@njit(cache=True)
def _dot(a, b):
    ny, nx = a.shape
    s = 0.0
    for j in range(ny):
        for i in range(nx):
            s += a[j, i] * b[j, i]
    return s


@njit(cache=True)
def cg(diag, east, west, north, south, b, x, tol_abs, max_iter):
    """Jacobi-preconditioned CG on the pentadiagonal system."""
    ny, nx = b.shape
    r = np.empty((ny, nx))
    matvec(diag, east, west, north, south, x, r)
    for j in range(ny):
        for i in range(nx):
            r[j, i] = b[j, i] - r[j, i]
    rnorm = np.sqrt(_dot(r, r))
    if rnorm <= tol_abs:
        return 0, rnorm, 0

    z = np.empty((ny, nx))
    p = np.empty((ny, nx))
    ap = np.empty((ny, nx))
    for j in range(ny):
        for i in range(nx):
            z[j, i] = r[j, i] / diag[j, i]
            p[j, i] = z[j, i]
    rz = _dot(r, z)
    iters = 0
    while iters < max_iter:
        matvec(diag, east, west, north, south, p, ap)
        pap = _dot(p, ap)
        if pap <= 0.0:
            return iters, rnorm, 2
        alpha = rz / pap
        for j in range(ny):
            for i in range(nx):
                x[j, i] += alpha * p[j, i]
                r[j, i] -= alpha * ap[j, i]
        iters += 1
        rnorm = np.sqrt(_dot(r, r))
        if rnorm <= tol_abs:
            return iters, rnorm, 1
        rz_new = 0.0
        for j in range(ny):
            for i in range(nx):
                z[j, i] = r[j, i] / diag[j, i]
                rz_new += r[j, i] * z[j, i]
        beta = rz_new / rz
        rz = rz_new
        for j in range(ny):
            for i in range(nx):
                p[j, i] = z[j, i] + beta * p[j, i]
    return iters, rnorm, 1


@njit(cache=True)
def bicgstab(diag, east, west, north, south, b, x, tol_abs, max_iter):
    """Jacobi-preconditioned BiCGStab on the pentadiagonal system."""
    ny, nx = b.shape
    r = np.empty((ny, nx))
    matvec(diag, east, west, north, south, x, r)
    for j in range(ny):
        for i in range(nx):
            r[j, i] = b[j, i] - r[j, i]
    rnorm = np.sqrt(_dot(r, r))
    if rnorm <= tol_abs:
        return 0, rnorm, 0

    r0 = r.copy()
    v = np.zeros((ny, nx))
    p = np.zeros((ny, nx))
    phat = np.empty((ny, nx))
    shat = np.empty((ny, nx))
    t = np.empty((ny, nx))
    rho = 1.0
    alpha = 1.0
    omega = 1.0
    tiny = 1e-300
    iters = 0
    while iters < max_iter:
        rho_new = _dot(r0, r)
        if abs(rho_new) < tiny or abs(omega) < tiny:
            return iters, rnorm, 2
        beta = (rho_new / rho) * (alpha / omega)
        rho = rho_new
        for j in range(ny):
            for i in range(nx):
                p[j, i] = r[j, i] + beta * (p[j, i] - omega * v[j, i])
                phat[j, i] = p[j, i] / diag[j, i]
        matvec(diag, east, west, north, south, phat, v)
        denom = _dot(r0, v)
        if abs(denom) < tiny:
            return iters, rnorm, 2
        alpha = rho / denom
        for j in range(ny):
            for i in range(nx):
                r[j, i] -= alpha * v[j, i]  # r now holds s
        iters += 1
        snorm = np.sqrt(_dot(r, r))
        if snorm <= tol_abs:
            for j in range(ny):
                for i in range(nx):
                    x[j, i] += alpha * phat[j, i]
            return iters, snorm, 1
        for j in range(ny):
            for i in range(nx):
                shat[j, i] = r[j, i] / diag[j, i]
        matvec(diag, east, west, north, south, shat, t)
        tt = _dot(t, t)
        if tt < tiny:
            return iters, snorm, 2
        omega = _dot(t, r) / tt
        for j in range(ny):
            for i in range(nx):
                x[j, i] += alpha * phat[j, i] + omega * shat[j, i]
                r[j, i] -= omega * t[j, i]
        rnorm = np.sqrt(_dot(r, r))
        if rnorm <= tol_abs:
            return iters, rnorm, 1
    return iters, rnorm, 1
