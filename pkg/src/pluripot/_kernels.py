"""Hot numeric kernels, in two flavors.

Two inner loops dominate runtime: red-black successive over-relaxation sweeps
for the grid Dirichlet solves, and the projected-gradient loop of the
simplex-constrained energy minimizer.  Each has a numba scalar-loop kernel
(cache=True, nogil=True so batches can thread) and a vectorized pure-numpy
fallback; _backend.USE_NUMBA picks the flavor at import time.

Grid data layout (all (ny, nx) float64, index order [iy, ix]):
    aN/aS/aE/aW  neighbor weights; 0 where the arm is cut by the boundary
    bconst       sum over cut arms of weight * boundary value
    den          sum of the four full stencil weights (> 0 on free nodes)
The five-point update at a free node is
    num  = aN*u[iy+1,ix] + aS*u[iy-1,ix] + aE*u[iy,ix+1] + aW*u[iy,ix-1] + bconst
    unew = u + omega * (num/den - u)
and the normalized residual is |num - den*u| / den.
"""

import numpy as np

from ._backend import USE_NUMBA

if USE_NUMBA:
    from numba import njit
else:
    njit = None


# ---------------------------------------------------------------- SOR sweeps

if USE_NUMBA:

    @njit(cache=True, nogil=True)
    def _sor_numba(u, red_iy, red_ix, blk_iy, blk_ix, aN, aS, aE, aW,
                   bconst, den, omega, tol, max_sweeps, check_every,
                   clamp_lo, clamp_hi):
        sweeps = 0
        resid = np.inf
        for sweep in range(max_sweeps):
            for color in range(2):
                iys = red_iy if color == 0 else blk_iy
                ixs = red_ix if color == 0 else blk_ix
                for k in range(iys.shape[0]):
                    iy = iys[k]
                    ix = ixs[k]
                    num = (aN[iy, ix] * u[iy + 1, ix]
                           + aS[iy, ix] * u[iy - 1, ix]
                           + aE[iy, ix] * u[iy, ix + 1]
                           + aW[iy, ix] * u[iy, ix - 1]
                           + bconst[iy, ix])
                    un = u[iy, ix] + omega * (num / den[iy, ix] - u[iy, ix])
                    if un < clamp_lo:
                        un = clamp_lo
                    elif un > clamp_hi:
                        un = clamp_hi
                    u[iy, ix] = un
            sweeps = sweep + 1
            if sweeps % check_every == 0 or sweeps == max_sweeps:
                resid = 0.0
                for color in range(2):
                    iys = red_iy if color == 0 else blk_iy
                    ixs = red_ix if color == 0 else blk_ix
                    for k in range(iys.shape[0]):
                        iy = iys[k]
                        ix = ixs[k]
                        num = (aN[iy, ix] * u[iy + 1, ix]
                               + aS[iy, ix] * u[iy - 1, ix]
                               + aE[iy, ix] * u[iy, ix + 1]
                               + aW[iy, ix] * u[iy, ix - 1]
                               + bconst[iy, ix])
                        r = abs(num - den[iy, ix] * u[iy, ix]) / den[iy, ix]
                        if r > resid:
                            resid = r
                if resid < tol:
                    break
        return sweeps, resid


def _sor_numpy(u, red, blk, aN, aS, aE, aW, bconst, den, omega, tol,
               max_sweeps, check_every, clamp_lo, clamp_hi):
    free = red | blk
    sweeps = 0
    resid = np.inf
    for sweep in range(max_sweeps):
        for mask in (red, blk):
            vN = np.roll(u, -1, axis=0)
            vS = np.roll(u, 1, axis=0)
            vE = np.roll(u, -1, axis=1)
            vW = np.roll(u, 1, axis=1)
            num = aN * vN + aS * vS + aE * vE + aW * vW + bconst
            un = u + omega * (num / den - u)
            np.clip(un, clamp_lo, clamp_hi, out=un)
            u[mask] = un[mask]
        sweeps = sweep + 1
        if sweeps % check_every == 0 or sweeps == max_sweeps:
            vN = np.roll(u, -1, axis=0)
            vS = np.roll(u, 1, axis=0)
            vE = np.roll(u, -1, axis=1)
            vW = np.roll(u, 1, axis=1)
            num = aN * vN + aS * vS + aE * vE + aW * vW + bconst
            r = np.abs(num - den * u) / den
            resid = float(r[free].max()) if free.any() else 0.0
            if resid < tol:
                break
    return sweeps, resid


def sor_solve(u, free, aN, aS, aE, aW, bconst, den, omega=None, tol=1e-8,
              max_sweeps=100000, check_every=50, clamp=None):
    """Relax u in place on the free nodes; return (sweeps, residual).

    den must be strictly positive on free nodes (it is padded to 4.0
    elsewhere by the grid builders so the vectorized path never divides
    by zero).
    """
    ny, nx = u.shape
    if omega is None:
        omega = 2.0 / (1.0 + np.sin(np.pi / max(nx, ny)))
    clamp_lo, clamp_hi = (-np.inf, np.inf) if clamp is None else clamp
    iy, ix = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
    red = free & ((iy + ix) % 2 == 0)
    blk = free & ((iy + ix) % 2 == 1)
    if USE_NUMBA:
        riy, rix = np.nonzero(red)
        biy, bix = np.nonzero(blk)
        sweeps, resid = _sor_numba(
            u, riy, rix, biy, bix, aN, aS, aE, aW, bconst, den,
            float(omega), float(tol), int(max_sweeps), int(check_every),
            float(clamp_lo), float(clamp_hi))
    else:
        sweeps, resid = _sor_numpy(
            u, red, blk, aN, aS, aE, aW, bconst, den, float(omega),
            float(tol), int(max_sweeps), int(check_every),
            float(clamp_lo), float(clamp_hi))
    return int(sweeps), float(resid)


# --------------------------------------------- simplex-constrained descent

def _project_simplex_np(v):
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.shape[0] + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _pgd_numpy(A, tol, max_iter, stall_window, stall_tol):
    n = A.shape[0]
    w = np.full(n, 1.0 / n)
    # power iteration (mean-deflated) for the gradient Lipschitz constant
    v = np.ones(n) / np.sqrt(n)
    for _ in range(60):
        v2 = A @ v
        v2 = v2 - v2.mean()
        nv = np.linalg.norm(v2)
        if nv == 0.0:
            break
        v = v2 / nv
    L = 2.0 * abs(v @ (A @ v))
    step = 1.0 / max(L, 1e-30)
    e = float(w @ (A @ w))
    hist = np.empty(max_iter)
    iters = 0
    converged = False
    for it in range(max_iter):
        iters = it + 1
        g = 2.0 * (A @ w)
        w2 = _project_simplex_np(w - step * g)
        e2 = float(w2 @ (A @ w2))
        bt = 0
        while e2 > e and bt < 60:
            step *= 0.5
            w2 = _project_simplex_np(w - step * g)
            e2 = float(w2 @ (A @ w2))
            bt += 1
        dec = e - e2
        w = w2
        e = e2
        hist[it] = e
        if dec < tol and bt == 0:
            converged = True
            break
        if it >= stall_window and hist[it - stall_window] - e < stall_tol:
            converged = True
            break
    return w, e, iters, converged


if USE_NUMBA:

    @njit(cache=True, nogil=True)
    def _project_simplex_nb(v):
        n = v.shape[0]
        u = np.sort(v)[::-1]
        css = np.cumsum(u) - 1.0
        rho = 0
        for i in range(n):
            if u[i] - css[i] / (i + 1.0) > 0.0:
                rho = i
        theta = css[rho] / (rho + 1.0)
        out = np.empty(n)
        for i in range(n):
            x = v[i] - theta
            out[i] = x if x > 0.0 else 0.0
        return out

    @njit(cache=True, nogil=True)
    def _pgd_numba(A, tol, max_iter, stall_window, stall_tol):
        n = A.shape[0]
        w = np.full(n, 1.0 / n)
        v = np.ones(n) / np.sqrt(n)
        for _ in range(60):
            v2 = A @ v
            v2 = v2 - v2.mean()
            nv = np.sqrt((v2 * v2).sum())
            if nv == 0.0:
                break
            v = v2 / nv
        L = 2.0 * abs(v @ (A @ v))
        step = 1.0 / max(L, 1e-30)
        e = w @ (A @ w)
        hist = np.empty(max_iter)
        iters = 0
        converged = False
        for it in range(max_iter):
            iters = it + 1
            g = 2.0 * (A @ w)
            w2 = _project_simplex_nb(w - step * g)
            e2 = w2 @ (A @ w2)
            bt = 0
            while e2 > e and bt < 60:
                step *= 0.5
                w2 = _project_simplex_nb(w - step * g)
                e2 = w2 @ (A @ w2)
                bt += 1
            dec = e - e2
            w = w2
            e = e2
            hist[it] = e
            if dec < tol and bt == 0:
                converged = True
                break
            if it >= stall_window and hist[it - stall_window] - e < stall_tol:
                converged = True
                break
        return w, e, iters, converged


def minimize_energy_simplex(A, tol=1e-10, max_iter=10000, stall_window=100,
                            stall_tol=1e-8):
    """Minimize w'Aw over the probability simplex by projected gradient.

    Fixed step 1/L (L from 60 power iterations on the mean-deflated matrix)
    with Armijo halving as a backstop.  Converged when the per-iteration
    decrease drops below tol with no backtracking, or when the decrease over
    the trailing stall_window iterations falls below stall_tol.

    Returns (weights, energy, iterations, converged).
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    if USE_NUMBA:
        w, e, iters, conv = _pgd_numba(A, float(tol), int(max_iter),
                                       int(stall_window), float(stall_tol))
    else:
        w, e, iters, conv = _pgd_numpy(A, float(tol), int(max_iter),
                                       int(stall_window), float(stall_tol))
    return w, float(e), int(iters), bool(conv)


def kkt_energy_simplex(A):
    """Direct stationarity solve: w = A^-1 1 / (1' A^-1 1), energy 1/(1' A^-1 1).

    Valid when the minimizer is interior (all weights positive); used as an
    independent cross-check of the projected-gradient path.
    """
    n = A.shape[0]
    x = np.linalg.solve(A, np.ones(n))
    e = 1.0 / float(x.sum())
    return x * e, e
