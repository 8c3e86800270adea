"""Composite Gauss-Legendre quadrature on panel lists.

Everything downstream that integrates (fiber angle integrals, collar offset
integrals, radial kernel moments) goes through these helpers: a cached
Gauss-Legendre rule, panel-edge generators that refine geometrically toward a
singular end, and a composite evaluator for vectorized integrands.
"""

import numpy as np

_GL_CACHE = {}


def gl_rule(n):
    """Gauss-Legendre nodes/weights on [-1, 1], cached."""
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def panel_points(edges, n):
    """Mapped GL nodes and weights for each [edges[i], edges[i+1]] panel.

    Returns flat arrays (x, w) with len = n * (len(edges) - 1).
    """
    edges = np.asarray(edges, dtype=np.float64)
    gx, gw = gl_rule(n)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    w = (half[:, None] * gw[None, :]).ravel()
    return x, w


def composite_gl(f, edges, n):
    """Integrate a vectorized f over the panels defined by edges."""
    x, w = panel_points(edges, n)
    return float(np.sum(w * f(x)))


def geometric_edges(a, b, toward_b=True, levels=14, shrink=0.5, wmin=1e-13):
    """Panel edges on [a, b], widths shrinking geometrically toward one end."""
    if not b > a:
        raise ValueError("need b > a")
    length = b - a
    offs = []
    w = length
    while len(offs) < levels - 1 and w > wmin * length:
        w *= shrink
        offs.append(w)
    if toward_b:
        edges = [a] + [b - o for o in offs][::-1] + [b]
    else:
        edges = [a] + [a + o for o in sorted(offs)] + [b]
    return np.array(sorted(set(edges)))


def dyadic_log_edges(a, b):
    """Doubling panel edges from a up to b (for log-substituted integrands)."""
    if not 0.0 < a < b:
        raise ValueError("need 0 < a < b")
    edges = [a]
    while edges[-1] * 2.0 < b:
        edges.append(edges[-1] * 2.0)
    edges.append(b)
    return np.array(edges)


def log_panel_integral(f_of_tau, a, b, n=16):
    """Int_a^b f(tau) dtau via v = log(tau) substitution on dyadic panels.

    f_of_tau must be vectorized; suited to integrands smooth in log(tau)
    across many decades (collar offsets reach 2^-40 and below).
    """
    edges = dyadic_log_edges(a, b)
    v, w = panel_points(np.log(edges), n)
    tau = np.exp(v)
    return float(np.sum(w * f_of_tau(tau) * tau))
