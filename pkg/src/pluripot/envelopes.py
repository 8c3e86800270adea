"""Relative extremal functions, planar Green functions, and comparison checks.

All Dirichlet solves go through the shared red-black relaxation kernel with
Shortley-Weller cut arms, so boundary data lives on the true boundary rather
than on a staircase.  The Green function uses the additive log split
g = log|z-w| + u: the pole never enters the linear solve and contributes no
h-dependent singular error.  The check_* routines evaluate the classical
comparison inequalities between g and the relative extremal function of a
small ball (two-sided Green/extremal bounds, a shift bound with logarithmic
modulus penalty, and a sublevel-set inclusion with exponent 1 + 1/alpha).
"""

import numpy as np
from dataclasses import dataclass

from ._kernels import sor_solve
from .geometry import DIRECTIONS, circle_entry_crossing


@dataclass(frozen=True)
class GridFunction:
    """Real-valued field on a PlanarGridDomain; exterior nodes carry 0."""

    domain: object
    values: np.ndarray
    tolerance: float
    sweeps: int = 0
    pole: complex = None
    obstacle: tuple = None

    def value_at(self, z):
        iy, ix = self.domain.nearest_node(complex(z))
        return float(self.values[iy, ix])

    def interior_values(self):
        return self.values[self.domain.interior]


@dataclass(frozen=True)
class SublevelSet:
    """Nodes where a grid function is <= -level, with nestedness counts."""

    descriptor: tuple
    level: float
    nodes: np.ndarray
    count: int
    nested: tuple
    spacing: float

    @property
    def area(self):
        return self.count * self.spacing ** 2


def _ball(K):
    """Accept (center, radius) pairs or {"center", "radius"} dicts."""
    if isinstance(K, dict):
        c, r = K["center"], K["radius"]
    else:
        c, r = K
    r = float(r)
    if r <= 0.0:
        raise ValueError("obstacle ball needs positive radius")
    return complex(c), r


def _assemble(arm, cut, bdata, free):
    """Stencil weights, Dirichlet constants and center coefficient.

    bdata holds the boundary value at the crossing for every cut arm.  den is
    padded to 4.0 off the free set so the vectorized sweep never divides by
    zero.
    """
    w = np.empty_like(arm)
    w[0] = 2.0 / (arm[0] * (arm[0] + arm[1]))
    w[1] = 2.0 / (arm[1] * (arm[1] + arm[0]))
    w[2] = 2.0 / (arm[2] * (arm[2] + arm[3]))
    w[3] = 2.0 / (arm[3] * (arm[3] + arm[2]))
    den = np.where(free, w.sum(axis=0), 4.0)
    a = np.where(cut, 0.0, w)
    bconst = (np.where(cut, w, 0.0) * bdata).sum(axis=0)
    return a[0], a[1], a[2], a[3], bconst, den


def relative_extremal(dom, K, tol=1e-8, max_sweeps=100000):
    """Relative extremal function of a closed ball K inside the domain.

    Solves the two-boundary Dirichlet problem: -1 on the obstacle circle,
    0 on the domain boundary, discrete-harmonic in between, clamped to
    [-1, 0] during the sweeps.  Both boundaries are imposed at their true
    crossings via cut arms.
    """
    c, r = _ball(K)
    if float(dom.delta_at(c)) <= r:
        raise ValueError("obstacle-outside: ball center %s radius %g reaches "
                         "the boundary (delta=%g)"
                         % (c, r, float(dom.delta_at(c))))
    Z = dom.zgrid()
    obstacle = dom.interior & (np.abs(Z - c) <= r)
    if not obstacle.any():
        raise ValueError("resolution: obstacle ball holds no grid node at "
                         "h=%g" % dom.spacing)
    free = dom.interior & ~obstacle
    h = dom.spacing
    arm = dom.arm.copy()
    cut = dom.cut.copy()
    bdata = np.zeros_like(arm)  # outer boundary data is 0
    for k, (dy, dx) in enumerate(DIRECTIONS):
        s = circle_entry_crossing(Z - c, complex(dx, dy), r)
        hit = free & (s <= arm[k] * h * (1.0 + 1e-9))
        if not hit.any():
            continue
        arm[k][hit] = np.clip(s[hit] / h, 1e-6, 1.0)
        cut[k][hit] = True
        bdata[k][hit] = -1.0
    aN, aS, aE, aW, bconst, den = _assemble(arm, cut, bdata, free)
    u = np.zeros((dom.ny, dom.nx))
    u[obstacle] = -1.0
    sweeps, resid = sor_solve(u, free, aN, aS, aE, aW, bconst, den,
                              tol=tol, max_sweeps=max_sweeps,
                              clamp=(-1.0, 0.0))
    if not resid < tol:
        raise RuntimeError("relaxation did not converge: residual %.3e "
                           "after %d sweeps" % (resid, sweeps))
    vals = np.where(dom.interior, u, 0.0)
    vals[obstacle] = -1.0
    vals.flags.writeable = False
    return GridFunction(domain=dom, values=vals, tolerance=resid,
                        sweeps=sweeps, obstacle=(c, r))


def green_function(dom, w, tol=1e-8, max_sweeps=100000):
    """Green function with pole w: log|z-w| plus a harmonic correction.

    The correction solves the Laplace problem with data -log|z-w| at the
    boundary crossings; the returned field is exact at the pole (the log
    term is analytic, never sampled at w itself).
    """
    w = complex(w)
    h = dom.spacing
    if not float(dom.delta_at(w)) > 4.0 * h:
        raise ValueError("pole-near-boundary: delta(w)=%g needs > 4h=%g"
                         % (float(dom.delta_at(w)), 4.0 * h))
    bdata = np.zeros_like(dom.arm)
    for k in range(4):
        ky, kx = np.nonzero(dom.cut[k])
        bdata[k, ky, kx] = -np.log(np.abs(dom.cross[k, ky, kx] - w))
    aN, aS, aE, aW, bconst, den = _assemble(dom.arm, dom.cut, bdata,
                                            dom.interior)
    u = np.zeros((dom.ny, dom.nx))
    sweeps, resid = sor_solve(u, dom.interior, aN, aS, aE, aW, bconst, den,
                              tol=tol, max_sweeps=max_sweeps)
    if not resid < tol:
        raise RuntimeError("relaxation did not converge: residual %.3e "
                           "after %d sweeps" % (resid, sweeps))
    with np.errstate(divide="ignore"):
        g = np.log(np.abs(dom.zgrid() - w)) + u
    vals = np.where(dom.interior, np.minimum(g, 0.0), 0.0)
    vals.flags.writeable = False
    return GridFunction(domain=dom, values=vals, tolerance=resid,
                        sweeps=sweeps, pole=w)


def sublevel(f, c, c_grid=None):
    """Node set {f <= -c} plus counts over a c-grid (nested by construction)."""
    c = float(c)
    if c <= 0.0:
        raise ValueError("sublevel needs a positive level")
    ins = f.domain.interior
    nodes = ins & (f.values <= -c)
    if c_grid is None:
        c_grid = c * 2.0 ** (0.5 * np.arange(-4, 5))
    nested = tuple((float(ci), int((ins & (f.values <= -ci)).sum()))
                   for ci in sorted(float(ci) for ci in c_grid))
    if f.pole is not None:
        desc = ("pole", f.pole)
    elif f.obstacle is not None:
        desc = ("obstacle",) + f.obstacle
    else:
        desc = ("field",)
    nodes = nodes.copy()
    nodes.flags.writeable = False
    return SublevelSet(descriptor=desc, level=c, nodes=nodes,
                       count=int(nodes.sum()), nested=nested,
                       spacing=f.domain.spacing)


def check_blocki_bounds(dom, w, eps, R_override=None, tol=1e-8):
    """Two-sided comparison of g(., w) against the extremal of B(w, eps).

    Lower bound off the ball: g >= log(R/eps) * rho with R the domain
    diameter (or R_override).  Upper bound everywhere: g <= log(delta(w)/eps)
    * rho.  Violations are signed maxima of (bound - g) resp. (g - bound);
    negative means satisfied.
    """
    w = complex(w)
    eps = float(eps)
    g = green_function(dom, w, tol=tol)
    rho = relative_extremal(dom, (w, eps), tol=tol)
    R = float(R_override) if R_override is not None else float(dom.diameter())
    delta_w = float(dom.delta_at(w))
    Z = dom.zgrid()
    ins = dom.interior
    off_ball = ins & (np.abs(Z - w) >= eps)

    lower = np.log(R / eps) * rho.values
    diff_lo = np.where(off_ball, lower - g.values, -np.inf)
    i_lo = int(np.argmax(diff_lo))
    upper = np.log(delta_w / eps) * rho.values
    diff_up = np.where(ins, g.values - upper, -np.inf)
    i_up = int(np.argmax(diff_up))
    return {
        "pole": w,
        "eps": eps,
        "R": R,
        "delta_w": delta_w,
        "violation_lower": float(diff_lo.flat[i_lo]),
        "witness_lower": complex(Z.flat[i_lo]),
        "violation_upper": float(diff_up.flat[i_up]),
        "witness_upper": complex(Z.flat[i_up]),
        "solver_tolerance": max(g.tolerance, rho.tolerance),
    }


@dataclass(frozen=True)
class IndexCertificate:
    """Fitted envelope -rho(z) <= C_alpha * (-log delta(z))^(-alpha)."""

    C_alpha: float
    alpha: float
    n_nodes: int
    rms: float


def fit_index_certificate(dom, K, rho=None, delta_cut=0.1, inflate=1.5,
                          tol=1e-8):
    """Least-squares certificate for the boundary decay of -rho.

    Fits log(-rho) against log(-log delta) over interior nodes with
    delta < delta_cut, then inflates the constant by `inflate` so the fitted
    envelope majorizes the data with slack.  Reported, never claimed as the
    true decay index.
    """
    if rho is None:
        rho = relative_extremal(dom, K, tol=tol)
    d = dom.delta
    v = rho.values
    sel = dom.interior & (d > 0.0) & (d < delta_cut) & (v < 0.0) & (v > -1.0)
    if int(sel.sum()) < 8:
        raise ValueError("no-index-certificate: only %d usable nodes with "
                         "delta < %g" % (int(sel.sum()), delta_cut))
    x = np.log(-np.log(d[sel]))
    y = np.log(-v[sel])
    slope, intercept = np.polyfit(x, y, 1)
    alpha = -float(slope)
    if alpha <= 0.0:
        raise ValueError("no-index-certificate: fitted alpha %g <= 0" % alpha)
    rms = float(np.sqrt(np.mean((y - (intercept + slope * x)) ** 2)))
    return IndexCertificate(C_alpha=float(np.exp(intercept)) * inflate,
                            alpha=alpha, n_nodes=int(sel.sum()), rms=rms)


def check_lemma21(dom, K, r, pairs, cert=None, tol=1e-8):
    """Shift bound rho(z2) >= r*rho(z1) - C_alpha*(-log|z1-z2|)^(-alpha).

    Evaluates both sides per pair and reports eps_r, the largest dyadic
    separation below which no pair violates the bound.  A certificate may be
    supplied as an IndexCertificate or (C_alpha, alpha) pair; otherwise one
    is fitted from the extremal field.
    """
    if not r > 1.0:
        raise ValueError("shift factor r must be > 1")
    rho = relative_extremal(dom, K, tol=tol)
    if cert is None:
        cert = fit_index_certificate(dom, K, rho=rho, tol=tol)
    elif not isinstance(cert, IndexCertificate):
        try:
            ca, al = cert
            cert = IndexCertificate(float(ca), float(al), 0, 0.0)
        except (TypeError, ValueError):
            raise ValueError("no-index-certificate: expected (C_alpha, "
                             "alpha), got %r" % (cert,))

    dist, lhs, rhs = [], [], []
    skipped = 0
    for z1, z2 in pairs:
        z1, z2 = complex(z1), complex(z2)
        if not (bool(dom.contains(z1)) and bool(dom.contains(z2))):
            skipped += 1
            continue
        d = abs(z1 - z2)
        if d >= 1.0:
            skipped += 1  # log-modulus penalty only defined below unit scale
            continue
        penalty = 0.0 if d == 0.0 else \
            cert.C_alpha * (-np.log(d)) ** (-cert.alpha)
        dist.append(d)
        lhs.append(rho.value_at(z2))
        rhs.append(r * rho.value_at(z1) - penalty)
    dist = np.asarray(dist)
    violation = np.asarray(rhs) - np.asarray(lhs)  # > 0 means violated
    violated = violation > 0.0

    eps_r = 0.0
    for k in range(1, 61):
        if not violated[dist <= 2.0 ** -k].any():
            eps_r = 2.0 ** -k
            break
    n_used = int(dist.size)
    return {
        "r": float(r),
        "certificate": cert,
        "n_pairs": n_used,
        "n_skipped": skipped,
        "n_violations": int(violated.sum()),
        "max_violation": float(violation.max()) if n_used else -np.inf,
        "eps_r": eps_r,
        "distance": dist,
        "lhs": np.asarray(lhs),
        "rhs": np.asarray(rhs),
    }


def check_lemma22(dom, K, w, alpha, c=1.0, tol=1e-8):
    """Sublevel inclusion {g <= -c} in {rho < -mu/C}, mu = (-rho(w))^(1+1/alpha).

    Returns the smallest C >= 1 making the inclusion hold node-wise, with the
    witness node attaining it.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    w = complex(w)
    rho = relative_extremal(dom, K, tol=tol)
    g = green_function(dom, w, tol=tol)
    A = sublevel(g, c)
    mu = (-rho.value_at(w)) ** (1.0 + 1.0 / alpha)
    report = {
        "pole": w,
        "alpha": float(alpha),
        "level": float(c),
        "mu": float(mu),
        "rho_w": rho.value_at(w),
        "count": A.count,
    }
    if A.count == 0:
        report.update(C=1.0, witness=None)
        return report
    on = A.nodes
    vals = -rho.values[on]
    i = int(np.argmin(vals))
    if vals[i] <= 0.0:
        report.update(C=np.inf, witness=complex(dom.zgrid()[on][i]))
        return report
    report.update(C=float(max(1.0, mu / vals[i])),
                  witness=complex(dom.zgrid()[on][i]))
    return report


def field_to_csv(f):
    """CSV dump (x, y, mask, value), row-major, full precision."""
    Z = f.domain.zgrid()
    m = f.domain.mask
    v = f.values
    lines = ["x,y,mask,value"]
    for iy in range(f.domain.ny):
        for ix in range(f.domain.nx):
            lines.append("%.17g,%.17g,%d,%.17g"
                         % (Z[iy, ix].real, Z[iy, ix].imag, m[iy, ix],
                            v[iy, ix]))
    return "\n".join(lines) + "\n"
