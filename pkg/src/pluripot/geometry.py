"""Planar domain representations.

Three families of objects live here:

  * PlanarGridDomain - rectangular grids with an exact (analytic, not BFS)
    boundary-distance field and per-direction "cut arms": the fraction of a
    grid step from a near-boundary node to the true boundary crossing.  The
    relaxation solvers use the arms to impose Dirichlet data at the actual
    boundary; a staircase mask costs O(h) accuracy and would dominate every
    convergence measurement downstream.
  * IntervalUnionSet - compact subsets of the real line (finite unions of
    closed intervals plus isolated points), used as capacity obstacles and
    as the removed set in punctured-disk domains.
  * HartogsProfileDomain - the profile family over [1, 6]: radii r1, r2 and
    hole center c(x), analytic on specified windows and joined by monotone
    C^1 cubics elsewhere.  Fibers are annular regions minus an off-center
    closed disk.
"""

import numpy as np
from dataclasses import dataclass, field

EXTERIOR = 0
INTERIOR = 1
BOUNDARY_ADJ = 2

# direction order N, S, E, W as (dy, dx); matches the kernel weight layout
DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1))


# ------------------------------------------------------------- real-line sets

def _merge_intervals(intervals):
    ivs = sorted((float(l), float(r)) for l, r in intervals)
    for l, r in ivs:
        if r < l:
            raise ValueError("interval with left > right: (%g, %g)" % (l, r))
    merged = []
    for l, r in ivs:
        if merged and l <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], r)
        else:
            merged.append([l, r])
    return merged


@dataclass(frozen=True)
class IntervalUnionSet:
    """Finite union of closed real intervals plus isolated points."""

    intervals: tuple = ()
    points: tuple = ()

    def __post_init__(self):
        merged = _merge_intervals(self.intervals)
        # degenerate intervals are points; points inside intervals are absorbed
        pts = set(float(p) for p in self.points)
        ivs = []
        for l, r in merged:
            if r - l > 0.0:
                ivs.append((l, r))
            else:
                pts.add(l)
        pts = sorted(p for p in pts
                     if not any(l <= p <= r for l, r in ivs))
        object.__setattr__(self, "intervals", tuple(ivs))
        object.__setattr__(self, "points", tuple(pts))

    @property
    def is_empty(self):
        return not self.intervals and not self.points

    def contains_real(self, x):
        """Vectorized membership for real x."""
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros(x.shape, dtype=bool)
        for l, r in self.intervals:
            out |= (x >= l) & (x <= r)
        for p in self.points:
            out |= x == p
        return out

    def distance(self, z):
        """Euclidean distance from complex z (array ok) to the set."""
        z = np.asarray(z, dtype=np.complex128)
        d = np.full(z.shape, np.inf)
        x, y = z.real, z.imag
        for l, r in self.intervals:
            dx = np.maximum(np.maximum(l - x, x - r), 0.0)
            d = np.minimum(d, np.hypot(dx, y))
        for p in self.points:
            d = np.minimum(d, np.abs(z - p))
        return d

    def hull(self):
        if self.is_empty:
            raise ValueError("empty set has no hull")
        lo = min([l for l, _ in self.intervals] + list(self.points))
        hi = max([r for _, r in self.intervals] + list(self.points))
        return lo, hi

    def intersect_interval(self, lo, hi):
        """Intersection with the closed interval [lo, hi]."""
        ivs = [(max(l, lo), min(r, hi)) for l, r in self.intervals
               if max(l, lo) <= min(r, hi)]
        pts = [p for p in self.points if lo <= p <= hi]
        return IntervalUnionSet(tuple(ivs), tuple(pts))

    def total_length(self):
        return sum(r - l for l, r in self.intervals)

    def is_subset_of(self, other):
        for l, r in self.intervals:
            if not any(L <= l and r <= R for L, R in other.intervals):
                return False
        for p in self.points:
            if not bool(other.contains_real(p)):
                return False
        return True


# ------------------------------------------------------------- domain specs

def disk_spec(center, radius):
    if radius <= 0.0:
        raise ValueError("empty-domain: disk radius must be positive")
    return {"kind": "disk", "center": complex(center), "radius": float(radius)}


def annulus_spec(r, R):
    if not 0.0 < r < R:
        raise ValueError("empty-domain: annulus needs 0 < r < R")
    return {"kind": "annulus", "r": float(r), "R": float(R)}


def disk_minus_set_spec(center, radius, removed):
    if radius <= 0.0:
        raise ValueError("empty-domain: disk radius must be positive")
    if not isinstance(removed, IntervalUnionSet):
        raise TypeError("removed set must be an IntervalUnionSet")
    return {"kind": "disk_minus_set", "center": complex(center),
            "radius": float(radius), "set": removed}


def polygon_spec(vertices):
    v = np.asarray(vertices, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
        raise ValueError("empty-domain: polygon needs >= 3 (x, y) vertices")
    return {"kind": "polygon", "vertices": v}


def domain_spec_from_json(doc):
    """Normalize a JSON-style dict into an internal domain spec."""
    kind = doc.get("kind")
    if kind == "disk":
        c = doc.get("center", 0)
        c = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
        return disk_spec(c, doc["radius"])
    if kind == "annulus":
        return annulus_spec(doc["r"], doc["R"])
    if kind == "disk_minus_set":
        c = doc.get("center", 0)
        c = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
        E = IntervalUnionSet(tuple(tuple(iv) for iv in doc.get("intervals", ())),
                             tuple(doc.get("points", ())))
        return disk_minus_set_spec(c, doc["radius"], E)
    if kind == "polygon":
        return polygon_spec(doc["vertices"])
    if kind == "hartogs":
        return HartogsProfileDomain(doc["s"], doc.get("transition_eps", 0.2))
    raise ValueError("unknown domain kind: %r" % (kind,))


def _membership(spec, Z):
    kind = spec["kind"]
    if kind == "disk":
        return np.abs(Z - spec["center"]) < spec["radius"]
    if kind == "annulus":
        a = np.abs(Z)
        return (a > spec["r"]) & (a < spec["R"])
    if kind == "disk_minus_set":
        ins = np.abs(Z - spec["center"]) < spec["radius"]
        E = spec["set"]
        on_line = Z.imag == 0.0
        return ins & ~(on_line & E.contains_real(Z.real))
    if kind == "polygon":
        v = spec["vertices"]
        x, y = Z.real, Z.imag
        inside = np.zeros(Z.shape, dtype=bool)
        n = v.shape[0]
        for i in range(n):
            x1, y1 = v[i]
            x2, y2 = v[(i + 1) % n]
            cond = (y1 > y) != (y2 > y)
            if y2 == y1:
                continue
            xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            inside ^= cond & (x < xint)
        return inside
    raise ValueError("cannot rasterize domain kind %r" % (kind,))


def _delta_field(spec, Z):
    """Exact distance to the complement of the domain."""
    kind = spec["kind"]
    if kind == "disk":
        return spec["radius"] - np.abs(Z - spec["center"])
    if kind == "annulus":
        a = np.abs(Z)
        return np.minimum(spec["R"] - a, a - spec["r"])
    if kind == "disk_minus_set":
        d = spec["radius"] - np.abs(Z - spec["center"])
        return np.minimum(d, spec["set"].distance(Z))
    if kind == "polygon":
        v = spec["vertices"]
        n = v.shape[0]
        d = np.full(Z.shape, np.inf)
        for i in range(n):
            A = complex(v[i][0], v[i][1])
            B = complex(v[(i + 1) % n][0], v[(i + 1) % n][1])
            e = B - A
            w = Z - A
            t = np.clip((w * np.conj(e)).real / abs(e) ** 2, 0.0, 1.0)
            d = np.minimum(d, np.abs(w - t * e))
        return d
    raise ValueError("cannot rasterize domain kind %r" % (kind,))


def _cross2(p, q):
    return (np.conj(p) * q).imag


def circle_exit_crossing(v, a, R):
    """Distance s >= 0 with |v + s*a| = R, |a| = 1, from |v| < R."""
    b = (v * np.conj(a)).real
    c = (v * np.conj(v)).real - R * R
    disc = np.maximum(b * b - c, 0.0)
    return -b + np.sqrt(disc)


def circle_entry_crossing(v, a, r):
    """First s > 0 with |v + s*a| = r from |v| > r; inf when the ray misses."""
    b = (v * np.conj(a)).real
    c = (v * np.conj(v)).real - r * r
    disc = b * b - c
    s = np.where(disc >= 0.0, -b - np.sqrt(np.maximum(disc, 0.0)), np.inf)
    return np.where(s > 0.0, s, np.inf)


def _boundary_crossing(spec, z0, a, h):
    """Smallest s in (0, h] with z0 + s*a on the domain boundary; inf if none."""
    kind = spec["kind"]
    tol = h * 1e-9
    if kind == "disk":
        s = circle_exit_crossing(z0 - spec["center"], a, spec["radius"])
    elif kind == "annulus":
        s_out = circle_exit_crossing(z0, a, spec["R"])
        s_in = circle_entry_crossing(z0, a, spec["r"])
        s = np.minimum(s_out, s_in)
    elif kind == "disk_minus_set":
        s = circle_exit_crossing(z0 - spec["center"], a, spec["radius"])
        E = spec["set"]
        x0, y0 = z0.real, z0.imag
        if a.imag != 0.0:  # vertical step: may land on the removed real set
            s0 = -y0 / a.imag
            hit = (s0 > 0.0) & (s0 <= h + tol) & E.contains_real(x0)
            s = np.where(hit, np.minimum(s, s0), s)
        elif a.real != 0.0:  # horizontal step along the real line
            on_line = y0 == 0.0
            for l, r in E.intervals:
                edge = l if a.real > 0 else r
                s0 = (edge - x0) / a.real
                hit = on_line & (s0 > 0.0) & (s0 <= h + tol)
                s = np.where(hit, np.minimum(s, s0), s)
            for p in E.points:
                s0 = (p - x0) / a.real
                hit = on_line & (s0 > 0.0) & (s0 <= h + tol)
                s = np.where(hit, np.minimum(s, s0), s)
    elif kind == "polygon":
        v = spec["vertices"]
        n = v.shape[0]
        s = np.full(z0.shape, np.inf)
        for i in range(n):
            A = complex(v[i][0], v[i][1])
            B = complex(v[(i + 1) % n][0], v[(i + 1) % n][1])
            e = B - A
            den = _cross2(a, e)
            if den == 0.0:
                continue
            rhs = A - z0
            si = _cross2(rhs, e) / den
            u = _cross2(rhs, a) / den
            ok = (u >= -1e-12) & (u <= 1.0 + 1e-12) & (si > 0.0)
            s = np.where(ok, np.minimum(s, si), s)
    else:
        raise ValueError("cannot rasterize domain kind %r" % (kind,))
    return np.where(s <= h + tol, s, np.inf)


# ------------------------------------------------------------------- grids

@dataclass(frozen=True)
class PlanarGridDomain:
    """Rectangular grid with exact boundary distance and cut-arm stencil data.

    mask codes: 0 exterior, 1 interior, 2 boundary-adjacent (interior with at
    least one arm cut by the boundary).  arm[k] is the step fraction to the
    crossing in direction k (N, S, E, W); cross[k] the crossing coordinate.
    """

    origin: complex
    spacing: float
    nx: int
    ny: int
    mask: np.ndarray
    delta: np.ndarray
    arm: np.ndarray
    cut: np.ndarray
    cross: np.ndarray
    spec: dict = field(repr=False)

    @property
    def xs(self):
        return self.origin.real + np.arange(self.nx) * self.spacing

    @property
    def ys(self):
        return self.origin.imag + np.arange(self.ny) * self.spacing

    def zgrid(self):
        return self.xs[None, :] + 1j * self.ys[:, None]

    @property
    def interior(self):
        return self.mask > 0

    @property
    def interior_count(self):
        return int((self.mask > 0).sum())

    def delta_at(self, z):
        """Exact boundary distance at arbitrary points (not grid-sampled)."""
        d = _delta_field(self.spec, np.asarray(z, dtype=np.complex128))
        return np.maximum(d, 0.0)

    def contains(self, z):
        return _membership(self.spec, np.asarray(z, dtype=np.complex128))

    def diameter(self):
        kind = self.spec["kind"]
        if kind in ("disk", "disk_minus_set"):
            return 2.0 * self.spec["radius"]
        if kind == "annulus":
            return 2.0 * self.spec["R"]
        v = self.spec["vertices"]
        d = 0.0
        for i in range(v.shape[0]):
            dd = np.hypot(v[:, 0] - v[i, 0], v[:, 1] - v[i, 1]).max()
            d = max(d, float(dd))
        return d

    def nearest_node(self, z):
        ix = int(round((z.real - self.origin.real) / self.spacing))
        iy = int(round((z.imag - self.origin.imag) / self.spacing))
        ix = min(max(ix, 0), self.nx - 1)
        iy = min(max(iy, 0), self.ny - 1)
        return iy, ix


def _grid_axis(lo, hi, h):
    n = int(np.ceil((hi - lo) / h)) + 5
    mid = 0.5 * (lo + hi)
    return (np.arange(n) - (n - 1) / 2.0) * h + mid


def _bounding_box(spec):
    kind = spec["kind"]
    if kind in ("disk", "disk_minus_set"):
        c, R = spec["center"], spec["radius"]
        return c.real - R, c.real + R, c.imag - R, c.imag + R
    if kind == "annulus":
        R = spec["R"]
        return -R, R, -R, R
    if kind == "polygon":
        v = spec["vertices"]
        return v[:, 0].min(), v[:, 0].max(), v[:, 1].min(), v[:, 1].max()
    raise ValueError("cannot rasterize domain kind %r" % (kind,))


def rasterize_domain(spec, h):
    """Grid a domain spec at step h with exact delta and cut arms."""
    if isinstance(spec, HartogsProfileDomain):
        raise ValueError("cannot rasterize the Hartogs family; use fiber()")
    if h <= 0.0:
        raise ValueError("resolution: grid step must be positive")
    x0, x1, y0, y1 = _bounding_box(spec)
    xs = _grid_axis(x0, x1, h)
    ys = _grid_axis(y0, y1, h)
    nx, ny = len(xs), len(ys)
    Z = xs[None, :] + 1j * ys[:, None]
    inside = _membership(spec, Z)
    inside[[0, -1], :] = False
    inside[:, [0, -1]] = False
    n_int = int(inside.sum())
    if n_int == 0:
        raise ValueError("empty-domain: no interior nodes")
    if n_int < 100:
        raise ValueError("resolution: only %d interior nodes at h=%g "
                         "(need >= 100)" % (n_int, h))

    delta = np.where(inside, np.maximum(_delta_field(spec, Z), 0.0), 0.0)

    arm = np.ones((4, ny, nx))
    cut = np.zeros((4, ny, nx), dtype=bool)
    cross = np.zeros((4, ny, nx), dtype=np.complex128)
    for k, (dy, dx) in enumerate(DIRECTIONS):
        nbr_inside = np.zeros_like(inside)
        nbr_inside[max(0, -dy):ny - max(0, dy), max(0, -dx):nx - max(0, dx)] = \
            inside[max(0, dy):ny - max(0, -dy), max(0, dx):nx - max(0, -dx)]
        cut_mask = inside & ~nbr_inside
        iy, ix = np.nonzero(cut_mask)
        if len(iy) == 0:
            continue
        z0 = Z[iy, ix]
        a = complex(dx, dy)
        s = _boundary_crossing(spec, z0, a, h)
        t = np.clip(np.where(np.isfinite(s), s, h) / h, 1e-6, 1.0)
        arm[k, iy, ix] = t
        cut[k, iy, ix] = True
        cross[k, iy, ix] = z0 + t * h * a

    mask = np.where(inside, INTERIOR, EXTERIOR).astype(np.int8)
    mask[inside & cut.any(axis=0)] = BOUNDARY_ADJ
    for arr in (mask, delta, arm, cut, cross):
        arr.flags.writeable = False
    return PlanarGridDomain(origin=complex(xs[0], ys[0]), spacing=float(h),
                            nx=nx, ny=ny, mask=mask, delta=delta, arm=arm,
                            cut=cut, cross=cross, spec=spec)


def interior_connected(grid):
    """4-connectivity of the interior node set (flood fill)."""
    ins = grid.mask > 0
    if not ins.any():
        return True
    reach = np.zeros_like(ins)
    iy, ix = np.argwhere(ins)[0]
    reach[iy, ix] = True
    while True:
        grow = (np.roll(reach, 1, 0) | np.roll(reach, -1, 0)
                | np.roll(reach, 1, 1) | np.roll(reach, -1, 1)) & ins & ~reach
        if not grow.any():
            break
        reach |= grow
    return bool((reach == ins).all())


def grid_to_csv(grid):
    """CSV dump (x, y, mask, delta), row-major, full precision."""
    Z = grid.zgrid()
    lines = ["x,y,mask,delta"]
    m = grid.mask
    d = grid.delta
    for iy in range(grid.ny):
        for ix in range(grid.nx):
            lines.append("%.17g,%.17g,%d,%.17g"
                         % (Z[iy, ix].real, Z[iy, ix].imag, m[iy, ix], d[iy, ix]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------- profile family

def _sqrt_seg(anchor, base, sign_inner, sign_outer):
    # base + sign_outer * sqrt(sign_inner * (x - anchor))
    def f(x):
        return base + sign_outer * np.sqrt(sign_inner * (np.asarray(x, float) - anchor))
    return f


def _const_seg(value):
    def f(x):
        return np.full(np.asarray(x, float).shape, value)
    return f


def _hermite_seg(x0, x1, y0, y1, d0, d1):
    dx = x1 - x0
    sec = (y1 - y0) / dx
    if sec == 0.0:
        d0 = d1 = 0.0
    else:
        r0, r1 = d0 / sec, d1 / sec
        d0 = 0.0 if r0 < 0.0 else (3.0 * sec if r0 > 3.0 else d0)
        d1 = 0.0 if r1 < 0.0 else (3.0 * sec if r1 > 3.0 else d1)

    def f(x):
        u = (np.asarray(x, float) - x0) / dx
        u2 = u * u
        u3 = u2 * u
        return ((2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * dx * d0
                + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * dx * d1)
    return f


def _cusp_seg(anchor, sign, s):
    # sign * (1 - (1/2) exp(-2 |x-anchor|^{-s})); exactly sign*1 at the anchor
    def f(x):
        tau = np.abs(np.asarray(x, float) - anchor)
        safe = np.where(tau > 0.0, tau, 1.0)
        e = np.where(tau > 0.0, np.exp(-2.0 * safe ** (-s)), 0.0)
        return sign * (1.0 - 0.5 * e)
    return f


@dataclass(frozen=True)
class HartogsProfileDomain:
    """Profile family over the base interval [1, 6].

    r1, r2 pinch together (value 3) at the base endpoints, plateau at 1 and 4
    on [2, 5]; the hole center c runs from 0 to -1 (tangency at x=3), back
    through +1 (tangency at x=4), and home to 0.  Analytic on the stated
    windows, monotone C^1 cubic joins elsewhere.
    """

    s: float
    transition_eps: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ValueError("profile exponent s must lie in (0,1)")
        if not 0.0 < self.transition_eps < 0.5:
            raise ValueError("transition_eps must lie in (0, 0.5)")
        s, eps = self.s, self.transition_eps
        sq = np.sqrt(0.5)
        dsq = 1.0 / (2.0 * sq)
        r1 = [
            (1.0, 1.5, _sqrt_seg(1.0, 3.0, 1.0, -1.0)),
            (1.5, 2.0, _hermite_seg(1.5, 2.0, 3.0 - sq, 1.0, -dsq, 0.0)),
            (2.0, 5.0, _const_seg(1.0)),
            (5.0, 5.5, _hermite_seg(5.0, 5.5, 1.0, 3.0 - sq, 0.0, dsq)),
            (5.5, 6.0, _sqrt_seg(6.0, 3.0, -1.0, -1.0)),
        ]
        r2 = [
            (1.0, 1.5, _sqrt_seg(1.0, 3.0, 1.0, 1.0)),
            (1.5, 2.0, _hermite_seg(1.5, 2.0, 3.0 + sq, 4.0, dsq, 0.0)),
            (2.0, 5.0, _const_seg(4.0)),
            (5.0, 5.5, _hermite_seg(5.0, 5.5, 4.0, 3.0 + sq, 0.0, -dsq)),
            (5.5, 6.0, _sqrt_seg(6.0, 3.0, -1.0, 1.0)),
        ]
        expo = np.exp(-2.0 * eps ** (-s))
        cm = 1.0 - 0.5 * expo
        D = s * expo * eps ** (-s - 1.0)
        c = [
            (1.0, 2.0, _const_seg(0.0)),
            (2.0, 3.0 - eps, _hermite_seg(2.0, 3.0 - eps, 0.0, -cm, 0.0, -D)),
            (3.0 - eps, 3.0 + eps, _cusp_seg(3.0, -1.0, s)),
            (3.0 + eps, 4.0 - eps, _hermite_seg(3.0 + eps, 4.0 - eps, -cm, cm, D, D)),
            (4.0 - eps, 4.0 + eps, _cusp_seg(4.0, 1.0, s)),
            (4.0 + eps, 5.0, _hermite_seg(4.0 + eps, 5.0, cm, 0.0, -D, 0.0)),
            (5.0, 6.0, _const_seg(0.0)),
        ]
        object.__setattr__(self, "_segments", {"r1": r1, "r2": r2, "c": c})

    def profile_eval(self, which, x):
        """Evaluate r1, r2, or c at x in [1, 6] (scalar or array)."""
        if which not in ("r1", "r2", "c"):
            raise ValueError("which must be one of r1, r2, c")
        xa = np.asarray(x, dtype=np.float64)
        scalar = xa.ndim == 0
        xa = np.atleast_1d(xa)
        if np.any(xa < 1.0) or np.any(xa > 6.0):
            raise ValueError("profile-range: x must lie in [1, 6]")
        out = np.empty(xa.shape)
        done = np.zeros(xa.shape, dtype=bool)
        for x0, x1, f in self._segments[which]:
            m = ~done & (xa >= x0) & (xa <= x1)
            if m.any():
                out[m] = f(xa[m])
                done[m] = True
        return float(out[0]) if scalar else out

    def fiber(self, t):
        """Fiber region at base point t: {|z| < r2(t)} minus D̄(c(t), r1(t))."""
        t = float(t)
        if not 1.0 < t < 6.0:
            raise ValueError("fiber-range: t must lie in (1, 6)")
        return FiberRegion(t=t,
                           outer_radius=float(self.profile_eval("r2", t)),
                           hole_center=float(self.profile_eval("c", t)),
                           hole_radius=float(self.profile_eval("r1", t)))

    def contains(self, z, w):
        """Membership: 1 < |w| < 6, |z| < r2(|w|), |z - c(|w|)| > r1(|w|)."""
        t = abs(w)
        if not 1.0 < t < 6.0:
            return False
        r1 = self.profile_eval("r1", t)
        r2 = self.profile_eval("r2", t)
        c = self.profile_eval("c", t)
        return bool(abs(z) < r2 and abs(z - c) > r1)


@dataclass(frozen=True)
class FiberRegion:
    """Annular fiber {|z| < outer_radius} minus D̄(hole_center, hole_radius)."""

    t: float
    outer_radius: float
    hole_center: float
    hole_radius: float

    def contains(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return (np.abs(z) < self.outer_radius) & \
               (np.abs(z - self.hole_center) > self.hole_radius)

    def is_centered_annulus(self):
        return self.hole_center == 0.0

    def area(self):
        return np.pi * (self.outer_radius ** 2 - self.hole_radius ** 2)
