"""Log-domain chain recursion for triple-logarithmic boundary estimates.

The recursion pairs two pointwise comparisons with matched constants,
C^{-1} mu(z_k) = C nu(z_{k+1}), which in the log variable L = log(-rho)
becomes the affine expanding map L' = ((1 + 1/alpha) L - 2 log C) / gamma.
Everything stays in L and Lambda = log|log delta|; the delta scales reached
(exp(-exp(exp(m)))) are not representable in floating point directly.

Admissibility is the strict threshold alpha > (n-1 + sqrt((n-1)(n+3)))/2,
exactly the condition making the beta-interval (n-1, alpha^2/(alpha+1))
nonempty.
"""

import numpy as np
from dataclasses import dataclass


def admissibility(n, alpha):
    """Threshold test for the exponent alpha in complex dimension n.

    Returns the threshold (n-1 + sqrt((n-1)(n+3)))/2, whether alpha strictly
    exceeds it, and the open beta-interval (n-1, alpha^2/(alpha+1)).
    """
    n = int(n)
    alpha = float(alpha)
    if n < 1:
        raise ValueError("need n >= 1")
    if alpha <= 0.0:
        raise ValueError("need alpha > 0")
    threshold = (n - 1 + np.sqrt((n - 1.0) * (n + 3.0))) / 2.0
    lo, hi = n - 1.0, alpha * alpha / (alpha + 1.0)
    admissible = alpha > threshold
    if admissible and not hi > lo:
        raise AssertionError("threshold crossed but beta-interval empty: "
                             "(%g, %g)" % (lo, hi))
    return {"n": n, "alpha": alpha, "threshold": float(threshold),
            "admissible": bool(admissible), "beta_range": (float(lo),
                                                           float(hi))}


@dataclass(frozen=True)
class ChainParams:
    """Exponents and constants of one chain step.

    beta defaults to the midpoint of its admissible interval; supplying
    inadmissible values raises at construction so every instance satisfies
    0 < gamma < 1.
    """

    n: int
    alpha: float
    C: float
    beta: float = None
    c1: float = 1.0

    def __post_init__(self):
        rep = admissibility(self.n, self.alpha)
        if not rep["admissible"]:
            raise ValueError("inadmissible: alpha=%g <= threshold %g at n=%d"
                             % (self.alpha, rep["threshold"], self.n))
        if not self.C > 1.0:
            raise ValueError("need C > 1")
        if not self.c1 > 0.0:
            raise ValueError("need c1 > 0")
        lo, hi = rep["beta_range"]
        beta = 0.5 * (lo + hi) if self.beta is None else float(self.beta)
        if not lo < beta < hi:
            raise ValueError("inadmissible: beta=%g outside (%g, %g)"
                             % (beta, lo, hi))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "C", float(self.C))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "c1", float(self.c1))
        g = self.gamma
        if not 0.0 < g < 1.0:
            raise ValueError("inadmissible: gamma=%g outside (0, 1)" % g)

    @property
    def gamma(self):
        n, a, b = self.n, self.alpha, self.beta
        return (1.0 / n - (1.0 - 1.0 / n) / b) * n * a / (1.0 + a)

    @property
    def expansion(self):
        """Per-step slope (1 + 1/alpha)/gamma of the affine map (> 1)."""
        return (1.0 + 1.0 / self.alpha) / self.gamma


@dataclass(frozen=True)
class ChainTrace:
    """One chain run: the visited L_k, the step count, and diagnostics."""

    L_values: tuple
    m: int
    closed_form_residual: float
    slope: float
    d_B_lower_bound: float
    notes: tuple = ("geodesic-attainment-not-checked",)


def step_map(L, params):
    """One chain step in the log variable:
    L' = ((1 + 1/alpha) L - 2 log C) / gamma."""
    return ((1.0 + 1.0 / params.alpha) * float(L)
            - 2.0 * np.log(params.C)) / params.gamma


def closed_form_start(L_m, m, params):
    """Invert m steps in closed form:
    L_0 = a^m L_m + (1 - a^m)/(1 - a) * (2 alpha/(alpha+1)) log C,
    with a = gamma alpha/(1 + alpha)."""
    a = params.gamma * params.alpha / (1.0 + params.alpha)
    shift = 2.0 * params.alpha / (params.alpha + 1.0) * np.log(params.C)
    geom = float(m) if a == 1.0 else (1.0 - a ** m) / (1.0 - a)
    return a ** m * float(L_m) + geom * shift


def chain_length(L0, lambda_target, params, C_alpha=1.0, max_steps=100000):
    """Iterate the chain from L0 until it reaches the triple-log target.

    lambda_target is Lambda = log|log delta|; the certified link
    -rho <= C_alpha (-log delta)^{-alpha} converts it to the stopping level
    L_target = log C_alpha - alpha * Lambda.  Returns the trace with the
    fitted slope of k against log|L_k| and the distance lower bound
    c1 * (m - 1) (clamped at 0).
    """
    L0 = float(L0)
    if not L0 < 0.0:
        raise ValueError("need L0 < 0 (log of a quantity in (0, 1))")
    rep = admissibility(params.n, params.alpha)
    if not rep["admissible"]:
        raise ValueError("inadmissible: alpha=%g <= threshold %g"
                         % (params.alpha, rep["threshold"]))
    target = np.log(float(C_alpha)) - params.alpha * float(lambda_target)
    Ls = [L0]
    while Ls[-1] > target:
        Ls.append(step_map(Ls[-1], params))
        if len(Ls) > max_steps:
            raise RuntimeError("chain exceeded %d steps" % max_steps)
    m = len(Ls) - 1
    arr = np.array(Ls)
    if m >= 1 and not (np.diff(arr) < 0.0).all():
        raise AssertionError("chain failed to descend strictly")
    resid = abs(closed_form_start(arr[-1], m, params) - L0) / max(abs(L0),
                                                                  1.0)
    absL = np.abs(arr)
    sel = absL >= max(1.0, abs(L0))
    slope = (float(np.polyfit(np.log(absL[sel]), np.arange(m + 1)[sel],
                              1)[0]) if sel.sum() >= 2 else 0.0)
    return ChainTrace(L_values=tuple(float(v) for v in arr), m=m,
                      closed_form_residual=float(resid), slope=slope,
                      d_B_lower_bound=max(0.0, params.c1 * (m - 1)))
