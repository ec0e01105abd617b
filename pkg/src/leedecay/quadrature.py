"""Numerical engines: adaptive Gauss-Kronrod quadrature, oscillatory panels,
principal values and bracketed root finding.

All integrators are vectorized: the integrand receives a 1-D array of nodes
and returns an array whose leading axis matches the nodes.  Trailing axes are
treated as independent components, each held to its own tolerance, which lets
one adaptive pass produce e.g. a whole batch of Fourier coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NoSignChange, NonConvergence, PhaseBudgetOverflow

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15 values).
_XK_HALF = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK_HALF = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG_HALF = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

XK = np.concatenate([-_XK_HALF[:-1], _XK_HALF[::-1]])
WK = np.concatenate([_WK_HALF[:-1], _WK_HALF[::-1]])
WG = np.zeros(15)
WG[1:7:2] = _WG_HALF[:3]
WG[9:15:2] = _WG_HALF[2::-1]
WG[7] = _WG_HALF[3]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and limits for the adaptive engines.

    ``max_subdivisions`` caps the number of refinement rounds (each round
    bisects every panel over its share of the error budget), ``max_panels``
    caps the total panel count and ``panel_phase_budget`` is the largest
    phase advance, in radians, allowed across one oscillatory panel.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-13
    max_subdivisions: int = 60
    panel_phase_budget: float = math.pi / 4
    max_panels: int = 200_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if not 0 < self.panel_phase_budget <= math.pi:
            raise ValueError("panel_phase_budget must lie in (0, pi]")


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class QuadResult:
    value: object
    error: object
    n_panels: int
    n_evals: int


def _breaks(a: float, b: float, points: Sequence[float]) -> np.ndarray:
    inner = sorted({float(p) for p in points if a < p < b})
    return np.array([a, *inner, b], dtype=float)


def _gk15(f, lo: np.ndarray, hi: np.ndarray):
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    x = c[:, None] + h[:, None] * XK[None, :]
    fx = np.asarray(f(x.ravel()))
    fx = fx.reshape((lo.size, 15) + fx.shape[1:])
    extra = (1,) * (fx.ndim - 2)
    hs = h.reshape((-1,) + extra)
    kron = hs * np.tensordot(WK, fx, axes=([0], [1]))
    gauss = hs * np.tensordot(WG, fx, axes=([0], [1]))
    # roundoff floor in the spirit of QUADPACK's resabs
    floor = 50 * _EPS * hs * np.tensordot(WK, np.abs(fx), axes=([0], [1]))
    err = np.maximum(np.abs(kron - gauss), floor)
    return kron, err


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    points: Sequence[float] = (),
    panels: np.ndarray | None = None,
    singular: Sequence[float] = (),
) -> QuadResult:
    """Globally adaptive 15-point Gauss-Kronrod integration of ``f`` over [a, b].

    ``points`` are mandatory breakpoints (discontinuities, kinks).  ``panels``
    optionally supplies the initial partition as an increasing array of panel
    boundaries from ``a`` to ``b``.  Endpoints listed in ``singular`` are
    treated with a polynomial change of variables whose derivative vanishes
    there, which tames integrable algebraic and logarithmic endpoint
    singularities; it cannot be combined with ``points`` or ``panels``.

    Each round computes, per component, the tolerance
    ``max(rel_tol * |value|, abs_tol)`` and stops once the summed panel error
    estimates fall below it.  Otherwise every panel carrying more than its
    equal share of that budget is bisected.

    Raises
    ------
    NonConvergence
        The tolerance is not met within ``max_subdivisions`` rounds, the panel
        cap is hit, or a panel shrinks below floating point resolution.
    """
    if not a < b:
        raise ValueError(f"integrate_adaptive needs a < b, got [{a}, {b}]")
    if singular:
        if points or panels is not None:
            raise ValueError("singular endpoints cannot be combined with breakpoints")
        return _integrate_graded(f, a, b, spec, a in singular, b in singular)
    edges = np.asarray(panels, dtype=float) if panels is not None else _breaks(a, b, points)
    if panels is not None and points:
        edges = np.union1d(edges, _breaks(a, b, points))
    lo, hi = edges[:-1].copy(), edges[1:].copy()
    val, err = _gk15(f, lo, hi)
    n_evals = 15 * lo.size

    for _ in range(spec.max_subdivisions + 1):
        total = val.sum(axis=0)
        etot = err.sum(axis=0)
        tol = np.maximum(spec.rel_tol * np.abs(total), spec.abs_tol)
        if np.all(etot <= tol):
            return QuadResult(total[()], etot[()], lo.size, n_evals)
        share = tol / lo.size
        bad = (err > share).reshape(lo.size, -1).any(axis=1)
        n_bad = int(bad.sum())
        if lo.size + n_bad > spec.max_panels:
            break
        mid = 0.5 * (lo[bad] + hi[bad])
        if np.any((mid <= lo[bad]) | (mid >= hi[bad])):
            break
        new_lo = np.concatenate([lo[bad], mid])
        new_hi = np.concatenate([mid, hi[bad]])
        v_new, e_new = _gk15(f, new_lo, new_hi)
        n_evals += 15 * new_lo.size
        keep = ~bad
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        val = np.concatenate([val[keep], v_new])
        err = np.concatenate([err[keep], e_new])

    total = val.sum(axis=0)
    raise NonConvergence(
        f"adaptive quadrature on [{a}, {b}] did not converge: "
        f"error {np.max(err.sum(axis=0)):.3e} with {lo.size} panels "
        f"(|value| ~ {np.max(np.abs(total)):.3e})"
    )


def _integrate_graded(f, a, b, spec, left, right):
    L = b - a
    if left and right:
        def x_of(u):
            return a + L * u * u * (3 - 2 * u), 6 * L * u * (1 - u)
    elif left:
        def x_of(u):
            return a + L * u * u, 2 * L * u
    else:
        def x_of(u):
            return b - L * (1 - u) ** 2, 2 * L * (1 - u)

    def g(u):
        x, jac = x_of(u)
        fx = np.asarray(f(x))
        return fx * jac.reshape(jac.shape + (1,) * (fx.ndim - 1))

    return integrate_adaptive(g, 0.0, 1.0, spec)


def oscillatory_panels(
    phase: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    budget: float = math.pi / 4,
    points: Sequence[float] = (),
    max_panels: int = 200_000,
) -> np.ndarray:
    """Panel boundaries on [a, b] such that the phase advances at most
    ``budget`` radians across every panel.

    The phase must be monotone between consecutive ``points``.  A phase with
    several components (one per column) is budgeted on its fastest component.
    """

    def advance(x0, x1):
        d = np.abs(np.asarray(phase(x1)) - np.asarray(phase(x0)))
        return d.reshape(d.shape[0], -1).max(axis=1) if d.ndim > 1 else d

    br = _breaks(a, b, points)
    need = np.ceil(advance(br[:-1], br[1:]) / budget).astype(np.int64)
    need = np.maximum(need, 1)
    if need.sum() > max_panels:
        raise PhaseBudgetOverflow(
            f"{int(need.sum())} panels required on [{a}, {b}] (cap {max_panels})"
        )
    edges = np.concatenate(
        [np.linspace(lo, hi, n + 1)[:-1] for lo, hi, n in zip(br[:-1], br[1:], need)]
        + [[b]]
    )
    # nonlinear phases: bisect until every panel honours the budget
    for _ in range(64):
        over = advance(edges[:-1], edges[1:]) > budget * (1 + 1e-12)
        if not over.any():
            return edges
        if edges.size + over.sum() > max_panels + 1:
            break
        mids = 0.5 * (edges[:-1][over] + edges[1:][over])
        edges = np.sort(np.concatenate([edges, mids]))
    raise PhaseBudgetOverflow(f"phase budget {budget} not reachable on [{a}, {b}]")


def integrate_oscillatory(
    g: Callable[[np.ndarray], np.ndarray],
    phase: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    points: Sequence[float] = (),
) -> QuadResult:
    """Integrate ``g(x) * exp(-1j * phase(x))`` over [a, b].

    The interval is first cut into panels of bounded phase advance, then
    refined adaptively.  ``phase`` may return one column per component, in
    which case ``g`` must broadcast against it.
    """
    edges = oscillatory_panels(
        phase, a, b, spec.panel_phase_budget, points, spec.max_panels
    )

    def integrand(x):
        ph = np.asarray(phase(x))
        gx = np.asarray(g(x))
        if ph.ndim > gx.ndim:
            gx = gx.reshape(gx.shape + (1,) * (ph.ndim - gx.ndim))
        return gx * np.exp(-1j * ph)

    return integrate_adaptive(integrand, a, b, spec, panels=edges)


def principal_value(
    f: Callable[[np.ndarray], np.ndarray],
    c: float,
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    levels: int = 8,
) -> float:
    """Cauchy principal value of the integral of ``f`` over [a, b], where ``f``
    has a simple pole at ``c``.

    The integral is computed with a symmetric hole ``(c - eps, c + eps)`` for
    ``eps = h/2, h/4, ...`` and extrapolated to ``eps -> 0``.  The excised
    remainder is an odd series in ``eps``, so the Richardson table eliminates
    the powers 1, 3, 5, ...
    """
    if not a < c < b:
        raise ValueError(f"principal_value needs a < c < b, got {a}, {c}, {b}")
    h = min(c - a, b - c)
    outside = 0.0
    if c - h > a:
        outside += integrate_adaptive(f, a, c - h, spec).value
    if c + h < b:
        outside += integrate_adaptive(f, c + h, b, spec).value

    def folded(s):
        return f(c + s) + f(c - s)

    eps = [h / 2 ** j for j in range(levels + 1)]
    ring = [integrate_adaptive(folded, eps[j + 1], eps[j], spec).value for j in range(levels)]
    partial = np.cumsum(ring)  # integral over eps_{j+1} <= |x - c| <= h

    table = [outside + partial]
    for p in range(1, levels):
        prev = table[-1]
        fac = 2.0 ** (2 * p - 1)
        table.append((fac * prev[1:] - prev[:-1]) / (fac - 1))
    diag = [row[-1] for row in table]
    best, check = float(np.real(diag[-1])), float(np.real(diag[-2]))
    tol = max(spec.rel_tol * abs(best), spec.abs_tol) * 100
    if not abs(best - check) <= tol:
        raise NonConvergence(
            f"principal value extrapolation stalled: {best!r} vs {check!r}"
        )
    return best


def find_root_bracketed(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-12,
    xtol: float = 0.0,
    maxiter: int = 2000,
) -> float:
    """Bisection root of ``f`` on a sign-changing bracket [a, b].

    Stops when the bracket is narrower than ``xtol + tol * max(|a|, |b|)`` or
    cannot be split further in floating point.
    """
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if not (np.sign(fa) * np.sign(fb) < 0):
        raise NoSignChange(f"f({a}) = {fa} and f({b}) = {fb} have the same sign")
    for _ in range(maxiter):
        mid = 0.5 * (a + b)
        if mid <= min(a, b) or mid >= max(a, b):
            break
        if abs(b - a) <= xtol + tol * max(abs(a), abs(b)):
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    return 0.5 * (a + b)
