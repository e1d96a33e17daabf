"""Quadrature helpers shared by the density, operator, and bound modules.

Three building blocks live here:

* cell-wise adaptive integration over a prescribed break structure,
* composite Gauss-Legendre panels for vectorised integrands,
* a sign-change-blocked tail integrator for oscillatory integrands on
  ``[u0, inf)`` with Wynn-epsilon acceleration of the block partial sums.
"""

from __future__ import annotations

import warnings
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import NumericalFailure


def quiet_quad(f, a, b, **kw):
    """scipy.integrate.quad with its warnings silenced.

    Integrands here are often piecewise-smooth (interpolants, kinked
    test functions), which makes QUADPACK grumble about roundoff while
    still returning a usable error estimate; every caller in this
    package checks that estimate against its own tolerance gate.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, a, b, **kw)

__all__ = [
    "integrate_cells",
    "panel_rule",
    "log_panel_edges",
    "wynn_epsilon",
    "oscillatory_tail",
]


def integrate_cells(f: Callable[[float], float], edges: Sequence[float],
                    rel_tol: float = 1e-9, abs_tol: float = 1e-11,
                    limit: int = 200) -> tuple[float, float]:
    """Integrate ``f`` over consecutive cells ``edges[i]..edges[i+1]``.

    Each cell goes through :func:`scipy.integrate.quad` with the absolute
    budget split evenly across cells; values and error estimates are summed.
    Returns ``(value, error)``.  No failure policy is applied here — the
    caller owns the tolerance check.
    """
    edges = np.asarray(edges, dtype=float)
    per_cell = abs_tol / max(len(edges) - 1, 1)
    total = 0.0
    err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if not b > a:
            continue
        v, e = quiet_quad(f, a, b, epsabs=per_cell, epsrel=rel_tol,
                          limit=limit)
        total += v
        err += abs(e)
    return total, err


@lru_cache(maxsize=32)
def _gl_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def panel_rule(edges: np.ndarray, order: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights over the given panel edges.

    Returns flat arrays of length ``(len(edges)-1) * order``.
    """
    x, w = _gl_rule(order)
    a = np.asarray(edges[:-1], dtype=float)[:, None]
    b = np.asarray(edges[1:], dtype=float)[:, None]
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def log_panel_edges(lo: float, hi: float, per_decade: int = 4) -> np.ndarray:
    """Geometric panel edges from ``lo`` to ``hi`` (both > 0)."""
    if not (0 < lo < hi):
        raise ValueError("log_panel_edges needs 0 < lo < hi")
    n = max(int(np.ceil(np.log10(hi / lo) * per_decade)), 1)
    return np.geomspace(lo, hi, n + 1)


def wynn_epsilon(partial_sums: Sequence[float]) -> tuple[float, float]:
    """Accelerate a sequence of partial sums with the epsilon algorithm.

    Returns ``(limit_estimate, error_estimate)`` where the error is the
    spread between the two deepest usable even-column entries.  Falls back
    to the last partial sum when the table degenerates.
    """
    s = np.asarray(partial_sums, dtype=float)
    n = len(s)
    if n == 0:
        raise ValueError("empty partial-sum sequence")
    if n < 3:
        return float(s[-1]), abs(float(s[-1] - s[0])) or abs(float(s[-1]))
    prev = np.zeros(n + 1)  # epsilon_{-1}
    cur = s.copy()          # epsilon_0
    best, best_prev = float(s[-1]), float(s[-2])
    col = 0
    while len(cur) >= 2:
        d = np.diff(cur)
        if np.any(d == 0.0) or not np.all(np.isfinite(d)):
            break
        nxt = prev[1:len(cur)] + 1.0 / d
        col += 1
        prev, cur = cur, nxt
        # Only even columns approximate the limit; odd ones are reciprocals.
        if col % 2 == 0 and len(cur) and np.all(np.isfinite(cur)):
            best_prev, best = best, float(cur[-1])
    return best, abs(best - best_prev)


def _probe_step(g: Callable[[float], float], u0: float, span: float) -> float | None:
    """Find a sampling step fine enough to expose every sign change of ``g``.

    Refines dyadically until the number of detected alternations inside
    ``[u0, u0+span]`` stops growing — a coarser step would alias past
    zeros, silently merging oscillation blocks.  Returns None when the
    integrand looks one-signed at every resolution tried.
    """
    prev = -1
    step = None
    for k in range(3, 15):
        step = span / 2 ** k
        t = u0 + step * np.arange(1, 2 ** k + 1)
        sgn = np.sign(np.array([g(ti) for ti in t]))
        changes = int(np.count_nonzero(sgn[1:] * sgn[:-1] < 0))
        if changes == 0 and k >= 7:
            return None
        if changes >= 2 and prev >= 2 and changes <= prev + max(1, prev // 8):
            return step
        prev = changes
    return step if prev >= 2 else None


def oscillatory_tail(g: Callable[[float], float], u0: float,
                     rel_tol: float = 1e-9, abs_tol: float = 1e-11,
                     max_blocks: int = 240,
                     probe_span: float | None = None) -> tuple[float, float]:
    """Integrate ``g`` over ``[u0, inf)`` for decaying, possibly oscillatory g.

    Sign changes of ``g`` are located by scan + Brent refinement; the
    integrals between consecutive zeros form a (near-)alternating series
    whose partial sums are fed to the epsilon algorithm.  When no
    oscillation is detected the routine falls back to geometric panels with
    a power-law remainder estimate folded into the error.

    Returns ``(value, error)``; raises :class:`NumericalFailure` when
    neither route reaches the requested tolerance.
    """
    span = probe_span if probe_span is not None else max(40.0, 8.0 * u0)
    step = _probe_step(g, u0, span)

    if step is None:
        return _monotone_tail(g, u0, rel_tol, abs_tol)

    # Walk zero to zero.  Blocks between consecutive roots are smooth and
    # near single-signed, so plain quad handles each one cheaply.  The
    # partial sums are accelerated with the epsilon algorithm; convergence
    # is declared only once the accelerated value stops moving as further
    # blocks arrive (the raw column spread is over-optimistic).
    sums: list[float] = []
    est_hist: list[float] = []
    total = 0.0
    left = u0
    scan = left
    g_scan = g(left)
    blocks = 0
    while blocks < max_blocks:
        nxt = scan + step
        g_nxt = g(nxt)
        if g_scan * g_nxt < 0:
            root = optimize.brentq(g, scan, nxt, xtol=1e-13 * max(1.0, nxt))
            # Block tolerances two decades under the target: the block
            # errors accumulate across the whole walk.
            v, _ = quiet_quad(g, left, root, epsabs=0.01 * abs_tol,
                                  epsrel=0.01 * rel_tol, limit=100)
            total += v
            sums.append(total)
            blocks += 1
            left = root
            if len(sums) >= 10:
                est, spread = wynn_epsilon(sums)
                est_hist.append(est)
                if len(est_hist) >= 3:
                    drift = max(abs(est_hist[-1] - est_hist[-2]),
                                abs(est_hist[-2] - est_hist[-3]))
                    err = max(drift, spread)
                    if err < abs_tol + rel_tol * abs(est):
                        return est, err
        scan, g_scan = nxt, g_nxt
        if scan > u0 + 1e7 * max(step, 1.0):
            break
    if len(sums) >= 4:
        est, spread = wynn_epsilon(sums)
        err = spread + (abs(est_hist[-1] - est_hist[-2])
                        if len(est_hist) >= 2 else abs(sums[-1] - sums[-2]))
        if err < 10 * (abs_tol + rel_tol * abs(est)) + 1e-8:
            return est, err
        raise NumericalFailure(
            "oscillatory tail integral did not converge", estimate=est,
            error=err)
    # Too few alternations found to accelerate: integrate what the scan
    # covered and treat the rest as a monotone tail.
    v, e = quiet_quad(g, u0, left, epsabs=abs_tol, epsrel=rel_tol,
                          limit=200) if left > u0 else (0.0, 0.0)
    v2, e2 = _monotone_tail(g, left, rel_tol, abs_tol)
    return v + v2, e + e2


def _monotone_tail(g: Callable[[float], float], u0: float,
                   rel_tol: float, abs_tol: float,
                   max_decades: int = 30) -> tuple[float, float]:
    """Geometric-panel tail for one-signed decaying integrands."""
    total = 0.0
    err = 0.0
    lo = u0
    last = np.inf
    small_streak = 0
    for _ in range(max_decades):
        hi = lo * 10.0 if lo > 0 else 10.0
        v, e = quiet_quad(g, lo, hi, epsabs=abs_tol, epsrel=rel_tol,
                              limit=100)
        total += v
        err += abs(e)
        tol = abs_tol + rel_tol * abs(total)
        if abs(v) < 0.25 * tol:
            small_streak += 1
            if small_streak >= 2:
                # Project the remainder off the last two panel ratios.
                if abs(last) > 0 and abs(v) < abs(last):
                    r = abs(v) / abs(last)
                    err += abs(v) * r / (1.0 - r)
                return total, err
        else:
            small_streak = 0
        last = v
        lo = hi
    raise NumericalFailure("tail integral still contributing after panel cap",
                           estimate=total, error=err + abs(last))
