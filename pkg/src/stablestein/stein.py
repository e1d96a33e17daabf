"""Solution machinery for the characterising equation A f = h - E h(Z).

The solution is built as the integrated deviation of an
Ornstein-Uhlenbeck-type semigroup driven by the stable law,

    f(x) = - int_0^inf ( Q_t h(x) - E h(Z) ) dt,
    Q_t h(x) = E[ h( (1 - e^{-t})^{1/alpha} Z + e^{-t/alpha} x ) ],

with the whole time axis mapped to (0, 1] by eps = e^{-t}.  Two points
carry most of the numerical weight:

* the deviation is evaluated as one expectation of a *difference*,
  E[h(scale Y + shift) - h(Y)], never as a difference of expectations —
  at large t the two terms agree to ~1e-15 and separate evaluation
  would drown the integrand in cancellation noise;

* the derivative f' uses its own representation (an e^{-t/alpha}-weighted
  expectation of h'), evaluated in whichever coordinate system keeps the
  integrand resolvable: y-coordinates while the semigroup is nearly a
  point mass, z-coordinates once the driving law has spread out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from ._quad import panel_rule
from .errors import NumericalFailure
from .fracops import Evaluand, apply_L
from .stable import (DEFAULT_CONFIG, QuadratureConfig, StableParams,
                     law_table, sample)

__all__ = ["d_beta", "TestFunctionHBeta", "SteinSolution", "expected_h",
           "ou_sample", "qt_apply", "solve_f", "solve_f_prime", "residual",
           "regularity_probe", "clamped_identity", "clamped_power",
           "gaussian_bump"]


def d_beta(x, y, beta: float):
    """Concave ground cost |x-y| ^ min with its beta-power.

    Small separations are charged linearly, large ones sub-linearly;
    this is what keeps the transport distance finite for laws without
    a first moment.
    """
    w = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    return np.minimum(w, w ** beta)


_CERT_PAIRS = 10_000
_CERT_SLACK = 1e-12


@dataclass(frozen=True)
class TestFunctionHBeta:
    """A test function together with its membership certificate.

    ``value_at`` must be a numpy ufunc-style callable.  On construction
    the two Lipschitz moduli relative to the ground cost are estimated
    over randomized pairs:

        cert_small = sup |h(x)-h(y)| / |x-y|      over |x-y| <= 1,
        cert_large = sup |h(x)-h(y)| / |x-y|^beta over |x-y| >  1.

    ``strict`` says whether both stay below 1 (up to 1e-12 slack), i.e.
    whether h belongs to the unit ball of the class rather than a
    dilate of it.  Operations accept non-strict members; only claims
    about the distance itself require rescaling by the modulus.

    ``deriv_at`` (optional) is an a.e. derivative; ``deriv_panels``
    lists intervals that cover the support of h' with h' smooth in
    their interiors — anything singular must sit at a panel endpoint.
    ``limit_neg``/``limit_pos`` declare limits at -inf/+inf for bounded
    h; they sharpen the treatment of the residual tail mass.
    """

    beta: float
    value_at: Callable
    deriv_at: Callable | None = None
    deriv_panels: tuple = ()
    limit_neg: float | None = None
    limit_pos: float | None = None
    label: str = "h"
    cert_small: float = field(init=False, default=float("nan"))
    cert_large: float = field(init=False, default=float("nan"))
    deriv_unit_bound: bool = field(init=False, default=False)

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")
        rng = np.random.default_rng(1_2321)
        x = np.concatenate([3.0 * rng.standard_cauchy(_CERT_PAIRS // 2),
                            2.0 * rng.standard_normal(_CERT_PAIRS // 2)])
        np.clip(x, -1e6, 1e6, out=x)
        w = (rng.choice([-1.0, 1.0], size=_CERT_PAIRS)
             * 10.0 ** rng.uniform(-6.0, 3.0, size=_CERT_PAIRS))
        hx = np.asarray(self.value_at(x), dtype=float)
        hy = np.asarray(self.value_at(x + w), dtype=float)
        if not (np.all(np.isfinite(hx)) and np.all(np.isfinite(hy))):
            raise ValueError(f"{self.label}: non-finite values")
        ratio = np.abs(hx - hy) / d_beta(x, x + w, self.beta)
        small = np.abs(w) <= 1.0
        object.__setattr__(self, "cert_small",
                           float(ratio[small].max(initial=0.0)))
        object.__setattr__(self, "cert_large",
                           float(ratio[~small].max(initial=0.0)))
        if self.deriv_at is not None:
            # |h'| <= 1 is what licenses the weighted-h' derivative
            # representation; probe near 0 and the panel edges where a
            # blow-up would live (e.g. fractional powers).
            probes = [x, np.geomspace(1e-8, 2.0, 25)]
            probes.append(-probes[-1])
            for a, b in self.deriv_panels:
                for e in (a, b):
                    if math.isfinite(e):
                        probes.append(e + np.array([-1e-7, 1e-7]))
            hp = np.abs(np.asarray(
                self.deriv_at(np.concatenate(probes)), dtype=float))
            object.__setattr__(self, "deriv_unit_bound",
                               bool(hp.max(initial=0.0) <= 1.0 + 1e-9))

    @property
    def strict(self) -> bool:
        return (self.cert_small <= 1.0 + _CERT_SLACK
                and self.cert_large <= 1.0 + _CERT_SLACK)

    @property
    def modulus(self) -> float:
        return max(self.cert_small, self.cert_large, 1e-300)

    def __hash__(self):
        return hash((id(self.value_at), self.beta))


# ---------------------------------------------------------------------------
# Ready-made class members.

def clamped_identity(beta: float) -> TestFunctionHBeta:
    """x clipped to [-1, 1].  Not a strict member: pairs straddling the
    clamp saturate at modulus 2^(1-beta)."""
    return TestFunctionHBeta(
        beta=beta,
        value_at=lambda z: np.clip(z, -1.0, 1.0),
        deriv_at=lambda z: np.where(np.abs(z) < 1.0, 1.0, 0.0),
        deriv_panels=((-1.0, 1.0),),
        limit_neg=-1.0, limit_pos=1.0,
        label="clamp-id")


def clamped_power(q: float, beta: float) -> TestFunctionHBeta:
    """min(1, |x|^q) for 0 < q <= 1; the derivative blows up at 0, which
    is why 0 is a panel endpoint."""
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")

    def val(z):
        return np.minimum(1.0, np.abs(z) ** q)

    def der(z):
        z = np.asarray(z, dtype=float)
        inside = (np.abs(z) < 1.0) & (z != 0.0)
        out = np.zeros_like(z)
        zz = np.where(inside, z, 1.0)
        out[inside] = (q * np.abs(zz) ** (q - 1.0) * np.sign(zz))[inside]
        return out

    return TestFunctionHBeta(
        beta=beta, value_at=val, deriv_at=der,
        deriv_panels=((-1.0, 0.0), (0.0, 1.0)),
        limit_neg=1.0, limit_pos=1.0,
        label=f"power-{q:g}")


def gaussian_bump(beta: float) -> TestFunctionHBeta:
    return TestFunctionHBeta(
        beta=beta,
        value_at=lambda z: np.exp(-0.5 * np.asarray(z, dtype=float) ** 2),
        deriv_at=lambda z: -z * np.exp(-0.5 * np.asarray(z, dtype=float) ** 2),
        deriv_panels=((-12.0, 0.0), (0.0, 12.0)),
        limit_neg=0.0, limit_pos=0.0,
        label="bump")


# ---------------------------------------------------------------------------
# Semigroup primitives.

def expected_h(params: StableParams, h: TestFunctionHBeta,
               cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    if h.beta >= params.alpha:
        raise ValueError("class exponent must satisfy beta < alpha")
    tab = law_table(params)
    limits = None
    if h.limit_neg is not None and h.limit_pos is not None:
        limits = (h.limit_neg, h.limit_pos)
    val = tab.expectation(h.value_at, limits=limits)
    if not math.isfinite(val):
        raise NumericalFailure("expectation did not evaluate finitely",
                               estimate=val, error=math.inf)
    return val


def ou_sample(params: StableParams, x: float, t: float, seed,
              n: int | None = None):
    """Exact transition draw(s): x e^{-t/alpha} + (1-e^{-t})^{1/alpha} Z."""
    if t <= 0:
        raise ValueError("t must be positive")
    decay = math.exp(-t / params.alpha)
    spread = (-math.expm1(-t)) ** (1.0 / params.alpha)
    z = sample(params, 1 if n is None else n, seed)
    out = x * decay + spread * z
    return float(out[0]) if n is None else out


def qt_apply(params: StableParams, h: TestFunctionHBeta, t: float, x,
             cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Semigroup action Q_t h at one or many points."""
    if t <= 0:
        raise ValueError("t must be positive")
    if h.beta >= params.alpha:
        raise ValueError("class exponent must satisfy beta < alpha")
    tab = law_table(params)
    eps = math.exp(-t)
    scale = (-math.expm1(-t)) ** (1.0 / params.alpha)
    decay = eps ** (1.0 / params.alpha)
    arr = np.asarray(x, dtype=float)
    xs = arr.ravel()
    if scale == 0.0:  # t below resolution: the transition is a point mass
        out = np.asarray(h.value_at(decay * xs), dtype=float)
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)
    shift = decay * xs
    vals = np.asarray(h.value_at(scale * tab.exp_nodes[None, :]
                                 + shift[:, None]), dtype=float)
    far = np.asarray(h.value_at(scale * tab.far_nodes[None, :]
                                + shift[:, None]), dtype=float)
    out = vals @ tab.exp_weights + far @ tab.far_weights
    out += _sweep_correction(
        tab, h, scale, shift, vals, far,
        lambda sh, nd: np.asarray(h.value_at(scale * nd + sh[:, None]),
                                  dtype=float),
        h.beta)
    # Beyond the tabulated band the conditional law is Pareto-like;
    # evaluate h at the image of its median rather than assuming the
    # declared limit: identical once the composite saturates, and still
    # correct when scale is so small (t -> 0) that the whole band maps
    # next to shift.
    edge = 2.0 ** (1.0 / params.alpha) * 1e8
    lo = np.asarray(h.value_at(shift - scale * edge), dtype=float)
    hi = np.asarray(h.value_at(shift + scale * edge), dtype=float)
    out += tab.mass_beyond_neg * lo + tab.mass_beyond_pos * hi
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


# ---------------------------------------------------------------------------
# The solution.

_GL_TIME = 10          # nodes per dyadic panel of the time substitution
_PANEL_CAP = 100       # dyadic panels before giving up
_STOP_ABS = 1e-8       # projected-remainder target for the time integral
_X_GRID_EDGE = 400.0   # core interpolation grid reach
_FAR_Z_EDGE = 1.0e9    # log-space wing table reach; linear in log beyond


@lru_cache(maxsize=None)
def _time_panel(k: int):
    """Nodes/weights on the dyadic panel eps in [2^-(k+1), 2^-k].

    The first panel is integrated by a composite rule: the integrand has
    a fractional cusp at eps -> 1 (t -> 0 contributes a t^(beta/alpha)
    term), and for |x| beyond the kinks of h there is a band mid-panel
    where the shifted kinks sweep through the bulk of the law - a single
    Gauss rule misses both by ~1e-4.  Panels 1-3 get a mild uniform
    split for the same sweep at larger |x|; deeper panels are narrow
    enough that one rule resolves them.
    """
    lo, hi = 2.0 ** -(k + 1), 2.0 ** -k
    g, gw = np.polynomial.legendre.leggauss(_GL_TIME)
    if k == 0:
        eta = np.unique(np.concatenate(
            [[0.0], np.geomspace(1e-10, 0.5, 25),
             np.linspace(0.02, 0.5, 25)]))
        edges = 1.0 - eta[::-1]
    elif k <= 3:
        edges = np.linspace(lo, hi, 9)
    else:
        edges = np.array([lo, hi])
    nodes, wts = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        nodes.append(a + half * (g + 1.0))
        wts.append(half * gw)
    return np.concatenate(nodes), np.concatenate(wts)


def _graded_unit_rule() -> tuple[np.ndarray, np.ndarray]:
    """Composite GL-4 rule on (0, 1], geometrically refined toward 0."""
    edges = np.concatenate([[0.0], np.geomspace(1e-4, 1.0, 10)])
    g, w = np.polynomial.legendre.leggauss(4)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    return ((mid[:, None] + half[:, None] * g[None, :]).ravel(),
            (half[:, None] * w[None, :]).ravel())


_PATCH_T, _PATCH_W = _graded_unit_rule()


def _refine_swept(yc: np.ndarray, aa: np.ndarray, bb: np.ndarray,
                  shift: np.ndarray, dens_of, gfun):
    """Integrate gfun * density over [aa, bb] graded around yc per row."""
    nodes = np.concatenate(
        [yc[:, None] + (aa - yc)[:, None] * _PATCH_T,
         yc[:, None] + (bb - yc)[:, None] * _PATCH_T], axis=1)
    nw = np.concatenate([(yc - aa)[:, None] * _PATCH_W,
                         (bb - yc)[:, None] * _PATCH_W], axis=1)
    dens = dens_of(nodes.ravel()).reshape(nodes.shape)
    return gfun(shift, nodes), dens, nw


def _sweep_correction(tab, h: TestFunctionHBeta, scale: float,
                      shift: np.ndarray, grid_vals: np.ndarray,
                      far_vals: np.ndarray, gfun, local_pow: float):
    """Re-quadrature of law-grid panels crossed by images of h's kinks.

    The shared expectation grid is built once per law and resolves
    integrands that are smooth within each panel.  The composite
    y -> h(scale*y + shift) drags every sharp point of h across that
    grid as the time node varies, and a fixed order-8 panel rule loses
    ~ pdf * w^(1+q) at a |.|^q cusp parked mid-panel; summed over time
    nodes this is the dominant error of the whole construction for
    cusped h.  For each declared panel edge of h, locate its image,
    re-integrate just the panel containing it with a rule graded around
    the image, and subtract the panel's original contribution.  Images
    out in the far band (midpoint-mass rule) get the same treatment
    with the one-term tail density renormalised to the exact panel mass.

    ``grid_vals``/``far_vals`` hold the integrand already evaluated on
    the standard nodes (whose weights include the density);
    ``gfun(sel_shift, nodes)`` evaluates it on refined nodes *without*
    the density factor.  ``local_pow`` scales the worth estimate: the
    integrand varies like (scale*w)^local_pow across a panel of width w
    (0 for a jump).
    """
    feats = sorted({e for a, b in h.deriv_panels
                    for e in (a, b) if math.isfinite(e)})
    if not feats or scale <= 0.0:
        return 0.0
    edges = tab.exp_edges
    fedges = tab.far_edges
    nfar = len(fedges) - 1
    corr = np.zeros(len(shift))
    for zf in feats:
        y0 = (zf - shift) / scale
        inside = (y0 > edges[0]) & (y0 < edges[-1])
        if inside.any():
            idx = np.clip(np.searchsorted(edges, y0[inside]) - 1,
                          0, len(edges) - 2)
            a, b = edges[idx], edges[idx + 1]
            # generous error model (the observed GL-8 constant is
            # ~0.007); images parked where the density is negligible or
            # under a vanishing scale cannot move the integral
            est = (tab.pdf_many(y0[inside]) * (b - a) * 0.05
                   * np.minimum(1.0, scale * (b - a)) ** local_pow)
            act = est > 1e-8
            if act.any():
                rows = np.flatnonzero(inside)[act]
                gv, dens, nw = _refine_swept(
                    y0[inside][act], a[act], b[act], shift[rows],
                    tab.pdf_many, gfun)
                new = np.einsum("ij,ij,ij->i", gv, dens, nw)
                cols = idx[act][:, None] * 8 + np.arange(8)
                old = np.einsum("ij,ij->i", grid_vals[rows[:, None], cols],
                                tab.exp_weights[cols])
                corr[rows] += new - old
        ay = np.abs(y0)
        farin = (ay > fedges[0]) & (ay < fedges[-1])
        if farin.any():
            j = np.clip(np.searchsorted(fedges, ay[farin]) - 1, 0, nfar - 1)
            neg = y0[farin] < 0
            nidx = np.where(neg, nfar - 1 - j, nfar + j)
            mass = tab.far_weights[nidx]
            wid = fedges[j + 1] - fedges[j]
            est = mass * np.minimum(1.0, scale * wid) ** local_pow
            act = est > 1e-8
            if act.any():
                rows = np.flatnonzero(farin)[act]
                lo, hi = fedges[j][act], fedges[j + 1][act]
                a = np.where(neg[act], -hi, lo)
                b = np.where(neg[act], -lo, hi)
                gv, dens, nw = _refine_swept(
                    y0[farin][act], a, b, shift[rows], tab.pdf_many, gfun)
                # renormalise the (one-term) tail density so the panel
                # carries its exact mass; only the shape is approximate
                raw = np.einsum("ij,ij->i", dens, nw)
                new = (np.einsum("ij,ij,ij->i", gv, dens, nw)
                       * mass[act] / raw)
                old = mass[act] * far_vals[rows, nidx[act]]
                corr[rows] += new - old
    return corr


@dataclass(frozen=True)
class SteinSolution:
    """Immutable solution object for one (law, test function) pair.

    All evaluation methods are pure; the lazily built interpolation
    table is attached once under a plain attribute and never mutated
    afterwards, so concurrent readers are safe.
    """

    params: StableParams
    h: TestFunctionHBeta
    cfg: QuadratureConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if self.h.beta >= self.params.alpha:
            raise ValueError("class exponent must satisfy beta < alpha")
        object.__setattr__(self, "eh_z",
                           expected_h(self.params, self.h, self.cfg))
        object.__setattr__(self, "_itp", None)
        object.__setattr__(self, "_far", None)

    # -- f itself ----------------------------------------------------------

    def _qt_deviation(self, eps_nodes: np.ndarray,
                      xs: np.ndarray) -> np.ndarray:
        """E[h(scale Y + shift) - h(Y)] for each (eps, x); shape (ne, nx)."""
        tab = law_table(self.params)
        al = self.params.alpha
        h = self.h.value_at
        hy = np.asarray(h(tab.exp_nodes), dtype=float)
        hyf = np.asarray(h(tab.far_nodes), dtype=float)
        out = np.empty((len(eps_nodes), len(xs)))
        for j, eps in enumerate(eps_nodes):
            scale = (1.0 - eps) ** (1.0 / al)
            shift = eps ** (1.0 / al) * xs
            m = np.asarray(h(scale * tab.exp_nodes[None, :]
                             + shift[:, None]), dtype=float)
            diff = m - hy[None, :]
            mf = np.asarray(h(scale * tab.far_nodes[None, :]
                              + shift[:, None]), dtype=float)
            fdiff = mf - hyf[None, :]
            row = diff @ tab.exp_weights + fdiff @ tab.far_weights
            row += _sweep_correction(
                tab, self.h, scale, shift, diff, fdiff,
                lambda sh, nd: (np.asarray(h(scale * nd + sh[:, None]),
                                           dtype=float)
                                - np.asarray(h(nd), dtype=float)),
                self.h.beta)
            edge = 2.0 ** (1.0 / al) * 1e8  # tail-conditional median
            if self.h.limit_neg is None or self.h.limit_pos is None:
                row += tab.mass_beyond_neg * (
                    np.asarray(h(shift - scale * edge), dtype=float)
                    - float(h(-edge)))
                row += tab.mass_beyond_pos * (
                    np.asarray(h(shift + scale * edge), dtype=float)
                    - float(h(edge)))
            else:
                # declared limits make the h(Y) side exact; the composite
                # side has not saturated while scale * edge is small
                row += tab.mass_beyond_neg * (
                    np.asarray(h(shift - scale * edge), dtype=float)
                    - self.h.limit_neg)
                row += tab.mass_beyond_pos * (
                    np.asarray(h(shift + scale * edge), dtype=float)
                    - self.h.limit_pos)
            out[j] = row
        return out

    def f_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float).ravel()
        total = np.zeros(len(xs))
        prev = None
        ratio = 2.0 ** (-self.h.beta / self.params.alpha)
        for k in range(_PANEL_CAP):
            nodes, wts = _time_panel(k)
            dev = self._qt_deviation(nodes, xs)
            panel = (wts / nodes) @ dev
            total += panel
            size = float(np.max(np.abs(panel)))
            if prev is not None and prev > 0 and size > 0:
                ratio = min(size / prev, 0.97)
            prev = size
            if k >= 8 and size * ratio / (1.0 - ratio) < _STOP_ABS:
                break
        else:
            rem = size * ratio / (1.0 - ratio)
            if rem > 1e-5:
                raise NumericalFailure(
                    "time integral still moving at the panel cap",
                    estimate=float(np.max(np.abs(total))), error=rem)
        return -total

    def f_at(self, x: float) -> float:
        return float(self.f_many([x])[0])

    # -- f' ----------------------------------------------------------------

    def _deriv_expectation(self, scale: float,
                           shift: np.ndarray) -> np.ndarray:
        """E[h'(scale Y + shift_i)], switching coordinates on the spread.

        Small scale: the composite h'(scale y + shift) varies slowly in
        y, so the shared law-table grid resolves it (its kinks land
        where the density is already negligible).  Large scale: evaluate
        in z-coordinates on panels aligned with the declared structure
        of h', with the density supplied by the table.
        """
        tab = law_table(self.params)
        hp = self.h.deriv_at
        if scale < 0.5:
            m = np.asarray(hp(scale * tab.exp_nodes[None, :]
                              + shift[:, None]), dtype=float)
            mf = np.asarray(hp(scale * tab.far_nodes[None, :]
                               + shift[:, None]), dtype=float)
            out = m @ tab.exp_weights + mf @ tab.far_weights
            # h' may jump (or blow up) at its panel edges; re-quadrature
            # the grid panel each image lands in (local_pow=0: a jump
            # does not shrink with the scale)
            out += _sweep_correction(
                tab, self.h, scale, shift, m, mf,
                lambda sh, nd: np.asarray(hp(scale * nd + sh[:, None]),
                                          dtype=float),
                0.0)
            return out
        out = np.zeros(len(shift))
        for a, b in self.h.deriv_panels:
            edges = a + (b - a) * _Z_FRACS
            zj, wz = panel_rule(edges, order=8)
            hj = np.asarray(hp(zj), dtype=float)
            dens = tab.pdf_many(
                ((zj[None, :] - shift[:, None]) / scale).ravel())
            dens = dens.reshape(len(shift), len(zj)) / scale
            out += dens @ (wz * hj)
        return out

    def f_prime_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float).ravel()
        if (self.h.deriv_at is None or not self.h.deriv_panels
                or not self.h.deriv_unit_bound):
            # one batched call so both endpoints see the same time panels
            # and the quadrature error cancels in the difference
            step = 1e-4
            fv = self.f_many(np.concatenate([xs + step, xs - step]))
            return (fv[:len(xs)] - fv[len(xs):]) / (2 * step)
        al = self.params.alpha
        total = np.zeros(len(xs))
        prev = None
        ratio = 2.0 ** (-1.0 / al)
        for k in range(_PANEL_CAP):
            nodes, wts = _time_panel(k)
            panel = np.zeros(len(xs))
            for eps, wt in zip(nodes, wts):
                g = self._deriv_expectation((1.0 - eps) ** (1.0 / al),
                                            eps ** (1.0 / al) * xs)
                panel += wt * eps ** (1.0 / al - 1.0) * g
            total += panel
            size = float(np.max(np.abs(panel)))
            if prev is not None and prev > 0 and size > 0:
                ratio = min(size / prev, 0.97)
            prev = size
            if k >= 6 and size * ratio / (1.0 - ratio) < _STOP_ABS:
                break
        else:
            rem = size * ratio / (1.0 - ratio)
            if rem > 1e-5:
                raise NumericalFailure(
                    "derivative time integral still moving at the panel cap",
                    estimate=float(np.max(np.abs(total))), error=rem)
        return -total

    def f_prime_at(self, x: float) -> float:
        return float(self.f_prime_many([x])[0])

    # -- interpolation table + far model -----------------------------------

    def _table(self):
        if self._itp is None:
            wing = np.geomspace(0.01, _X_GRID_EDGE, 256)
            parts = [-wing, [0.0], wing, np.linspace(-8.0, 8.0, 321),
                     np.geomspace(1e-5, 0.01, 8), -np.geomspace(1e-5, 0.01, 8)]
            # f'' blows up like a fractional power at the kinks of h, so
            # an even grid leaves a visible pchip defect there; graded
            # knots around each kink keep the interpolant below the
            # operator's quadrature gates.
            for a, b in self.h.deriv_panels:
                for e in (a, b):
                    if math.isfinite(e) and abs(e) < _X_GRID_EDGE:
                        parts.append(e + np.geomspace(1e-5, 0.5, 16))
                        parts.append(e - np.geomspace(1e-5, 0.5, 16))
            grid = np.unique(np.concatenate(parts))
            fv = self.f_many(grid)
            fpv = self.f_prime_many(grid)
            object.__setattr__(self, "_itp",
                               (PchipInterpolator(grid, fv),
                                PchipInterpolator(grid, fpv)))
        return self._itp

    def _far_table(self):
        """pchip of f against log|x| on each wing, 400 -> 1e9.

        Out there f is dominated by -alpha (h(sign inf) - Eh) log|x|,
        i.e. nearly linear in s = log|x|, and the subleading terms decay
        like |x|^-alpha, so a coarse log grid represents it to ~1e-7.
        A closed-form drift model is not good enough (its subleading
        error re-enters through the heavy jump tails), and evaluating
        the time integral per tail-quadrature point costs minutes.
        """
        if self._far is None:
            s = np.linspace(math.log(_X_GRID_EDGE), math.log(_FAR_Z_EDGE),
                            121)
            z = np.exp(s)
            vals = self.f_many(np.concatenate([-z[::-1], z]))
            neg = PchipInterpolator(s, vals[:len(s)][::-1])
            pos = PchipInterpolator(s, vals[len(s):])
            object.__setattr__(
                self, "_far",
                (neg, pos, neg.derivative(), pos.derivative(), float(s[-1])))
        return self._far

    def _far_eval(self, z: np.ndarray, want_deriv: bool) -> np.ndarray:
        neg, pos, dneg, dpos, s_end = self._far_table()
        s = np.log(np.abs(z))
        sc = np.minimum(s, s_end)  # linear-in-log continuation past the grid
        p = z > 0
        slope = np.where(p, dpos(sc), dneg(sc))
        if want_deriv:
            return slope / z
        base = np.where(p, pos(sc), neg(sc))
        return base + slope * (s - sc)

    def as_evaluand(self) -> Evaluand:
        """f packaged for the integral operators: pchip on the core grid,
        the dedicated log-space table beyond it."""
        itp_f, itp_fp = self._table()

        def val(z):
            z = np.asarray(z, dtype=float)
            scalar = z.ndim == 0
            z = np.atleast_1d(z)
            inside = np.abs(z) <= _X_GRID_EDGE
            out = np.empty_like(z)
            out[inside] = itp_f(z[inside])
            if not inside.all():
                out[~inside] = self._far_eval(z[~inside], want_deriv=False)
            return out[0] if scalar else out

        def der(z):
            z = np.asarray(z, dtype=float)
            scalar = z.ndim == 0
            z = np.atleast_1d(z)
            inside = np.abs(z) <= _X_GRID_EDGE
            out = np.empty_like(z)
            out[inside] = itp_fp(z[inside])
            if not inside.all():
                out[~inside] = self._far_eval(z[~inside], want_deriv=True)
            return out[0] if scalar else out

        return Evaluand(val, der)

    # -- the equation itself -------------------------------------------------

    def residual_at(self, x: float) -> float:
        f_ev = self.as_evaluand()
        lhs = (apply_L(self.params, f_ev, x, self.cfg)
               - x * self.f_prime_at(x) / self.params.alpha)
        rhs = float(self.h.value_at(x)) - self.eh_z
        return lhs - rhs


_Z_FRACS = np.concatenate([
    [0.0], np.geomspace(1e-4, 0.5, 6),
    1.0 - np.geomspace(1e-4, 0.5, 6)[::-1][1:], [1.0]])


# Solutions are heavy (law table + time panels + interpolant); the free
# functions below share them per (law, h, cfg) within a session.
_SOL_CACHE: dict = {}


def _solution(params: StableParams, h: TestFunctionHBeta,
              cfg: QuadratureConfig) -> SteinSolution:
    key = (params.alpha, params.delta, id(h), id(cfg))
    sol = _SOL_CACHE.get(key)
    if sol is None or sol.h is not h:
        sol = SteinSolution(params, h, cfg)
        if len(_SOL_CACHE) > 48:
            _SOL_CACHE.clear()
        _SOL_CACHE[key] = sol
    return sol


def solve_f(params: StableParams, h: TestFunctionHBeta, x,
            cfg: QuadratureConfig = DEFAULT_CONFIG):
    sol = _solution(params, h, cfg)
    out = sol.f_many(x)
    return float(out[0]) if np.isscalar(x) else out.reshape(np.shape(x))


def solve_f_prime(params: StableParams, h: TestFunctionHBeta, x,
                  cfg: QuadratureConfig = DEFAULT_CONFIG):
    sol = _solution(params, h, cfg)
    out = sol.f_prime_many(x)
    return float(out[0]) if np.isscalar(x) else out.reshape(np.shape(x))


def residual(params: StableParams, h: TestFunctionHBeta, x: float,
             cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    return _solution(params, h, cfg).residual_at(x)


# ---------------------------------------------------------------------------
# Regularity probes.

@dataclass(frozen=True)
class ProbeEstimate:
    value: float
    cap: float
    ok: bool


def regularity_probe(params: StableParams, h: TestFunctionHBeta,
                     cfg: QuadratureConfig = DEFAULT_CONFIG,
                     pairs: int = 10_000, seed: int = 7,
                     caps: dict | None = None) -> dict:
    """Estimate the advertised norms of f over randomized pairs.

    Estimates with an explicit cap (only the derivative sup has one)
    are flagged against it; everything else is flagged on finiteness.
    Always returns a full report — a blown estimate shows up as
    ``ok=False`` rather than as an exception.
    """
    sol = _solution(params, h, cfg)
    itp_f, itp_fp = sol._table()
    al = params.alpha
    rng = np.random.default_rng(seed)

    grid = np.linspace(-20.0, 20.0, 2001)
    fp = itp_fp(grid)
    x0 = np.clip(4.0 * rng.standard_cauchy(pairs), -300.0, 300.0)
    w = (rng.choice([-1.0, 1.0], size=pairs)
         * 10.0 ** rng.uniform(-4.0, 2.0, size=pairs))
    x1 = np.clip(x0 + w, -390.0, 390.0)
    f0, f1 = itp_f(x0), itp_f(x1)
    sep = np.abs(x1 - x0)
    keep = sep > 0
    cost = d_beta(x0, x1, h.beta)

    report: dict[str, ProbeEstimate] = {}

    def put(name, value, cap=math.inf):
        default = caps.get(name, cap) if caps else cap
        ok = (value <= default * (1.0 + 1e-3) + 1e-9
              if math.isfinite(default) else math.isfinite(value))
        report[name] = ProbeEstimate(float(value), default, bool(ok))

    put("sup_fprime", float(np.max(np.abs(fp))), al)
    put("f_dbeta_modulus",
        float(np.max(np.abs(f1 - f0)[keep] / cost[keep])))

    near = keep & (sep < 1.0) & (np.abs(x0) < 19.0) & (np.abs(x1) < 19.0)
    fp0, fp1 = itp_fp(x0[near]), itp_fp(x1[near])
    dsep = sep[near]
    if al < 1.0:
        put("fprime_holder", float(np.max(np.abs(fp1 - fp0) / dsep ** al)))
    else:
        put("fprime_log_lipschitz",
            float(np.max(np.abs(fp1 - fp0)
                         / ((2.0 - np.log(dsep)) * dsep))))

    # the jump part of the operator, recovered from the equation itself:
    # L f = (h - E h) + x f'/alpha.
    def lf(z):
        return (np.asarray(h.value_at(z), dtype=float) - sol.eh_z
                + z * itp_fp(z) / al)

    put("sup_jump_part", float(np.max(np.abs(lf(grid)))))
    lf0, lf1 = lf(x0[keep]), lf(x1[keep])
    put("jump_part_dbeta_modulus",
        float(np.max(np.abs(lf1 - lf0) / cost[keep])))
    return report
