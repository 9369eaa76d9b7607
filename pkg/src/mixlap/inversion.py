"""Radial Fourier inversion by partitioned Hankel quadrature.

Evaluates integrals of the form

    F(x) = int_{R^n} g(|xi|) e^{2 pi i x.xi} d xi
         = 2 pi q^{1 - n/2} int_0^inf g(r) r^{n/2} J_{n/2-1}(2 pi q r) dr,

with q = |x| > 0.  The half line is partitioned at the zeros of the Bessel
factor; each subinterval is integrated with fixed-order Gauss-Legendre
panels (geometrically graded toward r = 0 to absorb the |xi|^{2s} cusp of
the symbols used here), and the alternating sequence of partial sums is
extrapolated with Wynn's epsilon algorithm when the envelope decays too
slowly for plain summation.
"""

import functools

import numpy as np
from scipy import integrate

from .errors import AccuracyError
from .params import DEFAULT_QUAD
from .special import bessel_j, bessel_j_zeros, gamma

_GL_ORDER = 24
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)
_HEAD_LEVELS = 48  # dyadic grading depth toward r = 0


def sphere_surface_area(n):
    """Surface measure of the unit sphere in R^n."""
    return 2.0 * np.pi ** (n / 2.0) / gamma(n / 2.0)


@functools.lru_cache(maxsize=64)
def _cached_zeros(nu, count):
    return bessel_j_zeros(nu, count)


def _panelize(breaks, w_cap, w_rel=0.0):
    """Split each [breaks[i], breaks[i+1]] into equal panels.

    Panel width is capped at max(w_cap, w_rel * lo): symbols that only vary
    on scales proportional to r (the rational ones) need no absolute cap far
    from the origin.
    """
    los, his = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        width = hi - lo
        cap = max(w_cap, w_rel * lo)
        m = 1 if not np.isfinite(cap) else max(1, int(np.ceil(width / cap)))
        edges = np.linspace(lo, hi, m + 1)
        los.append(edges[:-1])
        his.append(edges[1:])
    return np.concatenate(los), np.concatenate(his)


def _graded_head(hi, w_cap, w_rel=0.0):
    """Panels covering [0, hi], geometrically refined toward 0."""
    first = hi if not np.isfinite(w_cap) else min(hi, w_cap)
    grading = first * 0.5 ** np.arange(_HEAD_LEVELS, 0, -1)
    # continue the dyadic ladder upward so [first, hi] never degenerates into
    # one long interval whose relative panel cap is set by its small left end
    up = [first]
    while up[-1] < hi:
        up.append(min(2.0 * up[-1], hi))
    breaks = np.unique(np.concatenate(([0.0], grading, up)))
    return _panelize(breaks, w_cap, w_rel)


def _gl_integrate(f, los, his):
    """Vectorized Gauss-Legendre over a batch of panels; returns per-panel integrals."""
    mid = 0.5 * (los + his)[:, None]
    half = 0.5 * (his - los)[:, None]
    nodes = mid + half * _GL_X[None, :]
    vals = f(nodes.ravel()).reshape(nodes.shape)
    return (vals * _GL_W[None, :] * half).sum(axis=1)


def _wynn_epsilon(partial_sums):
    """Wynn epsilon extrapolation; returns (estimate, error_estimate).

    The estimate is the best-converged entry of the even epsilon columns
    (smallest change from the previous even column), not the deepest one:
    deep columns are ruined by the 1/diff recursion once neighbouring
    entries agree to roundoff.
    """
    s = np.asarray(partial_sums, dtype=float)
    m = len(s)
    if m < 2:
        return s[-1], np.inf
    prev = np.zeros(m + 1)
    cur = s.copy()
    best_val, best_err = s[-1], abs(s[-1] - s[-2])
    last_even = s[-1]
    for col in range(1, m):
        diff = cur[1:] - cur[:-1]
        if len(diff) == 0 or np.any(np.abs(diff) < 1e-300):
            break
        nxt = prev[1 : len(cur)] + 1.0 / diff
        if not np.all(np.isfinite(nxt)):
            break
        prev, cur = cur, nxt
        if col % 2 == 0:  # even columns approximate the limit
            err = abs(cur[-1] - last_even)
            last_even = cur[-1]
            if err < best_err:
                best_val, best_err = cur[-1], err
    return best_val, best_err


def radial_symbol_integral(symbol, n, quad=DEFAULT_QUAD):
    """int_{R^n} g(|xi|) d xi for a radial, absolutely integrable symbol."""
    area = sphere_surface_area(n)
    val, _ = integrate.quad(
        lambda r: symbol(np.array([r]))[0] * r ** (n - 1),
        0.0,
        np.inf,
        epsabs=quad.abs_tol,
        epsrel=min(quad.rel_tol, 1e-10),
        limit=400,
    )
    return area * val


def radial_inverse_fourier(
    symbol, x_norm, n, quad=DEFAULT_QUAD, envelope_scale=None, r_max=None,
    envelope_rel=0.0,
):
    """Inverse Fourier transform of a radial symbol, evaluated at |x| = x_norm.

    ``symbol`` must accept a 1-D numpy array of radii r >= 0 and return the
    symbol values g(r).  ``envelope_scale`` caps the quadrature panel width so
    that a sharply decaying envelope is always resolved; ``r_max`` truncates
    the partition where the caller knows the envelope to be negligible;
    ``envelope_rel`` relaxes the cap proportionally to r for symbols that
    flatten out (in the logarithmic sense) away from the origin.
    """
    if x_norm < 0:
        raise ValueError("x_norm must be nonnegative")
    if x_norm == 0.0:
        return radial_symbol_integral(symbol, n, quad)

    nu = n / 2.0 - 1.0
    a = 2.0 * np.pi * x_norm
    pref = 2.0 * np.pi * x_norm ** (1.0 - n / 2.0)
    w_cap = np.inf if envelope_scale is None else max(envelope_scale / 2.0, 1e-8)

    zeros = _cached_zeros(float(nu), int(quad.max_zeros)) / a
    if r_max is not None and zeros[-1] > r_max:
        keep = max(6, int(np.searchsorted(zeros, r_max)) + 1)
        zeros = zeros[: min(keep, len(zeros))]

    def integrand(r):
        return symbol(r) * r ** (n / 2.0) * bessel_j(nu, a * r)

    # head: [0, first zero], graded toward the origin
    h_lo, h_hi = _graded_head(zeros[0], w_cap, envelope_rel)
    head = _gl_integrate(integrand, h_lo, h_hi).sum()

    # oscillatory part: one term per interval between consecutive zeros
    o_lo, o_hi = _panelize(zeros, w_cap, envelope_rel)
    panel_vals = _gl_integrate(integrand, o_lo, o_hi)
    # map panels back to their zero interval
    interval_idx = np.searchsorted(zeros[1:], o_hi, side="left")
    n_terms = len(zeros) - 1
    terms = np.zeros(n_terms)
    np.add.at(terms, interval_idx, panel_vals)

    sums = head + np.cumsum(terms)
    tol = lambda v: max(quad.abs_tol / max(abs(pref), 1e-300), quad.rel_tol * abs(v))

    # plain summation if the envelope has already killed the tail
    tail_mag = np.abs(terms)
    for k in range(3, n_terms):
        if tail_mag[k - 2 :].max(initial=0.0) <= 0.05 * tol(sums[k]):
            return pref * sums[k]

    if quad.tail_accel == "none":
        est = tail_mag[-1]
        if est > tol(sums[-1]):
            raise AccuracyError(
                f"plain Hankel summation did not converge (error ~ {pref * est:.3e})",
                achieved=pref * est,
            )
        return pref * sums[-1]

    window = min(n_terms + 1, 40)
    value, est = _wynn_epsilon(sums[-window:])
    if est > tol(value):
        raise AccuracyError(
            f"accelerated Hankel summation did not converge (error ~ {pref * est:.3e})",
            achieved=pref * est,
        )
    return pref * value
