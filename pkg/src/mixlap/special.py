"""Special functions used by the radial Fourier inversion machinery.

Thin, contract-checked wrappers around scipy.special: Gamma, the Bessel
function of the first kind J_nu, and the modified Bessel function of the
third kind K_nu, plus positive real zeros of J_nu.  Half-integer zeros come
from the trigonometric closed forms; integer orders use scipy's dedicated
routine; other real orders fall back to McMahon asymptotics refined by
bracketed root finding.
"""

import numpy as np
from scipy import optimize
from scipy import special as sp

__all__ = ["gamma", "bessel_j", "bessel_k", "bessel_j_zeros"]


def gamma(x):
    """Gamma function for positive real argument."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("gamma requires a positive argument")
    out = sp.gamma(x)
    return float(out) if out.ndim == 0 else out


def bessel_j(nu, x):
    """Bessel function of the first kind J_nu(x), x >= 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("bessel_j requires x >= 0")
    out = sp.jv(nu, x)
    if np.any(~np.isfinite(np.atleast_1d(out)) & np.isfinite(np.atleast_1d(x))):
        raise FloatingPointError("bessel_j evaluation overflowed")
    return float(out) if out.ndim == 0 else out


def bessel_k(nu, x):
    """Modified Bessel function of the third kind K_nu(x), x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("bessel_k requires x > 0")
    out = sp.kv(nu, x)
    return float(out) if out.ndim == 0 else out


def _mcmahon_zeros(nu, count):
    k = np.arange(1, count + 1, dtype=float)
    beta = (k + 0.5 * nu - 0.25) * np.pi
    mu = 4.0 * nu * nu
    # McMahon expansion, enough to bracket each zero within half a period
    return (
        beta
        - (mu - 1) / (8 * beta)
        - 4 * (mu - 1) * (7 * mu - 31) / (3 * (8 * beta) ** 3)
    )


def bessel_j_zeros(nu, count):
    """First ``count`` positive zeros of J_nu, in increasing order."""
    if count < 1:
        raise ValueError("count must be >= 1")
    k = np.arange(1, count + 1, dtype=float)
    if nu == -0.5:  # J_{-1/2} ~ cos
        return (k - 0.5) * np.pi
    if nu == 0.5:  # J_{1/2} ~ sin
        return k * np.pi
    if float(nu).is_integer() and nu >= 0:
        return sp.jn_zeros(int(nu), count)
    approx = _mcmahon_zeros(nu, count)
    zeros = np.empty(count)
    for i, z in enumerate(approx):
        lo, hi = z - 0.6, z + 0.6
        flo, fhi = sp.jv(nu, lo), sp.jv(nu, hi)
        if flo * fhi > 0:  # widen until the zero is bracketed
            lo, hi = z - 1.4, z + 1.4
        zeros[i] = optimize.brentq(lambda t: sp.jv(nu, t), lo, hi, xtol=1e-13)
    return zeros
