"""Special functions: Bessel, Whittaker, archimedean gamma factors, and the
Hankel-transform machinery used by the coefficient formulas.

Bessel and log-gamma evaluations delegate to scipy; Whittaker functions with
imaginary second parameter delegate to mpmath (``whitw`` / ``whitm``), which
handles the oscillatory-decaying regime in arbitrary precision.  The Hankel
transform of a compactly supported radial profile is computed by adaptive
quadrature with integrand breakpoints at the Bessel zeros, so oscillatory
cancellation is resolved explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import mpmath as mp
import numpy as np
from scipy import integrate
from scipy import special as sp

__all__ = [
    "log_gamma",
    "bessel_j",
    "whittaker_w",
    "whittaker_m",
    "whittaker_ode_residual",
    "gamma_w",
    "whittaker_asymptotic_smally",
    "RadialProfile",
    "hankel_transform",
    "t_transform",
    "s_transform",
]


def log_gamma(z) -> complex:
    """Principal-branch log of the gamma function (scipy ``loggamma``).

    Raises
    ------
    ValueError
        At the poles (non-positive integers).
    """
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == int(z.real):
        raise ValueError(f"log_gamma pole at {z}")
    return complex(sp.loggamma(z))


def bessel_j(k: int, x):
    """Bessel function of the first kind, integer order (vectorized)."""
    return sp.jv(k, x)


_MP_DPS = 30


def _whit(fun, kappa, mu, x) -> complex:
    with mp.workdps(_MP_DPS):
        val = fun(mp.mpmathify(kappa), mp.mpmathify(mu), mp.mpmathify(x))
        return complex(val)


def whittaker_w(kappa, mu, x):
    """Decaying Whittaker function ``W_{kappa, mu}(x)`` (complex ``mu`` ok).

    Accepts scalar or array ``x > 0``; evaluation is elementwise through
    mpmath at 30 digits and returned as complex128.
    """
    xs = np.asarray(x, dtype=float)
    out = np.empty(xs.shape, dtype=complex)
    for idx in np.ndindex(xs.shape):
        out[idx] = _whit(mp.whitw, kappa, mu, xs[idx])
    if out.shape == ():
        return complex(out)
    return out


def whittaker_m(kappa, mu, x):
    """Recessive Whittaker function ``M_{kappa, mu}(x)`` (complex ``mu`` ok)."""
    xs = np.asarray(x, dtype=float)
    out = np.empty(xs.shape, dtype=complex)
    for idx in np.ndindex(xs.shape):
        out[idx] = _whit(mp.whitm, kappa, mu, xs[idx])
    if out.shape == ():
        return complex(out)
    return out


def whittaker_ode_residual(kappa, mu, x: float, which: str = "w") -> float:
    """Residual of the Whittaker equation at ``x``.

    Evaluates ``f'' + (-1/4 + kappa/x + (1/4 - mu^2)/x^2) f`` in high
    precision for ``f = W`` or ``M`` and returns its magnitude, normalized
    by ``max(1, |f(x)|)``.
    """
    fun = {"w": mp.whitw, "m": mp.whitm}[which]
    with mp.workdps(_MP_DPS + 10):
        ka, m2, xx = mp.mpmathify(kappa), mp.mpmathify(mu), mp.mpf(x)
        f = lambda t: fun(ka, m2, t)
        d2 = mp.diff(f, xx, 2)
        val = f(xx)
        res = d2 + (mp.mpf(-0.25) + ka / xx + (mp.mpf(0.25) - m2 ** 2) / xx ** 2) * val
        return float(abs(res) / max(1.0, abs(val)))


def gamma_w(t: float, k: int, sgn_n: int) -> complex:
    """Archimedean factor ``Gamma(2 i t) / Gamma((1 - sgn(n) k)/2 + i t)``.

    Raises
    ------
    ValueError
        If ``t == 0`` (pole of the numerator) or the denominator sits on a
        pole.
    """
    if t == 0.0:
        raise ValueError("gamma_w has a pole at t = 0")
    num = log_gamma(2j * t)
    den = log_gamma((1.0 - sgn_n * k) / 2.0 + 1j * t)
    return complex(np.exp(num - den))


def whittaker_asymptotic_smally(k: int, n: int, t: float, y):
    """Two-term small-y expansion of ``(4 pi |n| y)^(-k/2) W_{sgn(n) k/2, i t}``.

    Returns ``gamma_w(t) X^((1-k)/2 - i t) + gamma_w(-t) X^((1-k)/2 + i t)``
    with ``X = 4 pi |n| y``; the difference from the exact rescaled Whittaker
    value is ``O(y^((3-k)/2))`` as ``y -> 0``.
    """
    sgn = 1 if n > 0 else -1
    X = 4.0 * math.pi * abs(n) * np.asarray(y, dtype=float)
    gp = gamma_w(t, k, sgn)
    gm = gamma_w(-t, k, sgn)
    ex = (1.0 - k) / 2.0
    return gp * X ** (ex - 1j * t) + gm * X ** (ex + 1j * t)


@dataclass
class RadialProfile:
    """Radial profile ``f0(r)`` on the plane with finite support radius.

    ``fn`` must be vectorized; values for ``r > support_radius`` are treated
    as zero by all consumers.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    support_radius: float
    meta: dict = field(default_factory=dict)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        vals = np.asarray(self.fn(r), dtype=complex)
        return np.where(r <= self.support_radius, vals, 0.0)


def hankel_transform(k: int, f0: RadialProfile, s, tol: float = 1e-11):
    """Order-k Hankel transform ``integral of f0(r) J_k(s r) r dr``.

    Parameters
    ----------
    k:
        Bessel order (non-negative integer).
    f0:
        Compactly supported radial profile.
    s:
        Evaluation frequency (scalar or array, ``s >= 0``).
    tol:
        Absolute quadrature tolerance per point.

    Returns
    -------
    Complex scalar or array of transform values.  The integrand is split at
    the zeros of ``J_k`` inside the support so the adaptive rule sees one
    sign lobe at a time.
    """
    ss = np.atleast_1d(np.asarray(s, dtype=float))
    R = f0.support_radius
    out = np.empty(ss.shape, dtype=complex)
    for i, sv in enumerate(ss.ravel()):
        if sv < 0:
            raise ValueError("frequency must be non-negative")
        breaks: list[float] = []
        if sv * R > math.pi:
            n_zeros = int(sv * R / math.pi) + 2
            zeros = sp.jn_zeros(k, n_zeros) / sv
            breaks = [z for z in zeros if 0.0 < z < R]
        re = integrate.quad(
            lambda r: (f0(r) * sp.jv(k, sv * r) * r).real,
            0.0, R, points=breaks or None, limit=max(50, 10 * len(breaks) + 10),
            epsabs=tol, epsrel=0.0)[0]
        im = integrate.quad(
            lambda r: (f0(r) * sp.jv(k, sv * r) * r).imag,
            0.0, R, points=breaks or None, limit=max(50, 10 * len(breaks) + 10),
            epsabs=tol, epsrel=0.0)[0]
        out.ravel()[i] = re + 1j * im
    if np.isscalar(s) or np.asarray(s).shape == ():
        return complex(out.ravel()[0])
    return out.reshape(np.asarray(s).shape)


def t_transform(j: int, h: Callable) -> Callable:
    """The substitution ``(T_j h)(y) = y h(2 pi j / sqrt(y))``."""
    if j <= 0:
        raise ValueError("index j must be a positive integer")

    def out(y):
        y = np.asarray(y, dtype=float)
        return y * np.asarray(h(2.0 * math.pi * j / np.sqrt(y)))

    return out


def s_transform(j: int, h: Callable) -> Callable:
    """Inverse substitution: ``(S_j h)(r) = (r / (2 pi j))^2 h((2 pi j)^2 / r^2)``.

    ``s_transform(j, t_transform(j, h))`` is the identity on profiles.
    """
    if j <= 0:
        raise ValueError("index j must be a positive integer")
    c = 2.0 * math.pi * j

    def out(r):
        r = np.asarray(r, dtype=float)
        return (r / c) ** 2 * np.asarray(h(c ** 2 / r ** 2))

    return out
