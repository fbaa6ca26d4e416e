"""Group elements, coordinate charts, and sampling for the special affine group.

The group ``G = SL2(R) x| R^2`` acts on row vectors by ``v . (g, w) = v g + w``
(a right action), with composition ``(g, w)(g~, w~) = (g g~, w g~ + w~)``.
Faithful 3x3 embedding: ``(g, w) -> [[g, 0], [w, 1]]`` acting on row 3-vectors
``(v1, v2, 1)`` from the right.

The quotient by the integer subgroup is charted by the Jacobi half-space
``H' = H x C`` with ``tau = x + i y`` and ``z = u + i v = p tau + q``; the
torus coordinates ``(p, q) = (v / y, u - v x / y)`` are the affine lattice
coordinates of ``z`` with respect to ``(tau, 1)``.  The left action on points

    (g, w) . (tau, z) = ((a tau + b) / (c tau + d), (z + w1 tau + w2) / (c tau + d))

is compatible with the composition law above, and the weight-k slash

    (phi |_k (g, w))(tau, z) = (c tau + d)^(-k) phi((g, w) . (tau, z))

is a right action on functions.  Lifting by the Iwasawa chart turns a weight-k
function on points into a function on the group:

    lift(phi)(element) = exp(i k theta) y^(k/2) phi(tau, z(element)).

The invariant measure on the quotient is ``dx dy du dv / y^3`` (equivalently
``dx dy dp dq / y^2``); its total mass is ``pi / 3`` and ``sample_masur_veech``
draws from the normalized law by exact inverse-CDF sampling, truncated at a
configurable ``y_max`` whose leftover tail mass ``(3 / pi) / y_max`` is
reported alongside the sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

__all__ = [
    "VOLUME_SL2",
    "SL2Element",
    "SAffElement",
    "IwasawaCoords",
    "JacobiPoint",
    "ModularFunction",
    "act_on_jacobi",
    "slash",
    "lift",
    "lift_eval_arrays",
    "element_from_iwasawa",
    "iwasawa_from_element",
    "point_to_element",
    "element_to_point",
    "reduce_to_fundamental",
    "MasurVeechSample",
    "sample_masur_veech",
    "inner_product",
]

#: Hyperbolic area of the modular surface; total mass of dx dy du dv / y^3
#: on the quotient (the torus fibers have unit area).
VOLUME_SL2 = math.pi / 3.0

#: Compositions between automatic determinant renormalizations.
_RENORM_EVERY = 64


@dataclass(frozen=True)
class SL2Element:
    """Real 2x2 matrix of determinant one, ``[[a, b], [c, d]]``.

    Long composition chains drift away from determinant one in floating
    point; a rescale by ``det^(-1/2)`` is applied automatically once the
    chain counter reaches a threshold, which controls drift without paying
    a square root on every product.
    """

    a: float
    b: float
    c: float
    d: float
    chain: int = field(default=0, compare=False)

    @staticmethod
    def identity() -> "SL2Element":
        return SL2Element(1.0, 0.0, 0.0, 1.0)

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def renormalized(self) -> "SL2Element":
        s = 1.0 / math.sqrt(self.det())
        return SL2Element(self.a * s, self.b * s, self.c * s, self.d * s, 0)

    def __matmul__(self, o: "SL2Element") -> "SL2Element":
        out = SL2Element(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
            max(self.chain, o.chain) + 1,
        )
        if out.chain >= _RENORM_EVERY:
            out = out.renormalized()
        return out

    def inv(self) -> "SL2Element":
        return SL2Element(self.d, -self.b, -self.c, self.a, self.chain)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])


@dataclass(frozen=True)
class SAffElement:
    """Group element ``(g, w)`` with ``w`` a row vector."""

    g: SL2Element
    w: tuple[float, float]

    @staticmethod
    def identity() -> "SAffElement":
        return SAffElement(SL2Element.identity(), (0.0, 0.0))

    @staticmethod
    def from_sl2(g: SL2Element) -> "SAffElement":
        return SAffElement(g, (0.0, 0.0))

    @staticmethod
    def translation(w1: float, w2: float) -> "SAffElement":
        return SAffElement(SL2Element.identity(), (w1, w2))

    def compose(self, o: "SAffElement") -> "SAffElement":
        g = self.g @ o.g
        w1 = self.w[0] * o.g.a + self.w[1] * o.g.c + o.w[0]
        w2 = self.w[0] * o.g.b + self.w[1] * o.g.d + o.w[1]
        return SAffElement(g, (w1, w2))

    def inverse(self) -> "SAffElement":
        gi = self.g.inv()
        w1 = -(self.w[0] * gi.a + self.w[1] * gi.c)
        w2 = -(self.w[0] * gi.b + self.w[1] * gi.d)
        return SAffElement(gi, (w1, w2))

    def matrix3(self) -> np.ndarray:
        """Faithful 3x3 embedding ``[[g, 0], [w, 1]]`` (row-vector action)."""
        return np.array([
            [self.g.a, self.g.b, 0.0],
            [self.g.c, self.g.d, 0.0],
            [self.w[0], self.w[1], 1.0],
        ])

    def apply_to_vector(self, v: tuple[float, float]) -> tuple[float, float]:
        """Affine right action ``v -> v g + w`` on a row vector."""
        return (
            v[0] * self.g.a + v[1] * self.g.c + self.w[0],
            v[0] * self.g.b + v[1] * self.g.d + self.w[1],
        )


@dataclass(frozen=True)
class IwasawaCoords:
    """NAK coordinates: horocycle ``x``, height ``y``, translation ``(w1, w2)``,
    rotation angle ``theta``.

    The element is ``([[1, x], [0, 1]], (w1, w2)) . diag(sqrt(y), 1/sqrt(y))
    . rot(theta)`` where ``rot(theta) = [[cos, sin], [-sin, cos]]``; the
    translation coordinates relate to the Jacobi point by ``w1 = v / y``,
    ``w2 = u``.
    """

    x: float
    y: float
    w1: float
    w2: float
    theta: float


@dataclass(frozen=True)
class JacobiPoint:
    """Point ``(tau, z) = (x + i y, u + i v)`` of the Jacobi half-space."""

    x: float
    y: float
    u: float = 0.0
    v: float = 0.0

    @property
    def tau(self) -> complex:
        return complex(self.x, self.y)

    @property
    def z(self) -> complex:
        return complex(self.u, self.v)

    @property
    def p(self) -> float:
        return self.v / self.y

    @property
    def q(self) -> float:
        return self.u - self.v * self.x / self.y

    @staticmethod
    def from_pq(x: float, y: float, p: float, q: float) -> "JacobiPoint":
        return JacobiPoint(x, y, u=q + p * x, v=p * y)

    @staticmethod
    def base() -> "JacobiPoint":
        return JacobiPoint(0.0, 1.0, 0.0, 0.0)


@dataclass
class ModularFunction:
    """Weight-k function on the Jacobi half-space with a vectorized evaluator.

    ``fn(x, y, u, v)`` must accept broadcastable numpy arrays and return a
    complex array; scalar evaluation at a point goes through ``at``.
    """

    fn: Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    weight: int
    meta: dict = field(default_factory=dict)

    def __call__(self, x, y, u, v):
        return self.fn(np.asarray(x, float), np.asarray(y, float),
                       np.asarray(u, float), np.asarray(v, float))

    def at(self, pt: JacobiPoint) -> complex:
        return complex(np.asarray(self.fn(
            np.asarray(pt.x), np.asarray(pt.y),
            np.asarray(pt.u), np.asarray(pt.v))))


def _act_arrays(e: SAffElement, x, y, u, v):
    """Image of points under the left action, plus the cocycle ``c tau + d``."""
    tau = x + 1j * y
    z = u + 1j * v
    jac = e.g.c * tau + e.g.d
    tau2 = (e.g.a * tau + e.g.b) / jac
    z2 = (z + e.w[0] * tau + e.w[1]) / jac
    return tau2.real, tau2.imag, z2.real, z2.imag, jac


def act_on_jacobi(e: SAffElement, pt: JacobiPoint) -> JacobiPoint:
    """Left action of the group on the Jacobi half-space."""
    x2, y2, u2, v2, _ = _act_arrays(
        e, np.asarray(pt.x), np.asarray(pt.y), np.asarray(pt.u), np.asarray(pt.v))
    return JacobiPoint(float(x2), float(y2), float(u2), float(v2))


def slash(phi: ModularFunction, e: SAffElement) -> ModularFunction:
    """Weight-k slash action ``phi -> phi |_k e``; a right action on functions."""
    k = phi.weight

    def fn(x, y, u, v):
        x2, y2, u2, v2, jac = _act_arrays(e, x, y, u, v)
        return jac ** (-k) * phi.fn(x2, y2, u2, v2)

    return ModularFunction(fn, k, meta={"slashed": True, **phi.meta})


def element_from_iwasawa(c: IwasawaCoords) -> SAffElement:
    n = SAffElement(SL2Element(1.0, c.x, 0.0, 1.0), (c.w1, c.w2))
    sq = math.sqrt(c.y)
    a = SAffElement.from_sl2(SL2Element(sq, 0.0, 0.0, 1.0 / sq))
    ct, st = math.cos(c.theta), math.sin(c.theta)
    k = SAffElement.from_sl2(SL2Element(ct, st, -st, ct))
    return n.compose(a).compose(k)


def iwasawa_from_element(e: SAffElement) -> IwasawaCoords:
    """Invert the NAK chart (theta taken in (-pi, pi])."""
    a, b, c, d = e.g.a, e.g.b, e.g.c, e.g.d
    den = c * c + d * d
    y = 1.0 / den
    x = (a * c + b * d) / den
    theta = math.atan2(-c, d)
    sq = math.sqrt(y)
    ct, st = math.cos(theta), math.sin(theta)
    # (w1, w2) = w_raw . rot(theta)^-1 . diag(sqrt(y), 1/sqrt(y))^-1
    r1 = e.w[0] * ct + e.w[1] * st
    r2 = -e.w[0] * st + e.w[1] * ct
    return IwasawaCoords(x, y, r1 / sq, r2 * sq, theta)


def point_to_element(pt: JacobiPoint, theta: float = 0.0) -> SAffElement:
    """Section of the point map: an element sending the base point to ``pt``."""
    return element_from_iwasawa(
        IwasawaCoords(pt.x, pt.y, pt.v / pt.y, pt.u, theta))


def element_to_point(e: SAffElement) -> tuple[JacobiPoint, float]:
    """Image of the base point under ``e``, plus the rotation angle."""
    c = iwasawa_from_element(e)
    return JacobiPoint(c.x, c.y, u=c.w2, v=c.w1 * c.y), c.theta


def lift(phi: ModularFunction) -> Callable[[SAffElement], complex]:
    """Lift a weight-k point function to the group.

    ``lift(phi)(e) = exp(i k theta) y^(k/2) phi(point(e))``; the result
    intertwines the slash action with right group translation and transforms
    under right rotation by the character ``exp(i k theta)`` (K-type k).
    """
    k = phi.weight

    def fn(e: SAffElement) -> complex:
        c = iwasawa_from_element(e)
        val = phi.at(JacobiPoint(c.x, c.y, u=c.w2, v=c.w1 * c.y))
        return (math.cos(k * c.theta) + 1j * math.sin(k * c.theta)) * c.y ** (k / 2.0) * val

    return fn


def lift_eval_arrays(phi: ModularFunction, gmats: np.ndarray, ws: np.ndarray) -> np.ndarray:
    """Vectorized lift evaluation.

    Parameters
    ----------
    phi:
        Weight-k modular function.
    gmats:
        Array of shape ``(..., 2, 2)`` of SL2 matrices.
    ws:
        Array of shape ``(..., 2)`` of translation rows.

    Returns
    -------
    numpy.ndarray
        Complex array of lift values, shape ``(...)``.
    """
    a = gmats[..., 0, 0]
    b = gmats[..., 0, 1]
    c = gmats[..., 1, 0]
    d = gmats[..., 1, 1]
    den = c * c + d * d
    y = 1.0 / den
    x = (a * c + b * d) / den
    theta = np.arctan2(-c, d)
    sq = np.sqrt(y)
    ct, st = np.cos(theta), np.sin(theta)
    w1 = (ws[..., 0] * ct + ws[..., 1] * st) / sq
    w2 = (-ws[..., 0] * st + ws[..., 1] * ct) * sq
    k = phi.weight
    vals = phi.fn(x, y, w2, w1 * y)
    return np.exp(1j * k * theta) * y ** (k / 2.0) * vals


_S = SL2Element(0.0, -1.0, 1.0, 0.0)


def reduce_to_fundamental(pt: JacobiPoint, max_iter: int = 128
                          ) -> tuple[JacobiPoint, SAffElement]:
    """Move a point into the fundamental domain of the integer subgroup.

    The base of the returned point satisfies ``|x| <= 1/2`` and ``|tau| >= 1``
    (ties: ``x = +1/2`` preferred over ``-1/2``; on the open half-arc
    ``|tau| = 1``, ``0 < x < 1/2`` the representative is flipped to ``x < 0``,
    while the corner is canonicalized to ``x = +1/2``), and the torus
    coordinates satisfy ``0 <= p, q < 1``.  Returns ``(reduced, gamma)`` with
    ``act_on_jacobi(gamma, pt) == reduced`` and ``gamma`` integral.

    Raises
    ------
    RuntimeError
        If the reduction loop fails to settle within ``max_iter`` steps
        (cannot happen for valid inputs with ``y > 0``).
    """
    if not (pt.y > 0.0):
        raise ValueError("point must have y > 0")
    gamma = SAffElement.identity()
    cur = pt
    for _ in range(max_iter):
        shift = -math.floor(cur.x + 0.5)
        if shift != 0:
            step = SAffElement.from_sl2(SL2Element(1.0, float(shift), 0.0, 1.0))
            gamma = step.compose(gamma)
            cur = act_on_jacobi(step, cur)
        norm = cur.x * cur.x + cur.y * cur.y
        if norm < 1.0 - 1e-15:
            step = SAffElement.from_sl2(_S)
            gamma = step.compose(gamma)
            cur = act_on_jacobi(step, cur)
            continue
        if cur.x <= -0.5:
            step = SAffElement.from_sl2(SL2Element(1.0, 1.0, 0.0, 1.0))
            gamma = step.compose(gamma)
            cur = act_on_jacobi(step, cur)
        # Arc rule applies on the open half-arc only; the corner stays at +1/2.
        if abs(norm - 1.0) < 1e-15 and 0.0 < cur.x < 0.5 - 1e-12:
            step = SAffElement.from_sl2(_S)
            gamma = step.compose(gamma)
            cur = act_on_jacobi(step, cur)
        break
    else:
        raise RuntimeError("fundamental-domain reduction did not settle")
    m1 = -math.floor(cur.p)
    m2 = -math.floor(cur.q)
    if m1 != 0 or m2 != 0:
        step = SAffElement.translation(float(m1), float(m2))
        gamma = step.compose(gamma)
        cur = act_on_jacobi(step, cur)
    return cur, gamma


@dataclass
class MasurVeechSample:
    """Batch of points drawn from the normalized invariant measure.

    Arrays ``x, y, p, q`` have common length ``n``; ``u, v`` are derived.
    ``tail_mass`` is the analytic probability mass above the ``y_max``
    truncation under the untruncated law.
    """

    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    q: np.ndarray
    seed: int
    y_max: float

    def __len__(self) -> int:
        return len(self.x)

    @property
    def u(self) -> np.ndarray:
        return self.q + self.p * self.x

    @property
    def v(self) -> np.ndarray:
        return self.p * self.y

    @property
    def tail_mass(self) -> float:
        return (3.0 / math.pi) / self.y_max

    def point(self, i: int) -> JacobiPoint:
        return JacobiPoint.from_pq(
            float(self.x[i]), float(self.y[i]), float(self.p[i]), float(self.q[i]))


def sample_masur_veech(n: int, seed: int, y_max: float = 1e3) -> MasurVeechSample:
    """Draw ``n`` points from the normalized measure ``(3/pi) dx dy dp dq / y^2``.

    Exact inverse-CDF sampling over the fundamental domain (no rejection):
    the marginal of ``x`` has density ``(3/pi)(1 - x^2)^(-1/2)`` on
    ``(-1/2, 1/2)``, the conditional of ``y`` has density proportional to
    ``y^(-2)`` on ``(sqrt(1 - x^2), y_max)``, and ``(p, q)`` are uniform on
    the unit square.  The truncation at ``y_max`` leaves tail mass
    ``(3/pi)/y_max``, reported by the sample object.
    """
    rng = np.random.default_rng(np.random.PCG64(seed))
    ux = rng.random(n)
    x = np.sin(math.pi * (ux - 0.5) / 3.0)
    y_min = np.sqrt(1.0 - x * x)
    uy = rng.random(n)
    y = y_min / (1.0 - uy * (1.0 - y_min / y_max))
    p = rng.random(n)
    q = rng.random(n)
    return MasurVeechSample(x=x, y=y, p=p, q=q, seed=seed, y_max=y_max)


def inner_product(phi1: ModularFunction, phi2: ModularFunction,
                  n_samples: int = 100_000, seed: int = 7,
                  y_max: float = 1e3, n_batches: int = 100
                  ) -> tuple[complex, float]:
    """Monte Carlo Petersson-type pairing of two weight-k functions.

    Computes ``integral of phi1 conj(phi2) y^k dx dy du dv / y^3`` over the
    quotient as ``(pi/3) E[phi1 conj(phi2) y^k]`` under the normalized
    invariant law.  Returns ``(estimate, stderr)`` with the standard error
    taken over batch means.

    Raises
    ------
    ValueError
        If the two functions carry different weights.
    """
    if phi1.weight != phi2.weight:
        raise ValueError("weights must match for the pairing")
    k = phi1.weight
    s = sample_masur_veech(n_samples, seed, y_max)
    vals = (phi1.fn(s.x, s.y, s.u, s.v)
            * np.conj(phi2.fn(s.x, s.y, s.u, s.v))
            * s.y ** k) * VOLUME_SL2
    usable = (n_samples // n_batches) * n_batches
    batches = vals[:usable].reshape(n_batches, -1).mean(axis=1)
    est = complex(batches.mean())
    err = float(np.sqrt(
        (np.abs(batches - est) ** 2).sum() / (n_batches * (n_batches - 1))))
    return est, err
