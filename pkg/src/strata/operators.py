"""Invariant differential operators on the Jacobi half-space.

Coordinates are ``(x, y, u, v)`` with ``tau = x + i y``, ``z = u + i v``;
the alternative chart uses ``p = v / y``, ``q = u - v x / y``.  Complex
derivatives follow the usual convention ``d_tau = (d_x - i d_y) / 2`` and
``d_z = (d_u - i d_v) / 2``.

Operators
---------
* ``lowering`` / ``raising`` -- the weight-shifting Maass-type pair

      L_k = -2 i y^2 (d_taubar + v y^(-1) d_zbar),
      R_k =  2 i (d_tau + v y^(-1) d_z) + k y^(-1),

  with ``R_(k-2) L_k`` equal to the foliated Laplacian below;
* ``h_lowering`` / ``h_raising`` -- the fibre pair ``-i y d_zbar`` and
  ``i d_z`` whose composition (either order) is the vertical Laplacian;
* ``foliated`` -- second-order operator along the modular directions,

      y^2 (d_x^2 + d_y^2) + 2 y v (d_x d_u + d_y d_v) + v^2 (d_u^2 + d_v^2)
      - i k y (d_x + i d_y) - i k v (d_u + i d_v),

  equal in the ``(x, y, p, q)`` chart to ``y^2 (d_x^2 + d_y^2)
  - i k y (d_x + i d_y)`` at frozen ``(p, q)`` (both routes implemented);
* ``vertical`` -- ``(y / 4)(d_u^2 + d_v^2)``, or in the other chart
  ``(y / 4)(d_q^2 + y^(-2)(d_p - x d_q)^2)``;
* ``total`` -- the cubic invariant operator

      (k/2) y d_u (d_u + i d_v) + (i/2) y^2 d_x (d_u^2 - d_v^2)
      + i y^2 d_y d_u d_v + (i/2) y v d_u (d_u^2 + d_v^2),

  which acts on the character ``e(n x + m v / y)`` by ``-4 pi^3 n m^2``;
* ``compound`` -- ``foliated + eps * vertical``.

All appliers differentiate numerically (tensor products of fourth-order
central stencils, steps scaled by ``y`` in the ``y`` and ``v`` directions)
and return lazy ``ModularFunction`` wrappers carrying the shifted weight, so
operators compose.

Group side: ``right_regular_word`` realizes elements of the enveloping
algebra as right-invariant derivatives of functions on the group, and the
lift of a weight-k function intertwines ``foliated`` and ``total`` with the
right-regular images of twice the quadratic and cubic central elements; the
tests pin the sign conventions.

Mode level: on a seed ``beta(y) e(n x + m v / y)`` the negated foliated
operator acts as the radial operator

    (A beta)(y) = -y^2 beta'' - k y beta' + (4 pi^2 n^2 y^2 - 2 pi k n y) beta,

implemented by ``mode_apply``; ``mode_reduce_fol`` is the variant without
the first-order drift term (``A + k y d_y``), which coincides with ``A`` at
weight zero.  ``fit_lambda`` and ``eigen_residual`` work with ``A``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .enveloping import Element, GENERATORS
from .saff import ModularFunction, SAffElement, SL2Element

__all__ = [
    "partial_derivative",
    "lowering",
    "raising",
    "h_lowering",
    "h_raising",
    "foliated",
    "vertical",
    "total",
    "compound",
    "mode_apply",
    "mode_reduce_fol",
    "eigen_residual",
    "fit_lambda",
    "right_derivative",
    "right_regular_word",
    "right_regular_element",
    "quadratic_form_residual",
]


# ---------------------------------------------------------------------------
# finite-difference engine
# ---------------------------------------------------------------------------

_DEFAULT_H = {0: 0.0, 1: 1e-3, 2: 2e-3, 3: 7e-4}


@lru_cache(maxsize=None)
def _stencil(order: int) -> tuple[tuple[int, ...], tuple[float, ...]]:
    """Symmetric central-difference weights of fourth-order accuracy."""
    if order == 0:
        return (0,), (1.0,)
    p = (order + 1) // 2 + 1
    offs = list(range(-p, p + 1))
    n = len(offs)
    a = np.array([[float(o) ** m for o in offs] for m in range(n)])
    rhs = np.zeros(n)
    rhs[order] = float(math.factorial(order))
    w = np.linalg.solve(a, rhs)
    w[np.abs(w) < 1e-12] = 0.0
    return tuple(offs), tuple(w)


def partial_derivative(fn, orders: tuple[int, int, int, int],
                       x, y, u, v, h: float | None = None) -> np.ndarray:
    """Mixed partial of ``fn(x, y, u, v)`` by tensor-product central stencils.

    ``orders`` lists the derivative order in each coordinate.  Steps are
    ``h`` in ``x`` and ``u`` and ``h y`` in ``y`` and ``v`` (so the ``y``
    stencil never crosses zero); when ``h`` is omitted each axis uses an
    order-dependent default tuned for fourth-order accuracy in double
    precision.
    """
    x, y, u, v = np.broadcast_arrays(
        np.asarray(x, float), np.asarray(y, float),
        np.asarray(u, float), np.asarray(v, float))
    steps = []
    axes = []
    for axis, d in enumerate(orders):
        hd = _DEFAULT_H[d] if h is None else h
        scale = y if axis in (1, 3) else 1.0
        steps.append(hd * scale if d else None)
        offs, ws = _stencil(d)
        axes.append([(o, w) for o, w in zip(offs, ws) if w != 0.0])
    out = np.zeros(x.shape, dtype=complex)
    for combo in product(*axes):
        weight = 1.0
        for (_, w) in combo:
            weight *= w
        xx = x + (combo[0][0] * steps[0] if orders[0] else 0.0)
        yy = y + (combo[1][0] * steps[1] if orders[1] else 0.0)
        uu = u + (combo[2][0] * steps[2] if orders[2] else 0.0)
        vv = v + (combo[3][0] * steps[3] if orders[3] else 0.0)
        out = out + weight * np.asarray(fn(xx, yy, uu, vv), dtype=complex)
    for axis, d in enumerate(orders):
        if d:
            out = out / steps[axis] ** d
    return out


def _chart_partial(phi_fn, orders_pq: tuple[int, int], x, y, p, q,
                   h: float | None = None) -> np.ndarray:
    """Mixed ``d_p^a d_q^b`` of ``phi`` in the ``(x, y, p, q)`` chart.

    Differentiates ``(p, q) -> phi(x, y, q + p x, p y)`` at frozen
    ``(x, y)`` with unit-scale steps in both chart directions.
    """
    da, db = orders_pq
    ha = (_DEFAULT_H[da] if h is None else h) if da else 0.0
    hb = (_DEFAULT_H[db] if h is None else h) if db else 0.0
    offs_a, ws_a = _stencil(da)
    offs_b, ws_b = _stencil(db)
    out = np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y),
                                       np.shape(p), np.shape(q)),
                   dtype=complex)
    for oa, wa in zip(offs_a, ws_a):
        if wa == 0.0:
            continue
        pp = p + oa * ha
        for ob, wb in zip(offs_b, ws_b):
            if wb == 0.0:
                continue
            qq = q + ob * hb
            out = out + wa * wb * np.asarray(
                phi_fn(x, y, qq + pp * x, pp * y), dtype=complex)
    if da:
        out = out / ha ** da
    if db:
        out = out / hb ** db
    return out


def _wrap(phi: ModularFunction, values_fn, weight: int,
          kind: str) -> ModularFunction:
    return ModularFunction(values_fn, weight=weight,
                           meta={"kind": kind, "of": phi.meta.get("kind")})


# ---------------------------------------------------------------------------
# weight-shifting pair and fibre pair
# ---------------------------------------------------------------------------


def lowering(phi: ModularFunction) -> ModularFunction:
    """``L_k phi = -i y^2 (d_x + i d_y) phi - i y v (d_u + i d_v) phi`` (weight k-2)."""

    def fn(x, y, u, v):
        dx = partial_derivative(phi.fn, (1, 0, 0, 0), x, y, u, v)
        dy = partial_derivative(phi.fn, (0, 1, 0, 0), x, y, u, v)
        du = partial_derivative(phi.fn, (0, 0, 1, 0), x, y, u, v)
        dv = partial_derivative(phi.fn, (0, 0, 0, 1), x, y, u, v)
        y = np.asarray(y, float)
        v = np.asarray(v, float)
        return (-1j * y ** 2 * (dx + 1j * dy)
                - 1j * y * v * (du + 1j * dv))

    return _wrap(phi, fn, phi.weight - 2, "lowering")


def raising(phi: ModularFunction) -> ModularFunction:
    """``R_k phi = i (d_x - i d_y) phi + i (v/y)(d_u - i d_v) phi + (k/y) phi`` (weight k+2)."""
    k = phi.weight

    def fn(x, y, u, v):
        dx = partial_derivative(phi.fn, (1, 0, 0, 0), x, y, u, v)
        dy = partial_derivative(phi.fn, (0, 1, 0, 0), x, y, u, v)
        du = partial_derivative(phi.fn, (0, 0, 1, 0), x, y, u, v)
        dv = partial_derivative(phi.fn, (0, 0, 0, 1), x, y, u, v)
        y = np.asarray(y, float)
        v = np.asarray(v, float)
        base = np.asarray(phi.fn(x, y, u, v), dtype=complex)
        return (1j * (dx - 1j * dy)
                + 1j * (v / y) * (du - 1j * dv)
                + (k / y) * base)

    return _wrap(phi, fn, k + 2, "raising")


def h_lowering(phi: ModularFunction) -> ModularFunction:
    """Fibre lowering ``-i y d_zbar = -(i/2) y (d_u + i d_v)`` (weight k-1)."""

    def fn(x, y, u, v):
        du = partial_derivative(phi.fn, (0, 0, 1, 0), x, y, u, v)
        dv = partial_derivative(phi.fn, (0, 0, 0, 1), x, y, u, v)
        return -0.5j * np.asarray(y, float) * (du + 1j * dv)

    return _wrap(phi, fn, phi.weight - 1, "h_lowering")


def h_raising(phi: ModularFunction) -> ModularFunction:
    """Fibre raising ``i d_z = (i/2)(d_u - i d_v)`` (weight k+1)."""

    def fn(x, y, u, v):
        du = partial_derivative(phi.fn, (0, 0, 1, 0), x, y, u, v)
        dv = partial_derivative(phi.fn, (0, 0, 0, 1), x, y, u, v)
        return 0.5j * (du - 1j * dv)

    return _wrap(phi, fn, phi.weight + 1, "h_raising")


# ---------------------------------------------------------------------------
# Laplacians
# ---------------------------------------------------------------------------


def foliated(phi: ModularFunction, route: str = "uv") -> ModularFunction:
    """Foliated Laplacian; ``route`` picks the chart ("uv" or "pq")."""
    k = phi.weight
    if route not in ("uv", "pq"):
        raise ValueError("route must be 'uv' or 'pq'")

    if route == "uv":
        def fn(x, y, u, v):
            dxx = partial_derivative(phi.fn, (2, 0, 0, 0), x, y, u, v)
            dyy = partial_derivative(phi.fn, (0, 2, 0, 0), x, y, u, v)
            dxu = partial_derivative(phi.fn, (1, 0, 1, 0), x, y, u, v)
            dyv = partial_derivative(phi.fn, (0, 1, 0, 1), x, y, u, v)
            duu = partial_derivative(phi.fn, (0, 0, 2, 0), x, y, u, v)
            dvv = partial_derivative(phi.fn, (0, 0, 0, 2), x, y, u, v)
            dx = partial_derivative(phi.fn, (1, 0, 0, 0), x, y, u, v)
            dy = partial_derivative(phi.fn, (0, 1, 0, 0), x, y, u, v)
            du = partial_derivative(phi.fn, (0, 0, 1, 0), x, y, u, v)
            dv = partial_derivative(phi.fn, (0, 0, 0, 1), x, y, u, v)
            y = np.asarray(y, float)
            v = np.asarray(v, float)
            return (y ** 2 * (dxx + dyy)
                    + 2.0 * y * v * (dxu + dyv)
                    + v ** 2 * (duu + dvv)
                    - 1j * k * y * (dx + 1j * dy)
                    - 1j * k * v * (du + 1j * dv))
    else:
        def fn(x, y, u, v):
            x, y, u, v = np.broadcast_arrays(
                np.asarray(x, float), np.asarray(y, float),
                np.asarray(u, float), np.asarray(v, float))
            p = v / y
            q = u - v * x / y

            def frozen(xx, yy, _uu, _vv):
                return phi.fn(xx, yy, q + p * xx, p * yy)

            dxx = partial_derivative(frozen, (2, 0, 0, 0), x, y, u, v)
            dyy = partial_derivative(frozen, (0, 2, 0, 0), x, y, u, v)
            dx = partial_derivative(frozen, (1, 0, 0, 0), x, y, u, v)
            dy = partial_derivative(frozen, (0, 1, 0, 0), x, y, u, v)
            return (y ** 2 * (dxx + dyy)
                    - 1j * k * y * (dx + 1j * dy))

    return _wrap(phi, fn, k, "foliated")


def vertical(phi: ModularFunction, route: str = "uv") -> ModularFunction:
    """Vertical (fibre) Laplacian ``(y/4)(d_u^2 + d_v^2)``."""
    if route not in ("uv", "pq"):
        raise ValueError("route must be 'uv' or 'pq'")

    if route == "uv":
        def fn(x, y, u, v):
            duu = partial_derivative(phi.fn, (0, 0, 2, 0), x, y, u, v)
            dvv = partial_derivative(phi.fn, (0, 0, 0, 2), x, y, u, v)
            return 0.25 * np.asarray(y, float) * (duu + dvv)
    else:
        def fn(x, y, u, v):
            x, y, u, v = np.broadcast_arrays(
                np.asarray(x, float), np.asarray(y, float),
                np.asarray(u, float), np.asarray(v, float))
            p = v / y
            q = u - v * x / y
            dpp = _chart_partial(phi.fn, (2, 0), x, y, p, q)
            dqq = _chart_partial(phi.fn, (0, 2), x, y, p, q)
            dpq = _chart_partial(phi.fn, (1, 1), x, y, p, q)
            return 0.25 * y * (dqq
                               + (dpp - 2.0 * x * dpq + x ** 2 * dqq) / y ** 2)

    return _wrap(phi, fn, phi.weight, "vertical")


def total(phi: ModularFunction) -> ModularFunction:
    """Cubic invariant operator (third-order in the fibre directions)."""
    k = phi.weight

    def fn(x, y, u, v):
        duu = partial_derivative(phi.fn, (0, 0, 2, 0), x, y, u, v)
        duv = partial_derivative(phi.fn, (0, 0, 1, 1), x, y, u, v)
        dxuu = partial_derivative(phi.fn, (1, 0, 2, 0), x, y, u, v)
        dxvv = partial_derivative(phi.fn, (1, 0, 0, 2), x, y, u, v)
        dyuv = partial_derivative(phi.fn, (0, 1, 1, 1), x, y, u, v)
        duuu = partial_derivative(phi.fn, (0, 0, 3, 0), x, y, u, v)
        duvv = partial_derivative(phi.fn, (0, 0, 1, 2), x, y, u, v)
        y = np.asarray(y, float)
        v = np.asarray(v, float)
        return ((k / 2.0) * y * (duu + 1j * duv)
                + 0.5j * y ** 2 * (dxuu - dxvv)
                + 1j * y ** 2 * dyuv
                + 0.5j * y * v * (duuu + duvv))

    return _wrap(phi, fn, k, "total")


def compound(phi: ModularFunction, eps: float) -> ModularFunction:
    """``foliated + eps * vertical``."""
    fol = foliated(phi)
    ver = vertical(phi)

    def fn(x, y, u, v):
        return fol.fn(x, y, u, v) + eps * ver.fn(x, y, u, v)

    out = _wrap(phi, fn, phi.weight, "compound")
    out.meta["eps"] = eps
    return out


# ---------------------------------------------------------------------------
# mode-level operators
# ---------------------------------------------------------------------------


def _log_derivs(beta, y: np.ndarray, h: float):
    """First and second derivatives of ``s -> beta(exp(s))`` at ``s = log y``."""
    y = np.asarray(y, dtype=float)
    offs1, w1 = _stencil(1)
    offs2, w2 = _stencil(2)
    vals = {o: np.asarray(beta(y * math.exp(o * h)), dtype=complex)
            for o in sorted(set(offs1) | set(offs2))}
    d1 = sum(w * vals[o] for o, w in zip(offs1, w1) if w) / h
    d2 = sum(w * vals[o] for o, w in zip(offs2, w2) if w) / h ** 2
    return vals[0], d1, d2


def _potential(k: int, n: int, y: np.ndarray) -> np.ndarray:
    return (4.0 * math.pi ** 2 * n ** 2 * y ** 2
            - 2.0 * math.pi * k * n * y)


def mode_apply(beta, k: int, n: int, y, h: float = 1e-3) -> np.ndarray:
    """Radial operator ``A beta = -y^2 beta'' - k y beta' + V beta``.

    ``A`` is the exact action of the negated foliated Laplacian on the seed
    ``beta(y) e(n x + m v / y)``; in ``s = log y`` it reads
    ``-beta_ss + (1 - k) beta_s + V beta``.
    """
    y = np.asarray(y, dtype=float)
    b0, d1, d2 = _log_derivs(beta, y, h)
    return -d2 + (1.0 - k) * d1 + _potential(k, n, y) * b0


def mode_reduce_fol(beta, k: int, n: int, y, h: float = 1e-3) -> np.ndarray:
    """Drift-free radial operator ``-y^2 beta'' + V beta`` (``A + k y d_y``)."""
    y = np.asarray(y, dtype=float)
    b0, d1, d2 = _log_derivs(beta, y, h)
    return -(d2 - d1) + _potential(k, n, y) * b0


def fit_lambda(beta, k: int, n: int, y_grid) -> float:
    """Rayleigh quotient ``<A beta, beta> / <beta, beta>`` on a grid."""
    y = np.asarray(y_grid, dtype=float)
    vals = np.asarray(beta(y), dtype=complex)
    applied = mode_apply(beta, k, n, y)
    denom = float(np.sum(np.abs(vals) ** 2))
    if denom == 0.0:
        raise ValueError("profile vanishes on the whole grid")
    return float((np.sum(applied * np.conj(vals)) / denom).real)


def eigen_residual(beta, k: int, n: int, lam: float, y_grid) -> float:
    """Sup-norm residual ``max |A beta - lam beta| / max |beta|`` on a grid."""
    y = np.asarray(y_grid, dtype=float)
    vals = np.asarray(beta(y), dtype=complex)
    applied = mode_apply(beta, k, n, y)
    scale = float(np.max(np.abs(vals)))
    if scale == 0.0:
        raise ValueError("profile vanishes on the whole grid")
    return float(np.max(np.abs(applied - lam * vals)) / scale)


# ---------------------------------------------------------------------------
# right-regular realization on the group
# ---------------------------------------------------------------------------

_REAL_EXPANSION: dict[str, tuple[tuple[complex, str], ...]] = {
    "Z": ((-1j, "F"), (1j, "G")),
    "Xp": ((0.5, "H"), (0.5j, "F"), (0.5j, "G")),
    "Xm": ((0.5, "H"), (-0.5j, "F"), (-0.5j, "G")),
    "Yp": ((0.5, "P"), (0.5j, "Q")),
    "Ym": ((0.5, "P"), (-0.5j, "Q")),
}


def _exp_real(name: str, t: float) -> SAffElement:
    """One-parameter subgroup of a real basis generator."""
    if name == "F":
        return SAffElement.from_sl2(SL2Element(1.0, t, 0.0, 1.0))
    if name == "H":
        e = math.exp(t)
        return SAffElement.from_sl2(SL2Element(e, 0.0, 0.0, 1.0 / e))
    if name == "G":
        return SAffElement.from_sl2(SL2Element(1.0, 0.0, t, 1.0))
    if name == "P":
        return SAffElement.translation(t, 0.0)
    if name == "Q":
        return SAffElement.translation(0.0, t)
    raise ValueError(f"unknown real generator {name!r}")


def right_derivative(fun: Callable[[SAffElement], complex], e: SAffElement,
                     name: str, h: float = 1e-2) -> complex:
    """``d/dt fun(e exp(t A))`` at ``t = 0`` for a real generator ``A``."""
    offs, ws = _stencil(1)
    total_val = 0.0 + 0.0j
    for o, w in zip(offs, ws):
        if w == 0.0:
            continue
        total_val += w * fun(e.compose(_exp_real(name, o * h)))
    return total_val / h


def right_regular_word(fun: Callable[[SAffElement], complex],
                       word: Sequence[str], h: float = 1e-2
                       ) -> Callable[[SAffElement], complex]:
    """Composite right derivative along a word of real generators.

    The word acts left-to-right: ``(A, B)`` maps ``fun`` to
    ``e -> d^2/ds dt fun(e exp(s A) exp(t B))``.
    """
    if not word:
        return fun
    inner = right_regular_word(fun, word[1:], h)
    head = word[0]
    return lambda e: right_derivative(inner, e, head, h)


def right_regular_element(fun: Callable[[SAffElement], complex],
                          elem: Element, e: SAffElement,
                          h: float = 1e-2) -> complex:
    """Apply an enveloping-algebra element through the right-regular action.

    ``elem`` holds monomials in the complex basis; each letter is expanded
    complex-linearly into the real generators and the resulting real words
    are realized as nested right derivatives of ``fun`` at ``e``.
    """
    acc = 0.0 + 0.0j
    for word, coeff in elem.terms.items():
        c0 = complex(coeff)
        letters = [GENERATORS[i] for i in word]
        expansions = [_REAL_EXPANSION[name] for name in letters]
        for combo in product(*expansions):
            c = c0
            real_word = []
            for cc, rname in combo:
                c *= cc
                real_word.append(rname)
            acc += c * right_regular_word(fun, tuple(real_word), h)(e)
    return acc


# ---------------------------------------------------------------------------
# quadratic-form identity
# ---------------------------------------------------------------------------


def _gl_nodes(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * nodes + 0.5 * (a + b), 0.5 * (b - a) * weights


def quadratic_form_residual(phi: ModularFunction, psi: ModularFunction,
                            eps: float, box: dict, n_nodes: int = 14) -> float:
    """Relative defect of the integration-by-parts identity for the compound
    operator on a box (both functions must vanish near the box boundary).

    In chart coordinates ``(x, y, p, q)`` with volume ``dx dy dp dq``:

        int (-(foliated + eps vertical) phi) conj(psi) y^(k-2)
          = int y^k grad_{x,y} phi . conj(grad_{x,y} psi)
            + i k int y^(k-1) (d_x phi) conj(psi)
            + (eps/4) int y^(k-1) grad_{u,v} phi . conj(grad_{u,v} psi),

    where ``d_u = d_q`` and ``d_v = (d_p - x d_q)/y`` at frozen ``(x, y)``.
    Returns ``|lhs - rhs| / max(|lhs|, |rhs|)``.
    """
    if phi.weight != psi.weight:
        raise ValueError("weights must match")
    k = phi.weight
    xs, wx = _gl_nodes(*box["x"], n_nodes)
    ys, wy = _gl_nodes(*box["y"], n_nodes)
    ps, wp = _gl_nodes(*box["p"], n_nodes)
    qs, wq = _gl_nodes(*box["q"], n_nodes)
    x, y, p, q = np.meshgrid(xs, ys, ps, qs, indexing="ij")
    w4 = (wx[:, None, None, None] * wy[None, :, None, None]
          * wp[None, None, :, None] * wq[None, None, None, :])
    u = q + p * x
    v = p * y

    compound_vals = compound(phi, eps).fn(x, y, u, v)
    psi_vals = np.asarray(psi.fn(x, y, u, v), dtype=complex)
    lhs = np.sum(w4 * (-compound_vals) * np.conj(psi_vals) * y ** (k - 2))

    def chart_d1(f, axis):
        """First derivative along one (x, y, p, q) chart axis."""
        offs, ws = _stencil(1)
        hstep = _DEFAULT_H[1]
        acc = np.zeros(x.shape, dtype=complex)
        for o, wgt in zip(offs, ws):
            if wgt == 0.0:
                continue
            t = o * hstep
            if axis == "x":
                vals = f(x + t, y, q + p * (x + t), p * y)
            elif axis == "y":
                vals = f(x, y * (1 + t), q + p * x, p * y * (1 + t))
            elif axis == "p":
                vals = f(x, y, q + (p + t) * x, (p + t) * y)
            else:
                vals = f(x, y, (q + t) + p * x, p * y)
            acc = acc + wgt * np.asarray(vals, dtype=complex)
        der = acc / hstep
        if axis == "y":
            der = der / y
        return der

    phi_x = chart_d1(phi.fn, "x")
    phi_y = chart_d1(phi.fn, "y")
    phi_p = chart_d1(phi.fn, "p")
    phi_q = chart_d1(phi.fn, "q")
    psi_x = chart_d1(psi.fn, "x")
    psi_y = chart_d1(psi.fn, "y")
    psi_q = chart_d1(psi.fn, "q")

    phi_u = phi_q
    psi_u = psi_q
    phi_v = (phi_p - x * phi_q) / y
    psi_v = (chart_d1(psi.fn, "p") - x * psi_q) / y

    rhs = np.sum(w4 * (
        y ** k * (phi_x * np.conj(psi_x) + phi_y * np.conj(psi_y))
        + 1j * k * y ** (k - 1) * phi_x * np.conj(psi_vals)
        + 0.25 * eps * y ** (k - 1)
        * (phi_u * np.conj(psi_u) + phi_v * np.conj(psi_v))))
    return float(abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
