"""Tests for the profile-seeded series and the classical Eisenstein layer.

Oracles
-------
* coset canonicalization against brute-force minimization;
* slash-invariance of the series under explicit integral elements;
* the reduced-coefficient identity checked through the FFT coefficient
  extractor at a height where only the two shear cosets survive;
* the series norm computed two ways (Monte Carlo pairing on the quotient
  versus the one-dimensional profile integral);
* wave-packet norms against closed-form Plancherel constants;
* the completed classical series summed directly versus its Fourier-Bessel
  expansion, and the expansion's symmetry under ``s -> 1 - s``.
"""

import math
from math import gcd

import numpy as np
import pytest
from scipy.integrate import quad

from strata.fourier import QuadratureSpec, coeff_H0_table
from strata.saff import SAffElement, SL2Element, inner_product, slash
from strata.series import (
    BetaProfile,
    beta_bump,
    beta_discrete,
    beta_norm_sq,
    beta_whittaker,
    beta_ypower,
    classical_eisenstein,
    completed_eisenstein,
    completed_eisenstein_expansion,
    coset_list,
    eisenstein,
    poincare,
    seed,
)

RNG_SEED = 20260823


def _bump_psi(t):
    """Smooth bump in the spectral parameter, supported on (2, 3)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    s = (t - 2.5) / 0.5
    m = np.abs(s) < 1.0
    out[m] = np.exp(-1.0 / (1.0 - s[m] ** 2))
    return out


PSI_SQ = quad(lambda t: float(_bump_psi(t) ** 2), 2.0, 3.0, epsabs=1e-14)[0]


# ---------------------------------------------------------------------------
# coset enumeration
# ---------------------------------------------------------------------------


def test_coset_list_covers_coprime_pairs_once():
    radius = 6
    cosets = coset_list(radius)
    seen = {(c, d) for (c, d, _, _) in cosets}
    expected = {(c, d)
                for c in range(-radius, radius + 1)
                for d in range(-radius, radius + 1)
                if (c, d) != (0, 0) and gcd(abs(c), abs(d)) == 1}
    assert seen == expected
    assert len(cosets) == len(seen)  # no duplicates
    for (c, d, a, b) in cosets:
        assert a * d - b * c == 1


def test_completion_minimizes_top_left_entry():
    for (c, d, a, b) in coset_list(5):
        if c == 0:
            assert (a, b) == (d, 0)
            continue
        # all completions differ by integer multiples of (c, d)
        for t in range(-4, 5):
            aa = a + t * c
            if t != 0:
                assert (abs(a), 0 if a > 0 else 1) <= (abs(aa), 0 if aa > 0 else 1)


def test_completion_rejects_non_coprime():
    from strata.series import _completion

    with pytest.raises(ValueError):
        _completion(2, 4)


# ---------------------------------------------------------------------------
# seed and series evaluation
# ---------------------------------------------------------------------------


def test_seed_evaluates_profile_times_character():
    beta = beta_bump(0.8, 1.6)
    phi = seed(3, 2, -1, beta)
    rng = np.random.default_rng(RNG_SEED)
    x = rng.uniform(-0.5, 0.5, 8)
    y = rng.uniform(0.9, 1.5, 8)
    u = rng.uniform(0.0, 1.0, 8)
    v = rng.uniform(0.0, 1.0, 8) * y
    want = beta(y) * np.exp(2j * math.pi * (2 * x - v / y))
    got = phi.fn(x, y, u, v)
    assert np.max(np.abs(got - want)) < 1e-14


def _sample_points(rng, n=6):
    x = rng.uniform(-0.4, 0.4, n)
    y = rng.uniform(0.9, 1.2, n)
    u = rng.uniform(0.0, 1.0, n)
    v = rng.uniform(0.0, 1.0, n) * y
    return x, y, u, v


def test_series_invariant_under_integral_elements():
    beta = beta_bump(0.8, 1.6)
    phi = poincare(3, 1, 1, beta, radius=8)
    rng = np.random.default_rng(RNG_SEED + 1)
    x, y, u, v = _sample_points(rng)
    base = phi.fn(x, y, u, v)
    t_mat = SL2Element(1, 1, 0, 1)
    s_mat = SL2Element(0, -1, 1, 0)
    elements = [
        SAffElement.from_sl2(t_mat),
        SAffElement.from_sl2(s_mat),
        SAffElement.from_sl2(t_mat @ s_mat),
        SAffElement.translation(1.0, 0.0),
        SAffElement.translation(0.0, 1.0),
        SAffElement.translation(2.0, -3.0),
        SAffElement(s_mat, (1.0, 1.0)),
    ]
    for e in elements:
        moved = slash(phi, e).fn(x, y, u, v)
        assert np.max(np.abs(moved - base)) < 5e-10


def test_eisenstein_invariant_under_inversion():
    beta = beta_bump(0.8, 1.6)
    phi = eisenstein(2, 1, beta, radius=8)
    rng = np.random.default_rng(RNG_SEED + 2)
    x, y, u, v = _sample_points(rng)
    base = phi.fn(x, y, u, v)
    e = SAffElement.from_sl2(SL2Element(0, -1, 1, 0))
    moved = slash(phi, e).fn(x, y, u, v)
    assert np.max(np.abs(moved - base)) < 5e-10


def test_series_radius_saturation():
    # compact support makes the coset sum finite: enlarging the radius past
    # the support bound must not change a single value
    beta = beta_bump(0.8, 1.6)
    rng = np.random.default_rng(RNG_SEED + 3)
    x, y, u, v = _sample_points(rng)
    small = poincare(2, 1, 1, beta, radius=4).fn(x, y, u, v)
    large = poincare(2, 1, 1, beta, radius=9).fn(x, y, u, v)
    assert np.max(np.abs(small - large)) < 1e-12


def test_series_radius_guard_raises():
    beta = beta_bump(0.8, 1.6)
    phi = poincare(2, 1, 1, beta, radius=1)
    with pytest.raises(ValueError):
        phi.fn(0.3, 0.05, 0.1, 0.02)


# ---------------------------------------------------------------------------
# reduced coefficients
# ---------------------------------------------------------------------------


def _h0_table(phi, y_star):
    spec = QuadratureSpec(nx=32, nu=8, nv=32)
    return spec, coeff_H0_table(phi, y_star, spec)


def test_reduced_coefficients_even_weight():
    # at this height |c tau + d|^2 >= y^2 > y / y0 for c != 0, so only the
    # two shear cosets contribute and the coefficient identity is exact
    beta = beta_bump(0.8, 1.6)
    y_star = 1.4
    want = beta(y_star) / math.sqrt(2.0)

    spec, table = _h0_table(eisenstein(2, 1, beta, radius=6), y_star)
    assert abs(table[0, 1 % spec.nv] - want) < 1e-10
    assert abs(table[0, -1 % spec.nv] - want) < 1e-10
    for n in range(-3, 4):
        for m in range(-3, 4):
            if n == 0 and m in (1, -1):
                continue
            assert abs(table[n % spec.nx, m % spec.nv]) < 1e-10

    spec, table = _h0_table(poincare(2, 1, 1, beta, radius=6), y_star)
    assert abs(table[1, 1 % spec.nv] - want) < 1e-10
    assert abs(table[1, -1 % spec.nv] - want) < 1e-10
    for n in range(-3, 4):
        for m in range(-3, 4):
            if n == 1 and m in (1, -1):
                continue
            assert abs(table[n % spec.nx, m % spec.nv]) < 1e-10


def test_reduced_coefficients_odd_weight_sign():
    # the negated-pair coset flips the sign of the mirrored coefficient at
    # odd weight
    beta = beta_bump(0.8, 1.6)
    y_star = 1.4
    want = beta(y_star) / math.sqrt(2.0)
    spec, table = _h0_table(poincare(3, 1, 1, beta, radius=6), y_star)
    assert abs(table[1, 1 % spec.nv] - want) < 1e-10
    assert abs(table[1, -1 % spec.nv] + want) < 1e-10


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def test_series_norm_matches_profile_integral():
    # Monte Carlo pairing over the quotient against the unfolded
    # one-dimensional integral of the profile
    beta = beta_bump(0.8, 1.6)
    phi = eisenstein(2, 1, beta, radius=6)
    want = beta_norm_sq(beta, 2, 0.7, 1.7)
    est, err = inner_product(phi, phi, n_samples=120_000, seed=11)
    assert err / want < 0.02
    assert abs(est - want) < 4.0 * err


def test_ypower_packet_norm_constant():
    # packets of unitary-axis powers: squared norm 4 pi ||psi||^2 for either
    # sign, and the two signs are orthogonal
    k = 2
    plus = beta_ypower(k, _bump_psi, (2.0, 3.0), sign=1)
    minus = beta_ypower(k, _bump_psi, (2.0, 3.0), sign=-1)
    s = np.linspace(-60.0, 60.0, 6001)
    y = np.exp(s)
    # int |beta|^2 y^(k-2) dy = int |beta|^2 y^(k-1) ds
    vp = plus(y)
    vm = minus(y)
    norm_plus = np.trapezoid(np.abs(vp) ** 2 * y ** (k - 1), s)
    norm_minus = np.trapezoid(np.abs(vm) ** 2 * y ** (k - 1), s)
    cross = np.trapezoid(vp * np.conj(vm) * y ** (k - 1), s)
    # accuracy is set by how well the node mesh resolves the sinc kernel of
    # the window, not by the trapezoid rule (the integrand is band-limited)
    want = 4.0 * math.pi * PSI_SQ
    assert abs(norm_plus - want) / want < 5e-5
    assert abs(norm_minus - want) / want < 5e-5
    assert abs(cross) / want < 5e-5


def test_whittaker_packet_norm_constant():
    # measured Plancherel constant for the normalized Whittaker packets:
    # ||beta||^2 = ||psi||^2 / (2 n^2), independent of the weight
    cases = [(2, 1, 0.5), (2, 2, 0.125)]
    for k, n, const in cases:
        beta = beta_whittaker(k, n, _bump_psi, (2.0, 3.0), n_t=32)
        s = np.linspace(-24.0, 18.0, 221)
        y = np.exp(s)
        vals = beta(y)
        got = np.trapezoid(np.abs(vals) ** 2 * y ** (k - 1), s)
        want = const * PSI_SQ
        assert abs(got - want) / want < 3e-3


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------


def test_discrete_profile_forms():
    y = np.array([0.5, 1.0, 2.0])
    up = beta_discrete(2, 1)
    down = beta_discrete(-2, -1)
    assert np.allclose(up(y), np.exp(-2 * math.pi * y))
    assert np.allclose(down(y), y ** 2 * np.exp(-2 * math.pi * y))
    with pytest.raises(ValueError):
        beta_discrete(2, -1)
    with pytest.raises(ValueError):
        beta_discrete(0, 1)


def test_bump_profile_support_and_norm():
    beta = beta_bump(0.8, 1.6)
    assert beta(0.7) == 0.0 and beta(1.7) == 0.0
    assert abs(beta(1.2) - math.exp(-1.0)) < 1e-14
    with pytest.raises(ValueError):
        beta_bump(1.6, 0.8)
    # adaptive quadrature against a dense trapezoid oracle
    want = beta_norm_sq(beta, 2, 0.7, 1.7)
    yy = np.linspace(0.7, 1.7, 20001)
    oracle = np.trapezoid(np.abs(beta(yy)) ** 2 * yy ** 0, yy)
    assert abs(want - oracle) / oracle < 1e-8


def test_whittaker_profile_requires_positive_support():
    with pytest.raises(ValueError):
        beta_whittaker(2, 1, _bump_psi, (-1.0, 2.0))
    with pytest.raises(ValueError):
        beta_ypower(2, _bump_psi, (2.0, 3.0), sign=2)


# ---------------------------------------------------------------------------
# classical Eisenstein series
# ---------------------------------------------------------------------------


def test_completed_series_two_routes_agree():
    tau = 0.3 + 0.8j
    s = 2.5
    direct = completed_eisenstein(tau, s, radius=100)
    expanded = completed_eisenstein_expansion(tau, s, n_terms=30)
    assert abs(direct - expanded) / abs(expanded) < 1e-4


def test_completed_series_functional_equation():
    tau = 0.3 + 0.8j
    for s in (2.5, 1.3):
        left = completed_eisenstein_expansion(tau, s, n_terms=30)
        right = completed_eisenstein_expansion(tau, 1.0 - s, n_terms=30)
        assert abs(left - right) / abs(left) < 1e-10


def test_raw_series_positive_and_scales():
    # sanity: the raw sum is positive for real s and dominated by the
    # identity coset high in the cusp
    val = classical_eisenstein(0.0 + 4.0j, 2.0, radius=40)
    assert val.imag == 0.0
    assert val.real > 0.0
    assert abs(val.real - 4.0 ** 2 * 1.0) / 4.0 ** 2 < 0.2
