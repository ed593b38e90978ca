"""Truncated products, prefactor fits, contour counts, perturbations,
and the zero-perturbation stability experiment.

The sin model supplies the oracle throughout: zeros at the nonzero
integers give Pi(1 - z^2/n^2) -> sin(pi z)/(pi z), so values, truncation
errors, and fitted prefactors are all checkable against closed forms.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from resonlab.hadamard import (
    ContourCountError, ProductOverflowError, build_product,
    convergence_curve, count_difference, eval_product, fit_prefactor,
    perturb_zeros, stability_experiment,
)
from resonlab.potential import make_poly_bump
from resonlab.rootscan import Rectangle, ZeroSet, match_zero_sets

TWO_OVER_PI = 2.0 / math.pi


def sin_set(n):
    pairs = [(float(k), 1) for k in range(1, n + 1)]
    pairs += [(-float(k), 1) for k in range(1, n + 1)]
    return ZeroSet.from_pairs(pairs, resolution=0.0)


# ------------------------------------------------------------ construction

def test_truncation_is_strict_by_modulus():
    zs = ZeroSet.from_pairs([(1.0, 1), (2.0, 1), (3.0, 1)])
    assert len(build_product(zs, 2.0).zeros) == 1
    assert len(build_product(zs, 2.5).zeros) == 2
    # any radius between consecutive moduli retains the same factors
    assert build_product(zs, 2.5).zeros == build_product(zs, 2.2).zeros


def test_origin_zero_must_live_in_the_prefactor():
    zs = ZeroSet.from_pairs([(0.0, 1), (1.0, 1)])
    with pytest.raises(ValueError):
        build_product(zs, 2.0)
    with pytest.raises(ValueError):
        build_product(zs, 2.0, m=1)
    with pytest.raises(ValueError):
        build_product(sin_set(2), 0.0)


# ------------------------------------------------------------ evaluation

def test_eval_trivia_exact():
    one = build_product(ZeroSet(()), 1.0)
    assert eval_product(one, 3.0 + 4.0j) == 1.0
    lin = build_product(ZeroSet.from_pairs([(1.0, 1)]), 2.0)
    assert eval_product(lin, 2.0) == -1.0
    assert eval_product(lin, 1.0) == 0.0
    # z = 0 with m = 0 reads off the constant exactly
    tilted = build_product(ZeroSet.from_pairs([(2.0, 1)]), 3.0, c=0.7 + 0.1j)
    assert eval_product(tilted, 0.0) == 0.7 + 0.1j


def test_eval_pure_exponential():
    p = build_product(ZeroSet(()), 1.0, kappa=2.0)
    assert eval_product(p, 10j) == pytest.approx(math.exp(-20.0), rel=1e-12)


def test_eval_origin_order():
    p = build_product(ZeroSet.from_pairs([(1.5, 1)]), 2.0, c=3.0, m=2)
    assert eval_product(p, 0.0) == 0.0
    assert eval_product(p, 0.5) == pytest.approx(3.0 * 0.25 * (1 - 0.5 / 1.5))


def test_sin_model_value_against_partial_product_oracle():
    p = build_product(sin_set(200), 200.5)
    val = eval_product(p, 0.5)
    ns = np.arange(1, 201, dtype=float)
    oracle = np.prod(1.0 - 0.25 / ns ** 2)
    assert abs(val - oracle) <= 1e-13
    assert abs(val - TWO_OVER_PI) <= 1e-2


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(min_magnitude=0.3, max_magnitude=5.0,
                                   allow_nan=False, allow_infinity=False),
                min_size=0, max_size=8),
       st.complex_numbers(max_magnitude=3.0, allow_nan=False,
                          allow_infinity=False))
def test_appending_a_zero_multiplies_exactly(zeros, z):
    base = ZeroSet.from_pairs([(w, 1) for w in zeros], resolution=0.0)
    z0 = 9.0 + 1.5j  # strictly largest modulus, so it is the final factor
    ext = ZeroSet.from_pairs(list(base) + [(z0, 1)], resolution=0.0)
    lhs = eval_product(build_product(ext, 20.0), z)
    rhs = eval_product(build_product(base, 20.0), z) * (1.0 - z / z0)
    assert lhs == rhs


def test_eval_rescale_keeps_huge_magnitudes_honest():
    # e^{+-650} is representable but exp() alone would overflow the seed
    p = build_product(ZeroSet(()), 1.0, kappa=1.0)
    assert eval_product(p, -650j) == pytest.approx(math.exp(650.0), rel=1e-12)
    assert eval_product(p, 650j) == pytest.approx(math.exp(-650.0), rel=1e-12)


def test_eval_overflow_reports_log_value():
    p = build_product(ZeroSet(()), 1.0, kappa=2.0)
    with pytest.raises(ProductOverflowError) as info:
        eval_product(p, -1500j)
    assert info.value.log_value.real == pytest.approx(3000.0, rel=1e-9)
    with pytest.raises(ProductOverflowError) as info:
        eval_product(p, 1500j)
    assert info.value.log_value.real == pytest.approx(-3000.0, rel=1e-9)


# ------------------------------------------------------------ prefactor fit

def test_fit_recovers_trivial_prefactor_of_sinc():
    xs = np.array([0.1, 0.2, 0.35, 0.45, 0.6])
    samples = [(x, np.sinc(x)) for x in xs]
    c, m, kappa = fit_prefactor(samples, sin_set(100), 100.5)
    assert m == 0
    assert abs(c - 1.0) <= 1e-2
    assert abs(kappa) <= 1e-2


def test_fit_recovers_pure_exponential_factor_exactly():
    zs = sin_set(3)
    base = build_product(zs, 3.5)
    xs = 0.05 + 0.3 * np.arange(6)
    samples = [(x, 0.7 * np.exp(2j * x) * eval_product(base, x)) for x in xs]
    c, _, kappa = fit_prefactor(samples, zs, 3.5)
    assert abs(kappa - 2.0) <= 1e-6
    assert abs(c - 0.7) <= 1e-6


def test_fit_rejects_degenerate_samples():
    zs = sin_set(3)
    with pytest.raises(ValueError):
        fit_prefactor([(0.1, 1.0), (0.2, 1.0)], zs, 3.5)
    with pytest.raises(ValueError):
        fit_prefactor([(0.1, 1.0), (0.2 + 0.3j, 1.0), (0.3, 1.0)], zs, 3.5)
    with pytest.raises(ValueError):
        fit_prefactor([(0.1, 1.0)] * 4, zs, 3.5)
    with pytest.raises(ValueError):  # sample on a zero of the product
        fit_prefactor([(1.0, 1.0), (0.2, 1.0), (0.3, 1.0)], zs, 3.5)


# ------------------------------------------------------------ convergence

def test_convergence_curve_sin_model():
    curve = convergence_curve(sin_set(200), (1.0, 0, 0.0), 0.5,
                              (25.0, 50.0, 100.0, 200.0))
    errs = [abs(v - TWO_OVER_PI) for v in curve.values]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 1e-2
    for a, b, d in zip(curve.values, curve.values[1:], curve.differences):
        assert d == b - a


def test_convergence_curve_special_points():
    zs = ZeroSet.from_pairs([(2.0, 1), (5.0, 1)])
    hit = convergence_curve(zs, (1.0, 0, 0.0), 2.0, (1.5, 3.5, 6.5))
    assert hit.values[0] != 0.0
    assert hit.values[1] == 0.0 and hit.values[2] == 0.0
    const = convergence_curve(zs, (2.5 + 1j, 0, 0.7), 0.0, (1.5, 3.5))
    assert const.values == (2.5 + 1j, 2.5 + 1j)
    with pytest.raises(ValueError):
        convergence_curve(zs, (1.0, 0, 0.0), 0.5, (3.5, 1.5))


# ------------------------------------------------------------ contour counts

def test_count_difference_equal_sets_is_zero():
    z = sin_set(20)
    n, raw = count_difference(z, z, 10.5, 1.0)
    assert n == 0
    assert abs(raw) <= 1e-12


def test_count_difference_detects_a_migrated_zero():
    z1 = sin_set(20)
    moved = [(z, m) for z, m in z1 if z != 5.0] + [(11.2, 1)]
    z2 = ZeroSet.from_pairs(moved, resolution=0.0)
    n, raw = count_difference(z1, z2, 10.5, 1.0)
    assert n == 1
    assert abs(raw - 1) <= 1e-6


def test_count_difference_no_crossing_under_small_perturbation():
    z1 = sin_set(20)
    z2 = perturb_zeros(z1, 1e-4, "random-in-disk", seed=3)
    n, raw = count_difference(z1, z2, 10.5, 1.0)
    assert n == 0
    assert abs(raw) <= 1e-6


def test_count_difference_small_strip_invariance():
    # with only real zeros the count must not depend on the strip height
    z1 = sin_set(20)
    moved = [(z, m) for z, m in z1 if z != 5.0] + [(11.2, 1)]
    z2 = ZeroSet.from_pairs(moved, resolution=0.0)
    for K in (1.0, 0.1, 1e-3):
        assert count_difference(z1, z1, 10.5, K).n_diff == 0
        assert count_difference(z1, z2, 10.5, K).n_diff == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_count_difference_raw_is_always_near_integer(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    locs = rng.uniform(0.3, 9.7, n) + 1j * rng.uniform(-0.9, 0.9, n)
    z1 = ZeroSet.from_pairs([(z, 1) for z in locs], resolution=0.0)
    z2 = perturb_zeros(z1, float(rng.uniform(0.0, 0.05)),
                       "random-in-disk", seed=seed)
    n_diff, raw = count_difference(z1, z2, 10.0, 1.0)
    assert abs(raw - n_diff) <= 1e-6


def test_count_difference_refuses_contour_riding_zeros():
    K = 1.0
    scale = 10.5
    offsets = (0.0, 2.3e-6, -2.3e-6, 5.1e-6, -5.1e-6)
    pinned = [(complex(1.0 + j, K + d * scale), 1)
              for j, d in enumerate(offsets)]
    z1 = ZeroSet.from_pairs(pinned, resolution=0.0)
    with pytest.raises(ContourCountError):
        count_difference(z1, z1, 10.5, K)


# ------------------------------------------------------------ perturbations

def conj_closed(zs: ZeroSet, tol=1e-12) -> bool:
    locs = zs.locations()
    return all(np.min(np.abs(np.conj(z) - locs)) <= tol * (1 + abs(z))
               for z in locs)


def mixed_set():
    return ZeroSet.from_pairs(
        [(2.0 + 1.0j, 1), (2.0 - 1.0j, 1), (4.0 + 0.5j, 2), (4.0 - 0.5j, 2),
         (3.0, 1), (-1.5, 1)], resolution=0.0)


def test_perturb_zero_delta_is_identity():
    z = mixed_set()
    for mode in ("uniform-shift", "random-in-disk"):
        assert perturb_zeros(z, 0.0, mode, seed=7) == z


def test_perturb_bounds_reality_and_determinism():
    z = mixed_set()
    out = perturb_zeros(z, 1e-3, "random-in-disk", seed=5)
    assert match_zero_sets(z, out).sup_distance <= 1e-3
    reals_in = sorted(w.real for w, _ in z if w.imag == 0.0)
    reals_out = sorted(w.real for w, _ in out if w.imag == 0.0)
    assert len(reals_in) == len(reals_out) == 2
    assert out == perturb_zeros(z, 1e-3, "random-in-disk", seed=5)
    assert out != perturb_zeros(z, 1e-3, "random-in-disk", seed=6)


def test_perturb_preserves_conjugate_symmetry():
    z = mixed_set()
    for mode in ("uniform-shift", "random-in-disk"):
        assert conj_closed(perturb_zeros(z, 1e-2, mode, seed=11))


def test_perturb_uniform_shift_geometry():
    z = mixed_set()
    out = perturb_zeros(z, 1e-2, "uniform-shift", seed=11)
    pairing = dict(match_zero_sets(z, out).pairs)
    moves = {a: b - a for a, b in pairing.items()}
    upper = [moves[a] for a in moves if a.imag > 0]
    assert all(abs(d - upper[0]) <= 1e-15 for d in upper)
    assert abs(abs(upper[0]) - 1e-2) <= 1e-15
    real_moves = [moves[a] for a in moves if a.imag == 0]
    assert all(d.imag == 0.0 for d in real_moves)
    assert all(abs(d.real - upper[0].real) <= 1e-15 for d in real_moves)


def test_perturb_displacements_scale_linearly_in_delta():
    z = mixed_set()
    big = perturb_zeros(z, 1e-1, "random-in-disk", seed=4)
    small = perturb_zeros(z, 1e-2, "random-in-disk", seed=4)
    mb = dict(match_zero_sets(z, big).pairs)
    ms = dict(match_zero_sets(z, small).pairs)
    for a in mb:
        assert abs((mb[a] - a) - 10.0 * (ms[a] - a)) <= 1e-12


def test_perturb_validation():
    z = mixed_set()
    with pytest.raises(ValueError):
        perturb_zeros(z, -1e-3, "random-in-disk", seed=0)
    with pytest.raises(ValueError):
        perturb_zeros(z, 1e-3, "sideways", seed=0)


# ------------------------------------------------------------ stability

def test_stability_experiment_poly_bump():
    table = stability_experiment(
        make_poly_bump(), Rectangle(0.5, 12.0, -4.0, 4.0),
        (1e-3, 1e-1, 0.0, 1e-2), 12.5, np.linspace(0.0, 10.0, 101), seed=42)
    deltas = [r.delta for r in table.rows]
    assert deltas == sorted(deltas, reverse=True)
    sups = [r.sup_diff for r in table.rows]
    assert all(b < a for a, b in zip(sups, sups[1:]))
    assert sups[-1] == 0.0  # the delta = 0 row
    for r in table.rows:
        assert r.error is None
        assert r.n_diff == 0
        assert r.zero_sup_distance <= r.delta
        assert r.grid_size == 101
    # evenness mirroring doubles the scanned zeros
    assert len(table.base_zeros) == 12
    c, m, kappa = table.prefactor
    assert m == 0 and abs(kappa) < 1e-6 and abs(c.imag) < 1e-9


def test_stability_table_serialization():
    table = stability_experiment(
        make_poly_bump(), Rectangle(0.5, 12.0, -4.0, 4.0),
        (1e-2, 1e-3), 12.5, np.linspace(0.0, 10.0, 51), seed=1)
    text = table.to_text()
    lines = text.strip().splitlines()
    assert lines[0] == "delta,sup_diff,n_diff,zero_sup_distance,R,K,grid_size"
    assert len(lines) == 3
    first = lines[1].split(",")
    assert float(first[0]) == 1e-2
    assert int(first[2]) == 0
    assert int(first[6]) == 51


def test_stability_failed_rows_are_marked_not_fatal():
    table = stability_experiment(
        make_poly_bump(), Rectangle(0.5, 12.0, -4.0, 4.0),
        (1e-2, 1e-3), 12.5, np.linspace(0.0, 10.0, 21), mode="sideways")
    assert len(table.rows) == 2
    for r in table.rows:
        assert r.error is not None and "sideways" in r.error
        assert math.isnan(r.sup_diff)
        assert r.n_diff is None
    assert "# failed:" in table.to_text()


def test_stability_rejects_origin_straddling_rectangle():
    with pytest.raises(ValueError):
        stability_experiment(make_poly_bump(), Rectangle(-1.0, 12.0, -4.0, 4.0),
                             (1e-2,), 12.5, np.linspace(0.0, 10.0, 21))
