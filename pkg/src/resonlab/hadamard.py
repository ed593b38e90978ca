"""Truncated Cartwright products and the reconstruction stability experiment.

A function of Cartwright class is pinned down by its zeros up to the
prefactor c z^m e^{i kappa z}; truncating the product at modulus R gives a
computable reconstruction from finitely many zeros.  This module builds and
evaluates such products, fits the prefactor from real-axis samples, counts
zeros of two reconstructions inside a strip by contour-integrating the
difference of logarithmic derivatives, and runs the end-to-end experiment:
perturb the zero set by delta and measure how far the reconstructed
squared-modulus data moves on the real axis.

Products accumulate factors in modulus-ascending order with exact
power-of-two rescaling, so appending a largest-modulus zero multiplies the
value pointwise by its factor with no rounding discrepancy.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .ftransform import fourier_pair_many
from .potential import Potential
from .quadrature import quad_scalar
from .rootscan import Rectangle, ZeroSet, locate_zeros, match_zero_sets

__all__ = [
    "ContourCountError", "ConvergenceCurve", "CountDifference",
    "ProductOverflowError", "StabilityRow", "StabilityTable",
    "TruncatedProduct", "build_product", "convergence_curve",
    "count_difference", "eval_product", "fit_prefactor", "perturb_zeros",
    "stability_experiment",
]

# exp() is exact garbage past the double range; the guard keeps the log
LOG_GUARD = 700.0
_LN2 = math.log(2.0)
# rescale triggers, comfortably inside the representable range
_SCALE_HI = 2.0 ** 500
_SCALE_LO = 2.0 ** -500
_RESCALE = 512

# a zero is treated as real (stays real under perturbation) at this level
REAL_AXIS_RTOL = 1e-9
# conjugate partners are paired up to this relative mismatch
CONJ_PAIR_RTOL = 1e-7

PERTURB_MODES = ("uniform-shift", "random-in-disk")


class ProductOverflowError(RuntimeError):
    """Raised when a product value leaves the double range.

    The scaled result survives in log_value = log c + m log z + i kappa z
    + sum log(1 - z/z_n), whose real part is the log-magnitude.
    """

    def __init__(self, message: str, log_value: complex):
        super().__init__(message)
        self.log_value = complex(log_value)


class ContourCountError(RuntimeError):
    """Contour count failed: boundary proximity or a non-integer residue."""


@dataclass(frozen=True)
class TruncatedProduct:
    """c z^m e^{i kappa z} prod_{|z_n| < R} (1 - z/z_n)."""

    c: complex
    m: int
    kappa: float
    zeros: ZeroSet
    R: float


def build_product(zero_set: ZeroSet, radius: float, c: complex = 1.0,
                  m: int = 0, kappa: float = 0.0) -> TruncatedProduct:
    """Truncate a zero set at modulus < radius and attach the prefactor.

    The truncation is strictly by modulus, so a radius between two
    consecutive zero moduli retains the same factors regardless of which
    boundary convention the caller had in mind.  A root at the origin must
    be encoded through m, never as a listed zero.
    """
    if not radius > 0.0:
        raise ValueError("truncation radius must be positive")
    m = int(m)
    if m < 0:
        raise ValueError("origin root order m must be nonnegative")
    retained = []
    for z, mult in zero_set:
        if z == 0:
            if m == 0:
                raise ValueError("zero at the origin with m = 0; "
                                 "encode origin roots in the prefactor order")
            raise ValueError("origin root order belongs to the prefactor m, "
                             "not the zero list")
        if abs(z) < radius:
            retained.append((z, mult))
    return TruncatedProduct(complex(c), m, float(kappa),
                            ZeroSet(retained), float(radius))


def eval_product(p: TruncatedProduct, z: complex) -> complex:
    """Value of the truncated product at z.

    Factors are multiplied in ascending modulus with exact power-of-two
    rescaling, so appending a largest-modulus zero multiplies the returned
    value by its factor with zero rounding discrepancy.  Evaluation at a
    retained zero returns 0 exactly.  A value whose log-magnitude exceeds
    the guard range raises ProductOverflowError carrying the log-domain
    result.
    """
    z = complex(z)
    locs = p.zeros.locations(expand=True)  # canonical order is modulus-ascending
    for z_n in locs:
        if z == z_n:
            return 0j

    off = 0
    ex = 1j * p.kappa * z
    # pre-split an extreme exponential seed so exp() itself cannot overflow
    if abs(ex.real) > 600.0:
        off = int(round(ex.real / _LN2))
    acc = cmath.exp(ex - off * _LN2) * complex(p.c)
    if p.m:
        acc *= z ** p.m

    for z_n in locs:
        acc *= 1.0 - z / complex(z_n)
        mag = abs(acc)
        if mag > _SCALE_HI:
            acc *= 2.0 ** -_RESCALE
            off += _RESCALE
        elif 0.0 < mag < _SCALE_LO:
            acc *= 2.0 ** _RESCALE
            off -= _RESCALE

    mag = abs(acc)
    if mag == 0.0:
        return 0j
    log_mag = math.log(mag) + off * _LN2
    if abs(log_mag) > LOG_GUARD:
        raise ProductOverflowError(
            f"product at z = {z:.6g} has log-magnitude {log_mag:.6g} "
            f"beyond the +-{LOG_GUARD:.0f} guard",
            cmath.log(acc) + off * _LN2)
    return complex(math.ldexp(acc.real, off), math.ldexp(acc.imag, off))


def fit_prefactor(samples: Iterable[tuple[complex, complex]],
                  zero_set: ZeroSet, radius: float) -> tuple[complex, int, float]:
    """(c, m, kappa) from real-axis samples of the target function.

    m is fixed by the zero structure at the origin, which is empty here by
    the standing normalization (no root at zero).  kappa and c come from a
    joint least squares of log(target / Pi) against i z, with the sampled
    phases unwrapped along the axis; sample spacing must keep successive
    phase steps under pi for the unwrap to be faithful.
    """
    pts = [(complex(z), complex(t)) for z, t in samples]
    if len(pts) < 3:
        raise ValueError("prefactor fit needs at least 3 samples")
    for z, _ in pts:
        if abs(z.imag) > REAL_AXIS_RTOL * (1.0 + abs(z)):
            raise ValueError(f"fit sample {z:.6g} is off the real axis")
    xs = np.array([z.real for z, _ in pts])
    targets = np.array([t for _, t in pts])
    if np.ptp(xs) <= 1e-12 * (1.0 + np.max(np.abs(xs))):
        raise ValueError("degenerate sample geometry: samples coincide")

    m = 0  # no origin root under the standing normalization
    base = build_product(zero_set, radius, 1.0, m, 0.0)
    pi_vals = np.array([eval_product(base, complex(x)) for x in xs])
    if np.any(pi_vals == 0.0) or np.any(targets == 0.0):
        raise ValueError("fit sample sits on a zero of the product or target")

    order = np.argsort(xs)
    ratio = targets[order] / pi_vals[order]
    logs = np.log(np.abs(ratio)) + 1j * np.unwrap(np.angle(ratio))
    design = np.column_stack([np.ones(xs.size), 1j * xs[order]])
    coef, *_ = np.linalg.lstsq(design, logs, rcond=None)
    c = complex(np.exp(coef[0]))
    kappa = float(coef[1].real)  # imaginary part is modulus drift, not phase
    return c, m, kappa


class ConvergenceCurve(NamedTuple):
    radii: tuple[float, ...]
    values: tuple[complex, ...]
    differences: tuple[complex, ...]


def convergence_curve(z_full: ZeroSet, prefactor: tuple[complex, int, float],
                      z: complex, radii: Sequence[float]) -> ConvergenceCurve:
    """Truncated-product values at z across increasing truncation radii."""
    rs = tuple(float(r) for r in radii)
    if any(b <= a for a, b in zip(rs, rs[1:])):
        raise ValueError("radii must be strictly increasing")
    c, m, kappa = prefactor
    values = tuple(eval_product(build_product(z_full, r, c, m, kappa), z)
                   for r in rs)
    diffs = tuple(b - a for a, b in zip(values, values[1:]))
    return ConvergenceCurve(rs, values, diffs)


class CountDifference(NamedTuple):
    n_diff: int
    raw: complex


def _boundary_distance(rect: Rectangle, z: complex) -> float:
    outside = rect.distance_to(z)
    if outside > 0.0:
        return outside
    return min(z.real - rect.re_min, rect.re_max - z.real,
               z.imag - rect.im_min, rect.im_max - z.imag)


def count_difference(z1: ZeroSet, z2: ZeroSet, R: float, K: float, *,
                     quad_rtol: float = 1e-9,
                     quad_atol: float = 1e-9) -> CountDifference:
    """N1(R) - N2(R) over the strip S_R = [0, R] x i[-K, K].

    Integrates the difference of the logarithmic derivatives of the two
    truncated products (zeros of modulus < R only) around the strip
    boundary; the shared prefactor drops out of the closed-contour
    integral.  raw is the contour value over 2 pi i and must land within
    1e-6 of an integer.  A zero too close to the contour triggers the
    jitter ladder; if no jittered contour clears every zero, the count is
    refused rather than guessed.
    """
    if not (R > 0.0 and K > 0.0):
        raise ValueError("strip dimensions must be positive")
    a1 = z1.locations(expand=True)
    a2 = z2.locations(expand=True)
    a1 = a1[np.abs(a1) < R]
    a2 = a2[np.abs(a2) < R]

    scale = max(R, K, 1.0)
    prox = 1e-7 * scale
    both = np.concatenate([a1, a2])
    rect = None
    for pad in (0.0, 2.3e-6 * scale, -2.3e-6 * scale,
                5.1e-6 * scale, -5.1e-6 * scale):
        cand = Rectangle(0.0 - pad, R + pad, -K - pad, K + pad)
        if both.size == 0 or min(_boundary_distance(cand, z)
                                 for z in both) > prox:
            rect = cand
            break
    if rect is None:
        raise ContourCountError(
            "a zero sits on the counting contour and jitter could not "
            "clear it")

    def logdiff(zs: np.ndarray) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        out = np.zeros(zs.shape, dtype=complex)
        if a1.size:
            out += np.sum(1.0 / (zs[..., None] - a1), axis=-1)
        if a2.size:
            out -= np.sum(1.0 / (zs[..., None] - a2), axis=-1)
        return out

    corners = rect.corners()
    total = 0.0 + 0.0j
    for za, zb in zip(corners, np.roll(corners, -1)):
        seg = zb - za

        def side(ts, za=za, seg=seg):
            return logdiff(za + np.asarray(ts) * seg) * seg

        val, _ = quad_scalar(side, 0.0, 1.0, atol=quad_atol / 4.0,
                             rtol=quad_rtol, max_panels=16384)
        total += val

    raw = total / (2.0j * np.pi)
    n = int(round(raw.real))
    if abs(raw - n) > 1e-6:
        raise ContourCountError(
            f"contour count {raw:.3e} is not within 1e-6 of an integer; "
            "the integral did not resolve or a zero hugs the contour")
    return CountDifference(n, complex(raw))


def _is_real_zero(z: complex) -> bool:
    return abs(z.imag) <= REAL_AXIS_RTOL * (1.0 + abs(z))


def perturb_zeros(zero_set: ZeroSet, delta: float,
                  mode: str = "random-in-disk", seed: int = 0) -> ZeroSet:
    """Move each zero by at most delta without leaving the symmetry class.

    Conjugate pairs move conjugately and real zeros stay on the axis, so a
    zero set whose product is real on the real line keeps that property.
    Draws depend on the seed and the set but not on delta, so the same seed
    across a delta sweep scales one fixed displacement field linearly.
    """
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    if mode not in PERTURB_MODES:
        raise ValueError(f"unknown perturbation mode {mode!r}; "
                         f"expected one of {PERTURB_MODES}")
    entries = list(zero_set)
    n = len(entries)
    kind = ["free"] * n          # real / upper / lower-partner / free
    partner = [-1] * n
    lowers = [i for i, (z, _) in enumerate(entries)
              if not _is_real_zero(z) and z.imag < 0.0]
    unused = set(lowers)
    for i, (z, _) in enumerate(entries):
        if _is_real_zero(z):
            kind[i] = "real"
        elif z.imag > 0.0:
            best, best_d = -1, math.inf
            for j in unused:
                d = abs(np.conj(z) - entries[j][0])
                if d < best_d:
                    best, best_d = j, d
            if best >= 0 and best_d <= CONJ_PAIR_RTOL * (1.0 + abs(z)):
                kind[i] = "upper"
                kind[best] = "lower"
                partner[i] = best
                unused.discard(best)
            # otherwise an unpaired upper zero perturbs freely

    rng = np.random.default_rng(seed)
    disp = np.zeros(n, dtype=complex)
    if mode == "uniform-shift":
        theta = rng.uniform(0.0, 2.0 * np.pi)
        d = np.exp(1j * theta)
        for i in range(n):
            if kind[i] == "real":
                disp[i] = d.real
            elif kind[i] == "lower":
                continue  # written by the partner
            elif kind[i] == "upper":
                disp[i] = d
                disp[partner[i]] = np.conj(d)
            else:
                disp[i] = d if entries[i][0].imag > 0.0 else np.conj(d)
    else:
        for i in range(n):
            if kind[i] == "lower":
                continue
            if kind[i] == "real":
                disp[i] = rng.uniform(-1.0, 1.0)
                continue
            w = math.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
            disp[i] = w
            if kind[i] == "upper":
                disp[partner[i]] = np.conj(w)

    moved = [(z + delta * disp[i], mult)
             for i, (z, mult) in enumerate(entries)]
    return ZeroSet.from_pairs(moved, resolution=0.0)


@dataclass(frozen=True)
class StabilityRow:
    delta: float
    sup_diff: float
    n_diff: int | None
    zero_sup_distance: float
    R: float
    K: float
    grid_size: int
    error: str | None = None


@dataclass(frozen=True)
class StabilityTable:
    rows: tuple[StabilityRow, ...]
    base_zeros: ZeroSet
    prefactor: tuple[complex, int, float]

    HEADER = "delta,sup_diff,n_diff,zero_sup_distance,R,K,grid_size"

    def to_text(self) -> str:
        lines = [self.HEADER]
        for r in self.rows:
            nd = "nan" if r.n_diff is None else f"{r.n_diff:d}"
            lines.append(
                f"{r.delta:.15g},{r.sup_diff:.15g},{nd},"
                f"{r.zero_sup_distance:.15g},{r.R:.15g},{r.K:.15g},"
                f"{r.grid_size:d}")
            if r.error is not None:
                lines.append(f"# failed: {r.error}")
        return "\n".join(lines) + "\n"


def stability_experiment(v: Potential, rect: Rectangle,
                         deltas: Sequence[float], R: float, grid, *,
                         K: float = 1.0, mode: str = "random-in-disk",
                         seed: int = 0, scan_tol: float = 1e-9,
                         fit_points: int = 9) -> StabilityTable:
    """Reconstruction drift when the zero set of F = Vhat(2z)Vhat(-2z) moves.

    The zero set is scanned on a positive-real rectangle and mirrored to
    negative real parts through the evenness of F.  Both truncated products
    carry the prefactor fitted once from real-axis samples of F, so each
    row isolates the effect of zero displacement.  On the real axis the
    product values are the reconstructed squared-modulus data, and sup_diff
    is the sup of their difference over the grid.  Rows that fail keep
    their slot with the error recorded; the table is ordered by descending
    delta.
    """
    if rect.re_min <= 0.0:
        raise ValueError("scan rectangle must lie at positive real parts; "
                         "the mirrored half comes from evenness")
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("empty evaluation grid")
    deltas = sorted((float(d) for d in deltas), reverse=True)
    if deltas and deltas[-1] < 0.0:
        raise ValueError("deltas must be nonnegative")

    def f(zs):
        arr = np.asarray(zs, dtype=complex)
        vals, _ = fourier_pair_many(v, arr.ravel())
        return vals.reshape(arr.shape)

    zpos = locate_zeros(f, rect, scan_tol)
    z1 = ZeroSet.from_pairs(
        list(zpos) + [(-z, mult) for z, mult in zpos], resolution=0.0)

    hi = 0.9 * min(R, rect.re_max)
    fit_xs = np.linspace(0.05 * hi, hi, fit_points)
    fit_targets = f(fit_xs.astype(complex))
    c, m, kappa = fit_prefactor(zip(fit_xs, fit_targets), z1, R)

    p1 = build_product(z1, R, c, m, kappa)
    g1 = np.array([eval_product(p1, complex(x)) for x in grid])

    rows = []
    for d in deltas:
        try:
            z2 = perturb_zeros(z1, d, mode, seed)
            p2 = build_product(z2, R, c, m, kappa)
            g2 = np.array([eval_product(p2, complex(x)) for x in grid])
            sup = float(np.max(np.abs(g1 - g2)))
            nd = count_difference(p1.zeros, p2.zeros, R, K)
            zdist = match_zero_sets(z1, z2).sup_distance
            rows.append(StabilityRow(d, sup, nd.n_diff, zdist, float(R),
                                     float(K), grid.size))
        except Exception as exc:  # noqa: BLE001 - rows are isolated by contract
            rows.append(StabilityRow(d, float("nan"), None, float("nan"),
                                     float(R), float(K), grid.size,
                                     error=f"{type(exc).__name__}: {exc}"))
    return StabilityTable(tuple(rows), z1, (c, m, kappa))
