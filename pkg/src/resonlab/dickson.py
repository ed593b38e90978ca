"""Zero-strip geometry for exponential polynomials.

An exponential polynomial sum_j A_j z^{m_j} [1 + eps_j(z)] e^{omega_j z}
has its large zeros confined to logarithmic strips normal to the sides of
the convex hull of the conjugated frequencies. This module builds that
geometry (side angles, tau points, strip slopes), tests strip membership,
and counts zeros in the curvilinear windows along a strip by mapping the
window boundary back from its straightened coordinates.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .rootscan import BoundaryZeroError, RootScanError, _winding_along

__all__ = [
    "ExpTerm", "ExpPolynomial", "StripData", "SideData", "DicksonGeometry",
    "CurvilinearCount", "dickson_geometry", "strip_membership",
    "curvilinear_count", "containment_exceptions", "recommended_alpha0",
    "recommended_H", "two_cosine_model",
]


class ExpTerm(NamedTuple):
    coefficient: complex
    power: int
    frequency: complex
    correction: Callable | None = None   # the eps factor; None means 0


@dataclass(frozen=True)
class ExpPolynomial:
    """f(z) = sum of A z^m (1 + eps(z)) e^{omega z} with distinct omega."""

    terms: tuple[ExpTerm, ...]
    r0: float = 0.0

    def __init__(self, terms: Sequence, r0: float = 0.0):
        packed = tuple(ExpTerm(*t) if not isinstance(t, ExpTerm) else t
                       for t in terms)
        if len(packed) < 2:
            raise ValueError("an exponential polynomial needs at least 2 terms")
        for t in packed:
            if t.coefficient == 0:
                raise ValueError("zero coefficients are not allowed")
            if t.power < 0 or t.power != int(t.power):
                raise ValueError("powers must be nonnegative integers")
        freqs = [complex(t.frequency) for t in packed]
        for i in range(len(freqs)):
            for j in range(i + 1, len(freqs)):
                if freqs[i] == freqs[j]:
                    raise ValueError("frequencies must be pairwise distinct")
        object.__setattr__(self, "terms", packed)
        object.__setattr__(self, "r0", float(r0))

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for a, m, w, eps in self.terms:
            term = a * z**m * np.exp(w * z)
            if eps is not None:
                term = term * (1.0 + np.asarray(eps(z)))
            out = out + term
        return out


def two_cosine_model() -> ExpPolynomial:
    """2 cos(2z) + 1/2 written with frequencies {2i, 0, -2i}."""
    return ExpPolynomial([(1.0, 0, 2j), (1.0, 0, -2j), (0.5, 0, 0.0)])


class StripData(NamedTuple):
    mu: float               # real slope of the logarithmic strip
    n_tau: int              # tau points on this sub-segment, endpoints included
    delta_omega: float      # |omega_{kj+1} - omega_{kj}|
    tau_start: complex
    tau_end: complex
    omega_start: complex    # conjugated frequencies bounding the sub-segment
    omega_end: complex
    m_start: int
    m_end: int


class SideData(NamedTuple):
    phi: float              # side angle in [-pi/2, 3pi/2)
    e: complex              # e^{i phi}
    points: tuple           # (conjugated frequency, power) ordered along side
    strips: tuple           # StripData per sub-segment


@dataclass(frozen=True)
class DicksonGeometry:
    vertices: tuple         # hull of the conjugated frequencies, ccw
    sides: tuple            # SideData per hull side

    def strip(self, k: int, j: int) -> StripData:
        return self.sides[k].strips[j]

    def all_strips(self):
        for k, side in enumerate(self.sides):
            for j in range(len(side.strips)):
                yield k, j


def _cross(o, a, b) -> float:
    return ((a.real - o.real) * (b.imag - o.imag)
            - (a.imag - o.imag) * (b.real - o.real))


def _convex_hull_ccw(points: Sequence[complex]) -> list[complex]:
    """Counterclockwise hull starting at the lexicographically smallest
    point; a fully collinear set yields its two extreme points."""
    pts = sorted(set((p.real, p.imag) for p in points))
    pts = [complex(x, y) for x, y in pts]
    if len(pts) == 1:
        raise ValueError("hull of a single point is degenerate")
    if len(pts) == 2:
        return pts
    scale = max(abs(p - pts[0]) for p in pts)
    tol = 1e-12 * scale * scale

    def chain(seq):
        out: list[complex] = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= tol:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2:
        return hull
    area = sum(_cross(hull[0], hull[i], hull[i + 1])
               for i in range(1, len(hull) - 1))
    if area <= 0:
        raise RootScanError("hull orientation check failed")
    return hull


def _normalize_phi(angle: float) -> float:
    # into [-pi/2, 3*pi/2)
    while angle < -0.5 * math.pi:
        angle += 2.0 * math.pi
    while angle >= 1.5 * math.pi:
        angle -= 2.0 * math.pi
    return angle


def dickson_geometry(p: ExpPolynomial) -> DicksonGeometry:
    """Hull, side angles, tau points, strip slopes and counts for p.

    A collinear frequency set is allowed: the hull degenerates to a segment
    traversed in both orientations, giving two sides. Along each side the
    tau chain is the upper boundary of the convex hull of the tau points,
    and every tau on that chain starts a new sub-segment, so each strip
    carries its two endpoint tau points.
    """
    conj = [complex(t.frequency).conjugate() for t in p.terms]
    powers = {}
    for t in p.terms:
        powers[complex(t.frequency).conjugate()] = int(t.power)
    hull = _convex_hull_ccw(conj)
    if len(hull) == 2:
        sides_vertices = [(hull[0], hull[1]), (hull[1], hull[0])]
    else:
        sides_vertices = [(hull[i], hull[(i + 1) % len(hull)])
                          for i in range(len(hull))]

    scale = max(abs(b - a) for a, b in sides_vertices)
    sides = []
    for va, vb in sides_vertices:
        phi = _normalize_phi(cmath.phase(va - vb))
        e = cmath.exp(1j * phi)
        seg = vb - va
        seg_len = abs(seg)
        on_side = []
        for w in conj:
            rel = w - va
            crossing = abs(rel.real * seg.imag - rel.imag * seg.real)
            proj = (rel.real * seg.real + rel.imag * seg.imag) / seg_len
            if crossing <= 1e-12 * scale * seg_len and -1e-12 * scale <= proj <= seg_len + 1e-12 * scale:
                on_side.append((proj, w, powers[w]))
        on_side.sort(key=lambda item: item[0])
        points = tuple((w, m) for _, w, m in on_side)

        taus = [w + 1j * m * e for w, m in points]
        # straighten: u = tau/e runs along the negative real axis from the
        # side start, with the power offset mapped to the imaginary part;
        # walking in decreasing Re u, the upper chain makes left turns, so
        # a middle point below the chord (right turn) is dropped while
        # collinear points are kept as sub-segment boundaries
        us = [t / e for t in taus]
        chain_scale = max([seg_len, 1.0] + [abs(u) for u in us])
        area_tol = 1e-12 * chain_scale * chain_scale
        chain_idx = [0]
        for idx in range(1, len(us)):
            while len(chain_idx) >= 2 and _cross(
                    us[chain_idx[-2]], us[chain_idx[-1]], us[idx]) < -area_tol:
                chain_idx.pop()
            chain_idx.append(idx)

        strips = []
        for a_i, b_i in zip(chain_idx[:-1], chain_idx[1:]):
            wa, ma = points[a_i]
            wb, mb = points[b_i]
            denom = (wa.conjugate() - wb.conjugate()) * e
            if abs(denom) == 0:
                raise RootScanError("degenerate strip segment")
            mu = (ma - mb) / denom
            if abs(mu.imag) > 1e-9 * (1.0 + abs(mu)):
                raise RootScanError(f"strip slope {mu} is not real")
            ta, tb = taus[a_i], taus[b_i]
            n_tau = 0
            for t in taus:
                d = tb - ta
                cr = (t - ta).real * d.imag - (t - ta).imag * d.real
                if abs(cr) <= area_tol:
                    param = ((t - ta) / d).real
                    if -1e-12 <= param <= 1.0 + 1e-12:
                        n_tau += 1
            strips.append(StripData(
                mu=float(mu.real), n_tau=n_tau,
                delta_omega=abs(wb - wa),
                tau_start=ta, tau_end=tb,
                omega_start=wa, omega_end=wb,
                m_start=ma, m_end=mb))
        sides.append(SideData(phi=phi, e=e, points=points,
                              strips=tuple(strips)))
    return DicksonGeometry(vertices=tuple(hull), sides=tuple(sides))


def _branch_arg(z: np.ndarray, phi: float) -> np.ndarray:
    """Argument of z in the window (phi, phi + 2*pi]."""
    theta = np.angle(z)
    rel = np.mod(theta - phi, 2.0 * math.pi)
    rel = np.where(rel == 0.0, 2.0 * math.pi, rel)
    return phi + rel


def _branch_log(z: np.ndarray, phi: float) -> np.ndarray:
    return np.log(np.abs(z)) + 1j * _branch_arg(z, phi)


def _zeta(z: np.ndarray, e: complex, mu: float, phi: float) -> np.ndarray:
    return z / e + mu * _branch_log(z, phi)


def _invert_zeta(w: np.ndarray, e: complex, mu: float, phi: float) -> np.ndarray:
    """Solve z/e + mu*Log z = w with the branch arg z in (phi, phi+2pi)."""
    w = np.asarray(w, dtype=complex)
    z = e * w
    if mu == 0.0:
        return z
    for _ in range(60):
        fval = _zeta(z, e, mu, phi) - w
        if np.all(np.abs(fval) <= 1e-13 * (1.0 + np.abs(w))):
            return z
        deriv = 1.0 / e + mu / z
        z = z - fval / deriv
    raise RootScanError("window boundary inversion did not converge")


def strip_membership(g: DicksonGeometry, z: complex, H: float):
    """First (k, j) whose strip V_kj(H) contains z, or None.

    Strips with the same side and slope coincide exactly, so the first
    match in (k, j) order is the canonical answer.
    """
    if abs(z) <= 1.0:
        raise ValueError("membership is defined for |z| > 1")
    logz = math.log(abs(z))
    for k, side in enumerate(g.sides):
        zn = complex(z) / side.e
        if zn.imag < 0.0:
            continue
        for j, strip in enumerate(side.strips):
            if abs(zn.real + strip.mu * logz) <= H:
                return (k, j)
    return None


def containment_exceptions(g: DicksonGeometry, zeros, H: float,
                           r_min: float = 1.0) -> list[complex]:
    """Zeros of modulus above r_min lying in no strip (expected finite)."""
    out = []
    for z, _ in zeros:
        if abs(z) > r_min and strip_membership(g, z, H) is None:
            out.append(z)
    return out


def recommended_alpha0(p: ExpPolynomial) -> float:
    return 20.0 * (1.0 + max(abs(t.frequency) for t in p.terms))


def recommended_H(p: ExpPolynomial, alpha0: float) -> float:
    mmax = max(t.power for t in p.terms)
    return 2.0 + mmax * math.log(max(alpha0, math.e))


class CurvilinearCount(NamedTuple):
    count: int
    bound_ok: bool | None


def curvilinear_count(f, g: DicksonGeometry, k: int, j: int, alpha: float,
                      s: float, H: float, *, alpha_floor: float | None = None,
                      n_initial: int = 128) -> CurvilinearCount:
    """Zero count of f in the window R_kj(alpha, s, H) along strip (k, j).

    The window is a rectangle [-H, H] x [alpha, alpha+s] in the straightened
    coordinate zeta = z/e_k + mu Log z; its boundary is mapped back and the
    winding number of f along the image contour gives the count. bound_ok
    reports the window-count inequality |N - s*|d omega|/(2 pi)| < n_tau - 1
    + 0.5, and stays None when alpha is below the supplied floor where the
    inequality is not asserted.
    """
    if s <= 0.0 or H <= 0.0:
        raise ValueError("window extent and half-width must be positive")
    if alpha <= 0.0:
        raise ValueError("window offset must be positive")
    side = g.sides[k]
    strip = side.strips[j]
    count = None
    for attempt in range(9):
        if attempt == 0:
            eps = 0.0
        else:
            sign = 1.0 if attempt % 2 == 1 else -1.0
            eps = sign * ((attempt + 1) // 2) * 1e-6 * math.hypot(2 * H, s)
        lo, hi = -H - eps, H + eps
        a0, a1 = alpha - eps, alpha + s + eps

        def path(ts, lo=lo, hi=hi, a0=a0, a1=a1):
            ts = np.mod(np.asarray(ts, dtype=float), 1.0)
            width, height = hi - lo, a1 - a0
            per = 2.0 * (width + height)
            breaks = np.array([0.0, width, width + height,
                               2 * width + height, per]) / per
            corners = np.array([complex(lo, a0), complex(hi, a0),
                                complex(hi, a1), complex(lo, a1)])
            seg = np.clip(np.searchsorted(breaks, ts, side="right") - 1, 0, 3)
            local = (ts - breaks[seg]) / (breaks[seg + 1] - breaks[seg])
            w = corners[seg] + local * (corners[(seg + 1) % 4] - corners[seg])
            return _invert_zeta(w, side.e, strip.mu, side.phi)

        try:
            count, _, _ = _winding_along(f, path, n_initial=n_initial)
            break
        except BoundaryZeroError:
            continue
    if count is None:
        raise BoundaryZeroError(
            "window boundary kept hitting zeros after 8 jitter retries")
    if alpha_floor is not None and alpha < alpha_floor:
        return CurvilinearCount(count, None)
    expected = s * strip.delta_omega / (2.0 * math.pi)
    limit = strip.n_tau - 1 + 0.5
    return CurvilinearCount(count, bool(abs(count - expected) < limit))
