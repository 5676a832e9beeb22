"""Planar domains: membership, boundary distance, and tangent-circle geometry.

Every domain exposes a radial parametrization from a fixed center: for each
angle theta the intersection of the ray with the domain is a short list of
radial intervals. The quadrature engine integrates in these (theta, radius)
coordinates, so curved boundaries are resolved exactly and never need a
boundary "skin" of cells.

Membership convention: strictly interior points only. Points within
GEOM_TOL = 1e-12 of the boundary are reported as non-members, so quadrature
nodes and probe samples never sit on a boundary curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameters, NoValidC, TangencyNotFound, UnsupportedDomain

GEOM_TOL = 1e-12

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Disc:
    """Open disc with complex center and positive radius."""

    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise InvalidParameters(f"disc radius must be positive, got {self.radius}")

    def contains(self, z):
        return np.abs(np.asarray(z) - self.center) < self.radius - GEOM_TOL

    def boundary_distance(self, z):
        return np.maximum(0.0, self.radius - np.abs(np.asarray(z) - self.center))

    def bounding_box(self):
        c, r = self.center, self.radius
        return (c.real - r, c.real + r, c.imag - r, c.imag + r)

    def radial_center(self) -> complex:
        return self.center

    def max_branches(self) -> int:
        return 1

    def theta_breakpoints(self):
        return []

    def radial_sections(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape + (1, 2))
        out[..., 0, 1] = self.radius
        return out


@dataclass(frozen=True)
class TruncatedPlane:
    """Disc of radius R about the origin, standing in for the full plane.

    Integrals over it are reported together with a certified tail bound for
    the excluded region (see quad.truncation_tail).
    """

    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise InvalidParameters(f"truncation radius must be positive, got {self.R}")

    def contains(self, z):
        return np.abs(np.asarray(z)) < self.R - GEOM_TOL

    def boundary_distance(self, z):
        return np.maximum(0.0, self.R - np.abs(np.asarray(z)))

    def bounding_box(self):
        return (-self.R, self.R, -self.R, self.R)

    def radial_center(self) -> complex:
        return 0j

    def max_branches(self) -> int:
        return 1

    def theta_breakpoints(self):
        # the builtin weights have derivative kinks along the real axis
        return [0.0, math.pi]

    def radial_sections(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape + (1, 2))
        out[..., 0, 1] = self.R
        return out


@dataclass(frozen=True)
class Moon:
    """Region between two internally tangent circles (outer minus closed inner).

    The circles must touch at exactly one point Q, the multiple boundary
    point: |c_in - c_out| + r_in = r_out up to the declared tolerance, with
    the inner disc otherwise strictly inside the outer one.
    """

    outer: Disc
    inner: Disc
    tangency_rtol: float = 1e-9

    def __post_init__(self):
        d = abs(self.inner.center - self.outer.center)
        if self.inner.radius >= self.outer.radius:
            raise InvalidParameters("inner circle must be smaller than the outer circle")
        if d == 0:
            raise InvalidParameters("concentric circles form an annulus, not a moon")
        gap = abs(d + self.inner.radius - self.outer.radius)
        if gap > self.tangency_rtol * self.outer.radius:
            raise TangencyNotFound(
                f"circles are not internally tangent: |d + r_in - r_out| = {gap:.3e}"
            )

    @property
    def tangency_point(self) -> complex:
        u = self.inner.center - self.outer.center
        return self.outer.center + self.outer.radius * u / abs(u)

    def contains(self, z):
        z = np.asarray(z)
        inside_outer = np.abs(z - self.outer.center) < self.outer.radius - GEOM_TOL
        outside_inner = np.abs(z - self.inner.center) > self.inner.radius + GEOM_TOL
        return inside_outer & outside_inner

    def boundary_distance(self, z):
        z = np.asarray(z)
        d = np.minimum(
            self.outer.radius - np.abs(z - self.outer.center),
            np.abs(z - self.inner.center) - self.inner.radius,
        )
        return np.maximum(0.0, d)

    def bounding_box(self):
        return self.outer.bounding_box()

    def radial_center(self) -> complex:
        return self.outer.center

    def _ray_geometry(self):
        d = self.inner.center - self.outer.center
        return d, abs(d), self.inner.radius

    def max_branches(self) -> int:
        _, dist, r_in = self._ray_geometry()
        return 1 if dist <= r_in else 2

    def theta_breakpoints(self):
        d, dist, r_in = self._ray_geometry()
        td = math.atan2(d.imag, d.real) % TWO_PI
        if dist <= r_in:
            return [td]
        half = math.asin(min(1.0, r_in / dist))
        return [td, (td - half) % TWO_PI, (td + half) % TWO_PI]

    def theta_kinks(self):
        # sqrt behavior of the section radii at the ray-tangency angles
        d, dist, r_in = self._ray_geometry()
        if dist <= r_in:
            return []
        td = math.atan2(d.imag, d.real) % TWO_PI
        half = math.asin(min(1.0, r_in / dist))
        return [(td - half) % TWO_PI, (td + half) % TWO_PI]

    def radial_sections(self, theta):
        theta = np.asarray(theta, dtype=float)
        d, dist, r_in = self._ray_geometry()
        r_out = self.outer.radius
        m = np.cos(theta) * d.real + np.sin(theta) * d.imag
        q = dist * dist - r_in * r_in
        if dist <= r_in:
            # every ray starts inside the hole and exits it exactly once
            t_plus = m + np.sqrt(np.maximum(0.0, m * m - q))
            out = np.zeros(theta.shape + (1, 2))
            out[..., 0, 0] = np.minimum(t_plus, r_out)
            out[..., 0, 1] = r_out
            return out
        disc = m * m - q
        hits = (m > 0) & (disc > 0)
        s = np.sqrt(np.where(hits, disc, 0.0))
        lo1 = np.where(hits, np.maximum(0.0, m - s), r_out)
        hi1 = np.where(hits, np.minimum(r_out, m + s), r_out)
        out = np.zeros(theta.shape + (2, 2))
        out[..., 0, 0] = 0.0
        out[..., 0, 1] = np.where(hits, lo1, r_out)
        out[..., 1, 0] = hi1
        out[..., 1, 1] = r_out
        return out


@dataclass(frozen=True)
class ArcStage:
    """One stage of a staged thin-moon region.

    Points satisfying |z| < 1, |z - alpha| > 1 - alpha, and an argument
    condition: |Arg z| > omega when outside_window, |Arg z| <= omega when not.
    """

    alpha: float
    omega: float
    outside_window: bool = True

    def __post_init__(self):
        if not 0 < self.alpha < 0.5:
            raise InvalidParameters(f"stage alpha must lie in (0, 1/2), got {self.alpha}")
        if not 0 < self.omega < math.pi:
            raise InvalidParameters(f"stage omega must lie in (0, pi), got {self.omega}")

    def arg_ok(self, wrapped_arg):
        if self.outside_window:
            return np.abs(wrapped_arg) > self.omega
        return np.abs(wrapped_arg) <= self.omega

    def exit_radius(self, theta):
        # first crossing of |z - alpha| = 1 - alpha along the ray from 0
        a = self.alpha
        m = a * np.cos(theta)
        return m + np.sqrt(m * m + 1.0 - 2.0 * a)


@dataclass(frozen=True)
class ArcRegion:
    """Union of circle-arc/sector stages inside the unit disc.

    Built for staged thin-moon constructions: each stage carves the region
    between a circle through z=1 and the unit circle, restricted to an
    argument window. boundary_distance returns a conservative lower bound
    (distance to the carrier curves of the boundary).
    """

    stages: tuple[ArcStage, ...]

    def __post_init__(self):
        if not self.stages:
            raise InvalidParameters("arc region needs at least one stage")
        object.__setattr__(self, "stages", tuple(self.stages))

    def contains(self, z):
        z = np.asarray(z)
        r = np.abs(z)
        wrapped = np.angle(z)
        ok = np.zeros(z.shape, dtype=bool)
        for st in self.stages:
            in_stage = (
                (r < 1.0 - GEOM_TOL)
                & (np.abs(z - st.alpha) > (1.0 - st.alpha) + GEOM_TOL)
                & st.arg_ok(wrapped)
            )
            ok |= in_stage
        return ok

    def boundary_distance(self, z):
        z = np.asarray(z)
        inside = self.contains(z)
        cands = [1.0 - np.abs(z)]
        for st in self.stages:
            cands.append(np.abs(np.abs(z - st.alpha) - (1.0 - st.alpha)))
            for sgn in (1.0, -1.0):
                cands.append(_ray_distance(z, sgn * st.omega))
        d = np.minimum.reduce(cands)
        return np.where(inside, np.maximum(0.0, d), 0.0)

    def bounding_box(self):
        return (-1.0, 1.0, -1.0, 1.0)

    def radial_center(self) -> complex:
        return 0j

    def max_branches(self) -> int:
        return 1

    def theta_breakpoints(self):
        pts = {0.0}
        for st in self.stages:
            pts.add(st.omega % TWO_PI)
            pts.add((-st.omega) % TWO_PI)
        return sorted(pts)

    def radial_sections(self, theta):
        theta = np.asarray(theta, dtype=float)
        wrapped = (theta + math.pi) % TWO_PI - math.pi
        lo = np.full(theta.shape, 1.0)
        active = np.zeros(theta.shape, dtype=bool)
        for st in self.stages:
            sel = st.arg_ok(wrapped)
            b = np.minimum(1.0, st.exit_radius(theta))
            lo = np.where(sel, np.minimum(lo, b), lo)
            active |= sel
        out = np.zeros(theta.shape + (1, 2))
        # inactive angles collapse to the empty interval [1, 1]
        out[..., 0, 0] = np.where(active, lo, 1.0)
        out[..., 0, 1] = 1.0
        return out


Domain = Disc | TruncatedPlane | Moon | ArcRegion


def _ray_distance(z, angle):
    """Distance from points z to the ray {t * e^(i*angle) : t >= 0}."""
    z = np.asarray(z)
    u = complex(math.cos(angle), math.sin(angle))
    w = z * np.conj(u)
    proj = np.maximum(0.0, w.real)
    return np.abs(w - proj)


def contains(domain: Domain, z) -> bool | np.ndarray:
    """True iff z lies strictly inside the domain (see module convention)."""
    out = domain.contains(z)
    return bool(out) if np.isscalar(z) or np.asarray(z).shape == () else out


def boundary_distance(domain: Domain, z):
    """Euclidean distance to the boundary for interior points, 0 otherwise."""
    out = domain.boundary_distance(z)
    return float(out) if np.isscalar(z) or np.asarray(z).shape == () else out


def probe_circle(moon: Moon, probe_radius: float | None = None):
    """Circle through the tangency point Q, lying in the closed moon.

    Internally tangent to the outer circle at Q; any radius strictly between
    the two circle radii works, default is their midpoint. Returns
    (center, radius).
    """
    if not isinstance(moon, Moon):
        raise UnsupportedDomain("probe circles are defined for moon domains only")
    rho = probe_radius if probe_radius is not None else 0.5 * (moon.outer.radius + moon.inner.radius)
    if not moon.inner.radius < rho < moon.outer.radius:
        raise InvalidParameters(
            f"probe radius must lie in ({moon.inner.radius}, {moon.outer.radius}), got {rho}"
        )
    q = moon.tangency_point
    u = (q - moon.outer.center) / abs(q - moon.outer.center)
    return q - rho * u, rho


def moon_tangency(moon: Moon, probe_radius: float | None = None, n_samples: int = 2048):
    """Tangency point Q and a constant C with d_boundary(z) >= C |z - Q|^2 on the probe circle.

    The gap between internally tangent circles grows quadratically in the
    distance from Q with curvature-difference coefficients, so the infimum of
    d(z)/|z - Q|^2 over the probe circle is the smaller of the sampled
    minimum and the analytic limit at Q. C shaves that by 1e-4 to absorb the
    cubic correction between samples and float noise close to Q.
    """
    if n_samples < 1000:
        raise InvalidParameters("tangency validation needs at least 1000 samples")
    center, rho = probe_circle(moon, probe_radius)
    q = moon.tangency_point
    base = math.atan2((q - center).imag, (q - center).real)
    phi = base + TWO_PI * (np.arange(n_samples) + 0.5) / n_samples
    z = center + rho * np.exp(1j * phi)
    gap = moon.boundary_distance(z)
    ratios = gap / np.abs(z - q) ** 2
    limit_outer = 0.5 * (1.0 / rho - 1.0 / moon.outer.radius)
    limit_inner = 0.5 * (1.0 / moon.inner.radius - 1.0 / rho)
    c_min = min(float(np.min(ratios)), limit_outer, limit_inner)
    if c_min <= 1e-12:
        raise NoValidC(f"sampled gap ratio fell to {c_min:.3e}; geometry looks malformed")
    c = c_min * (1.0 - 1e-4)
    assert np.all(gap >= c * np.abs(z - q) ** 2)
    return q, c
