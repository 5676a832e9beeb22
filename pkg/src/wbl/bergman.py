"""Weighted polynomial approximation: Gram matrices, best approximants,
distance scans, and the extremal orthonormal basis.

Least squares is solved by QR on the weighted evaluation matrix at quadrature
nodes (columns scaled to unit norm), never by normal equations: shifted
monomials are exponentially ill-conditioned and the QR route squares the
usable degree range. Distances come from the QR residual, which is backward
stable; the Pythagoras identity is only a test, not the computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateWeight, IllConditioned, InvalidParameters, UnsupportedMeasure
from .geometry import ArcRegion, Disc, Moon, TruncatedPlane
from .quad import build_grid, integrate, weight_factor
from .weights import Polynomial

_CHUNK = 200_000
_ILL_COND = 1e14


@dataclass
class GramMatrix:
    """Hermitian matrix of weighted inner products of scaled shifted monomials."""

    center: complex
    scale: float
    degree: int
    matrix: np.ndarray
    cond_estimate: float
    error_budget: float
    ill_conditioned: bool
    positive_definite: bool


@dataclass
class ApproximationResult:
    """Best degree-n approximant with its distance history.

    distances[k] is the weighted-L2 distance from f to polynomials of degree
    <= k; for jet-constrained runs entries below the jet order are NaN (no
    feasible polynomial). error_budget is the quadrature estimate carried by
    the node grid, a heuristic budget rather than a certificate.
    """

    degree: int
    polynomial: Polynomial
    distance: float
    distances: np.ndarray
    error_budget: float
    cond_estimate: float
    ill_conditioned: bool


def default_center_scale(domain):
    """Centroid-ish expansion center and half-diagonal scale for a domain."""
    x0, x1, y0, y1 = domain.bounding_box()
    s = 0.5 * math.hypot(x1 - x0, y1 - y0)
    if isinstance(domain, (Disc, TruncatedPlane)):
        return domain.radial_center(), s
    if isinstance(domain, Moon):
        ro, ri = domain.outer.radius, domain.inner.radius
        c = (ro * ro * domain.outer.center - ri * ri * domain.inner.center) / (ro * ro - ri * ri)
        return c, s
    if isinstance(domain, ArcRegion):
        xs = np.linspace(x0, x1, 128)
        ys = np.linspace(y0, y1, 128)
        zz = (xs[None, :] + 1j * ys[:, None]).ravel()
        inside = domain.contains(zz)
        c = complex(np.mean(zz[inside])) if inside.any() else 0j
        return c, s
    return 0j, s


def _resolve_ps(domain, p, s):
    dp, ds = default_center_scale(domain)
    return (dp if p is None else complex(p)), (ds if s is None else float(s))


def _check_weight(domain, w):
    """1 must lie in the weighted space: every interior atom needs mass < 2."""
    try:
        atoms = w.riesz_atoms()
    except UnsupportedMeasure:
        return
    for zi, _ in atoms:
        if bool(domain.contains(zi)) and w.lelong(zi) >= 2.0:
            raise DegenerateWeight(
                f"atom at {zi} has mass {w.lelong(zi)} >= 2; constants have infinite norm"
            )


def _scan_grid(domain, w, p, s, N, f_abs2, singular, tol, rule_order, max_cells):
    """Grid adapted to the weight, the monomial family, and optionally |f|^2."""

    def pilot(z):
        # the top monomial drives rim resolution, the 1 keeps the center honest
        zeta = np.abs(z - p) / s
        env = 1.0 + zeta ** (2 * N)
        if f_abs2 is not None:
            env = env + f_abs2(z)
        return env * weight_factor(w, z)

    rough, _ = integrate(
        domain, pilot, singular, tol=0.0, rel=0.03, rule_order=rule_order, max_cells=4000
    )
    abs_tol = max(tol * abs(rough), 1e-306)
    return build_grid(
        domain, pilot, singular, tol=abs_tol, rule_order=rule_order, max_cells=max_cells
    )


def _vander(nodes, p, s, N):
    zeta = (nodes - p) / s
    V = np.empty((len(nodes), N + 1), dtype=complex)
    V[:, 0] = 1.0
    for k in range(1, N + 1):
        V[:, k] = V[:, k - 1] * zeta
    return V


def gram_matrix(domain, w, p=None, s=None, N=10, tol=1e-10, rule_order=8, max_cells=100_000):
    """Gram matrix of ((z - p)/s)^k, k = 0..N, in the weighted inner product.

    G[j, k] = <psi_j, psi_k>. Raises DegenerateWeight when some monomial has
    infinite norm; an ill-conditioned result is returned but flagged
    (rescaling s is the usual fix). tol is relative to the overall mass.
    """
    p, s = _resolve_ps(domain, p, s)
    _check_weight(domain, w)
    grid = _scan_grid(
        domain, w, p, s, N, None, w.quadrature_singularities(), tol, rule_order, max_cells
    )
    wd = grid.weights * weight_factor(w, grid.nodes)
    G = np.zeros((N + 1, N + 1), dtype=complex)
    for lo in range(0, len(grid.nodes), _CHUNK):
        V = _vander(grid.nodes[lo : lo + _CHUNK], p, s, N)
        G += V.T @ (wd[lo : lo + _CHUNK, None] * np.conj(V))
    G = 0.5 * (G + G.conj().T)
    evals = scipy.linalg.eigvalsh(G)
    pd = bool(evals[0] > 0)
    cond = float(evals[-1] / evals[0]) if pd else math.inf
    return GramMatrix(
        center=p,
        scale=s,
        degree=N,
        matrix=G,
        cond_estimate=cond,
        error_budget=grid.error_estimate,
        ill_conditioned=not pd or cond > _ILL_COND,
        positive_definite=pd,
    )


def _blocked_lsq(grid, w, p, s, N, target, fixed=None):
    """Tall-skinny QR of the weighted Vandermonde, with distance history.

    fixed pins the first len(fixed) scaled-basis coefficients; the remaining
    columns are solved in the least-squares sense. Returns
    (coeffs, distances, cond, b_norm_sq).
    """
    sqw = np.sqrt(grid.weights * weight_factor(w, grid.nodes))
    n_fix = 0 if fixed is None else len(fixed)
    free = list(range(n_fix, N + 1))

    colnorm_sq = np.zeros(N + 1)
    b_norm_sq = 0.0
    for lo in range(0, len(grid.nodes), _CHUNK):
        V = _vander(grid.nodes[lo : lo + _CHUNK], p, s, N) * sqw[lo : lo + _CHUNK, None]
        colnorm_sq += np.sum(np.abs(V) ** 2, axis=0)
    colnorm = np.sqrt(colnorm_sq)
    colnorm[colnorm == 0] = 1.0
    d_scale = 1.0 / colnorm[free]

    R = np.zeros((0, len(free)), dtype=complex)
    t = np.zeros(0, dtype=complex)
    for lo in range(0, len(grid.nodes), _CHUNK):
        nodes = grid.nodes[lo : lo + _CHUNK]
        V = _vander(nodes, p, s, N) * sqw[lo : lo + _CHUNK, None]
        b = target(nodes) * sqw[lo : lo + _CHUNK]
        if fixed is not None:
            b = b - V[:, :n_fix] @ np.asarray(fixed, dtype=complex)
        b_norm_sq += float(np.sum(np.abs(b) ** 2))
        A = V[:, free] * d_scale[None, :]
        M = np.vstack([R, A])
        rhs = np.concatenate([t, b])
        Q, R = scipy.linalg.qr(M, mode="economic")
        t = Q.conj().T @ rhs

    y = scipy.linalg.solve_triangular(R, t)
    coeffs = np.zeros(N + 1, dtype=complex)
    if fixed is not None:
        coeffs[:n_fix] = np.asarray(fixed, dtype=complex)
    coeffs[free] = y * d_scale

    # explicit residual pass: backward-stable final distance
    res_sq = 0.0
    for lo in range(0, len(grid.nodes), _CHUNK):
        nodes = grid.nodes[lo : lo + _CHUNK]
        V = _vander(nodes, p, s, N) * sqw[lo : lo + _CHUNK, None]
        b = target(nodes) * sqw[lo : lo + _CHUNK]
        res_sq += float(np.sum(np.abs(b - V @ coeffs) ** 2))

    d_final_sq = res_sq
    distances = np.full(N + 1, np.nan)
    tail = 0.0
    tails = np.zeros(len(free))
    for i in range(len(free) - 1, -1, -1):
        tails[i] = tail
        tail += abs(t[i]) ** 2
    for i, k in enumerate(free):
        distances[k] = math.sqrt(max(0.0, d_final_sq + tails[i]))
    cond = float(np.linalg.cond(R)) if R.size else 1.0
    return coeffs, distances, cond, b_norm_sq


def best_poly_approx(
    f,
    domain,
    w,
    p=None,
    s=None,
    n=10,
    tol=1e-10,
    f_singularities=(),
    divisor_Q: Polynomial | None = None,
    rule_order=8,
    max_cells=100_000,
) -> ApproximationResult:
    """Best weighted-L2 approximation of f by polynomials of degree <= n.

    With divisor_Q, approximates f/Q in the weight reduced by |Q|^2 (so the
    effective approximant of f is Q * P); this is the factor-out trick for
    weights with an atom of mass >= 2 at a zero of Q. The returned polynomial
    is Q * P in that case and distances refer to ||f - Q P||.
    """
    p, s = _resolve_ps(domain, p, s)
    if divisor_Q is None:
        _check_weight(domain, w)
        target = f
        eff_w = w
    else:
        q_poly = divisor_Q

        def target(z):
            return f(z) / q_poly(z)

        class _Reduced:
            """Weight with exp(-phi) |Q|^2 as density."""

            def evaluate(self, z):
                with np.errstate(divide="ignore"):
                    return w.evaluate(z) - 2.0 * np.log(np.abs(q_poly(z)))

            def quadrature_singularities(self):
                return w.quadrature_singularities()

        eff_w = _Reduced()

    singular = tuple(eff_w.quadrature_singularities()) + tuple(f_singularities)

    def f_abs2(z):
        return np.abs(target(z)) ** 2

    grid = _scan_grid(domain, eff_w, p, s, n, f_abs2, singular, tol, rule_order, max_cells)
    coeffs, distances, cond, _ = _blocked_lsq(grid, eff_w, p, s, n, target)
    poly = Polynomial(tuple(coeffs), p, s)
    if divisor_Q is not None:
        poly = divisor_Q.recenter(p, s) * poly
    return ApproximationResult(
        degree=n,
        polynomial=poly,
        distance=float(distances[n]),
        distances=distances,
        error_budget=grid.error_estimate,
        cond_estimate=cond,
        ill_conditioned=cond > _ILL_COND,
    )


def best_poly_approx_with_jet(
    f,
    domain,
    w,
    p=None,
    s=None,
    n=10,
    jet=(),
    tol=1e-10,
    f_singularities=(),
    rule_order=8,
    max_cells=100_000,
) -> ApproximationResult:
    """Best approximation whose Taylor jet at p is pinned to the given values.

    jet lists the Taylor coefficients c_0..c_m of the approximant at p
    (m <= n); the remaining degrees of freedom are solved by least squares.
    """
    p, s = _resolve_ps(domain, p, s)
    if len(jet) > n + 1:
        raise InvalidParameters("jet order exceeds the polynomial degree")
    _check_weight(domain, w)
    singular = tuple(w.quadrature_singularities()) + tuple(f_singularities)

    def f_abs2(z):
        return np.abs(f(z)) ** 2

    grid = _scan_grid(domain, w, p, s, n, f_abs2, singular, tol, rule_order, max_cells)
    k = np.arange(len(jet))
    fixed = np.asarray(jet, dtype=complex) * (s**k)
    coeffs, distances, cond, _ = _blocked_lsq(grid, w, p, s, n, f, fixed=fixed)
    return ApproximationResult(
        degree=n,
        polynomial=Polynomial(tuple(coeffs), p, s),
        distance=float(distances[n]),
        distances=distances,
        error_budget=grid.error_estimate,
        cond_estimate=cond,
        ill_conditioned=cond > _ILL_COND,
    )


def extremal_basis(
    domain, w, p=None, s=None, N=10, tol=1e-10, gram: GramMatrix | None = None, **kw
):
    """Orthonormal family f_n = a_n (z-p)^n + higher order with maximal a_n > 0.

    Within the degree <= N subspace, f_n is orthogonal to every higher-
    vanishing element, so it comes from Cholesky factorization of the Gram
    matrix in reversed monomial order; the maximal leading coefficient is the
    reciprocal Cholesky diagonal.
    """
    if gram is None:
        gram = gram_matrix(domain, w, p, s, N, tol, **kw)
    G = gram.matrix
    N = gram.degree
    rev = G[::-1, ::-1]
    try:
        L = scipy.linalg.cholesky(rev, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise IllConditioned(f"Gram Cholesky broke down (cond ~ {gram.cond_estimate:.2e})") from exc
    B = scipy.linalg.solve_triangular(L.conj().T, np.eye(N + 1), lower=False)
    basis = []
    for n in range(N + 1):
        j = N - n
        coeffs = np.zeros(N + 1, dtype=complex)
        for kk in range(j + 1):
            coeffs[N - kk] = B[kk, j]
        basis.append(Polynomial(tuple(coeffs), gram.center, gram.scale))
    return basis


@dataclass
class ScanResult:
    """Distance sequence of a density scan plus the advisory verdict."""

    distances: np.ndarray
    verdict: str
    approx: ApproximationResult


def scan_verdict(distances) -> str:
    """HEURISTIC decay/plateau label for a distance sequence.

    decaying: d_N < 0.05 d_0 with last-quartile log-slope < -0.05 per degree
    (or d_N at the numerical floor); plateau: last-quartile relative change
    below 1% while d_N > 0.2 d_0; anything else inconclusive.
    """
    d = np.asarray(distances, dtype=float)
    d = d[~np.isnan(d)]
    if len(d) < 2:
        return "inconclusive"
    d0, dn = d[0], d[-1]
    if d0 <= 1e-13:
        return "inconclusive"
    if dn <= max(1e-14, 1e-10 * d0):
        return "decaying"
    quart = d[int(math.ceil(0.75 * (len(d) - 1))) :]
    if dn < 0.05 * d0:
        logs = np.log(np.maximum(quart, 1e-300))
        slope = float(np.polyfit(np.arange(len(quart)), logs, 1)[0])
        if slope < -0.05:
            return "decaying"
    rel_change = (quart[0] - dn) / max(quart[0], 1e-300)
    if rel_change < 0.01 and dn > 0.2 * d0:
        return "plateau"
    return "inconclusive"


def density_scan(
    f,
    domain,
    w,
    p=None,
    s=None,
    N_max=20,
    tol=1e-10,
    f_singularities=(),
    rule_order=8,
    max_cells=100_000,
) -> ScanResult:
    """Distance sequence d_0..d_N from f to polynomial subspaces, with verdict.

    The verdict is advisory (HEURISTIC) and never raises; density of
    polynomials would drive d_n to 0.
    """
    res = best_poly_approx(
        f,
        domain,
        w,
        p,
        s,
        N_max,
        tol,
        f_singularities,
        rule_order=rule_order,
        max_cells=max_cells,
    )
    return ScanResult(distances=res.distances, verdict=scan_verdict(res.distances), approx=res)
