"""Poisson calculus on the sphere, metric-from-brackets, and limit checks.

The canonical bracket used throughout is the conjugate chart
(p, q) = (cos theta, phi):

    {u, v} = du/dp dv/dq - du/dq dv/dp,

under which {x1, x2} = -x3 on the round unit sphere.  The Poisson
structure inherited from the matrix commutator carries the opposite
orientation and a 1/R scale; `commutator_limit_reference` returns the
classical field that (1/(i eps))[Phi u, Phi v] converges to.

The metric machinery (conformal factor and metric pairing) evaluates the
determinant of the induced metric in the geographic (theta, phi) chart,
which is sin^2(theta) for the round unit sphere, and reproduces the
pullback metric pairing g(du#, dv#) on arbitrary embeddings.
"""

import math
from dataclasses import dataclass

import numpy as np

from .sphharm import AliasingError, GridField, ScalarField, SphereGrid, field_from_coeffs, project

__all__ = [
    "SingularMetricError",
    "EmbeddingFields",
    "round_sphere_fields",
    "poisson_bracket",
    "commutator_limit_reference",
    "conformal_factor",
    "metric_pairing",
    "fuzzy_bracket",
    "trace_integral_compare",
    "verify_phase_space",
    "PhaseSpaceReport",
]


class SingularMetricError(ValueError):
    def __init__(self, nodes):
        self.nodes = nodes
        super().__init__(f"conformal factor below threshold at {len(nodes)} nodes")


@dataclass
class EmbeddingFields:
    """Immersion coordinates x_i as band-limited fields on the sphere."""

    x: list

    @property
    def band_limit(self):
        return max(f.L for f in self.x)


def round_sphere_fields(R: float = 1.0):
    """The three coordinate fields of the radius-R round sphere.

    x1 = R sin(theta) cos(phi), x2 = R sin(theta) sin(phi), x3 = R cos(theta).
    """
    s6 = R / math.sqrt(6.0)
    x1 = field_from_coeffs(1, {(1, 1): -s6, (1, -1): s6})
    x2 = field_from_coeffs(1, {(1, 1): 1j * s6, (1, -1): 1j * s6})
    x3 = field_from_coeffs(1, {(1, 0): R / math.sqrt(3.0)})
    return EmbeddingFields([x1, x2, x3])


def _bracket_grid(u: ScalarField, v: ScalarField, grid: SphereGrid):
    return u.eval_dp(grid) * v.eval_dq(grid) - u.eval_dq(grid) * v.eval_dp(grid)


def poisson_bracket(u: ScalarField, v: ScalarField, grid=None, L_out=None) -> ScalarField:
    """{u, v} in the (cos theta, phi) chart, computed pseudo-spectrally.

    Derivatives are synthesized from the coefficients, the bracket is
    formed pointwise on the grid and re-projected; this is exact for
    band-limited inputs because the combined bracket is again band-limited
    (the individual derivative terms are not, but their singular parts
    cancel).
    """
    if L_out is None:
        L_out = u.L + v.L
    if grid is None:
        grid = SphereGrid(L_out)
    if u.L + v.L > grid.capacity:
        raise AliasingError(
            f"bracket band {u.L + v.L} exceeds grid capacity {grid.capacity}"
        )
    return project(_bracket_grid(u, v, grid), L_out, grid)


def commutator_limit_reference(u: ScalarField, v: ScalarField, R: float = 1.0, **kw) -> ScalarField:
    """Classical limit of (1/(i eps))[Phi_N(u), Phi_N(v)].

    The inherited Poisson structure is oriented opposite to the
    (cos theta, phi) chart and scales with 1/R: the limit is -{u,v}/R.
    """
    return poisson_bracket(u, v, **kw).scaled(-1.0 / R)


def _phi_derivative_grids(e: EmbeddingFields, grid: SphereGrid):
    dq = [f.eval_dq(grid) for f in e.x]
    dp = [f.eval_dp(grid) for f in e.x]
    return dp, dq


def conformal_factor(e: EmbeddingFields, grid=None, form="pq", pole_tol=1e-10) -> GridField:
    """Determinant of the induced metric in the (theta, phi) chart.

    Two equivalent bracket expressions are provided:

    * ``form="pq"``: (1 - p^2) * sum_ij (dx_i/dq)(dx_j/dp) {x_j, x_i},
      built from the conjugate functions p = cos(theta), q = phi;
    * ``form="j"``: -sum_ij {x_j, x_i} {J0, x_i} (J1 {J2, x_j} - J2 {J1, x_j})
      with (J0, J1, J2) the round-sphere coordinates; the pole prefactor
      of the conjugate-chart form cancels against the chart Jacobian, so
      no node is actually singular.

    For the round unit sphere both give sin^2(theta).  Nodes with
    1 - p^2 < pole_tol would be masked and reported via ``excluded``
    (Gauss-Legendre nodes never reach them).
    """
    if grid is None:
        grid = SphereGrid(3 * e.band_limit + 3)
    n = len(e.x)
    dp, dq = _phi_derivative_grids(e, grid)
    brackets = {}
    for i in range(n):
        for j in range(n):
            if i < j:
                brackets[(i, j)] = dp[i] * dq[j] - dq[i] * dp[j]
            elif i == j:
                brackets[(i, j)] = np.zeros((grid.n_theta, grid.n_phi), complex)
            else:
                brackets[(i, j)] = -brackets[(j, i)]
    p2 = (grid.p**2)[:, None]
    excluded = [int(i) for i in np.nonzero(1.0 - grid.p**2 < pole_tol)[0]]
    if form == "pq":
        total = np.zeros((grid.n_theta, grid.n_phi), complex)
        for i in range(n):
            for j in range(n):
                total += dq[i] * dp[j] * brackets[(j, i)]
        values = (1.0 - p2) * total
    elif form == "j":
        # J0 = cos(theta), J1 = sin(theta) cos(phi), J2 = sin(theta) sin(phi)
        x1f, x2f, x3f = round_sphere_fields(1.0).x
        jf = [x3f, x1f, x2f]
        jg = [f.evaluate(grid) for f in jf]
        jdp = [f.eval_dp(grid) for f in jf]
        jdq = [f.eval_dq(grid) for f in jf]
        total = np.zeros((grid.n_theta, grid.n_phi), complex)
        for i in range(n):
            b_j0_xi = jdp[0] * dq[i] - jdq[0] * dp[i]
            for j in range(n):
                b_j1_xj = jdp[1] * dq[j] - jdq[1] * dp[j]
                b_j2_xj = jdp[2] * dq[j] - jdq[2] * dp[j]
                total += brackets[(j, i)] * b_j0_xi * (jg[1] * b_j2_xj - jg[2] * b_j1_xj)
        values = -total
    else:
        raise ValueError(f"unknown form {form!r}")
    return GridField(grid, values.real, excluded=excluded)


def metric_pairing(e: EmbeddingFields, u: ScalarField, v: ScalarField, grid=None, threshold=1e-10) -> GridField:
    """Pointwise metric pairing g(du#, dv#) = sum_i {x_i,u}{x_i,v} / C.

    The chart factors cancel between numerator and denominator, so the
    pairing is evaluated directly in the (cos theta, phi) chart:
    sum_i {x_i,u}{x_i,v} divided by the same-chart metric determinant.
    Raises SingularMetricError listing nodes where the determinant falls
    below ``threshold``.
    """
    if grid is None:
        grid = SphereGrid(3 * max(e.band_limit, u.L, v.L) + 3)
    n = len(e.x)
    dp, dq = _phi_derivative_grids(e, grid)
    udp, udq = u.eval_dp(grid), u.eval_dq(grid)
    vdp, vdq = v.eval_dp(grid), v.eval_dq(grid)
    num = np.zeros((grid.n_theta, grid.n_phi), complex)
    for i in range(n):
        bu = dp[i] * udq - dq[i] * udp
        bv = dp[i] * vdq - dq[i] * vdp
        num += bu * bv
    det = np.zeros((grid.n_theta, grid.n_phi), complex)
    for i in range(n):
        for j in range(n):
            bij = dp[j] * dq[i] - dq[j] * dp[i]  # {x_j, x_i}
            det += dq[i] * dp[j] * bij
    det = det.real
    bad = np.abs(det) < threshold
    if np.any(bad):
        raise SingularMetricError(sorted(zip(*np.nonzero(bad))))
    return GridField(grid, (num / det).real)


def fuzzy_bracket(rep, A, B):
    """(1/(i eps)) (AB - BA) for N x N matrices of the representation."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError("matrix dimensions do not match")
    return (A @ B - B @ A) / (1j * rep.eps)


def trace_integral_compare(rep, u: ScalarField):
    """(Tr_N(Phi_N(u)), (1/4pi) * integral(u), |difference|).

    For band-limited u both sides equal the (0,0) coefficient, so the
    difference is zero to roundoff at every N; convergence studies over
    noncommutative products live in `ncgeom.studies`.
    """
    from .encode import phi_n

    mat = phi_n(rep, u)
    trace = complex(np.trace(mat) / rep.N)
    integral = u.coeff(0, 0)
    return trace, integral, abs(trace - integral)


# ---------------------------------------------------------------------------
# T* S^2 phase space: canonical brackets of the eight embedding functions
# x1..x6 = (sin t cos f, sin t sin f, cos t, cos t cos f, cos t sin f, sin t)
# and x7 = p_theta, x8 = p_phi; {u,v} = sum_k du/dpk dv/dqk - du/dqk dv/dpk.

def _ts2_values(t, f, pt, pf):
    st, ct, sf, cf = math.sin(t), math.cos(t), math.sin(f), math.cos(f)
    return [st * cf, st * sf, ct, ct * cf, ct * sf, st, pt, pf]


def _ts2_grads(t, f, pt, pf):
    """Rows (d/dtheta, d/dphi, d/dptheta, d/dpphi) for x1..x8."""
    st, ct, sf, cf = math.sin(t), math.cos(t), math.sin(f), math.cos(f)
    return [
        (ct * cf, -st * sf, 0.0, 0.0),
        (ct * sf, st * cf, 0.0, 0.0),
        (-st, 0.0, 0.0, 0.0),
        (-st * cf, -ct * sf, 0.0, 0.0),
        (-st * sf, ct * cf, 0.0, 0.0),
        (ct, 0.0, 0.0, 0.0),
        (0.0, 0.0, 1.0, 0.0),
        (0.0, 0.0, 0.0, 1.0),
    ]


# nonzero structure constants {x_i, x_j} = sum_k c x_k as {(i,j): (c, k)},
# 1-based indices; derived from the canonical brackets of the embedding
def _ts2_structure():
    table = {
        (7, 1): (1.0, 4),
        (7, 4): (-1.0, 1),
        (7, 2): (1.0, 5),
        (7, 5): (-1.0, 2),
        (7, 3): (-1.0, 6),
        (7, 6): (1.0, 3),
        (8, 1): (-1.0, 2),
        (8, 2): (1.0, 1),
        (8, 4): (-1.0, 5),
        (8, 5): (1.0, 4),
    }
    return table


@dataclass
class PhaseSpaceReport:
    n_points: int
    max_bracket_residual: float
    max_immersion_residual: float

    @property
    def max_residual(self):
        return max(self.max_bracket_residual, self.max_immersion_residual)


def verify_phase_space(points) -> PhaseSpaceReport:
    """Check the T*S^2 commutation table and immersion identities.

    Each point is (theta, phi, p_theta, p_phi); theta may not be 0 or pi.
    Brackets are evaluated from the analytic derivatives of the embedding
    functions and compared against the structure-constant table; the four
    immersion identities are evaluated directly.
    """
    structure = _ts2_structure()
    max_br = 0.0
    max_im = 0.0
    for t, f, pt, pf in points:
        if abs(math.sin(t)) < 1e-12:
            raise ValueError("polar points are outside the chart")
        x = _ts2_values(t, f, pt, pf)
        g = _ts2_grads(t, f, pt, pf)
        for i in range(8):
            for j in range(8):
                # {u,v} = u_pt v_t - u_t v_pt + u_pf v_f - u_f v_pf
                br = (
                    g[i][2] * g[j][0]
                    - g[i][0] * g[j][2]
                    + g[i][3] * g[j][1]
                    - g[i][1] * g[j][3]
                )
                if (i + 1, j + 1) in structure:
                    c, k = structure[(i + 1, j + 1)]
                    expected = c * x[k - 1]
                elif (j + 1, i + 1) in structure:
                    c, k = structure[(j + 1, i + 1)]
                    expected = -c * x[k - 1]
                else:
                    expected = 0.0
                max_br = max(max_br, abs(br - expected))
        x1, x2, x3, x4, x5, x6 = x[:6]
        max_im = max(
            max_im,
            abs(x1 * x1 + x2 * x2 + x3 * x3 - 1.0),
            abs(x1 * x1 + x2 * x2 - x6 * x6),
            abs(x1 * x3 - x4 * x6),
            abs(x2 * x3 - x5 * x6),
        )
    return PhaseSpaceReport(len(points), max_br, max_im)
