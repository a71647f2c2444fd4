"""Encoding band-limited functions on a genus-0 surface into matrices.

phi_n maps a field through its harmonic coefficients onto the fuzzy
harmonics, scaled so that phi_n(1) = identity and, on the round sphere of
matching radius, phi_n(x_i) = X_i exactly.  upsilon_n is the one-sided
inverse: phi_n(upsilon_n(A)) = A for every matrix A, while
upsilon_n(phi_n(f)) truncates f at modes n < N.
"""

from dataclasses import dataclass, field

import numpy as np

from . import fuzzy_sphere
from .fuzzy_sphere import FuzzySphereRep, harmonic, omega_s2_scale, trace_inner
from .sphharm import ScalarField, SphereGrid, field_from_coeffs, project, ylm_eval

__all__ = [
    "ylm_eval",
    "project",
    "ScalarField",
    "phi_n",
    "upsilon_n",
    "truncation_error",
    "OrderingSensitivity",
    "ordering_sensitivity",
    "EncodedSurface",
    "analyze_surface",
]


def phi_n(rep: FuzzySphereRep, f: ScalarField) -> np.ndarray:
    """Phi_N(f) = sum_{n < N} c_nm * omega(n, R) * P^m_n.

    Modes with n >= N are discarded.  Linear; Hermitian images for real
    fields; Phi_N(1) = I.
    """
    out = np.zeros((rep.N, rep.N), dtype=complex)
    for n in range(min(f.L, rep.N - 1) + 1):
        scale = omega_s2_scale(n, rep.R)
        for m in range(-n, n + 1):
            c = f.coeff(n, m)
            if c != 0:
                out += c * scale * harmonic(rep, n, m).mat
    return out


def upsilon_n(rep: FuzzySphereRep, A, L=None) -> ScalarField:
    """One-sided inverse of phi_n.

    Upsilon_N(A) = sum_{n < N} <P^m_n, A> / ||P^m_n||^2 / omega(n, R)
    * psi^m_n, with the norm evaluated at eps = eps_N.
    """
    A = np.asarray(A, dtype=complex)
    if L is None:
        L = rep.N - 1
    out = ScalarField(L)
    for n in range(min(L, rep.N - 1) + 1):
        scale = omega_s2_scale(n, rep.R)
        for m in range(-n, n + 1):
            h = harmonic(rep, n, m)
            c = trace_inner(rep, h.mat, A) / h.norm_sq / scale
            out.c[n, m + L] = c
    return out


def truncation_error(f: ScalarField, N: int) -> float:
    """Norm of the tail sum_{n >= N} discarded by phi_n."""
    tail = 0.0
    for n in range(N, f.L + 1):
        tail += float(np.sum(np.abs(f.c[n, f.L - n : f.L + n + 1]) ** 2))
    return float(np.sqrt(tail))


def _matrix_norm(rep, A) -> float:
    """Normalized Hilbert-Schmidt norm sqrt((1/N) tr(A^dag A))."""
    return float(np.sqrt(abs(trace_inner(rep, A, A))))


@dataclass
class OrderingSensitivity:
    """Ordering-induced discrepancies of the encoded product."""

    commutator_discrepancy: float
    associativity_residual: float
    product_vs_pointwise: float

    def __float__(self):
        return self.commutator_discrepancy


def ordering_sensitivity(rep, u: ScalarField, v: ScalarField, w: ScalarField = None) -> OrderingSensitivity:
    """Measure how much the encoded product depends on operator ordering.

    * commutator_discrepancy = ||Upsilon(Phi u Phi v) - Upsilon(Phi v Phi u)||,
      the quantity that decays like 1/N;
    * associativity_residual = ||(Phi u Phi v) Phi w - Phi u (Phi v Phi w)||,
      zero to machine precision (matrix algebra is associative);
    * product_vs_pointwise = ||Upsilon(Phi u Phi v) - truncate(u v)||.
    """
    if w is None:
        w = v
    Au, Av, Aw = phi_n(rep, u), phi_n(rep, v), phi_n(rep, w)
    # the encoded product lives exactly in modes n <= u.L + v.L, so the
    # field-side comparisons are restricted to that band (and below N)
    Lc = min(u.L + v.L, rep.N - 1)
    comm = upsilon_n(rep, Au @ Av - Av @ Au, L=Lc)
    assoc = _matrix_norm(rep, (Au @ Av) @ Aw - Au @ (Av @ Aw))
    grid = SphereGrid(u.L + v.L)
    uv = project(u.evaluate(grid) * v.evaluate(grid), u.L + v.L, grid)
    diff = upsilon_n(rep, Au @ Av, L=Lc) - uv.truncated(Lc)
    return OrderingSensitivity(
        commutator_discrepancy=comm.norm(),
        associativity_residual=assoc,
        product_vs_pointwise=diff.norm(),
    )


@dataclass
class EncodedSurface:
    """Matrix encoding of a surface: coordinate images plus extra fields."""

    rep: FuzzySphereRep
    coords: dict
    extras: dict = field(default_factory=dict)
    band_limit: int = 0
    fields: dict = field(default_factory=dict)


def _as_field(f, L, grid) -> ScalarField:
    if isinstance(f, ScalarField):
        return f
    theta, phi = np.meshgrid(grid.theta, grid.phi, indexing="ij")
    return project(np.asarray(f(theta, phi), dtype=complex), L, grid)


def analyze_surface(x1, x2, x3, extras=None, N=16, R=1.0, L=None, grid=None):
    """Encode immersion coordinates (and extras) and report diagnostics.

    x1, x2, x3 may be ScalarFields or callables f(theta, phi) evaluated on
    the grid.  Returns (EncodedSurface, report) where the report rows
    compare matrix-side quantities (traces of encoded products) with their
    classical counterparts (quadrature integrals).
    """
    extras = dict(extras or {})
    if L is None:
        L = max(
            (f.L for f in (x1, x2, x3, *extras.values()) if isinstance(f, ScalarField)),
            default=8,
        )
    if grid is None:
        grid = SphereGrid(2 * L)
    rep = fuzzy_sphere.build_rep(N, R)
    fields = {
        "x1": _as_field(x1, L, grid),
        "x2": _as_field(x2, L, grid),
        "x3": _as_field(x3, L, grid),
    }
    extra_fields = {name: _as_field(f, L, grid) for name, f in extras.items()}
    coords = {name: phi_n(rep, f) for name, f in fields.items()}
    extra_mats = {name: phi_n(rep, f) for name, f in extra_fields.items()}
    report = {"N": N, "R": R, "band_limit": L, "rows": [], "truncation": {}, "hermiticity": {}}
    for name, f in {**fields, **extra_fields}.items():
        report["truncation"][name] = truncation_error(f, N)
        mat = coords.get(name, extra_mats.get(name))
        report["hermiticity"][name] = float(np.max(np.abs(mat - mat.conj().T))) if f.is_real() else None
    for name, f in {**fields, **extra_fields}.items():
        mat = coords.get(name, extra_mats.get(name))
        trace = complex(np.trace(mat) / N)
        classical = f.coeff(0, 0)
        report["rows"].append(
            {
                "quantity": f"average({name})",
                "matrix_value": trace,
                "classical_value": classical,
                "abs_err": abs(trace - classical),
            }
        )
        sq_trace = complex(np.trace(mat @ mat) / N)
        sq_classical = grid.average(f.evaluate(grid) ** 2)
        report["rows"].append(
            {
                "quantity": f"average({name}^2)",
                "matrix_value": sq_trace,
                "classical_value": sq_classical,
                "abs_err": abs(sq_trace - sq_classical),
            }
        )
    surface = EncodedSurface(rep, coords, extra_mats, L, {**fields, **extra_fields})
    return surface, report
