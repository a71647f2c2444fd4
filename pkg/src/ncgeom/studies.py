"""Convergence studies over the matrix size N.

Each study returns (rows, slope) where rows are
(N, eps, value, reference, abs_err) tuples and slope is the fitted
log-log rate of abs_err against N (None for a single N or exact rows).

Measured rates, for reference:

* trace of a noncommutative triple product vs the classical integral:
  first order (slope ~ -1, the imaginary part carries eps/2 times the
  integral of u{v,w});
* ordering discrepancy of the encoded product: first order
  (it is eps times the norm of the Poisson bracket, to leading order);
* commutator vs classical bracket in coefficient space: second order
  (slope ~ -2; the symmetric ordering cancels the even corrections).
"""

import math

import numpy as np

from . import encode, fuzzy_sphere, geometry
from .sphharm import ScalarField, SphereGrid, field_from_coeffs, project

__all__ = [
    "fit_slope",
    "random_real_field",
    "trace_study",
    "bracket_study",
    "ordering_study",
    "STUDIES",
]


def fit_slope(Ns, errs):
    """Least-squares slope of log(err) vs log(N); None if degenerate."""
    Ns = [n for n, e in zip(Ns, errs) if e > 0]
    errs = [e for e in errs if e > 0]
    if len(Ns) < 2:
        return None
    return float(np.polyfit(np.log(Ns), np.log(errs), 1)[0])


def random_real_field(L: int, rng) -> ScalarField:
    """Random real band-limited field with unit-scale coefficients."""
    f = ScalarField(L)
    for n in range(L + 1):
        f.c[n, L] = rng.normal()
        for m in range(1, n + 1):
            c = (rng.normal() + 1j * rng.normal()) / 2.0
            f.c[n, m + L] = c
            f.c[n, -m + L] = (-1) ** m * np.conj(c)
    return f


def _coordinate_fields():
    e = geometry.round_sphere_fields(1.0)
    return e.x[0], e.x[1], e.x[2]


def trace_study(Ns, R=1.0, mode="triple"):
    """Trace of encoded products against the classical integral.

    mode="triple": Tr_N(Phi(x1) Phi(x2) Phi(x3)) vs (1/4pi) int x1 x2 x3
    (reference 0; the deviation is first order in 1/N).
    mode="cos2":   Tr_N(Phi(cos theta)^2) vs 1/3, exact at every N.
    """
    x1, x2, x3 = _coordinate_fields()
    rows = []
    errs = []
    for N in Ns:
        rep = fuzzy_sphere.build_rep(N, R)
        if mode == "triple":
            mats = [encode.phi_n(rep, f) for f in (x1, x2, x3)]
            tr = complex(np.trace(mats[0] @ mats[1] @ mats[2]) / N)
            ref = 0.0 + 0.0j
        elif mode == "cos2":
            A = encode.phi_n(rep, x3)
            tr = complex(np.trace(A @ A) / N)
            ref = complex(1.0 / 3.0)
        else:
            raise ValueError(f"unknown trace study mode {mode!r}")
        err = abs(tr - ref)
        rows.append((N, rep.eps, abs(tr), abs(ref), err))
        errs.append(err)
    return rows, fit_slope(Ns, errs)


def bracket_study(Ns, R=1.0, L=4, seed=0):
    """Coefficient-space error of (1/(i eps))[Phi u, Phi v] vs its limit.

    The classical reference is -{u, v}/R (chart orientation and radius
    scale); the error decays at second order in 1/N.
    """
    rng = np.random.default_rng(seed)
    u = random_real_field(L, rng)
    v = random_real_field(L, rng)
    reference = geometry.commutator_limit_reference(u, v, R)
    rows = []
    errs = []
    for N in Ns:
        rep = fuzzy_sphere.build_rep(N, R)
        fb = geometry.fuzzy_bracket(rep, encode.phi_n(rep, u), encode.phi_n(rep, v))
        # the encoded bracket lives exactly in modes n <= u.L + v.L;
        # comparing on that band avoids the near-null top modes of upsilon
        Lc = min(reference.L, rep.N - 1)
        got = encode.upsilon_n(rep, fb, L=Lc)
        ref = reference.truncated(Lc)
        err = (got - ref).norm()
        rows.append((N, rep.eps, got.norm(), ref.norm(), err))
        errs.append(err)
    return rows, fit_slope(Ns, errs)


def ordering_study(Ns, R=1.0):
    """Commutator discrepancy of the encoded product on (cos t, sin t cos f).

    The quantity is eps_N times the bracket norm to leading order, so it
    decays at first order in 1/N.
    """
    x1, _, x3 = _coordinate_fields()
    rows = []
    errs = []
    for N in Ns:
        rep = fuzzy_sphere.build_rep(N, R)
        sens = encode.ordering_sensitivity(rep, x3, x1)
        d = sens.commutator_discrepancy
        rows.append((N, rep.eps, d, 0.0, d))
        errs.append(d)
    return rows, fit_slope(Ns, errs)


STUDIES = {
    "trace": trace_study,
    "bracket": bracket_study,
    "ordering": ordering_study,
}
