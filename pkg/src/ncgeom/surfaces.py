"""Matrix models of noncommutative surfaces of rotation and the torus.

A surface of rotation is defined by a real polynomial profile
rho(z, eps); its positivity interval at the solved eps_N carries an
N-dimensional representation with X0 diagonal on the lattice
z_lo + (r + 1/2) eps and X+ built from sqrt(rho) at the interior lattice
points.  The module also provides the normal/central matrix orderings,
isomorphisms between profiles, and the clock/shift torus.
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DegenerateProfileError",
    "NoMatrixRepresentationError",
    "AmbiguousComponentError",
    "RepresentationConstructionError",
    "OrderingUndefinedError",
    "IsoUndefinedError",
    "RhoPoly",
    "sphere_profile",
    "SurfaceRotRep",
    "rho_interval",
    "solve_eps",
    "build_rotation_rep",
    "apply_ordering",
    "IsoImages",
    "iso_map",
    "FuzzyTorus",
    "fuzzy_torus",
    "torus_trace",
]


class DegenerateProfileError(ValueError):
    pass


class NoMatrixRepresentationError(ValueError):
    pass


class AmbiguousComponentError(ValueError):
    pass


class RepresentationConstructionError(ValueError):
    pass


class OrderingUndefinedError(ValueError):
    pass


class IsoUndefinedError(ValueError):
    pass


@dataclass(frozen=True)
class RhoPoly:
    """Real polynomial rho(z, eps) stored as {(z_power, eps_power): coeff}."""

    coeffs: dict

    def __post_init__(self):
        clean = {k: float(v) for k, v in self.coeffs.items() if v != 0}
        object.__setattr__(self, "coeffs", clean)

    def __call__(self, z, eps):
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z)
        for (a, b), c in self.coeffs.items():
            out = out + c * z**a * eps**b
        return out if out.shape else float(out)

    def z_coeffs(self, eps: float):
        """Coefficients of the z-polynomial at fixed eps, ascending order."""
        deg = max((a for a, _ in self.coeffs), default=0)
        c = np.zeros(deg + 1)
        for (a, b), v in self.coeffs.items():
            c[a] += v * eps**b
        return c

    @property
    def eps_independent(self) -> bool:
        return all(b == 0 for _, b in self.coeffs)

    def serialize(self) -> str:
        lines = [
            f"z^{a} eps^{b} : {c!r}"
            for (a, b), c in sorted(self.coeffs.items())
        ]
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse(text: str) -> "RhoPoly":
        coeffs = {}
        for ln in text.splitlines():
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            head, _, val = ln.partition(":")
            parts = head.split()
            if len(parts) != 2 or not parts[0].startswith("z^") or not parts[1].startswith("eps^"):
                raise ValueError(f"malformed profile line: {ln!r}")
            a = int(parts[0][2:])
            b = int(parts[1][4:])
            coeffs[(a, b)] = coeffs.get((a, b), 0.0) + float(val)
        return RhoPoly(coeffs)


def sphere_profile(R: float) -> RhoPoly:
    """rho = R^2 - z^2 + eps^2/4, the profile of the radius-R sphere."""
    return RhoPoly({(0, 0): R * R, (2, 0): -1.0, (0, 2): 0.25})


def _poly_eval(c, z):
    out = 0.0
    for v in reversed(c):
        out = out * z + v
    return out


def _real_roots(c):
    """Sorted real roots of an ascending-coefficient polynomial."""
    c = np.asarray(c, float)
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        return None  # identically zero
    c = c[: nz[-1] + 1]
    if c.size == 1:
        return []
    scale = np.max(np.abs(c))
    roots = np.roots(c[::-1] / scale)
    real = sorted(r.real for r in roots if abs(r.imag) <= 1e-8 * (1.0 + abs(r)))
    # merge numerically coincident roots (multiple roots)
    merged = []
    for r in real:
        if merged and abs(r - merged[-1]) <= 1e-9 * (1.0 + abs(r)):
            continue
        merged.append(r)
    return [_refine_root(c, r, merged) for r in merged]


def _refine_root(c, r, all_roots):
    """Polish a root to ~1e-12: bisection across a sign change, else Newton."""
    f = lambda z: _poly_eval(c, z)
    gaps = [abs(r - s) for s in all_roots if s != r]
    delta = min(gaps) / 3 if gaps else 1.0
    delta = max(min(delta, 1e-3 * (1.0 + abs(r))), 1e-14)
    lo, hi = r - delta, r + delta
    if f(lo) * f(hi) < 0:
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if f(lo) * f(mid) <= 0:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-14 * (1.0 + abs(mid)):
                break
        return 0.5 * (lo + hi)
    dc = np.arange(1, len(c)) * c[1:]
    x = r
    for _ in range(60):
        d = _poly_eval(dc, x)
        if d == 0:
            break
        step = f(x) / d
        x -= step
        if abs(step) <= 1e-15 * (1.0 + abs(x)):
            break
    return x


def rho_interval(rho: RhoPoly, eps0: float):
    """Maximal open intervals where rho(., eps0) > 0, endpoints to ~1e-12.

    Unbounded pieces are reported with +-inf endpoints.
    """
    c = rho.z_coeffs(eps0)
    roots = _real_roots(c)
    if roots is None:
        raise DegenerateProfileError("profile is identically zero at this eps")
    bounds = [-math.inf] + roots + [math.inf]
    intervals = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if lo == -math.inf and hi == math.inf:
            probe = 0.0
        elif lo == -math.inf:
            probe = hi - 1.0 - abs(hi)
        elif hi == math.inf:
            probe = lo + 1.0 + abs(lo)
        else:
            probe = 0.5 * (lo + hi)
        if _poly_eval(c, probe) > 0:
            intervals.append((lo, hi))
    return intervals


def _bounded_interval(rho: RhoPoly, eps0: float):
    """The unique bounded positive interval, or raise."""
    intervals = rho_interval(rho, eps0)
    bounded = [iv for iv in intervals if math.isfinite(iv[0]) and math.isfinite(iv[1])]
    if len(bounded) > 1:
        raise AmbiguousComponentError(
            f"profile has {len(bounded)} bounded positive components at eps={eps0}"
        )
    if not bounded:
        if intervals:
            raise NoMatrixRepresentationError(
                "positivity region is unbounded: only infinite-dimensional "
                "representations exist"
            )
        raise NoMatrixRepresentationError("profile is nowhere positive")
    return bounded[0]


def solve_eps(rho: RhoPoly, N: int):
    """Smallest eps > 0 with N eps = width of the positive interval.

    Returns (eps_N, z_lo, z_hi).  Bisection on the residual
    width(eps) - N eps, bracketed by doubling/halving from width(0)/N.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    z_lo0, z_hi0 = _bounded_interval(rho, 0.0)

    def g(e):
        lo, hi = _bounded_interval(rho, e)
        return (hi - lo) - N * e
    eps = (z_hi0 - z_lo0) / N
    r0 = g(eps)
    if abs(r0) <= 1e-12:
        z_lo, z_hi = _bounded_interval(rho, eps)
        return eps, z_lo, z_hi
    if r0 > 0:
        lo = eps
        hi = eps
        for _ in range(200):
            hi *= 2.0
            if g(hi) <= 0:
                break
        else:
            raise NoMatrixRepresentationError("no eps solves the width equation")
    else:
        hi = eps
        lo = eps
        for _ in range(200):
            lo *= 0.5
            if g(lo) >= 0:
                break
        else:
            raise NoMatrixRepresentationError("no eps solves the width equation")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = g(mid)
        if abs(r) <= 1e-12:
            eps = mid
            break
        if r > 0:
            lo = mid
        else:
            hi = mid
    else:
        eps = 0.5 * (lo + hi)
        if abs(g(eps)) > 1e-10:
            raise NoMatrixRepresentationError("width equation did not converge")
    z_lo, z_hi = _bounded_interval(rho, eps)
    return eps, z_lo, z_hi


@dataclass
class SurfaceRotRep:
    """N-dimensional representation of the surface with profile rho."""

    rho: RhoPoly
    N: int
    eps: float
    z_lo: float
    z_hi: float
    X0: np.ndarray = field(repr=False)
    Xp: np.ndarray = field(repr=False)
    Xm: np.ndarray = field(repr=False)

    @property
    def lattice(self):
        """Diagonal of X0: z_lo + (r + 1/2) eps."""
        return self.z_lo + (np.arange(self.N) + 0.5) * self.eps

    def relation_residuals(self) -> dict:
        """Max-abs residuals of the quotient relations."""
        z = self.lattice
        eps = self.eps
        comm = lambda a, b: a @ b - b @ a
        rho_minus = np.diag(self.rho(z - eps / 2.0, eps)).astype(complex)
        rho_plus = np.diag(self.rho(z + eps / 2.0, eps)).astype(complex)
        return {
            "comm_0p": np.max(np.abs(comm(self.X0, self.Xp) - eps * self.Xp)),
            "comm_0m": np.max(np.abs(comm(self.X0, self.Xm) + eps * self.Xm)),
            "comm_pm": np.max(np.abs(comm(self.Xp, self.Xm) - (rho_minus - rho_plus))),
            "anticomm_pm": np.max(
                np.abs(self.Xp @ self.Xm + self.Xm @ self.Xp - (rho_minus + rho_plus))
            ),
        }


def build_rotation_rep(rho: RhoPoly, N: int) -> SurfaceRotRep:
    """Matrix representation on the solved lattice.

    X0|r> = (z_lo + (r+1/2) eps)|r>,
    X+|r> = sqrt(rho(z_lo + (r+1) eps, eps)) |r+1>,  X- = adjoint(X+).
    """
    eps, z_lo, z_hi = solve_eps(rho, N)
    X0 = np.diag(z_lo + (np.arange(N) + 0.5) * eps).astype(complex)
    Xp = np.zeros((N, N), dtype=complex)
    for r in range(N - 1):
        val = rho(z_lo + (r + 1) * eps, eps)
        if val < 0:
            raise RepresentationConstructionError(
                f"profile negative ({val}) at lattice point r={r + 1}"
            )
        Xp[r + 1, r] = math.sqrt(val)
    return SurfaceRotRep(rho, N, eps, z_lo, z_hi, X0, Xp, Xp.conj().T)


def _shift_power(rep: SurfaceRotRep, r: int):
    """X+^r for r >= 0, X-^|r| for r < 0."""
    base = rep.Xp if r >= 0 else rep.Xm
    return np.linalg.matrix_power(base, abs(r))


def apply_ordering(rep: SurfaceRotRep, kind: str, r: int, f) -> np.ndarray:
    """Ordered matrix Omega(X+-^|r| f(X0)) for the normal or central ordering.

    normal:   X+-^|r| f(X0)
    central:  X+-^|r| * prod_{k=1..|r|} sqrt(rho(X0 +- |r| eps/2) /
              rho(X0 +- (2k-1) eps/2)) * f(X0 +- |r| eps/2)

    Functions of X0 act by diagonal functional calculus; they are only
    evaluated at lattice points that multiply a nonzero entry of X+-^|r|.
    A nonpositive radicand at a used point raises OrderingUndefinedError.
    """
    if kind not in ("normal", "central"):
        raise ValueError(f"unknown ordering kind {kind!r}")
    if abs(r) >= rep.N:
        raise ValueError("|r| must be smaller than N")
    z = rep.lattice
    eps = rep.eps
    ar = abs(r)
    sgn = 1 if r >= 0 else -1
    shift = _shift_power(rep, r)
    # lattice rows whose column in X+-^|r| is nonzero
    used = range(rep.N - ar) if r >= 0 else range(ar, rep.N)
    diag = np.zeros(rep.N, dtype=complex)
    for s in used:
        zs = z[s]
        if kind == "normal":
            diag[s] = f(zs)
            continue
        shifted = zs + sgn * ar * eps / 2.0
        radicand = 1.0
        for k in range(1, ar + 1):
            den = rep.rho(zs + sgn * (2 * k - 1) * eps / 2.0, eps)
            if den <= 0:
                raise OrderingUndefinedError(
                    f"central ordering undefined: rho <= 0 at lattice point r={s}"
                )
            radicand *= rep.rho(shifted, eps) / den
        if radicand < 0:
            raise OrderingUndefinedError("central ordering radicand is negative")
        diag[s] = math.sqrt(radicand) * f(shifted)
    return shift @ np.diag(diag)


@dataclass
class IsoImages:
    """Generator images of one rotation surface inside another's algebra."""

    X0: np.ndarray
    Xp: np.ndarray
    Xm: np.ndarray
    eps: float
    K: float
    z_lo: float
    z_hi: float


def iso_map(rho1: RhoPoly, rho2: RhoPoly, N: int) -> IsoImages:
    """Images of the rho1 generators built inside the rho2 representation.

    Psi(X0) = K (Y0 - z2_lo) + z1_lo with K the width ratio;
    Psi(X+) = Y+ sqrt(rho1(Psi(X0) + eps1/2) / rho2(Y0 + eps2/2)),
    Psi(X-) = Psi(X+)^dagger; eps1 = K eps2.

    Both profiles must be eps-independent with a single bounded positive
    interval.
    """
    for name, rho in (("rho1", rho1), ("rho2", rho2)):
        if not rho.eps_independent:
            raise ValueError(f"{name} must not depend on eps")
    rep2 = build_rotation_rep(rho2, N)
    z1_lo, z1_hi = _bounded_interval(rho1, 0.0)
    z2_lo, z2_hi = rep2.z_lo, rep2.z_hi
    K = (z1_hi - z1_lo) / (z2_hi - z2_lo)
    eps1 = K * rep2.eps
    y = rep2.lattice
    A0 = np.diag(K * (y - z2_lo) + z1_lo).astype(complex)
    diag = np.zeros(N, dtype=complex)
    for s in range(N - 1):
        num = rho1(K * (y[s] - z2_lo) + z1_lo + eps1 / 2.0, 0.0)
        den = rho2(y[s] + rep2.eps / 2.0, 0.0)
        if den <= 0 or num < 0:
            raise IsoUndefinedError(
                f"isomorphism radicand undefined at lattice point {s}"
            )
        diag[s] = math.sqrt(num / den)
    Ap = rep2.Xp @ np.diag(diag)
    return IsoImages(A0, Ap, Ap.conj().T, eps1, K, z1_lo, z1_hi)


def iso_relation_residuals(images: IsoImages, rho: RhoPoly) -> dict:
    """Residuals of the rho quotient relations on isomorphism images."""
    eps = images.eps
    z = np.real(np.diag(images.X0))
    comm = lambda a, b: a @ b - b @ a
    rho_minus = np.diag(rho(z - eps / 2.0, eps)).astype(complex)
    rho_plus = np.diag(rho(z + eps / 2.0, eps)).astype(complex)
    return {
        "comm_0p": np.max(np.abs(comm(images.X0, images.Xp) - eps * images.Xp)),
        "comm_0m": np.max(np.abs(comm(images.X0, images.Xm) + eps * images.Xm)),
        "comm_pm": np.max(
            np.abs(comm(images.Xp, images.Xm) - (rho_minus - rho_plus))
        ),
        "anticomm_pm": np.max(
            np.abs(images.Xp @ images.Xm + images.Xm @ images.Xp - (rho_minus + rho_plus))
        ),
    }


@dataclass
class FuzzyTorus:
    """Clock/shift pair with U V = e^{i eps} V U and eps = 2 pi / N."""

    N: int
    eps: float
    U: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)

    def relation_residuals(self) -> dict:
        eye = np.eye(self.N)
        phase = np.exp(1j * self.eps)
        return {
            "unitary_U": np.max(np.abs(self.U @ self.U.conj().T - eye)),
            "unitary_V": np.max(np.abs(self.V @ self.V.conj().T - eye)),
            "U_pow_N": np.max(np.abs(np.linalg.matrix_power(self.U, self.N) - eye)),
            "V_pow_N": np.max(np.abs(np.linalg.matrix_power(self.V, self.N) - eye)),
            "clock_shift": np.max(np.abs(self.U @ self.V - phase * self.V @ self.U)),
        }


def fuzzy_torus(N: int) -> FuzzyTorus:
    """Clock matrix U = diag(e^{i k eps}) and cyclic raising shift V.

    eps_N = 2 pi / N; with this choice the trace of U^r V^s vanishes
    unless both powers are multiples of N, and U^r V^s = e^{i eps r s}
    V^s U^r holds exactly.
    """
    if N < 2:
        raise ValueError("need N >= 2")
    eps = 2.0 * math.pi / N
    U = np.diag(np.exp(1j * eps * np.arange(N)))
    V = np.zeros((N, N), dtype=complex)
    rows = np.arange(N)
    V[(rows + 1) % N, rows] = 1.0
    return FuzzyTorus(N, eps, U, V)


def _unitary_power(M, k: int):
    if k >= 0:
        return np.linalg.matrix_power(M, k)
    return np.linalg.matrix_power(M.conj().T, -k)


def torus_trace(t: FuzzyTorus, r: int, s: int) -> complex:
    """(1/N) tr(U^r V^s); equals delta(r mod N) delta(s mod N)."""
    M = _unitary_power(t.U, r) @ _unitary_power(t.V, s)
    return complex(np.trace(M) / t.N)
