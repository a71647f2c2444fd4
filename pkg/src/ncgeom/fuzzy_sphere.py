"""The su(2) fuzzy sphere.

Matrix representation X0, X+, X- of dimension N with Casimir fixed to
R^2, the noncommutative spherical harmonics P^m_n built by the adjoint
ladder, the normalized trace pairing, the matrix Laplacian, and the
reduced-matrix-element (6j) form of the harmonic product law.
"""

import json
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from . import angmom

__all__ = [
    "InvalidDimensionError",
    "FuzzySphereRep",
    "FuzzyHarmonic",
    "HarmonicDecomposition",
    "build_rep",
    "harmonic",
    "norm_sq_formula",
    "trace_inner",
    "decompose",
    "reconstruct",
    "laplacian",
    "ladder_apply",
    "reduced_matrix_element",
    "omega_s2_scale",
    "matrix_to_json",
    "matrix_from_json",
]


class InvalidDimensionError(ValueError):
    pass


@dataclass
class FuzzyHarmonic:
    """Fuzzy spherical harmonic P^m_n: an N x N matrix with its norm."""

    n: int
    m: int
    mat: np.ndarray
    norm_sq: float


class FuzzySphereRep:
    """Irreducible su(2) representation scaled to the radius-R sphere.

    eps = 2R / sqrt(N^2 - 1);  X0 diagonal, X+ raising, X- = adjoint(X+).
    Immutable after construction; the harmonic cache fills idempotently
    and is safe for concurrent readers.
    """

    def __init__(self, N: int, R: float):
        if N < 2:
            raise InvalidDimensionError(f"need N >= 2, got {N}")
        if R <= 0:
            raise ValueError("radius must be positive")
        self.N = N
        self.R = float(R)
        self.eps = 2.0 * R / math.sqrt(N * N - 1.0)
        m = np.arange(N)
        self.X0 = np.diag(self.eps * (m - (N - 1) / 2.0)).astype(complex)
        Xp = np.zeros((N, N), dtype=complex)
        rows = np.arange(N - 1)
        Xp[rows + 1, rows] = self.eps * np.sqrt((N - rows - 1.0) * (rows + 1.0))
        self.Xp = Xp
        self.Xm = Xp.conj().T
        self._harmonics = {}
        self._lock = threading.Lock()

    @property
    def X1(self):
        return 0.5 * (self.Xp + self.Xm)

    @property
    def X2(self):
        return (self.Xp - self.Xm) / 2j

    @property
    def X3(self):
        return self.X0

    def invariant_residuals(self) -> dict:
        """Max-abs residuals of the defining commutation/Casimir identities."""
        eye = np.eye(self.N)
        comm = lambda a, b: a @ b - b @ a
        return {
            "adjoint": np.max(np.abs(self.Xm - self.Xp.conj().T)),
            "comm_0p": np.max(np.abs(comm(self.X0, self.Xp) - self.eps * self.Xp)),
            "comm_0m": np.max(np.abs(comm(self.X0, self.Xm) + self.eps * self.Xm)),
            "comm_pm": np.max(np.abs(comm(self.Xp, self.Xm) - 2 * self.eps * self.X0)),
            "casimir": np.max(
                np.abs(
                    self.X0 @ self.X0
                    + 0.5 * (self.Xp @ self.Xm + self.Xm @ self.Xp)
                    - self.R**2 * eye
                )
            ),
        }

    def __repr__(self):
        return f"FuzzySphereRep(N={self.N}, R={self.R})"


def build_rep(N: int, R: float = 1.0) -> FuzzySphereRep:
    """Standard N-dimensional representation with Casimir R^2."""
    return FuzzySphereRep(N, R)


def norm_sq_formula(n: int, R: float, eps: float) -> float:
    """Closed form of ||P^m_n||^2 (independent of m):

    (n!)^2 / (2n+1)! * prod_{r=1..n} (4R^2 + eps^2 (1 - r^2)).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    v = math.factorial(n) ** 2 / math.factorial(2 * n + 1)
    for r in range(1, n + 1):
        v *= 4.0 * R * R + eps * eps * (1.0 - r * r)
    return v


def _build_family(rep: FuzzySphereRep, n: int):
    """All P^m_n for one n, descending the ladder from P^n_n = Xp^n."""
    N, eps = rep.N, rep.eps
    out = {}
    if n >= N:
        zeromat = np.zeros((N, N), dtype=complex)
        for m in range(-n, n + 1):
            out[(n, m)] = FuzzyHarmonic(n, m, zeromat, 0.0)
        return out
    ns = norm_sq_formula(n, rep.R, eps)
    mat = np.linalg.matrix_power(rep.Xp, n) if n else np.eye(N, dtype=complex)
    out[(n, n)] = FuzzyHarmonic(n, n, mat, ns)
    for m in range(n, -n, -1):
        mat = (rep.Xm @ mat - mat @ rep.Xm) / (eps * math.sqrt((n + m) * (n - m + 1)))
        out[(n, m - 1)] = FuzzyHarmonic(n, m - 1, mat, ns)
    return out


def harmonic(rep: FuzzySphereRep, n: int, m: int) -> FuzzyHarmonic:
    """P^m_n = eps^(m-n) sqrt((n+m)!/((2n)! (n-m)!)) (ad X-)^(n-m) (X+^n).

    Zero matrix for n >= N.  Results are cached on the representation.
    """
    if n < 0 or abs(m) > n:
        raise ValueError(f"invalid harmonic label (n={n}, m={m})")
    key = (n, m)
    cached = rep._harmonics.get(key)
    if cached is not None:
        return cached
    family = _build_family(rep, n)
    with rep._lock:
        for k, v in family.items():
            rep._harmonics.setdefault(k, v)
    return rep._harmonics[key]


def trace_inner(rep: FuzzySphereRep, A, B) -> complex:
    """Normalized Hilbert-Schmidt pairing <A, B> = (1/N) tr(A^dag B)."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != (rep.N, rep.N) or B.shape != (rep.N, rep.N):
        raise ValueError("matrix dimensions do not match the representation")
    return complex(np.trace(A.conj().T @ B) / rep.N)


@dataclass
class HarmonicDecomposition:
    """Coefficients of an N x N matrix over the P^m_n basis (n < N)."""

    coeffs: dict = field(default_factory=dict)

    def coeff(self, n, m) -> complex:
        return self.coeffs.get((n, m), 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(v) ** 2 for v in self.coeffs.values()))


def decompose(rep: FuzzySphereRep, A) -> HarmonicDecomposition:
    """Orthogonal expansion c_nm = <P^m_n, A> / ||P^m_n||^2, n = 0..N-1."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (rep.N, rep.N):
        raise ValueError("matrix dimensions do not match the representation")
    coeffs = {}
    for n in range(rep.N):
        for m in range(-n, n + 1):
            h = harmonic(rep, n, m)
            c = trace_inner(rep, h.mat, A) / h.norm_sq
            if c != 0:
                coeffs[(n, m)] = c
    return HarmonicDecomposition(coeffs)


def reconstruct(rep: FuzzySphereRep, dec: HarmonicDecomposition):
    out = np.zeros((rep.N, rep.N), dtype=complex)
    for (n, m), c in dec.coeffs.items():
        out += c * harmonic(rep, n, m).mat
    return out


def laplacian(rep: FuzzySphereRep, A):
    """Delta(A) = ad(X0)^2 A + (ad(X+)ad(X-) + ad(X-)ad(X+)) A / 2.

    Eigenvalues are eps^2 n (n+1) on the harmonics P^m_n.
    """
    A = np.asarray(A, dtype=complex)
    if A.shape != (rep.N, rep.N):
        raise ValueError("matrix dimensions do not match the representation")
    ad = lambda X, M: X @ M - M @ X
    t0 = ad(rep.X0, ad(rep.X0, A))
    tp = ad(rep.Xp, ad(rep.Xm, A))
    tm = ad(rep.Xm, ad(rep.Xp, A))
    return t0 + 0.5 * (tp + tm)


def ladder_apply(rep: FuzzySphereRep, h: FuzzyHarmonic, direction: int):
    """Coefficient and label for ad(X+-) P^m_n = eps sqrt((n-+m)(n+-m+1)) P^(m+-1)_n.

    Returns (coefficient, (n, m +- 1)); the coefficient is zero at the top
    or bottom of the ladder.
    """
    if direction not in (+1, -1):
        raise ValueError("direction must be +1 or -1")
    n, m = h.n, h.m
    m2 = m + direction
    if abs(m2) > n:
        return 0.0, (n, m2)
    if direction == +1:
        coeff = rep.eps * math.sqrt((n - m) * (n + m + 1))
    else:
        coeff = rep.eps * math.sqrt((n + m) * (n - m + 1))
    return coeff, (n, m2)


def reduced_matrix_element(rep: FuzzySphereRep, n1: int, n2: int, n: int) -> float:
    """Scalar multiplying the Clebsch-Gordan coefficient in P^m1_n1 P^m2_n2.

    (-1)^(N+1+n1+n2) * ||P_n1|| ||P_n2|| / ||P_n|| * sqrt(N (2n1+1)(2n2+1))
    * sixj{(N-1)/2, n1, (N-1)/2; n2, (N-1)/2, n}.
    """
    N = rep.N
    if not (0 <= n1 < N and 0 <= n2 < N and 0 <= n < N):
        raise ValueError("labels must satisfy 0 <= n1, n2, n < N")
    if not (abs(n1 - n2) <= n <= n1 + n2):
        return 0.0
    half = angmom.HalfInt(N - 1)
    sixj = angmom.wigner_6j(half, n1, half, n2, half, n)
    if sixj.is_zero:
        return 0.0
    ns1 = norm_sq_formula(n1, rep.R, rep.eps)
    ns2 = norm_sq_formula(n2, rep.R, rep.eps)
    nsn = norm_sq_formula(n, rep.R, rep.eps)
    val = (-1) ** (N + 1 + n1 + n2) * math.sqrt(ns1 * ns2 / nsn)
    val *= math.sqrt(N * (2 * n1 + 1) * (2 * n2 + 1))
    return val * sixj.float_view


def omega_s2_scale(n: int, R: float) -> float:
    """Scale from the classical harmonic psi^m_n to P^m_n:

    (-1)^n sqrt((2n+1)!) / (n! (2R)^n).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    return (-1) ** n * math.sqrt(math.factorial(2 * n + 1)) / (
        math.factorial(n) * (2.0 * R) ** n
    )


def matrix_to_json(mat, eps: float) -> str:
    """Serialize an N x N complex matrix; floats survive the round trip."""
    mat = np.asarray(mat, dtype=complex)
    n = mat.shape[0]
    if mat.shape != (n, n):
        raise ValueError("matrix must be square")
    return json.dumps(
        {
            "n": n,
            "eps": eps,
            "re": [float(x) for x in mat.real.ravel()],
            "im": [float(x) for x in mat.imag.ravel()],
        }
    )


def matrix_from_json(text: str):
    data = json.loads(text)
    n = int(data["n"])
    re = np.array(data["re"], dtype=float).reshape(n, n)
    im = np.array(data["im"], dtype=float).reshape(n, n)
    return re + 1j * im, float(data["eps"])
