"""Band-limited scalar fields on the sphere and their transforms.

Conventions: spherical harmonics are 4*pi-normalized with the
Condon-Shortley phase, i.e. (1/4pi) * integral(conj(psi) * psi') = delta
and psi(0,0) = 1.  Grids are Gauss-Legendre in p = cos(theta) crossed with
a uniform (trapezoidal) grid in phi; a grid of capacity L integrates
products of two band-L fields exactly.
"""

import json
import math

import numpy as np

__all__ = [
    "AliasingError",
    "SphereGrid",
    "ScalarField",
    "GridField",
    "ylm_eval",
    "project",
    "field_from_coeffs",
]


class AliasingError(ValueError):
    """A grid was asked to resolve modes beyond its capacity."""


def _assoc_legendre_tables(lmax, p):
    """Fully normalized associated Legendre values N_n^m(p).

    Returns a list indexed by m >= 0; entry m is an array of shape
    (lmax - m + 1, len(p)) holding n = m .. lmax.  Normalization is
    integral(N^2 dp) = 2 over [-1, 1], Condon-Shortley phase included.
    The upward recurrence in n is numerically stable to n ~ several hundred.
    """
    p = np.asarray(p, dtype=float)
    s = np.sqrt(np.maximum(0.0, 1.0 - p * p))
    tables = []
    pmm = np.ones_like(p)
    for m in range(lmax + 1):
        rows = np.empty((lmax - m + 1, p.size))
        rows[0] = pmm
        if lmax >= m + 1:
            rows[1] = math.sqrt(2 * m + 3) * p * pmm
        for n in range(m + 2, lmax + 1):
            a = math.sqrt((4 * n * n - 1.0) / (n * n - m * m))
            b = math.sqrt(
                (2 * n + 1.0) * (n - 1 + m) * (n - 1 - m) / ((2 * n - 3.0) * (n * n - m * m))
            )
            rows[n - m] = a * p * rows[n - m - 1] - b * rows[n - m - 2]
        tables.append(rows)
        if m < lmax:
            pmm = -math.sqrt((2 * m + 3.0) / (2 * m + 2.0)) * s * pmm
    return tables


def _assoc_legendre_deriv(lmax, p, tables):
    """d/dp of the normalized functions, valid for |p| < 1."""
    p = np.asarray(p, dtype=float)
    denom = p * p - 1.0
    out = []
    for m in range(lmax + 1):
        rows = np.empty((lmax - m + 1, p.size))
        for n in range(m, lmax + 1):
            term = n * p * tables[m][n - m]
            if n > m:
                c = math.sqrt((n * n - m * m) * (2 * n + 1.0) / (2 * n - 1.0))
                term = term - c * tables[m][n - m - 1]
            rows[n - m] = term / denom
        out.append(rows)
    return out


class SphereGrid:
    """Quadrature grid: Gauss-Legendre x uniform-phi, sized 2L+2 each way."""

    def __init__(self, capacity: int):
        if capacity < 0:
            raise ValueError("capacity must be nonnegative")
        self.capacity = capacity
        n = 2 * capacity + 2
        p, w = np.polynomial.legendre.leggauss(n)
        self.p = p
        self.w_p = w
        self.theta = np.arccos(p)
        self.sin_theta = np.sqrt(1.0 - p * p)
        self.n_theta = n
        self.n_phi = n
        self.phi = 2.0 * np.pi * np.arange(n) / n
        self.w_phi = 2.0 * np.pi / n
        self._tables = None
        self._dtables = None

    def legendre(self):
        if self._tables is None:
            self._tables = _assoc_legendre_tables(self.capacity, self.p)
        return self._tables

    def legendre_deriv(self):
        if self._dtables is None:
            self._dtables = _assoc_legendre_deriv(self.capacity, self.p, self.legendre())
        return self._dtables

    def integrate(self, values) -> complex:
        """Quadrature of a grid function over the sphere (measure dOmega)."""
        values = np.asarray(values)
        return complex(np.sum(self.w_p[:, None] * values) * self.w_phi)

    def average(self, values) -> complex:
        return self.integrate(values) / (4.0 * np.pi)


def ylm_eval(n, m, theta, phi):
    """4*pi-normalized spherical harmonic psi^m_n at (theta, phi).

    Accepts scalars or broadcastable arrays; stable to n = 256 via the
    normalized recurrence.
    """
    if abs(m) > n:
        raise ValueError(f"|m| = {abs(m)} exceeds n = {n}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    p = np.cos(theta).ravel()
    tables = _assoc_legendre_tables(n, p)
    legendre = tables[abs(m)][n - abs(m)].reshape(np.asarray(theta).shape)
    if m < 0:
        legendre = (-1) ** (-m) * legendre
    out = legendre * np.exp(1j * m * phi)
    if out.shape == ():
        return complex(out)
    return out


class ScalarField:
    """A band-limited function on the sphere stored as harmonic coefficients.

    Coefficients live in a dense array ``c[n, m + L]`` for 0 <= n <= L,
    |m| <= n.
    """

    def __init__(self, L: int, c=None):
        self.L = L
        if c is None:
            c = np.zeros((L + 1, 2 * L + 1), dtype=complex)
        self.c = np.asarray(c, dtype=complex)
        if self.c.shape != (L + 1, 2 * L + 1):
            raise ValueError("coefficient array has wrong shape")

    def coeff(self, n, m) -> complex:
        if n > self.L or abs(m) > n:
            return 0.0 + 0.0j
        return complex(self.c[n, m + self.L])

    def items(self):
        for n in range(self.L + 1):
            for m in range(-n, n + 1):
                v = self.c[n, m + self.L]
                if v != 0:
                    yield (n, m), complex(v)

    def copy(self):
        return ScalarField(self.L, self.c.copy())

    def truncated(self, L2: int) -> "ScalarField":
        """Keep modes with n <= L2 (embedding or truncating as needed)."""
        out = ScalarField(L2)
        keep = min(self.L, L2)
        for n in range(keep + 1):
            out.c[n, L2 - n : L2 + n + 1] = self.c[n, self.L - n : self.L + n + 1]
        return out

    def __add__(self, other):
        L = max(self.L, other.L)
        out = self.truncated(L)
        out.c += other.truncated(L).c
        return out

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, a) -> "ScalarField":
        return ScalarField(self.L, a * self.c)

    def conj_field(self) -> "ScalarField":
        """Coefficients of the complex conjugate function."""
        out = ScalarField(self.L)
        for n in range(self.L + 1):
            for m in range(-n, n + 1):
                out.c[n, m + self.L] = (-1) ** m * np.conj(self.c[n, -m + self.L])
        return out

    def is_real(self, tol=1e-12) -> bool:
        return bool(np.max(np.abs(self.c - self.conj_field().c)) <= tol)

    def norm(self) -> float:
        """L2 norm under the (1/4pi) dOmega measure."""
        return float(np.sqrt(np.sum(np.abs(self.c) ** 2)))

    def evaluate(self, grid: SphereGrid):
        """Values on the grid, shape (n_theta, n_phi)."""
        return self._synthesize(grid, grid.legendre())

    def eval_dp(self, grid: SphereGrid):
        """d/dp of the field on the grid (p = cos theta)."""
        return self._synthesize(grid, grid.legendre_deriv())

    def eval_dq(self, grid: SphereGrid):
        """d/dphi of the field on the grid."""
        scale = 1j * np.arange(-self.L, self.L + 1)
        return self._synthesize(grid, grid.legendre(), mode_scale=scale)

    def _synthesize(self, grid, tables, mode_scale=None):
        if self.L > grid.capacity:
            raise AliasingError(
                f"band limit {self.L} exceeds grid capacity {grid.capacity}"
            )
        values = np.zeros((grid.n_theta, grid.n_phi), dtype=complex)
        for m in range(-self.L, self.L + 1):
            col = self.c[:, m + self.L].copy()
            if mode_scale is not None:
                col = col * mode_scale[m + self.L]
            nz = np.nonzero(col)[0]
            if nz.size == 0:
                continue
            am = abs(m)
            radial = np.zeros(grid.n_theta)
            sign = (-1) ** am if m < 0 else 1
            table = tables[am]
            cs = col[nz]
            radial_c = np.zeros(grid.n_theta, dtype=complex)
            for n, cval in zip(nz, cs):
                radial_c += cval * (sign * table[n - am])
            values += radial_c[:, None] * np.exp(1j * m * grid.phi)[None, :]
        return values

    def to_json(self) -> str:
        coeffs = [
            {"n": n, "m": m, "re": v.real, "im": v.imag} for (n, m), v in self.items()
        ]
        return json.dumps({"L": self.L, "coeffs": coeffs})

    @staticmethod
    def from_json(text: str) -> "ScalarField":
        data = json.loads(text)
        f = ScalarField(int(data["L"]))
        for entry in data["coeffs"]:
            n, m = int(entry["n"]), int(entry["m"])
            f.c[n, m + f.L] = complex(float(entry["re"]), float(entry["im"]))
        return f


def field_from_coeffs(L, coeffs) -> ScalarField:
    """Build a field from a {(n, m): value} mapping."""
    f = ScalarField(L)
    for (n, m), v in coeffs.items():
        if n > L or abs(m) > n:
            raise ValueError(f"mode ({n},{m}) outside band limit {L}")
        f.c[n, m + L] = v
    return f


def project(values, L: int, grid: SphereGrid) -> ScalarField:
    """Projection c_nm = (1/4pi) * integral(conj(psi^m_n) f dOmega).

    Exact (to roundoff) whenever the grid function is band-limited within
    the grid capacity.
    """
    if L > grid.capacity:
        raise AliasingError(f"band limit {L} exceeds grid capacity {grid.capacity}")
    values = np.asarray(values, dtype=complex)
    if values.shape != (grid.n_theta, grid.n_phi):
        raise ValueError("grid function has wrong shape")
    tables = grid.legendre()
    # phi integral: sum_j f(:, j) e^{-i m phi_j} is an unnormalized DFT
    fm = np.fft.fft(values, axis=1)
    out = ScalarField(L)
    wp = grid.w_p * grid.w_phi / (4.0 * np.pi)
    for m in range(-L, L + 1):
        col = fm[:, m % grid.n_phi]
        am = abs(m)
        sign = (-1) ** am if m < 0 else 1
        table = tables[am]
        for n in range(am, L + 1):
            out.c[n, m + L] = sign * np.sum(wp * table[n - am] * col)
    return out


class GridField:
    """A function known by its values on a SphereGrid."""

    def __init__(self, grid: SphereGrid, values, excluded=None):
        self.grid = grid
        self.values = np.asarray(values)
        # indices of masked (pole-adjacent or singular) nodes, if any
        self.excluded = excluded if excluded is not None else []

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def project(self, L: int) -> ScalarField:
        return project(self.values, L, self.grid)

    def __sub__(self, other):
        if other.grid is not self.grid and other.grid.capacity != self.grid.capacity:
            raise ValueError("grid mismatch")
        return GridField(self.grid, self.values - other.values)
