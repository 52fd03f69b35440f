"""Discrete space-time fields on the normalized domain T x (0,1).

Real fields are represented either by Fourier-sine coefficients
(homogeneous Dirichlet in space) or Fourier-cosine coefficients
(homogeneous Neumann in space), with exponential modes exp(2*pi*i*n*t)
in time.  The space bases are L2(0,1)-orthonormal:

    DirichletSine:  b_m(x) = sqrt(2) sin(m pi x),   m = 1..n_x
    NeumannCosine:  q_0(x) = 1,  q_m(x) = sqrt(2) cos(m pi x),  m = 1..n_x

so Parseval holds with unit weights and all norm formulas are diagonal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

SQRT2 = np.sqrt(2.0)


class Basis(enum.Enum):
    DIRICHLET_SINE = "dirichlet-sine"
    NEUMANN_COSINE = "neumann-cosine"


class ResolutionError(ValueError):
    """Grid resolution too small for the requested truncation."""


class BasisMismatchError(ValueError):
    """Operation applied to a field in the wrong basis."""


def space_columns(n_x: int, basis: Basis) -> int:
    return n_x if basis is Basis.DIRICHLET_SINE else n_x + 1


def space_mode_numbers(n_x: int, basis: Basis) -> np.ndarray:
    if basis is Basis.DIRICHLET_SINE:
        return np.arange(1, n_x + 1)
    return np.arange(0, n_x + 1)


@dataclass(frozen=True)
class SpectralField:
    """Coefficient array indexed by (time mode n, space mode m).

    Row i holds time mode n = i - n_t, so rows run n = -n_t..n_t.
    Hermitian symmetry coeffs[-n, m] = conj(coeffs[n, m]) encodes that
    the field is real valued.
    """

    coeffs: np.ndarray
    n_t: int
    n_x: int
    basis: Basis = Basis.DIRICHLET_SINE

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        expected = (2 * self.n_t + 1, space_columns(self.n_x, self.basis))
        if c.shape != expected:
            raise ValueError(
                f"coefficient array has shape {c.shape}, expected {expected}"
            )
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def time_modes(self) -> np.ndarray:
        return np.arange(-self.n_t, self.n_t + 1)

    @property
    def space_modes(self) -> np.ndarray:
        return space_mode_numbers(self.n_x, self.basis)

    def same_layout(self, other: "SpectralField") -> bool:
        return (
            self.n_t == other.n_t
            and self.n_x == other.n_x
            and self.basis is other.basis
        )

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralField":
        return SpectralField(coeffs, self.n_t, self.n_x, self.basis)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        if not self.same_layout(other):
            raise BasisMismatchError("field layouts differ")
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        if not self.same_layout(other):
            raise BasisMismatchError("field layouts differ")
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return self.with_coeffs(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return self.with_coeffs(-self.coeffs)

    def l2(self) -> float:
        """L2(Q) norm via Parseval."""
        return float(np.sqrt((np.abs(self.coeffs) ** 2).sum()))

    def hermitian_defect(self) -> float:
        return float(np.abs(self.coeffs[::-1].conj() - self.coeffs).max())


@dataclass(frozen=True)
class GridField:
    """Real values on the tensor collocation grid.

    Time nodes t_j = j / m_t.  Space nodes are the interior sine nodes
    x_i = i/(m_x+1) for Dirichlet fields and the midpoint cosine nodes
    x_i = (i+1/2)/m_x for Neumann fields.
    """

    values: np.ndarray
    m_t: int
    m_x: int
    basis: Basis = Basis.DIRICHLET_SINE

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.m_t, self.m_x):
            raise ValueError(
                f"value array has shape {v.shape}, expected {(self.m_t, self.m_x)}"
            )
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def time_nodes(self) -> np.ndarray:
        return np.arange(self.m_t) / self.m_t

    @property
    def space_nodes(self) -> np.ndarray:
        return space_nodes(self.m_x, self.basis)


def time_nodes(m_t: int) -> np.ndarray:
    return np.arange(m_t) / m_t


def space_nodes(m_x: int, basis: Basis) -> np.ndarray:
    if basis is Basis.DIRICHLET_SINE:
        return np.arange(1, m_x + 1) / (m_x + 1)
    return (np.arange(m_x) + 0.5) / m_x


def space_eval_matrix(n_x: int, nodes: np.ndarray, basis: Basis) -> np.ndarray:
    """Matrix B with B[i, j] = (basis function j)(nodes[i])."""
    x = np.asarray(nodes)[:, None]
    m = space_mode_numbers(n_x, basis)[None, :]
    if basis is Basis.DIRICHLET_SINE:
        return SQRT2 * np.sin(m * np.pi * x)
    b = SQRT2 * np.cos(m * np.pi * x)
    b[:, 0] = 1.0
    return b


def time_eval_matrix(n_t: int, m_t: int) -> np.ndarray:
    """Matrix E with E[j, i] = exp(2 pi i n_i t_j), n_i = i - n_t."""
    t = time_nodes(m_t)[:, None]
    n = np.arange(-n_t, n_t + 1)[None, :]
    return np.exp(2j * np.pi * n * t)


def zeros(n_t: int, n_x: int, basis: Basis = Basis.DIRICHLET_SINE) -> SpectralField:
    shape = (2 * n_t + 1, space_columns(n_x, basis))
    return SpectralField(np.zeros(shape, dtype=complex), n_t, n_x, basis)


def truncate(u: SpectralField, n_t: int, n_x: int) -> SpectralField:
    """Change the truncation of a field, dropping or zero-padding modes."""
    out = zeros(n_t, n_x, u.basis)
    coeffs = out.coeffs.copy()
    dt = min(n_t, u.n_t)
    dx = min(space_columns(n_x, u.basis), space_columns(u.n_x, u.basis))
    coeffs[n_t - dt : n_t + dt + 1, :dx] = u.coeffs[
        u.n_t - dt : u.n_t + dt + 1, :dx
    ]
    return SpectralField(coeffs, n_t, n_x, u.basis)


def set_mode(
    field: SpectralField, n: int, m: int, value: complex
) -> SpectralField:
    """Return a copy with mode (n, m) set to `value` and (-n, m) to its
    conjugate.  For n = 0 a real value is required."""
    if n == 0 and abs(complex(value).imag) > 0:
        raise ValueError("n = 0 coefficients must be real")
    cols = field.space_modes
    col = np.searchsorted(cols, m)
    if col >= len(cols) or cols[col] != m:
        raise ValueError(f"space mode {m} not representable in this basis")
    c = field.coeffs.copy()
    c[field.n_t + n, col] = value
    c[field.n_t - n, col] = np.conj(value)
    return field.with_coeffs(c)


def to_grid(u: SpectralField, m_t: int, m_x: int) -> GridField:
    """Pointwise evaluation of the truncated series on the collocation grid."""
    min_mx = u.n_x if u.basis is Basis.DIRICHLET_SINE else u.n_x + 1
    if m_t < 2 * u.n_t + 1 or m_x < min_mx:
        raise ResolutionError(
            f"grid {m_t}x{m_x} too small for truncation ({u.n_t}, {u.n_x})"
        )
    e = time_eval_matrix(u.n_t, m_t)
    b = space_eval_matrix(u.n_x, space_nodes(m_x, u.basis), u.basis)
    vals = (e @ u.coeffs) @ b.T
    scale = max(1.0, np.abs(vals).max())
    imag = np.abs(vals.imag).max()
    if imag > 1e-12 * scale:
        raise ValueError(f"grid evaluation has imaginary residue {imag:.3e}")
    return GridField(vals.real, m_t, m_x, u.basis)


def to_spectral(g: GridField, n_t: int, n_x: int, basis: Basis | None = None) -> SpectralField:
    """Discrete analysis; exact inverse of to_grid on band-limited fields."""
    if basis is None:
        basis = g.basis
    if basis is not g.basis:
        raise BasisMismatchError("grid node family does not match requested basis")
    min_mx = n_x if basis is Basis.DIRICHLET_SINE else n_x + 1
    if g.m_t < 2 * n_t + 1 or g.m_x < min_mx:
        raise ResolutionError(
            f"grid {g.m_t}x{g.m_x} too small for truncation ({n_t}, {n_x})"
        )
    e = time_eval_matrix(n_t, g.m_t)
    b = space_eval_matrix(n_x, space_nodes(g.m_x, basis), basis)
    # discrete orthogonality weight: sum_i b_j(x_i)^2 = m_x+1 on sine
    # nodes and m_x on midpoint cosine nodes, for every basis function
    w = (g.m_x + 1) if basis is Basis.DIRICHLET_SINE else g.m_x
    coeffs = (e.conj().T @ g.values @ b) / (g.m_t * w)
    return SpectralField(coeffs, n_t, n_x, basis)


def grid_quadrature(g: GridField) -> float:
    """Integral over Q of the grid function.

    Exact for band-limited integrands (time modes < m_t; Dirichlet-node
    grids integrate cosine content up to 2*m_x+1 by the trapezoid rule
    with vanishing endpoints, Neumann-node grids up to 2*m_x-1 by the
    midpoint rule)."""
    w = (g.m_x + 1) if g.basis is Basis.DIRICHLET_SINE else g.m_x
    return float(g.values.sum() / (g.m_t * w))


def product_cosine(
    u: SpectralField,
    v: SpectralField,
    n_t_out: int | None = None,
    n_x_out: int | None = None,
) -> SpectralField:
    """Exact NeumannCosine representation of the pointwise product u*v.

    Two Dirichlet-sine fields multiply into the cosine algebra with space
    modes up to n_x(u)+n_x(v) and time modes up to n_t(u)+n_t(v); the
    result is exact (to rounding) for any output truncation inside that
    band.  Grid sizes are padded so no aliasing reaches the retained modes.
    """
    if u.basis is not Basis.DIRICHLET_SINE or v.basis is not Basis.DIRICHLET_SINE:
        raise BasisMismatchError("product_cosine expects Dirichlet-sine inputs")
    if (u.n_t, u.n_x) != (v.n_t, v.n_x):
        raise BasisMismatchError("product_cosine expects matching truncations")
    if n_t_out is None:
        n_t_out = 2 * u.n_t
    if n_x_out is None:
        n_x_out = 2 * u.n_x
    m_t = 2 * u.n_t + n_t_out + 1
    m_x = u.n_x + v.n_x + n_x_out + 2
    x = space_nodes(m_x, Basis.NEUMANN_COSINE)
    bs = space_eval_matrix(u.n_x, x, Basis.DIRICHLET_SINE)
    e = time_eval_matrix(u.n_t, m_t)
    # stays complex-bilinear so linearized solves may pass non-Hermitian
    # intermediates through; real inputs give real products automatically
    gu = (e @ u.coeffs) @ bs.T
    gv = (e @ v.coeffs) @ bs.T
    bc = space_eval_matrix(n_x_out, x, Basis.NEUMANN_COSINE)
    eo = time_eval_matrix(n_t_out, m_t)
    coeffs = (eo.conj().T @ (gu * gv) @ bc) / (m_t * m_x)
    return SpectralField(coeffs, n_t_out, n_x_out, Basis.NEUMANN_COSINE)


def cosine_to_sine_projection(n_x_sine: int, n_x_cos: int) -> np.ndarray:
    """Matrix of L2(0,1) inner products <q_k, b_m>.

    Entry [m-1, k] projects cosine mode k onto sine mode m; nonzero only
    when m + k is odd."""
    m = np.arange(1, n_x_sine + 1)[:, None].astype(float)
    k = np.arange(0, n_x_cos + 1)[None, :].astype(float)
    odd = (m + k) % 2 == 1
    with np.errstate(divide="ignore"):
        plus = np.where(odd, 2.0 / ((m + k) * np.pi), 0.0)
        diff = m - k
        minus = np.where(odd & (diff != 0), 2.0 / (diff * np.pi), 0.0)
    proj = plus + minus
    # normalization: q_0 = 1 while q_k = sqrt(2) cos for k >= 1
    proj[:, 0] *= 1.0 / SQRT2
    return proj


def dealiased_product(u: SpectralField, v: SpectralField) -> SpectralField:
    """Dirichlet-sine coefficients of the pointwise product u*v.

    The product is formed exactly in the mixed sine/cosine algebra on a
    padded grid and then L2-projected onto the sine modes up to n_x."""
    pc = product_cosine(u, v, u.n_t, 2 * u.n_x)
    proj = cosine_to_sine_projection(u.n_x, 2 * u.n_x)
    coeffs = pc.coeffs @ proj.T
    return SpectralField(coeffs, u.n_t, u.n_x, Basis.DIRICHLET_SINE)


def random_field(
    seed: int,
    n_t: int,
    n_x: int,
    decay: float,
    basis: Basis = Basis.DIRICHLET_SINE,
    amplitude: float = 1.0,
) -> SpectralField:
    """Deterministic pseudorandom field with Hermitian symmetry and
    magnitude envelope (1+|n|)^-decay (1+m)^-decay."""
    if decay <= 0:
        raise ValueError("decay must be positive")
    rng = np.random.default_rng(seed)
    cols = space_columns(n_x, basis)
    m = space_mode_numbers(n_x, basis).astype(float)
    env_m = (1.0 + m) ** (-decay)
    shape = (n_t + 1, cols)
    raw = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    raw[0] = raw[0].real  # n = 0 row is real
    n = np.arange(0, n_t + 1)[:, None].astype(float)
    upper = amplitude * raw * (1.0 + n) ** (-decay) * env_m[None, :] / SQRT2
    coeffs = np.empty((2 * n_t + 1, cols), dtype=complex)
    coeffs[n_t:] = upper
    coeffs[:n_t] = upper[1:][::-1].conj()
    return SpectralField(coeffs, n_t, n_x, basis)
