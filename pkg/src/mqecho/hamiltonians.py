"""Bilinear spin-1/2 cluster Hamiltonians and their x-rotation harmonics.

The Hamiltonian family is

    H = sum_{i>j} b_ij (a S_xi S_xj + b S_yi S_yj + c S_zi S_zj)
        + sum_i delta_i S_{axis,i}

with a symmetric coupling table b_ij (angular frequency) and optional
per-site offsets.  Named presets cover the standard cases: secular dipolar
(1, 1, -2), the pure double-quantum / yy-zz form (0, 1, -1), zz (0, 0, c
with default c = sqrt(2), which matches the yy-zz local field), and xx
(1, 0, 0).

The harmonic decomposition splits H into components H_n with
``[S_x_total, H_n] = n H_n``; bilinear Hamiltonians only carry
n in {-2, 0, 2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spinops import (
    AXES,
    Operator,
    SpinSystem,
    _kron_chain,
    _require_hermitian,
    _SINGLE,
    conjugate,
    rotation,
    site_operator,
    trace_product,
)

PRESETS = {
    "dipolar-secular": (1.0, 1.0, -2.0),
    "yy-zz": (0.0, 1.0, -1.0),
    "double-quantum": (0.0, 1.0, -1.0),
    "zz": (0.0, 0.0, math.sqrt(2.0)),
    "xx": (1.0, 0.0, 0.0),
}

MAGIC_ANGLE = math.acos(1.0 / math.sqrt(3.0))


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """Coefficients (a, b, c), coupling table and optional offset field."""

    a: float
    b: float
    c: float
    couplings: np.ndarray
    offsets: np.ndarray | None = None
    offset_axis: str | None = None

    def __post_init__(self):
        table = np.asarray(self.couplings, dtype=float)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise ValueError(f"coupling table must be square, got {table.shape}")
        scale = np.abs(table).max()
        if np.abs(table - table.T).max() > 1e-12 * max(scale, 1.0):
            raise ValueError("coupling table must be symmetric")
        if np.abs(np.diagonal(table)).max() > 0.0:
            raise ValueError("coupling table must have zero diagonal")
        table = (table + table.T) / 2.0
        table.flags.writeable = False
        object.__setattr__(self, "couplings", table)
        if self.offsets is not None:
            offs = np.asarray(self.offsets, dtype=float)
            if offs.shape != (table.shape[0],):
                raise ValueError("offsets must have one entry per site")
            if self.offset_axis not in AXES:
                raise ValueError("offsets require offset_axis in {x, y, z}")
            offs.flags.writeable = False
            object.__setattr__(self, "offsets", offs)

    @property
    def n_sites(self) -> int:
        return self.couplings.shape[0]

    def coefficients(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


def from_preset(name: str, couplings, c: float | None = None,
                offsets=None, offset_axis: str | None = None) -> HamiltonianSpec:
    """Build a HamiltonianSpec from a named coefficient preset.

    ``c`` overrides the zz preset's default sqrt(2).
    """
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}, expected one of {sorted(PRESETS)}")
    ca, cb, cc = PRESETS[name]
    if c is not None:
        if name != "zz":
            raise ValueError("coefficient override `c` only applies to the zz preset")
        cc = float(c)
    return HamiltonianSpec(ca, cb, cc, couplings, offsets, offset_axis)


# ---------------------------------------------------------------------------
# coupling tables and geometries
# ---------------------------------------------------------------------------

def chain_couplings(n: int, strength: float = 1.0) -> np.ndarray:
    """Equal nearest-neighbor couplings on an open chain."""
    table = np.zeros((n, n))
    for i in range(n - 1):
        table[i, i + 1] = table[i + 1, i] = strength
    return table


def ring_couplings(n: int, strength: float = 1.0) -> np.ndarray:
    """Equal nearest-neighbor couplings on a closed ring."""
    table = chain_couplings(n, strength)
    if n > 2:
        table[0, n - 1] = table[n - 1, 0] = strength
    return table


def complete_couplings(n: int, strength: float = 1.0) -> np.ndarray:
    """All pairs coupled with equal strength."""
    table = np.full((n, n), strength, dtype=float)
    np.fill_diagonal(table, 0.0)
    return table


def random_couplings(n: int, scale: float = 1.0, seed: int | None = None,
                     rng: np.random.Generator | None = None) -> np.ndarray:
    """Seeded Gaussian disorder: mean 0, standard deviation `scale`."""
    if rng is None:
        rng = np.random.default_rng(seed)
    draw = rng.standard_normal((n, n)) * scale
    table = np.triu(draw, k=1)
    return table + table.T


def line_positions(n: int, spacing: float = 1.0) -> np.ndarray:
    """Sites on a line along z with uniform spacing."""
    pos = np.zeros((n, 3))
    pos[:, 2] = spacing * np.arange(n)
    return pos


def ring_positions(n: int, spacing: float = 1.0) -> np.ndarray:
    """Regular n-gon in the xy plane with nearest-neighbor distance `spacing`."""
    if n < 2:
        raise ValueError("a ring needs at least 2 sites")
    radius = spacing / (2.0 * math.sin(math.pi / n))
    angles = 2.0 * math.pi * np.arange(n) / n
    return np.column_stack([radius * np.cos(angles), radius * np.sin(angles),
                            np.zeros(n)])


def dipolar_couplings(positions, field_axis=(0.0, 0.0, 1.0),
                      scale: float = 1.0) -> np.ndarray:
    """Geometric dipolar table b_ij = scale * (3 cos^2 theta_ij - 1) / r_ij^3.

    theta_ij is the angle between the intersite vector and the field axis.
    The physical prefactor (gyromagnetic ratios etc.) is folded into `scale`.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 3:
        raise ValueError("positions must be an (n, 3) array")
    axis = np.asarray(field_axis, dtype=float)
    axis_norm = np.linalg.norm(axis)
    if axis_norm == 0.0:
        raise ValueError("field_axis must be a nonzero vector")
    axis = axis / axis_norm
    n = pos.shape[0]
    table = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            rvec = pos[j] - pos[i]
            r = np.linalg.norm(rvec)
            if r < 1e-12:
                raise ValueError(f"sites {i} and {j} coincide")
            cos_t = np.dot(rvec, axis) / r
            table[i, j] = table[j, i] = scale * (3.0 * cos_t ** 2 - 1.0) / r ** 3
    return table


@dataclass(frozen=True)
class CouplingModel:
    """Declarative coupling-table recipe, used by the config layer.

    variant: one of chain, ring, complete, dipolar-geometry, explicit, random.
    """

    variant: str
    strength: float = 1.0
    scale: float = 1.0
    seed: int | None = None
    geometry: str = "line"
    spacing: float = 1.0
    field_axis: tuple = (0.0, 0.0, 1.0)
    positions: np.ndarray | None = None
    table: np.ndarray | None = None

    def build(self, n: int, rng: np.random.Generator | None = None) -> np.ndarray:
        if self.variant == "chain":
            return chain_couplings(n, self.strength)
        if self.variant == "ring":
            return ring_couplings(n, self.strength)
        if self.variant == "complete":
            return complete_couplings(n, self.strength)
        if self.variant == "random":
            if self.seed is not None:
                return random_couplings(n, self.scale, seed=self.seed)
            if rng is None:
                raise ValueError("random couplings need a seed")
            return random_couplings(n, self.scale, rng=rng)
        if self.variant == "dipolar-geometry":
            if self.positions is not None:
                pos = np.asarray(self.positions, dtype=float)
                if pos.shape[0] != n:
                    raise ValueError("positions do not match n_spins")
            elif self.geometry == "line":
                pos = line_positions(n, self.spacing)
            elif self.geometry == "ring":
                pos = ring_positions(n, self.spacing)
            else:
                raise ValueError(f"unknown geometry {self.geometry!r}")
            return dipolar_couplings(pos, self.field_axis, self.scale)
        if self.variant == "explicit":
            if self.table is None:
                raise ValueError("explicit coupling model needs a table")
            table = np.asarray(self.table, dtype=float)
            if table.shape != (n, n):
                raise ValueError("explicit table does not match n_spins")
            return table
        raise ValueError(f"unknown coupling variant {self.variant!r}")


def load_positions(path) -> np.ndarray:
    """Read site geometry from plain text: `index x y z` per line, # comments."""
    rows = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected `index x y z`")
            idx = int(parts[0])
            rows[idx] = [float(p) for p in parts[1:]]
    if sorted(rows) != list(range(len(rows))):
        raise ValueError(f"{path}: site indices must be 0..n-1 without gaps")
    return np.array([rows[i] for i in range(len(rows))])


def load_couplings(path, n: int) -> np.ndarray:
    """Read a coupling table from plain text: `i j value` per line, # comments."""
    table = np.zeros((n, n))
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected `i j value`")
            i, j = int(parts[0]), int(parts[1])
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ValueError(f"{path}:{lineno}: bad site pair ({i}, {j})")
            table[i, j] = table[j, i] = float(parts[2])
    return table


# ---------------------------------------------------------------------------
# operator construction
# ---------------------------------------------------------------------------

def _pair_matrix(n: int, basis: str, axis: str, i: int, j: int) -> np.ndarray:
    s = _SINGLE[basis][axis]
    eye = np.eye(2, dtype=complex)
    factors = [eye] * n
    factors[i] = s
    factors[j] = s
    return _kron_chain(factors)


def build_hamiltonian(sys: SpinSystem, spec: HamiltonianSpec) -> Operator:
    """Assemble the dense Hamiltonian for a spec; Hermitian and traceless."""
    n = sys.n_spins
    if spec.n_sites != n:
        raise ValueError(f"coupling table is {spec.n_sites} sites, system has {n}")
    mat = np.zeros((sys.dim, sys.dim), dtype=complex)
    coefs = dict(zip(AXES, (spec.a, spec.b, spec.c)))
    for i in range(n):
        for j in range(i + 1, n):
            bij = spec.couplings[i, j]
            if bij == 0.0:
                continue
            for axis, coef in coefs.items():
                if coef == 0.0:
                    continue
                mat += (bij * coef) * _pair_matrix(n, sys.basis, axis, i, j)
    if spec.offsets is not None:
        for i, delta in enumerate(spec.offsets):
            if delta != 0.0:
                mat += delta * site_operator(sys, spec.offset_axis, i).mat
    return Operator(mat, sys.basis, hermitian_hint=True)


# ---------------------------------------------------------------------------
# harmonic decomposition with respect to x rotations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HarmonicDecomposition:
    """Components H_n with [S_x_total, H_n] = n H_n and sum_n H_n = H."""

    components: dict

    def __getitem__(self, n: int) -> Operator:
        return self.components[n]

    def orders(self):
        return sorted(self.components)

    def reconstruct(self) -> Operator:
        parts = iter(self.components.values())
        out = next(parts)
        for p in parts:
            out = out + p
        return out

    def pair_trace(self, n: int) -> float:
        """Tr{H_n H_-n}, real and nonnegative for Hermitian input."""
        return trace_product(self.components[n], self.components[-n]).real


def order_components(op: Operator, sys: SpinSystem, k_angles: int) -> dict:
    """Discrete-Fourier split of `op` into x-rotation orders.

    Conjugates by exp(+i phi_k S_x) on the K-point angle grid
    phi_k = 2 pi k / K and projects with exp(-i n phi_k) / K.  Exact for
    operators whose orders satisfy |n| <= (K - 1) / 2; larger orders alias.
    K must be odd so the recovered range is symmetric.
    """
    if k_angles < 3 or k_angles % 2 == 0:
        raise ValueError("k_angles must be odd and >= 3")
    n_max = (k_angles - 1) // 2
    mats = {n: np.zeros((op.dim, op.dim), dtype=complex)
            for n in range(-n_max, n_max + 1)}
    for k in range(k_angles):
        phi = 2.0 * math.pi * k / k_angles
        rotated = conjugate(rotation(sys, "x", -phi), op)  # exp(+i phi S_x) conj
        for n in mats:
            mats[n] += np.exp(-1j * n * phi) * rotated.mat
    return {n: Operator(m / k_angles, op.basis) for n, m in mats.items()}


def harmonic_decomposition(h: Operator, sys: SpinSystem) -> HarmonicDecomposition:
    """Split a bilinear Hamiltonian into its five symmetry harmonics.

    Uses the 5-angle discrete Fourier transform, which is exact because the
    Hamiltonian family carries orders |n| <= 2 only.
    """
    _require_hermitian(h, "hamiltonian")
    return HarmonicDecomposition(order_components(h, sys, 5))


# ---------------------------------------------------------------------------
# derived scalars
# ---------------------------------------------------------------------------

def m2_absorption(couplings, site: int | None = None) -> float:
    """Second moment of the absorption line, sum_j b_ij^2 / 4.

    With `site` given, the single-site value; otherwise the site average.
    """
    table = np.asarray(couplings, dtype=float)
    n = table.shape[0]
    if site is not None:
        if not 0 <= site < n:
            raise ValueError(f"site {site} out of range")
        return float(np.sum(table[site] ** 2) / 4.0)
    return float(np.sum(table ** 2) / (4.0 * n))


def local_field(h: Operator, reference: Operator) -> float:
    """Local-field strength sqrt(Tr{H^2} / Tr{ref^2}); sets the time scale."""
    ref_sq = trace_product(reference, reference).real
    if ref_sq <= 0.0:
        raise ValueError("reference operator has zero norm")
    h_sq = trace_product(h, h).real
    return math.sqrt(max(h_sq, 0.0) / ref_sq)
