"""Hilbert-space construction and exact operator algebra for spin-1/2 clusters.

Everything is dense: an operator on N spins is a D x D complex array with
D = 2**N, tagged with the product basis it is written in.  Two bases are
supported:

* ``"z"`` -- the usual computational basis, single-spin S_z diagonal.
* ``"x"`` -- the x-product basis, single-spin S_x diagonal.  This is the
  canonical working basis because coherence orders are defined with respect
  to rotations about the x axis.

Conventions fixed here and relied on everywhere else:

* site 0 is the leftmost Kronecker factor (most significant bit of the
  basis index);
* rotations are ``R_axis(theta) = exp(-i * theta * S_axis_total)`` and act
  on operators by conjugation ``A -> R A R^dag``;
* hbar = 1, couplings are angular frequencies, spin length 1/2.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

DENSE_CAP = 12

AXES = ("x", "y", "z")
BASES = ("z", "x")

HERMITIAN_RTOL = 1e-12

# Single-spin operators, keyed by [basis][axis].  The x-basis matrices are
# the Hadamard conjugates of the z-basis ones, so the su(2) algebra
# [S_a, S_b] = i S_c (cyclic) holds identically in both.
_SINGLE = {
    "z": {
        "x": np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex),
        "y": np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex),
        "z": np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex),
    },
    "x": {
        "x": np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex),
        "y": np.array([[0.0, 0.5j], [-0.5j, 0.0]], dtype=complex),
        "z": np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex),
    },
}

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class SpinSystem:
    """A cluster of N coupled spins-1/2 and its storage basis."""

    n_spins: int
    basis: str = "x"
    cap: int = DENSE_CAP

    def __post_init__(self):
        if not 1 <= self.n_spins <= self.cap:
            raise ValueError(
                f"n_spins={self.n_spins} outside 1..{self.cap}; raise `cap` "
                "explicitly if you really want a larger dense cluster"
            )
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}, expected one of {BASES}")

    @property
    def dim(self) -> int:
        return 2 ** self.n_spins

    def x_magnetization(self) -> np.ndarray:
        """Diagonal of total S_x in the x-product basis (half-integer sums)."""
        idx = np.arange(self.dim, dtype=np.uint64)
        popcount = np.bitwise_count(idx).astype(float)
        return self.n_spins / 2.0 - popcount


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense operator on the full cluster Hilbert space.

    Instances are immutable values: the wrapped array is marked read-only
    and all arithmetic returns new operators.  Arithmetic requires matching
    dimension and basis tag.
    """

    mat: np.ndarray
    basis: str = "x"
    hermitian_hint: bool = False

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {mat.shape}")
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)
        if self.hermitian_hint and not self.is_hermitian():
            raise ValueError("hermitian_hint set on a visibly non-Hermitian matrix")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def n_spins(self) -> int:
        return int(self.dim).bit_length() - 1

    def dag(self) -> "Operator":
        return Operator(self.mat.conj().T, self.basis, self.hermitian_hint)

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self.mat))

    def is_hermitian(self, rtol: float = HERMITIAN_RTOL) -> bool:
        scale = np.abs(self.mat).max()
        if scale == 0.0:
            return True
        return np.abs(self.mat - self.mat.conj().T).max() <= rtol * scale

    def _compat(self, other: "Operator"):
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if self.basis != other.basis:
            raise ValueError(f"basis mismatch: {self.basis!r} vs {other.basis!r}")

    def __add__(self, other: "Operator") -> "Operator":
        self._compat(other)
        return Operator(self.mat + other.mat, self.basis)

    def __sub__(self, other: "Operator") -> "Operator":
        self._compat(other)
        return Operator(self.mat - other.mat, self.basis)

    def __neg__(self) -> "Operator":
        return Operator(-self.mat, self.basis, self.hermitian_hint)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.mat * complex(scalar), self.basis)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "Operator":
        return Operator(self.mat / complex(scalar), self.basis)

    def __matmul__(self, other: "Operator") -> "Operator":
        self._compat(other)
        return Operator(self.mat @ other.mat, self.basis)

    def __repr__(self) -> str:
        return f"Operator(dim={self.dim}, basis={self.basis!r})"


def _require_hermitian(op: Operator, what: str = "operator"):
    if not op.is_hermitian(rtol=1e-10):
        raise ValueError(f"{what} must be Hermitian")


def _kron_chain(factors) -> np.ndarray:
    out = np.array([[1.0 + 0.0j]])
    for f in factors:
        out = np.kron(out, f)
    return out


@functools.lru_cache(maxsize=256)
def _site_matrix(n_spins: int, basis: str, axis: str, site: int) -> np.ndarray:
    eye = np.eye(2, dtype=complex)
    factors = [eye] * n_spins
    factors[site] = _SINGLE[basis][axis]
    mat = _kron_chain(factors)
    mat.flags.writeable = False
    return mat


@functools.lru_cache(maxsize=64)
def _total_matrix(n_spins: int, basis: str, axis: str) -> np.ndarray:
    mat = sum(_site_matrix(n_spins, basis, axis, i) for i in range(n_spins))
    mat.flags.writeable = False
    return mat


def site_operator(sys: SpinSystem, axis: str, site: int) -> Operator:
    """S_{axis,site}: Hermitian, traceless, squares to Identity/4."""
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}")
    if not 0 <= site < sys.n_spins:
        raise ValueError(f"site {site} out of range for N={sys.n_spins}")
    return Operator(_site_matrix(sys.n_spins, sys.basis, axis, site), sys.basis,
                    hermitian_hint=True)


def total_operator(sys: SpinSystem, axis: str) -> Operator:
    """Collective S_axis = sum over sites."""
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}")
    return Operator(_total_matrix(sys.n_spins, sys.basis, axis), sys.basis,
                    hermitian_hint=True)


def ladder_operator(sys: SpinSystem, site: int, sign: int) -> Operator:
    """Raising/lowering operator with respect to the x quantization axis.

    ``S_i(+/-) = S_yi +/- i S_zi``, satisfying
    ``[S_x_total, S_i(+/-)] = (+/-) S_i(+/-)``.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    sy = site_operator(sys, "y", site)
    sz = site_operator(sys, "z", site)
    return Operator(sy.mat + sign * 1j * sz.mat, sys.basis)


def identity(sys: SpinSystem) -> Operator:
    return Operator(np.eye(sys.dim, dtype=complex), sys.basis, hermitian_hint=True)


def rotation(sys: SpinSystem, axis: str, angle: float) -> Operator:
    """Collective rotation unitary ``exp(-i * angle * S_axis_total)``.

    Built as the Kronecker power of the exact single-spin rotation
    cos(angle/2) I - 2i sin(angle/2) S_axis, so it is unitary to round-off.
    """
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}")
    s = _SINGLE[sys.basis][axis]
    half = 0.5 * angle
    r2 = np.cos(half) * np.eye(2, dtype=complex) - 2j * np.sin(half) * s
    return Operator(_kron_chain([r2] * sys.n_spins), sys.basis)


def change_basis(op: Operator, target: str) -> Operator:
    """Rewrite an operator in the other product basis (z <-> x).

    The transform is conjugation by the N-fold Hadamard, which is real,
    symmetric and self-inverse, so the round trip is exact up to round-off.
    """
    if target not in BASES:
        raise ValueError(f"unknown basis {target!r}")
    if target == op.basis:
        return op
    w = _kron_chain([_HADAMARD] * op.n_spins)
    return Operator(w @ op.mat @ w, target, op.hermitian_hint)


def commutator(a: Operator, b: Operator) -> Operator:
    a._compat(b)
    return Operator(a.mat @ b.mat - b.mat @ a.mat, a.basis)


def trace_product(a: Operator, b: Operator) -> complex:
    """Tr{a b}, evaluated without forming the product matrix."""
    a._compat(b)
    return complex(np.sum(a.mat * b.mat.T))


def conjugate(u: Operator, a: Operator) -> Operator:
    """u a u^dag, with a cheap path when u is diagonal."""
    u._compat(a)
    d = np.diagonal(u.mat)
    if np.count_nonzero(u.mat - np.diag(d)) == 0:
        mat = (d[:, None] * a.mat) * d.conj()[None, :]
    else:
        mat = u.mat @ a.mat @ u.mat.conj().T
    return Operator(mat, a.basis)


def random_deviation(sys: SpinSystem, rng: np.random.Generator,
                     traceless: bool = True) -> Operator:
    """Random dense Hermitian deviation matrix (GUE-style), for tests/checks."""
    d = sys.dim
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    mat = (a + a.conj().T) / 2.0
    if traceless:
        mat -= np.trace(mat).real / d * np.eye(d)
    return Operator(mat, sys.basis, hermitian_hint=True)
