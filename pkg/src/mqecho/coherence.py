"""Multiple-quantum and generalized coherence decompositions of spin states.

A state component of order n obeys ``[S_x_total, rho_n] = n rho_n``; in the
x-product basis these are just the matrix elements whose row/column total
S_x eigenvalues differ by n, so the decomposition is a single masking pass.
Intensities are the normalized pair traces ``Tr{rho_n rho_-n} / norm`` and
sum to one along any unitary trajectory.

The same construction with an arbitrary Hermitian generator V gives the
generalized spectrum: elements are grouped by eigenvalue differences of V,
merging differences that agree within a binning tolerance (a finite system
turns the continuous decomposition into a finite sum of lines).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .spinops import Operator, SpinSystem, _require_hermitian, change_basis, \
    commutator, trace_product

NEGATIVE_INTENSITY_FLOOR = -1e-12
SYMMETRY_TOL = 1e-10
SUM_RULE_TOL = 1e-10


def _validated_intensities(raw, what: str):
    vals = np.asarray(raw, dtype=float)
    if vals.min(initial=0.0) < NEGATIVE_INTENSITY_FLOOR:
        worst = vals.min()
        raise ValueError(
            f"{what} intensity {worst:.3e} is negative beyond round-off; "
            "this signals a normalization bug"
        )
    vals = np.clip(vals, 0.0, None)
    total = vals.sum()
    if abs(total - 1.0) > SUM_RULE_TOL:
        raise ValueError(
            f"{what} intensities sum to {total!r}, violating the sum rule; "
            "was the normalization taken from the same initial state?"
        )
    return vals


@dataclass(frozen=True, eq=False)
class MQSpectrum:
    """Normalized multiple-quantum intensities I_n over integer orders."""

    orders: np.ndarray
    intensities: np.ndarray
    norm: float
    time: float | None = None

    def __post_init__(self):
        orders = np.asarray(self.orders, dtype=int)
        vals = _validated_intensities(self.intensities, "MQ")
        if orders.shape != vals.shape:
            raise ValueError("orders and intensities must have the same length")
        order_index = {int(n): i for i, n in enumerate(orders)}
        for n, i in order_index.items():
            j = order_index.get(-n)
            partner = vals[j] if j is not None else 0.0
            if abs(vals[i] - partner) > SYMMETRY_TOL:
                raise ValueError(f"I_{n} != I_{-n} beyond tolerance")
        orders.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "intensities", vals)

    def __getitem__(self, n: int) -> float:
        hits = np.nonzero(self.orders == n)[0]
        return float(self.intensities[hits[0]]) if hits.size else 0.0

    def as_dict(self) -> dict:
        return {int(n): float(v) for n, v in zip(self.orders, self.intensities)}


@dataclass(frozen=True, eq=False)
class VSpectrum:
    """Normalized generalized-coherence intensities over frequency lines."""

    frequencies: np.ndarray
    intensities: np.ndarray
    norm: float
    tol: float
    time: float | None = None

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        vals = _validated_intensities(self.intensities, "V-coherence")
        if freqs.shape != vals.shape:
            raise ValueError("frequencies and intensities must have the same length")
        for i, w in enumerate(freqs):
            j = int(np.argmin(np.abs(freqs + w)))
            if abs(freqs[j] + w) <= max(self.tol, 1e-15) * 4.0 + 1e-15:
                if abs(vals[i] - vals[j]) > SYMMETRY_TOL:
                    raise ValueError(f"I_w asymmetric at w={w!r}")
        freqs.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "intensities", vals)


@functools.lru_cache(maxsize=32)
def _order_matrix(n_spins: int) -> np.ndarray:
    mx = SpinSystem(n_spins, "x").x_magnetization()
    orders = np.rint(mx[:, None] - mx[None, :]).astype(int)
    orders.flags.writeable = False
    return orders


def _in_x_basis(rho: Operator) -> Operator:
    return rho if rho.basis == "x" else change_basis(rho, "x")


def mq_decompose(rho: Operator, sys: SpinSystem) -> dict:
    """Split a state into coherence-order components rho_n, n = -N..N.

    Components are returned in the x-product basis and reconstruct rho
    exactly (the masks partition the matrix elements).
    """
    rho_x = _in_x_basis(rho)
    orders = _order_matrix(sys.n_spins)
    out = {}
    for n in range(-sys.n_spins, sys.n_spins + 1):
        mat = np.where(orders == n, rho_x.mat, 0.0)
        out[n] = Operator(mat, "x")
    return out


def mq_intensities(components: dict, norm: float,
                   time: float | None = None) -> MQSpectrum:
    """Normalized intensities I_n = Tr{rho_n rho_-n} / norm from components."""
    if norm <= 0.0:
        raise ValueError("normalization Tr{rho(0)^2} must be positive")
    orders = np.array(sorted(components), dtype=int)
    vals = []
    for n in orders:
        if -n not in components:
            raise ValueError(f"missing partner component for order {n}")
        vals.append(trace_product(components[n], components[-n]).real / norm)
    return MQSpectrum(orders, np.array(vals), norm, time)


def mq_spectrum(rho: Operator, sys: SpinSystem, norm: float | None = None,
                time: float | None = None) -> MQSpectrum:
    """One-pass MQ spectrum of a Hermitian state.

    For Hermitian rho, Tr{rho_n rho_-n} is the squared magnitude of the
    masked elements, so a single weighted bincount gives every order.
    `norm` defaults to Tr{rho^2}, which equals Tr{rho(0)^2} along unitary
    trajectories.
    """
    rho_x = _in_x_basis(rho)
    n = sys.n_spins
    if norm is None:
        norm = trace_product(rho_x, rho_x).real
    if norm <= 0.0:
        raise ValueError("normalization Tr{rho(0)^2} must be positive")
    weights = np.abs(rho_x.mat.ravel()) ** 2
    bins = (_order_matrix(n) + n).ravel()
    sums = np.bincount(bins, weights=weights, minlength=2 * n + 1)
    return MQSpectrum(np.arange(-n, n + 1), sums / norm, norm, time)


def second_moment(spec) -> float:
    """m2 = sum n^2 I_n (or sum w^2 I_w for generalized spectra)."""
    if isinstance(spec, MQSpectrum):
        labels = spec.orders.astype(float)
    elif isinstance(spec, VSpectrum):
        labels = spec.frequencies
    else:
        raise TypeError(f"expected MQSpectrum or VSpectrum, got {type(spec)!r}")
    return float(np.sum(labels ** 2 * spec.intensities))


def second_moment_commutator(rho: Operator, v: Operator, norm: float) -> float:
    """m2 via the commutator identity -Tr{[V, rho]^2} / norm.

    Independent of any order decomposition: for Hermitian inputs the
    commutator is anti-Hermitian, so the value is its squared Frobenius
    norm over `norm`.
    """
    if norm <= 0.0:
        raise ValueError("normalization must be positive")
    _require_hermitian(rho, "state")
    _require_hermitian(v, "generator")
    c = commutator(v, rho)
    return float(np.linalg.norm(c.mat) ** 2 / norm)


# ---------------------------------------------------------------------------
# generalized (V-) coherences
# ---------------------------------------------------------------------------

def _difference_clusters(eigvals: np.ndarray, tol: float):
    """Group all pairwise eigenvalue differences, merging within tol.

    Returns (flat difference array, sorted order, cluster boundary indices).
    """
    diffs = (eigvals[:, None] - eigvals[None, :]).ravel()
    order = np.argsort(diffs, kind="stable")
    sorted_diffs = diffs[order]
    gaps = np.diff(sorted_diffs)
    breaks = np.nonzero(gaps > tol)[0] + 1
    bounds = np.concatenate([[0], breaks, [sorted_diffs.size]])
    return diffs, order, bounds


def default_binning_tol(eigvals: np.ndarray) -> float:
    spread = float(eigvals.max() - eigvals.min())
    return 1e-9 * spread if spread > 0.0 else 1e-15


def v_decompose(rho: Operator, v: Operator, tol: float | None = None):
    """Components rho_w with [V, rho_w] = w rho_w, w an eigenvalue difference.

    Returns a list of (w, Operator) pairs sorted by w; the components are
    expressed in the basis of `rho` and sum back to it exactly.  For a
    generator with a fully nondegenerate spectrum this materializes O(D^2)
    components, so keep it to small clusters.
    """
    _require_hermitian(v, "generator")
    if rho.dim != v.dim or rho.basis != v.basis:
        raise ValueError("state and generator must share dim and basis")
    eigvals, modes = np.linalg.eigh(v.mat)
    if tol is None:
        tol = default_binning_tol(eigvals)
    rho_e = modes.conj().T @ rho.mat @ modes
    diffs, order, bounds = _difference_clusters(eigvals, tol)
    flat = rho_e.ravel()
    out = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        members = order[lo:hi]
        omega = float(np.mean(diffs[members]))
        comp = np.zeros(flat.shape, dtype=complex)
        comp[members] = flat[members]
        comp = comp.reshape(rho_e.shape)
        out.append((omega, Operator(modes @ comp @ modes.conj().T, rho.basis)))
    return out


def v_spectrum(rho: Operator, v: Operator, norm: float | None = None,
               tol: float | None = None, time: float | None = None) -> VSpectrum:
    """Generalized-coherence intensities without materializing components."""
    _require_hermitian(v, "generator")
    if rho.dim != v.dim or rho.basis != v.basis:
        raise ValueError("state and generator must share dim and basis")
    eigvals, modes = np.linalg.eigh(v.mat)
    if tol is None:
        tol = default_binning_tol(eigvals)
    if norm is None:
        norm = trace_product(rho, rho).real
    if norm <= 0.0:
        raise ValueError("normalization Tr{rho(0)^2} must be positive")
    rho_e = modes.conj().T @ rho.mat @ modes
    weights = np.abs(rho_e.ravel()) ** 2
    diffs, order, bounds = _difference_clusters(eigvals, tol)
    freqs, vals = [], []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        members = order[lo:hi]
        freqs.append(float(np.mean(diffs[members])))
        vals.append(float(weights[members].sum()) / norm)
    return VSpectrum(np.array(freqs), np.array(vals), norm, tol, time)
