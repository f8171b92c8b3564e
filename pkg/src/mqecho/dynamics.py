"""Exact unitary time evolution, pulses, and pulse-sequence execution.

Propagation goes through one Hermitian eigendecomposition per Hamiltonian:
U(t) = V exp(-i E t) V^dag.  After the O(D^3) factorization each time point
costs a few dense multiplies, and the time-reversed Hamiltonian -H is exact
(negate the eigenvalues, or equivalently evolve with negated time).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spinops import Operator, SpinSystem, conjugate, rotation, trace_product


@dataclass(frozen=True, eq=False)
class Propagator:
    """Eigendecomposition of a Hamiltonian: H = modes @ diag(energies) @ modes^dag."""

    energies: np.ndarray
    modes: np.ndarray
    basis: str
    diagonal: bool = False

    def __post_init__(self):
        energies = np.asarray(self.energies, dtype=float)
        modes = np.asarray(self.modes, dtype=complex)
        energies.flags.writeable = False
        modes.flags.writeable = False
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "modes", modes)

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    def negated(self) -> "Propagator":
        """Propagator of -H (ideal time reversal)."""
        return Propagator(-self.energies, self.modes, self.basis, self.diagonal)

    def to_eigenbasis(self, op: Operator) -> np.ndarray:
        if self.diagonal:
            return op.mat
        return self.modes.conj().T @ op.mat @ self.modes

    def from_eigenbasis(self, mat: np.ndarray) -> np.ndarray:
        if self.diagonal:
            return mat
        return self.modes @ mat @ self.modes.conj().T


def make_propagator(h: Operator) -> Propagator:
    """Diagonalize a Hermitian operator; exactly-diagonal input is passed through."""
    if not h.is_hermitian(rtol=1e-10):
        raise ValueError("propagator requires a Hermitian Hamiltonian")
    diag = np.diagonal(h.mat)
    if np.count_nonzero(h.mat - np.diag(diag)) == 0:
        return Propagator(diag.real, np.eye(h.dim, dtype=complex), h.basis,
                          diagonal=True)
    energies, modes = np.linalg.eigh(h.mat)
    return Propagator(energies, modes, h.basis)


def unitary(prop: Propagator, t: float) -> Operator:
    """U(t) = exp(-i H t) as a dense Operator."""
    phases = np.exp(-1j * prop.energies * t)
    if prop.diagonal:
        return Operator(np.diag(phases), prop.basis)
    return Operator((prop.modes * phases) @ prop.modes.conj().T, prop.basis)


def evolve(prop: Propagator, rho: Operator, t: float) -> Operator:
    """rho(t) = U(t) rho U(t)^dag; preserves Hermiticity, trace and purity."""
    if rho.dim != prop.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {prop.dim}")
    if rho.basis != prop.basis:
        raise ValueError(f"basis mismatch: {rho.basis!r} vs {prop.basis!r}")
    phases = np.exp(-1j * prop.energies * t)
    if prop.diagonal:
        mat = (phases[:, None] * rho.mat) * phases.conj()[None, :]
        return Operator(mat, rho.basis)
    u = (prop.modes * phases) @ prop.modes.conj().T
    return Operator(u @ rho.mat @ u.conj().T, rho.basis)


def interaction_frame(h, a: Operator, t: float) -> Operator:
    """Interaction-frame operator exp(+i H t) a exp(-i H t).

    `h` may be an Operator (diagonalized on the fly) or a prebuilt
    Propagator.  The Frobenius norm of `a` is preserved.
    """
    prop = h if isinstance(h, Propagator) else make_propagator(h)
    return evolve(prop, a, -t)


def apply_pulse(rho: Operator, axis: str, angle: float) -> Operator:
    """Instantaneous collective pulse: conjugation by rotation(axis, angle)."""
    sys = SpinSystem(rho.n_spins, rho.basis)
    return conjugate(rotation(sys, axis, angle), rho)


def expectation_series(prop: Propagator, rho0: Operator, observables: dict,
                       times) -> dict:
    """Tr{O rho(t)} for each named observable over a grid of times.

    Works in the eigenbasis, where every matrix element just rotates with
    phase exp(-i (E_p - E_q) t): each time point is O(D^2) after the
    transform, with near-zero weights dropped.
    """
    times = np.asarray(times, dtype=float)
    rho_e = prop.to_eigenbasis(rho0)
    omega = prop.energies[:, None] - prop.energies[None, :]
    out = {}
    for name, obs in observables.items():
        if obs.dim != prop.dim or obs.basis != prop.basis:
            raise ValueError(f"observable {name!r} incompatible with propagator")
        weights = (prop.to_eigenbasis(obs).T * rho_e).ravel()
        freqs = omega.ravel()
        keep = np.abs(weights) > 1e-18 * max(np.abs(weights).max(), 1e-300)
        weights, freqs = weights[keep], freqs[keep]
        series = np.empty(times.shape, dtype=complex)
        for k, t in enumerate(times):
            series[k] = np.sum(weights * np.exp(-1j * freqs * t))
        out[name] = series
    return out


# ---------------------------------------------------------------------------
# pulse sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FreeEvolution:
    """Evolve under a named, pre-built Hamiltonian for a fixed duration."""

    hamiltonian: str
    duration: float

    def __post_init__(self):
        if self.duration < 0.0:
            raise ValueError("free-evolution duration must be >= 0")


@dataclass(frozen=True)
class Pulse:
    """Instantaneous collective rotation pulse."""

    axis: str
    angle: float


@dataclass(frozen=True, eq=False)
class Kick:
    """Instantaneous perturbation: conjugation by exp(+i delta V)."""

    generator: Operator
    delta: float


@dataclass(frozen=True, eq=False)
class PulseSequence:
    """Ordered schedule of free evolutions, pulses, and kicks.

    `hamiltonians` maps the names referenced by FreeEvolution steps to
    pre-built Operators.
    """

    steps: tuple
    hamiltonians: dict

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "hamiltonians", dict(self.hamiltonians))

    def total_duration(self) -> float:
        return sum(s.duration for s in self.steps if isinstance(s, FreeEvolution))


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    """Sampled trajectory: observable series aligned with `times`."""

    times: np.ndarray
    observables: dict
    states: tuple | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        for name, series in self.observables.items():
            if len(series) != times.shape[0]:
                raise ValueError(f"series {name!r} length does not match times")


def run_sequence(sys: SpinSystem, seq: PulseSequence, rho0: Operator,
                 sample_times, observables: dict | None = None,
                 store_states: bool = False) -> EvolutionResult:
    """Execute a pulse sequence, sampling observables at the given times.

    Samples at a step boundary observe the state after all instantaneous
    events scheduled at that instant.  Sample times must be sorted,
    nonnegative, and within the total sequence duration.
    """
    observables = observables or {}
    times = np.asarray(sample_times, dtype=float)
    if times.ndim != 1 or (times.size and np.any(np.diff(times) < 0)):
        raise ValueError("sample_times must be a sorted 1-d array")
    total = seq.total_duration()
    if times.size and (times[0] < 0 or times[-1] > total + 1e-12):
        raise ValueError(f"sample_times must lie within [0, {total}]")
    for step in seq.steps:
        if isinstance(step, FreeEvolution) and step.hamiltonian not in seq.hamiltonians:
            raise ValueError(f"undefined Hamiltonian reference {step.hamiltonian!r}")

    props = {}

    def prop_for(name):
        if name not in props:
            props[name] = make_propagator(seq.hamiltonians[name])
        return props[name]

    collected = {name: [] for name in observables}
    states = [] if store_states else None

    def record(state):
        for name, obs in observables.items():
            collected[name].append(trace_product(obs, state))
        if store_states:
            states.append(state)

    rho = rho0
    clock = 0.0
    idx = 0
    for step in seq.steps:
        if isinstance(step, FreeEvolution):
            if step.duration == 0.0:
                continue
            prop = prop_for(step.hamiltonian)
            end = clock + step.duration
            # strictly-interior samples (exact comparison): samples falling
            # on the boundary wait for any instantaneous events there
            while idx < times.size and times[idx] < end:
                record(evolve(prop, rho, times[idx] - clock))
                idx += 1
            rho = evolve(prop, rho, step.duration)
            clock = end
        elif isinstance(step, Pulse):
            rho = apply_pulse(rho, step.axis, step.angle)
        elif isinstance(step, Kick):
            kick_u = unitary(make_propagator(step.generator), -step.delta)
            rho = conjugate(kick_u, rho)
        else:
            raise ValueError(f"unknown sequence step {step!r}")
    while idx < times.size:
        record(rho)
        idx += 1

    series = {name: np.asarray(vals) for name, vals in collected.items()}
    return EvolutionResult(times, series, tuple(states) if store_states else None)
