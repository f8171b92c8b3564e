"""Exact-simulation laboratory for multiple-quantum coherences and
time-reversal echoes in spin-1/2 clusters."""

__version__ = "0.1.0"

from .spinops import (
    Operator,
    SpinSystem,
    change_basis,
    commutator,
    ladder_operator,
    rotation,
    site_operator,
    total_operator,
    trace_product,
)
from .hamiltonians import (
    CouplingModel,
    HamiltonianSpec,
    HarmonicDecomposition,
    build_hamiltonian,
    chain_couplings,
    complete_couplings,
    dipolar_couplings,
    from_preset,
    harmonic_decomposition,
    line_positions,
    local_field,
    m2_absorption,
    random_couplings,
    ring_couplings,
    ring_positions,
)
from .dynamics import (
    EvolutionResult,
    FreeEvolution,
    Kick,
    Propagator,
    Pulse,
    PulseSequence,
    apply_pulse,
    evolve,
    interaction_frame,
    make_propagator,
    run_sequence,
    unitary,
)
from .coherence import (
    MQSpectrum,
    VSpectrum,
    mq_decompose,
    mq_intensities,
    mq_spectrum,
    second_moment,
    second_moment_commutator,
    v_decompose,
    v_spectrum,
)
from .experiments import (
    EchoQuadraticReport,
    LoschmidtSpec,
    PartialEchoSpec,
    PartialEchoResult,
    SpinDiffusionResult,
    WeakIrrevReport,
    correlation_functions,
    correlation_time,
    echo_delta_sweep,
    echo_quadratic_check,
    echo_tau_sweep,
    loschmidt_echo,
    partial_echo,
    perturbation_hamiltonian,
    second_order_echo,
    spin_diffusion,
    weak_irrev_prediction,
    weak_irrev_scan,
)
from .refmodels import (
    SolvableCheckReport,
    brute_force_intensities,
    nn_chain_check,
    zz_fid_analytic,
    zz_growth_check,
    zz_pair_mq_analytic,
)
