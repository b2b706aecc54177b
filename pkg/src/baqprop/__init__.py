"""Phase-kick training on qudit-simulated continuous registers.

A statevector engine for registers that emulate continuous quantum variables
on finite grids, the feedforward / exponentiated-loss / uncompute kernel that
writes cost gradients into register momenta, the two optimizers built on it
(momentum-measurement gradient descent and quantum dynamical descent), state
exponentiation protocols, and four end-to-end training experiments.
"""

from .hilbert import (
    GaussianPointer,
    MomentumReadout,
    OverflowWarning,
    QubitSpec,
    QuditSpec,
    WaveState,
    delta_kernel,
    delta_kernel_direct,
    folded_momentum_values,
    fourier,
    fractional_phase,
    fractional_shift,
    inverse_fourier,
    measure_momenta_joint,
    measure_momentum_expectation,
    measure_position_expectation,
    momentum_distribution,
    position_values,
    prepare_gaussian,
    product_gaussian_state,
)
from .circuit import (
    FeedforwardProgram,
    GateOp,
    apply_adder,
    apply_diagonal_phase,
    apply_exp_swap,
    apply_fixed_unitary,
    apply_gate,
    apply_multiplier_adder,
    apply_param_exponential,
    apply_phase_estimation,
    apply_program,
)
from .qfb import (
    DiagonalCost,
    EtaScalingReport,
    LossSpec,
    QFBResult,
    classical_value_indices,
    contract_table,
    effective_phase_grid,
    pointer_prob_vectors,
    qfb_apply,
    qfb_run,
    smoothed_cost,
    smoothed_cost_gradient,
    verify_eta_scaling,
)
from .optim import (
    CircuitKick,
    OptState,
    Schedule,
    apply_kick,
    camp_kick,
    kinetic_pulse,
    momgrad_step,
    nelder_mead,
    qdd_step,
    sequential_minibatch_kick,
    weight_decay_kick,
)
from .stateexp import (
    BatchedExpReport,
    ExpStateBudget,
    exponentiate_batched,
    exponentiate_exact,
    sequential_mixture_exponential,
    trace_distance,
)
from .wigner import wigner_continuous, wigner_discrete, write_wigner_csv
from .config import RunConfig, parse_config_file
from .runtime import substream

__version__ = "0.1.0"
