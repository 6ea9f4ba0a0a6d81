"""Mass production of quantum circuits: synthesize many copies of a diagonal,
multiplexor, state preparation or unitary for less than the sum of their costs."""

from .circuit import (
    ANCILLA,
    LOGICAL,
    Circuit,
    CircuitBuilder,
    CircuitError,
    Gate,
    Register,
    SynthesisReport,
    cnot_count,
    compose,
    expand_macros,
    inverse,
    tensor,
)
from .massprod import (
    DomainError,
    MassProdParams,
    Synthesis,
    build_mass_prod,
    build_mass_prod_base,
    cost_bound,
    derive_g_sequence,
    mass_produce_diagonal,
    mass_produce_multiplexed_rotation,
    mass_produce_multiplexor1,
    mass_produce_state,
    mass_produce_unitary,
)
from .qasm import export_qasm, parse_qasm
from .simulator import (
    apply_dense,
    circuit_unitary,
    restricted_operator,
    simulate_phase_path,
    verify_ancilla_restoration,
    verify_phase_function,
)
from .toolbox import (
    MultiplexedRotation,
    Multiplexor1,
    PhaseFunction,
    qsd_synthesize,
    synth_diagonal,
    synth_multiplexed_rotation,
    synth_multiplexor1,
    synth_state_prep_single,
)

__version__ = "0.1.0"
