"""Simulation of the optimal state-dependent qubit cloner, at gate level and
as an NMR pulse experiment."""

from .cloner import (
    BlochVector,
    CloneResult,
    Hemisphere,
    InputState,
    baseline_constants,
    bloch_fidelity,
    bloch_of,
    build_cloner,
    clone,
    entropy_theory,
    fidelity_theory,
    input_ket,
)
from .nmr import (
    NoiseMode,
    SpinSystem,
    apply_channel,
    compile_unitary,
    crusher,
    prepare_pseudo_pure,
    readout_bloch,
    run_cloning_pulse_level,
)
from .pulses import PulseProgram, builtin, parse, simplify, to_text

__version__ = "0.1.0"
