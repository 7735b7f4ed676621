"""Exact few-photon simulator for linear-optics hyperentanglement protocols."""

from .fock import (
    FockError,
    FockState,
    ModeLabel,
    ModeRegister,
    ModeUnitary,
    OccupationConfig,
    apply_unitary,
    equal_up_to_phase,
    inner,
    make_state,
    normalize,
    product_state,
)
from .elements import (
    BalancedBS,
    Delay,
    DetectorSpec,
    HalfWavePlate45,
    HalfWavePlate90,
    PBS,
    PolPhaseFlip,
    SpatialPhaseFlip,
    UnbalancedBS,
    WavePlate,
    apply,
    lower,
)
from .measurement import (
    DetectionPattern,
    OutcomeBranch,
    WeightedEnsemble,
    classify_parity,
    measure,
    post_select,
    project_group_counts,
)
from .circuits import CircuitSpec, CircuitParseError, load_example, parse, print_spec, run

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
