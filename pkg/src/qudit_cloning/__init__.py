"""Encrypted cloning of qudits with Weyl-Heisenberg operators, AME states and threshold secret sharing."""
from .ame import (
    AmeReport,
    ame6_from_codewords,
    counterexample_marginal,
    encrypted_ame5,
    logical_codewords,
    partial_encrypted_ame6,
    verify_ame,
)
from .cloning import (
    CloneSystem,
    build_decryptor,
    build_encryptor,
    decrypt,
    encrypt,
    initial_state,
    loss_recover,
    loss_recovery_decryptor,
    pauli_reduction_check,
    swap_witness,
)
from .errors import QuditCloningError, UnsupportedDimensionWarning
from .qss import AccessVerdict, QssScheme, adjudicate, build_scheme, encode_secret, recover_secret
from .state import (
    DensityOperator,
    PureState,
    RegisterLayout,
    apply,
    bell_pair,
    fidelity,
    load_state,
    max_mixed_distance,
    partial_trace,
    random_state,
    save_state,
    schmidt_rank,
    tensor,
    uniform_state,
)
from .weyl import WeylLabel, phase_constants, weyl_displacement

__version__ = "0.1.0"
