"""Encrypted cloning of a qudit with Weyl-Heisenberg encryption/decryption.

Register layout for ``n`` signal-noise pairs is ``[A, S1..Sn, N1..Nn]``:
``A`` is index 0, ``S_i`` is index ``i`` and ``N_i`` is index ``n + i``.

The encryptor acts on ``A, S1..Sn``::

    U_enc = (1/d) sum_{a,b} phi(a,b)^-1  W(a,b) (x) W(a,b)^dagger^{(x) n}

and the decryptor for signal ``l`` acts on ``S_l, N1..Nn``::

    U_dec = sum_{a,b} phi(a,b) |Psi_ab><Psi_ab|_{S_l N_l} (x) W(a,b)^T on every N_i, i != l

with ``phi(a,b) = tau^-(a^2 + b^2 - (n+1) ab)`` and
``|Psi_ab> = (W(a,b)^dagger (x) I)|Phi>`` (the scalar phase drops out of the projector).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, InvalidIndexError, QuditCloningError
from .state import (
    DensityOperator,
    PureState,
    RegisterLayout,
    apply,
    bell_pair,
    max_mixed_distance,
    partial_trace,
    permute_registers,
    phase_distance,
    tensor,
)
from .weyl import (
    WeylLabel,
    check_dimension,
    kron_all,
    max_entry_distance,
    tau_power,
    weyl_displacement,
    weyl_labels,
)

PAULI = {
    0: np.eye(2, dtype=complex),
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class CloneSystem:
    d: int
    n: int
    layout: RegisterLayout = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        check_dimension(self.d)
        if int(self.n) != self.n or self.n < 2:
            # a single pair cannot be decrypted
            raise QuditCloningError(f"need n >= 2 signal-noise pairs, got {self.n!r}")
        roles = ["A"] + [f"S{i}" for i in range(1, self.n + 1)] + [f"N{i}" for i in range(1, self.n + 1)]
        object.__setattr__(self, "layout", RegisterLayout.uniform(self.d, roles))

    @property
    def num_registers(self) -> int:
        return 2 * self.n + 1

    def signal(self, i: int) -> int:
        self._check_pair(i)
        return i

    def noise(self, i: int) -> int:
        self._check_pair(i)
        return self.n + i

    @property
    def encrypted_registers(self) -> list[int]:
        return list(range(self.n + 1))

    def _check_pair(self, i: int) -> None:
        if int(i) != i or not 1 <= i <= self.n:
            raise InvalidIndexError(f"pair index {i!r} outside 1..{self.n}")


def enc_phase(d: int, n: int, a: int, b: int) -> complex:
    """``phi(a, b) = tau^-(a^2 + b^2 - (n+1) a b)`` on residues ``0 <= a, b < d``."""
    return tau_power(d, -(a * a + b * b - (n + 1) * a * b))


def bell_basis_vector(d: int, label: WeylLabel) -> np.ndarray:
    """``(W(a,b)^dagger (x) I)|Phi>``, an element of the generalized Bell basis."""
    w = weyl_displacement(d, *label)
    return np.kron(w.conj().T, np.eye(d)) @ bell_pair(d).amplitudes


def _reorder_operator(op: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Re-express ``op`` acting on registers ``order`` as acting on ``sorted(order)``."""
    order = list(order)
    perm = [order.index(r) for r in sorted(order)]
    k = len(order)
    local = [dims[r] for r in order]
    t = np.asarray(op).reshape(local * 2).transpose(perm + [k + p for p in perm])
    size = math.prod(local)
    return t.reshape(size, size)


def initial_state(system: CloneSystem, psi: PureState) -> PureState:
    """``|psi>_A (x) |Phi>_{S1 N1} (x) ... (x) |Phi>_{Sn Nn}`` in canonical layout."""
    d, n = system.d, system.n
    if psi.dims != (d,):
        raise DimensionMismatchError(f"input must be one register of dimension {d}, got dims {psi.dims}")
    pairs = [bell_pair(d) for _ in range(n)]
    # kron order is A, S1, N1, S2, N2, ...; move every S before every N
    raw = tensor([psi] + pairs)
    order = [0] + [1 + 2 * i for i in range(n)] + [2 + 2 * i for i in range(n)]
    return PureState(system.layout, permute_registers(raw, order).amplitudes)


@lru_cache(maxsize=None)
def _encryptor(d: int, n: int) -> np.ndarray:
    dim = d ** (n + 1)
    u = np.zeros((dim, dim), dtype=complex)
    for lab in weyl_labels(d):
        w = weyl_displacement(d, *lab)
        u += kron_all(w, *[w.conj().T] * n) / enc_phase(d, n, *lab)
    u /= d
    u.setflags(write=False)
    return u


def build_encryptor(system: CloneSystem) -> np.ndarray:
    """Encryption unitary on ``A, S1..Sn`` (side ``d^(n+1)``)."""
    return _encryptor(system.d, system.n)


@lru_cache(maxsize=None)
def _decryptor(d: int, n: int, l: int) -> np.ndarray:
    others = [i for i in range(1, n + 1) if i != l]
    order = [l, n + l] + [n + i for i in others]
    dim = d ** (n + 1)
    u = np.zeros((dim, dim), dtype=complex)
    for lab in weyl_labels(d):
        v = bell_basis_vector(d, lab)
        wt = weyl_displacement(d, *lab).T
        u += enc_phase(d, n, *lab) * kron_all(np.outer(v, v.conj()), *[wt] * len(others))
    u = _reorder_operator(u, [d] * (2 * n + 1), order)
    u.setflags(write=False)
    return u


def build_decryptor(system: CloneSystem, l: int) -> np.ndarray:
    """Decryption unitary for signal ``l`` on ``S_l, N1..Nn`` (in that order)."""
    system.signal(l)
    return _decryptor(system.d, system.n, l)


def decryptor_targets(system: CloneSystem, l: int) -> list[int]:
    return [system.signal(l)] + [system.noise(i) for i in range(1, system.n + 1)]


def bell_projector_sum(d: int) -> np.ndarray:
    """Sum of all d^2 generalized Bell projectors; equals the identity."""
    total = np.zeros((d * d, d * d), dtype=complex)
    for lab in weyl_labels(d):
        v = bell_basis_vector(d, lab)
        total += np.outer(v, v.conj())
    return total


def encrypt(system: CloneSystem, psi: PureState) -> PureState:
    return apply(build_encryptor(system), system.encrypted_registers, initial_state(system, psi))


def decrypt(system: CloneSystem, encrypted: PureState, l: int) -> tuple[DensityOperator, PureState]:
    """Decrypt signal ``l``; returns its reduced state and the full post-decryption state."""
    if encrypted.dims != system.layout.dims:
        raise DimensionMismatchError(f"state dims {encrypted.dims} do not match {system.layout.dims}")
    out = apply(build_decryptor(system, l), decryptor_targets(system, l), encrypted)
    return partial_trace(out, [system.signal(l)]), out


# -- loss recovery -------------------------------------------------------------


def _normalize_lost(system: CloneSystem, l: int, lost, sacrifice) -> tuple[int, ...]:
    system.signal(l)
    lost_t = (lost,) if isinstance(lost, int) else tuple(sorted(lost))
    if not lost_t:
        raise InvalidIndexError("no lost noise index given")
    for i in lost_t:
        system.noise(i)
    if len(set(lost_t)) != len(lost_t):
        raise InvalidIndexError(f"repeated lost indices {lost_t}")
    if l in lost_t:
        raise InvalidIndexError(f"cannot decrypt S{l} after losing its own key N{l}")
    if sacrifice is not None:
        sac_t = (sacrifice,) if isinstance(sacrifice, int) else tuple(sorted(sacrifice))
        if sac_t != lost_t:
            raise InvalidIndexError(f"sacrificed signals {sac_t} must be the partners of lost keys {lost_t}")
    return lost_t


def loss_recovery_targets(system: CloneSystem, l: int, lost, sacrifice=None) -> list[int]:
    lost_t = _normalize_lost(system, l, lost, sacrifice)
    regs = [system.signal(l), system.noise(l)] + [system.signal(j) for j in lost_t]
    regs += [system.noise(i) for i in range(1, system.n + 1) if i != l and i not in lost_t]
    return sorted(regs)


def loss_recovery_decryptor(system: CloneSystem, l: int, lost, sacrifice=None) -> np.ndarray:
    """Decryptor that stands in for lost keys ``N_j`` by acting with ``W(a,b)`` on ``S_j``.

    ``lost`` is one noise index or a collection of them; each partner signal
    ``S_j`` is sacrificed.  The operator acts on :func:`loss_recovery_targets`.
    """
    lost_t = _normalize_lost(system, l, lost, sacrifice)
    d, n = system.d, system.n
    keys = [i for i in range(1, n + 1) if i != l and i not in lost_t]
    order = [system.signal(l), system.noise(l)] + [system.signal(j) for j in lost_t]
    order += [system.noise(i) for i in keys]
    dim = d ** len(order)
    u = np.zeros((dim, dim), dtype=complex)
    for lab in weyl_labels(d):
        v = bell_basis_vector(d, lab)
        w = weyl_displacement(d, *lab)
        factors = [np.outer(v, v.conj())] + [w] * len(lost_t) + [w.T] * len(keys)
        u += enc_phase(d, n, *lab) * kron_all(*factors)
    return _reorder_operator(u, [d] * system.num_registers, order)


@dataclass
class LossRecoveryResult:
    recovered: DensityOperator
    sacrificed: dict[int, DensityOperator]
    post_state: PureState


def post_erasure_state(system: CloneSystem, encrypted: PureState, lost) -> DensityOperator:
    """Encrypted state with the lost noise registers traced out."""
    lost_t = (lost,) if isinstance(lost, int) else tuple(lost)
    drop = {system.noise(i) for i in lost_t}
    return partial_trace(encrypted, [r for r in range(system.num_registers) if r not in drop])


def loss_recover(system: CloneSystem, encrypted: PureState, l: int, lost, sacrifice=None) -> LossRecoveryResult:
    """Recover the input on ``S_l`` without the keys ``lost``.

    The lost registers are untouched by the recovery unitary, so the pure
    encrypted state is used as a purification of the post-erasure state and
    the lost keys are traced out together with everything else.
    """
    lost_t = _normalize_lost(system, l, lost, sacrifice)
    u = loss_recovery_decryptor(system, l, lost_t)
    out = apply(u, loss_recovery_targets(system, l, lost_t), encrypted)
    sacrificed = {j: partial_trace(out, [system.signal(j)]) for j in lost_t}
    return LossRecoveryResult(partial_trace(out, [system.signal(l)]), sacrificed, out)


# -- qubit cross-checks --------------------------------------------------------


def pauli_alpha(n: int) -> dict[int, complex]:
    """Qubit phase coefficients ``alpha_mu`` for ``n`` pairs."""
    return {0: 1, 1: 1j, 2: -(1j ** (n + 1)), 3: 1j}


def pauli_encryptor(n: int) -> np.ndarray:
    """Qubit encryptor ``(1/2) sum_mu alpha_mu^-1 sigma_mu^{(x) (n+1)}``."""
    alpha = pauli_alpha(n)
    return sum(kron_all(*[PAULI[mu]] * (n + 1)) / alpha[mu] for mu in range(4)) / 2


def pauli_decryptor(n: int, l: int) -> np.ndarray:
    """Qubit decryptor ``sum_mu alpha_mu |phi_mu><phi_mu| (x) sigma_mu^T`` on ``S_l, N1..Nn``."""
    CloneSystem(2, n).signal(l)
    alpha = pauli_alpha(n)
    phi_plus = bell_pair(2).amplitudes
    others = [i for i in range(1, n + 1) if i != l]
    u = 0
    for mu in range(4):
        v = np.kron(PAULI[mu], np.eye(2)) @ phi_plus
        u = u + alpha[mu] * kron_all(np.outer(v, v.conj()), *[PAULI[mu].T] * len(others))
    order = [l, n + l] + [n + i for i in others]
    return _reorder_operator(u, [2] * (2 * n + 1), order)


@dataclass
class PauliReductionReport:
    n: int
    enc_difference: float
    dec_differences: dict[int, float]
    a_clone_fidelity: float

    @property
    def max_difference(self) -> float:
        return max([self.enc_difference, *self.dec_differences.values()])

    def passed(self, tol: float = 1e-12) -> bool:
        return self.max_difference <= tol

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "enc_difference": self.enc_difference,
            "dec_differences": {str(k): v for k, v in self.dec_differences.items()},
            "a_clone_fidelity": self.a_clone_fidelity,
        }


def decrypt_register_a(system: CloneSystem, encrypted: PureState) -> DensityOperator:
    """Undo the encryptor on ``A, N1..Nn`` and return the state of ``A``.

    At d = 2 with even n the transposed Paulis on the keys reproduce the
    encryptor exactly, so this returns the input state.
    """
    regs = [0] + [system.noise(i) for i in range(1, system.n + 1)]
    out = apply(build_encryptor(system).conj().T, regs, encrypted)
    return partial_trace(out, [0])


def pauli_reduction_check(n: int, psi: PureState | None = None) -> PauliReductionReport:
    """Compare the Weyl-form operators at d = 2 with the Pauli-form ones."""
    system = CloneSystem(2, n)
    enc_diff = max_entry_distance(build_encryptor(system), pauli_encryptor(n))
    dec_diffs = {l: max_entry_distance(build_decryptor(system, l), pauli_decryptor(n, l)) for l in range(1, n + 1)}
    if psi is None:
        psi = PureState.from_vector([np.sqrt(0.7), np.sqrt(0.3) * np.exp(0.4j)], [2])
    rho_a = decrypt_register_a(system, encrypt(system, psi))
    a_fid = float(np.real(np.vdot(psi.amplitudes, rho_a.matrix @ psi.amplitudes)))
    return PauliReductionReport(n, enc_diff, dec_diffs, a_fid)


@dataclass
class SwapWitnessReport:
    d: int
    operator: np.ndarray
    errors: dict[tuple[int, int], float]

    @property
    def max_error(self) -> float:
        return max(self.errors.values())

    def passed(self, tol: float = 1e-10) -> bool:
        return self.max_error <= tol


def swap_operator(d: int) -> np.ndarray:
    """``(1/d) sum_{a,b} W(a,b) (x) W(a,b)^dagger``."""
    s = np.zeros((d * d, d * d), dtype=complex)
    for lab in weyl_labels(d):
        w = weyl_displacement(d, *lab)
        s += np.kron(w, w.conj().T)
    return s / d


def swap_witness(d: int) -> SwapWitnessReport:
    """Check that the Weyl sum maps ``|i, j>`` to ``|j, i>`` for every basis pair."""
    check_dimension(d)
    s = swap_operator(d)
    errors = {}
    for i in range(d):
        for j in range(d):
            expected = np.zeros(d * d)
            expected[j * d + i] = 1
            errors[(i, j)] = float(np.abs(s[:, i * d + j] - expected).max())
    return SwapWitnessReport(d, s, errors)


def asymmetric_label(d: int) -> WeylLabel | None:
    """A label with ``W^T != +-W``, or None if every displacement is (anti)symmetric."""
    for lab in weyl_labels(d):
        w = weyl_displacement(d, *lab)
        if min(np.abs(w.T - w).max(), np.abs(w.T + w).max()) > 1e-10:
            return lab
    return None


# Closed-form expansion of the d = 2, n = 2 encrypted uniform state, in units
# of 1/(4 sqrt 2), keyed by the bit string over A S1 S2 N1 N2.
_QUBIT_REFERENCE = {
    **dict.fromkeys(["00000", "01111", "10101", "11010", "11001", "10110", "01100", "00011"], 1 - 1j),
    **dict.fromkeys(["00101", "01010", "10000", "11111"], 1 + 1j),
    **dict.fromkeys(["11100", "10011", "01001", "00110"], -1 - 1j),
}


def reference_encrypted_qubit_state() -> PureState:
    v = np.zeros(32, dtype=complex)
    for bits, c in _QUBIT_REFERENCE.items():
        v[int(bits, 2)] = c / (4 * np.sqrt(2))
    return PureState(CloneSystem(2, 2).layout, v)


def matches_reference_qubit_state(state: PureState, tol: float = 1e-12) -> bool:
    return state.dims == (2,) * 5 and phase_distance(state, reference_encrypted_qubit_state()) <= tol


def hiding_deviations(system: CloneSystem, encrypted: PureState) -> dict[str, float]:
    """``max_mixed_distance`` of every single-register marginal among ``A, S1..Sn``."""
    return {
        system.layout.label(r): max_mixed_distance(partial_trace(encrypted, [r]))
        for r in system.encrypted_registers
    }


def signal_purities(system: CloneSystem, state: PureState, skip: Iterable[int] = ()) -> dict[int, float]:
    skip = set(skip)
    return {
        i: partial_trace(state, [system.signal(i)]).purity()
        for i in range(1, system.n + 1)
        if i not in skip
    }
