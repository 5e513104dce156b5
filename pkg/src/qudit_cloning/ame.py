"""Absolutely maximally entangled (AME) states from encrypted cloning.

A pure state on ``m`` registers of dimension ``d`` is AME when every marginal on
``floor(m/2)`` registers equals ``I / d^floor(m/2)``; smaller marginals follow.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cloning import CloneSystem, build_encryptor, encrypt
from .errors import DimensionMismatchError, NonOrthonormalError, UnsupportedDimensionWarning
from .state import (
    DensityOperator,
    PureState,
    RegisterLayout,
    apply,
    bell_pair,
    fourier_state,
    max_mixed_distance,
    partial_trace,
    tensor,
    uniform_state,
)
from .weyl import DEFAULT_TOL, kron_all

AME6_ROLES = ("A1", "A2", "S1", "S2", "N1", "N2")


@dataclass
class AmeReport:
    m: int
    d: int
    tolerance: float
    marginals: list[tuple[tuple[int, ...], float]] = field(default_factory=list)

    @property
    def is_ame(self) -> bool:
        return all(dev <= self.tolerance for _, dev in self.marginals)

    @property
    def worst_offender(self) -> tuple[tuple[int, ...], float]:
        # first maximum in lexicographic order, so reports are deterministic
        return max(self.marginals, key=lambda item: item[1])

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "d": self.d,
            "tolerance": self.tolerance,
            "marginals": [{"subset": list(s), "deviation": dev} for s, dev in self.marginals],
            "is_ame": self.is_ame,
        }


def _common_dim(state: PureState) -> int:
    dims = set(state.dims)
    if len(dims) != 1:
        raise DimensionMismatchError(f"AME check needs equal local dimensions, got {state.dims}")
    return dims.pop()


def marginal_deviations(state: PureState, size: int) -> list[tuple[tuple[int, ...], float]]:
    return [
        (subset, max_mixed_distance(partial_trace(state, subset)))
        for subset in itertools.combinations(range(state.num_registers), size)
    ]


def verify_ame(state: PureState, tol: float = DEFAULT_TOL) -> AmeReport:
    """Check every ``floor(m/2)``-register marginal against the maximally mixed state."""
    d = _common_dim(state)
    m = state.num_registers
    return AmeReport(m, d, tol, marginal_deviations(state, m // 2))


def verify_ame_exhaustive(state: PureState, tol: float = DEFAULT_TOL) -> AmeReport:
    """Like :func:`verify_ame` but over every subset size ``1..floor(m/2)``."""
    d = _common_dim(state)
    m = state.num_registers
    marginals = []
    for size in range(1, m // 2 + 1):
        marginals += marginal_deviations(state, size)
    return AmeReport(m, d, tol, marginals)


def encrypted_ame5(d: int, psi: PureState | None = None) -> PureState:
    """Encrypted state of one input and two pairs; AME(5, d) for uniform input."""
    system = CloneSystem(d, 2)
    return encrypt(system, uniform_state(d) if psi is None else psi)


def encrypted_uniform_state(d: int, n: int) -> PureState:
    return encrypt(CloneSystem(d, n), uniform_state(d))


def counterexample_closed_form() -> np.ndarray:
    """``(I_8 + X (x) X (x) X) / 8``."""
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    return (np.eye(8) + kron_all(x, x, x)) / 8


def counterexample_marginal(d: int = 2) -> DensityOperator:
    """Marginal on ``A, S1, N1`` of the three-pair encrypted uniform state.

    Only at d = 2 is a closed form known (:func:`counterexample_closed_form`);
    other dimensions return the numerical marginal with an
    :class:`UnsupportedDimensionWarning`.
    """
    if d != 2:
        warnings.warn(
            f"no closed form for the three-pair marginal at d={d}; returning the numerical marginal",
            UnsupportedDimensionWarning,
            stacklevel=2,
        )
    system = CloneSystem(d, 3)
    state = encrypted_uniform_state(d, 3)
    return partial_trace(state, [0, system.signal(1), system.noise(1)])


def logical_codewords(d: int) -> list[PureState]:
    """``d`` orthonormal five-register codewords ``U_enc(f_m (x) Phi (x) Phi)``.

    ``f_m`` is the Fourier state with amplitudes ``omega^(m k) / sqrt d``; at
    d = 2 these are ``|+>`` and ``|->``.
    """
    return [encrypted_ame5(d, fourier_state(d, m)) for m in range(d)]


def codeword_gram(codewords: list[PureState]) -> np.ndarray:
    vecs = np.array([c.amplitudes for c in codewords])
    return vecs.conj() @ vecs.T


def ame6_from_codewords(codewords: list[PureState], tol: float = DEFAULT_TOL) -> PureState:
    """``(1/sqrt d) sum_m |m> (x) |codeword_m>`` on six registers."""
    d = len(codewords)
    if d < 2 or any(c.dims != (d,) * 5 for c in codewords):
        raise DimensionMismatchError("need d codewords, each on five registers of dimension d")
    defect = float(np.abs(codeword_gram(codewords) - np.eye(d)).max())
    if defect > tol:
        raise NonOrthonormalError(f"codeword Gram matrix deviates from identity by {defect:.3g}")
    v = sum(np.kron(np.eye(d)[m], codewords[m].amplitudes) for m in range(d)) / np.sqrt(d)
    return PureState(RegisterLayout.uniform(d, AME6_ROLES), v)


def partial_encrypted_ame6(d: int) -> PureState:
    """Bell pair ``A1 A2`` and two signal-noise pairs with only ``A2, S1, S2`` encrypted."""
    bells = tensor([bell_pair(d, ("A1", "A2")), bell_pair(d, ("S1", "N1")), bell_pair(d, ("S2", "N2"))])
    # A1 A2 S1 N1 S2 N2 -> A1 A2 S1 S2 N1 N2
    state = PureState(
        RegisterLayout.uniform(d, AME6_ROLES),
        bells.tensor().transpose([0, 1, 2, 4, 3, 5]).reshape(-1),
    )
    return apply(build_encryptor(CloneSystem(d, 2)), [1, 2, 3], state)


def local_unitary_between(source: PureState, target: PureState, register: int = 0) -> np.ndarray:
    """Unitary ``V`` on ``register`` with ``(V (x) I) source = target``.

    Assumes ``source`` is maximally entangled across ``register | rest``, so its
    cut matrix ``M`` satisfies ``M M^dagger = I/d`` and ``V = d * M' M^dagger``.
    Callers should check ``unitarity_defect(V)`` and the mapped state.
    """
    if source.dims != target.dims:
        raise DimensionMismatchError(f"dims {source.dims} and {target.dims} differ")
    d = source.dims[register]
    order = [register] + [i for i in range(source.num_registers) if i != register]
    m_src = source.tensor().transpose(order).reshape(d, -1)
    m_tgt = target.tensor().transpose(order).reshape(d, -1)
    return d * m_tgt @ m_src.conj().T
