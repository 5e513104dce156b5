"""((3,5)) threshold quantum secret sharing from a six-register AME state.

The dealer register of an AME(6, d) state is projected onto ``|i>`` to give d
orthonormal five-register states ``Psi_i``; a secret ``sum_i a_i |i>`` is shared
as ``sum_i a_i Psi_i``.  Players are numbered ``1..5`` in layout order of the
non-dealer registers (``A2 S1 S2 N1 N2`` for the default source) and may also
be referred to by role name.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .ame import partial_encrypted_ame6, verify_ame
from .errors import (
    DegenerateBasisError,
    DimensionMismatchError,
    InvalidTargetError,
    NotAmeError,
    UnauthorizedSubsetError,
)
from .state import (
    DensityOperator,
    PureState,
    RegisterLayout,
    apply,
    basis_state,
    fourier_state,
    max_mixed_distance,
    partial_trace,
    trace_distance,
    fidelity,
)
from .weyl import DEFAULT_TOL, unitarity_defect

NUM_PLAYERS = 5
THRESHOLD = 3
RECOVERY_TOL = 1e-9


@dataclass(frozen=True)
class QssScheme:
    d: int
    players: RegisterLayout
    basis_states: tuple[np.ndarray, ...]
    dealer_role: str | None = None

    def player_index(self, player: int | str) -> int:
        """0-based register position of a player given as ``1..5`` or a role."""
        if isinstance(player, str):
            return self.players.index(player)
        if isinstance(player, bool) or int(player) != player or not 1 <= player <= NUM_PLAYERS:
            raise InvalidTargetError(f"player must be in 1..{NUM_PLAYERS} or a role name, got {player!r}")
        return int(player) - 1

    def normalize_subset(self, subset: Iterable[int | str]) -> tuple[int, ...]:
        """Sorted 1-based player numbers."""
        idx = [self.player_index(p) for p in subset]
        if not idx:
            raise InvalidTargetError("subset must be non-empty")
        if len(set(idx)) != len(idx):
            raise InvalidTargetError(f"repeated players in {list(subset)}")
        return tuple(sorted(i + 1 for i in idx))

    def gram(self) -> np.ndarray:
        vecs = np.array(self.basis_states)
        return vecs.conj() @ vecs.T


def build_scheme(
    source: PureState | None = None,
    dealer_index: int | str = 0,
    tol: float = DEFAULT_TOL,
    d: int | None = None,
) -> QssScheme:
    """Project the dealer register of an AME(6, d) ``source``.

    ``source`` defaults to :func:`partial_encrypted_ame6` at dimension ``d``.
    """
    if source is None:
        if d is None:
            raise InvalidTargetError("either source or d is required")
        source = partial_encrypted_ame6(d)
    if source.num_registers != NUM_PLAYERS + 1:
        raise DimensionMismatchError(f"source must have 6 registers, got {source.num_registers}")
    report = verify_ame(source, tol)
    if not report.is_ame:
        subset, dev = report.worst_offender
        raise NotAmeError(f"source is not AME: marginal {list(subset)} deviates by {dev:.3g}")
    if d is not None and d != report.d:
        raise DimensionMismatchError(f"d={d} but source has dimension {report.d}")
    d = report.d
    try:
        dealer = source.layout.index(dealer_index)
    except (InvalidTargetError, IndexError, ValueError) as exc:
        raise InvalidTargetError(f"bad dealer index {dealer_index!r}") from exc

    t = np.moveaxis(source.tensor(), dealer, 0).reshape(d, -1)
    basis = tuple(np.sqrt(d) * t[i] for i in range(d))
    keep = [i for i in range(source.num_registers) if i != dealer]
    players = source.layout.subset(keep)

    gram = np.array(basis).conj() @ np.array(basis).T
    defect = float(np.abs(gram - np.eye(d)).max())
    if defect > tol:
        raise DegenerateBasisError(f"projected states deviate from orthonormal by {defect:.3g}")
    for v in basis:
        v.setflags(write=False)
    return QssScheme(d, players, basis, source.layout.roles[dealer])


def encode_secret(scheme: QssScheme, secret: PureState) -> PureState:
    if secret.dims != (scheme.d,):
        raise DimensionMismatchError(f"secret must be one register of dimension {scheme.d}, got {secret.dims}")
    v = sum(a * psi for a, psi in zip(secret.amplitudes, scheme.basis_states))
    return PureState(scheme.players, v / np.linalg.norm(v))


def default_probes(d: int) -> list[PureState]:
    """Computational and Fourier secrets plus ``(|i> + |j>)/sqrt2`` and ``(|i> + i|j>)/sqrt2``."""
    probes = [basis_state(d, k) for k in range(d)]
    probes += [fourier_state(d, m) for m in range(d)]
    for i, j in itertools.combinations(range(d), 2):
        for phase in (1, 1j):
            v = np.zeros(d, dtype=complex)
            v[i], v[j] = 1, phase
            probes.append(PureState.from_vector(v / np.sqrt(2), [d]))
    return probes


def complete_to_unitary(rows: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Extend orthonormal rows (``k x N``) to an ``N x N`` unitary."""
    k, n = rows.shape
    if k == n:
        return rows
    _, s, vh = np.linalg.svd(rows)
    if s.min() < 1 - tol:
        raise DegenerateBasisError("rows are not orthonormal")
    return np.vstack([rows, vh[k:]])


def _split(scheme: QssScheme, subset: Sequence[int | str]) -> tuple[list[int], list[int]]:
    players = scheme.normalize_subset(subset)
    if len(players) < THRESHOLD:
        raise UnauthorizedSubsetError(f"subset {list(players)} has fewer than {THRESHOLD} players")
    active = [p - 1 for p in players[-THRESHOLD:]]
    rest = [i for i in range(NUM_PLAYERS) if i not in active]
    return active, rest


def recovery_unitary(scheme: QssScheme, subset: Sequence[int | str], tol: float = DEFAULT_TOL) -> tuple[np.ndarray, list[int]]:
    """Unitary on three players of ``subset`` mapping ``Psi(i, k)`` to ``|k1 k2 i>``.

    ``Psi(i, k) = d <k|_B Psi_i`` with ``B`` the two other players.  Returns the
    unitary and the registers it acts on; the secret is left on the last one.
    """
    d = scheme.d
    active, rest = _split(scheme, subset)
    order = rest + active
    rows = np.zeros((d ** THRESHOLD, d ** THRESHOLD), dtype=complex)
    for i, psi in enumerate(scheme.basis_states):
        t = psi.reshape((d,) * NUM_PLAYERS).transpose(order).reshape(d ** len(rest), -1)
        for k in range(d ** len(rest)):
            rows[k * d + i] = d * t[k].conj()
    defect = float(np.abs(rows @ rows.conj().T - np.eye(len(rows))).max())
    if defect > tol:
        raise DegenerateBasisError(f"recovery vectors deviate from orthonormal by {defect:.3g}")
    return complete_to_unitary(rows, tol), active


def recover_secret(
    scheme: QssScheme,
    encoded: PureState,
    subset: Sequence[int | str],
    secret: PureState | None = None,
) -> tuple[DensityOperator, float | None]:
    """Apply the recovery unitary and return the reduced state of the output player.

    The fidelity with ``secret`` is reported when it is given.
    """
    u, active = recovery_unitary(scheme, subset)
    out = apply(u, active, encoded)
    rho = partial_trace(out, [active[-1]])
    return rho, (None if secret is None else fidelity(rho, secret))


@dataclass
class AccessVerdict:
    subset: tuple[int, ...]
    authorized: bool
    evidence: float
    marginal_deviation: float | None = None

    def to_dict(self) -> dict:
        return {"subset": list(self.subset), "authorized": self.authorized, "evidence": self.evidence}


def _leak(scheme: QssScheme, encoded: list[PureState], players: Sequence[int]) -> float:
    keep = [p - 1 for p in players]
    if not keep:
        return 0.0
    if len(keep) == NUM_PLAYERS:
        reduced = [s.density() for s in encoded]
    else:
        reduced = [partial_trace(s, keep) for s in encoded]
    return max(
        (trace_distance(r1, r2) for r1, r2 in itertools.combinations(reduced, 2)),
        default=0.0,
    )


def adjudicate(
    scheme: QssScheme,
    subset: Iterable[int | str],
    probes: list[PureState] | None = None,
    tol: float = DEFAULT_TOL,
) -> AccessVerdict:
    """Decide whether ``subset`` is authorized, from the probe secrets alone.

    Unauthorized: reduced states on the subset coincide for all probes, and the
    evidence is the largest pairwise trace distance.  Authorized: the
    complement learns nothing, recovery reaches fidelity ``1 - 1e-9`` on every
    probe, and the evidence is the smallest such fidelity.  A subset that leaks
    without allowing recovery is reported unauthorized with its leak.
    """
    players = scheme.normalize_subset(subset)
    probes = default_probes(scheme.d) if probes is None else probes
    encoded = [encode_secret(scheme, p) for p in probes]

    leak = _leak(scheme, encoded, players)
    if leak <= tol:
        marginal = max_mixed_distance(partial_trace(encoded[0], [p - 1 for p in players]))
        return AccessVerdict(players, False, leak, marginal)

    complement = [p for p in range(1, NUM_PLAYERS + 1) if p not in players]
    if len(players) < THRESHOLD or _leak(scheme, encoded, complement) > tol:
        return AccessVerdict(players, False, leak)
    worst = min(recover_secret(scheme, e, players, p)[1] for e, p in zip(encoded, probes))
    return AccessVerdict(players, worst >= 1 - RECOVERY_TOL, worst)


def all_subsets() -> list[tuple[int, ...]]:
    """All 30 proper non-empty subsets of the five players, by size then lexicographically."""
    return [
        s for size in range(1, NUM_PLAYERS) for s in itertools.combinations(range(1, NUM_PLAYERS + 1), size)
    ]


def access_table(scheme: QssScheme, probes: list[PureState] | None = None, tol: float = DEFAULT_TOL) -> list[AccessVerdict]:
    return [adjudicate(scheme, s, probes, tol) for s in all_subsets()]


def is_threshold_structure(verdicts: Iterable[AccessVerdict]) -> bool:
    return all(v.authorized == (len(v.subset) >= THRESHOLD) for v in verdicts)


def recovery_is_unitary(scheme: QssScheme, subset: Sequence[int | str], tol: float = DEFAULT_TOL) -> bool:
    return unitarity_defect(recovery_unitary(scheme, subset)[0]) <= tol
