"""Dense multi-qudit pure states, density operators and marginals.

Amplitudes are stored big-endian in layout order: the first register varies
slowest, so ``|r0 r1 ... r_{m-1}>`` sits at index ``sum r_i * prod(dims[i+1:])``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatchError,
    DimensionTooSmallError,
    InvalidTargetError,
    MalformedStateFileError,
    NormOutOfRangeError,
)
from .weyl import DEFAULT_TOL

RANK_TOL = 1e-8
FILE_NORM_TOL = 1e-6


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered registers with local dimensions and role labels.

    A role of ``None`` marks a generic register; only named roles must be unique.
    """

    dims: tuple[int, ...]
    roles: tuple[str | None, ...]

    def __post_init__(self):
        if len(self.dims) != len(self.roles):
            raise DimensionMismatchError("dims and roles differ in length")
        if not self.dims:
            raise InvalidTargetError("layout needs at least one register")
        for d in self.dims:
            if d < 2:
                raise DimensionTooSmallError(f"local dimension {d} < 2")
        named = [r for r in self.roles if r is not None]
        if len(set(named)) != len(named):
            raise InvalidTargetError(f"duplicate role labels in {self.roles}")

    @classmethod
    def uniform(cls, d: int, roles: Sequence[str | None]) -> "RegisterLayout":
        return cls(tuple([int(d)] * len(roles)), tuple(roles))

    @classmethod
    def generic(cls, dims: Sequence[int]) -> "RegisterLayout":
        return cls(tuple(int(x) for x in dims), (None,) * len(dims))

    def __len__(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def index(self, register: int | str) -> int:
        """Resolve a register given by position or role label."""
        if isinstance(register, str):
            try:
                return self.roles.index(register)
            except ValueError:
                raise InvalidTargetError(f"no register with role {register!r}") from None
        i = int(register)
        if not 0 <= i < len(self.dims):
            raise InvalidTargetError(f"register index {i} out of range 0..{len(self.dims) - 1}")
        return i

    def indices(self, registers: Iterable[int | str]) -> list[int]:
        out = [self.index(r) for r in registers]
        if len(set(out)) != len(out):
            raise InvalidTargetError(f"repeated registers in {list(registers)}")
        return out

    def subset(self, indices: Sequence[int]) -> "RegisterLayout":
        return RegisterLayout(tuple(self.dims[i] for i in indices), tuple(self.roles[i] for i in indices))

    def concat(self, other: "RegisterLayout") -> "RegisterLayout":
        return RegisterLayout(self.dims + other.dims, self.roles + other.roles)

    def with_roles(self, roles: Sequence[str | None]) -> "RegisterLayout":
        return RegisterLayout(self.dims, tuple(roles))

    def label(self, i: int) -> str:
        role = self.roles[i]
        return role if role is not None else f"q{i}"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    layout: RegisterLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _readonly(np.asarray(self.amplitudes).reshape(-1))
        if amps.size != self.layout.size:
            raise DimensionMismatchError(
                f"{amps.size} amplitudes for layout of size {self.layout.size}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vec, dims: Sequence[int], roles: Sequence[str | None] | None = None) -> "PureState":
        layout = RegisterLayout.generic(dims) if roles is None else RegisterLayout(tuple(dims), tuple(roles))
        return cls(layout, np.asarray(vec, dtype=complex))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.layout.dims

    @property
    def num_registers(self) -> int:
        return len(self.layout)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def relabel(self, roles: Sequence[str | None]) -> "PureState":
        return PureState(self.layout.with_roles(roles), self.amplitudes)

    def density(self) -> "DensityOperator":
        return DensityOperator(self.layout, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    layout: RegisterLayout
    matrix: np.ndarray

    def __post_init__(self):
        m = _readonly(self.matrix)
        n = self.layout.size
        if m.shape != (n, n):
            raise DimensionMismatchError(f"matrix shape {m.shape} does not match layout size {n}")
        object.__setattr__(self, "matrix", m)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.layout.dims

    @property
    def dim(self) -> int:
        return self.layout.size

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def rank(self, tol: float = RANK_TOL) -> int:
        return int(np.sum(self.eigenvalues() > tol))

    def is_valid(self, tol: float = DEFAULT_TOL) -> bool:
        m = self.matrix
        return (
            np.abs(m - m.conj().T).max() <= tol
            and abs(np.trace(m) - 1) <= tol
            and self.eigenvalues().min() >= -tol
        )


State = Union[PureState, DensityOperator]


def basis_state(d: int, k: int, role: str | None = None) -> PureState:
    if d < 2:
        raise DimensionTooSmallError(f"dimension must be >= 2, got {d}")
    v = np.zeros(d, dtype=complex)
    v[k % d] = 1.0
    return PureState(RegisterLayout((d,), (role,)), v)


def product_state(d: int, digits: Sequence[int]) -> PureState:
    return tensor([basis_state(d, k) for k in digits])


def bell_pair(d: int, roles: tuple[str | None, str | None] = (None, None)) -> PureState:
    """``(1/sqrt d) sum_j |j, j>`` on two d-dimensional registers."""
    if d < 2:
        raise DimensionTooSmallError(f"dimension must be >= 2, got {d}")
    v = np.zeros(d * d, dtype=complex)
    v[np.arange(d) * (d + 1)] = 1 / np.sqrt(d)
    return PureState(RegisterLayout((d, d), roles), v)


def uniform_state(d: int, role: str | None = None) -> PureState:
    if d < 2:
        raise DimensionTooSmallError(f"dimension must be >= 2, got {d}")
    return PureState(RegisterLayout((d,), (role,)), np.full(d, 1 / np.sqrt(d), dtype=complex))


def fourier_state(d: int, m: int, role: str | None = None) -> PureState:
    """Amplitudes ``omega^(m k) / sqrt d``; ``m = 0`` is the uniform state."""
    if d < 2:
        raise DimensionTooSmallError(f"dimension must be >= 2, got {d}")
    k = np.arange(d)
    return PureState(RegisterLayout((d,), (role,)), np.exp(2j * np.pi * ((m * k) % d) / d) / np.sqrt(d))


def random_state(d: int, rng: np.random.Generator, num_registers: int = 1) -> PureState:
    """Haar-random pure state from normalized complex Gaussian amplitudes."""
    size = d**num_registers
    v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return PureState.from_vector(v / np.linalg.norm(v), [d] * num_registers)


def tensor(states: Sequence[PureState]) -> PureState:
    states = list(states)
    if not states:
        raise InvalidTargetError("tensor of an empty list")
    layout, amps = states[0].layout, states[0].amplitudes
    for s in states[1:]:
        layout = layout.concat(s.layout)
        amps = np.kron(amps, s.amplitudes)
    return PureState(layout, amps)


def permute_registers(state: PureState, order: Sequence[int]) -> PureState:
    """New state whose register ``i`` is old register ``order[i]``."""
    order = list(order)
    if sorted(order) != list(range(state.num_registers)):
        raise InvalidTargetError(f"{order} is not a permutation")
    amps = state.tensor().transpose(order).reshape(-1)
    return PureState(state.layout.subset(order), amps)


def _check_op(op: np.ndarray, dims: Sequence[int], targets: list[int]) -> np.ndarray:
    op = np.asarray(op)
    k = math.prod(dims[t] for t in targets)
    if op.shape != (k, k):
        raise DimensionMismatchError(f"operator shape {op.shape} does not act on registers {targets} (size {k})")
    return op


def _contract(t: np.ndarray, op: np.ndarray, axes: list[int]) -> np.ndarray:
    """Contract ``op`` (reshaped as out-axes + in-axes) into ``axes`` of ``t``."""
    k = len(axes)
    out = np.tensordot(op, t, axes=(list(range(k, 2 * k)), axes))
    # tensordot leaves the contracted axes first; move them back into place
    rest = [i for i in range(t.ndim) if i not in axes]
    return out.transpose(np.argsort(axes + rest))


def apply(op: np.ndarray, targets: Sequence[int | str], state: PureState) -> PureState:
    """Apply ``op`` to ``targets`` (in the given order) and identity elsewhere."""
    targets = state.layout.indices(targets)
    if not targets:
        raise InvalidTargetError("no target registers")
    dims = state.dims
    op = _check_op(op, dims, targets).reshape([dims[i] for i in targets] * 2)
    return PureState(state.layout, _contract(state.tensor(), op, targets).reshape(-1))


def apply_to_density(op: np.ndarray, targets: Sequence[int | str], rho: DensityOperator) -> DensityOperator:
    """``(op x I) rho (op x I)^dagger`` on the given registers."""
    targets = rho.layout.indices(targets)
    if not targets:
        raise InvalidTargetError("no target registers")
    dims = rho.dims
    m = len(dims)
    op = _check_op(op, dims, targets).reshape([dims[i] for i in targets] * 2)
    r = _contract(rho.matrix.reshape(list(dims) * 2), op, targets)
    r = _contract(r, op.conj(), [m + i for i in targets])
    return DensityOperator(rho.layout, r.reshape(rho.dim, rho.dim))


def _keep_indices(layout: RegisterLayout, keep: Iterable[int | str]) -> list[int]:
    keep = sorted(layout.indices(keep))
    if not keep or len(keep) == len(layout):
        raise InvalidTargetError(f"keep set {keep} must be a proper non-empty subset")
    return keep


def _hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def partial_trace(state: State, keep: Iterable[int | str]) -> DensityOperator:
    """Reduced density operator on ``keep`` (returned in layout order)."""
    keep = _keep_indices(state.layout, keep)
    dims = state.dims
    rest = [i for i in range(len(dims)) if i not in keep]
    kdim = math.prod(dims[i] for i in keep)
    if isinstance(state, PureState):
        mat = state.tensor().transpose(keep + rest).reshape(kdim, -1)
        rho = mat @ mat.conj().T
    else:
        m = len(dims)
        r = state.matrix.reshape(list(dims) * 2)
        letters = [chr(ord("a") + i) for i in range(2 * m)]
        for i in rest:
            letters[m + i] = letters[i]
        out = [letters[i] for i in keep] + [letters[m + i] for i in keep]
        rho = np.einsum("".join(letters) + "->" + "".join(out), r).reshape(kdim, kdim)
    return DensityOperator(state.layout.subset(keep), _hermitize(rho))


def max_mixed_distance(rho: DensityOperator) -> float:
    """Max-entry norm of ``rho - I / dim``."""
    return float(np.abs(rho.matrix - np.eye(rho.dim) / rho.dim).max())


def schmidt_values(state: PureState, keep: Iterable[int | str]) -> np.ndarray:
    keep = _keep_indices(state.layout, keep)
    rest = [i for i in range(state.num_registers) if i not in keep]
    kdim = math.prod(state.dims[i] for i in keep)
    mat = state.tensor().transpose(keep + rest).reshape(kdim, -1)
    return np.linalg.svd(mat, compute_uv=False)


def schmidt_rank(state: PureState, keep: Iterable[int | str], tol: float = RANK_TOL) -> int:
    """Number of singular values above ``tol`` across the cut ``keep | rest``."""
    return int(np.sum(schmidt_values(state, keep) > tol))


def fidelity(rho: DensityOperator, target: PureState) -> float:
    """``<target| rho |target>``."""
    if rho.dim != target.layout.size:
        raise DimensionMismatchError(f"rho has dim {rho.dim}, target has {target.layout.size}")
    v = target.amplitudes
    return float(np.real(np.vdot(v, rho.matrix @ v)))


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """``||rho - sigma||_1 / 2``."""
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(f"dims {rho.dim} and {sigma.dim} differ")
    return float(np.abs(np.linalg.eigvalsh(rho.matrix - sigma.matrix)).sum() / 2)


def canonical_phase(vec: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate the global phase so the first non-negligible amplitude is positive real."""
    vec = np.asarray(vec, dtype=complex)
    nz = np.flatnonzero(np.abs(vec) > tol)
    if nz.size == 0:
        return vec.copy()
    first = vec[nz[0]]
    return vec * (abs(first) / first)


def phase_distance(a: PureState | np.ndarray, b: PureState | np.ndarray) -> float:
    """Max amplitude error between two vectors after fixing the global phase."""
    va = a.amplitudes if isinstance(a, PureState) else np.asarray(a)
    vb = b.amplitudes if isinstance(b, PureState) else np.asarray(b)
    if va.shape != vb.shape:
        raise DimensionMismatchError(f"shapes {va.shape} and {vb.shape} differ")
    return float(np.abs(canonical_phase(va) - canonical_phase(vb)).max())


# -- state files ---------------------------------------------------------------


def state_to_dict(state: PureState) -> dict:
    return {
        "dims": list(state.dims),
        "roles": [state.layout.label(i) for i in range(state.num_registers)],
        "amplitudes": [[float(z.real), float(z.imag)] for z in state.amplitudes],
    }


def state_from_dict(doc) -> PureState:
    try:
        dims = [int(x) for x in doc["dims"]]
        roles = [str(r) for r in doc["roles"]]
        amps = np.array([complex(float(re), float(im)) for re, im in doc["amplitudes"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedStateFileError(f"malformed state document: {exc}") from exc
    if len(roles) != len(dims):
        raise MalformedStateFileError("'dims' and 'roles' differ in length")
    if amps.size != math.prod(dims):
        raise MalformedStateFileError(f"{amps.size} amplitudes for dims {dims}")
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1) >= FILE_NORM_TOL:
        raise NormOutOfRangeError(f"state norm {norm!r} deviates from 1 by >= {FILE_NORM_TOL}")
    try:
        layout = RegisterLayout(tuple(dims), tuple(roles))
    except (DimensionTooSmallError, InvalidTargetError) as exc:
        raise MalformedStateFileError(str(exc)) from exc
    return PureState(layout, amps / norm)


def save_state(path: str | Path, state: PureState) -> None:
    # json writes floats with repr(), which round-trips doubles exactly
    Path(path).write_text(json.dumps(state_to_dict(state)) + "\n")


def load_state(path: str | Path) -> PureState:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedStateFileError(f"{path}: not valid JSON ({exc})") from exc
    return state_from_dict(doc)
