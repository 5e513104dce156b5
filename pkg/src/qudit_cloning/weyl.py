"""Weyl-Heisenberg displacement operators in dimension d.

Conventions::

    X|k> = |k+1 mod d>          Z|k> = omega^k |k>
    omega = exp(2 pi i / d)     tau = exp(i pi (d+1) / d),  tau^2 = omega
    W(a, b) = tau^(a b) X^a Z^b

``tau`` has order ``2d`` when ``d`` is even, so the phase ``tau^(ab)`` depends
on the integer representatives of ``a`` and ``b``, not only on their residues.
:func:`weyl_displacement` therefore takes plain integers and evaluates the
formula literally; the transpose/dagger/composition identities then hold
without extra phases.  When labels are reduced to ``0 <= a, b < d`` (as in
:class:`WeylLabel`) a sign ``+-1`` can appear for even ``d``; it is exposed by
:func:`reduction_sign` and the ``*_sign`` helpers.  For odd ``d`` all these
signs are ``+1``.

All matrices are numpy ``complex128`` arrays marked read-only, so cached
instances can be shared.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DimensionMismatchError, DimensionTooSmallError

DEFAULT_TOL = 1e-10


def check_dimension(d: int) -> int:
    if int(d) != d or d < 2:
        raise DimensionTooSmallError(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)


def _frozen(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class PhaseConstants:
    d: int
    omega: complex
    tau: complex


def phase_constants(d: int) -> PhaseConstants:
    d = check_dimension(d)
    return PhaseConstants(d, omega_power(d, 1), tau_power(d, 1))


def tau_power(d: int, k: int) -> complex:
    """``tau^k`` with the exponent reduced mod 2d before exponentiation."""
    k = int(k) % (2 * d)
    return complex(np.exp(1j * np.pi * (d + 1) * k / d))


def omega_power(d: int, k: int) -> complex:
    k = int(k) % d
    return complex(np.exp(2j * np.pi * k / d))


class WeylLabel(NamedTuple):
    """Residue pair ``(a, b)`` in Z_d x Z_d."""

    a: int
    b: int

    @classmethod
    def of(cls, d: int, a: int, b: int) -> "WeylLabel":
        return cls(int(a) % d, int(b) % d)


def weyl_labels(d: int) -> Iterator[WeylLabel]:
    """All d^2 labels in lexicographic order."""
    for a, b in itertools.product(range(d), repeat=2):
        yield WeylLabel(a, b)


@lru_cache(maxsize=None)
def shift_op(d: int) -> np.ndarray:
    d = check_dimension(d)
    x = np.zeros((d, d), dtype=complex)
    x[(np.arange(d) + 1) % d, np.arange(d)] = 1.0
    return _frozen(x)


@lru_cache(maxsize=None)
def clock_op(d: int) -> np.ndarray:
    d = check_dimension(d)
    return _frozen(np.diag([omega_power(d, k) for k in range(d)]))


@lru_cache(maxsize=None)
def _weyl_cached(d: int, a: int, b: int) -> np.ndarray:
    # a, b are representatives mod 2d; X and Z only see residues mod d.
    k = np.arange(d)
    m = np.zeros((d, d), dtype=complex)
    m[(k + a) % d, k] = np.exp(2j * np.pi * ((b * k) % d) / d)
    return _frozen(tau_power(d, a * b) * m)


def weyl_displacement(d: int, a: int, b: int) -> np.ndarray:
    """``W(a, b) = tau^(ab) X^a Z^b`` for integer ``a``, ``b``.

    A :class:`WeylLabel` can be unpacked directly: ``weyl_displacement(d, *label)``.
    """
    d = check_dimension(d)
    return _weyl_cached(d, int(a) % (2 * d), int(b) % (2 * d))


def reduction_sign(d: int, a: int, b: int) -> int:
    """Sign ``s`` with ``W(a, b) = s * W(a mod d, b mod d)``; always 1 for odd d."""
    # the exponent difference is a multiple of d and tau^d = (-1)^(d+1)
    multiple = (int(a) * int(b) - (int(a) % d) * (int(b) % d)) // d
    return -1 if (d + 1) * multiple % 2 else 1


def weyl_transpose(d: int, label: WeylLabel) -> WeylLabel:
    """Label of ``W(a, b)^T``, namely ``(-a, b)``.

    Exact up to :func:`transpose_sign`, which is 1 for odd d.
    """
    return WeylLabel.of(d, -label.a, label.b)


def transpose_sign(d: int, label: WeylLabel) -> int:
    return reduction_sign(d, -label.a, label.b)


def weyl_dagger(d: int, label: WeylLabel) -> WeylLabel:
    """Label of ``W(a, b)^dagger``, namely ``(-a, -b)``.

    Exact up to :func:`dagger_sign`, which is 1 for odd d.
    """
    return WeylLabel.of(d, -label.a, -label.b)


def dagger_sign(d: int, label: WeylLabel) -> int:
    return reduction_sign(d, -label.a, -label.b)


def composition_phase(d: int, first: WeylLabel, second: WeylLabel) -> complex:
    """Integer-label composition phase ``tau^(a'b - ab')``."""
    (a, b), (a2, b2) = first, second
    return tau_power(d, a2 * b - a * b2)


def compose(d: int, first: WeylLabel, second: WeylLabel) -> tuple[complex, WeylLabel]:
    """``W(first) W(second) = phase * W(label)`` with ``label`` reduced mod d."""
    (a, b), (a2, b2) = first, second
    phase = composition_phase(d, first, second) * reduction_sign(d, a + a2, b + b2)
    return phase, WeylLabel.of(d, a + a2, b + b2)


def hs_inner(A: np.ndarray, B: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product ``Tr[A^dagger B]``."""
    A, B = np.asarray(A), np.asarray(B)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"shapes {A.shape} and {B.shape} are not equal square")
    return complex(np.vdot(A, B))


def gram_matrix(d: int) -> np.ndarray:
    """d^2 x d^2 matrix of ``hs_inner`` between all displacement operators."""
    ops = [weyl_displacement(d, *lab) for lab in weyl_labels(d)]
    flat = np.array([op.reshape(-1) for op in ops])
    return flat.conj() @ flat.T


def kron_all(*ops: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def unitarity_defect(u: np.ndarray) -> float:
    """Max-entry norm of ``U U^dagger - I`` and ``U^dagger U - I``."""
    u = np.asarray(u)
    eye = np.eye(u.shape[0])
    return float(max(np.abs(u @ u.conj().T - eye).max(), np.abs(u.conj().T @ u - eye).max()))


def max_entry_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(np.asarray(a) - np.asarray(b)).max())
