import itertools
import warnings

import numpy as np
import pytest

import reference_impl as ref
from qudit_cloning.ame import (
    AME6_ROLES,
    ame6_from_codewords,
    codeword_gram,
    counterexample_closed_form,
    counterexample_marginal,
    encrypted_ame5,
    encrypted_uniform_state,
    local_unitary_between,
    logical_codewords,
    partial_encrypted_ame6,
    verify_ame,
    verify_ame_exhaustive,
)
from qudit_cloning.errors import DimensionMismatchError, NonOrthonormalError, UnsupportedDimensionWarning
from qudit_cloning.state import (
    PureState,
    apply,
    basis_state,
    max_mixed_distance,
    partial_trace,
    phase_distance,
    random_state,
    schmidt_rank,
    tensor,
)
from qudit_cloning.weyl import unitarity_defect


def ghz(d, m):
    v = np.zeros(d**m, dtype=complex)
    for k in range(d):
        v[sum(k * d**i for i in range(m))] = 1 / np.sqrt(d)
    return PureState.from_vector(v, [d] * m)


def haar_unitary(d, rng):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_ghz3_is_ame():
    report = verify_ame(ghz(2, 3))
    assert report.is_ame and len(report.marginals) == 3
    # both single-qubit marginals checked by hand
    for k in range(3):
        assert np.abs(ref.reduced(ghz(2, 3).amplitudes, [2, 2, 2], [k]) - np.eye(2) / 2).max() < 1e-12


def test_product_state_is_not_ame():
    s = tensor([basis_state(2, 0)] * 4)
    report = verify_ame(s)
    assert not report.is_ame
    assert abs(report.worst_offender[1] - 0.75) < 1e-12


def test_report_shape_and_serialization():
    report = verify_ame(encrypted_ame5(2))
    doc = report.to_dict()
    assert list(doc) == ["m", "d", "tolerance", "marginals", "is_ame"]
    assert doc["m"] == 5 and doc["d"] == 2 and doc["is_ame"] is True
    subsets = [tuple(e["subset"]) for e in doc["marginals"]]
    assert subsets == list(itertools.combinations(range(5), 2))


def test_mixed_dimensions_rejected():
    s = tensor([basis_state(2, 0), basis_state(3, 0)])
    with pytest.raises(DimensionMismatchError):
        verify_ame(s)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_encrypted_ame5(d):
    report = verify_ame(encrypted_ame5(d))
    assert report.is_ame and len(report.marginals) == 10
    assert report.worst_offender[1] < 1e-10


def test_encrypted_ame5_qubit_expansion():
    # same state as the 16-term closed-form expansion, up to global phase
    v = np.zeros(32, dtype=complex)
    c = 1 / (4 * np.sqrt(2))
    for bits in ["00000", "01111", "10101", "11010", "11001", "10110", "01100", "00011"]:
        v[int(bits, 2)] = (1 - 1j) * c
    for bits in ["00101", "01010", "10000", "11111"]:
        v[int(bits, 2)] = (1 + 1j) * c
    for bits in ["11100", "10011", "01001", "00110"]:
        v[int(bits, 2)] = (-1 - 1j) * c
    assert phase_distance(encrypted_ame5(2), v) < 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_any_input_gives_ame5_marginals(d):
    rng = np.random.default_rng(d)
    inputs = [PureState.from_vector([np.sqrt(0.8), np.sqrt(0.2)], [2])] if d == 2 else []
    inputs += [basis_state(d, 0)] + [random_state(d, rng) for _ in range(3)]
    for psi in inputs:
        assert verify_ame(encrypted_ame5(d, psi)).worst_offender[1] < 1e-10


@pytest.mark.parametrize("d", [2, 3])
def test_input_is_steered_from_six_register_state(d):
    # conditioning A1 of the partial construction on conj(psi) yields the
    # five-register encrypted state of psi, so its pair marginals inherit
    # the three-register marginals of the six-register AME state
    rng = np.random.default_rng(10 + d)
    psi = random_state(d, rng)
    six = partial_encrypted_ame6(d)
    cond = np.sqrt(d) * psi.amplitudes @ six.tensor().reshape(d, -1)
    assert phase_distance(cond, encrypted_ame5(d, psi)) < 1e-12


def test_three_pairs_not_ame():
    report = verify_ame(encrypted_uniform_state(2, 3))
    assert not report.is_ame
    assert abs(report.worst_offender[1] - 0.125) < 1e-12


def test_counterexample_marginal_qubits():
    rho = counterexample_marginal()
    assert np.abs(rho.matrix - counterexample_closed_form()).max() < 1e-10
    assert np.abs(np.sort(rho.eigenvalues()) - [0, 0, 0, 0, 0.25, 0.25, 0.25, 0.25]).max() < 1e-8
    assert abs(max_mixed_distance(rho) - 0.125) < 1e-12
    assert abs(rho.trace() - 1) < 1e-12


def test_counterexample_other_dimension_warns():
    with pytest.warns(UnsupportedDimensionWarning):
        rho = counterexample_marginal(3)
    assert rho.dims == (3, 3, 3) and abs(rho.trace() - 1) < 1e-12


def test_counterexample_qubits_does_not_warn():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        counterexample_marginal(2)


def test_three_pair_schmidt_ranks():
    s = encrypted_uniform_state(2, 3)
    ranks = {cut: schmidt_rank(s, cut) for cut in itertools.combinations(range(7), 3)}
    assert sorted(c for c, r in ranks.items() if r <= 4) == [(0, 1, 4), (0, 2, 5), (0, 3, 6)]
    assert all(r == 8 for c, r in ranks.items() if r > 4)
    # the keys never meet the encryptor, so their joint marginal stays I/8
    assert max_mixed_distance(partial_trace(s, [4, 5, 6])) < 1e-12
    for cut, r in ranks.items():
        assert partial_trace(s, cut).rank() == r


@pytest.mark.parametrize("d", [2, 3])
def test_logical_codewords(d):
    cw = logical_codewords(d)
    assert len(cw) == d
    assert np.abs(codeword_gram(cw) - np.eye(d)).max() < 1e-10
    assert all(verify_ame(c).is_ame for c in cw)


def test_qubit_codewords_match_expansions():
    zero, one = logical_codewords(2)
    assert phase_distance(zero, encrypted_ame5(2)) < 1e-12
    v = np.zeros(32, dtype=complex)
    c = 1 / (4 * np.sqrt(2))
    for bits in ["00000", "01111", "11001", "10110"]:
        v[int(bits, 2)] = (1 - 1j) * c
    for bits in ["00101", "00110", "01001", "01010"]:
        v[int(bits, 2)] = (1 + 1j) * c
    for bits in ["10000", "10011", "11100", "11111"]:
        v[int(bits, 2)] = (-1 - 1j) * c
    for bits in ["00011", "01100", "10101", "11010"]:
        v[int(bits, 2)] = -(1 - 1j) * c
    assert phase_distance(one, v) < 1e-12
    assert abs(np.vdot(zero.amplitudes, one.amplitudes)) < 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_ame6_constructions(d):
    for state in (ame6_from_codewords(logical_codewords(d)), partial_encrypted_ame6(d)):
        assert state.layout.roles == AME6_ROLES
        report = verify_ame(state)
        assert report.is_ame and len(report.marginals) == 20
        for k in range(6):
            assert max_mixed_distance(partial_trace(state, [k])) < 1e-10


def test_ame6_rejects_non_orthonormal_codewords():
    cw = logical_codewords(2)
    with pytest.raises(NonOrthonormalError):
        ame6_from_codewords([cw[0], cw[0]])
    with pytest.raises(DimensionMismatchError):
        ame6_from_codewords(cw[:1])


@pytest.mark.parametrize("d", [2, 3])
def test_constructions_related_by_local_unitary(d):
    a, b = ame6_from_codewords(logical_codewords(d)), partial_encrypted_ame6(d)
    v = local_unitary_between(a, b, register=0)
    assert unitarity_defect(v) < 1e-10
    assert np.abs(apply(v, [0], a).amplitudes - b.amplitudes).max() < 1e-10
    # it is the inverse discrete Fourier transform on A1
    omega = np.exp(2j * np.pi / d)
    inv_dft = np.array([[omega ** (-j * k) for k in range(d)] for j in range(d)]) / np.sqrt(d)
    assert np.abs(v - inv_dft).max() < 1e-10


@pytest.mark.parametrize("d", [2, 3])
def test_dealer_projections_of_partial_construction_are_ame5(d):
    s = partial_encrypted_ame6(d)
    t = s.tensor().reshape(d, -1)
    for i in range(d):
        proj = PureState.from_vector(np.sqrt(d) * t[i], [d] * 5)
        assert abs(proj.norm() - 1) < 1e-12
        assert verify_ame(proj).is_ame


STATES = {
    "ghz3": lambda: ghz(2, 3),
    "ame5_d2": lambda: encrypted_ame5(2),
    "ame5_d3": lambda: encrypted_ame5(3),
    "seven_qubits": lambda: encrypted_uniform_state(2, 3),
    "non_uniform": lambda: encrypted_ame5(2, PureState.from_vector([np.sqrt(0.8), np.sqrt(0.2)], [2])),
    "ame6_codeword": lambda: ame6_from_codewords(logical_codewords(2)),
    "ame6_partial_d3": lambda: partial_encrypted_ame6(3),
    "random4": lambda: random_state(2, np.random.default_rng(0), 4),
}


@pytest.mark.parametrize("name", sorted(STATES))
def test_shortcut_agrees_with_exhaustive(name):
    s = STATES[name]()
    assert verify_ame(s).is_ame == verify_ame_exhaustive(s).is_ame


@pytest.mark.parametrize("seed", range(4))
def test_local_unitaries_preserve_ame(seed):
    rng = np.random.default_rng(seed)
    d = 2 + seed % 2
    s = encrypted_ame5(d)
    for k in range(5):
        s = apply(haar_unitary(d, rng), [k], s)
    assert verify_ame(s).is_ame
