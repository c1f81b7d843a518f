import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptlab.eigen import (
    MAX_DIM,
    EigenError,
    PairingReport,
    Spectrum,
    conjugate_pair_matching,
    eigendecompose,
    pt_real_form,
)
from ptlab.grid import make_grid
from ptlab.model import PotentialSpec, build_hamiltonian
from ptlab.opalg import LinearOp


def test_diagonal():
    s = eigendecompose(np.diag([1.0, 1j]))
    assert isinstance(s, Spectrum)
    np.testing.assert_allclose(s.values, [1j, 1.0], atol=1e-15)
    assert np.all(s.residuals <= 1e-15)


def test_swap_matrix():
    s = eigendecompose(LinearOp([[0, 1], [1, 0]]))
    np.testing.assert_allclose(s.values, [-1, 1], atol=1e-15)
    for pair in s.pairs:
        assert np.linalg.norm(pair.vector) == pytest.approx(1.0)


def test_free_particle_closed_form_and_brute_force():
    g = make_grid(2.0, 11)
    h = build_hamiltonian(PotentialSpec(mass=1.0), g)
    s = eigendecompose(h)
    k = np.arange(1, 12)
    expected = np.sort(np.cos(k * np.pi / 12) ** 2 / g.h**2 / 2)
    np.testing.assert_allclose(s.values.real, expected, atol=1e-11)
    np.testing.assert_allclose(s.values.real, np.linalg.eigvalsh(h.matrix), atol=1e-11)
    assert np.all(np.abs(s.values.imag) <= 1e-12)


def test_sorted_by_real_then_imag():
    s = eigendecompose(np.diag([2, 1 + 1j, 1 - 1j, 0]))
    assert list(s.values) == [0, 1 - 1j, 1 + 1j, 2]


def test_rejects_oversize_and_bad_input():
    with pytest.raises(ValueError):
        eigendecompose(np.zeros((MAX_DIM + 1, MAX_DIM + 1)))
    with pytest.raises(ValueError):
        eigendecompose(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        eigendecompose(np.array([[np.inf]]))
    with pytest.raises(ValueError):
        eigendecompose(np.eye(2), structure="banded")


def test_residual_certification_failure():
    # a Jordan block perturbed to machine size: eig returns nearly parallel
    # vectors, but with an impossible tolerance certification must fail
    with pytest.raises(EigenError) as info:
        eigendecompose(np.array([[1.0, 1.0], [1e-15, 1.0]]), tol=0.0)
    assert info.value.indices


def test_pt_real_form_is_real_for_pt_symmetric():
    g = make_grid(3.0, 31)
    h = build_hamiltonian(PotentialSpec(V="x^2 + i*x^3"), g).matrix
    u, w, defect = pt_real_form(h)
    assert defect <= 1e-14
    np.testing.assert_allclose(u.conj().T @ u, np.eye(31), atol=1e-15)


def test_pt_real_path_selected():
    g = make_grid(3.0, 31)
    h = build_hamiltonian(PotentialSpec(V="x^2 + i*x^3"), g)
    assert eigendecompose(h).method == "pt-real"
    assert eigendecompose(h, structure="general").method == "general"
    assert eigendecompose(build_hamiltonian(PotentialSpec(V="x"), make_grid(3.0, 31))).method == "general"
    assert eigendecompose(build_hamiltonian(PotentialSpec(V="i*x^2"), g)).method == "general"


def test_cubic_oscillator_pairs_completely():
    g = make_grid(8.0, 201)
    s = eigendecompose(build_hamiltonian(PotentialSpec(V="x^2 + i*x^3"), g))
    rep = conjugate_pair_matching(s)
    assert rep.unmatched == ()
    assert len(rep.real) + 2 * len(rep.pairs) == 201


class TestPairing:
    def test_real_and_pair(self):
        rep = conjugate_pair_matching([1.0, 2 + 1j, 2 - 1j])
        assert rep.real == (0,)
        assert rep.pairs == ((1, 2),)
        assert rep.unmatched == ()
        assert list(rep.partner(3)) == [-1, 2, 1]

    def test_unmatched(self):
        rep = conjugate_pair_matching([1j, 2 + 1j, 2 - 1j + 1e-6])
        assert rep.unmatched == (0, 1, 2)
        assert list(rep.partner(3)) == [-2, -2, -2]

    def test_tolerance_scaled(self):
        rep = conjugate_pair_matching([1 + 1e-7j], tol=1e-8, scale=1.0)
        assert rep.real == ()
        rep = conjugate_pair_matching([1 + 1e-7j], tol=1e-8, scale=100.0)
        assert rep.real == (0,)
        assert rep.tolerance == pytest.approx(1e-6)

    def test_greedy_prefers_closest(self):
        rep = conjugate_pair_matching([1 + 1j, 1 - 1j, 1 - 1j + 1e-10], tol=1e-8)
        assert rep.pairs == ((0, 1),)
        assert rep.unmatched == (2,)

    def test_report_type(self):
        assert isinstance(conjugate_pair_matching([]), PairingReport)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=12))
def test_trace_and_residuals(seed, n):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    s = eigendecompose(m)
    assert abs(s.values.sum() - np.trace(m)) <= 1e-10 * max(1.0, np.abs(m).max()) * n
    for pair in s.pairs:
        r = np.linalg.norm(m @ pair.vector - pair.value * pair.vector)
        assert r == pytest.approx(pair.residual, abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=12))
def test_pt_symmetric_spectra_are_closed_under_conjugation(seed, n):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    m = (m + np.conj(m)[::-1, ::-1]) / 2
    s = eigendecompose(m)
    assert s.method == "pt-real"
    rep = conjugate_pair_matching(s)
    assert rep.unmatched == ()
