import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import C3, haar_unitary, ray
from tpspace import (
    EmptyKernelError,
    PureStateSpace,
    Ray,
    StructuralError,
    TransitionKernel,
    check_tps_axioms,
    kernel_from_points,
    sectors,
    transition_probability,
)


def test_orthogonal_rays_have_zero_probability():
    assert transition_probability(ray(1, 0), ray(0, 1)) == 0.0


def test_ray_with_itself_is_one(rng):
    r = C3.random_ray(rng)
    assert transition_probability(r, r) == pytest.approx(1.0, abs=1e-15)


def test_half_overlap():
    s = 1 / np.sqrt(2)
    assert transition_probability(ray(1, 0), ray(s, s)) == pytest.approx(0.5, abs=1e-15)


def test_cross_sector_is_zero():
    assert transition_probability(ray(1, 0, sector=0), ray(1, 0, sector=1)) == 0.0


def test_phase_invariance(rng):
    a, b = C3.random_ray(rng), C3.random_ray(rng)
    b2 = Ray(0, np.exp(1.3j) * b.vector)
    assert transition_probability(a, b2) == pytest.approx(transition_probability(a, b), abs=1e-15)


def test_ray_rejects_non_unit_vector():
    with pytest.raises(StructuralError):
        Ray(0, np.array([1.0, 1.0]))


def test_rays_compare_projectively():
    assert ray(1, 1j) == Ray.from_vector(np.array([1j, -1.0]))


def test_space_validates_dimensions():
    with pytest.raises(StructuralError):
        PureStateSpace((2, 0))
    with pytest.raises(StructuralError):
        PureStateSpace((2,), hbar=(0.0,))
    with pytest.raises(StructuralError):
        C3.validate_ray(ray(1, 0))


def test_kernel_of_orthogonal_pair():
    sp = PureStateSpace((2,), points=[ray(1, 0), ray(0, 1)])
    np.testing.assert_array_equal(kernel_from_points(sp).p, np.eye(2))


def test_classical_kernel_is_identity():
    np.testing.assert_array_equal(kernel_from_points(PureStateSpace.classical(4)).p, np.eye(4))


def test_kernel_matches_pairwise_overlaps(rng):
    sp = PureStateSpace((2,))
    pts = [sp.random_ray(rng) for _ in range(3)]
    K = kernel_from_points(sp.with_points(pts))
    V = np.stack([p.vector for p in pts], axis=1)
    oracle = np.abs(V.conj().T @ V) ** 2
    np.testing.assert_allclose(K.p, oracle, atol=1e-14)
    np.testing.assert_array_equal(K.p, K.p.T)


def test_empty_kernel_is_an_error():
    with pytest.raises(EmptyKernelError):
        kernel_from_points(C3)
    with pytest.raises(EmptyKernelError):
        TransitionKernel(np.zeros((0, 0)))


def test_identity_kernel_passes_axioms():
    assert check_tps_axioms(TransitionKernel(np.eye(3))).passed


def test_asymmetric_kernel_fails_symmetry_and_orthogonality():
    p = np.eye(3)
    p[0, 1] = 0.3
    rep = check_tps_axioms(TransitionKernel(p))
    assert set(rep.failures) == {"symmetry", "orthogonality_symmetry"}
    assert rep["symmetry"].violation == pytest.approx(0.3)
    assert rep["orthogonality_symmetry"].violation == pytest.approx(0.3)


def test_out_of_range_kernel_fails_range():
    p = np.eye(2)
    p[0, 1] = p[1, 0] = 1.2
    assert "range" in check_tps_axioms(TransitionKernel(p)).failures


def test_duplicate_points_satisfy_identity_axiom(rng):
    r = C3.random_ray(rng)
    K = kernel_from_points(C3.with_points([r, r, C3.random_ray(rng)]))
    assert check_tps_axioms(K).passed


def test_distinct_rows_with_unit_entry_fail_identity():
    p = np.array([[1.0, 1.0, 0.2], [1.0, 1.0, 0.5], [0.2, 0.5, 1.0]])
    assert "identity" in check_tps_axioms(TransitionKernel(p)).failures


def test_random_kernel_passes(rng):
    K = kernel_from_points(C3.with_points([C3.random_ray(rng) for _ in range(5)]))
    rep = check_tps_axioms(K, tol=1e-12)
    assert rep.passed, rep.to_dict()


def test_sectors_of_identity_are_singletons():
    assert sectors(TransitionKernel(np.eye(4))) == [[0], [1], [2], [3]]


def test_generic_rays_form_one_sector(rng):
    K = kernel_from_points(C3.with_points([C3.random_ray(rng) for _ in range(4)]))
    assert sectors(K) == [[0, 1, 2, 3]]


def test_block_diagonal_kernel_has_two_sectors():
    p = np.eye(4)
    p[0, 2] = p[2, 0] = 0.4
    p[1, 3] = p[3, 1] = 0.7
    assert sectors(TransitionKernel(p)) == [[0, 2], [1, 3]]


def test_orthogonal_rays_share_a_sector_through_a_third(rng):
    s = 1 / np.sqrt(2)
    sp = PureStateSpace((2,), points=[ray(1, 0), ray(0, 1), ray(s, s)])
    assert sectors(kernel_from_points(sp)) == [[0, 1, 2]]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_kernels_from_rays_are_unitarily_invariant(d, n, seed):
    rng = np.random.default_rng(seed)
    sp = PureStateSpace((d,))
    pts = [sp.random_ray(rng) for _ in range(n)]
    U = haar_unitary(rng, d)
    moved = [Ray.from_vector(U @ p.vector) for p in pts]
    K1 = kernel_from_points(sp.with_points(pts))
    K2 = kernel_from_points(sp.with_points(moved))
    np.testing.assert_allclose(K1.p, K2.p, atol=1e-12)
    assert check_tps_axioms(K1).passed
