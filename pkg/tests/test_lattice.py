import numpy as np
import pytest

from conftest import C3, haar_unitary, ray
from tpspace import PreconditionError, PureStateSpace, SubspaceElement, basis_check, join, meet
from tpspace import orthoplement, sasaki_project, transition_probability
from tpspace.lattice import (
    bloch_vector,
    check_covering,
    check_lattice_suite,
    check_orthomodularity,
    check_sasaki_factorization,
    check_two_sphere,
    distance,
    greedy_orthogonal_family,
    leq,
    orthoclosure,
    random_element,
)
from tpspace.spectral import p_Q

C4 = PureStateSpace((4,))
C5 = PureStateSpace((5,))


def span(space, *cols, sector=0):
    spans = [None] * len(space.sectors)
    spans[sector] = np.stack([np.asarray(c, dtype=complex) for c in cols], axis=1)
    return SubspaceElement.from_spans(space, spans)


def e(i, d=3):
    return np.eye(d)[i]


def test_orthoplement_of_a_line():
    Q = span(C3, e(0))
    assert distance(orthoplement(Q), span(C3, e(1), e(2))) < 1e-14


def test_orthoplement_of_zero_is_unit():
    assert distance(orthoplement(SubspaceElement.zero(C3)), SubspaceElement.unit(C3)) == 0.0


def test_projections_of_complements_sum_to_identity(rng):
    Q = random_element(C4, rng, sector_dims=[2])
    S = Q.projector(0) + orthoplement(Q).projector(0)
    np.testing.assert_allclose(S, np.eye(4), atol=1e-13)
    assert Q.dim + orthoplement(Q).dim == 4


def test_orthoclosure_of_two_basis_rays():
    Q = orthoclosure([ray(1, 0, 0), ray(0, 1, 0)], C3)
    assert Q.dim == 2 and distance(Q, span(C3, e(0), e(1))) < 1e-14


def test_orthoclosure_of_a_ray_is_its_atom(rng):
    r = C3.random_ray(rng)
    Q = orthoclosure([r], C3)
    assert Q.is_atom and Q.contains(r)
    assert distance(orthoclosure(Q.atoms(), C3), Q) < 1e-13


def test_generic_pair_spans_a_plane(rng):
    a, b = C3.random_ray(rng), C3.random_ray(rng)
    Q = orthoclosure([a, b], C3)
    assert Q.dim == 2
    assert np.linalg.matrix_rank(np.stack([a.vector, b.vector])) == 2


def test_meet_and_join_of_coordinate_planes():
    Q = span(C3, e(0), e(1))
    R = span(C3, e(1), e(2))
    assert distance(meet(Q, R), span(C3, e(1))) < 1e-12
    assert distance(join(SubspaceElement.atom(C3, ray(1, 0, 0)), SubspaceElement.atom(C3, ray(0, 1, 0))), Q) < 1e-14


def test_dimension_formula_in_c5(rng):
    for _ in range(20):
        Q = random_element(C5, rng, sector_dims=[int(rng.integers(0, 6))])
        R = random_element(C5, rng, sector_dims=[int(rng.integers(0, 6))])
        assert join(Q, R).dim == Q.dim + R.dim - meet(Q, R).dim


def test_sasaki_projection_onto_plane():
    s = 1 / np.sqrt(2)
    phi = sasaki_project(ray(s, 0, s), span(C3, e(0), e(1)))
    assert phi == ray(1, 0, 0)


def test_sasaki_projection_fixes_members(rng):
    Q = random_element(C3, rng, sector_dims=[2])
    r = Q.random_ray(rng)
    assert transition_probability(sasaki_project(r, Q), r) == pytest.approx(1.0, abs=1e-12)


def test_sasaki_factorization_random(rng):
    Q = random_element(C4, rng, sector_dims=[2])
    sigma = C4.random_ray(rng)
    assert check_sasaki_factorization(sigma, Q, 20, rng).passed


def test_orthomodularity_trivial_pairs():
    Q = span(C3, e(0))
    R = span(C3, e(0), e(1))
    assert check_orthomodularity(C3, pairs=[(Q, R), (R, R)]).passed


def test_orthomodularity_random_c5(rng):
    rep = check_orthomodularity(C5, 100, rng)
    assert rep.passed and rep.max_violation < 1e-9


def test_covering_with_coordinate_data():
    rep = check_covering(ray(0, 0, 1, 0), span(C4, e(0, 4), e(1, 4)))
    assert rep.passed
    assert rep.meta["dim_join"] == 3 and rep.meta["dim_q"] == 2


def test_covering_generic(rng):
    Q = random_element(C4, rng, sector_dims=[2])
    rep = check_covering(C4.random_ray(rng), Q)
    assert rep.passed and rep.meta["dim_meet"] == 1


def test_covering_rejects_member(rng):
    Q = random_element(C4, rng, sector_dims=[2])
    with pytest.raises(PreconditionError):
        check_covering(Q.random_ray(rng), Q)


def test_bloch_vector_of_basis_states():
    np.testing.assert_allclose(bloch_vector(np.array([1, 0])), [1, 0, 0])
    np.testing.assert_allclose(bloch_vector(np.array([0, 1])), [-1, 0, 0])


def test_two_sphere_antipodal_and_equal(rng):
    rho, sigma = C4.random_ray(rng), C4.random_ray(rng)
    pairs = [(np.array([1, 0]), np.array([0, 1])), (np.array([0.6, 0.8j]), np.array([0.6, 0.8j]))]
    assert check_two_sphere(rho, sigma, pairs=pairs).max_violation < 1e-14


def test_two_sphere_random_plane(rng):
    rho, sigma = C4.random_ray(rng), C4.random_ray(rng)
    rep = check_two_sphere(rho, sigma, 50, rng)
    assert rep.passed and rep.max_violation < 1e-10


def test_two_sphere_needs_one_sector():
    with pytest.raises(PreconditionError):
        check_two_sphere(ray(1, 0, sector=0), ray(1, 0, sector=1))


def test_standard_basis_is_a_basis():
    unit = SubspaceElement.unit(C3)
    assert basis_check([ray(*e(i)) for i in range(3)], unit)


def test_single_ray_is_not_a_basis():
    assert not basis_check([ray(1, 0, 0)], SubspaceElement.unit(C3))


def test_unitary_image_of_a_basis(rng):
    U = haar_unitary(rng, 3)
    rays = [ray(*U[:, i]) for i in range(3)]
    assert basis_check(rays, SubspaceElement.unit(C3), rng=rng)


def test_greedy_family_has_dimension_many_elements(rng):
    sp = PureStateSpace((2, 3))
    Q = random_element(sp, rng, sector_dims=[1, 2])
    fam = greedy_orthogonal_family(Q, rng)
    assert len(fam) == 3 and basis_check(fam, Q, rng=rng)


def test_p_q_is_basis_independent(rng):
    Q = random_element(C4, rng, sector_dims=[2])
    sigma = C4.random_ray(rng)
    B = Q.blocks[0] @ haar_unitary(rng, 2)
    Q2 = SubspaceElement(Q.dims, (B,))
    assert p_Q(Q, sigma) == pytest.approx(p_Q(Q2, sigma), abs=1e-12)
    assert p_Q(SubspaceElement.unit(C4), sigma) == pytest.approx(1.0, abs=1e-12)


def test_leq_and_atoms(rng):
    R = random_element(C4, rng, sector_dims=[3])
    for a in R.atoms():
        assert leq(SubspaceElement.atom(C4, a), R)


def test_full_suite_two_sectors(rng):
    rep = check_lattice_suite(PureStateSpace((2, 3)), 30, rng)
    assert rep.passed, rep.failures


def test_join_meet_continuity(rng):
    from tpspace.lattice import check_join_meet_continuity

    for dims in [(3,), (4,), (2, 3)]:
        rep = check_join_meet_continuity(PureStateSpace(dims), 50, rng)
        assert rep.passed, [(r.name, r.violation) for r in rep.records]
