import json

import numpy as np
import pytest

from tpspace import PureStateSpace, Ray, kernel_from_points
from tpspace.cstar import random_complex_observable
from tpspace.errors import InputError
from tpspace.io import (
    complex_from_json,
    complex_to_json,
    dumps,
    function_from_json,
    function_to_json,
    kernel_from_json,
    kernel_to_json,
    load_json,
    ray_from_json,
    ray_to_json,
    space_from_json,
    space_to_json,
    subspace_from_json,
    subspace_to_json,
    write_json,
)
from tpspace.lattice import distance, random_element
from tpspace.spectral import random_observable

from conftest import C2C3


def _roundtrip(doc):
    return json.loads(dumps(doc))


def test_ray_roundtrip_is_exact(rng):
    r = C2C3.random_ray(rng)
    back = ray_from_json(_roundtrip(ray_to_json(r)))
    assert back.sector == r.sector
    assert np.array_equal(back.vector, r.vector)


def test_space_roundtrip(rng):
    space = C2C3.with_points([C2C3.random_ray(rng) for _ in range(4)])
    back = space_from_json(_roundtrip(space_to_json(space)))
    assert back.sectors == space.sectors and back.hbar == space.hbar
    assert all(np.array_equal(a.vector, b.vector) for a, b in zip(back.points, space.points))


def test_space_defaults_hbar():
    assert space_from_json({"sectors": [2, 1]}).hbar == (1.0, 1.0)


def test_kernel_roundtrip_is_bitwise(rng):
    space = C2C3.with_points([C2C3.random_ray(rng) for _ in range(6)])
    K = kernel_from_points(space)
    assert np.array_equal(kernel_from_json(_roundtrip(kernel_to_json(K))).p, K.p)


def test_function_roundtrip(rng):
    f = random_observable(C2C3, rng)
    g = function_from_json(_roundtrip(function_to_json(f)), C2C3)
    for A, B in zip(f.blocks(), g.blocks()):
        assert np.array_equal(A, B)


def test_function_from_blocks():
    doc = {"blocks": [{"re": [[1, 0], [0, -1]]}, {"re": np.eye(3).tolist()}]}
    f = function_from_json(doc, C2C3)
    assert np.allclose(f.blocks()[0], np.diag([1, -1]))
    assert np.allclose(f.blocks()[1], np.eye(3))


def test_complex_roundtrip(rng):
    a = random_complex_observable(C2C3, rng)
    b = complex_from_json(_roundtrip(complex_to_json(a)), C2C3)
    assert (a - b).norm() < 1e-14


def test_subspace_roundtrip(rng):
    Q = random_element(C2C3, rng)
    assert distance(Q, subspace_from_json(_roundtrip(subspace_to_json(Q)), C2C3)) < 1e-14


def test_write_and_load(tmp_path):
    path = tmp_path / "k.json"
    write_json(path, {"x": 0.1 + 0.2})
    assert load_json(path)["x"] == 0.1 + 0.2
    assert path.read_text().endswith("\n")
    assert list(tmp_path.iterdir()) == [path]  # no leftover temp file


@pytest.mark.parametrize(
    "doc",
    [
        {},
        {"sectors": "2"},
        {"sectors": [0]},
        {"sectors": [2], "hbar": [1, 2]},
        {"sectors": [2], "points": [{"sector": 0, "re": [1, 0, 0]}]},
        {"sectors": [2], "points": [{"sector": 3, "re": [1, 0]}]},
        {"sectors": [2], "points": [{"sector": 0, "re": [0, 0]}]},
        {"sectors": [2], "points": [{"sector": 0, "re": [1, 0], "im": [0]}]},
    ],
)
def test_bad_spaces_raise_input_error(doc):
    with pytest.raises(InputError):
        space_from_json(doc)


@pytest.mark.parametrize(
    "doc",
    [
        {"p": [[1, 0.5], [0.5]]},
        {"p": "nope"},
        {"n": 3, "p": [[1, 0], [0, 1]]},
        {},
    ],
)
def test_bad_kernels_raise_input_error(doc):
    with pytest.raises(InputError):
        kernel_from_json(doc)


def test_non_hermitian_block_rejected():
    with pytest.raises(InputError):
        function_from_json({"blocks": [{"re": [[1, 1], [0, 1]]}, {"re": np.eye(3).tolist()}]}, C2C3)


def test_wrong_block_count_rejected():
    with pytest.raises(InputError):
        function_from_json({"blocks": [{"re": [[1, 0], [0, 1]]}]}, C2C3)


def test_load_errors(tmp_path):
    with pytest.raises(InputError):
        load_json(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("[1,")
    with pytest.raises(InputError):
        load_json(bad)


def test_input_error_is_value_error():
    assert issubclass(InputError, ValueError)
