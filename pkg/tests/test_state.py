import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import haar_unitary, named
from entdet.state import (
    DegenerateStateError,
    DimensionError,
    ValidationError,
    apply_local_unitary,
    basis_state,
    collapse,
    dumps_state,
    flatten,
    load_state,
    loads_state,
    make_state,
    normalize,
    permute_sites,
    project_site,
    random_state,
    save_state,
    scalar_residual,
    tensor_product,
    unflatten,
)

S = 1 / math.sqrt(2)

dims_strategy = st.lists(st.integers(2, 3), min_size=1, max_size=4)


def test_make_state_basis():
    s = make_state([2, 2], [1, 0, 0, 0])
    assert s.dims == (2, 2)
    assert s.amplitude("00") == 1


def test_make_state_ghz_offsets():
    amps = np.zeros(8)
    amps[0] = amps[7] = S
    s = make_state([2, 2, 2], amps)
    assert s.amplitude("000") == pytest.approx(S)
    assert s.amplitude("111") == pytest.approx(S)
    assert s.norm == pytest.approx(1.0, abs=1e-12)


def test_make_state_is_verbatim():
    s = make_state([2], [3, 4])
    assert list(s.amps) == [3, 4]


@pytest.mark.parametrize("dims, amps", [([2], [1, 0, 0]), ([2, 2], [1, 0]), ([3, 2], [0] * 5)])
def test_make_state_length_mismatch(dims, amps):
    with pytest.raises(DimensionError):
        make_state(dims, amps)


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), complex(0, float("nan"))])
def test_make_state_rejects_non_finite(bad):
    with pytest.raises(ValidationError):
        make_state([2], [1, bad])


def test_make_state_rejects_small_dims():
    with pytest.raises(DimensionError):
        make_state([1, 2], [1, 0])


def test_amps_are_read_only():
    s = make_state([2], [1, 0])
    with pytest.raises(ValueError):
        s.amps[0] = 2


def test_offset_convention():
    s = random_state([2, 3, 2], 1)
    # offset of |b1 b2 b3> = b1*6 + b2*2 + b3
    for b1 in range(2):
        for b2 in range(3):
            for b3 in range(2):
                assert s.amplitude([b1, b2, b3]) == s.amps[b1 * 6 + b2 * 2 + b3]


def test_normalize():
    s = normalize(make_state([2, 2], [2, 0, 0, 0]))
    np.testing.assert_array_equal(s.amps, [1, 0, 0, 0])
    g = normalize(make_state([2, 2, 2], [1, 0, 0, 0, 0, 0, 0, 1]))
    assert abs(g.amps[0]) ** 2 + abs(g.amps[7]) ** 2 == pytest.approx(1.0, abs=1e-12)
    assert g.amps[0] == pytest.approx(S)


def test_normalize_zero():
    with pytest.raises(DegenerateStateError):
        normalize(make_state([2, 2], [0, 0, 0, 0]))


def test_flatten_ghz_last_site(ghz):
    f = flatten(ghz, 3)
    assert (f.rows, f.cols) == (2, 4)
    np.testing.assert_allclose(f.matrix, [[S, 0, 0, 0], [0, 0, 0, S]], atol=1e-15)


def test_flatten_bipartite_product():
    a, b, c, d = 0.3, 0.4 + 0.1j, -0.7, 0.2j
    s = make_state([2, 2], np.kron([a, b], [c, d]))
    np.testing.assert_allclose(flatten(s, 2).matrix, [[a * c, b * c], [a * d, b * d]])


def test_flatten_tripartite_product_matches_layout():
    x, y, z = np.array([1, 2]), np.array([3, 5]), np.array([7, 11])
    s = make_state([2, 2, 2], np.kron(np.kron(x, y), z))
    expected = [
        [x[0] * y[0] * z[0], x[0] * y[1] * z[0], x[1] * y[0] * z[0], x[1] * y[1] * z[0]],
        [x[0] * y[0] * z[1], x[0] * y[1] * z[1], x[1] * y[0] * z[1], x[1] * y[1] * z[1]],
    ]
    np.testing.assert_array_equal(flatten(s, 3).matrix, expected)
    assert np.linalg.matrix_rank(flatten(s, 3).matrix) == 1


def test_flatten_middle_site_keeps_order():
    s = random_state([2, 3, 2], 4)
    m = flatten(s, 2).matrix
    assert m.shape == (3, 4)
    for r in range(3):
        for b1 in range(2):
            for b3 in range(2):
                assert m[r, b1 * 2 + b3] == s.amplitude([b1, r, b3])


def test_flatten_site_range(ghz):
    with pytest.raises(DimensionError):
        flatten(ghz, 0)
    with pytest.raises(DimensionError):
        flatten(ghz, 4)


@settings(max_examples=60, deadline=None)
@given(dims=dims_strategy, seed=st.integers(0, 2**32 - 1), data=st.data())
def test_unflatten_roundtrip(dims, seed, data):
    s = random_state(dims, seed)
    site = data.draw(st.integers(1, len(dims)))
    f = flatten(s, site)
    assert f.rows * f.cols == s.amps.size == f.entries.size
    np.testing.assert_array_equal(unflatten(f, dims).amps, s.amps)


def test_collapse_ghz(ghz):
    r = collapse(ghz, 1, 0)
    assert r.dims == (2, 2)
    np.testing.assert_allclose(r.amps, [S, 0, 0, 0])
    np.testing.assert_allclose(normalize(r).amps, [1, 0, 0, 0])


def test_collapse_w(w_state):
    t = 1 / math.sqrt(3)
    np.testing.assert_allclose(collapse(w_state, 3, 1).amps, [t, 0, 0, 0])
    # slice oracle: x_{ij0} at offsets 4i + 2j
    raw = collapse(w_state, 3, 0).amps
    oracle = [w_state.amps[4 * i + 2 * j] for i in range(2) for j in range(2)]
    np.testing.assert_array_equal(raw, oracle)
    np.testing.assert_allclose(raw, [0, t, t, 0])


def test_collapse_zero_slice_is_unrealizable():
    s = basis_state([2, 2], "00")
    r = collapse(s, 1, 1)
    assert r.unrealizable
    assert not collapse(s, 1, 0).unrealizable


def test_collapse_ranges(ghz):
    with pytest.raises(DimensionError):
        collapse(ghz, 1, 2)
    with pytest.raises(DimensionError):
        collapse(ghz, 5, 0)
    with pytest.raises(DimensionError):
        collapse(make_state([2], [1, 0]), 1, 0)


@settings(max_examples=60, deadline=None)
@given(dims=st.lists(st.integers(2, 3), min_size=2, max_size=4), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_collapse_probabilities_sum(dims, seed, data):
    s = random_state(dims, seed)
    site = data.draw(st.integers(1, len(dims)))
    total = sum(collapse(s, site, b).norm ** 2 for b in range(dims[site - 1]))
    assert total == pytest.approx(s.norm**2, abs=1e-12)


def test_project_ghz_x_basis(ghz):
    r = project_site(ghz, 1, [S, S])
    np.testing.assert_allclose(r.amps, [0.5, 0, 0, 0.5], atol=1e-15)


def test_project_phi_x_basis():
    phi = named("phi3")
    for sign in (1, -1):
        r = project_site(phi, 1, [S, sign * S])
        expected = np.kron([1, sign], [1, sign]) / (2 * math.sqrt(2))
        assert scalar_residual(r, expected) < 1e-15
        np.testing.assert_allclose(r.amps, expected, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(dims=st.lists(st.integers(2, 3), min_size=2, max_size=4), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_project_basis_equals_collapse(dims, seed, data):
    s = random_state(dims, seed)
    site = data.draw(st.integers(1, len(dims)))
    b = data.draw(st.integers(0, dims[site - 1] - 1))
    e = np.zeros(dims[site - 1])
    e[b] = 1
    np.testing.assert_array_equal(project_site(s, site, e).amps, collapse(s, site, b).amps)


def test_project_validation(ghz):
    with pytest.raises(DimensionError):
        project_site(ghz, 1, [1, 0, 0])
    with pytest.raises(ValidationError):
        project_site(ghz, 1, [1, 1])


def test_local_unitary_identity_and_x():
    s = random_state([2, 2, 2], 3)
    np.testing.assert_array_equal(apply_local_unitary(s, 2, np.eye(2)).amps, s.amps)
    x = np.array([[0, 1], [1, 0]])
    out = apply_local_unitary(basis_state([2, 2, 2], "000"), 3, x)
    np.testing.assert_array_equal(out.amps, basis_state([2, 2, 2], "001").amps)


def test_local_unitary_validation(ghz):
    with pytest.raises(DimensionError):
        apply_local_unitary(ghz, 1, np.eye(3))
    with pytest.raises(ValidationError):
        apply_local_unitary(ghz, 1, [[1, 1], [0, 1]])


@settings(max_examples=40, deadline=None)
@given(dims=st.lists(st.integers(2, 3), min_size=2, max_size=4), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_local_unitary_norm_and_commutes_with_collapse(dims, seed, data):
    rng = np.random.default_rng(seed)
    s = random_state(dims, seed)
    n = len(dims)
    site = data.draw(st.integers(1, n))
    other = data.draw(st.integers(1, n).filter(lambda k: k != site))
    u = haar_unitary(dims[site - 1], rng)
    t = apply_local_unitary(s, site, u)
    assert t.norm == pytest.approx(s.norm, abs=1e-12)
    b = data.draw(st.integers(0, dims[other - 1] - 1))
    # after removing `other`, `site` shifts left if it came after it
    shifted = site - 1 if site > other else site
    lhs = collapse(t, other, b)
    rhs = apply_local_unitary(collapse(s, other, b), shifted, u)
    np.testing.assert_allclose(lhs.amps, rhs.amps, atol=1e-12)


def test_tensor_product_examples():
    out = tensor_product(basis_state([2], "0"), basis_state([2], "1"))
    np.testing.assert_array_equal(out.amps, basis_state([2, 2], "01").amps)
    a, b = 0.6, 0.8j
    out = tensor_product(make_state([2], [a, b]), basis_state([2], "0"))
    np.testing.assert_array_equal(out.amps, [a, 0, b, 0])


@settings(max_examples=40, deadline=None)
@given(seeds=st.tuples(*[st.integers(0, 10**6)] * 3), d=st.tuples(*[dims_strategy] * 3))
def test_tensor_product_associative(seeds, d):
    a, b, c = (random_state(dd[:2], s) for dd, s in zip(d, seeds))
    left = tensor_product(tensor_product(a, b), c)
    right = tensor_product(a, tensor_product(b, c))
    assert left.dims == right.dims
    # complex products round differently when regrouped
    np.testing.assert_allclose(left.amps, right.amps, rtol=0, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(vals=st.lists(st.integers(-8, 8), min_size=6, max_size=6))
def test_tensor_product_associative_exact(vals):
    # small dyadic amplitudes multiply exactly, so the sequences are bit-identical
    a, b, c = (make_state([2], [complex(vals[k], vals[k + 1]) / 4, 1]) for k in (0, 2, 4))
    left = tensor_product(tensor_product(a, b), c)
    right = tensor_product(a, tensor_product(b, c))
    np.testing.assert_array_equal(left.amps, right.amps)


def test_random_state_deterministic_and_unit():
    a = random_state([2, 3, 2], 42)
    b = random_state([2, 3, 2], 42)
    np.testing.assert_array_equal(a.amps, b.amps)
    assert a.norm == pytest.approx(1.0, abs=1e-12)
    assert not np.array_equal(a.amps, random_state([2, 3, 2], 43).amps)


def test_permute_sites():
    s = random_state([2, 3, 2], 9)
    p = permute_sites(s, [2, 3, 1])
    assert p.dims == (3, 2, 2)
    assert p.amplitude([2, 1, 0]) == s.amplitude([0, 2, 1])
    with pytest.raises(DimensionError):
        permute_sites(s, [1, 1, 2])


def test_state_file_roundtrip(tmp_path):
    s = random_state([3, 2], 5)
    path = tmp_path / "s.json"
    save_state(s, path)
    np.testing.assert_array_equal(load_state(path).amps, s.amps)
    assert loads_state(dumps_state(s)).dims == (3, 2)


@pytest.mark.parametrize(
    "text",
    [
        '{"dims": [2, 2], "amps": [[1, 0], [0, 0], [0, 0]]}',
        '{"dims": [2], "amps": [[1, 0]]}',
        '{"dims": [2], "amps": [[1], [0, 0]]}',
        '{"amps": [[1, 0], [0, 0]]}',
        '{"dims": [2], "amps": [["a", 0], [0, 0]]}',
        "[1, 2]",
        "not json",
    ],
)
def test_state_file_rejects(text):
    with pytest.raises((DimensionError, ValidationError)):
        loads_state(text)
