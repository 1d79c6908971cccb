import math

import numpy as np
import pytest

from designlift import io
from designlift.designs import load_design, save_design, stabilizer_design, super_normalize
from designlift.errors import FormatError, HermitianError, InvariantError
from designlift.linalg import random_hermitian
from designlift.measurement import load_ensemble, load_problem, sample_ensemble, save_ensemble, save_observations, simulate_measurements


def test_hmat_roundtrip_is_exact(tmp_path, rng):
    Z = random_hermitian(5, rng)
    p = tmp_path / "z.hmat"
    io.save_hmat(p, Z)
    assert np.array_equal(io.load_hmat(p), Z)


def test_hmat_rejects_non_hermitian(tmp_path):
    p = tmp_path / "bad.hmat"
    p.write_text("HMAT 2\n1 0\n1 0\n0 0\n1 0\n")
    with pytest.raises(HermitianError):
        io.load_hmat(p)


@pytest.mark.parametrize("text", ["", "HMAT\n", "MAT 1\n1 0\n", "HMAT 2\n1 0\n", "HMAT 1\n1 zero\n"])
def test_hmat_format_errors(tmp_path, text):
    p = tmp_path / "x.hmat"
    p.write_text(text)
    with pytest.raises(FormatError):
        io.load_hmat(p)


@pytest.mark.parametrize("k", [1, 2])
def test_design_roundtrip(tmp_path, k):
    d = stabilizer_design(k)
    p = tmp_path / "d.txt"
    save_design(p, d)
    e = load_design(p)
    assert e.dim == d.dim and e.normalization == d.normalization
    assert np.array_equal(e.vectors, d.vectors)
    assert np.array_equal(e.weights, d.weights)


def test_super_normalized_design_roundtrip(tmp_path):
    d = super_normalize(stabilizer_design(1))
    p = tmp_path / "d.txt"
    save_design(p, d)
    assert load_design(p).normalization == "super_normalized"


def test_design_load_rejects_bad_weights(tmp_path):
    p = tmp_path / "d.txt"
    p.write_text("DESIGN 1 2 unit\n0.5\n1 0\n0.6\n1 0\n")
    with pytest.raises(InvariantError):
        load_design(p)


def test_design_load_rejects_bad_norm(tmp_path):
    p = tmp_path / "d.txt"
    p.write_text("DESIGN 2 1 unit\n1.0\n1 0\n1 0\n")
    with pytest.raises(InvariantError) as info:
        load_design(p)
    assert info.value.index == 0


def test_design_load_truncated(tmp_path):
    p = tmp_path / "d.txt"
    p.write_text("DESIGN 2 2 unit\n0.5\n1 0\n0 0\n")
    with pytest.raises(FormatError):
        load_design(p)


def test_ensemble_and_observations_roundtrip(tmp_path, rng):
    e = sample_ensemble(stabilizer_design(2), 10, seed=3)
    prob = simulate_measurements(e, random_hermitian(4, rng), eta=0.1, q=math.inf, seed=1)
    save_ensemble(tmp_path / "e.txt", e)
    save_observations(tmp_path / "b.txt", prob)
    back = load_problem(tmp_path / "e.txt", tmp_path / "b.txt")
    assert np.array_equal(back.ensemble.vectors, e.vectors)
    assert back.ensemble.seed == 3
    assert np.array_equal(back.observations, prob.observations)
    assert back.noise_budget == 0.1 and math.isinf(back.noise_exponent)
    assert load_ensemble(tmp_path / "e.txt").scaling == e.scaling


def test_observation_count_mismatch(tmp_path):
    p = tmp_path / "b.txt"
    p.write_text("OBS 3 2 0.0\n1.0\n2.0\n")
    with pytest.raises(FormatError):
        io.read_observations_file(p)


@pytest.mark.parametrize("token,value", [("1", 1.0), ("2", 2.0), ("inf", math.inf), ("Inf", math.inf)])
def test_parse_q(token, value):
    assert io.parse_q(token) == value
    assert io.parse_q(io.format_q(value)) == value


def test_parse_q_rejects_other_exponents():
    with pytest.raises(FormatError):
        io.parse_q("3")
