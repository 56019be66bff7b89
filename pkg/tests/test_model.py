import math

import numpy as np
import pytest

from unlabeled_sensing import (
    ModelParams,
    Permutation,
    SensingInstance,
    Spectrum,
    apply_rows,
    estimate_b,
    generate,
    make_rng,
    residual,
    sample_with_hamming,
    snr_of,
    stable_rank,
)
from unlabeled_sensing import dsv
from unlabeled_sensing.errors import InvalidParams, InvalidSpectrum, ZeroMatrix


def test_snr_examples():
    assert snr_of(np.array([[1.0]]), 1.0, 1) == 1.0
    assert snr_of(2 * np.eye(3), 1.0, 3) == 4.0
    rng = np.random.default_rng(0)
    B = rng.standard_normal((4, 3))
    c = 3.7
    assert snr_of(c * B, c * c * 0.5, 3) == pytest.approx(snr_of(B, 0.5, 3), rel=1e-12)
    with pytest.raises(ZeroMatrix):
        snr_of(np.zeros((2, 2)), 1.0, 2)


@pytest.mark.parametrize("spectrum", ["rank1", "fullrank", "explicit:3,1"])
def test_generate_hits_snr_and_hamming(spectrum):
    params = ModelParams(n=30, p=4, m=3, h=7, snr=12.5, spectrum=Spectrum.parse(spectrum),
                         sigma_sq=0.3)
    inst = generate(params, make_rng(1))
    assert snr_of(inst.B_star, 0.3, 3) == pytest.approx(12.5, rel=1e-10)
    assert int(np.count_nonzero(inst.Pi_star.mapping != np.arange(30))) == 7
    assert inst.X.shape == (30, 4) and inst.Y.shape == (30, 3)


def test_reconstruction_identity():
    params = ModelParams(n=25, p=5, m=4, h=10, snr=3.0)
    inst = generate(params, make_rng(2))
    clean = apply_rows(inst.Pi_star, inst.X @ inst.B_star)
    assert np.array_equal(inst.Y, clean + inst.W)
    np.testing.assert_allclose(inst.Y - clean, inst.W, rtol=0, atol=1e-14 * np.abs(inst.Y).max())


def test_generate_is_deterministic():
    params = ModelParams(n=20, p=3, m=2, h=4, snr=1.0)
    a = generate(params, make_rng(7))
    b = generate(params, make_rng(7))
    assert np.array_equal(a.Y, b.Y) and a.Pi_star == b.Pi_star


def test_noiseless_instance():
    params = ModelParams(n=20, p=4, m=3, h=0, snr=1e30, sigma_sq=1e-30)
    inst = generate(params, make_rng(3))
    assert inst.Pi_star == Permutation.identity(20)
    assert np.sum(inst.W**2) == pytest.approx(20 * 3 * 1e-30, rel=0.5)
    y2 = float(np.sum(inst.Y**2))
    assert residual(inst.Pi_star, inst.X, inst.Y) <= 1e-8 * y2


def test_spectrum_contracts():
    rank1 = ModelParams(n=20, p=5, m=4, h=0, snr=2.0, spectrum=Spectrum("rank1")).signal()
    assert stable_rank(rank1) == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(rank1, rank1[:, :1])
    for m in (3, 5):
        B = ModelParams(n=20, p=5, m=m, h=0, snr=2.0).signal()
        assert stable_rank(B) == pytest.approx(m, abs=1e-10)
    # more measurement vectors than signal dimensions: equal spectrum of rank p
    B = ModelParams(n=20, p=5, m=12, h=0, snr=2.0).signal()
    assert stable_rank(B) == pytest.approx(5, abs=1e-10)
    G = B @ B.T
    np.testing.assert_allclose(G, G[0, 0] * np.eye(5), atol=1e-12)


def test_spectrum_parsing():
    assert Spectrum.parse("rank1").kind == "rank1"
    assert Spectrum.parse("fullrank").kind == "fullrank"
    s = Spectrum.parse("explicit:2,1.5;1")
    assert s.values == (2.0, 1.5, 1.0) and str(s) == "explicit:2,1.5,1"
    for bad in ("banana", "explicit:a,b"):
        with pytest.raises(InvalidSpectrum):
            Spectrum.parse(bad)
    with pytest.raises(InvalidSpectrum):
        Spectrum.parse("explicit:1,2,3").shape_matrix(2, 5)
    with pytest.raises(InvalidSpectrum):
        Spectrum.parse("explicit:0,0").shape_matrix(2, 2)


@pytest.mark.parametrize("kw", [
    dict(n=7, p=4),
    dict(h=1),
    dict(h=21),
    dict(snr=0.0),
    dict(sigma_sq=-1.0),
    dict(m=0),
])
def test_params_validation(kw):
    base = dict(n=20, p=4, m=2, h=2, snr=1.0)
    with pytest.raises(InvalidParams):
        ModelParams(**{**base, **kw})


def test_residual_examples():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((12, 3))
    perm = sample_with_hamming(12, 5, rng)
    Y = apply_rows(perm, X) @ rng.standard_normal((3, 2))
    assert residual(perm, X, Y) <= 1e-8 * np.sum(Y**2)


def test_residual_matches_back_substitution():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((15, 3))
    Y = rng.standard_normal((15, 4))
    perm = Permutation(rng.permutation(15))
    B = estimate_b(perm, X, Y)
    direct = float(np.sum((Y - apply_rows(perm, X) @ B) ** 2))
    assert residual(perm, X, Y) == pytest.approx(direct, rel=1e-8)


def test_truth_minimizes_noiseless_residual():
    params = ModelParams(n=16, p=4, m=3, h=6, snr=1e30, sigma_sq=1e-30)
    rng = make_rng(6)
    for _ in range(5):
        inst = generate(params, rng)
        r_star = residual(inst.Pi_star, inst.X, inst.Y)
        for _ in range(100):
            other = Permutation(rng.permutation(16))
            if other != inst.Pi_star:
                assert r_star < residual(other, inst.X, inst.Y)


def test_instance_round_trip(tmp_path):
    params = ModelParams(n=10, p=2, m=3, h=4, snr=5.0, spectrum=Spectrum.parse("explicit:2,1"))
    inst = generate(params, make_rng(8))
    paths = inst.write(tmp_path, "t")
    assert {p.name for p in paths} == {
        "t_X.dsv", "t_B_star.dsv", "t_W.dsv", "t_Y.dsv", "t_Pi_star.txt", "t_params.txt"}
    back = SensingInstance.read(tmp_path, "t")
    assert back.params == params
    for name in ("X", "B_star", "W", "Y"):
        assert np.array_equal(getattr(back, name), getattr(inst, name))
    assert back.Pi_star == inst.Pi_star


def test_matrix_dump_is_bit_exact(tmp_path):
    A = np.array([[math.pi, -1e-300, 1 / 3], [2.0**60 + 1, 5e-324, -0.0]])
    dsv.write_matrix(tmp_path / "a.dsv", A)
    assert np.array_equal(dsv.read_matrix(tmp_path / "a.dsv"), A)
    (tmp_path / "bad.dsv").write_text("1 2\n3\n")
    with pytest.raises(ValueError):
        dsv.read_matrix(tmp_path / "bad.dsv")
