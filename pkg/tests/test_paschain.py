import math

import numpy as np
import pytest

from sphereshape.constellation import InvalidParameterError
from sphereshape.fec import load_code
from sphereshape.paschain import (FerResult, awgn, demap, make_config,
                                  receive, recover_data, simulate,
                                  simulate_point, transmit)

CONFIG_NAMES = ["uniform", "ess", "pess-u1", "pess-u2"]
TABLE_ENERGY = {"uniform": 85.0, "ess": 39.69, "pess-u1": 40.73,
                "pess-u2": 44.44}


@pytest.fixture(scope="module")
def chains():
    out = {}
    for name in CONFIG_NAMES:
        cfg = make_config(name)
        out[name] = (cfg, load_code(cfg.code_rate))
    return out


@pytest.mark.parametrize("name", CONFIG_NAMES)
def test_noiseless_roundtrip(chains, name):
    cfg, code = chains[name]
    rng = np.random.default_rng(hash(name) % 2**32)
    for _ in range(50):
        data = rng.integers(0, 2, cfg.num_data_bits, dtype=np.uint8)
        x = transmit(data, cfg, code)
        assert x.shape == (cfg.n_symbols,)
        assert np.all(np.abs(x) % 2 == 1) and np.all(np.abs(x) <= 15)
        out, ok = receive(x[None, :], cfg, code, sigma=0.4)
        assert ok and np.array_equal(out, data)


@pytest.mark.parametrize("name", CONFIG_NAMES)
def test_rate_accounting_exact(chains, name):
    cfg, code = chains[name]
    assert cfg.num_data_bits == 486
    assert cfg.target_rate == 3.0
    assert cfg.num_label_bits + cfg.num_extra_bits == code.k
    if cfg.pess is not None:
        assert cfg.shaper_bits + cfg.uniform_level_bits \
            + cfg.num_extra_bits == 486


def test_sign_balance_and_energy_over_many_frames(chains):
    """10^4 frames: P(S=+1) = 0.5 +- 0.02 and E[X^2] within +-0.4%."""
    frames = 10_000
    for name in ("ess", "uniform"):
        cfg, code = chains[name]
        rng = np.random.default_rng(1234)
        pos = 0
        energy = 0.0
        for _ in range(frames // 100):
            xs = np.stack([
                transmit(rng.integers(0, 2, cfg.num_data_bits,
                                      dtype=np.uint8), cfg, code)
                for _ in range(100)])
            pos += int(np.count_nonzero(xs > 0))
            energy += float((xs**2).sum())
        n_sym = frames * cfg.n_symbols
        assert abs(pos / n_sym - 0.5) < 0.02
        measured = energy / n_sym
        assert abs(measured - TABLE_ENERGY[name]) / TABLE_ENERGY[name] < 0.004


@pytest.mark.parametrize("name", CONFIG_NAMES)
def test_analytic_energy_matches_reference(chains, name):
    cfg, _ = chains[name]
    ref = TABLE_ENERGY[name]
    assert abs(cfg.avg_symbol_energy() - ref) / ref < 0.004


def test_transmit_validates_length(chains):
    cfg, code = chains["ess"]
    with pytest.raises(InvalidParameterError):
        transmit(np.zeros(10, dtype=np.uint8), cfg, code)


def test_awgn_statistics():
    rng = np.random.default_rng(0)
    x = np.zeros(200_000)
    y = awgn(x, 2.0, rng)
    assert abs(y.mean()) < 0.02
    assert abs(y.std() - 2.0) < 0.02
    with pytest.raises(InvalidParameterError):
        awgn(x, 0.0, rng)


def test_demap_noiseless_llr_signs(chains):
    cfg, code = chains["pess-u1"]
    rng = np.random.default_rng(77)
    data = rng.integers(0, 2, cfg.num_data_bits, dtype=np.uint8)
    x = transmit(data, cfg, code)
    llrs = demap(x[None, :], cfg.priors(), sigma=0.05, m=cfg.m)
    hard = (llrs[0] < 0).astype(np.uint8)
    assert not np.any(code.syndrome(hard))
    out, ok = recover_data(hard, cfg)
    assert ok and np.array_equal(out, data)


def test_recover_data_flags_out_of_sphere(chains):
    cfg, _ = chains["ess"]
    word = np.zeros(648, dtype=np.uint8)
    # all-ones labels decode to amplitude 11 everywhere: energy >> e_max
    word[: cfg.num_label_bits] = 1
    data, valid = recover_data(word, cfg)
    assert not valid


def test_simulation_determinism_across_batch_sizes(chains):
    cfg, code = chains["pess-u2"]
    a = simulate_point(cfg, code, 19.0, seed=5, min_errors=10**9,
                       max_frames=120, batch=120)
    b = simulate_point(cfg, code, 19.0, seed=5, min_errors=10**9,
                       max_frames=120, batch=31)
    assert (a.frames, a.frame_errors, a.bit_errors) \
        == (b.frames, b.frame_errors, b.bit_errors)


def test_simulate_curve_monotone_and_reproducible(chains):
    cfg, _ = chains["ess"]
    snrs = [17.0, 18.5, 19.8]
    run1 = simulate(cfg, snrs, seed=9, min_errors=40, max_frames=400)
    run2 = simulate(cfg, snrs, seed=9, min_errors=40, max_frames=400)
    fers = [r.fer for r in run1]
    assert fers == [r.fer for r in run2]
    assert all(a >= b for a, b in zip(fers, fers[1:]))
    assert fers[0] > 0.9  # far below threshold: everything fails


def test_fer_result_confidence_interval():
    r = FerResult(snr_db=20.0, frames=400, frame_errors=100, bit_errors=1)
    assert r.fer == 0.25
    lo, hi = r.ci95
    half = 1.96 * math.sqrt(0.25 * 0.75 / 400)
    assert lo == pytest.approx(0.25 - half)
    assert hi == pytest.approx(0.25 + half)
    empty = FerResult(20.0, 0, 0, 0)
    assert math.isnan(empty.fer)


def test_make_config_rejects_unknown():
    with pytest.raises(InvalidParameterError):
        make_config("ccdm")
