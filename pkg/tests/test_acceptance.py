"""Top-level reproduction criteria.

Each test prints one PASS/FAIL line; sub-checks are collected so a
failure reports every violated bound at once. Criterion 7 runs the scaled
frame-error-rate experiment and dominates the runtime.
"""

import random

import numpy as np

from conftest import enumerate_sphere
from sphereshape.constellation import build_alphabet
from sphereshape.distributions import (Composition, ccdm_analytics,
                                       fit_entropy, partial_mb_pmf,
                                       pmf_stats, shaping_gain)
from sphereshape.ess import (build_bounded_trellis, build_trellis,
                             complexity_report, deshape, find_emax,
                             induced_stats, shape)
from sphereshape.fec import LLR_CLIP, decode, encode, load_code
from sphereshape.paschain import make_config, receive, simulate, snr_at_fer, transmit
from sphereshape.pess import PessConfig, pess_deshape, pess_shape
from sphereshape.sweeps import (best_shaping_gain, ccdm_rate_loss,
                                rate_loss_crossover, sphere_rate_loss,
                                sphere_rate_loss_asymptote)

AMPS16 = tuple(range(1, 16, 2))


def _report(num, name, checks):
    failures = [msg for ok, msg in checks if not ok]
    status = "PASS" if not failures else "FAIL"
    line = f"[ACCEPTANCE {num}] {name}: {status}"
    print("\n" + line)
    for msg in failures:
        print("    failed: " + msg)
    assert not failures, line + " -> " + "; ".join(failures)


def test_criterion_1_reference_distribution_table():
    rows = [
        (1, (.2443, .2225, .1847, .1396, .0962, .0603, .0345, .0180),
         38.66, 1.40),
        (2, (.2365, .2365, .1623, .1623, .0765, .0765, .0247, .0247),
         39.57, 1.30),
        (4, (.2065, .2065, .2065, .2065, .0435, .0435, .0435, .0435),
         43.27, 0.92),
    ]
    checks = []
    for group, probs, energy, gain in rows:
        lam = fit_entropy(8 / 3, AMPS16, group)
        pmf = partial_mb_pmf(lam, AMPS16, group)
        h, e = pmf_stats(pmf)
        err = float(np.max(np.abs(pmf.probs - np.array(probs))))
        checks.append((err < 5e-5,
                       f"group {group}: prob deviation {err:.2e} >= 5e-5"))
        checks.append((abs(e - energy) < 0.01,
                       f"group {group}: E {e:.4f} vs {energy} (tol 0.01)"))
        g = shaping_gain(h, e)
        checks.append((abs(g - gain) < 0.01,
                       f"group {group}: G_s {g:.4f} vs {gain} (tol 0.01)"))
    _report(1, "distribution table", checks)


def test_criterion_2_trellis_oracle_and_property_suite():
    checks = []
    trellis = build_trellis(4, (1, 3, 5, 7), 28)
    checks.append((trellis.sphere_size == 19,
                   f"toy count {trellis.sphere_size} != 19"))
    checks.append((trellis.num_levels == 4,
                   f"toy L {trellis.num_levels} != 4"))
    oracle = enumerate_sphere(4, (1, 3, 5, 7), 28)
    table_ok = all(shape(i, trellis) == seq and deshape(seq, trellis) == i
                   for i, seq in enumerate(oracle))
    checks.append((table_ok, "toy shape/deshape table != brute force"))

    rng = random.Random(424242)
    pool = (1, 3, 5, 7, 9, 11, 13)
    bad = 0
    for _ in range(1000):
        n = rng.randint(1, 6)
        amps = tuple(sorted(rng.sample(pool, rng.randint(1, 4))))
        e_max = rng.randint(n * amps[0] ** 2, n * amps[-1] ** 2)
        ref = enumerate_sphere(n, amps, e_max)
        t = build_trellis(n, amps, e_max)
        if t.sphere_size != len(ref) or any(
                shape(i, t) != s or deshape(s, t) != i
                for i, s in enumerate(ref)):
            bad += 1
    checks.append((bad == 0, f"{bad}/1000 randomized cases disagree"))
    _report(2, "trellis oracle", checks)


def test_criterion_3_operating_points():
    checks = []
    expected = [(3, 432, 6514, 39.69), (2, 270, 1626, 40.73),
                (1, 108, 402, 44.44)]
    for s, k, e_max_ref, energy_ref in expected:
        reduced = build_alphabet(s + 1).amplitudes
        e_max = find_emax(162, reduced, k)
        checks.append((e_max == e_max_ref,
                       f"s={s}: e_max {e_max} != {e_max_ref}"))
        _, e_red, _ = induced_stats(build_trellis(162, reduced, e_max_ref))
        u = 3 - s
        e_full = 4**u * e_red + (4**u - 1) / 3.0
        checks.append((abs(e_full - energy_ref) < 0.15,
                       f"s={s}: E {e_full:.4f} vs {energy_ref} (tol 0.15)"))
    rate, energy = ccdm_analytics(
        Composition(AMPS16, (34, 32, 28, 23, 18, 13, 9, 5)))
    checks.append((abs(rate - 2.667) < 0.01,
                   f"ccdm rate {rate:.4f} vs 2.667"))
    checks.append((abs(energy - 48.31) < 0.01,
                   f"ccdm E {energy:.4f} vs 48.31"))
    _report(3, "operating points", checks)


def test_criterion_4_complexity_table():
    checks = []
    rows = [(6514, 17, 9, 8, 421.15, 182, 795),
            (1626, 10, 9, 4, 71.23, 57, 184),
            (402, 8, 7, 2, 9.47, 15, 31)]
    for e_max, n_m, n_p, num_amps, kb_ref, ops_ref, levels_ref in rows:
        levels = (e_max - 162) // 8 + 1
        checks.append((levels == levels_ref,
                       f"L {levels} != {levels_ref} at e_max {e_max}"))
        rep = complexity_report(levels, 162, n_m, n_p, num_amps, 8 / 3)
        checks.append((round(rep.bounded_storage_kb, 2) == kb_ref,
                       f"storage {rep.bounded_storage_kb:.5f} kB != {kb_ref}"))
        checks.append((rep.bounded_bit_ops_per_dim == ops_ref,
                       f"ops {rep.bounded_bit_ops_per_dim} != {ops_ref}"))
    _report(4, "complexity table", checks)


def test_criterion_5_gain_sweep_landmarks():
    checks = []
    grid = np.round(np.arange(3.40, 3.951, 0.01), 2)
    targets = {3: 1.08, 2: 1.03, 1: 0.76}
    optima = {}
    for s, gain_ref in targets.items():
        h_star, gain = best_shaping_gain(4, s, 3.0, grid)
        optima[s] = h_star
        checks.append((abs(gain - gain_ref) <= 0.03,
                       f"s={s}: max gain {gain:.4f} vs {gain_ref} "
                       f"(tol 0.03)"))
    checks.append((abs(optima[3] - 3.63) <= 0.02,
                   f"s=3 optimum at H(X)={optima[3]:.2f}, "
                   "outside 3.63 +- 0.02"))
    _report(5, "gain sweep landmarks", checks)


def test_criterion_6_rate_loss_landmarks():
    checks = []
    for u, ref in ((1, 0.015), (2, 0.071)):
        asym = sphere_rate_loss_asymptote(u)
        checks.append((abs(asym - ref) <= 0.002,
                       f"u={u} asymptote {asym:.4f} vs {ref} (tol 0.002)"))
        # the finite-length curve decreases toward the asymptote
        losses = [sphere_rate_loss(n, u) for n in (96, 192, 384, 768)]
        checks.append((all(a > b for a, b in zip(losses, losses[1:]))
                       and losses[-1] > asym,
                       f"u={u} curve not decreasing toward asymptote"))
    ess_loss = sphere_rate_loss(162, 0)
    checks.append((ess_loss < 0.01,
                   f"ESS loss at N=162 is {ess_loss:.4f}, not < 0.01"))
    crossover = rate_loss_crossover(2, 240, 360)
    checks.append((240 <= crossover <= 360,
                   f"crossover {crossover} outside [240, 360]"))
    checks.append((ccdm_rate_loss(crossover) <= sphere_rate_loss(crossover, 2),
                   "no sign change at reported crossover"))
    _report(6, "rate loss landmarks", checks)


def test_criterion_7_fer_experiment():
    checks = []
    starts = {"uniform": 20.9, "ess": 19.6, "pess-u1": 19.7, "pess-u2": 20.0}
    thresholds = {}
    for name, start in starts.items():
        thresholds[name] = snr_at_fer(make_config(name), 1e-2, start,
                                      seed=11, min_errors=100,
                                      max_frames=30_000)
    gains = {name: thresholds["uniform"] - thresholds[name]
             for name in ("ess", "pess-u1", "pess-u2")}
    for name, ref in (("ess", 1.35), ("pess-u1", 1.27), ("pess-u2", 0.95)):
        checks.append((abs(gains[name] - ref) <= 0.15,
                       f"{name} gain {gains[name]:.3f} dB vs {ref} "
                       "(tol 0.15)"))
    gap = abs(thresholds["pess-u1"] - thresholds["ess"])
    checks.append((gap <= 0.2,
                   f"2-bit vs 3-bit gap {gap:.3f} dB > 0.2"))
    order = (thresholds["ess"] <= thresholds["pess-u1"]
             <= thresholds["pess-u2"] <= thresholds["uniform"])
    checks.append((order, f"threshold ordering violated: {thresholds}"))
    # FER monotone in SNR on a cheap high-FER segment
    curve = simulate(make_config("ess"), [17.5, 18.5, 19.5], seed=11,
                     min_errors=100, max_frames=3000)
    fers = [r.fer for r in curve]
    checks.append((all(a >= b for a, b in zip(fers, fers[1:])),
                   f"FER not monotone: {fers}"))
    print("\n    thresholds(dB):",
          {k: round(v, 3) for k, v in thresholds.items()})
    _report(7, "FER experiment", checks)


def test_criterion_8_property_suites():
    checks = []
    # noiseless end-to-end round trips, 10^3 frames over the four configs
    bad = 0
    for name in ("uniform", "ess", "pess-u1", "pess-u2"):
        cfg = make_config(name)
        code = load_code(cfg.code_rate)
        rng = np.random.default_rng(8)
        for _ in range(250):
            data = rng.integers(0, 2, cfg.num_data_bits, dtype=np.uint8)
            out, ok = receive(transmit(data, cfg, code)[None, :], cfg, code,
                              sigma=0.4)
            if not ok or not np.array_equal(out, data):
                bad += 1
    checks.append((bad == 0, f"{bad}/1000 noiseless frames failed"))

    # bounded-precision bijectivity fuzz
    rng = random.Random(5)
    bad = 0
    for _ in range(300):
        n = rng.randint(2, 10)
        amps = tuple(range(1, 2 * rng.randint(2, 4), 2))
        e_max = rng.randint(n * amps[0] ** 2, n * amps[-1] ** 2)
        n_m = rng.randint(2, 12)
        bounded = build_bounded_trellis(n, amps, e_max, n_m, 16)
        for _ in range(5):
            i = rng.randrange(max(1, 2**bounded.num_input_bits))
            if deshape(shape(i, bounded), bounded) != i:
                bad += 1
    checks.append((bad == 0, f"{bad} bounded-precision roundtrips failed"))

    # energy-set equivalence: counts over e and 4e+1 agree exactly
    def counts_over(energies, n, e_max):
        rows = [{0: 1}]
        for _ in range(n):
            nxt = {}
            for acc, c in rows[-1].items():
                for e in energies:
                    if acc + e <= e_max:
                        nxt[acc + e] = nxt.get(acc + e, 0) + c
            rows.append(nxt)
        return rows
    ok = True
    for n, e_max in [(3, 40), (5, 90)]:
        a = counts_over([1, 9, 25, 49], n, e_max)
        b = counts_over([5, 37, 101, 197], n, 4 * e_max + n)
        ok &= all(rb == {4 * e + c_idx: v for e, v in ra.items()}
                  for c_idx, (ra, rb) in enumerate(zip(a, b)))
    checks.append((ok, "energy-set trellis equivalence violated"))

    # exhaustive partial shaper roundtrip on a small configuration
    cfg2 = PessConfig(m=4, s=2, n=6,
                      e_max=find_emax(6, build_alphabet(3).amplitudes, 10))
    rng2 = np.random.default_rng(9)
    msg_ok = True
    for i in range(2**cfg2.k):
        levels = [rng2.integers(0, 2, 6)]
        seq = pess_shape(i, levels, cfg2)
        back, got = pess_deshape(seq, cfg2)
        msg_ok &= back == i and np.array_equal(got[0], levels[0])
    checks.append((msg_ok, "pess roundtrip failed on small config"))

    # BP decoder linearity and syndrome invariants
    code = load_code("5/6")
    rng_np = np.random.default_rng(3)
    x = rng_np.integers(0, 2, code.k, dtype=np.uint8)
    y = rng_np.integers(0, 2, code.k, dtype=np.uint8)
    lin = np.array_equal(encode(x ^ y, code), encode(x, code) ^ encode(y, code))
    checks.append((lin, "encoder not linear"))
    word = encode(x, code)
    syn = not np.any(code.syndrome(word))
    checks.append((syn, "codeword has nonzero syndrome"))
    hard, conv, _ = decode(LLR_CLIP * (1.0 - 2.0 * word.astype(float)), code)
    checks.append((conv and np.array_equal(hard, word),
                   "noiseless decode not identity"))
    _report(8, "property suites", checks)
