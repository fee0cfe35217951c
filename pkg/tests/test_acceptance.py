"""End-to-end acceptance checks.

Each test pins one advertised behavior of the package at a stated
tolerance: the schedule counting identities, bit-exact decoding, the
MAC rate oracle, soundness of the convex approximation, solver
dominance relations, and the Monte Carlo rate and slope targets.

The sweeps run at their full advertised trial counts by default and
take roughly fifteen minutes on one core. Set CCMISO_ACCEPT_SCALE to
an integer divisor (for example 10) to thin the trial counts for a
quick pass; the stated tolerances are only claimed at full scale.
"""

import math
import os
from functools import lru_cache
from itertools import combinations

import numpy as np
import pytest

from ccmiso.beamforming import (
    ScaOptions,
    _bottleneck,
    _exact_gammas,
    equal_power_beams,
    linearize,
    maxmin_snr_multicast,
    sca_maxmin_mac,
    zf_beamformers,
    zf_gains,
    zf_power_opt,
)
from ccmiso.combinatorics import SchedulingParams, build_omega, enumerate_schedule
from ccmiso.content import Library, decode_and_verify, default_file_bits, place_cache, run_delivery
from ccmiso.experiments import SimConfig, audit_schedule, run_scheme
from ccmiso.phy import dof_estimate, mac_rate, sample_channel, snr_at_level

SCALE = max(1, int(os.environ.get("CCMISO_ACCEPT_SCALE", "1")))


def trials(n):
    return max(2, n // SCALE)


@lru_cache(maxsize=None)
def sweep(scheme, K, L, N, M, alpha, beta, start, stop, step, n_trials):
    config = SimConfig(K=K, L=L, N=N, M=M, alpha=alpha, beta=beta, scheme=scheme,
                       snr_start=start, snr_stop=stop, snr_step=step,
                       trials=n_trials, seed=0)
    curve, _ = run_scheme(config)
    return curve


def valid_configs(K_max):
    """Every parameter combination the scheduler accepts at desk scale.

    The library size is pinned to N = K so the caching gain t equals the
    cache size M and every integer t in [0, K) is reachable.
    """
    out = []
    for K in range(1, K_max + 1):
        for t in range(0, K):
            for alpha in range(1, K - t + 1):
                for beta in range(1, alpha + 1):
                    if (t + alpha) % (t + beta) == 0:
                        out.append(SchedulingParams.from_system(K, K, K, t, alpha, beta))
    return out


def scenario_channels(seed, K=3, L=2):
    H = sample_channel(K, L, seed=seed)
    users = tuple(range(1, K + 1))
    return H.restrict(users), build_omega((users,), t=1)


# --- combinatorial layer -----------------------------------------------------


def test_every_message_index_appears_exactly_gamma_times():
    anchors = {(4, 1, 2, 2): 2, (6, 1, 5, 1): 3, (6, 1, 5, 2): 4}
    checked = 0
    for p in valid_configs(7):
        audit = audit_schedule(p)
        assert audit["uniform_appearances"], p
        assert audit["balance_ok"], p
        key = (p.K, p.t, p.alpha, p.beta)
        if key in anchors:
            assert audit["gamma"] == anchors[key], p
            checked += 1
    assert checked == len(anchors)


def test_delivery_is_bit_exact_for_random_demands():
    rng = np.random.default_rng(20240817)
    for p in valid_configs(6):
        library = Library.random(p.N, default_file_bits(p), seed=int(rng.integers(2**31)))
        caches = place_cache(library, p)
        for _ in range(20):
            demands = tuple(int(d) for d in rng.integers(1, p.N + 1, size=p.K))
            schedule = run_delivery(demands, library, p)
            for k in range(1, p.K + 1):
                assert decode_and_verify(k, caches[k], schedule, library), (p, demands, k)


# --- rate and approximation layer --------------------------------------------


def test_mac_rate_matches_exhaustive_oracle():
    def oracle(vals):
        best = math.inf
        for mask in range(1, 1 << len(vals)):
            sel = [v for i, v in enumerate(vals) if mask >> i & 1]
            best = min(best, math.log2(1.0 + sum(sel)) / len(sel))
        return best

    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        vals = [float(10.0 ** u) for u in rng.uniform(-3, 3, size=n)]
        got = mac_rate({("m", i): v for i, v in enumerate(vals)})
        assert got == pytest.approx(oracle(vals), abs=1e-12)


def test_linearization_is_tangent_and_a_global_lower_bound():
    for seed in range(5):
        rng = np.random.default_rng(seed)
        h = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        keys = ["a", "b", "c"]
        beams = {k: rng.standard_normal(3) + 1j * rng.standard_normal(3) for k in keys}
        gamma = float(rng.uniform(0.05, 8.0))

        def exact(bs, g):
            q = 1.0 + sum(abs(np.vdot(h, bs[k])) ** 2 for k in keys)
            return q / (1.0 + g)

        lin = linearize(h, beams, gamma, keys[0], keys[1:])
        assert abs(lin.evaluate(beams, gamma) - exact(beams, gamma)) <= 1e-10
        for _ in range(100):
            other = {k: w + rng.standard_normal(3) + 1j * rng.standard_normal(3)
                     for k, w in beams.items()}
            g2 = float(rng.uniform(0.0, 20.0))
            assert lin.evaluate(other, g2) <= exact(other, g2) + 1e-9


def test_sca_histories_monotone_and_dominate_zero_forcing():
    snr = 10.0
    for seed in range(trials(100)):
        channels, omega = scenario_channels(seed)
        res = sca_maxmin_mac(channels, omega, snr)
        for a, b in zip(res.history, res.history[1:]):
            assert b >= a - 1e-8, seed
        dirs = zf_beamformers(channels, omega)
        _, rate_opt = zf_power_opt(zf_gains(channels, dirs, omega), omega, snr)
        eq = equal_power_beams(dirs, omega, snr)
        rate_eq = _bottleneck(_exact_gammas(channels, eq, omega, 1.0), omega)
        assert res.rate >= rate_opt - 1e-4, seed
        assert rate_opt >= rate_eq - 1e-4, seed


def test_power_loading_within_one_percent_of_grid_search():
    # the grid must be dense enough that its own quantization error stays
    # well under the 1% band; 400 steps puts the worst seed near 0.35%
    snr, steps = 10.0, 400
    for seed in range(trials(50)):
        channels, omega = scenario_channels(1000 + seed)
        dirs = zf_beamformers(channels, omega)
        gains = zf_gains(channels, dirs, omega)
        _, rate = zf_power_opt(gains, omega, snr)

        msgs = list(omega.omega)
        pts = [(i, j, steps - i - j)
               for i in range(steps + 1) for j in range(steps + 1 - i)]
        P = np.array(pts, dtype=float) * (snr / steps)
        worst = np.full(len(P), np.inf)
        for k in omega.users:
            streams = omega.omega_k[k]
            for r in range(1, len(streams) + 1):
                for B in combinations(streams, r):
                    s = sum(P[:, msgs.index(T)] * gains[(k, T)] for T in B)
                    worst = np.minimum(worst, np.log2(1.0 + s) / r)
        best = float(worst.max())
        assert rate >= best - 1e-9, seed
        assert abs(rate - best) <= 0.01 * max(rate, best), seed


# --- Monte Carlo rate targets -------------------------------------------------


def test_low_snr_horizontal_gain_between_two_and_six_db():
    n = trials(500)
    sca = sweep("cc-sca", 3, 2, 3, 1, 2, 2, -10.0, 10.0, 5.0, n)
    eq = sweep("cc-zf-eq", 3, 2, 3, 1, 2, 2, -10.0, 10.0, 5.0, n)
    # read the gain at the rate scale of the 0 dB operating point; the
    # level averages what the two schemes deliver there, so neither
    # curve's tail decides where the comparison happens
    i0 = eq.snr_db.index(0.0)
    level = 0.5 * (float(sca.mean()[i0]) + float(eq.mean()[i0]))
    gap = snr_at_level(eq.snr_db, eq.mean(), level) \
        - snr_at_level(sca.snr_db, sca.mean(), level)
    assert 2.0 <= gap <= 6.0, f"horizontal gap {gap:.2f} dB"


def test_high_snr_slopes_match_multiplexing_targets():
    # the small system has per-trial rate spreads near 2 bits, so its
    # slope estimate needs a few hundred draws to sit safely inside the
    # 15% band; the larger systems average over many slots per trial
    # and settle much faster. The serving-subset comparison keeps the
    # group equal to the whole subset (single partition class), which
    # is the configuration the slope range refers to.
    cases = [
        ((3, 2, 3, 1, 2, 2), 1.5, trials(400)),
        ((6, 5, 6, 1, 1, 1), 0.4, trials(100)),
        ((6, 5, 6, 1, 5, 5), 1.2, trials(100)),
    ]
    for (K, L, N, M, alpha, beta), target, n in cases:
        curve = sweep("cc-sca", K, L, N, M, alpha, beta, 30.0, 40.0, 5.0, n)
        slope = dof_estimate(curve, points=3)
        assert abs(slope - target) <= 0.15 * target, (K, alpha, beta, slope)


def test_high_snr_slope_is_independent_of_group_size():
    n = trials(100)
    curves = {
        beta: sweep("cc-sca", 6, 5, 6, 1, 5, beta, 30.0, 40.0, 5.0, n)
        for beta in (1, 2, 5)
    }
    slopes = {beta: dof_estimate(c, points=3) for beta, c in curves.items()}
    # smaller groups pay a finite-SNR power offset, visible as a
    # horizontal shift of a few dB at the top of the sweep
    level = float(curves[1].mean()[-1])
    gap = 40.0 - snr_at_level(curves[5].snr_db, curves[5].mean(), level)
    assert 2.0 <= gap <= 8.0, f"offset {gap:.2f} dB"
    # known shortfall: the beta=1 curve is still inside its transition
    # knee here (the same few-dB shift the offset check above measures),
    # so its window chord trails the single-group slope by slightly more
    # than the band allows (about 1.02 vs 1.23 at 400 trials, and the
    # iterates are fully converged, so this is the curve shape itself,
    # not solver slack). The assert keeps the advertised band rather
    # than widening it to fit.
    for a in slopes:
        for b in slopes:
            assert abs(slopes[a] - slopes[b]) <= 0.15 * max(slopes[a], slopes[b]), slopes


# --- special-case reductions --------------------------------------------------


def test_engine_reduces_to_single_stream_multicast():
    p = SchedulingParams.from_system(3, 2, 3, 1, 1, 1)
    H = sample_channel(3, 2, seed=5)
    snr = 10.0
    for s, part in enumerate_schedule(p):
        omega = build_omega(part, p.t)
        engine = sca_maxmin_mac(H.restrict(s), omega, snr).rate
        direct = maxmin_snr_multicast(H.restrict(s), snr).rate
        assert engine == pytest.approx(direct, abs=1e-6), s


def test_interference_pinned_engine_matches_power_loading():
    snr = 10.0
    for seed in range(10):
        channels, omega = scenario_channels(2000 + seed)
        dirs = zf_beamformers(channels, omega)
        _, rate_lp = zf_power_opt(zf_gains(channels, dirs, omega), omega, snr)
        res = sca_maxmin_mac(channels, omega, snr,
                             ScaOptions(zero_force=True, tol=1e-8, max_iter=100))
        assert res.rate == pytest.approx(rate_lp, abs=1e-4), seed
