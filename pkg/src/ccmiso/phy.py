"""Channel model, achievable rates, and rate accounting.

Rates are in bits per channel use (log base 2) and the noise floor N0
defaults to 1, so transmit power and SNR coincide.
"""

from dataclasses import dataclass
from itertools import combinations
from math import comb, inf, log2

import numpy as np

from .combinatorics import OmegaSets, SchedulingParams, gamma_count
from .errors import DimensionError, ParameterError


@dataclass(frozen=True)
class ChannelMatrix:
    """K x L i.i.d. complex Gaussian channel, one row per user."""

    H: np.ndarray
    seed: int

    def h(self, k: int) -> np.ndarray:
        """Channel vector of user k (users are numbered from 1)."""
        return self.H[k - 1]

    def restrict(self, users) -> dict:
        return {k: self.h(k) for k in users}


def sample_channel(K: int, L: int, seed: int) -> ChannelMatrix:
    """Draw h_k ~ CN(0, I_L): real and imaginary parts N(0, 1/2)."""
    rng = np.random.default_rng(seed)
    H = (rng.standard_normal((K, L)) + 1j * rng.standard_normal((K, L))) / np.sqrt(2.0)
    return ChannelMatrix(H=H, seed=seed)


@dataclass(frozen=True)
class BeamformerSet:
    """Beamforming vectors of one transmission, keyed by message index T."""

    beams: dict

    def power(self) -> float:
        return float(sum(np.linalg.norm(w) ** 2 for w in self.beams.values()))


def sinr(channels: dict, k: int, beams: BeamformerSet, omega: OmegaSets,
         N0: float = 1.0) -> dict:
    """Per-message SINRs at user k.

    Message T is received with power |h_k^H w_T|^2; everything k does
    not decode (omega_bar_k) is interference.
    """
    h = channels[k]
    interference = 0.0
    for T in omega.omega_bar_k[k]:
        interference += abs(np.vdot(h, beams.beams[T])) ** 2
    out = {}
    for T in omega.omega_k[k]:
        sig = abs(np.vdot(h, beams.beams[T])) ** 2
        out[T] = sig / (N0 + interference)
    return out


def mac_rate(gammas: dict) -> float:
    """Symmetric per-stream rate of the multiple-access region.

    With equal rates on every stream the region caps the common rate at
    (1/|B|) log2(1 + sum of SINRs in B) for every nonempty subset B of
    the streams; the achievable rate is the minimum over subsets,
    enumerated exhaustively.
    """
    if not gammas:
        raise ParameterError("mac_rate needs at least one stream")
    vals = list(gammas.values())
    if any(g < 0 for g in vals):
        raise ParameterError("SINRs must be nonnegative")
    best = inf
    for r in range(1, len(vals) + 1):
        for B in combinations(vals, r):
            best = min(best, log2(1.0 + sum(B)) / r)
    return best


def transmission_time(params: SchedulingParams, rate: float, file_bits: float = 1.0) -> float:
    """Channel uses needed to push one mini-file at the given rate.

    A nonpositive rate means the slot never completes; the infinite
    sentinel propagates into a zero symmetric rate.
    """
    if rate <= 0.0:
        return inf
    mini = file_bits / (comb(params.K, params.t) * gamma_count(params))
    return mini / rate


def symmetric_rate(slot_times, file_bits: float = 1.0) -> float:
    """Delivered bits per channel use over the full schedule: F / sum of times."""
    total = 0.0
    for dt in slot_times:
        if dt == inf:
            return 0.0
        total += dt
    if total <= 0.0:
        raise ParameterError("schedule has no transmissions")
    return file_bits / total


@dataclass
class RateCurve:
    """Monte Carlo symmetric-rate curve: per SNR point, one rate per trial."""

    scheme: str
    snr_db: list
    rates: list  # rates[i] is the list of per-trial rates at snr_db[i]

    def mean(self) -> np.ndarray:
        return np.array([float(np.mean(r)) for r in self.rates])

    def stderr(self) -> np.ndarray:
        return np.array(
            [float(np.std(r, ddof=1) / np.sqrt(len(r))) if len(r) > 1 else 0.0
             for r in self.rates]
        )


def snr_at_level(snr_db, means, level: float) -> float:
    """SNR in dB at which a mean-rate curve crosses the given rate level.

    Inverts the piecewise-linear curve through (snr_db, means); the
    means must be strictly increasing and must bracket the level.
    Horizontal distances between two curves at a common rate level are
    differences of this quantity.
    """
    snr_db = list(snr_db)
    means = [float(m) for m in means]
    if len(snr_db) != len(means) or len(means) < 2:
        raise DimensionError("need two equal-length grids of at least two points")
    if any(b <= a for a, b in zip(means, means[1:])):
        raise ParameterError("mean curve must be strictly increasing to invert")
    if not means[0] <= level <= means[-1]:
        raise ParameterError(
            f"rate level {level:.4g} outside the curve range [{means[0]:.4g}, {means[-1]:.4g}]"
        )
    return float(np.interp(level, means, snr_db))


def dof_estimate(curve: RateCurve, points: int = 3) -> float:
    """Slope of mean rate against log2(SNR) over the top SNR points.

    The degrees of freedom of a scheme is the high-SNR slope of its rate
    curve; a least-squares fit over the last ``points`` grid points
    estimates it.
    """
    if points < 2 or points > len(curve.snr_db):
        raise DimensionError("need at least two points inside the curve")
    x = np.array([db * log2(10.0) / 10.0 for db in curve.snr_db[-points:]])
    y = curve.mean()[-points:]
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)
