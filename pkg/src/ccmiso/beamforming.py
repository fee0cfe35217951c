"""Beamformer designs for one transmission slot.

The central routine is sca_maxmin_mac: maximize the worst-user symmetric
MAC rate over the multicast beamformers of a slot, subject to a sum
power budget. The exact problem is nonconvex because the per-stream
SINR targets gamma couple to the beams through

    N0 + interference(k) <= (signal + interference + N0) / (1 + gamma),

whose right side is jointly convex in (beams, gamma) as a quadratic
over a positive affine. Successive convex approximation replaces that
side by its first-order lower bound at the current iterate, which makes
every iteration a cone program and the achieved rate nondecreasing.

Also here: zero-forcing directions with optimal or equal power loading,
single-stream max-min multicast (the alpha = beta = 1 special case),
and max-min SINR unicasting used by the baseline without caching.
"""

import itertools
from dataclasses import dataclass, field
from math import inf, log2, sqrt

import numpy as np
from scipy.optimize import linprog

from .combinatorics import OmegaSets, build_omega
from .errors import (
    DegenerateChannelError,
    InfeasibleDesignError,
    NumericalError,
    ParameterError,
)
from .linalg import dominant_eigvec, null_projector
from .phy import BeamformerSet, mac_rate, sinr
from .socp import AffineExpr, ClarabelBackend, ConicSubproblem, solve_maxmin


def _gname(k, T):
    return f"g|{k}|{','.join(map(str, T))}"


@dataclass(frozen=True)
class Linearization:
    """First-order lower bound of f(w, gamma) = (N0 + sum_A |h^H w_A|^2) / (1 + gamma).

    The bound is affine: const + sum_A 2 Re(grad_A^H w_A) + slope * gamma.
    It touches f at the expansion point and never exceeds it anywhere on
    gamma > -1, because f is jointly convex there.
    """

    const: float
    slope: float
    grads: dict
    point_value: float

    def evaluate(self, beams, gamma):
        val = self.const + self.slope * gamma
        for key, g in self.grads.items():
            val += 2.0 * float(np.real(np.vdot(g, beams[key])))
        return val

    def rhs_expr(self, gamma_name) -> AffineExpr:
        expr = AffineExpr(const=self.const)
        expr.add_scalar(gamma_name, self.slope)
        for key, g in self.grads.items():
            expr.add_beam_grad(key, g)
        return expr


def linearize(h, beams_bar, gamma_bar, signal_key, interferer_keys, N0=1.0) -> Linearization:
    """Expand f around (beams_bar, gamma_bar) for one (user, message) pair.

    The sum in f runs over the signal message and every interferer seen
    by the user, matching the rearranged SINR constraint.
    """
    if gamma_bar <= -1.0:
        raise ParameterError("expansion point needs 1 + gamma > 0")
    keys = [signal_key] + list(interferer_keys)
    denom = 1.0 + gamma_bar
    qbar = N0 + sum(abs(np.vdot(h, beams_bar[key])) ** 2 for key in keys)
    fbar = qbar / denom
    grads = {}
    for key in keys:
        gain = np.vdot(h, beams_bar[key])  # h^H w
        grads[key] = h * gain / denom
    slope = -qbar / denom**2
    const = fbar - slope * gamma_bar
    for key in keys:
        const -= 2.0 * float(np.real(np.vdot(grads[key], beams_bar[key])))
    return Linearization(const=const, slope=slope, grads=grads, point_value=fbar)


@dataclass
class ScaState:
    """Expansion point and progress record of one SCA run."""

    beams: dict
    gammas: dict                 # (k, T) -> gamma at the expansion point
    iteration: int = 0
    history: list = field(default_factory=list)   # worst-user rate per iterate


@dataclass
class ScaOptions:
    tol: float = 1e-4
    max_iter: int = 50
    restarts: int = 3
    N0: float = 1.0
    mode: str = "direct"         # or "bisection"
    backend: object = None
    zero_force: bool = False
    seed: int = 0
    trace: object = None         # callable(record dict), optional


@dataclass
class ScaResult:
    beams: BeamformerSet
    rate: float
    state: ScaState

    @property
    def history(self):
        return self.state.history


def build_subproblem(state: ScaState, channels: dict, omega: OmegaSets, snr: float,
                     N0: float = 1.0, zero_force: bool = False) -> ConicSubproblem:
    """Cone program of one SCA iteration.

    Variables: one complex beam per message, one gamma per (user,
    message the user decodes), and the substituted rate variable
    rtil = 2^rate. Constraints: the power budget, every MAC subset
    bound rtil^|B| <= 1 + sum of gammas in B, and one linearized SINR
    constraint per gamma. Zero-forcing mode pins the interference
    inner products to zero instead of trusting the optimizer.
    """
    some = next(iter(channels.values()))
    prob = ConicSubproblem(beam_keys=list(omega.omega), L=len(some))
    prob.add_scalar("rtil")
    for k in omega.users:
        for T in omega.omega_k[k]:
            prob.add_scalar(_gname(k, T))
    prob.objective = "rtil"
    prob.power_budget(snr)
    for k in omega.users:
        streams = omega.omega_k[k]
        for r in range(1, len(streams) + 1):
            for B in itertools.combinations(streams, r):
                prob.geomean_leq("rtil", r, [_gname(k, T) for T in B], 1.0, tag="mac")
    for k in omega.users:
        h = channels[k]
        for T in omega.omega_k[k]:
            lin = linearize(h, state.beams, state.gammas[(k, T)], T,
                            omega.omega_bar_k[k], N0=N0)
            terms = [(h, Tbar) for Tbar in omega.omega_bar_k[k]]
            prob.quad_leq_affine(terms, N0, lin.rhs_expr(_gname(k, T)), tag="sinr")
    if zero_force:
        users = set(omega.users)
        for T in omega.omega:
            for j in sorted(users - set(T)):
                prob.complex_zero(channels[j], T, tag="zf")
    return prob


def _exact_gammas(channels, beams, omega, N0):
    out = {}
    bs = BeamformerSet(beams=beams)
    for k in omega.users:
        for T, g in sinr(channels, k, bs, omega, N0).items():
            out[(k, T)] = g
    return out


def _bottleneck(gammas, omega):
    worst = inf
    for k in omega.users:
        worst = min(worst, mac_rate({T: gammas[(k, T)] for T in omega.omega_k[k]}))
    return worst


def matched_filter_beams(channels, omega, snr):
    """Per-message dominant-eigvector directions at equal power split."""
    scale = sqrt(snr / len(omega.omega))
    beams = {}
    for T in omega.omega:
        M = sum(np.outer(channels[k], channels[k].conj()) for k in T)
        beams[T] = scale * dominant_eigvec(M)
    return beams


def zf_beamformers(channels: dict, omega: OmegaSets) -> dict:
    """Unit-norm directions nulled at every slot member outside the message.

    Within the nullspace the direction follows the strongest eigenvector
    of the group channel covariance, projected back to keep residual
    leakage at numerical zero.
    """
    users = set(omega.users)
    beams = {}
    for T in omega.omega:
        others = sorted(users - set(T))
        Q = null_projector([channels[j] for j in others], L=len(channels[next(iter(users))]))
        M = sum(np.outer(channels[k], channels[k].conj()) for k in T)
        v = dominant_eigvec(Q @ M @ Q)
        v = Q @ v
        nrm = np.linalg.norm(v)
        if nrm < 1e-12:
            raise DegenerateChannelError(f"no usable zero-forcing direction for {T}")
        beams[T] = v / nrm
    return beams


def zf_gains(channels, directions, omega, N0=1.0):
    """u[(k, T)] = |h_k^H w_T|^2 / N0 for unit-power ZF directions."""
    return {
        (k, T): abs(np.vdot(channels[k], directions[T])) ** 2 / N0
        for k in omega.users
        for T in omega.omega_k[k]
    }


def zf_power_opt(gains: dict, omega: OmegaSets, snr: float, tol: float = 1e-11):
    """Optimal power loading across interference-free streams.

    With zero-forced directions the SINRs are linear in the powers, so
    the worst-user MAC rate is quasiconcave and a bisection on the
    common rate with one linear feasibility program per step finds the
    optimum. Returns (powers by message, rate).
    """
    order = list(omega.omega)
    col = {T: i for i, T in enumerate(order)}
    n = len(order)
    rows_budget = np.ones((1, n))

    def feasible(rate):
        A_ub = [rows_budget[0]]
        b_ub = [snr]
        for k in omega.users:
            streams = omega.omega_k[k]
            for r in range(1, len(streams) + 1):
                for B in itertools.combinations(streams, r):
                    row = np.zeros(n)
                    for T in B:
                        row[col[T]] = -gains[(k, T)]
                    A_ub.append(row)
                    b_ub.append(-(2.0 ** (r * rate) - 1.0))
        res = linprog(c=np.zeros(n), A_ub=np.array(A_ub), b_ub=np.array(b_ub),
                      bounds=[(0, None)] * n, method="highs")
        if res.status == 0:
            return res.x
        if res.status == 2:
            return None
        raise InfeasibleDesignError(f"power loading LP failed with status {res.status}")

    if any(u < 0 for u in gains.values()):
        raise ParameterError("stream gains must be nonnegative")
    hi = log2(1.0 + snr * max(gains.values())) + 1.0
    lo, best = 0.0, feasible(0.0)
    for _ in range(200):
        if hi - lo <= tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        x = feasible(mid)
        if x is not None:
            lo, best = mid, x
        else:
            hi = mid
    powers = {T: float(best[col[T]]) for T in order}
    return powers, lo


def equal_power_beams(directions, omega, snr):
    scale = sqrt(snr / len(omega.omega))
    return {T: scale * directions[T] for T in omega.omega}


def _initial_beams(channels, omega, snr, N0):
    """Feasible deterministic warm start.

    Zero-forcing directions with optimized power loading whenever the
    nullspaces exist; the achieved rate then lower-bounds every SCA
    iterate. Falls back to matched filters at equal power when the slot
    has more outside users than spare antennas.
    """
    try:
        dirs = zf_beamformers(channels, omega)
        powers, _ = zf_power_opt(zf_gains(channels, dirs, omega, N0), omega, snr)
        return {T: sqrt(powers[T]) * dirs[T] for T in omega.omega}
    except (DegenerateChannelError, NumericalError):
        return matched_filter_beams(channels, omega, snr)


def sca_maxmin_mac(channels: dict, omega: OmegaSets, snr: float,
                   opts: ScaOptions = None) -> ScaResult:
    """Maximize the worst-user symmetric MAC rate of one slot.

    Runs successive convex approximation from a feasible warm start,
    re-expanding at the exact SINRs of each new design, until the
    bottleneck rate moves by less than tol or the iteration budget is
    spent. A solver hiccup before any iterate succeeds triggers a
    seeded random restart; one after progress ends the loop, since at
    that point the subproblem is numerically exhausted and the
    incumbent is already a fixed point up to solver accuracy. If no
    iteration ever succeeds the slot is declared infeasible.
    """
    opts = opts or ScaOptions()
    backend = opts.backend or ClarabelBackend()
    beams = _initial_beams(channels, omega, snr, opts.N0)
    gammas = _exact_gammas(channels, beams, omega, opts.N0)
    state = ScaState(beams=beams, gammas=gammas)
    state.history.append(_bottleneck(gammas, omega))
    hi = 1.0 + snr * max(float(np.linalg.norm(h)) ** 2 for h in channels.values()) / opts.N0
    rng = np.random.default_rng(opts.seed)
    restarts_left = opts.restarts
    incumbent = (state.history[0], dict(beams))
    while state.iteration < opts.max_iter:
        prob = build_subproblem(state, channels, omega, snr, N0=opts.N0,
                                zero_force=opts.zero_force)
        sol = solve_maxmin(prob, backend, mode=opts.mode, hi=hi)
        if opts.trace is not None:
            opts.trace({
                "iteration": state.iteration,
                "status": sol.status,
                "objective": log2(sol.objective) if sol.ok and sol.objective > 0 else None,
            })
        if not sol.ok:
            if state.iteration > 0:
                break
            if restarts_left <= 0:
                raise InfeasibleDesignError(
                    f"no SCA iteration succeeded (last status {sol.status})"
                )
            restarts_left -= 1
            state.beams = _perturbed_beams(incumbent[1], snr, rng)
            state.gammas = _exact_gammas(channels, state.beams, omega, opts.N0)
            state.history[0] = _bottleneck(state.gammas, omega)
            continue
        state.beams = sol.beams
        state.gammas = _exact_gammas(channels, sol.beams, omega, opts.N0)
        state.iteration += 1
        rate = _bottleneck(state.gammas, omega)
        state.history.append(rate)
        if rate > incumbent[0]:
            incumbent = (rate, dict(sol.beams))
        prev = state.history[-2]
        if abs(rate - prev) <= opts.tol * max(prev, 1e-12):
            break
    best_rate, best_beams = incumbent
    return ScaResult(beams=BeamformerSet(beams=best_beams), rate=best_rate, state=state)


def _perturbed_beams(beams, snr, rng):
    out = {}
    for T, w in beams.items():
        noise = rng.standard_normal(w.shape) + 1j * rng.standard_normal(w.shape)
        out[T] = w + 0.05 * np.linalg.norm(w) * noise / np.linalg.norm(noise)
    total = sum(np.linalg.norm(w) ** 2 for w in out.values())
    if total > snr:
        scale = sqrt(snr / total)
        out = {T: scale * w for T, w in out.items()}
    return out


def maxmin_snr_multicast(channels: dict, snr: float, opts: ScaOptions = None) -> ScaResult:
    """Single-message max-min multicast: all listed users decode one stream.

    This is the engine run on the degenerate index sets Omega = {T},
    empty interference, which reduces the MAC region to the plain SNR
    constraint per user.
    """
    users = tuple(sorted(channels))
    omega = build_omega((users,), t=len(users) - 1)
    return sca_maxmin_mac(channels, omega, snr, opts)


def unicast_maxmin(channels: dict, snr: float, N0: float = 1.0,
                   backend=None, tol: float = 1e-9):
    """Max-min SINR unicast beamforming for the users in ``channels``.

    Bisection over the common SINR target; each test is a feasibility
    cone program where the target scales the interference-plus-noise
    norm against the real part of the useful gain, the standard phase
    fixing that loses no generality. Returns (beams, rate).
    """
    backend = backend or ClarabelBackend()
    users = sorted(channels)
    some = channels[users[0]]

    def feasibility(target):
        prob = ConicSubproblem(beam_keys=list(users), L=len(some))
        prob.power_budget(snr)
        root = sqrt(target)
        for k in users:
            h = channels[k]
            terms = [(root * h, i) for i in users if i != k]
            prob.norm_leq_re(terms, [root * sqrt(N0)], h, k, tag="sinr")
            prob.imag_zero(h, k)
        return prob

    lo, hi = 0.0, snr * max(float(np.linalg.norm(h)) ** 2 for h in channels.values()) / N0
    best = None
    for _ in range(200):
        if hi - lo <= tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        sol = backend.solve(feasibility(mid))
        if sol.ok:
            lo, best = mid, sol.beams
        else:
            hi = mid
    if best is None:
        raise InfeasibleDesignError("unicast design infeasible even at zero SINR")
    return best, log2(1.0 + lo)
