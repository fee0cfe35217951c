"""Index bookkeeping for the delivery schedule.

Users are numbered 1..K and files 1..N. Subsets are represented as
sorted tuples of ints, partitions as tuples of such tuples ordered by
their smallest member. All enumeration is eager and deterministic so
that schedules and their audits are reproducible.
"""

from dataclasses import dataclass, field
from itertools import combinations
from math import comb, factorial

from .errors import ParameterError, SchedulingBugError

Subset = tuple[int, ...]
Partition = tuple[Subset, ...]


@dataclass(frozen=True)
class SchedulingParams:
    """Validated system parameters for one caching configuration.

    K      number of single-antenna users
    L      transmit antennas
    N      files in the library
    M      per-user cache size in files
    t      global caching gain K*M/N, an integer
    alpha  transmitted coded messages per slot group dimension
    beta   users per multicast group is t+beta
    delta  groups per serving subset, (t+alpha)/(t+beta)
    """

    K: int
    L: int
    N: int
    M: int
    t: int
    alpha: int
    beta: int
    delta: int

    @classmethod
    def from_system(cls, K, L, N, M, alpha, beta):
        if min(K, L, N) < 1:
            raise ParameterError("K, L and N must be positive")
        if not 0 <= M <= N:
            raise ParameterError(f"cache size M={M} must lie in [0, N={N}]")
        if (K * M) % N != 0:
            raise ParameterError(f"t = K*M/N = {K * M}/{N} is not an integer")
        t = K * M // N
        if t == K:
            # every user caches the whole library; no delivery happens and
            # the multicast parameters are irrelevant
            return cls(K=K, L=L, N=N, M=M, t=t, alpha=alpha, beta=beta, delta=1)
        amax = min(L, K - t)
        if not 1 <= alpha <= amax:
            raise ParameterError(f"alpha={alpha} must lie in [1, min(L, K-t)={amax}]")
        if not 1 <= beta <= alpha:
            raise ParameterError(f"beta={beta} must lie in [1, alpha={alpha}]")
        if (t + alpha) % (t + beta) != 0:
            raise ParameterError(
                f"group size t+beta={t + beta} must divide subset size t+alpha={t + alpha}"
            )
        delta = (t + alpha) // (t + beta)
        return cls(K=K, L=L, N=N, M=M, t=t, alpha=alpha, beta=beta, delta=delta)


def enumerate_subsets(pool, size):
    """All size-``size`` subsets of ``pool`` as sorted tuples, lexicographic.

    ``pool`` may be an int K (meaning users 1..K) or an iterable.
    """
    if isinstance(pool, int):
        items = range(1, pool + 1)
    else:
        items = sorted(pool)
    if size < 0 or size > len(list(items)):
        raise ParameterError(f"subset size {size} out of range for pool of {len(list(items))}")
    return [tuple(c) for c in combinations(items, size)]


def enumerate_partitions(s: Subset, group_size: int) -> list[Partition]:
    """All partitions of ``s`` into equal groups of ``group_size``.

    Groups within a partition are ordered by smallest element, and the
    partition list itself comes out in lexicographic order of that
    canonical form. Built by always placing the smallest unassigned
    element, which yields each unordered partition exactly once.
    """
    s = tuple(sorted(s))
    if group_size < 1 or len(s) % group_size != 0:
        raise ParameterError(f"cannot split {len(s)} elements into groups of {group_size}")

    out: list[Partition] = []

    def rec(remaining: tuple[int, ...], acc: list[Subset]):
        if not remaining:
            out.append(tuple(acc))
            return
        head, rest = remaining[0], remaining[1:]
        for mates in combinations(rest, group_size - 1):
            group = (head,) + mates
            left = tuple(x for x in rest if x not in mates)
            acc.append(group)
            rec(left, acc)
            acc.pop()

    rec(s, [])
    return out


def partition_count(subset_size: int, group_size: int) -> int:
    """Closed form for len(enumerate_partitions): n! / (d! * (g!)^d)."""
    if subset_size % group_size != 0:
        raise ParameterError("group size must divide subset size")
    d = subset_size // group_size
    return factorial(subset_size) // (factorial(d) * factorial(group_size) ** d)


@dataclass(frozen=True)
class OmegaSets:
    """Message index sets for one transmission.

    omega       all multicast messages T of the slot, in group order
    omega_k     messages containing user k (the ones k must decode)
    omega_bar_k messages not containing k (interference at k)
    """

    users: Subset
    omega: tuple[Subset, ...]
    omega_k: dict[int, tuple[Subset, ...]]
    omega_bar_k: dict[int, tuple[Subset, ...]]


def build_omega(partition: Partition, t: int) -> OmegaSets:
    """Messages of a slot: every (t+1)-subset of every group of the partition."""
    omega: list[Subset] = []
    for group in partition:
        if len(group) < t + 1:
            raise ParameterError(f"group {group} smaller than message size t+1={t + 1}")
        omega.extend(tuple(c) for c in combinations(sorted(group), t + 1))
    users = tuple(sorted(x for g in partition for x in g))
    om = tuple(omega)
    omega_k = {k: tuple(T for T in om if k in T) for k in users}
    omega_bar = {k: tuple(T for T in om if k not in T) for k in users}
    return OmegaSets(users=users, omega=om, omega_k=omega_k, omega_bar_k=omega_bar)


def gamma_count(params: SchedulingParams) -> int:
    """Mini-files per subfile needed so the schedule never reuses content.

    Equals the number of times a given message index pair (n, tau)
    is requested across the whole schedule.
    """
    K, t, a, b, d = params.K, params.t, params.alpha, params.beta, params.delta
    if t >= K:
        return 1
    num = comb(K - t - 1, a - 1) * factorial(a - 1)
    den = factorial(d - 1) * factorial(b - 1) * factorial(t + b) ** (d - 1)
    if num % den != 0:
        raise SchedulingBugError(f"gamma formula not integral for {params}")
    return num // den


def enumerate_schedule(params: SchedulingParams):
    """Yield (S, partition) pairs of the full delivery schedule in order."""
    if params.t >= params.K:
        return
    for s in enumerate_subsets(params.K, params.t + params.alpha):
        for p in enumerate_partitions(s, params.t + params.beta):
            yield s, p


@dataclass
class FreshTracker:
    """Hands out mini-file indices 1..gamma per (n, tau) stream.

    A stream is one subfile as seen by one demand slot; asking for more
    than ``gamma`` fresh pieces of the same stream means the schedule
    is broken, not the caller.
    """

    gamma: int
    counters: dict = field(default_factory=dict)

    def total_requests(self) -> int:
        return sum(self.counters.values())


def fresh_index(tracker: FreshTracker, n, tau: Subset) -> int:
    key = (n, tuple(tau))
    used = tracker.counters.get(key, 0)
    if used >= tracker.gamma:
        raise SchedulingBugError(
            f"stream {key} exhausted: {used} of {tracker.gamma} mini-files already used"
        )
    tracker.counters[key] = used + 1
    return used + 1
