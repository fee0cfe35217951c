"""Cache placement, coded message construction, and decoding.

File contents are byte strings of F bits (F divisible by 8 here since
libraries are built from bytes). A file splits into C(K,t) subfiles,
one per t-subset tau of users, in lexicographic tau order; each subfile
splits further into gamma equal mini-files. Subfile and mini-file
boundaries are contiguous bit slices, most significant bits first.

XOR bookkeeping runs on Python ints, which keeps the bit fiddling short
and exact.
"""

import json
from dataclasses import dataclass
from math import comb

from .combinatorics import (
    FreshTracker,
    OmegaSets,
    SchedulingParams,
    Subset,
    build_omega,
    enumerate_schedule,
    enumerate_subsets,
    fresh_index,
    gamma_count,
)
from .errors import ParameterError


@dataclass(frozen=True)
class Library:
    """N files of F bits each, indexed 1..N."""

    files: dict
    bits: int

    @classmethod
    def random(cls, N, bits, seed=0):
        import numpy as np

        if bits % 8 != 0:
            raise ParameterError("file size must be a whole number of bytes")
        rng = np.random.default_rng(seed)
        files = {n: bytes(rng.integers(0, 256, bits // 8, dtype=np.uint8)) for n in range(1, N + 1)}
        return cls(files=files, bits=bits)

    def as_int(self, n):
        return int.from_bytes(self.files[n], "big")


def default_file_bits(params: SchedulingParams) -> int:
    """Smallest byte-aligned F that splits evenly into all mini-files."""
    return comb(params.K, params.t) * gamma_count(params) * 8


def _check_divisible(params: SchedulingParams, bits: int) -> tuple[int, int]:
    pieces = comb(params.K, params.t)
    gamma = gamma_count(params)
    if bits % (pieces * gamma) != 0:
        raise ParameterError(
            f"file size {bits} bits does not split into {pieces} subfiles of {gamma} mini-files"
        )
    sub_bits = bits // pieces
    return sub_bits, sub_bits // gamma


def _slice_bits(value: int, total_bits: int, start: int, length: int) -> int:
    # bit 0 is the most significant bit of the file
    shift = total_bits - start - length
    return (value >> shift) & ((1 << length) - 1)


@dataclass(frozen=True)
class CacheContents:
    """Subfiles held by one user: (n, tau) -> subfile value as int."""

    user: int
    entries: dict
    subfile_bits: int


def place_cache(library: Library, params: SchedulingParams):
    """Caches for all users: user k stores W_(n,tau) for every tau containing k."""
    sub_bits, _ = _check_divisible(params, library.bits)
    taus = enumerate_subsets(params.K, params.t)
    caches = {}
    ints = {n: library.as_int(n) for n in library.files}
    for k in range(1, params.K + 1):
        entries = {}
        for n in library.files:
            for i, tau in enumerate(taus):
                if k in tau:
                    entries[(n, tau)] = _slice_bits(ints[n], library.bits, i * sub_bits, sub_bits)
        caches[k] = CacheContents(user=k, entries=entries, subfile_bits=sub_bits)
    return caches


@dataclass(frozen=True)
class CodedMessage:
    """One multicast message: XOR of one fresh mini-file per member of T.

    provenance records (receiver k, file n, tau, mini index j) for each
    component in XOR order.
    """

    target: Subset
    payload: int
    bits: int
    provenance: tuple


@dataclass(frozen=True)
class Transmission:
    subset: Subset
    partition: tuple
    omega: OmegaSets
    messages: tuple


@dataclass(frozen=True)
class DeliverySchedule:
    params: SchedulingParams
    demands: tuple
    transmissions: tuple
    mini_bits: int

    def payload_bits(self) -> int:
        return sum(m.bits for tx in self.transmissions for m in tx.messages)

    def dump_json_lines(self, fp):
        for tx in self.transmissions:
            rec = {
                "S": list(tx.subset),
                "P": [list(g) for g in tx.partition],
                "omega": [list(T) for T in tx.omega.omega],
                "messages": [
                    {
                        "T": list(m.target),
                        "provenance": [[k, n, list(tau), j] for (k, n, tau, j) in m.provenance],
                    }
                    for m in tx.messages
                ],
            }
            fp.write(json.dumps(rec) + "\n")


def _subfile_value(library, ints, params, sub_bits, n, tau):
    taus = enumerate_subsets(params.K, params.t)
    i = taus.index(tau)
    return _slice_bits(ints[n], library.bits, i * sub_bits, sub_bits)


def build_coded_message(demands, target: Subset, tracker: FreshTracker, library: Library,
                        params: SchedulingParams) -> CodedMessage:
    """XOR of the next fresh mini-file of W_(d_k, T\\{k}) over members k of T.

    Freshness is tracked per (file, receiver) stream so that users with
    identical demands still receive complementary mini-file sequences;
    with all-distinct demands this is exactly one stream per (n, tau).
    """
    sub_bits, mini_bits = _check_divisible(params, library.bits)
    taus = enumerate_subsets(params.K, params.t)
    ints = {n: library.as_int(n) for n in library.files}
    payload = 0
    prov = []
    for k in target:
        n = demands[k - 1]
        tau = tuple(x for x in target if x != k)
        j = fresh_index(tracker, (n, k), tau)
        sub = _slice_bits(ints[n], library.bits, taus.index(tau) * sub_bits, sub_bits)
        mini = _slice_bits(sub, sub_bits, (j - 1) * mini_bits, mini_bits)
        payload ^= mini
        prov.append((k, n, tau, j))
    return CodedMessage(target=target, payload=payload, bits=mini_bits, provenance=tuple(prov))


def run_delivery(demands, library: Library, params: SchedulingParams) -> DeliverySchedule:
    """Full delivery schedule for one demand vector.

    Walks every serving subset S and every partition of S into groups,
    emitting one transmission per (S, partition) that carries all coded
    messages of that slot.
    """
    demands = tuple(demands)
    if len(demands) != params.K:
        raise ParameterError(f"need {params.K} demands, got {len(demands)}")
    if any(not 1 <= d <= params.N for d in demands):
        raise ParameterError("demands must index files 1..N")
    if params.t >= params.K:
        return DeliverySchedule(params=params, demands=demands, transmissions=(), mini_bits=0)
    _, mini_bits = _check_divisible(params, library.bits)
    tracker = FreshTracker(gamma=gamma_count(params))
    txs = []
    for s, p in enumerate_schedule(params):
        om = build_omega(p, params.t)
        msgs = tuple(
            build_coded_message(demands, T, tracker, library, params) for T in om.omega
        )
        txs.append(Transmission(subset=s, partition=p, omega=om, messages=msgs))
    return DeliverySchedule(params=params, demands=demands, transmissions=tuple(txs),
                            mini_bits=mini_bits)


def decode_and_verify(k: int, cache: CacheContents, schedule: DeliverySchedule,
                      library: Library) -> bool:
    """Replay the schedule as user k and check bit-exact file recovery.

    The user strips every message addressed to a set containing k down
    to its own mini-file using cached subfiles, then reassembles the
    demanded file from cache plus received pieces and compares against
    the library.
    """
    params = schedule.params
    n_want = schedule.demands[k - 1]
    sub_bits = cache.subfile_bits
    if params.t >= params.K:
        return _reassemble(k, cache, {}, library, params, sub_bits, 0, n_want)
    mini_bits = schedule.mini_bits
    gamma = gamma_count(params)
    received = {}
    for tx in schedule.transmissions:
        for msg in tx.messages:
            if k not in msg.target:
                continue
            value = msg.payload
            mine = None
            for (rk, n, tau, j) in msg.provenance:
                if rk == k:
                    mine = (n, tau, j)
                    continue
                # every other component's tau contains k, so it is cached
                sub = cache.entries[(n, tau)]
                value ^= _slice_bits(sub, sub_bits, (j - 1) * mini_bits, mini_bits)
            if mine is None or mine[0] != n_want:
                return False
            received[(mine[1], mine[2])] = value
    # need every mini of every uncached subfile, exactly gamma per tau
    for tau in enumerate_subsets(params.K, params.t):
        if k in tau:
            continue
        for j in range(1, gamma + 1):
            if (tau, j) not in received:
                return False
    return _reassemble(k, cache, received, library, params, sub_bits, mini_bits, n_want)


def _reassemble(k, cache, received, library, params, sub_bits, mini_bits, n_want):
    gamma = gamma_count(params) if params.t < params.K else 1
    value = 0
    for tau in enumerate_subsets(params.K, params.t):
        if k in tau:
            sub = cache.entries[(n_want, tau)]
        else:
            sub = 0
            for j in range(1, gamma + 1):
                sub = (sub << mini_bits) | received[(tau, j)]
        value = (value << sub_bits) | sub
    return value == library.as_int(n_want)
