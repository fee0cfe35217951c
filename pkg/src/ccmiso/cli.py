"""Command line entry point.

Runs one scheme over an SNR grid and writes the rate samples as CSV.
Flags mirror the SimConfig fields; a flat key=value config file can
stand in for any of them, with explicit flags taking precedence.

Exit codes: 0 on success, 2 for invalid parameters, 3 when the solver
gives up on a design.
"""

import argparse
import json
import sys
from dataclasses import replace

from .beamforming import ScaOptions
from .errors import ParameterError, SolverFailure
from .experiments import SCHEMES, SimConfig, audit_schedule, emit_csv, run_scheme, validate

_FLOAT_KEYS = {"snr_start", "snr_stop", "snr_step", "N0"}
_INT_KEYS = {"K", "L", "N", "M", "alpha", "beta", "trials", "seed", "workers"}


def _read_config_file(path):
    values = {}
    with open(path) as fp:
        for lineno, raw in enumerate(fp, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    return values


def build_parser():
    p = argparse.ArgumentParser(
        prog="ccmiso",
        description="Coded caching over a multi-antenna broadcast channel: "
                    "symmetric-rate Monte Carlo sweeps.",
    )
    p.add_argument("--config", help="flat key=value file mirroring the flags")
    p.add_argument("--K", type=int, help="number of users")
    p.add_argument("--L", type=int, help="transmit antennas")
    p.add_argument("--N", type=int, help="library size in files")
    p.add_argument("--M", type=int, help="cache size in files")
    p.add_argument("--alpha", type=int, help="spatial multicast dimension")
    p.add_argument("--beta", type=int, help="multicast group size parameter")
    p.add_argument("--scheme", choices=SCHEMES, help="delivery scheme")
    p.add_argument("--snr-start", type=float, dest="snr_start", help="grid start in dB")
    p.add_argument("--snr-stop", type=float, dest="snr_stop", help="grid stop in dB")
    p.add_argument("--snr-step", type=float, dest="snr_step", help="grid step in dB")
    p.add_argument("--trials", type=int, help="channel realizations per SNR point")
    p.add_argument("--seed", type=int, help="base RNG seed")
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--audit", action="store_true",
                   help="print schedule counting audit as JSON and exit")
    p.add_argument("--trace", help="append per-iteration solver trace as JSON lines")
    return p


_DEFAULTS = {
    "snr_start": -10.0,
    "snr_stop": 40.0,
    "snr_step": 5.0,
    "trials": 500,
    "seed": 0,
    "workers": 1,
}


def _assemble_config(args):
    values = {}
    if args.config:
        raw = _read_config_file(args.config)
        for key, sval in raw.items():
            if key in _INT_KEYS:
                values[key] = int(sval)
            elif key in _FLOAT_KEYS:
                values[key] = float(sval)
            elif key in ("scheme", "out", "trace"):
                values[key] = sval
            else:
                raise ParameterError(f"unknown config key {key!r}")
    for key in ("K", "L", "N", "M", "alpha", "beta", "scheme",
                "snr_start", "snr_stop", "snr_step", "trials", "seed", "workers"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    for key, default in _DEFAULTS.items():
        values.setdefault(key, default)
    for key in ("K", "L", "N", "M", "scheme"):
        if key not in values:
            raise ParameterError(f"missing required parameter {key}")
    values.setdefault("alpha", 1)
    values.setdefault("beta", values["alpha"])
    out = values.pop("out", None) or args.out
    trace = values.pop("trace", None) or args.trace
    return SimConfig(**values), out, trace


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config, out, trace_path = _assemble_config(args)
        params = validate(config)
        if args.audit:
            print(json.dumps(audit_schedule(params), indent=2))
            return 0
        if trace_path:
            if config.workers > 1:
                raise ParameterError("trace logging requires workers=1")
            trace_fp = open(trace_path, "a")

            def trace(rec):
                trace_fp.write(json.dumps(rec) + "\n")

            config = replace(config, sca=ScaOptions(trace=trace))
        _, rows = run_scheme(config)
        if out:
            with open(out, "w") as fp:
                emit_csv(rows, fp)
        else:
            emit_csv(rows, sys.stdout)
        if trace_path:
            trace_fp.close()
        return 0
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
