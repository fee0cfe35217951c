"""Command line front-end: plots <spec-file-or-flags>.

A spec file is the same flat key=value format the simulator CLI uses,
with keys mirroring the flags; flags override file values. Exit code 2
covers bad parameters, schema mismatches, and empty inputs.
"""

import argparse
import sys

from .figure import DEFAULT_GROUP_BY, PlotSpec, render


def build_parser():
    p = argparse.ArgumentParser(
        prog="plots",
        description="Render mean rate-vs-SNR curves from simulation result CSVs.",
    )
    p.add_argument("spec", nargs="?", help="flat key=value spec file mirroring the flags")
    p.add_argument("--csv", action="append", default=None,
                   help="input CSV path (repeatable)")
    p.add_argument("--out", help="output image path")
    p.add_argument("--group-by", dest="group_by",
                   help="comma-separated grouping columns (default scheme,alpha,beta)")
    p.add_argument("--xlabel", help="x axis label")
    p.add_argument("--ylabel", help="y axis label")
    p.add_argument("--title", help="figure title")
    p.add_argument("--no-bands", action="store_true",
                   help="draw lines only, no standard-error bands")
    return p


def _read_spec_file(path):
    values = {}
    with open(path) as fp:
        for lineno, raw in enumerate(fp, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    return values


def _assemble(args):
    values = {}
    if args.spec:
        raw = _read_spec_file(args.spec)
        known = {"csv", "out", "group_by", "xlabel", "ylabel", "title", "bands"}
        for key, sval in raw.items():
            if key not in known:
                raise ValueError(f"unknown spec key {key!r}")
            values[key] = sval
    inputs = args.csv or (values["csv"].split(",") if "csv" in values else [])
    inputs = [p.strip() for p in inputs if p.strip()]
    if not inputs:
        raise ValueError("no input CSVs given (use --csv or a csv= spec line)")
    out = args.out or values.get("out")
    if not out:
        raise ValueError("no output image path given (use --out or an out= spec line)")
    group_by = args.group_by or values.get("group_by")
    group_by = tuple(g.strip() for g in group_by.split(",")) if group_by else DEFAULT_GROUP_BY
    bands = not args.no_bands
    if "bands" in values and not args.no_bands:
        bands = values["bands"].lower() not in ("0", "false", "no")
    return PlotSpec(
        inputs=tuple(inputs),
        out=out,
        group_by=group_by,
        xlabel=args.xlabel or values.get("xlabel") or PlotSpec.xlabel,
        ylabel=args.ylabel or values.get("ylabel") or PlotSpec.ylabel,
        title=args.title or values.get("title") or "",
        bands=bands,
    )


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        spec = _assemble(args)
        curves = render(spec)
    except (ValueError, OSError) as exc:
        # SchemaError and EmptyInputError subclass ValueError and land here
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {spec.out} ({len(curves)} curves)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
