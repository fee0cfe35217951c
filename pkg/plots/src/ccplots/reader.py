"""Strict reader for the simulator's result CSV.

The schema is part of the contract between the simulation package and
this renderer, so the header must match column for column and every
field must parse as its declared type. Anything else is a hard error
that names the offending column rather than a silently wrong plot.
"""

import csv

CSV_HEADER = "scheme,K,L,N,M,alpha,beta,snr_db,trial,sym_rate"
COLUMNS = tuple(CSV_HEADER.split(","))

_INT_COLUMNS = ("K", "L", "N", "M", "alpha", "beta", "trial")
_FLOAT_COLUMNS = ("snr_db", "sym_rate")


class SchemaError(ValueError):
    """The file does not carry the expected result schema."""


class EmptyInputError(ValueError):
    """The file parses but holds no result rows."""


def _check_header(fields, path):
    for i, expected in enumerate(COLUMNS):
        if i >= len(fields):
            raise SchemaError(f"{path}: missing column {expected!r}")
        if fields[i] != expected:
            raise SchemaError(
                f"{path}: column {i + 1} should be {expected!r}, found {fields[i]!r}"
            )
    if len(fields) > len(COLUMNS):
        raise SchemaError(f"{path}: unexpected extra column {fields[len(COLUMNS)]!r}")


def read_rows(path):
    """Parse one CSV into a list of per-trial dicts keyed by column name."""
    rows = []
    with open(path, newline="") as fp:
        reader = csv.reader(fp)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: file is empty, expected header {CSV_HEADER!r}")
        _check_header(header, path)
        for lineno, fields in enumerate(reader, 2):
            if len(fields) != len(COLUMNS):
                raise SchemaError(
                    f"{path}:{lineno}: expected {len(COLUMNS)} fields, found {len(fields)}"
                )
            row = dict(zip(COLUMNS, fields))
            for col in _INT_COLUMNS:
                try:
                    row[col] = int(row[col])
                except ValueError:
                    raise SchemaError(
                        f"{path}:{lineno}: column {col!r} should be an integer, "
                        f"found {row[col]!r}"
                    )
            for col in _FLOAT_COLUMNS:
                try:
                    row[col] = float(row[col])
                except ValueError:
                    raise SchemaError(
                        f"{path}:{lineno}: column {col!r} should be a number, "
                        f"found {row[col]!r}"
                    )
            rows.append(row)
    if not rows:
        raise EmptyInputError(f"{path}: no result rows to plot")
    return rows
