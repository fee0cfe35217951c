import pytest

from ccplots.reader import CSV_HEADER, EmptyInputError, SchemaError, read_rows

GOOD = (
    CSV_HEADER + "\n"
    "cc-sca,3,2,3,1,2,2,0,0,1.23457\n"
    "cc-sca,3,2,3,1,2,2,0,1,1.5\n"
    "cc-zf-eq,3,2,3,1,2,2,-10,0,0.012\n"
)


def write(tmp_path, text, name="rows.csv"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parses_types(tmp_path):
    rows = read_rows(write(tmp_path, GOOD))
    assert len(rows) == 3
    assert rows[0]["scheme"] == "cc-sca"
    assert rows[0]["K"] == 3 and isinstance(rows[0]["K"], int)
    assert rows[2]["snr_db"] == -10.0
    assert rows[1]["sym_rate"] == 1.5


def test_renamed_column_is_named_in_error(tmp_path):
    bad = GOOD.replace("snr_db", "snr")
    with pytest.raises(SchemaError, match="'snr_db'.*'snr'"):
        read_rows(write(tmp_path, bad))


def test_missing_column_is_named(tmp_path):
    bad = GOOD.replace(",trial", "").replace(",0,0,", ",0,").replace(",0,1,", ",0,") \
              .replace(",-10,0,", ",-10,")
    with pytest.raises(SchemaError, match="trial"):
        read_rows(write(tmp_path, bad))


def test_extra_column_rejected(tmp_path):
    bad = CSV_HEADER + ",note\ncc-sca,3,2,3,1,2,2,0,0,1.0,hi\n"
    with pytest.raises(SchemaError, match="note"):
        read_rows(write(tmp_path, bad))


def test_non_numeric_rate_is_named(tmp_path):
    bad = CSV_HEADER + "\ncc-sca,3,2,3,1,2,2,0,0,fast\n"
    with pytest.raises(SchemaError, match="sym_rate"):
        read_rows(write(tmp_path, bad))


def test_fractional_trial_is_named(tmp_path):
    bad = CSV_HEADER + "\ncc-sca,3,2,3,1,2,2,0,0.5,1.0\n"
    with pytest.raises(SchemaError, match="trial"):
        read_rows(write(tmp_path, bad))


def test_short_row_rejected(tmp_path):
    bad = CSV_HEADER + "\ncc-sca,3,2,3\n"
    with pytest.raises(SchemaError, match="expected 10 fields"):
        read_rows(write(tmp_path, bad))


def test_header_only_is_empty_input(tmp_path):
    with pytest.raises(EmptyInputError):
        read_rows(write(tmp_path, CSV_HEADER + "\n"))


def test_zero_byte_file_is_schema_error(tmp_path):
    with pytest.raises(SchemaError):
        read_rows(write(tmp_path, ""))
