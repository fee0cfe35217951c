import io
import json
import subprocess
import sys

import pytest

from ccmiso.errors import ParameterError
from ccmiso.experiments import (
    CSV_HEADER,
    SimConfig,
    audit_schedule,
    derive_seed,
    emit_csv,
    run_scheme,
    validate,
)


def cfg(**kw):
    base = dict(K=3, L=2, N=3, M=1, alpha=2, beta=2, scheme="cc-zf-eq",
                snr_start=0.0, snr_stop=10.0, snr_step=10.0, trials=2)
    base.update(kw)
    return SimConfig(**base)


class TestValidate:
    def test_accepts_scenario(self):
        p = validate(cfg())
        assert (p.t, p.alpha, p.beta, p.delta) == (1, 2, 2, 1)

    def test_rejects_unknown_scheme(self):
        with pytest.raises(ParameterError):
            validate(cfg(scheme="genie"))

    def test_rejects_nonpositive_trials(self):
        with pytest.raises(ParameterError):
            validate(cfg(trials=0))

    def test_rejects_empty_grid(self):
        with pytest.raises(ParameterError):
            validate(cfg(snr_start=10.0, snr_stop=0.0))

    def test_single_stream_baseline_normalizes_alpha_beta(self):
        p = validate(cfg(scheme="maxmin-snr", alpha=2, beta=2))
        assert p.alpha == 1 and p.beta == 1

    def test_unicast_needs_something_to_send(self):
        with pytest.raises(ParameterError):
            validate(cfg(scheme="unicast", M=3))

    def test_unicast_params_have_no_groups(self):
        p = validate(cfg(scheme="unicast"))
        assert (p.alpha, p.beta, p.delta, p.t) == (0, 0, 0, 1)

    def test_fractional_t_rejected(self):
        with pytest.raises(ParameterError):
            validate(cfg(N=2, M=1, alpha=1, beta=1))  # t = 3/2


class TestSeeds:
    def test_frozen_values(self):
        assert derive_seed(0, 0, 0) == 3301074816
        assert derive_seed(0, 1, 0) == 3305115063
        assert derive_seed(0, 0, 1) == 3016054550
        assert derive_seed(42, 0, 0) == 3301074858
        assert derive_seed(42, 1, 2) == 722365617

    def test_masked_to_32_bits(self):
        assert derive_seed(2**40, 0, 0) == derive_seed(0, 0, 0)

    def test_trial_and_snr_independent(self):
        seen = {derive_seed(0, t, s) for t in range(20) for s in range(11)}
        assert len(seen) == 220


class TestRunScheme:
    def test_rows_and_curve_agree(self):
        curve, rows = run_scheme(cfg())
        assert len(rows) == 2 * 2  # grid points x trials
        assert curve.snr_db == [0.0, 10.0]
        by_point = {}
        for scheme, K, L, N, M, alpha, beta, snr_db, trial, rate in rows:
            assert scheme == "cc-zf-eq"
            assert (K, L, N, M, alpha, beta) == (3, 2, 3, 1, 2, 2)
            by_point.setdefault(snr_db, []).append(rate)
        assert by_point[0.0] == curve.rates[0]
        assert by_point[10.0] == curve.rates[1]
        assert all(r > 0 for rs in curve.rates for r in rs)

    def test_same_seed_reproduces_exactly(self):
        _, a = run_scheme(cfg())
        _, b = run_scheme(cfg())
        assert a == b

    def test_schemes_are_paired_realization_by_realization(self):
        # same (trial, snr) seed regardless of scheme, so the optimal
        # power loading beats the equal split on every single row
        _, eq = run_scheme(cfg(scheme="cc-zf-eq"))
        _, opt = run_scheme(cfg(scheme="cc-zf"))
        for row_eq, row_opt in zip(eq, opt):
            assert row_eq[7:9] == row_opt[7:9]  # same snr, trial
            assert row_opt[9] >= row_eq[9] - 1e-9

    def test_baseline_schemes_run(self):
        for scheme in ("maxmin-snr", "unicast"):
            curve, rows = run_scheme(cfg(scheme=scheme, trials=1, snr_stop=0.0))
            assert len(rows) == 1
            assert rows[0][9] > 0

    def test_sca_scheme_runs(self):
        curve, rows = run_scheme(cfg(scheme="cc-sca", trials=1, snr_stop=0.0))
        assert rows[0][9] > 0


class TestCsv:
    def test_format_is_stable(self):
        rows = [
            ("cc-sca", 3, 2, 3, 1, 2, 2, 0.0, 0, 1.2345678),
            ("unicast", 3, 2, 3, 1, 0, 0, -10.0, 3, 0.0123456789),
        ]
        buf = io.StringIO()
        emit_csv(rows, buf)
        assert buf.getvalue() == (
            "scheme,K,L,N,M,alpha,beta,snr_db,trial,sym_rate\n"
            "cc-sca,3,2,3,1,2,2,0,0,1.23457\n"
            "unicast,3,2,3,1,0,0,-10,3,0.0123457\n"
        )

    def test_roundtrip_from_simulation(self):
        _, rows = run_scheme(cfg())
        buf = io.StringIO()
        emit_csv(rows, buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + len(rows)
        for line, row in zip(lines[1:], rows):
            parts = line.split(",")
            assert parts[0] == row[0]
            assert float(parts[7]) == row[7]
            assert int(parts[8]) == row[8]
            assert float(parts[9]) == pytest.approx(row[9], rel=1e-5)


class TestAudit:
    def test_large_slot_schedule(self):
        p = validate(cfg(K=6, L=5, N=6, M=1, alpha=5, beta=1, scheme="cc-sca"))
        audit = audit_schedule(p)
        assert audit["serving_subsets"] == 1
        assert audit["partitions_per_subset"] == 15
        assert audit["transmissions"] == 15
        assert audit["gamma"] == 3
        assert audit["uniform_appearances"]
        assert audit["balance_ok"]
        assert audit["balance_lhs"] == audit["balance_rhs"] == 45

    def test_paired_groups_schedule(self):
        p = validate(cfg(K=4, L=3, N=4, M=1, alpha=3, beta=1, scheme="cc-sca"))
        audit = audit_schedule(p)
        assert audit["transmissions"] == 3
        assert audit["messages"] == 6
        assert audit["gamma"] == 1
        assert audit["messages_per_transmission"] == 2
        assert audit["balance_ok"]

    def test_full_cache_degenerates(self):
        p = validate(cfg(K=3, L=2, N=3, M=3, alpha=1, beta=1, scheme="cc-sca"))
        audit = audit_schedule(p)
        assert audit["transmissions"] == 0
        assert audit["balance_ok"]


def run_cli(*argv):
    return subprocess.run(
        [sys.executable, "-m", "ccmiso.cli", *argv],
        capture_output=True, text=True,
    )


class TestCli:
    COMMON = ["--K", "3", "--L", "2", "--N", "3", "--M", "1",
              "--alpha", "2", "--beta", "2",
              "--snr-start", "0", "--snr-stop", "0", "--snr-step", "5",
              "--trials", "2"]

    def test_writes_csv(self, tmp_path):
        out = tmp_path / "rows.csv"
        res = run_cli(*self.COMMON, "--scheme", "cc-zf-eq", "--out", str(out))
        assert res.returncode == 0, res.stderr
        lines = out.read_text().strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert len(lines) == 3

    def test_stdout_when_no_out(self):
        res = run_cli(*self.COMMON, "--scheme", "cc-zf-eq")
        assert res.returncode == 0
        assert res.stdout.startswith(CSV_HEADER)

    def test_bad_params_exit_2(self):
        res = run_cli("--K", "3", "--L", "2", "--N", "2", "--M", "1",
                      "--scheme", "cc-zf-eq")
        assert res.returncode == 2
        assert "error:" in res.stderr

    def test_missing_required_exit_2(self):
        res = run_cli("--K", "3", "--scheme", "cc-sca")
        assert res.returncode == 2

    def test_audit_prints_json(self):
        res = run_cli("--K", "6", "--L", "5", "--N", "6", "--M", "1",
                      "--alpha", "5", "--beta", "1", "--scheme", "cc-sca", "--audit")
        assert res.returncode == 0
        audit = json.loads(res.stdout)
        assert audit["transmissions"] == 15
        assert audit["gamma"] == 3

    def test_config_file_with_flag_override(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text(
            "# scenario\n"
            "K = 3\nL = 2\nN = 3\nM = 1\nalpha = 2\nbeta = 2\n"
            "scheme = cc-zf-eq\n"
            "snr_start = 0\nsnr_stop = 10\nsnr_step = 5\ntrials = 9\n"
        )
        out = tmp_path / "rows.csv"
        res = run_cli("--config", str(conf), "--trials", "1", "--out", str(out))
        assert res.returncode == 0, res.stderr
        lines = out.read_text().strip().split("\n")
        # flag overrides the file: 1 trial x 3 grid points
        assert len(lines) == 4

    def test_unknown_config_key_exit_2(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("K = 3\nbogus = 1\n")
        res = run_cli("--config", str(conf))
        assert res.returncode == 2

    def test_trace_file_written(self, tmp_path):
        trace = tmp_path / "trace.jsonl"
        res = run_cli(*self.COMMON, "--scheme", "cc-sca", "--trials", "1",
                      "--trace", str(trace))
        assert res.returncode == 0, res.stderr
        records = [json.loads(line) for line in trace.read_text().strip().split("\n")]
        assert records
        assert all(r["status"] == "optimal" for r in records)

    def test_trace_needs_single_worker(self, tmp_path):
        res = run_cli(*self.COMMON, "--scheme", "cc-sca", "--workers", "2",
                      "--trace", str(tmp_path / "t.jsonl"))
        assert res.returncode == 2
