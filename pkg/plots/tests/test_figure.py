import numpy as np
import pytest

from ccplots.figure import PlotSpec, aggregate, draw_figure, render
from ccplots.reader import CSV_HEADER


def row(scheme, snr_db, trial, rate, alpha=2, beta=2):
    return {
        "scheme": scheme, "K": 3, "L": 2, "N": 3, "M": 1,
        "alpha": alpha, "beta": beta,
        "snr_db": float(snr_db), "trial": trial, "sym_rate": float(rate),
    }


def test_aggregate_means_and_stderr_are_exact():
    rows = [
        row("cc-sca", 0, 0, 1.0), row("cc-sca", 0, 1, 3.0),
        row("cc-sca", 10, 0, 2.0), row("cc-sca", 10, 1, 6.0),
    ]
    curves = aggregate(rows, ("scheme", "alpha", "beta"))
    assert list(curves) == [("cc-sca", 2, 2)]
    c = curves[("cc-sca", 2, 2)]
    assert c.snr_db.tolist() == [0.0, 10.0]
    assert c.mean.tolist() == [2.0, 4.0]
    # sample std with ddof=1 over two points is |a-b|/sqrt(2); stderr divides by sqrt(2) again
    assert c.stderr == pytest.approx([1.0, 2.0])
    assert c.trials.tolist() == [2, 2]


def test_aggregate_single_trial_stderr_is_zero():
    curves = aggregate([row("cc-sca", 0, 0, 1.5)], ("scheme",))
    assert curves[("cc-sca",)].stderr.tolist() == [0.0]


def test_aggregate_splits_on_group_columns():
    rows = [row("cc-sca", 0, 0, 1.0), row("cc-sca", 0, 0, 2.0, alpha=1, beta=1)]
    curves = aggregate(rows, ("scheme", "alpha", "beta"))
    assert set(curves) == {("cc-sca", 2, 2), ("cc-sca", 1, 1)}


def test_aggregate_unknown_column_raises():
    with pytest.raises(ValueError, match="snr"):
        aggregate([row("cc-sca", 0, 0, 1.0)], ("scheme", "snr"))


def test_drawn_lines_carry_the_mean_arrays():
    rows = [
        row("cc-sca", 0, 0, 1.0), row("cc-sca", 10, 0, 2.5),
        row("cc-zf-eq", 0, 0, 0.5), row("cc-zf-eq", 10, 0, 1.5),
    ]
    curves = aggregate(rows, ("scheme",))
    spec = PlotSpec(inputs=(), out="unused.png")
    fig = draw_figure(curves, spec)
    try:
        ax = fig.axes[0]
        by_label = {ln.get_label(): ln for ln in ax.get_lines()}
        for key, curve in curves.items():
            ln = by_label[curve.label]
            assert np.array_equal(ln.get_xdata(), curve.snr_db)
            assert np.array_equal(ln.get_ydata(), curve.mean)
    finally:
        import matplotlib.pyplot as plt

        plt.close(fig)


def test_render_writes_png(tmp_path):
    csv = tmp_path / "rows.csv"
    csv.write_text(CSV_HEADER + "\ncc-sca,3,2,3,1,2,2,0,0,1.0\n")
    out = tmp_path / "fig.png"
    spec = PlotSpec(inputs=(str(csv),), out=str(out))
    curves = render(spec)
    assert out.exists() and out.stat().st_size > 0
    assert len(curves) == 1


def test_render_leaves_no_file_on_bad_input(tmp_path):
    csv = tmp_path / "rows.csv"
    csv.write_text("not,a,valid,header\n1,2,3,4\n")
    out = tmp_path / "fig.png"
    with pytest.raises(ValueError):
        render(PlotSpec(inputs=(str(csv),), out=str(out)))
    assert not out.exists()


def test_render_merges_multiple_inputs(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    a.write_text(CSV_HEADER + "\ncc-sca,3,2,3,1,2,2,0,0,1.0\n")
    b.write_text(CSV_HEADER + "\ncc-sca,3,2,3,1,2,2,0,1,3.0\n")
    out = tmp_path / "fig.png"
    curves = render(PlotSpec(inputs=(str(a), str(b)), out=str(out)))
    c = curves[("cc-sca", 2, 2)]
    assert c.mean.tolist() == [2.0]
    assert c.trials.tolist() == [2]
