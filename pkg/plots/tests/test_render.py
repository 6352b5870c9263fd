import math
import subprocess
import sys
from pathlib import Path

import pytest

from crowdplots.cli import main
from crowdplots.figures import (
    FigureSpec,
    SchemaError,
    aggregate_bounds,
    aggregate_recovery,
    aggregate_tradeoff,
    build_figure,
    read_rows,
    render,
    BOUNDS_COLUMNS,
    RECORD_COLUMNS,
)

GOLDEN = Path(__file__).parent / "golden"


@pytest.mark.parametrize("kind,name", [("tradeoff", "tradeoff.csv"), ("recovery", "recovery.csv"), ("bounds", "bounds.csv")])
class TestRenderKinds:
    def test_renders_png(self, tmp_path, kind, name):
        out = tmp_path / f"{kind}.png"
        spec = FigureSpec(input_path=str(GOLDEN / name), kind=kind, output_path=str(out))
        assert render(spec) == str(out)
        assert out.stat().st_size > 0
        assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_pixel_identical_across_runs(self, tmp_path, kind, name):
        outs = []
        for run in range(2):
            out = tmp_path / f"{kind}_{run}.png"
            render(FigureSpec(input_path=str(GOLDEN / name), kind=kind, output_path=str(out)))
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_cli_round_trip(self, tmp_path, kind, name):
        out = tmp_path / "fig.png"
        code = main(["--kind", kind, "--in", str(GOLDEN / name), "--out", str(out)])
        assert code == 0
        assert out.exists()


def test_cli_identical_across_processes(tmp_path):
    outs = []
    for run in range(2):
        out = tmp_path / f"proc_{run}.png"
        result = subprocess.run(
            [
                sys.executable, "-m", "crowdplots.cli",
                "--kind", "tradeoff", "--in", str(GOLDEN / "tradeoff.csv"), "--out", str(out),
            ],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


class TestAggregation:
    def test_tradeoff_two_labeled_curves(self, tmp_path):
        rows = read_rows(str(GOLDEN / "tradeoff.csv"), RECORD_COLUMNS)
        curves = aggregate_tradeoff(rows)
        assert sorted(c.label for c in curves) == ["majority_vote", "two_stage"]
        for curve in curves:
            assert curve.x == sorted(curve.x)
            assert all(lo <= y <= hi for y, lo, hi in zip(curve.y, curve.lo, curve.hi))
        fig = build_figure(
            FigureSpec(str(GOLDEN / "tradeoff.csv"), "tradeoff", str(tmp_path / "f.png"))
        )
        labels = fig.axes[0].get_legend_handles_labels()[1]
        assert set(labels) == {"majority_vote", "two_stage"}

    def test_recovery_x_comes_from_method_names(self):
        rows = read_rows(str(GOLDEN / "recovery.csv"), RECORD_COLUMNS)
        curve = aggregate_recovery(rows)
        assert curve.x == [0.0, 5.0, 10.0, 20.0, 40.0, 80.0]
        assert curve.y[0] == 0.0  # no calibration data, no recovery
        assert curve.y[-1] >= curve.y[0]

    def test_bounds_curve_passes_through_known_endpoints(self):
        # lam grid 0..1/2 at pn = 10: probability bound 1/2 at 0 and
        # (1/2) e^{-10} at 1/2
        rows = read_rows(str(GOLDEN / "bounds.csv"), BOUNDS_COLUMNS)
        param, curves = aggregate_bounds(rows)
        assert param == "lam"
        prob = curves[0]
        assert prob.x[0] == 0.0 and prob.y[0] == 0.5
        assert prob.x[-1] == 0.5
        assert prob.y[-1] == pytest.approx(0.5 * math.exp(-10), rel=1e-12)


class TestEdgeCases:
    def test_header_only_csv_renders_empty_axes(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text(",".join(RECORD_COLUMNS) + "\n")
        out = tmp_path / "empty.png"
        code = main(["--kind", "tradeoff", "--in", str(empty), "--out", str(out)])
        assert code == 0
        assert out.stat().st_size > 0

    def test_schema_mismatch_diagnostic(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("trial,method,who_knows\n1,x,2\n")
        with pytest.raises(SchemaError, match="queries_per_task"):
            render(FigureSpec(str(bad), "tradeoff", str(tmp_path / "f.png")))
        code = main(["--kind", "tradeoff", "--in", str(bad), "--out", str(tmp_path / "f.png")])
        captured = capsys.readouterr()
        assert code == 2
        assert "queries_per_task" in captured.err

    def test_missing_file_is_an_error(self, tmp_path, capsys):
        code = main(["--kind", "bounds", "--in", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "f.png")])
        assert code == 2

    def test_y_scale_override(self, tmp_path):
        spec = FigureSpec(
            str(GOLDEN / "tradeoff.csv"), "tradeoff", str(tmp_path / "f.png"), y_scale="linear"
        )
        fig = build_figure(spec)
        assert fig.axes[0].get_yscale() == "linear"

    def test_default_scales(self):
        assert FigureSpec("x", "tradeoff", "y").effective_y_scale == "log"
        assert FigureSpec("x", "recovery", "y").effective_y_scale == "linear"
        assert FigureSpec("x", "bounds", "y").effective_y_scale == "log"

    def test_bad_kind_rejected(self):
        with pytest.raises(ValueError):
            FigureSpec("x", "pie", "y")
