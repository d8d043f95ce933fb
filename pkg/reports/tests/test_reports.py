import numpy as np
import pytest

from envreports.cli import main as report_main
from envreports.figures import (
    SlopeRejected,
    plot_counterexample,
    plot_curves,
    plot_plateau_slope,
)
from envreports.spec import FigureSpec


class TestCurves:
    def test_single_run_single_curve(self, bundle, tmp_path):
        result = plot_curves(str(bundle / "bundle" / "thm54_demo" / "runs" / "*.csv"),
                             tmp_path / "curves.png")
        assert result.output.exists()
        assert len(result.curves) == 1
        assert len(result.ks) == 401

    def test_curve_strictly_below_bound_overlay(self, bundle, tmp_path):
        demo = bundle / "bundle" / "thm54_demo"
        result = plot_curves(str(demo / "runs" / "*.csv"), tmp_path / "overlay.png",
                             sidecar=str(demo / "meta.json"), bound="thm54")
        assert result.bound is not None
        for values in result.curves.values():
            assert np.all(values < result.bound)

    def test_empty_glob_is_an_error(self, tmp_path):
        with pytest.raises(ValueError, match="no run CSVs"):
            plot_curves(str(tmp_path / "nothing" / "*.csv"), tmp_path / "x.png")

    def test_schema_mismatch_is_an_error(self, bundle, tmp_path):
        src = bundle / "bundle" / "thm54_demo" / "runs" / "run_7.csv"
        lines = src.read_text().splitlines()
        stripped = tmp_path / "stripped.csv"
        stripped.write_text("\n".join(",".join(line.split(",")[:4]) for line in lines) + "\n")
        with pytest.raises(ValueError, match="schema mismatch"):
            plot_curves(str(stripped), tmp_path / "x.png")


class TestPlateauSlope:
    def test_bias_sweep_slope_is_quadratic(self, bundle, tmp_path):
        # Criterion-6 sweep data: fitted log-log slope of the bias distance.
        result = plot_plateau_slope(
            bundle / "bundle" / "bias_sweep" / "sweep_summary.csv",
            tmp_path / "slope.png")
        assert result.column == "bias_sq_closed"
        assert 1.85 <= result.slope <= 2.15
        assert result.output.exists()

    def test_zero_heterogeneity_sweep_is_rejected(self, bundle, tmp_path):
        with pytest.raises(SlopeRejected, match="numerical floor"):
            plot_plateau_slope(bundle / "zero_spread" / "sweep_alpha" / "sweep_summary.csv",
                               tmp_path / "x.png")

    def test_exact_inner_plateau_independent_of_alpha(self, bundle, tmp_path):
        result = plot_plateau_slope(
            bundle / "exact_inner" / "sweep_alpha" / "sweep_summary.csv",
            tmp_path / "flat.png")
        assert result.column == "plateau_dist_sq"
        plateaus = result.distances ** 2
        assert np.max(plateaus) / np.min(plateaus) <= 1.10


class TestCounterexample:
    def test_loss_and_meta_objective_overlay(self, bundle, tmp_path):
        ce = bundle / "bundle" / "counterexample"
        result = plot_counterexample(ce / "counterexample_nonconvex_alpha0.1.csv",
                                     tmp_path / "landscape.png",
                                     verdict_json=str(ce / "counterexample_nonconvex_alpha0.1.json"))
        assert result.output.exists()
        # (z, phi) is the graph of the loss: increasing z, convex values.
        assert np.all(np.diff(result.zs) > 0)
        # The meta-objective never exceeds the loss at the same abscissa
        # (the inner minimization only lowers values): interpolate f onto x.
        f_at_x = np.interp(result.xs, result.zs, result.phi)
        inside = (result.xs >= result.zs.min()) & (result.xs <= result.zs.max())
        assert np.all(result.phi[inside] <= f_at_x[inside] + 1e-9)

    def test_dip_below_tangent_at_alpha_0_1(self, bundle, tmp_path):
        # Stated expectation: at alpha = 0.1 the meta-objective goes below its
        # tangent at the witness.  The measured landscape does not do this
        # (the tangent there is a global minorant); kept faithful and failing.
        # See README "Known honest failure".
        ce = bundle / "bundle" / "counterexample"
        result = plot_counterexample(ce / "counterexample_nonconvex_alpha0.1.csv",
                                     tmp_path / "tangent.png",
                                     verdict_json=str(ce / "counterexample_nonconvex_alpha0.1.json"))
        assert result.phi_minus_tangent is not None
        assert np.min(result.phi_minus_tangent) < -1e-9, (
            "plotted meta-objective never dips below its tangent at the witness; "
            "the certified negative curvature is not the curvature of the plotted series")

    def test_no_dip_below_threshold_alpha(self, bundle, tmp_path):
        ce = bundle / "bundle" / "counterexample"
        result = plot_counterexample(ce / "counterexample_nonconvex_alpha0.01.csv",
                                     tmp_path / "tangent001.png",
                                     verdict_json=str(ce / "counterexample_nonconvex_alpha0.01.json"))
        assert np.min(result.phi_minus_tangent) >= -1e-12

    def test_verdict_flags_surface_in_result(self, bundle, tmp_path):
        ce = bundle / "bundle" / "counterexample"
        result = plot_counterexample(ce / "counterexample_nonconvex_alpha0.1.csv",
                                     tmp_path / "flags.png",
                                     verdict_json=str(ce / "counterexample_nonconvex_alpha0.1.json"))
        assert result.curvature_agrees is False  # quartic closed form vs FD divergence

    def test_missing_curvature_column_is_an_error(self, bundle, tmp_path):
        src = bundle / "bundle" / "counterexample" / "counterexample_nonsmooth_alpha1.csv"
        lines = src.read_text().splitlines()
        stripped = tmp_path / "no_phi2.csv"
        stripped.write_text("\n".join(",".join(line.split(",")[:3]) for line in lines) + "\n")
        with pytest.raises(ValueError, match="schema mismatch"):
            plot_counterexample(stripped, tmp_path / "x.png")


class TestDeterminismAndCli:
    def test_figures_are_byte_stable(self, bundle, tmp_path):
        demo = bundle / "bundle" / "thm54_demo"
        plot_curves(str(demo / "runs" / "*.csv"), tmp_path / "a.png",
                    sidecar=str(demo / "meta.json"))
        plot_curves(str(demo / "runs" / "*.csv"), tmp_path / "b.png",
                    sidecar=str(demo / "meta.json"))
        assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()

    def test_cli_renders_from_spec(self, bundle, tmp_path, capsys):
        spec_path = tmp_path / "figure.toml"
        spec_path.write_text("\n".join([
            'kind = "plateau-slope"',
            f'input = "{bundle / "bundle" / "bias_sweep" / "sweep_summary.csv"}"',
            f'output = "{tmp_path / "cli_slope.png"}"',
            'x_scale = "log"',
            'y_scale = "log"',
        ]) + "\n")
        assert report_main([str(spec_path)]) == 0
        out = capsys.readouterr().out
        assert "fitted slope" in out
        assert (tmp_path / "cli_slope.png").exists()

    def test_figure_spec_validation(self, tmp_path):
        spec_path = tmp_path / "bad.toml"
        spec_path.write_text('kind = "pie"\ninput = "x"\noutput = "y.png"\n')
        with pytest.raises(ValueError, match="figure kind"):
            FigureSpec.load(spec_path)
