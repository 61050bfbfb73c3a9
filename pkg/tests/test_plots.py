import math

import numpy as np
import pytest
from scipy.special import expit, logit
from shapely.geometry import Polygon

from dtameta.data import ModelSpec
from dtameta.datasets import telomerase
from dtameta.inference import fit
from dtameta.plots import (
    PlotError,
    _marker_sizes,
    _sroc_slope,
    crosshair_layout,
    data_bubbles,
    ellipse_region,
    forest_layout,
    oriented_summaries,
    sroc_curve,
    sroc_plot_geometry,
    summary_point_geometry,
    walter_sroc,
    walter_sroc_from_fit,
)
from dtameta.svg import render_svg

from conftest import paper_priors


class TestSrocSlopes:
    def test_degenerate_case_three_types_coincide(self):
        # equal variances, perfect negative correlation: types 1, 4, 5 all -1
        for t in (1, 4, 5):
            assert _sroc_slope(t, 1.0, 1.0, -1.0) == pytest.approx(-1.0, abs=1e-12)

    def test_type4_undefined_at_zero_correlation(self):
        with pytest.raises(PlotError, match="rho = 0"):
            _sroc_slope(4, 1.0, 1.0, 0.0)

    def test_type5_always_negative(self):
        assert _sroc_slope(5, 2.0, 0.5, 0.7) < 0
        assert _sroc_slope(5, 2.0, 0.5, -0.7) < 0

    def test_major_axis_eigen_direction(self):
        var_se, var_sp, rho = 1.5, 0.7, -0.6
        slope = _sroc_slope(2, var_se, var_sp, rho)
        cov = np.array(
            [[var_sp, rho * math.sqrt(var_se * var_sp)],
             [rho * math.sqrt(var_se * var_sp), var_se]]
        )
        vals, vecs = np.linalg.eigh(cov)
        v = vecs[:, np.argmax(vals)]
        assert slope == pytest.approx(v[1] / v[0], rel=1e-9)


class TestSrocCurves:
    def test_all_five_pass_through_summary_point(self, telomerase_fit):
        s = oriented_summaries(telomerase_fit)[0]
        x_target = 1.0 - expit(s.nu_sp)
        for t in (1, 2, 3, 4, 5):
            (curve,) = sroc_curve(telomerase_fit, t)
            xs = np.array([p[0] for p in curve.points])
            ys = np.array([p[1] for p in curve.points])
            i = int(np.argmin(np.abs(xs - x_target)))
            assert xs[i] == pytest.approx(x_target, abs=1e-12)
            assert logit(ys[i]) == pytest.approx(s.mu_se, abs=1e-9)

    def test_monotone_rising_for_negative_correlation(self, telomerase_fit):
        for t in (1, 4, 5):
            (curve,) = sroc_curve(telomerase_fit, t)
            ys = np.array([p[1] for p in curve.points])
            assert np.all(np.diff(ys) > -1e-12)

    def test_unit_box(self, telomerase_fit):
        for t in (1, 2, 3, 4, 5):
            (curve,) = sroc_curve(telomerase_fit, t)
            pts = np.array(curve.points)
            assert np.all(pts >= 0.0) and np.all(pts <= 1.0)

    def test_covariates_unavailable(self):
        from test_data_model import synthetic_catheter_dataset

        ds = synthetic_catheter_dataset()
        spec = ModelSpec(
            model_type=2, modality_column="type", covariate_columns=("prevalence",),
            nsample=300, seed=4,
        )
        result = fit(ds, spec, paper_priors())
        with pytest.raises(PlotError, match="covariates"):
            sroc_curve(result, 1)
        geoms = sroc_plot_geometry(result)
        kinds = [g.kind for g in geoms]
        assert kinds == ["data_bubble", "sroc_line"]  # regression curve only
        assert geoms[1].style.get("walter") is True

    def test_modality_one_curve_per_level(self):
        from test_data_model import synthetic_modality_dataset

        ds = synthetic_modality_dataset()
        spec = ModelSpec(modality_column="modality", nsample=300, seed=3)
        result = fit(ds, spec, paper_priors())
        curves = sroc_curve(result, 1)
        assert [c.style["level"] for c in curves] == ["CT", "LAG", "MRI"]
        colors = {c.style["color"] for c in curves}
        assert len(colors) == 3


class TestWalter:
    def test_d_s_arithmetic(self):
        # printed transforms at (Se, Sp) = (0.75, 0.9)
        se, sp = 0.75, 0.9
        d = math.log(se / (1 - se)) - math.log((1 - sp) / sp)
        s = math.log(se / (1 - se)) + math.log((1 - sp) / sp)
        assert d == pytest.approx(3.29584, abs=1e-5)
        assert s == pytest.approx(-1.09861, abs=1e-5)

    def test_constant_dor_at_50_points(self):
        s_vals = np.linspace(-2.0, 2.0, 12)
        d_val = math.log(27.0)
        se = expit((d_val + s_vals) / 2.0)
        fpr = expit((s_vals - d_val) / 2.0)
        a, b, curve = walter_sroc(se, 1.0 - fpr)
        xs = np.array([p[0] for p in curve.points])
        ys = np.array([p[1] for p in curve.points])
        idx = np.linspace(0, xs.size - 1, 50).astype(int)
        dor = (ys[idx] / (1 - ys[idx])) / (xs[idx] / (1 - xs[idx]))
        assert np.all(np.abs(dor - math.exp(a)) < 1e-9 * math.exp(a))

    def test_synthetic_constant_dor_recovery(self):
        # noisy studies generated around DOR = 27
        rng = np.random.default_rng(17)
        s_vals = rng.uniform(-1.5, 1.5, 20)
        d_vals = math.log(27.0) + rng.normal(0.0, 0.05, 20)
        se = expit((d_vals + s_vals) / 2.0)
        fpr = expit((s_vals - d_vals) / 2.0)
        a, b, _ = walter_sroc(se, 1.0 - fpr)
        assert abs(b) < 0.1
        assert math.exp(a) == pytest.approx(27.0, rel=0.05)

    def test_boundary_estimates_rejected(self):
        with pytest.raises(PlotError, match="inside"):
            walter_sroc([1.0, 0.5], [0.5, 0.6])

    def test_b_equal_one_rejected(self):
        se = expit(np.array([0.0, 1.0, 2.0]))
        sp = 1.0 - expit(np.array([-1.0, -2.0, -3.0]))
        # D = logitSe - logitFPR, S = logitSe + logitFPR; rig D == S + const
        logit_se = np.array([0.0, 1.0, 2.0])
        logit_fpr = np.array([-3.0, -3.0, -3.0]) + 0 * logit_se
        se = expit(logit_se)
        sp = 1.0 - expit(logit_fpr)
        # here S = logitSe - 3, D = logitSe + 3 -> slope b = 1 exactly
        with pytest.raises(PlotError, match="b = 1"):
            walter_sroc(se, sp)

    def test_from_fit(self, telomerase_fit):
        a, b, curve = walter_sroc_from_fit(telomerase_fit)
        assert math.exp(a / (1 - b)) > 1  # diagnostic tests better than chance
        assert curve.kind == "sroc_line"


class TestRegions:
    def test_isotropic_circle_in_link_space(self):
        # synthetic check of the contour construction itself
        from scipy.stats import chi2

        radius = math.sqrt(chi2.ppf(0.95, 2))
        angles = np.linspace(0, 2 * math.pi, 100, endpoint=False)
        pts = np.stack([0.5 + radius * 0.2 * np.cos(angles), 1.0 + radius * 0.2 * np.sin(angles)])
        rr = np.hypot(pts[0] - 0.5, pts[1] - 1.0)
        assert np.allclose(rr, radius * 0.2, atol=1e-12)

    def test_regions_closed_and_inside_unit_box(self, telomerase_fit):
        for kind in ("credible", "prediction"):
            (region,) = ellipse_region(telomerase_fit, kind, 0.95)
            pts = np.array(region.points)
            assert np.allclose(pts[0], pts[-1])
            assert np.all(pts >= 0.0) and np.all(pts <= 1.0)
            poly = Polygon(region.points)
            assert poly.is_valid and poly.is_simple

    def test_prediction_contains_credible(self, telomerase_fit):
        (cred,) = ellipse_region(telomerase_fit, "credible", 0.95)
        (pred,) = ellipse_region(telomerase_fit, "prediction", 0.95)
        assert Polygon(pred.points).contains(Polygon(cred.points))

    def test_regions_contain_summary_point(self, telomerase_fit):
        (point,) = summary_point_geometry(telomerase_fit)
        from shapely.geometry import Point

        target = Point(point.points[0])
        for kind in ("credible", "prediction"):
            (region,) = ellipse_region(telomerase_fit, kind, 0.95)
            assert Polygon(region.points).contains(target)

    def test_invalid_kind_and_level(self, telomerase_fit):
        with pytest.raises(PlotError):
            ellipse_region(telomerase_fit, "nope", 0.95)
        with pytest.raises(PlotError):
            ellipse_region(telomerase_fit, "credible", 1.2)


class TestForest:
    def test_telomerase_layout(self, telomerase_fit):
        forest = forest_layout(telomerase_fit, "sens", cut=(0.4, 1.0))
        assert len(forest.rows) == 11
        assert forest.rows[-1].is_summary
        assert forest.rows[-1].estimate == pytest.approx(0.763, abs=0.02)
        assert forest.rows[0].label == "Ito_1998"
        assert forest.rows[0].data_text == "25 1 25 8"

    def test_marker_sizes_strictly_decreasing(self):
        lengths = np.array([0.1, 0.2, 0.15, 0.05])
        sizes = _marker_sizes(lengths)
        order = np.argsort(lengths)
        assert np.all(np.diff(sizes[order]) < 0)
        assert sizes.min() >= 0.5 and sizes.max() <= 2.0

    def test_two_studies_size_rule(self, telomerase_fit):
        forest = forest_layout(telomerase_fit, "sens")
        rows = [r for r in forest.rows if not r.is_summary]
        for a in rows:
            for b in rows:
                if (a.hi - a.lo) < (b.hi - b.lo) - 1e-12:
                    assert a.size > b.size

    def test_interval_not_computed(self, telomerase_fit):
        with pytest.raises(PlotError, match="not computed"):
            forest_layout(telomerase_fit, "sens", intervals=(0.1, 0.9))

    def test_covariate_fit_has_no_summary_row(self):
        from test_data_model import synthetic_catheter_dataset

        ds = synthetic_catheter_dataset()
        spec = ModelSpec(
            model_type=2, modality_column="type", covariate_columns=("prevalence",),
            quantiles=(0.125, 0.875), nsample=400, seed=4,
        )
        result = fit(ds, spec, paper_priors())
        forest = forest_layout(result, "LDOR", est_type="median", intervals=(0.125, 0.875))
        assert not any(r.is_summary for r in forest.rows)
        assert len(forest.rows) == 8
        levels = [r.level for r in forest.rows]
        assert levels == ["Semi.quantitative"] * 4 + ["Quantitative"] * 4

    def test_modality_partitions_with_summary(self):
        from test_data_model import synthetic_modality_dataset

        ds = synthetic_modality_dataset()
        spec = ModelSpec(modality_column="modality", nsample=400, seed=3)
        result = fit(ds, spec, paper_priors())
        forest = forest_layout(result, "sens")
        summaries = [r for r in forest.rows if r.is_summary]
        assert [r.level for r in summaries] == ["CT", "LAG", "MRI"]


class TestCrosshair:
    def test_ten_crosses_inside_unit_box(self, telomerase_fit):
        crosses = crosshair_layout(telomerase_fit)
        assert len(crosses) == 10
        for c in crosses:
            pts = np.array(c.points)
            assert np.all(pts >= 0.0) and np.all(pts <= 1.0)

    def test_centers_match_fitted_tables(self, telomerase_fit):
        from dtameta.accuracy import fitted_study_measures

        sens = fitted_study_measures(telomerase_fit, "sens")
        fpr = fitted_study_measures(telomerase_fit, "FPR")
        crosses = crosshair_layout(telomerase_fit)
        for c, sr, fr in zip(crosses, sens.rows, fpr.rows):
            x, y = c.style["center"]
            assert x == fr.mean and y == sr.mean
            assert c.points[0][1] == y and c.points[2][0] == x

    def test_arms_span_quantiles(self, telomerase_fit):
        from dtameta.accuracy import fitted_study_measures

        sens = fitted_study_measures(telomerase_fit, "sens")
        crosses = crosshair_layout(telomerase_fit)
        for c, sr in zip(crosses, sens.rows):
            assert c.points[2][1] == sr.quantiles[0.025]
            assert c.points[3][1] == sr.quantiles[0.975]


class TestSvg:
    def test_deterministic(self, telomerase_fit):
        geoms = sroc_plot_geometry(telomerase_fit)
        assert render_svg(geoms, {"title": "SROC"}) == render_svg(geoms, {"title": "SROC"})

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            render_svg([])

    def test_axes_labels(self, telomerase_fit):
        payload = render_svg(sroc_plot_geometry(telomerase_fit)).decode()
        assert "1-Specificity" in payload
        assert "Sensitivity" in payload
        assert payload.startswith("<?xml")

    def test_overlay_three_curves_distinct_colors(self, telomerase_fit):
        curves = []
        for i, color in enumerate(["red", "blue", "green"]):
            (c,) = sroc_curve(telomerase_fit, 1)
            curves.append(type(c)(kind=c.kind, points=c.points, style={"color": color}))
        payload = render_svg(curves).decode()
        for color in ("red", "blue", "green"):
            assert f'stroke="{color}"' in payload

    def test_forest_svg(self, telomerase_fit):
        forest = forest_layout(telomerase_fit, "sens", cut=(0.4, 1.0))
        payload = render_svg(forest).decode()
        assert "Ito_1998" in payload
        assert render_svg(forest) == render_svg(forest)

    def test_geometry_json_shape(self, telomerase_fit):
        geoms = sroc_plot_geometry(telomerase_fit)
        doc = geoms[1].to_json_dict()
        assert set(doc) == {"kind", "points", "style"}
        assert isinstance(doc["points"][0], list)

    def test_bubbles_sized_by_study(self, telomerase_fit):
        bubbles = data_bubbles(telomerase_fit)
        assert bubbles.style["sizes"][0] == 59  # Ito_1998: 25+1+25+8
