#include "isomix/plots.hpp"

#include <algorithm>
#include <cmath>

#include "isomix/csv.hpp"
#include "isomix/geometry.hpp"
#include "isomix/posterior.hpp"
#include "isomix/svg.hpp"

namespace isomix {

namespace {

struct Histogram {
    std::vector<double> edges;   // bins+1
    std::vector<double> counts;  // bins
    double max_count = 0.0;
};

Histogram bin_values(const VectorXd& values, int bins, double lo, double hi) {
    Histogram h;
    if (!(hi > lo)) hi = lo + 1.0;
    h.edges.resize(bins + 1);
    h.counts.assign(bins, 0.0);
    for (int b = 0; b <= bins; ++b)
        h.edges[b] = lo + (hi - lo) * b / bins;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        int b = static_cast<int>((values[i] - lo) / (hi - lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        h.counts[b] += 1.0;
        h.max_count = std::max(h.max_count, h.counts[b]);
    }
    return h;
}

void draw_histogram(SvgCanvas& canvas, const Histogram& h, const std::string& color,
                    double opacity, double y_scale) {
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        if (h.counts[b] > 0)
            canvas.bar(h.edges[b], h.edges[b + 1], 0.0, h.counts[b] * y_scale,
                       color, opacity);
}

PlotOutput plot_isospace(const FittedModel& model, const PlotOptions& opt) {
    const SimmInput& input = model.input;
    PlotOutput out;
    out.data = isospace_plot_data(input, opt.tracer_x, opt.tracer_y, opt.covariate);

    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (int r = 0; r < out.data.n_rows(); ++r) {
        x_lo = std::min(x_lo, out.data.number(r, out.data.column_index("x_lo")));
        x_hi = std::max(x_hi, out.data.number(r, out.data.column_index("x_hi")));
        y_lo = std::min(y_lo, out.data.number(r, out.data.column_index("y_lo")));
        y_hi = std::max(y_hi, out.data.number(r, out.data.column_index("y_hi")));
    }
    SvgCanvas canvas(x_lo, x_hi, y_lo, y_hi);
    canvas.set_title("iso-space");
    canvas.set_labels(input.tracer_names[opt.tracer_x],
                      input.tracer_names[opt.tracer_y]);

    // Mixing polygon: hull of the TDF-adjusted source means.
    MatrixXd adjusted = input.mu_s + input.mu_c;
    std::vector<Point2> corners;
    for (int k = 0; k < input.n_sources(); ++k)
        corners.push_back({adjusted(k, opt.tracer_x), adjusted(k, opt.tracer_y)});
    auto hull = convex_hull(corners);
    std::vector<double> hx, hy;
    for (const auto& p : hull) { hx.push_back(p.x); hy.push_back(p.y); }
    if (hull.size() >= 3) canvas.polygon(hx, hy, "#999999", "#cccccc", 0.25);
    else if (hull.size() == 2)
        canvas.line(hx[0], hy[0], hx[1], hy[1], "#999999", 1.0);

    int ci = out.data.column_index("kind");
    for (int r = 0; r < out.data.n_rows(); ++r) {
        double x = out.data.number(r, out.data.column_index("x"));
        double y = out.data.number(r, out.data.column_index("y"));
        if (out.data.text(r, ci) == "mixture") {
            canvas.circle(x, y, 3.5, "#1b6ca8", 0.8);
        } else {
            double xl = out.data.number(r, out.data.column_index("x_lo"));
            double xh = out.data.number(r, out.data.column_index("x_hi"));
            double yl = out.data.number(r, out.data.column_index("y_lo"));
            double yh = out.data.number(r, out.data.column_index("y_hi"));
            canvas.line(xl, y, xh, y, "#d1495b", 1.5);
            canvas.line(x, yl, x, yh, "#d1495b", 1.5);
            canvas.square(x, y, 4, "#d1495b");
            canvas.label(x, y, "  " + out.data.text(r, 1), "#7a1f2b");
        }
    }
    out.svg = canvas.finish();
    return out;
}

PlotOutput plot_prop_histogram(const FittedModel& model, const PlotOptions& opt) {
    ProportionDraws draws = fitted_proportions(model, {opt.obs_id});
    const MatrixXd& p = draws.draws[0];
    const int K = static_cast<int>(p.cols());

    std::vector<std::string> cols{"draw"};
    for (const auto& s : draws.source_names) cols.push_back("P(" + s + ")");
    PlotOutput out;
    out.data = Table(cols);
    for (Eigen::Index s = 0; s < p.rows(); ++s) {
        std::vector<Table::Cell> row{static_cast<double>(s + 1)};
        for (int k = 0; k < K; ++k) row.push_back(p(s, k));
        out.data.add_row(std::move(row));
    }

    double max_count = 0;
    std::vector<Histogram> hists;
    for (int k = 0; k < K; ++k) {
        hists.push_back(bin_values(p.col(k), opt.bins, 0.0, 1.0));
        max_count = std::max(max_count, hists.back().max_count);
    }
    SvgCanvas canvas(0.0, 1.0, 0.0, max_count * 1.05);
    canvas.set_title("posterior dietary proportions, observation " +
                     std::to_string(opt.obs_id));
    canvas.set_labels("proportion", "draw count");
    for (int k = 0; k < K; ++k) {
        draw_histogram(canvas, hists[k], series_color(k), 0.55, 1.0);
        canvas.label(0.02, max_count * (1.0 - 0.06 * (k + 1)),
                     draws.source_names[k], series_color(k));
    }
    out.svg = canvas.finish();
    return out;
}

PlotOutput plot_covariates(const FittedModel& model, const PlotOptions& opt) {
    if (opt.covariate.empty())
        fail(ErrorCode::invalid_argument,
             "covariates plot needs a covariate name");
    // Grid over the raw training range of the covariate.
    int raw_col = -1;
    for (std::size_t c = 0; c < model.input.covariate_columns.size(); ++c)
        if (model.input.covariate_columns[c] == opt.covariate)
            raw_col = static_cast<int>(c);
    if (raw_col < 0)
        fail(ErrorCode::invalid_argument,
             "unknown covariate '" + opt.covariate + "'");
    double lo = 1e300, hi = -1e300;
    for (const auto& row : model.input.covariate_rows) {
        double v = parse_double(row[raw_col], "covariate '" + opt.covariate + "'");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    int g = std::max(2, opt.grid_points);
    std::vector<double> grid(g);
    for (int i = 0; i < g; ++i) grid[i] = lo + (hi - lo) * i / (g - 1);

    PlotOutput out;
    out.data = covariate_effect_curve(model, opt.covariate, grid);

    SvgCanvas canvas(lo, hi, 0.0, 1.0);
    canvas.set_title("dietary proportions vs " + opt.covariate);
    canvas.set_labels(opt.covariate, "proportion");
    const int K = model.input.n_sources();
    for (int k = 0; k < K; ++k) {
        std::vector<double> xs, means, lows, highs;
        for (int r = 0; r < out.data.n_rows(); ++r) {
            if (out.data.text(r, 1) != model.input.source_names[k]) continue;
            xs.push_back(out.data.number(r, 0));
            means.push_back(out.data.number(r, 2));
            lows.push_back(std::max(0.0, out.data.number(r, 3)));
            highs.push_back(std::min(1.0, out.data.number(r, 4)));
        }
        std::vector<double> rx = xs, ry = highs;
        for (std::size_t i = xs.size(); i-- > 0;) {
            rx.push_back(xs[i]);
            ry.push_back(lows[i]);
        }
        canvas.polygon(rx, ry, "none", series_color(k), 0.2);
        canvas.polyline(xs, means, series_color(k), 2.0);
        canvas.label(lo + 0.02 * (hi - lo), 0.98 - 0.05 * k,
                     model.input.source_names[k], series_color(k));
    }
    out.svg = canvas.finish();
    return out;
}

PlotOutput plot_beta_histogram(const FittedModel& model, const PlotOptions& opt) {
    const auto& meta = model.input.design;
    const int K = model.input.n_sources(), L = model.input.n_design_cols();

    // Pick the design column: by label if given, else the first
    // non-intercept column (falling back to the intercept).
    int col = -1;
    if (!opt.covariate.empty()) {
        for (int c = 0; c < L; ++c)
            if (meta.columns[c].label == opt.covariate) col = c;
        if (col < 0)
            fail(ErrorCode::invalid_argument,
                 "no design column labeled '" + opt.covariate + "'");
    } else {
        col = L > 1 ? 1 : 0;
    }

    std::vector<std::string> cols{"draw"};
    for (int k = 0; k < K; ++k)
        cols.push_back("beta(" + model.input.source_names[k] + "|" +
                       meta.columns[col].label + ")");
    PlotOutput out;
    out.data = Table(cols);
    const int S = model.n_draws();
    for (int s = 0; s < S; ++s) {
        std::vector<Table::Cell> row{static_cast<double>(s + 1)};
        for (int k = 0; k < K; ++k) row.push_back(model.theta_draws(s, k * L + col));
        out.data.add_row(std::move(row));
    }

    double lo = 1e300, hi = -1e300, max_count = 0;
    for (int k = 0; k < K; ++k) {
        lo = std::min(lo, model.theta_draws.col(k * L + col).minCoeff());
        hi = std::max(hi, model.theta_draws.col(k * L + col).maxCoeff());
    }
    std::vector<Histogram> hists;
    for (int k = 0; k < K; ++k) {
        hists.push_back(
            bin_values(model.theta_draws.col(k * L + col), opt.bins, lo, hi));
        max_count = std::max(max_count, hists.back().max_count);
    }
    SvgCanvas canvas(lo, hi, 0.0, max_count * 1.05);
    canvas.set_title("posterior coefficients: " + meta.columns[col].label);
    canvas.set_labels("coefficient", "draw count");
    for (int k = 0; k < K; ++k) {
        draw_histogram(canvas, hists[k], series_color(k), 0.55, 1.0);
        canvas.label(lo + 0.02 * (hi - lo), max_count * (1.0 - 0.06 * (k + 1)),
                     model.input.source_names[k], series_color(k));
    }
    out.svg = canvas.finish();
    return out;
}

PlotOutput plot_prior_viz(const FittedModel& model, const PlotOptions& opt) {
    PriorPosterior pv = prior_viz(model, opt.obs_id, opt.n_prior_draws, opt.seed);
    const int K = model.input.n_sources();

    std::vector<std::string> cols{"kind", "draw"};
    for (const auto& s : model.input.source_names) cols.push_back("P(" + s + ")");
    PlotOutput out;
    out.data = Table(cols);
    for (Eigen::Index s = 0; s < pv.prior_draws.rows(); ++s) {
        std::vector<Table::Cell> row{std::string("prior"), static_cast<double>(s + 1)};
        for (int k = 0; k < K; ++k) row.push_back(pv.prior_draws(s, k));
        out.data.add_row(std::move(row));
    }
    for (Eigen::Index s = 0; s < pv.posterior_draws.rows(); ++s) {
        std::vector<Table::Cell> row{std::string("posterior"),
                                     static_cast<double>(s + 1)};
        for (int k = 0; k < K; ++k) row.push_back(pv.posterior_draws(s, k));
        out.data.add_row(std::move(row));
    }

    double max_count = 0;
    std::vector<Histogram> prior_h, post_h;
    for (int k = 0; k < K; ++k) {
        prior_h.push_back(bin_values(pv.prior_draws.col(k), opt.bins, 0.0, 1.0));
        post_h.push_back(bin_values(pv.posterior_draws.col(k), opt.bins, 0.0, 1.0));
        max_count = std::max({max_count, prior_h.back().max_count,
                              post_h.back().max_count});
    }
    SvgCanvas canvas(0.0, 1.0, 0.0, max_count * 1.05);
    canvas.set_title("prior vs posterior proportions, observation " +
                     std::to_string(opt.obs_id));
    canvas.set_labels("proportion", "draw count");
    for (int k = 0; k < K; ++k) {
        draw_histogram(canvas, prior_h[k], "#b0b0b0", 0.45, 1.0);
        draw_histogram(canvas, post_h[k], series_color(k), 0.55, 1.0);
        canvas.label(0.02, max_count * (1.0 - 0.06 * (k + 1)),
                     model.input.source_names[k], series_color(k));
    }
    canvas.label(0.8, max_count * 0.99, "prior = grey", "#808080");
    out.svg = canvas.finish();
    return out;
}

PlotOutput plot_convergence(const FittedModel& model) {
    PlotOutput out;
    out.data = convergence_trace(model);
    const int n = out.data.n_rows();
    std::vector<double> ts, lbs, mas, ma_ts;
    double lo = 1e300, hi = -1e300;
    for (int r = 0; r < n; ++r) {
        double lb = out.data.number(r, 1);
        ts.push_back(out.data.number(r, 0));
        lbs.push_back(lb);
        lo = std::min(lo, lb);
        hi = std::max(hi, lb);
        double ma = out.data.number(r, 2);
        if (std::isfinite(ma)) {
            ma_ts.push_back(out.data.number(r, 0));
            mas.push_back(ma);
        }
    }
    SvgCanvas canvas(1.0, static_cast<double>(std::max(2, n)), lo, hi);
    canvas.set_title("lower-bound trace");
    canvas.set_labels("iteration", "lower bound");
    canvas.polyline(ts, lbs, "#9ecae1", 1.0);
    canvas.polyline(ma_ts, mas, "#1b6ca8", 2.0);
    out.svg = canvas.finish();
    return out;
}

}  // namespace

PlotKind parse_plot_kind(const std::string& name) {
    if (name == "isospace") return PlotKind::Isospace;
    if (name == "prop_histogram") return PlotKind::PropHistogram;
    if (name == "covariates_plot") return PlotKind::CovariatesPlot;
    if (name == "beta_histogram") return PlotKind::BetaHistogram;
    if (name == "prior_viz") return PlotKind::PriorViz;
    if (name == "convergence") return PlotKind::Convergence;
    fail(ErrorCode::invalid_argument,
         "unknown plot kind '" + name +
             "' (expected isospace, prop_histogram, covariates_plot, "
             "beta_histogram, prior_viz or convergence)");
}

PlotOutput make_plot(const FittedModel& model, PlotKind kind,
                     const PlotOptions& options) {
    switch (kind) {
        case PlotKind::Isospace: return plot_isospace(model, options);
        case PlotKind::PropHistogram: return plot_prop_histogram(model, options);
        case PlotKind::CovariatesPlot: return plot_covariates(model, options);
        case PlotKind::BetaHistogram: return plot_beta_histogram(model, options);
        case PlotKind::PriorViz: return plot_prior_viz(model, options);
        case PlotKind::Convergence: return plot_convergence(model);
    }
    fail(ErrorCode::invalid_argument, "unhandled plot kind");
}

PlotOutput posterior_predictive_plot(const FittedModel& model, int tracer,
                                     const Table& intervals, double prob_level) {
    const int J = model.input.n_tracers();
    if (tracer < 0 || tracer >= J)
        fail(ErrorCode::invalid_argument, "tracer index out of range");
    const std::string& tname = model.input.tracer_names[tracer];

    PlotOutput out;
    out.data = Table({"obs", "y_obs", "lower", "upper", "inside"});
    double lo = 1e300, hi = -1e300;
    int t_col = intervals.column_index("tracer");
    for (int r = 0; r < intervals.n_rows(); ++r) {
        if (intervals.text(r, t_col) != tname) continue;
        double y = intervals.number(r, intervals.column_index("y_obs"));
        double l = intervals.number(r, intervals.column_index("lower"));
        double u = intervals.number(r, intervals.column_index("upper"));
        out.data.add_row({intervals.number(r, 0), y, l, u,
                          intervals.number(r, intervals.column_index("inside"))});
        lo = std::min({lo, y, l});
        hi = std::max({hi, y, u});
    }
    const int n = out.data.n_rows();
    SvgCanvas canvas(1.0, static_cast<double>(std::max(2, n)), lo, hi);
    canvas.set_title("posterior predictive, " + tname + " (" +
                     format_double(prob_level * 100) + "% intervals)");
    canvas.set_labels("observation", tname);
    for (int r = 0; r < n; ++r) {
        double x = out.data.number(r, 0);
        canvas.line(x, out.data.number(r, 2), x, out.data.number(r, 3), "#9ecae1",
                    2.5);
        bool inside = out.data.number(r, 4) > 0.5;
        canvas.circle(x, out.data.number(r, 1), 2.5,
                      inside ? "#1b6ca8" : "#d1495b");
    }
    out.svg = canvas.finish();
    return out;
}

}  // namespace isomix
