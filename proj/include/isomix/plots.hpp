#pragma once

#include <string>

#include "isomix/model.hpp"
#include "isomix/table.hpp"

namespace isomix {

enum class PlotKind {
    Isospace,        // tracer-pair scatter with sources and mixing polygon
    PropHistogram,   // posterior proportion histograms for one observation
    CovariatesPlot,  // per-source effect curve over one continuous covariate
    BetaHistogram,   // posterior histograms of the regression coefficients
    PriorViz,        // prior vs posterior proportions for one observation
    Convergence,     // lower-bound trace with moving average
};

PlotKind parse_plot_kind(const std::string& name);

struct PlotOptions {
    int obs_id = 1;             // prop_histogram, prior_viz
    std::string covariate;      // covariates_plot; isospace color
    int tracer_x = 0;           // isospace
    int tracer_y = 1;           // isospace
    int bins = 30;              // histogram kinds
    int grid_points = 50;       // covariates_plot
    int n_prior_draws = 3600;   // prior_viz
    std::uint64_t seed = 1;     // prior_viz
};

// Every plot yields its underlying data table (written as the CSV sidecar)
// plus a static SVG rendering.  Histogram-kind tables contain the raw draws,
// one row per draw; binning happens only in the SVG.
struct PlotOutput {
    Table data;
    std::string svg;
};

PlotOutput make_plot(const FittedModel& model, PlotKind kind,
                     const PlotOptions& options);

// Posterior-predictive figure for one tracer: observed y (x axis: index)
// with the central interval band, used by the check command.
PlotOutput posterior_predictive_plot(const FittedModel& model, int tracer,
                                     const Table& intervals, double prob_level);

}  // namespace isomix
