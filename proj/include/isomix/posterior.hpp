#pragma once

#include <string>
#include <vector>

#include "isomix/csv.hpp"
#include "isomix/model.hpp"
#include "isomix/table.hpp"
#include "isomix/types.hpp"

namespace isomix {

// Linear-interpolation sample quantile (R default, type 7) of a copy of the
// values.  prob in [0, 1].
double quantile_type7(std::vector<double> values, double prob);

// Posterior draws of the dietary proportions for specific design rows.
// draws[r] is n_draws x K for row r of X; rows sum to 1.
struct ProportionDraws {
    std::vector<MatrixXd> draws;
    std::vector<std::string> row_labels;    // "obs 3" or "pred 1"
    std::vector<std::string> source_names;  // K entries
    std::vector<std::vector<std::string>> covariate_rows;  // raw values echo
    std::vector<std::string> covariate_columns;
};

// Proportions at the given design rows from the stored beta draws.
ProportionDraws proportion_draws_for(const FittedModel& model, const MatrixXd& X,
                                     const std::vector<std::string>& labels);

// Fitted proportions at the training rows (1-based obs ids).
ProportionDraws fitted_proportions(const FittedModel& model,
                                   const std::vector<int>& obs_ids);

enum class SummaryKind { Statistics, Quantiles, Correlations };
SummaryKind parse_summary_kind(const std::string& name);

// Per-observation summary of the joint draws (P(source...) plus per-tracer
// residual sd):
//   statistics   -> mean, sd
//   quantiles    -> 2.5% / 25% / 50% / 75% / 97.5%
//   correlations -> sample correlation matrix
// The returned table carries an "obs" column so multiple ids stack.
Table summarize(const FittedModel& model, const std::vector<int>& obs_ids,
                SummaryKind kind);

// Same layout over proportion draws alone (used for predictions, which have
// no residual-sd rows).
Table summarize_proportions(const ProportionDraws& draws, SummaryKind kind);

// Console rendering mirroring the summary tables, one block per observation.
std::string summary_text(const FittedModel& model, const std::vector<int>& obs_ids,
                         SummaryKind kind);

// Predictions at new raw-scale covariate rows (stored standardization and
// level coding applied; unseen levels rejected).
struct Prediction {
    MatrixXd X;                       // encoded design rows
    ProportionDraws proportions;
};

Prediction predict_proportions(const FittedModel& model, const CsvTable& new_rows);
std::string prediction_summary_text(const Prediction& pred, SummaryKind kind);
std::string prediction_to_json(const Prediction& pred);

// Posterior-predictive check: one simulated y per theta draw per cell, the
// central prob_level interval per cell, and the fraction of observed y
// falling inside.
struct PosteriorPredictive {
    Table intervals;   // obs, tracer, y_obs, lower, upper, inside
    double coverage = 0.0;
    std::vector<double> per_tracer_coverage;
};

PosteriorPredictive posterior_predictive(const FittedModel& model,
                                         double prob_level, std::uint64_t seed);

// Prior-vs-posterior proportions at one observation's covariates: prior
// draws push beta samples from the PriorSpec through the CLR link.
struct PriorPosterior {
    MatrixXd prior_draws;      // n_prior x K
    MatrixXd posterior_draws;  // n_draws x K
};

PriorPosterior prior_viz(const FittedModel& model, int obs_id, int n_prior_draws,
                         std::uint64_t seed);

// Mean and +-2 sd band of each source's proportion over a raw-scale grid of
// one continuous covariate, all other covariates held at their reference
// (continuous: training mean; categorical: first level).
Table covariate_effect_curve(const FittedModel& model,
                             const std::string& covariate_name,
                             const std::vector<double>& grid);

// Residual-sd draws per tracer (n_draws x J), sd scale.
MatrixXd sigma_draws(const FittedModel& model);

}  // namespace isomix
