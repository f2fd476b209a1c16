#pragma once

#include <string>
#include <vector>

#include "isomix/model.hpp"
#include "isomix/table.hpp"
#include "isomix/types.hpp"

namespace isomix {

// Entry (s, i) = log p(y_i | theta_s): per-draw, per-observation
// log-likelihood contributions (n_draws x N).
MatrixXd pointwise_loglik(const FittedModel& model);

// Leave-one-out expected log predictive density via self-normalized
// importance sampling with truncated weights (per-observation raw weights
// r_s = 1 / p(y_i | theta_s), truncated at sqrt(S) times their mean).
struct LooResult {
    double elpd_loo = 0.0;
    double looic = 0.0;      // -2 * elpd_loo
    double se_elpd = 0.0;
    double se_looic = 0.0;   // 2 * se_elpd
    VectorXd pointwise;      // per-observation elpd contributions
    VectorXd max_weight;     // per-observation max normalized weight
    std::vector<int> flagged;  // 1-based obs whose max weight exceeds 0.5
};

LooResult loo_estimate(const MatrixXd& pointwise_ll);

// Comparison table over fitted models (one row per label, given order):
// label, elpd_loo, looic, se_looic, n_flagged.
Table compare_models(const std::vector<const FittedModel*>& models,
                     const std::vector<std::string>& labels);

}  // namespace isomix
