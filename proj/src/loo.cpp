#include "isomix/loo.hpp"

#include <algorithm>
#include <cmath>

#include "isomix/likelihood.hpp"

namespace isomix {

namespace {

// log(sum(exp(v))) with max-subtraction.
double logsumexp(const VectorXd& v) {
    double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;  // all -inf stays -inf
    return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

MatrixXd pointwise_loglik(const FittedModel& model) {
    const int S = model.n_draws();
    const int N = model.input.n_obs();
    if (S == 0) fail(ErrorCode::invalid_argument, "model has no stored draws");
    MatrixXd out(S, N);
    for (int s = 0; s < S; ++s)
        out.row(s) = pointwise_log_likelihood(
                         model.input, model.theta_draws.row(s).transpose(),
                         model.mode)
                         .transpose();
    return out;
}

LooResult loo_estimate(const MatrixXd& pointwise_ll) {
    const int S = static_cast<int>(pointwise_ll.rows());
    const int N = static_cast<int>(pointwise_ll.cols());
    if (S < 100)
        fail(ErrorCode::invalid_argument,
             "LOO needs at least 100 draws, got " + std::to_string(S));

    LooResult result;
    result.pointwise.resize(N);
    result.max_weight.resize(N);

    for (int i = 0; i < N; ++i) {
        VectorXd ll = pointwise_ll.col(i);
        // Raw importance ratios r_s = 1/p(y_i | theta_s), in log space.
        VectorXd log_r = -ll;
        // Truncate at sqrt(S) * mean(r):  log bound = logsumexp(log_r) - log(S)/2.
        double log_bound = logsumexp(log_r) - 0.5 * std::log(static_cast<double>(S));
        VectorXd log_w = log_r.cwiseMin(log_bound);

        double denom = logsumexp(log_w);
        VectorXd lw_ll = log_w + ll;
        double numer = logsumexp(lw_ll);
        double elpd_i = numer - denom;
        if (!std::isfinite(elpd_i))
            fail(ErrorCode::numeric,
                 "LOO importance weights degenerate (all zero) for observation " +
                     std::to_string(i + 1));
        result.pointwise[i] = elpd_i;
        result.max_weight[i] = std::exp(log_w.maxCoeff() - denom);
        if (result.max_weight[i] > 0.5) result.flagged.push_back(i + 1);
    }

    result.elpd_loo = result.pointwise.sum();
    result.looic = -2.0 * result.elpd_loo;
    double mean = result.pointwise.mean();
    double var =
        N > 1 ? (result.pointwise.array() - mean).square().sum() / (N - 1) : 0.0;
    result.se_elpd = std::sqrt(static_cast<double>(N) * var);
    result.se_looic = 2.0 * result.se_elpd;
    return result;
}

Table compare_models(const std::vector<const FittedModel*>& models,
                     const std::vector<std::string>& labels) {
    if (models.empty())
        fail(ErrorCode::invalid_argument, "no models to compare");
    if (models.size() != labels.size())
        fail(ErrorCode::invalid_argument, "model/label count mismatch");
    Table t({"model", "elpd_loo", "looic", "se_looic", "n_flagged"});
    for (std::size_t m = 0; m < models.size(); ++m) {
        LooResult r = loo_estimate(pointwise_loglik(*models[m]));
        t.add_row({labels[m], r.elpd_loo, r.looic, r.se_looic,
                   static_cast<double>(r.flagged.size())});
    }
    return t;
}

}  // namespace isomix
