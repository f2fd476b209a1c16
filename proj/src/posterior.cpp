#include "isomix/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "isomix/design.hpp"
#include "isomix/likelihood.hpp"
#include "isomix/rng.hpp"
#include <nlohmann/json.hpp>

namespace isomix {

namespace {

// RNG substream tags; the optimizer owns tags below 1<<32.
constexpr std::uint64_t kPostPredTag = 2ULL << 32;
constexpr std::uint64_t kPriorVizTag = 3ULL << 32;

std::vector<std::string> proportion_names(const std::vector<std::string>& sources) {
    std::vector<std::string> names;
    names.reserve(sources.size());
    for (const auto& s : sources) names.push_back("P(" + s + ")");
    return names;
}

std::vector<std::string> sigma_names_of(const FittedModel& model) {
    std::vector<std::string> names;
    for (const auto& t : model.input.tracer_names) names.push_back("sd_" + t);
    return names;
}

double sample_sd(const VectorXd& v) {
    const Eigen::Index n = v.size();
    if (n < 2) return 0.0;
    double m = v.mean();
    return std::sqrt((v.array() - m).square().sum() / static_cast<double>(n - 1));
}

double correlation(const VectorXd& a, const VectorXd& b) {
    double ma = a.mean(), mb = b.mean();
    double sa = (a.array() - ma).square().sum();
    double sb = (b.array() - mb).square().sum();
    if (sa < 1e-30 || sb < 1e-30) return 0.0;
    double cov = ((a.array() - ma) * (b.array() - mb)).sum();
    return cov / std::sqrt(sa * sb);
}

// One block per entry of `per_row_draws`, each an n_draws x V matrix whose
// columns are named by `var_names`.
Table build_summary(const std::vector<MatrixXd>& per_row_draws,
                    const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& var_names, SummaryKind kind) {
    const int V = static_cast<int>(var_names.size());
    static const double kProbs[5] = {0.025, 0.25, 0.5, 0.75, 0.975};

    Table table;
    if (kind == SummaryKind::Statistics)
        table = Table({"obs", "name", "mean", "sd"});
    else if (kind == SummaryKind::Quantiles)
        table = Table({"obs", "name", "2.5%", "25%", "50%", "75%", "97.5%"});
    else {
        std::vector<std::string> cols{"obs", "name"};
        for (const auto& n : var_names) cols.push_back(n);
        table = Table(cols);
    }

    for (std::size_t r = 0; r < per_row_draws.size(); ++r) {
        const MatrixXd& draws = per_row_draws[r];
        if (static_cast<int>(draws.cols()) != V)
            fail(ErrorCode::invalid_argument, "summary variable count mismatch");
        for (int v = 0; v < V; ++v) {
            VectorXd col = draws.col(v);
            if (kind == SummaryKind::Statistics) {
                table.add_row({row_labels[r], var_names[v], col.mean(),
                               sample_sd(col)});
            } else if (kind == SummaryKind::Quantiles) {
                std::vector<double> vals(col.data(), col.data() + col.size());
                std::vector<Table::Cell> row{row_labels[r], var_names[v]};
                for (double p : kProbs) row.push_back(quantile_type7(vals, p));
                table.add_row(std::move(row));
            } else {
                std::vector<Table::Cell> row{row_labels[r], var_names[v]};
                for (int w = 0; w < V; ++w)
                    row.push_back(v == w ? 1.0 : correlation(col, draws.col(w)));
                table.add_row(std::move(row));
            }
        }
    }
    return table;
}

// Renders one console block per row label, dropping the obs column.
std::string blocks_text(const Table& table, const std::vector<std::string>& labels,
                        const std::string& heading) {
    std::ostringstream out;
    for (const auto& label : labels) {
        std::vector<std::string> cols(table.columns().begin() + 1,
                                      table.columns().end());
        Table block(cols);
        for (int r = 0; r < table.n_rows(); ++r) {
            if (table.text(r, 0) != label) continue;
            std::vector<Table::Cell> row;
            for (int c = 1; c < table.n_cols(); ++c)
                row.push_back(table.is_number(r, c) ? Table::Cell(table.number(r, c))
                                                    : Table::Cell(table.text(r, c)));
            block.add_row(std::move(row));
        }
        out << heading << " " << label << "\n" << block.to_text(3) << "\n";
    }
    return out.str();
}

}  // namespace

double quantile_type7(std::vector<double> values, double prob) {
    if (values.empty())
        fail(ErrorCode::invalid_argument, "quantile of empty sample");
    if (!(prob >= 0.0 && prob <= 1.0))
        fail(ErrorCode::invalid_argument, "quantile prob must be in [0,1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

MatrixXd sigma_draws(const FittedModel& model) {
    const int K = model.input.n_sources(), L = model.input.n_design_cols();
    const int J = model.input.n_tracers();
    const int S = model.n_draws();
    MatrixXd out(S, J);
    for (int s = 0; s < S; ++s)
        for (int j = 0; j < J; ++j)
            out(s, j) = std::exp(0.5 * model.theta_draws(s, K * L + j));
    return out;
}

ProportionDraws proportion_draws_for(const FittedModel& model, const MatrixXd& X,
                                     const std::vector<std::string>& labels) {
    const int K = model.input.n_sources(), L = model.input.n_design_cols();
    if (X.cols() != L)
        fail(ErrorCode::invalid_argument,
             "design rows have " + std::to_string(X.cols()) + " columns, expected " +
                 std::to_string(L));
    if (static_cast<int>(labels.size()) != X.rows())
        fail(ErrorCode::invalid_argument, "label count mismatch");
    const int S = model.n_draws();
    if (S == 0) fail(ErrorCode::invalid_argument, "model has no stored draws");

    ProportionDraws out;
    out.row_labels = labels;
    out.source_names = model.input.source_names;
    out.draws.reserve(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        MatrixXd p(S, K);
        for (int s = 0; s < S; ++s) {
            MatrixXd beta = theta_beta(model.theta_draws.row(s).transpose(), K, L);
            VectorXd f = beta * X.row(r).transpose();
            p.row(s) = clr_proportions(f).transpose();
        }
        out.draws.push_back(std::move(p));
    }
    return out;
}

ProportionDraws fitted_proportions(const FittedModel& model,
                                   const std::vector<int>& obs_ids) {
    const int N = model.input.n_obs();
    if (obs_ids.empty())
        fail(ErrorCode::invalid_argument, "no observation ids given");
    MatrixXd X(static_cast<Eigen::Index>(obs_ids.size()),
               model.input.n_design_cols());
    std::vector<std::string> labels;
    for (std::size_t r = 0; r < obs_ids.size(); ++r) {
        int id = obs_ids[r];
        if (id < 1 || id > N)
            fail(ErrorCode::invalid_argument,
                 "observation id " + std::to_string(id) + " out of range 1.." +
                     std::to_string(N));
        X.row(static_cast<Eigen::Index>(r)) = model.input.X.row(id - 1);
        labels.push_back(std::to_string(id));
    }
    ProportionDraws out = proportion_draws_for(model, X, labels);
    out.covariate_columns = model.input.covariate_columns;
    for (int id : obs_ids)
        if (!model.input.covariate_rows.empty())
            out.covariate_rows.push_back(model.input.covariate_rows[id - 1]);
    return out;
}

SummaryKind parse_summary_kind(const std::string& name) {
    if (name == "statistics") return SummaryKind::Statistics;
    if (name == "quantiles") return SummaryKind::Quantiles;
    if (name == "correlations") return SummaryKind::Correlations;
    fail(ErrorCode::invalid_argument,
         "unknown summary kind '" + name +
             "' (expected statistics, quantiles or correlations)");
}

Table summarize(const FittedModel& model, const std::vector<int>& obs_ids,
                SummaryKind kind) {
    ProportionDraws props = fitted_proportions(model, obs_ids);
    MatrixXd sig = sigma_draws(model);

    std::vector<std::string> var_names = proportion_names(props.source_names);
    for (const auto& n : sigma_names_of(model)) var_names.push_back(n);

    std::vector<MatrixXd> joint;
    joint.reserve(props.draws.size());
    for (const auto& p : props.draws) {
        MatrixXd m(p.rows(), p.cols() + sig.cols());
        m << p, sig;
        joint.push_back(std::move(m));
    }
    return build_summary(joint, props.row_labels, var_names, kind);
}

Table summarize_proportions(const ProportionDraws& draws, SummaryKind kind) {
    return build_summary(draws.draws, draws.row_labels,
                         proportion_names(draws.source_names), kind);
}

std::string summary_text(const FittedModel& model, const std::vector<int>& obs_ids,
                         SummaryKind kind) {
    Table t = summarize(model, obs_ids, kind);
    std::vector<std::string> labels;
    for (int id : obs_ids) labels.push_back(std::to_string(id));
    return blocks_text(t, labels, "Summary for Observation");
}

Prediction predict_proportions(const FittedModel& model, const CsvTable& new_rows) {
    Prediction pred;
    pred.X = encode_rows(new_rows, model.input.design);
    std::vector<std::string> labels;
    for (Eigen::Index r = 0; r < pred.X.rows(); ++r)
        labels.push_back(std::to_string(r + 1));
    pred.proportions = proportion_draws_for(model, pred.X, labels);
    pred.proportions.covariate_columns = new_rows.header;
    pred.proportions.covariate_rows = new_rows.rows;
    return pred;
}

std::string prediction_summary_text(const Prediction& pred, SummaryKind kind) {
    Table t = summarize_proportions(pred.proportions, kind);
    return blocks_text(t, pred.proportions.row_labels, "Summary for Prediction");
}

std::string prediction_to_json(const Prediction& pred) {
    nlohmann::ordered_json j;
    j["sources"] = pred.proportions.source_names;
    j["covariate_columns"] = pred.proportions.covariate_columns;
    auto rows = nlohmann::ordered_json::array();
    static const double kProbs[5] = {0.025, 0.25, 0.5, 0.75, 0.975};
    static const char* kProbNames[5] = {"2.5%", "25%", "50%", "75%", "97.5%"};
    for (std::size_t r = 0; r < pred.proportions.draws.size(); ++r) {
        const MatrixXd& draws = pred.proportions.draws[r];
        nlohmann::ordered_json row;
        row["label"] = pred.proportions.row_labels[r];
        if (r < pred.proportions.covariate_rows.size())
            row["covariates"] = pred.proportions.covariate_rows[r];
        nlohmann::ordered_json mean = nlohmann::ordered_json::array();
        nlohmann::ordered_json sd = nlohmann::ordered_json::array();
        for (Eigen::Index k = 0; k < draws.cols(); ++k) {
            VectorXd col = draws.col(k);
            mean.push_back(col.mean());
            sd.push_back(sample_sd(col));
        }
        row["mean"] = std::move(mean);
        row["sd"] = std::move(sd);
        nlohmann::ordered_json quants;
        for (int p = 0; p < 5; ++p) {
            nlohmann::ordered_json q = nlohmann::ordered_json::array();
            for (Eigen::Index k = 0; k < draws.cols(); ++k) {
                VectorXd col = draws.col(k);
                std::vector<double> vals(col.data(), col.data() + col.size());
                q.push_back(quantile_type7(vals, kProbs[p]));
            }
            quants[kProbNames[p]] = std::move(q);
        }
        row["quantiles"] = std::move(quants);
        rows.push_back(std::move(row));
    }
    j["predictions"] = std::move(rows);
    return j.dump(2);
}

PosteriorPredictive posterior_predictive(const FittedModel& model,
                                         double prob_level, std::uint64_t seed) {
    if (!(prob_level > 0.0 && prob_level < 1.0))
        fail(ErrorCode::invalid_argument, "prob_level must be in (0,1)");
    const int N = model.input.n_obs(), J = model.input.n_tracers();
    const int S = model.n_draws();
    if (S == 0) fail(ErrorCode::invalid_argument, "model has no stored draws");

    // y_rep indexed [cell][draw], cell = i * J + j.
    std::vector<std::vector<double>> reps(static_cast<std::size_t>(N) * J,
                                          std::vector<double>(S));
    Rng rng(substream_seed(seed, kPostPredTag));
    for (int s = 0; s < S; ++s) {
        MarginalMoments m = marginal_moments(
            model.input, model.theta_draws.row(s).transpose(), model.mode);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < J; ++j)
                reps[static_cast<std::size_t>(i) * J + j][s] =
                    m.mean(i, j) + std::sqrt(m.variance(i, j)) * rng.normal();
    }

    const double lo_p = (1.0 - prob_level) / 2.0;
    const double hi_p = 1.0 - lo_p;
    PosteriorPredictive out;
    out.intervals = Table({"obs", "tracer", "y_obs", "lower", "upper", "inside"});
    out.per_tracer_coverage.assign(J, 0.0);
    int n_inside = 0;
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < J; ++j) {
            const auto& cell = reps[static_cast<std::size_t>(i) * J + j];
            double lo = quantile_type7(cell, lo_p);
            double hi = quantile_type7(cell, hi_p);
            double y = model.input.y(i, j);
            bool inside = y >= lo && y <= hi;
            if (inside) {
                ++n_inside;
                out.per_tracer_coverage[j] += 1.0;
            }
            out.intervals.add_row({static_cast<double>(i + 1),
                                   model.input.tracer_names[j], y, lo, hi,
                                   inside ? 1.0 : 0.0});
        }
    }
    out.coverage = static_cast<double>(n_inside) / (static_cast<double>(N) * J);
    for (int j = 0; j < J; ++j) out.per_tracer_coverage[j] /= N;
    return out;
}

PriorPosterior prior_viz(const FittedModel& model, int obs_id, int n_prior_draws,
                         std::uint64_t seed) {
    const int N = model.input.n_obs();
    if (obs_id < 1 || obs_id > N)
        fail(ErrorCode::invalid_argument,
             "observation id " + std::to_string(obs_id) + " out of range 1.." +
                 std::to_string(N));
    if (n_prior_draws < 1)
        fail(ErrorCode::invalid_argument, "n_prior_draws must be >= 1");
    const int K = model.input.n_sources(), L = model.input.n_design_cols();

    PriorPosterior out;
    out.posterior_draws =
        fitted_proportions(model, {obs_id}).draws[0];

    VectorXd x = model.input.X.row(obs_id - 1).transpose();
    Rng rng(substream_seed(seed, kPriorVizTag));
    out.prior_draws.resize(n_prior_draws, K);
    for (int s = 0; s < n_prior_draws; ++s) {
        VectorXd f(K);
        for (int k = 0; k < K; ++k) {
            double fk = 0.0;
            for (int l = 0; l < L; ++l)
                fk += (model.prior.beta_mean_at(k, l) +
                       model.prior.beta_sd_at(k, l) * rng.normal()) *
                      x[l];
            f[k] = fk;
        }
        out.prior_draws.row(s) = clr_proportions(f).transpose();
    }
    return out;
}

Table covariate_effect_curve(const FittedModel& model,
                             const std::string& covariate_name,
                             const std::vector<double>& grid) {
    const auto& meta = model.input.design;
    if (grid.empty()) fail(ErrorCode::invalid_argument, "empty covariate grid");

    int target_col = -1;
    for (int c = 0; c < meta.n_cols(); ++c) {
        if (meta.columns[c].covariate == covariate_name) {
            if (meta.columns[c].kind == ColumnKind::Level)
                fail(ErrorCode::invalid_argument,
                     "covariate '" + covariate_name +
                         "' is categorical; use a per-group summary (boxplot) "
                         "instead of an effect curve");
            target_col = c;
        }
    }
    if (target_col < 0)
        fail(ErrorCode::invalid_argument,
             "model has no continuous covariate '" + covariate_name + "'");
    const DesignColumn& target = meta.columns[target_col];

    // Reference row: intercept 1, continuous at training mean (standardized
    // 0), categoricals at their first level.
    VectorXd ref = VectorXd::Zero(meta.n_cols());
    for (int c = 0; c < meta.n_cols(); ++c) {
        const auto& col = meta.columns[c];
        if (col.kind == ColumnKind::Intercept) ref[c] = 1.0;
        else if (col.kind == ColumnKind::Level) {
            for (const auto& cat : meta.categoricals)
                if (cat.covariate == col.covariate && cat.onehot_full &&
                    col.level == cat.levels.front())
                    ref[c] = 1.0;
            // treatment coding: first level = all zeros, already set
        }
    }

    MatrixXd X(static_cast<Eigen::Index>(grid.size()), meta.n_cols());
    std::vector<std::string> labels;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        VectorXd row = ref;
        row[target_col] = (grid[g] - target.mean) / target.sd;
        X.row(static_cast<Eigen::Index>(g)) = row.transpose();
        labels.push_back(std::to_string(g + 1));
    }

    ProportionDraws draws = proportion_draws_for(model, X, labels);
    Table t({covariate_name, "source", "mean", "lower", "upper"});
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const MatrixXd& p = draws.draws[g];
        for (Eigen::Index k = 0; k < p.cols(); ++k) {
            VectorXd col = p.col(k);
            double m = col.mean();
            double sd = sample_sd(col);
            t.add_row({grid[g], model.input.source_names[static_cast<int>(k)],
                       m, m - 2.0 * sd, m + 2.0 * sd});
        }
    }
    return t;
}

}  // namespace isomix
