// Shared fixtures for the unit tests: the bundled datasets and cached fits
// (fitting is fast but there is no reason to redo it per test case).
#pragma once

#include <string>

#include "isomix/dataset.hpp"
#include "isomix/model.hpp"
#include "isomix/rng.hpp"
#include "isomix/types.hpp"

namespace testing {

inline std::string data_dir() { return ISOMIX_DATA_DIR; }

inline isomix::SimmInput load_synthetic() {
    isomix::DatasetPaths paths;
    paths.mixtures = data_dir() + "/synthetic/mixtures.csv";
    paths.sources = data_dir() + "/synthetic/sources.csv";
    paths.covariates = data_dir() + "/synthetic/covariates.csv";
    return isomix::load_dataset(paths, isomix::parse_covariate_spec("x:continuous"));
}

// Default fit of the bundled synthetic dataset, computed once.
inline const isomix::FittedModel& synthetic_fit() {
    static const isomix::FittedModel model = [] {
        return isomix::run_ffvb(load_synthetic(), isomix::PriorSpec{},
                                isomix::FfvbConfig{}, isomix::VarianceMode::Paper);
    }();
    return model;
}

inline isomix::SimmInput load_alligator(const std::string& formula) {
    isomix::DatasetPaths paths;
    paths.mixtures = data_dir() + "/alligator/mixtures.csv";
    paths.sources = data_dir() + "/alligator/sources.csv";
    paths.tdf = data_dir() + "/alligator/tdf.csv";
    if (!formula.empty()) paths.covariates = data_dir() + "/alligator/covariates.csv";
    return isomix::load_dataset(paths, isomix::parse_covariate_spec(formula));
}

// Length-covariate alligator fit used by the effect-curve tests.
inline const isomix::FittedModel& alligator_length_fit() {
    static const isomix::FittedModel model = [] {
        isomix::FfvbConfig config;
        config.patience = 300;
        config.seed = 17;
        return isomix::run_ffvb(load_alligator("length:continuous"),
                                isomix::PriorSpec{}, config,
                                isomix::VarianceMode::Paper);
    }();
    return model;
}

// Small deterministic instance generator for likelihood/gradient tests.
struct RandomInstance {
    isomix::SimmInput input;
    isomix::VectorXd theta;
};

inline RandomInstance random_instance(isomix::Rng& rng, int N, int J, int K, int L) {
    using isomix::MatrixXd;
    using isomix::VectorXd;
    isomix::SimmInput input;
    input.y = MatrixXd::NullaryExpr(N, J, [&](Eigen::Index, Eigen::Index) {
        return 3.0 * rng.normal();
    });
    for (int j = 0; j < J; ++j) input.tracer_names.push_back("tr" + std::to_string(j + 1));
    for (int k = 0; k < K; ++k) input.source_names.push_back("S" + std::to_string(k + 1));
    auto randmat = [&](double lo, double hi) -> MatrixXd {
        return MatrixXd::NullaryExpr(K, J, [&](Eigen::Index, Eigen::Index) {
            return lo + (hi - lo) * rng.uniform();
        });
    };
    input.mu_s = randmat(-10.0, 10.0);
    input.sigma_s = randmat(0.3, 2.0);
    input.mu_c = randmat(-1.0, 1.0);
    input.sigma_c = randmat(0.1, 0.8);
    input.q = randmat(0.2, 2.0);
    input.X = MatrixXd::NullaryExpr(N, L, [&](Eigen::Index, Eigen::Index c) {
        return c == 0 ? 1.0 : rng.normal();
    });
    isomix::DesignColumn intercept;
    intercept.label = "(Intercept)";
    intercept.kind = isomix::ColumnKind::Intercept;
    input.design.columns.push_back(intercept);
    for (int l = 1; l < L; ++l) {
        isomix::DesignColumn col;
        col.label = "z" + std::to_string(l);
        col.kind = isomix::ColumnKind::Continuous;
        col.covariate = col.label;
        input.design.columns.push_back(col);
    }
    input.validate();

    VectorXd theta(K * L + J);
    for (int i = 0; i < theta.size(); ++i) theta[i] = rng.normal() * 0.8;
    return RandomInstance{std::move(input), std::move(theta)};
}

}  // namespace testing
