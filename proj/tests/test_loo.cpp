#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "helpers.hpp"
#include "isomix/likelihood.hpp"
#include "isomix/loo.hpp"

using namespace isomix;

namespace {

double log_normal_density(double y, double mean, double var) {
    constexpr double kLog2Pi = 1.8378770664093453;
    return -0.5 * (kLog2Pi + std::log(var)) - (y - mean) * (y - mean) / (2.0 * var);
}

// Deterministic filler so matrix-level tests do not depend on a fit.
MatrixXd toy_loglik(int S, int N, std::uint64_t seed) {
    Rng rng(seed);
    MatrixXd ll(S, N);
    for (int s = 0; s < S; ++s)
        for (int i = 0; i < N; ++i) ll(s, i) = -1.2 + 0.4 * rng.normal();
    return ll;
}

}  // namespace

TEST_SUITE("loo") {

TEST_CASE("pointwise matrix rows sum to the total log-likelihood") {
    const FittedModel& model = testing::synthetic_fit();
    MatrixXd ll = pointwise_loglik(model);
    REQUIRE(ll.rows() == model.n_draws());
    REQUIRE(ll.cols() == 10);
    for (int s : {0, 17, 1234, model.n_draws() - 1}) {
        double total = log_likelihood(model.input, model.theta_draws.row(s).transpose(),
                                      model.mode);
        CHECK(ll.row(s).sum() == doctest::Approx(total).epsilon(1e-10));
    }
}

TEST_CASE("pointwise entries match single-observation evaluations") {
    const FittedModel& model = testing::synthetic_fit();
    MatrixXd ll = pointwise_loglik(model);
    for (int s : {0, 500}) {
        VectorXd theta = model.theta_draws.row(s).transpose();
        for (int i = 0; i < model.input.n_obs(); ++i) {
            SimmInput one = model.input;
            one.y = model.input.y.row(i);
            one.X = model.input.X.row(i);
            one.covariate_rows = {model.input.covariate_rows[i]};
            CHECK(ll(s, i) == doctest::Approx(
                      log_likelihood(one, theta, model.mode)).epsilon(1e-12));
        }
    }
}

TEST_CASE("duplicated observations give identical pointwise columns") {
    FittedModel model = testing::synthetic_fit();  // copy
    model.input.y.row(1) = model.input.y.row(0);
    model.input.X.row(1) = model.input.X.row(0);
    MatrixXd ll = pointwise_loglik(model);
    CHECK(ll.col(0) == ll.col(1));
}

TEST_CASE("information criterion identities hold exactly") {
    MatrixXd ll = toy_loglik(200, 7, 42);
    LooResult r = loo_estimate(ll);
    CHECK(r.looic == -2.0 * r.elpd_loo);
    CHECK(r.se_looic == 2.0 * r.se_elpd);
    CHECK(r.elpd_loo == doctest::Approx(r.pointwise.sum()).epsilon(1e-14));
    double mean = r.pointwise.mean();
    double var = (r.pointwise.array() - mean).square().sum() / 6.0;
    CHECK(r.se_elpd == doctest::Approx(std::sqrt(7.0 * var)).epsilon(1e-12));
}

TEST_CASE("max weights are normalized and drive the flags") {
    MatrixXd ll = toy_loglik(200, 5, 7);
    // Make observation 3 dominated by a single bad draw: its importance
    // weight should saturate and get flagged.
    ll(0, 2) = -120.0;
    LooResult r = loo_estimate(ll);
    for (int i = 0; i < 5; ++i) {
        CHECK(r.max_weight[i] > 0.0);
        CHECK(r.max_weight[i] <= 1.0 + 1e-12);
        bool flagged = std::find(r.flagged.begin(), r.flagged.end(), i + 1) !=
                       r.flagged.end();
        CHECK(flagged == (r.max_weight[i] > 0.5));
    }
    CHECK(std::find(r.flagged.begin(), r.flagged.end(), 3) != r.flagged.end());
}

TEST_CASE("adding a constant to one column shifts its term by that constant") {
    MatrixXd ll = toy_loglik(300, 6, 11);
    LooResult base = loo_estimate(ll);
    MatrixXd shifted = ll;
    shifted.col(3).array() += 2.5;
    LooResult moved = loo_estimate(shifted);
    for (int i = 0; i < 6; ++i) {
        double expect = base.pointwise[i] + (i == 3 ? 2.5 : 0.0);
        CHECK(moved.pointwise[i] == doctest::Approx(expect).epsilon(1e-10));
        CHECK(moved.max_weight[i] == doctest::Approx(base.max_weight[i]).epsilon(1e-10));
    }
    CHECK(moved.elpd_loo == doctest::Approx(base.elpd_loo + 2.5).epsilon(1e-10));
}

TEST_CASE("estimate agrees with an exact leave-one-out refit") {
    // One source, one tracer, intercept only: the proportions are pinned at 1
    // and the likelihood depends on theta only through u = log sigma^2, so
    // the exact posterior and the exact leave-one-out predictive densities
    // reduce to one-dimensional quadrature.
    SimmInput input;
    input.y = MatrixXd(5, 1);
    input.y << 1.8, -0.4, 0.7, 2.5, -1.2;
    input.tracer_names = {"tr1"};
    input.source_names = {"S1"};
    input.mu_s = MatrixXd::Constant(1, 1, 0.5);
    input.sigma_s = MatrixXd::Constant(1, 1, 0.8);
    input.mu_c = MatrixXd::Constant(1, 1, 0.3);
    input.sigma_c = MatrixXd::Constant(1, 1, 0.4);
    input.q = MatrixXd::Constant(1, 1, 1.0);
    input.X = MatrixXd::Ones(5, 1);
    DesignColumn intercept;
    intercept.label = "(Intercept)";
    input.design.columns.push_back(intercept);
    input.validate();

    const double m = 0.5 + 0.3;
    const double base_var = 0.8 * 0.8 + 0.4 * 0.4;
    PriorSpec prior;  // defaults: shape = rate = 1
    auto log_u_prior = [&](double u) {
        return -std::log(2.0) - 0.5 * u - std::exp(-0.5 * u);
    };
    auto cell_ll = [&](double y, double u) {
        return log_normal_density(y, m, base_var + std::exp(u));
    };

    // Trapezoid quadrature for log integral of exp(sum of selected cells +
    // prior) over the grid; max-subtraction keeps it stable.
    const int G = 4001;
    const double lo = -10.0, hi = 6.0, du = (hi - lo) / (G - 1);
    std::vector<double> grid(G);
    for (int g = 0; g < G; ++g) grid[g] = lo + g * du;
    auto log_integral = [&](int skip) {
        std::vector<double> logf(G);
        double peak = -std::numeric_limits<double>::infinity();
        for (int g = 0; g < G; ++g) {
            double acc = log_u_prior(grid[g]);
            for (int i = 0; i < 5; ++i)
                if (i != skip) acc += cell_ll(input.y(i, 0), grid[g]);
            logf[g] = acc;
            peak = std::max(peak, acc);
        }
        double sum = 0.0;
        for (int g = 0; g < G; ++g) {
            double w = (g == 0 || g == G - 1) ? 0.5 : 1.0;
            sum += w * std::exp(logf[g] - peak);
        }
        return peak + std::log(sum * du);
    };
    double log_z_full = log_integral(-1);
    VectorXd exact_elpd(5);
    for (int i = 0; i < 5; ++i) exact_elpd[i] = log_z_full - log_integral(i);

    // Draw u from the exact posterior by inverting its quadrature CDF with
    // stratified probabilities, then verify the model's likelihood matches
    // the closed form before handing the matrix to the estimator.
    std::vector<double> density(G);
    double peak = -std::numeric_limits<double>::infinity();
    for (int g = 0; g < G; ++g) {
        double acc = log_u_prior(grid[g]);
        for (int i = 0; i < 5; ++i) acc += cell_ll(input.y(i, 0), grid[g]);
        density[g] = acc;
        peak = std::max(peak, acc);
    }
    for (int g = 0; g < G; ++g) density[g] = std::exp(density[g] - peak);
    std::vector<double> cdf(G, 0.0);
    for (int g = 1; g < G; ++g)
        cdf[g] = cdf[g - 1] + 0.5 * (density[g] + density[g - 1]) * du;
    for (int g = 0; g < G; ++g) cdf[g] /= cdf[G - 1];

    const int S = 200000;
    MatrixXd ll(S, 5);
    int g = 1;
    for (int s = 0; s < S; ++s) {
        double p = (s + 0.5) / S;
        while (g < G - 1 && cdf[g] < p) ++g;
        double frac = (p - cdf[g - 1]) / std::max(cdf[g] - cdf[g - 1], 1e-300);
        double u = grid[g - 1] + frac * du;
        VectorXd theta = VectorXd::Zero(2);
        theta[1] = u;
        VectorXd point = pointwise_log_likelihood(input, theta, VarianceMode::Paper);
        for (int i = 0; i < 5; ++i) {
            CHECK(point[i] == doctest::Approx(cell_ll(input.y(i, 0), u)).epsilon(1e-10));
            ll(s, i) = point[i];
        }
    }

    LooResult est = loo_estimate(ll);
    for (int i = 0; i < 5; ++i)
        CHECK(est.pointwise[i] == doctest::Approx(exact_elpd[i]).epsilon(0.05));
    CHECK(est.elpd_loo == doctest::Approx(exact_elpd.sum()).epsilon(0.05));
    CHECK(est.flagged.empty());
}

TEST_CASE("comparison table lists identical models identically") {
    const FittedModel& model = testing::synthetic_fit();
    Table t = compare_models({&model, &model}, {"first", "second"});
    CHECK(t.columns() == std::vector<std::string>{"model", "elpd_loo", "looic",
                                                  "se_looic", "n_flagged"});
    REQUIRE(t.n_rows() == 2);
    CHECK(t.text(0, 0) == "first");
    CHECK(t.text(1, 0) == "second");
    for (int c = 1; c < t.n_cols(); ++c)
        CHECK(t.number(0, c) == t.number(1, c));
    CHECK(std::isfinite(t.number(0, 1)));
    CHECK(t.number(0, 2) == -2.0 * t.number(0, 1));

    CHECK_THROWS_AS(compare_models({}, {}), Error);
    CHECK_THROWS_AS(compare_models({&model}, {"a", "b"}), Error);
}

TEST_CASE("degenerate inputs are reported as errors") {
    CHECK_THROWS_WITH_AS(loo_estimate(MatrixXd::Zero(50, 3)),
                         doctest::Contains("100"), Error);
    MatrixXd ll = MatrixXd::Constant(150, 3, -1.0);
    ll.col(1).setConstant(-std::numeric_limits<double>::infinity());
    CHECK_THROWS_WITH_AS(loo_estimate(ll), doctest::Contains("observation 2"), Error);
}

TEST_CASE("pointwise computation is deterministic") {
    const FittedModel& model = testing::synthetic_fit();
    CHECK(pointwise_loglik(model) == pointwise_loglik(model));
}

}  // TEST_SUITE
