#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "isomix/ffvb.hpp"
#include "isomix/likelihood.hpp"
#include "isomix/model.hpp"
#include "isomix/rng.hpp"

using namespace isomix;

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

// Gaussian target h = log N(center, V) with diagonal V: the conjugate /
// closed-form cases the estimator checks are built on.
class GaussianTarget : public VbTarget {
public:
    GaussianTarget(VectorXd center, VectorXd var)
        : center_(std::move(center)), var_(std::move(var)) {}
    int dim() const override { return static_cast<int>(center_.size()); }
    double log_h(const VectorXd& theta) const override {
        double total = 0.0;
        for (int i = 0; i < dim(); ++i) {
            double r = theta[i] - center_[i];
            total += -0.5 * (kLog2Pi + std::log(var_[i])) - r * r / (2 * var_[i]);
        }
        return total;
    }
    VectorXd grad_log_h(const VectorXd& theta) const override {
        return (center_ - theta).cwiseQuotient(var_);
    }

private:
    VectorXd center_;
    VectorXd var_;
};

VariationalState state_with(const VectorXd& mu, const MatrixXd& L) {
    VariationalState state;
    state.mu = mu;
    state.chol_L = L;
    state.gbar = VectorXd::Zero(state.lambda_dim());
    state.vbar = VectorXd::Zero(state.lambda_dim());
    return state;
}

}  // namespace

TEST_SUITE("ffvb") {

TEST_CASE("init_state: lambda length, L = 0.1 I, vbar = gbar^2") {
    GaussianTarget target(VectorXd::Zero(8), VectorXd::Ones(8));
    FfvbConfig config;
    config.seed = 42;
    VariationalState s = init_state(target, config);
    CHECK(s.lambda_dim() == 8 + 36);
    CHECK(s.lambda().size() == 44);
    CHECK((s.mu.array() == 0.0).all());
    CHECK(s.chol_L.diagonal().isApproxToConstant(0.1));
    CHECK(s.chol_L.isLowerTriangular());
    for (int i = 0; i < s.lambda_dim(); ++i)
        CHECK(s.vbar[i] == doctest::Approx(s.gbar[i] * s.gbar[i]).epsilon(1e-14));
    CHECK(s.t == 1);
    CHECK(s.patience_counter == 0);

    VariationalState s2 = init_state(target, config);
    CHECK(s.gbar == s2.gbar);  // seeded determinism
}

TEST_CASE("draw_theta_samples: identity transform and determinism") {
    VariationalState s =
        state_with(VectorXd::Zero(3), MatrixXd::Identity(3, 3));
    Rng rng1(7), rng2(7);
    SampleBatch b1 = draw_theta_samples(s, 20, rng1);
    SampleBatch b2 = draw_theta_samples(s, 20, rng2);
    CHECK(b1.thetas == b1.kappas);  // mu = 0, L = I
    CHECK(b1.thetas == b2.thetas);  // same seed, same draws
}

TEST_CASE("draw_theta_samples: sample covariance approaches L L^T") {
    MatrixXd L(2, 2);
    L << 1.0, 0.0, 0.7, 0.5;
    VectorXd mu(2);
    mu << 3.0, -1.0;
    VariationalState s = state_with(mu, L);
    Rng rng(15);
    const int n = 100000;
    SampleBatch batch = draw_theta_samples(s, n, rng);
    VectorXd mean = batch.thetas.colwise().mean();
    MatrixXd centered = batch.thetas.rowwise() - mean.transpose();
    MatrixXd cov = centered.transpose() * centered / (n - 1);
    MatrixXd target = L * L.transpose();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            // se of a covariance entry is about sqrt((v_aa v_bb + v_ab^2)/n)
            double se = std::sqrt((target(a, a) * target(b, b) +
                                   target(a, b) * target(a, b)) / n);
            CHECK(std::abs(cov(a, b) - target(a, b)) < 4 * se);
        }
    for (int a = 0; a < 2; ++a)
        CHECK(std::abs(mean[a] - mu[a]) < 4 * std::sqrt(target(a, a) / n));
}

TEST_CASE("gradient estimate: kappa = 0 zeroes the vech(L) block") {
    GaussianTarget target(VectorXd::Zero(2), VectorXd::Ones(2));
    VariationalState s = state_with(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
    SampleBatch batch;
    batch.kappas = MatrixXd::Zero(1, 2);
    batch.thetas = MatrixXd::Zero(1, 2);  // mu + L * 0
    VectorXd g = estimate_lb_gradient(batch, s, target);
    CHECK(g.size() == s.lambda_dim());
    CHECK(g.tail(3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient estimate: duplicating samples changes nothing") {
    GaussianTarget target(VectorXd::Ones(2), VectorXd::Ones(2) * 2.0);
    VariationalState s = state_with(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
    Rng rng(3);
    SampleBatch batch = draw_theta_samples(s, 5, rng);
    SampleBatch doubled;
    doubled.thetas.resize(10, 2);
    doubled.kappas.resize(10, 2);
    doubled.thetas << batch.thetas, batch.thetas;
    doubled.kappas << batch.kappas, batch.kappas;
    VectorXd g1 = estimate_lb_gradient(batch, s, target);
    VectorXd g2 = estimate_lb_gradient(doubled, s, target);
    CHECK((g1 - g2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gradient estimate: zero in expectation when q matches the target") {
    // Target N(0, I) with q = N(0, I): the lower bound is maximal, so the
    // expected gradient is zero.  Average many small-batch estimates.
    GaussianTarget target(VectorXd::Zero(2), VectorXd::Ones(2));
    VariationalState s = state_with(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
    Rng rng(19);
    const int reps = 5000;
    MatrixXd estimates(reps, s.lambda_dim());
    for (int r = 0; r < reps; ++r) {
        SampleBatch batch = draw_theta_samples(s, 2, rng);
        estimates.row(r) = estimate_lb_gradient(batch, s, target);
    }
    VectorXd mean = estimates.colwise().mean();
    for (int c = 0; c < s.lambda_dim(); ++c) {
        double sd = std::sqrt(
            (estimates.col(c).array() - mean[c]).square().sum() / (reps - 1));
        double se = sd / std::sqrt(static_cast<double>(reps));
        CHECK(std::abs(mean[c]) < 4 * std::max(se, 1e-12));
    }
}

TEST_CASE("gradient estimator is unbiased for the exact mu-gradient") {
    // For Gaussian target N(m, V) and q = N(mu, LL^T), the mu-block of the
    // lower-bound gradient is V^{-1} (m - mu) exactly.
    VectorXd m(2), v(2);
    m << 2.0, -1.0;
    v << 4.0, 0.25;
    GaussianTarget target(m, v);
    MatrixXd L(2, 2);
    L << 0.8, 0.0, -0.3, 0.6;
    VectorXd mu(2);
    mu << 0.5, 0.5;
    VariationalState s = state_with(mu, L);
    VectorXd exact = (m - mu).cwiseQuotient(v);

    Rng rng(23);
    const int reps = 10000;
    MatrixXd estimates(reps, 2);
    for (int r = 0; r < reps; ++r) {
        SampleBatch batch = draw_theta_samples(s, 2, rng);
        VectorXd g = estimate_lb_gradient(batch, s, target);
        estimates.row(r) = g.head(2);
    }
    for (int c = 0; c < 2; ++c) {
        double mean = estimates.col(c).mean();
        double sd = std::sqrt(
            (estimates.col(c).array() - mean).square().sum() / (reps - 1));
        double se = sd / std::sqrt(static_cast<double>(reps));
        CHECK(std::abs(mean - exact[c]) < 4 * se);
    }
}

TEST_CASE("lower bound is exact when q equals the posterior (conjugate case)") {
    // Scalar model: y ~ N(theta, 1), theta ~ N(0, 1).  With q set to the
    // exact posterior N(y/2, 1/2), log h - log q is constant and equals the
    // log marginal likelihood log N(y | 0, 2) for every sample.
    const double y = 1.3;
    class Posterior : public VbTarget {
    public:
        int dim() const override { return 1; }
        double log_h(const VectorXd& t) const override {
            double ll = -0.5 * (kLog2Pi + (1.3 - t[0]) * (1.3 - t[0]));
            double pr = -0.5 * (kLog2Pi + t[0] * t[0]);
            return ll + pr;
        }
        VectorXd grad_log_h(const VectorXd& t) const override {
            VectorXd g(1);
            g[0] = (1.3 - t[0]) - t[0];
            return g;
        }
    } target;
    VectorXd mu(1);
    mu << y / 2.0;
    MatrixXd L(1, 1);
    L << std::sqrt(0.5);
    VariationalState s = state_with(mu, L);
    Rng rng(5);
    SampleBatch batch = draw_theta_samples(s, 50, rng);
    double lb = estimate_lower_bound(batch, s, target);
    double log_marginal = -0.5 * (kLog2Pi + std::log(2.0) + y * y / 2.0);
    CHECK(lb == doctest::Approx(log_marginal).epsilon(1e-12));
}

TEST_CASE("lower bound: duplicated samples leave the estimate unchanged") {
    GaussianTarget target(VectorXd::Zero(2), VectorXd::Ones(2));
    VariationalState s = state_with(VectorXd::Ones(2), MatrixXd::Identity(2, 2) * 0.5);
    Rng rng(8);
    SampleBatch batch = draw_theta_samples(s, 4, rng);
    SampleBatch doubled;
    doubled.thetas.resize(8, 2);
    doubled.kappas.resize(8, 2);
    doubled.thetas << batch.thetas, batch.thetas;
    doubled.kappas << batch.kappas, batch.kappas;
    double lb1 = estimate_lower_bound(batch, s, target);
    double lb2 = estimate_lower_bound(doubled, s, target);
    CHECK(std::isfinite(lb1));
    CHECK(lb1 == doctest::Approx(lb2).epsilon(1e-14));
}

TEST_CASE("update rule: unit gradient history moves lambda by eps0") {
    VariationalState s = state_with(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
    s.gbar = VectorXd::Ones(s.lambda_dim());
    s.vbar = VectorXd::Ones(s.lambda_dim());
    s.t = 3;  // below alpha, so l_t = eps0
    FfvbConfig config;
    VectorXd lambda_before = s.lambda();
    update_lambda(s, VectorXd::Ones(s.lambda_dim()), config);
    VectorXd lambda_after = s.lambda();
    for (int i = 0; i < s.lambda_dim(); ++i)
        CHECK(lambda_after[i] - lambda_before[i] ==
              doctest::Approx(config.eps0).epsilon(1e-12));
}

TEST_CASE("update rule: learning rate decays as eps0 * alpha / t") {
    VariationalState s = state_with(VectorXd::Zero(1), MatrixXd::Identity(1, 1));
    s.gbar = VectorXd::Ones(s.lambda_dim());
    s.vbar = VectorXd::Ones(s.lambda_dim());
    FfvbConfig config;
    s.t = static_cast<int>(config.alpha) * 10;
    double mu_before = s.mu[0];
    update_lambda(s, VectorXd::Ones(s.lambda_dim()), config);
    CHECK(s.mu[0] - mu_before ==
          doctest::Approx(config.eps0 / 10.0).epsilon(1e-10));
}

TEST_CASE("update rule: beta1 = 1 freezes the gradient average") {
    VariationalState s = state_with(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
    s.gbar = VectorXd::Constant(s.lambda_dim(), 0.25);
    s.vbar = VectorXd::Ones(s.lambda_dim());
    FfvbConfig config;
    config.beta1 = 1.0;
    update_lambda(s, VectorXd::Constant(s.lambda_dim(), 9.0), config);
    CHECK(s.gbar.isApproxToConstant(0.25));
}

TEST_CASE("update rule: non-finite gradient reports the iteration") {
    VariationalState s = state_with(VectorXd::Zero(1), MatrixXd::Identity(1, 1));
    s.gbar = VectorXd::Zero(s.lambda_dim());
    s.vbar = VectorXd::Zero(s.lambda_dim());
    s.t = 17;
    VectorXd bad = VectorXd::Constant(s.lambda_dim(),
                                      std::numeric_limits<double>::quiet_NaN());
    try {
        update_lambda(s, bad, FfvbConfig{});
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::numeric);
        CHECK(std::string(e.what()).find("17") != std::string::npos);
    }
}

TEST_CASE("update rule: zero gradients stay finite via the vbar guard") {
    VariationalState s = state_with(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
    s.gbar = VectorXd::Zero(s.lambda_dim());
    s.vbar = VectorXd::Zero(s.lambda_dim());
    update_lambda(s, VectorXd::Zero(s.lambda_dim()), FfvbConfig{});
    CHECK(s.lambda().allFinite());
}

TEST_CASE("stopping: strictly increasing history keeps patience at zero") {
    FfvbConfig config;
    config.window = 5;
    config.patience = 3;
    VariationalState s = state_with(VectorXd::Zero(1), MatrixXd::Identity(1, 1));
    for (int t = 1; t <= 40; ++t) {
        s.lb_history.push_back(static_cast<double>(t));
        s.t = t;
        StopDecision d = check_stopping(s, config);
        CHECK(d == StopDecision::Continue);
        CHECK(s.patience_counter == 0);
    }
}

TEST_CASE("stopping: flat history stops after exactly P more iterations") {
    FfvbConfig config;
    config.window = 4;
    config.patience = 6;
    config.max_iter = 1000;
    VariationalState s = state_with(VectorXd::Zero(1), MatrixXd::Identity(1, 1));
    int stop_t = -1;
    for (int t = 1; t <= 100; ++t) {
        s.lb_history.push_back(1.0);  // constant
        s.t = t;
        if (check_stopping(s, config) == StopDecision::Stop) {
            stop_t = t;
            break;
        }
    }
    // First window fills at t = 4 (moving average becomes the new best);
    // every later iteration ties, so patience hits P at t = 4 + 6.
    CHECK(stop_t == 10);
}

TEST_CASE("stopping: window of one tracks the latest lower bound") {
    FfvbConfig config;
    config.window = 1;
    config.patience = 2;
    VariationalState s = state_with(VectorXd::Zero(1), MatrixXd::Identity(1, 1));
    s.lb_history = {5.0};
    s.t = 1;
    check_stopping(s, config);
    CHECK(s.best_moving_avg == doctest::Approx(5.0));
    s.lb_history.push_back(7.5);
    s.t = 2;
    check_stopping(s, config);
    CHECK(s.best_moving_avg == doctest::Approx(7.5));
}

TEST_CASE("stopping: max_iter produces a stop") {
    FfvbConfig config;
    config.window = 2;
    config.patience = 1000000;
    config.max_iter = 50;
    VariationalState s = state_with(VectorXd::Zero(1), MatrixXd::Identity(1, 1));
    for (int t = 1; t <= 50; ++t) {
        s.lb_history.push_back(static_cast<double>(t));
        s.t = t;
        StopDecision d = check_stopping(s, config);
        if (t < 50)
            CHECK(d == StopDecision::Continue);
        else
            CHECK(d == StopDecision::Stop);
    }
}

TEST_CASE("run_ffvb converges on a Gaussian target to its mean") {
    VectorXd m(3), v(3);
    m << 1.0, -2.0, 0.5;
    v << 0.5, 1.0, 2.0;
    GaussianTarget target(m, v);
    FfvbConfig config;
    config.seed = 9;
    config.n_output_draws = 500;
    VbRunResult run = run_ffvb_generic(target, config);
    CHECK((run.state.mu - m).cwiseAbs().maxCoeff() < 0.15);
    MatrixXd cov = run.state.chol_L * run.state.chol_L.transpose();
    for (int i = 0; i < 3; ++i) CHECK(std::abs(cov(i, i) - v[i]) < 0.5 * v[i]);
    CHECK(run.theta_draws.rows() == 500);
    CHECK(run.convergence == "patience");
    CHECK(run.iterations == static_cast<int>(run.state.lb_history.size()));
}

TEST_CASE("run_ffvb: same seed gives a bit-identical fitted model") {
    SimmInput input = testing::load_synthetic();
    FfvbConfig config;
    config.seed = 33;
    FittedModel a = run_ffvb(input, PriorSpec{}, config, VarianceMode::Paper);
    FittedModel b = run_ffvb(input, PriorSpec{}, config, VarianceMode::Paper);
    CHECK(model_to_json(a) == model_to_json(b));
}

TEST_CASE("covariance of any state is positive semi-definite") {
    const FittedModel& model = testing::synthetic_fit();
    MatrixXd cov = model.state.chol_L * model.state.chol_L.transpose();
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("single-source input learns only the residual scale") {
    CsvTable mixtures = parse_csv("t1\n1.1\n0.9\n1.3\n0.8\n1.2\n");
    CsvTable sources = parse_csv("name,mean_t1,sd_t1\nOnly,1,0.1\n");
    SimmInput input = assemble_dataset(mixtures, sources, std::nullopt, std::nullopt,
                                       std::nullopt, CovariateSpec{});
    FfvbConfig config;
    config.seed = 2;
    FittedModel model = run_ffvb(input, PriorSpec{}, config, VarianceMode::Paper);
    MatrixXd beta = theta_beta(model.theta_draws.row(0).transpose(), 1, 1);
    MatrixXd P = proportions_for(input, beta);
    CHECK((P.array() == 1.0).all());
    CHECK(model.convergence == "patience");
}

TEST_CASE("convergence trace replays the stopping bookkeeping") {
    const FittedModel& model = testing::synthetic_fit();
    Table trace = convergence_trace(model);
    CHECK(trace.n_rows() == model.iterations);
    int ma_col = trace.column_index("moving_average");
    int lb_col = trace.column_index("lower_bound");
    // Moving average defined only once the window is full.
    for (int r = 0; r < model.config.window - 1; ++r)
        CHECK_FALSE(std::isfinite(trace.number(r, ma_col)));
    // Recompute the window averages independently and compare.
    const auto& lb = model.state.lb_history;
    double best = -std::numeric_limits<double>::infinity();
    for (int t = model.config.window; t <= model.iterations; ++t) {
        double sum = 0.0;
        for (int i = t - model.config.window; i < t; ++i) sum += lb[i];
        double avg = sum / model.config.window;
        CHECK(trace.number(t - 1, ma_col) == doctest::Approx(avg).epsilon(1e-12));
        best = std::max(best, avg);
    }
    CHECK(model.state.best_moving_avg == doctest::Approx(best).epsilon(1e-12));
    for (int r = 0; r < trace.n_rows(); ++r)
        CHECK(trace.number(r, lb_col) == doctest::Approx(lb[r]).epsilon(1e-12));
}

TEST_CASE("worker thread count respects the cap and the sample count") {
    CHECK(worker_thread_count(1) == 1);
    CHECK(worker_thread_count(100) >= 1);
}

}  // TEST_SUITE
