#include "isomix/ffvb.hpp"

#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

namespace isomix {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Substream tag for the post-convergence posterior draws; iteration tags are
// 0 (initialization) through max_iter, far below this.
constexpr std::uint64_t kDrawsTag = 1ULL << 32;

// Evaluates log h and its gradient for every sample.  Rows are written to
// fixed indices, so threading cannot change results; the reductions that
// consume these arrays run in sample order.
void evaluate_batch(const SampleBatch& batch, const VbTarget& target,
                    VectorXd& h_values, MatrixXd& grads) {
    const int S = batch.size();
    const int d = static_cast<int>(batch.thetas.cols());
    h_values.resize(S);
    grads.resize(S, d);

    auto work = [&](int s0, int s1, std::exception_ptr& err) {
        try {
            for (int s = s0; s < s1; ++s) {
                VectorXd theta = batch.thetas.row(s).transpose();
                h_values[s] = target.log_h(theta);
                grads.row(s) = target.grad_log_h(theta).transpose();
            }
        } catch (...) {
            err = std::current_exception();
        }
    };

    int n_threads = worker_thread_count(S);
    if (n_threads <= 1) {
        std::exception_ptr err;
        work(0, S, err);
        if (err) std::rethrow_exception(err);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(n_threads);
    int chunk = (S + n_threads - 1) / n_threads;
    for (int w = 0; w < n_threads; ++w) {
        int s0 = w * chunk, s1 = std::min(S, s0 + chunk);
        if (s0 >= s1) break;
        threads.emplace_back(work, s0, s1, std::ref(errors[w]));
    }
    for (auto& th : threads) th.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

double log_q(const VariationalState& state, const VectorXd& kappa) {
    const int d = state.dim();
    double logdet = state.chol_L.diagonal().array().log().sum();
    return -0.5 * d * kLog2Pi - logdet - 0.5 * kappa.squaredNorm();
}

VectorXd assemble_gradient(const SampleBatch& batch, const VariationalState& state,
                           const MatrixXd& grads) {
    const int S = batch.size();
    const int d = state.dim();
    VectorXd grad_mu = VectorXd::Zero(d);
    VectorXd grad_vech = VectorXd::Zero(d * (d + 1) / 2);
    auto upper = state.chol_L.transpose().triangularView<Eigen::Upper>();
    for (int s = 0; s < S; ++s) {
        VectorXd kappa = batch.kappas.row(s).transpose();
        // grad of (log h - log q) at theta_s; the q score is -L^{-T} kappa.
        VectorXd g = grads.row(s).transpose() + upper.solve(kappa);
        grad_mu += g;
        int idx = 0;
        for (int j = 0; j < d; ++j)
            for (int i = j; i < d; ++i) grad_vech[idx++] += g[i] * kappa[j];
    }
    VectorXd out(d + d * (d + 1) / 2);
    out << grad_mu / S, grad_vech / S;
    return out;
}

double assemble_lb(const SampleBatch& batch, const VariationalState& state,
                   const VectorXd& h_values) {
    const int S = batch.size();
    double acc = 0.0;
    for (int s = 0; s < S; ++s)
        acc += h_values[s] - log_q(state, batch.kappas.row(s).transpose());
    return acc / S;
}

}  // namespace

int worker_thread_count(int S) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("ISOMIX_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1)
            hw = std::min(hw, static_cast<int>(v));
    }
    return std::max(1, std::min(hw, S));
}

VectorXd vech(const MatrixXd& lower) {
    const int d = static_cast<int>(lower.rows());
    VectorXd v(d * (d + 1) / 2);
    int idx = 0;
    for (int j = 0; j < d; ++j)
        for (int i = j; i < d; ++i) v[idx++] = lower(i, j);
    return v;
}

MatrixXd unvech(const VectorXd& v, int d) {
    if (v.size() != d * (d + 1) / 2)
        fail(ErrorCode::invalid_argument, "vech vector length mismatch");
    MatrixXd m = MatrixXd::Zero(d, d);
    int idx = 0;
    for (int j = 0; j < d; ++j)
        for (int i = j; i < d; ++i) m(i, j) = v[idx++];
    return m;
}

VectorXd VariationalState::lambda() const {
    VectorXd out(lambda_dim());
    out << mu, vech(chol_L);
    return out;
}

void VariationalState::set_lambda(const VectorXd& lambda) {
    const int d = dim();
    if (lambda.size() != lambda_dim())
        fail(ErrorCode::invalid_argument, "lambda length mismatch");
    mu = lambda.head(d);
    chol_L = unvech(lambda.tail(d * (d + 1) / 2), d);
    for (int i = 0; i < d; ++i) chol_L(i, i) = std::max(chol_L(i, i), 1e-8);
}

SampleBatch draw_theta_samples(const VariationalState& state, int S, Rng& rng) {
    const int d = state.dim();
    SampleBatch batch;
    batch.kappas.resize(S, d);
    batch.thetas.resize(S, d);
    auto lower = state.chol_L.triangularView<Eigen::Lower>();
    for (int s = 0; s < S; ++s) {
        VectorXd kappa = rng.normal_vector(d);
        batch.kappas.row(s) = kappa.transpose();
        batch.thetas.row(s) = (state.mu + lower * kappa).transpose();
    }
    return batch;
}

VectorXd estimate_lb_gradient(const SampleBatch& batch,
                              const VariationalState& state,
                              const VbTarget& target) {
    if (batch.size() < 1)
        fail(ErrorCode::invalid_argument, "empty sample batch");
    VectorXd h;
    MatrixXd grads;
    evaluate_batch(batch, target, h, grads);
    return assemble_gradient(batch, state, grads);
}

double estimate_lower_bound(const SampleBatch& batch, const VariationalState& state,
                            const VbTarget& target) {
    if (batch.size() < 1)
        fail(ErrorCode::invalid_argument, "empty sample batch");
    VectorXd h;
    MatrixXd grads;
    // Only h is needed; reuse the shared evaluator for one code path.
    const int S = batch.size();
    h.resize(S);
    for (int s = 0; s < S; ++s)
        h[s] = target.log_h(batch.thetas.row(s).transpose());
    return assemble_lb(batch, state, h);
}

VariationalState init_state(const VbTarget& target, const FfvbConfig& config) {
    config.validate();
    const int d = target.dim();
    if (d < 1) fail(ErrorCode::invalid_argument, "target dimension must be >= 1");
    VariationalState state;
    state.mu = VectorXd::Zero(d);
    state.chol_L = 0.1 * MatrixXd::Identity(d, d);
    state.t = 1;
    state.patience_counter = 0;

    Rng rng(substream_seed(config.seed, 0));
    SampleBatch batch = draw_theta_samples(state, config.S, rng);
    VectorXd g0 = estimate_lb_gradient(batch, state, target);
    state.gbar = g0;
    state.vbar = g0.array().square();
    return state;
}

void update_lambda(VariationalState& state, const VectorXd& gradient,
                   const FfvbConfig& config) {
    if (!gradient.allFinite())
        fail(ErrorCode::numeric, "non-finite lower-bound gradient at iteration " +
                                     std::to_string(state.t));
    if (gradient.size() != state.lambda_dim())
        fail(ErrorCode::invalid_argument, "gradient length mismatch");
    state.gbar = config.beta1 * state.gbar + (1.0 - config.beta1) * gradient;
    state.vbar = (config.beta2 * state.vbar.array() +
                  (1.0 - config.beta2) * gradient.array().square())
                     .matrix();
    double step = std::min(config.eps0, config.eps0 * config.alpha / state.t);
    VectorXd denom = state.vbar.cwiseSqrt().cwiseMax(1e-12);
    VectorXd lambda =
        state.lambda() + step * (state.gbar.array() / denom.array()).matrix();
    state.set_lambda(lambda);
}

StopDecision check_stopping(VariationalState& state, const FfvbConfig& config) {
    const int t = state.t;
    if (t >= config.window &&
        static_cast<int>(state.lb_history.size()) >= config.window) {
        double avg = 0.0;
        for (int i = 0; i < config.window; ++i)
            avg += state.lb_history[state.lb_history.size() - 1 - i];
        avg /= config.window;
        if (avg > state.best_moving_avg) {
            state.best_moving_avg = avg;
            state.patience_counter = 0;
        } else {
            ++state.patience_counter;
        }
    }
    if (state.patience_counter >= config.patience) return StopDecision::Stop;
    if (t >= config.max_iter) return StopDecision::Stop;
    return StopDecision::Continue;
}

VbRunResult run_ffvb_generic(const VbTarget& target, const FfvbConfig& config) {
    config.validate();
    VariationalState state = init_state(target, config);
    std::string convergence;

    while (true) {
        Rng rng(substream_seed(config.seed, static_cast<std::uint64_t>(state.t)));
        SampleBatch batch = draw_theta_samples(state, config.S, rng);
        VectorXd h;
        MatrixXd grads;
        evaluate_batch(batch, target, h, grads);
        VectorXd gradient = assemble_gradient(batch, state, grads);
        double lb = assemble_lb(batch, state, h);
        update_lambda(state, gradient, config);
        state.lb_history.push_back(lb);
        if (check_stopping(state, config) == StopDecision::Stop) {
            convergence =
                state.patience_counter >= config.patience ? "patience" : "max_iter";
            break;
        }
        ++state.t;
    }

    VbRunResult result;
    result.iterations = state.t;
    result.convergence = convergence;

    const int d = target.dim();
    Rng draw_rng(substream_seed(config.seed, kDrawsTag));
    result.theta_draws.resize(config.n_output_draws, d);
    auto lower = state.chol_L.triangularView<Eigen::Lower>();
    for (int s = 0; s < config.n_output_draws; ++s) {
        VectorXd kappa = draw_rng.normal_vector(d);
        result.theta_draws.row(s) = (state.mu + lower * kappa).transpose();
    }
    result.state = std::move(state);
    return result;
}

}  // namespace isomix
