#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "isomix/rng.hpp"
#include "isomix/types.hpp"

namespace isomix {

// Target log-density h(theta) = log p(y|theta) + log p(theta) plus its
// gradient; the optimizer is generic over this interface.
class VbTarget {
public:
    virtual ~VbTarget() = default;
    virtual int dim() const = 0;
    virtual double log_h(const VectorXd& theta) const = 0;
    virtual VectorXd grad_log_h(const VectorXd& theta) const = 0;
};

// State of the Gaussian variational approximation q = N(mu, L L^T) together
// with the adaptive-update accumulators.  The free parameters are
// lambda = (mu, vech(L)), vech stacking the lower triangle column by column,
// so |lambda| = d + d(d+1)/2.
struct VariationalState {
    VectorXd mu;          // d
    MatrixXd chol_L;      // d x d lower triangular, diagonal > 0
    VectorXd gbar;        // |lambda| running gradient average
    VectorXd vbar;        // |lambda| running squared-gradient average
    int t = 1;            // iteration counter
    std::vector<double> lb_history;
    int patience_counter = 0;
    double best_moving_avg = -std::numeric_limits<double>::infinity();

    int dim() const { return static_cast<int>(mu.size()); }
    int lambda_dim() const { return dim() + dim() * (dim() + 1) / 2; }

    VectorXd lambda() const;                 // (mu, vech(L))
    void set_lambda(const VectorXd& lambda); // clamps diag(L) >= 1e-8
};

// vech/unvech over the lower triangle, column-major within each column.
VectorXd vech(const MatrixXd& lower);
MatrixXd unvech(const VectorXd& v, int d);

// One iteration's Monte Carlo batch: theta_s = mu + L kappa_s.
struct SampleBatch {
    MatrixXd thetas;  // S x d
    MatrixXd kappas;  // S x d
    int size() const { return static_cast<int>(thetas.rows()); }
};

// Initial state: mu = 0, L = 0.1 I, accumulators seeded with one gradient
// estimate at lambda^(0) (gbar_0 = estimated gradient, vbar_0 = gbar_0^2).
VariationalState init_state(const VbTarget& target, const FfvbConfig& config);

SampleBatch draw_theta_samples(const VariationalState& state, int S, Rng& rng);

// Reparameterized lower-bound gradient over lambda:
//   mu part      = (1/S) sum_s grad h_lambda(theta_s)
//   vech(L) part = (1/S) sum_s vech(grad h_lambda(theta_s) kappa_s^T)
// where grad h_lambda(theta) = grad log h(theta) - grad log q(theta).
VectorXd estimate_lb_gradient(const SampleBatch& batch,
                              const VariationalState& state,
                              const VbTarget& target);

// (1/S) sum_s [log h(theta_s) - log q(theta_s)].
double estimate_lower_bound(const SampleBatch& batch,
                            const VariationalState& state,
                            const VbTarget& target);

// Adaptive step:
//   gbar <- b1 gbar + (1-b1) g;  vbar <- b2 vbar + (1-b2) g^2
//   step l_t = min(eps0, eps0 * alpha / t);  lambda += l_t gbar / sqrt(vbar)
// Throws Error(numeric) naming the iteration on a non-finite gradient.
void update_lambda(VariationalState& state, const VectorXd& gradient,
                   const FfvbConfig& config);

enum class StopDecision { Continue, Stop };

// Moving-average stopping rule: once t >= window, the average of the last
// `window` lower bounds must strictly beat the best seen or patience ticks;
// stop at patience >= P or t >= max_iter.
StopDecision check_stopping(VariationalState& state, const FfvbConfig& config);

struct VbRunResult {
    VariationalState state;
    MatrixXd theta_draws;        // n_output_draws x d, from N(mu, LL^T)
    std::string convergence;     // "patience" | "max_iter"
    int iterations = 0;
};

// Full optimization loop.  Deterministic given config.seed: each iteration
// draws from its own derived substream, so internal parallelism cannot
// reorder the random sequence.
VbRunResult run_ffvb_generic(const VbTarget& target, const FfvbConfig& config);

// Number of worker threads for per-sample evaluation: min(hardware, S), the
// ISOMIX_THREADS environment variable capping it when set.
int worker_thread_count(int S);

}  // namespace isomix
