#include "isomix/likelihood.hpp"

#include <cmath>

namespace isomix {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct Dims {
    int N, J, K, L;
};

Dims dims_of(const SimmInput& input) {
    return {input.n_obs(), input.n_tracers(), input.n_sources(),
            input.n_design_cols()};
}

void check_theta(const SimmInput& input, const VectorXd& theta) {
    if (theta.size() != input.theta_dim())
        fail(ErrorCode::invalid_argument,
             "theta has " + std::to_string(theta.size()) + " entries, expected " +
                 std::to_string(input.theta_dim()));
    if (!theta.allFinite())
        fail(ErrorCode::invalid_argument, "theta has non-finite entries");
}

}  // namespace

VectorXd clr_proportions(const VectorXd& f) {
    if (!f.allFinite())
        fail(ErrorCode::invalid_argument, "CLR input has non-finite entries");
    VectorXd p = (f.array() - f.maxCoeff()).exp();
    p /= p.sum();
    p /= p.sum();  // second normalization pins the sum to 1 exactly
    return p;
}

MatrixXd proportions_for(const SimmInput& input, const MatrixXd& beta) {
    const auto [N, J, K, L] = dims_of(input);
    if (beta.rows() != K || beta.cols() != L)
        fail(ErrorCode::invalid_argument,
             "beta: expected " + std::to_string(K) + "x" + std::to_string(L) +
                 ", got " + std::to_string(beta.rows()) + "x" +
                 std::to_string(beta.cols()));
    MatrixXd F = input.X * beta.transpose();  // N x K
    MatrixXd P(N, K);
    for (int i = 0; i < N; ++i) P.row(i) = clr_proportions(F.row(i)).transpose();
    return P;
}

MarginalMoments marginal_moments(const SimmInput& input, const VectorXd& theta,
                                 VarianceMode mode) {
    check_theta(input, theta);
    const auto [N, J, K, L] = dims_of(input);
    MatrixXd beta = theta_beta(theta, K, L);
    VectorXd sigma2 = theta_u(theta, K, L, J).array().exp();

    MatrixXd P = proportions_for(input, beta);
    MatrixXd mu_sc = input.mu_s + input.mu_c;                       // K x J
    MatrixXd s2_sc = input.sigma_s.array().square() +
                     input.sigma_c.array().square();                // K x J
    MatrixXd q2 = input.q.array().square();
    MatrixXd P2 = P.array().square();

    MatrixXd A = P * (input.q.array() * mu_sc.array()).matrix();    // N x J
    MatrixXd B = P * input.q;                                       // N x J
    MatrixXd C = P2 * (q2.array() * s2_sc.array()).matrix();        // N x J
    MatrixXd D = P2 * q2;                                           // N x J

    MarginalMoments m;
    m.mean = A.array() / B.array();
    if (mode == VarianceMode::Paper)
        m.variance = (C.array() / D.array()).matrix();
    else
        m.variance = (C.array() / B.array().square()).matrix();
    m.variance.array() += sigma2.transpose().array().replicate(N, 1);
    return m;
}

VectorXd pointwise_log_likelihood(const SimmInput& input, const VectorXd& theta,
                                  VarianceMode mode) {
    MarginalMoments m = marginal_moments(input, theta, mode);
    const int N = input.n_obs(), J = input.n_tracers();
    VectorXd out = VectorXd::Zero(N);
    for (int i = 0; i < N; ++i) {
        double acc = 0.0;
        for (int j = 0; j < J; ++j) {
            double v = m.variance(i, j);
            double r = input.y(i, j) - m.mean(i, j);
            acc += -0.5 * (kLog2Pi + std::log(v)) - r * r / (2.0 * v);
        }
        out[i] = acc;
    }
    return out;
}

double log_likelihood(const SimmInput& input, const VectorXd& theta,
                      VarianceMode mode) {
    return pointwise_log_likelihood(input, theta, mode).sum();
}

double log_prior(const VectorXd& theta, const PriorSpec& prior, int K, int L,
                 int J) {
    if (theta.size() != K * L + J)
        fail(ErrorCode::invalid_argument, "theta size mismatch in log_prior");
    prior.validate(K, L);
    double out = 0.0;
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) {
            double sd = prior.beta_sd_at(k, l);
            double z = (theta[k * L + l] - prior.beta_mean_at(k, l)) / sd;
            out += -0.5 * (kLog2Pi + z * z) - std::log(sd);
        }
    }
    const double c0 = prior.sigma_shape, d0 = prior.sigma_rate;
    const double norm = c0 * std::log(d0) - std::lgamma(c0) - std::log(2.0);
    for (int j = 0; j < J; ++j) {
        double u = theta[K * L + j];
        out += norm - 0.5 * c0 * u - d0 * std::exp(-0.5 * u);
    }
    return out;
}

double log_h(const SimmInput& input, const VectorXd& theta, const PriorSpec& prior,
             VarianceMode mode) {
    return log_likelihood(input, theta, mode) +
           log_prior(theta, prior, input.n_sources(), input.n_design_cols(),
                     input.n_tracers());
}

VectorXd grad_log_h(const SimmInput& input, const VectorXd& theta,
                    const PriorSpec& prior, VarianceMode mode) {
    check_theta(input, theta);
    const auto [N, J, K, L] = dims_of(input);
    prior.validate(K, L);

    MatrixXd beta = theta_beta(theta, K, L);
    VectorXd u = theta_u(theta, K, L, J);
    VectorXd sigma2 = u.array().exp();

    MatrixXd P = proportions_for(input, beta);
    MatrixXd mu_sc = input.mu_s + input.mu_c;
    MatrixXd s2_sc = input.sigma_s.array().square() +
                     input.sigma_c.array().square();
    MatrixXd q2 = input.q.array().square();

    MatrixXd dF = MatrixXd::Zero(N, K);  // dloglik / df_ik
    VectorXd du = VectorXd::Zero(J);

    for (int i = 0; i < N; ++i) {
        VectorXd p = P.row(i).transpose();   // K
        VectorXd p2 = p.array().square();
        VectorXd g = VectorXd::Zero(K);      // dloglik_i / dp_k
        for (int j = 0; j < J; ++j) {
            double A = 0, B = 0, C = 0, D = 0;
            for (int k = 0; k < K; ++k) {
                A += p[k] * input.q(k, j) * mu_sc(k, j);
                B += p[k] * input.q(k, j);
                C += p2[k] * q2(k, j) * s2_sc(k, j);
                D += p2[k] * q2(k, j);
            }
            double m = A / B;
            double v = (mode == VarianceMode::Paper ? C / D : C / (B * B)) + sigma2[j];
            double r = input.y(i, j) - m;
            double dl_dm = r / v;
            double dl_dv = (r * r / v - 1.0) / (2.0 * v);

            for (int k = 0; k < K; ++k) {
                double dm_dp = input.q(k, j) * (mu_sc(k, j) - m) / B;
                double dv_dp;
                if (mode == VarianceMode::Paper)
                    dv_dp = 2.0 * p[k] * q2(k, j) * (s2_sc(k, j) - C / D) / D;
                else
                    dv_dp = 2.0 * p[k] * q2(k, j) * s2_sc(k, j) / (B * B) -
                            2.0 * C * input.q(k, j) / (B * B * B);
                g[k] += dl_dm * dm_dp + dl_dv * dv_dp;
            }
            du[j] += dl_dv * sigma2[j];
        }
        // Softmax chain rule: df_ik = p_k (g_k - sum_k' g_k' p_k').
        double dot = g.dot(p);
        for (int k = 0; k < K; ++k) dF(i, k) = p[k] * (g[k] - dot);
    }

    VectorXd grad(K * L + J);
    // dloglik / dbeta_kl = sum_i dF(i,k) X(i,l), plus the prior score.
    MatrixXd dBeta = dF.transpose() * input.X;  // K x L
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) {
            double sd = prior.beta_sd_at(k, l);
            grad[k * L + l] = dBeta(k, l) -
                              (beta(k, l) - prior.beta_mean_at(k, l)) / (sd * sd);
        }
    }
    const double c0 = prior.sigma_shape, d0 = prior.sigma_rate;
    for (int j = 0; j < J; ++j)
        grad[K * L + j] = du[j] - 0.5 * c0 + 0.5 * d0 * std::exp(-0.5 * u[j]);
    return grad;
}

}  // namespace isomix
