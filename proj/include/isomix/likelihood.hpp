#pragma once

#include "isomix/types.hpp"

namespace isomix {

// Centered log-ratio link: softmax with max-subtraction so |f| up to ~700
// cannot overflow, renormalized so the result sums to 1 exactly.
VectorXd clr_proportions(const VectorXd& f);

// Row i = clr_proportions(X.row(i) * beta^T): the N x K dietary proportions.
MatrixXd proportions_for(const SimmInput& input, const MatrixXd& beta);

// Marginal mean/variance of each observation cell under theta.
//
// mean[i,j]     = sum_k p q mu_sc / sum_k p q          (both modes)
// variance[i,j] = sum_k p^2 q^2 s2_sc / D + sigma_j^2
//     D = sum_k p^2 q^2    (Paper mode: weighted average of source variances)
//     D = (sum_k p q)^2    (Generative mode: forward-model derivation)
// with mu_sc = mu_s + mu_c and s2_sc = sigma_s^2 + sigma_c^2.
struct MarginalMoments {
    MatrixXd mean;      // N x J
    MatrixXd variance;  // N x J
};

MarginalMoments marginal_moments(const SimmInput& input, const VectorXd& theta,
                                 VarianceMode mode);

// Sum over all cells of the Gaussian log-density of y at the marginal moments.
double log_likelihood(const SimmInput& input, const VectorXd& theta,
                      VarianceMode mode);

// Per-observation log-likelihood contributions (length N); sums to
// log_likelihood.  Used by the LOO machinery.
VectorXd pointwise_log_likelihood(const SimmInput& input, const VectorXd& theta,
                                  VarianceMode mode);

// log p(theta): independent normals on beta plus the log sigma^2 density
// induced by 1/sigma_j ~ Gamma(c0, d0), change-of-variables included:
//   log p(u) = c0 log d0 - log Gamma(c0) - log 2 - (c0/2) u - d0 e^{-u/2}.
double log_prior(const VectorXd& theta, const PriorSpec& prior, int K, int L, int J);

// h(theta) = log p(y | theta) + log p(theta).
double log_h(const SimmInput& input, const VectorXd& theta, const PriorSpec& prior,
             VarianceMode mode);

// Exact analytic gradient of log_h with respect to theta = (vec beta, u).
VectorXd grad_log_h(const SimmInput& input, const VectorXd& theta,
                    const PriorSpec& prior, VarianceMode mode);

}  // namespace isomix
