#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace isomix {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class ErrorCode { invalid_argument, io, numeric };

// Single exception type used throughout the library.  The code distinguishes
// bad inputs (caller error), file problems, and numerical failures so the
// C API and CLI can map them to distinct status / exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

// How the mixture variance combines the per-source variances.
//   Paper:      weighted average   sum_k p^2 q^2 s^2 / sum_k p^2 q^2
//   Generative: forward-simulation sum_k p^2 q^2 s^2 / (sum_k p q)^2
enum class VarianceMode { Paper, Generative };

VarianceMode parse_variance_mode(const std::string& name);
std::string variance_mode_name(VarianceMode mode);

// ---------------------------------------------------------------------------
// Covariate specification and design-matrix metadata
// ---------------------------------------------------------------------------

enum class CovariateKind { Continuous, Categorical };

struct CovariateEntry {
    std::string name;
    CovariateKind kind = CovariateKind::Continuous;
};

// Requested model formula: which covariate columns enter the design matrix
// and in what order.  An empty entry list means intercept-only.
struct CovariateSpec {
    std::vector<CovariateEntry> entries;

    bool has(const std::string& name) const;
};

enum class ColumnKind { Intercept, Continuous, Level };

// One column of the built design matrix, with everything needed to encode
// new rows the same way later (standardization constants, level identity).
struct DesignColumn {
    std::string label;       // e.g. "(Intercept)", "length", "habitat=Marine"
    ColumnKind kind = ColumnKind::Intercept;
    std::string covariate;   // source covariate name ("" for intercept)
    std::string level;       // for ColumnKind::Level
    double mean = 0.0;       // for ColumnKind::Continuous
    double sd = 1.0;         // for ColumnKind::Continuous (sample sd)
};

// Levels seen for one categorical covariate, in first-appearance order,
// plus whether the encoding kept all levels (one-hot) or dropped the first.
struct CategoricalLevels {
    std::string covariate;
    std::vector<std::string> levels;
    bool onehot_full = false;
};

struct DesignMeta {
    CovariateSpec spec;
    std::vector<DesignColumn> columns;
    std::vector<CategoricalLevels> categoricals;

    int n_cols() const { return static_cast<int>(columns.size()); }
    std::vector<std::string> column_labels() const;
};

// ---------------------------------------------------------------------------
// Assembled model input
// ---------------------------------------------------------------------------

// Everything the likelihood needs, already aligned: N observations of J
// tracers, K sources with discrimination-corrected means/sds and
// concentrations, and the N x L design matrix.
struct SimmInput {
    MatrixXd y;                         // N x J mixture measurements
    std::vector<std::string> tracer_names;
    std::vector<std::string> source_names;
    MatrixXd mu_s;                      // K x J source means
    MatrixXd sigma_s;                   // K x J source sds (>= 0)
    MatrixXd mu_c;                      // K x J discrimination means
    MatrixXd sigma_c;                   // K x J discrimination sds
    MatrixXd q;                         // K x J concentrations (> 0)
    MatrixXd X;                         // N x L design matrix
    DesignMeta design;
    std::vector<std::string> covariate_columns;          // raw table header
    std::vector<std::vector<std::string>> covariate_rows; // raw values, N rows

    int n_obs() const { return static_cast<int>(y.rows()); }
    int n_tracers() const { return static_cast<int>(y.cols()); }
    int n_sources() const { return static_cast<int>(mu_s.rows()); }
    int n_design_cols() const { return static_cast<int>(X.cols()); }
    int theta_dim() const { return n_sources() * n_design_cols() + n_tracers(); }

    // Sanity-checks dimensions and value constraints; throws Error on failure.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

// Unconstrained parameter vector theta = (beta, u) where beta is the K x L
// coefficient matrix flattened row by row (index k*L + l) and u_j = log of
// the j-th residual variance.
struct ThetaPoint {
    VectorXd value;

    static ThetaPoint zeros(int dim) { return ThetaPoint{VectorXd::Zero(dim)}; }
    int dim() const { return static_cast<int>(value.size()); }
};

inline MatrixXd theta_beta(const VectorXd& theta, int K, int L) {
    MatrixXd beta(K, L);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < L; ++l) beta(k, l) = theta[k * L + l];
    return beta;
}

inline VectorXd theta_u(const VectorXd& theta, int K, int L, int J) {
    return theta.segment(K * L, J);
}

// ---------------------------------------------------------------------------
// Priors
// ---------------------------------------------------------------------------

// beta_kl ~ N(mean, sd^2) independently; 1/sigma_j ~ Gamma(c0, d0).
// The scalar mean/sd broadcast over all K x L coefficients; the optional
// matrices override them per coefficient (informative priors).
struct PriorSpec {
    double beta_mean = 0.0;
    double beta_sd = 1.0;
    std::optional<MatrixXd> beta_mean_matrix;  // K x L
    std::optional<MatrixXd> beta_sd_matrix;    // K x L
    double sigma_shape = 1.0;  // c0
    double sigma_rate = 1.0;   // d0

    double beta_mean_at(int k, int l) const {
        return beta_mean_matrix ? (*beta_mean_matrix)(k, l) : beta_mean;
    }
    double beta_sd_at(int k, int l) const {
        return beta_sd_matrix ? (*beta_sd_matrix)(k, l) : beta_sd;
    }

    // K/L checked only when the matrices are present.
    void validate(int K, int L) const;
};

// ---------------------------------------------------------------------------
// Optimizer configuration
// ---------------------------------------------------------------------------

struct FfvbConfig {
    int S = 100;             // Monte Carlo samples per iteration
    int patience = 50;       // stop after this many non-improving windows
    double beta1 = 0.9;      // gradient momentum
    double beta2 = 0.9;      // squared-gradient momentum
    double eps0 = 0.05;      // base step size
    double alpha = 1000.0;   // step stays eps0 until t > alpha, then decays
    int window = 50;         // moving-average window for the lower bound
    int max_iter = 10000;
    std::uint64_t seed = 1;
    int n_output_draws = 3600;

    void validate() const;
};

}  // namespace isomix
