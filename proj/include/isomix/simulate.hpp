#pragma once

#include <string>

#include "isomix/csv.hpp"
#include "isomix/model.hpp"
#include "isomix/table.hpp"
#include "isomix/types.hpp"

namespace isomix {

// Synthetic-data scenario.  Parameters are drawn per dataset:
//   beta_kl ~ N(0,1), 1/sigma_j ~ Ga(1,1), mu_s ~ U(-10,10), sigma_s ~ U(0,2)
// (sigma_s clamped to >= 0.01), covariates standard normal, TDFs zero and
// concentrations one.  y is generated forward from the mixture model, i.e.
// with generative-mode moments.
struct Scenario {
    std::string name;  // "low" | "medium" | "high" | "custom"
    int N = 50;
    int J = 2;
    int K = 3;
    int L = 2;  // design columns including intercept; L-1 covariates
    double mu_s_lo = -10.0, mu_s_hi = 10.0;
    double sigma_s_lo = 0.0, sigma_s_hi = 2.0;

    static Scenario preset(const std::string& name);  // low/medium/high
    void validate() const;
};

struct SimulatedDataset {
    SimmInput input;
    MatrixXd true_beta;      // K x L
    VectorXd true_sigma;     // J, sd scale
    // The raw tables, so datasets can be exported in the standard schemas.
    CsvTable mixtures_csv;
    CsvTable sources_csv;
    CsvTable covariates_csv;
    std::string truth_json;  // true parameters, serialized
};

SimulatedDataset simulate_dataset(const Scenario& scenario, std::uint64_t seed);

// Posterior-predictive interval coverage at `level` (delegates to
// posterior_predictive; the RNG seed is derived from the model config seed).
struct CoverageResult {
    double coverage = 0.0;
    std::vector<double> per_tracer;
};
CoverageResult coverage_check(const FittedModel& fit, double level);

// Per-coefficient recovery: posterior mean/sd, the posterior quantile at
// which the truth falls, and whether it lies in the central 90% interval.
// Returns the table plus the fraction of coefficients inside.
struct BetaRecovery {
    Table table;   // k, l, truth, post_mean, post_sd, quantile, inside90
    double fraction_inside90 = 0.0;
};
BetaRecovery beta_recovery_report(const FittedModel& fit, const MatrixXd& true_beta);

}  // namespace isomix
