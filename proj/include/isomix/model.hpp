#pragma once

#include <string>

#include "isomix/ffvb.hpp"
#include "isomix/table.hpp"
#include "isomix/types.hpp"

namespace isomix {

// VbTarget adapter binding the SIMM likelihood/prior to the optimizer.
class SimmTarget : public VbTarget {
public:
    SimmTarget(const SimmInput& input, const PriorSpec& prior, VarianceMode mode)
        : input_(input), prior_(prior), mode_(mode) {}
    int dim() const override { return input_.theta_dim(); }
    double log_h(const VectorXd& theta) const override;
    VectorXd grad_log_h(const VectorXd& theta) const override;

private:
    const SimmInput& input_;
    const PriorSpec& prior_;
    VarianceMode mode_;
};

// A finished fit: the converged variational state, stored posterior draws,
// and everything needed to reproduce outputs without the original CSVs.
struct FittedModel {
    SimmInput input;
    PriorSpec prior;
    FfvbConfig config;
    VarianceMode mode = VarianceMode::Paper;
    VariationalState state;
    MatrixXd theta_draws;     // n_output_draws x d
    std::string convergence;  // "patience" | "max_iter"
    int iterations = 0;

    int n_draws() const { return static_cast<int>(theta_draws.rows()); }
};

FittedModel run_ffvb(const SimmInput& input, const PriorSpec& prior,
                     const FfvbConfig& config, VarianceMode mode);

// (iteration, lower bound, moving average) series; the moving-average cell
// is NaN until the window is full.
Table convergence_trace(const FittedModel& model);

// JSON round trip.  Doubles serialize with shortest-exact formatting, so
// save -> load reproduces the model bit for bit.
std::string model_to_json(const FittedModel& model);
FittedModel model_from_json(const std::string& text);
void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

// Human-readable fit report (dimensions, convergence, final lower bound).
std::string fit_report(const FittedModel& model);

// Config/prior JSON (used by the C API and the CLI --config passthrough).
FfvbConfig config_from_json(const std::string& text);
std::string config_to_json(const FfvbConfig& config);
PriorSpec prior_from_json(const std::string& text);
std::string prior_to_json(const PriorSpec& prior);

}  // namespace isomix
