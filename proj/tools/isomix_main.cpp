// isomix command-line front-end.  Talks to the shared library through its C
// interface only; everything here is argument plumbing and file placement.
//
// Exit codes: 0 success, 2 input error (bad arguments, unreadable files),
// 3 numerical failure, 4 internal error.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isomix.h"

namespace {

namespace fs = std::filesystem;

// Exception carrying a process exit code; thrown after a failing library
// call (whose message has already been captured).
struct CommandError {
    int exit_code;
    std::string message;
};

int status_exit_code(isomix_status status) {
    switch (status) {
        case ISOMIX_OK: return 0;
        case ISOMIX_ERR_INVALID_ARGUMENT: return 2;
        case ISOMIX_ERR_IO: return 2;
        case ISOMIX_ERR_NUMERIC: return 3;
        default: return 4;
    }
}

void check(isomix_status status) {
    if (status != ISOMIX_OK)
        throw CommandError{status_exit_code(status), isomix_last_error()};
}

// RAII wrappers for the C handles.
using DatasetPtr = std::unique_ptr<isomix_dataset, decltype(&isomix_dataset_free)>;
using ModelPtr = std::unique_ptr<isomix_model, decltype(&isomix_model_free)>;
using PredictionPtr =
    std::unique_ptr<isomix_prediction, decltype(&isomix_prediction_free)>;
using TablePtr = std::unique_ptr<isomix_table, decltype(&isomix_table_free)>;

std::string take_string(char* s) {
    std::string out = s == nullptr ? "" : s;
    isomix_string_free(s);
    return out;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw CommandError{2, "cannot create output directory '" + dir.string() +
                                  "': " + ec.message()};
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CommandError{2, "cannot write '" + path.string() + "'"};
    out << content;
    if (!out.good()) throw CommandError{2, "short write to '" + path.string() + "'"};
}

ModelPtr load_model_file(const std::string& path) {
    isomix_model* raw = nullptr;
    check(isomix_model_load(path.c_str(), &raw));
    return ModelPtr(raw, &isomix_model_free);
}

std::string table_text(const isomix_table* table) {
    char* csv = nullptr;
    check(isomix_table_to_csv(table, &csv));
    return take_string(csv);
}

// Pretty fixed-width rendering of a table for the console.
std::string table_console(const isomix_table* table) {
    int rows = isomix_table_rows(table);
    int cols = isomix_table_cols(table);
    std::vector<std::vector<std::string>> cells(rows + 1,
                                                std::vector<std::string>(cols));
    for (int c = 0; c < cols; ++c) cells[0][c] = isomix_table_column_name(table, c);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double v = 0.0;
            if (isomix_table_number(table, r, c, &v)) {
                std::ostringstream num;
                num.precision(4);
                num << v;
                cells[r + 1][c] = num.str();
            } else {
                cells[r + 1][c] = isomix_table_text(table, r, c);
            }
        }
    std::vector<size_t> width(cols, 0);
    for (const auto& row : cells)
        for (int c = 0; c < cols; ++c) width[c] = std::max(width[c], row[c].size());
    std::ostringstream out;
    for (const auto& row : cells) {
        for (int c = 0; c < cols; ++c) {
            if (c > 0) out << "  ";
            out << row[c] << std::string(width[c] - row[c].size(), ' ');
        }
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Shared option blocks
// ---------------------------------------------------------------------------

struct DataOptions {
    std::string mixtures;
    std::string sources;
    std::string tdf;
    std::string concentration;
    std::string covariates;
    std::string formula_kind;
};

void add_data_options(CLI::App* cmd, DataOptions& data) {
    cmd->add_option("--mixtures", data.mixtures, "Mixture tracer CSV (one column per tracer)")
        ->required();
    cmd->add_option("--sources", data.sources,
                    "Source CSV: name, mean_<tracer>, sd_<tracer>")
        ->required();
    cmd->add_option("--tdf", data.tdf,
                    "Trophic discrimination CSV (same shape as sources)");
    cmd->add_option("--concentration", data.concentration,
                    "Concentration CSV (mean_<tracer> per source)");
    cmd->add_option("--covariates", data.covariates,
                    "Covariate CSV, one row per mixture observation");
    cmd->add_option("--formula-kind", data.formula_kind,
                    "Covariate roles as name:kind[,...], kind continuous|categorical "
                    "(default: every covariate column, kinds auto-detected)");
}

struct FitOptions {
    double prior_beta_mean = 0.0;
    double prior_beta_sd = 1.0;
    double prior_sigma_shape = 1.0;
    double prior_sigma_rate = 1.0;
    std::int64_t S = 100;
    std::int64_t patience = 50;
    double beta1 = 0.9;
    double beta2 = 0.9;
    double eps0 = 0.05;
    double alpha = 1000.0;
    std::int64_t window = 50;
    std::int64_t max_iter = 10000;
    std::uint64_t seed = 1;
    std::int64_t draws = 3600;
    std::string mode = "paper";
    std::string config_path;
};

void add_fit_options(CLI::App* cmd, FitOptions& fit) {
    cmd->add_option("--prior-beta-mean", fit.prior_beta_mean,
                    "Prior mean of the regression coefficients");
    cmd->add_option("--prior-beta-sd", fit.prior_beta_sd,
                    "Prior sd of the regression coefficients");
    cmd->add_option("--prior-sigma-shape", fit.prior_sigma_shape,
                    "Gamma shape of the 1/sigma prior");
    cmd->add_option("--prior-sigma-rate", fit.prior_sigma_rate,
                    "Gamma rate of the 1/sigma prior");
    cmd->add_option("--S", fit.S, "Monte-Carlo samples per optimizer iteration");
    cmd->add_option("--patience", fit.patience,
                    "Iterations without improvement before stopping");
    cmd->add_option("--beta1", fit.beta1, "Gradient moving-average weight");
    cmd->add_option("--beta2", fit.beta2, "Squared-gradient moving-average weight");
    cmd->add_option("--eps0", fit.eps0, "Base learning rate");
    cmd->add_option("--alpha", fit.alpha, "Iteration at which the rate starts decaying");
    cmd->add_option("--window", fit.window, "Moving-average window of the lower bound");
    cmd->add_option("--max-iter", fit.max_iter, "Iteration cap");
    cmd->add_option("--seed", fit.seed, "RNG seed");
    cmd->add_option("--draws", fit.draws, "Posterior draws stored in the model");
    cmd->add_option("--mode", fit.mode,
                    "Mixture variance: 'paper' (weighted average) or 'generative' "
                    "(forward simulation)");
    cmd->add_option("--config", fit.config_path,
                    "JSON file with optimizer settings (flags override it)");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CommandError{2, "cannot read '" + path + "'"};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// JSON for the optimizer config: file contents (if given) with explicitly
// set flags appended -- later keys win when the library parses the object.
std::string fit_config_json(const CLI::App* cmd, const FitOptions& fit) {
    std::ostringstream flags;
    auto add = [&](const char* flag, const char* key, const std::string& value) {
        if (cmd->count(flag) > 0) flags << ",\"" << key << "\":" << value;
    };
    std::ostringstream seed_text, s_text, patience_text, window_text, max_text,
        draws_text;
    seed_text << fit.seed;
    s_text << fit.S;
    patience_text << fit.patience;
    window_text << fit.window;
    max_text << fit.max_iter;
    draws_text << fit.draws;
    auto number = [](double v) {
        std::ostringstream out;
        out.precision(17);
        out << v;
        return out.str();
    };
    add("--S", "S", s_text.str());
    add("--patience", "patience", patience_text.str());
    add("--beta1", "beta1", number(fit.beta1));
    add("--beta2", "beta2", number(fit.beta2));
    add("--eps0", "eps0", number(fit.eps0));
    add("--alpha", "alpha", number(fit.alpha));
    add("--window", "window", window_text.str());
    add("--max-iter", "max_iter", max_text.str());
    add("--seed", "seed", seed_text.str());
    add("--draws", "n_output_draws", draws_text.str());

    std::string base = "{}";
    if (!fit.config_path.empty()) base = read_file(fit.config_path);
    // Merge by textual splice: {...base...} + {flag overrides}.
    std::string trimmed = base;
    size_t open = trimmed.find('{');
    size_t close = trimmed.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw CommandError{2, "config file is not a JSON object"};
    std::string inner = trimmed.substr(open + 1, close - open - 1);
    std::string overrides = flags.str();
    if (!overrides.empty() && inner.find_first_not_of(" \t\r\n") == std::string::npos)
        overrides = overrides.substr(1);  // drop leading comma for empty base
    return "{" + inner + overrides + "}";
}

std::string fit_prior_json(const CLI::App* cmd, const FitOptions& fit) {
    std::ostringstream out;
    out.precision(17);
    out << "{";
    bool first = true;
    auto add = [&](const char* flag, const char* key, double value) {
        if (cmd->count(flag) == 0) return;
        if (!first) out << ",";
        out << "\"" << key << "\":" << value;
        first = false;
    };
    add("--prior-beta-mean", "beta_mean", fit.prior_beta_mean);
    add("--prior-beta-sd", "beta_sd", fit.prior_beta_sd);
    add("--prior-sigma-shape", "sigma_shape", fit.prior_sigma_shape);
    add("--prior-sigma-rate", "sigma_rate", fit.prior_sigma_rate);
    out << "}";
    return out.str();
}

DatasetPtr load_dataset_from(const DataOptions& data) {
    isomix_dataset* raw = nullptr;
    check(isomix_dataset_load(data.mixtures.c_str(), data.sources.c_str(),
                              data.tdf.empty() ? nullptr : data.tdf.c_str(),
                              data.concentration.empty() ? nullptr : data.concentration.c_str(),
                              data.covariates.empty() ? nullptr : data.covariates.c_str(),
                              data.formula_kind.c_str(), &raw));
    return DatasetPtr(raw, &isomix_dataset_free);
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_fit(const CLI::App* cmd, const DataOptions& data, const FitOptions& fit,
            const std::string& out_dir) {
    DatasetPtr dataset = load_dataset_from(data);

    int32_t n_tracers = 0;
    check(isomix_dataset_dims(dataset.get(), nullptr, &n_tracers, nullptr, nullptr));
    fs::path dir(out_dir);
    ensure_directory(dir);

    if (n_tracers >= 2) {
        isomix_table* geometry = nullptr;
        int32_t n_outside = 0;
        check(isomix_dataset_geometry(dataset.get(), &geometry, &n_outside));
        TablePtr geometry_guard(geometry, &isomix_table_free);
        if (n_outside > 0) {
            std::cerr << "warning: " << n_outside
                      << " observation(s) fall outside the source mixing polygon; "
                         "their diet proportions may be unreliable\n";
            check(isomix_table_write_csv(geometry, (dir / "geometry.csv").string().c_str()));
        }
    }

    std::string config_json = fit_config_json(cmd, fit);
    std::string prior_json = fit_prior_json(cmd, fit);
    isomix_model* raw_model = nullptr;
    check(isomix_fit(dataset.get(), prior_json.c_str(), config_json.c_str(),
                     fit.mode.c_str(), &raw_model));
    ModelPtr model(raw_model, &isomix_model_free);

    check(isomix_model_save(model.get(), (dir / "model.json").string().c_str()));
    char* report = nullptr;
    check(isomix_model_report(model.get(), &report));
    std::string report_text = take_string(report);
    write_file(dir / "fit-report.txt", report_text);
    std::cout << report_text;
    std::cout << "wrote " << (dir / "model.json").string() << "\n";
    return 0;
}

int cmd_summary(const std::string& model_path, std::vector<int32_t> obs,
                const std::string& kind, bool as_json, const std::string& out_csv) {
    ModelPtr model = load_model_file(model_path);
    if (as_json || !out_csv.empty()) {
        isomix_table* table = nullptr;
        check(isomix_model_summary(model.get(), obs.empty() ? nullptr : obs.data(),
                                   static_cast<int32_t>(obs.size()), kind.c_str(),
                                   &table));
        TablePtr guard(table, &isomix_table_free);
        if (!out_csv.empty()) {
            check(isomix_table_write_csv(table, out_csv.c_str()));
            std::cout << "wrote " << out_csv << "\n";
        }
        if (as_json) {
            char* json = nullptr;
            check(isomix_table_to_json(table, &json));
            std::cout << take_string(json) << "\n";
        }
        if (!as_json) return 0;
        return 0;
    }
    char* text = nullptr;
    check(isomix_model_summary_text(model.get(), obs.empty() ? nullptr : obs.data(),
                                    static_cast<int32_t>(obs.size()), kind.c_str(),
                                    &text));
    std::cout << take_string(text);
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& newdata,
                const std::string& out_dir, const std::string& kind) {
    ModelPtr model = load_model_file(model_path);
    isomix_prediction* raw = nullptr;
    check(isomix_model_predict(model.get(), newdata.c_str(), &raw));
    PredictionPtr prediction(raw, &isomix_prediction_free);

    char* text = nullptr;
    check(isomix_prediction_summary_text(prediction.get(), kind.c_str(), &text));
    std::cout << take_string(text);

    fs::path dir(out_dir);
    ensure_directory(dir);
    char* json = nullptr;
    check(isomix_prediction_to_json(prediction.get(), &json));
    write_file(dir / "predictions.json", take_string(json));
    std::cout << "wrote " << (dir / "predictions.json").string() << "\n";
    return 0;
}

int cmd_postpred(const std::string& model_path, double level, std::uint64_t seed,
                 const std::string& out_dir) {
    ModelPtr model = load_model_file(model_path);
    double coverage = 0.0;
    check(isomix_model_posterior_predictive_files(model.get(), level, seed,
                                                  out_dir.c_str(), &coverage));
    std::cout << "coverage at level " << level << ": " << coverage << "\n";
    std::cout << "wrote " << (fs::path(out_dir) / "intervals.csv").string() << "\n";
    return 0;
}

int cmd_simulate(const std::string& preset, std::uint64_t seed,
                 const std::string& out_dir) {
    check(isomix_simulate(preset.c_str(), seed, out_dir.c_str()));
    std::cout << "wrote " << preset << " dataset (seed " << seed << ") to " << out_dir
              << "\n";
    return 0;
}

int cmd_compare(const std::vector<std::string>& model_paths,
                const std::string& out_csv) {
    std::vector<ModelPtr> models;
    std::vector<const isomix_model*> raw;
    std::vector<std::string> labels;
    for (const std::string& path : model_paths) {
        models.push_back(load_model_file(path));
        raw.push_back(models.back().get());
        labels.push_back(fs::path(path).stem().string());
    }
    std::vector<const char*> label_ptrs;
    for (const std::string& label : labels) label_ptrs.push_back(label.c_str());
    isomix_table* table = nullptr;
    check(isomix_compare(raw.data(), label_ptrs.data(),
                         static_cast<int32_t>(raw.size()), &table));
    TablePtr guard(table, &isomix_table_free);
    std::cout << table_console(table);
    if (!out_csv.empty()) {
        check(isomix_table_write_csv(table, out_csv.c_str()));
        std::cout << "wrote " << out_csv << "\n";
    }
    return 0;
}

int cmd_plot(const std::string& model_path, const std::string& kind,
             const std::string& options_json, const std::string& out_dir) {
    ModelPtr model = load_model_file(model_path);
    fs::path dir(out_dir);
    ensure_directory(dir);
    fs::path svg = dir / (kind + ".svg");
    fs::path csv = dir / (kind + ".csv");
    check(isomix_model_plot(model.get(), kind.c_str(), options_json.c_str(),
                            svg.string().c_str(), csv.string().c_str()));
    std::cout << "wrote " << svg.string() << "\n";
    std::cout << "wrote " << csv.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "isomix: covariate-dependent stable-isotope mixing models fitted by "
        "fixed-form Gaussian variational Bayes"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(isomix_version()));

    // fit ------------------------------------------------------------------
    DataOptions fit_data;
    FitOptions fit_opts;
    std::string fit_out = "isomix-out";
    CLI::App* fit = app.add_subcommand("fit", "Fit the mixing model to CSV inputs");
    add_data_options(fit, fit_data);
    add_fit_options(fit, fit_opts);
    fit->add_option("--out", fit_out, "Output directory (model.json, fit-report.txt)");

    // summary --------------------------------------------------------------
    std::string summary_model;
    std::vector<int32_t> summary_obs;
    std::string summary_kind = "statistics";
    bool summary_json = false;
    std::string summary_csv;
    CLI::App* summary =
        app.add_subcommand("summary", "Posterior summaries for fitted observations");
    summary->add_option("model", summary_model, "model.json from fit")->required();
    summary->add_option("--obs", summary_obs, "1-based observation ids (default 1)");
    summary->add_option("--type", summary_kind,
                        "statistics | quantiles | correlations");
    summary->add_flag("--json", summary_json, "Print the table as JSON");
    summary->add_option("--out", summary_csv, "Also write the table as CSV");

    // predict ----------------------------------------------------------------
    std::string predict_model;
    std::string predict_newdata;
    std::string predict_out = "isomix-out";
    std::string predict_kind = "statistics";
    CLI::App* predict = app.add_subcommand(
        "predict", "Dietary proportions at new covariate values");
    predict->add_option("model", predict_model, "model.json from fit")->required();
    predict->add_option("newdata", predict_newdata,
                        "CSV of raw-scale covariate rows")->required();
    predict->add_option("--type", predict_kind, "statistics | quantiles");
    predict->add_option("--out", predict_out, "Output directory (predictions.json)");

    // postpred ---------------------------------------------------------------
    std::string postpred_model;
    double postpred_level = 0.5;
    std::uint64_t postpred_seed = 1;
    std::string postpred_out = "isomix-out";
    CLI::App* postpred = app.add_subcommand(
        "postpred", "Posterior-predictive interval check against observed data");
    postpred->add_option("model", postpred_model, "model.json from fit")->required();
    postpred->add_option("--level", postpred_level,
                         "Central interval probability (default 0.5)");
    postpred->add_option("--seed", postpred_seed, "RNG seed for simulated replicates");
    postpred->add_option("--out", postpred_out,
                         "Output directory (intervals.csv, coverage.json, SVGs)");

    // simulate ---------------------------------------------------------------
    std::string sim_preset = "medium";
    std::uint64_t sim_seed = 1;
    std::string sim_out = "isomix-sim";
    CLI::App* simulate =
        app.add_subcommand("simulate", "Generate a synthetic dataset from a preset");
    simulate->add_option("--preset", sim_preset, "low | medium | high");
    simulate->add_option("--seed", sim_seed, "RNG seed");
    simulate->add_option("--out", sim_out,
                         "Output directory (mixtures/sources/covariates CSVs, truth.json)");

    // compare ----------------------------------------------------------------
    std::vector<std::string> compare_models;
    std::string compare_csv;
    CLI::App* compare = app.add_subcommand(
        "compare", "Leave-one-out comparison table across fitted models");
    compare->add_option("models", compare_models, "model.json files")
        ->required()
        ->expected(-1);
    compare->add_option("--out", compare_csv, "Also write the table as CSV");

    // plot -------------------------------------------------------------------
    std::string plot_model;
    std::string plot_kind;
    std::string plot_out = "isomix-out";
    int32_t plot_obs = 1;
    std::string plot_covariate;
    int32_t plot_tracer_x = 0;
    int32_t plot_tracer_y = 1;
    int32_t plot_bins = 30;
    int32_t plot_grid = 50;
    int32_t plot_prior_draws = 3600;
    std::uint64_t plot_seed = 1;
    CLI::App* plot = app.add_subcommand("plot", "Emit a figure (SVG) plus its data (CSV)");
    plot->add_option("model", plot_model, "model.json from fit")->required();
    plot->add_option("--kind", plot_kind,
                     "isospace | prop_histogram | covariates_plot | beta_histogram | "
                     "prior_viz | convergence")
        ->required();
    plot->add_option("--obs", plot_obs, "Observation id for histogram/prior kinds");
    plot->add_option("--covariate", plot_covariate,
                     "Covariate name (covariates_plot; isospace coloring)");
    plot->add_option("--tracer-x", plot_tracer_x, "x tracer index (isospace)");
    plot->add_option("--tracer-y", plot_tracer_y, "y tracer index (isospace)");
    plot->add_option("--bins", plot_bins, "Histogram bin count");
    plot->add_option("--grid-points", plot_grid, "Curve grid size (covariates_plot)");
    plot->add_option("--prior-draws", plot_prior_draws, "Prior draw count (prior_viz)");
    plot->add_option("--seed", plot_seed, "RNG seed (prior_viz)");
    plot->add_option("--out", plot_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit, fit_data, fit_opts, fit_out);
        if (summary->parsed())
            return cmd_summary(summary_model, summary_obs, summary_kind, summary_json,
                               summary_csv);
        if (predict->parsed())
            return cmd_predict(predict_model, predict_newdata, predict_out,
                               predict_kind);
        if (postpred->parsed())
            return cmd_postpred(postpred_model, postpred_level, postpred_seed,
                                postpred_out);
        if (simulate->parsed()) return cmd_simulate(sim_preset, sim_seed, sim_out);
        if (compare->parsed()) return cmd_compare(compare_models, compare_csv);
        if (plot->parsed()) {
            std::ostringstream options;
            options << "{\"obs_id\":" << plot_obs << ",\"tracer_x\":" << plot_tracer_x
                    << ",\"tracer_y\":" << plot_tracer_y << ",\"bins\":" << plot_bins
                    << ",\"grid_points\":" << plot_grid
                    << ",\"n_prior_draws\":" << plot_prior_draws
                    << ",\"seed\":" << plot_seed;
            if (!plot_covariate.empty())
                options << ",\"covariate\":\"" << plot_covariate << "\"";
            options << "}";
            return cmd_plot(plot_model, plot_kind, options.str(), plot_out);
        }
    } catch (const CommandError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
