// C interface of the shared library.  Thin translation layer: parse C
// arguments, call into the C++ core, catch exceptions, and map them to
// status codes plus a thread-local error message.
#include "isomix.h"

#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "isomix/dataset.hpp"
#include "isomix/geometry.hpp"
#include "isomix/loo.hpp"
#include "isomix/model.hpp"
#include "isomix/plots.hpp"
#include "isomix/posterior.hpp"
#include "isomix/simulate.hpp"
#include "isomix/svg.hpp"
#include "isomix/table.hpp"
#include "isomix/types.hpp"

struct isomix_dataset {
    isomix::SimmInput input;
};

struct isomix_model {
    isomix::FittedModel model;
};

struct isomix_prediction {
    isomix::Prediction prediction;
};

struct isomix_table {
    isomix::Table table;
    std::string scratch;  // backs the pointer returned by isomix_table_text
};

namespace {

thread_local std::string g_last_error;

isomix_status to_status(isomix::ErrorCode code) {
    switch (code) {
        case isomix::ErrorCode::invalid_argument:
            return ISOMIX_ERR_INVALID_ARGUMENT;
        case isomix::ErrorCode::io:
            return ISOMIX_ERR_IO;
        case isomix::ErrorCode::numeric:
            return ISOMIX_ERR_NUMERIC;
    }
    return ISOMIX_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into statuses.  Clears the error
// message on success so isomix_last_error() reflects only the latest call.
template <typename Fn>
isomix_status guarded(Fn&& body) {
    try {
        body();
        g_last_error.clear();
        return ISOMIX_OK;
    } catch (const isomix::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return ISOMIX_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return ISOMIX_ERR_INTERNAL;
    }
}

std::string text_or_empty(const char* s) { return s == nullptr ? std::string() : s; }

void require(bool condition, const std::string& message) {
    if (!condition) isomix::fail(isomix::ErrorCode::invalid_argument, message);
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

isomix_table* make_table(isomix::Table table) {
    auto* out = new isomix_table;
    out->table = std::move(table);
    return out;
}

std::vector<int> obs_id_vector(const int32_t* obs_ids, int32_t n_obs_ids) {
    if (obs_ids == nullptr || n_obs_ids <= 0) return {1};
    return std::vector<int>(obs_ids, obs_ids + n_obs_ids);
}

isomix::Table loo_table(const isomix::LooResult& loo) {
    isomix::Table table({"elpd_loo", "looic", "se_looic", "n_flagged"});
    table.add_row({loo.elpd_loo, loo.looic, loo.se_looic,
                   static_cast<double>(loo.flagged.size())});
    return table;
}

isomix::PlotOptions plot_options_from_json(const std::string& text) {
    isomix::PlotOptions options;
    if (text.empty()) return options;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        isomix::fail(isomix::ErrorCode::invalid_argument,
                     std::string("bad plot options JSON: ") + e.what());
    }
    require(doc.is_object(), "plot options JSON must be an object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "obs_id") options.obs_id = value.get<int>();
        else if (key == "covariate") options.covariate = value.get<std::string>();
        else if (key == "tracer_x") options.tracer_x = value.get<int>();
        else if (key == "tracer_y") options.tracer_y = value.get<int>();
        else if (key == "bins") options.bins = value.get<int>();
        else if (key == "grid_points") options.grid_points = value.get<int>();
        else if (key == "n_prior_draws") options.n_prior_draws = value.get<int>();
        else if (key == "seed") options.seed = value.get<std::uint64_t>();
        else
            isomix::fail(isomix::ErrorCode::invalid_argument,
                         "unknown plot option '" + key + "'");
    }
    return options;
}

}  // namespace

extern "C" {

const char* isomix_last_error(void) { return g_last_error.c_str(); }

const char* isomix_version(void) { return "1.0.0"; }

void isomix_string_free(char* s) { delete[] s; }

isomix_status isomix_dataset_load(const char* mixtures_csv, const char* sources_csv,
                                  const char* tdf_csv, const char* concentration_csv,
                                  const char* covariates_csv,
                                  const char* covariate_spec, isomix_dataset** out) {
    return guarded([&] {
        require(out != nullptr, "out pointer is null");
        require(mixtures_csv != nullptr, "mixtures_csv path is null");
        require(sources_csv != nullptr, "sources_csv path is null");
        isomix::DatasetPaths paths;
        paths.mixtures = mixtures_csv;
        paths.sources = sources_csv;
        if (tdf_csv != nullptr) paths.tdf = std::string(tdf_csv);
        if (concentration_csv != nullptr) paths.concentration = std::string(concentration_csv);
        if (covariates_csv != nullptr) paths.covariates = std::string(covariates_csv);
        isomix::CovariateSpec spec =
            isomix::parse_covariate_spec(text_or_empty(covariate_spec));
        auto* dataset = new isomix_dataset{isomix::load_dataset(paths, spec)};
        *out = dataset;
    });
}

void isomix_dataset_free(isomix_dataset* dataset) { delete dataset; }

isomix_status isomix_dataset_dims(const isomix_dataset* dataset, int32_t* n_obs,
                                  int32_t* n_tracers, int32_t* n_sources,
                                  int32_t* n_design_cols) {
    return guarded([&] {
        require(dataset != nullptr, "dataset is null");
        if (n_obs != nullptr) *n_obs = dataset->input.n_obs();
        if (n_tracers != nullptr) *n_tracers = dataset->input.n_tracers();
        if (n_sources != nullptr) *n_sources = dataset->input.n_sources();
        if (n_design_cols != nullptr) *n_design_cols = dataset->input.n_design_cols();
    });
}

isomix_status isomix_dataset_geometry(const isomix_dataset* dataset,
                                      isomix_table** report, int32_t* n_outside) {
    return guarded([&] {
        require(dataset != nullptr, "dataset is null");
        isomix::GeometryReport geometry = isomix::validate_geometry(dataset->input);
        if (n_outside != nullptr)
            *n_outside = static_cast<int32_t>(geometry.outside.size());
        if (report != nullptr) *report = make_table(geometry.to_table());
    });
}

isomix_status isomix_dataset_isospace(const isomix_dataset* dataset, int32_t tracer_x,
                                      int32_t tracer_y, const char* color_by,
                                      isomix_table** out) {
    return guarded([&] {
        require(dataset != nullptr, "dataset is null");
        require(out != nullptr, "out pointer is null");
        *out = make_table(isomix::isospace_plot_data(dataset->input, tracer_x,
                                                     tracer_y, text_or_empty(color_by)));
    });
}

isomix_status isomix_fit(const isomix_dataset* dataset, const char* prior_json,
                         const char* config_json, const char* mode,
                         isomix_model** out) {
    return guarded([&] {
        require(dataset != nullptr, "dataset is null");
        require(out != nullptr, "out pointer is null");
        isomix::PriorSpec prior = isomix::prior_from_json(text_or_empty(prior_json));
        isomix::FfvbConfig config = isomix::config_from_json(text_or_empty(config_json));
        std::string mode_name = text_or_empty(mode);
        isomix::VarianceMode variance_mode =
            mode_name.empty() ? isomix::VarianceMode::Paper
                              : isomix::parse_variance_mode(mode_name);
        auto* model = new isomix_model{
            isomix::run_ffvb(dataset->input, prior, config, variance_mode)};
        *out = model;
    });
}

isomix_status isomix_model_save(const isomix_model* model, const char* path) {
    return guarded([&] {
        require(model != nullptr, "model is null");
        require(path != nullptr, "path is null");
        isomix::save_model(model->model, path);
    });
}

isomix_status isomix_model_load(const char* path, isomix_model** out) {
    return guarded([&] {
        require(path != nullptr, "path is null");
        require(out != nullptr, "out pointer is null");
        *out = new isomix_model{isomix::load_model(path)};
    });
}

void isomix_model_free(isomix_model* model) { delete model; }

isomix_status isomix_model_to_json(const isomix_model* model, char** json_text) {
    return guarded([&] {
        require(model != nullptr, "model is null");
        require(json_text != nullptr, "json_text pointer is null");
        *json_text = copy_string(isomix::model_to_json(model->model));
    });
}

isomix_status isomix_model_report(const isomix_model* model, char** text) {
    return guarded([&] {
        require(model != nullptr, "model is null");
        require(text != nullptr, "text pointer is null");
        *text = copy_string(isomix::fit_report(model->model));
    });
}

isomix_status isomix_model_summary(const isomix_model* model, const int32_t* obs_ids,
                                   int32_t n_obs_ids, const char* kind,
                                   isomix_table** out) {
    return guarded([&] {
        require(model != nullptr, "model is null");
        require(out != nullptr, "out pointer is null");
        isomix::SummaryKind summary_kind =
            isomix::parse_summary_kind(text_or_empty(kind));
        *out = make_table(isomix::summarize(model->model,
                                            obs_id_vector(obs_ids, n_obs_ids),
                                            summary_kind));
    });
}

isomix_status isomix_model_summary_text(const isomix_model* model,
                                        const int32_t* obs_ids, int32_t n_obs_ids,
                                        const char* kind, char** text) {
    return guarded([&] {
        require(model != nullptr, "model is null");
        require(text != nullptr, "text pointer is null");
        isomix::SummaryKind summary_kind =
            isomix::parse_summary_kind(text_or_empty(kind));
        *text = copy_string(isomix::summary_text(
            model->model, obs_id_vector(obs_ids, n_obs_ids), summary_kind));
    });
}

isomix_status isomix_model_predict(const isomix_model* model, const char* newdata_csv,
                                   isomix_prediction** out) {
    return guarded([&] {
        require(model != nullptr, "model is null");
        require(newdata_csv != nullptr, "newdata_csv path is null");
        require(out != nullptr, "out pointer is null");
        isomix::CsvTable rows = isomix::read_csv(newdata_csv);
        *out = new isomix_prediction{isomix::predict_proportions(model->model, rows)};
    });
}

void isomix_prediction_free(isomix_prediction* prediction) { delete prediction; }

isomix_status isomix_prediction_summary(const isomix_prediction* prediction,
                                        const char* kind, isomix_table** out) {
    return guarded([&] {
        require(prediction != nullptr, "prediction is null");
        require(out != nullptr, "out pointer is null");
        isomix::SummaryKind summary_kind =
            isomix::parse_summary_kind(text_or_empty(kind));
        *out = make_table(isomix::summarize_proportions(
            prediction->prediction.proportions, summary_kind));
    });
}

isomix_status isomix_prediction_summary_text(const isomix_prediction* prediction,
                                             const char* kind, char** text) {
    return guarded([&] {
        require(prediction != nullptr, "prediction is null");
        require(text != nullptr, "text pointer is null");
        isomix::SummaryKind summary_kind =
            isomix::parse_summary_kind(text_or_empty(kind));
        *text = copy_string(
            isomix::prediction_summary_text(prediction->prediction, summary_kind));
    });
}

isomix_status isomix_prediction_to_json(const isomix_prediction* prediction,
                                        char** json_text) {
    return guarded([&] {
        require(prediction != nullptr, "prediction is null");
        require(json_text != nullptr, "json_text pointer is null");
        *json_text = copy_string(isomix::prediction_to_json(prediction->prediction));
    });
}

isomix_status isomix_model_posterior_predictive(const isomix_model* model,
                                                double prob_level, uint64_t seed,
                                                isomix_table** intervals,
                                                double* coverage) {
    return guarded([&] {
        require(model != nullptr, "model is null");
        isomix::PosteriorPredictive check =
            isomix::posterior_predictive(model->model, prob_level, seed);
        if (coverage != nullptr) *coverage = check.coverage;
        if (intervals != nullptr) *intervals = make_table(std::move(check.intervals));
    });
}

isomix_status isomix_model_posterior_predictive_files(const isomix_model* model,
                                                      double prob_level,
                                                      uint64_t seed,
                                                      const char* out_dir,
                                                      double* coverage) {
    return guarded([&] {
        require(model != nullptr, "model is null");
        require(out_dir != nullptr, "out_dir is null");
        isomix::PosteriorPredictive check =
            isomix::posterior_predictive(model->model, prob_level, seed);
        std::filesystem::path dir(out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            isomix::fail(isomix::ErrorCode::io,
                         "cannot create directory '" + dir.string() + "': " + ec.message());
        check.intervals.write_csv((dir / "intervals.csv").string());

        nlohmann::ordered_json cov;
        cov["prob_level"] = prob_level;
        cov["coverage"] = check.coverage;
        nlohmann::ordered_json per_tracer = nlohmann::ordered_json::object();
        const auto& tracers = model->model.input.tracer_names;
        for (size_t j = 0; j < tracers.size(); ++j)
            per_tracer[tracers[j]] = check.per_tracer_coverage[j];
        cov["per_tracer"] = per_tracer;
        isomix::write_text_file((dir / "coverage.json").string(), cov.dump(2) + "\n");

        for (size_t j = 0; j < tracers.size(); ++j) {
            isomix::PlotOutput plot = isomix::posterior_predictive_plot(
                model->model, static_cast<int>(j), check.intervals, prob_level);
            std::string name = tracers[j];
            for (char& c : name)
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' &&
                    c != '_' && c != '-')
                    c = '_';
            isomix::write_text_file((dir / ("postpred_" + name + ".svg")).string(),
                                    plot.svg);
        }
        if (coverage != nullptr) *coverage = check.coverage;
    });
}

isomix_status isomix_model_loo(const isomix_model* model, isomix_table** out) {
    return guarded([&] {
        require(model != nullptr, "model is null");
        require(out != nullptr, "out pointer is null");
        isomix::LooResult loo =
            isomix::loo_estimate(isomix::pointwise_loglik(model->model));
        *out = make_table(loo_table(loo));
    });
}

isomix_status isomix_compare(const isomix_model* const* models,
                             const char* const* labels, int32_t n_models,
                             isomix_table** out) {
    return guarded([&] {
        require(models != nullptr, "models array is null");
        require(labels != nullptr, "labels array is null");
        require(n_models > 0, "n_models must be positive");
        require(out != nullptr, "out pointer is null");
        std::vector<const isomix::FittedModel*> fits;
        std::vector<std::string> names;
        for (int32_t i = 0; i < n_models; ++i) {
            require(models[i] != nullptr, "models array contains a null model");
            require(labels[i] != nullptr, "labels array contains a null label");
            fits.push_back(&models[i]->model);
            names.emplace_back(labels[i]);
        }
        *out = make_table(isomix::compare_models(fits, names));
    });
}

isomix_status isomix_model_trace(const isomix_model* model, isomix_table** out) {
    return guarded([&] {
        require(model != nullptr, "model is null");
        require(out != nullptr, "out pointer is null");
        *out = make_table(isomix::convergence_trace(model->model));
    });
}

isomix_status isomix_model_plot(const isomix_model* model, const char* kind,
                                const char* options_json, const char* svg_path,
                                const char* csv_path) {
    return guarded([&] {
        require(model != nullptr, "model is null");
        require(kind != nullptr, "plot kind is null");
        isomix::PlotKind plot_kind = isomix::parse_plot_kind(kind);
        isomix::PlotOptions options =
            plot_options_from_json(text_or_empty(options_json));
        isomix::PlotOutput plot = isomix::make_plot(model->model, plot_kind, options);
        if (svg_path != nullptr) isomix::write_text_file(svg_path, plot.svg);
        if (csv_path != nullptr) plot.data.write_csv(csv_path);
    });
}

isomix_status isomix_simulate(const char* preset, uint64_t seed, const char* out_dir) {
    return guarded([&] {
        require(preset != nullptr, "preset is null");
        require(out_dir != nullptr, "out_dir is null");
        isomix::Scenario scenario = isomix::Scenario::preset(preset);
        isomix::SimulatedDataset sim = isomix::simulate_dataset(scenario, seed);
        std::filesystem::path dir(out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            isomix::fail(isomix::ErrorCode::io,
                         "cannot create directory '" + dir.string() + "': " + ec.message());
        isomix::write_csv(sim.mixtures_csv, (dir / "mixtures.csv").string());
        isomix::write_csv(sim.sources_csv, (dir / "sources.csv").string());
        isomix::write_csv(sim.covariates_csv, (dir / "covariates.csv").string());
        isomix::write_text_file((dir / "truth.json").string(), sim.truth_json);
    });
}

int32_t isomix_table_rows(const isomix_table* table) {
    return table == nullptr ? 0 : table->table.n_rows();
}

int32_t isomix_table_cols(const isomix_table* table) {
    return table == nullptr ? 0 : table->table.n_cols();
}

const char* isomix_table_column_name(const isomix_table* table, int32_t col) {
    if (table == nullptr || col < 0 || col >= table->table.n_cols()) return nullptr;
    return table->table.columns()[static_cast<size_t>(col)].c_str();
}

int32_t isomix_table_number(const isomix_table* table, int32_t row, int32_t col,
                            double* value) {
    if (table == nullptr || row < 0 || col < 0 || row >= table->table.n_rows() ||
        col >= table->table.n_cols())
        return 0;
    if (!table->table.is_number(row, col)) return 0;
    if (value != nullptr) *value = table->table.number(row, col);
    return 1;
}

const char* isomix_table_text(const isomix_table* table, int32_t row, int32_t col) {
    if (table == nullptr || row < 0 || col < 0 || row >= table->table.n_rows() ||
        col >= table->table.n_cols())
        return nullptr;
    auto* mutable_table = const_cast<isomix_table*>(table);
    mutable_table->scratch = table->table.text(row, col);
    return mutable_table->scratch.c_str();
}

isomix_status isomix_table_write_csv(const isomix_table* table, const char* path) {
    return guarded([&] {
        require(table != nullptr, "table is null");
        require(path != nullptr, "path is null");
        table->table.write_csv(path);
    });
}

isomix_status isomix_table_to_csv(const isomix_table* table, char** csv_text) {
    return guarded([&] {
        require(table != nullptr, "table is null");
        require(csv_text != nullptr, "csv_text pointer is null");
        *csv_text = copy_string(table->table.to_csv());
    });
}

isomix_status isomix_table_to_json(const isomix_table* table, char** json_text) {
    return guarded([&] {
        require(table != nullptr, "table is null");
        require(json_text != nullptr, "json_text pointer is null");
        *json_text = copy_string(table->table.to_json());
    });
}

void isomix_table_free(isomix_table* table) { delete table; }

}  // extern "C"
