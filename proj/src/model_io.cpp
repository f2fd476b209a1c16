#include "isomix/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "isomix/likelihood.hpp"
#include <nlohmann/json.hpp>

namespace isomix {

using json = nlohmann::ordered_json;

double SimmTarget::log_h(const VectorXd& theta) const {
    return isomix::log_h(input_, theta, prior_, mode_);
}

VectorXd SimmTarget::grad_log_h(const VectorXd& theta) const {
    return isomix::grad_log_h(input_, theta, prior_, mode_);
}

FittedModel run_ffvb(const SimmInput& input, const PriorSpec& prior,
                     const FfvbConfig& config, VarianceMode mode) {
    input.validate();
    prior.validate(input.n_sources(), input.n_design_cols());
    config.validate();

    SimmTarget target(input, prior, mode);
    VbRunResult run = run_ffvb_generic(target, config);

    FittedModel model;
    model.input = input;
    model.prior = prior;
    model.config = config;
    model.mode = mode;
    model.state = std::move(run.state);
    model.theta_draws = std::move(run.theta_draws);
    model.convergence = run.convergence;
    model.iterations = run.iterations;
    return model;
}

Table convergence_trace(const FittedModel& model) {
    Table t({"iteration", "lower_bound", "moving_average"});
    const auto& lb = model.state.lb_history;
    const int w = model.config.window;
    double running = 0.0;
    for (std::size_t i = 0; i < lb.size(); ++i) {
        running += lb[i];
        if (static_cast<int>(i) >= w) running -= lb[i - w];
        double avg = (static_cast<int>(i) + 1 >= w) ? running / w
                                                    : std::nan("");
        t.add_row({static_cast<double>(i + 1), lb[i], avg});
    }
    return t;
}

namespace {

json matrix_to_json(const MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

MatrixXd matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array())
        fail(ErrorCode::invalid_argument, "model json: " + what + " is not an array");
    const int rows = static_cast<int>(j.size());
    int cols = -1;
    MatrixXd m;
    for (int i = 0; i < rows; ++i) {
        const auto& row = j[i];
        if (!row.is_array())
            fail(ErrorCode::invalid_argument,
                 "model json: " + what + " row " + std::to_string(i) + " not an array");
        if (cols < 0) {
            cols = static_cast<int>(row.size());
            m.resize(rows, cols);
        } else if (static_cast<int>(row.size()) != cols) {
            fail(ErrorCode::invalid_argument,
                 "model json: " + what + " rows have uneven lengths");
        }
        for (int c = 0; c < cols; ++c) m(i, c) = row[c].get<double>();
    }
    if (rows == 0) m.resize(0, 0);
    return m;
}

json vector_to_json(const VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

VectorXd vector_from_json(const json& j, const std::string& what) {
    if (!j.is_array())
        fail(ErrorCode::invalid_argument, "model json: " + what + " is not an array");
    VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

json design_to_json(const DesignMeta& meta) {
    json spec = json::array();
    for (const auto& e : meta.spec.entries)
        spec.push_back({{"name", e.name},
                        {"kind", e.kind == CovariateKind::Continuous ? "continuous"
                                                                     : "categorical"}});
    json columns = json::array();
    for (const auto& c : meta.columns) {
        std::string kind = c.kind == ColumnKind::Intercept ? "intercept"
                           : c.kind == ColumnKind::Continuous ? "continuous"
                                                              : "level";
        columns.push_back({{"label", c.label},
                           {"kind", kind},
                           {"covariate", c.covariate},
                           {"level", c.level},
                           {"mean", c.mean},
                           {"sd", c.sd}});
    }
    json cats = json::array();
    for (const auto& c : meta.categoricals)
        cats.push_back({{"covariate", c.covariate},
                        {"levels", c.levels},
                        {"onehot_full", c.onehot_full}});
    return {{"spec", spec}, {"columns", columns}, {"categoricals", cats}};
}

DesignMeta design_from_json(const json& j) {
    DesignMeta meta;
    for (const auto& e : j.at("spec")) {
        CovariateEntry entry;
        entry.name = e.at("name").get<std::string>();
        entry.kind = e.at("kind").get<std::string>() == "continuous"
                         ? CovariateKind::Continuous
                         : CovariateKind::Categorical;
        meta.spec.entries.push_back(entry);
    }
    for (const auto& c : j.at("columns")) {
        DesignColumn col;
        col.label = c.at("label").get<std::string>();
        std::string kind = c.at("kind").get<std::string>();
        col.kind = kind == "intercept" ? ColumnKind::Intercept
                   : kind == "continuous" ? ColumnKind::Continuous
                                          : ColumnKind::Level;
        col.covariate = c.at("covariate").get<std::string>();
        col.level = c.at("level").get<std::string>();
        col.mean = c.at("mean").get<double>();
        col.sd = c.at("sd").get<double>();
        meta.columns.push_back(col);
    }
    for (const auto& c : j.at("categoricals")) {
        CategoricalLevels cat;
        cat.covariate = c.at("covariate").get<std::string>();
        cat.levels = c.at("levels").get<std::vector<std::string>>();
        cat.onehot_full = c.at("onehot_full").get<bool>();
        meta.categoricals.push_back(cat);
    }
    return meta;
}

json config_to_json_obj(const FfvbConfig& c) {
    return {{"S", c.S},
            {"patience", c.patience},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"eps0", c.eps0},
            {"alpha", c.alpha},
            {"window", c.window},
            {"max_iter", c.max_iter},
            {"seed", c.seed},
            {"n_output_draws", c.n_output_draws}};
}

// Option objects come from user-written JSON, so a misspelled key should be
// an error rather than a silently ignored default.
void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                         const std::string& what) {
    if (!j.is_object())
        fail(ErrorCode::invalid_argument, what + ": expected a JSON object");
    for (const auto& item : j.items())
        if (std::find(known.begin(), known.end(), item.key()) == known.end())
            fail(ErrorCode::invalid_argument,
                 what + ": unknown key '" + item.key() + "'");
}

FfvbConfig config_from_json_obj(const json& j) {
    reject_unknown_keys(j,
                        {"S", "patience", "beta1", "beta2", "eps0", "alpha",
                         "window", "max_iter", "seed", "n_output_draws"},
                        "config");
    FfvbConfig c;
    if (j.contains("S")) c.S = j.at("S").get<int>();
    if (j.contains("patience")) c.patience = j.at("patience").get<int>();
    if (j.contains("beta1")) c.beta1 = j.at("beta1").get<double>();
    if (j.contains("beta2")) c.beta2 = j.at("beta2").get<double>();
    if (j.contains("eps0")) c.eps0 = j.at("eps0").get<double>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("window")) c.window = j.at("window").get<int>();
    if (j.contains("max_iter")) c.max_iter = j.at("max_iter").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("n_output_draws"))
        c.n_output_draws = j.at("n_output_draws").get<int>();
    c.validate();
    return c;
}

json prior_to_json_obj(const PriorSpec& p) {
    json j{{"beta_mean", p.beta_mean},
           {"beta_sd", p.beta_sd},
           {"sigma_shape", p.sigma_shape},
           {"sigma_rate", p.sigma_rate}};
    if (p.beta_mean_matrix) j["beta_mean_matrix"] = matrix_to_json(*p.beta_mean_matrix);
    if (p.beta_sd_matrix) j["beta_sd_matrix"] = matrix_to_json(*p.beta_sd_matrix);
    return j;
}

PriorSpec prior_from_json_obj(const json& j) {
    reject_unknown_keys(j,
                        {"beta_mean", "beta_sd", "sigma_shape", "sigma_rate",
                         "beta_mean_matrix", "beta_sd_matrix"},
                        "prior");
    PriorSpec p;
    if (j.contains("beta_mean")) p.beta_mean = j.at("beta_mean").get<double>();
    if (j.contains("beta_sd")) p.beta_sd = j.at("beta_sd").get<double>();
    if (j.contains("sigma_shape")) p.sigma_shape = j.at("sigma_shape").get<double>();
    if (j.contains("sigma_rate")) p.sigma_rate = j.at("sigma_rate").get<double>();
    if (j.contains("beta_mean_matrix"))
        p.beta_mean_matrix = matrix_from_json(j.at("beta_mean_matrix"), "beta_mean_matrix");
    if (j.contains("beta_sd_matrix"))
        p.beta_sd_matrix = matrix_from_json(j.at("beta_sd_matrix"), "beta_sd_matrix");
    // Dimension checks need K and L, but the scalar constraints can be
    // enforced right away.
    if (!(p.beta_sd > 0))
        fail(ErrorCode::invalid_argument, "prior beta sd must be > 0");
    if (!(p.sigma_shape > 0) || !(p.sigma_rate > 0))
        fail(ErrorCode::invalid_argument, "prior gamma shape/rate must be > 0");
    return p;
}

}  // namespace

std::string config_to_json(const FfvbConfig& config) {
    return config_to_json_obj(config).dump(2);
}

FfvbConfig config_from_json(const std::string& text) {
    if (text.empty()) return FfvbConfig{};
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        fail(ErrorCode::invalid_argument, "config: invalid JSON");
    return config_from_json_obj(j);
}

std::string prior_to_json(const PriorSpec& prior) {
    return prior_to_json_obj(prior).dump(2);
}

PriorSpec prior_from_json(const std::string& text) {
    if (text.empty()) return PriorSpec{};
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::invalid_argument, "prior: invalid JSON");
    return prior_from_json_obj(j);
}

std::string model_to_json(const FittedModel& model) {
    json j;
    j["format"] = "isomix-model";
    j["version"] = 1;
    j["mode"] = variance_mode_name(model.mode);
    j["convergence"] = model.convergence;
    j["iterations"] = model.iterations;
    j["config"] = config_to_json_obj(model.config);
    j["prior"] = prior_to_json_obj(model.prior);

    json in;
    in["tracer_names"] = model.input.tracer_names;
    in["source_names"] = model.input.source_names;
    in["y"] = matrix_to_json(model.input.y);
    in["mu_s"] = matrix_to_json(model.input.mu_s);
    in["sigma_s"] = matrix_to_json(model.input.sigma_s);
    in["mu_c"] = matrix_to_json(model.input.mu_c);
    in["sigma_c"] = matrix_to_json(model.input.sigma_c);
    in["q"] = matrix_to_json(model.input.q);
    in["X"] = matrix_to_json(model.input.X);
    in["design"] = design_to_json(model.input.design);
    in["covariate_columns"] = model.input.covariate_columns;
    in["covariate_rows"] = model.input.covariate_rows;
    j["input"] = std::move(in);

    json st;
    st["mu"] = vector_to_json(model.state.mu);
    st["chol_L_vech"] = vector_to_json(vech(model.state.chol_L));
    st["gbar"] = vector_to_json(model.state.gbar);
    st["vbar"] = vector_to_json(model.state.vbar);
    st["t"] = model.state.t;
    st["lb_history"] = model.state.lb_history;
    st["patience_counter"] = model.state.patience_counter;
    st["best_moving_avg"] = model.state.best_moving_avg;
    j["state"] = std::move(st);

    j["theta_draws"] = matrix_to_json(model.theta_draws);
    return j.dump(2);
}

FittedModel model_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        fail(ErrorCode::invalid_argument, "model json: invalid JSON");
    if (!j.contains("format") || j.at("format").get<std::string>() != "isomix-model")
        fail(ErrorCode::invalid_argument, "model json: not an isomix model file");

    FittedModel m;
    m.mode = parse_variance_mode(j.at("mode").get<std::string>());
    m.convergence = j.at("convergence").get<std::string>();
    m.iterations = j.at("iterations").get<int>();
    m.config = config_from_json_obj(j.at("config"));
    m.prior = prior_from_json_obj(j.at("prior"));

    const auto& in = j.at("input");
    m.input.tracer_names = in.at("tracer_names").get<std::vector<std::string>>();
    m.input.source_names = in.at("source_names").get<std::vector<std::string>>();
    m.input.y = matrix_from_json(in.at("y"), "y");
    m.input.mu_s = matrix_from_json(in.at("mu_s"), "mu_s");
    m.input.sigma_s = matrix_from_json(in.at("sigma_s"), "sigma_s");
    m.input.mu_c = matrix_from_json(in.at("mu_c"), "mu_c");
    m.input.sigma_c = matrix_from_json(in.at("sigma_c"), "sigma_c");
    m.input.q = matrix_from_json(in.at("q"), "q");
    m.input.X = matrix_from_json(in.at("X"), "X");
    m.input.design = design_from_json(in.at("design"));
    m.input.covariate_columns =
        in.at("covariate_columns").get<std::vector<std::string>>();
    m.input.covariate_rows =
        in.at("covariate_rows").get<std::vector<std::vector<std::string>>>();
    m.input.validate();

    const auto& st = j.at("state");
    m.state.mu = vector_from_json(st.at("mu"), "state.mu");
    const int d = static_cast<int>(m.state.mu.size());
    m.state.chol_L = unvech(vector_from_json(st.at("chol_L_vech"), "state.chol_L"), d);
    m.state.gbar = vector_from_json(st.at("gbar"), "state.gbar");
    m.state.vbar = vector_from_json(st.at("vbar"), "state.vbar");
    m.state.t = st.at("t").get<int>();
    m.state.lb_history = st.at("lb_history").get<std::vector<double>>();
    m.state.patience_counter = st.at("patience_counter").get<int>();
    m.state.best_moving_avg = st.at("best_moving_avg").get<double>();

    m.theta_draws = matrix_from_json(j.at("theta_draws"), "theta_draws");
    if (m.theta_draws.cols() != m.input.theta_dim())
        fail(ErrorCode::invalid_argument, "model json: draw dimension mismatch");
    return m;
}

void save_model(const FittedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write file: " + path);
    out << model_to_json(model) << '\n';
    if (!out) fail(ErrorCode::io, "failed writing file: " + path);
}

FittedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

std::string fit_report(const FittedModel& model) {
    std::ostringstream out;
    out << "isomix fit report\n";
    out << "  observations: " << model.input.n_obs() << "\n";
    out << "  tracers:      " << model.input.n_tracers();
    for (const auto& t : model.input.tracer_names) out << " " << t;
    out << "\n";
    out << "  sources:      " << model.input.n_sources();
    for (const auto& s : model.input.source_names) out << " " << s;
    out << "\n";
    out << "  design cols:  " << model.input.n_design_cols();
    for (const auto& c : model.input.design.columns) out << " " << c.label;
    out << "\n";
    out << "  mode:         " << variance_mode_name(model.mode) << "\n";
    out << "  convergence:  " << model.convergence << " after " << model.iterations
        << " iterations\n";
    if (!model.state.lb_history.empty())
        out << "  best moving-average lower bound: " << model.state.best_moving_avg
            << "\n";
    out << "  posterior draws stored: " << model.n_draws() << "\n";
    return out.str();
}

}  // namespace isomix
