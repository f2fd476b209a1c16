#include "isomix/dataset.hpp"

#include <cmath>

namespace isomix {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

// Reads mean_<tracer>/sd_<tracer> columns from a sources-shaped table and
// reorders rows to match `source_names` using the table's name column.
void read_source_shaped(const CsvTable& table, const std::string& what,
                        const std::vector<std::string>& tracer_names,
                        const std::vector<std::string>& source_names,
                        bool require_sd, MatrixXd& mean_out, MatrixXd& sd_out) {
    const int K = static_cast<int>(source_names.size());
    const int J = static_cast<int>(tracer_names.size());

    auto name_col = table.column_index("name");
    if (!name_col) name_col = table.column_index("source");
    if (!name_col)
        fail(ErrorCode::invalid_argument,
             what + ": missing 'name' (or 'source') column");
    if (table.n_rows() != K)
        fail(ErrorCode::invalid_argument,
             what + ": has " + std::to_string(table.n_rows()) + " rows but " +
                 std::to_string(K) + " sources are defined");

    // Map source name -> table row.
    std::vector<int> row_of(K, -1);
    for (int r = 0; r < table.n_rows(); ++r) {
        const std::string name = trim(table.rows[r][*name_col]);
        bool matched = false;
        for (int k = 0; k < K; ++k) {
            if (source_names[k] == name) {
                if (row_of[k] != -1)
                    fail(ErrorCode::invalid_argument,
                         what + ": duplicate row for source '" + name + "'");
                row_of[k] = r;
                matched = true;
                break;
            }
        }
        if (!matched)
            fail(ErrorCode::invalid_argument,
                 what + ": unknown source '" + name + "'");
    }
    for (int k = 0; k < K; ++k)
        if (row_of[k] == -1)
            fail(ErrorCode::invalid_argument,
                 what + ": no row for source '" + source_names[k] + "'");

    mean_out.resize(K, J);
    sd_out.resize(K, J);
    sd_out.setZero();
    for (int j = 0; j < J; ++j) {
        auto means = table.numeric_column("mean_" + tracer_names[j]);
        std::vector<double> sds;
        if (require_sd || table.column_index("sd_" + tracer_names[j]))
            sds = table.numeric_column("sd_" + tracer_names[j]);
        for (int k = 0; k < K; ++k) {
            mean_out(k, j) = means[row_of[k]];
            if (!sds.empty()) sd_out(k, j) = sds[row_of[k]];
        }
    }
}

}  // namespace

CovariateSpec parse_covariate_spec(const std::string& text) {
    CovariateSpec spec;
    std::string t = trim(text);
    if (t.empty()) return spec;
    std::size_t pos = 0;
    while (pos <= t.size()) {
        auto comma = t.find(',', pos);
        std::string item = trim(t.substr(pos, comma == std::string::npos
                                                  ? std::string::npos
                                                  : comma - pos));
        if (!item.empty()) {
            auto colon = item.find(':');
            CovariateEntry entry;
            if (colon == std::string::npos) {
                entry.name = trim(item);
                entry.kind = CovariateKind::Continuous;
            } else {
                entry.name = trim(item.substr(0, colon));
                std::string kind = trim(item.substr(colon + 1));
                if (kind == "continuous")
                    entry.kind = CovariateKind::Continuous;
                else if (kind == "categorical")
                    entry.kind = CovariateKind::Categorical;
                else
                    fail(ErrorCode::invalid_argument,
                         "unknown covariate kind '" + kind +
                             "' (expected continuous or categorical)");
            }
            if (entry.name.empty())
                fail(ErrorCode::invalid_argument,
                     "empty covariate name in spec '" + text + "'");
            spec.entries.push_back(entry);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return spec;
}

void SimmInput::validate() const {
    const int N = n_obs(), J = n_tracers(), K = n_sources(), L = n_design_cols();
    if (N < 1) fail(ErrorCode::invalid_argument, "mixtures: no observations");
    if (J < 1) fail(ErrorCode::invalid_argument, "mixtures: no tracer columns");
    if (K < 1) fail(ErrorCode::invalid_argument, "sources: no sources");
    if (static_cast<int>(tracer_names.size()) != J)
        fail(ErrorCode::invalid_argument, "tracer name count mismatch");
    if (static_cast<int>(source_names.size()) != K)
        fail(ErrorCode::invalid_argument, "source name count mismatch");
    auto check_shape = [&](const MatrixXd& m, const std::string& what) {
        if (m.rows() != K || m.cols() != J)
            fail(ErrorCode::invalid_argument,
                 what + ": expected " + std::to_string(K) + "x" + std::to_string(J) +
                     ", got " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
        if (!m.allFinite())
            fail(ErrorCode::invalid_argument, what + ": non-finite entries");
    };
    check_shape(mu_s, "sources means");
    check_shape(sigma_s, "sources sds");
    check_shape(mu_c, "tdf means");
    check_shape(sigma_c, "tdf sds");
    check_shape(q, "concentration");
    if ((sigma_s.array() < 0).any())
        fail(ErrorCode::invalid_argument, "sources sds: negative values");
    if ((sigma_c.array() < 0).any())
        fail(ErrorCode::invalid_argument, "tdf sds: negative values");
    if ((q.array() <= 0).any())
        fail(ErrorCode::invalid_argument, "concentration: values must be > 0");
    if (!y.allFinite())
        fail(ErrorCode::invalid_argument, "mixtures: non-finite values");
    if (X.rows() != N)
        fail(ErrorCode::invalid_argument,
             "covariates: " + std::to_string(X.rows()) + " rows but mixtures has " +
                 std::to_string(N));
    if (L < 1 || design.n_cols() != L)
        fail(ErrorCode::invalid_argument, "design matrix/metadata mismatch");
}

void PriorSpec::validate(int K, int L) const {
    if (!(beta_sd > 0))
        fail(ErrorCode::invalid_argument, "prior beta sd must be > 0");
    if (!(sigma_shape > 0) || !(sigma_rate > 0))
        fail(ErrorCode::invalid_argument, "prior gamma shape/rate must be > 0");
    auto check = [&](const std::optional<MatrixXd>& m, const std::string& what) {
        if (!m) return;
        if (m->rows() != K || m->cols() != L)
            fail(ErrorCode::invalid_argument,
                 "prior " + what + " matrix: expected " + std::to_string(K) + "x" +
                     std::to_string(L));
    };
    check(beta_mean_matrix, "beta mean");
    check(beta_sd_matrix, "beta sd");
    if (beta_sd_matrix && !(beta_sd_matrix->array() > 0).all())
        fail(ErrorCode::invalid_argument, "prior beta sd matrix: entries must be > 0");
}

void FfvbConfig::validate() const {
    if (S < 2) fail(ErrorCode::invalid_argument, "config: S must be >= 2");
    if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1))
        fail(ErrorCode::invalid_argument, "config: beta1/beta2 must be in (0,1)");
    if (!(eps0 > 0)) fail(ErrorCode::invalid_argument, "config: eps0 must be > 0");
    if (window < 1) fail(ErrorCode::invalid_argument, "config: window must be >= 1");
    if (patience < 1) fail(ErrorCode::invalid_argument, "config: patience must be >= 1");
    if (max_iter < window)
        fail(ErrorCode::invalid_argument, "config: max_iter must be >= window");
    if (n_output_draws < 1)
        fail(ErrorCode::invalid_argument, "config: n_output_draws must be >= 1");
}

VarianceMode parse_variance_mode(const std::string& name) {
    if (name == "paper") return VarianceMode::Paper;
    if (name == "generative") return VarianceMode::Generative;
    fail(ErrorCode::invalid_argument,
         "unknown mode '" + name + "' (expected paper or generative)");
}

std::string variance_mode_name(VarianceMode mode) {
    return mode == VarianceMode::Paper ? "paper" : "generative";
}

SimmInput assemble_dataset(const CsvTable& mixtures, const CsvTable& sources,
                           const std::optional<CsvTable>& tdf,
                           const std::optional<CsvTable>& concentration,
                           const std::optional<CsvTable>& covariates,
                           const CovariateSpec& spec) {
    SimmInput input;

    // Mixtures: every column is a tracer.
    input.tracer_names = mixtures.header;
    const int N = mixtures.n_rows();
    const int J = mixtures.n_cols();
    if (N == 0) fail(ErrorCode::invalid_argument, "mixtures: no rows");
    if (J == 0) fail(ErrorCode::invalid_argument, "mixtures: no columns");
    input.y.resize(N, J);
    for (int j = 0; j < J; ++j) {
        auto col = mixtures.numeric_column(input.tracer_names[j]);
        for (int i = 0; i < N; ++i) input.y(i, j) = col[i];
    }

    // Sources: define K and the source order.
    auto name_col = sources.column_index("name");
    if (!name_col) name_col = sources.column_index("source");
    if (!name_col)
        fail(ErrorCode::invalid_argument, "sources: missing 'name' (or 'source') column");
    for (const auto& row : sources.rows) {
        std::string name = trim(row[*name_col]);
        if (name.empty()) fail(ErrorCode::invalid_argument, "sources: empty source name");
        for (const auto& existing : input.source_names)
            if (existing == name)
                fail(ErrorCode::invalid_argument,
                     "sources: duplicate source '" + name + "'");
        input.source_names.push_back(name);
    }
    read_source_shaped(sources, "sources", input.tracer_names, input.source_names,
                       /*require_sd=*/true, input.mu_s, input.sigma_s);
    if ((input.sigma_s.array() < 0).any())
        fail(ErrorCode::invalid_argument, "sources: sd columns must be >= 0");

    const int K = input.n_sources();
    if (tdf) {
        read_source_shaped(*tdf, "tdf", input.tracer_names, input.source_names,
                           /*require_sd=*/true, input.mu_c, input.sigma_c);
    } else {
        input.mu_c = MatrixXd::Zero(K, J);
        input.sigma_c = MatrixXd::Zero(K, J);
    }
    if (concentration) {
        MatrixXd sd_ignored;
        read_source_shaped(*concentration, "concentration", input.tracer_names,
                           input.source_names, /*require_sd=*/false, input.q,
                           sd_ignored);
    } else {
        input.q = MatrixXd::Ones(K, J);
    }

    // Covariates and design matrix.
    if (covariates) {
        if (covariates->n_rows() != N)
            fail(ErrorCode::invalid_argument,
                 "covariates: " + std::to_string(covariates->n_rows()) +
                     " rows but mixtures has " + std::to_string(N));
        CovariateSpec effective = spec;
        if (effective.entries.empty()) {
            // No formula given: use every column, guessing kind from whether
            // all values parse as numbers.
            for (const auto& name : covariates->header) {
                CovariateEntry e{name, CovariateKind::Categorical};
                bool numeric = true;
                for (const auto& row : covariates->rows) {
                    try {
                        parse_double(row[*covariates->column_index(name)], "probe");
                    } catch (const Error&) {
                        numeric = false;
                        break;
                    }
                }
                if (numeric) e.kind = CovariateKind::Continuous;
                effective.entries.push_back(e);
            }
        } else {
            for (const auto& e : effective.entries)
                if (!covariates->column_index(e.name)) {
                    std::string have;
                    for (std::size_t i = 0; i < covariates->header.size(); ++i)
                        have += (i ? ", " : "") + covariates->header[i];
                    fail(ErrorCode::invalid_argument,
                         "unknown covariate '" + e.name + "' (available: " + have + ")");
                }
        }
        auto design = build_design_matrix(*covariates, effective);
        input.X = std::move(design.X);
        input.design = std::move(design.meta);
        input.covariate_columns = covariates->header;
        input.covariate_rows = covariates->rows;
    } else {
        if (!spec.entries.empty())
            fail(ErrorCode::invalid_argument,
                 "covariate spec given but no covariates table supplied");
        auto design = intercept_only_design(N);
        input.X = std::move(design.X);
        input.design = std::move(design.meta);
    }

    input.validate();
    return input;
}

SimmInput load_dataset(const DatasetPaths& paths, const CovariateSpec& spec) {
    CsvTable mixtures = read_csv(paths.mixtures);
    CsvTable sources = read_csv(paths.sources);
    std::optional<CsvTable> tdf, conc, cov;
    if (paths.tdf) tdf = read_csv(*paths.tdf);
    if (paths.concentration) conc = read_csv(*paths.concentration);
    if (paths.covariates) cov = read_csv(*paths.covariates);
    return assemble_dataset(mixtures, sources, tdf, conc, cov, spec);
}

}  // namespace isomix
