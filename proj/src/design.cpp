#include "isomix/design.hpp"

#include <cmath>
#include <set>

namespace isomix {

bool CovariateSpec::has(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return true;
    return false;
}

std::vector<std::string> DesignMeta::column_labels() const {
    std::vector<std::string> out;
    out.reserve(columns.size());
    for (const auto& c : columns) out.push_back(c.label);
    return out;
}

namespace {

std::vector<std::string> first_appearance_levels(const std::vector<std::string>& cells) {
    std::vector<std::string> levels;
    for (const auto& c : cells) {
        bool seen = false;
        for (const auto& l : levels)
            if (l == c) { seen = true; break; }
        if (!seen) levels.push_back(c);
    }
    return levels;
}

}  // namespace

DesignMatrix intercept_only_design(int n_rows) {
    DesignMatrix d;
    d.X = MatrixXd::Ones(n_rows, 1);
    d.meta.columns.push_back({"(Intercept)", ColumnKind::Intercept, "", "", 0.0, 1.0});
    return d;
}

DesignMatrix build_design_matrix(const CsvTable& raw, const CovariateSpec& spec) {
    if (spec.entries.empty()) return intercept_only_design(raw.n_rows());

    {
        std::set<std::string> seen;
        for (const auto& e : spec.entries) {
            if (e.name.empty())
                fail(ErrorCode::invalid_argument, "covariate with empty name");
            if (!seen.insert(e.name).second)
                fail(ErrorCode::invalid_argument,
                     "covariate '" + e.name + "' listed twice");
        }
    }

    const int n = raw.n_rows();
    if (n == 0) fail(ErrorCode::invalid_argument, "covariate table has no rows");

    // A single categorical covariate gets the full one-hot treatment with no
    // intercept; every other formula keeps the intercept and drops the first
    // level of each categorical.
    const bool sole_categorical =
        spec.entries.size() == 1 && spec.entries[0].kind == CovariateKind::Categorical;

    DesignMeta meta;
    meta.spec = spec;
    std::vector<VectorXd> cols;

    if (!sole_categorical) {
        meta.columns.push_back({"(Intercept)", ColumnKind::Intercept, "", "", 0.0, 1.0});
        cols.push_back(VectorXd::Ones(n));
    }

    for (const auto& entry : spec.entries) {
        auto cells = raw.column(entry.name);
        if (entry.kind == CovariateKind::Continuous) {
            VectorXd v(n);
            for (int i = 0; i < n; ++i)
                v[i] = parse_double(cells[i], "covariate '" + entry.name + "' row " +
                                                  std::to_string(i + 1));
            double mean = v.mean();
            double sd = n > 1 ? std::sqrt((v.array() - mean).square().sum() / (n - 1))
                              : 0.0;
            if (!(sd > 0.0))
                fail(ErrorCode::invalid_argument,
                     "covariate '" + entry.name + "' is constant; cannot standardize");
            meta.columns.push_back(
                {entry.name, ColumnKind::Continuous, entry.name, "", mean, sd});
            cols.push_back((v.array() - mean) / sd);
        } else {
            auto levels = first_appearance_levels(cells);
            if (levels.size() < 2)
                fail(ErrorCode::invalid_argument,
                     "categorical covariate '" + entry.name +
                         "' has a single level ('" + levels[0] + "')");
            CategoricalLevels cat{entry.name, levels, sole_categorical};
            meta.categoricals.push_back(cat);
            std::size_t first = sole_categorical ? 0 : 1;
            for (std::size_t li = first; li < levels.size(); ++li) {
                VectorXd v(n);
                for (int i = 0; i < n; ++i) v[i] = cells[i] == levels[li] ? 1.0 : 0.0;
                meta.columns.push_back({entry.name + "=" + levels[li],
                                        ColumnKind::Level, entry.name, levels[li],
                                        0.0, 1.0});
                cols.push_back(v);
            }
        }
    }

    DesignMatrix out;
    out.meta = std::move(meta);
    out.X.resize(n, static_cast<int>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) out.X.col(static_cast<int>(c)) = cols[c];
    return out;
}

MatrixXd encode_rows(const CsvTable& raw, const DesignMeta& meta) {
    const int n = raw.n_rows();
    if (meta.columns.empty())
        fail(ErrorCode::invalid_argument, "design metadata has no columns");

    // Validate categorical values up front so errors mention the level even
    // when the offending column would be the reference (all-zeros) encoding.
    for (const auto& cat : meta.categoricals) {
        auto cells = raw.column(cat.covariate);
        for (int i = 0; i < n; ++i) {
            bool known = false;
            for (const auto& l : cat.levels)
                if (l == cells[i]) { known = true; break; }
            if (!known) {
                std::string known_list;
                for (std::size_t li = 0; li < cat.levels.size(); ++li)
                    known_list += (li ? ", " : "") + cat.levels[li];
                fail(ErrorCode::invalid_argument,
                     "covariate '" + cat.covariate + "' row " + std::to_string(i + 1) +
                         ": unseen level '" + cells[i] + "' (known: " + known_list + ")");
            }
        }
    }

    MatrixXd X(n, meta.n_cols());
    for (int c = 0; c < meta.n_cols(); ++c) {
        const auto& col = meta.columns[c];
        switch (col.kind) {
            case ColumnKind::Intercept:
                X.col(c).setOnes();
                break;
            case ColumnKind::Continuous: {
                auto cells = raw.column(col.covariate);
                for (int i = 0; i < n; ++i) {
                    double v = parse_double(cells[i], "covariate '" + col.covariate +
                                                          "' row " + std::to_string(i + 1));
                    X(i, c) = (v - col.mean) / col.sd;
                }
                break;
            }
            case ColumnKind::Level: {
                auto cells = raw.column(col.covariate);
                for (int i = 0; i < n; ++i) X(i, c) = cells[i] == col.level ? 1.0 : 0.0;
                break;
            }
        }
    }
    return X;
}

}  // namespace isomix
