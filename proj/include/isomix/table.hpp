#pragma once

#include <string>
#include <variant>
#include <vector>

#include "isomix/types.hpp"

namespace isomix {

// Column-labeled output table whose cells are numbers or strings.  All
// user-facing tabular results (summaries, plot data, comparisons) flow
// through this type so CSV/JSON/text serialization lives in one place.
class Table {
public:
    using Cell = std::variant<double, std::string>;

    Table() = default;
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    const std::vector<std::string>& columns() const { return columns_; }
    int n_rows() const { return static_cast<int>(rows_.size()); }
    int n_cols() const { return static_cast<int>(columns_.size()); }

    // Appends a row; throws if the cell count mismatches the header.
    void add_row(std::vector<Cell> cells);

    const Cell& cell(int row, int col) const;
    bool is_number(int row, int col) const;
    double number(int row, int col) const;       // throws on string cells
    std::string text(int row, int col) const;    // numbers formatted

    int column_index(const std::string& name) const;  // throws if missing

    std::string to_csv() const;
    std::string to_json() const;  // {"columns": [...], "rows": [[...], ...]}
    // Fixed-width plain text with `digits` significant digits for numbers.
    std::string to_text(int digits = 4) const;

    void write_csv(const std::string& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

}  // namespace isomix
