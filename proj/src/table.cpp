#include "isomix/table.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "isomix/csv.hpp"
#include <nlohmann/json.hpp>

namespace isomix {

void Table::add_row(std::vector<Cell> cells) {
    if (cells.size() != columns_.size())
        fail(ErrorCode::invalid_argument,
             "table row has " + std::to_string(cells.size()) + " cells, expected " +
                 std::to_string(columns_.size()));
    rows_.push_back(std::move(cells));
}

const Table::Cell& Table::cell(int row, int col) const {
    if (row < 0 || row >= n_rows() || col < 0 || col >= n_cols())
        fail(ErrorCode::invalid_argument, "table index out of range");
    return rows_[row][col];
}

bool Table::is_number(int row, int col) const {
    return std::holds_alternative<double>(cell(row, col));
}

double Table::number(int row, int col) const {
    const Cell& c = cell(row, col);
    if (!std::holds_alternative<double>(c))
        fail(ErrorCode::invalid_argument,
             "table cell (" + std::to_string(row) + "," + std::to_string(col) +
                 ") is not numeric");
    return std::get<double>(c);
}

std::string Table::text(int row, int col) const {
    const Cell& c = cell(row, col);
    if (std::holds_alternative<double>(c)) return format_double(std::get<double>(c));
    return std::get<std::string>(c);
}

int Table::column_index(const std::string& name) const {
    for (int i = 0; i < n_cols(); ++i)
        if (columns_[i] == name) return i;
    fail(ErrorCode::invalid_argument, "table has no column '" + name + "'");
}

std::string Table::to_csv() const {
    CsvTable csv;
    csv.header = columns_;
    for (int r = 0; r < n_rows(); ++r) {
        std::vector<std::string> row;
        row.reserve(columns_.size());
        for (int c = 0; c < n_cols(); ++c) row.push_back(text(r, c));
        csv.rows.push_back(std::move(row));
    }
    return csv_to_string(csv);
}

std::string Table::to_json() const {
    nlohmann::ordered_json j;
    j["columns"] = columns_;
    auto rows = nlohmann::ordered_json::array();
    for (int r = 0; r < n_rows(); ++r) {
        auto row = nlohmann::ordered_json::array();
        for (int c = 0; c < n_cols(); ++c) {
            if (is_number(r, c)) row.push_back(number(r, c));
            else row.push_back(std::get<std::string>(cell(r, c)));
        }
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j.dump(2);
}

std::string Table::to_text(int digits) const {
    std::vector<std::vector<std::string>> cells;
    cells.push_back(columns_);
    for (int r = 0; r < n_rows(); ++r) {
        std::vector<std::string> row;
        for (int c = 0; c < n_cols(); ++c) {
            if (is_number(r, c)) {
                std::ostringstream s;
                s << std::setprecision(digits) << std::fixed << number(r, c);
                row.push_back(s.str());
            } else {
                row.push_back(std::get<std::string>(cell(r, c)));
            }
        }
        cells.push_back(std::move(row));
    }
    std::vector<std::size_t> width(columns_.size(), 0);
    for (const auto& row : cells)
        for (std::size_t c = 0; c < row.size(); ++c)
            width[c] = std::max(width[c], row[c].size());
    std::ostringstream out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << "  ";
            out << std::setw(static_cast<int>(width[c]))
                << (c == 0 ? std::left : std::right) << row[c];
            out.unsetf(std::ios::adjustfield);
        }
        out << '\n';
    }
    return out.str();
}

void Table::write_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write file: " + path);
    out << to_csv();
    if (!out) fail(ErrorCode::io, "failed writing file: " + path);
}

}  // namespace isomix
