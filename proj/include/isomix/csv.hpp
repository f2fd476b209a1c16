#pragma once

#include <optional>
#include <string>
#include <vector>

#include "isomix/types.hpp"

namespace isomix {

// Minimal RFC-4180-style CSV table: a header row plus string cells.
// Quoted fields with embedded commas/quotes/newlines are supported on read;
// writing quotes only when needed.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int n_rows() const { return static_cast<int>(rows.size()); }
    int n_cols() const { return static_cast<int>(header.size()); }

    // Index of a named column, or nullopt.
    std::optional<int> column_index(const std::string& name) const;

    // Column values as strings (throws Error if the column is missing).
    std::vector<std::string> column(const std::string& name) const;

    // Column parsed as doubles; errors name the column and offending row.
    std::vector<double> numeric_column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin = "<string>");
void write_csv(const CsvTable& table, const std::string& path);
std::string csv_to_string(const CsvTable& table);

// Strict double parse of a whole cell; throws Error(invalid_argument) with
// `context` in the message when the cell is not a finite number.
double parse_double(const std::string& cell, const std::string& context);

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);

}  // namespace isomix
