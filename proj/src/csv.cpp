#include "isomix/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace isomix {

namespace {

// Splits CSV text into records of fields, honoring quoted fields.
std::vector<std::vector<std::string>> split_records(const std::string& text,
                                                    const std::string& origin) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string cell;
    bool in_quotes = false;
    bool row_started = false;
    std::size_t i = 0;
    const std::size_t n = text.size();

    auto end_field = [&] {
        fields.push_back(cell);
        cell.clear();
    };
    auto end_record = [&] {
        end_field();
        records.push_back(fields);
        fields.clear();
        row_started = false;
    };

    while (i < n) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            in_quotes = true;
            row_started = true;
        } else if (c == ',') {
            end_field();
            row_started = true;
        } else if (c == '\r') {
            // swallow; \r\n handled by the \n branch
        } else if (c == '\n') {
            if (row_started || !cell.empty()) end_record();
        } else {
            cell += c;
            row_started = true;
        }
        ++i;
    }
    if (in_quotes)
        fail(ErrorCode::invalid_argument, origin + ": unterminated quoted field");
    if (row_started || !cell.empty()) end_record();
    return records;
}

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quote_field(const std::string& field) {
    if (!needs_quoting(field)) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::optional<int> CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return std::nullopt;
}

std::vector<std::string> CsvTable::column(const std::string& name) const {
    auto idx = column_index(name);
    if (!idx) {
        std::string have;
        for (std::size_t i = 0; i < header.size(); ++i)
            have += (i ? ", " : "") + header[i];
        fail(ErrorCode::invalid_argument,
             "missing column '" + name + "' (available: " + have + ")");
    }
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[*idx]);
    return out;
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
    auto cells = column(name);
    std::vector<double> out;
    out.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
        out.push_back(parse_double(cells[i], "column '" + name + "' row " +
                                                 std::to_string(i + 1)));
    return out;
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
    auto records = split_records(text, origin);
    if (records.empty())
        fail(ErrorCode::invalid_argument, origin + ": empty CSV (no header row)");
    CsvTable table;
    table.header = records[0];
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.header.size())
            fail(ErrorCode::invalid_argument,
                 origin + ": row " + std::to_string(r) + " has " +
                     std::to_string(records[r].size()) + " fields, expected " +
                     std::to_string(table.header.size()));
        table.rows.push_back(std::move(records[r]));
    }
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path);
}

std::string csv_to_string(const CsvTable& table) {
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += quote_field(table.header[i]);
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += quote_field(row[i]);
        }
        out += '\n';
    }
    return out;
}

void write_csv(const CsvTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write file: " + path);
    out << csv_to_string(table);
    if (!out) fail(ErrorCode::io, "failed writing file: " + path);
}

double parse_double(const std::string& cell, const std::string& context) {
    std::string trimmed = cell;
    // Trim surrounding whitespace; numbers in hand-edited CSVs often have it.
    auto b = trimmed.find_first_not_of(" \t");
    auto e = trimmed.find_last_not_of(" \t");
    if (b == std::string::npos)
        fail(ErrorCode::invalid_argument, context + ": empty numeric cell");
    trimmed = trimmed.substr(b, e - b + 1);

    const char* begin = trimmed.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end != begin + trimmed.size() || errno == ERANGE || !std::isfinite(v))
        fail(ErrorCode::invalid_argument,
             context + ": '" + cell + "' is not a finite number");
    return v;
}

std::string format_double(double v) {
    // Shortest representation that parses back to the same bits; plain
    // notation is preferred over scientific when both round-trip.
    char buf[32];
    auto result = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, result.ptr);
}

}  // namespace isomix
