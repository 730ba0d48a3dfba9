#include "finality/table.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "finality/error.hpp"

#ifdef __unix__
#include <unistd.h>
#endif

namespace finality {
namespace {

bool kind_matches(const Cell& cell, ColumnKind kind) {
    switch (kind) {
        case ColumnKind::Integer: return std::holds_alternative<std::int64_t>(cell);
        case ColumnKind::Real: return std::holds_alternative<double>(cell);
        case ColumnKind::Text: return std::holds_alternative<std::string>(cell);
    }
    return false;
}

bool cell_less(const Cell& a, const Cell& b) {
    if (a.index() != b.index()) return a.index() < b.index();
    return std::visit(
        [&b](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            return x < std::get<T>(b);
        },
        a);
}

bool cell_equal(const Cell& a, const Cell& b) {
    if (a.index() != b.index()) return false;
    if (const double* x = std::get_if<double>(&a))
        return std::bit_cast<std::uint64_t>(*x) == std::bit_cast<std::uint64_t>(std::get<double>(b));
    return a == b;
}

void format_cell(std::string& out, const Cell& cell) {
    if (const auto* i = std::get_if<std::int64_t>(&cell)) {
        char buf[24];
        const auto res = std::to_chars(buf, buf + sizeof buf, *i);
        out.append(buf, res.ptr);
    } else if (const auto* d = std::get_if<double>(&cell)) {
        char buf[40];
        const int n = std::snprintf(buf, sizeof buf, "%.17g", *d);
        out.append(buf, static_cast<std::size_t>(n));
    } else {
        out += csv::quote_if_needed(std::get<std::string>(cell));
    }
}

Cell parse_cell(const std::string& field, ColumnKind kind, std::size_t line) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    switch (kind) {
        case ColumnKind::Integer: {
            std::int64_t v = 0;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (field.empty() || ec != std::errc{} || ptr != last)
                throw ParseError("expected integer, got '" + field + "'", line);
            return v;
        }
        case ColumnKind::Real: {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (field.empty() || ec != std::errc{} || ptr != last)
                throw ParseError("expected real, got '" + field + "'", line);
            return v;
        }
        case ColumnKind::Text: return field;
    }
    return field;
}

}  // namespace

Table::Table(std::vector<Column> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw InvalidArgument("table needs at least one column");
}

void Table::add_row(Row row) {
    if (row.size() != columns_.size())
        throw InvalidArgument("row has " + std::to_string(row.size()) + " cells, table has " +
                              std::to_string(columns_.size()) + " columns");
    for (std::size_t c = 0; c < row.size(); ++c)
        if (!kind_matches(row[c], columns_[c].kind))
            throw InvalidArgument("cell type mismatch in column '" + columns_[c].name + "'");
    rows_.push_back(std::move(row));
}

void Table::sort_rows(std::size_t keys) {
    keys = std::min(keys, columns_.size());
    std::stable_sort(rows_.begin(), rows_.end(), [keys](const Row& a, const Row& b) {
        for (std::size_t k = 0; k < keys; ++k) {
            if (cell_less(a[k], b[k])) return true;
            if (cell_less(b[k], a[k])) return false;
        }
        return false;
    });
}

std::int64_t Table::integer(std::size_t row, std::size_t col) const {
    return std::get<std::int64_t>(rows_.at(row).at(col));
}

double Table::real(std::size_t row, std::size_t col) const {
    return std::get<double>(rows_.at(row).at(col));
}

const std::string& Table::text(std::size_t row, std::size_t col) const {
    return std::get<std::string>(rows_.at(row).at(col));
}

bool Table::operator==(const Table& other) const {
    if (columns_ != other.columns_ || rows_.size() != other.rows_.size()) return false;
    for (std::size_t r = 0; r < rows_.size(); ++r)
        for (std::size_t c = 0; c < columns_.size(); ++c)
            if (!cell_equal(rows_[r][c], other.rows_[r][c])) return false;
    return true;
}

std::string to_csv(const Table& table) {
    std::string out;
    const auto& cols = table.columns();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out += ',';
        out += csv::quote_if_needed(cols[c].name);
    }
    out += '\n';
    for (const Row& row : table.rows()) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            format_cell(out, row[c]);
        }
        out += '\n';
    }
    return out;
}

std::size_t emit_csv(const Table& table, std::ostream& stream) {
    const std::string text = to_csv(table);
    stream.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!stream) throw IoError("failed writing CSV stream");
    return text.size();
}

std::size_t emit_csv(const Table& table, const std::filesystem::path& destination) {
    const std::string text = to_csv(table);
    write_file_atomic(destination, text);
    return text.size();
}

Table parse_csv(std::string_view text, std::vector<Column> schema) {
    const auto records = csv::read_records(text, /*skip_comments=*/false);
    if (records.empty()) throw ParseError("missing header row", 1);
    const auto& header = records.front();
    if (header.fields.size() != schema.size())
        throw ParseError("header has " + std::to_string(header.fields.size()) + " columns, expected " +
                             std::to_string(schema.size()),
                         header.line);
    for (std::size_t c = 0; c < schema.size(); ++c)
        if (header.fields[c] != schema[c].name)
            throw ParseError("header column '" + header.fields[c] + "', expected '" +
                                 schema[c].name + "'",
                             header.line);

    Table table(std::move(schema));
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != table.columns().size())
            throw ParseError("expected " + std::to_string(table.columns().size()) + " fields", rec.line);
        Row row;
        row.reserve(rec.fields.size());
        for (std::size_t c = 0; c < rec.fields.size(); ++c)
            row.push_back(parse_cell(rec.fields[c], table.columns()[c].kind, rec.line));
        table.add_row(std::move(row));
    }
    return table;
}

void write_file_atomic(const std::filesystem::path& destination, std::string_view contents) {
    namespace fs = std::filesystem;
    fs::path tmp = destination;
#ifdef __unix__
    tmp += ".tmp." + std::to_string(::getpid());
#else
    tmp += ".tmp";
#endif
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::error_code ignore;
            fs::remove(tmp, ignore);
            throw IoError("failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, destination, ec);
    if (ec) {
        std::error_code ignore;
        fs::remove(tmp, ignore);
        throw IoError("cannot move output into '" + destination.string() + "': " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace csv {

std::vector<Record> read_records(std::string_view text, bool skip_comments) {
    std::vector<Record> records;
    std::size_t i = 0;
    std::size_t line = 1;
    const std::size_t n = text.size();

    while (i < n) {
        // Start of a record.
        if (text[i] == '\n' || (text[i] == '\r' && i + 1 < n && text[i + 1] == '\n')) {
            i += text[i] == '\r' ? 2 : 1;
            ++line;
            continue;
        }
        if (skip_comments && text[i] == '#') {
            while (i < n && text[i] != '\n') ++i;
            continue;
        }

        Record rec;
        rec.line = line;
        std::string field;
        bool in_quotes = false;
        bool done = false;
        while (!done) {
            if (i >= n) {
                if (in_quotes) throw ParseError("unterminated quoted field", rec.line);
                rec.fields.push_back(std::move(field));
                done = true;
                break;
            }
            const char ch = text[i];
            if (in_quotes) {
                if (ch == '"') {
                    if (i + 1 < n && text[i + 1] == '"') {
                        field += '"';
                        i += 2;
                    } else {
                        in_quotes = false;
                        ++i;
                    }
                } else {
                    if (ch == '\n') ++line;
                    field += ch;
                    ++i;
                }
                continue;
            }
            if (ch == '"' && field.empty()) {
                in_quotes = true;
                ++i;
            } else if (ch == ',') {
                rec.fields.push_back(std::move(field));
                field.clear();
                ++i;
            } else if (ch == '\n' || (ch == '\r' && i + 1 < n && text[i + 1] == '\n')) {
                i += ch == '\r' ? 2 : 1;
                ++line;
                rec.fields.push_back(std::move(field));
                done = true;
            } else {
                field += ch;
                ++i;
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::string quote_if_needed(std::string_view field) {
    // Empty fields are quoted so a one-column row never reads back as a blank line.
    if (!field.empty() && field.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

}  // namespace csv
}  // namespace finality
