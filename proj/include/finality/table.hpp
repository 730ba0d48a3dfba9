#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace finality {

enum class ColumnKind { Integer, Real, Text };

struct Column {
    std::string name;
    ColumnKind kind;

    bool operator==(const Column&) const = default;
};

using Cell = std::variant<std::int64_t, double, std::string>;
using Row = std::vector<Cell>;

/// A typed result table. Rows are validated against the column kinds on insert.
class Table {
public:
    explicit Table(std::vector<Column> columns);

    const std::vector<Column>& columns() const noexcept { return columns_; }
    std::span<const Row> rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }

    void add_row(Row row);

    /// Stable sort on the first `keys` columns, ascending.
    void sort_rows(std::size_t keys);

    std::int64_t integer(std::size_t row, std::size_t col) const;
    double real(std::size_t row, std::size_t col) const;
    const std::string& text(std::size_t row, std::size_t col) const;

    /// Column names and kinds equal; cells equal, reals compared bitwise.
    bool operator==(const Table& other) const;

private:
    std::vector<Column> columns_;
    std::vector<Row> rows_;
};

/// Serializes with a header row. Reals use 17 significant digits, text fields
/// are quoted when they contain a comma, quote, or line break. Every line,
/// including the last, ends in '\n'.
std::string to_csv(const Table& table);

/// Writes `to_csv(table)` to `stream`; returns bytes written.
std::size_t emit_csv(const Table& table, std::ostream& stream);

/// Writes atomically (temporary file in the same directory, then rename).
/// Returns bytes written; throws IoError naming the path on failure.
std::size_t emit_csv(const Table& table, const std::filesystem::path& destination);

/// Parses CSV produced by `to_csv` (or compatible) against `schema`. The
/// header must name the schema's columns in order.
Table parse_csv(std::string_view text, std::vector<Column> schema);

/// Writes `contents` to `destination` atomically; throws IoError.
void write_file_atomic(const std::filesystem::path& destination, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

namespace csv {

struct Record {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

/// RFC 4180 record reader. Accepts LF or CRLF; blank lines are skipped, as
/// are lines starting with '#' when `skip_comments` is set.
std::vector<Record> read_records(std::string_view text, bool skip_comments);

std::string quote_if_needed(std::string_view field);

}  // namespace csv

}  // namespace finality
