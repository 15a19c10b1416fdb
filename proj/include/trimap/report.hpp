#pragma once

// Versioned tabular output in CSV or JSON, written row by row, plus a reader
// for either format.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace trimap::report {

inline constexpr int kSchemaVersion = 1;

enum class Format { Csv, Json };

/// "csv" or "json"; throws std::invalid_argument otherwise.
[[nodiscard]] Format parse_format(std::string_view text);
[[nodiscard]] std::string_view to_string(Format f) noexcept;

using Cell = std::variant<std::monostate, bool, long long, double, std::string>;
using Metadata = std::vector<std::pair<std::string, std::string>>;

/// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
[[nodiscard]] std::string format_double(double v);

// CSV layout:
//   # schema_version,1
//   # key,value            (one line per metadata entry)
//   ## table-name
//   col,col,...
//   row lines
//   (blank line between tables)
//
// JSON layout:
//   {"schema_version":1,"meta":{...},"tables":[{"name":..,"columns":[..],"rows":[[..],..]},..]}
class Writer {
public:
    Writer(std::ostream& os, Format format, Metadata meta);
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;
    ~Writer();

    void begin_table(std::string name, std::vector<std::string> columns);
    /// cells.size() must equal the column count.
    void row(const std::vector<Cell>& cells);
    void end_table();
    /// Closes any open table and the document. Called by the destructor if needed.
    void finish();

    [[nodiscard]] std::size_t rows_in_table() const noexcept { return rows_; }

private:
    std::ostream& os_;
    Format format_;
    std::size_t columns_ = 0;
    std::size_t rows_ = 0;
    std::size_t tables_ = 0;
    bool in_table_ = false;
    bool finished_ = false;
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;  // cells in their CSV text form

    /// Column index; throws std::out_of_range for unknown names.
    [[nodiscard]] std::size_t column(std::string_view name) const;
    [[nodiscard]] const std::string& text(std::size_t row, std::string_view col) const;
    /// Parses the cell as a double; empty cells read as NaN.
    [[nodiscard]] double number(std::size_t row, std::string_view col) const;
};

struct Document {
    int schema_version = 0;
    Metadata meta;
    std::vector<Table> tables;

    [[nodiscard]] const Table& table(std::string_view name) const;
    [[nodiscard]] bool has_table(std::string_view name) const noexcept;
    [[nodiscard]] std::string meta_value(std::string_view key) const;
};

/// Throws std::runtime_error on malformed input.
[[nodiscard]] Document read(std::istream& is, Format format);

}  // namespace trimap::report
