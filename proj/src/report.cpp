#include "trimap/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace trimap::report {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string cell_text(const Cell& cell) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(long long v) const { return std::to_string(v); }
        std::string operator()(double v) const { return format_double(v); }
        std::string operator()(const std::string& s) const { return s; }
    };
    return std::visit(Visitor{}, cell);
}

ordered_json cell_json(const Cell& cell) {
    struct Visitor {
        ordered_json operator()(std::monostate) const { return nullptr; }
        ordered_json operator()(bool b) const { return b; }
        ordered_json operator()(long long v) const { return v; }
        ordered_json operator()(double v) const {
            // JSON has no non-finite numbers
            if (!std::isfinite(v)) return format_double(v);
            return v;
        }
        ordered_json operator()(const std::string& s) const { return s; }
    };
    return std::visit(Visitor{}, cell);
}

std::string json_cell_text(const ordered_json& v) {
    if (v.is_null()) return {};
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    throw std::runtime_error("report: unsupported JSON cell type");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw std::runtime_error("report: unterminated quote in CSV line");
    out.push_back(std::move(cur));
    return out;
}

Document read_csv(std::istream& is) {
    Document doc;
    std::string line;
    Table* current = nullptr;
    bool expect_header = false;
    bool saw_version = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("## ", 0) == 0) {
            doc.tables.push_back(Table{line.substr(3), {}, {}});
            current = &doc.tables.back();
            expect_header = true;
            continue;
        }
        if (line.rfind("# ", 0) == 0) {
            if (current) throw std::runtime_error("report: metadata line after the first table");
            auto fields = split_csv_line(line.substr(2));
            if (fields.size() != 2) throw std::runtime_error("report: metadata line must have key,value");
            if (fields[0] == "schema_version") {
                doc.schema_version = std::stoi(fields[1]);
                saw_version = true;
            } else {
                doc.meta.emplace_back(std::move(fields[0]), std::move(fields[1]));
            }
            continue;
        }
        if (line.empty()) {
            current = nullptr;
            continue;
        }
        if (!current) throw std::runtime_error("report: row outside of a table");
        auto fields = split_csv_line(line);
        if (expect_header) {
            current->columns = std::move(fields);
            expect_header = false;
        } else {
            if (fields.size() != current->columns.size()) throw std::runtime_error("report: row width does not match header in table " + current->name);
            current->rows.push_back(std::move(fields));
        }
    }
    if (!saw_version) throw std::runtime_error("report: missing schema_version");
    return doc;
}

Document read_json(std::istream& is) {
    const ordered_json j = ordered_json::parse(is);
    Document doc;
    if (!j.contains("schema_version")) throw std::runtime_error("report: missing schema_version");
    doc.schema_version = j.at("schema_version").get<int>();
    for (const auto& [k, v] : j.at("meta").items()) doc.meta.emplace_back(k, v.get<std::string>());
    for (const auto& t : j.at("tables")) {
        Table table;
        table.name = t.at("name").get<std::string>();
        table.columns = t.at("columns").get<std::vector<std::string>>();
        for (const auto& r : t.at("rows")) {
            if (r.size() != table.columns.size()) throw std::runtime_error("report: row width does not match header in table " + table.name);
            std::vector<std::string> row;
            for (const auto& c : r) row.push_back(json_cell_text(c));
            table.rows.push_back(std::move(row));
        }
        doc.tables.push_back(std::move(table));
    }
    return doc;
}

}  // namespace

Format parse_format(std::string_view text) {
    if (text == "csv") return Format::Csv;
    if (text == "json") return Format::Json;
    throw std::invalid_argument("format must be csv or json, got '" + std::string(text) + "'");
}

std::string_view to_string(Format f) noexcept { return f == Format::Csv ? "csv" : "json"; }

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Writer::Writer(std::ostream& os, Format format, Metadata meta) : os_(os), format_(format) {
    if (format_ == Format::Csv) {
        os_ << "# schema_version," << kSchemaVersion << '\n';
        for (const auto& [k, v] : meta) os_ << "# " << csv_escape(k) << ',' << csv_escape(v) << '\n';
    } else {
        ordered_json m = ordered_json::object();
        for (const auto& [k, v] : meta) m[k] = v;
        os_ << "{\"schema_version\":" << kSchemaVersion << ",\"meta\":" << m.dump() << ",\"tables\":[";
    }
}

Writer::~Writer() {
    try {
        finish();
    } catch (...) {
    }
}

void Writer::begin_table(std::string name, std::vector<std::string> columns) {
    if (finished_) throw std::logic_error("report: writer already finished");
    if (in_table_) end_table();
    columns_ = columns.size();
    rows_ = 0;
    in_table_ = true;
    if (format_ == Format::Csv) {
        if (tables_ > 0) os_ << '\n';
        os_ << "## " << name << '\n';
        for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << csv_escape(columns[i]);
        os_ << '\n';
    } else {
        if (tables_ > 0) os_ << ',';
        os_ << "\n{\"name\":" << ordered_json(name).dump() << ",\"columns\":" << ordered_json(columns).dump()
            << ",\"rows\":[";
    }
    ++tables_;
}

void Writer::row(const std::vector<Cell>& cells) {
    if (!in_table_) throw std::logic_error("report: row written outside a table");
    if (cells.size() != columns_) throw std::invalid_argument("report: row width does not match the header");
    if (format_ == Format::Csv) {
        for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << csv_escape(cell_text(cells[i]));
        os_ << '\n';
    } else {
        ordered_json r = ordered_json::array();
        for (const auto& c : cells) r.push_back(cell_json(c));
        os_ << (rows_ ? ",\n" : "\n") << r.dump();
    }
    ++rows_;
}

void Writer::end_table() {
    if (!in_table_) return;
    if (format_ == Format::Json) os_ << "]}";
    in_table_ = false;
}

void Writer::finish() {
    if (finished_) return;
    end_table();
    if (format_ == Format::Json) os_ << "\n]}\n";
    os_.flush();
    finished_ = true;
}

std::size_t Table::column(std::string_view col) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == col) return i;
    }
    throw std::out_of_range("report: no column '" + std::string(col) + "' in table " + name);
}

const std::string& Table::text(std::size_t row, std::string_view col) const { return rows.at(row).at(column(col)); }

double Table::number(std::size_t row, std::string_view col) const {
    const std::string& s = text(row, col);
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw std::runtime_error("report: cell '" + s + "' is not a number");
    return v;
}

const Table& Document::table(std::string_view name) const {
    for (const auto& t : tables) {
        if (t.name == name) return t;
    }
    throw std::out_of_range("report: no table '" + std::string(name) + "'");
}

bool Document::has_table(std::string_view name) const noexcept {
    for (const auto& t : tables) {
        if (t.name == name) return true;
    }
    return false;
}

std::string Document::meta_value(std::string_view key) const {
    for (const auto& [k, v] : meta) {
        if (k == key) return v;
    }
    throw std::out_of_range("report: no metadata key '" + std::string(key) + "'");
}

Document read(std::istream& is, Format format) {
    try {
        return format == Format::Csv ? read_csv(is) : read_json(is);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("report: ") + e.what());
    }
}

}  // namespace trimap::report
