// csv.hpp - RFC-4180 CSV assembly with shortest round-trip number formatting.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <stdexcept>
#include <string_view>
#include <system_error>
#include <vector>

namespace mazerlab::io {

// Shortest decimal string that parses back to exactly `x`, '.' decimal
// point, independent of the locale.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string format_int(long long x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

// Quotes a field when it contains a comma, quote, CR or LF; inner quotes
// are doubled.
inline std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Builds a CSV document in memory. Rows end with CRLF.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : columns_(header.size()) { append(header); }

    class Row {
    public:
        Row& operator<<(double x) { return push(format_double(x)); }
        Row& operator<<(int x) { return push(format_int(x)); }
        Row& operator<<(long long x) { return push(format_int(x)); }
        Row& operator<<(std::size_t x) { return push(format_int(static_cast<long long>(x))); }
        Row& operator<<(bool x) { return push(x ? "true" : "false"); }
        Row& operator<<(std::string_view s) { return push(std::string(s)); }
        Row& operator<<(const char* s) { return push(s); }

    private:
        friend class CsvTable;
        Row& push(std::string s) {
            cells_.push_back(std::move(s));
            return *this;
        }
        std::vector<std::string> cells_;
    };

    void add(const Row& row) {
        if (row.cells_.size() != columns_)
            throw std::logic_error("csv row has " + std::to_string(row.cells_.size()) + " cells, expected " +
                                   std::to_string(columns_));
        append(row.cells_);
        ++rows_;
    }

    std::size_t rows() const noexcept { return rows_; }
    const std::string& text() const noexcept { return text_; }

private:
    void append(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += csv_escape(cells[i]);
        }
        text_ += "\r\n";
    }

    std::size_t columns_;
    std::size_t rows_ = 0;
    std::string text_;
};

// Splits one CSV document into rows of unquoted fields.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, pending = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            pending = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            pending = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            pending = false;
        } else {
            field += c;
            pending = true;
        }
    }
    if (pending || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace mazerlab::io
