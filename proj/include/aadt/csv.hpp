#pragma once

// Minimal CSV handling for the tool's file formats: comma separated, no quoting,
// LF on write, CRLF tolerated on read.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace aadt::csv {

struct Row {
    std::size_t line = 0; // 1-based line number in the source document
    std::vector<std::string_view> cells;
};

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

inline bool is_blank_row(const std::vector<std::string_view>& cells)
{
    for (auto c : cells)
        if (!trim(c).empty()) return false;
    return true;
}

/// Splits a document into rows of trimmed cells. Lines that are empty or only
/// commas are dropped (spreadsheet exports pad with them); trailing empty cells
/// are kept so callers can decide what a missing column means.
inline std::vector<Row> read_rows(std::string_view text)
{
    std::vector<Row> rows;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3); // UTF-8 BOM from spreadsheet exports
    std::size_t pos = 0;
    std::size_t line = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(pos, end - pos);
        ++line;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

        Row row;
        row.line = line;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = raw.find(',', start);
            if (comma == std::string_view::npos) {
                row.cells.push_back(trim(raw.substr(start)));
                break;
            }
            row.cells.push_back(trim(raw.substr(start, comma - start)));
            start = comma + 1;
        }
        if (!is_blank_row(row.cells)) rows.push_back(std::move(row));
        if (end == text.size()) break;
        pos = end + 1;
    }
    return rows;
}

inline std::optional<double> parse_double(std::string_view s)
{
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s)
{
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

/// Spreadsheet column letter for a 1-based column index (1 -> A, 27 -> AA).
inline std::string column_name(std::size_t col)
{
    std::string name;
    while (col > 0) {
        --col;
        name.insert(name.begin(), static_cast<char>('A' + col % 26));
        col /= 26;
    }
    return name;
}

inline std::string cell_ref(std::size_t line, std::size_t col)
{
    return "row " + std::to_string(line) + ", column " + column_name(col);
}

} // namespace aadt::csv
