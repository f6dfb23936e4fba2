#pragma once

// Readers and writers for the tool's CSV formats:
//   short-term counts   County,Station,Date,FClass,GF,Hour1..Hour24
//   expansion factors   14 rows: class codes, axle factors, Jan..Dec seasonal factors
//   hyperparameters     C,Gamma then Interstate, Arterial, Collector rows
//   ATR list            County,Station,FClass
//   ATR hourly files    <county>_<station>.csv with Date,Hour1..Hour24
//   group mapping       FClass,Group
//   output              Output_MM.DD.YYYY_HH.MM.CSV

#include "aadt/csv.hpp"
#include "aadt/domain.hpp"
#include "aadt/error.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace aadt {

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

namespace detail {

inline bool looks_numeric(std::string_view cell)
{
    return csv::parse_double(cell).has_value();
}

inline std::string_view cell_or_empty(const csv::Row& row, std::size_t col)
{
    return col < row.cells.size() ? row.cells[col] : std::string_view{};
}

inline int require_positive_int(const csv::Row& row, std::size_t col, Errc code, std::string_view what)
{
    auto v = csv::parse_int(cell_or_empty(row, col));
    if (!v || *v < 1 || *v > 1'000'000'000)
        throw Error(code, csv::cell_ref(row.line, col + 1) + ": bad " + std::string(what) + " '" +
                              std::string(cell_or_empty(row, col)) + "'");
    return static_cast<int>(*v);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Short-term counts

inline std::vector<ShortTermRecord> parse_short_term_counts(std::string_view text)
{
    auto rows = csv::read_rows(text);
    if (rows.empty()) return {}; // an empty file is an empty batch
    if (detail::looks_numeric(rows.front().cells.front()))
        throw Error(Errc::MissingHeader, "short-term count file must start with a heading row");

    std::vector<ShortTermRecord> out;
    out.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        ShortTermRecord rec;
        rec.key.county = detail::require_positive_int(row, 0, Errc::NonNumericCell, "county");
        rec.key.station = detail::require_positive_int(row, 1, Errc::NonNumericCell, "station");

        auto date = parse_date(detail::cell_or_empty(row, 2));
        if (!date)
            throw Error(Errc::BadDate, csv::cell_ref(row.line, 3) + ": expected M/D/YYYY, got '" +
                                           std::string(detail::cell_or_empty(row, 2)) + "'");
        rec.date = *date;
        rec.fclass.code = detail::require_positive_int(row, 3, Errc::BadClassCode, "functional class");

        auto gf_cell = detail::cell_or_empty(row, 4);
        auto gf = csv::parse_double(gf_cell);
        if (gf_cell.empty() || (gf && *gf == 0.0))
            throw Error(Errc::MissingGrowthFactor,
                        csv::cell_ref(row.line, 5) +
                            ": a blank growth factor is read as 0; enter 1 for counts that are up to date");
        if (!gf || *gf < 0.0)
            throw Error(Errc::MissingGrowthFactor, csv::cell_ref(row.line, 5) + ": growth factor must be a positive number, got '" +
                                                       std::string(gf_cell) + "'");
        rec.growth_factor = *gf;

        for (std::size_t h = 0; h < kHoursPerDay; ++h) {
            const std::size_t col = 5 + h;
            auto v = csv::parse_int(detail::cell_or_empty(row, col));
            if (!v || *v < 0)
                throw Error(Errc::NonNumericVolume,
                            csv::cell_ref(row.line, col + 1) + ": Hour" + std::to_string(h + 1) +
                                " must be a non-negative integer, got '" +
                                std::string(detail::cell_or_empty(row, col)) + "'");
            rec.volumes[h] = static_cast<double>(*v);
        }
        out.push_back(rec);
    }
    return out;
}

inline std::string write_short_term_counts(const std::vector<ShortTermRecord>& records)
{
    std::string s = "County,Station,Date,FClass,GF";
    for (std::size_t h = 1; h <= kHoursPerDay; ++h) s += ",Hour" + std::to_string(h);
    s += '\n';
    for (const auto& r : records) {
        s += std::to_string(r.key.county) + "," + std::to_string(r.key.station) + "," +
             format_date(r.date) + "," + std::to_string(r.fclass.code) + "," +
             csv::format_double(r.growth_factor);
        for (double v : r.volumes) s += "," + csv::format_double(v);
        s += '\n';
    }
    return s;
}

// ---------------------------------------------------------------------------
// Expansion factors

struct ExpansionFactorTable {
    std::vector<int> classes; // header order
    std::map<int, double> axle;
    std::map<int, std::array<double, 12>> seasonal; // index 0 = January

    double axle_factor(FunctionalClass fc) const
    {
        auto it = axle.find(fc.code);
        return it == axle.end() ? 0.0 : it->second;
    }

    double seasonal_factor(FunctionalClass fc, unsigned month) const
    {
        auto it = seasonal.find(fc.code);
        if (it == seasonal.end() || month < 1 || month > 12) return 0.0;
        return it->second[month - 1];
    }

    friend bool operator==(const ExpansionFactorTable&, const ExpansionFactorTable&) = default;
};

inline ExpansionFactorTable parse_expansion_factors(std::string_view text)
{
    auto rows = csv::read_rows(text);
    if (rows.size() != 14)
        throw Error(Errc::WrongRowCount, "expansion factor file needs 14 rows (classes, axle, 12 months), found " +
                                             std::to_string(rows.size()));

    ExpansionFactorTable table;
    const auto& header = rows[0];
    std::vector<std::size_t> columns;
    for (std::size_t c = 1; c < header.cells.size(); ++c) {
        if (header.cells[c].empty()) continue;
        auto code = csv::parse_int(header.cells[c]);
        if (!code || *code < 1)
            throw Error(Errc::NonNumericCell, csv::cell_ref(header.line, c + 1) + ": class code '" +
                                                  std::string(header.cells[c]) + "'");
        if (table.axle.count(static_cast<int>(*code)))
            throw Error(Errc::BadClassCode, csv::cell_ref(header.line, c + 1) + ": class " +
                                                std::to_string(*code) + " listed twice");
        table.classes.push_back(static_cast<int>(*code));
        table.axle[static_cast<int>(*code)] = 0.0;
        table.seasonal[static_cast<int>(*code)] = {};
        columns.push_back(c);
    }

    auto cell_value = [](const csv::Row& row, std::size_t col) {
        auto cell = detail::cell_or_empty(row, col);
        if (cell.empty()) return 0.0; // blank cells read as 0
        auto v = csv::parse_double(cell);
        if (!v) throw Error(Errc::NonNumericCell, csv::cell_ref(row.line, col + 1) + ": '" + std::string(cell) + "'");
        return *v;
    };

    for (std::size_t i = 0; i < columns.size(); ++i) {
        const int code = table.classes[i];
        table.axle[code] = cell_value(rows[1], columns[i]);
        for (std::size_t m = 0; m < 12; ++m) table.seasonal[code][m] = cell_value(rows[2 + m], columns[i]);
    }
    return table;
}

inline std::string write_expansion_factors(const ExpansionFactorTable& table)
{
    std::string s = "FC";
    for (int c : table.classes) s += "," + std::to_string(c);
    s += "\nAxle_f";
    for (int c : table.classes) s += "," + csv::format_double(table.axle.at(c));
    s += '\n';
    for (std::size_t m = 0; m < 12; ++m) {
        s += m == 0 ? "Seasonal_f" : "";
        for (int c : table.classes) s += "," + csv::format_double(table.seasonal.at(c)[m]);
        s += '\n';
    }
    return s;
}

// ---------------------------------------------------------------------------
// SVR hyperparameters

struct GroupHyperparams {
    double c = 1.0;
    double gamma = 1.0;

    friend bool operator==(const GroupHyperparams&, const GroupHyperparams&) = default;
};

/// Indexed by group_index(): Interstate, Arterial, Collector.
struct HyperparamTable {
    std::array<GroupHyperparams, 3> rows{};

    GroupHyperparams& operator[](ModelGroup g) { return rows[group_index(g)]; }
    const GroupHyperparams& operator[](ModelGroup g) const { return rows[group_index(g)]; }

    friend bool operator==(const HyperparamTable&, const HyperparamTable&) = default;
};

inline HyperparamTable parse_hyperparams(std::string_view text)
{
    auto rows = csv::read_rows(text);
    if (rows.empty() || detail::looks_numeric(rows.front().cells.front()))
        throw Error(Errc::MissingHeader, "parameter file must start with the heading row C,Gamma");
    if (rows.size() != 4)
        throw Error(Errc::WrongRowCount, "parameter file needs exactly 3 rows (Interstate, Arterial, Collector), found " +
                                             std::to_string(rows.size() - 1));
    HyperparamTable table;
    for (std::size_t g = 0; g < 3; ++g) {
        const auto& row = rows[g + 1];
        double vals[2];
        for (std::size_t col = 0; col < 2; ++col) {
            auto v = csv::parse_double(detail::cell_or_empty(row, col));
            if (!v)
                throw Error(Errc::NonNumericCell, csv::cell_ref(row.line, col + 1) + ": '" +
                                                      std::string(detail::cell_or_empty(row, col)) + "'");
            if (*v <= 0.0)
                throw Error(Errc::NonPositiveParam, csv::cell_ref(row.line, col + 1) + ": " +
                                                        (col == 0 ? "C" : "Gamma") + " must be > 0");
            vals[col] = *v;
        }
        table.rows[g] = {vals[0], vals[1]};
    }
    return table;
}

inline std::string write_hyperparams(const HyperparamTable& table)
{
    std::string s = "C,Gamma\n";
    for (const auto& row : table.rows)
        s += csv::format_double(row.c) + "," + csv::format_double(row.gamma) + "\n";
    return s;
}

// ---------------------------------------------------------------------------
// ATR station list and class mapping

struct AtrStationMeta {
    StationKey key;
    FunctionalClass fclass;

    friend bool operator==(const AtrStationMeta&, const AtrStationMeta&) = default;
};

inline std::vector<AtrStationMeta> parse_atr_list(std::string_view text)
{
    auto rows = csv::read_rows(text);
    if (rows.empty()) return {};
    std::size_t first = detail::looks_numeric(rows.front().cells.front()) ? 0 : 1;

    std::vector<AtrStationMeta> out;
    std::set<StationKey> seen;
    for (std::size_t r = first; r < rows.size(); ++r) {
        const auto& row = rows[r];
        AtrStationMeta meta;
        meta.key.county = detail::require_positive_int(row, 0, Errc::NonNumericCell, "county");
        meta.key.station = detail::require_positive_int(row, 1, Errc::NonNumericCell, "station");
        meta.fclass.code = detail::require_positive_int(row, 2, Errc::BadClassCode, "functional class");
        if (!seen.insert(meta.key).second)
            throw Error(Errc::DuplicateStation, "row " + std::to_string(row.line) + ": station " +
                                                    to_string(meta.key) + " listed twice");
        out.push_back(meta);
    }
    return out;
}

inline std::string write_atr_list(const std::vector<AtrStationMeta>& stations)
{
    std::string s = "County,Station,FClass\n";
    for (const auto& m : stations)
        s += std::to_string(m.key.county) + "," + std::to_string(m.key.station) + "," +
             std::to_string(m.fclass.code) + "\n";
    return s;
}

/// "FClass,Group" rows, e.g. "3,Arterial". Entries extend the default mapping.
inline GroupMapping parse_group_mapping(std::string_view text, GroupMapping base = GroupMapping::defaults())
{
    auto rows = csv::read_rows(text);
    std::size_t first = (!rows.empty() && !detail::looks_numeric(rows.front().cells.front())) ? 1 : 0;
    for (std::size_t r = first; r < rows.size(); ++r) {
        const auto& row = rows[r];
        int code = detail::require_positive_int(row, 0, Errc::BadClassCode, "functional class");
        auto group = parse_group_name(detail::cell_or_empty(row, 1));
        if (!group)
            throw Error(Errc::BadConfig, csv::cell_ref(row.line, 2) + ": unknown model group '" +
                                             std::string(detail::cell_or_empty(row, 1)) +
                                             "' (expected Interstate, Arterial or Collector)");
        base.set(FunctionalClass{code}, *group);
    }
    return base;
}

// ---------------------------------------------------------------------------
// ATR hourly data

struct AtrYearData {
    StationKey station;
    int year = 0;
    std::vector<DailyCount> days;

    friend bool operator==(const AtrYearData&, const AtrYearData&) = default;
};

inline std::filesystem::path atr_file_name(const StationKey& key)
{
    return std::to_string(key.county) + "_" + std::to_string(key.station) + ".csv";
}

inline std::string write_atr_file(const std::vector<DailyCount>& days)
{
    std::string s = "Date";
    for (std::size_t h = 1; h <= kHoursPerDay; ++h) s += ",Hour" + std::to_string(h);
    s += '\n';
    for (const auto& d : days) {
        s += format_date(d.date);
        for (auto v : d.volumes) s += "," + std::to_string(v);
        s += '\n';
    }
    return s;
}

struct AtrFileParse {
    std::vector<DailyCount> days;
    std::size_t incomplete_days = 0;
    std::size_t out_of_year_days = 0;
    std::size_t duplicate_days = 0;
};

/// Parses one station file keeping only complete days of `year`, in file order.
/// Throws BadDate on an unreadable date.
inline AtrFileParse parse_atr_file(std::string_view text, int year, std::string_view source = "ATR file")
{
    auto rows = csv::read_rows(text);
    AtrFileParse out;
    if (rows.empty()) return out;
    std::size_t first = parse_date(rows.front().cells.front()) ? 0 : 1;
    std::set<int> seen;
    for (std::size_t r = first; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto date = parse_date(row.cells.front());
        if (!date)
            throw Error(Errc::BadDate, std::string(source) + " " + csv::cell_ref(row.line, 1) + ": '" +
                                           std::string(row.cells.front()) + "'");
        if (static_cast<int>(date->year()) != year) {
            ++out.out_of_year_days;
            continue;
        }
        DailyCount day{*date, {}};
        bool complete = true;
        for (std::size_t h = 0; h < kHoursPerDay && complete; ++h) {
            auto v = csv::parse_int(detail::cell_or_empty(row, h + 1));
            if (!v || *v < 0) complete = false;
            else day.volumes[h] = *v;
        }
        if (!complete) {
            ++out.incomplete_days;
            continue;
        }
        int serial = std::chrono::sys_days{*date}.time_since_epoch().count();
        if (!seen.insert(serial).second) {
            ++out.duplicate_days;
            continue;
        }
        out.days.push_back(day);
    }
    return out;
}

struct AtrLoadResult {
    std::vector<AtrYearData> stations;
    std::vector<std::string> warnings;
    std::size_t dropped_days = 0;
};

inline AtrLoadResult load_atr_year(const std::filesystem::path& dir, const std::vector<AtrStationMeta>& stations,
                                   int year)
{
    AtrLoadResult out;
    for (const auto& meta : stations) {
        const auto path = dir / atr_file_name(meta.key);
        if (!std::filesystem::is_regular_file(path)) {
            out.warnings.push_back(std::string(errc_name(Errc::MissingStationFile)) + ": station " +
                                   to_string(meta.key) + " has no file " + path.string());
            continue;
        }
        auto parsed = parse_atr_file(read_text_file(path), year, path.string());
        std::size_t dropped = parsed.incomplete_days + parsed.out_of_year_days + parsed.duplicate_days;
        out.dropped_days += dropped;
        if (dropped > 0)
            out.warnings.push_back("station " + to_string(meta.key) + ": dropped " + std::to_string(dropped) +
                                   " day(s) (" + std::to_string(parsed.incomplete_days) + " incomplete, " +
                                   std::to_string(parsed.out_of_year_days) + " outside " + std::to_string(year) +
                                   ", " + std::to_string(parsed.duplicate_days) + " duplicate)");
        if (parsed.days.empty()) {
            out.warnings.push_back("station " + to_string(meta.key) + " has no complete days in " +
                                   std::to_string(year) + "; excluded");
            continue;
        }
        out.stations.push_back(AtrYearData{meta.key, year, std::move(parsed.days)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output

struct EstimateRecord {
    StationKey key;
    FunctionalClass fclass;
    std::int64_t aadt_svr = 0;
    std::int64_t aadt_factor = 0;

    friend bool operator==(const EstimateRecord&, const EstimateRecord&) = default;
};

struct Timestamp {
    Date date{};
    int hour = 0;
    int minute = 0;

    static Timestamp now()
    {
        auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        localtime_r(&t, &tm);
        return Timestamp{Date{std::chrono::year{tm.tm_year + 1900}, std::chrono::month{static_cast<unsigned>(tm.tm_mon + 1)},
                              std::chrono::day{static_cast<unsigned>(tm.tm_mday)}},
                         tm.tm_hour, tm.tm_min};
    }
};

inline constexpr std::string_view kOutputHeader = "County,Station,Functional_Class,AADT-SVR,AADT-Factor";

inline std::string output_file_name(const Timestamp& ts)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "Output_%02u.%02u.%04d_%02d.%02d.CSV", static_cast<unsigned>(ts.date.month()),
                  static_cast<unsigned>(ts.date.day()), static_cast<int>(ts.date.year()), ts.hour, ts.minute);
    return buf;
}

inline std::string format_output(const std::vector<EstimateRecord>& records)
{
    std::string s(kOutputHeader);
    s += '\n';
    std::set<StationKey> seen;
    for (const auto& r : records) {
        if (!seen.insert(r.key).second)
            throw Error(Errc::DuplicateStation, "station " + to_string(r.key) + " appears twice; aggregate first");
        s += std::to_string(r.key.county) + "," + std::to_string(r.key.station) + "," + std::to_string(r.fclass.code) +
             "," + std::to_string(r.aadt_svr) + "," + std::to_string(r.aadt_factor) + "\n";
    }
    return s;
}

inline std::filesystem::path write_output(const std::vector<EstimateRecord>& records, const Timestamp& ts,
                                          const std::filesystem::path& dir)
{
    auto path = dir / output_file_name(ts);
    write_text_file(path, format_output(records));
    return path;
}

/// Reads an output-format file. Repeated stations are allowed so that
/// per-count evaluation files can share the format.
inline std::vector<EstimateRecord> parse_output(std::string_view text)
{
    auto rows = csv::read_rows(text);
    if (rows.empty() || detail::looks_numeric(rows.front().cells.front()))
        throw Error(Errc::MissingHeader, "estimate file must start with the heading row " + std::string(kOutputHeader));
    std::vector<EstimateRecord> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        EstimateRecord rec;
        rec.key.county = detail::require_positive_int(row, 0, Errc::NonNumericCell, "county");
        rec.key.station = detail::require_positive_int(row, 1, Errc::NonNumericCell, "station");
        rec.fclass.code = detail::require_positive_int(row, 2, Errc::BadClassCode, "functional class");
        for (std::size_t col = 3; col < 5; ++col) {
            auto v = csv::parse_double(detail::cell_or_empty(row, col));
            if (!v || *v < 0)
                throw Error(Errc::NonNumericCell, csv::cell_ref(row.line, col + 1) + ": '" +
                                                      std::string(detail::cell_or_empty(row, col)) + "'");
            (col == 3 ? rec.aadt_svr : rec.aadt_factor) = static_cast<std::int64_t>(std::llround(*v));
        }
        out.push_back(rec);
    }
    return out;
}

/// "County,Station,AADT" ground-truth file used by the evaluation workflow.
inline std::map<StationKey, double> parse_truth(std::string_view text)
{
    auto rows = csv::read_rows(text);
    std::map<StationKey, double> out;
    if (rows.empty()) return out;
    std::size_t first = detail::looks_numeric(rows.front().cells.front()) ? 0 : 1;
    for (std::size_t r = first; r < rows.size(); ++r) {
        const auto& row = rows[r];
        StationKey key{detail::require_positive_int(row, 0, Errc::NonNumericCell, "county"),
                       detail::require_positive_int(row, 1, Errc::NonNumericCell, "station")};
        auto v = csv::parse_double(detail::cell_or_empty(row, 2));
        if (!v) throw Error(Errc::NonNumericCell, csv::cell_ref(row.line, 3) + ": AADT");
        if (!out.emplace(key, *v).second)
            throw Error(Errc::DuplicateStation, "row " + std::to_string(row.line) + ": station " + to_string(key));
    }
    return out;
}

inline std::string write_truth(const std::map<StationKey, double>& truth)
{
    std::string s = "County,Station,AADT\n";
    for (const auto& [key, aadt] : truth)
        s += std::to_string(key.county) + "," + std::to_string(key.station) + "," + csv::format_double(aadt) + "\n";
    return s;
}

} // namespace aadt
