#pragma once

#include "aadt/error.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aadt {

using Date = std::chrono::year_month_day;

inline constexpr std::size_t kHoursPerDay = 24;

struct StationKey {
    int county = 1;
    int station = 1;

    friend auto operator<=>(const StationKey&, const StationKey&) = default;
};

inline std::string to_string(const StationKey& key)
{
    return std::to_string(key.county) + "_" + std::to_string(key.station);
}

struct FunctionalClass {
    int code = 0;

    friend auto operator<=>(const FunctionalClass&, const FunctionalClass&) = default;
};

/// Codes appearing in the header row of the stock expansion-factor file.
inline const std::vector<int>& default_class_codes()
{
    static const std::vector<int> codes{2, 3, 4, 5, 9, 12, 13, 14, 15, 18};
    return codes;
}

enum class ModelGroup { Interstate = 0, Arterial = 1, Collector = 2 };

inline constexpr std::array<ModelGroup, 3> kAllGroups{
    ModelGroup::Interstate, ModelGroup::Arterial, ModelGroup::Collector};

inline constexpr std::size_t group_index(ModelGroup g) noexcept
{
    return static_cast<std::size_t>(g);
}

inline constexpr std::string_view group_name(ModelGroup g) noexcept
{
    switch (g) {
    case ModelGroup::Interstate: return "Interstate";
    case ModelGroup::Arterial: return "Arterial";
    case ModelGroup::Collector: return "Collector";
    }
    return "?";
}

inline std::optional<ModelGroup> parse_group_name(std::string_view name)
{
    for (ModelGroup g : kAllGroups) {
        std::string_view n = group_name(g);
        if (name.size() != n.size()) continue;
        bool same = true;
        for (std::size_t i = 0; i < n.size(); ++i) {
            char a = name[i], b = n[i];
            if (a >= 'A' && a <= 'Z') a = static_cast<char>(a - 'A' + 'a');
            if (b >= 'A' && b <= 'Z') b = static_cast<char>(b - 'A' + 'a');
            if (a != b) { same = false; break; }
        }
        if (same) return g;
    }
    return std::nullopt;
}

/// Functional class -> model group. Lookups of codes without an entry throw.
class GroupMapping {
public:
    GroupMapping() = default;
    explicit GroupMapping(std::map<int, ModelGroup> entries) : entries_(std::move(entries)) {}

    /// 12 -> Interstate, 2 -> Arterial, 4 -> Collector; everything else must be configured.
    static GroupMapping defaults()
    {
        return GroupMapping({{12, ModelGroup::Interstate},
                             {2, ModelGroup::Arterial},
                             {4, ModelGroup::Collector}});
    }

    void set(FunctionalClass fc, ModelGroup g) { entries_[fc.code] = g; }
    bool contains(FunctionalClass fc) const { return entries_.count(fc.code) != 0; }
    const std::map<int, ModelGroup>& entries() const noexcept { return entries_; }

    friend bool operator==(const GroupMapping&, const GroupMapping&) = default;

private:
    std::map<int, ModelGroup> entries_;
};

inline ModelGroup map_class_to_group(FunctionalClass fc, const GroupMapping& mapping)
{
    auto it = mapping.entries().find(fc.code);
    if (it == mapping.entries().end())
        throw Error(Errc::UnmappedClass, "functional class " + std::to_string(fc.code) +
                                             " has no model group; add it to the mapping file");
    return it->second;
}

struct DailyCount {
    Date date{};
    std::array<std::int64_t, kHoursPerDay> volumes{};

    friend bool operator==(const DailyCount&, const DailyCount&) = default;
};

struct ShortTermRecord {
    StationKey key;
    Date date{};
    FunctionalClass fclass;
    double growth_factor = 1.0;
    std::array<double, kHoursPerDay> volumes{};

    friend bool operator==(const ShortTermRecord&, const ShortTermRecord&) = default;
};

/// 0 = Monday ... 6 = Sunday.
inline int day_of_week(Date date)
{
    std::chrono::weekday wd{std::chrono::sys_days{date}};
    return static_cast<int>(wd.iso_encoding()) - 1;
}

inline unsigned month_of(Date date) { return static_cast<unsigned>(date.month()); }

inline std::int64_t total_volume(const DailyCount& day)
{
    return std::accumulate(day.volumes.begin(), day.volumes.end(), std::int64_t{0});
}

inline double total_volume(const ShortTermRecord& rec)
{
    return std::accumulate(rec.volumes.begin(), rec.volumes.end(), 0.0);
}

/// Parses "M/D/YYYY" (leading zeros optional). Returns nullopt on anything else,
/// including dates that do not exist in the Gregorian calendar.
inline std::optional<Date> parse_date(std::string_view text)
{
    int parts[3] = {0, 0, 0};
    std::size_t pos = 0;
    for (int p = 0; p < 3; ++p) {
        std::size_t end = p < 2 ? text.find('/', pos) : text.size();
        if (end == std::string_view::npos || end == pos) return std::nullopt;
        std::string_view field = text.substr(pos, end - pos);
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), parts[p]);
        if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
        if (p == 2 && field.size() != 4) return std::nullopt;
        pos = end + 1;
    }
    Date date{std::chrono::year{parts[2]}, std::chrono::month{static_cast<unsigned>(parts[0])},
              std::chrono::day{static_cast<unsigned>(parts[1])}};
    if (parts[0] < 1 || parts[1] < 1 || !date.ok()) return std::nullopt;
    return date;
}

/// Inverse of parse_date, without zero padding ("10/19/2016", "11/7/2017").
inline std::string format_date(Date date)
{
    return std::to_string(static_cast<unsigned>(date.month())) + "/" +
           std::to_string(static_cast<unsigned>(date.day())) + "/" +
           std::to_string(static_cast<int>(date.year()));
}

} // namespace aadt
