#pragma once

// MAPE scoring, per-group comparison reports, and a seeded generator of
// synthetic ATR years with known ground truth.

#include "aadt/domain.hpp"
#include "aadt/error.hpp"
#include "aadt/estimators.hpp"
#include "aadt/ingest.hpp"
#include "aadt/tuning.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace aadt::eval {

inline double ape(double actual, double estimate)
{
    if (!(actual > 0.0)) throw Error(Errc::NonPositiveActual, "actual AADT must be > 0, got " + csv::format_double(actual));
    return 100.0 * std::abs(estimate - actual) / actual;
}

/// Mean absolute percentage error, in percent.
inline double mape(const std::vector<std::pair<double, double>>& actual_estimate)
{
    if (actual_estimate.empty()) throw Error(Errc::EmptyInput, "MAPE of an empty list");
    double sum = 0.0;
    for (const auto& [actual, estimate] : actual_estimate) sum += ape(actual, estimate);
    return sum / static_cast<double>(actual_estimate.size());
}

struct EvalRow {
    StationKey key;
    ModelGroup group = ModelGroup::Interstate;
    double actual = 0.0;
    double est_factor = 0.0;
    double est_svr = 0.0;
    double ape_factor = 0.0;
    double ape_svr = 0.0;
};

inline EvalRow make_eval_row(StationKey key, ModelGroup group, double actual, double est_factor, double est_svr)
{
    return EvalRow{key, group, actual, est_factor, est_svr, ape(actual, est_factor), ape(actual, est_svr)};
}

struct GroupSummary {
    std::string label; // group name or "All"
    std::size_t n = 0;
    double mape_factor = 0.0;
    double mape_svr = 0.0;
};

/// Per-group means (groups in Interstate, Arterial, Collector order, only those
/// present) followed by an "All" row. With `round_per_row` each APE is rounded
/// to a whole percent before averaging, which is how percentages are usually
/// tabulated for display.
inline std::vector<GroupSummary> summarize(const std::vector<EvalRow>& rows, bool round_per_row = false)
{
    if (rows.empty()) throw Error(Errc::EmptyInput, "nothing to summarize");
    auto value = [round_per_row](double a) { return round_per_row ? std::round(a) : a; };

    std::array<GroupSummary, 3> groups;
    GroupSummary all{"All", 0, 0.0, 0.0};
    for (const auto& r : rows) {
        auto& g = groups[group_index(r.group)];
        g.n++;
        g.mape_factor += value(r.ape_factor);
        g.mape_svr += value(r.ape_svr);
        all.n++;
        all.mape_factor += value(r.ape_factor);
        all.mape_svr += value(r.ape_svr);
    }
    std::vector<GroupSummary> out;
    for (ModelGroup grp : kAllGroups) {
        auto g = groups[group_index(grp)];
        if (g.n == 0) continue;
        g.label = std::string(group_name(grp));
        g.mape_factor /= static_cast<double>(g.n);
        g.mape_svr /= static_cast<double>(g.n);
        out.push_back(g);
    }
    all.mape_factor /= static_cast<double>(all.n);
    all.mape_svr /= static_cast<double>(all.n);
    out.push_back(all);
    return out;
}

inline std::string format_report(const std::vector<GroupSummary>& summary)
{
    std::string s = "Group,N,MAPE-Factor,MAPE-SVR\n";
    char buf[128];
    for (const auto& g : summary) {
        std::snprintf(buf, sizeof buf, "%s,%zu,%.2f,%.2f\n", g.label.c_str(), g.n, g.mape_factor, g.mape_svr);
        s += buf;
    }
    return s;
}

/// Joins estimates with ground truth. Every estimated station must have a truth value.
inline std::vector<EvalRow> join_with_truth(const std::vector<EstimateRecord>& estimates,
                                            const std::map<StationKey, double>& truth, const GroupMapping& mapping)
{
    std::vector<EvalRow> rows;
    for (const auto& e : estimates) {
        auto it = truth.find(e.key);
        if (it == truth.end())
            throw Error(Errc::UnknownStation, "station " + to_string(e.key) + " has no ground-truth AADT");
        rows.push_back(make_eval_row(e.key, map_class_to_group(e.fclass, mapping), it->second,
                                     static_cast<double>(e.aadt_factor), static_cast<double>(e.aadt_svr)));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Synthetic data

/// Class codes used for synthetic stations; they match GroupMapping::defaults().
inline constexpr std::array<int, 3> kSynthClassCodes{12, 2, 4};

struct AadtRange {
    double low = 1000.0;
    double high = 10000.0;
};

struct SynthConfig {
    std::array<std::size_t, 3> stations_per_group{10, 10, 10};
    std::array<AadtRange, 3> aadt_range{{{20000.0, 60000.0}, {5000.0, 15000.0}, {1500.0, 4500.0}}};
    double seasonal_amplitude = 0.1;
    double weekday_amplitude = 0.1;
    /// Shape of the 24-hour distribution per group; normalized internally. Empty = built-in shapes.
    std::array<std::vector<double>, 3> hourly_profile{};
    double noise_sigma = 0.05;
    int year = 2017;
    int county = 1;
    std::size_t short_term_counts = 25;
    std::uint64_t seed = 1;

    void validate() const
    {
        if (seasonal_amplitude < 0.0 || seasonal_amplitude >= 1.0 || weekday_amplitude < 0.0 || weekday_amplitude >= 1.0)
            throw Error(Errc::BadConfig, "amplitudes must lie in [0, 1)");
        if (noise_sigma < 0.0) throw Error(Errc::BadConfig, "noise sigma must be >= 0");
        for (const auto& r : aadt_range)
            if (!(r.low > 0.0) || r.high < r.low) throw Error(Errc::BadConfig, "AADT range must satisfy 0 < low <= high");
        for (const auto& p : hourly_profile) {
            if (p.empty()) continue;
            if (p.size() != kHoursPerDay) throw Error(Errc::BadConfig, "hourly profile needs 24 values");
            double sum = 0.0;
            for (double v : p) {
                if (v < 0.0) throw Error(Errc::BadConfig, "hourly profile values must be >= 0");
                sum += v;
            }
            if (!(sum > 0.0)) throw Error(Errc::BadConfig, "hourly profile must not be all zero");
        }
        std::size_t stations = 0;
        for (std::size_t g = 0; g < 3; ++g) {
            stations += stations_per_group[g];
            if (short_term_counts > 0 && stations_per_group[g] == 0)
                throw Error(Errc::BadConfig, "short-term counts are drawn round-robin from every group");
        }
        if (stations == 0 && short_term_counts > 0) throw Error(Errc::BadConfig, "no stations to sample counts from");
        if (year < 1900 || year > 2200) throw Error(Errc::BadConfig, "year out of range");
    }
};

struct SynthDataset {
    std::vector<AtrStationMeta> meta;
    std::vector<AtrYearData> atr;               // held-out days removed
    std::vector<ShortTermRecord> short_term;    // GF = 1
    std::map<StationKey, double> truth;         // mean daily total over the full generated year
    ExpansionFactorTable true_factors;          // each class gets its own group's factors
    ExpansionFactorTable misgrouped_factors;    // each class gets the next group's factors
    GroupMapping mapping = GroupMapping::defaults();
};

namespace detail {

inline std::array<double, kHoursPerDay> builtin_profile(ModelGroup g)
{
    std::array<double, kHoursPerDay> p{};
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        const double x = static_cast<double>(h);
        auto bump = [x](double centre, double width) { return std::exp(-0.5 * (x - centre) * (x - centre) / (width * width)); };
        switch (g) {
        case ModelGroup::Interstate: p[h] = 0.25 + 0.8 * bump(8, 2.5) + 1.0 * bump(16.5, 3.5); break;
        case ModelGroup::Arterial: p[h] = 0.08 + 1.0 * bump(7.5, 1.5) + 0.6 * bump(12.5, 2) + 1.1 * bump(17, 1.8); break;
        case ModelGroup::Collector: p[h] = 0.04 + 1.1 * bump(7, 1.2) + 0.4 * bump(12, 2) + 1.0 * bump(16, 1.5); break;
        }
    }
    return p;
}

inline std::array<double, kHoursPerDay> normalized_profile(const SynthConfig& cfg, ModelGroup g)
{
    std::array<double, kHoursPerDay> p{};
    const auto& custom = cfg.hourly_profile[group_index(g)];
    if (custom.empty()) p = builtin_profile(g);
    else std::copy(custom.begin(), custom.end(), p.begin());
    double sum = 0.0;
    for (double v : p) sum += v;
    for (double& v : p) v /= sum;
    return p;
}

/// Splits an integer total across hours by largest remainder so the hours sum to it exactly.
inline std::array<std::int64_t, kHoursPerDay> apportion(std::int64_t total, const std::array<double, kHoursPerDay>& share)
{
    std::array<std::int64_t, kHoursPerDay> out{};
    std::array<std::pair<double, std::size_t>, kHoursPerDay> rem{};
    std::int64_t assigned = 0;
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        const double exact = static_cast<double>(total) * share[h];
        out[h] = static_cast<std::int64_t>(std::floor(exact));
        assigned += out[h];
        rem[h] = {exact - static_cast<double>(out[h]), h};
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < total && k < kHoursPerDay; ++k, ++assigned) ++out[rem[k].second];
    return out;
}

inline double standard_normal(tuning::SplitMix64& rng)
{
    double u1 = rng.uniform();
    while (u1 <= 0.0) u1 = rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace detail

/// Calendar multipliers for one group: seasonal by month and weekday by day of
/// week, both sinusoids, scaled so their product averages exactly 1 over the
/// days of `year`.
struct CalendarCurves {
    std::array<double, 12> seasonal{};
    std::array<double, 7> weekday{};

    double multiplier(Date d) const { return seasonal[month_of(d) - 1] * weekday[static_cast<std::size_t>(day_of_week(d))]; }
};

inline std::vector<Date> days_of_year(int year)
{
    std::vector<Date> out;
    using namespace std::chrono;
    for (sys_days d = sys_days{std::chrono::year{year} / January / 1}; d <= sys_days{std::chrono::year{year} / December / 31};
         d += days{1})
        out.emplace_back(d);
    return out;
}

inline CalendarCurves calendar_curves(const SynthConfig& cfg, ModelGroup g)
{
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(group_index(g)) / 3.0;
    CalendarCurves c;
    for (std::size_t m = 0; m < 12; ++m)
        c.seasonal[m] = 1.0 + cfg.seasonal_amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(m) / 12.0 + phase);
    for (std::size_t d = 0; d < 7; ++d)
        c.weekday[d] = 1.0 + cfg.weekday_amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(d) / 7.0 + phase);
    const auto days = days_of_year(cfg.year);
    double mean = 0.0;
    for (const auto& d : days) mean += c.multiplier(d);
    mean /= static_cast<double>(days.size());
    for (double& s : c.seasonal) s /= mean;
    return c;
}

/// Seasonal expansion factors implied by the curves: annual average over the
/// month's expected average daily traffic. Axle factors are 1 (vehicle counts).
inline std::array<double, 12> true_seasonal_factors(const CalendarCurves& c, int year)
{
    std::array<double, 12> sum{};
    std::array<double, 12> n{};
    for (const auto& d : days_of_year(year)) {
        sum[month_of(d) - 1] += c.multiplier(d);
        n[month_of(d) - 1] += 1.0;
    }
    std::array<double, 12> f{};
    for (std::size_t m = 0; m < 12; ++m) f[m] = n[m] / sum[m];
    return f;
}

inline SynthDataset synth_generate(const SynthConfig& cfg)
{
    cfg.validate();
    tuning::SplitMix64 rng(cfg.seed);
    SynthDataset out;

    const auto days = days_of_year(cfg.year);
    std::array<CalendarCurves, 3> curves;
    std::array<std::array<double, 12>, 3> factors;
    for (ModelGroup g : kAllGroups) {
        curves[group_index(g)] = calendar_curves(cfg, g);
        factors[group_index(g)] = true_seasonal_factors(curves[group_index(g)], cfg.year);
    }
    for (std::size_t g = 0; g < 3; ++g) {
        const int code = kSynthClassCodes[g];
        const std::size_t other = (g + 1) % 3;
        out.true_factors.classes.push_back(code);
        out.true_factors.axle[code] = 1.0;
        out.true_factors.seasonal[code] = factors[g];
        out.misgrouped_factors.classes.push_back(code);
        out.misgrouped_factors.axle[code] = 1.0;
        out.misgrouped_factors.seasonal[code] = factors[other];
    }

    // Stations: county cfg.county, ids 101.., grouped Interstate, Arterial, Collector.
    std::array<std::vector<std::size_t>, 3> by_group;
    std::vector<std::vector<DailyCount>> full_year;
    int next_id = 101;
    for (ModelGroup g : kAllGroups) {
        const std::size_t gi = group_index(g);
        const auto profile = detail::normalized_profile(cfg, g);
        for (std::size_t s = 0; s < cfg.stations_per_group[gi]; ++s) {
            const StationKey key{cfg.county, next_id++};
            const auto range = cfg.aadt_range[gi];
            const double base = std::round(std::exp(std::log(range.low) + rng.uniform() * (std::log(range.high) - std::log(range.low))));
            std::vector<DailyCount> year_days;
            year_days.reserve(days.size());
            for (const auto& d : days) {
                double total = base * curves[gi].multiplier(d);
                if (cfg.noise_sigma > 0.0)
                    total *= std::exp(cfg.noise_sigma * detail::standard_normal(rng) - 0.5 * cfg.noise_sigma * cfg.noise_sigma);
                year_days.push_back(DailyCount{d, detail::apportion(std::llround(total), profile)});
            }
            double sum = 0.0;
            for (const auto& d : year_days) sum += static_cast<double>(total_volume(d));
            out.truth[key] = sum / static_cast<double>(year_days.size());
            out.meta.push_back({key, FunctionalClass{kSynthClassCodes[gi]}});
            by_group[gi].push_back(full_year.size());
            full_year.push_back(std::move(year_days));
        }
    }

    // Short-term counts: round-robin over groups and stations, one random day each, removed from ATR data.
    std::vector<std::set<std::size_t>> held(full_year.size());
    for (std::size_t c = 0; c < cfg.short_term_counts; ++c) {
        const std::size_t gi = c % 3;
        const std::size_t station = by_group[gi][(c / 3) % by_group[gi].size()];
        if (held[station].size() >= days.size()) throw Error(Errc::BadConfig, "more counts than days");
        std::size_t day;
        do day = static_cast<std::size_t>(rng.below(days.size()));
        while (held[station].count(day));
        held[station].insert(day);
        const auto& dc = full_year[station][day];
        ShortTermRecord rec;
        rec.key = out.meta[station].key;
        rec.date = dc.date;
        rec.fclass = out.meta[station].fclass;
        rec.growth_factor = 1.0;
        for (std::size_t h = 0; h < kHoursPerDay; ++h) rec.volumes[h] = static_cast<double>(dc.volumes[h]);
        out.short_term.push_back(rec);
    }

    for (std::size_t s = 0; s < full_year.size(); ++s) {
        AtrYearData data{out.meta[s].key, cfg.year, {}};
        for (std::size_t d = 0; d < full_year[s].size(); ++d)
            if (!held[s].count(d)) data.days.push_back(full_year[s][d]);
        out.atr.push_back(std::move(data));
    }
    return out;
}

/// Writes the dataset in the tool's input formats:
///   atr_list.csv, mapping.csv, atr/<county>_<station>.csv, counts.csv,
///   factors.csv, factors_misgrouped.csv, truth.csv (stations with counts only).
inline void write_synth_dataset(const SynthDataset& data, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir / "atr");
    write_text_file(dir / "atr_list.csv", write_atr_list(data.meta));
    std::string mapping = "FClass,Group\n";
    for (const auto& [code, group] : data.mapping.entries())
        mapping += std::to_string(code) + "," + std::string(group_name(group)) + "\n";
    write_text_file(dir / "mapping.csv", mapping);
    for (const auto& station : data.atr) write_text_file(dir / "atr" / atr_file_name(station.station), write_atr_file(station.days));
    write_text_file(dir / "counts.csv", write_short_term_counts(data.short_term));
    write_text_file(dir / "factors.csv", write_expansion_factors(data.true_factors));
    write_text_file(dir / "factors_misgrouped.csv", write_expansion_factors(data.misgrouped_factors));
    std::map<StationKey, double> truth;
    for (const auto& r : data.short_term) truth[r.key] = data.truth.at(r.key);
    write_text_file(dir / "truth.csv", write_truth(truth));
}

} // namespace aadt::eval
