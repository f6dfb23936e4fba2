#pragma once

// End-to-end estimation: training sets from ATR years, the three group models,
// the expansion-factor baseline, growth projection, and per-station aggregation.

#include "aadt/domain.hpp"
#include "aadt/error.hpp"
#include "aadt/ingest.hpp"
#include "aadt/svr.hpp"
#include "aadt/tuning.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace aadt {

/// Mean daily total over the complete days on file. Divides by the number of
/// days present rather than 365 so that recorder outages do not bias it low.
inline double compute_station_aadt(const AtrYearData& data)
{
    if (data.days.empty())
        throw Error(Errc::NoCompleteDays, "station " + to_string(data.station) + " has no complete days");
    double sum = 0.0;
    for (const auto& d : data.days) sum += static_cast<double>(total_volume(d));
    return sum / static_cast<double>(data.days.size());
}

struct TrainingSet {
    ModelGroup group = ModelGroup::Interstate;
    std::vector<svr::DaySample> samples;
    std::vector<double> targets; // AADT of the sample's station, vehicles/day

    std::size_t size() const noexcept { return samples.size(); }
};

using TrainingSets = std::array<TrainingSet, 3>;

/// Every complete day becomes one sample labelled with its station's AADT.
/// With `max_days_per_station` > 0 a station contributes at most that many
/// evenly spaced days (its AADT is still computed from all of them).
inline TrainingSets build_training_set(const std::vector<AtrYearData>& atr, const std::vector<AtrStationMeta>& meta,
                                       const GroupMapping& mapping, std::size_t max_days_per_station = 0)
{
    std::map<StationKey, FunctionalClass> classes;
    for (const auto& m : meta) classes[m.key] = m.fclass;

    TrainingSets sets;
    for (ModelGroup g : kAllGroups) sets[group_index(g)].group = g;
    for (const auto& station : atr) {
        auto it = classes.find(station.station);
        if (it == classes.end())
            throw Error(Errc::UnknownStation, "station " + to_string(station.station) + " is not in the ATR list");
        const ModelGroup group = map_class_to_group(it->second, mapping);
        const double aadt = compute_station_aadt(station);
        auto& set = sets[group_index(group)];
        const std::size_t n = station.days.size();
        const std::size_t take = max_days_per_station == 0 ? n : std::min(n, max_days_per_station);
        for (std::size_t k = 0; k < take; ++k) {
            set.samples.push_back(svr::to_sample(station.days[k * n / take]));
            set.targets.push_back(aadt);
        }
    }
    return sets;
}

/// FNV-1a over station keys, dates and volumes; identifies the ATR data a suite was fit on.
inline std::uint64_t atr_digest(const std::vector<AtrYearData>& atr)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::int64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= static_cast<std::uint64_t>(v >> (8 * b)) & 0xFFu;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& s : atr) {
        mix(s.station.county);
        mix(s.station.station);
        mix(s.year);
        for (const auto& d : s.days) {
            mix(std::chrono::sys_days{d.date}.time_since_epoch().count());
            for (auto v : d.volumes) mix(v);
        }
    }
    return h;
}

struct ModelSuite {
    std::array<std::optional<svr::SvrModel>, 3> models;
    std::array<std::string, 3> untrained_reason;
    int year = 0;
    std::uint64_t atr_digest = 0;

    bool trained(ModelGroup g) const { return models[group_index(g)].has_value(); }

    const svr::SvrModel& model(ModelGroup g) const
    {
        const auto& m = models[group_index(g)];
        if (!m)
            throw Error(Errc::UntrainedGroup, std::string(group_name(g)) + " model is not trained: " +
                                                  untrained_reason[group_index(g)]);
        return *m;
    }
};

/// Either search the grid per group, or fit directly with known (C, gamma).
using TrainingPlan = std::variant<tuning::GridSpec, HyperparamTable>;

struct TrainProgress {
    /// (units_done, units_total) across all groups; grid cells on the search
    /// path, final fits on the fixed path.
    std::function<void(std::size_t, std::size_t)> callback;
};

struct TrainResult {
    ModelSuite suite;
    HyperparamTable params;
    std::array<std::optional<tuning::CvResult>, 3> searches; // grid path only
};

inline TrainResult train_suite(const TrainingSets& sets, const TrainingPlan& plan,
                               const TrainProgress& progress = {}, double epsilon = svr::kDefaultEpsilon,
                               double tol = 1e-3)
{
    TrainResult out;
    const auto* grid = std::get_if<tuning::GridSpec>(&plan);
    if (const auto* fixed = std::get_if<HyperparamTable>(&plan)) out.params = *fixed;

    std::size_t groups_with_data = 0;
    for (const auto& s : sets) groups_with_data += s.size() > 0 ? 1 : 0;
    const std::size_t per_group = grid ? grid->c_values().size() * grid->gamma_values().size() + 1 : 1;
    const std::size_t total = per_group * groups_with_data;
    std::size_t base = 0;

    svr::SolverOptions opt;
    opt.tol = grid ? grid->tol : tol;
    const double eps = grid ? grid->epsilon : epsilon;

    for (ModelGroup g : kAllGroups) {
        const auto& set = sets[group_index(g)];
        if (set.size() == 0) {
            out.suite.untrained_reason[group_index(g)] = "no training samples for this group";
            continue;
        }
        if (grid) {
            auto cv = tuning::grid_search(set.samples, set.targets, *grid, [&](std::size_t done, std::size_t) {
                if (progress.callback) progress.callback(base + done, total);
            });
            out.params[g] = {cv.best.c, cv.best.gamma};
            out.searches[group_index(g)] = std::move(cv);
        }
        svr::SvrHyperparams hp{out.params[g].c, out.params[g].gamma, eps};
        out.suite.models[group_index(g)] = svr::train_model(set.samples, set.targets, hp, opt);
        base += per_group;
        if (progress.callback) progress.callback(base, total);
    }
    return out;
}

inline ShortTermRecord apply_growth_factor(const ShortTermRecord& rec)
{
    ShortTermRecord out = rec;
    for (double& v : out.volumes) v *= rec.growth_factor;
    out.growth_factor = 1.0;
    return out;
}

inline double svr_estimate(const ModelSuite& suite, const GroupMapping& mapping, const ShortTermRecord& rec)
{
    const ModelGroup group = map_class_to_group(rec.fclass, mapping);
    return svr::predict(suite.model(group), svr::to_sample(rec));
}

/// 24-hour total x axle factor x seasonal factor for the count's month.
inline double factor_estimate(const ExpansionFactorTable& table, const ShortTermRecord& rec)
{
    const unsigned month = month_of(rec.date);
    const double axle = table.axle_factor(rec.fclass);
    const double seasonal = table.seasonal_factor(rec.fclass, month);
    if (!(axle > 0.0) || !(seasonal > 0.0))
        throw Error(Errc::ZeroFactor, "class " + std::to_string(rec.fclass.code) + ", month " + std::to_string(month) +
                                          ": axle " + csv::format_double(axle) + ", seasonal " +
                                          csv::format_double(seasonal) + " (blank cells read as 0)");
    return total_volume(rec) * axle * seasonal;
}

struct RecordEstimate {
    StationKey key;
    FunctionalClass fclass;
    double svr = 0.0;
    double factor = 0.0;
};

/// Growth projection then both estimators, one result per input record.
inline std::vector<RecordEstimate> estimate_records(const std::vector<ShortTermRecord>& records,
                                                    const ModelSuite& suite, const GroupMapping& mapping,
                                                    const ExpansionFactorTable& factors)
{
    std::vector<RecordEstimate> out;
    out.reserve(records.size());
    for (const auto& raw : records) {
        const ShortTermRecord rec = apply_growth_factor(raw);
        out.push_back({rec.key, rec.fclass, svr_estimate(suite, mapping, rec), factor_estimate(factors, rec)});
    }
    return out;
}

/// One row per station in order of first appearance; estimates are averaged
/// and rounded half away from zero.
inline std::vector<EstimateRecord> aggregate_estimates(const std::vector<RecordEstimate>& per_record)
{
    struct Acc {
        FunctionalClass fclass;
        double svr = 0.0, factor = 0.0;
        std::size_t n = 0;
    };
    std::vector<StationKey> order;
    std::map<StationKey, Acc> acc;
    for (const auto& r : per_record) {
        auto [it, inserted] = acc.try_emplace(r.key, Acc{r.fclass});
        if (inserted) order.push_back(r.key);
        else if (it->second.fclass != r.fclass)
            throw Error(Errc::InconsistentClass, "station " + to_string(r.key) + " appears with classes " +
                                                     std::to_string(it->second.fclass.code) + " and " +
                                                     std::to_string(r.fclass.code));
        it->second.svr += r.svr;
        it->second.factor += r.factor;
        ++it->second.n;
    }
    std::vector<EstimateRecord> out;
    out.reserve(order.size());
    for (const auto& key : order) {
        const auto& a = acc.at(key);
        const double n = static_cast<double>(a.n);
        out.push_back({key, a.fclass, static_cast<std::int64_t>(std::llround(a.svr / n)),
                       static_cast<std::int64_t>(std::llround(a.factor / n))});
    }
    return out;
}

} // namespace aadt
